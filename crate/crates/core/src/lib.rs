//! Exact minimum convex partition of planar point sets.
//!
//! The solver works on the set-partition formulation over empty convex
//! polygons, with one equality row per wedge (an arrangement face incident to
//! an input point), edge variables linking polygons to their boundary edges,
//! and separated degree cuts. Columns are priced by an O(n^3) dynamic program
//! over last triangles, and the search branches on edge variables.

pub mod compact;
pub mod error;
pub mod geometry;
pub mod heuristics;
pub mod instance;
pub mod io;
pub mod lp;
pub mod master;
pub mod oracle;
pub mod par;
pub mod partition;
pub mod polygon;
pub mod pricing;
pub mod search;
pub mod wedge;

pub use error::{Error, Result};
pub use geometry::{EdgeId, Orientation, Point, PointSet};
pub use polygon::{ConvexPolygon, EmptyTriangleTable};
pub use wedge::{WedgeId, WedgeIndex};
