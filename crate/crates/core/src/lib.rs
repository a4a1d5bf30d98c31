//! Liouville measures, finite earthquakes and geodesic currents on the unit disk.
//!
//! Boundary points are angles on the unit circle. Boxes of geodesics are pairs of
//! disjoint counterclockwise arcs, and currents are evaluated box by box.

pub mod circle_map;
pub mod currents;
pub mod earthquakes;
pub mod error;
pub mod laminations;
pub mod liouville;
pub mod mobius;
mod precise;
pub mod random;

pub use circle_map::{CircleMap, MobiusWord};
pub use currents::{Current, IsometrySampler};
pub use earthquakes::{build_earthquake, EarthquakeMap};
pub use error::{Error, Result};
pub use laminations::{FiniteLamination, Leaf};
pub use liouville::{BoundaryMode, GeodesicBox};
pub use mobius::{BoundaryPoint, Geodesic, MobiusMap};
