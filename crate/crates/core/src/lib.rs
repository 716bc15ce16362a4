//! Hilbert geometries of properly convex projective sets.

pub mod benzecri;
pub mod body;
pub mod error;
pub mod group;
pub mod hilbert;
pub mod linalg;
pub mod projective;
pub mod render;
pub mod sampling;
pub mod scan;
pub mod verify;

pub use error::{HilbertError, Result};
pub use projective::{
    apply_map, chart_coords, cross_ratio, det_normalize, AffineChart, ProjectiveMap,
    ProjectivePoint,
};
