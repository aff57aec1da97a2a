//! Parallel-set volume and surface profiles of compact sets in R^2 and R^3.

// NaN-rejecting guards are written as negated comparisons; grid kernels index
// several arrays with one loop variable.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod contents;
pub mod edt;
pub mod error;
pub mod estimate;
pub mod gasket;
pub mod grid;
pub mod io;
pub mod isosurface;
pub mod profile;
pub mod selfsimilar;
pub mod shapes;
pub mod stochastic;

pub use edt::{brute_edt, exact_edt, DistanceField};
pub use error::{Error, Result};
pub use estimate::{sample_profile, surface_at, volume_at, volumes_at, SurfaceMethod};
pub use grid::{make_grid, mask_from_points, BinaryMask, BoundingBox, GridSpec};
pub use profile::{geometric_radii, RadialProfile, Source};
pub use shapes::{grid_shape_profile, shape_grid, shape_profile, Shape};
