//! Self-affine tiles and attractors: digit expansions, exact tile tests, box
//! tiles in cyclic normal form, tile-based Haar systems, and the
//! classification of one-dimensional integer tiles.

#![allow(clippy::needless_range_loop)]

pub mod attractor;
pub mod boxtile;
pub mod error;
pub mod haar;
pub mod hull;
pub mod lattice;
mod linalg;
pub mod oned;

pub use attractor::{
    approximate, approximate_capped, approximate_real, bounding_box, measure_upper,
    rasterize, self_similarity_residual, shift_cover_layers, tile_check_exact, AttractorApprox,
    ContactMatrix, Raster, RealApprox, TileReport, TileVerdict,
};
pub use error::{Error, Result};
pub use lattice::{
    det, is_expanding, residue_of, residue_system, validate_digits, DigitSet, IntMatrix, ShiftSet,
};
pub use linalg::RealMatrix;
