//! 2D linear elasticity on lattice structures whose cells are implicitly
//! trimmed by level-set functions.
//!
//! Each lattice cell is the image of the unit square under a smooth map and
//! carries a level-set `phi0` together with a bilinear threshold field `mu`;
//! the active material occupies `{phi0 - mu < 0}`. Cells are discretized by a
//! single high-order element on Gauss-Lobatto-Legendre nodes and the global
//! problem is solved with conjugate gradients preconditioned by balancing
//! domain decomposition by constraints (BDDC), one subdomain per cell.
//!
//! Stiffness assembly is accelerated by factoring the cut-domain integrals
//! into a map-independent tensor that can be approximated online by a
//! matrix discrete empirical interpolation (MDEIM) surrogate trained offline
//! over the threshold-parameter space.

pub mod bddc;
pub mod drivers;
pub mod element;
pub mod error;
pub mod geometry;
pub mod io;
pub mod norms;
pub mod quad;
pub mod rom;
pub mod solve;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
