//! Offline-trained surrogate of the parametric fast-assembly tensor:
//! threshold-space clustering, Latin hypercube snapshots, a randomized
//! decomposition, greedy interpolation-entry selection, and tensor-grid
//! Lagrange interpolation of the reduced coefficients.

mod artifact;
mod cluster;
mod interp;
mod magic;
mod sampling;
mod train;

pub use artifact::{load_manifest, load_model, save_model, ClusterManifest, Manifest};
pub use cluster::ClusterGrid;
pub use interp::CoefficientInterpolant;
pub use magic::select_magic_points;
pub use sampling::{lhs_sample, randomized_svd};
pub use train::{
    full_tensor_flat, projection_error_for_basis, rom_validation_error, train_cluster,
    train_model, ClusterRom, RomMeta, RomModel, TrainOptions,
};
