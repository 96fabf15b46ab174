//! Level-set trimmed cells, geometric maps, and lattice assembly.

mod cell;
mod lattice;
mod levelset;
mod map;

pub use cell::Cell;
pub use lattice::{
    build_tensor_lattice, BoundaryCondition, BoundaryEdge, DirichletData, Edge, Interface,
    Lattice, TensorBcTags, ThresholdField, TractionData, Violation,
};
pub use levelset::{CustomLevelSet, LevelSet, ThresholdParams};
pub use map::{AuxMap, CellMap, CustomMap, MapEval};
