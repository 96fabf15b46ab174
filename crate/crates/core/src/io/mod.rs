//! File formats: lattice descriptions, problem configurations, surrogate
//! artifacts (see [`crate::rom`]), and field export.

pub mod config;
pub mod export;
pub mod schema;

pub use config::{
    DiscretizationSpec, LatticeSource, MaterialSpec, ProblemConfig, QuadratureSpec, SolverSpec,
};
pub use export::{export_fields, write_csv};
pub use schema::{
    AuxMapSpec, BcSpec, BoundaryTag, CellSpec, GeometrySpec, LatticeFile, MapSpec, SideTags,
};
