//! Global solves: matrix-free BDDC-preconditioned CG plus full-system
//! direct and SSOR-CG comparison modes, with shared sparse kernels.

mod problem;
mod run;
pub mod sparse;

pub use problem::{
    assemble_cell, assemble_elements, partition_elements, Field, ForceMode, ProblemSpec,
    StiffnessMode, TractionField, VectorField,
};
pub use run::{run_solve, run_solve_with, LinearSolver, RunReport, SolverMode, SolverOptions};
pub use sparse::{rcm_order, ssor_pcg, BandedLdlt, Csr};
