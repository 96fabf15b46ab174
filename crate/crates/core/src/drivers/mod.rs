//! Benchmark and application drivers.

pub mod annulus;
pub mod compare;
pub mod demo;
pub mod manufactured;
pub mod romtrain;

pub use annulus::{
    annulus_lattice, annulus_lattice_grid, annulus_material, annulus_problem, fast_vs_full_l2,
    run_annulus_suite, sweep_fast_q, sweep_rho, AnnulusRow, QSweepRow, RhoSweepRow,
};
pub use compare::{compare_solvers, CompareRow};
pub use demo::{run_demo, wing_lattice, wing_problem, wrench_lattice, wrench_problem, DemoName};
pub use manufactured::{
    manufactured_problem, run_manufactured, solve_manufactured, ConvergenceRow, Manufactured,
};
pub use romtrain::{train_rom, ClusterSummary};
