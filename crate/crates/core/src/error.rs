use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive jacobian determinant {det:.3e} at parametric point ({xi1}, {xi2}) of cell {cell}")]
    NonPositiveJacobian { cell: usize, xi1: f64, xi2: f64, det: f64 },

    #[error("root bracketing failed on cut leaf [{x0},{x1}]x[{y0},{y1}] of cell {cell}")]
    RootFindFailure { cell: usize, x0: f64, x1: f64, y0: f64, y1: f64 },

    #[error("stiffness block of cell {cell} is numerically singular (condition estimate {cond:.3e})")]
    SingularCell { cell: usize, cond: f64 },

    #[error("interior block of cell {cell} is singular; floating cell without stabilization or constraints")]
    SingularInterior { cell: usize },

    #[error("tensor/interpolant shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("threshold parameter {value} of component {component} lies outside the training hypercube [{lo}, {hi}]")]
    OutOfTrainingDomain { component: usize, value: f64, lo: f64, hi: f64 },

    #[error("surrogate model mismatch: {0}")]
    ModelMismatch(String),

    #[error("reduced basis column {column} has zero residual; cannot select further interpolation entries")]
    DegenerateBasis { column: usize },

    #[error("edge {edge} of cell {cell} mixes boundary-condition kinds across displacement components")]
    MixedBoundaryCondition { cell: usize, edge: String },

    #[error("local constraint saddle system of cell {cell} is singular (constraint rank {rank})")]
    SaddleSingular { cell: usize, rank: usize },

    #[error("reduced interface operator of cell {cell} is singular after crosspoint elimination")]
    SingularReducedS { cell: usize },

    #[error("zero stiffness diagonal at skeleton dof {dof} of cell {cell}")]
    ZeroDiagonal { cell: usize, dof: usize },

    #[error("conjugate gradients reached {iterations} iterations without converging (relative residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("artifact format error: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
