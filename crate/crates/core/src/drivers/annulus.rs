use crate::element::MaterialLaw;
use crate::geometry::{
    build_tensor_lattice, AuxMap, BoundaryCondition, DirichletData, Lattice, LevelSet,
    TensorBcTags, ThresholdField, TractionData,
};
use crate::rom::RomModel;
use crate::solve::{run_solve, ProblemSpec, RunReport, SolverMode, SolverOptions};
use crate::Result;

/// Quarter-annulus benchmark lattice: `2n x n` cells of a Schwarz-diamond
/// lattice between radii 0.6 and 1, threshold graded from 0.9 at the clamped
/// end down to 0.1 at the loaded end, with a downward unit-direction
/// traction of magnitude 0.1 on the far radial edge.
pub fn annulus_lattice(n: usize) -> Lattice {
    build_tensor_lattice(
        AuxMap::QuarterAnnulus { r0: 0.6, r1: 1.0 },
        2 * n,
        n,
        LevelSet::SchwarzDiamond,
        &ThresholdField::Affine { c0: 0.9, c1: -0.8, c2: 0.0 },
        &TensorBcTags {
            left: BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0])),
            right: BoundaryCondition::Traction(TractionData::Constant([0.0, -0.1])),
            ..Default::default()
        },
    )
}

/// Material of the benchmark: E = 5, nu = 0.25, plane strain.
pub fn annulus_material() -> MaterialLaw {
    MaterialLaw::from_youngs(5.0, 0.25, true)
}

/// Problem spec of the benchmark at size `n` (cells: `2n x n`).
pub fn annulus_problem(n: usize, p: usize, q: usize, rho: f64) -> ProblemSpec {
    ProblemSpec::new(annulus_lattice(n), annulus_material(), p, q, rho)
}

/// One row of the scalability suite.
#[derive(Clone, Debug, serde::Serialize)]
pub struct AnnulusRow {
    pub n: usize,
    pub n_cells: usize,
    pub n_dofs: usize,
    pub n_interface: usize,
    pub iterations: usize,
    pub assembly_s: f64,
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

impl AnnulusRow {
    pub fn from_report(n: usize, r: &RunReport) -> Self {
        AnnulusRow {
            n,
            n_cells: r.n_cells,
            n_dofs: r.n_dofs,
            n_interface: r.n_interface,
            iterations: r.iterations.unwrap_or(0),
            assembly_s: r.timings.assembly,
            setup_s: r.timings.setup,
            solve_s: r.timings.solve,
            total_s: r.timings.total,
        }
    }
}

/// Run the benchmark over a list of sizes with the given solver mode.
pub fn run_annulus_suite(
    sizes: &[usize],
    p: usize,
    q: usize,
    rho: f64,
    mode: SolverMode,
    rom: Option<&RomModel>,
    opts: &SolverOptions,
) -> Result<Vec<AnnulusRow>> {
    let mut rows = Vec::new();
    for &n in sizes {
        let spec = annulus_problem(n, p, q, rho);
        let (_, report) = run_solve(&spec, mode, rom, opts)?;
        rows.push(AnnulusRow::from_report(n, &report));
    }
    Ok(rows)
}


/// Benchmark lattice with explicit grid counts (the suite uses `2n x n`).
pub fn annulus_lattice_grid(n1: usize, n2: usize) -> Lattice {
    build_tensor_lattice(
        AuxMap::QuarterAnnulus { r0: 0.6, r1: 1.0 },
        n1,
        n2,
        LevelSet::SchwarzDiamond,
        &ThresholdField::Affine { c0: 0.9, c1: -0.8, c2: 0.0 },
        &TensorBcTags {
            left: BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0])),
            right: BoundaryCondition::Traction(TractionData::Constant([0.0, -0.1])),
            ..Default::default()
        },
    )
}

/// Relative L2 difference between the fast-assembled and fully integrated
/// solutions of the benchmark at interpolation degree `q`.
pub fn fast_vs_full_l2(n1: usize, n2: usize, p: usize, q: usize, rho: f64) -> Result<f64> {
    use crate::quad::cut_cell_rules;
    use crate::solve::{run_solve_with, LinearSolver, StiffnessMode};
    let spec = ProblemSpec::new(annulus_lattice_grid(n1, n2), annulus_material(), p, q, rho);
    let opts = SolverOptions { tol: 1e-10, max_it: 2000, sor_omega: 1.0 };
    let (u_fast, _) = run_solve_with(&spec, &StiffnessMode::Fast, LinearSolver::Bddc, &opts)?;
    let (u_full, _) = run_solve_with(&spec, &StiffnessMode::Full, LinearSolver::Bddc, &opts)?;
    let rules = spec
        .lattice
        .cells
        .iter()
        .map(|c| cut_cell_rules(c, &spec.quad))
        .collect::<Result<Vec<_>>>()?;
    let zero = crate::solve::Field {
        p,
        cells: vec![nalgebra::DVector::zeros(u_full.cells[0].len()); spec.lattice.n_cells()],
    };
    let norm = u_full.l2_difference(&zero, &spec.lattice, &rules);
    Ok(u_fast.l2_difference(&u_full, &spec.lattice, &rules) / norm.max(1e-300))
}

/// One row of the interpolation-degree sweep.
#[derive(Clone, Debug, serde::Serialize)]
pub struct QSweepRow {
    pub n1: usize,
    pub n2: usize,
    pub q: usize,
    pub l2_rel_diff: f64,
}

pub fn sweep_fast_q(n1: usize, n2: usize, p: usize, qs: &[usize], rho: f64) -> Result<Vec<QSweepRow>> {
    qs.iter()
        .map(|&q| Ok(QSweepRow { n1, n2, q, l2_rel_diff: fast_vs_full_l2(n1, n2, p, q, rho)? }))
        .collect()
}

/// One row of the stabilization sweep: L2 difference of the stabilized
/// solution against the unstabilized one, full integration throughout.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RhoSweepRow {
    pub n: usize,
    pub rho: f64,
    pub l2_rel_diff: f64,
}

pub fn sweep_rho(n: usize, p: usize, q: usize, rhos: &[f64]) -> Result<Vec<RhoSweepRow>> {
    use crate::quad::cut_cell_rules;
    let opts = SolverOptions { tol: 1e-10, max_it: 2000, sor_omega: 1.0 };
    let base = annulus_problem(n, p, q, 0.0);
    let (u0, _) = run_solve(&base, SolverMode::BddcFull, None, &opts)?;
    let rules = base
        .lattice
        .cells
        .iter()
        .map(|c| cut_cell_rules(c, &base.quad))
        .collect::<Result<Vec<_>>>()?;
    let zero = crate::solve::Field {
        p,
        cells: vec![nalgebra::DVector::zeros(u0.cells[0].len()); base.lattice.n_cells()],
    };
    let norm = u0.l2_difference(&zero, &base.lattice, &rules);
    let mut rows = Vec::new();
    for &rho in rhos {
        let spec = annulus_problem(n, p, q, rho);
        let (u, _) = run_solve(&spec, SolverMode::BddcFull, None, &opts)?;
        rows.push(RhoSweepRow {
            n,
            rho,
            l2_rel_diff: u.l2_difference(&u0, &base.lattice, &rules) / norm.max(1e-300),
        });
    }
    Ok(rows)
}
