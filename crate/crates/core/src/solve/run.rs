use std::time::Instant;

use nalgebra::DVector;
use serde::Serialize;

use crate::bddc::{classify_dofs, BddcOperators, PhaseTimings};
use crate::rom::RomModel;
use crate::{Error, Result};

use super::problem::{assemble_elements, partition_elements, Field, ProblemSpec, StiffnessMode};
use super::sparse::{rcm_order, ssor_pcg, BandedLdlt, Csr};

/// Solver selection of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    BddcRom,
    BddcFull,
    Cholesky,
    CgSor,
}

impl SolverMode {
    pub fn name(&self) -> &'static str {
        match self {
            SolverMode::BddcRom => "bddc-rom",
            SolverMode::BddcFull => "bddc-full",
            SolverMode::Cholesky => "cholesky",
            SolverMode::CgSor => "cg-sor",
        }
    }
}

/// Iteration controls shared by the iterative modes.
#[derive(Clone, Copy, Debug, Serialize, serde::Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_it: usize,
    /// relaxation factor of the SSOR preconditioner
    pub sor_omega: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_it: 1000, sor_omega: 1.0 }
    }
}

/// Counters and timings of one solve.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub mode: String,
    pub n_cells: usize,
    /// unknowns of the condensed-plus-interior system (excludes Dirichlet)
    pub n_dofs: usize,
    pub n_interface: usize,
    pub n_interface_redundant: usize,
    pub n_dirichlet: usize,
    pub iterations: Option<usize>,
    pub converged: bool,
    #[serde(skip)]
    pub residual_history: Vec<f64>,
    pub timings: PhaseTimings,
}

/// Linear solver applied to the assembled problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearSolver {
    Bddc,
    Cholesky,
    CgSor,
}

/// Full pipeline: classify dofs, assemble per-cell matrices along the
/// selected stiffness path, run the selected solver, and recover the
/// displacement field.
pub fn run_solve(
    spec: &ProblemSpec,
    mode: SolverMode,
    rom: Option<&RomModel>,
    opts: &SolverOptions,
) -> Result<(Field, RunReport)> {
    let (stiffness, solver) = match mode {
        SolverMode::BddcRom => {
            let rom = rom.ok_or_else(|| {
                Error::Config("mode bddc-rom requires a trained surrogate artifact".into())
            })?;
            (StiffnessMode::Rom(rom), LinearSolver::Bddc)
        }
        SolverMode::BddcFull => (StiffnessMode::Full, LinearSolver::Bddc),
        SolverMode::Cholesky => (StiffnessMode::Full, LinearSolver::Cholesky),
        SolverMode::CgSor => (StiffnessMode::Full, LinearSolver::CgSor),
    };
    let (field, mut report) = run_solve_with(spec, &stiffness, solver, opts)?;
    report.mode = mode.name().to_string();
    if !report.converged {
        let res = report.residual_history.last().copied().unwrap_or(f64::NAN);
        return Err(Error::MaxIterations {
            iterations: report.iterations.unwrap_or(opts.max_it),
            residual: res,
        });
    }
    Ok((field, report))
}

/// Pipeline with an explicit stiffness path and linear solver; does not
/// error on non-convergence (the report carries the flag).
pub fn run_solve_with(
    spec: &ProblemSpec,
    stiffness: &StiffnessMode,
    solver: LinearSolver,
    opts: &SolverOptions,
) -> Result<(Field, RunReport)> {
    let t_start = Instant::now();
    let partition = classify_dofs(&spec.lattice, spec.p)?;

    let t_assembly = Instant::now();
    let raw = assemble_elements(spec, stiffness)?;
    let elements = partition_elements(&partition, &raw);
    drop(raw);
    let assembly_s = t_assembly.elapsed().as_secs_f64();

    let n_interior_total: usize = partition.cells.iter().map(|c| c.interior.len()).sum();
    let n_dirichlet = count_distinct_dirichlet(&partition);
    let mut report = RunReport {
        mode: match (stiffness, solver) {
            (StiffnessMode::Full, LinearSolver::Bddc) => "bddc-full",
            (StiffnessMode::Fast, LinearSolver::Bddc) => "bddc-fast",
            (StiffnessMode::Rom(_), LinearSolver::Bddc) => "bddc-rom",
            (_, LinearSolver::Cholesky) => "cholesky",
            (_, LinearSolver::CgSor) => "cg-sor",
        }
        .to_string(),
        n_cells: spec.lattice.n_cells(),
        n_dofs: n_interior_total + partition.n_skeleton,
        n_interface: partition.n_skeleton,
        n_interface_redundant: partition.n_total_skeleton(),
        n_dirichlet,
        iterations: None,
        converged: true,
        residual_history: Vec::new(),
        timings: PhaseTimings::default(),
    };

    let field = match solver {
        LinearSolver::Bddc => {
            let t_setup = Instant::now();
            let ops = BddcOperators::build(&spec.lattice, partition, &elements)?;
            report.timings.setup = t_setup.elapsed().as_secs_f64();
            let t_solve = Instant::now();
            let (u, pcg_report) = ops.solve_interface(opts.tol, opts.max_it);
            report.iterations = Some(pcg_report.iterations);
            report.converged = pcg_report.converged;
            report.residual_history = pcg_report.residual_history;
            let cells = ops.recover_cells(&u);
            report.timings.solve = t_solve.elapsed().as_secs_f64();
            Field { p: spec.p, cells }
        }
        LinearSolver::Cholesky => {
            let t_setup = Instant::now();
            let (csr, rhs, offsets) = assemble_global(&partition, &elements, n_interior_total);
            let order = rcm_order(&csr);
            let chol = BandedLdlt::factor(&csr, order)?;
            report.timings.setup = t_setup.elapsed().as_secs_f64();
            let t_solve = Instant::now();
            let x = chol.solve(&rhs);
            report.timings.solve = t_solve.elapsed().as_secs_f64();
            split_solution(&partition, &x, &offsets, n_interior_total, spec.p)
        }
        LinearSolver::CgSor => {
            let t_setup = Instant::now();
            let (csr, rhs, offsets) = assemble_global(&partition, &elements, n_interior_total);
            report.timings.setup = t_setup.elapsed().as_secs_f64();
            let t_solve = Instant::now();
            let (x, its, history, converged) =
                ssor_pcg(&csr, &rhs, opts.sor_omega, opts.tol, opts.max_it);
            report.iterations = Some(its);
            report.converged = converged;
            report.residual_history = history;
            report.timings.solve = t_solve.elapsed().as_secs_f64();
            split_solution(&partition, &x, &offsets, n_interior_total, spec.p)
        }
    };

    report.timings.assembly = assembly_s;
    report.timings.total = t_start.elapsed().as_secs_f64();
    Ok((field, report))
}

fn count_distinct_dirichlet(partition: &crate::bddc::DofPartition) -> usize {
    let mut classes = std::collections::HashSet::new();
    for (cell, nodes) in partition.node_class.iter().enumerate() {
        let _ = cell;
        for &cls in nodes {
            if partition.class_is_dirichlet[cls] {
                classes.insert(cls);
            }
        }
    }
    2 * classes.len()
}

/// Assemble the condensed global system (interiors stacked per cell, then
/// the non-redundant skeleton) in CSR form.
fn assemble_global(
    partition: &crate::bddc::DofPartition,
    elements: &[crate::element::ElementMatrices],
    n_interior_total: usize,
) -> (Csr, DVector<f64>, Vec<usize>) {
    let n = n_interior_total + partition.n_skeleton;
    let mut offsets = Vec::with_capacity(elements.len());
    let mut off = 0usize;
    for cd in &partition.cells {
        offsets.push(off);
        off += cd.interior.len();
    }
    let mut triplets = Vec::new();
    let mut rhs = DVector::zeros(n);
    for (i, em) in elements.iter().enumerate() {
        let cd = &partition.cells[i];
        let off = offsets[i];
        let n_i = cd.interior.len();
        let n_u = cd.skeleton.len();
        for r in 0..n_i {
            rhs[off + r] += em.f_i[r];
            for c in 0..n_i {
                triplets.push((off + r, off + c, em.k_ii[(r, c)]));
            }
            for c in 0..n_u {
                let g = n_interior_total + cd.skeleton_global[c];
                triplets.push((off + r, g, em.k_iu[(r, c)]));
                triplets.push((g, off + r, em.k_iu[(r, c)]));
            }
        }
        for r in 0..n_u {
            let gr = n_interior_total + cd.skeleton_global[r];
            rhs[gr] += em.f_u[r];
            for c in 0..n_u {
                let gc = n_interior_total + cd.skeleton_global[c];
                triplets.push((gr, gc, em.k_uu[(r, c)]));
            }
        }
    }
    (Csr::from_triplets(n, &mut triplets), rhs, offsets)
}

fn split_solution(
    partition: &crate::bddc::DofPartition,
    x: &DVector<f64>,
    offsets: &[usize],
    n_interior_total: usize,
    p: usize,
) -> Field {
    let ndof = 2 * (p + 1) * (p + 1);
    let cells = partition
        .cells
        .iter()
        .enumerate()
        .map(|(i, cd)| {
            let mut full = DVector::zeros(ndof);
            for (loc, &dof) in cd.interior.iter().enumerate() {
                full[dof] = x[offsets[i] + loc];
            }
            for (loc, &dof) in cd.skeleton.iter().enumerate() {
                full[dof] = x[n_interior_total + cd.skeleton_global[loc]];
            }
            for (loc, &dof) in cd.dirichlet.iter().enumerate() {
                full[dof] = cd.u_d[loc];
            }
            full
        })
        .collect();
    Field { p, cells }
}
