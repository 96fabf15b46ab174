use crate::quad::cut_cell_rules;
use crate::solve::{run_solve, Field, ProblemSpec, SolverMode, SolverOptions};
use crate::Result;

/// One row of the solver comparison table.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CompareRow {
    pub mode: String,
    pub iterations: Option<usize>,
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
    /// relative L2 difference against the first mode's solution
    pub l2_vs_first: f64,
}

/// Run the same problem through the requested solver modes and report
/// iterations, timings, and mutual solution agreement.
pub fn compare_solvers(
    spec: &ProblemSpec,
    modes: &[SolverMode],
    opts: &SolverOptions,
) -> Result<Vec<CompareRow>> {
    let rules = spec
        .lattice
        .cells
        .iter()
        .map(|c| cut_cell_rules(c, &spec.quad))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut first: Option<(Field, f64)> = None;
    for &mode in modes {
        let (field, report) = run_solve(spec, mode, None, opts)?;
        let l2 = match &first {
            None => {
                let zero = Field {
                    p: spec.p,
                    cells: vec![
                        nalgebra::DVector::zeros(field.cells[0].len());
                        spec.lattice.n_cells()
                    ],
                };
                let norm = field.l2_difference(&zero, &spec.lattice, &rules);
                first = Some((field.clone(), norm));
                0.0
            }
            Some((reference, norm)) => {
                field.l2_difference(reference, &spec.lattice, &rules) / norm.max(1e-300)
            }
        };
        rows.push(CompareRow {
            mode: report.mode.clone(),
            iterations: report.iterations,
            setup_s: report.timings.setup,
            solve_s: report.timings.solve,
            total_s: report.timings.total,
            l2_vs_first: l2,
        });
    }
    Ok(rows)
}
