//! Error norms of discrete fields against closed-form references.

use rayon::prelude::*;

use crate::element::GllBasis;
use crate::geometry::Lattice;
use crate::quad::CutCellRules;
use crate::solve::Field;

/// Absolute and relative L2 errors of a field against an exact solution,
/// integrated over the trimmed physical domain with the per-cell rules.
pub fn compute_error_norms(
    field: &Field,
    exact: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
    lattice: &Lattice,
    rules: &[CutCellRules],
) -> (f64, f64) {
    let basis = GllBasis::new(field.p);
    let (err2, ref2): (f64, f64) = (0..lattice.n_cells())
        .into_par_iter()
        .map(|i| {
            let mut e = 0.0;
            let mut r = 0.0;
            for (pt, w) in rules[i].interior.points.iter().zip(&rules[i].interior.weights) {
                let ev = lattice.cells[i].map.eval_unchecked(pt[0], pt[1]);
                let uh = field.eval(&basis, i, pt[0], pt[1]);
                let ue = exact(ev.x);
                let jw = w * ev.det.abs();
                let d = [uh[0] - ue[0], uh[1] - ue[1]];
                e += jw * (d[0] * d[0] + d[1] * d[1]);
                r += jw * (ue[0] * ue[0] + ue[1] * ue[1]);
            }
            (e, r)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let abs = err2.sqrt();
    let rel = if ref2 > 0.0 { abs / ref2.sqrt() } else { abs };
    (abs, rel)
}
