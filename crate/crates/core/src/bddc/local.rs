use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::element::ElementMatrices;
use crate::{Error, Result};

use super::dofs::DofPartition;

/// Symmetric factorization with an LU fallback for semidefinite corner
/// cases.
pub enum SymFactor {
    Chol(Cholesky<f64, Dyn>),
    Lu(Box<LU<f64, Dyn, Dyn>>),
    Empty,
}

impl SymFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        if m.nrows() == 0 {
            return Some(SymFactor::Empty);
        }
        let scale = m.diagonal().amax();
        match m.clone().cholesky() {
            Some(c) => Some(SymFactor::Chol(c)),
            None => {
                let lu = m.lu();
                let diag = lu.u().diagonal();
                let dmax = diag.amax();
                if dmax <= 0.0 || diag.iter().any(|d| d.abs() <= 1e-14 * dmax.max(scale)) {
                    None
                } else {
                    Some(SymFactor::Lu(Box::new(lu)))
                }
            }
        }
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> DVector<f64> {
        match self {
            SymFactor::Chol(c) => c.solve(b),
            SymFactor::Lu(lu) => lu.solve(b).expect("factorized"),
            SymFactor::Empty => DVector::zeros(0),
        }
    }

    pub fn solve_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            SymFactor::Chol(c) => c.solve(b),
            SymFactor::Lu(lu) => lu.solve(b).expect("factorized"),
            SymFactor::Empty => DMatrix::zeros(0, b.ncols()),
        }
    }
}

/// Condensed interface operator of one cell: the Schur complement, the
/// condensed force, and the pieces needed to recover interior values.
pub struct SchurOps {
    pub s: DMatrix<f64>,
    pub f: DVector<f64>,
    pub kii_lu: Option<Box<LU<f64, Dyn, Dyn>>>,
    pub k_iu: DMatrix<f64>,
    pub f_i: DVector<f64>,
}

/// Forms `S = K_UU - K_UI K_II^{-1} K_IU` through multi-right-hand-side
/// solves; the interior inverse is never formed explicitly.
pub fn schur(cell: usize, em: &ElementMatrices) -> Result<SchurOps> {
    let n_i = em.k_ii.nrows();
    if n_i == 0 {
        return Ok(SchurOps {
            s: em.k_uu.clone(),
            f: em.f_u.clone(),
            kii_lu: None,
            k_iu: em.k_iu.clone(),
            f_i: em.f_i.clone(),
        });
    }
    let lu = em.k_ii.clone().lu();
    let diag = lu.u().diagonal();
    let dmax = diag.amax();
    if dmax <= 0.0 || diag.iter().any(|d| d.abs() <= 1e-14 * dmax) {
        return Err(Error::SingularInterior { cell });
    }
    let x = lu.solve(&em.k_iu).expect("factorized");
    let y = lu.solve(&em.f_i).expect("factorized");
    let mut s = &em.k_uu - em.k_iu.transpose() * &x;
    let f = &em.f_u - em.k_iu.transpose() * &y;
    let n = s.nrows();
    for r in 0..n {
        for c in (r + 1)..n {
            let avg = 0.5 * (s[(r, c)] + s[(c, r)]);
            s[(r, c)] = avg;
            s[(c, r)] = avg;
        }
    }
    Ok(SchurOps { s, f, kii_lu: Some(Box::new(lu)), k_iu: em.k_iu.clone(), f_i: em.f_i.clone() })
}

/// Stiffness-proportional interface weights: the diagonal entry of the full
/// cell matrix divided by the sum over all cells sharing the dof.
pub fn partition_of_unity(
    partition: &DofPartition,
    elements: &[ElementMatrices],
) -> Result<Vec<DVector<f64>>> {
    let mut totals = vec![0.0f64; partition.n_skeleton];
    for (cell, cd) in partition.cells.iter().enumerate() {
        for (loc, &gid) in cd.skeleton_global.iter().enumerate() {
            totals[gid] += elements[cell].k_uu[(loc, loc)];
        }
    }
    let mut out = Vec::with_capacity(partition.cells.len());
    for (cell, cd) in partition.cells.iter().enumerate() {
        let mut w = DVector::zeros(cd.skeleton.len());
        for (loc, &gid) in cd.skeleton_global.iter().enumerate() {
            if totals[gid] <= 0.0 {
                return Err(Error::ZeroDiagonal { cell, dof: cd.skeleton[loc] });
            }
            w[loc] = elements[cell].k_uu[(loc, loc)] / totals[gid];
        }
        out.push(w);
    }
    Ok(out)
}

/// Constrained local solver: eliminates crosspoint constraints strongly and
/// handles the remaining edge constraints through the dual system
/// `T = C S^{-1} C^T`, with all factorizations precomputed.
pub struct SaddleSolver {
    n_u: usize,
    n_c: usize,
    cp_rows: Vec<usize>,
    cp_cols: Vec<usize>,
    edge_rows: Vec<usize>,
    red: Vec<usize>,
    s_red: SymFactor,
    s_red_cp: DMatrix<f64>,
    s_cp_all: DMatrix<f64>,
    c_edge_red: DMatrix<f64>,
    c_edge_cp: DMatrix<f64>,
    t_hat: SymFactor,
}

impl SaddleSolver {
    pub fn new(
        cell: usize,
        s: &DMatrix<f64>,
        constraints: &DMatrix<f64>,
        crosspoint_rows: &[(usize, usize)],
    ) -> Result<Self> {
        let n_u = s.nrows();
        let n_c = constraints.nrows();
        let cp_rows: Vec<usize> = crosspoint_rows.iter().map(|&(r, _)| r).collect();
        let cp_cols: Vec<usize> = crosspoint_rows.iter().map(|&(_, c)| c).collect();
        let cp_col_set: std::collections::HashSet<usize> = cp_cols.iter().copied().collect();
        let cp_row_set: std::collections::HashSet<usize> = cp_rows.iter().copied().collect();
        let red: Vec<usize> = (0..n_u).filter(|i| !cp_col_set.contains(i)).collect();
        let edge_rows: Vec<usize> = (0..n_c).filter(|r| !cp_row_set.contains(r)).collect();

        let gather = |rows: &[usize], cols: &[usize], m: &DMatrix<f64>| {
            let mut out = DMatrix::zeros(rows.len(), cols.len());
            for (i, &r) in rows.iter().enumerate() {
                for (j, &c) in cols.iter().enumerate() {
                    out[(i, j)] = m[(r, c)];
                }
            }
            out
        };

        let s_red_mat = gather(&red, &red, s);
        let s_red = SymFactor::new(s_red_mat).ok_or(Error::SingularReducedS { cell })?;
        let s_red_cp = gather(&red, &cp_cols, s);
        let s_cp_all = gather(&cp_cols, &(0..n_u).collect::<Vec<_>>(), s);
        let c_edge_red = gather(&edge_rows, &red, constraints);
        let c_edge_cp = gather(&edge_rows, &cp_cols, constraints);

        let t_hat = if edge_rows.is_empty() {
            SymFactor::Empty
        } else {
            let x = s_red.solve_mat(&c_edge_red.transpose());
            let mut t = &c_edge_red * x;
            let n = t.nrows();
            for r in 0..n {
                for c in (r + 1)..n {
                    let avg = 0.5 * (t[(r, c)] + t[(c, r)]);
                    t[(r, c)] = avg;
                    t[(c, r)] = avg;
                }
            }
            SymFactor::new(t).ok_or(Error::SaddleSingular { cell, rank: edge_rows.len() })?
        };

        Ok(SaddleSolver {
            n_u,
            n_c,
            cp_rows,
            cp_cols,
            edge_rows,
            red,
            s_red,
            s_red_cp,
            s_cp_all,
            c_edge_red,
            c_edge_cp,
            t_hat,
        })
    }

    /// Solve the constrained system for right-hand side `f` (skeleton) and
    /// constraint values `g`; returns the correction and the multipliers
    /// (ordered per constraint row).
    pub fn solve(&self, f: &DVector<f64>, g: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        debug_assert_eq!(f.len(), self.n_u);
        debug_assert_eq!(g.len(), self.n_c);
        let n_cp = self.cp_cols.len();

        // crosspoint values are enforced strongly
        let x_cp = DVector::from_iterator(n_cp, self.cp_rows.iter().map(|&r| g[r]));

        let mut f_hat =
            DVector::from_iterator(self.red.len(), self.red.iter().map(|&i| f[i]));
        if n_cp > 0 {
            f_hat -= &self.s_red_cp * &x_cp;
        }
        let g_hat = {
            let mut gh = DVector::from_iterator(
                self.edge_rows.len(),
                self.edge_rows.iter().map(|&r| g[r]),
            );
            if n_cp > 0 && !self.edge_rows.is_empty() {
                gh -= &self.c_edge_cp * &x_cp;
            }
            gh
        };

        let (x_hat, lambda_edge) = if self.edge_rows.is_empty() {
            (self.s_red.solve_vec(&f_hat), DVector::zeros(0))
        } else {
            let y = self.s_red.solve_vec(&f_hat);
            let rhs = &self.c_edge_red * &y - &g_hat;
            let lam = self.t_hat.solve_vec(&rhs);
            let x = self.s_red.solve_vec(&(&f_hat - self.c_edge_red.transpose() * &lam));
            (x, lam)
        };

        let mut x = DVector::zeros(self.n_u);
        for (i, &r) in self.red.iter().enumerate() {
            x[r] = x_hat[i];
        }
        for (i, &c) in self.cp_cols.iter().enumerate() {
            x[c] = x_cp[i];
        }

        let mut lambda = DVector::zeros(self.n_c);
        for (i, &r) in self.edge_rows.iter().enumerate() {
            lambda[r] = lambda_edge[i];
        }
        if n_cp > 0 {
            // residual at the crosspoint dof rows determines their multipliers
            let sx = &self.s_cp_all * &x;
            for (i, (&row, &col)) in self.cp_rows.iter().zip(&self.cp_cols).enumerate() {
                let mut ct_lam = 0.0;
                for (e, &er) in self.edge_rows.iter().enumerate() {
                    ct_lam += self.c_edge_cp[(e, i)] * lambda[er];
                }
                lambda[row] = f[col] - sx[i] - ct_lam;
            }
        }
        (x, lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_schur() {
        // K = [[2, -1], [-1, 2]], one interior, one skeleton dof
        let em = ElementMatrices {
            k_ii: DMatrix::from_row_slice(1, 1, &[2.0]),
            k_iu: DMatrix::from_row_slice(1, 1, &[-1.0]),
            k_uu: DMatrix::from_row_slice(1, 1, &[2.0]),
            k_id: DMatrix::zeros(1, 0),
            k_ud: DMatrix::zeros(1, 0),
            f_i: DVector::from_row_slice(&[1.0]),
            f_u: DVector::from_row_slice(&[0.0]),
        };
        let ops = schur(0, &em).unwrap();
        assert!((ops.s[(0, 0)] - 1.5).abs() < 1e-15);
        // f = 0 - (-1) * (1/2) * 1 = 0.5
        assert!((ops.f[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn schur_without_interior() {
        let em = ElementMatrices {
            k_ii: DMatrix::zeros(0, 0),
            k_iu: DMatrix::zeros(0, 2),
            k_uu: DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 3.0]),
            k_id: DMatrix::zeros(0, 0),
            k_ud: DMatrix::zeros(2, 0),
            f_i: DVector::zeros(0),
            f_u: DVector::from_row_slice(&[1.0, 2.0]),
        };
        let ops = schur(0, &em).unwrap();
        assert_eq!(ops.s, em.k_uu);
        assert_eq!(ops.f, em.f_u);
    }

    #[test]
    fn singular_interior_detected() {
        let em = ElementMatrices {
            k_ii: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]),
            k_iu: DMatrix::zeros(2, 1),
            k_uu: DMatrix::from_row_slice(1, 1, &[1.0]),
            k_id: DMatrix::zeros(2, 0),
            k_ud: DMatrix::zeros(1, 0),
            f_i: DVector::zeros(2),
            f_u: DVector::zeros(1),
        };
        assert!(matches!(schur(7, &em), Err(Error::SingularInterior { cell: 7 })));
    }

    #[test]
    fn saddle_matches_dense_solve() {
        // 6-dof SPD S with 2 constraints vs a dense saddle-matrix solve
        let raw = DMatrix::from_fn(6, 6, |i, j| ((i * 5 + j * 3) as f64 * 0.41).sin());
        let s = &raw * raw.transpose() + DMatrix::identity(6, 6) * 6.0;
        let c = DMatrix::from_row_slice(
            2,
            6,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3, -0.2, 1.0, 0.5, 0.0, 0.7],
        );
        // first constraint row is a unit row on dof 0: a crosspoint row
        let solver = SaddleSolver::new(0, &s, &c, &[(0, 0)]).unwrap();
        let f = DVector::from_row_slice(&[0.4, -1.0, 2.0, 0.3, 0.0, 1.1]);
        let g = DVector::from_row_slice(&[0.25, -0.6]);
        let (x, lam) = solver.solve(&f, &g);

        // dense oracle
        let mut big = DMatrix::zeros(8, 8);
        big.view_mut((0, 0), (6, 6)).copy_from(&s);
        big.view_mut((6, 0), (2, 6)).copy_from(&c);
        big.view_mut((0, 6), (6, 2)).copy_from(&c.transpose());
        let mut rhs = DVector::zeros(8);
        rhs.rows_mut(0, 6).copy_from(&f);
        rhs.rows_mut(6, 2).copy_from(&g);
        let sol = big.lu().solve(&rhs).unwrap();
        for i in 0..6 {
            assert!((x[i] - sol[i]).abs() <= 1e-11, "x[{i}]");
        }
        for i in 0..2 {
            assert!((lam[i] - sol[6 + i]).abs() <= 1e-10, "lambda[{i}]");
        }
        // full saddle residual
        let r1 = &s * &x + c.transpose() * &lam - &f;
        let r2 = &c * &x - &g;
        assert!(r1.norm() <= 1e-10 * f.norm().max(1.0));
        assert!(r2.norm() <= 1e-12);
    }

    #[test]
    fn zero_rhs_zero_solution() {
        let s = DMatrix::identity(4, 4) * 2.0;
        let c = DMatrix::from_row_slice(1, 4, &[1.0, 1.0, 1.0, 1.0]);
        let solver = SaddleSolver::new(0, &s, &c, &[]).unwrap();
        let (x, lam) = solver.solve(&DVector::zeros(4), &DVector::zeros(1));
        assert!(x.norm() == 0.0 && lam.norm() == 0.0);
    }
}
