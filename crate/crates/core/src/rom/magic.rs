use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Greedy selection of interpolation entries: the first point is the
/// largest entry of the first basis vector; each following point is the
/// largest entry of the residual of the next column after the interpolatory
/// projection that matches the previous columns at the already selected
/// entries. Ties break toward the smaller index.
///
/// The interpolatory residual vanishes at every selected entry, so the
/// selection never repeats an entry (or one of its exact duplicates) and
/// the square interpolation matrix stays nonsingular with controlled
/// error amplification.
pub fn select_magic_points(u: &DMatrix<f64>) -> Result<Vec<usize>> {
    let (n_i, n_r) = u.shape();
    let mut points: Vec<usize> = Vec::with_capacity(n_r);
    for j in 0..n_r {
        let col = u.column(j).clone_owned();
        let resid = if j == 0 {
            col
        } else {
            // coefficients that make the previous columns match u_j at the
            // selected entries
            let mut small = DMatrix::zeros(j, j);
            let mut rhs = DVector::zeros(j);
            for (r, &m) in points.iter().enumerate() {
                for c in 0..j {
                    small[(r, c)] = u[(m, c)];
                }
                rhs[r] = u[(m, j)];
            }
            let coeff = small
                .lu()
                .solve(&rhs)
                .ok_or(Error::DegenerateBasis { column: j })?;
            let mut r = col;
            for c in 0..j {
                r.axpy(-coeff[c], &u.column(c), 1.0);
            }
            r
        };
        let mut best = 0usize;
        let mut best_val = -1.0f64;
        for i in 0..n_i {
            let a = resid[i].abs();
            if a > best_val {
                best_val = a;
                best = i;
            }
        }
        if best_val <= 0.0 {
            return Err(Error::DegenerateBasis { column: j });
        }
        points.push(best);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthonormal_columns() {
        let u = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_eq!(select_magic_points(&u).unwrap(), vec![0, 1]);
    }

    #[test]
    fn oblique_column_projection() {
        // second column (0.5, 1, 0): matching at entry 0 leaves (0, 1, 0)
        let u = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.5, 1.0, 0.0]);
        assert_eq!(select_magic_points(&u).unwrap(), vec![0, 1]);
    }

    #[test]
    fn degenerate_basis_rejected() {
        let u = DMatrix::from_column_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        // second residual vanishes identically
        assert!(matches!(
            select_magic_points(&u),
            Err(Error::DegenerateBasis { column: 1 })
        ));
    }

    #[test]
    fn residual_vanishes_at_selected_entries() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(60, 8, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let q = a.qr().q();
        let m = select_magic_points(&q).unwrap();
        // distinct points and a well-posed interpolation matrix
        let mut sorted = m.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), m.len());
        let mut phi = DMatrix::zeros(8, 8);
        for (r, &mi) in m.iter().enumerate() {
            for c in 0..8 {
                phi[(r, c)] = q[(mi, c)];
            }
        }
        assert!(phi.lu().try_inverse().is_some());
    }

    #[test]
    fn matches_straight_line_reimplementation() {
        // independent restatement of the same selection rule, written
        // directly from the formulas with explicit Gaussian elimination
        fn oracle(u: &DMatrix<f64>) -> Vec<usize> {
            let (n_i, n_r) = u.shape();
            let mut m: Vec<usize> = Vec::new();
            for j in 0..n_r {
                let mut r: Vec<f64> = (0..n_i).map(|i| u[(i, j)]).collect();
                if j > 0 {
                    // solve (U[m, 0..j]) c = u_j[m] by dense elimination
                    let k = j;
                    let mut a = vec![vec![0.0f64; k + 1]; k];
                    for (row, &mi) in m.iter().enumerate() {
                        for col in 0..k {
                            a[row][col] = u[(mi, col)];
                        }
                        a[row][k] = u[(mi, j)];
                    }
                    for col in 0..k {
                        let piv = (col..k)
                            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
                            .unwrap();
                        a.swap(col, piv);
                        for row in (col + 1)..k {
                            let f = a[row][col] / a[col][col];
                            for e in col..=k {
                                a[row][e] -= f * a[col][e];
                            }
                        }
                    }
                    let mut coeff = vec![0.0f64; k];
                    for row in (0..k).rev() {
                        let mut acc = a[row][k];
                        for col in (row + 1)..k {
                            acc -= a[row][col] * coeff[col];
                        }
                        coeff[row] = acc / a[row][row];
                    }
                    for (c, &w) in coeff.iter().enumerate() {
                        for i in 0..n_i {
                            r[i] -= w * u[(i, c)];
                        }
                    }
                }
                let mut arg = 0;
                for i in 1..n_i {
                    if r[i].abs() > r[arg].abs() {
                        arg = i;
                    }
                }
                m.push(arg);
            }
            m
        }
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = DMatrix::from_fn(50, 6, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let q = a.qr().q();
        assert_eq!(select_magic_points(&q).unwrap(), oracle(&q));
    }
}
