use nalgebra::DVector;

use crate::{Error, Result};

/// Compressed sparse row matrix (symmetric matrices store both triangles).
#[derive(Clone, Debug)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Assemble from (row, col, value) triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &mut Vec<(usize, usize, f64)>) -> Csr {
        triplets.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_count = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for &(r, c, v) in triplets.iter() {
            if prev == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                vals.push(v);
                row_count[r + 1] += 1;
                prev = Some((r, c));
            }
        }
        for r in 0..n {
            row_count[r + 1] += row_count[r];
        }
        Csr { n, row_ptr: row_count, col_idx, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

/// Reverse Cuthill-McKee ordering of the sparsity graph; returns `order`
/// with `order[new] = old`.
pub fn rcm_order(csr: &Csr) -> Vec<usize> {
    let n = csr.n;
    let degree = |v: usize| csr.row_ptr[v + 1] - csr.row_ptr[v];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.sort_by_key(|&v| degree(v));
    for &start in &nodes {
        if visited[start] {
            continue;
        }
        let mut queue = std::collections::VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = (csr.row_ptr[v]..csr.row_ptr[v + 1])
                .map(|k| csr.col_idx[k])
                .filter(|&u| !visited[u])
                .collect();
            nbrs.sort_by_key(|&u| degree(u));
            for u in nbrs {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order.reverse();
    order
}

/// Banded unpivoted LDL^T factorization of a symmetric matrix under a
/// fill-reducing permutation. Safe for mildly indefinite matrices (negative
/// pivots are kept in `D`); only a vanishing pivot fails.
pub struct BandedLdlt {
    n: usize,
    bw: usize,
    /// unit-lower band, row-major: `band[i * (bw + 1) + d] = L[i, i - d]`
    /// for `d > 0`; `band[i * (bw + 1)]` holds `D[i]`
    band: Vec<f64>,
    /// `perm[new] = old`
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
    n_negative: usize,
}

impl BandedLdlt {
    /// Factor `A` (full symmetric CSR) with the given ordering; pass the
    /// identity to skip reordering.
    pub fn factor(csr: &Csr, perm: Vec<usize>) -> Result<Self> {
        let n = csr.n;
        assert_eq!(perm.len(), n);
        let mut perm_inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            perm_inv[old] = new;
        }
        let mut bw = 0usize;
        for r in 0..n {
            let pr = perm_inv[r];
            for k in csr.row_ptr[r]..csr.row_ptr[r + 1] {
                let pc = perm_inv[csr.col_idx[k]];
                bw = bw.max(pr.abs_diff(pc));
            }
        }
        let width = bw + 1;
        let mut band = vec![0.0f64; n * width];
        let mut scale = 0.0f64;
        for r in 0..n {
            let pr = perm_inv[r];
            for k in csr.row_ptr[r]..csr.row_ptr[r + 1] {
                let pc = perm_inv[csr.col_idx[k]];
                if pc <= pr {
                    band[pr * width + (pr - pc)] = csr.vals[k];
                }
                if pc == pr {
                    scale = scale.max(csr.vals[k].abs());
                }
            }
        }
        // in-place banded LDL^T: band[i][i-j] becomes L[i,j], diagonal D[i]
        let mut n_negative = 0usize;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let klo = lo.max(j.saturating_sub(bw));
                let mut sum = band[i * width + (i - j)];
                for k in klo..j {
                    sum -= band[i * width + (i - k)] * band[j * width + (j - k)] * band[k * width];
                }
                if j < i {
                    band[i * width + (i - j)] = sum / band[j * width];
                } else {
                    if !sum.is_finite() || sum.abs() <= 1e-300 + 1e-16 * scale {
                        return Err(Error::Config(format!(
                            "symmetric factorization broke down at pivot {i} (value {sum:.3e})"
                        )));
                    }
                    if sum < 0.0 {
                        n_negative += 1;
                    }
                    band[i * width] = sum;
                }
            }
        }
        Ok(BandedLdlt { n, bw, band, perm, perm_inv, n_negative })
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Number of negative pivots (zero for positive definite input).
    pub fn negative_pivots(&self) -> usize {
        self.n_negative
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let width = self.bw + 1;
        let mut y = DVector::zeros(n);
        for i in 0..n {
            y[i] = rhs[self.perm[i]];
        }
        // forward: L y' = y (unit lower)
        for i in 0..n {
            let lo = i.saturating_sub(self.bw);
            let mut acc = y[i];
            for k in lo..i {
                acc -= self.band[i * width + (i - k)] * y[k];
            }
            y[i] = acc;
        }
        // diagonal
        for i in 0..n {
            y[i] /= self.band[i * width];
        }
        // backward: L^T x = y'
        for i in (0..n).rev() {
            let hi = (i + self.bw).min(n - 1);
            let mut acc = y[i];
            for k in (i + 1)..=hi {
                acc -= self.band[k * width + (k - i)] * y[k];
            }
            y[i] = acc;
        }
        let mut x = DVector::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

/// Conjugate gradients preconditioned by symmetric successive
/// over-relaxation on a CSR matrix. Returns the iterate, the iteration
/// count, and the relative residual history.
pub fn ssor_pcg(
    a: &Csr,
    b: &DVector<f64>,
    omega: f64,
    tol: f64,
    max_it: usize,
) -> (DVector<f64>, usize, Vec<f64>, bool) {
    let n = a.n;
    let diag = a.diagonal();
    let bnorm = b.norm().max(f64::MIN_POSITIVE);

    let apply_ssor = |r: &DVector<f64>| -> DVector<f64> {
        // (D + w L) t1 = r  (forward)
        let mut t = DVector::zeros(n);
        for i in 0..n {
            let mut acc = r[i];
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j < i {
                    acc -= omega * a.vals[k] * t[j];
                }
            }
            t[i] = acc / diag[i];
        }
        // scale by D
        for i in 0..n {
            t[i] *= diag[i];
        }
        // (D + w U) z = t (backward)
        let mut z = DVector::zeros(n);
        for i in (0..n).rev() {
            let mut acc = t[i];
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col_idx[k];
                if j > i {
                    acc -= omega * a.vals[k] * z[j];
                }
            }
            z[i] = acc / diag[i];
        }
        z * (omega * (2.0 - omega))
    };

    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut history = vec![r.norm() / bnorm];
    if history[0] <= tol {
        return (x, 0, history, true);
    }
    let mut z = apply_ssor(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut q = DVector::zeros(n);
    for it in 1..=max_it {
        a.matvec(&p, &mut q);
        let alpha = rz / p.dot(&q);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &q, 1.0);
        let rel = r.norm() / bnorm;
        history.push(rel);
        if rel <= tol {
            return (x, it, history, true);
        }
        z = apply_ssor(&r);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + &p * beta;
    }
    let its = history.len() - 1;
    (x, its, history, false)
}
