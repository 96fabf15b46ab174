use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Latin hypercube sample of `n_s` points in the given 4D box: each axis is
/// split into `n_s` strata, one sample per stratum, paired by independent
/// random permutations. Deterministic for a fixed seed.
pub fn lhs_sample(cluster_box: &[[f64; 2]; 4], n_s: usize, seed: u64) -> Vec<[f64; 4]> {
    assert!(n_s >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut strata: [Vec<usize>; 4] = std::array::from_fn(|_| (0..n_s).collect());
    for s in strata.iter_mut() {
        s.shuffle(&mut rng);
    }
    let mut out = Vec::with_capacity(n_s);
    for i in 0..n_s {
        let mut point = [0.0; 4];
        for d in 0..4 {
            let u: f64 = rng.random();
            let t = (strata[d][i] as f64 + u) / n_s as f64;
            point[d] = cluster_box[d][0] + (cluster_box[d][1] - cluster_box[d][0]) * t;
        }
        out.push(point);
    }
    out
}

/// Randomized truncated SVD of a tall matrix: Gaussian sketch with
/// oversampling, subspace (power) iterations with re-orthonormalization,
/// then a dense SVD of the small projected matrix. Returns the leading
/// `rank` left singular vectors and singular values, sorted descending.
pub fn randomized_svd(
    a: &DMatrix<f64>,
    rank: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> (DMatrix<f64>, Vec<f64>) {
    let (m, n) = a.shape();
    let l = (rank + oversample).min(n).min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(n, l, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = (a * omega).qr().q();
    for _ in 0..power_iters {
        let z = a.transpose() * &q;
        let qz = z.qr().q();
        q = (a * qz).qr().q();
    }
    let b = q.transpose() * a; // l x n
    let svd = b.svd(true, false);
    let ub = svd.u.expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .unwrap()
    });
    let keep = rank.min(order.len());
    let mut u = DMatrix::zeros(m, keep);
    let mut sigma = Vec::with_capacity(keep);
    for (col, &idx) in order.iter().take(keep).enumerate() {
        let qu = &q * ub.column(idx);
        u.column_mut(col).copy_from(&qu);
        sigma.push(svd.singular_values[idx]);
    }
    (u, sigma)
}
