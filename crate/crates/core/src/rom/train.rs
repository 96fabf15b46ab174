use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::element::{selected_entries, stiffness_factors, FastTensor, GllBasis, StiffnessFactors};
use crate::geometry::{Cell, LevelSet, ThresholdParams};
use crate::quad::{cut_cell_rules, QuadOptions};
use crate::{Error, Result};

use super::cluster::ClusterGrid;
use super::interp::CoefficientInterpolant;
use super::magic::select_magic_points;
use super::sampling::{lhs_sample, randomized_svd};

/// Training parameters of the tensor surrogate.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct TrainOptions {
    /// snapshots per cluster
    pub n_s: usize,
    /// retained basis vectors per cluster
    pub n_r: usize,
    /// intermediate decomposition rank surplus (`n_v = n_r + extra`)
    pub n_v_extra: usize,
    /// sketch oversampling of the randomized decomposition
    pub oversample: usize,
    pub power_iters: usize,
    /// coefficient interpolation degree per parameter
    pub d_int: usize,
    pub seed: u64,
    /// quadrature tolerance for snapshot integration
    pub quad_tol: f64,
    pub quad_max_depth: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            n_s: 200,
            n_r: 40,
            n_v_extra: 10,
            oversample: 10,
            power_iters: 2,
            d_int: 6,
            seed: 0,
            quad_tol: 1e-10,
            quad_max_depth: 8,
        }
    }
}

/// Trained surrogate of one cluster.
#[derive(Clone, Debug)]
pub struct ClusterRom {
    /// column-orthonormal reduced basis, `n_i x n_r`
    pub basis: DMatrix<f64>,
    /// leading singular values of the snapshot matrix (diagnostics)
    pub singular_values: Vec<f64>,
    pub magic: Vec<usize>,
    /// interpolation matrix `basis[magic, :]`
    pub interp_matrix: DMatrix<f64>,
    pub interp_condition: f64,
    pub coeffs: CoefficientInterpolant,
    /// basis was truncated because trailing singular values vanished
    pub rank_deficient: bool,
}

/// Dimensions and provenance shared by all clusters of a model.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RomMeta {
    pub level_set: String,
    pub p: usize,
    pub q: usize,
    pub grid: ClusterGrid,
    pub options: TrainOptions,
}

impl PartialEq for TrainOptions {
    fn eq(&self, other: &Self) -> bool {
        self.n_s == other.n_s
            && self.n_r == other.n_r
            && self.n_v_extra == other.n_v_extra
            && self.oversample == other.oversample
            && self.power_iters == other.power_iters
            && self.d_int == other.d_int
            && self.seed == other.seed
            && self.quad_tol == other.quad_tol
            && self.quad_max_depth == other.quad_max_depth
    }
}

/// Offline-trained surrogate of the fast-assembly tensor over the threshold
/// hypercube. Clusters may be loaded selectively from an artifact; online
/// evaluation rejects parameters whose cluster is absent.
pub struct RomModel {
    pub level_set: LevelSet,
    pub meta: RomMeta,
    pub clusters: Vec<Option<ClusterRom>>,
}

fn quad_options(p: usize, opts: &TrainOptions) -> QuadOptions {
    let mut q = QuadOptions::for_degree(p);
    q.tol = opts.quad_tol;
    q.max_depth = opts.quad_max_depth;
    q
}

/// Tensor factors for one parameter point on the identity-map template
/// cell; the tensor depends on the trimming only.
fn snapshot_factors(level_set: &LevelSet, mu: [f64; 4], p: usize, q: usize, quad: &QuadOptions) -> Result<StiffnessFactors> {
    let cell = Cell::reference(level_set.clone(), ThresholdParams(mu));
    let rules = cut_cell_rules(&cell, quad)?;
    let basis = GllBasis::new(p);
    let interp = GllBasis::new(q);
    Ok(stiffness_factors(&rules.structure, &basis, &interp))
}

/// Full flattened tensor at one parameter point (used for snapshots and
/// validation oracles).
pub fn full_tensor_flat(
    level_set: &LevelSet,
    mu: [f64; 4],
    p: usize,
    q: usize,
    quad: &QuadOptions,
) -> Result<DVector<f64>> {
    let f = snapshot_factors(level_set, mu, p, q, quad)?;
    Ok(f.to_tensor(ThresholdParams(mu)).to_flat())
}

/// Per-cluster seed, decorrelated across clusters but reproducible.
fn cluster_seed(base: u64, cluster: usize, stream: u64) -> u64 {
    base.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((cluster as u64).wrapping_mul(0xbf58_476d_1ce4_e5b9))
        .wrapping_add(stream)
}

/// Train one cluster: snapshot collection at Latin-hypercube parameters,
/// randomized decomposition, magic-point selection, and exact reduced
/// coefficients on the tensor interpolation grid.
pub fn train_cluster(
    level_set: &LevelSet,
    grid: &ClusterGrid,
    cluster: usize,
    p: usize,
    q: usize,
    opts: &TrainOptions,
) -> Result<ClusterRom> {
    let quad = quad_options(p, opts);
    let cluster_box = grid.cluster_box(cluster);
    let samples = lhs_sample(&cluster_box, opts.n_s, cluster_seed(opts.seed, cluster, 1));

    let columns: Vec<DVector<f64>> = samples
        .par_iter()
        .map(|&mu| full_tensor_flat(level_set, mu, p, q, &quad))
        .collect::<Result<Vec<_>>>()?;
    let n_i = columns[0].len();
    let mut snapshots = DMatrix::zeros(n_i, opts.n_s);
    for (j, col) in columns.iter().enumerate() {
        snapshots.column_mut(j).copy_from(col);
    }
    drop(columns);

    let n_v = (opts.n_r + opts.n_v_extra).min(opts.n_s);
    let (u_v, sigma) = randomized_svd(
        &snapshots,
        n_v,
        opts.oversample,
        opts.power_iters,
        cluster_seed(opts.seed, cluster, 2),
    );
    drop(snapshots);

    // truncate if the requested rank exceeds the numerical rank
    let mut n_r = opts.n_r.min(u_v.ncols());
    let mut rank_deficient = false;
    if let Some(first) = sigma.first() {
        while n_r > 1 && sigma[n_r - 1] / first < 1e-14 {
            n_r -= 1;
            rank_deficient = true;
        }
    }
    let basis = u_v.columns(0, n_r).clone_owned();

    let magic = select_magic_points(&basis)?;
    let mut interp_matrix = DMatrix::zeros(n_r, n_r);
    for (j, &m) in magic.iter().enumerate() {
        for r in 0..n_r {
            interp_matrix[(j, r)] = basis[(m, r)];
        }
    }
    let lu = interp_matrix.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or(Error::DegenerateBasis { column: n_r })?;
    let norm1 = |m: &DMatrix<f64>| {
        (0..m.ncols())
            .map(|c| m.column(c).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
    };
    let interp_condition = norm1(&interp_matrix) * norm1(&inv);

    // exact reduced coefficients on the interpolation grid: only the magic
    // entries of the full tensor are needed per node
    let probe = CoefficientInterpolant::new(
        opts.d_int,
        cluster_box,
        vec![DVector::zeros(0); (opts.d_int + 1).pow(4)],
    );
    let lu = interp_matrix.clone().lu();
    let basis_1d = GllBasis::new(p);
    let interp_1d = GllBasis::new(q);
    let values: Vec<DVector<f64>> = (0..probe.n_nodes())
        .into_par_iter()
        .map(|k| -> Result<DVector<f64>> {
            let mu = probe.node(k);
            let cell = Cell::reference(level_set.clone(), ThresholdParams(mu));
            let rules = cut_cell_rules(&cell, &quad)?;
            let entries = selected_entries(&rules.structure, &basis_1d, &interp_1d, &magic);
            let rhs = DVector::from_vec(entries);
            Ok(lu.solve(&rhs).expect("nonsingular interpolation matrix"))
        })
        .collect::<Result<Vec<_>>>()?;
    let coeffs = CoefficientInterpolant::new(opts.d_int, cluster_box, values);

    Ok(ClusterRom {
        basis,
        singular_values: sigma,
        magic,
        interp_matrix,
        interp_condition,
        coeffs,
        rank_deficient,
    })
}

/// Train every cluster of the grid. Clusters run sequentially (snapshot
/// matrices are large); the inner work is data-parallel.
pub fn train_model(
    level_set: &LevelSet,
    grid: ClusterGrid,
    p: usize,
    q: usize,
    opts: &TrainOptions,
    mut progress: impl FnMut(usize, &ClusterRom),
) -> Result<RomModel> {
    let mut clusters = Vec::with_capacity(grid.n_clusters());
    for k in 0..grid.n_clusters() {
        let c = train_cluster(level_set, &grid, k, p, q, opts)?;
        progress(k, &c);
        clusters.push(Some(c));
    }
    Ok(RomModel {
        level_set: level_set.clone(),
        meta: RomMeta {
            level_set: level_set.kind_name().to_string(),
            p,
            q,
            grid,
            options: *opts,
        },
        clusters,
    })
}

impl RomModel {
    /// Online tensor evaluation: cluster lookup, coefficient interpolation,
    /// and expansion in the reduced basis.
    pub fn eval(&self, p: usize, q: usize, mu: &ThresholdParams) -> Result<FastTensor> {
        if p != self.meta.p || q != self.meta.q {
            return Err(Error::ModelMismatch(format!(
                "model trained for (p, q) = ({}, {}), requested ({p}, {q})",
                self.meta.p, self.meta.q
            )));
        }
        let k = self.meta.grid.find(mu)?;
        let cluster = self.clusters[k].as_ref().ok_or_else(|| {
            Error::ModelMismatch(format!("cluster {k} not loaded in this model instance"))
        })?;
        let coeff = cluster.coeffs.eval(mu.0);
        let flat = &cluster.basis * coeff;
        FastTensor::from_flat(p, q, flat.as_slice(), *mu)
    }

    /// Checks that the model matches a requested discretization and level
    /// set.
    pub fn check_compatible(&self, level_set: &LevelSet, p: usize, q: usize) -> Result<()> {
        if self.level_set != *level_set {
            return Err(Error::ModelMismatch(format!(
                "model trained for level set '{}', requested '{}'",
                self.level_set.kind_name(),
                level_set.kind_name()
            )));
        }
        if p != self.meta.p || q != self.meta.q {
            return Err(Error::ModelMismatch(format!(
                "model trained for (p, q) = ({}, {}), requested ({p}, {q})",
                self.meta.p, self.meta.q
            )));
        }
        Ok(())
    }
}

/// Mean held-out projection error of one cluster's basis: fresh Latin
/// hypercube samples, `|I - U U^T I|_inf / |I|_inf` averaged.
pub fn rom_validation_error(
    model: &RomModel,
    cluster: usize,
    n_val: usize,
    seed: u64,
) -> Result<f64> {
    let c = model.clusters[cluster]
        .as_ref()
        .ok_or_else(|| Error::ModelMismatch(format!("cluster {cluster} not loaded")))?;
    projection_error_for_basis(
        &model.level_set,
        &model.meta.grid,
        cluster,
        &c.basis,
        model.meta.p,
        model.meta.q,
        &model.meta.options,
        n_val,
        seed,
    )
}

/// Projection-error helper shared by validation sweeps: works on any basis
/// prefix so nested ranks reuse the same samples.
#[allow(clippy::too_many_arguments)]
pub fn projection_error_for_basis(
    level_set: &LevelSet,
    grid: &ClusterGrid,
    cluster: usize,
    basis: &DMatrix<f64>,
    p: usize,
    q: usize,
    opts: &TrainOptions,
    n_val: usize,
    seed: u64,
) -> Result<f64> {
    let quad = quad_options(p, opts);
    let samples = lhs_sample(&grid.cluster_box(cluster), n_val, seed);
    let errs: Vec<f64> = samples
        .par_iter()
        .map(|&mu| -> Result<f64> {
            let full = full_tensor_flat(level_set, mu, p, q, &quad)?;
            let coeff = basis.transpose() * &full;
            let recon = basis * coeff;
            let denom = full.amax().max(f64::MIN_POSITIVE);
            Ok((&full - recon).amax() / denom)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_opts() -> TrainOptions {
        TrainOptions {
            n_s: 30,
            n_r: 8,
            n_v_extra: 4,
            oversample: 6,
            power_iters: 2,
            d_int: 2,
            seed: 42,
            quad_tol: 1e-10,
            quad_max_depth: 6,
        }
    }

    #[test]
    fn basis_orthonormal_and_magic_interpolation() {
        let grid = ClusterGrid::new(0.1, 0.9, 1);
        let (p, q) = (2, 1);
        let c = train_cluster(&LevelSet::SchwarzDiamond, &grid, 0, p, q, &small_opts()).unwrap();
        let n_r = c.basis.ncols();
        let gram = c.basis.transpose() * &c.basis;
        assert!((gram - DMatrix::identity(n_r, n_r)).norm() <= 1e-10);

        // at a coefficient-grid node the reduced expansion matches the full
        // tensor exactly at the magic entries
        let quad = quad_options(p, &small_opts());
        let node_mu = c.coeffs.node(5);
        let full = full_tensor_flat(&LevelSet::SchwarzDiamond, node_mu, p, q, &quad).unwrap();
        let recon = &c.basis * c.coeffs.eval(node_mu);
        for &m in &c.magic {
            assert!(
                (recon[m] - full[m]).abs() <= 1e-10 * full.amax(),
                "magic entry {m}"
            );
        }
    }

    #[test]
    fn model_eval_exact_at_grid_nodes() {
        let grid = ClusterGrid::new(0.1, 0.9, 1);
        let (p, q) = (2, 1);
        let opts = small_opts();
        let model =
            train_model(&LevelSet::SchwarzDiamond, grid, p, q, &opts, |_, _| {}).unwrap();
        let c = model.clusters[0].as_ref().unwrap();
        let mu = c.coeffs.node(3);
        let t = model.eval(p, q, &ThresholdParams(mu)).unwrap();
        let direct = &c.basis * c.coeffs.eval(mu);
        let flat = t.to_flat();
        assert!((flat - direct).amax() < 1e-12);
    }

    #[test]
    fn out_of_domain_and_mismatch() {
        let grid = ClusterGrid::new(0.1, 0.9, 1);
        let opts = small_opts();
        let model =
            train_model(&LevelSet::SchwarzDiamond, grid, 2, 1, &opts, |_, _| {}).unwrap();
        assert!(matches!(
            model.eval(2, 1, &ThresholdParams::uniform(0.95)),
            Err(Error::OutOfTrainingDomain { .. })
        ));
        assert!(matches!(
            model.eval(3, 1, &ThresholdParams::uniform(0.5)),
            Err(Error::ModelMismatch(_))
        ));
        assert!(model.check_compatible(&LevelSet::SchoenIwp, 2, 1).is_err());
    }

    #[test]
    fn projection_error_decreases_with_rank() {
        let grid = ClusterGrid::new(0.1, 0.9, 1);
        let (p, q) = (2, 1);
        let mut opts = small_opts();
        opts.n_s = 40;
        opts.n_r = 16;
        let c = train_cluster(&LevelSet::SchwarzDiamond, &grid, 0, p, q, &opts).unwrap();
        let mut prev = f64::INFINITY;
        for r in [4, 8, 16] {
            let prefix = c.basis.columns(0, r.min(c.basis.ncols())).clone_owned();
            let err = projection_error_for_basis(
                &LevelSet::SchwarzDiamond,
                &grid,
                0,
                &prefix,
                p,
                q,
                &opts,
                12,
                777,
            )
            .unwrap();
            assert!(err <= prev * (1.0 + 1e-12), "rank {r}: {err} > {prev}");
            prev = err;
        }
    }

    #[test]
    fn validation_zero_when_basis_spans_snapshots() {
        // with n_r = n_s and validation drawn from the training samples the
        // projection error vanishes
        let grid = ClusterGrid::new(0.3, 0.7, 1);
        let (p, q) = (1, 1);
        let mut opts = small_opts();
        opts.n_s = 6;
        opts.n_r = 6;
        opts.n_v_extra = 0;
        opts.d_int = 1;
        let c = train_cluster(&LevelSet::SchwarzPrimitive, &grid, 0, p, q, &opts).unwrap();
        let quad = quad_options(p, &opts);
        let samples = lhs_sample(&grid.cluster_box(0), 6, cluster_seed(opts.seed, 0, 1));
        for mu in samples {
            let full =
                full_tensor_flat(&LevelSet::SchwarzPrimitive, mu, p, q, &quad).unwrap();
            let coeff = c.basis.transpose() * &full;
            let recon = &c.basis * coeff;
            assert!((&full - recon).amax() <= 1e-9 * full.amax().max(1e-300));
        }
    }
}

