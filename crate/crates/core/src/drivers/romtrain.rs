use std::path::Path;

use crate::geometry::LevelSet;
use crate::rom::{
    rom_validation_error, save_model, train_model, ClusterGrid, RomModel, TrainOptions,
};
use crate::Result;

/// Per-cluster training summary.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ClusterSummary {
    pub cluster: usize,
    pub n_r: usize,
    pub leading_singular_value: f64,
    pub trailing_singular_value: f64,
    pub interp_condition: f64,
    pub rank_deficient: bool,
    pub validation_error: f64,
}

/// Offline training driver: trains every cluster, validates each on fresh
/// held-out samples, and writes the artifact with its manifest.
pub fn train_rom(
    level_set: &LevelSet,
    p: usize,
    q: usize,
    grid: ClusterGrid,
    opts: &TrainOptions,
    n_validation: usize,
    out: &Path,
    mut progress: impl FnMut(&ClusterSummary),
) -> Result<(RomModel, Vec<ClusterSummary>)> {
    let model = train_model(level_set, grid, p, q, opts, |_, _| {})?;
    let mut summaries = Vec::with_capacity(grid.n_clusters());
    for k in 0..grid.n_clusters() {
        let c = model.clusters[k].as_ref().expect("fresh model is complete");
        let validation_error = if n_validation > 0 {
            rom_validation_error(&model, k, n_validation, opts.seed ^ 0x5eed_0000 ^ k as u64)?
        } else {
            f64::NAN
        };
        let summary = ClusterSummary {
            cluster: k,
            n_r: c.basis.ncols(),
            leading_singular_value: c.singular_values.first().copied().unwrap_or(0.0),
            trailing_singular_value: c.singular_values.last().copied().unwrap_or(0.0),
            interp_condition: c.interp_condition,
            rank_deficient: c.rank_deficient,
            validation_error,
        };
        progress(&summary);
        summaries.push(summary);
    }
    save_model(&model, out)?;
    Ok((model, summaries))
}
