use lattix::geometry::LevelSet;
use lattix::rom::{train_cluster, ClusterGrid, TrainOptions};
use std::time::Instant;

fn main() {
    let d_int: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let n_s: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(200);
    let grid = ClusterGrid::new(0.1, 0.9, 2);
    let opts = TrainOptions { n_s, n_r: 40, d_int, seed: 7, ..TrainOptions::default() };
    let t = Instant::now();
    let c = train_cluster(&LevelSet::SchwarzDiamond, &grid, 0, 8, 2, &opts).unwrap();
    println!(
        "cluster 0: {:.1}s | n_r={} sigma1={:.3e} cond={:.2e}",
        t.elapsed().as_secs_f64(),
        c.basis.ncols(),
        c.singular_values[0],
        c.interp_condition
    );
}
