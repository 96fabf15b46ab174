use lattix::drivers::annulus_lattice;
use lattix::quad::{cut_cell_rules, QuadOptions, LeafRule};

fn main() {
    let lat = annulus_lattice(4);
    let opts = QuadOptions::for_degree(8);
    let mut total_pts = 0usize;
    for (i, cell) in lat.cells.iter().enumerate().take(8) {
        let t = std::time::Instant::now();
        let rules = cut_cell_rules(cell, &opts).unwrap();
        let (mut tensor, mut cols) = (0, 0);
        for leaf in &rules.structure.leaves {
            match leaf {
                LeafRule::Tensor(_) => tensor += 1,
                LeafRule::Columns { columns, .. } => cols += columns.len(),
            }
        }
        total_pts += rules.interior.len();
        println!(
            "cell {i}: mu={:?} pts={} bnd={} tensor_leaves={} cut_columns={} gen={:.1}ms",
            cell.thresholds.0, rules.interior.len(), rules.boundary.len(), tensor, cols,
            t.elapsed().as_secs_f64() * 1e3
        );
    }
    println!("mean pts: {}", total_pts / 8);
}
