use lattix::drivers::annulus_problem;
use lattix::geometry::LevelSet;
use lattix::quad::cut_cell_rules;
use lattix::rom::{train_model, ClusterGrid, TrainOptions};
use lattix::solve::{run_solve, Field, SolverMode, SolverOptions};

fn main() {
    let t = std::time::Instant::now();
    let opts = TrainOptions { n_s: 200, n_r: 40, d_int: 6, seed: 7, ..TrainOptions::default() };
    let model = train_model(&LevelSet::SchwarzDiamond, ClusterGrid::new(0.1, 0.9, 1), 8, 2, &opts, |_, _| {}).unwrap();
    println!("trained 1 cluster in {:.0}s", t.elapsed().as_secs_f64());

    let spec = annulus_problem(4, 8, 2, 5e-4);
    let sopts = SolverOptions { tol: 1e-8, max_it: 300, sor_omega: 1.0 };
    let t = std::time::Instant::now();
    let (u_rom, rep) = run_solve(&spec, SolverMode::BddcRom, Some(&model), &sopts).unwrap();
    println!("rom solve: iters={:?} assembly={:.2}s total={:.2}s", rep.iterations, rep.timings.assembly, t.elapsed().as_secs_f64());
    let (u_full, rep_full) = run_solve(&spec, SolverMode::BddcFull, None, &sopts).unwrap();
    println!("full solve: iters={:?}", rep_full.iterations);
    let rules: Vec<_> = spec.lattice.cells.iter().map(|c| cut_cell_rules(c, &spec.quad).unwrap()).collect();
    let zero = Field { p: 8, cells: vec![nalgebra::DVector::zeros(u_full.cells[0].len()); spec.lattice.n_cells()] };
    let norm = u_full.l2_difference(&zero, &spec.lattice, &rules);
    let diff = u_rom.l2_difference(&u_full, &spec.lattice, &rules) / norm;
    println!("rom vs full relative l2: {diff:.3e}");
}
