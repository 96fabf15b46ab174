use lattix::drivers::annulus_problem;
use lattix::solve::{run_solve, SolverMode, SolverOptions};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let p: usize = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(8);
    let spec = annulus_problem(n, p, 2, 5e-4);
    let opts = SolverOptions { tol: 1e-8, max_it: 300, sor_omega: 1.0 };
    let t = std::time::Instant::now();
    let (_, rep) = run_solve(&spec, SolverMode::BddcFull, None, &opts).unwrap();
    println!(
        "n={n} p={p} cells={} dofs={} interface={} iters={:?} assembly={:.2}s setup={:.2}s solve={:.2}s total={:.2}s wall={:.2}s",
        rep.n_cells, rep.n_dofs, rep.n_interface, rep.iterations,
        rep.timings.assembly, rep.timings.setup, rep.timings.solve, rep.timings.total,
        t.elapsed().as_secs_f64()
    );
}
