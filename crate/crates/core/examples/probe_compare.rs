use lattix::drivers::{annulus_problem, compare_solvers};
use lattix::solve::{SolverMode, SolverOptions};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let omega: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(1.5);
    let spec = annulus_problem(n, 8, 2, 5e-4);
    let opts = SolverOptions { tol: 1e-8, max_it: 100000, sor_omega: omega };
    let t = std::time::Instant::now();
    let rows = compare_solvers(
        &spec,
        &[SolverMode::BddcFull, SolverMode::Cholesky, SolverMode::CgSor],
        &opts,
    )
    .unwrap();
    for r in &rows {
        println!(
            "{}: iters={:?} setup={:.2}s solve={:.2}s l2={:.2e}",
            r.mode, r.iterations, r.setup_s, r.solve_s, r.l2_vs_first
        );
    }
    println!("wall {:.1}s (omega {omega})", t.elapsed().as_secs_f64());
}
