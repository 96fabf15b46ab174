use lattix::drivers::{run_demo, DemoName};
use lattix::solve::{SolverMode, SolverOptions};

fn main() {
    let opts = SolverOptions { tol: 1e-8, max_it: 300, sor_omega: 1.0 };
    for (name, scale, p) in [(DemoName::Wrench, 1.0, 8), (DemoName::Wing, 0.5, 8)] {
        let t = std::time::Instant::now();
        match run_demo(name, scale, p, SolverMode::BddcFull, None, &opts) {
            Ok((_, _, rep)) => println!(
                "{name:?}: cells={} iters={:?} converged={} wall={:.1}s",
                rep.n_cells, rep.iterations, rep.converged, t.elapsed().as_secs_f64()
            ),
            Err(e) => println!("{name:?}: ERROR {e}"),
        }
    }
}
