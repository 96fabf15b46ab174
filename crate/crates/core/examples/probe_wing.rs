use lattix::element::MaterialLaw;
use lattix::geometry::*;
use lattix::solve::{run_solve, ProblemSpec, SolverMode, SolverOptions};
use std::f64::consts::PI;
use std::sync::Arc;

fn wing(n1: usize, n2: usize, chord: f64, thickness: f64, rho: f64) -> ProblemSpec {
    let aux = AuxMap::WingSlab { chord, thickness, s0: 0.02, s1: 0.98 };
    let mut lattice = build_tensor_lattice(
        aux, n1, n2, LevelSet::SchwarzDiamond,
        &ThresholdField::Tent { axis: 2, at_center: 0.1, at_edges: 1.0 },
        &TensorBcTags::default(),
    );
    let p_max = 4.5;
    let pressure: TractionData = TractionData::Field(Arc::new(move |x: [f64; 2]| {
        let s = (x[0] / chord).clamp(0.0, 1.0);
        [0.0, p_max * (PI * s).sin().max(0.0)]
    }));
    for be in lattice.boundary.iter_mut() {
        if !(be.edge == Edge::Bottom || be.edge == Edge::Top) { continue; }
        let col = be.cell % n1;
        let s_mid = (col as f64 + 0.5) / n1 as f64;
        if (0.18..=0.35).contains(&s_mid) {
            be.bc = BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0]));
        } else if be.edge == Edge::Top {
            be.bc = BoundaryCondition::Traction(pressure.clone());
        }
    }
    ProblemSpec::new(lattice, MaterialLaw::from_youngs(70_000.0, 0.3, true), 8, 2, rho)
}

fn main() {
    let opts = SolverOptions { tol: 1e-8, max_it: 400, sor_omega: 1.0 };
    for (n1, n2, chord, th, rho) in [
        (20usize, 2usize, 5000.0, 0.022, 1e-4),
        (20, 2, 2500.0, 0.044, 1e-4),
        (16, 2, 1600.0, 0.0688, 1e-4),
        (20, 3, 2000.0, 0.055, 1e-4),
        (24, 3, 2400.0, 0.0458, 1e-4),
    ] {
        let spec = wing(n1, n2, chord, th, rho);
        let t = std::time::Instant::now();
        match run_solve(&spec, SolverMode::BddcFull, None, &opts) {
            Ok((_, rep)) => println!(
                "{n1}x{n2} chord={chord} th={th}: iters={:?} wall={:.0}s",
                rep.iterations, t.elapsed().as_secs_f64()
            ),
            Err(e) => println!("{n1}x{n2} chord={chord}: ERR {e}"),
        }
    }
}
