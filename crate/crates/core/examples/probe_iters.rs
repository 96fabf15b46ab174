use lattix::drivers::annulus_material;
use lattix::element::MaterialLaw;
use lattix::geometry::*;
use lattix::solve::{run_solve, ProblemSpec, SolverMode, SolverOptions};

fn run(label: &str, spec: &ProblemSpec) {
    let opts = SolverOptions { tol: 1e-8, max_it: 300, sor_omega: 1.0 };
    let (_, rep) = run_solve(spec, SolverMode::BddcFull, None, &opts).unwrap();
    let h = &rep.residual_history;
    let tail: Vec<String> = h.iter().rev().take(6).rev().map(|r| format!("{r:.1e}")).collect();
    println!("{label}: iters={:?} tail={:?}", rep.iterations, tail);
}

fn main() {
    let bc = TensorBcTags {
        left: BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0])),
        right: BoundaryCondition::Traction(TractionData::Constant([0.0, -0.1])),
        ..Default::default()
    };
    let p = 8;
    // untrimmed identity lattice
    let lat = build_tensor_lattice(AuxMap::Identity, 8, 4, LevelSet::SchwarzDiamond,
        &ThresholdField::Constant { value: 10.0 }, &bc);
    run("identity untrimmed   ", &ProblemSpec::new(lat, annulus_material(), p, 2, 5e-4));
    // identity with annulus-style trimming
    let lat = build_tensor_lattice(AuxMap::Identity, 8, 4, LevelSet::SchwarzDiamond,
        &ThresholdField::Affine { c0: 0.9, c1: -0.8, c2: 0.0 }, &bc);
    run("identity trimmed     ", &ProblemSpec::new(lat, annulus_material(), p, 2, 5e-4));
    // annulus untrimmed
    let lat = build_tensor_lattice(AuxMap::QuarterAnnulus { r0: 0.6, r1: 1.0 }, 8, 4,
        LevelSet::SchwarzDiamond, &ThresholdField::Constant { value: 10.0 }, &bc);
    run("annulus untrimmed    ", &ProblemSpec::new(lat, annulus_material(), p, 2, 5e-4));
    // annulus trimmed (the benchmark), rho sweep
    for rho in [0.0, 5e-4, 1e-2] {
        let lat = build_tensor_lattice(AuxMap::QuarterAnnulus { r0: 0.6, r1: 1.0 }, 8, 4,
            LevelSet::SchwarzDiamond, &ThresholdField::Affine { c0: 0.9, c1: -0.8, c2: 0.0 }, &bc);
        run(&format!("annulus trimmed r={rho:.0e}"), &ProblemSpec::new(lat, annulus_material(), p, 2, rho));
    }
    let _ = MaterialLaw { lambda: 1.0, mu: 1.0 };
}
