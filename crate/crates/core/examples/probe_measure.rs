use lattix::bddc::{classify_dofs, BddcOperators, EdgeMeasure};
use lattix::drivers::annulus_problem;
use lattix::solve::{assemble_elements, partition_elements, StiffnessMode};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let spec = annulus_problem(n, 8, 2, 5e-4);
    let partition = classify_dofs(&spec.lattice, spec.p).unwrap();
    let raw = assemble_elements(&spec, &StiffnessMode::Full).unwrap();
    let elements = partition_elements(&partition, &raw);
    for measure in [EdgeMeasure::Untrimmed, EdgeMeasure::Trimmed] {
        let ops = BddcOperators::build_with(&spec.lattice, partition.clone(), &elements, measure).unwrap();
        let (_, rep) = ops.solve_interface(1e-8, 300);
        println!("{measure:?}: iters={} converged={}", rep.iterations, rep.converged);
    }
}
