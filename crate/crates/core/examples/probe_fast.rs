use lattix::element::*;
use lattix::geometry::*;
use lattix::quad::*;
use std::time::Instant;

fn main() {
    let cell = Cell::reference(LevelSet::SchwarzDiamond, ThresholdParams([0.55, 0.43, 0.61, 0.37]));
    let (p, q) = (8usize, 2usize);
    let basis = GllBasis::new(p);
    let opts = QuadOptions::for_degree(p);

    let t = Instant::now();
    let rules = cut_cell_rules(&cell, &opts).unwrap();
    println!("rules: {:.1} ms ({} pts)", t.elapsed().as_secs_f64() * 1e3, rules.interior.len());

    let t = Instant::now();
    let tensor = build_fast_tensor(&cell, &basis, &rules, q, &ForceRequest::default());
    println!("tensor: {:.1} ms (n_i = {})", t.elapsed().as_secs_f64() * 1e3, tensor.flat_len());

    let t = Instant::now();
    let flat = tensor.to_flat();
    println!("flatten: {:.1} ms, |I| = {:.3e}", t.elapsed().as_secs_f64() * 1e3, flat.amax());

    let loads = CellLoads::default();
    let interp = map_material(&cell, MaterialLaw { lambda: 2.0, mu: 1.0 }, q, &loads).unwrap();
    let reference = reference_tensor(p, q);
    let t = Instant::now();
    let k = contract_stiffness(&tensor, &reference, &interp, 5e-4).unwrap();
    println!("contract: {:.1} ms (K {}x{})", t.elapsed().as_secs_f64() * 1e3, k.nrows(), k.ncols());

    // compare with full assembly
    let model = MaterialModel::new(&cell, MaterialLaw { lambda: 2.0, mu: 1.0 }, &loads);
    let t = Instant::now();
    let kf = assemble_full(&basis, &model, &rules, 5e-4).unwrap();
    println!("full assembly: {:.1} ms", t.elapsed().as_secs_f64() * 1e3);
    println!("identity-map fast vs full: {:.3e}", (&k - &kf).norm() / kf.norm());
}
