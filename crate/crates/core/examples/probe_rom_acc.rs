use lattix::geometry::{LevelSet, ThresholdParams};
use lattix::quad::QuadOptions;
use lattix::rom::{full_tensor_flat, rom_validation_error, train_model, ClusterGrid, TrainOptions};
use nalgebra::DVector;

fn main() {
    let opts = TrainOptions { n_s: 200, n_r: 40, d_int: 6, seed: 7, ..TrainOptions::default() };
    let model = train_model(&LevelSet::SchwarzDiamond, ClusterGrid::new(0.1, 0.9, 1), 8, 2, &opts, |_, _| {}).unwrap();
    let quad = QuadOptions::for_degree(8);
    let c = model.clusters[0].as_ref().unwrap();
    println!("projection (held-out): {:.3e}", rom_validation_error(&model, 0, 20, 999).unwrap());
    println!("sigma: first {:.3e} last {:.3e}", c.singular_values[0], c.singular_values.last().unwrap());

    // at an interpolation grid node: interpolation is exact there
    for k in [0, 777, 1200] {
        let mu = c.coeffs.node(k);
        let full = full_tensor_flat(&LevelSet::SchwarzDiamond, mu, 8, 2, &quad).unwrap();
        let rom = model.eval(8, 2, &ThresholdParams(mu)).unwrap().to_flat();
        // also: exact magic coefficients at this mu
        let rhs = DVector::from_iterator(c.magic.len(), c.magic.iter().map(|&m| full[m]));
        let coeff_exact = c.interp_matrix.clone().lu().solve(&rhs).unwrap();
        let recon_exact = &c.basis * coeff_exact;
        // and pure projection
        let proj = &c.basis * (c.basis.transpose() * &full);
        println!(
            "node {k}: mu={mu:?}\n  rom-eval err {:.3e} | magic-exact err {:.3e} | projection err {:.3e}",
            (&rom - &full).amax() / full.amax(),
            (&recon_exact - &full).amax() / full.amax(),
            (&proj - &full).amax() / full.amax()
        );
    }
    // between nodes
    let mu = [0.55, 0.43, 0.61, 0.37];
    let full = full_tensor_flat(&LevelSet::SchwarzDiamond, mu, 8, 2, &quad).unwrap();
    let rom = model.eval(8, 2, &ThresholdParams(mu)).unwrap().to_flat();
    let rhs = DVector::from_iterator(c.magic.len(), c.magic.iter().map(|&m| full[m]));
    let coeff_exact = c.interp_matrix.clone().lu().solve(&rhs).unwrap();
    let recon_exact = &c.basis * coeff_exact;
    println!(
        "midpoint: rom-eval {:.3e} | magic-exact {:.3e}",
        (&rom - &full).amax() / full.amax(),
        (&recon_exact - &full).amax() / full.amax()
    );
}
