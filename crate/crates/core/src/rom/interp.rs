use nalgebra::DVector;

use crate::element::GllBasis;

/// Tensor-product Lagrange interpolant over a 4D cluster box on GLL nodes:
/// stores the exact reduced coefficients at the grid nodes and evaluates by
/// products of 1D Lagrange values.
#[derive(Clone, Debug)]
pub struct CoefficientInterpolant {
    pub d_int: usize,
    pub cluster_box: [[f64; 2]; 4],
    /// reduced coefficient vectors at the `(d_int + 1)^4` grid nodes,
    /// lexicographic with the last parameter fastest
    pub values: Vec<DVector<f64>>,
    basis: GllBasis,
}

impl CoefficientInterpolant {
    pub fn new(d_int: usize, cluster_box: [[f64; 2]; 4], values: Vec<DVector<f64>>) -> Self {
        let basis = GllBasis::new(d_int);
        assert_eq!(values.len(), (d_int + 1).pow(4));
        CoefficientInterpolant { d_int, cluster_box, values, basis }
    }

    pub fn n_nodes(&self) -> usize {
        (self.d_int + 1).pow(4)
    }

    /// Parameter coordinates of grid node `flat`.
    pub fn node(&self, flat: usize) -> [f64; 4] {
        let n = self.d_int + 1;
        let mut rem = flat;
        let mut mi = [0usize; 4];
        for d in (0..4).rev() {
            mi[d] = rem % n;
            rem /= n;
        }
        std::array::from_fn(|d| {
            let [lo, hi] = self.cluster_box[d];
            lo + (hi - lo) * self.basis.nodes[mi[d]]
        })
    }

    /// Evaluate the interpolant at a parameter point inside the box.
    pub fn eval(&self, mu: [f64; 4]) -> DVector<f64> {
        let n = self.d_int + 1;
        let mut vals = vec![vec![0.0; n]; 4];
        let mut scratch = vec![0.0; n];
        for d in 0..4 {
            let [lo, hi] = self.cluster_box[d];
            let t = (mu[d] - lo) / (hi - lo);
            self.basis.eval_1d(t, &mut vals[d], &mut scratch);
        }
        let n_r = self.values.first().map_or(0, |v| v.len());
        let mut out = DVector::zeros(n_r);
        for (flat, value) in self.values.iter().enumerate() {
            let mut rem = flat;
            let mut w = 1.0;
            for d in (0..4).rev() {
                w *= vals[d][rem % n];
                rem /= n;
            }
            if w != 0.0 {
                out.axpy(w, value, 1.0);
            }
        }
        out
    }
}
