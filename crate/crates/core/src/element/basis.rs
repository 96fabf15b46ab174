use crate::quad::legendre;

/// Lagrange basis of degree `p` on Gauss-Lobatto-Legendre nodes over
/// `[0, 1]`; 2D bases are tensor products ordered with the second coordinate
/// outer, so node `(i, j)` has id `j * (p + 1) + i`.
#[derive(Clone, Debug)]
pub struct GllBasis {
    pub degree: usize,
    pub nodes: Vec<f64>,
    bary: Vec<f64>,
}

/// GLL nodes of degree `p` on `[0, 1]`: the endpoints plus the interior
/// roots of the derivative of the Legendre polynomial `P_p`, ascending.
pub fn gll_nodes(p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let mut xs = vec![0.0; p + 1];
    xs[0] = -1.0;
    xs[p] = 1.0;
    for i in 1..p {
        // seed between Chebyshev-Lobatto neighbors, Newton on P_p'
        let mut x = -(std::f64::consts::PI * i as f64 / p as f64).cos();
        for _ in 0..100 {
            let (pp, dp) = legendre(p, x);
            // d/dx P_p' = (2 x P_p' - p (p + 1) P_p) / (1 - x^2)
            let ddp = (2.0 * x * dp - (p * (p + 1)) as f64 * pp) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        xs[i] = x;
    }
    xs.iter().map(|x| 0.5 * (x + 1.0)).collect()
}

impl GllBasis {
    pub fn new(p: usize) -> Self {
        let nodes = gll_nodes(p);
        let n = nodes.len();
        let mut bary = vec![1.0; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    bary[i] /= nodes[i] - nodes[j];
                }
            }
        }
        GllBasis { degree: p, nodes, bary }
    }

    pub fn n_1d(&self) -> usize {
        self.degree + 1
    }

    pub fn n_2d(&self) -> usize {
        self.n_1d() * self.n_1d()
    }

    /// Values and derivatives of all 1D Lagrange polynomials at `x`, via the
    /// barycentric form with an exact branch at the nodes.
    pub fn eval_1d(&self, x: f64, values: &mut [f64], derivs: &mut [f64]) {
        let n = self.n_1d();
        debug_assert!(values.len() == n && derivs.len() == n);
        // node hit: Kronecker values, differentiation-matrix row derivatives
        for k in 0..n {
            if (x - self.nodes[k]).abs() < 1e-13 {
                let mut dkk = 0.0;
                for i in 0..n {
                    if i == k {
                        values[i] = 1.0;
                    } else {
                        values[i] = 0.0;
                        let d = (self.bary[i] / self.bary[k]) / (self.nodes[k] - self.nodes[i]);
                        derivs[i] = d;
                        dkk -= d;
                    }
                }
                derivs[k] = dkk;
                return;
            }
        }
        let mut s = 0.0;
        let mut s2 = 0.0;
        for j in 0..n {
            let d = x - self.nodes[j];
            let t = self.bary[j] / d;
            s += t;
            s2 += t / d;
        }
        for i in 0..n {
            let d = x - self.nodes[i];
            let li = (self.bary[i] / d) / s;
            values[i] = li;
            derivs[i] = li * (s2 / s - 1.0 / d);
        }
    }

    pub fn values_1d(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_1d();
        let mut v = vec![0.0; n];
        let mut d = vec![0.0; n];
        self.eval_1d(x, &mut v, &mut d);
        (v, d)
    }

    /// Tensor-product values and parametric gradients of all 2D basis
    /// functions at `(xi1, xi2)`.
    pub fn eval_2d(&self, xi1: f64, xi2: f64) -> (Vec<f64>, Vec<[f64; 2]>) {
        let n = self.n_1d();
        let (v1, d1) = self.values_1d(xi1);
        let (v2, d2) = self.values_1d(xi2);
        let mut vals = vec![0.0; n * n];
        let mut grads = vec![[0.0; 2]; n * n];
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                vals[k] = v1[i] * v2[j];
                grads[k] = [d1[i] * v2[j], v1[i] * d2[j]];
            }
        }
        (vals, grads)
    }
}
