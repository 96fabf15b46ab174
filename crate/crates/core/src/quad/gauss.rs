use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Legendre polynomial `P_n` and its derivative at `x` via the three-term
/// recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut pm, mut p) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let pn = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * pm) / kf;
        pm = p;
        p = pn;
    }
    let dp = (n as f64) * (x * p - pm) / (x * x - 1.0);
    (p, dp)
}

/// 1D Gauss-Legendre rule on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct Gauss1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn compute_gauss(n: usize) -> Gauss1d {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev seed, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // reverse order so nodes ascend on [0, 1]
        nodes[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    Gauss1d { nodes, weights }
}

/// Shared cache of 1D Gauss rules; rule generation is deterministic.
pub fn gauss_1d(n: usize) -> Arc<Gauss1d> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Gauss1d>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(n).or_insert_with(|| Arc::new(compute_gauss(n))).clone()
}
