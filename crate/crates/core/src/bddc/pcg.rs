use nalgebra::DVector;

/// Wall-clock phase breakdown of a solve, in seconds.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct PhaseTimings {
    pub assembly: f64,
    pub setup: f64,
    pub solve: f64,
    pub total: f64,
}

/// Outcome of a preconditioned conjugate-gradient run.
#[derive(Clone, Debug, Default)]
pub struct PcgReport {
    pub iterations: usize,
    /// relative unpreconditioned residuals, one entry per iteration plus the
    /// initial residual
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub timings: PhaseTimings,
}

/// Standard preconditioned conjugate gradients on an abstract operator
/// pair. Convergence is declared on the unpreconditioned relative residual
/// `|r| / |b|`. On reaching `max_it` the best iterate so far is returned
/// with `converged = false`.
pub fn pcg(
    apply_a: impl Fn(&DVector<f64>) -> DVector<f64>,
    apply_m: impl Fn(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    tol: f64,
    max_it: usize,
) -> (DVector<f64>, PcgReport) {
    let n = b.len();
    let mut report = PcgReport::default();
    let bnorm = b.norm();
    if n == 0 || bnorm == 0.0 {
        report.converged = true;
        report.residual_history.push(0.0);
        return (DVector::zeros(n), report);
    }

    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    report.residual_history.push(1.0);
    if 1.0 <= tol {
        report.converged = true;
        return (x, report);
    }
    let mut z = apply_m(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    for it in 1..=max_it {
        let q = apply_a(&p);
        let pq = p.dot(&q);
        if pq <= 0.0 || !pq.is_finite() {
            // loss of positive definiteness; stop with the current iterate
            report.iterations = it - 1;
            report.converged = false;
            return (x, report);
        }
        let alpha = rz / pq;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &q, 1.0);
        let rel = r.norm() / bnorm;
        report.residual_history.push(rel);
        report.iterations = it;
        if rel <= tol {
            report.converged = true;
            return (x, report);
        }
        z = apply_m(&r);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + &p * beta;
    }
    report.converged = false;
    (x, report)
}
