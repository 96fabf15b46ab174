use super::gauss::gauss_1d;
use crate::geometry::{Cell, Edge};

/// 1D rule over the active portion of a conformal edge, in the edge
/// parameter; weights are parametric lengths.
#[derive(Clone, Debug, Default)]
pub struct EdgeRule {
    pub t: Vec<f64>,
    pub w: Vec<f64>,
}

impl EdgeRule {
    pub fn total_weight(&self) -> f64 {
        self.w.iter().sum()
    }
}

/// Builds the rule on `{t : phi(edge(t)) < 0}` by scanning for sign changes,
/// bisecting the crossings, and laying Gauss points on each inside interval.
pub fn conformal_edge_rule(cell: &Cell, edge: Edge, n_gauss: usize, n_scan: usize) -> EdgeRule {
    let phi_at = |t: f64| {
        let p = edge.point(t);
        cell.phi(p[0], p[1])
    };
    let n = n_scan.max(8);
    let mut roots = Vec::new();
    let mut prev_t = 0.0;
    let mut prev_v = phi_at(0.0);
    let starts_inside = prev_v < 0.0;
    for j in 1..=n {
        let t = j as f64 / n as f64;
        let v = phi_at(t);
        if (prev_v < 0.0) != (v < 0.0) {
            let (mut a, mut b, mut fa) = (prev_t, t, prev_v);
            while b - a > 1e-14 {
                let m = 0.5 * (a + b);
                let fm = phi_at(m);
                if (fa < 0.0) != (fm < 0.0) {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_t = t;
        prev_v = v;
    }

    let mut intervals = Vec::new();
    let mut inside = starts_inside;
    let mut start = 0.0;
    for &r in &roots {
        if inside {
            intervals.push([start, r]);
        }
        start = r;
        inside = !inside;
    }
    if inside {
        intervals.push([start, 1.0]);
    }

    let g = gauss_1d(n_gauss);
    let mut rule = EdgeRule::default();
    for iv in intervals {
        let len = iv[1] - iv[0];
        for (x, w) in g.nodes.iter().zip(&g.weights) {
            rule.t.push(iv[0] + len * x);
            rule.w.push(w * len);
        }
    }
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LevelSet, ThresholdParams};

    #[test]
    fn full_edge_when_untrimmed() {
        let cell = Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(5.0));
        let r = conformal_edge_rule(&cell, Edge::Bottom, 6, 32);
        assert!((r.total_weight() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn primitive_bottom_edge_active_length() {
        // phi(t, 0) = cos(2 pi t) + 1 - 1 - mu; active where cos(2 pi t) < mu
        let mu = 0.3;
        let cell = Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(mu));
        let r = conformal_edge_rule(&cell, Edge::Bottom, 8, 64);
        // cos(2 pi t) < 0.3 between t = acos(0.3)/(2 pi) and 1 - that
        let t0 = (mu).acos() / (2.0 * std::f64::consts::PI);
        let exact = (1.0 - t0) - t0;
        assert!((r.total_weight() - exact).abs() < 1e-10);
    }

    #[test]
    fn fully_outside_edge_is_empty() {
        // mu = -5 puts the whole square outside
        let cell = Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(-5.0));
        let r = conformal_edge_rule(&cell, Edge::Top, 4, 32);
        assert!(r.t.is_empty());
    }
}
