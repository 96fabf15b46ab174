use serde::{Deserialize, Serialize};

use crate::geometry::ThresholdParams;
use crate::{Error, Result};

/// Partition of the threshold-parameter hypercube into `n_k^4` axis-aligned
/// clusters. Intervals are left-closed/right-open with the last one closed,
/// so the clusters cover the hypercube exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterGrid {
    pub lo: f64,
    pub hi: f64,
    pub n_k: usize,
}

impl ClusterGrid {
    pub fn new(lo: f64, hi: f64, n_k: usize) -> Self {
        assert!(lo < hi && n_k >= 1);
        ClusterGrid { lo, hi, n_k }
    }

    pub fn n_clusters(&self) -> usize {
        self.n_k.pow(4)
    }

    fn axis_index(&self, component: usize, value: f64) -> Result<usize> {
        let t = (value - self.lo) / (self.hi - self.lo);
        // boundary membership up to representation round-off
        let eps = 1e-12;
        if !(-eps..=1.0 + eps).contains(&t) {
            return Err(Error::OutOfTrainingDomain {
                component,
                value,
                lo: self.lo,
                hi: self.hi,
            });
        }
        let t = t.clamp(0.0, 1.0);
        Ok(((t * self.n_k as f64).floor() as usize).min(self.n_k - 1))
    }

    /// Multi-index per parameter, flattened row-major (last parameter
    /// fastest).
    pub fn find(&self, mu: &ThresholdParams) -> Result<usize> {
        let mut idx = 0;
        for (c, &v) in mu.0.iter().enumerate() {
            idx = idx * self.n_k + self.axis_index(c, v)?;
        }
        Ok(idx)
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 4] {
        let mut rem = flat;
        let mut mi = [0usize; 4];
        for d in (0..4).rev() {
            mi[d] = rem % self.n_k;
            rem /= self.n_k;
        }
        mi
    }

    /// Per-parameter bounds of one cluster.
    pub fn cluster_box(&self, flat: usize) -> [[f64; 2]; 4] {
        let mi = self.multi_index(flat);
        let w = (self.hi - self.lo) / self.n_k as f64;
        std::array::from_fn(|d| {
            let a = self.lo + mi[d] as f64 * w;
            [a, a + w]
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_lookup() {
        let g = ClusterGrid::new(0.0, 1.0, 2);
        let idx = g.find(&ThresholdParams([0.2, 0.7, 0.3, 0.9])).unwrap();
        assert_eq!(g.multi_index(idx), [0, 1, 0, 1]);
    }

    #[test]
    fn corners() {
        let g = ClusterGrid::new(0.0, 1.0, 2);
        assert_eq!(g.find(&ThresholdParams::uniform(0.0)).unwrap(), 0);
        // upper bound falls in the last (right-closed) interval
        let last = g.find(&ThresholdParams::uniform(1.0)).unwrap();
        assert_eq!(g.multi_index(last), [1, 1, 1, 1]);
        assert_eq!(last, g.n_clusters() - 1);
    }

    #[test]
    fn out_of_domain() {
        let g = ClusterGrid::new(0.1, 0.9, 2);
        assert!(matches!(
            g.find(&ThresholdParams([0.5, 0.95, 0.5, 0.5])),
            Err(Error::OutOfTrainingDomain { component: 1, .. })
        ));
    }

    #[test]
    fn boxes_partition() {
        let g = ClusterGrid::new(-1.0, 3.0, 3);
        for k in 0..g.n_clusters() {
            let b = g.cluster_box(k);
            for d in 0..4 {
                assert!(b[d][0] >= -1.0 - 1e-12 && b[d][1] <= 3.0 + 1e-12);
                assert!((b[d][1] - b[d][0] - 4.0 / 3.0).abs() < 1e-12);
            }
        }
    }
}
