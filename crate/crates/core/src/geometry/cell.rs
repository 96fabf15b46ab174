use super::levelset::{LevelSet, ThresholdParams};
use super::map::CellMap;

/// One lattice cell: geometric map, level-set, and corner thresholds. The
/// unit of both discretization and domain decomposition.
#[derive(Clone, Debug)]
pub struct Cell {
    pub index: usize,
    pub map: CellMap,
    pub level_set: LevelSet,
    pub thresholds: ThresholdParams,
}

impl Cell {
    pub fn new(index: usize, map: CellMap, level_set: LevelSet, thresholds: ThresholdParams) -> Self {
        Cell { index, map, level_set, thresholds }
    }

    /// Unit-square cell with identity map.
    pub fn reference(level_set: LevelSet, thresholds: ThresholdParams) -> Self {
        Cell::new(0, CellMap::identity(), level_set, thresholds)
    }

    /// Signed trimming function `phi = phi0 - mu`; negative inside the
    /// active domain.
    pub fn phi(&self, xi1: f64, xi2: f64) -> f64 {
        self.level_set.eval(xi1, xi2) - self.thresholds.eval(xi1, xi2)
    }

    /// Parametric gradient of the trimming function.
    pub fn grad_phi(&self, xi1: f64, xi2: f64) -> [f64; 2] {
        let g0 = self.level_set.grad(xi1, xi2);
        let gm = self.thresholds.grad(xi1, xi2);
        [g0[0] - gm[0], g0[1] - gm[1]]
    }
}
