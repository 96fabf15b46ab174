use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cell::Cell;
use super::levelset::{LevelSet, ThresholdParams};
use super::map::{AuxMap, CellMap};

/// Edge of the unit parametric square. The serialized labels follow the
/// convention left `1b`, right `1t`, bottom `2b`, top `2t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Edge {
    #[serde(rename = "1b")]
    Left,
    #[serde(rename = "1t")]
    Right,
    #[serde(rename = "2b")]
    Bottom,
    #[serde(rename = "2t")]
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    pub fn label(self) -> &'static str {
        match self {
            Edge::Left => "1b",
            Edge::Right => "1t",
            Edge::Bottom => "2b",
            Edge::Top => "2t",
        }
    }

    /// Parametric point at curve parameter `t` in `[0, 1]`; the running
    /// coordinate always increases with `t`.
    pub fn point(self, t: f64) -> [f64; 2] {
        match self {
            Edge::Left => [0.0, t],
            Edge::Right => [1.0, t],
            Edge::Bottom => [t, 0.0],
            Edge::Top => [t, 1.0],
        }
    }

    /// Unit parametric tangent of the running coordinate.
    pub fn tangent(self) -> [f64; 2] {
        match self {
            Edge::Left | Edge::Right => [0.0, 1.0],
            Edge::Bottom | Edge::Top => [1.0, 0.0],
        }
    }
}

/// Prescribed displacement on a whole conformal edge.
#[derive(Clone)]
pub enum DirichletData {
    Constant([f64; 2]),
    Field(Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>),
}

impl DirichletData {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            DirichletData::Constant(v) => *v,
            DirichletData::Field(f) => f(x),
        }
    }
}

impl std::fmt::Debug for DirichletData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DirichletData::Constant(v) => write!(f, "Dirichlet({v:?})"),
            DirichletData::Field(_) => write!(f, "Dirichlet(fn)"),
        }
    }
}

/// Traction applied to the active part of a conformal edge, as a function of
/// physical position.
#[derive(Clone)]
pub enum TractionData {
    Constant([f64; 2]),
    Field(Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>),
}

impl TractionData {
    pub fn eval(&self, x: [f64; 2]) -> [f64; 2] {
        match self {
            TractionData::Constant(v) => *v,
            TractionData::Field(f) => f(x),
        }
    }
}

impl std::fmt::Debug for TractionData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TractionData::Constant(v) => write!(f, "Traction({v:?})"),
            TractionData::Field(_) => write!(f, "Traction(fn)"),
        }
    }
}

/// Boundary condition on an outer conformal edge. Either both displacement
/// components are prescribed or none; mixed per-component conditions are not
/// representable.
#[derive(Clone, Debug, Default)]
pub enum BoundaryCondition {
    #[default]
    Free,
    Dirichlet(DirichletData),
    Traction(TractionData),
}

/// Shared interface between two cells: the paired (cell, edge) sides. The
/// running coordinate increases in the same direction on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interface {
    pub a: (usize, Edge),
    pub b: (usize, Edge),
}

/// Outer boundary edge with its condition tag.
#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    pub cell: usize,
    pub edge: Edge,
    pub bc: BoundaryCondition,
}

/// Assembled multi-cell structure: cells plus interface adjacency and
/// boundary tags. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub cells: Vec<Cell>,
    pub interfaces: Vec<Interface>,
    pub boundary: Vec<BoundaryEdge>,
}

/// Compatibility defect on one interface, reported as data.
#[derive(Clone, Copy, Debug)]
pub struct Violation {
    pub interface: usize,
    pub max_position_gap: f64,
    pub max_phi_gap: f64,
}

impl Lattice {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Boundary condition attached to `(cell, edge)`, if that edge is an
    /// outer boundary edge.
    pub fn boundary_condition(&self, cell: usize, edge: Edge) -> Option<&BoundaryCondition> {
        self.boundary
            .iter()
            .find(|b| b.cell == cell && b.edge == edge)
            .map(|b| &b.bc)
    }

    /// Probes every interface at `n_probe` parameter samples and reports the
    /// maximal positional and trimming-function gaps. Violations are data;
    /// the caller decides what is acceptable.
    pub fn check_compatibility(&self, n_probe: usize, tol: f64) -> Vec<Violation> {
        assert!(n_probe >= 2, "need at least two probe points per interface");
        let mut out = Vec::new();
        for (k, iface) in self.interfaces.iter().enumerate() {
            let ca = &self.cells[iface.a.0];
            let cb = &self.cells[iface.b.0];
            let mut pos_gap: f64 = 0.0;
            let mut phi_gap: f64 = 0.0;
            for s in 0..n_probe {
                let t = s as f64 / (n_probe - 1) as f64;
                let pa = iface.a.1.point(t);
                let pb = iface.b.1.point(t);
                let xa = ca.map.position(pa[0], pa[1]);
                let xb = cb.map.position(pb[0], pb[1]);
                pos_gap = pos_gap.max((xa[0] - xb[0]).hypot(xa[1] - xb[1]));
                phi_gap = phi_gap.max((ca.phi(pa[0], pa[1]) - cb.phi(pb[0], pb[1])).abs());
            }
            if pos_gap > tol || phi_gap > tol {
                out.push(Violation { interface: k, max_position_gap: pos_gap, max_phi_gap: phi_gap });
            }
        }
        out
    }
}

/// Scalar threshold field over the auxiliary parametric domain, sampled at
/// cell corners when building tensor lattices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ThresholdField {
    Constant { value: f64 },
    /// `c0 + c1 * t1 + c2 * t2` in auxiliary coordinates.
    Affine { c0: f64, c1: f64, c2: f64 },
    /// Symmetric tent profile along one axis: `at_center` on the midline,
    /// `at_edges` on the two faces, linear in `|2 t - 1|`.
    Tent { axis: u8, at_center: f64, at_edges: f64 },
}

impl ThresholdField {
    pub fn eval(&self, t1: f64, t2: f64) -> f64 {
        match *self {
            ThresholdField::Constant { value } => value,
            ThresholdField::Affine { c0, c1, c2 } => c0 + c1 * t1 + c2 * t2,
            ThresholdField::Tent { axis, at_center, at_edges } => {
                let t = if axis == 1 { t1 } else { t2 };
                at_center + (at_edges - at_center) * (2.0 * t - 1.0).abs()
            }
        }
    }
}

/// Boundary tags for the four outer sides of a tensor lattice, in auxiliary
/// coordinates (left = t1 = 0, right = t1 = 1, bottom = t2 = 0, top = t2 = 1).
#[derive(Clone, Debug, Default)]
pub struct TensorBcTags {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub bottom: BoundaryCondition,
    pub top: BoundaryCondition,
}

/// Builds an `n1 x n2` tensor-product lattice by restricting the auxiliary
/// map to subrectangles. Compatibility holds by construction: neighboring
/// cells share the restriction of the same map and the same sampled corner
/// thresholds.
pub fn build_tensor_lattice(
    aux: AuxMap,
    n1: usize,
    n2: usize,
    level_set: LevelSet,
    thresholds: &ThresholdField,
    bc: &TensorBcTags,
) -> Lattice {
    assert!(n1 >= 1 && n2 >= 1);
    let (h1, h2) = (1.0 / n1 as f64, 1.0 / n2 as f64);

    // Orientation of the auxiliary map. A negatively oriented map (the
    // quarter annulus is one) gets its per-cell restrictions reparameterized
    // with the local second axis reversed, so every cell map has a positive
    // jacobian determinant.
    let jc = aux.jacobian(0.5, 0.5);
    let flip = jc[0][0] * jc[1][1] - jc[0][1] * jc[1][0] < 0.0;

    let mut cells = Vec::with_capacity(n1 * n2);
    for j in 0..n2 {
        for i in 0..n1 {
            let (origin, size) = if flip {
                ([i as f64 * h1, (j + 1) as f64 * h2], [h1, -h2])
            } else {
                ([i as f64 * h1, j as f64 * h2], [h1, h2])
            };
            let map = CellMap::AuxSub { aux: aux.clone(), origin, size };
            // corner thresholds sampled at the auxiliary images of the local
            // corners (bottom-left, bottom-right, top-left, top-right)
            let corners = [
                thresholds.eval(origin[0], origin[1]),
                thresholds.eval(origin[0] + size[0], origin[1]),
                thresholds.eval(origin[0], origin[1] + size[1]),
                thresholds.eval(origin[0] + size[0], origin[1] + size[1]),
            ];
            cells.push(Cell::new(
                j * n1 + i,
                map,
                level_set.clone(),
                ThresholdParams(corners),
            ));
        }
    }

    // With the flipped parameterization the local top edge faces the lower
    // auxiliary row.
    let (up_edge, down_edge) = if flip { (Edge::Bottom, Edge::Top) } else { (Edge::Top, Edge::Bottom) };

    let id = |i: usize, j: usize| j * n1 + i;
    let mut interfaces = Vec::new();
    let mut boundary = Vec::new();
    for j in 0..n2 {
        for i in 0..n1 {
            if i + 1 < n1 {
                interfaces.push(Interface {
                    a: (id(i, j), Edge::Right),
                    b: (id(i + 1, j), Edge::Left),
                });
            }
            if j + 1 < n2 {
                interfaces.push(Interface {
                    a: (id(i, j), up_edge),
                    b: (id(i, j + 1), down_edge),
                });
            }
            if i == 0 {
                boundary.push(BoundaryEdge { cell: id(i, j), edge: Edge::Left, bc: bc.left.clone() });
            }
            if i + 1 == n1 {
                boundary.push(BoundaryEdge { cell: id(i, j), edge: Edge::Right, bc: bc.right.clone() });
            }
            if j == 0 {
                boundary.push(BoundaryEdge { cell: id(i, j), edge: down_edge, bc: bc.bottom.clone() });
            }
            if j + 1 == n2 {
                boundary.push(BoundaryEdge { cell: id(i, j), edge: up_edge, bc: bc.top.clone() });
            }
        }
    }

    Lattice { cells, interfaces, boundary }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_one_construction() {
        let lat = build_tensor_lattice(
            AuxMap::Identity,
            2,
            1,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 0.3 },
            &TensorBcTags::default(),
        );
        assert_eq!(lat.n_cells(), 2);
        // cell 0 covers [0, 0.5] x [0, 1]
        let x = lat.cells[0].map.position(1.0, 1.0);
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let x = lat.cells[1].map.position(0.0, 0.0);
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        assert_eq!(lat.interfaces.len(), 1);
        assert_eq!(lat.interfaces[0].a, (0, Edge::Right));
        assert_eq!(lat.interfaces[0].b, (1, Edge::Left));
        assert!(lat.check_compatibility(17, 1e-12).is_empty());
    }

    #[test]
    fn annulus_threshold_sampling() {
        let lat = build_tensor_lattice(
            AuxMap::QuarterAnnulus { r0: 0.6, r1: 1.0 },
            8,
            4,
            LevelSet::SchwarzDiamond,
            &ThresholdField::Affine { c0: 0.9, c1: -0.8, c2: 0.0 },
            &TensorBcTags::default(),
        );
        // leftmost cells sample mu = 0.9 on their left corners
        let left = &lat.cells[0].thresholds.0;
        assert!((left[0] - 0.9).abs() < 1e-15 && (left[2] - 0.9).abs() < 1e-15);
        // rightmost cells sample mu = 0.1 on their right corners
        let right = &lat.cells[7].thresholds.0;
        assert!((right[1] - 0.1).abs() < 1e-15 && (right[3] - 0.1).abs() < 1e-15);
        assert!(lat.check_compatibility(100, 1e-12).is_empty());
    }

    #[test]
    fn mismatched_thresholds_reported() {
        let mut lat = build_tensor_lattice(
            AuxMap::Identity,
            2,
            1,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 0.2 },
            &TensorBcTags::default(),
        );
        // corrupt the shared corner: mu_2 of cell 0 vs mu_1 of cell 1
        lat.cells[0].thresholds.0[1] += 0.25;
        let v = lat.check_compatibility(33, 1e-12);
        assert_eq!(v.len(), 1);
        assert!((v[0].max_phi_gap - 0.25).abs() < 1e-12);
        assert!(v[0].max_position_gap < 1e-15);
    }

    #[test]
    fn offset_maps_reported() {
        let mut lat = build_tensor_lattice(
            AuxMap::Identity,
            2,
            1,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 0.2 },
            &TensorBcTags::default(),
        );
        let delta = 3e-3;
        lat.cells[1].map = CellMap::Rect { origin: [0.5 + delta, 0.0], size: [0.5, 1.0] };
        let v = lat.check_compatibility(11, 1e-12);
        assert_eq!(v.len(), 1);
        assert!((v[0].max_position_gap - delta).abs() < 1e-12);
    }
}
