use std::sync::Arc;

use crate::geometry::{Cell, Edge, MapEval, TractionData};
use crate::Result;

use super::basis::GllBasis;

/// Isotropic material in Lame form.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MaterialLaw {
    pub lambda: f64,
    pub mu: f64,
}

impl MaterialLaw {
    /// Conversion from engineering constants. Plane strain keeps the 3D Lame
    /// parameters; plane stress substitutes the reduced first parameter.
    pub fn from_youngs(e: f64, nu: f64, plane_strain: bool) -> Self {
        let mu = e / (2.0 * (1.0 + nu));
        let lambda = if plane_strain {
            e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        } else {
            e * nu / (1.0 - nu * nu)
        };
        MaterialLaw { lambda, mu }
    }

    /// Elasticity tensor `C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk)`
    /// flattened with index `((i * 2 + j) * 2 + k) * 2 + l`.
    pub fn elasticity_tensor(&self) -> [f64; 16] {
        let mut c = [0.0; 16];
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        c[((i * 2 + j) * 2 + k) * 2 + l] = self.lambda * d(i, j) * d(k, l)
                            + self.mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k));
                    }
                }
            }
        }
        c
    }
}

/// Pulls the physical elasticity tensor back to cell-parametric coordinates:
/// `Chat_ijkl = j * (dxi_m/dx_j) C_imkn (dxi_n/dx_l)`.
pub fn pullback_tensor(c: &[f64; 16], ev: &MapEval) -> [f64; 16] {
    let inv = ev.inv_jac();
    let mut chat = [0.0; 16];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let mut acc = 0.0;
                    for m in 0..2 {
                        for n in 0..2 {
                            acc += inv[m][j] * c[((i * 2 + m) * 2 + k) * 2 + n] * inv[n][l];
                        }
                    }
                    chat[((i * 2 + j) * 2 + k) * 2 + l] = ev.det * acc;
                }
            }
        }
    }
    chat
}

/// Loads attached to one cell, evaluated in physical coordinates. The
/// trimmed-boundary traction receives the physical outward normal.
#[derive(Clone, Default)]
pub struct CellLoads {
    pub body: Option<Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>>,
    pub trimmed_traction: Option<Arc<dyn Fn([f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync>>,
    /// Tractions on conformal edges, indexed by [`Edge`] order
    /// left, right, bottom, top.
    pub edge_tractions: [Option<TractionData>; 4],
}

impl std::fmt::Debug for CellLoads {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "CellLoads(body: {}, trimmed: {}, edges: {:?})",
            self.body.is_some(),
            self.trimmed_traction.is_some(),
            self.edge_tractions.iter().map(|t| t.is_some()).collect::<Vec<_>>()
        )
    }
}

pub fn edge_slot(edge: Edge) -> usize {
    match edge {
        Edge::Left => 0,
        Edge::Right => 1,
        Edge::Bottom => 2,
        Edge::Top => 3,
    }
}

/// Exact pointwise evaluation of the mapped material and load fields of one
/// cell.
pub struct MaterialModel<'a> {
    pub cell: &'a Cell,
    pub law: MaterialLaw,
    pub loads: &'a CellLoads,
    c_phys: [f64; 16],
}

impl<'a> MaterialModel<'a> {
    pub fn new(cell: &'a Cell, law: MaterialLaw, loads: &'a CellLoads) -> Self {
        let c_phys = law.elasticity_tensor();
        MaterialModel { cell, law, loads, c_phys }
    }

    pub fn map_eval(&self, xi1: f64, xi2: f64) -> Result<MapEval> {
        self.cell.map.eval(self.cell.index, xi1, xi2)
    }

    /// Mapped elasticity tensor at a parametric point.
    pub fn chat(&self, xi1: f64, xi2: f64) -> Result<[f64; 16]> {
        let ev = self.map_eval(xi1, xi2)?;
        Ok(pullback_tensor(&self.c_phys, &ev))
    }

    /// Mapped body force `j * b(x)` at a parametric point.
    pub fn bhat(&self, xi1: f64, xi2: f64) -> Result<[f64; 2]> {
        let ev = self.map_eval(xi1, xi2)?;
        Ok(match &self.loads.body {
            Some(b) => {
                let v = b(ev.x);
                [ev.det * v[0], ev.det * v[1]]
            }
            None => [0.0, 0.0],
        })
    }

    /// Mapped trimmed-boundary traction at a parametric point: the traction
    /// evaluated at the physical image with the physical outward normal,
    /// scaled by the tangential stretch of the isoline through the point.
    pub fn that_trimmed(&self, xi1: f64, xi2: f64) -> Result<[f64; 2]> {
        let Some(t) = &self.loads.trimmed_traction else {
            return Ok([0.0, 0.0]);
        };
        let ev = self.map_eval(xi1, xi2)?;
        let g = self.cell.grad_phi(xi1, xi2);
        let norm = g[0].hypot(g[1]);
        let tau = if norm > 1e-12 { [-g[1] / norm, g[0] / norm] } else { [1.0, 0.0] };
        let stretch = ev.tangential_stretch(tau);
        // physical outward normal: J^{-T} grad_phi, normalized
        let inv = ev.inv_jac();
        let nx = [
            inv[0][0] * g[0] + inv[1][0] * g[1],
            inv[0][1] * g[0] + inv[1][1] * g[1],
        ];
        let nn = nx[0].hypot(nx[1]).max(1e-300);
        let tv = t(ev.x, [nx[0] / nn, nx[1] / nn]);
        Ok([stretch * tv[0], stretch * tv[1]])
    }

    /// Mapped conformal-edge traction field for edge `e`, extended over the
    /// cell with the fixed edge tangent.
    pub fn that_edge(&self, e: Edge, xi1: f64, xi2: f64) -> Result<[f64; 2]> {
        let Some(t) = &self.loads.edge_tractions[edge_slot(e)] else {
            return Ok([0.0, 0.0]);
        };
        let ev = self.map_eval(xi1, xi2)?;
        let stretch = ev.tangential_stretch(e.tangent());
        let tv = t.eval(ev.x);
        Ok([stretch * tv[0], stretch * tv[1]])
    }
}

/// Nodal values of the mapped material and load fields at the
/// `(q + 1)^2` GLL interpolation nodes of one cell.
#[derive(Clone, Debug)]
pub struct MaterialInterp {
    pub q: usize,
    /// `Chat` per node, same flattening as [`MaterialLaw::elasticity_tensor`].
    pub c_nodes: Vec<[f64; 16]>,
    pub b_nodes: Vec<[f64; 2]>,
    pub t_trimmed: Option<Vec<[f64; 2]>>,
    pub t_edges: [Option<Vec<[f64; 2]>>; 4],
}

/// Samples the mapped fields at the interpolation nodes of degree `q`.
pub fn map_material(
    cell: &Cell,
    law: MaterialLaw,
    q: usize,
    loads: &CellLoads,
) -> Result<MaterialInterp> {
    let model = MaterialModel::new(cell, law, loads);
    let interp = GllBasis::new(q);
    let n = interp.n_1d();
    let mut c_nodes = Vec::with_capacity(n * n);
    let mut b_nodes = Vec::with_capacity(n * n);
    let mut t_trimmed = loads.trimmed_traction.as_ref().map(|_| Vec::with_capacity(n * n));
    let mut t_edges: [Option<Vec<[f64; 2]>>; 4] = Default::default();
    for (slot, t) in loads.edge_tractions.iter().enumerate() {
        if t.is_some() {
            t_edges[slot] = Some(Vec::with_capacity(n * n));
        }
    }
    for j in 0..n {
        for i in 0..n {
            let (x1, x2) = (interp.nodes[i], interp.nodes[j]);
            c_nodes.push(model.chat(x1, x2)?);
            b_nodes.push(model.bhat(x1, x2)?);
            if let Some(tt) = &mut t_trimmed {
                tt.push(model.that_trimmed(x1, x2)?);
            }
            for (slot, e) in Edge::ALL.iter().enumerate() {
                if let Some(te) = &mut t_edges[slot] {
                    te.push(model.that_edge(*e, x1, x2)?);
                }
            }
        }
    }
    Ok(MaterialInterp { q, c_nodes, b_nodes, t_trimmed, t_edges })
}
