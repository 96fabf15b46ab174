use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::bddc::DofPartition;
use crate::element::{
    assemble_force_full, assemble_force_interp, assemble_full, build_fast_tensor,
    contract_stiffness, edge_slot, map_material, reference_tensor, CellLoads, ElementMatrices,
    ForceRequest, GllBasis, MaterialLaw, MaterialModel,
};
use crate::geometry::{BoundaryCondition, Edge, Lattice};
use crate::quad::{cut_cell_rules, QuadOptions};
use crate::rom::RomModel;
use crate::Result;

pub type VectorField = Arc<dyn Fn([f64; 2]) -> [f64; 2] + Send + Sync>;
pub type TractionField = Arc<dyn Fn([f64; 2], [f64; 2]) -> [f64; 2] + Send + Sync>;

/// How element force vectors are assembled: interpolated load fields
/// contracted with the force tensors, or direct quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForceMode {
    Interpolated,
    Quadrature,
}

/// Problem definition shared by all solver modes.
#[derive(Clone)]
pub struct ProblemSpec {
    pub lattice: Lattice,
    pub law: MaterialLaw,
    pub p: usize,
    pub q: usize,
    pub rho: f64,
    pub quad: QuadOptions,
    pub body_force: Option<VectorField>,
    pub trimmed_traction: Option<TractionField>,
    pub force_mode: ForceMode,
}

impl ProblemSpec {
    pub fn new(lattice: Lattice, law: MaterialLaw, p: usize, q: usize, rho: f64) -> Self {
        ProblemSpec {
            lattice,
            law,
            p,
            q,
            rho,
            quad: QuadOptions::for_degree(p),
            body_force: None,
            trimmed_traction: None,
            force_mode: ForceMode::Interpolated,
        }
    }

    /// Loads of one cell: edge tractions from the lattice boundary tags plus
    /// the problem-wide body force and trimmed-boundary traction.
    pub fn cell_loads(&self, cell: usize) -> CellLoads {
        let mut loads = CellLoads {
            body: self.body_force.clone(),
            trimmed_traction: self.trimmed_traction.clone(),
            edge_tractions: Default::default(),
        };
        for be in &self.lattice.boundary {
            if be.cell == cell {
                if let BoundaryCondition::Traction(t) = &be.bc {
                    loads.edge_tractions[edge_slot(be.edge)] = Some(t.clone());
                }
            }
        }
        loads
    }

    fn needs_cut_force_rules(&self, loads: &CellLoads) -> bool {
        loads.body.is_some() || loads.trimmed_traction.is_some()
    }
}

/// Stiffness assembly path.
pub enum StiffnessMode<'m> {
    /// direct quadrature with exact material evaluation
    Full,
    /// precontracted tensor contracted with the interpolated material
    Fast,
    /// surrogate tensor evaluation
    Rom(&'m RomModel),
}

/// Assemble the full element matrix and force vector of one cell.
pub fn assemble_cell(
    spec: &ProblemSpec,
    cell_idx: usize,
    mode: &StiffnessMode,
    basis: &GllBasis,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let cell = &spec.lattice.cells[cell_idx];
    let loads = spec.cell_loads(cell_idx);
    let model = MaterialModel::new(cell, spec.law, &loads);

    match mode {
        StiffnessMode::Full => {
            let rules = cut_cell_rules(cell, &spec.quad)?;
            let k = assemble_full(basis, &model, &rules, spec.rho)?;
            let f = assemble_force_full(basis, &model, &rules)?;
            Ok((k, f))
        }
        StiffnessMode::Fast => {
            let rules = cut_cell_rules(cell, &spec.quad)?;
            let interp = map_material(cell, spec.law, spec.q, &loads)?;
            let want_force = spec.force_mode == ForceMode::Interpolated;
            let force = ForceRequest {
                body: want_force && loads.body.is_some(),
                trimmed: want_force && loads.trimmed_traction.is_some(),
                edges: std::array::from_fn(|s| want_force && loads.edge_tractions[s].is_some()),
            };
            let tensor = build_fast_tensor(cell, basis, &rules, spec.q, &force);
            let reference = reference_tensor(spec.p, spec.q);
            let k = contract_stiffness(&tensor, &reference, &interp, spec.rho)?;
            let f = if want_force {
                assemble_force_interp(&tensor, &interp)?
            } else {
                assemble_force_full(basis, &model, &rules)?
            };
            Ok((k, f))
        }
        StiffnessMode::Rom(rom) => {
            let tensor = rom.eval(spec.p, spec.q, &cell.thresholds)?;
            let interp = map_material(cell, spec.law, spec.q, &loads)?;
            let reference = reference_tensor(spec.p, spec.q);
            let k = contract_stiffness(&tensor, &reference, &interp, spec.rho)?;
            // the surrogate carries no force tensors; loads are integrated
            // directly (cut rules only generated when interior or trimmed
            // loads are present)
            let f = if spec.needs_cut_force_rules(&loads) {
                let rules = cut_cell_rules(cell, &spec.quad)?;
                assemble_force_full(basis, &model, &rules)?
            } else {
                edge_only_force(basis, &model, spec.quad.leaf_gauss)?
            };
            Ok((k, f))
        }
    }
}

/// Force assembly when only conformal-edge tractions act on the cell.
fn edge_only_force(
    basis: &GllBasis,
    model: &MaterialModel,
    leaf_gauss: usize,
) -> Result<DVector<f64>> {
    let n = basis.n_2d();
    let mut f = DVector::zeros(2 * n);
    for edge in Edge::ALL {
        if model.loads.edge_tractions[edge_slot(edge)].is_none() {
            continue;
        }
        let rule = crate::quad::conformal_edge_rule(model.cell, edge, leaf_gauss, 64);
        for (t, w) in rule.t.iter().zip(&rule.w) {
            let pt = edge.point(*t);
            let tv = model.that_edge(edge, pt[0], pt[1])?;
            let (vals, _) = basis.eval_2d(pt[0], pt[1]);
            for k in 0..n {
                f[2 * k] += w * vals[k] * tv[0];
                f[2 * k + 1] += w * vals[k] * tv[1];
            }
        }
    }
    Ok(f)
}

/// Assemble every cell in parallel.
pub fn assemble_elements(
    spec: &ProblemSpec,
    mode: &StiffnessMode,
) -> Result<Vec<(DMatrix<f64>, DVector<f64>)>> {
    if let StiffnessMode::Rom(rom) = mode {
        rom.check_compatible(&spec.lattice.cells[0].level_set, spec.p, spec.q)?;
    }
    let basis = GllBasis::new(spec.p);
    (0..spec.lattice.n_cells())
        .into_par_iter()
        .map(|i| assemble_cell(spec, i, mode, &basis))
        .collect()
}

/// Partition assembled element matrices by the dof classification.
pub fn partition_elements(
    partition: &DofPartition,
    raw: &[(DMatrix<f64>, DVector<f64>)],
) -> Vec<ElementMatrices> {
    raw.iter()
        .zip(&partition.cells)
        .map(|((k, f), cd)| {
            ElementMatrices::from_full(k, f, &cd.interior, &cd.skeleton, &cd.dirichlet, &cd.u_d)
        })
        .collect()
}

/// Discrete displacement field: one full local dof vector per cell.
#[derive(Clone, Debug)]
pub struct Field {
    pub p: usize,
    pub cells: Vec<DVector<f64>>,
}

impl Field {
    /// Evaluate the displacement at a parametric point of one cell.
    pub fn eval(&self, basis: &GllBasis, cell: usize, xi1: f64, xi2: f64) -> [f64; 2] {
        let (vals, _) = basis.eval_2d(xi1, xi2);
        let u = &self.cells[cell];
        let mut out = [0.0; 2];
        for (k, v) in vals.iter().enumerate() {
            out[0] += v * u[2 * k];
            out[1] += v * u[2 * k + 1];
        }
        out
    }

    /// L2 norm of the difference against another field over the trimmed
    /// lattice, integrated in physical measure with the given rules.
    pub fn l2_difference(
        &self,
        other: &Field,
        lattice: &Lattice,
        rules: &[crate::quad::CutCellRules],
    ) -> f64 {
        let basis = GllBasis::new(self.p);
        let total: f64 = (0..lattice.n_cells())
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for (pt, w) in rules[i].interior.points.iter().zip(&rules[i].interior.weights) {
                    let ev = lattice.cells[i].map.eval_unchecked(pt[0], pt[1]);
                    let a = self.eval(&basis, i, pt[0], pt[1]);
                    let b = other.eval(&basis, i, pt[0], pt[1]);
                    let d = [a[0] - b[0], a[1] - b[1]];
                    acc += w * ev.det.abs() * (d[0] * d[0] + d[1] * d[1]);
                }
                acc
            })
            .sum();
        total.sqrt()
    }
}
