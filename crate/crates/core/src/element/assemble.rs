use nalgebra::{DMatrix, DVector};

use crate::geometry::Edge;
use crate::quad::{conformal_edge_rule, reference_rule, CutCellRules, QuadRule};
use crate::Result;

use super::basis::GllBasis;
use super::material::{edge_slot, MaterialModel};

/// Stiffness contribution of a point set with exact material evaluation,
/// accumulated by blocked matrix products: for every direction pair the
/// gradient matrices are contracted through the pointwise mapped tensor.
fn assemble_points(
    basis: &GllBasis,
    model: &MaterialModel,
    rule: &QuadRule,
    k: &mut DMatrix<f64>,
) -> Result<()> {
    let n = basis.n_2d();
    const CHUNK: usize = 512;
    let total = rule.len();
    let mut g = [DMatrix::zeros(CHUNK, n), DMatrix::<f64>::zeros(CHUNK, n)];
    let mut chat = vec![[0.0f64; 16]; CHUNK];
    let mut scaled = DMatrix::zeros(CHUNK, n);

    let mut start = 0;
    while start < total {
        let len = CHUNK.min(total - start);
        for t in 0..len {
            let pt = rule.points[start + t];
            let (_, grads) = basis.eval_2d(pt[0], pt[1]);
            for kdof in 0..n {
                g[0][(t, kdof)] = grads[kdof][0];
                g[1][(t, kdof)] = grads[kdof][1];
            }
            let c = model.chat(pt[0], pt[1])?;
            let w = rule.weights[start + t];
            let mut cw = [0.0; 16];
            for e in 0..16 {
                cw[e] = w * c[e];
            }
            chat[t] = cw;
        }
        let gv = [g[0].rows(0, len), g[1].rows(0, len)];
        for i1 in 0..2 {
            for j1 in 0..2 {
                for i2 in 0..2 {
                    for j2 in 0..2 {
                        let cidx = ((i1 * 2 + j1) * 2 + i2) * 2 + j2;
                        let mut sc = scaled.rows_mut(0, len);
                        for t in 0..len {
                            let w = chat[t][cidx];
                            for kdof in 0..n {
                                sc[(t, kdof)] = w * gv[j2][(t, kdof)];
                            }
                        }
                        let block = gv[j1].transpose() * scaled.rows(0, len);
                        for r in 0..n {
                            for c in 0..n {
                                k[(2 * r + i1, 2 * c + i2)] += block[(r, c)];
                            }
                        }
                    }
                }
            }
        }
        start += len;
    }
    Ok(())
}

/// Element stiffness by direct quadrature with exact pointwise material
/// evaluation: the trimmed-interior contribution plus `rho` times the same
/// integrand over the complement (via the reference-minus-interior
/// identity).
pub fn assemble_full(
    basis: &GllBasis,
    model: &MaterialModel,
    rules: &CutCellRules,
    rho: f64,
) -> Result<DMatrix<f64>> {
    let ndof = 2 * basis.n_2d();
    let mut k_int = DMatrix::zeros(ndof, ndof);
    assemble_points(basis, model, &rules.interior, &mut k_int)?;
    let mut k = if rho != 0.0 {
        let mut k_ref = DMatrix::zeros(ndof, ndof);
        assemble_points(basis, model, &reference_rule(rules.structure.leaf_gauss), &mut k_ref)?;
        &k_int * (1.0 - rho) + k_ref * rho
    } else {
        k_int
    };
    for r in 0..ndof {
        for c in (r + 1)..ndof {
            let avg = 0.5 * (k[(r, c)] + k[(c, r)]);
            k[(r, c)] = avg;
            k[(c, r)] = avg;
        }
    }
    Ok(k)
}

/// External force vector by direct quadrature: body force over the trimmed
/// interior, traction over the trimmed boundary, and traction over the
/// active portion of loaded conformal edges.
pub fn assemble_force_full(
    basis: &GllBasis,
    model: &MaterialModel,
    rules: &CutCellRules,
) -> Result<DVector<f64>> {
    let n = basis.n_2d();
    let mut f = DVector::zeros(2 * n);

    if model.loads.body.is_some() {
        for (pt, w) in rules.interior.points.iter().zip(&rules.interior.weights) {
            let b = model.bhat(pt[0], pt[1])?;
            let (vals, _) = basis.eval_2d(pt[0], pt[1]);
            for k in 0..n {
                f[2 * k] += w * vals[k] * b[0];
                f[2 * k + 1] += w * vals[k] * b[1];
            }
        }
    }
    if model.loads.trimmed_traction.is_some() {
        for (pt, w) in rules.boundary.points.iter().zip(&rules.boundary.weights) {
            let t = model.that_trimmed(pt[0], pt[1])?;
            let (vals, _) = basis.eval_2d(pt[0], pt[1]);
            for k in 0..n {
                f[2 * k] += w * vals[k] * t[0];
                f[2 * k + 1] += w * vals[k] * t[1];
            }
        }
    }
    for edge in Edge::ALL {
        if model.loads.edge_tractions[edge_slot(edge)].is_none() {
            continue;
        }
        let rule = conformal_edge_rule(model.cell, edge, rules.structure.leaf_gauss, 64);
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

/// Stiffness blocks and condensed force of one element, split by the
/// interior / skeleton / Dirichlet dof classification.
#[derive(Clone, Debug)]
pub struct ElementMatrices {
    pub k_ii: DMatrix<f64>,
    pub k_iu: DMatrix<f64>,
    pub k_uu: DMatrix<f64>,
    pub k_id: DMatrix<f64>,
    pub k_ud: DMatrix<f64>,
    pub f_i: DVector<f64>,
    pub f_u: DVector<f64>,
}

fn gather(k: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            out[(r, c)] = k[(i, j)];
        }
    }
    out
}

impl ElementMatrices {
    /// Partition the full element matrix and condense the Dirichlet values
    /// into the force blocks.
    pub fn from_full(
        k: &DMatrix<f64>,
        f: &DVector<f64>,
        interior: &[usize],
        skeleton: &[usize],
        dirichlet: &[usize],
        u_d: &DVector<f64>,
    ) -> Self {
        let k_ii = gather(k, interior, interior);
        let k_iu = gather(k, interior, skeleton);
        let k_uu = gather(k, skeleton, skeleton);
        let k_id = gather(k, interior, dirichlet);
        let k_ud = gather(k, skeleton, dirichlet);
        let mut f_i = DVector::from_iterator(interior.len(), interior.iter().map(|&i| f[i]));
        let mut f_u = DVector::from_iterator(skeleton.len(), skeleton.iter().map(|&i| f[i]));
        if !dirichlet.is_empty() {
            f_i -= &k_id * u_d;
            f_u -= &k_ud * u_d;
        }
        ElementMatrices { k_ii, k_iu, k_uu, k_id, k_ud, f_i, f_u }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::material::{CellLoads, MaterialLaw};
    use crate::geometry::{Cell, LevelSet, ThresholdParams};
    use crate::quad::{cut_cell_rules, QuadOptions};

    fn untrimmed_cell() -> Cell {
        Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(100.0))
    }

    #[test]
    fn rigid_body_null_space() {
        // untrimmed identity-map cell, pure Neumann, rho = 0: exactly three
        // near-zero singular values (two translations, one rotation)
        let cell = untrimmed_cell();
        let basis = GllBasis::new(3);
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(3)).unwrap();
        let loads = CellLoads::default();
        let model = MaterialModel::new(&cell, MaterialLaw { lambda: 1.0, mu: 1.0 }, &loads);
        let k = assemble_full(&basis, &model, &rules, 0.0).unwrap();
        let svd = k.clone().svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let scale = sv[0];
        let tiny = sv.iter().filter(|&&s| s < 1e-10 * scale).count();
        assert_eq!(tiny, 3, "singular values: {:?}", &sv[sv.len() - 5..]);
    }

    #[test]
    fn stiffness_symmetry_on_random_trims() {
        let basis = GllBasis::new(2);
        for mu in [0.1, 0.45, 0.8] {
            let cell = Cell::reference(LevelSet::SchwarzDiamond, ThresholdParams([mu, 0.3, 0.6, mu]));
            let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(2)).unwrap();
            let loads = CellLoads::default();
            let model = MaterialModel::new(&cell, MaterialLaw { lambda: 2.0, mu: 1.0 }, &loads);
            let k = assemble_full(&basis, &model, &rules, 5e-4).unwrap();
            let asym = (&k - k.transpose()).norm();
            assert!(asym <= 1e-12 * k.norm());
        }
    }

    #[test]
    fn zero_loads_zero_force() {
        let cell = untrimmed_cell();
        let basis = GllBasis::new(2);
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(2)).unwrap();
        let loads = CellLoads::default();
        let model = MaterialModel::new(&cell, MaterialLaw { lambda: 1.0, mu: 1.0 }, &loads);
        let f = assemble_force_full(&basis, &model, &rules).unwrap();
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn patch_test_affine_map() {
        // a linear displacement field is reproduced exactly on a full cell
        // with an affine map: K u = f residual on free dofs after fixing the
        // boundary to the linear field
        use crate::geometry::CellMap;
        let cell = Cell::new(
            0,
            CellMap::Bilinear {
                corners: [[0.2, 0.1], [1.4, 0.3], [0.0, 1.2], [1.2, 1.4]],
            },
            LevelSet::SchwarzPrimitive,
            ThresholdParams::uniform(100.0),
        );
        let p = 3;
        let basis = GllBasis::new(p);
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(p)).unwrap();
        let loads = CellLoads::default();
        let model = MaterialModel::new(&cell, MaterialLaw { lambda: 1.3, mu: 0.8 }, &loads);
        let k = assemble_full(&basis, &model, &rules, 0.0).unwrap();
        // u(x) = A x + c
        let a = [[0.3, -0.1], [0.2, 0.4]];
        let cshift = [0.05, -0.2];
        let n = basis.n_2d();
        let mut u = DVector::zeros(2 * n);
        for j in 0..basis.n_1d() {
            for i in 0..basis.n_1d() {
                let kdof = j * basis.n_1d() + i;
                let x = cell.map.position(basis.nodes[i], basis.nodes[j]);
                u[2 * kdof] = a[0][0] * x[0] + a[0][1] * x[1] + cshift[0];
                u[2 * kdof + 1] = a[1][0] * x[0] + a[1][1] * x[1] + cshift[1];
            }
        }
        // energy residual: K u should be reproduced by boundary tractions of
        // the constant stress state; on interior dofs (K u)_i = 0
        let r = &k * &u;
        let n1 = basis.n_1d();
        let mut max_interior = 0.0f64;
        for j in 1..(n1 - 1) {
            for i in 1..(n1 - 1) {
                let kdof = j * n1 + i;
                max_interior = max_interior.max(r[2 * kdof].abs().max(r[2 * kdof + 1].abs()));
            }
        }
        assert!(max_interior <= 1e-10 * k.norm().max(1.0), "{max_interior}");
    }

    #[test]
    fn element_partition_blocks() {
        let k = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let f = DVector::from_row_slice(&[1.0, 2.0, 3.0]);
        let em = ElementMatrices::from_full(
            &k,
            &f,
            &[0],
            &[2],
            &[1],
            &DVector::from_row_slice(&[10.0]),
        );
        assert_eq!(em.k_ii[(0, 0)], 4.0);
        assert_eq!(em.k_uu[(0, 0)], 2.0);
        assert_eq!(em.k_iu[(0, 0)], 0.5);
        // f_i = 1 - K_ID * 10 = 1 - 10
        assert!((em.f_i[0] + 9.0).abs() < 1e-14);
        assert!((em.f_u[0] - (3.0 - 0.2 * 10.0)).abs() < 1e-14);
    }
}
