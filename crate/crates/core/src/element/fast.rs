use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::geometry::{Cell, Edge, ThresholdParams};
use crate::quad::{conformal_edge_rule, gauss_1d, CutCellRules, InteriorStructure, LeafRule};
use crate::{Error, Result};

use super::basis::GllBasis;
use super::material::{edge_slot, MaterialInterp};

/// Number of per-dimension factor rows: one per (basis, basis, interp)
/// triple.
fn factor_len(p: usize, q: usize) -> usize {
    (p + 1) * (p + 1) * (q + 1)
}

/// Precontracted integrals of basis-gradient products against the material
/// interpolation functions over the trimmed interior of one cell, stored per
/// derivative-direction pair `(j1, j2)` as a rank-factored outer-product
/// matrix of per-dimension contributions. Entry
/// `(k1, k2, k3, j1, j2) = int dB_k1/dxi_j1 dB_k2/dxi_j2 L_k3` factors into
/// a row index `(a1, b1, c1)` (first parametric dimension) and a column
/// index `(a2, b2, c2)` (second dimension).
#[derive(Clone, Debug)]
pub struct FastTensor {
    pub p: usize,
    pub q: usize,
    /// `m[j1][j2]` is the `L x L` integral matrix described above.
    pub m: [[DMatrix<f64>; 2]; 2],
    /// Interior force tensor `int B_k1 L_k3`, shape `(p+1)^2 x (q+1)^2`.
    pub body: Option<DMatrix<f64>>,
    /// Boundary force tensor over the trimmed boundary (parametric arc
    /// measure).
    pub trimmed_boundary: Option<DMatrix<f64>>,
    /// Boundary force tensors over the active part of each conformal edge.
    pub edge_boundary: [Option<DMatrix<f64>>; 4],
    /// Thresholds the rules were generated for (metadata).
    pub thresholds: ThresholdParams,
}

/// Which force tensors to materialize alongside the stiffness tensor.
#[derive(Clone, Copy, Debug, Default)]
pub struct ForceRequest {
    pub body: bool,
    pub trimmed: bool,
    pub edges: [bool; 4],
}

/// Per-dimension rank factors of the interior integrals. Combo index
/// `2 * d1 + d2` where `d1`/`d2` flag a derivative on the first/second basis
/// slot.
pub(crate) struct StiffnessFactors {
    pub p: usize,
    pub q: usize,
    pub u: [DMatrix<f64>; 4],
    pub v: [DMatrix<f64>; 4],
}

impl StiffnessFactors {
    /// Entry of the flattened tensor without forming the full matrices.
    pub fn flat_entry(&self, idx: usize) -> f64 {
        let l = factor_len(self.p, self.q);
        let (j1, j2, row, col) = decode_flat(idx, l);
        let cu = combo_u(j1, j2);
        let cv = combo_v(j1, j2);
        let r = self.u[cu].ncols();
        let mut acc = 0.0;
        for k in 0..r {
            acc += self.u[cu][(row, k)] * self.v[cv][(col, k)];
        }
        acc
    }

    pub fn to_tensor(&self, thresholds: ThresholdParams) -> FastTensor {
        let m = [
            [
                &self.u[combo_u(0, 0)] * self.v[combo_v(0, 0)].transpose(),
                &self.u[combo_u(0, 1)] * self.v[combo_v(0, 1)].transpose(),
            ],
            [
                &self.u[combo_u(1, 0)] * self.v[combo_v(1, 0)].transpose(),
                &self.u[combo_u(1, 1)] * self.v[combo_v(1, 1)].transpose(),
            ],
        ];
        FastTensor {
            p: self.p,
            q: self.q,
            m,
            body: None,
            trimmed_boundary: None,
            edge_boundary: Default::default(),
            thresholds,
        }
    }
}

/// First-dimension combo for derivative directions `(j1, j2)`.
fn combo_u(j1: usize, j2: usize) -> usize {
    2 * usize::from(j1 == 0) + usize::from(j2 == 0)
}

/// Second-dimension combo.
fn combo_v(j1: usize, j2: usize) -> usize {
    2 * usize::from(j1 == 1) + usize::from(j2 == 1)
}

/// One-dimensional evaluations at a point: basis values/derivatives and
/// interpolation values, combined into the four (value/derivative,
/// value/derivative) products against each interpolation function.
fn fill_combo_products(
    basis: &GllBasis,
    interp: &GllBasis,
    x: f64,
    scale: f64,
    out: &mut [Vec<f64>; 4],
    weight: f64,
) {
    let n = basis.n_1d();
    let m = interp.n_1d();
    let mut bv = vec![0.0; n];
    let mut bd = vec![0.0; n];
    basis.eval_1d(x, &mut bv, &mut bd);
    let mut iv = vec![0.0; m];
    let mut id = vec![0.0; m];
    interp.eval_1d(x, &mut iv, &mut id);
    let _ = scale;
    for a in 0..n {
        for b in 0..n {
            let pairs = [bv[a] * bv[b], bv[a] * bd[b], bd[a] * bv[b], bd[a] * bd[b]];
            let base = (a * n + b) * m;
            for c in 0..m {
                let lc = iv[c];
                for combo in 0..4 {
                    out[combo][base + c] += weight * pairs[combo] * lc;
                }
            }
        }
    }
}

/// Rank factors of the interior stiffness integrals from the structured
/// leaf decomposition. Each tensor leaf contributes one rank term per
/// combo; each column of a cut leaf contributes one.
pub(crate) fn stiffness_factors(
    structure: &InteriorStructure,
    basis: &GllBasis,
    interp: &GllBasis,
) -> StiffnessFactors {
    let p = basis.degree;
    let q = interp.degree;
    let l = factor_len(p, q);
    let g = gauss_1d(structure.leaf_gauss);

    let n_terms: usize = structure
        .leaves
        .iter()
        .map(|leaf| match leaf {
            LeafRule::Tensor(_) => 1,
            LeafRule::Columns { columns, .. } => columns.len(),
        })
        .sum();

    let mut u: [DMatrix<f64>; 4] = std::array::from_fn(|_| DMatrix::zeros(l, n_terms));
    let mut v: [DMatrix<f64>; 4] = std::array::from_fn(|_| DMatrix::zeros(l, n_terms));

    let mut term = 0;
    let mut acc: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; l]);
    let mut clear = |acc: &mut [Vec<f64>; 4]| {
        for a in acc.iter_mut() {
            a.iter_mut().for_each(|x| *x = 0.0);
        }
    };

    for leaf in &structure.leaves {
        match leaf {
            LeafRule::Tensor(rect) => {
                for dim in 0..2 {
                    clear(&mut acc);
                    let (lo, ext) = (rect.lo[dim], rect.extent(dim));
                    for (node, w) in g.nodes.iter().zip(&g.weights) {
                        fill_combo_products(basis, interp, lo + ext * node, ext, &mut acc, w * ext);
                    }
                    let dst = if dim == 0 { &mut u } else { &mut v };
                    for combo in 0..4 {
                        dst[combo].column_mut(term).copy_from_slice(&acc[combo]);
                    }
                }
                term += 1;
            }
            LeafRule::Columns { s_axis, columns, .. } => {
                for col in columns {
                    // point factor along the column axis, carrying w_s
                    clear(&mut acc);
                    fill_combo_products(basis, interp, col.s, 1.0, &mut acc, col.w_s);
                    let dst = if *s_axis == 0 { &mut u } else { &mut v };
                    for combo in 0..4 {
                        dst[combo].column_mut(term).copy_from_slice(&acc[combo]);
                    }
                    // summed factor along the height axis over the inside
                    // intervals
                    clear(&mut acc);
                    for iv in &col.intervals {
                        let len = iv[1] - iv[0];
                        for (node, w) in g.nodes.iter().zip(&g.weights) {
                            fill_combo_products(
                                basis,
                                interp,
                                iv[0] + len * node,
                                len,
                                &mut acc,
                                w * len,
                            );
                        }
                    }
                    let dst = if *s_axis == 0 { &mut v } else { &mut u };
                    for combo in 0..4 {
                        dst[combo].column_mut(term).copy_from_slice(&acc[combo]);
                    }
                    term += 1;
                }
            }
        }
    }
    debug_assert_eq!(term, n_terms);
    StiffnessFactors { p, q, u, v }
}

/// Decode a flat tensor index into `(j1, j2, row, col)`.
fn decode_flat(idx: usize, l: usize) -> (usize, usize, usize, usize) {
    let (j, rem) = (idx / (l * l), idx % (l * l));
    (j / 2, j % 2, rem / l, rem % l)
}

/// Mirror of a flat tensor index under the exact swap symmetry
/// `(k1, j1) <-> (k2, j2)`; entries at an index and its mirror are equal.
pub fn mirror_flat_index(idx: usize, p: usize, q: usize) -> usize {
    let l = factor_len(p, q);
    let n = p + 1;
    let m = q + 1;
    let (j1, j2, row, col) = decode_flat(idx, l);
    let (c1, t) = (row % m, row / m);
    let (b1, a1) = (t % n, t / n);
    let (c2, t) = (col % m, col / m);
    let (b2, a2) = (t % n, t / n);
    let mrow = (b1 * n + a1) * m + c1;
    let mcol = (b2 * n + a2) * m + c2;
    ((j2 * 2 + j1) * l + mrow) * l + mcol
}

/// Selected flat entries of the interior tensor, evaluated directly from
/// the leaf structure without materializing the factor matrices. Intended
/// for interpolation-grid sampling, where only the handful of magic entries
/// is needed per parameter point.
pub fn selected_entries(
    structure: &InteriorStructure,
    basis: &GllBasis,
    interp: &GllBasis,
    indices: &[usize],
) -> Vec<f64> {
    let (p, q) = (basis.degree, interp.degree);
    let l = factor_len(p, q);
    let n = p + 1;
    let m = q + 1;
    // per requested entry: dim-wise (value-or-derivative slot flags, basis
    // ids, interpolation id)
    struct Want {
        d1: [bool; 2], // derivative flag of slot 1/2 in dim 1
        d2: [bool; 2],
        a: [usize; 2], // (a1, a2)
        b: [usize; 2],
        c: [usize; 2],
    }
    let wants: Vec<Want> = indices
        .iter()
        .map(|&idx| {
            let (j1, j2, row, col) = decode_flat(idx, l);
            let (c1, t) = (row % m, row / m);
            let (b1, a1) = (t % n, t / n);
            let (c2, t) = (col % m, col / m);
            let (b2, a2) = (t % n, t / n);
            Want {
                d1: [j1 == 0, j2 == 0],
                d2: [j1 == 1, j2 == 1],
                a: [a1, a2],
                b: [b1, b2],
                c: [c1, c2],
            }
        })
        .collect();
    let mut out = vec![0.0; indices.len()];

    let g = gauss_1d(structure.leaf_gauss);
    let mut bv = vec![0.0; n];
    let mut bd = vec![0.0; n];
    let mut iv = vec![0.0; m];
    let mut is = vec![0.0; m];
    // cached 1D evaluations of one dimension of a leaf: rows = points
    struct DimCache {
        w: Vec<f64>,
        bv: Vec<f64>,
        bd: Vec<f64>,
        iv: Vec<f64>,
    }
    let mut eval_dim = |pts: &[(f64, f64)], basis: &GllBasis, interp: &GllBasis| -> DimCache {
        let mut cache = DimCache {
            w: Vec::with_capacity(pts.len()),
            bv: Vec::with_capacity(pts.len() * n),
            bd: Vec::with_capacity(pts.len() * n),
            iv: Vec::with_capacity(pts.len() * m),
        };
        for &(x, w) in pts {
            basis.eval_1d(x, &mut bv, &mut bd);
            interp.eval_1d(x, &mut iv, &mut is);
            cache.w.push(w);
            cache.bv.extend_from_slice(&bv);
            cache.bd.extend_from_slice(&bd);
            cache.iv.extend_from_slice(&iv);
        }
        cache
    };
    let dim_factor = |cache: &DimCache, deriv1: bool, deriv2: bool, a: usize, b: usize, c: usize| {
        let mut acc = 0.0;
        for (t, &w) in cache.w.iter().enumerate() {
            let f1 = if deriv1 { cache.bd[t * n + a] } else { cache.bv[t * n + a] };
            let f2 = if deriv2 { cache.bd[t * n + b] } else { cache.bv[t * n + b] };
            acc += w * f1 * f2 * cache.iv[t * m + c];
        }
        acc
    };

    let mut pts1: Vec<(f64, f64)> = Vec::new();
    let mut pts2: Vec<(f64, f64)> = Vec::new();
    for leaf in &structure.leaves {
        match leaf {
            LeafRule::Tensor(rect) => {
                for dim in 0..2 {
                    let (lo, ext) = (rect.lo[dim], rect.extent(dim));
                    let dst = if dim == 0 { &mut pts1 } else { &mut pts2 };
                    dst.clear();
                    dst.extend(g.nodes.iter().zip(&g.weights).map(|(x, w)| (lo + ext * x, w * ext)));
                }
                let c1 = eval_dim(&pts1, basis, interp);
                let c2 = eval_dim(&pts2, basis, interp);
                for (k, w) in wants.iter().enumerate() {
                    out[k] += dim_factor(&c1, w.d1[0], w.d1[1], w.a[0], w.b[0], w.c[0])
                        * dim_factor(&c2, w.d2[0], w.d2[1], w.a[1], w.b[1], w.c[1]);
                }
            }
            LeafRule::Columns { s_axis, columns, .. } => {
                for col in columns {
                    pts1.clear();
                    pts1.push((col.s, col.w_s));
                    pts2.clear();
                    for ivl in &col.intervals {
                        let len = ivl[1] - ivl[0];
                        pts2.extend(
                            g.nodes.iter().zip(&g.weights).map(|(x, w)| (ivl[0] + len * x, w * len)),
                        );
                    }
                    let (cs, ch) = (eval_dim(&pts1, basis, interp), eval_dim(&pts2, basis, interp));
                    let (c1, c2) = if *s_axis == 0 { (&cs, &ch) } else { (&ch, &cs) };
                    for (k, w) in wants.iter().enumerate() {
                        out[k] += dim_factor(c1, w.d1[0], w.d1[1], w.a[0], w.b[0], w.c[0])
                            * dim_factor(c2, w.d2[0], w.d2[1], w.a[1], w.b[1], w.c[1]);
                    }
                }
            }
        }
    }
    out
}

/// Builds the fast-assembly tensor of one cell from its quadrature rules.
pub fn build_fast_tensor(
    cell: &Cell,
    basis: &GllBasis,
    rules: &CutCellRules,
    q: usize,
    force: &ForceRequest,
) -> FastTensor {
    let interp = GllBasis::new(q);
    let factors = stiffness_factors(&rules.structure, basis, &interp);
    let mut tensor = factors.to_tensor(cell.thresholds);

    let nb = basis.n_2d();
    let ni = interp.n_2d();
    if force.body {
        let mut body = DMatrix::zeros(nb, ni);
        for (pt, w) in rules.interior.points.iter().zip(&rules.interior.weights) {
            accumulate_value_products(basis, &interp, pt[0], pt[1], *w, &mut body);
        }
        tensor.body = Some(body);
    }
    if force.trimmed {
        let mut bnd = DMatrix::zeros(nb, ni);
        for (pt, w) in rules.boundary.points.iter().zip(&rules.boundary.weights) {
            accumulate_value_products(basis, &interp, pt[0], pt[1], *w, &mut bnd);
        }
        tensor.trimmed_boundary = Some(bnd);
    }
    for (slot, wanted) in force.edges.iter().enumerate() {
        if !wanted {
            continue;
        }
        let edge = Edge::ALL[slot];
        let rule = conformal_edge_rule(cell, edge, rules.structure.leaf_gauss, 64);
        let mut bnd = DMatrix::zeros(nb, ni);
        for (t, w) in rule.t.iter().zip(&rule.w) {
            let p = edge.point(*t);
            accumulate_value_products(basis, &interp, p[0], p[1], *w, &mut bnd);
        }
        tensor.edge_boundary[slot] = Some(bnd);
    }
    tensor
}

fn accumulate_value_products(
    basis: &GllBasis,
    interp: &GllBasis,
    x1: f64,
    x2: f64,
    w: f64,
    out: &mut DMatrix<f64>,
) {
    let (bv, _) = basis.eval_2d(x1, x2);
    let (iv, _) = interp.eval_2d(x1, x2);
    for (k1, b) in bv.iter().enumerate() {
        let wb = w * b;
        for (k3, l) in iv.iter().enumerate() {
            out[(k1, k3)] += wb * l;
        }
    }
}

impl FastTensor {
    pub fn factor_len(&self) -> usize {
        factor_len(self.p, self.q)
    }

    /// Length of the flattened stiffness tensor.
    pub fn flat_len(&self) -> usize {
        let l = self.factor_len();
        4 * l * l
    }

    /// Tensor entry by basis ids `k1`, `k2`, interpolation id `k3` and
    /// derivative directions.
    pub fn entry(&self, k1: usize, k2: usize, k3: usize, j1: usize, j2: usize) -> f64 {
        let n = self.p + 1;
        let m = self.q + 1;
        let (a1, a2) = (k1 % n, k1 / n);
        let (b1, b2) = (k2 % n, k2 / n);
        let (c1, c2) = (k3 % m, k3 / m);
        let row = (a1 * n + b1) * m + c1;
        let col = (a2 * n + b2) * m + c2;
        self.m[j1][j2][(row, col)]
    }

    /// Flatten in the canonical layout `((j1, j2), row, col)` row-major.
    pub fn to_flat(&self) -> DVector<f64> {
        let l = self.factor_len();
        let mut out = DVector::zeros(4 * l * l);
        let mut ofs = 0;
        for j1 in 0..2 {
            for j2 in 0..2 {
                let m = &self.m[j1][j2];
                for r in 0..l {
                    for c in 0..l {
                        out[ofs] = m[(r, c)];
                        ofs += 1;
                    }
                }
            }
        }
        out
    }

    /// Rebuild from a flat vector in the canonical layout.
    pub fn from_flat(p: usize, q: usize, flat: &[f64], thresholds: ThresholdParams) -> Result<Self> {
        let l = factor_len(p, q);
        if flat.len() != 4 * l * l {
            return Err(Error::ShapeMismatch(format!(
                "flat tensor has {} entries, expected {}",
                flat.len(),
                4 * l * l
            )));
        }
        let block = |j: usize| {
            DMatrix::from_row_iterator(l, l, flat[j * l * l..(j + 1) * l * l].iter().copied())
        };
        Ok(FastTensor {
            p,
            q,
            m: [[block(0), block(1)], [block(2), block(3)]],
            body: None,
            trimmed_boundary: None,
            edge_boundary: Default::default(),
            thresholds,
        })
    }
}

/// Reference tensor over the full unit square, cached per `(p, q)`. The
/// single-leaf rule is exact for the polynomial integrands.
pub fn reference_tensor(p: usize, q: usize) -> Arc<FastTensor> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<FastTensor>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((p, q))
        .or_insert_with(|| {
            let basis = GllBasis::new(p);
            let interp = GllBasis::new(q);
            let structure = InteriorStructure {
                leaves: vec![LeafRule::Tensor(crate::quad::Rect::UNIT)],
                leaf_gauss: p + q + 2,
            };
            let factors = stiffness_factors(&structure, &basis, &interp);
            Arc::new(factors.to_tensor(ThresholdParams::uniform(f64::INFINITY)))
        })
        .clone()
}

/// Contracts the fast tensor (with complement stabilization `rho`) against
/// the nodal material interpolation into the element stiffness matrix, in
/// the node-major, component-interleaved dof ordering.
pub fn contract_stiffness(
    tensor: &FastTensor,
    reference: &FastTensor,
    interp: &MaterialInterp,
    rho: f64,
) -> Result<DMatrix<f64>> {
    if tensor.p != reference.p || tensor.q != reference.q {
        return Err(Error::ShapeMismatch(format!(
            "tensor ({}, {}) vs reference ({}, {})",
            tensor.p, tensor.q, reference.p, reference.q
        )));
    }
    if interp.q != tensor.q {
        return Err(Error::ShapeMismatch(format!(
            "material interpolation degree {} vs tensor {}",
            interp.q, tensor.q
        )));
    }
    let p = tensor.p;
    let q = tensor.q;
    let n = p + 1;
    let m = q + 1;
    let l = factor_len(p, q);
    let ndof = 2 * n * n;
    let mut k = DMatrix::zeros(ndof, ndof);

    // row r -> (a1, b1, c1)
    let decode: Vec<(usize, usize, usize)> = (0..l)
        .map(|r| {
            let c = r % m;
            let t = r / m;
            (t / n, t % n, c)
        })
        .collect();

    for j1 in 0..2 {
        for j2 in 0..2 {
            let mt = &tensor.m[j1][j2];
            let mr = &reference.m[j1][j2];
            for row in 0..l {
                let (a1, b1, c1) = decode[row];
                for col in 0..l {
                    let (a2, b2, c2) = decode[col];
                    let val = {
                        let t = mt[(row, col)];
                        if rho == 0.0 { t } else { t + rho * (mr[(row, col)] - t) }
                    };
                    if val == 0.0 {
                        continue;
                    }
                    let k1 = a2 * n + a1;
                    let k2 = b2 * n + b1;
                    let kc = c2 * m + c1;
                    let cs = &interp.c_nodes[kc];
                    for i1 in 0..2 {
                        for i2 in 0..2 {
                            k[(2 * k1 + i1, 2 * k2 + i2)] +=
                                val * cs[((i1 * 2 + j1) * 2 + i2) * 2 + j2];
                        }
                    }
                }
            }
        }
    }
    // the quadrature sums are symmetric up to summation order
    for r in 0..ndof {
        for c in (r + 1)..ndof {
            let avg = 0.5 * (k[(r, c)] + k[(c, r)]);
            k[(r, c)] = avg;
            k[(c, r)] = avg;
        }
    }
    Ok(k)
}

/// External force vector from the interpolated load fields contracted with
/// the force tensors.
pub fn assemble_force_interp(tensor: &FastTensor, interp: &MaterialInterp) -> Result<DVector<f64>> {
    let n = (tensor.p + 1) * (tensor.p + 1);
    let mut f = DVector::zeros(2 * n);
    let mut add = |ft: &DMatrix<f64>, values: &[[f64; 2]]| {
        for k1 in 0..n {
            let mut acc = [0.0; 2];
            for (k3, v) in values.iter().enumerate() {
                let w = ft[(k1, k3)];
                acc[0] += w * v[0];
                acc[1] += w * v[1];
            }
            f[2 * k1] += acc[0];
            f[2 * k1 + 1] += acc[1];
        }
    };
    if let Some(body) = &tensor.body {
        add(body, &interp.b_nodes);
    }
    if let (Some(bnd), Some(tv)) = (&tensor.trimmed_boundary, &interp.t_trimmed) {
        add(bnd, tv);
    }
    for edge in Edge::ALL {
        let slot = edge_slot(edge);
        if let (Some(bnd), Some(tv)) = (&tensor.edge_boundary[slot], &interp.t_edges[slot]) {
            add(bnd, tv);
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LevelSet;
    use crate::quad::{cut_cell_rules, QuadOptions};

    fn full_cell_rules(p: usize) -> (Cell, CutCellRules) {
        let cell = Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(100.0));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(p)).unwrap();
        (cell, rules)
    }

    #[test]
    fn full_cell_matches_reference() {
        let (p, q) = (3, 2);
        let basis = GllBasis::new(p);
        let (cell, rules) = full_cell_rules(p);
        let t = build_fast_tensor(&cell, &basis, &rules, q, &ForceRequest::default());
        let r = reference_tensor(p, q);
        for j1 in 0..2 {
            for j2 in 0..2 {
                let diff = (&t.m[j1][j2] - &r.m[j1][j2]).norm();
                assert!(diff < 1e-12 * r.m[j1][j2].norm().max(1.0), "block ({j1},{j2}): {diff}");
            }
        }
    }

    #[test]
    fn empty_cell_tensor_is_zero() {
        let p = 2;
        let basis = GllBasis::new(p);
        let cell = Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(-100.0));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(p)).unwrap();
        let t = build_fast_tensor(&cell, &basis, &rules, 1, &ForceRequest::default());
        for j1 in 0..2 {
            for j2 in 0..2 {
                assert!(t.m[j1][j2].norm() == 0.0);
            }
        }
    }

    #[test]
    fn swap_symmetry_is_exact() {
        let (p, q) = (2, 1);
        let basis = GllBasis::new(p);
        let cell = Cell::reference(LevelSet::SchwarzDiamond, ThresholdParams::uniform(0.4));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(p)).unwrap();
        let t = build_fast_tensor(&cell, &basis, &rules, q, &ForceRequest::default());
        let nb = (p + 1) * (p + 1);
        let ni = (q + 1) * (q + 1);
        for k1 in 0..nb {
            for k2 in 0..nb {
                for k3 in 0..ni {
                    for j1 in 0..2 {
                        for j2 in 0..2 {
                            assert_eq!(
                                t.entry(k1, k2, k3, j1, j2),
                                t.entry(k2, k1, k3, j2, j1),
                                "({k1},{k2},{k3},{j1},{j2})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn factors_match_pointwise_quadrature() {
        // oracle: direct pointwise accumulation over the flattened rule
        let (p, q) = (2, 2);
        let basis = GllBasis::new(p);
        let interp = GllBasis::new(q);
        let cell = Cell::reference(LevelSet::SchwarzDiamond, ThresholdParams::uniform(0.3));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(p)).unwrap();
        let t = build_fast_tensor(&cell, &basis, &rules, q, &ForceRequest::default());

        let nb = basis.n_2d();
        let ni = interp.n_2d();
        let mut oracle = vec![0.0; nb * nb * ni * 4];
        for (pt, w) in rules.interior.points.iter().zip(&rules.interior.weights) {
            let (_, g) = basis.eval_2d(pt[0], pt[1]);
            let (iv, _) = interp.eval_2d(pt[0], pt[1]);
            for k1 in 0..nb {
                for k2 in 0..nb {
                    for k3 in 0..ni {
                        for j1 in 0..2 {
                            for j2 in 0..2 {
                                oracle[((k1 * nb + k2) * ni + k3) * 4 + j1 * 2 + j2] +=
                                    w * g[k1][j1] * g[k2][j2] * iv[k3];
                            }
                        }
                    }
                }
            }
        }
        let mut max_diff = 0.0f64;
        for k1 in 0..nb {
            for k2 in 0..nb {
                for k3 in 0..ni {
                    for j1 in 0..2 {
                        for j2 in 0..2 {
                            let o = oracle[((k1 * nb + k2) * ni + k3) * 4 + j1 * 2 + j2];
                            let v = t.entry(k1, k2, k3, j1, j2);
                            max_diff = max_diff.max((o - v).abs());
                        }
                    }
                }
            }
        }
        assert!(max_diff < 1e-12, "max diff {max_diff}");
    }

    #[test]
    fn selected_entries_match_flat() {
        let (p, q) = (3, 2);
        let basis = GllBasis::new(p);
        let interp = GllBasis::new(q);
        let cell = Cell::reference(LevelSet::SchwarzDiamond, ThresholdParams([0.5, 0.3, 0.7, 0.4]));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(p)).unwrap();
        let t = build_fast_tensor(&cell, &basis, &rules, q, &ForceRequest::default());
        let flat = t.to_flat();
        let idx: Vec<usize> = (0..40).map(|k| (k * 7919) % flat.len()).collect();
        let vals = selected_entries(&rules.structure, &basis, &interp, &idx);
        for (k, &i) in idx.iter().enumerate() {
            assert!(
                (vals[k] - flat[i]).abs() <= 1e-12 * flat.amax(),
                "entry {i}: {} vs {}",
                vals[k],
                flat[i]
            );
        }
    }

    #[test]
    fn flat_round_trip() {
        let (p, q) = (2, 1);
        let basis = GllBasis::new(p);
        let cell = Cell::reference(LevelSet::SchoenIwp, ThresholdParams::uniform(0.5));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(p)).unwrap();
        let t = build_fast_tensor(&cell, &basis, &rules, q, &ForceRequest::default());
        let flat = t.to_flat();
        let t2 = FastTensor::from_flat(p, q, flat.as_slice(), t.thresholds).unwrap();
        for j1 in 0..2 {
            for j2 in 0..2 {
                assert_eq!(t.m[j1][j2], t2.m[j1][j2]);
            }
        }
    }
}
