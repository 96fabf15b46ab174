use super::gauss::{gauss_1d, legendre};
use super::rule::{reference_rule, Column, InteriorStructure, LeafRule, QuadRule, Rect};
use crate::geometry::Cell;
use crate::{Error, Result};

/// How fully refined cut leaves are integrated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutLeafMode {
    /// Per-column root finding (bisection) for the crossing heights.
    HeightFunction,
    /// Crossings from linear interpolation of the scan samples only. Cheaper
    /// and lower order; used to study the subdivision convergence on its own.
    Secant,
}

/// Parameters of the trimmed-cell quadrature generator.
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    /// Target relative area error on smooth trimmed sets.
    pub tol: f64,
    /// Subdivision cap for cut boxes.
    pub max_depth: usize,
    /// Gauss points per direction on leaves.
    pub leaf_gauss: usize,
    pub cut_leaf_mode: CutLeafMode,
}

impl QuadOptions {
    /// Defaults paired with a discretization of degree `p`: the leaf rules
    /// carry `2 (p + 1)` points per direction so quadrature error stays below
    /// discretization error.
    pub fn for_degree(p: usize) -> Self {
        QuadOptions {
            tol: 1e-10,
            max_depth: 8,
            leaf_gauss: 2 * (p + 1),
            cut_leaf_mode: CutLeafMode::HeightFunction,
        }
    }
}

/// Quadrature rules of one trimmed cell: interior, trimmed-boundary (with
/// parametric arc-length weights), and complement. The complement rule is
/// the signed composite of the reference rule and the interior rule, from
/// the identity `int_over_complement f = int_over_square f - int_over_trim f`.
#[derive(Clone, Debug)]
pub struct CutCellRules {
    pub interior: QuadRule,
    pub boundary: QuadRule,
    pub complement: QuadRule,
    pub tol: f64,
    /// Leaf decomposition behind `interior`, used by separable fast paths.
    pub structure: InteriorStructure,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum BoxClass {
    Inside,
    Outside,
    Cut,
}

/// Signature of a column scan: whether the column starts inside and how many
/// crossings were found.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
struct ColumnSig {
    starts_inside: bool,
    n_roots: usize,
}

struct ScanColumn {
    s: f64,
    w_s: f64,
    sig: ColumnSig,
    /// crossing estimates from the linear scan, ordered along the height axis
    secant_roots: Vec<f64>,
}

struct Builder<'a> {
    cell: &'a Cell,
    opts: QuadOptions,
    leaves: Vec<LeafRule>,
    boundary: QuadRule,
}

impl<'a> Builder<'a> {
    fn classify(&self, rect: &Rect) -> BoxClass {
        let n = self.opts.leaf_gauss + 2;
        let mut neg = false;
        let mut pos = false;
        for j in 0..n {
            let y = rect.lo[1] + rect.extent(1) * j as f64 / (n - 1) as f64;
            for i in 0..n {
                let x = rect.lo[0] + rect.extent(0) * i as f64 / (n - 1) as f64;
                if self.cell.phi(x, y) < 0.0 {
                    neg = true;
                } else {
                    pos = true;
                }
                if neg && pos {
                    return BoxClass::Cut;
                }
            }
        }
        if neg {
            BoxClass::Inside
        } else {
            BoxClass::Outside
        }
    }

    /// Pick the height-function axis: the one along which phi varies faster
    /// at the box center (central differences, ties toward the first axis).
    fn height_axis(&self, rect: &Rect) -> usize {
        let c = rect.center();
        let h1 = 1e-4 * rect.extent(0).max(1e-12);
        let h2 = 1e-4 * rect.extent(1).max(1e-12);
        let d1 = (self.cell.phi(c[0] + h1, c[1]) - self.cell.phi(c[0] - h1, c[1])) / (2.0 * h1);
        let d2 = (self.cell.phi(c[0], c[1] + h2) - self.cell.phi(c[0], c[1] - h2)) / (2.0 * h2);
        if d1.abs() >= d2.abs() {
            0
        } else {
            1
        }
    }

    fn phi_at(&self, s_axis: usize, s: f64, h: f64) -> f64 {
        if s_axis == 0 {
            self.cell.phi(s, h)
        } else {
            self.cell.phi(h, s)
        }
    }

    /// Scan one column along the height axis: uniform samples, sign pattern,
    /// and secant crossing estimates.
    fn scan_column(&self, s_axis: usize, s: f64, w_s: f64, h_lo: f64, h_hi: f64) -> ScanColumn {
        let n = self.opts.leaf_gauss + 2;
        let mut prev_h = h_lo;
        let mut prev_v = self.phi_at(s_axis, s, h_lo);
        let starts_inside = prev_v < 0.0;
        let mut roots = Vec::new();
        for j in 1..n {
            let h = h_lo + (h_hi - h_lo) * j as f64 / (n - 1) as f64;
            let v = self.phi_at(s_axis, s, h);
            if (prev_v < 0.0) != (v < 0.0) {
                let denom = v - prev_v;
                let r = if denom.abs() > 0.0 { prev_h - prev_v * (h - prev_h) / denom } else { 0.5 * (prev_h + h) };
                roots.push(r.clamp(prev_h, h));
            }
            prev_h = h;
            prev_v = v;
        }
        ScanColumn {
            s,
            w_s,
            sig: ColumnSig { starts_inside, n_roots: roots.len() },
            secant_roots: roots,
        }
    }

    /// Refine each secant crossing by bisection on the exact trimming
    /// function to a bracket width of 1e-14.
    fn refine_roots(&self, s_axis: usize, col: &ScanColumn, h_lo: f64, h_hi: f64, rect: &Rect) -> Result<Vec<f64>> {
        let n = self.opts.leaf_gauss + 2;
        let step = (h_hi - h_lo) / (n - 1) as f64;
        let mut out = Vec::with_capacity(col.secant_roots.len());
        for &r in &col.secant_roots {
            // re-bracket around the scan interval containing the estimate
            let j = (((r - h_lo) / step).floor() as usize).min(n - 2);
            let mut a = h_lo + j as f64 * step;
            let mut b = a + step;
            let mut fa = self.phi_at(s_axis, col.s, a);
            let fb = self.phi_at(s_axis, col.s, b);
            if (fa < 0.0) == (fb < 0.0) {
                return Err(Error::RootFindFailure {
                    cell: self.cell.index,
                    x0: rect.lo[0],
                    x1: rect.hi[0],
                    y0: rect.lo[1],
                    y1: rect.hi[1],
                });
            }
            while b - a > 1e-14 {
                let m = 0.5 * (a + b);
                let fm = self.phi_at(s_axis, col.s, m);
                if (fa < 0.0) != (fm < 0.0) {
                    b = m;
                } else {
                    a = m;
                    fa = fm;
                }
            }
            out.push(0.5 * (a + b));
        }
        Ok(out)
    }

    /// Inside intervals of a column from its crossing list.
    fn intervals(starts_inside: bool, roots: &[f64], h_lo: f64, h_hi: f64) -> Vec<[f64; 2]> {
        let mut iv = Vec::new();
        let mut inside = starts_inside;
        let mut start = h_lo;
        for &r in roots {
            if inside {
                iv.push([start, r]);
            }
            start = r;
            inside = !inside;
        }
        if inside {
            iv.push([start, h_hi]);
        }
        iv
    }

    /// Spectral error indicator: magnitude of the two highest Legendre
    /// coefficients of the per-column inside length, times the column span.
    fn tail_indicator(lengths: &[f64], weights01: &[f64], nodes01: &[f64], span: f64) -> f64 {
        let k = lengths.len();
        let mut tail = 0.0;
        for j in [k - 2, k - 1] {
            let mut c = 0.0;
            for a in 0..k {
                let (p, _) = legendre(j, 2.0 * nodes01[a] - 1.0);
                c += weights01[a] * lengths[a] * p;
            }
            tail += ((2 * j + 1) as f64 * c).abs();
        }
        tail * span
    }

    fn process(&mut self, rect: Rect, depth: usize) -> Result<()> {
        match self.classify(&rect) {
            BoxClass::Inside => self.leaves.push(LeafRule::Tensor(rect)),
            BoxClass::Outside => {}
            BoxClass::Cut => self.process_cut(rect, depth)?,
        }
        Ok(())
    }

    fn refine(&mut self, rect: Rect, depth: usize) -> Result<()> {
        for quad in rect.quadrants() {
            self.process(quad, depth + 1)?;
        }
        Ok(())
    }

    /// Crossings of the trimming isoline with the two box edges transverse
    /// to the height axis, as strictly interior `s` positions. The
    /// column-length function kinks there, so the box is split at these
    /// points before per-column integration.
    fn edge_crossings(&self, s_axis: usize, s_lo: f64, s_hi: f64, h_edges: [f64; 2]) -> Vec<f64> {
        let n = self.opts.leaf_gauss + 2;
        let mut out = Vec::new();
        for h in h_edges {
            let mut prev_s = s_lo;
            let mut prev_v = self.phi_at(s_axis, s_lo, h);
            for j in 1..n {
                let s = s_lo + (s_hi - s_lo) * j as f64 / (n - 1) as f64;
                let v = self.phi_at(s_axis, s, h);
                if (prev_v < 0.0) != (v < 0.0) {
                    let (mut a, mut b, mut fa) = (prev_s, s, prev_v);
                    while b - a > 1e-13 {
                        let m = 0.5 * (a + b);
                        let fm = self.phi_at(s_axis, m, h);
                        if (fa < 0.0) != (fm < 0.0) {
                            b = m;
                        } else {
                            a = m;
                            fa = fm;
                        }
                    }
                    out.push(0.5 * (a + b));
                }
                prev_s = s;
                prev_v = v;
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let span = s_hi - s_lo;
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * span);
        out.retain(|&s| s > s_lo + 1e-10 * span && s < s_hi - 1e-10 * span);
        out
    }

    fn process_cut(&mut self, rect: Rect, depth: usize) -> Result<()> {
        let h_axis = self.height_axis(&rect);
        let s_axis = 1 - h_axis;
        let g = gauss_1d(self.opts.leaf_gauss);
        let (s_lo, s_hi) = (rect.lo[s_axis], rect.hi[s_axis]);
        let (h_lo, h_hi) = (rect.lo[h_axis], rect.hi[h_axis]);
        let at_cap = depth >= self.opts.max_depth;
        let secant = self.opts.cut_leaf_mode == CutLeafMode::Secant;

        let splits = if secant { Vec::new() } else { self.edge_crossings(s_axis, s_lo, s_hi, [h_lo, h_hi]) };
        if splits.len() > 6 && !at_cap {
            return self.refine(rect, depth);
        }
        let mut bounds = Vec::with_capacity(splits.len() + 2);
        bounds.push(s_lo);
        bounds.extend_from_slice(&splits);
        bounds.push(s_hi);

        let mut acceptable = true;
        let mut total_roots = 0usize;
        let mut pending: Vec<(ScanColumn, Vec<f64>)> = Vec::new();
        for w in bounds.windows(2) {
            let (sa, sb) = (w[0], w[1]);
            let ext = sb - sa;
            if ext <= 1e-13 {
                continue;
            }
            let mut lengths = Vec::with_capacity(g.nodes.len());
            let mut first_sig: Option<ColumnSig> = None;
            let mut uniform = true;
            for (t, wq) in g.nodes.iter().zip(&g.weights) {
                let col = self.scan_column(s_axis, sa + ext * t, wq * ext, h_lo, h_hi);
                let roots = if secant {
                    col.secant_roots.clone()
                } else {
                    self.refine_roots(s_axis, &col, h_lo, h_hi, &rect)?
                };
                total_roots += roots.len();
                match &first_sig {
                    None => first_sig = Some(col.sig),
                    Some(sig) => uniform &= *sig == col.sig,
                }
                lengths.push(
                    Self::intervals(col.sig.starts_inside, &roots, h_lo, h_hi)
                        .iter()
                        .map(|iv| iv[1] - iv[0])
                        .sum(),
                );
                pending.push((col, roots));
            }
            let tail = Self::tail_indicator(&lengths, &g.weights, &g.nodes, ext);
            let budget = self.opts.tol * (ext * (h_hi - h_lo)).max(1e-300);
            if !(uniform && tail <= budget) {
                acceptable = false;
            }
        }

        if !at_cap && (!acceptable || total_roots == 0) {
            return self.refine(rect, depth);
        }

        let mut columns = Vec::with_capacity(pending.len());
        for (col, roots) in pending {
            for &r in &roots {
                let mut p = [0.0; 2];
                p[s_axis] = col.s;
                p[h_axis] = r;
                let grad = self.cell.grad_phi(p[0], p[1]);
                let (gs, gh) = (grad[s_axis], grad[h_axis]);
                if gh.abs() <= 1e-12 * gs.abs() {
                    return Err(Error::RootFindFailure {
                        cell: self.cell.index,
                        x0: rect.lo[0],
                        x1: rect.hi[0],
                        y0: rect.lo[1],
                        y1: rect.hi[1],
                    });
                }
                self.boundary.points.push(p);
                self.boundary.weights.push(col.w_s * (1.0f64).hypot(gs / gh));
            }
            columns.push(Column {
                s: col.s,
                w_s: col.w_s,
                intervals: Self::intervals(col.sig.starts_inside, &roots, h_lo, h_hi),
            });
        }
        self.leaves.push(LeafRule::Columns { rect, s_axis, columns });
        Ok(())
    }
}

/// Generate interior, trimmed-boundary, and complement rules for one cell in
/// a single quadtree traversal. Pure per cell; cells can be processed in
/// parallel.
pub fn cut_cell_rules(cell: &Cell, opts: &QuadOptions) -> Result<CutCellRules> {
    let mut b = Builder {
        cell,
        opts: *opts,
        leaves: Vec::new(),
        boundary: QuadRule::default(),
    };
    b.process(Rect::UNIT, 0)?;
    let structure = InteriorStructure { leaves: b.leaves, leaf_gauss: opts.leaf_gauss };
    let interior = structure.flatten();
    let complement = complement_rule(&interior, opts.leaf_gauss);
    Ok(CutCellRules {
        interior,
        boundary: b.boundary,
        complement,
        tol: opts.tol,
        structure,
    })
}

/// Interior rule over the trimmed parametric domain.
pub fn interior_rule(cell: &Cell, opts: &QuadOptions) -> Result<QuadRule> {
    Ok(cut_cell_rules(cell, opts)?.interior)
}

/// Rule over the trimmed part of the boundary, weights in parametric
/// arc length.
pub fn boundary_rule(cell: &Cell, opts: &QuadOptions) -> Result<QuadRule> {
    Ok(cut_cell_rules(cell, opts)?.boundary)
}

/// Signed composite rule for the complement of the trimmed domain in the
/// unit square: the reference rule with positive weights plus the interior
/// rule with negated weights.
pub fn complement_rule(interior: &QuadRule, n_ref: usize) -> QuadRule {
    let mut rule = reference_rule(n_ref);
    rule.points.extend_from_slice(&interior.points);
    rule.weights.extend(interior.weights.iter().map(|w| -w));
    rule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CustomLevelSet, LevelSet, ThresholdParams};
    use std::sync::Arc;

    fn half_plane_cell() -> Cell {
        Cell::reference(
            LevelSet::Custom(CustomLevelSet {
                name: "half-plane".into(),
                value: Arc::new(|x, _| x - 0.5),
                grad: Some(Arc::new(|_, _| [1.0, 0.0])),
            }),
            ThresholdParams::uniform(0.0),
        )
    }

    #[test]
    fn half_square_area() {
        let rules = cut_cell_rules(&half_plane_cell(), &QuadOptions::for_degree(3)).unwrap();
        assert!((rules.interior.total_weight() - 0.5).abs() < 1e-10);
        assert!(rules.interior.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn full_cell_area() {
        let cell = Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(10.0));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(2)).unwrap();
        assert!((rules.interior.total_weight() - 1.0).abs() < 1e-12);
        assert!(rules.boundary.is_empty());
        // complement of the constant 1 vanishes on a full cell
        assert!(rules.complement.total_weight().abs() < 1e-12);
    }

    #[test]
    fn empty_cell_complement() {
        let cell = Cell::reference(LevelSet::SchwarzPrimitive, ThresholdParams::uniform(-10.0));
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(2)).unwrap();
        assert!(rules.interior.is_empty());
        assert!((rules.complement.total_weight() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn half_square_complement_moment() {
        // complement of x over the right half square: 3/8
        let rules = cut_cell_rules(&half_plane_cell(), &QuadOptions::for_degree(3)).unwrap();
        let q = rules.complement.integrate(|x, _| x);
        assert!((q - 0.375).abs() < 1e-10, "{q}");
    }

    #[test]
    fn straight_vertical_boundary_length() {
        let rules = cut_cell_rules(&half_plane_cell(), &QuadOptions::for_degree(3)).unwrap();
        assert!((rules.boundary.total_weight() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sloped_boundary_length() {
        let cell = Cell::reference(
            LevelSet::Custom(CustomLevelSet {
                name: "slope".into(),
                value: Arc::new(|x, y| y - (0.2 + 0.6 * x)),
                grad: Some(Arc::new(|_, _| [-0.6, 1.0])),
            }),
            ThresholdParams::uniform(0.0),
        );
        let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(3)).unwrap();
        let exact = (1.0f64 + 0.36).sqrt();
        assert!((rules.boundary.total_weight() - exact).abs() < 1e-8);
        // interior area below the line: 0.2 + 0.3
        assert!((rules.interior.total_weight() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn partition_of_measure() {
        for mu in [-0.4, 0.0, 0.3, 0.7] {
            let cell =
                Cell::reference(LevelSet::SchwarzDiamond, ThresholdParams::uniform(mu));
            let rules = cut_cell_rules(&cell, &QuadOptions::for_degree(2)).unwrap();
            let total = rules.interior.total_weight() + rules.complement.total_weight();
            assert!((total - 1.0).abs() < 1e-12, "mu = {mu}: {total}");
        }
    }

    #[test]
    fn refinement_tolerance_never_hurts() {
        let cell = Cell::reference(LevelSet::SchwarzDiamond, ThresholdParams::uniform(0.35));
        let reference = {
            let mut o = QuadOptions::for_degree(4);
            o.max_depth = 10;
            o.tol = 1e-13;
            cut_cell_rules(&cell, &o).unwrap().interior.total_weight()
        };
        let mut prev_err = f64::INFINITY;
        for k in 0..5 {
            let mut o = QuadOptions::for_degree(4);
            o.tol = 1e-4 * 0.5f64.powi(k);
            let a = cut_cell_rules(&cell, &o).unwrap().interior.total_weight();
            let err = (a - reference).abs();
            assert!(err <= prev_err + 1e-12, "tol halving raised error: {err} > {prev_err}");
            prev_err = err;
        }
    }

    #[test]
    fn subdivision_order_before_root_finding() {
        // Linear-interpolated crossings only: the area error should gain at
        // least a factor ~4 per extra depth level on a smooth cut.
        let cell = Cell::reference(
            LevelSet::Custom(CustomLevelSet {
                name: "disc".into(),
                value: Arc::new(|x, y| {
                    let (dx, dy) = (x - 0.21, y - 0.17);
                    (dx * dx + dy * dy) - 0.55 * 0.55
                }),
                grad: None,
            }),
            ThresholdParams::uniform(0.0),
        );
        let exact = {
            let mut o = QuadOptions::for_degree(4);
            o.max_depth = 10;
            cut_cell_rules(&cell, &o).unwrap().interior.total_weight()
        };
        let mut errs = Vec::new();
        for depth in 1..=4 {
            let o = QuadOptions {
                tol: 0.0, // force subdivision to the cap
                max_depth: depth,
                leaf_gauss: 6,
                cut_leaf_mode: CutLeafMode::Secant,
            };
            let a = cut_cell_rules(&cell, &o).unwrap().interior.total_weight();
            errs.push((a - exact).abs());
        }
        let levels = (errs.len() - 1) as f64;
        let overall = errs[0] / errs[errs.len() - 1];
        assert!(
            overall >= 3.6f64.powf(levels),
            "subdivision convergence too slow: {errs:?}"
        );
    }
}
