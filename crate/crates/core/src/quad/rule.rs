use super::gauss::gauss_1d;

/// Point set with weights in parametric measure. Weights may be signed for
/// composite rules; rules produced by subdivision have non-negative weights.
#[derive(Clone, Debug, Default)]
pub struct QuadRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate a scalar field over the rule.
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

/// Axis-aligned box in cell-parametric coordinates.
#[derive(Clone, Copy, Debug)]
pub struct Rect {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl Rect {
    pub const UNIT: Rect = Rect { lo: [0.0, 0.0], hi: [1.0, 1.0] };

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn area(&self) -> f64 {
        self.extent(0) * self.extent(1)
    }

    pub fn center(&self) -> [f64; 2] {
        [0.5 * (self.lo[0] + self.hi[0]), 0.5 * (self.lo[1] + self.hi[1])]
    }

    pub fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect { lo: self.lo, hi: c },
            Rect { lo: [c[0], self.lo[1]], hi: [self.hi[0], c[1]] },
            Rect { lo: [self.lo[0], c[1]], hi: [c[0], self.hi[1]] },
            Rect { lo: c, hi: self.hi },
        ]
    }
}

/// One inside-interval column of a cut leaf: abscissa `s` along the column
/// axis with its 1D weight, plus the inside intervals along the height axis.
#[derive(Clone, Debug)]
pub struct Column {
    pub s: f64,
    pub w_s: f64,
    pub intervals: Vec<[f64; 2]>,
}

/// Structured leaf of the interior rule. The structure is retained because
/// tensor-product leaves admit separable integration of basis products.
#[derive(Clone, Debug)]
pub enum LeafRule {
    /// Full tensor Gauss rule over the box.
    Tensor(Rect),
    /// Height-function rule: `s_axis` carries the Gauss abscissae, the other
    /// axis the inside intervals.
    Columns { rect: Rect, s_axis: usize, columns: Vec<Column> },
}

/// Leaf decomposition of the trimmed interior of one cell.
#[derive(Clone, Debug)]
pub struct InteriorStructure {
    pub leaves: Vec<LeafRule>,
    pub leaf_gauss: usize,
}

impl InteriorStructure {
    /// Flatten the structured leaves into an explicit point rule.
    pub fn flatten(&self) -> QuadRule {
        let g = gauss_1d(self.leaf_gauss);
        let mut rule = QuadRule::default();
        for leaf in &self.leaves {
            match leaf {
                LeafRule::Tensor(rect) => {
                    let (w1, w2) = (rect.extent(0), rect.extent(1));
                    for (ya, wa) in g.nodes.iter().zip(&g.weights) {
                        let y = rect.lo[1] + w2 * ya;
                        for (xa, wb) in g.nodes.iter().zip(&g.weights) {
                            rule.points.push([rect.lo[0] + w1 * xa, y]);
                            rule.weights.push(wa * wb * w1 * w2);
                        }
                    }
                }
                LeafRule::Columns { s_axis, columns, .. } => {
                    let h_axis = 1 - s_axis;
                    for col in columns {
                        for iv in &col.intervals {
                            let len = iv[1] - iv[0];
                            for (ha, wh) in g.nodes.iter().zip(&g.weights) {
                                let h = iv[0] + len * ha;
                                let mut p = [0.0; 2];
                                p[*s_axis] = col.s;
                                p[h_axis] = h;
                                rule.points.push(p);
                                rule.weights.push(col.w_s * wh * len);
                            }
                        }
                    }
                }
            }
        }
        rule
    }

    pub fn area(&self) -> f64 {
        let g = gauss_1d(self.leaf_gauss);
        let mut a = 0.0;
        for leaf in &self.leaves {
            match leaf {
                LeafRule::Tensor(rect) => a += rect.area(),
                LeafRule::Columns { columns, .. } => {
                    let _ = &g;
                    for col in columns {
                        let len: f64 = col.intervals.iter().map(|iv| iv[1] - iv[0]).sum();
                        a += col.w_s * len;
                    }
                }
            }
        }
        a
    }
}

/// Tensor Gauss-Legendre rule with `n` points per direction on the unit
/// square.
pub fn reference_rule(n: usize) -> QuadRule {
    let g = gauss_1d(n);
    let mut rule = QuadRule {
        points: Vec::with_capacity(n * n),
        weights: Vec::with_capacity(n * n),
    };
    for (y, wy) in g.nodes.iter().zip(&g.weights) {
        for (x, wx) in g.nodes.iter().zip(&g.weights) {
            rule.points.push([*x, *y]);
            rule.weights.push(wx * wy);
        }
    }
    rule
}
