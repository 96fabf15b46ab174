use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

/// Map from an auxiliary parametric rectangle onto the physical plane.
/// Tensor lattices restrict one of these to per-cell subrectangles.
#[derive(Clone)]
pub enum AuxMap {
    Identity,
    /// Quarter annulus between radii `r0` and `r1`: the first auxiliary
    /// coordinate sweeps the angle, the second the radius.
    QuarterAnnulus { r0: f64, r1: f64 },
    /// Symmetric airfoil-like slab: the first coordinate runs along the
    /// chord over `[s0, s1]` of the profile, the second through the
    /// thickness. Uses the standard four-digit half-thickness polynomial.
    WingSlab { chord: f64, thickness: f64, s0: f64, s1: f64 },
    Custom(CustomMap),
}

#[derive(Clone)]
pub struct CustomMap {
    pub name: String,
    pub value: Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>,
    /// Jacobian columns d(x)/d(xi1), d(x)/d(xi2).
    pub jacobian: Arc<dyn Fn(f64, f64) -> [[f64; 2]; 2] + Send + Sync>,
}

impl fmt::Debug for AuxMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuxMap::Identity => write!(f, "Identity"),
            AuxMap::QuarterAnnulus { r0, r1 } => write!(f, "QuarterAnnulus({r0},{r1})"),
            AuxMap::WingSlab { chord, thickness, s0, s1 } => {
                write!(f, "WingSlab({chord},{thickness},{s0},{s1})")
            }
            AuxMap::Custom(c) => write!(f, "Custom({})", c.name),
        }
    }
}

fn half_thickness(s: f64) -> f64 {
    // NACA 00xx half thickness for unit max thickness, open trailing edge.
    5.0 * (0.2969 * s.sqrt() - 0.1260 * s - 0.3516 * s * s + 0.2843 * s.powi(3)
        - 0.1015 * s.powi(4))
}

fn half_thickness_ds(s: f64) -> f64 {
    5.0 * (0.2969 * 0.5 / s.sqrt() - 0.1260 - 2.0 * 0.3516 * s + 3.0 * 0.2843 * s * s
        - 4.0 * 0.1015 * s.powi(3))
}

impl AuxMap {
    pub fn eval(&self, t1: f64, t2: f64) -> [f64; 2] {
        match self {
            AuxMap::Identity => [t1, t2],
            AuxMap::QuarterAnnulus { r0, r1 } => {
                let r = r0 + (r1 - r0) * t2;
                let a = 0.5 * PI * t1;
                [r * a.sin(), -r * a.cos()]
            }
            AuxMap::WingSlab { chord, thickness, s0, s1 } => {
                let s = s0 + (s1 - s0) * t1;
                let yt = chord * thickness * half_thickness(s);
                [chord * s, yt * (2.0 * t2 - 1.0)]
            }
            AuxMap::Custom(c) => (c.value)(t1, t2),
        }
    }

    /// Jacobian d(x)/d(t); entry `[i][j]` is d x_i / d t_j.
    pub fn jacobian(&self, t1: f64, t2: f64) -> [[f64; 2]; 2] {
        match self {
            AuxMap::Identity => [[1.0, 0.0], [0.0, 1.0]],
            AuxMap::QuarterAnnulus { r0, r1 } => {
                let r = r0 + (r1 - r0) * t2;
                let dr = r1 - r0;
                let a = 0.5 * PI * t1;
                let (sa, ca) = a.sin_cos();
                [[r * 0.5 * PI * ca, dr * sa], [r * 0.5 * PI * sa, -dr * ca]]
            }
            AuxMap::WingSlab { chord, thickness, s0, s1 } => {
                let ds = s1 - s0;
                let s = s0 + ds * t1;
                let yt = chord * thickness * half_thickness(s);
                let dyt = chord * thickness * half_thickness_ds(s) * ds;
                [[chord * ds, 0.0], [dyt * (2.0 * t2 - 1.0), 2.0 * yt]]
            }
            AuxMap::Custom(c) => (c.jacobian)(t1, t2),
        }
    }

    pub fn kind_name(&self) -> &str {
        match self {
            AuxMap::Identity => "identity",
            AuxMap::QuarterAnnulus { .. } => "quarter-annulus",
            AuxMap::WingSlab { .. } => "wing-slab",
            AuxMap::Custom(c) => &c.name,
        }
    }
}

/// Geometric map of a single cell from the unit square into the plane.
#[derive(Clone, Debug)]
pub enum CellMap {
    /// Axis-aligned rectangle; the identity map is `Rect` with unit size.
    Rect { origin: [f64; 2], size: [f64; 2] },
    /// Bilinear quadrilateral through four corners ordered bottom-left,
    /// bottom-right, top-left, top-right.
    Bilinear { corners: [[f64; 2]; 4] },
    /// Tensor-product polynomial of the given degrees per direction;
    /// `coeffs[b * (deg1 + 1) + a]` multiplies `xi1^a xi2^b`.
    TensorPoly { degrees: (usize, usize), coeffs: Vec<[f64; 2]> },
    /// Restriction of an auxiliary map to a subrectangle, reparameterized to
    /// the unit square.
    AuxSub { aux: AuxMap, origin: [f64; 2], size: [f64; 2] },
}

/// Point evaluation of a cell map: physical position, Jacobian and its
/// determinant.
#[derive(Clone, Copy, Debug)]
pub struct MapEval {
    pub x: [f64; 2],
    /// `jac[i][j] = d x_i / d xi_j`
    pub jac: [[f64; 2]; 2],
    pub det: f64,
}

impl MapEval {
    /// Inverse Jacobian; entry `[m][j]` is d xi_m / d x_j.
    pub fn inv_jac(&self) -> [[f64; 2]; 2] {
        let d = self.det;
        let j = self.jac;
        [[j[1][1] / d, -j[0][1] / d], [-j[1][0] / d, j[0][0] / d]]
    }

    /// Stretch factor of the map along a parametric direction `tau`
    /// (the curve Jacobian for a boundary curve with unit parametric speed).
    pub fn tangential_stretch(&self, tau: [f64; 2]) -> f64 {
        let tx = self.jac[0][0] * tau[0] + self.jac[0][1] * tau[1];
        let ty = self.jac[1][0] * tau[0] + self.jac[1][1] * tau[1];
        tx.hypot(ty)
    }
}

impl CellMap {
    pub fn identity() -> Self {
        CellMap::Rect { origin: [0.0, 0.0], size: [1.0, 1.0] }
    }

    pub fn position(&self, xi1: f64, xi2: f64) -> [f64; 2] {
        match self {
            CellMap::Rect { origin, size } => {
                [origin[0] + size[0] * xi1, origin[1] + size[1] * xi2]
            }
            CellMap::Bilinear { corners } => {
                let [bl, br, tl, tr] = corners;
                let mut x = [0.0; 2];
                for i in 0..2 {
                    x[i] = (1.0 - xi1) * (1.0 - xi2) * bl[i]
                        + xi1 * (1.0 - xi2) * br[i]
                        + (1.0 - xi1) * xi2 * tl[i]
                        + xi1 * xi2 * tr[i];
                }
                x
            }
            CellMap::TensorPoly { degrees, coeffs } => {
                let (d1, d2) = *degrees;
                let mut x = [0.0; 2];
                let mut p2 = 1.0;
                for b in 0..=d2 {
                    let mut p1 = 1.0;
                    for a in 0..=d1 {
                        let c = coeffs[b * (d1 + 1) + a];
                        x[0] += c[0] * p1 * p2;
                        x[1] += c[1] * p1 * p2;
                        p1 *= xi1;
                    }
                    p2 *= xi2;
                }
                x
            }
            CellMap::AuxSub { aux, origin, size } => {
                aux.eval(origin[0] + size[0] * xi1, origin[1] + size[1] * xi2)
            }
        }
    }

    pub fn jacobian(&self, xi1: f64, xi2: f64) -> [[f64; 2]; 2] {
        match self {
            CellMap::Rect { size, .. } => [[size[0], 0.0], [0.0, size[1]]],
            CellMap::Bilinear { corners } => {
                let [bl, br, tl, tr] = corners;
                let mut j = [[0.0; 2]; 2];
                for i in 0..2 {
                    j[i][0] = (1.0 - xi2) * (br[i] - bl[i]) + xi2 * (tr[i] - tl[i]);
                    j[i][1] = (1.0 - xi1) * (tl[i] - bl[i]) + xi1 * (tr[i] - br[i]);
                }
                j
            }
            CellMap::TensorPoly { degrees, coeffs } => {
                let (d1, d2) = *degrees;
                let mut j = [[0.0; 2]; 2];
                let mut p2 = 1.0;
                let mut p2m = 0.0; // d(xi2^b)/dxi2 accumulator helper
                for b in 0..=d2 {
                    let mut p1 = 1.0;
                    let mut p1m = 0.0;
                    for a in 0..=d1 {
                        let c = coeffs[b * (d1 + 1) + a];
                        for i in 0..2 {
                            j[i][0] += c[i] * (a as f64) * p1m * p2;
                            j[i][1] += c[i] * p1 * (b as f64) * p2m;
                        }
                        p1m = p1;
                        p1 *= xi1;
                    }
                    p2m = p2;
                    p2 *= xi2;
                }
                j
            }
            CellMap::AuxSub { aux, origin, size } => {
                let ja = aux.jacobian(origin[0] + size[0] * xi1, origin[1] + size[1] * xi2);
                [
                    [ja[0][0] * size[0], ja[0][1] * size[1]],
                    [ja[1][0] * size[0], ja[1][1] * size[1]],
                ]
            }
        }
    }

    /// Evaluate position, Jacobian, and determinant, failing on a
    /// non-positive determinant.
    pub fn eval(&self, cell: usize, xi1: f64, xi2: f64) -> Result<MapEval> {
        let ev = self.eval_unchecked(xi1, xi2);
        if ev.det <= 0.0 {
            return Err(Error::NonPositiveJacobian { cell, xi1, xi2, det: ev.det });
        }
        Ok(ev)
    }

    pub fn eval_unchecked(&self, xi1: f64, xi2: f64) -> MapEval {
        let x = self.position(xi1, xi2);
        let jac = self.jacobian(xi1, xi2);
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        MapEval { x, jac, det }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eval() {
        let m = CellMap::identity();
        let ev = m.eval(0, 0.3, 0.7).unwrap();
        assert_eq!(ev.x, [0.3, 0.7]);
        assert_eq!(ev.jac, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(ev.det, 1.0);
    }

    #[test]
    fn quarter_annulus_origin() {
        let aux = AuxMap::QuarterAnnulus { r0: 0.6, r1: 1.0 };
        let x = aux.eval(0.0, 0.0);
        assert!((x[0] - 0.0).abs() < 1e-15);
        assert!((x[1] + 0.6).abs() < 1e-15);
        // the raw map is negatively oriented; the flipped restriction used by
        // tensor lattices has a positive determinant
        let m = CellMap::AuxSub { aux, origin: [0.0, 1.0], size: [1.0, -1.0] };
        let ev = m.eval(0, 0.25, 0.4).unwrap();
        assert!(ev.det > 0.0);
    }

    #[test]
    fn annulus_jacobian_matches_finite_differences() {
        let m = CellMap::AuxSub {
            aux: AuxMap::QuarterAnnulus { r0: 0.6, r1: 1.0 },
            origin: [0.0, 1.0],
            size: [1.0, -1.0],
        };
        let (x1, x2) = (0.4, 0.2);
        let j = m.jacobian(x1, x2);
        let h = 1e-6;
        for col in 0..2 {
            let (p, q) = if col == 0 {
                (m.position(x1 + h, x2), m.position(x1 - h, x2))
            } else {
                (m.position(x1, x2 + h), m.position(x1, x2 - h))
            };
            for row in 0..2 {
                let fd = (p[row] - q[row]) / (2.0 * h);
                let denom = j[row][col].abs().max(1.0);
                assert!(
                    ((j[row][col] - fd) / denom).abs() <= 1e-6,
                    "entry ({row},{col}): {} vs fd {}",
                    j[row][col],
                    fd
                );
            }
        }
    }

    #[test]
    fn negative_jacobian_detected() {
        let m = CellMap::Bilinear {
            corners: [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]], // swapped: reflection
        };
        assert!(matches!(
            m.eval(3, 0.5, 0.5),
            Err(Error::NonPositiveJacobian { cell: 3, .. })
        ));
    }

    #[test]
    fn bilinear_matches_tensor_poly() {
        let corners = [[0.1, -0.2], [1.3, 0.1], [-0.1, 0.9], [1.1, 1.4]];
        let bil = CellMap::Bilinear { corners };
        // xi1^a xi2^b coefficients of the same bilinear patch
        let [bl, br, tl, tr] = corners;
        let coeffs = vec![
            bl,
            [br[0] - bl[0], br[1] - bl[1]],
            [tl[0] - bl[0], tl[1] - bl[1]],
            [
                tr[0] + bl[0] - br[0] - tl[0],
                tr[1] + bl[1] - br[1] - tl[1],
            ],
        ];
        let poly = CellMap::TensorPoly { degrees: (1, 1), coeffs };
        for &(a, b) in &[(0.0, 0.0), (0.3, 0.8), (1.0, 0.4), (0.77, 0.77)] {
            let xb = bil.position(a, b);
            let xp = poly.position(a, b);
            assert!((xb[0] - xp[0]).abs() < 1e-14 && (xb[1] - xp[1]).abs() < 1e-14);
            let jb = bil.jacobian(a, b);
            let jp = poly.jacobian(a, b);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((jb[i][j] - jp[i][j]).abs() < 1e-13);
                }
            }
        }
    }
}
