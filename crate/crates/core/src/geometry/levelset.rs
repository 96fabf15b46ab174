use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Closed-form scalar field used to trim cells, evaluated in cell-parametric
/// coordinates. The four named families are 2D restrictions of classical
/// triply periodic minimal surfaces and are 1-periodic in each coordinate.
#[derive(Clone)]
pub enum LevelSet {
    SchwarzDiamond,
    SchwarzPrimitive,
    SchoenFrd,
    SchoenIwp,
    Custom(CustomLevelSet),
}

/// User-supplied level-set. Periodicity (if the lattice relies on it) is the
/// caller's responsibility; compatibility is checked numerically, not
/// symbolically. The gradient closure is optional; central differences are
/// used when it is absent.
#[derive(Clone)]
pub struct CustomLevelSet {
    pub name: String,
    pub value: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub grad: Option<Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>>,
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind_name())
    }
}

impl PartialEq for LevelSet {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (LevelSet::Custom(a), LevelSet::Custom(b)) => a.name == b.name,
            _ => self.kind_name() == other.kind_name(),
        }
    }
}

impl LevelSet {
    pub fn kind_name(&self) -> &str {
        match self {
            LevelSet::SchwarzDiamond => "schwarz-diamond",
            LevelSet::SchwarzPrimitive => "schwarz-primitive",
            LevelSet::SchoenFrd => "schoen-frd",
            LevelSet::SchoenIwp => "schoen-iwp",
            LevelSet::Custom(c) => &c.name,
        }
    }

    pub fn from_kind_name(name: &str) -> Option<Self> {
        match name {
            "schwarz-diamond" => Some(LevelSet::SchwarzDiamond),
            "schwarz-primitive" => Some(LevelSet::SchwarzPrimitive),
            "schoen-frd" => Some(LevelSet::SchoenFrd),
            "schoen-iwp" => Some(LevelSet::SchoenIwp),
            _ => None,
        }
    }

    /// Evaluate `phi0` at `(xi1, xi2)`. The formulas are globally defined, so
    /// evaluation slightly outside the unit square (quadrature overshoot) is
    /// allowed.
    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        match self {
            LevelSet::SchwarzDiamond => (2.0 * PI * xi1).cos() * (2.0 * PI * xi2).cos(),
            LevelSet::SchwarzPrimitive => (2.0 * PI * xi1).cos() + (2.0 * PI * xi2).cos() - 1.0,
            LevelSet::SchoenFrd => {
                let (c41, c42) = ((4.0 * PI * xi1).cos(), (4.0 * PI * xi2).cos());
                let (c21, c22) = ((2.0 * PI * xi1).cos(), (2.0 * PI * xi2).cos());
                c41 * c42 + c42 + c41 - 4.0 * c21 * c22
            }
            LevelSet::SchoenIwp => {
                let (c41, c42) = ((4.0 * PI * xi1).cos(), (4.0 * PI * xi2).cos());
                let (c21, c22) = ((2.0 * PI * xi1).cos(), (2.0 * PI * xi2).cos());
                2.0 * (c21 * c22 + c22 + c21) - c41 - c42 - 1.0
            }
            LevelSet::Custom(c) => (c.value)(xi1, xi2),
        }
    }

    /// Parametric gradient of `phi0`; analytic for the named families.
    pub fn grad(&self, xi1: f64, xi2: f64) -> [f64; 2] {
        let (s21, c21) = (2.0 * PI * xi1).sin_cos();
        let (s22, c22) = (2.0 * PI * xi2).sin_cos();
        match self {
            LevelSet::SchwarzDiamond => {
                [-2.0 * PI * s21 * c22, -2.0 * PI * c21 * s22]
            }
            LevelSet::SchwarzPrimitive => [-2.0 * PI * s21, -2.0 * PI * s22],
            LevelSet::SchoenFrd => {
                let (s41, c41) = (4.0 * PI * xi1).sin_cos();
                let (s42, c42) = (4.0 * PI * xi2).sin_cos();
                [
                    -4.0 * PI * s41 * c42 - 4.0 * PI * s41 + 8.0 * PI * s21 * c22,
                    -4.0 * PI * c41 * s42 - 4.0 * PI * s42 + 8.0 * PI * c21 * s22,
                ]
            }
            LevelSet::SchoenIwp => {
                let s41 = (4.0 * PI * xi1).sin();
                let s42 = (4.0 * PI * xi2).sin();
                [
                    2.0 * (-2.0 * PI * s21 * c22 - 2.0 * PI * s21) + 4.0 * PI * s41,
                    2.0 * (-2.0 * PI * c21 * s22 - 2.0 * PI * s22) + 4.0 * PI * s42,
                ]
            }
            LevelSet::Custom(c) => match &c.grad {
                Some(g) => g(xi1, xi2),
                None => {
                    let h = 1e-6;
                    [
                        ((c.value)(xi1 + h, xi2) - (c.value)(xi1 - h, xi2)) / (2.0 * h),
                        ((c.value)(xi1, xi2 + h) - (c.value)(xi1, xi2 - h)) / (2.0 * h),
                    ]
                }
            },
        }
    }
}

/// Threshold parameters at the four corners of the unit square, ordered
/// bottom-left, bottom-right, top-left, top-right.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThresholdParams(pub [f64; 4]);

impl ThresholdParams {
    pub fn uniform(mu: f64) -> Self {
        ThresholdParams([mu; 4])
    }

    /// Bilinear interpolation of the corner values.
    pub fn eval(&self, xi1: f64, xi2: f64) -> f64 {
        let [m1, m2, m3, m4] = self.0;
        (1.0 - xi1) * (1.0 - xi2) * m1
            + xi1 * (1.0 - xi2) * m2
            + (1.0 - xi1) * xi2 * m3
            + xi1 * xi2 * m4
    }

    pub fn grad(&self, xi1: f64, xi2: f64) -> [f64; 2] {
        let [m1, m2, m3, m4] = self.0;
        [
            (1.0 - xi2) * (m2 - m1) + xi2 * (m4 - m3),
            (1.0 - xi1) * (m3 - m1) + xi1 * (m4 - m2),
        ]
    }
}
