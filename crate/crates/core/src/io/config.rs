use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::element::MaterialLaw;
use crate::quad::QuadOptions;
use crate::solve::{ForceMode, ProblemSpec, SolverMode, SolverOptions};
use crate::{Error, Result};

use super::schema::LatticeFile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSource {
    Path { file: String },
    Inline(LatticeFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Engineering { youngs: f64, poisson: f64, #[serde(default = "default_true")] plane_strain: bool },
    Lame { lambda: f64, mu: f64 },
}

fn default_true() -> bool {
    true
}

impl MaterialSpec {
    pub fn to_law(&self) -> Result<MaterialLaw> {
        let law = match *self {
            MaterialSpec::Engineering { youngs, poisson, plane_strain } => {
                MaterialLaw::from_youngs(youngs, poisson, plane_strain)
            }
            MaterialSpec::Lame { lambda, mu } => MaterialLaw { lambda, mu },
        };
        if law.mu <= 0.0 || law.lambda + law.mu <= 0.0 {
            return Err(Error::Config(format!(
                "material is not well posed: lambda = {}, mu = {}",
                law.lambda, law.mu
            )));
        }
        Ok(law)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSpec {
    pub p: usize,
    #[serde(default = "default_q")]
    pub q: usize,
    #[serde(default = "default_rho")]
    pub rho: f64,
}

fn default_q() -> usize {
    2
}

fn default_rho() -> f64 {
    5e-4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    #[serde(default = "default_quad_tol")]
    pub tol: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
}

fn default_quad_tol() -> f64 {
    1e-10
}

fn default_max_depth() -> usize {
    8
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { tol: default_quad_tol(), max_depth: default_max_depth() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub mode: SolverMode,
    #[serde(default = "default_solver_tol")]
    pub tol: f64,
    #[serde(default = "default_max_it")]
    pub max_it: usize,
    #[serde(default = "default_omega")]
    pub sor_omega: f64,
}

fn default_solver_tol() -> f64 {
    1e-8
}

fn default_max_it() -> usize {
    1000
}

fn default_omega() -> f64 {
    1.0
}

/// Problem configuration file (JSON). Paths are resolved relative to the
/// file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub lattice: LatticeSource,
    pub material: MaterialSpec,
    #[serde(default)]
    pub body_force: Option<[f64; 2]>,
    pub discretization: DiscretizationSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub solver: SolverSpec,
    /// surrogate artifact, required by mode `bddc-rom`
    #[serde(default)]
    pub rom: Option<String>,
    /// `interpolated` or `quadrature` force assembly
    #[serde(default)]
    pub force_mode: Option<String>,
    /// free-form unit note carried through reports
    #[serde(default)]
    pub units: Option<String>,
}

impl ProblemConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Resolve into a runnable problem. `base` anchors relative paths.
    pub fn to_problem(&self, base: &Path) -> Result<(ProblemSpec, SolverMode, SolverOptions, Option<PathBuf>)> {
        if self.discretization.p < 1 {
            return Err(Error::Config("discretization degree p must be at least 1".into()));
        }
        let lattice_file = match &self.lattice {
            LatticeSource::Inline(f) => f.clone(),
            LatticeSource::Path { file } => LatticeFile::load(&base.join(file))?,
        };
        let lattice = lattice_file.to_lattice()?;
        if lattice.cells.is_empty() {
            return Err(Error::Config("lattice has no cells".into()));
        }
        let law = self.material.to_law()?;
        let mut spec = ProblemSpec::new(
            lattice,
            law,
            self.discretization.p,
            self.discretization.q,
            self.discretization.rho,
        );
        let mut quad = QuadOptions::for_degree(self.discretization.p);
        quad.tol = self.quadrature.tol;
        quad.max_depth = self.quadrature.max_depth;
        spec.quad = quad;
        if let Some(b) = self.body_force {
            spec.body_force = Some(Arc::new(move |_| b));
        }
        spec.force_mode = match self.force_mode.as_deref() {
            None | Some("interpolated") => ForceMode::Interpolated,
            Some("quadrature") => ForceMode::Quadrature,
            Some(other) => {
                return Err(Error::Config(format!("unknown force mode '{other}'")))
            }
        };
        let rom_path = match (&self.solver.mode, &self.rom) {
            (SolverMode::BddcRom, Some(p)) => Some(base.join(p)),
            (SolverMode::BddcRom, None) => {
                return Err(Error::Config(
                    "mode bddc-rom requires a `rom` artifact path".into(),
                ))
            }
            (_, rom) => rom.as_ref().map(|p| base.join(p)),
        };
        let opts = SolverOptions {
            tol: self.solver.tol,
            max_it: self.solver.max_it,
            sor_omega: self.solver.sor_omega,
        };
        Ok((spec, self.solver.mode, opts, rom_path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::schema::{AuxMapSpec, BcSpec, GeometrySpec, SideTags};
    use crate::geometry::ThresholdField;

    fn sample_config() -> ProblemConfig {
        ProblemConfig {
            lattice: LatticeSource::Inline(LatticeFile {
                version: 1,
                level_set: "schwarz-diamond".into(),
                geometry: GeometrySpec::Tensor {
                    aux: AuxMapSpec::QuarterAnnulus { r0: 0.6, r1: 1.0 },
                    n1: 4,
                    n2: 2,
                    thresholds: ThresholdField::Affine { c0: 0.9, c1: -0.8, c2: 0.0 },
                    sides: SideTags {
                        left: Some(BcSpec::Dirichlet { value: [0.0, 0.0] }),
                        right: Some(BcSpec::Traction { value: [0.0, -0.1] }),
                        ..Default::default()
                    },
                },
            }),
            material: MaterialSpec::Engineering { youngs: 5.0, poisson: 0.25, plane_strain: true },
            body_force: None,
            discretization: DiscretizationSpec { p: 4, q: 2, rho: 5e-4 },
            quadrature: QuadratureSpec::default(),
            solver: SolverSpec { mode: SolverMode::BddcFull, tol: 1e-8, max_it: 500, sor_omega: 1.0 },
            rom: None,
            force_mode: None,
            units: Some("N/m".into()),
        }
    }

    #[test]
    fn round_trip_field_for_field() {
        let cfg = sample_config();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let parsed: ProblemConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(cfg, parsed);
    }

    #[test]
    fn resolves_to_problem() {
        let cfg = sample_config();
        let (spec, mode, opts, rom) = cfg.to_problem(Path::new(".")).unwrap();
        assert_eq!(spec.lattice.n_cells(), 8);
        assert_eq!(mode, SolverMode::BddcFull);
        assert_eq!(opts.max_it, 500);
        assert!(rom.is_none());
        // plane strain conversion: E = 5, nu = 0.25 -> lambda = mu = 2
        assert!((spec.law.lambda - 2.0).abs() < 1e-14);
        assert!((spec.law.mu - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rom_mode_requires_artifact() {
        let mut cfg = sample_config();
        cfg.solver.mode = SolverMode::BddcRom;
        assert!(matches!(cfg.to_problem(Path::new(".")), Err(Error::Config(_))));
    }
}
