use std::f64::consts::PI;
use std::sync::Arc;

use crate::geometry::{
    build_tensor_lattice, AuxMap, BoundaryCondition, DirichletData, LevelSet, TensorBcTags,
    ThresholdField,
};
use crate::element::MaterialLaw;
use crate::norms::compute_error_norms;
use crate::quad::{cut_cell_rules, QuadOptions};
use crate::solve::{run_solve, Field, ForceMode, ProblemSpec, RunReport, SolverMode, SolverOptions};
use crate::Result;

/// Closed-form reference solution on the unit square,
/// `u = u0 ((2 x2 - 1), (1 - 2 x1)) sin^2(pi x1) sin^2(pi x2)`,
/// with its stress and the body force that balances it.
#[derive(Clone, Copy, Debug)]
pub struct Manufactured {
    pub u0: f64,
    pub lambda: f64,
    pub mu: f64,
}

struct Derivs {
    u1_1: f64,
    u1_2: f64,
    u2_1: f64,
    u2_2: f64,
    u1_11: f64,
    u1_12: f64,
    u1_22: f64,
    u2_11: f64,
    u2_12: f64,
    u2_22: f64,
}

impl Manufactured {
    pub fn unit() -> Self {
        Manufactured { u0: 0.1, lambda: 1.0, mu: 1.0 }
    }

    pub fn displacement(&self, x: [f64; 2]) -> [f64; 2] {
        let (s1, s2) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        let f = s1 * s1 * s2 * s2;
        [
            self.u0 * (2.0 * x[1] - 1.0) * f,
            self.u0 * (1.0 - 2.0 * x[0]) * f,
        ]
    }

    fn derivs(&self, x: [f64; 2]) -> Derivs {
        let (s1, s2) = ((PI * x[0]).sin(), (PI * x[1]).sin());
        let (s21, s22) = ((2.0 * PI * x[0]).sin(), (2.0 * PI * x[1]).sin());
        let (c21, c22) = ((2.0 * PI * x[0]).cos(), (2.0 * PI * x[1]).cos());
        let f = s1 * s1 * s2 * s2;
        let f1 = PI * s21 * s2 * s2;
        let f2 = PI * s22 * s1 * s1;
        let f11 = 2.0 * PI * PI * c21 * s2 * s2;
        let f22 = 2.0 * PI * PI * c22 * s1 * s1;
        let f12 = PI * PI * s21 * s22;
        let g2 = 2.0 * x[1] - 1.0;
        let g1 = 1.0 - 2.0 * x[0];
        let u0 = self.u0;
        Derivs {
            u1_1: u0 * g2 * f1,
            u1_2: u0 * (2.0 * f + g2 * f2),
            u2_1: u0 * (-2.0 * f + g1 * f1),
            u2_2: u0 * g1 * f2,
            u1_11: u0 * g2 * f11,
            u1_12: u0 * (2.0 * f1 + g2 * f12),
            u1_22: u0 * (4.0 * f2 + g2 * f22),
            u2_11: u0 * (-4.0 * f1 + g1 * f11),
            u2_12: u0 * (-2.0 * f2 + g1 * f12),
            u2_22: u0 * g1 * f22,
        }
    }

    pub fn stress(&self, x: [f64; 2]) -> [[f64; 2]; 2] {
        let d = self.derivs(x);
        let (l, m) = (self.lambda, self.mu);
        let s11 = (l + 2.0 * m) * d.u1_1 + l * d.u2_2;
        let s22 = l * d.u1_1 + (l + 2.0 * m) * d.u2_2;
        let s12 = m * (d.u1_2 + d.u2_1);
        [[s11, s12], [s12, s22]]
    }

    /// `b = -div sigma(u)`.
    pub fn body_force(&self, x: [f64; 2]) -> [f64; 2] {
        let d = self.derivs(x);
        let (l, m) = (self.lambda, self.mu);
        [
            -((l + 2.0 * m) * d.u1_11 + (l + m) * d.u2_12 + m * d.u1_22),
            -((l + m) * d.u1_12 + m * d.u2_11 + (l + 2.0 * m) * d.u2_22),
        ]
    }

    pub fn traction(&self, x: [f64; 2], n: [f64; 2]) -> [f64; 2] {
        let s = self.stress(x);
        [
            s[0][0] * n[0] + s[0][1] * n[1],
            s[1][0] * n[0] + s[1][1] * n[1],
        ]
    }
}

/// Single Schoen-FRD cell with identity map and zero threshold, loaded by
/// the manufactured body force; displacements are prescribed on the four
/// conformal edges (the reference solution vanishes there) and the
/// manufactured traction acts on the trimmed boundary.
pub fn manufactured_problem(p: usize) -> ProblemSpec {
    let mfg = Manufactured::unit();
    let lattice = build_tensor_lattice(
        AuxMap::Identity,
        1,
        1,
        LevelSet::SchoenFrd,
        &ThresholdField::Constant { value: 0.0 },
        &TensorBcTags {
            left: dirichlet(mfg),
            right: dirichlet(mfg),
            bottom: dirichlet(mfg),
            top: dirichlet(mfg),
        },
    );
    let mut spec = ProblemSpec::new(
        lattice,
        MaterialLaw { lambda: mfg.lambda, mu: mfg.mu },
        p,
        2,
        0.0,
    );
    spec.quad = QuadOptions::for_degree(p);
    spec.body_force = Some(Arc::new(move |x| mfg.body_force(x)));
    spec.trimmed_traction = Some(Arc::new(move |x, n| mfg.traction(x, n)));
    spec.force_mode = ForceMode::Quadrature;
    spec
}

fn dirichlet(mfg: Manufactured) -> BoundaryCondition {
    BoundaryCondition::Dirichlet(DirichletData::Field(Arc::new(move |x| mfg.displacement(x))))
}

/// One row of the convergence study.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ConvergenceRow {
    pub p: usize,
    pub n_dofs: usize,
    pub l2_abs: f64,
    pub l2_rel: f64,
}

/// Solve the manufactured problem for each degree and report L2 errors.
pub fn run_manufactured(degrees: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mfg = Manufactured::unit();
    let mut rows = Vec::new();
    for &p in degrees {
        let spec = manufactured_problem(p);
        let (field, report) = run_solve(&spec, SolverMode::BddcFull, None, &SolverOptions::default())?;
        let rules = spec
            .lattice
            .cells
            .iter()
            .map(|c| cut_cell_rules(c, &spec.quad))
            .collect::<Result<Vec<_>>>()?;
        let (l2_abs, l2_rel) = compute_error_norms(
            &field,
            &move |x| mfg.displacement(x),
            &spec.lattice,
            &rules,
        );
        rows.push(ConvergenceRow { p, n_dofs: report.n_dofs, l2_abs, l2_rel });
    }
    Ok(rows)
}

/// Solve once at the given degree and return the field with its errors.
pub fn solve_manufactured(p: usize) -> Result<(Field, RunReport, f64, f64)> {
    let mfg = Manufactured::unit();
    let spec = manufactured_problem(p);
    let (field, report) = run_solve(&spec, SolverMode::BddcFull, None, &SolverOptions::default())?;
    let rules = spec
        .lattice
        .cells
        .iter()
        .map(|c| cut_cell_rules(c, &spec.quad))
        .collect::<Result<Vec<_>>>()?;
    let (abs, rel) =
        compute_error_norms(&field, &move |x| mfg.displacement(x), &spec.lattice, &rules);
    Ok((field, report, abs, rel))
}
