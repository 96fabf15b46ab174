use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::MaterialLaw;
use crate::geometry::{
    build_tensor_lattice, AuxMap, BoundaryCondition, BoundaryEdge, Cell, CellMap, DirichletData,
    Edge, Interface, Lattice, LevelSet, TensorBcTags, ThresholdField, ThresholdParams,
    TractionData,
};
use crate::rom::RomModel;
use crate::solve::{run_solve, Field, ProblemSpec, RunReport, SolverMode, SolverOptions};
use crate::{Error, Result};

/// Lattice wrench: a three-layer ring of 54 cells between a hexagonal hole
/// and the outer circle, plus a 12 x 3 handle grid, 90 subdomains in total.
/// The micro-structure is a Schoen-IWP level set with node-consistent random
/// thresholds in `[-2.5, 2.5]`.
///
/// Dimensions in millimeters: hexagon apothem 8.7, head diameter 60, handle
/// length 50.
pub fn wrench_lattice(seed: u64) -> Lattice {
    const N_ANG: usize = 18;
    const N_RAD: usize = 3; // cell layers in the ring
    const N_COL: usize = 12; // handle columns
    const N_ROW: usize = 3; // handle rows
    let apothem = 8.7f64;
    let r_out = 30.0f64;
    let handle_len = 50.0f64;

    // hexagon radius at angle theta (flats normal to 0, 60, ... degrees)
    let hex_r = |theta_deg: f64| {
        let mut d = theta_deg.rem_euclid(60.0);
        if d > 30.0 {
            d -= 60.0;
        }
        apothem / (d.to_radians()).cos()
    };
    // ring grid rotated so the handle spans whole sectors
    let theta = |k: usize| 10.0 + 20.0 * (k % N_ANG) as f64;

    // ring node table: (angular, radial layer)
    let mut ring_nodes = vec![[[0.0f64; 2]; N_RAD + 1]; N_ANG];
    for k in 0..N_ANG {
        let t = theta(k);
        let (s, c) = t.to_radians().sin_cos();
        let r0 = hex_r(t);
        for j in 0..=N_RAD {
            let r = r0 + (r_out - r0) * j as f64 / N_RAD as f64;
            ring_nodes[k][j] = [r * c, r * s];
        }
    }
    // handle node table: rows bottom (y < 0) to top, columns from the free
    // end toward the ring; the last column reuses the ring nodes exactly
    // (sectors theta = 150..210 degrees, angular indices 7..10)
    let ring_k_for_row = |b: usize| 10 - b; // b = 0 -> theta 210, b = 3 -> theta 150
    let x_end = ring_nodes[10][N_RAD][0] - handle_len;
    let mut handle_nodes = vec![[[0.0f64; 2]; N_ROW + 1]; N_COL + 1];
    for b in 0..=N_ROW {
        let right = ring_nodes[ring_k_for_row(b)][N_RAD];
        let left = [x_end, -15.0 + 10.0 * b as f64];
        for c in 0..=N_COL {
            let t = c as f64 / N_COL as f64;
            handle_nodes[c][b] = if c == N_COL {
                right
            } else {
                [left[0] + (right[0] - left[0]) * t, left[1] + (right[1] - left[1]) * t]
            };
        }
    }

    // node-consistent random thresholds
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ring_mu = vec![[0.0f64; N_RAD + 1]; N_ANG];
    for col in ring_mu.iter_mut() {
        for v in col.iter_mut() {
            *v = rng.random_range(-2.5..2.5);
        }
    }
    let mut handle_mu = vec![[0.0f64; N_ROW + 1]; N_COL + 1];
    for (c, col) in handle_mu.iter_mut().enumerate() {
        for (b, v) in col.iter_mut().enumerate() {
            *v = if c == N_COL {
                ring_mu[ring_k_for_row(b)][N_RAD]
            } else {
                rng.random_range(-2.5..2.5)
            };
        }
    }

    let mut cells = Vec::with_capacity(90);
    // ring cells: local xi1 runs with decreasing angle so the jacobian stays
    // positive; xi2 runs outward
    let ring_id = |k: usize, j: usize| j * N_ANG + k;
    for j in 0..N_RAD {
        for k in 0..N_ANG {
            let kn = (k + 1) % N_ANG;
            let corners = [
                ring_nodes[kn][j],
                ring_nodes[k][j],
                ring_nodes[kn][j + 1],
                ring_nodes[k][j + 1],
            ];
            let mu = ThresholdParams([
                ring_mu[kn][j],
                ring_mu[k][j],
                ring_mu[kn][j + 1],
                ring_mu[k][j + 1],
            ]);
            cells.push(Cell::new(
                ring_id(k, j),
                CellMap::Bilinear { corners },
                LevelSet::SchoenIwp,
                mu,
            ));
        }
    }
    // handle cells: xi1 toward the ring, xi2 upward
    let handle_id = |c: usize, b: usize| 54 + b * N_COL + c;
    for b in 0..N_ROW {
        for c in 0..N_COL {
            let corners = [
                handle_nodes[c][b],
                handle_nodes[c + 1][b],
                handle_nodes[c][b + 1],
                handle_nodes[c + 1][b + 1],
            ];
            let mu = ThresholdParams([
                handle_mu[c][b],
                handle_mu[c + 1][b],
                handle_mu[c][b + 1],
                handle_mu[c + 1][b + 1],
            ]);
            cells.push(Cell::new(
                handle_id(c, b),
                CellMap::Bilinear { corners },
                LevelSet::SchoenIwp,
                mu,
            ));
        }
    }

    let mut interfaces = Vec::new();
    for j in 0..N_RAD {
        for k in 0..N_ANG {
            // angular neighbor: this cell's left edge sits at theta(k + 1)
            let kn = (k + 1) % N_ANG;
            interfaces.push(Interface {
                a: (ring_id(k, j), Edge::Left),
                b: (ring_id(kn, j), Edge::Right),
            });
            if j + 1 < N_RAD {
                interfaces.push(Interface {
                    a: (ring_id(k, j), Edge::Top),
                    b: (ring_id(k, j + 1), Edge::Bottom),
                });
            }
        }
    }
    for b in 0..N_ROW {
        for c in 0..N_COL {
            if c + 1 < N_COL {
                interfaces.push(Interface {
                    a: (handle_id(c, b), Edge::Right),
                    b: (handle_id(c + 1, b), Edge::Left),
                });
            }
            if b + 1 < N_ROW {
                interfaces.push(Interface {
                    a: (handle_id(c, b), Edge::Top),
                    b: (handle_id(c, b + 1), Edge::Bottom),
                });
            }
        }
    }
    // ring-handle junction: outer ring edges of sectors 7..10 meet the last
    // handle column; both run from high to low angle
    for b in 0..N_ROW {
        let k = ring_k_for_row(b + 1); // sector [theta(k), theta(k + 1)]
        interfaces.push(Interface {
            a: (ring_id(k, N_RAD - 1), Edge::Top),
            b: (handle_id(N_COL - 1, b), Edge::Right),
        });
    }

    // boundary: hexagonal hole clamped, handle end loaded downward, rest free
    let mut boundary = Vec::new();
    for k in 0..N_ANG {
        boundary.push(BoundaryEdge {
            cell: ring_id(k, 0),
            edge: Edge::Bottom,
            bc: BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0])),
        });
        if !(7..10).contains(&k) {
            boundary.push(BoundaryEdge {
                cell: ring_id(k, N_RAD - 1),
                edge: Edge::Top,
                bc: BoundaryCondition::Free,
            });
        }
    }
    for b in 0..N_ROW {
        boundary.push(BoundaryEdge {
            cell: handle_id(0, b),
            edge: Edge::Left,
            bc: BoundaryCondition::Traction(TractionData::Constant([0.0, -1.0])),
        });
    }
    for c in 0..N_COL {
        boundary.push(BoundaryEdge { cell: handle_id(c, 0), edge: Edge::Bottom, bc: BoundaryCondition::Free });
        boundary.push(BoundaryEdge {
            cell: handle_id(c, N_ROW - 1),
            edge: Edge::Top,
            bc: BoundaryCondition::Free,
        });
    }

    Lattice { cells, interfaces, boundary }
}

/// Problem spec of the wrench demo: E = 5 N/mm, nu = 0.25.
pub fn wrench_problem(p: usize, q: usize) -> ProblemSpec {
    ProblemSpec::new(
        wrench_lattice(2024),
        MaterialLaw::from_youngs(5.0, 0.25, true),
        p,
        q,
        1e-4,
    )
}

/// Sandwich wing slab at a reduced cell count: solid skins, porous core,
/// clamped near the quarter chord, loaded by a smooth suction profile on
/// the upper surface. `scale` multiplies the base 40 x 4 grid; the profile
/// keeps the full-size dimensions (10 m chord, 220 mm thickness).
pub fn wing_lattice(scale: f64) -> Lattice {
    let n1 = ((40.0 * scale).round() as usize).max(8);
    let n2 = ((4.0 * scale).round() as usize).max(2);
    let chord = 10_000.0; // mm
    let aux = AuxMap::WingSlab { chord, thickness: 0.022, s0: 0.02, s1: 0.98 };
    let mut lattice = build_tensor_lattice(
        aux,
        n1,
        n2,
        LevelSet::SchwarzDiamond,
        // solid skin at the faces, porous core in the middle
        &ThresholdField::Tent { axis: 2, at_center: 0.1, at_edges: 1.0 },
        &TensorBcTags::default(),
    );
    // clamp the skins where the spar would sit, load the upper surface
    let p_max = 4.5; // N/mm
    let pressure: TractionData = TractionData::Field(Arc::new(move |x: [f64; 2]| {
        let s = (x[0] / chord).clamp(0.0, 1.0);
        [0.0, p_max * (PI * s).sin().max(0.0)]
    }));
    for be in lattice.boundary.iter_mut() {
        if !(be.edge == Edge::Bottom || be.edge == Edge::Top) {
            continue;
        }
        let col = be.cell % n1;
        let s_mid = (col as f64 + 0.5) / n1 as f64;
        if (0.18..=0.35).contains(&s_mid) {
            be.bc = BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0]));
        } else if be.edge == Edge::Top {
            be.bc = BoundaryCondition::Traction(pressure.clone());
        }
    }
    lattice
}

/// Problem spec of the wing demo (aluminum-like skin material, N/mm units).
pub fn wing_problem(scale: f64, p: usize, q: usize) -> ProblemSpec {
    ProblemSpec::new(
        wing_lattice(scale),
        MaterialLaw::from_youngs(70_000.0, 0.3, true),
        p,
        q,
        1e-4,
    )
}

/// Which demo to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoName {
    Wing,
    Wrench,
}

impl std::str::FromStr for DemoName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wing" => Ok(DemoName::Wing),
            "wrench" => Ok(DemoName::Wrench),
            other => Err(Error::Config(format!("unknown demo '{other}'"))),
        }
    }
}

/// Run a demo end to end and return the field with its report.
pub fn run_demo(
    name: DemoName,
    scale: f64,
    p: usize,
    mode: SolverMode,
    rom: Option<&RomModel>,
    opts: &SolverOptions,
) -> Result<(ProblemSpec, Field, RunReport)> {
    let spec = match name {
        DemoName::Wing => wing_problem(scale, p, 2),
        DemoName::Wrench => wrench_problem(p, 2),
    };
    let (field, report) = run_solve(&spec, mode, rom, opts)?;
    Ok((spec, field, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrench_has_ninety_compatible_cells() {
        let lat = wrench_lattice(2024);
        assert_eq!(lat.n_cells(), 90);
        let violations = lat.check_compatibility(33, 1e-9);
        assert!(violations.is_empty(), "{violations:?}");
        // every cell map positively oriented
        for c in &lat.cells {
            for &(a, b) in &[(0.1, 0.2), (0.9, 0.8), (0.5, 0.5)] {
                assert!(c.map.eval(c.index, a, b).unwrap().det > 0.0, "cell {}", c.index);
            }
        }
        // hexagonal hole clamped on 18 edges, handle end loaded on 3
        let dirichlet = lat
            .boundary
            .iter()
            .filter(|b| matches!(b.bc, BoundaryCondition::Dirichlet(_)))
            .count();
        let loaded = lat
            .boundary
            .iter()
            .filter(|b| matches!(b.bc, BoundaryCondition::Traction(_)))
            .count();
        assert_eq!(dirichlet, 18);
        assert_eq!(loaded, 3);
        // thresholds stay inside the training interval
        for c in &lat.cells {
            for &m in &c.thresholds.0 {
                assert!((-2.5..=2.5).contains(&m));
            }
        }
        // all four edges of every cell accounted for exactly once
        let mut seen = std::collections::HashSet::new();
        for iface in &lat.interfaces {
            assert!(seen.insert(iface.a), "duplicate {:?}", iface.a);
            assert!(seen.insert(iface.b), "duplicate {:?}", iface.b);
        }
        for be in &lat.boundary {
            assert!(seen.insert((be.cell, be.edge)), "duplicate {:?}", (be.cell, be.edge));
        }
        assert_eq!(seen.len(), 4 * 90);
    }

    #[test]
    fn wing_reduced_scale_consistent() {
        let lat = wing_lattice(0.5);
        assert_eq!(lat.n_cells(), 20 * 2);
        assert!(lat.check_compatibility(9, 1e-9).is_empty());
        let clamped = lat
            .boundary
            .iter()
            .filter(|b| matches!(b.bc, BoundaryCondition::Dirichlet(_)))
            .count();
        assert!(clamped >= 2, "spar clamp missing");
        let loaded = lat
            .boundary
            .iter()
            .filter(|b| matches!(b.bc, BoundaryCondition::Traction(_)))
            .count();
        assert!(loaded > 5);
    }
}
