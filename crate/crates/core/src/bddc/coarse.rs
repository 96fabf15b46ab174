use nalgebra::DMatrix;

use crate::element::GllBasis;
use crate::geometry::Lattice;
use crate::quad::gauss_1d;

use super::dofs::{edge_nodes, DofPartition};

/// Kind of a coarse degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoarseKind {
    CrosspointU1,
    CrosspointU2,
    EdgeAvgU1,
    EdgeAvgU2,
    EdgeMoment,
}

/// Geometric entity a coarse dof belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoarseEntity {
    /// node class id of the crosspoint
    Crosspoint(usize),
    /// interface index
    Edge(usize),
}

#[derive(Clone, Debug)]
pub struct CoarseDof {
    pub kind: CoarseKind,
    pub entity: CoarseEntity,
}

/// Coarse space: point values at crosspoints plus averages and a rotational
/// moment per interface edge, with the extraction rows of `Q` and the
/// per-cell constraint matrices.
#[derive(Clone, Debug)]
pub struct CoarseSpace {
    pub dofs: Vec<CoarseDof>,
    /// per coarse dof: sparse row of Q over global skeleton dofs
    pub q_rows: Vec<Vec<(usize, f64)>>,
    /// per cell: global coarse ids with support on that cell, sorted
    pub cell_coarse: Vec<Vec<usize>>,
    /// per cell: constraint matrix `C = R_C Q R_U^T`
    /// (rows follow `cell_coarse`, columns the cell's skeleton list)
    pub constraints: Vec<DMatrix<f64>>,
    /// per cell: (constraint row, unit skeleton column) of crosspoint rows
    pub crosspoint_rows: Vec<Vec<(usize, usize)>>,
}

impl CoarseSpace {
    pub fn n_coarse(&self) -> usize {
        self.dofs.len()
    }
}

/// Builds the coarse registry, the extraction matrix rows, and the local
/// constraint matrices. Edge integrals run over the full conformal edge in
/// physical measure; each interface's row is computed once, from its first
/// side, so both cells see identical coefficients.
pub fn build_coarse(lattice: &Lattice, partition: &DofPartition) -> CoarseSpace {
    build_coarse_with(lattice, partition, EdgeMeasure::Trimmed)
}

/// Measure used for the coarse edge integrals: the full conformal edge, or
/// only its active (material) portion. Averaging over the active portion
/// constrains the modes that carry energy on heavily trimmed cells and
/// roughly halves the iteration counts, so it is the default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeMeasure {
    Untrimmed,
    Trimmed,
}

pub fn build_coarse_with(
    lattice: &Lattice,
    partition: &DofPartition,
    measure: EdgeMeasure,
) -> CoarseSpace {
    let p = partition.p;
    let basis = GllBasis::new(p);
    let gauss = gauss_1d(p + 4);
    let n_cells = lattice.n_cells();

    let mut dofs: Vec<CoarseDof> = Vec::new();
    let mut q_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut cell_coarse: Vec<Vec<usize>> = vec![Vec::new(); n_cells];
    // crosspoint class -> coarse ids, to avoid duplicates
    let mut seen_crosspoints: std::collections::HashMap<usize, [usize; 2]> =
        std::collections::HashMap::new();

    // Edge constraints act on the edge-interior dofs once the crosspoint
    // values are eliminated, so their count is capped by 2 (p - 1): both
    // averages and the moment need p >= 3, the averages alone fit at p = 2,
    // and p = 1 edges carry no constraints beyond their crosspoints.
    let n_edge_kinds = match p {
        0 | 1 => 0,
        2 => 2,
        _ => 3,
    };

    for (k, iface) in lattice.interfaces.iter().enumerate() {
        let (cell_a, edge_a) = iface.a;
        let nodes_a = edge_nodes(edge_a, p);
        let classes: Vec<usize> =
            nodes_a.iter().map(|&n| partition.node_class[cell_a][n]).collect();

        // endpoint crosspoints
        for &cls in [classes[0], classes[p]].iter() {
            if partition.class_is_dirichlet[cls] || seen_crosspoints.contains_key(&cls) {
                continue;
            }
            let mut ids = [0usize; 2];
            for comp in 0..2 {
                let gid = partition.class_dof[cls][comp].expect("skeleton crosspoint dof");
                let id = dofs.len();
                dofs.push(CoarseDof {
                    kind: if comp == 0 { CoarseKind::CrosspointU1 } else { CoarseKind::CrosspointU2 },
                    entity: CoarseEntity::Crosspoint(cls),
                });
                q_rows.push(vec![(gid, 1.0)]);
                ids[comp] = id;
            }
            seen_crosspoints.insert(cls, ids);
        }

        if n_edge_kinds == 0 {
            continue;
        }

        // edge trace integrals in physical measure, from side a
        let cell = &lattice.cells[cell_a];
        let map = &cell.map;
        let tangent = edge_a.tangent();
        let (params, ws): (Vec<f64>, Vec<f64>) = match measure {
            EdgeMeasure::Untrimmed => {
                (gauss.nodes.clone(), gauss.weights.clone())
            }
            EdgeMeasure::Trimmed => {
                let rule = crate::quad::conformal_edge_rule(cell, edge_a, p + 4, 64);
                if rule.t.is_empty() {
                    // fully inactive edge: fall back to the untrimmed measure
                    (gauss.nodes.clone(), gauss.weights.clone())
                } else {
                    (rule.t, rule.w)
                }
            }
        };
        let n_g = params.len();
        let mut trace = vec![vec![0.0; p + 1]; n_g];
        let mut jac = vec![0.0; n_g];
        let mut xs = vec![[0.0f64; 2]; n_g];
        let mut deriv_scratch = vec![0.0; p + 1];
        for (g, &t) in params.iter().enumerate() {
            let par = edge_a.point(t);
            basis.eval_1d(t, &mut trace[g], &mut deriv_scratch);
            let ev = map.eval_unchecked(par[0], par[1]);
            jac[g] = ev.tangential_stretch(tangent);
            xs[g] = ev.x;
        }
        // arc-length centroid of the edge
        let len: f64 = ws.iter().zip(&jac).map(|(w, j)| w * j).sum();
        let cx: f64 =
            ws.iter().zip(&jac).zip(&xs).map(|((w, j), x)| w * j * x[0]).sum::<f64>() / len;
        let cy: f64 =
            ws.iter().zip(&jac).zip(&xs).map(|((w, j), x)| w * j * x[1]).sum::<f64>() / len;

        let mut avg1 = Vec::new();
        let mut avg2 = Vec::new();
        let mut moment = Vec::new();
        for (node, &cls) in classes.iter().enumerate() {
            if partition.class_is_dirichlet[cls] {
                continue;
            }
            let int_plain: f64 = (0..n_g).map(|g| ws[g] * jac[g] * trace[g][node]).sum();
            let int_m1: f64 = (0..n_g)
                .map(|g| ws[g] * jac[g] * trace[g][node] * (xs[g][1] - cy))
                .sum();
            let int_m2: f64 = (0..n_g)
                .map(|g| ws[g] * jac[g] * trace[g][node] * (cx - xs[g][0]))
                .sum();
            let d1 = partition.class_dof[cls][0].expect("skeleton edge dof");
            let d2 = partition.class_dof[cls][1].expect("skeleton edge dof");
            avg1.push((d1, int_plain));
            avg2.push((d2, int_plain));
            moment.push((d1, int_m1));
            moment.push((d2, int_m2));
        }
        dofs.push(CoarseDof { kind: CoarseKind::EdgeAvgU1, entity: CoarseEntity::Edge(k) });
        q_rows.push(avg1);
        dofs.push(CoarseDof { kind: CoarseKind::EdgeAvgU2, entity: CoarseEntity::Edge(k) });
        q_rows.push(avg2);
        if n_edge_kinds == 3 {
            dofs.push(CoarseDof { kind: CoarseKind::EdgeMoment, entity: CoarseEntity::Edge(k) });
            q_rows.push(moment);
        }
    }

    // cells supporting each coarse dof
    for (id, dof) in dofs.iter().enumerate() {
        match dof.entity {
            CoarseEntity::Crosspoint(cls) => {
                for (cell, nodes) in partition.node_class.iter().enumerate() {
                    if nodes.contains(&cls) {
                        cell_coarse[cell].push(id);
                    }
                }
            }
            CoarseEntity::Edge(k) => {
                cell_coarse[lattice.interfaces[k].a.0].push(id);
                cell_coarse[lattice.interfaces[k].b.0].push(id);
            }
        }
    }
    for list in cell_coarse.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }

    // local constraint matrices
    let mut constraints = Vec::with_capacity(n_cells);
    let mut crosspoint_rows = Vec::with_capacity(n_cells);
    for cell in 0..n_cells {
        let cd = &partition.cells[cell];
        let mut global_to_local = std::collections::HashMap::new();
        for (loc, &gid) in cd.skeleton_global.iter().enumerate() {
            global_to_local.insert(gid, loc);
        }
        let mut c = DMatrix::zeros(cell_coarse[cell].len(), cd.skeleton.len());
        let mut cps = Vec::new();
        for (row, &id) in cell_coarse[cell].iter().enumerate() {
            for &(gdof, coeff) in &q_rows[id] {
                let loc = *global_to_local
                    .get(&gdof)
                    .expect("coarse row references dof outside supporting cell");
                c[(row, loc)] = coeff;
            }
            if matches!(dofs[id].kind, CoarseKind::CrosspointU1 | CoarseKind::CrosspointU2) {
                let loc = *global_to_local.get(&q_rows[id][0].0).unwrap();
                cps.push((row, loc));
            }
        }
        constraints.push(c);
        crosspoint_rows.push(cps);
    }

    CoarseSpace { dofs, q_rows, cell_coarse, constraints, crosspoint_rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bddc::dofs::classify_dofs;
    use crate::geometry::{
        build_tensor_lattice, AuxMap, LevelSet, TensorBcTags, ThresholdField,
    };

    fn grid(n1: usize, n2: usize, p: usize) -> (Lattice, DofPartition) {
        let lat = build_tensor_lattice(
            AuxMap::Identity,
            n1,
            n2,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 10.0 },
            &TensorBcTags::default(),
        );
        let part = classify_dofs(&lat, p).unwrap();
        (lat, part)
    }

    #[test]
    fn counts_on_two_by_two() {
        let (lat, part) = grid(2, 2, 3);
        let coarse = build_coarse(&lat, &part);
        // 4 interfaces x 3 + 5 crosspoints x 2 (4 boundary endpoints + center)
        assert_eq!(coarse.n_coarse(), 4 * 3 + 5 * 2);
        // every interface edge contributes exactly 3 dofs
        let edge_count = coarse
            .dofs
            .iter()
            .filter(|d| matches!(d.entity, CoarseEntity::Edge(_)))
            .count();
        assert_eq!(edge_count, 12);
    }

    #[test]
    fn constant_field_edge_quantities() {
        let (lat, part) = grid(2, 1, 3);
        let coarse = build_coarse(&lat, &part);
        // u = (1, 0) on the skeleton
        let mut u = nalgebra::DVector::zeros(part.n_skeleton);
        for cls in 0..part.class_dof.len() {
            if let Some(d1) = part.class_dof[cls][0] {
                u[d1] = 1.0;
            }
        }
        for (id, dof) in coarse.dofs.iter().enumerate() {
            let val: f64 = coarse.q_rows[id].iter().map(|&(d, w)| w * u[d]).sum();
            match dof.kind {
                // unit-length straight edge
                CoarseKind::EdgeAvgU1 => assert!((val - 1.0).abs() < 1e-12),
                CoarseKind::EdgeAvgU2 => assert!(val.abs() < 1e-12),
                // moment weight (x2 - c2) integrates to zero against a
                // constant on a straight edge
                CoarseKind::EdgeMoment => assert!(val.abs() < 1e-12),
                CoarseKind::CrosspointU1 => assert!((val - 1.0).abs() < 1e-14),
                CoarseKind::CrosspointU2 => assert!(val.abs() < 1e-14),
            }
        }
    }

    #[test]
    fn rotation_moment_analytic() {
        // rigid rotation with unit angular coefficient about the edge center:
        // u1 = -(x2 - c2), u2 = (x1 - c1); on a straight unit edge the moment
        // evaluates to -1/12
        let (lat, part) = grid(2, 1, 6);
        let coarse = build_coarse(&lat, &part);
        let basis = GllBasis::new(6);
        // interface is the vertical segment x = 0.5; center (0.5, 0.5)
        let mut u = nalgebra::DVector::zeros(part.n_skeleton);
        for (cell, nodes) in part.node_class.iter().enumerate() {
            for (node, &cls) in nodes.iter().enumerate() {
                if let [Some(d1), Some(d2)] = part.class_dof[cls] {
                    let n1 = 7;
                    let (i, j) = (node % n1, node / n1);
                    let x = lat.cells[cell]
                        .map
                        .position(basis.nodes[i], basis.nodes[j]);
                    u[d1] = -(x[1] - 0.5);
                    u[d2] = x[0] - 0.5;
                }
            }
        }
        let moment_id = coarse
            .dofs
            .iter()
            .position(|d| d.kind == CoarseKind::EdgeMoment)
            .unwrap();
        let val: f64 = coarse.q_rows[moment_id].iter().map(|&(d, w)| w * u[d]).sum();
        assert!((val + 1.0 / 12.0).abs() < 1e-12, "moment {val}");
    }

    #[test]
    fn constraint_matrices_shapes() {
        let (lat, part) = grid(2, 2, 2);
        let coarse = build_coarse(&lat, &part);
        for cell in 0..4 {
            // each cell touches 2 edges (2 dofs each at p = 2) and 3
            // crosspoints
            assert_eq!(coarse.cell_coarse[cell].len(), 2 * 2 + 3 * 2);
            assert_eq!(
                coarse.constraints[cell].nrows(),
                coarse.cell_coarse[cell].len()
            );
            assert_eq!(
                coarse.constraints[cell].ncols(),
                part.cells[cell].skeleton.len()
            );
            assert_eq!(coarse.crosspoint_rows[cell].len(), 6);
        }
    }
}
