use nalgebra::DVector;

use crate::element::gll_nodes;
use crate::geometry::{BoundaryCondition, Edge, Lattice};
use crate::Result;

/// Local node ids along an edge of the `(p+1)^2` tensor grid, ordered with
/// the running coordinate.
pub fn edge_nodes(edge: Edge, p: usize) -> Vec<usize> {
    let n = p + 1;
    match edge {
        Edge::Left => (0..n).map(|j| j * n).collect(),
        Edge::Right => (0..n).map(|j| j * n + p).collect(),
        Edge::Bottom => (0..n).collect(),
        Edge::Top => (0..n).map(|i| p * n + i).collect(),
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins, keeps class ids deterministic
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Dof lists of one cell in the local node-major, component-interleaved
/// ordering.
#[derive(Clone, Debug)]
pub struct CellDofs {
    pub interior: Vec<usize>,
    pub skeleton: Vec<usize>,
    pub dirichlet: Vec<usize>,
    /// global skeleton id per entry of `skeleton`
    pub skeleton_global: Vec<usize>,
    /// prescribed values per entry of `dirichlet`
    pub u_d: DVector<f64>,
}

/// Global dof bookkeeping: per-cell classification plus the non-redundant
/// skeleton numbering shared across cells.
#[derive(Clone, Debug)]
pub struct DofPartition {
    pub p: usize,
    pub cells: Vec<CellDofs>,
    pub n_skeleton: usize,
    /// per global skeleton dof: (cell, index into that cell's skeleton list)
    pub sharers: Vec<Vec<(usize, usize)>>,
    /// per cell and local node: geometric node class
    pub node_class: Vec<Vec<usize>>,
    /// per class and displacement component: global skeleton dof
    pub class_dof: Vec<[Option<usize>; 2]>,
    pub class_is_dirichlet: Vec<bool>,
    /// classes touched by more than one cell (interface nodes)
    pub class_is_interface: Vec<bool>,
}

impl DofPartition {
    pub fn n_total_skeleton(&self) -> usize {
        self.cells.iter().map(|c| c.skeleton.len()).sum()
    }
}

/// Classifies every dof of every cell as Dirichlet (on a Dirichlet-tagged
/// conformal edge, enforced over the whole edge), skeleton (on a shared
/// interface), or interior (everything else, including free outer-boundary
/// dofs), and numbers the non-redundant skeleton.
pub fn classify_dofs(lattice: &Lattice, p: usize) -> Result<DofPartition> {
    let n1 = p + 1;
    let nn = n1 * n1;
    let n_cells = lattice.n_cells();
    let mut uf = UnionFind::new(n_cells * nn);
    let node_id = |cell: usize, node: usize| cell * nn + node;

    for iface in &lattice.interfaces {
        let na = edge_nodes(iface.a.1, p);
        let nb = edge_nodes(iface.b.1, p);
        for t in 0..n1 {
            uf.union(node_id(iface.a.0, na[t]), node_id(iface.b.0, nb[t]));
        }
    }

    // class ids: root representatives
    let mut class_of = vec![0usize; n_cells * nn];
    for i in 0..n_cells * nn {
        class_of[i] = uf.find(i);
    }
    let mut member_count = vec![0usize; n_cells * nn];
    for &c in &class_of {
        member_count[c] += 1;
    }

    // Dirichlet marking and values per class
    let nodes_1d = gll_nodes(p);
    let mut dirichlet_class = vec![false; n_cells * nn];
    let mut dirichlet_value = vec![[0.0f64; 2]; n_cells * nn];
    for be in &lattice.boundary {
        let BoundaryCondition::Dirichlet(data) = &be.bc else { continue };
        let cell = &lattice.cells[be.cell];
        for (t, &node) in edge_nodes(be.edge, p).iter().enumerate() {
            let par = be.edge.point(nodes_1d[t]);
            let x = cell.map.position(par[0], par[1]);
            let cls = class_of[node_id(be.cell, node)];
            dirichlet_class[cls] = true;
            dirichlet_value[cls] = data.eval(x);
        }
    }

    // global skeleton numbering: first-touch over cells and nodes
    let mut class_dof_map: std::collections::HashMap<usize, [Option<usize>; 2]> =
        std::collections::HashMap::new();
    let mut n_skeleton = 0usize;
    let mut cells = Vec::with_capacity(n_cells);
    let mut sharers: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut node_class_out = Vec::with_capacity(n_cells);

    for cell in 0..n_cells {
        let mut dofs = CellDofs {
            interior: Vec::new(),
            skeleton: Vec::new(),
            dirichlet: Vec::new(),
            skeleton_global: Vec::new(),
            u_d: DVector::zeros(0),
        };
        let mut u_d_vals = Vec::new();
        let mut classes = Vec::with_capacity(nn);
        for node in 0..nn {
            let cls = class_of[node_id(cell, node)];
            classes.push(cls);
            let on_interface = member_count[cls] >= 2;
            for comp in 0..2 {
                let local = 2 * node + comp;
                if dirichlet_class[cls] {
                    dofs.dirichlet.push(local);
                    u_d_vals.push(dirichlet_value[cls][comp]);
                } else if on_interface {
                    let entry = class_dof_map.entry(cls).or_default();
                    let gid = *entry[comp].get_or_insert_with(|| {
                        sharers.push(Vec::new());
                        n_skeleton += 1;
                        n_skeleton - 1
                    });
                    sharers[gid].push((cell, dofs.skeleton.len()));
                    dofs.skeleton.push(local);
                    dofs.skeleton_global.push(gid);
                } else {
                    dofs.interior.push(local);
                }
            }
        }
        dofs.u_d = DVector::from_vec(u_d_vals);
        cells.push(dofs);
        node_class_out.push(classes);
    }

    // compact per-class tables
    let mut class_dof = vec![[None, None]; n_cells * nn];
    for (cls, dofs) in class_dof_map {
        class_dof[cls] = dofs;
    }
    let class_is_dirichlet = dirichlet_class;
    let class_is_interface: Vec<bool> = member_count.iter().map(|&m| m >= 2).collect();

    Ok(DofPartition {
        p,
        cells,
        n_skeleton,
        sharers,
        node_class: node_class_out,
        class_dof,
        class_is_dirichlet,
        class_is_interface,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_tensor_lattice, AuxMap, BoundaryCondition, DirichletData, LevelSet, TensorBcTags,
        ThresholdField,
    };

    fn dirichlet_zero() -> BoundaryCondition {
        BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0]))
    }

    #[test]
    fn two_by_one_p1_counts() {
        let lat = build_tensor_lattice(
            AuxMap::Identity,
            2,
            1,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 0.3 },
            &TensorBcTags { left: dirichlet_zero(), ..Default::default() },
        );
        let part = classify_dofs(&lat, 1).unwrap();
        assert_eq!(part.cells[0].dirichlet.len(), 4);
        assert_eq!(part.cells[0].skeleton.len(), 4);
        assert_eq!(part.cells[0].interior.len(), 0);
        assert_eq!(part.cells[1].skeleton.len(), 4);
        assert_eq!(part.cells[1].interior.len(), 4);
        assert_eq!(part.cells[1].dirichlet.len(), 0);
        assert_eq!(part.n_skeleton, 4);
        assert_eq!(part.n_total_skeleton(), 8);
    }

    #[test]
    fn single_cell_has_no_skeleton() {
        let lat = build_tensor_lattice(
            AuxMap::Identity,
            1,
            1,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 0.3 },
            &TensorBcTags::default(),
        );
        let part = classify_dofs(&lat, 4).unwrap();
        assert_eq!(part.n_skeleton, 0);
        assert_eq!(part.cells[0].interior.len(), 2 * 25);
    }

    #[test]
    fn crosspoint_counted_once() {
        let lat = build_tensor_lattice(
            AuxMap::Identity,
            2,
            2,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 0.3 },
            &TensorBcTags::default(),
        );
        let part = classify_dofs(&lat, 2).unwrap();
        // skeleton nodes: the central crosspoint plus 4 interface edges with
        // p+1 = 3 nodes each sharing endpoints; total distinct nodes:
        // 4 edges x 1 midnode + 4 edge-boundary endpoints + 1 center = 9
        assert_eq!(part.n_skeleton, 2 * 9);
        // the central node appears in all four cells' skeleton lists
        let center = part
            .sharers
            .iter()
            .filter(|s| s.len() == 4)
            .count();
        assert_eq!(center, 2); // two components
        // redundant total: per cell the two edges have 2*(3+3-1) = 10 dofs
        assert_eq!(part.n_total_skeleton(), 4 * 10);
    }

    #[test]
    fn dirichlet_values_sampled_from_field() {
        let lat = build_tensor_lattice(
            AuxMap::Identity,
            2,
            1,
            LevelSet::SchwarzPrimitive,
            &ThresholdField::Constant { value: 0.3 },
            &TensorBcTags {
                left: BoundaryCondition::Dirichlet(DirichletData::Field(std::sync::Arc::new(
                    |x: [f64; 2]| [x[1], 2.0 * x[1]],
                ))),
                ..Default::default()
            },
        );
        let part = classify_dofs(&lat, 2).unwrap();
        let cd = &part.cells[0];
        // left edge nodes at heights 0, 0.5, 1
        let mut seen = Vec::new();
        for (i, &local) in cd.dirichlet.iter().enumerate() {
            if local % 2 == 0 {
                seen.push((local, cd.u_d[i]));
            }
        }
        let heights: Vec<f64> = seen.iter().map(|&(_, v)| v).collect();
        assert_eq!(heights.len(), 3);
        assert!(heights.contains(&0.0) && heights.contains(&0.5) && heights.contains(&1.0));
    }
}
