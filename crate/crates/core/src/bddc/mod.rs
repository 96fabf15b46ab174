//! Balancing domain decomposition by constraints: dof classification, local
//! Schur complements, the crosspoint/edge coarse space, the two-level
//! preconditioner, and conjugate gradients on the interface problem.

mod coarse;
mod dofs;
mod local;
mod pcg;

pub use coarse::{build_coarse, build_coarse_with, CoarseDof, CoarseEntity, CoarseKind, CoarseSpace, EdgeMeasure};
pub use dofs::{classify_dofs, edge_nodes, CellDofs, DofPartition};
pub use local::{partition_of_unity, schur, SaddleSolver, SchurOps, SymFactor};
pub use pcg::{pcg, PcgReport, PhaseTimings};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::element::ElementMatrices;
use crate::geometry::Lattice;
use crate::solve::{rcm_order, BandedLdlt, Csr};
use crate::Result;

/// Per-cell operators of the assembled preconditioner.
pub struct CellOps {
    pub schur: SchurOps,
    pub weights: DVector<f64>,
    pub saddle: SaddleSolver,
    /// coarse basis columns, one per local coarse dof
    pub psi: DMatrix<f64>,
}

/// All operators of one BDDC setup: partition, coarse space, local solvers,
/// and the factorized coarse operator.
pub struct BddcOperators {
    pub partition: DofPartition,
    pub coarse: CoarseSpace,
    pub cells: Vec<CellOps>,
    pub coarse_solver: Option<BandedLdlt>,
    /// assembled condensed interface right-hand side
    pub rhs: DVector<f64>,
}

impl BddcOperators {
    /// Assembles every local and coarse operator from the element matrices.
    /// Per-cell work runs data-parallel; the coarse factorization is the one
    /// serialized section.
    pub fn build(
        lattice: &Lattice,
        partition: DofPartition,
        elements: &[ElementMatrices],
    ) -> Result<Self> {
        Self::build_with(lattice, partition, elements, EdgeMeasure::Trimmed)
    }

    /// `build` with an explicit coarse edge-integral measure.
    pub fn build_with(
        lattice: &Lattice,
        partition: DofPartition,
        elements: &[ElementMatrices],
        measure: EdgeMeasure,
    ) -> Result<Self> {
        let coarse = build_coarse_with(lattice, &partition, measure);
        let weights = partition_of_unity(&partition, elements)?;

        let mut cells: Vec<CellOps> = (0..lattice.n_cells())
            .into_par_iter()
            .map(|i| -> Result<CellOps> {
                let ops = schur(i, &elements[i])?;
                let saddle = SaddleSolver::new(
                    i,
                    &ops.s,
                    &coarse.constraints[i],
                    &coarse.crosspoint_rows[i],
                )?;
                // coarse basis: one constrained solve per local coarse dof
                let n_c = coarse.constraints[i].nrows();
                let n_u = ops.s.nrows();
                let mut psi = DMatrix::zeros(n_u, n_c);
                let zero_f = DVector::zeros(n_u);
                for r in 0..n_c {
                    let mut g = DVector::zeros(n_c);
                    g[r] = 1.0;
                    let (x, _) = saddle.solve(&zero_f, &g);
                    psi.column_mut(r).copy_from(&x);
                }
                Ok(CellOps { schur: ops, weights: DVector::zeros(0), saddle, psi })
            })
            .collect::<Result<Vec<_>>>()?;
        for (cell, w) in weights.into_iter().enumerate() {
            cells[cell].weights = w;
        }

        // assembled interface rhs
        let mut rhs = DVector::zeros(partition.n_skeleton);
        for (i, cd) in partition.cells.iter().enumerate() {
            for (loc, &gid) in cd.skeleton_global.iter().enumerate() {
                rhs[gid] += cells[i].schur.f[loc];
            }
        }

        // coarse operator S_C = sum Psi^T S Psi through the coarse maps
        let n_c = coarse.n_coarse();
        let coarse_solver = if n_c > 0 {
            let mut triplets = Vec::new();
            for (i, ops) in cells.iter().enumerate() {
                if ops.psi.ncols() == 0 {
                    continue;
                }
                let local = ops.psi.transpose() * &ops.schur.s * &ops.psi;
                let ids = &coarse.cell_coarse[i];
                for (r, &gr) in ids.iter().enumerate() {
                    for (c, &gc) in ids.iter().enumerate() {
                        triplets.push((gr, gc, local[(r, c)]));
                    }
                }
            }
            let csr = Csr::from_triplets(n_c, &mut triplets);
            let order = rcm_order(&csr);
            Some(BandedLdlt::factor(&csr, order)?)
        } else {
            None
        };

        Ok(BddcOperators { partition, coarse, cells, coarse_solver, rhs })
    }

    pub fn n_interface(&self) -> usize {
        self.partition.n_skeleton
    }

    /// Matrix-free action of the assembled Schur complement: scatter,
    /// multiply by the local operators, gather-add.
    pub fn apply_schur(&self, u: &DVector<f64>) -> DVector<f64> {
        let locals: Vec<DVector<f64>> = self
            .cells
            .par_iter()
            .enumerate()
            .map(|(i, ops)| {
                let cd = &self.partition.cells[i];
                let ui = DVector::from_iterator(
                    cd.skeleton_global.len(),
                    cd.skeleton_global.iter().map(|&g| u[g]),
                );
                &ops.schur.s * ui
            })
            .collect();
        let mut out = DVector::zeros(u.len());
        for (i, li) in locals.iter().enumerate() {
            for (loc, &gid) in self.partition.cells[i].skeleton_global.iter().enumerate() {
                out[gid] += li[loc];
            }
        }
        out
    }

    /// One application of the two-level preconditioner: weighted constrained
    /// local solves plus the coarse correction through the basis columns.
    pub fn apply_preconditioner(&self, r: &DVector<f64>) -> DVector<f64> {
        let n_c = self.coarse.n_coarse();
        // fine corrections and coarse right-hand side contributions per cell
        let parts: Vec<(DVector<f64>, DVector<f64>)> = self
            .cells
            .par_iter()
            .enumerate()
            .map(|(i, ops)| {
                let cd = &self.partition.cells[i];
                let ri = DVector::from_iterator(
                    cd.skeleton_global.len(),
                    cd.skeleton_global.iter().map(|&g| r[g]),
                );
                let dri = ri.component_mul(&ops.weights);
                let g = DVector::zeros(ops.psi.ncols());
                let (x, _) = ops.saddle.solve(&dri, &g);
                let fine = x.component_mul(&ops.weights);
                let coarse_rhs = ops.psi.transpose() * &dri;
                (fine, coarse_rhs)
            })
            .collect();

        let mut w = DVector::zeros(r.len());
        let mut z = DVector::zeros(n_c);
        for (i, (fine, zc)) in parts.iter().enumerate() {
            for (loc, &gid) in self.partition.cells[i].skeleton_global.iter().enumerate() {
                w[gid] += fine[loc];
            }
            for (loc, &gc) in self.coarse.cell_coarse[i].iter().enumerate() {
                z[gc] += zc[loc];
            }
        }

        if let Some(chol) = &self.coarse_solver {
            let g = chol.solve(&z);
            let coarse_parts: Vec<DVector<f64>> = self
                .cells
                .par_iter()
                .enumerate()
                .map(|(i, ops)| {
                    let gi = DVector::from_iterator(
                        self.coarse.cell_coarse[i].len(),
                        self.coarse.cell_coarse[i].iter().map(|&c| g[c]),
                    );
                    (&ops.psi * gi).component_mul(&ops.weights)
                })
                .collect();
            for (i, xc) in coarse_parts.iter().enumerate() {
                for (loc, &gid) in self.partition.cells[i].skeleton_global.iter().enumerate() {
                    w[gid] += xc[loc];
                }
            }
        }
        w
    }

    /// Interface solve by preconditioned conjugate gradients.
    pub fn solve_interface(&self, tol: f64, max_it: usize) -> (DVector<f64>, PcgReport) {
        pcg(
            |u| self.apply_schur(u),
            |r| self.apply_preconditioner(r),
            &self.rhs,
            tol,
            max_it,
        )
    }

    /// Recover per-cell full local solutions (interior solve plus Dirichlet
    /// values) from the interface solution.
    pub fn recover_cells(&self, u: &DVector<f64>) -> Vec<DVector<f64>> {
        let n1 = self.partition.p + 1;
        let ndof = 2 * n1 * n1;
        (0..self.cells.len())
            .into_par_iter()
            .map(|i| {
                let cd = &self.partition.cells[i];
                let ops = &self.cells[i];
                let ui = DVector::from_iterator(
                    cd.skeleton_global.len(),
                    cd.skeleton_global.iter().map(|&g| u[g]),
                );
                let mut full = DVector::zeros(ndof);
                if let Some(lu) = &ops.schur.kii_lu {
                    let rhs = &ops.schur.f_i - &ops.schur.k_iu * &ui;
                    let u_int = lu.solve(&rhs).expect("factorized");
                    for (loc, &dof) in cd.interior.iter().enumerate() {
                        full[dof] = u_int[loc];
                    }
                }
                for (loc, &dof) in cd.skeleton.iter().enumerate() {
                    full[dof] = ui[loc];
                }
                for (loc, &dof) in cd.dirichlet.iter().enumerate() {
                    full[dof] = cd.u_d[loc];
                }
                full
            })
            .collect()
    }
}
