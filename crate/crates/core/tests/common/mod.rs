//! Shared dense-oracle helpers for the solver integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

use lattix::bddc::{classify_dofs, BddcOperators, DofPartition};
use lattix::element::MaterialLaw;
use lattix::geometry::{
    build_tensor_lattice, AuxMap, BoundaryCondition, DirichletData, LevelSet, TensorBcTags,
    ThresholdField, TractionData,
};
use lattix::solve::{assemble_elements, partition_elements, ProblemSpec, StiffnessMode};

/// Small trimmed benchmark on the identity map: Dirichlet left, traction
/// right.
pub fn square_problem(n1: usize, n2: usize, p: usize, rho: f64) -> ProblemSpec {
    let lattice = build_tensor_lattice(
        AuxMap::Identity,
        n1,
        n2,
        LevelSet::SchwarzDiamond,
        &ThresholdField::Affine { c0: 0.8, c1: -0.5, c2: 0.1 },
        &TensorBcTags {
            left: BoundaryCondition::Dirichlet(DirichletData::Constant([0.0, 0.0])),
            right: BoundaryCondition::Traction(TractionData::Constant([0.0, -0.1])),
            ..Default::default()
        },
    );
    ProblemSpec::new(lattice, MaterialLaw::from_youngs(5.0, 0.25, true), p, 2, rho)
}

pub struct Setup {
    pub partition: DofPartition,
    pub raw: Vec<(DMatrix<f64>, DVector<f64>)>,
    pub ops: BddcOperators,
}

pub fn setup(spec: &ProblemSpec) -> Setup {
    let partition = classify_dofs(&spec.lattice, spec.p).unwrap();
    let raw = assemble_elements(spec, &StiffnessMode::Full).unwrap();
    let elements = partition_elements(&partition, &raw);
    let ops = BddcOperators::build(&spec.lattice, partition.clone(), &elements).unwrap();
    Setup { partition, raw, ops }
}

/// Dense global stiffness on the condensed numbering (interiors stacked,
/// then skeleton), assembled independently from the raw cell matrices.
pub fn dense_global(setup: &Setup) -> (DMatrix<f64>, Vec<usize>, usize) {
    let part = &setup.partition;
    let n_int: usize = part.cells.iter().map(|c| c.interior.len()).sum();
    let n = n_int + part.n_skeleton;
    let mut offsets = Vec::new();
    let mut off = 0;
    for cd in &part.cells {
        offsets.push(off);
        off += cd.interior.len();
    }
    let mut k: DMatrix<f64> = DMatrix::zeros(n, n);
    for (i, (kf, _)) in setup.raw.iter().enumerate() {
        let cd = &part.cells[i];
        let gid = |local: usize| -> Option<usize> {
            if let Some(pos) = cd.interior.iter().position(|&d| d == local) {
                return Some(offsets[i] + pos);
            }
            cd.skeleton
                .iter()
                .position(|&d| d == local)
                .map(|pos| n_int + cd.skeleton_global[pos])
        };
        let ndof = kf.nrows();
        for r in 0..ndof {
            let Some(gr) = gid(r) else { continue };
            for c in 0..ndof {
                let Some(gc) = gid(c) else { continue };
                k[(gr, gc)] += kf[(r, c)];
            }
        }
    }
    (k, offsets, n_int)
}

/// Dense assembled interface Schur complement.
pub fn dense_schur(setup: &Setup) -> DMatrix<f64> {
    let (k, _, n_int) = dense_global(setup);
    let n_u = setup.partition.n_skeleton;
    let kii = k.view((0, 0), (n_int, n_int)).clone_owned();
    let kiu = k.view((0, n_int), (n_int, n_u)).clone_owned();
    let kuu = k.view((n_int, n_int), (n_u, n_u)).clone_owned();
    if n_int == 0 {
        return kuu;
    }
    let x = kii.lu().solve(&kiu).unwrap();
    &kuu - kiu.transpose() * x
}


/// Dense closed-form preconditioner: the coarse term through the stacked
/// basis plus the per-cell constrained-inverse fine terms.
pub fn dense_preconditioner(s: &Setup) -> DMatrix<f64> {
    let part = &s.partition;
    let n_u = part.n_skeleton;
    let n_c = s.ops.coarse.n_coarse();

    // stacked restriction, weights, basis
    let n_stack: usize = part.cells.iter().map(|c| c.skeleton.len()).sum();
    let mut r_stack = DMatrix::zeros(n_stack, n_u);
    let mut d_stack = DMatrix::zeros(n_stack, n_stack);
    let mut psi_stack = DMatrix::zeros(n_stack, n_c);
    let mut s_block = DMatrix::zeros(n_stack, n_stack);
    let mut row = 0;
    for (i, cd) in part.cells.iter().enumerate() {
        let ops = &s.ops.cells[i];
        let n_loc = cd.skeleton.len();
        for loc in 0..n_loc {
            r_stack[(row + loc, cd.skeleton_global[loc])] = 1.0;
            d_stack[(row + loc, row + loc)] = ops.weights[loc];
        }
        for (cloc, &gc) in s.ops.coarse.cell_coarse[i].iter().enumerate() {
            for loc in 0..n_loc {
                psi_stack[(row + loc, gc)] = ops.psi[(loc, cloc)];
            }
        }
        s_block
            .view_mut((row, row), (n_loc, n_loc))
            .copy_from(&ops.schur.s);
        row += n_loc;
    }

    let sc = psi_stack.transpose() * &s_block * &psi_stack;
    let sc_inv = sc.lu().try_inverse().unwrap();
    let dr = &d_stack * &r_stack;
    let coarse = dr.transpose() * &psi_stack * sc_inv * psi_stack.transpose() * &dr;

    let mut fine: DMatrix<f64> = DMatrix::zeros(n_u, n_u);
    for (i, cd) in part.cells.iter().enumerate() {
        let ops = &s.ops.cells[i];
        let n_loc = cd.skeleton.len();
        let c = &s.ops.coarse.constraints[i];
        let n_cl = c.nrows();
        let mut big = DMatrix::zeros(n_loc + n_cl, n_loc + n_cl);
        big.view_mut((0, 0), (n_loc, n_loc)).copy_from(&ops.schur.s);
        big.view_mut((n_loc, 0), (n_cl, n_loc)).copy_from(c);
        big.view_mut((0, n_loc), (n_loc, n_cl)).copy_from(&c.transpose());
        let inv = big.lu().try_inverse().unwrap();
        let top = inv.view((0, 0), (n_loc, n_loc));
        // local D R
        let mut drl = DMatrix::zeros(n_loc, n_u);
        for loc in 0..n_loc {
            drl[(loc, cd.skeleton_global[loc])] = ops.weights[loc];
        }
        fine += drl.transpose() * top * &drl;
    }
    coarse + fine
}

