//! Composite-rigid-body assembly of subsystem matrices and their
//! factorization with branch-induced sparsity.
//!
//! For a tree, `A_j + Σ β J_ijᵀ J_ij` can be written `J_Bᵀ H_B J_B` with a
//! block-diagonal `H_B` as long as every constraint row is split per body.
//! The matrix then has exactly the sparsity of the joint-space inertia:
//! entry `(a, b)` can be nonzero only when dof `a` is an ancestor of `b` or
//! vice versa. The `LᵀL` factorization below runs over the dof parent array
//! and produces no fill outside that pattern.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3};

use crate::error::{Error, Result};
use crate::multibody::TreeKinematics;
use crate::spatial::SpatialInertia;

/// Effective body matrix `M_b + Σ β J_{i,b}ᵀ J_{i,b}` for full point
/// constraints on one body, kept in the ten-scalar spatial-inertia layout.
pub type EffectiveBodyMatrix = SpatialInertia;

/// Adds `β JᵀJ` for every point constraint `(R_i, p_i)` to the body's inertia.
/// With `J = Rᵀ[-[p] I]` and `RRᵀ = I`, each term is a point mass of weight
/// `β` at `p_i`, so the frame never enters.
pub fn effective_body_matrix(body: &SpatialInertia, contacts: &[(Matrix3<f64>, Vector3<f64>)], beta: f64) -> EffectiveBodyMatrix {
    let mut h = *body;
    for (_, p) in contacts {
        h.add(&SpatialInertia::point(beta, p));
    }
    h
}

/// `J_Bᵀ diag(H_b) J_B` by the composite-rigid-body recursion.
pub fn composite_assemble(kin: &TreeKinematics, body_h: &[Matrix6<f64>]) -> DMatrix<f64> {
    let n = kin.ndof;
    let nb = kin.body_count();
    let mut composite: Vec<Matrix6<f64>> = body_h.to_vec();
    for b in (0..nb).rev() {
        if let Some(p) = kin.parent[b] {
            let c = composite[b];
            composite[p] += c;
        }
    }
    let mut m = DMatrix::zeros(n, n);
    for b in 0..nb {
        let s = &kin.motion[b];
        if s.ncols() == 0 {
            continue;
        }
        let f = composite[b] * s;
        let ob = kin.dof_offset[b];
        let diag = s.transpose() * &f;
        m.view_mut((ob, ob), (s.ncols(), s.ncols())).copy_from(&diag);
        let mut a = kin.parent[b];
        while let Some(anc) = a {
            let sa = &kin.motion[anc];
            if sa.ncols() > 0 {
                let oa = kin.dof_offset[anc];
                let block = sa.transpose() * &f;
                m.view_mut((oa, ob), (sa.ncols(), s.ncols())).copy_from(&block);
                m.view_mut((ob, oa), (s.ncols(), sa.ncols())).copy_from(&block.transpose());
            }
            a = kin.parent[anc];
        }
    }
    m
}

/// `true` where the tree structure allows a nonzero entry.
pub fn tree_pattern(dof_parent: &[Option<usize>]) -> DMatrix<bool> {
    let n = dof_parent.len();
    let mut p = DMatrix::from_element(n, n, false);
    for k in 0..n {
        let mut i = Some(k);
        while let Some(a) = i {
            p[(k, a)] = true;
            p[(a, k)] = true;
            i = dof_parent[a];
        }
    }
    p
}

/// `LᵀL` factor of a tree-structured SPD matrix. `L` is lower triangular and
/// only populated on the tree pattern.
#[derive(Clone, Debug)]
pub struct TreeFactor {
    l: DMatrix<f64>,
    dof_parent: Vec<Option<usize>>,
}

impl TreeFactor {
    /// Factors `m` in place over the dof parent array (parents must precede
    /// children). Entries of `m` outside the tree pattern are ignored.
    pub fn new(mut m: DMatrix<f64>, dof_parent: &[Option<usize>]) -> Result<Self> {
        let n = m.nrows();
        for k in (0..n).rev() {
            let pivot = m[(k, k)];
            if !(pivot > 0.0) {
                return Err(Error::NotPositiveDefinite { index: k, pivot });
            }
            let d = pivot.sqrt();
            m[(k, k)] = d;
            let mut i = dof_parent[k];
            while let Some(a) = i {
                m[(k, a)] /= d;
                i = dof_parent[a];
            }
            let mut i = dof_parent[k];
            while let Some(a) = i {
                let lka = m[(k, a)];
                let mut j = Some(a);
                while let Some(b) = j {
                    m[(a, b)] -= lka * m[(k, b)];
                    j = dof_parent[b];
                }
                i = dof_parent[a];
            }
        }
        // Keep only the lower-triangular factor.
        let mut l = DMatrix::zeros(n, n);
        for k in 0..n {
            l[(k, k)] = m[(k, k)];
            let mut i = dof_parent[k];
            while let Some(a) = i {
                l[(k, a)] = m[(k, a)];
                i = dof_parent[a];
            }
        }
        Ok(Self { l, dof_parent: dof_parent.to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    pub fn factor(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Solves `LᵀL x = rhs`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = rhs.clone();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut DVector<f64>) {
        let n = self.dim();
        let l = &self.l;
        // Lᵀ y = b, descendants first.
        for k in (0..n).rev() {
            x[k] /= l[(k, k)];
            let yk = x[k];
            let mut i = self.dof_parent[k];
            while let Some(a) = i {
                x[a] -= l[(k, a)] * yk;
                i = self.dof_parent[a];
            }
        }
        // L x = y, ancestors first.
        for k in 0..n {
            let mut acc = x[k];
            let mut i = self.dof_parent[k];
            while let Some(a) = i {
                acc -= l[(k, a)] * x[a];
                i = self.dof_parent[a];
            }
            x[k] = acc / l[(k, k)];
        }
    }
}

/// Per-subsystem factorization of `A_j + Σ β J_ijᵀ J_ij` built from
/// per-body effective matrices and joint-space diagonal additions.
#[derive(Clone, Debug)]
pub struct SubsystemFactor {
    pub tree: TreeFactor,
    pub beta: f64,
}

/// Assembles the subsystem matrix through the composite recursion over
/// `body_h` (plus `joint_diag` on the diagonal) and factors it.
pub fn factor_subsystem_matrix(
    kin: &TreeKinematics,
    body_h: &[Matrix6<f64>],
    joint_diag: Option<&DVector<f64>>,
    beta: f64,
) -> Result<SubsystemFactor> {
    let mut m = composite_assemble(kin, body_h);
    if let Some(d) = joint_diag {
        for i in 0..m.nrows() {
            m[(i, i)] += d[i];
        }
    }
    Ok(SubsystemFactor { tree: TreeFactor::new(m, &kin.dof_parent)?, beta })
}
