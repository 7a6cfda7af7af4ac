//! Block-triangular preconditioner for the `(u, p, phi)` Jacobian.
//!
//! For `x = (x_u, x_p, x_phi)` the application computes
//!
//! ```text
//! q = -S^{-1} x_p            S: weighted pressure mass
//! s = A_u^{-1} (x_u - B q)   B: stored up-block (already scaled by g)
//! t = L^{-1} x_phi           L: phase-field block
//! ```
//!
//! and returns `(s, q, t)`. Each inverse is approximated by its own inner
//! solver.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::krylov::{cg, KrylovSettings, Preconditioner};
use crate::amg::{AmgHierarchy, AmgSettings, NearNullspace};
use crate::assembly::{Layout, P, PHI, U};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// How an inner block inverse is approximated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InnerPolicy {
    /// One AMG V-cycle.
    VCycle,
    /// CG preconditioned by one V-cycle.
    Cg(KrylovSettings),
    /// Dense LU, for small verification problems.
    Exact,
}

/// Pressure Schur-complement policy selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SchurPolicy {
    Amg,
    Cg,
}

impl SchurPolicy {
    pub fn inner(self) -> InnerPolicy {
        match self {
            SchurPolicy::Amg => InnerPolicy::VCycle,
            SchurPolicy::Cg => InnerPolicy::Cg(KrylovSettings::cg()),
        }
    }
}

enum Kind {
    Amg(AmgHierarchy),
    Dense(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// A block matrix together with the data needed to approximate its inverse.
pub struct InnerSolver {
    matrix: CsrMatrix,
    kind: Kind,
}

impl InnerSolver {
    pub fn amg(matrix: CsrMatrix, ns: &NearNullspace, settings: &AmgSettings) -> Result<Self> {
        let h = AmgHierarchy::new(&matrix, ns, settings)?;
        Ok(Self { matrix, kind: Kind::Amg(h) })
    }

    pub fn dense(matrix: CsrMatrix) -> Result<Self> {
        let lu = matrix.to_dense().lu();
        if !lu.is_invertible() {
            return Err(Error::Singular);
        }
        Ok(Self { matrix, kind: Kind::Dense(lu) })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn hierarchy(&self) -> Option<&AmgHierarchy> {
        match &self.kind {
            Kind::Amg(h) => Some(h),
            Kind::Dense(_) => None,
        }
    }

    fn exact(&self, b: &[f64]) -> Result<Vec<f64>> {
        let lu = match &self.kind {
            Kind::Dense(lu) => lu,
            Kind::Amg(_) => return Err(Error::Parameter("exact inner solve requested on an AMG block".into())),
        };
        lu.solve(&DVector::from_column_slice(b)).map(|v| v.as_slice().to_vec()).ok_or(Error::Singular)
    }

    /// Approximate `A^{-1} b` and the inner iteration count.
    pub fn solve(&self, policy: InnerPolicy, b: &[f64]) -> Result<(Vec<f64>, usize)> {
        match (policy, &self.kind) {
            (InnerPolicy::Exact, _) | (_, Kind::Dense(_)) => Ok((self.exact(b)?, 0)),
            (InnerPolicy::VCycle, Kind::Amg(h)) => Ok((h.apply(b), 1)),
            (InnerPolicy::Cg(s), Kind::Amg(h)) => {
                let mut m = h;
                let info = cg(&self.matrix, &mut m, b, &s)?;
                Ok((info.x, info.iterations))
            }
        }
    }
}

/// Counters accumulated over preconditioner applications.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PrecondStats {
    pub applications: usize,
    pub cg_u: usize,
    pub cg_schur: usize,
}

pub struct BlockPreconditioner<'a> {
    pub layout: Layout,
    pub up: &'a CsrMatrix,
    pub a_u: &'a InnerSolver,
    pub a_u_policy: InnerPolicy,
    pub schur: &'a InnerSolver,
    pub schur_policy: InnerPolicy,
    pub l: &'a InnerSolver,
    pub l_policy: InnerPolicy,
    pub stats: PrecondStats,
}

impl BlockPreconditioner<'_> {
    /// `q = -S^{-1} x_p`.
    pub fn schur_apply(&mut self, xp: &[f64]) -> Result<Vec<f64>> {
        let (mut q, it) = self
            .schur
            .solve(self.schur_policy, xp)
            .map_err(|e| Error::InnerSolve { block: "schur", source: Box::new(e) })?;
        self.stats.cg_schur += it;
        q.iter_mut().for_each(|v| *v = -*v);
        Ok(q)
    }
}

impl Preconditioner for BlockPreconditioner<'_> {
    fn apply(&mut self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let l = self.layout;
        let q = self.schur_apply(&x[l.range(P)])?;
        let mut r = x[l.range(U)].to_vec();
        self.up.spmv_add(-1.0, &q, &mut r);
        let (s, it) = self
            .a_u
            .solve(self.a_u_policy, &r)
            .map_err(|e| Error::InnerSolve { block: "displacement", source: Box::new(e) })?;
        self.stats.cg_u += it;
        let (t, _) = self
            .l
            .solve(self.l_policy, &x[l.range(PHI)])
            .map_err(|e| Error::InnerSolve { block: "phase-field", source: Box::new(e) })?;
        y[l.range(U)].copy_from_slice(&s);
        y[l.range(P)].copy_from_slice(&q);
        y[l.range(PHI)].copy_from_slice(&t);
        self.stats.applications += 1;
        Ok(())
    }
}

/// Dense `P^{-1} x` for the upper block-triangular `P = [[A, B, 0], [0, -S, 0], [0, 0, L]]`,
/// used as an independent check of [`BlockPreconditioner`].
pub fn dense_block_triangular_solve(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    s: &DMatrix<f64>,
    l: &DMatrix<f64>,
    x: &[f64],
) -> Vec<f64> {
    let (nu, np, nf) = (a.nrows(), s.nrows(), l.nrows());
    let n = nu + np + nf;
    let mut p = DMatrix::zeros(n, n);
    p.view_mut((0, 0), (nu, nu)).copy_from(a);
    p.view_mut((0, nu), (nu, np)).copy_from(b);
    p.view_mut((nu, nu), (np, np)).copy_from(&(-s));
    p.view_mut((nu + np, nu + np), (nf, nf)).copy_from(l);
    p.lu().solve(&DVector::from_column_slice(x)).expect("singular preconditioner").as_slice().to_vec()
}
