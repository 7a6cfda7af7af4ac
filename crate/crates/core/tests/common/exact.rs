//! Block preconditioner with exact dense inner inverses.

use super::{default_params, disc, mesh, random_state, rng, Shape};
use pfmix::assembly::{BlockMatrix, Discretization, P, PHI, U};
use pfmix::linsolve::{BlockPreconditioner, InnerPolicy, InnerSolver};
use pfmix::sparse::CsrMatrix;
use rand::Rng;

pub struct Exact {
    pub a: InnerSolver,
    pub s: InnerSolver,
    pub l: InnerSolver,
}

/// Exact inner solvers; `s` is the exact Schur complement `B^T A^-1 B - C`
/// (the preconditioner applies `-S^-1`).
pub fn exact_blocks(jac: &BlockMatrix) -> Exact {
    let a = jac.block(U, U).to_dense();
    let b = jac.block(U, P).to_dense();
    let bt = jac.block(P, U).to_dense();
    let c = jac.block(P, P).to_dense();
    let s = &bt * a.clone().lu().solve(&b).unwrap() - c;
    Exact {
        a: InnerSolver::dense(jac.block(U, U).clone()).unwrap(),
        s: InnerSolver::dense(CsrMatrix::from_dense(&s)).unwrap(),
        l: InnerSolver::dense(jac.block(PHI, PHI).clone()).unwrap(),
    }
}

pub fn prec<'a>(jac: &'a BlockMatrix, e: &'a Exact) -> BlockPreconditioner<'a> {
    BlockPreconditioner {
        layout: jac.layout,
        up: jac.block(U, P),
        a_u: &e.a,
        a_u_policy: InnerPolicy::Exact,
        schur: &e.s,
        schur_policy: InnerPolicy::Exact,
        l: &e.l,
        l_policy: InnerPolicy::Exact,
        stats: Default::default(),
    }
}

/// Random admissible state on `shape`, its Jacobian and a random right-hand side.
pub fn state(shape: Shape, nu: f64, seed: u64) -> (Discretization, BlockMatrix, Vec<f64>) {
    let d = disc(mesh(shape), nu, default_params(), [0.0, -1e-3]);
    let mut r = rng(seed);
    let (x, phit) = random_state(&d, &mut r, 0.05);
    let (jac, _) = d.jacobian(&x, &phit);
    let b: Vec<f64> = (0..d.n_dofs()).map(|_| r.gen_range(-1.0..1.0)).collect();
    (d, jac, b)
}

