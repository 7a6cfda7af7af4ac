//! Manufactured solution for linear mixed elasticity with an intact
//! phase field.

use std::f64::consts::PI;
use std::sync::Arc;

use pfmix::amg::{AmgSettings, NearNullspace};
use pfmix::assembly::{BodyForce, Discretization, FieldConstraints, P, PHI, U};
use pfmix::fem::ConstraintSet;
use pfmix::linsolve::{fgmres, BlockPreconditioner, InnerPolicy, InnerSolver, KrylovSettings};
use pfmix::mesh::Mesh;
use pfmix::model::{Material, ModelParams};
use pfmix::sparse::CsrMatrix;

// u = (sin(pi x) sin(pi y), x^2 y), p = lambda div u
fn exact_u(p: [f64; 2]) -> [f64; 2] {
    [(PI * p[0]).sin() * (PI * p[1]).sin(), p[0] * p[0] * p[1]]
}

fn exact_p(lambda: f64, p: [f64; 2]) -> f64 {
    lambda * (PI * (PI * p[0]).cos() * (PI * p[1]).sin() + p[0] * p[0])
}

/// `f = -div(2 mu E(u) + lambda div(u) I) = -(mu lap u + (mu + lambda) grad div u)`.
fn force(mu: f64, lambda: f64, p: [f64; 2]) -> [f64; 2] {
    let (sx, cx) = ((PI * p[0]).sin(), (PI * p[0]).cos());
    let (sy, cy) = ((PI * p[1]).sin(), (PI * p[1]).cos());
    let lap = [-2.0 * PI * PI * sx * sy, 2.0 * p[1]];
    let grad_div = [-PI * PI * sx * sy + 2.0 * p[0], PI * PI * cx * cy];
    [-(mu * lap[0] + (mu + lambda) * grad_div[0]), -(mu * lap[1] + (mu + lambda) * grad_div[1])]
}

pub fn errors(n: usize, nu: f64) -> (f64, f64) {
    let mu = 1.0;
    let mat = Material::from_nu(mu, nu).unwrap();
    let lambda = mat.lambda().unwrap();
    let mesh = Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (n, n)).unwrap();
    let params = ModelParams { kappa: 1e-8, gc: 1.0, eps: 0.1, rho: 0.0 };
    let d = Discretization::new(
        mesh,
        vec![mat; n * n],
        params,
        BodyForce::Field(Arc::new(move |p| force(mu, lambda, p))),
        |u, s| {
            let mut cu = ConstraintSet::new(u.n_dofs());
            for (k, p) in u.node_coords().iter().enumerate() {
                if p[0] < 1e-12 || p[1] < 1e-12 || p[0] > 1.0 - 1e-12 || p[1] > 1.0 - 1e-12 {
                    let v = exact_u(*p);
                    cu.set_dirichlet(2 * k, v[0]);
                    cu.set_dirichlet(2 * k + 1, v[1]);
                }
            }
            FieldConstraints { u: cu, p: ConstraintSet::new(s.n_dofs()), phi: ConstraintSet::new(s.n_dofs()) }
        },
        4,
    )
    .unwrap();
    let l = d.layout();
    let mut x = vec![0.0; d.n_dofs()];
    x[l.range(PHI)].iter_mut().for_each(|v| *v = 1.0);
    d.distribute(&mut x);
    let ones = vec![1.0; l.n[PHI]];

    // phi frozen at 1: its rows become identity rows with zero right-hand side
    let (mut jac, r) = d.jacobian(&x, &ones);
    jac.blocks[PHI][U] = CsrMatrix::zeros(l.n[PHI], l.n[U]);
    jac.blocks[PHI][P] = CsrMatrix::zeros(l.n[PHI], l.n[P]);
    jac.blocks[PHI][PHI] = CsrMatrix::identity(l.n[PHI]);
    let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    rhs[l.range(PHI)].iter_mut().for_each(|v| *v = 0.0);

    let cg = InnerPolicy::Cg(KrylovSettings { tol: 1e-10, max_iter: 500, restart: None });
    let a_u = InnerSolver::amg(
        jac.block(U, U).clone(),
        &NearNullspace::elasticity(d.u_dofs().node_coords()),
        &AmgSettings::default(),
    )
    .unwrap();
    let schur = InnerSolver::amg(d.schur_mass(&ones), &NearNullspace::scalar(l.n[P]), &AmgSettings::mass()).unwrap();
    let id = InnerSolver::amg(CsrMatrix::identity(l.n[PHI]), &NearNullspace::scalar(l.n[PHI]), &AmgSettings::mass())
        .unwrap();
    let mut prec = BlockPreconditioner {
        layout: l,
        up: jac.block(U, P),
        a_u: &a_u,
        a_u_policy: cg,
        schur: &schur,
        schur_policy: cg,
        l: &id,
        l_policy: InnerPolicy::VCycle,
        stats: Default::default(),
    };
    let sol = fgmres(&jac, &mut prec, &rhs, &KrylovSettings { tol: 1e-12, max_iter: 500, restart: None }).unwrap();
    x.iter_mut().zip(&sol.x).for_each(|(a, b)| *a += b);
    d.distribute(&mut x);

    let (mut eu, mut ep) = (0.0, 0.0);
    for c in 0..d.mesh().n_cells() {
        for (xi, w) in d.quadrature(c) {
            let v = d.point_values(c, xi, &x, &ones);
            let ue = exact_u(v.x);
            eu += w * ((v.u[0] - ue[0]).powi(2) + (v.u[1] - ue[1]).powi(2));
            ep += w * (v.p - exact_p(lambda, v.x)).powi(2);
        }
    }
    (eu.sqrt(), ep.sqrt() / lambda.max(1.0))
}

/// Observed L2 orders of u and p over n = 4, 8, 16, 32.
pub fn rates(nu: f64) -> (Vec<f64>, Vec<f64>) {
    let e: Vec<(f64, f64)> = [4, 8, 16, 32].iter().map(|&n| errors(n, nu)).collect();
    let ru = e.windows(2).map(|w| (w[0].0 / w[1].0).log2()).collect();
    let rp = e.windows(2).map(|w| (w[0].1 / w[1].1).log2()).collect();
    (ru, rp)
}

