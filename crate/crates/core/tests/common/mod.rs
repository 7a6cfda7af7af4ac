#![allow(dead_code)]

pub mod exact;
pub mod mms;

use pfmix::assembly::{BodyForce, Discretization, FieldConstraints, PHI};
use pfmix::fem::ConstraintSet;
use pfmix::mesh::{BoxRegion, Mesh, Slit};
use pfmix::model::{Material, ModelParams};
use pfmix::amg::{q1_laplacian, AmgHierarchy, AmgSettings, NearNullspace};
use pfmix::sparse::{dot, norm2, CsrMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub enum Shape {
    Uniform(usize),
    Hanging,
    Slit,
}

pub fn mesh(shape: Shape) -> Mesh {
    match shape {
        Shape::Uniform(n) => Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (n, n)).unwrap(),
        Shape::Hanging => Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (2, 2))
            .unwrap()
            .refine_uniform()
            .refine_region(&BoxRegion::new([0.0, 0.0], [0.4, 0.4]), 1),
        Shape::Slit => Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (2, 2))
            .unwrap()
            .with_slit(Slit { y: 0.5, x_start: 0.0, x_end: 0.5 })
            .unwrap()
            .refine_uniform(),
    }
}

/// Bottom edge clamped, everything else free.
pub fn disc(mesh: Mesh, nu: f64, params: ModelParams, body: [f64; 2]) -> Discretization {
    let mats = vec![Material::from_nu(0.42, nu).unwrap(); mesh.n_cells()];
    Discretization::new(
        mesh,
        mats,
        params,
        BodyForce::Constant(body),
        |u, s| {
            let mut cu = ConstraintSet::new(u.n_dofs());
            for (n, p) in u.node_coords().iter().enumerate() {
                if p[1].abs() < 1e-12 {
                    cu.set_dirichlet(2 * n, 0.0);
                    cu.set_dirichlet(2 * n + 1, 0.0);
                }
            }
            FieldConstraints { u: cu, p: ConstraintSet::new(s.n_dofs()), phi: ConstraintSet::new(s.n_dofs()) }
        },
        3,
    )
    .unwrap()
}

pub fn default_params() -> ModelParams {
    ModelParams { kappa: 1e-2, gc: 1.0, eps: 0.5, rho: 1e-3 }
}

/// Random state with `phi` in `[0.2, 1]`, constraints applied, and a random `phi_tilde`.
pub fn random_state(d: &Discretization, r: &mut ChaCha8Rng, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let l = d.layout();
    let mut x: Vec<f64> = (0..d.n_dofs()).map(|_| r.gen_range(-scale..scale)).collect();
    for v in &mut x[l.range(PHI)] {
        *v = r.gen_range(0.2..1.0);
    }
    d.distribute(&mut x);
    let phit = (0..l.n[PHI]).map(|_| r.gen_range(0.2..1.0)).collect();
    (x, phit)
}

pub fn random_direction(d: &Discretization, r: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d.n_dofs()).map(|_| r.gen_range(-1.0..1.0)).collect();
    d.distribute_homogeneous(&mut v);
    v
}

/// No boundary conditions at all.
pub fn free_disc(mesh: Mesh, nu: f64, params: ModelParams) -> Discretization {
    let mats = vec![Material::from_nu(0.42, nu).unwrap(); mesh.n_cells()];
    Discretization::new(
        mesh,
        mats,
        params,
        BodyForce::Constant([0.0, 0.0]),
        |u, s| FieldConstraints {
            u: ConstraintSet::new(u.n_dofs()),
            p: ConstraintSet::new(s.n_dofs()),
            phi: ConstraintSet::new(s.n_dofs()),
        },
        3,
    )
    .unwrap()
}

/// State with nodal interpolants of `u`, `p` and `phi`.
pub fn state_from(
    d: &Discretization,
    u: impl Fn([f64; 2]) -> [f64; 2],
    p: impl Fn([f64; 2]) -> f64,
    phi: impl Fn([f64; 2]) -> f64,
) -> Vec<f64> {
    use pfmix::assembly::{P, U};
    let l = d.layout();
    let mut x = vec![0.0; d.n_dofs()];
    x[l.range(U)].copy_from_slice(&d.u_dofs().interpolate(u));
    x[l.range(P)].copy_from_slice(&d.scalar_dofs().interpolate(|q| [p(q), 0.0]));
    x[l.range(PHI)].copy_from_slice(&d.scalar_dofs().interpolate(|q| [phi(q), 0.0]));
    x
}

/// Relative mismatch between `J v` and the central difference of the residual
/// over free rows. Constrained rows carry a unit diagonal in `J` while the
/// residual is identically zero there.
pub fn fd_mismatch(d: &Discretization, seed: u64) -> f64 {
    let mut r = rng(seed);
    let (x, phit) = random_state(d, &mut r, 0.05);
    let v = random_direction(d, &mut r);
    let (jac, _) = d.jacobian(&x, &phit);
    let mut jv = vec![0.0; d.n_dofs()];
    jac.apply(&v, &mut jv);
    let h = 1e-6;
    let shifted = |s: f64| {
        let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + s * h * b).collect();
        d.residual(&y, &phit)
    };
    let (rp, rm) = (shifted(1.0), shifted(-1.0));
    let free: Vec<usize> = (0..d.n_dofs()).filter(|&i| !d.is_constrained(i)).collect();
    let diff: Vec<f64> = free.iter().map(|&i| (rp[i] - rm[i]) / (2.0 * h) - jv[i]).collect();
    let reference: Vec<f64> = free.iter().map(|&i| jv[i]).collect();
    norm2(&diff) / norm2(&reference)
}


pub fn energy(a: &CsrMatrix, e: &[f64]) -> f64 {
    dot(e, &a.mul_vec(e)).sqrt()
}

/// Geometric-mean error reduction per cycle for `A x = 0` from a random start.
pub fn contraction(n: usize, cycles: usize) -> f64 {
    let a = q1_laplacian(n);
    let h = AmgHierarchy::new(&a, &NearNullspace::scalar(a.nrows()), &AmgSettings::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let boundary: Vec<bool> = a.decoupled_rows();
    let mut x: Vec<f64> = (0..a.nrows()).map(|i| if boundary[i] { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
    let zero = vec![0.0; a.nrows()];
    let e0 = energy(&a, &x);
    for _ in 0..cycles {
        h.vcycle(&zero, &mut x);
    }
    (energy(&a, &x) / e0).powf(1.0 / cycles as f64)
}

