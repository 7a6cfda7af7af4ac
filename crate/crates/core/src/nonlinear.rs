//! Newton iteration with a primal-dual active set for the irreversibility
//! constraint `phi <= phi_prev`.

use serde::{Deserialize, Serialize};

use crate::amg::{AmgSettings, NearNullspace};
use crate::assembly::{Discretization, P, PHI, U};
use crate::error::{Error, Result};
use crate::linsolve::krylov::{fgmres, KrylovSettings};
use crate::linsolve::precond::{BlockPreconditioner, InnerPolicy, InnerSolver, PrecondStats};
use crate::sparse::norm2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonSettings {
    /// Absolute tolerance on the residual of free, inactive dofs.
    pub tol: f64,
    pub max_iter: usize,
    /// Complementarity constant is `c_factor * gc / eps`.
    pub c_factor: f64,
    /// Allowed `|phi - phi_prev|` on active dofs at convergence.
    pub active_tol: f64,
    pub line_search_beta: f64,
    pub line_search_trials: usize,
    pub gmres: KrylovSettings,
    pub a_u_policy: InnerPolicy,
    pub schur_policy: InnerPolicy,
    pub l_policy: InnerPolicy,
    pub amg: AmgSettings,
    pub amg_mass: AmgSettings,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 50,
            c_factor: 100.0,
            active_tol: 1e-12,
            line_search_beta: 0.5,
            line_search_trials: 10,
            gmres: KrylovSettings::gmres(),
            a_u_policy: InnerPolicy::Cg(KrylovSettings::cg()),
            schur_policy: InnerPolicy::VCycle,
            l_policy: InnerPolicy::VCycle,
            amg: AmgSettings::default(),
            amg_mass: AmgSettings::mass(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepStats {
    pub newton_iterations: usize,
    /// GMRES iterations of each Newton iteration.
    pub linear_iterations: Vec<usize>,
    pub precond: PrecondStats,
    pub residuals: Vec<f64>,
    pub active_counts: Vec<usize>,
    pub line_search_fallbacks: usize,
    /// Largest change made by the final projection onto `[0, phi_prev]`.
    pub max_clamp_correction: f64,
}

impl StepStats {
    pub fn avg_linear(&self) -> f64 {
        if self.linear_iterations.is_empty() {
            0.0
        } else {
            self.linear_iterations.iter().sum::<usize>() as f64 / self.linear_iterations.len() as f64
        }
    }

    /// Displacement CG iterations per preconditioner application.
    pub fn avg_cg(&self) -> f64 {
        if self.precond.applications == 0 {
            0.0
        } else {
            self.precond.cg_u as f64 / self.precond.applications as f64
        }
    }

    pub fn avg_schur_cg(&self) -> f64 {
        if self.precond.applications == 0 {
            0.0
        } else {
            self.precond.cg_schur as f64 / self.precond.applications as f64
        }
    }
}

/// Inner solver for a block according to `policy`.
fn inner(
    matrix: crate::sparse::CsrMatrix,
    policy: InnerPolicy,
    ns: impl FnOnce() -> NearNullspace,
    amg: &AmgSettings,
) -> Result<InnerSolver> {
    match policy {
        InnerPolicy::Exact => InnerSolver::dense(matrix),
        _ => InnerSolver::amg(matrix, &ns(), amg),
    }
}

struct Merit<'a> {
    disc: &'a Discretization,
    free: Vec<bool>,
}

impl Merit<'_> {
    fn new(disc: &Discretization) -> Merit<'_> {
        let free = (0..disc.n_dofs()).map(|i| !disc.is_constrained(i)).collect();
        Merit { disc, free }
    }

    fn norm(&self, r: &[f64], active: &[bool]) -> f64 {
        let off = self.disc.layout().offset(PHI);
        r.iter()
            .enumerate()
            .filter(|&(i, _)| self.free[i] && !(i >= off && active[i - off]))
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Solves one load step. `x` holds the initial guess with constraints
/// distributed and receives the solution.
pub fn solve_step(
    disc: &Discretization,
    x: &mut [f64],
    phi_prev: &[f64],
    phi_tilde: &[f64],
    settings: &NewtonSettings,
) -> Result<StepStats> {
    let layout = disc.layout();
    let nphi = layout.n[PHI];
    let off = layout.offset(PHI);
    let params = disc.params();
    let c = settings.c_factor * params.gc / params.eps;
    let mass = disc.lumped_mass();
    let phi_cons = disc.constraints(PHI);
    let merit = Merit::new(disc);
    let mut stats = StepStats::default();

    let (j0, _) = disc.jacobian(x, phi_tilde);
    let a_u = inner(
        j0.block(U, U).clone(),
        settings.a_u_policy,
        || NearNullspace::elasticity(disc.u_dofs().node_coords()),
        &settings.amg,
    )?;
    let schur = inner(
        disc.schur_mass(phi_tilde),
        settings.schur_policy,
        || NearNullspace::scalar(layout.n[P]),
        &settings.amg_mass,
    )?;
    drop(j0);

    let mut prev_active: Option<Vec<bool>> = None;
    let mut trace = Vec::new();
    for k in 0..=settings.max_iter {
        let (mut jac, r) = disc.jacobian(x, phi_tilde);
        let active: Vec<bool> = (0..nphi)
            .map(|i| {
                !phi_cons.is_constrained(i) && -r[off + i] / mass[i] + c * (x[off + i] - phi_prev[i]) > 0.0
            })
            .collect();
        let res = merit.norm(&r, &active);
        let feas = (0..nphi).filter(|&i| active[i]).map(|i| (x[off + i] - phi_prev[i]).abs()).fold(0.0, f64::max);
        let same = prev_active.as_ref().is_none_or(|p| *p == active);
        stats.residuals.push(res);
        stats.active_counts.push(active.iter().filter(|&&a| a).count());
        trace.push(res);
        if res < settings.tol && feas <= settings.active_tol && same {
            stats.newton_iterations = k;
            let mut worst: f64 = 0.0;
            for i in 0..nphi {
                let v = x[off + i].clamp(0.0, phi_prev[i].max(0.0));
                worst = worst.max((v - x[off + i]).abs());
                x[off + i] = v;
            }
            stats.max_clamp_correction = worst;
            return Ok(stats);
        }
        if k == settings.max_iter {
            break;
        }
        if !res.is_finite() {
            return Err(Error::NewtonNotConverged { iterations: k, residual: res, trace });
        }

        let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let d: Vec<f64> = (0..nphi).map(|i| phi_prev[i] - x[off + i]).collect();
        jac.eliminate_active(&mut rhs, &active, &d);
        let l = inner(jac.block(PHI, PHI).clone(), settings.l_policy, || NearNullspace::scalar(nphi), &settings.amg)?;
        let mut prec = BlockPreconditioner {
            layout,
            up: jac.block(U, P),
            a_u: &a_u,
            a_u_policy: settings.a_u_policy,
            schur: &schur,
            schur_policy: settings.schur_policy,
            l: &l,
            l_policy: settings.l_policy,
            stats: PrecondStats::default(),
        };
        let sol = fgmres(&jac, &mut prec, &rhs, &settings.gmres)?;
        stats.linear_iterations.push(sol.iterations);
        stats.precond.applications += prec.stats.applications;
        stats.precond.cg_u += prec.stats.cg_u;
        stats.precond.cg_schur += prec.stats.cg_schur;
        let mut dx = sol.x;
        disc.distribute_homogeneous(&mut dx);

        let mut alpha = 1.0;
        let mut accepted = false;
        let mut trial = x.to_vec();
        for _ in 0..settings.line_search_trials.max(1) {
            trial.iter_mut().zip(x.iter().zip(&dx)).for_each(|(t, (xi, di))| *t = xi + alpha * di);
            let tr = merit.norm(&disc.residual(&trial, phi_tilde), &active);
            if tr.is_finite() && tr < res {
                accepted = true;
                break;
            }
            alpha *= settings.line_search_beta;
        }
        if !accepted {
            stats.line_search_fallbacks += 1;
            alpha /= settings.line_search_beta;
            trial.iter_mut().zip(x.iter().zip(&dx)).for_each(|(t, (xi, di))| *t = xi + alpha * di);
        }
        x.copy_from_slice(&trial);
        prev_active = Some(active);
    }
    let last = *trace.last().unwrap_or(&f64::NAN);
    Err(Error::NewtonNotConverged { iterations: settings.max_iter, residual: last, trace })
}

/// Euclidean norm of the residual at `x` over free dofs.
pub fn free_residual_norm(disc: &Discretization, x: &[f64], phi_tilde: &[f64]) -> f64 {
    let r = disc.residual(x, phi_tilde);
    let v: Vec<f64> = r.iter().enumerate().filter(|&(i, _)| !disc.is_constrained(i)).map(|(_, v)| *v).collect();
    norm2(&v)
}
