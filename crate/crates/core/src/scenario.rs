//! Benchmark configurations and the load-stepping driver.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assembly::{BodyForce, Discretization, FieldConstraints, PHI, U};
use crate::error::{Error, Result};
use crate::fem::ConstraintSet;
use crate::linsolve::precond::SchurPolicy;
use crate::mesh::{Mesh, Point, Slit};
use crate::model::{self, Material, ModelParams};
use crate::nonlinear::{solve_step, NewtonSettings, StepStats};
use crate::qoi;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ScenarioId {
    HangingBlock,
    Sneddon,
    SneddonLayered,
    Sent,
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioId::HangingBlock => "hanging_block",
            ScenarioId::Sneddon => "sneddon",
            ScenarioId::SneddonLayered => "sneddon_layered",
            ScenarioId::Sent => "sent",
        })
    }
}

/// Regularization length, either absolute or a multiple of the cell diameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsRule {
    Fixed(f64),
    TimesH(f64),
}

impl EpsRule {
    pub fn resolve(&self, h: f64) -> f64 {
        match *self {
            EpsRule::Fixed(v) => v,
            EpsRule::TimesH(k) => k * h,
        }
    }
}

impl FromStr for EpsRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("eps rule '{s}' must look like fixed:<x> or xh:<k>")))?;
        let v: f64 = value.trim().parse().map_err(|_| Error::Config(format!("bad number in eps rule '{s}'")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config(format!("eps rule '{s}' needs a positive value")));
        }
        match kind.trim() {
            "fixed" => Ok(EpsRule::Fixed(v)),
            "xh" => Ok(EpsRule::TimesH(v)),
            other => Err(Error::Config(format!("unknown eps rule '{other}'"))),
        }
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::Fixed(v) => write!(f, "fixed:{v}"),
            EpsRule::TimesH(k) => write!(f, "xh:{k}"),
        }
    }
}

impl Serialize for EpsRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EpsRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Time increments: `dt` for the first `steps_before_reduction` steps, then `dt_reduced`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoadSchedule {
    pub dt: f64,
    pub steps_before_reduction: usize,
    pub dt_reduced: f64,
}

impl LoadSchedule {
    pub fn uniform(dt: f64) -> Self {
        Self { dt, steps_before_reduction: usize::MAX, dt_reduced: dt }
    }

    pub fn dt(&self, step: usize) -> f64 {
        if step <= self.steps_before_reduction {
            self.dt
        } else {
            self.dt_reduced
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub refines: usize,
    #[serde(default)]
    pub region_refines: usize,
    pub nu: f64,
    pub kappa: f64,
    pub eps: EpsRule,
    pub rho: f64,
    pub gc: f64,
    pub mu: f64,
    /// Young's modulus used only by the analytic Sneddon references.
    pub reference_e: f64,
    pub steps: usize,
    pub schedule: LoadSchedule,
    pub schur: SchurPolicy,
    #[serde(default)]
    pub newton: NewtonSettings,
    pub quad_order: usize,
    /// Gauss points per cell segment of the COD line integral.
    pub cod_points: usize,
    pub clamp_extrapolation: bool,
    /// Stop early once a step needs no Newton update (static loading only).
    pub stop_when_stationary: bool,
}

impl ScenarioConfig {
    /// Defaults of each benchmark.
    pub fn new(scenario: ScenarioId) -> Self {
        let base = Self {
            scenario,
            refines: 3,
            region_refines: 0,
            nu: 0.2,
            kappa: 1e-2,
            eps: EpsRule::Fixed(1.414),
            rho: 1e-3,
            gc: 1.0,
            mu: 0.42,
            reference_e: 1.0,
            steps: 1,
            schedule: LoadSchedule::uniform(1.0),
            schur: SchurPolicy::Amg,
            newton: NewtonSettings::default(),
            quad_order: 3,
            cod_points: 1,
            clamp_extrapolation: true,
            stop_when_stationary: true,
        };
        match scenario {
            ScenarioId::Sneddon => Self { steps: 10, ..base },
            ScenarioId::SneddonLayered => {
                Self { refines: 5, kappa: 1e-8, eps: EpsRule::TimesH(1.0), steps: 10, ..base }
            }
            ScenarioId::HangingBlock => Self { eps: EpsRule::Fixed(0.707), rho: 0.0, steps: 10, ..base },
            ScenarioId::Sent => Self {
                refines: 4,
                nu: 0.3,
                kappa: 1e-8,
                eps: EpsRule::TimesH(4.0),
                rho: 0.0,
                gc: 2.7,
                mu: 80.77e3,
                steps: 100,
                schedule: LoadSchedule { dt: 1e-4, steps_before_reduction: 58, dt_reduced: 1e-5 },
                stop_when_stationary: false,
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if !(0.0..=0.5).contains(&self.nu) {
            return Err(Error::Config(format!("nu = {} outside [0, 0.5]", self.nu)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa = {} must be finite and nonnegative", self.kappa)));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("rho = {} must be finite and nonnegative", self.rho)));
        }
        if !(self.gc > 0.0 && self.mu > 0.0) {
            return Err(Error::Config("gc and mu must be positive".into()));
        }
        if !(self.eps.resolve(1.0) > 0.0) {
            return Err(Error::Config(format!("eps rule {} must be positive", self.eps)));
        }
        if self.cod_points == 0 || self.cod_points > 5 {
            return Err(Error::Config("cod_points must be between 1 and 5".into()));
        }
        if !(self.schedule.dt > 0.0 && self.schedule.dt_reduced > 0.0) {
            return Err(Error::Config("time increments must be positive".into()));
        }
        Ok(())
    }
}

/// Sneddon crack half-length.
pub const SNEDDON_L0: f64 = 1.0;
/// Evaluation point of the hanging-block displacement.
pub const HANGING_POINT: Point = [0.0, 1.99];

/// One row of the per-step report. `None` marks a value that was not
/// computed (failed step or quantity not defined for the scenario).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub step: usize,
    pub dofs: usize,
    pub avg_lin: Option<f64>,
    pub avg_cg: Option<f64>,
    pub n_as: Option<usize>,
    pub cod_max: Option<f64>,
    pub tcv: Option<f64>,
    pub e_bulk: Option<f64>,
    pub e_crack: Option<f64>,
    pub u_y_point: Option<f64>,
}

pub struct RunOutput {
    pub config: ScenarioConfig,
    pub disc: Discretization,
    pub rows: Vec<StatsRow>,
    pub step_stats: Vec<StepStats>,
    pub x: Vec<f64>,
    pub phi_tilde: Vec<f64>,
    /// `(x, COD(x), COD_ref(x))` of the last converged step.
    pub cod_profile: Vec<(f64, f64, f64)>,
    /// `max(phi^n - phi^{n-1})` per accepted step.
    pub irreversibility: Vec<f64>,
    pub times: Vec<f64>,
    /// Error that stopped the run early, if any.
    pub failure: Option<String>,
    pub h: f64,
    pub eps: f64,
}

impl RunOutput {
    pub fn last_converged(&self) -> Option<&StatsRow> {
        self.rows.iter().rev().find(|r| r.n_as.is_some())
    }
}

struct Setup {
    disc: Discretization,
    phi0: Vec<f64>,
    top_uy: Vec<usize>,
    h: f64,
    eps: f64,
    side: f64,
}

fn uniform_mesh(lower: Point, upper: Point, base: (usize, usize), slit: Option<Slit>, refines: usize) -> Result<Mesh> {
    let mut m = Mesh::rectangle(lower, upper, base)?;
    if let Some(s) = slit {
        m = m.with_slit(s)?;
    }
    for _ in 0..refines {
        m = m.refine_uniform();
    }
    Ok(m)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn build(cfg: &ScenarioConfig) -> Result<Setup> {
    cfg.validate()?;
    let (mut mesh, body) = match cfg.scenario {
        ScenarioId::Sneddon => (uniform_mesh([-10.0, -10.0], [10.0, 10.0], (5, 5), None, cfg.refines)?, [0.0, 0.0]),
        ScenarioId::SneddonLayered => {
            (uniform_mesh([-20.0, -20.0], [20.0, 20.0], (5, 5), None, cfg.refines)?, [0.0, 0.0])
        }
        ScenarioId::HangingBlock => (
            uniform_mesh([0.0, 0.0], [4.0, 4.0], (2, 2), Some(Slit { y: 2.0, x_start: 0.0, x_end: 2.0 }), cfg.refines)?,
            [0.0, -8e-7],
        ),
        ScenarioId::Sent => (
            uniform_mesh([0.0, 0.0], [1.0, 1.0], (2, 2), Some(Slit { y: 0.5, x_start: 0.0, x_end: 0.5 }), cfg.refines)?,
            [0.0, 0.0],
        ),
    };
    if cfg.region_refines > 0 {
        let h0 = mesh.h_max();
        let region = match cfg.scenario {
            ScenarioId::Sneddon | ScenarioId::SneddonLayered => {
                crate::mesh::BoxRegion::new([-SNEDDON_L0 - h0, -h0], [SNEDDON_L0 + h0, h0])
            }
            ScenarioId::HangingBlock => crate::mesh::BoxRegion::new([0.0, 2.0 - h0], [2.0 + h0, 2.0 + h0]),
            ScenarioId::Sent => crate::mesh::BoxRegion::new([0.0, 0.5 - h0], [1.0, 0.5 + h0]),
        };
        mesh = mesh.refine_region(&region, cfg.region_refines);
    }
    let h = mesh.h_min();
    let side = mesh.min_edge();
    let eps = cfg.eps.resolve(h);
    let in_band = |p: Point| p[0].abs() <= SNEDDON_L0 + 1e-12 && p[1].abs() < h - 1e-12;

    let materials: Vec<Material> = match cfg.scenario {
        ScenarioId::SneddonLayered => {
            let inner = Material::from_nu(cfg.mu, cfg.nu)?;
            let outer = Material::from_nu(cfg.mu, 0.2)?;
            (0..mesh.n_cells())
                .map(|c| {
                    let p = mesh.cell_center(c);
                    if in_band(p) || p[0].abs() > 10.0 || p[1].abs() > 10.0 {
                        outer
                    } else {
                        inner
                    }
                })
                .collect()
        }
        _ => vec![Material::from_nu(cfg.mu, cfg.nu)?; mesh.n_cells()],
    };
    let params = ModelParams { kappa: cfg.kappa, gc: cfg.gc, eps, rho: cfg.rho };
    let (lo, hi) = (mesh.lower(), mesh.upper());
    let scenario = cfg.scenario;
    let mut top_uy = Vec::new();
    let disc = Discretization::new(
        mesh,
        materials,
        params,
        BodyForce::Constant(body),
        |u, s| {
            let mut cu = ConstraintSet::new(u.n_dofs());
            for (n, p) in u.node_coords().iter().enumerate() {
                let on = |axis: usize, v: f64| near(p[axis], v);
                match scenario {
                    ScenarioId::Sneddon | ScenarioId::SneddonLayered => {
                        if on(0, lo[0]) || on(0, hi[0]) || on(1, lo[1]) || on(1, hi[1]) {
                            cu.set_dirichlet(2 * n, 0.0);
                            cu.set_dirichlet(2 * n + 1, 0.0);
                        }
                    }
                    ScenarioId::HangingBlock => {
                        if on(1, hi[1]) {
                            cu.set_dirichlet(2 * n, 0.0);
                            cu.set_dirichlet(2 * n + 1, 0.0);
                        }
                    }
                    ScenarioId::Sent => {
                        if on(1, lo[1]) {
                            cu.set_dirichlet(2 * n, 0.0);
                            cu.set_dirichlet(2 * n + 1, 0.0);
                        } else if on(1, hi[1]) {
                            cu.set_dirichlet(2 * n, 0.0);
                            cu.set_dirichlet(2 * n + 1, 0.0);
                            top_uy.push(2 * n + 1);
                        }
                    }
                }
            }
            FieldConstraints { u: cu, p: ConstraintSet::new(s.n_dofs()), phi: ConstraintSet::new(s.n_dofs()) }
        },
        cfg.quad_order,
    )?;
    let sd = disc.scalar_dofs();
    let phi0: Vec<f64> = (0..sd.n_nodes())
        .map(|n| {
            let p = sd.node_coords()[n];
            let cracked = match scenario {
                ScenarioId::Sneddon | ScenarioId::SneddonLayered => in_band(p),
                ScenarioId::HangingBlock => near(p[1], 2.0) && p[0] < 2.0 - 1e-9,
                ScenarioId::Sent => near(p[1], 0.5) && p[0] < 0.5 - 1e-9,
            };
            if cracked {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    Ok(Setup { disc, phi0, top_uy, h, eps, side })
}

/// Runs all load steps of a scenario. Step failures end the run and are
/// reported as a row without values; the error text is kept in `failure`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput> {
    run_scenario_with(cfg, |_, _, _| Ok(()))
}

/// As [`run_scenario`], calling `observer(step, disc, x)` after every accepted step.
pub fn run_scenario_with<F>(cfg: &ScenarioConfig, mut observer: F) -> Result<RunOutput>
where
    F: FnMut(usize, &Discretization, &[f64]) -> Result<()>,
{
    let Setup { mut disc, phi0, top_uy, h, eps, side } = build(cfg)?;
    let layout = disc.layout();
    let nphi = layout.n[PHI];
    let mut newton = cfg.newton;
    newton.schur_policy = cfg.schur.inner();
    let sneddon = matches!(cfg.scenario, ScenarioId::Sneddon | ScenarioId::SneddonLayered);
    let samples = qoi::sample_points(SNEDDON_L0, side / 2.0);

    let mut x = vec![0.0; disc.n_dofs()];
    x[layout.range(PHI)].copy_from_slice(&phi0);
    let mut history: Vec<Vec<f64>> = vec![phi0.clone()];
    let mut times = vec![0.0];
    let mut rows = Vec::new();
    let mut step_stats = Vec::new();
    let mut irreversibility = Vec::new();
    let mut cod_profile = Vec::new();
    let mut phi_tilde = phi0.clone();
    let mut failure = None;

    for n in 1..=cfg.steps {
        let t = times[n - 1] + cfg.schedule.dt(n);
        if !top_uy.is_empty() {
            let vals: Vec<(usize, f64)> = top_uy.iter().map(|&d| (d, t)).collect();
            disc.set_dirichlet_values(U, &vals)?;
        }
        phi_tilde = if n == 1 {
            history[0].clone()
        } else {
            let tt = [t, times[n - 1], times[n - 2]];
            if cfg.clamp_extrapolation {
                model::extrapolate(&history[n - 1], &history[n - 2], tt)
            } else {
                model::extrapolate_unclamped(&history[n - 1], &history[n - 2], tt)
            }
        };
        let phi_prev = history[n - 1].clone();
        let mut trial = x.clone();
        disc.distribute(&mut trial);
        match solve_step(&disc, &mut trial, &phi_prev, &phi_tilde, &newton) {
            Ok(stats) => {
                let stationary = stats.newton_iterations == 0;
                x = trial;
                let phi = x[layout.range(PHI)].to_vec();
                irreversibility.push((0..nphi).map(|i| phi[i] - phi_prev[i]).fold(f64::NEG_INFINITY, f64::max));
                let (cod_max, profile) = if sneddon {
                    let prof = qoi::cod_profile(&disc, &x, &samples, cfg.cod_points)?;
                    let nu_ref = cfg.nu;
                    // tips excluded: the opening vanishes there and the line
                    // integral only picks up the u_x d_x(phi) tip layer
                    let m = prof
                        .iter()
                        .filter(|&&(s, _)| s.abs() < SNEDDON_L0 - 1e-12)
                        .map(|&(_, v)| v)
                        .fold(f64::NEG_INFINITY, f64::max);
                    let full = prof
                        .iter()
                        .map(|&(s, v)| (s, v, qoi::cod_ref(s, cfg.rho, SNEDDON_L0, cfg.reference_e, nu_ref)))
                        .collect();
                    (Some(m), full)
                } else {
                    (None, Vec::new())
                };
                cod_profile = profile;
                let e_bulk = qoi::bulk_energy(&disc, &x, &phi_tilde).ok();
                let u_y_point = match cfg.scenario {
                    ScenarioId::HangingBlock => Some(qoi::displacement_at(&disc, &x, HANGING_POINT)?[1]),
                    _ => None,
                };
                rows.push(StatsRow {
                    step: n,
                    dofs: disc.n_dofs(),
                    avg_lin: Some(stats.avg_linear()),
                    avg_cg: Some(stats.avg_cg()),
                    n_as: Some(stats.newton_iterations),
                    cod_max,
                    tcv: Some(qoi::tcv(&disc, &x)),
                    e_bulk,
                    e_crack: Some(qoi::crack_energy(&disc, &x)),
                    u_y_point,
                });
                step_stats.push(stats);
                observer(n, &disc, &x)?;
                history.push(phi);
                times.push(t);
                if stationary && cfg.stop_when_stationary {
                    break;
                }
            }
            Err(e) => {
                rows.push(StatsRow {
                    step: n,
                    dofs: disc.n_dofs(),
                    avg_lin: None,
                    avg_cg: None,
                    n_as: None,
                    cod_max: None,
                    tcv: None,
                    e_bulk: None,
                    e_crack: None,
                    u_y_point: None,
                });
                failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(RunOutput {
        config: cfg.clone(),
        disc,
        rows,
        step_stats,
        x,
        phi_tilde,
        cod_profile,
        irreversibility,
        times,
        failure,
        h,
        eps,
    })
}
