mod common;

use common::{default_params, free_disc, state_from};
use pfmix::assembly::PHI;
use pfmix::mesh::Mesh;
use pfmix::model::Material;
use pfmix::qoi;
use pfmix::scenario::{run_scenario, ScenarioConfig, ScenarioId, SNEDDON_L0};

fn unit(n: usize) -> Mesh {
    Mesh::rectangle([0.0, 0.0], [1.0, 1.0], (n, n)).unwrap()
}

#[test]
fn tcv_of_translation_against_linear_phi_is_one() {
    let d = free_disc(unit(3), 0.3, default_params());
    let x = state_from(&d, |_| [1.0, 0.0], |_| 0.0, |p| p[0]);
    assert!((qoi::tcv(&d, &x) - 1.0).abs() < 1e-13);
}

#[test]
fn zero_displacement_gives_zero_qois() {
    let d = free_disc(unit(3), 0.3, default_params());
    let x = state_from(&d, |_| [0.0, 0.0], |_| 0.0, |p| p[0] * p[1]);
    assert_eq!(qoi::tcv(&d, &x), 0.0);
    assert_eq!(qoi::cod(&d, &x, 0.3, 1).unwrap(), 0.0);
    let phit = vec![1.0; d.layout().n[PHI]];
    assert_eq!(qoi::bulk_energy(&d, &x, &phit).unwrap(), 0.0);
}

/// phi = 0 on a band two cells thick, 1 from one cell further out; u_y is
/// `+-delta/2` wherever phi varies. The full line integral is the jump
/// `delta`, the reported face opening is `delta / 2`.
#[test]
fn cod_of_synthetic_step_profile() {
    let delta = 0.3;
    let mesh = Mesh::rectangle([-1.0, -1.0], [1.0, 1.0], (8, 8)).unwrap();
    let h = 0.25;
    let d = free_disc(mesh, 0.3, default_params());
    let phi = |p: [f64; 2]| ((p[1].abs() - h) / h).clamp(0.0, 1.0);
    let uy = |p: [f64; 2]| 0.5 * delta * (p[1] / h).clamp(-1.0, 1.0);
    let x = state_from(&d, |p| [0.0, uy(p)], |_| 0.0, phi);
    for (x0, pts) in [(0.1, 1), (0.0, 1), (-0.6, 3), (1.0, 2)] {
        let c = qoi::cod(&d, &x, x0, pts).unwrap();
        assert!((c - 0.5 * delta).abs() < 1e-13, "x0 = {x0}: {c}");
    }
    assert!(qoi::cod(&d, &x, 1.5, 1).is_err());
}

#[test]
fn uniform_strain_energy() {
    let a = 0.01;
    let d = free_disc(unit(2), 0.3, default_params());
    let x = state_from(&d, |p| [a * p[0], a * p[1]], |_| 0.0, |_| 1.0);
    let m = Material::from_nu(0.42, 0.3).unwrap();
    let expected = 2.0 * m.mu * a * a + 2.0 * m.lambda().unwrap() * a * a;
    let phit = vec![1.0; d.layout().n[PHI]];
    let e = qoi::bulk_energy(&d, &x, &phit).unwrap();
    assert!((e - expected).abs() < 1e-14, "{e} vs {expected}");
}

#[test]
fn bulk_energy_rejects_incompressible_material() {
    let d = free_disc(unit(2), 0.5, default_params());
    let x = vec![0.0; d.n_dofs()];
    let phit = vec![1.0; d.layout().n[PHI]];
    assert!(qoi::bulk_energy(&d, &x, &phit).is_err());
}

#[test]
fn crack_energy_limits() {
    let p = default_params();
    let d = free_disc(Mesh::rectangle([0.0, 0.0], [2.0, 1.0], (2, 1)).unwrap(), 0.3, p);
    let intact = state_from(&d, |_| [0.0, 0.0], |_| 0.0, |_| 1.0);
    assert_eq!(qoi::crack_energy(&d, &intact), 0.0);
    let broken = state_from(&d, |_| [0.0, 0.0], |_| 0.0, |_| 0.0);
    let expected = 0.5 * p.gc * 2.0 / p.eps;
    assert!((qoi::crack_energy(&d, &broken) - expected).abs() < 1e-13);
}

#[test]
fn qois_are_deterministic() {
    let d = free_disc(unit(3), 0.3, default_params());
    let x = state_from(&d, |p| [p[1].sin(), p[0] * p[1]], |p| p[0], |p| 1.0 - p[0] * p[1]);
    assert_eq!(qoi::tcv(&d, &x).to_bits(), qoi::tcv(&d, &x).to_bits());
    assert_eq!(qoi::cod(&d, &x, 0.4, 2).unwrap().to_bits(), qoi::cod(&d, &x, 0.4, 2).unwrap().to_bits());
}

#[test]
fn sneddon_without_pressure_has_zero_opening() {
    let mut cfg = ScenarioConfig::new(ScenarioId::Sneddon);
    cfg.rho = 0.0;
    cfg.steps = 2;
    let run = run_scenario(&cfg).unwrap();
    for r in &run.rows {
        assert_eq!(r.cod_max, Some(0.0));
        assert_eq!(r.tcv, Some(0.0));
        assert_eq!(r.e_bulk, Some(0.0));
    }
}

/// Integrating the full line integral over every abscissa recovers the
/// area integral, so `2 int COD dx` over a window that covers the smeared
/// zone must reproduce TCV.
#[test]
fn tcv_equals_integrated_opening_on_refined_sneddon() {
    let mut cfg = ScenarioConfig::new(ScenarioId::Sneddon);
    cfg.refines = 4;
    let run = run_scenario(&cfg).unwrap();
    let tcv = run.last_converged().unwrap().tcv.unwrap();
    let side = run.disc.mesh().min_edge();
    let samples = qoi::sample_points(10.0, side / 2.0);
    let prof = qoi::cod_profile(&run.disc, &run.x, &samples, cfg.cod_points).unwrap();
    let trap: f64 = prof.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
    assert!((2.0 * trap - tcv).abs() < 0.1 * tcv, "2 int COD = {}, TCV = {tcv}", 2.0 * trap);

    // restricted to the crack the smeared tails are missing
    let inner: Vec<_> = prof.iter().filter(|p| p.0.abs() <= SNEDDON_L0 + 1e-12).cloned().collect();
    let part: f64 = inner.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum();
    assert!(2.0 * part < tcv);
}
