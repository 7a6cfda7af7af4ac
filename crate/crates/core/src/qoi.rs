//! Quantities of interest and analytic Sneddon references.

use crate::assembly::{Discretization, PHI};
use crate::error::{Error, Result};
use crate::fem::quadrature::Gauss1D;
use crate::mesh::Point;
use crate::model;

/// Plane-strain modulus `E / (1 - nu^2)`.
pub fn plane_strain_modulus(e: f64, nu: f64) -> f64 {
    e / (1.0 - nu * nu)
}

/// Analytic crack opening `2 rho l0 / E' sqrt(1 - x^2 / l0^2)`, zero outside the crack.
pub fn cod_ref(x: f64, rho: f64, l0: f64, e: f64, nu: f64) -> f64 {
    if x.abs() >= l0 {
        return 0.0;
    }
    2.0 * rho * l0 / plane_strain_modulus(e, nu) * (1.0 - x * x / (l0 * l0)).sqrt()
}

/// Analytic total crack volume `2 pi rho l0^2 / E'`.
pub fn tcv_ref(rho: f64, l0: f64, e: f64, nu: f64) -> f64 {
    2.0 * std::f64::consts::PI * rho * l0 * l0 / plane_strain_modulus(e, nu)
}

/// Crack-face opening at `x0`: half of `int u . grad(phi) dy` along the
/// vertical line `x = x0`. Across a smeared crack the full integral gives
/// the jump `u+ - u-`; halving it matches the one-face convention of
/// [`cod_ref`]. `points` Gauss points per cell segment (1 is the midpoint
/// rule). On a mesh line the cells on both sides contribute half each.
pub fn cod(disc: &Discretization, x: &[f64], x0: f64, points: usize) -> Result<f64> {
    let mesh = disc.mesh();
    let (lo, hi) = (mesh.lower(), mesh.upper());
    if x0 < lo[0] || x0 > hi[0] {
        return Err(Error::Parameter(format!("x0 = {x0} lies outside the domain")));
    }
    let g = Gauss1D::new(points)?;
    let phit = vec![0.0; disc.layout().n[PHI]];
    let tol = 1e-10 * mesh.min_edge();
    let mut total = 0.0;
    for c in 0..mesh.n_cells() {
        let (a, b) = mesh.cell_bounds(c);
        let weight = if x0 > a[0] + tol && x0 < b[0] - tol {
            1.0
        } else if (x0 - a[0]).abs() <= tol || (x0 - b[0]).abs() <= tol {
            let on_boundary = (x0 - lo[0]).abs() <= tol || (x0 - hi[0]).abs() <= tol;
            if on_boundary {
                1.0
            } else {
                0.5
            }
        } else {
            continue;
        };
        let xi = ((x0 - a[0]) / (b[0] - a[0])).clamp(0.0, 1.0);
        let hy = b[1] - a[1];
        for (&t, &w) in g.points.iter().zip(&g.weights) {
            let v = disc.point_values(c, [xi, t], x, &phit);
            total += weight * w * hy * (v.u[0] * v.grad_phi[0] + v.u[1] * v.grad_phi[1]);
        }
    }
    Ok(0.5 * total)
}

/// Sample points spaced `spacing` apart across `[-l0, l0]`, always including both ends.
pub fn sample_points(l0: f64, spacing: f64) -> Vec<f64> {
    let n = (2.0 * l0 / spacing).round().max(1.0) as usize;
    (0..=n).map(|i| -l0 + 2.0 * l0 * i as f64 / n as f64).collect()
}

/// `(x, COD(x))` on the sample grid.
pub fn cod_profile(disc: &Discretization, x: &[f64], samples: &[f64], points: usize) -> Result<Vec<(f64, f64)>> {
    samples.iter().map(|&s| cod(disc, x, s, points).map(|v| (s, v))).collect()
}

/// Total crack volume `int u . grad(phi)`.
pub fn tcv(disc: &Discretization, x: &[f64]) -> f64 {
    let phit = vec![0.0; disc.layout().n[PHI]];
    let mut total = 0.0;
    for c in 0..disc.mesh().n_cells() {
        for (p, w) in disc.quadrature(c) {
            let v = disc.point_values(c, p, x, &phit);
            total += w * (v.u[0] * v.grad_phi[0] + v.u[1] * v.grad_phi[1]);
        }
    }
    total
}

/// Degraded bulk energy `int g(phi_tilde) (mu tr(E^2) + lambda/2 (tr E)^2)`.
pub fn bulk_energy(disc: &Discretization, x: &[f64], phi_tilde: &[f64]) -> Result<f64> {
    let kappa = disc.params().kappa;
    let mut total = 0.0;
    for c in 0..disc.mesh().n_cells() {
        let m = disc.materials()[c];
        let lambda = m
            .lambda()
            .ok_or_else(|| Error::Parameter("bulk energy needs a finite lambda".into()))?;
        for (p, w) in disc.quadrature(c) {
            let v = disc.point_values(c, p, x, phi_tilde);
            let e = model::strain(&v.grad_u);
            total += w * model::degradation(kappa, v.phi_tilde) * model::bulk_energy_density(m.mu, lambda, &e);
        }
    }
    Ok(total)
}

/// Crack energy `gc/2 int ((phi - 1)^2 / eps + eps |grad phi|^2)`.
pub fn crack_energy(disc: &Discretization, x: &[f64]) -> f64 {
    let params = disc.params();
    let phit = vec![0.0; disc.layout().n[PHI]];
    let mut total = 0.0;
    for c in 0..disc.mesh().n_cells() {
        for (p, w) in disc.quadrature(c) {
            let v = disc.point_values(c, p, x, &phit);
            let g2 = v.grad_phi[0] * v.grad_phi[0] + v.grad_phi[1] * v.grad_phi[1];
            total += w * ((v.phi - 1.0).powi(2) / params.eps + params.eps * g2);
        }
    }
    0.5 * params.gc * total
}

/// Displacement at point `p`.
pub fn displacement_at(disc: &Discretization, x: &[f64], p: Point) -> Result<[f64; 2]> {
    let (c, xi) = disc
        .mesh()
        .locate(p)
        .ok_or_else(|| Error::Parameter(format!("point {p:?} lies outside the mesh")))?;
    let phit = vec![0.0; disc.layout().n[PHI]];
    Ok(disc.point_values(c, xi, x, &phit).u)
}
