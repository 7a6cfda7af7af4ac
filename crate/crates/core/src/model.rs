//! Constitutive relations of the mixed phase-field fracture model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Isotropic material in mixed form. `inv_lambda` is `1 / lambda`, which is
/// zero in the incompressible limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub mu: f64,
    pub inv_lambda: f64,
}

impl Material {
    /// Lamé parameters from `mu` and Poisson ratio `nu`, with
    /// `lambda = 2 mu nu / (1 - 2 nu)`.
    pub fn from_nu(mu: f64, nu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Parameter(format!("shear modulus must be positive, got {mu}")));
        }
        if !(0.0..=0.5).contains(&nu) || nu.is_nan() {
            return Err(Error::Parameter(format!("Poisson ratio must lie in [0, 0.5], got {nu}")));
        }
        let inv_lambda = if nu == 0.5 {
            0.0
        } else if nu == 0.0 {
            return Err(Error::Parameter("nu = 0 gives lambda = 0, which the mixed form cannot represent".into()));
        } else {
            (1.0 - 2.0 * nu) / (2.0 * mu * nu)
        };
        Ok(Self { mu, inv_lambda })
    }

    pub fn from_lame(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu > 0.0 && lambda > 0.0) {
            return Err(Error::Parameter(format!("Lamé parameters must be positive, got mu={mu}, lambda={lambda}")));
        }
        Ok(Self { mu, inv_lambda: 1.0 / lambda })
    }

    pub fn lambda(&self) -> Option<f64> {
        (self.inv_lambda > 0.0).then(|| 1.0 / self.inv_lambda)
    }

    pub fn nu(&self) -> f64 {
        match self.lambda() {
            Some(l) => l / (2.0 * (l + self.mu)),
            None => 0.5,
        }
    }

    /// Young's modulus `mu (3 lambda + 2 mu) / (lambda + mu)`.
    pub fn youngs_modulus(&self) -> f64 {
        match self.lambda() {
            Some(l) => self.mu * (3.0 * l + 2.0 * self.mu) / (l + self.mu),
            None => 3.0 * self.mu,
        }
    }

    pub fn is_incompressible(&self) -> bool {
        self.inv_lambda == 0.0
    }
}

/// Parameters shared by all cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Residual stiffness in the degradation function.
    pub kappa: f64,
    /// Critical energy release rate.
    pub gc: f64,
    /// Regularization length.
    pub eps: f64,
    /// Pressure applied inside the crack.
    pub rho: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return Err(Error::Parameter(format!("kappa must lie in (0, 1), got {}", self.kappa)));
        }
        if !(self.gc > 0.0 && self.eps > 0.0) || !self.gc.is_finite() || !self.eps.is_finite() {
            return Err(Error::Parameter(format!("gc and eps must be positive, got {} and {}", self.gc, self.eps)));
        }
        if !self.rho.is_finite() {
            return Err(Error::Parameter("rho must be finite".into()));
        }
        Ok(())
    }

    pub fn degradation(&self, phi: f64) -> f64 {
        degradation(self.kappa, phi)
    }
}

pub fn degradation(kappa: f64, phi: f64) -> f64 {
    (1.0 - kappa) * phi * phi + kappa
}

/// Linear extrapolation of the phase field to time `t[0]` from the two
/// previous steps `phi1` (at `t[1]`) and `phi2` (at `t[2]`), clamped to
/// `[0, 1]`.
pub fn extrapolate(phi1: &[f64], phi2: &[f64], t: [f64; 3]) -> Vec<f64> {
    let s = (t[0] - t[2]) / (t[1] - t[2]);
    phi1.iter().zip(phi2).map(|(a, b)| (b + s * (a - b)).clamp(0.0, 1.0)).collect()
}

/// Same as [`extrapolate`] without the clamp.
pub fn extrapolate_unclamped(phi1: &[f64], phi2: &[f64], t: [f64; 3]) -> Vec<f64> {
    let s = (t[0] - t[2]) / (t[1] - t[2]);
    phi1.iter().zip(phi2).map(|(a, b)| b + s * (a - b)).collect()
}

pub type Tensor2 = [[f64; 2]; 2];

pub fn strain(grad_u: &Tensor2) -> Tensor2 {
    let off = 0.5 * (grad_u[0][1] + grad_u[1][0]);
    [[grad_u[0][0], off], [off, grad_u[1][1]]]
}

/// `2 mu E + p I`.
pub fn mixed_stress(mu: f64, e: &Tensor2, p: f64) -> Tensor2 {
    [[2.0 * mu * e[0][0] + p, 2.0 * mu * e[0][1]], [2.0 * mu * e[1][0], 2.0 * mu * e[1][1] + p]]
}

pub fn contract(a: &Tensor2, b: &Tensor2) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

pub fn trace(a: &Tensor2) -> f64 {
    a[0][0] + a[1][1]
}

/// Undegraded bulk energy density `mu tr(E^2) + lambda/2 (tr E)^2`.
pub fn bulk_energy_density(mu: f64, lambda: f64, e: &Tensor2) -> f64 {
    let tr = trace(e);
    mu * contract(e, e) + 0.5 * lambda * tr * tr
}
