//! Ideal-gas closure and the entropy quadratic forms.

use serde::{Deserialize, Serialize};

use crate::error::{MhdError, Result};
use crate::scalar::Scalar;

/// Ideal gas `p = (γ-1) ρ e` with specific entropy `s = ln(e)/(γ-1) - ln ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EosModel {
    gamma: f64,
}

/// Entropy partials at a state `(ρ, e)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermoDerivatives {
    pub s: f64,
    pub s_e: f64,
    pub s_rho: f64,
    pub s_ee: f64,
    pub s_rhorho: f64,
    pub s_rhoe: f64,
}

pub type Mat2 = [[f64; 2]; 2];

fn check_state(rho: f64, e: f64) -> Result<()> {
    if !(rho > 0.0) {
        return Err(MhdError::Domain(format!("density must be positive, got {rho}")));
    }
    if !(e > 0.0) {
        return Err(MhdError::Domain(format!("internal energy must be positive, got {e}")));
    }
    Ok(())
}

impl EosModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(MhdError::Domain(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pressure(&self, rho: f64, e: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(MhdError::Domain(format!("density must be positive, got {rho}")));
        }
        Ok(self.pressure_of(rho, e))
    }

    /// Unchecked pressure for kernel use.
    pub fn pressure_of<S: Scalar>(&self, rho: S, e: S) -> S {
        (rho * e).scale(self.gamma - 1.0)
    }

    pub fn temperature(&self, rho: f64, e: f64) -> Result<f64> {
        check_state(rho, e)?;
        Ok((self.gamma - 1.0) * e)
    }

    pub fn specific_entropy(&self, rho: f64, e: f64) -> Result<f64> {
        check_state(rho, e)?;
        Ok(self.entropy_of(rho, e))
    }

    pub fn entropy_of<S: Scalar>(&self, rho: S, e: S) -> S {
        e.ln().scale(1.0 / (self.gamma - 1.0)) - rho.ln()
    }

    pub fn derivative_bundle(&self, rho: f64, e: f64) -> Result<ThermoDerivatives> {
        check_state(rho, e)?;
        let gm1 = self.gamma - 1.0;
        Ok(ThermoDerivatives {
            s: self.entropy_of(rho, e),
            s_e: 1.0 / (gm1 * e),
            s_rho: -1.0 / rho,
            s_ee: -1.0 / (gm1 * e * e),
            s_rhorho: 1.0 / (rho * rho),
            s_rhoe: 0.0,
        })
    }

    pub fn cp(&self) -> f64 {
        self.gamma / (self.gamma - 1.0)
    }

    /// Quadratic form of the entropy-production kernel in `(∇ρ, ∇e)` with unit coefficient.
    pub fn dissipation_matrix(&self, rho: f64, e: f64) -> Result<Mat2> {
        let d = self.derivative_bundle(rho, e)?;
        let a = (2.0 * rho * d.s_rho + rho * rho * d.s_rhorho) / rho;
        let b = rho * d.s_rhoe;
        Ok([[a, b], [b, rho * d.s_ee]])
    }

    pub fn j3_matrix(&self, rho: f64, e: f64) -> Result<Mat2> {
        let d = self.derivative_bundle(rho, e)?;
        let l = self.dissipation_matrix(rho, e)?;
        let c = rho / self.cp();
        let off = c * d.s_rho * d.s_e + l[0][1];
        Ok([[c * d.s_rho * d.s_rho + l[0][0], off], [off, c * d.s_e * d.s_e + l[1][1]]])
    }
}

pub fn cp(gamma: f64) -> Result<f64> {
    Ok(EosModel::new(gamma)?.cp())
}

/// `φ'(s) > 0` and `φ'(s)/c_p - φ''(s) > 0`.
pub fn generalized_entropy_admissible(phi1: f64, phi2: f64, gamma: f64) -> bool {
    match cp(gamma) {
        Ok(c) => phi1 > 0.0 && phi1 / c - phi2 > 0.0,
        Err(_) => false,
    }
}

/// Production `-κρφ''(s)|∇s|² - φ'(s) J₁` of the generalized entropy `ρφ(s)`, with
/// `J₁` the dissipation form in `(∇ρ, ∇e)`.
#[allow(clippy::too_many_arguments)]
pub fn generalized_entropy_production(
    eos: &EosModel,
    rho: f64,
    e: f64,
    grad_rho: [f64; 3],
    grad_e: [f64; 3],
    kappa: f64,
    phi1: f64,
    phi2: f64,
) -> Result<f64> {
    let d = eos.derivative_bundle(rho, e)?;
    let l = eos.dissipation_matrix(rho, e)?;
    let mut grad_s2 = 0.0;
    let mut j1 = 0.0;
    for k in 0..3 {
        let gs = d.s_rho * grad_rho[k] + d.s_e * grad_e[k];
        grad_s2 += gs * gs;
        j1 += kappa * quadratic_form(&l, [grad_rho[k], grad_e[k]]);
    }
    Ok(-kappa * rho * phi2 * grad_s2 - phi1 * j1)
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym_eigenvalues(m: &Mat2) -> [f64; 2] {
    let tr = m[0][0] + m[1][1];
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let r = half_diff.hypot(m[0][1]);
    [0.5 * tr - r, 0.5 * tr + r]
}

pub fn quadratic_form(m: &Mat2, x: [f64; 2]) -> f64 {
    m[0][0] * x[0] * x[0] + 2.0 * m[0][1] * x[0] * x[1] + m[1][1] * x[1] * x[1]
}
