//! Conserved variables, primitive variables and gradients.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{MhdError, Result};
use crate::scalar::Scalar;

pub type Vec3<S> = [S; 3];
pub type Mat3<S> = [[S; 3]; 3];

/// Number of scalar equations carried per node.
pub const NCOMP: usize = 9;

pub const COMPONENT_NAMES: [&str; NCOMP] =
    ["rho", "m_x", "m_y", "m_z", "E", "B_x", "B_y", "B_z", "phi"];

/// Which total energy the energy slot carries.
///
/// `Total` stores `E`; `TotalWithPhi` stores `E* = E + Φ²/2`, used by the
/// cleaning variants that conserve the augmented energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyForm {
    Total,
    TotalWithPhi,
}

/// Conserved state `(ρ, m, E, B, Φ)`. Also used for residuals and sources.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConservedState<S> {
    pub rho: S,
    pub m: Vec3<S>,
    pub energy: S,
    pub b: Vec3<S>,
    pub phi: S,
}

/// `du[i]` holds `∂_{x_i} U`.
pub type ConservedGradient<S> = [ConservedState<S>; 3];

impl<S: Scalar> ConservedState<S> {
    pub fn zero() -> Self {
        Self {
            rho: S::zero(),
            m: [S::zero(); 3],
            energy: S::zero(),
            b: [S::zero(); 3],
            phi: S::zero(),
        }
    }

    pub fn to_array(&self) -> [S; NCOMP] {
        [
            self.rho, self.m[0], self.m[1], self.m[2], self.energy, self.b[0], self.b[1],
            self.b[2], self.phi,
        ]
    }

    pub fn from_array(a: [S; NCOMP]) -> Self {
        Self {
            rho: a[0],
            m: [a[1], a[2], a[3]],
            energy: a[4],
            b: [a[5], a[6], a[7]],
            phi: a[8],
        }
    }

    pub fn get(&self, c: usize) -> S {
        self.to_array()[c]
    }

    pub fn set(&mut self, c: usize, v: S) {
        match c {
            0 => self.rho = v,
            1..=3 => self.m[c - 1] = v,
            4 => self.energy = v,
            5..=7 => self.b[c - 5] = v,
            8 => self.phi = v,
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        let a = self.to_array();
        Self::from_array(a.map(f))
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| v.scale(a))
    }

    pub fn velocity(&self) -> Vec3<S> {
        let inv = S::one() / self.rho;
        [self.m[0] * inv, self.m[1] * inv, self.m[2] * inv]
    }

    /// Physical total energy `E`, whichever form is stored.
    pub fn physical_energy(&self, form: EnergyForm) -> S {
        match form {
            EnergyForm::Total => self.energy,
            EnergyForm::TotalWithPhi => self.energy - self.phi * self.phi * S::from_f64(0.5),
        }
    }

    /// Internal energy per unit volume `ρe = E - |m|²/2ρ - |B|²/2`.
    pub fn rho_e(&self, form: EnergyForm) -> S {
        let half = S::from_f64(0.5);
        self.physical_energy(form) - half * dot(&self.m, &self.m) / self.rho
            - half * dot(&self.b, &self.b)
    }

    pub fn specific_internal_energy(&self, form: EnergyForm) -> S {
        self.rho_e(form) / self.rho
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0, |a, v| a.max(v.value().abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.value().is_finite())
    }
}

impl ConservedState<f64> {
    pub fn axpy(&mut self, a: f64, x: &Self) {
        self.rho += a * x.rho;
        self.energy += a * x.energy;
        self.phi += a * x.phi;
        for k in 0..3 {
            self.m[k] += a * x.m[k];
            self.b[k] += a * x.b[k];
        }
    }
}

impl<S: Scalar> Add for ConservedState<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|k| a[k] + b[k]))
    }
}

impl<S: Scalar> Sub for ConservedState<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let (a, b) = (self.to_array(), o.to_array());
        Self::from_array(std::array::from_fn(|k| a[k] - b[k]))
    }
}

impl<S: Scalar> Neg for ConservedState<S> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

impl<S: Scalar> Mul<S> for ConservedState<S> {
    type Output = Self;
    fn mul(self, a: S) -> Self {
        self.map(|v| v * a)
    }
}

impl<S: Scalar> AddAssign for ConservedState<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Scalar> SubAssign for ConservedState<S> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

/// Primitive description used by problem setups and output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: Vec3<f64>,
    pub p: f64,
    pub b: Vec3<f64>,
    pub phi: f64,
}

impl Primitive {
    pub fn to_conserved(&self, gamma: f64, form: EnergyForm) -> ConservedState<f64> {
        let kinetic = 0.5 * self.rho * dot(&self.u, &self.u);
        let magnetic = 0.5 * dot(&self.b, &self.b);
        let mut energy = self.p / (gamma - 1.0) + kinetic + magnetic;
        if form == EnergyForm::TotalWithPhi {
            energy += 0.5 * self.phi * self.phi;
        }
        ConservedState {
            rho: self.rho,
            m: self.u.map(|v| self.rho * v),
            energy,
            b: self.b,
            phi: self.phi,
        }
    }

    pub fn from_conserved(u: &ConservedState<f64>, gamma: f64, form: EnergyForm) -> Result<Self> {
        if !(u.rho > 0.0) {
            return Err(MhdError::NonPositiveDensity {
                rho: u.rho,
                location: "primitive conversion".into(),
            });
        }
        Ok(Self {
            rho: u.rho,
            u: u.velocity(),
            p: (gamma - 1.0) * u.rho_e(form),
            b: u.b,
            phi: u.phi,
        })
    }
}

/// Primitive gradients recovered from conserved gradients.
///
/// Index convention: `grad_u[i][j] = ∂_i u_j`.
#[derive(Clone, Copy, Debug)]
pub struct StateGradient<S> {
    pub grad_rho: Vec3<S>,
    pub grad_u: Mat3<S>,
    pub grad_rho_e: Vec3<S>,
    pub grad_b: Mat3<S>,
    pub grad_phi: Vec3<S>,
}

impl<S: Scalar> StateGradient<S> {
    pub fn from_conserved(u: &ConservedState<S>, du: &ConservedGradient<S>, form: EnergyForm) -> Self {
        let vel = u.velocity();
        let inv_rho = S::one() / u.rho;
        let half_u2 = S::from_f64(0.5) * dot(&vel, &vel);
        let mut g = Self {
            grad_rho: [S::zero(); 3],
            grad_u: [[S::zero(); 3]; 3],
            grad_rho_e: [S::zero(); 3],
            grad_b: [[S::zero(); 3]; 3],
            grad_phi: [S::zero(); 3],
        };
        for i in 0..3 {
            let d = &du[i];
            g.grad_rho[i] = d.rho;
            g.grad_phi[i] = d.phi;
            let mut re = d.energy + half_u2 * d.rho;
            for j in 0..3 {
                g.grad_u[i][j] = (d.m[j] - d.rho * vel[j]) * inv_rho;
                g.grad_b[i][j] = d.b[j];
                re -= d.m[j] * vel[j] + d.b[j] * u.b[j];
            }
            if form == EnergyForm::TotalWithPhi {
                re -= u.phi * d.phi;
            }
            g.grad_rho_e[i] = re;
        }
        g
    }

    /// `∇e = (∇(ρe) - e ∇ρ) / ρ`.
    pub fn grad_e(&self, rho: S, e: S) -> Vec3<S> {
        std::array::from_fn(|i| (self.grad_rho_e[i] - e * self.grad_rho[i]) / rho)
    }

    pub fn div_u(&self) -> S {
        self.grad_u[0][0] + self.grad_u[1][1] + self.grad_u[2][2]
    }

    pub fn div_b(&self) -> S {
        self.grad_b[0][0] + self.grad_b[1][1] + self.grad_b[2][2]
    }
}

pub fn dot<S: Scalar>(a: &Vec3<S>, b: &Vec3<S>) -> S {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3<f64>) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_round_trip() {
        let w = Primitive { rho: 1.3, u: [0.2, -0.4, 0.1], p: 0.7, b: [0.5, 0.3, -0.2], phi: 0.25 };
        for form in [EnergyForm::Total, EnergyForm::TotalWithPhi] {
            let u = w.to_conserved(5.0 / 3.0, form);
            let back = Primitive::from_conserved(&u, 5.0 / 3.0, form).unwrap();
            assert!((back.p - w.p).abs() < 1e-14);
            assert!((back.u[1] - w.u[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn array_layout_round_trips() {
        let w = Primitive { rho: 2.0, u: [1.0, 2.0, 3.0], p: 1.0, b: [4.0, 5.0, 6.0], phi: 7.0 };
        let u = w.to_conserved(1.4, EnergyForm::Total);
        let mut v = ConservedState::from_array(u.to_array());
        assert_eq!(u, v);
        v.set(6, -1.0);
        assert_eq!(v.b[1], -1.0);
        assert_eq!(v.get(8), 7.0);
    }
}
