//! Wave-speed bounds and artificial viscosity fields.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MhdError, Result};
use crate::fem::FeSpace;
use crate::flux::ViscosityCoefficients;
use crate::registry::Registry;
use crate::scalar::Dual;
use crate::state::{dot, ConservedState, EnergyForm};
use crate::thermo::EosModel;

/// `|u| + sqrt(γp/ρ + |B|²/ρ)`, an upper bound on the fast magnetosonic speed in every direction.
pub fn max_wave_speed(u: &ConservedState<f64>, eos: &EosModel, form: EnergyForm) -> Result<f64> {
    if !(u.rho > 0.0) {
        return Err(MhdError::Domain(format!("density must be positive, got {}", u.rho)));
    }
    Ok(wave_speed_unchecked(u, eos, form))
}

fn wave_speed_unchecked(u: &ConservedState<f64>, eos: &EosModel, form: EnergyForm) -> f64 {
    let vel = u.velocity();
    let p = eos.pressure_of(u.rho, u.specific_internal_energy(form)).max(0.0);
    let a2 = eos.gamma() * p / u.rho;
    let b2 = dot(&u.b, &u.b) / u.rho;
    dot(&vel, &vel).sqrt() + (a2 + b2).sqrt()
}

/// Nodal wave speeds; fails on vacuum.
pub fn nodal_wave_speeds(u: &[ConservedState<f64>], eos: &EosModel, form: EnergyForm) -> Result<Vec<f64>> {
    u.iter()
        .enumerate()
        .map(|(i, s)| {
            if !(s.rho > 0.0) {
                Err(MhdError::NonPositiveDensity { rho: s.rho, location: format!("dof {i}") })
            } else {
                Ok(wave_speed_unchecked(s, eos, form))
            }
        })
        .collect()
}

/// `min(½hλ, C_E h² |R|)` for an already normalized residual `R`.
pub fn rv_value(h: f64, lambda: f64, c_e: f64, residual: f64) -> f64 {
    (0.5 * h * lambda.abs()).min(c_e * h * h * residual.abs())
}

/// Nodal viscosity values with the first-order cap they were limited by.
#[derive(Clone, Debug)]
pub struct ViscosityField {
    pub nodal: Vec<f64>,
    pub cap: Vec<f64>,
}

pub fn first_order_viscosity(h: &[f64], lambda: &[f64]) -> ViscosityField {
    let cap: Vec<f64> = h.iter().zip(lambda).map(|(h, l)| 0.5 * h * l.abs()).collect();
    ViscosityField { nodal: cap.clone(), cap }
}

/// Everything a viscosity mode may read at the start of a step.
pub struct ViscosityInput<'a> {
    pub space: &'a FeSpace,
    pub u: &'a [ConservedState<f64>],
    pub h: &'a [f64],
    pub lambda: &'a [f64],
    /// Positive nodal weights used for the entropy mean.
    pub weights: &'a [f64],
    pub eos: &'a EosModel,
    pub form: EnergyForm,
    pub t: f64,
    /// Time derivative of the inviscid semi-discrete system at the current state.
    pub inviscid_rate: &'a dyn Fn() -> Result<Vec<ConservedState<f64>>>,
}

/// A rule producing nodal artificial viscosity.
pub trait ViscosityMode: Send {
    fn name(&self) -> &'static str;
    fn evaluate(&mut self, input: &ViscosityInput) -> Result<ViscosityField>;
}

pub struct NoArtificialViscosity;
pub struct FirstOrder;

impl ViscosityMode for NoArtificialViscosity {
    fn name(&self) -> &'static str {
        "none"
    }
    fn evaluate(&mut self, input: &ViscosityInput) -> Result<ViscosityField> {
        let cap = first_order_viscosity(input.h, input.lambda).cap;
        Ok(ViscosityField { nodal: vec![0.0; cap.len()], cap })
    }
}

impl ViscosityMode for FirstOrder {
    fn name(&self) -> &'static str {
        "first_order"
    }
    fn evaluate(&mut self, input: &ViscosityInput) -> Result<ViscosityField> {
        Ok(first_order_viscosity(input.h, input.lambda))
    }
}

/// How the entropy time derivative is obtained before any history exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstStep {
    /// Chain rule through the inviscid semi-discrete right-hand side.
    InviscidRate,
    /// Fall back to the first-order cap.
    FirstOrder,
}

impl FromStr for FirstStep {
    type Err = MhdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inviscid_rate" => Ok(Self::InviscidRate),
            "first_order" => Ok(Self::FirstOrder),
            other => Err(MhdError::UnknownName {
                kind: "first-step rule",
                name: other.into(),
                available: "inviscid_rate, first_order".into(),
            }),
        }
    }
}

impl fmt::Display for FirstStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::InviscidRate => "inviscid_rate",
            Self::FirstOrder => "first_order",
        })
    }
}

/// Entropy-residual viscosity `min(½hλ, C_E h² |R| / ‖s - s̄‖∞)`.
pub struct ResidualViscosity {
    pub c_e: f64,
    pub first_step: FirstStep,
    history: VecDeque<(f64, Vec<f64>)>,
}

impl ResidualViscosity {
    pub fn new(c_e: f64, first_step: FirstStep) -> Self {
        Self { c_e, first_step, history: VecDeque::new() }
    }
}

pub fn nodal_entropy(u: &[ConservedState<f64>], eos: &EosModel, form: EnergyForm) -> Result<Vec<f64>> {
    u.iter()
        .map(|s| eos.specific_entropy(s.rho, s.specific_internal_energy(form)))
        .collect()
}

/// `ds/dt` along `U + τ U̇` at `τ = 0`.
fn entropy_rate(u: &ConservedState<f64>, du: &ConservedState<f64>, eos: &EosModel, form: EnergyForm) -> f64 {
    let (a, b) = (u.to_array(), du.to_array());
    let d = ConservedState::from_array(std::array::from_fn(|k| Dual::<f64, 1> { re: a[k], eps: [b[k]] }));
    eos.entropy_of(d.rho, d.specific_internal_energy(form)).eps[0]
}

/// Nodal `max_K |∂_t s + u·∇s|`, gradients taken cell by cell.
pub fn entropy_residual(space: &FeSpace, u: &[ConservedState<f64>], s: &[f64], ds_dt: &[f64]) -> Vec<f64> {
    let n = space.n_local;
    let mut r = vec![0.0f64; space.n_dofs];
    for c in 0..space.n_cells() {
        let dofs = space.cell_dofs(c);
        for (b, &i) in dofs.iter().enumerate() {
            let mut gs = [0.0; 2];
            for a in 0..n {
                let g = space.physical_gradient(c, space.node_dphi_ref[b][a]);
                gs[0] += g[0] * s[dofs[a]];
                gs[1] += g[1] * s[dofs[a]];
            }
            let vel = u[i].velocity();
            let val = (ds_dt[i] + vel[0] * gs[0] + vel[1] * gs[1]).abs();
            r[i] = r[i].max(val);
        }
    }
    r
}

impl ViscosityMode for ResidualViscosity {
    fn name(&self) -> &'static str {
        "rv"
    }

    fn evaluate(&mut self, input: &ViscosityInput) -> Result<ViscosityField> {
        let first = first_order_viscosity(input.h, input.lambda);
        let s = nodal_entropy(input.u, input.eos, input.form)?;
        let n = s.len();
        let ds_dt: Option<Vec<f64>> = match self.history.len() {
            0 => match self.first_step {
                FirstStep::FirstOrder => None,
                FirstStep::InviscidRate => {
                    let rate = (input.inviscid_rate)()?;
                    Some((0..n).map(|i| entropy_rate(&input.u[i], &rate[i], input.eos, input.form)).collect())
                }
            },
            1 => {
                let (t1, s1) = &self.history[0];
                let dt = input.t - t1;
                Some((0..n).map(|i| (s[i] - s1[i]) / dt).collect())
            }
            _ => {
                let (t1, s1) = &self.history[0];
                let (t2, s2) = &self.history[1];
                let dt = input.t - t1;
                let w = dt / (t1 - t2);
                let (c0, c1, c2) = ((1.0 + 2.0 * w) / (1.0 + w), 1.0 + w, w * w / (1.0 + w));
                Some((0..n).map(|i| (c0 * s[i] - c1 * s1[i] + c2 * s2[i]) / dt).collect())
            }
        };
        if self.history.front().map(|(t, _)| *t < input.t).unwrap_or(true) {
            self.history.push_front((input.t, s.clone()));
            self.history.truncate(2);
        }
        let Some(ds_dt) = ds_dt else {
            return Ok(first);
        };
        let wsum: f64 = input.weights.iter().sum();
        let mean = s.iter().zip(input.weights).map(|(s, w)| s * w).sum::<f64>() / wsum;
        let norm = s.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        if norm <= 1e-12 * (1.0 + mean.abs()) {
            return Ok(ViscosityField { nodal: vec![0.0; n], cap: first.cap });
        }
        let res = entropy_residual(input.space, input.u, &s, &ds_dt);
        let nodal = (0..n)
            .map(|i| rv_value(input.h[i], input.lambda[i], self.c_e, res[i] / norm))
            .collect();
        Ok(ViscosityField { nodal, cap: first.cap })
    }
}

/// Physical coefficients that act as floors for the artificial ones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhysicalViscosity {
    pub kappa: f64,
    pub mu: f64,
    pub eta: f64,
}

/// Per-cell coefficients: the largest nodal value of the cell, floored by the physical ones.
pub fn cell_coefficients(space: &FeSpace, field: &ViscosityField, phys: &PhysicalViscosity) -> Vec<ViscosityCoefficients> {
    (0..space.n_cells())
        .map(|c| {
            let eps = space.cell_dofs(c).iter().fold(0.0f64, |m, &i| m.max(field.nodal[i]));
            ViscosityCoefficients {
                kappa: phys.kappa.max(eps),
                mu: phys.mu.max(eps),
                eta: phys.eta.max(eps),
                lambda: 0.0,
                kappa_t: phys.kappa.max(eps),
                epsilon: eps,
            }
        })
        .collect()
}

/// Settings needed to build any registered mode.
#[derive(Clone, Copy, Debug)]
pub struct ViscositySettings {
    pub c_e: f64,
    pub first_step: FirstStep,
}

pub fn viscosity_registry(settings: ViscositySettings) -> Registry<dyn ViscosityMode> {
    Registry::<dyn ViscosityMode>::new("viscosity mode")
        .with("first_order", || Box::new(FirstOrder))
        .with("rv", move || Box::new(ResidualViscosity::new(settings.c_e, settings.first_step)))
        .with("none", || Box::new(NoArtificialViscosity))
}
