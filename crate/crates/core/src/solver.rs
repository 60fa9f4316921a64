//! SSPRK(5,4) time integration and the run loop.

use crate::error::{MhdError, Result};
use crate::fem::assembly::{SpatialOperator, StageContext};
use crate::flux::ViscosityCoefficients;
use crate::stabilization::{cell_coefficients, nodal_wave_speeds, PhysicalViscosity, ViscosityField, ViscosityInput, ViscosityMode};
use crate::state::{ConservedState, EnergyForm};
use crate::thermo::EosModel;

/// Vectors the integrator can combine linearly.
pub trait RkVector: Clone {
    fn lincomb(terms: &[(f64, &Self)]) -> Self;
}

impl RkVector for Vec<f64> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let mut out = vec![0.0; terms[0].1.len()];
        for (a, v) in terms {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o += a * x;
            }
        }
        out
    }
}

impl RkVector for Vec<ConservedState<f64>> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let mut out = vec![ConservedState::zero(); terms[0].1.len()];
        for (a, v) in terms {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                o.axpy(*a, x);
            }
        }
        out
    }
}

// Shu–Osher coefficients of the five-stage, fourth-order SSP scheme. The last
// weight of each stage is taken as the complement so constant states are kept.
const A20: f64 = 0.444370493651235;
const A21: f64 = 1.0 - A20;
const A30: f64 = 0.620101851488403;
const A32: f64 = 1.0 - A30;
const A40: f64 = 0.178079954393132;
const A43: f64 = 1.0 - A40;
const A52: f64 = 0.517231671970585;
const A53: f64 = 0.096059710526147;
const A54: f64 = 1.0 - A52 - A53;
const B10: f64 = 0.391752226571890;
const B21: f64 = 0.368410593050371;
const B32: f64 = 0.251891774271694;
const B43: f64 = 0.544974750228521;
const B53: f64 = 0.063692468666290;
const B54: f64 = 0.226007483236906;

/// One SSPRK(5,4) step of `du/dt = L(u)`.
pub fn ssprk54_step<V: RkVector>(u: &V, dt: f64, mut rhs: impl FnMut(&V) -> Result<V>) -> Result<V> {
    let l0 = rhs(u)?;
    let u1 = V::lincomb(&[(1.0, u), (B10 * dt, &l0)]);
    let l1 = rhs(&u1)?;
    let u2 = V::lincomb(&[(A20, u), (A21, &u1), (B21 * dt, &l1)]);
    let l2 = rhs(&u2)?;
    let u3 = V::lincomb(&[(A30, u), (A32, &u2), (B32 * dt, &l2)]);
    let l3 = rhs(&u3)?;
    let u4 = V::lincomb(&[(A40, u), (A43, &u3), (B43 * dt, &l3)]);
    let l4 = rhs(&u4)?;
    Ok(V::lincomb(&[(A52, &u2), (A53, &u3), (B53 * dt, &l3), (A54, &u4), (B54 * dt, &l4)]))
}

/// `cfl · min_i h_i / λ_i`.
pub fn compute_dt(u: &[ConservedState<f64>], h: &[f64], eos: &EosModel, form: EnergyForm, cfl: f64) -> Result<f64> {
    let lambda = nodal_wave_speeds(u, eos, form)?;
    let dt = h.iter().zip(&lambda).map(|(h, l)| h / l).fold(f64::INFINITY, f64::min) * cfl;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(MhdError::Aborted { t: f64::NAN, reason: format!("invalid time step {dt}") });
    }
    Ok(dt)
}

/// How the GLM speed `c_h` is chosen each step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CleaningSpeed {
    /// Global maximum of the wave-speed bound.
    MaxWaveSpeed,
    Fixed(f64),
}

/// Summary of one completed step.
#[derive(Clone, Copy, Debug)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub min_rho: f64,
    pub max_visc: f64,
}

/// A discretized problem advanced in time.
pub struct Simulation {
    pub op: SpatialOperator,
    pub u: Vec<ConservedState<f64>>,
    pub t: f64,
    pub steps: usize,
    pub cfl: f64,
    pub cleaning_speed: CleaningSpeed,
    pub physical: PhysicalViscosity,
    viscosity: Box<dyn ViscosityMode>,
    weights: Vec<f64>,
    last_visc: Option<ViscosityField>,
}

impl Simulation {
    pub fn new(
        op: SpatialOperator,
        u0: Vec<ConservedState<f64>>,
        viscosity: Box<dyn ViscosityMode>,
        physical: PhysicalViscosity,
        cfl: f64,
        cleaning_speed: CleaningSpeed,
    ) -> Result<Self> {
        if u0.len() != op.space.n_dofs {
            return Err(MhdError::InvalidConfig("initial field does not match the space".into()));
        }
        if !(cfl > 0.0) {
            return Err(MhdError::InvalidConfig(format!("cfl must be positive, got {cfl}")));
        }
        let weights = op.space.consistent_mass().row_sums();
        Ok(Self { op, u: u0, t: 0.0, steps: 0, cfl, cleaning_speed, physical, viscosity, weights, last_visc: None })
    }

    pub fn eos(&self) -> &EosModel {
        &self.op.model.eos
    }

    pub fn form(&self) -> EnergyForm {
        self.op.form()
    }

    pub fn viscosity_name(&self) -> &'static str {
        self.viscosity.name()
    }

    /// Nodal viscosity used in the most recent step.
    pub fn last_viscosity(&self) -> Option<&ViscosityField> {
        self.last_visc.as_ref()
    }

    fn c_h(&self, lambda: &[f64]) -> f64 {
        match self.cleaning_speed {
            CleaningSpeed::Fixed(v) => v,
            CleaningSpeed::MaxWaveSpeed => lambda.iter().fold(0.0, |a: f64, b| a.max(*b)),
        }
    }

    /// Advance by one step, never past `t_final`.
    pub fn step(&mut self, t_final: f64) -> Result<StepReport> {
        let eos = *self.eos();
        let form = self.form();
        let lambda = nodal_wave_speeds(&self.u, &eos, form).map_err(|e| self.abort(e.to_string()))?;
        let mut dt = self.cfl * self.op.h.iter().zip(&lambda).map(|(h, l)| h / l).fold(f64::INFINITY, f64::min);
        if t_final - self.t < dt {
            dt = t_final - self.t;
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(self.abort(format!("invalid time step {dt}")));
        }
        if self.t + dt == self.t {
            return Err(self.abort(format!("time step {dt:e} does not advance t")));
        }
        let c_h = self.c_h(&lambda);
        let op = &self.op;
        let u = &self.u;
        let zero_visc = vec![ViscosityCoefficients::uniform(0.0); op.space.n_cells()];
        let inviscid = || op.time_derivative(u, &StageContext { visc: &zero_visc, c_h });
        let input = ViscosityInput {
            space: &op.space,
            u,
            h: &op.h,
            lambda: &lambda,
            weights: &self.weights,
            eos: &eos,
            form,
            t: self.t,
            inviscid_rate: &inviscid,
        };
        let field = self.viscosity.evaluate(&input)?;
        let visc = cell_coefficients(&op.space, &field, &self.physical);
        let ctx = StageContext { visc: &visc, c_h };
        let next = ssprk54_step(u, dt, |v| op.time_derivative(v, &ctx));
        let next = match next {
            Ok(v) => v,
            Err(e) => return Err(self.abort(e.to_string())),
        };
        let mut min_rho = f64::INFINITY;
        for (i, s) in next.iter().enumerate() {
            if !s.is_finite() {
                return Err(self.abort(format!("non-finite state at dof {i}")));
            }
            min_rho = min_rho.min(s.rho);
        }
        if !(min_rho > 0.0) {
            return Err(self.abort(format!("non-positive density {min_rho:e}")));
        }
        let max_visc = field.nodal.iter().fold(0.0f64, |a, b| a.max(*b));
        self.u = next;
        self.t += dt;
        if (t_final - self.t).abs() <= 1e-12 * t_final.abs().max(1.0) {
            self.t = t_final;
        }
        self.steps += 1;
        self.last_visc = Some(field);
        Ok(StepReport { step: self.steps, t: self.t, dt, min_rho, max_visc })
    }

    fn abort(&self, reason: String) -> MhdError {
        MhdError::Aborted { t: self.t, reason }
    }

    /// Step to `t_final`, calling `observe` after every step.
    pub fn run_until(&mut self, t_final: f64, mut observe: impl FnMut(&Simulation, &StepReport) -> Result<()>) -> Result<()> {
        while self.t < t_final {
            let report = self.step(t_final)?;
            observe(self, &report)?;
        }
        Ok(())
    }
}
