//! Divergence source terms and GLM cleaning variants.

use std::fmt;
use std::str::FromStr;

use crate::error::{MhdError, Result};
use crate::registry::Registry;
use crate::scalar::Scalar;
use crate::state::{dot, ConservedState, EnergyForm, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourcePreset {
    Powell,
    Janhunen,
    Bb,
    Custom,
    None,
}

/// Coefficients of `Ψ(α_m, α_E, α_B) = (0, α_m B, α_E u·B, α_B u) ∇·B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceConfig {
    pub alpha_m: f64,
    pub alpha_e: f64,
    pub alpha_b: f64,
    pub preset: SourcePreset,
}

impl SourceConfig {
    pub const fn new(alpha_m: f64, alpha_e: f64, alpha_b: f64, preset: SourcePreset) -> Self {
        Self { alpha_m, alpha_e, alpha_b, preset }
    }

    pub const fn powell() -> Self {
        Self::new(-1.0, -1.0, -1.0, SourcePreset::Powell)
    }

    pub const fn janhunen() -> Self {
        Self::new(0.0, 0.0, -1.0, SourcePreset::Janhunen)
    }

    pub const fn bb() -> Self {
        Self::new(-1.0, 0.0, 0.0, SourcePreset::Bb)
    }

    pub const fn none() -> Self {
        Self::new(0.0, 0.0, 0.0, SourcePreset::None)
    }

    pub const fn custom(alpha_m: f64, alpha_e: f64, alpha_b: f64) -> Self {
        Self::new(alpha_m, alpha_e, alpha_b, SourcePreset::Custom)
    }

    pub fn is_zero(&self) -> bool {
        self.alpha_m == 0.0 && self.alpha_e == 0.0 && self.alpha_b == 0.0
    }
}

impl FromStr for SourceConfig {
    type Err = MhdError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "powell" => return Ok(Self::powell()),
            "janhunen" => return Ok(Self::janhunen()),
            "bb" => return Ok(Self::bb()),
            "none" => return Ok(Self::none()),
            _ => {}
        }
        let bad = || MhdError::InvalidConfig(format!("source `{s}`: expected powell, janhunen, bb, none or custom:a,b,c"));
        let rest = s.strip_prefix("custom:").ok_or_else(bad)?;
        let vals: Vec<f64> = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match vals.as_slice() {
            [a, b, c] => Ok(Self::custom(*a, *b, *c)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for SourceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.preset {
            SourcePreset::Powell => write!(f, "powell"),
            SourcePreset::Janhunen => write!(f, "janhunen"),
            SourcePreset::Bb => write!(f, "bb"),
            SourcePreset::None => write!(f, "none"),
            SourcePreset::Custom => write!(f, "custom:{},{},{}", self.alpha_m, self.alpha_e, self.alpha_b),
        }
    }
}

pub fn psi_source<S: Scalar>(u: &ConservedState<S>, div_b: S, cfg: &SourceConfig) -> ConservedState<S> {
    if cfg.is_zero() {
        return ConservedState::zero();
    }
    let vel = u.velocity();
    ConservedState {
        rho: S::zero(),
        m: u.b.map(|b| (b * div_b).scale(cfg.alpha_m)),
        energy: (dot(&vel, &u.b) * div_b).scale(cfg.alpha_e),
        b: vel.map(|v| (v * div_b).scale(cfg.alpha_b)),
        phi: S::zero(),
    }
}

pub fn entropy_compatibility(cfg: &SourceConfig) -> bool {
    (cfg.alpha_e - cfg.alpha_m - cfg.alpha_b - 1.0).abs() < 1e-14
}

/// Parameters shared by every cleaning variant at one evaluation point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlmParams {
    pub c_h: f64,
    pub c_r: f64,
    /// Local mesh-size indicator for the damping term.
    pub h: f64,
}

/// A hyperbolic divergence-cleaning strategy.
pub trait GlmCleaning<S: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    /// Whether the energy slot stores `E* = E + Φ²/2`.
    fn energy_form(&self) -> EnergyForm {
        EnergyForm::Total
    }

    fn active(&self) -> bool {
        true
    }

    fn source(&self, u: &ConservedState<S>, grad_phi: &Vec3<S>, div_b: S, p: &GlmParams) -> ConservedState<S>;
}

pub struct NoCleaning;
pub struct Dedner;
pub struct NineWave;
pub struct EnergyConservative;

impl<S: Scalar> GlmCleaning<S> for NoCleaning {
    fn name(&self) -> &'static str {
        "none"
    }
    fn active(&self) -> bool {
        false
    }
    fn source(&self, _u: &ConservedState<S>, _g: &Vec3<S>, _d: S, _p: &GlmParams) -> ConservedState<S> {
        ConservedState::zero()
    }
}

impl<S: Scalar> GlmCleaning<S> for Dedner {
    fn name(&self) -> &'static str {
        "dedner"
    }
    fn source(&self, u: &ConservedState<S>, grad_phi: &Vec3<S>, div_b: S, p: &GlmParams) -> ConservedState<S> {
        let vel = u.velocity();
        let damping = if p.h > 0.0 { p.c_r * p.c_h / p.h } else { 0.0 };
        ConservedState {
            rho: S::zero(),
            m: [S::zero(); 3],
            energy: dot(&u.b, grad_phi).scale(-p.c_h),
            b: grad_phi.map(|g| g.scale(-p.c_h)),
            phi: -dot(&vel, grad_phi) - u.phi.scale(damping) - div_b.scale(p.c_h),
        }
    }
}

/// `-c_h ∇·(ΦB)` expanded as `-c_h (B·∇Φ + Φ ∇·B)`.
fn div_phi_b<S: Scalar>(u: &ConservedState<S>, grad_phi: &Vec3<S>, div_b: S, c_h: f64) -> S {
    (dot(&u.b, grad_phi) + u.phi * div_b).scale(-c_h)
}

impl<S: Scalar> GlmCleaning<S> for NineWave {
    fn name(&self) -> &'static str {
        "9wave"
    }
    fn energy_form(&self) -> EnergyForm {
        EnergyForm::TotalWithPhi
    }
    fn source(&self, u: &ConservedState<S>, grad_phi: &Vec3<S>, div_b: S, p: &GlmParams) -> ConservedState<S> {
        let u_grad_phi = dot(&u.velocity(), grad_phi);
        ConservedState {
            rho: S::zero(),
            m: [S::zero(); 3],
            energy: div_phi_b(u, grad_phi, div_b, p.c_h) - u.phi * u_grad_phi,
            b: grad_phi.map(|g| g.scale(-p.c_h)),
            phi: -u_grad_phi - div_b.scale(p.c_h),
        }
    }
}

impl<S: Scalar> GlmCleaning<S> for EnergyConservative {
    fn name(&self) -> &'static str {
        "cons"
    }
    fn energy_form(&self) -> EnergyForm {
        EnergyForm::TotalWithPhi
    }
    fn source(&self, u: &ConservedState<S>, grad_phi: &Vec3<S>, div_b: S, p: &GlmParams) -> ConservedState<S> {
        ConservedState {
            rho: S::zero(),
            m: [S::zero(); 3],
            energy: div_phi_b(u, grad_phi, div_b, p.c_h),
            b: grad_phi.map(|g| g.scale(-p.c_h)),
            phi: -div_b.scale(p.c_h),
        }
    }
}

pub fn glm_registry<S: Scalar + 'static>() -> Registry<dyn GlmCleaning<S>> {
    Registry::<dyn GlmCleaning<S>>::new("GLM variant")
        .with("none", || Box::new(NoCleaning))
        .with("dedner", || Box::new(Dedner))
        .with("9wave", || Box::new(NineWave))
        .with("cons", || Box::new(EnergyConservative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Primitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state(u: [f64; 3], b: [f64; 3], phi: f64) -> ConservedState<f64> {
        Primitive { rho: 1.0, u, p: 1.0, b, phi }.to_conserved(1.4, EnergyForm::Total)
    }

    fn random_state(rng: &mut ChaCha8Rng) -> ConservedState<f64> {
        let v = |rng: &mut ChaCha8Rng| std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        Primitive { rho: rng.gen_range(0.2..2.0), u: v(rng), p: 1.0, b: v(rng), phi: rng.gen_range(-1.0..1.0) }
            .to_conserved(1.4, EnergyForm::Total)
    }

    #[test]
    fn psi_examples() {
        let u = state([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], 0.0);
        assert_eq!(psi_source(&u, 0.0, &SourceConfig::powell()), ConservedState::zero());
        let p = psi_source(&u, 0.1, &SourceConfig::powell());
        assert_eq!(p.m, [-0.1, 0.0, 0.0]);
        assert_eq!(p.energy, -0.1);
        assert_eq!(p.b, [-0.1, 0.0, 0.0]);
        let j = psi_source(&u, 0.1, &SourceConfig::janhunen());
        assert_eq!(j.m, [0.0; 3]);
        assert_eq!(j.energy, 0.0);
        assert_eq!(j.b, [-0.1, 0.0, 0.0]);
    }

    #[test]
    fn compatibility_flags() {
        assert!(entropy_compatibility(&SourceConfig::powell()));
        assert!(entropy_compatibility(&SourceConfig::bb()));
        assert!(entropy_compatibility(&SourceConfig::janhunen()));
        assert!(!entropy_compatibility(&SourceConfig::none()));
        assert!(entropy_compatibility(&SourceConfig::custom(0.0, 1.0, 0.0)));
    }

    #[test]
    fn source_names_round_trip() {
        for s in ["powell", "janhunen", "bb", "none", "custom:0.5,-1,2"] {
            let cfg: SourceConfig = s.parse().unwrap();
            let again: SourceConfig = cfg.to_string().parse().unwrap();
            assert_eq!(cfg, again);
        }
        assert!("custom:1,2".parse::<SourceConfig>().is_err());
        assert!("wrong".parse::<SourceConfig>().is_err());
    }

    #[test]
    fn energy_cancellation_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let u = random_state(&mut rng);
            let cfg = SourceConfig::custom(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let div = rng.gen_range(-1.0..1.0);
            let psi = psi_source(&u, div, &cfg);
            let vel = u.velocity();
            let lhs = psi.energy - dot(&vel, &psi.m) - dot(&u.b, &psi.b);
            let rhs = (cfg.alpha_e - cfg.alpha_m - cfg.alpha_b) * dot(&vel, &u.b) * div;
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn dedner_example() {
        let u = state([0.0; 3], [2.0, 0.0, 0.0], 0.0);
        let p = GlmParams { c_h: 1.0, c_r: 0.0, h: 0.1 };
        let s = Dedner.source(&u, &[1.0, 0.0, 0.0], 0.0, &p);
        assert_eq!(s.energy, -2.0);
        assert_eq!(s.b, [-1.0, 0.0, 0.0]);
        assert_eq!(s.phi, 0.0);
    }

    #[test]
    fn zero_inputs_give_zero_sources() {
        let u = state([0.3, 0.1, 0.0], [0.2, 0.5, 0.1], 0.0);
        let p = GlmParams { c_h: 2.0, c_r: 0.18, h: 0.1 };
        let reg = glm_registry::<f64>();
        for name in reg.names() {
            let v = reg.create(name).unwrap();
            assert_eq!(v.source(&u, &[0.0; 3], 0.0, &p), ConservedState::zero(), "{name}");
        }
    }

    #[test]
    fn nine_wave_and_conservative_differ_by_advection_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let u = random_state(&mut rng);
            let g = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let div = rng.gen_range(-1.0..1.0);
            let p = GlmParams { c_h: rng.gen_range(0.0..3.0), c_r: 0.18, h: 0.1 };
            let a = NineWave.source(&u, &g, div, &p);
            let b = EnergyConservative.source(&u, &g, div, &p);
            let ug = dot(&u.velocity(), &g);
            assert!((a.energy - b.energy + u.phi * ug).abs() < 1e-14);
            assert!((a.phi - b.phi + ug).abs() < 1e-14);
            assert_eq!(a.b, b.b);
        }
    }

    #[test]
    fn dedner_is_entropy_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let u = random_state(&mut rng);
            let g = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let p = GlmParams { c_h: rng.gen_range(0.0..3.0), c_r: 0.18, h: 0.05 };
            let s = Dedner.source(&u, &g, rng.gen_range(-1.0..1.0), &p);
            let k = s.energy - dot(&u.velocity(), &s.m) - dot(&u.b, &s.b);
            assert!(k.abs() < 1e-13);
        }
    }
}
