//! Randomized property sweeps with a pass/fail table.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MhdError, Result};
use crate::fem::{BoundaryCondition, FeSpace, Mesh, PhysicsModel, SpatialOperator};
use crate::fem::assembly::StageContext;
use crate::flux::{viscous_flux_registry, ViscosityCoefficients};
use crate::invariance::{
    check_advective_rotation, check_galilean, check_psi_rotation, check_viscous_rotation_single, check_viscous_rotation_mixed,
    random_gradient, random_state, AnalyticField, GalileanBoost, ResidualModel, RotationSpec,
};
use crate::scalar::Dual4;
use crate::sources::{glm_registry, GlmParams, SourceConfig};
use crate::state::{EnergyForm, Primitive};
use crate::thermo::{generalized_entropy_production, EosModel};

pub const SUITES: [&str; 4] = ["rotation", "galilean", "thermo", "freestream"];
pub const GAMMAS: [f64; 3] = [1.4, 5.0 / 3.0, 2.0];

/// What a row must show to pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Expect {
    /// Worst value `≤ bound`.
    AtMost(f64),
    /// Largest value `> bound` (a property that must fail).
    Exceeds(f64),
    /// Largest value `< bound`.
    Below(f64),
    /// Smallest value `≥ bound`.
    AtLeast(f64),
}

impl Expect {
    fn holds(&self, v: f64) -> bool {
        match *self {
            Self::AtMost(b) => v <= b,
            Self::Exceeds(b) => v > b,
            Self::Below(b) => v < b,
            Self::AtLeast(b) => v >= b,
        }
    }

    fn wants_max(&self) -> bool {
        !matches!(self, Self::AtLeast(_))
    }
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::AtMost(b) => write!(f, "max <= {b:.0e}"),
            Self::Exceeds(b) => write!(f, "max > {b:.0e}"),
            Self::Below(b) => write!(f, "max < {b:.0e}"),
            Self::AtLeast(b) => write!(f, "min >= {b:.0e}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckRow {
    pub suite: &'static str,
    pub name: String,
    pub samples: usize,
    /// Maximum (or minimum, for `AtLeast`) of the sampled metric.
    pub observed: f64,
    pub expect: Expect,
    pub pass: bool,
}

impl CheckRow {
    fn new(suite: &'static str, name: impl Into<String>, expect: Expect, values: impl IntoIterator<Item = f64>) -> Self {
        let mut samples = 0;
        let mut observed = if expect.wants_max() { f64::NEG_INFINITY } else { f64::INFINITY };
        let mut nan = false;
        for v in values {
            samples += 1;
            nan |= v.is_nan();
            observed = if expect.wants_max() { observed.max(v) } else { observed.min(v) };
        }
        let pass = !nan && samples > 0 && expect.holds(observed);
        Self { suite, name: name.into(), samples, observed, expect, pass }
    }
}

pub fn format_table(rows: &[CheckRow]) -> String {
    let mut s = format!("{:<11} {:<44} {:>8} {:>12} {:>16}  result\n", "suite", "check", "samples", "observed", "expected");
    for r in rows {
        s += &format!(
            "{:<11} {:<44} {:>8} {:>12.3e} {:>16}  {}\n",
            r.suite,
            r.name,
            r.samples,
            r.observed,
            r.expect.to_string(),
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    s
}

pub fn run_suite(name: &str, samples: usize, seed: u64) -> Result<Vec<CheckRow>> {
    match name {
        "rotation" => Ok(rotation_suite(samples, seed)),
        "galilean" => Ok(galilean_suite(samples, seed)),
        "thermo" => Ok(thermo_suite(samples, seed)),
        "freestream" => freestream_suite(),
        "all" => {
            let mut rows = Vec::new();
            for s in SUITES {
                rows.extend(run_suite(s, samples, seed)?);
            }
            Ok(rows)
        }
        other => Err(MhdError::UnknownName {
            kind: "verify suite",
            name: other.into(),
            available: format!("{}, all", SUITES.join(", ")),
        }),
    }
}

const VISCOUS: [&str; 4] = ["gp", "gps", "resistive", "monolithic"];

pub fn rotation_suite(samples: usize, seed: u64) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = Expect::AtMost(1e-10);
    let mut rows = Vec::new();
    for form in [EnergyForm::Total, EnergyForm::TotalWithPhi] {
        let v: Vec<f64> = (0..samples)
            .map(|_| {
                let gamma = GAMMAS[rng.gen_range(0..3)];
                let eos = EosModel::new(gamma).expect("valid gamma");
                let u = random_state(&mut rng, gamma, form);
                check_advective_rotation(&u, &RotationSpec::random(&mut rng), &eos, form)
            })
            .collect();
        rows.push(CheckRow::new("rotation", format!("advective flux ({form:?})"), tol, v));
    }
    let reg = viscous_flux_registry::<f64>();
    let reg_d = viscous_flux_registry::<Dual4>();
    for name in VISCOUS {
        let flux = reg.create(name).expect("registered");
        let v: Vec<f64> = (0..samples)
            .map(|_| {
                let gamma = GAMMAS[rng.gen_range(0..3)];
                let eos = EosModel::new(gamma).expect("valid gamma");
                let nu = ViscosityCoefficients {
                    kappa: rng.gen_range(0.0..1.0),
                    mu: rng.gen_range(0.0..1.0),
                    eta: rng.gen_range(0.0..1.0),
                    lambda: rng.gen_range(0.0..1.0),
                    kappa_t: rng.gen_range(0.0..1.0),
                    epsilon: rng.gen_range(0.0..1.0),
                };
                let u = random_state(&mut rng, gamma, EnergyForm::Total);
                let du = random_gradient(&mut rng);
                check_viscous_rotation_single(&u, &du, flux.as_ref(), &nu, &RotationSpec::random(&mut rng), &eos, EnergyForm::Total)
            })
            .collect();
        rows.push(CheckRow::new("rotation", format!("viscous flux {name}: single-direction gradient"), tol, v));
        let flux_d = reg_d.create(name).expect("registered");
        let v: Vec<f64> = (0..samples)
            .map(|_| {
                let gamma = GAMMAS[rng.gen_range(0..3)];
                let eos = EosModel::new(gamma).expect("valid gamma");
                let nu = ViscosityCoefficients::uniform(rng.gen_range(0.05..1.0));
                let field = AnalyticField::random(&mut rng, gamma, EnergyForm::Total);
                let x = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                check_viscous_rotation_mixed(&field, flux_d.as_ref(), &nu, &RotationSpec::random(&mut rng), &eos, x)
            })
            .collect();
        rows.push(CheckRow::new("rotation", format!("viscous flux {name}: mixed divergence"), tol, v));
    }
    let v: Vec<f64> = (0..samples)
        .map(|_| {
            let cfg = SourceConfig::custom(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let u = random_state(&mut rng, 5.0 / 3.0, EnergyForm::Total);
            let du = random_gradient(&mut rng);
            check_psi_rotation(&u, &du, &cfg, &RotationSpec::random(&mut rng))
        })
        .collect();
    rows.push(CheckRow::new("rotation", "source family Psi(a_m, a_E, a_B)", tol, v));
    rows
}

/// Expected Galilean behaviour of each flux, source and cleaning combination.
pub fn galilean_cases() -> Vec<(&'static str, SourceConfig, &'static str, bool)> {
    let p = SourceConfig::powell();
    vec![
        ("gp", p, "none", true),
        ("resistive", p, "none", true),
        ("monolithic", p, "none", true),
        ("gps", p, "none", false),
        ("gp", SourceConfig::janhunen(), "none", true),
        ("gp", SourceConfig::bb(), "none", false),
        ("gp", SourceConfig::custom(0.0, 1.0, 0.0), "none", false),
        ("gp", SourceConfig::none(), "none", false),
        ("gp", p, "dedner", true),
        ("gp", p, "9wave", true),
        ("gp", p, "cons", false),
    ]
}

pub fn galilean_residual(flux: &str, source: SourceConfig, glm: &str, samples: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let flux = viscous_flux_registry::<Dual4>().create(flux).expect("registered");
    let glm = glm_registry::<f64>().create(glm).expect("registered");
    (0..samples)
        .map(|_| {
            let gamma = GAMMAS[rng.gen_range(0..3)];
            let model = ResidualModel {
                flux: flux.as_ref(),
                glm: glm.as_ref(),
                source,
                nu: ViscosityCoefficients::uniform(rng.gen_range(0.05..1.0)),
                glm_params: GlmParams { c_h: rng.gen_range(0.5..2.0), c_r: 0.18, h: rng.gen_range(0.01..0.5) },
                eos: EosModel::new(gamma).expect("valid gamma"),
            };
            let field = AnalyticField::random(rng, gamma, glm.energy_form());
            let x = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let v = rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            check_galilean(&field, &model, &GalileanBoost { v }, x)
        })
        .collect()
}

pub fn galilean_suite(samples: usize, seed: u64) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    galilean_cases()
        .into_iter()
        .map(|(flux, source, glm, invariant)| {
            let expect = if invariant { Expect::AtMost(1e-10) } else { Expect::Exceeds(1e-3) };
            let v = galilean_residual(flux, source, glm, samples, &mut rng);
            CheckRow::new("galilean", format!("flux {flux}, source {source}, glm {glm}"), expect, v)
        })
        .collect()
}

/// `(ρ, e)` log-uniform in `(1e-3, 1e3)²`.
fn random_thermo_state(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (10f64.powf(rng.gen_range(-3.0..3.0)), 10f64.powf(rng.gen_range(-3.0..3.0)))
}

/// Scale-free Sylvester margin `1 − m₁₂² / (m₁₁ m₂₂)` of a symmetric 2×2 matrix:
/// positive for negative definite, zero when singular, `-1` if a diagonal entry is not negative.
fn definiteness_margin(m: &[[f64; 2]; 2]) -> f64 {
    if !(m[0][0] < 0.0 && m[1][1] < 0.0) {
        return -1.0;
    }
    1.0 - m[0][1] * m[1][0] / (m[0][0] * m[1][1])
}

pub fn thermo_suite(samples: usize, seed: u64) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let eos_samples = samples.max(1) * 1000;
    let mut res = Vec::with_capacity(eos_samples);
    for _ in 0..eos_samples {
        let eos = EosModel::new(GAMMAS[rng.gen_range(0..3)]).expect("valid gamma");
        let (rho, e) = random_thermo_state(&mut rng);
        let d = eos.derivative_bundle(rho, e).expect("admissible state");
        let p = eos.pressure(rho, e).expect("admissible state");
        res.push((p * d.s_e + rho * rho * d.s_rho).abs() / (rho * rho * d.s_rho).abs());
    }
    rows.push(CheckRow::new("thermo", "EOS residual |p s_e + rho^2 s_rho| (rel.)", Expect::AtMost(1e-13), res));

    let def_samples = samples.max(1) * 100;
    for gamma in GAMMAS {
        let eos = EosModel::new(gamma).expect("valid gamma");
        let states: Vec<(f64, f64)> = (0..def_samples).map(|_| random_thermo_state(&mut rng)).collect();
        let l: Vec<f64> = states.iter().map(|&(r, e)| definiteness_margin(&eos.dissipation_matrix(r, e).expect("admissible"))).collect();
        rows.push(CheckRow::new("thermo", format!("dissipation form negative definite, g={gamma:.4}"), Expect::AtLeast(1e-12), l));
        let j: Vec<f64> = states.iter().map(|&(r, e)| definiteness_margin(&eos.j3_matrix(r, e).expect("admissible"))).collect();
        rows.push(CheckRow::new("thermo", format!("J3 negative definite, g={gamma:.4}"), Expect::AtLeast(1e-12), j.clone()));
        rows.push(CheckRow::new("thermo", format!("J3 negative semidefinite, g={gamma:.4}"), Expect::AtLeast(-1e-12), j));
    }

    let gen_samples = samples.max(1) * 1000;
    let mut prod = Vec::with_capacity(gen_samples);
    for _ in 0..gen_samples {
        let eos = EosModel::new(GAMMAS[rng.gen_range(0..3)]).expect("valid gamma");
        let (rho, e) = random_thermo_state(&mut rng);
        let gr: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0) * rho);
        let ge: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0) * e);
        let kappa = rng.gen_range(0.0..2.0);
        // Admissible φ: φ' > 0 and φ'' < φ'/c_p.
        let phi1 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let phi2 = phi1 / eos.cp() * rng.gen_range(-3.0..0.999);
        let v = generalized_entropy_production(&eos, rho, e, gr, ge, kappa, phi1, phi2).expect("admissible state");
        prod.push(v);
    }
    rows.push(CheckRow::new("thermo", "generalized entropy production, admissible phi", Expect::AtLeast(0.0), prod));
    rows
}

/// Largest `|dU/dt|` for a uniform state on a periodic mesh with viscosity switched on.
pub fn free_stream_residual(flux: &str, source: SourceConfig, glm: &str, degree: usize, lumped: bool, dim: usize) -> Result<f64> {
    let mesh = if dim == 1 {
        Mesh::interval(0.0, 1.0, 9, true)?
    } else {
        Mesh::crossed_grid([0.0, 0.0], [1.0, 1.0], 5, 4, [true, true])?
    };
    let space = FeSpace::new(mesh, degree)?;
    let glm = glm_registry::<f64>().create(glm)?;
    let form = glm.energy_form();
    let gamma = 5.0 / 3.0;
    let model = PhysicsModel {
        eos: EosModel::new(gamma)?,
        flux: viscous_flux_registry::<f64>().create(flux)?,
        glm,
        source,
        c_r: 0.18,
    };
    let state = Primitive { rho: 1.3, u: [0.7, -0.4, 0.2], p: 0.9, b: [0.5, 0.8, -0.3], phi: 0.0 }.to_conserved(gamma, form);
    let u = vec![state; space.n_dofs];
    let op = SpatialOperator::new(space, model, BoundaryCondition::Periodic, lumped, 1e-12)?;
    let visc = vec![ViscosityCoefficients::uniform(0.05); op.space.n_cells()];
    let du = op.time_derivative(&u, &StageContext { visc: &visc, c_h: 1.1 })?;
    Ok(du.iter().map(|s| s.max_abs()).fold(0.0, f64::max))
}

pub fn freestream_suite() -> Result<Vec<CheckRow>> {
    let sources = [
        SourceConfig::none(),
        SourceConfig::powell(),
        SourceConfig::janhunen(),
        SourceConfig::bb(),
        SourceConfig::custom(0.3, -0.7, 1.1),
    ];
    let mut rows = Vec::new();
    for (dim, degree, lumped) in [(1, 1, true), (1, 3, false), (2, 1, true), (2, 1, false), (2, 2, false), (2, 3, true)] {
        let mut values = Vec::new();
        for flux in ["gp", "gps", "resistive", "monolithic", "none"] {
            for source in sources {
                for glm in ["none", "dedner", "9wave", "cons"] {
                    values.push(free_stream_residual(flux, source, glm, degree, lumped, dim)?);
                }
            }
        }
        let mass = if lumped { "lumped" } else { "consistent" };
        rows.push(CheckRow::new("freestream", format!("{dim}D P{degree} {mass}, all flux/source/GLM"), Expect::AtMost(1e-13), values));
    }
    Ok(rows)
}
