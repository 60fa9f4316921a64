//! Randomized rotational and Galilean invariance checks with exact derivatives.

use rand::Rng;

use crate::flux::{advective_kernel, antisymmetric_mass_tensor, ViscosityCoefficients, ViscousFlux};
use crate::scalar::{Dual, Dual4, Dual4x4, Scalar};
use crate::sources::{psi_source, GlmCleaning, GlmParams, SourceConfig};
use crate::state::{ConservedGradient, ConservedState, EnergyForm, Mat3, Primitive, Vec3};
use crate::thermo::EosModel;

/// `R = R_ψ R_θ`, with `ψ` about `x2` and `θ` about `x3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationSpec {
    pub psi: f64,
    pub theta: f64,
}

impl RotationSpec {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Self {
            psi: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            theta: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
        }
    }

    pub fn matrix(&self) -> Mat3<f64> {
        let (sp, cp) = self.psi.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        let r_psi = [[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]];
        let r_theta = [[ct, st, 0.0], [-st, ct, 0.0], [0.0, 0.0, 1.0]];
        std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| r_psi[i][k] * r_theta[k][j]).sum()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GalileanBoost {
    pub v: f64,
}

fn rotate<S: Scalar>(r: &Mat3<f64>, v: &Vec3<S>) -> Vec3<S> {
    std::array::from_fn(|i| v[0].scale(r[i][0]) + v[1].scale(r[i][1]) + v[2].scale(r[i][2]))
}

fn transpose(r: &Mat3<f64>) -> Mat3<f64> {
    std::array::from_fn(|i| std::array::from_fn(|j| r[j][i]))
}

/// Block transform `T`: rotates momentum and magnetic field.
pub fn transform<S: Scalar>(r: &Mat3<f64>, u: &ConservedState<S>) -> ConservedState<S> {
    ConservedState { m: rotate(r, &u.m), b: rotate(r, &u.b), ..*u }
}

pub fn inverse_transform<S: Scalar>(r: &Mat3<f64>, u: &ConservedState<S>) -> ConservedState<S> {
    transform(&transpose(r), u)
}

/// Linear part of the boost acting on conserved variables (and on their rates).
pub fn boost<S: Scalar>(v: f64, u: &ConservedState<S>) -> ConservedState<S> {
    let mut out = *u;
    out.m[0] = u.m[0] - u.rho.scale(v);
    out.energy = u.energy - u.m[0].scale(v) + u.rho.scale(0.5 * v * v);
    out
}

pub fn random_state<R: Rng>(rng: &mut R, gamma: f64, form: EnergyForm) -> ConservedState<f64> {
    let v = |rng: &mut R| std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    Primitive {
        rho: rng.gen_range(0.3..2.0),
        u: v(rng),
        p: rng.gen_range(0.3..2.0),
        b: v(rng),
        phi: rng.gen_range(-0.5..0.5),
    }
    .to_conserved(gamma, form)
}

pub fn random_gradient<R: Rng>(rng: &mut R) -> ConservedState<f64> {
    ConservedState::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

pub fn check_advective_rotation(u: &ConservedState<f64>, rot: &RotationSpec, eos: &EosModel, form: EnergyForm) -> f64 {
    let r = rot.matrix();
    let f = advective_kernel(u, eos, form);
    let mut lhs = ConservedState::zero();
    for i in 0..3 {
        lhs.axpy(r[0][i], &f.column(i));
    }
    let rhs = inverse_transform(&r, &advective_kernel(&transform(&r, u), eos, form).column(0));
    (lhs - rhs).max_abs()
}

/// Rotation identity for a single-direction gradient: `T F^{(1)}_1(U) = Σ_k R_k1 F^{(1)}_k(TU)`, where the superscript marks
/// the flux driven by `∂_1 U` only.
pub fn check_viscous_rotation_single(
    u: &ConservedState<f64>,
    du1: &ConservedState<f64>,
    flux: &dyn ViscousFlux<f64>,
    nu: &ViscosityCoefficients,
    rot: &RotationSpec,
    eos: &EosModel,
    form: EnergyForm,
) -> f64 {
    let r = rot.matrix();
    let zero = ConservedState::zero();
    let lhs = transform(&r, &flux.flux(u, &[*du1, zero, zero], nu, eos, form).expect("positive density").column(0));
    let tu = transform(&r, u);
    let tdu = transform(&r, du1);
    let grad: ConservedGradient<f64> = std::array::from_fn(|m| tdu.scaled(r[m][0]));
    let f = flux.flux(&tu, &grad, nu, eos, form).expect("positive density");
    let mut rhs = ConservedState::zero();
    for k in 0..3 {
        rhs.axpy(r[k][0], &f.column(k));
    }
    (lhs - rhs).max_abs()
}

/// Rotation identity of the source family, restricted to the `∂_{x1}` part.
pub fn check_psi_rotation(u: &ConservedState<f64>, du1: &ConservedState<f64>, cfg: &SourceConfig, rot: &RotationSpec) -> f64 {
    let r = rot.matrix();
    let lhs = psi_source(u, du1.b[0], cfg);
    let tu = transform(&r, u);
    let tdb = rotate(&r, &du1.b);
    let mut acc = ConservedState::zero();
    for k in 0..3 {
        acc.axpy(r[k][0], &psi_source(&tu, tdb[k], cfg));
    }
    (lhs - inverse_transform(&r, &acc)).max_abs()
}

#[derive(Clone, Copy, Debug)]
struct Mode {
    amp: f64,
    k: [f64; 4],
    phase: f64,
}

/// Smooth closed-form primitive fields over `(t, x, y, z)` built from random Fourier modes.
#[derive(Clone, Debug)]
pub struct AnalyticField {
    base: [f64; 9],
    modes: Vec<[Mode; 3]>,
    gamma: f64,
    form: EnergyForm,
}

impl AnalyticField {
    /// Components: ρ, u (3), p, B (3), Φ. Density and pressure stay above 0.8.
    pub fn random<R: Rng>(rng: &mut R, gamma: f64, form: EnergyForm) -> Self {
        let mut base = [0.0; 9];
        base[0] = 1.5;
        base[4] = 1.5;
        for (c, b) in base.iter_mut().enumerate() {
            if c != 0 && c != 4 {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
        let modes = (0..9)
            .map(|_| {
                std::array::from_fn(|_| Mode {
                    amp: rng.gen_range(-0.2..0.2),
                    k: std::array::from_fn(|_| rng.gen_range(-2.0..2.0)),
                    phase: rng.gen_range(0.0..6.3),
                })
            })
            .collect();
        Self { base, modes, gamma, form }
    }

    pub fn form(&self) -> EnergyForm {
        self.form
    }

    pub fn eval<S: Scalar>(&self, x: &[S; 4]) -> ConservedState<S> {
        let comp = |c: usize| {
            let mut v = S::from_f64(self.base[c]);
            for m in &self.modes[c] {
                let mut arg = S::from_f64(m.phase);
                for d in 0..4 {
                    arg += x[d].scale(m.k[d]);
                }
                v += arg.sin().scale(m.amp);
            }
            v
        };
        let rho = comp(0);
        let u = [comp(1), comp(2), comp(3)];
        let p = comp(4);
        let b = [comp(5), comp(6), comp(7)];
        let phi = comp(8);
        let half = 0.5;
        let mut energy = p.scale(1.0 / (self.gamma - 1.0))
            + rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).scale(half)
            + (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).scale(half);
        if self.form == EnergyForm::TotalWithPhi {
            energy += (phi * phi).scale(half);
        }
        ConservedState { rho, m: u.map(|v| rho * v), energy, b, phi }
    }
}

/// Coordinates seeded for exact first and second derivatives.
pub fn seeded_point(x: [f64; 4]) -> [Dual4x4; 4] {
    std::array::from_fn(|c| Dual::variable(Dual::variable(x[c], c), c))
}

fn value_part(u: &ConservedState<Dual4x4>) -> ConservedState<Dual4> {
    u.map_to(|v| v.re)
}

fn derivative_part(u: &ConservedState<Dual4x4>, c: usize) -> ConservedState<Dual4> {
    u.map_to(|v| v.eps[c])
}

fn d_dx(u: &ConservedState<Dual4>, c: usize) -> ConservedState<f64> {
    u.map_to(|v| v.eps[c])
}

impl<S: Scalar> ConservedState<S> {
    fn map_to<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ConservedState<T> {
        let a = self.to_array();
        ConservedState::from_array(std::array::from_fn(|k| f(&a[k])))
    }
}

/// Everything needed to evaluate the strong residual of the regularized system.
pub struct ResidualModel<'a> {
    pub flux: &'a dyn ViscousFlux<Dual4>,
    pub glm: &'a dyn GlmCleaning<f64>,
    pub source: SourceConfig,
    pub nu: ViscosityCoefficients,
    pub glm_params: GlmParams,
    pub eos: EosModel,
}

/// `∂_t U + ∇·F_adv - ∇·F_V - F^E - Ψ - Υ` at a point, from a field seeded with
/// coordinates `(t, x, y, z)`.
pub fn strong_residual(u_dd: &ConservedState<Dual4x4>, model: &ResidualModel) -> ConservedState<f64> {
    let form = model.glm.energy_form();
    let u = value_part(u_dd);
    let du: [ConservedState<Dual4>; 4] = std::array::from_fn(|c| derivative_part(u_dd, c));
    let u0 = u.map_to(|v| v.re);
    let mut res = du[0].map_to(|v| v.re);

    let fa = advective_kernel(&u, &model.eos, form);
    let grad: ConservedGradient<Dual4> = [du[1], du[2], du[3]];
    let fv = model.flux.flux(&u, &grad, &model.nu, &model.eos, form).expect("positive density");
    for i in 0..3 {
        res += d_dx(&fa.column(i), i + 1);
        res -= d_dx(&fv.column(i), i + 1);
    }

    if model.flux.energy_compensation() {
        let vel = u.velocity();
        let f: Vec3<Dual4> = std::array::from_fn(|i| grad[i].rho.scale(model.nu.kappa));
        let a = antisymmetric_mass_tensor(&vel, &f);
        let mut comp = 0.0;
        for j in 0..3 {
            let div_j: f64 = (0..3).map(|k| a[k][j].eps[k + 1]).sum();
            comp += 0.5 * div_j * vel[j].re;
        }
        res.energy -= comp;
    }

    let div_b: f64 = (0..3).map(|i| grad[i].b[i].re).sum();
    let grad_phi: Vec3<f64> = std::array::from_fn(|i| grad[i].phi.re);
    res -= psi_source(&u0, div_b, &model.source);
    res -= model.glm.source(&u0, &grad_phi, div_b, &model.glm_params);
    if !model.glm.active() {
        // Φ carries no equation without cleaning.
        res.phi = 0.0;
    }
    res
}

/// Two-frame residual difference `‖G ℛ₁ − ℛ₂‖_∞` at one space-time point.
pub fn check_galilean(field: &AnalyticField, model: &ResidualModel, b: &GalileanBoost, x: [f64; 4]) -> f64 {
    let r1 = strong_residual(&field.eval(&seeded_point(x)), model);
    // Frame 2 at (τ, ξ) = (t, x - V t, y, z); its field is G·U(τ, ξ1 + Vτ, ξ2, ξ3).
    let xi = [x[0], x[1] - b.v * x[0], x[2], x[3]];
    let s = seeded_point(xi);
    let orig = [s[0], s[1] + s[0].scale(b.v), s[2], s[3]];
    let r2 = strong_residual(&boost(b.v, &field.eval(&orig)), model);
    (boost(b.v, &r1) - r2).max_abs()
}

/// Rotation identity for the mixed divergence terms:
/// `T(∂_1 F^{(2)}_1(U) + ∂_2 F^{(1)}_2(U)) = Σ_k [R_k1 ∂_1 F^{(2)}_k(TU) + R_k2 ∂_2 F^{(1)}_k(TU)]`.
pub fn check_viscous_rotation_mixed(
    field: &AnalyticField,
    flux: &dyn ViscousFlux<Dual4>,
    nu: &ViscosityCoefficients,
    rot: &RotationSpec,
    eos: &EosModel,
    x: [f64; 4],
) -> f64 {
    let form = field.form();
    let r = rot.matrix();
    let u_dd = field.eval(&seeded_point(x));
    let w = value_part(&u_dd);
    let dw: [ConservedState<Dual4>; 4] = std::array::from_fn(|c| derivative_part(&u_dd, c));
    let zero = ConservedState::zero();
    let eval = |state: &ConservedState<Dual4>, grad: ConservedGradient<Dual4>| {
        flux.flux(state, &grad, nu, eos, form).expect("positive density")
    };

    let f_from_y = eval(&w, [zero, dw[2], zero]);
    let f_from_x = eval(&w, [dw[1], zero, zero]);
    let lhs = transform(&r, &(d_dx(&f_from_y.column(0), 1) + d_dx(&f_from_x.column(1), 2)));

    let tw = transform(&r, &w);
    let tdx = transform(&r, &dw[1]);
    let tdy = transform(&r, &dw[2]);
    let g_from_y = eval(&tw, std::array::from_fn(|m| tdy.scaled(r[m][1])));
    let g_from_x = eval(&tw, std::array::from_fn(|m| tdx.scaled(r[m][0])));
    let mut rhs = ConservedState::zero();
    for k in 0..3 {
        rhs.axpy(r[k][0], &d_dx(&g_from_y.column(k), 1));
        rhs.axpy(r[k][1], &d_dx(&g_from_x.column(k), 2));
    }
    (lhs - rhs).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::viscous_flux_registry;
    use crate::sources::glm_registry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn eos() -> EosModel {
        EosModel::new(5.0 / 3.0).unwrap()
    }

    #[test]
    fn rotation_matrix_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let r = RotationSpec::random(&mut rng).matrix();
            for i in 0..3 {
                for j in 0..3 {
                    let v: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                    assert!((v - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn advective_rotation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_state(&mut rng, 5.0 / 3.0, EnergyForm::Total);
        let id = RotationSpec { psi: 0.0, theta: 0.0 };
        assert_eq!(check_advective_rotation(&u, &id, &eos(), EnergyForm::Total), 0.0);
        let quarter = RotationSpec { psi: 0.0, theta: std::f64::consts::FRAC_PI_2 };
        assert!(check_advective_rotation(&u, &quarter, &eos(), EnergyForm::Total) <= 1e-12);
        for _ in 0..1000 {
            let u = random_state(&mut rng, 5.0 / 3.0, EnergyForm::Total);
            let rot = RotationSpec::random(&mut rng);
            assert!(check_advective_rotation(&u, &rot, &eos(), EnergyForm::Total) <= 1e-11);
        }
    }

    #[test]
    fn viscous_rotation_condition_i() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reg = viscous_flux_registry::<f64>();
        let nu = ViscosityCoefficients { lambda: 0.3, ..ViscosityCoefficients::uniform(0.7) };
        for name in ["gp", "gps", "monolithic", "resistive"] {
            let flux = reg.create(name).unwrap();
            let u = random_state(&mut rng, 5.0 / 3.0, EnergyForm::Total);
            let rot = RotationSpec::random(&mut rng);
            let zero = ConservedState::zero();
            assert!(check_viscous_rotation_single(&u, &zero, flux.as_ref(), &nu, &rot, &eos(), EnergyForm::Total) == 0.0);
            for _ in 0..200 {
                let u = random_state(&mut rng, 5.0 / 3.0, EnergyForm::Total);
                let du = random_gradient(&mut rng);
                let rot = RotationSpec::random(&mut rng);
                let r = check_viscous_rotation_single(&u, &du, flux.as_ref(), &nu, &rot, &eos(), EnergyForm::Total);
                assert!(r <= 1e-12, "{name}: {r}");
            }
        }
    }

    #[test]
    fn viscous_rotation_condition_ii() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let reg = viscous_flux_registry::<Dual4>();
        let nu = ViscosityCoefficients::uniform(0.6);
        for name in ["gp", "gps", "monolithic", "resistive"] {
            let flux = reg.create(name).unwrap();
            for _ in 0..20 {
                let field = AnalyticField::random(&mut rng, 5.0 / 3.0, EnergyForm::Total);
                let rot = RotationSpec::random(&mut rng);
                let x = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                let r = check_viscous_rotation_mixed(&field, flux.as_ref(), &nu, &rot, &eos(), x);
                assert!(r <= 1e-10, "{name}: {r}");
            }
        }
    }

    #[test]
    fn psi_rotation_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let cfg = SourceConfig::custom(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let u = random_state(&mut rng, 5.0 / 3.0, EnergyForm::Total);
            let du = random_gradient(&mut rng);
            let rot = RotationSpec::random(&mut rng);
            assert!(check_psi_rotation(&u, &du, &cfg, &rot) <= 1e-12);
        }
    }

    fn galilean_residual(flux: &str, source: SourceConfig, glm: &str, v: f64, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flux = viscous_flux_registry::<Dual4>().create(flux).unwrap();
        let glm = glm_registry::<f64>().create(glm).unwrap();
        let model = ResidualModel {
            flux: flux.as_ref(),
            glm: glm.as_ref(),
            source,
            nu: ViscosityCoefficients::uniform(0.5),
            glm_params: GlmParams { c_h: 1.3, c_r: 0.18, h: 0.1 },
            eos: eos(),
        };
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let field = AnalyticField::random(&mut rng, 5.0 / 3.0, glm.energy_form());
            let x = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            worst = worst.max(check_galilean(&field, &model, &GalileanBoost { v }, x));
        }
        worst
    }

    #[test]
    fn zero_boost_is_exact() {
        assert_eq!(galilean_residual("gps", SourceConfig::none(), "cons", 0.0, 6), 0.0);
    }

    #[test]
    fn galilean_pattern_matches_tables() {
        let p = SourceConfig::powell();
        assert!(galilean_residual("gp", p, "none", 0.7, 7) <= 1e-10);
        assert!(galilean_residual("resistive", p, "none", 0.7, 7) <= 1e-10);
        assert!(galilean_residual("monolithic", p, "none", 0.7, 7) <= 1e-10);
        assert!(galilean_residual("gps", p, "none", 0.7, 7) > 1e-3);
        assert!(galilean_residual("gp", p, "dedner", 0.7, 7) <= 1e-10);
        assert!(galilean_residual("gp", p, "9wave", 0.7, 7) <= 1e-10);
        assert!(galilean_residual("gp", p, "cons", 0.7, 7) > 1e-3);
        assert!(galilean_residual("gp", SourceConfig::janhunen(), "none", 0.7, 7) <= 1e-10);
        assert!(galilean_residual("gp", SourceConfig::bb(), "none", 0.7, 7) > 1e-3);
        assert!(galilean_residual("gp", SourceConfig::none(), "none", 0.7, 7) > 1e-3);
    }
}
