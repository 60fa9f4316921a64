//! Advective and viscous flux kernels.
//!
//! A [`FluxBlock`] is indexed direction first: `momentum[i][j]` is the flux of
//! `m_j` through a face with normal `e_i`.

use crate::error::{MhdError, Result};
use crate::registry::Registry;
use crate::scalar::Scalar;
use crate::state::{dot, ConservedGradient, ConservedState, EnergyForm, Mat3, StateGradient, Vec3};
use crate::thermo::EosModel;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluxBlock<S> {
    pub mass: Vec3<S>,
    pub momentum: Mat3<S>,
    pub energy: Vec3<S>,
    pub magnetic: Mat3<S>,
    pub phi: Vec3<S>,
}

impl<S: Scalar> FluxBlock<S> {
    pub fn zero() -> Self {
        Self {
            mass: [S::zero(); 3],
            momentum: [[S::zero(); 3]; 3],
            energy: [S::zero(); 3],
            magnetic: [[S::zero(); 3]; 3],
            phi: [S::zero(); 3],
        }
    }

    /// Flux through a face with normal `e_dir`, one entry per equation.
    pub fn column(&self, dir: usize) -> ConservedState<S> {
        ConservedState {
            rho: self.mass[dir],
            m: self.momentum[dir],
            energy: self.energy[dir],
            b: self.magnetic[dir],
            phi: self.phi[dir],
        }
    }

    pub fn set_column(&mut self, dir: usize, c: &ConservedState<S>) {
        self.mass[dir] = c.rho;
        self.momentum[dir] = c.m;
        self.energy[dir] = c.energy;
        self.magnetic[dir] = c.b;
        self.phi[dir] = c.phi;
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (0..3)
            .map(|d| (self.column(d) - o.column(d)).max_abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscosityCoefficients {
    pub kappa: f64,
    pub mu: f64,
    pub eta: f64,
    pub lambda: f64,
    pub kappa_t: f64,
    pub epsilon: f64,
}

impl ViscosityCoefficients {
    /// Every coefficient set to `eps` except the bulk viscosity.
    pub fn uniform(eps: f64) -> Self {
        Self { kappa: eps, mu: eps, eta: eps, lambda: 0.0, kappa_t: eps, epsilon: eps }
    }
}

fn check_density<S: Scalar>(u: &ConservedState<S>) -> Result<()> {
    let rho = u.rho.value();
    if rho > 0.0 {
        Ok(())
    } else {
        Err(MhdError::NonPositiveDensity { rho, location: "flux evaluation".into() })
    }
}

pub fn advective_flux<S: Scalar>(
    u: &ConservedState<S>,
    eos: &EosModel,
    form: EnergyForm,
) -> Result<FluxBlock<S>> {
    check_density(u)?;
    Ok(advective_kernel(u, eos, form))
}

/// `F_E + F_B` without the density check.
pub fn advective_kernel<S: Scalar>(u: &ConservedState<S>, eos: &EosModel, form: EnergyForm) -> FluxBlock<S> {
    let vel = u.velocity();
    let e = u.specific_internal_energy(form);
    let p = eos.pressure_of(u.rho, e);
    let half_b2 = dot(&u.b, &u.b).scale(0.5);
    let ptot = p + half_b2;
    let ub = dot(&vel, &u.b);
    let etot = u.physical_energy(form) + ptot;
    let mut f = FluxBlock::zero();
    for i in 0..3 {
        f.mass[i] = u.m[i];
        f.energy[i] = vel[i] * etot - u.b[i] * ub;
        for j in 0..3 {
            f.momentum[i][j] = u.m[i] * vel[j] - u.b[i] * u.b[j];
            f.magnetic[i][j] = vel[i] * u.b[j] - u.b[i] * vel[j];
        }
        f.momentum[i][i] += ptot;
    }
    f
}

fn sym_grad<S: Scalar>(g: &Mat3<S>) -> Mat3<S> {
    std::array::from_fn(|i| std::array::from_fn(|j| (g[i][j] + g[j][i]).scale(0.5)))
}

/// `k = η(∇B - ∇Bᵀ)`.
fn resistive_block<S: Scalar>(g: &StateGradient<S>, eta: f64) -> Mat3<S> {
    std::array::from_fn(|i| std::array::from_fn(|j| (g.grad_b[i][j] - g.grad_b[j][i]).scale(eta)))
}

fn mat_vec<S: Scalar>(a: &Mat3<S>, v: &Vec3<S>) -> Vec3<S> {
    std::array::from_fn(|i| a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2])
}

fn gp_family<S: Scalar>(
    u: &ConservedState<S>,
    g: &StateGradient<S>,
    nu: &ViscosityCoefficients,
    symmetric: bool,
) -> FluxBlock<S> {
    let vel = u.velocity();
    let f: Vec3<S> = g.grad_rho.map(|v| v.scale(nu.kappa));
    let mu_rho = u.rho.scale(nu.mu);
    let gs = sym_grad(&g.grad_u).map(|row| row.map(|v| v * mu_rho));
    let k = resistive_block(g, nu.eta);
    let gu = mat_vec(&gs, &vel);
    let kb = mat_vec(&k, &u.b);
    let half_u2 = dot(&vel, &vel).scale(0.5);
    let mut out = FluxBlock::zero();
    for i in 0..3 {
        out.mass[i] = f[i];
        out.energy[i] = g.grad_rho_e[i].scale(nu.kappa) + half_u2 * f[i] + gu[i] + kb[i];
        for j in 0..3 {
            let diffusion = if symmetric {
                (f[i] * vel[j] + vel[i] * f[j]).scale(0.5)
            } else {
                f[i] * vel[j]
            };
            out.momentum[i][j] = gs[i][j] + diffusion;
            out.magnetic[i][j] = k[i][j];
        }
    }
    out
}

pub fn gp_flux<S: Scalar>(
    u: &ConservedState<S>,
    g: &StateGradient<S>,
    nu: &ViscosityCoefficients,
) -> Result<FluxBlock<S>> {
    check_density(u)?;
    Ok(gp_family(u, g, nu, false))
}

pub fn gps_flux<S: Scalar>(
    u: &ConservedState<S>,
    g: &StateGradient<S>,
    nu: &ViscosityCoefficients,
) -> Result<FluxBlock<S>> {
    check_density(u)?;
    Ok(gp_family(u, g, nu, true))
}

pub fn resistive_flux<S: Scalar>(
    u: &ConservedState<S>,
    g: &StateGradient<S>,
    nu: &ViscosityCoefficients,
    eos: &EosModel,
    form: EnergyForm,
) -> Result<FluxBlock<S>> {
    check_density(u)?;
    let vel = u.velocity();
    let e = u.specific_internal_energy(form);
    let grad_t = g.grad_e(u.rho, e).map(|v| v.scale(eos.gamma() - 1.0));
    let sg = sym_grad(&g.grad_u);
    let div = g.div_u().scale(nu.lambda);
    let tau: Mat3<S> = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let d = if i == j { div } else { S::zero() };
            sg[i][j].scale(2.0 * nu.mu) + d
        })
    });
    let k = resistive_block(g, nu.eta);
    let tu = mat_vec(&tau, &vel);
    let kb = mat_vec(&k, &u.b);
    let mut out = FluxBlock::zero();
    for i in 0..3 {
        out.energy[i] = tu[i] + grad_t[i].scale(nu.kappa_t) + kb[i];
        out.momentum[i] = tau[i];
        out.magnetic[i] = k[i];
    }
    Ok(out)
}

/// `ε∇U` applied to every conserved component.
pub fn monolithic_flux<S: Scalar>(du: &ConservedGradient<S>, epsilon: f64) -> FluxBlock<S> {
    let mut out = FluxBlock::zero();
    for (i, d) in du.iter().enumerate() {
        out.set_column(i, &d.scaled(epsilon));
    }
    out
}

/// `A = u⊗f - f⊗u` with `f = κ∇ρ`.
pub fn antisymmetric_mass_tensor<S: Scalar>(vel: &Vec3<S>, f: &Vec3<S>) -> Mat3<S> {
    std::array::from_fn(|k| std::array::from_fn(|j| vel[k] * f[j] - f[k] * vel[j]))
}

/// `½(∇·A)·u`, where `div_a[j] = Σ_k ∂_k A_kj`.
pub fn gps_energy_compensation<S: Scalar>(vel: &Vec3<S>, div_a: &Vec3<S>) -> S {
    dot(div_a, vel).scale(0.5)
}

/// A viscous regularization, evaluated pointwise from a state and its conserved gradient.
pub trait ViscousFlux<S: Scalar>: Send + Sync {
    fn name(&self) -> &'static str;

    fn flux(
        &self,
        u: &ConservedState<S>,
        du: &ConservedGradient<S>,
        nu: &ViscosityCoefficients,
        eos: &EosModel,
        form: EnergyForm,
    ) -> Result<FluxBlock<S>>;

    /// Whether the energy equation carries the nonconservative GP^s term.
    fn energy_compensation(&self) -> bool {
        false
    }
}

pub struct Gp;
pub struct GpSymmetric;
pub struct Resistive;
pub struct Monolithic;
pub struct Inviscid;

impl<S: Scalar> ViscousFlux<S> for Gp {
    fn name(&self) -> &'static str {
        "gp"
    }
    fn flux(
        &self,
        u: &ConservedState<S>,
        du: &ConservedGradient<S>,
        nu: &ViscosityCoefficients,
        _eos: &EosModel,
        form: EnergyForm,
    ) -> Result<FluxBlock<S>> {
        check_density(u)?;
        gp_flux(u, &StateGradient::from_conserved(u, du, form), nu)
    }
}

impl<S: Scalar> ViscousFlux<S> for GpSymmetric {
    fn name(&self) -> &'static str {
        "gps"
    }
    fn flux(
        &self,
        u: &ConservedState<S>,
        du: &ConservedGradient<S>,
        nu: &ViscosityCoefficients,
        _eos: &EosModel,
        form: EnergyForm,
    ) -> Result<FluxBlock<S>> {
        check_density(u)?;
        gps_flux(u, &StateGradient::from_conserved(u, du, form), nu)
    }
    fn energy_compensation(&self) -> bool {
        true
    }
}

impl<S: Scalar> ViscousFlux<S> for Resistive {
    fn name(&self) -> &'static str {
        "resistive"
    }
    fn flux(
        &self,
        u: &ConservedState<S>,
        du: &ConservedGradient<S>,
        nu: &ViscosityCoefficients,
        eos: &EosModel,
        form: EnergyForm,
    ) -> Result<FluxBlock<S>> {
        check_density(u)?;
        resistive_flux(u, &StateGradient::from_conserved(u, du, form), nu, eos, form)
    }
}

impl<S: Scalar> ViscousFlux<S> for Monolithic {
    fn name(&self) -> &'static str {
        "monolithic"
    }
    fn flux(
        &self,
        _u: &ConservedState<S>,
        du: &ConservedGradient<S>,
        nu: &ViscosityCoefficients,
        _eos: &EosModel,
        _form: EnergyForm,
    ) -> Result<FluxBlock<S>> {
        Ok(monolithic_flux(du, nu.epsilon))
    }
}

impl<S: Scalar> ViscousFlux<S> for Inviscid {
    fn name(&self) -> &'static str {
        "none"
    }
    fn flux(
        &self,
        _u: &ConservedState<S>,
        _du: &ConservedGradient<S>,
        _nu: &ViscosityCoefficients,
        _eos: &EosModel,
        _form: EnergyForm,
    ) -> Result<FluxBlock<S>> {
        Ok(FluxBlock::zero())
    }
}

pub fn viscous_flux_registry<S: Scalar + 'static>() -> Registry<dyn ViscousFlux<S>> {
    Registry::<dyn ViscousFlux<S>>::new("viscous flux")
        .with("gp", || Box::new(Gp))
        .with("gps", || Box::new(GpSymmetric))
        .with("resistive", || Box::new(Resistive))
        .with("monolithic", || Box::new(Monolithic))
        .with("none", || Box::new(Inviscid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Primitive;
    use crate::thermo::quadratic_form;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_grad() -> StateGradient<f64> {
        StateGradient {
            grad_rho: [0.0; 3],
            grad_u: [[0.0; 3]; 3],
            grad_rho_e: [0.0; 3],
            grad_b: [[0.0; 3]; 3],
            grad_phi: [0.0; 3],
        }
    }

    fn state(rho: f64, u: [f64; 3], p: f64, b: [f64; 3]) -> ConservedState<f64> {
        Primitive { rho, u, p, b, phi: 0.0 }.to_conserved(1.4, EnergyForm::Total)
    }

    fn random_vec(rng: &mut ChaCha8Rng) -> [f64; 3] {
        std::array::from_fn(|_| rng.gen_range(-1.0..1.0))
    }

    fn random_mat(rng: &mut ChaCha8Rng) -> Mat3<f64> {
        std::array::from_fn(|_| random_vec(rng))
    }

    fn random_state(rng: &mut ChaCha8Rng) -> ConservedState<f64> {
        state(rng.gen_range(0.2..3.0), random_vec(rng), rng.gen_range(0.2..3.0), random_vec(rng))
    }

    fn random_grad(rng: &mut ChaCha8Rng) -> StateGradient<f64> {
        StateGradient {
            grad_rho: random_vec(rng),
            grad_u: random_mat(rng),
            grad_rho_e: random_vec(rng),
            grad_b: random_mat(rng),
            grad_phi: random_vec(rng),
        }
    }

    fn eos() -> EosModel {
        EosModel::new(1.4).unwrap()
    }

    #[test]
    fn stationary_gas_flux() {
        let f = advective_flux(&state(1.0, [0.0; 3], 1.0, [0.0; 3]), &eos(), EnergyForm::Total).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(f.momentum[i][j], if i == j { 1.0 } else { 0.0 });
                assert_eq!(f.magnetic[i][j], 0.0);
            }
        }
    }

    #[test]
    fn maxwell_stress_enters_momentum() {
        let u = state(1.0, [0.0; 3], 0.0, [1.0, 0.0, 0.0]);
        let f = advective_flux(&u, &eos(), EnergyForm::Total).unwrap();
        assert!((f.momentum[0][0] + 0.5).abs() < 1e-15);
        assert!((f.momentum[1][1] - 0.5).abs() < 1e-15);
        assert!((f.momentum[2][2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn advective_magnetic_diagonal_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f = advective_flux(&random_state(&mut rng), &eos(), EnergyForm::Total).unwrap();
            for i in 0..3 {
                assert_eq!(f.magnetic[i][i], 0.0);
            }
        }
        let bad = ConservedState { rho: -1.0, ..ConservedState::zero() };
        assert!(advective_flux(&bad, &eos(), EnergyForm::Total).is_err());
    }

    #[test]
    fn gp_examples() {
        let u = state(1.2, [0.3, -0.1, 0.2], 0.8, [0.1, 0.4, -0.3]);
        let nu = ViscosityCoefficients::uniform(0.3);
        assert_eq!(gp_flux(&u, &zero_grad(), &nu).unwrap(), FluxBlock::zero());

        let still = state(1.0, [0.0; 3], 1.0, [0.0; 3]);
        let mut g = zero_grad();
        g.grad_rho = [2.0, 0.0, 0.0];
        g.grad_rho_e = [0.5, -1.0, 0.0];
        let nu = ViscosityCoefficients { kappa: 0.1, ..ViscosityCoefficients::uniform(0.0) };
        let f = gp_flux(&still, &g, &nu).unwrap();
        assert!((f.mass[0] - 0.2).abs() < 1e-15 && f.mass[1] == 0.0);
        assert!((f.energy[0] - 0.05).abs() < 1e-15 && (f.energy[1] + 0.1).abs() < 1e-15);

        let mut g = zero_grad();
        g.grad_b[0][1] = 1.0;
        let nu = ViscosityCoefficients { eta: 1.0, ..ViscosityCoefficients::uniform(0.0) };
        let f = gp_flux(&still, &g, &nu).unwrap();
        assert_eq!(f.magnetic[0][1], 1.0);
        assert_eq!(f.magnetic[1][0], -1.0);
    }

    #[test]
    fn gps_symmetrizes_mass_diffusion() {
        let u = state(1.0, [0.0, 1.0, 0.0], 1.0, [0.0; 3]);
        let mut g = zero_grad();
        g.grad_rho = [1.0, 0.0, 0.0];
        let nu = ViscosityCoefficients { kappa: 1.0, ..ViscosityCoefficients::uniform(0.0) };
        let s = gps_flux(&u, &g, &nu).unwrap();
        let p = gp_flux(&u, &g, &nu).unwrap();
        assert_eq!([s.momentum[0][1], s.momentum[1][0]], [0.5, 0.5]);
        assert_eq!([p.momentum[0][1], p.momentum[1][0]], [1.0, 0.0]);
    }

    #[test]
    fn gps_matches_gp_for_one_dimensional_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let u = state(rng.gen_range(0.2..2.0), [rng.gen_range(-1.0..1.0), 0.0, 0.0], 1.0, [
                rng.gen_range(-1.0..1.0),
                0.0,
                0.0,
            ]);
            let mut g = zero_grad();
            g.grad_rho[0] = rng.gen_range(-1.0..1.0);
            g.grad_u[0][0] = rng.gen_range(-1.0..1.0);
            g.grad_rho_e[0] = rng.gen_range(-1.0..1.0);
            g.grad_b[0][0] = rng.gen_range(-1.0..1.0);
            let nu = ViscosityCoefficients::uniform(rng.gen_range(0.0..1.0));
            let a = gp_flux(&u, &g, &nu).unwrap();
            let b = gps_flux(&u, &g, &nu).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }

    #[test]
    fn gps_momentum_block_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let f = gps_flux(&random_state(&mut rng), &random_grad(&mut rng), &ViscosityCoefficients::uniform(0.7))
                .unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    assert!((f.momentum[i][j] - f.momentum[j][i]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn compensation_examples() {
        let v = [0.3, 0.4, 0.0];
        assert_eq!(gps_energy_compensation(&v, &[0.0; 3]), 0.0);
        let f = [0.6, 0.8, 0.0];
        let a = antisymmetric_mass_tensor(&v, &f);
        assert!(a.iter().flatten().all(|x| x.abs() < 1e-16));
    }

    #[test]
    fn compensation_matches_hand_differentiated_field() {
        // u = (y, x), ρ = x²/2, κ = 1: f = (x, 0), A_12 = -x², A_21 = x².
        // ∇·A = (∂_2 A_21, ∂_1 A_12) = (0, -2x), so the energy term is ½(-2x)·x = -x².
        let tensor = |x: f64, y: f64| antisymmetric_mass_tensor(&[y, x, 0.0], &[x, 0.0, 0.0]);
        let (x, y, h) = (0.4, 0.7, 1e-5);
        let mut div = [0.0; 3];
        for j in 0..3 {
            div[j] = (tensor(x + h, y)[0][j] - tensor(x - h, y)[0][j]) / (2.0 * h)
                + (tensor(x, y + h)[1][j] - tensor(x, y - h)[1][j]) / (2.0 * h);
        }
        let got = gps_energy_compensation(&[y, x, 0.0], &div);
        assert!((got + x * x).abs() < 1e-9);
        // u = (y, 0) with ρ = x keeps u parallel to ∇ρ along x, so A vanishes identically.
        assert!(antisymmetric_mass_tensor(&[y, 0.0, 0.0], &[1.0, 0.0, 0.0]).iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn resistive_examples() {
        let u = state(1.0, [1.0, 0.0, 0.0], 1.0, [0.0; 3]);
        let mut g = zero_grad();
        g.grad_u[0][0] = 1.0;
        let nu = ViscosityCoefficients { mu: 1.0, ..ViscosityCoefficients::uniform(0.0) };
        let f = resistive_flux(&u, &g, &nu, &eos(), EnergyForm::Total).unwrap();
        assert_eq!(f.momentum[0], [2.0, 0.0, 0.0]);
        assert_eq!(f.energy, [2.0, 0.0, 0.0]);
        assert_eq!(resistive_flux(&u, &zero_grad(), &nu, &eos(), EnergyForm::Total).unwrap(), FluxBlock::zero());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let f = resistive_flux(
                &random_state(&mut rng),
                &random_grad(&mut rng),
                &ViscosityCoefficients::uniform(0.5),
                &eos(),
                EnergyForm::Total,
            )
            .unwrap();
            assert_eq!(f.mass, [0.0; 3]);
        }
    }

    #[test]
    fn monolithic_examples() {
        let mut du = [ConservedState::zero(); 3];
        du[0].rho = 1.0;
        assert_eq!(monolithic_flux(&du, 0.0), FluxBlock::zero());
        assert_eq!(monolithic_flux(&du, 1.0).mass, [1.0, 0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let u = random_state(&mut rng);
        let du: ConservedGradient<f64> =
            std::array::from_fn(|_| ConservedState::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0))));
        let nu = ViscosityCoefficients::uniform(0.4);
        let m = Monolithic.flux(&u, &du, &nu, &eos(), EnergyForm::Total).unwrap();
        let g = Gp.flux(&u, &du, &nu, &eos(), EnergyForm::Total).unwrap();
        assert!(m.max_abs_diff(&g) > 1e-3);
    }

    #[test]
    fn viscous_magnetic_block_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let reg = viscous_flux_registry::<f64>();
        for name in ["gp", "gps", "resistive"] {
            let flux = reg.create(name).unwrap();
            for _ in 0..200 {
                let u = random_state(&mut rng);
                let du: ConservedGradient<f64> = std::array::from_fn(|_| {
                    ConservedState::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
                });
                let f = flux.flux(&u, &du, &ViscosityCoefficients::uniform(0.9), &eos(), EnergyForm::Total).unwrap();
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((f.magnetic[i][j] + f.magnetic[j][i]).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn entropy_production_sign_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100_000 {
            let g = random_grad(&mut rng);
            let eta = rng.gen_range(0.0..2.0);
            let mu = rng.gen_range(0.0..2.0);
            let rho = rng.gen_range(0.01..10.0);
            let k = resistive_block(&g, eta);
            let s = sym_grad(&g.grad_u);
            let mut kb = 0.0;
            let mut su = 0.0;
            let mut ss = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    kb += k[i][j] * g.grad_b[i][j];
                    su += mu * rho * s[i][j] * g.grad_u[i][j];
                    ss += mu * rho * s[i][j] * s[i][j];
                }
            }
            assert!(kb >= -1e-14);
            assert!(su >= -1e-14);
            // ∇^s u : ∇u = ∇^s u : ∇^s u
            assert!((su - ss).abs() <= 1e-12 * (1.0 + ss));
        }
    }

    #[test]
    fn entropy_flux_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let gamma = [1.4, 5.0 / 3.0, 2.0][rng.gen_range(0..3)];
            let eos = EosModel::new(gamma).unwrap();
            let rho = rng.gen_range(0.01..10.0);
            let e = rng.gen_range(0.01..10.0);
            let kappa = rng.gen_range(0.01..2.0);
            let grho = random_vec(&mut rng);
            let ge = random_vec(&mut rng);
            let d = eos.derivative_bundle(rho, e).unwrap();
            for i in 0..3 {
                let f = kappa * grho[i];
                let l = kappa * (e * grho[i] + rho * ge[i]);
                let gs = d.s_rho * grho[i] + d.s_e * ge[i];
                let rhs = (e * d.s_e - rho * d.s_rho) / d.s_e * f + kappa * rho / d.s_e * gs;
                assert!((l - rhs).abs() <= 1e-12 * (1.0 + l.abs()));
            }
        }
    }

    /// Kernel `-f·∇(e s_e - ρ s_ρ) + l·∇s_e + κ∇ρ·∇s` evaluated from its definition.
    fn j1_direct(eos: &EosModel, rho: f64, e: f64, kappa: f64, grho: [f64; 3], ge: [f64; 3]) -> f64 {
        let d = eos.derivative_bundle(rho, e).unwrap();
        let gm1 = eos.gamma() - 1.0;
        let mut acc = 0.0;
        for i in 0..3 {
            let f = kappa * grho[i];
            let l = kappa * (e * grho[i] + rho * ge[i]);
            // e s_e - ρ s_ρ = 1/(γ-1) + 1 is constant for the ideal gas.
            let grad_combo = 0.0;
            let grad_se = -ge[i] / (gm1 * e * e);
            let grad_s = d.s_rho * grho[i] + d.s_e * ge[i];
            acc += -f * grad_combo + l * grad_se + kappa * grho[i] * grad_s;
        }
        acc
    }

    #[test]
    fn entropy_production_forms_are_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10_000 {
            let gamma = [1.4, 5.0 / 3.0, 2.0][rng.gen_range(0..3)];
            let eos = EosModel::new(gamma).unwrap();
            let rho = rng.gen_range(0.01..10.0);
            let e = rng.gen_range(0.01..10.0);
            let kappa = rng.gen_range(0.01..2.0);
            let grho = random_vec(&mut rng);
            let ge = random_vec(&mut rng);
            let m = eos.dissipation_matrix(rho, e).unwrap();
            let j3 = eos.j3_matrix(rho, e).unwrap();
            let mut j1 = 0.0;
            let mut j2 = 0.0;
            for i in 0..3 {
                j1 += kappa * quadratic_form(&m, [grho[i], ge[i]]);
                j2 += kappa * quadratic_form(&j3, [grho[i], ge[i]]);
            }
            let direct = j1_direct(&eos, rho, e, kappa, grho, ge);
            assert!((direct - j1).abs() <= 1e-10 * j1.abs());
            assert!(j1 < 0.0);
            assert!(j2 < 0.0);
        }
    }

    #[test]
    fn generalized_entropy_production_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..100_000 {
            let gamma = [1.4, 5.0 / 3.0, 2.0][rng.gen_range(0..3)];
            let eos = EosModel::new(gamma).unwrap();
            let cp = eos.cp();
            let rho = rng.gen_range(0.01..10.0);
            let e = rng.gen_range(0.01..10.0);
            let kappa = rng.gen_range(0.01..2.0);
            let grho = random_vec(&mut rng);
            let ge = random_vec(&mut rng);
            // Admissible φ: φ' > 0, φ'' < φ'/c_p.
            let phi1 = rng.gen_range(0.01..5.0);
            let phi2 = phi1 / cp - rng.gen_range(1e-6..5.0);
            assert!(crate::thermo::generalized_entropy_admissible(phi1, phi2, gamma));
            let d = eos.derivative_bundle(rho, e).unwrap();
            let grad_s2: f64 = (0..3).map(|i| (d.s_rho * grho[i] + d.s_e * ge[i]).powi(2)).sum();
            let j1 = j1_direct(&eos, rho, e, kappa, grho, ge);
            let production = -kappa * rho * phi2 * grad_s2 - phi1 * j1;
            assert!(production >= -1e-12 * (1.0 + j1.abs() * phi1));
        }
    }
}
