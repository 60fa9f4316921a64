//! Benchmark problem library.

use std::f64::consts::PI;

use crate::fem::BoundaryCondition;
use crate::registry::Registry;
use crate::state::Primitive;

/// Computational box; `dim == 1` ignores the second direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain {
    pub dim: usize,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub periodic: [bool; 2],
}

/// Problem-specific run defaults applied before user overrides.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemDefaults {
    pub gamma: f64,
    pub cells: Vec<usize>,
    pub boundary: BoundaryCondition,
    pub t_final: f64,
    pub visc_mode: &'static str,
    pub c_e: f64,
    pub eta_phys: f64,
    pub lumped: bool,
    pub reconnection: bool,
}

pub trait Problem: Send + Sync {
    fn name(&self) -> &'static str;
    fn domain(&self) -> Domain;
    fn defaults(&self) -> ProblemDefaults;
    /// Initial primitive state at `x`.
    fn initial(&self, x: [f64; 2]) -> Primitive;
    /// Exact solution, when known.
    fn exact(&self, _x: [f64; 2], _t: f64) -> Option<Primitive> {
        None
    }
}

fn base_defaults(gamma: f64, cells: Vec<usize>, boundary: BoundaryCondition, t_final: f64) -> ProblemDefaults {
    ProblemDefaults {
        gamma,
        cells,
        boundary,
        t_final,
        visc_mode: "rv",
        c_e: 1.0,
        eta_phys: 0.0,
        lumped: false,
        reconnection: false,
    }
}

pub const CONTACT_RHO_L: f64 = 0.7156521382;
pub const CONTACT_RHO_R: f64 = 0.2348529760;

/// Isolated contact discontinuity with constant velocity, pressure and field.
pub struct ContactWave;

impl Problem for ContactWave {
    fn name(&self) -> &'static str {
        "contact"
    }
    fn domain(&self) -> Domain {
        Domain { dim: 1, lower: [0.0, 0.0], upper: [1.0, 0.0], periodic: [false, false] }
    }
    fn defaults(&self) -> ProblemDefaults {
        ProblemDefaults {
            visc_mode: "first_order",
            lumped: true,
            ..base_defaults(2.0, vec![60], BoundaryCondition::DirichletFixed, 0.1)
        }
    }
    fn initial(&self, x: [f64; 2]) -> Primitive {
        Primitive {
            rho: if x[0] < 0.5 { CONTACT_RHO_L } else { CONTACT_RHO_R },
            u: [0.5915470932, -1.5792628803, 0.0],
            p: 0.5122334291,
            b: [0.75, -0.5349102426, 0.0],
            phi: 0.0,
        }
    }
}

/// Smooth magnetized vortex advected by a uniform stream on `[-10, 10]²`.
///
/// With `r² = x² + y²` and `g = exp(1 - r²)`:
/// `ρ = 1 + 0.2 g`, `u = (1, 1) + √g (-y, x)`, `B = √g (-y, x)`,
/// `p = 1 - ½ r² g - 0.05 g²`. The profile is in radial equilibrium, so the
/// exact solution is the periodic translate by `(t, t)`.
pub struct SmoothVortex;

impl SmoothVortex {
    pub const HALF_WIDTH: f64 = 10.0;
    pub const STREAM: [f64; 2] = [1.0, 1.0];

    fn profile(x: f64, y: f64) -> Primitive {
        let g = (1.0 - x * x - y * y).exp();
        let f = g.sqrt();
        let r2 = x * x + y * y;
        Primitive {
            rho: 1.0 + 0.2 * g,
            u: [Self::STREAM[0] - f * y, Self::STREAM[1] + f * x, 0.0],
            p: 1.0 - 0.5 * r2 * g - 0.05 * g * g,
            b: [-f * y, f * x, 0.0],
            phi: 0.0,
        }
    }

    fn wrap(v: f64) -> f64 {
        let l = 2.0 * Self::HALF_WIDTH;
        (v + Self::HALF_WIDTH).rem_euclid(l) - Self::HALF_WIDTH
    }
}

impl Problem for SmoothVortex {
    fn name(&self) -> &'static str {
        "vortex"
    }
    fn domain(&self) -> Domain {
        let w = Self::HALF_WIDTH;
        Domain { dim: 2, lower: [-w, -w], upper: [w, w], periodic: [true, true] }
    }
    fn defaults(&self) -> ProblemDefaults {
        base_defaults(5.0 / 3.0, vec![40, 40], BoundaryCondition::Periodic, 0.05)
    }
    fn initial(&self, x: [f64; 2]) -> Primitive {
        Self::profile(x[0], x[1])
    }
    fn exact(&self, x: [f64; 2], t: f64) -> Option<Primitive> {
        Some(Self::profile(Self::wrap(x[0] - Self::STREAM[0] * t), Self::wrap(x[1] - Self::STREAM[1] * t)))
    }
}

/// Brio–Wu shock tube.
pub struct BrioWu;

impl Problem for BrioWu {
    fn name(&self) -> &'static str {
        "briowu"
    }
    fn domain(&self) -> Domain {
        Domain { dim: 1, lower: [0.0, 0.0], upper: [1.0, 0.0], periodic: [false, false] }
    }
    fn defaults(&self) -> ProblemDefaults {
        ProblemDefaults { c_e: 5.0, ..base_defaults(2.0, vec![160], BoundaryCondition::DirichletFixed, 0.1) }
    }
    fn initial(&self, x: [f64; 2]) -> Primitive {
        let (rho, p, by) = if x[0] < 0.5 { (1.0, 1.0, 1.0) } else { (0.125, 0.1, -1.0) };
        Primitive { rho, u: [0.0; 3], p, b: [0.75, by, 0.0], phi: 0.0 }
    }
}

/// Orszag–Tang vortex on the periodic unit square.
pub struct OrszagTang;

impl Problem for OrszagTang {
    fn name(&self) -> &'static str {
        "orszag_tang"
    }
    fn domain(&self) -> Domain {
        Domain { dim: 2, lower: [0.0, 0.0], upper: [1.0, 1.0], periodic: [true, true] }
    }
    fn defaults(&self) -> ProblemDefaults {
        base_defaults(5.0 / 3.0, vec![64, 64], BoundaryCondition::Periodic, 0.5)
    }
    fn initial(&self, x: [f64; 2]) -> Primitive {
        let s = (4.0 * PI).sqrt();
        Primitive {
            rho: 25.0 / (36.0 * PI),
            u: [-(2.0 * PI * x[1]).sin(), (2.0 * PI * x[0]).sin(), 0.0],
            p: 5.0 / (12.0 * PI),
            b: [-(2.0 * PI * x[1]).sin() / s, (4.0 * PI * x[0]).sin() / s, 0.0],
            phi: 0.0,
        }
    }
}

/// GEM magnetic reconnection challenge.
pub struct Gem;

impl Gem {
    pub const LX: f64 = 25.6;
    pub const LY: f64 = 12.8;
}

impl Problem for Gem {
    fn name(&self) -> &'static str {
        "gem"
    }
    fn domain(&self) -> Domain {
        Domain {
            dim: 2,
            lower: [-0.5 * Self::LX, -0.5 * Self::LY],
            upper: [0.5 * Self::LX, 0.5 * Self::LY],
            periodic: [true, false],
        }
    }
    fn defaults(&self) -> ProblemDefaults {
        ProblemDefaults {
            eta_phys: 5e-3,
            reconnection: true,
            ..base_defaults(5.0 / 3.0, vec![128, 64], BoundaryCondition::SlipWall, 40.0)
        }
    }
    fn initial(&self, x: [f64; 2]) -> Primitive {
        let (lx, ly) = (Self::LX, Self::LY);
        let rho = 1.0 / ((2.0 * x[0]).cosh() * (2.0 * x[1]).cosh()) + 0.2;
        let dbx = -0.1 * PI / ly * (PI * x[1] / ly).sin() * (2.0 * PI * x[0] / lx).cos();
        let dby = 0.2 * PI / lx * (2.0 * PI * x[0] / lx).sin() * (PI * x[1] / ly).cos();
        Primitive { rho, u: [0.0; 3], p: 0.5 * rho, b: [(2.0 * x[1]).tanh() + dbx, dby, 0.0], phi: 0.0 }
    }
}

pub fn problem_registry() -> Registry<dyn Problem> {
    Registry::<dyn Problem>::new("problem")
        .with("contact", || Box::new(ContactWave))
        .with("vortex", || Box::new(SmoothVortex))
        .with("briowu", || Box::new(BrioWu))
        .with("orszag_tang", || Box::new(OrszagTang))
        .with("gem", || Box::new(Gem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::EosModel;

    #[test]
    fn contact_states() {
        let p = ContactWave;
        assert_eq!(p.initial([0.25, 0.0]).rho, 0.7156521382);
        assert_eq!(p.initial([0.75, 0.0]).rho, 0.2348529760);
    }

    #[test]
    fn gem_and_orszag_tang_values() {
        assert!((Gem.initial([0.0, 0.0]).rho - 1.2).abs() < 1e-15);
        let ot = OrszagTang.initial([0.3, 0.7]);
        assert!((ot.p / ot.rho - 0.6).abs() < 1e-14);
    }

    #[test]
    fn vortex_is_in_radial_equilibrium() {
        // Steady residual of the momentum balance in the co-moving frame, by central differences.
        let h = 1e-4;
        let pt = |x: f64, y: f64| {
            let s = SmoothVortex::profile(x, y);
            let b2 = s.b[0] * s.b[0] + s.b[1] * s.b[1];
            (s, s.p + 0.5 * b2)
        };
        for (x, y) in [(0.3, -0.7), (1.1, 0.4), (-0.9, -1.6)] {
            let (s, _) = pt(x, y);
            let w = [s.u[0] - 1.0, s.u[1] - 1.0];
            let d = |f: &dyn Fn(f64, f64) -> f64| {
                [(f(x + h, y) - f(x - h, y)) / (2.0 * h), (f(x, y + h) - f(x, y - h)) / (2.0 * h)]
            };
            let gpt = d(&|x, y| pt(x, y).1);
            for k in 0..2 {
                let gw = d(&|x, y| SmoothVortex::profile(x, y).u[k] - 1.0);
                let gb = d(&|x, y| SmoothVortex::profile(x, y).b[k]);
                let adv = s.rho * (w[0] * gw[0] + w[1] * gw[1]);
                let tension = s.b[0] * gb[0] + s.b[1] * gb[1];
                let r = adv + gpt[k] - tension;
                assert!(r.abs() < 1e-7, "component {k} at ({x}, {y}): {r}");
            }
        }
    }

    #[test]
    fn every_problem_starts_admissible() {
        let reg = problem_registry();
        for name in reg.names() {
            let p = reg.create(name).unwrap();
            let d = p.domain();
            let eos = EosModel::new(p.defaults().gamma).unwrap();
            for i in 0..=20 {
                for j in 0..=20 {
                    let x = [
                        d.lower[0] + (d.upper[0] - d.lower[0]) * i as f64 / 20.0,
                        d.lower[1] + (d.upper[1] - d.lower[1]) * j as f64 / 20.0,
                    ];
                    let s = p.initial(x);
                    assert!(s.rho > 0.0 && s.p > 0.0, "{name} at {x:?}");
                    assert!(eos.specific_entropy(s.rho, s.p / ((eos.gamma() - 1.0) * s.rho)).is_ok());
                }
            }
        }
    }

    #[test]
    fn vortex_exact_solution_translates() {
        let v = SmoothVortex;
        let close = |a: Primitive, b: Primitive| {
            let d = [a.rho - b.rho, a.p - b.p, a.u[0] - b.u[0], a.u[1] - b.u[1], a.b[0] - b.b[0], a.b[1] - b.b[1]];
            d.iter().all(|v| v.abs() < 1e-13)
        };
        assert!(close(v.exact([0.4, -0.2], 0.5).unwrap(), v.initial([-0.1, -0.7])));
        assert!(close(v.exact([-9.9, -9.9], 0.2).unwrap(), v.initial([9.9, 9.9])));
    }
}
