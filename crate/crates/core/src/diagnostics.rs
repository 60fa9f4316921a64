//! Conserved-quantity ledger, entropy and divergence monitors, reconnection rate.

use std::io::Write;
use std::path::Path;

use crate::error::{MhdError, Result};
use crate::fem::assembly::MassOperator;
use crate::fem::quadrature::interval_rule;
use crate::fem::FeSpace;
use crate::state::{ConservedState, EnergyForm};
use crate::thermo::EosModel;

pub const LEDGER_COLUMNS: [&str; 12] = [
    "t", "mass", "mom_x", "mom_y", "energy", "energy_star", "B_x", "B_y", "ang_mom", "min_s", "divB_L2", "f_rec",
];

/// One row of the conservation ledger; `None` entries are written as empty fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub mass: f64,
    pub mom_x: f64,
    pub mom_y: f64,
    pub energy: f64,
    pub energy_star: Option<f64>,
    pub b_x: f64,
    pub b_y: f64,
    pub ang_mom: Option<f64>,
    pub min_s: Option<f64>,
    pub div_b_l2: Option<f64>,
    pub f_rec: Option<f64>,
}

impl LedgerRow {
    pub fn fields(&self) -> [String; 12] {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.17e}")).unwrap_or_default();
        [
            format!("{:.17e}", self.t),
            format!("{:.17e}", self.mass),
            format!("{:.17e}", self.mom_x),
            format!("{:.17e}", self.mom_y),
            format!("{:.17e}", self.energy),
            opt(self.energy_star),
            format!("{:.17e}", self.b_x),
            format!("{:.17e}", self.b_y),
            opt(self.ang_mom),
            opt(self.min_s),
            opt(self.div_b_l2),
            opt(self.f_rec),
        ]
    }
}

/// Integrals `Σ_i (M U)_i`, weighted by the mass operator the solver uses.
///
/// With the consistent mass these are exact integrals of the finite element
/// fields; with the lumped mass they are the quantities the scheme conserves.
pub struct ConservedIntegrals {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
    pub energy_star: f64,
    pub magnetism: [f64; 3],
    /// `∫ m₁x₂ − m₂x₁` against the nodal interpolant of the coordinates.
    pub angular_momentum: f64,
}

pub fn conserved_integrals(space: &FeSpace, mass: &MassOperator, u: &[ConservedState<f64>], form: EnergyForm) -> ConservedIntegrals {
    let adjusted: Vec<ConservedState<f64>> = u
        .iter()
        .map(|s| {
            let mut v = *s;
            v.energy = s.physical_energy(form);
            // The φ slot temporarily carries E* for integration.
            v.phi = s.physical_energy(form) + 0.5 * s.phi * s.phi;
            v
        })
        .collect();
    let mu = mass.apply(&adjusted);
    let mut out = ConservedIntegrals {
        mass: 0.0,
        momentum: [0.0; 3],
        energy: 0.0,
        energy_star: 0.0,
        magnetism: [0.0; 3],
        angular_momentum: 0.0,
    };
    for (i, v) in mu.iter().enumerate() {
        out.mass += v.rho;
        out.energy += v.energy;
        out.energy_star += v.phi;
        for k in 0..3 {
            out.momentum[k] += v.m[k];
            out.magnetism[k] += v.b[k];
        }
        let x = space.dof_coords[i];
        out.angular_momentum += v.m[0] * x[1] - v.m[1] * x[0];
    }
    out
}

/// Minimum nodal entropy, or `None` when some node has `ρ ≤ 0` or `e ≤ 0`.
pub fn min_entropy(u: &[ConservedState<f64>], eos: &EosModel, form: EnergyForm) -> Option<f64> {
    let mut m = f64::INFINITY;
    for s in u {
        let e = s.specific_internal_energy(form);
        m = m.min(eos.specific_entropy(s.rho, e).ok()?);
    }
    Some(m)
}

/// `‖∇·B_h‖_{L²(Ω)}`.
pub fn div_b_norm(space: &FeSpace, u: &[ConservedState<f64>]) -> f64 {
    let n = space.n_local;
    let mut g = vec![[0.0; 2]; n];
    let mut acc = 0.0;
    for c in 0..space.n_cells() {
        let dofs = space.cell_dofs(c);
        for (q, w) in space.quad.weights.iter().enumerate() {
            space.gradients_at(c, q, &mut g);
            let mut div = 0.0;
            for (a, &i) in dofs.iter().enumerate() {
                div += g[a][0] * u[i].b[0] + g[a][1] * u[i].b[1];
            }
            acc += w * space.geom[c].det * div * div;
        }
    }
    acc.sqrt()
}

/// `½ ∫ |B_y(x, 0)| dx` along the mesh line `y = 0`.
pub fn reconnection_rate(space: &FeSpace, u: &[ConservedState<f64>]) -> Result<f64> {
    if space.dim() != 2 {
        return Err(MhdError::Mesh("reconnection rate needs a 2D mesh".into()));
    }
    let ly = space.mesh.upper[1] - space.mesh.lower[1];
    let tol = 1e-10 * ly;
    let rule = interval_rule(9);
    let el = &space.element;
    let mut total = 0.0;
    let mut found = false;
    for c in 0..space.n_cells() {
        let x = &space.mesh.cell_coords[c];
        let centroid_y = (x[0][1] + x[1][1] + x[2][1]) / 3.0;
        if centroid_y <= 0.0 {
            continue;
        }
        for (a, b) in [(0usize, 1usize), (1, 2), (2, 0)] {
            if x[a][1].abs() > tol || x[b][1].abs() > tol {
                continue;
            }
            found = true;
            let len = (x[b][0] - x[a][0]).abs();
            let dofs = space.cell_dofs(c);
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let t = p[0];
                let mut lam = [0.0; 3];
                lam[a] = 1.0 - t;
                lam[b] = t;
                let xi = [lam[1], lam[2]];
                let by: f64 = dofs.iter().enumerate().map(|(k, &i)| el.value(k, xi) * u[i].b[1]).sum();
                total += w * len * by.abs();
            }
        }
    }
    if !found {
        return Err(MhdError::Mesh("the line y = 0 is not resolved by mesh edges".into()));
    }
    Ok(0.5 * total)
}

/// Complete ledger row for a field at time `t`.
pub fn ledger_row(
    space: &FeSpace,
    mass: &MassOperator,
    u: &[ConservedState<f64>],
    eos: &EosModel,
    form: EnergyForm,
    glm_active: bool,
    with_reconnection: bool,
    t: f64,
) -> LedgerRow {
    let ci = conserved_integrals(space, mass, u, form);
    let two_d = space.dim() == 2;
    LedgerRow {
        t,
        mass: ci.mass,
        mom_x: ci.momentum[0],
        mom_y: ci.momentum[1],
        energy: ci.energy,
        energy_star: glm_active.then_some(ci.energy_star),
        b_x: ci.magnetism[0],
        b_y: ci.magnetism[1],
        ang_mom: two_d.then_some(ci.angular_momentum),
        min_s: min_entropy(u, eos, form),
        div_b_l2: two_d.then(|| div_b_norm(space, u)),
        f_rec: if with_reconnection { reconnection_rate(space, u).ok() } else { None },
    }
}

/// CSV ledger with the fixed header.
pub struct LedgerWriter<W: Write> {
    inner: csv::Writer<W>,
    last_t: Option<f64>,
}

impl LedgerWriter<std::fs::File> {
    pub fn create(path: &Path) -> Result<Self> {
        Self::new(std::fs::File::create(path)?)
    }
}

impl<W: Write> LedgerWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(LEDGER_COLUMNS)?;
        Ok(Self { inner, last_t: None })
    }

    pub fn write(&mut self, row: &LedgerRow) -> Result<()> {
        if let Some(t) = self.last_t {
            if !(row.t > t) {
                return Err(MhdError::InvalidConfig(format!("ledger times must increase ({} after {t})", row.t)));
            }
        }
        self.last_t = Some(row.t);
        self.inner.write_record(row.fields())?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Relative drift `|q(t) − q(0)| / scale` with `scale = max(|q(0)|, floor)`.
pub fn relative_drift(q0: f64, q: f64, floor: f64) -> f64 {
    (q - q0).abs() / q0.abs().max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh;
    use crate::state::Primitive;

    fn space(periodic: [bool; 2], lower: [f64; 2], upper: [f64; 2], n: usize) -> FeSpace {
        FeSpace::new(Mesh::crossed_grid(lower, upper, n, n, periodic).unwrap(), 1).unwrap()
    }

    fn field(s: &FeSpace, f: impl Fn([f64; 2]) -> Primitive) -> Vec<ConservedState<f64>> {
        s.interpolate(|x| f(x).to_conserved(1.4, EnergyForm::Total))
    }

    #[test]
    fn unit_density_has_unit_mass() {
        let s = space([false, false], [0.0, 0.0], [1.0, 1.0], 4);
        let u = field(&s, |_| Primitive { rho: 1.0, u: [0.0; 3], p: 1.0, b: [0.0; 3], phi: 0.0 });
        let m = MassOperator::new(&s, false, 1e-12).unwrap();
        assert!((conserved_integrals(&s, &m, &u, EnergyForm::Total).mass - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rotating_momentum_angular_integral() {
        let s = space([false, false], [-1.0, -1.0], [1.0, 1.0], 6);
        let u = field(&s, |x| Primitive { rho: 1.0, u: [-x[1], x[0], 0.0], p: 1.0, b: [0.0; 3], phi: 0.0 });
        let m = MassOperator::new(&s, false, 1e-12).unwrap();
        let l = conserved_integrals(&s, &m, &u, EnergyForm::Total).angular_momentum;
        assert!((l + 8.0 / 3.0).abs() < 1e-12, "{l}");
    }

    #[test]
    fn solenoidal_periodic_field_has_zero_mean() {
        let tau = 2.0 * std::f64::consts::PI;
        let s = space([true, true], [0.0, 0.0], [1.0, 1.0], 8);
        let u = field(&s, |x| Primitive {
            rho: 1.0,
            u: [0.0; 3],
            p: 1.0,
            b: [(tau * x[1]).sin(), (tau * x[0]).cos(), 0.0],
            phi: 0.0,
        });
        let m = MassOperator::new(&s, true, 1e-12).unwrap();
        let ci = conserved_integrals(&s, &m, &u, EnergyForm::Total);
        assert!(ci.magnetism[0].abs() < 1e-13 && ci.magnetism[1].abs() < 1e-13);
    }

    #[test]
    fn divergence_examples() {
        let s = space([false, false], [0.0, 0.0], [1.0, 1.0], 4);
        let c = field(&s, |_| Primitive { rho: 1.0, u: [0.0; 3], p: 1.0, b: [0.3, -0.2, 0.0], phi: 0.0 });
        assert!(div_b_norm(&s, &c) < 1e-13);
        let l = field(&s, |x| Primitive { rho: 1.0, u: [0.0; 3], p: 1.0, b: [x[0], 0.0, 0.0], phi: 0.0 });
        assert!((div_b_norm(&s, &l) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn entropy_minimum_and_violation() {
        let eos = EosModel::new(2.0).unwrap();
        let a = Primitive { rho: 0.7156521382, u: [0.0; 3], p: 0.5122334291, b: [0.0; 3], phi: 0.0 };
        let b = Primitive { rho: 0.2348529760, ..a };
        let u = vec![a.to_conserved(2.0, EnergyForm::Total), b.to_conserved(2.0, EnergyForm::Total)];
        let sa = eos.specific_entropy(a.rho, a.p / a.rho).unwrap();
        let sb = eos.specific_entropy(b.rho, b.p / b.rho).unwrap();
        assert_eq!(min_entropy(&u, &eos, EnergyForm::Total), Some(sa.min(sb)));
        let mut bad = u.clone();
        bad[1].energy = 0.0;
        assert_eq!(min_entropy(&bad, &eos, EnergyForm::Total), None);
    }

    #[test]
    fn ledger_rejects_non_increasing_time() {
        let mut w = LedgerWriter::new(Vec::new()).unwrap();
        w.write(&LedgerRow { t: 0.0, ..Default::default() }).unwrap();
        assert!(w.write(&LedgerRow { t: 0.0, ..Default::default() }).is_err());
    }
}
