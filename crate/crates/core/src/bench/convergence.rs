//! Relative error norms and convergence ladders.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::RunConfig;
use super::output::Snapshot;
use super::problems::Problem;
use super::run_to_end;
use crate::error::{MhdError, Result};
use crate::fem::FeSpace;
use crate::state::{ConservedState, EnergyForm};

/// Compared quantity; vectors contribute all three components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Density,
    Energy,
    Velocity,
    Magnetic,
}

impl Quantity {
    fn values(&self, s: &ConservedState<f64>) -> ([f64; 3], usize) {
        match self {
            Self::Density => ([s.rho, 0.0, 0.0], 1),
            Self::Energy => ([s.energy, 0.0, 0.0], 1),
            Self::Velocity => (s.velocity(), 3),
            Self::Magnetic => (s.b, 3),
        }
    }
}

impl FromStr for Quantity {
    type Err = MhdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(Self::Density),
            "E" => Ok(Self::Energy),
            "u" => Ok(Self::Velocity),
            "B" => Ok(Self::Magnetic),
            other => Err(MhdError::UnknownName { kind: "quantity", name: other.into(), available: "rho, E, u, B".into() }),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Density => "rho",
            Self::Energy => "E",
            Self::Velocity => "u",
            Self::Magnetic => "B",
        })
    }
}

/// Reference profile from a 1D snapshot, linearly interpolated in `x`.
#[derive(Clone, Debug)]
pub struct ReferenceProfile {
    pub t: f64,
    x: Vec<f64>,
    states: Vec<ConservedState<f64>>,
}

impl ReferenceProfile {
    pub fn load(path: &Path) -> Result<Self> {
        let snap = Snapshot::read(path)?;
        let mut pairs: Vec<(f64, ConservedState<f64>)> = snap.coords.iter().map(|c| c[0]).zip(snap.states).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs.len() < 2 {
            return Err(MhdError::InvalidConfig(format!("{}: reference needs at least two points", path.display())));
        }
        let (x, states) = pairs.into_iter().unzip();
        Ok(Self { t: snap.t, x, states })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn eval(&self, x: f64) -> Result<ConservedState<f64>> {
        let (x0, x1) = (self.x[0], *self.x.last().unwrap());
        let tol = 1e-12 * (x1 - x0);
        if x < x0 - tol || x > x1 + tol {
            return Err(MhdError::InvalidConfig(format!("x = {x} lies outside the reference grid [{x0}, {x1}]")));
        }
        let k = self.x.partition_point(|v| *v <= x).clamp(1, self.x.len() - 1);
        let (a, b) = (self.x[k - 1], self.x[k]);
        let w = ((x - a) / (b - a)).clamp(0.0, 1.0);
        Ok(self.states[k - 1].scaled(1.0 - w) + self.states[k].scaled(w))
    }
}

/// Where reference values come from.
pub enum Reference {
    Exact(Box<dyn Problem>, f64),
    Profile(ReferenceProfile),
}

impl Reference {
    /// Reference state in total-energy form.
    fn state(&self, x: [f64; 2], t: f64, gamma: f64) -> Result<ConservedState<f64>> {
        match self {
            Self::Exact(p, _) => p
                .exact(x, t)
                .map(|s| s.to_conserved(gamma, EnergyForm::Total))
                .ok_or_else(|| MhdError::InvalidConfig(format!("`{}` has no exact solution", p.name()))),
            Self::Profile(r) => r.eval(x[0]),
        }
    }
}

/// `(L¹, L²)` relative errors, one pair per quantity.
pub fn relative_errors(
    space: &FeSpace,
    u: &[ConservedState<f64>],
    form: EnergyForm,
    t: f64,
    gamma: f64,
    reference: &Reference,
    quantities: &[Quantity],
) -> Result<Vec<[f64; 2]>> {
    let nq = quantities.len();
    let (mut e1, mut e2, mut r1, mut r2) = (vec![0.0; nq], vec![0.0; nq], vec![0.0; nq], vec![0.0; nq]);
    for c in 0..space.n_cells() {
        let dofs = space.cell_dofs(c);
        let det = space.geom[c].det;
        for (q, wref) in space.quad.weights.iter().enumerate() {
            let w = wref * det;
            let mut uh = ConservedState::zero();
            for (a, &i) in dofs.iter().enumerate() {
                uh.axpy(space.phi[q][a], &u[i]);
            }
            uh.energy = uh.physical_energy(form);
            let uref = reference.state(space.quad_point(c, q), t, gamma)?;
            for (k, qty) in quantities.iter().enumerate() {
                let (vh, n) = qty.values(&uh);
                let (vr, _) = qty.values(&uref);
                for j in 0..n {
                    let d = vh[j] - vr[j];
                    e1[k] += w * d.abs();
                    e2[k] += w * d * d;
                    r1[k] += w * vr[j].abs();
                    r2[k] += w * vr[j] * vr[j];
                }
            }
        }
    }
    (0..nq)
        .map(|k| {
            if r1[k] == 0.0 {
                return Err(MhdError::InvalidConfig(format!("reference {} vanishes identically", quantities[k])));
            }
            Ok([e1[k] / r1[k], (e2[k] / r2[k]).sqrt()])
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub cells: Vec<usize>,
    pub n_dofs: usize,
    pub h: f64,
    /// `errors[k] = [L¹, L²]` for quantity `k`.
    pub errors: Vec<[f64; 2]>,
    /// Observed orders against the previous row.
    pub rates: Option<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub quantities: Vec<Quantity>,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Rates for quantity `k` and norm `n` (0 = L¹, 1 = L²) along the ladder.
    pub fn rates(&self, k: usize, n: usize) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rates.as_ref().map(|v| v[k][n])).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["cells", "dofs", "h", "quantity", "norm", "error", "rate"])?;
        for row in &self.rows {
            let cells = row.cells.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
            for (k, q) in self.quantities.iter().enumerate() {
                for (n, name) in ["L1", "L2"].iter().enumerate() {
                    let rate = row.rates.as_ref().map(|r| format!("{:.4}", r[k][n])).unwrap_or_default();
                    w.write_record([
                        cells.clone(),
                        row.n_dofs.to_string(),
                        format!("{:.6e}", row.h),
                        q.to_string(),
                        name.to_string(),
                        format!("{:.6e}", row.errors[k][n]),
                        rate,
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl fmt::Display for ConvergenceTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>10} {:>8}", "cells", "dofs")?;
        for q in &self.quantities {
            write!(f, " {:>11} {:>6} {:>11} {:>6}", format!("L1({q})"), "rate", format!("L2({q})"), "rate")?;
        }
        writeln!(f)?;
        for row in &self.rows {
            let cells = row.cells.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
            write!(f, "{cells:>10} {:>8}", row.n_dofs)?;
            for k in 0..self.quantities.len() {
                for n in 0..2 {
                    let rate = row.rates.as_ref().map(|r| format!("{:.2}", r[k][n])).unwrap_or_else(|| "-".into());
                    write!(f, " {:>11.3e} {:>6}", row.errors[k][n], rate)?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Run `template` on each mesh of the ladder and tabulate errors and rates.
///
/// Rates are `log(e_coarse / e_fine) / log(h_coarse / h_fine)` with `h` the cell width
/// in the first direction.
pub fn convergence_table(
    template: &RunConfig,
    ladder: &[Vec<usize>],
    reference: &Reference,
    quantities: &[Quantity],
) -> Result<ConvergenceTable> {
    let t_final = match reference {
        Reference::Exact(_, t) => *t,
        Reference::Profile(r) => r.t,
    };
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for cells in ladder {
        let mut cfg = template.clone();
        cfg.cells = cells.clone();
        cfg.t_final = t_final;
        let sim = run_to_end(&cfg)?;
        let space = &sim.op.space;
        let h = (space.mesh.upper[0] - space.mesh.lower[0]) / cells[0] as f64;
        let errors = relative_errors(space, &sim.u, sim.form(), sim.t, cfg.gamma, reference, quantities)?;
        let rates = rows.last().map(|prev| {
            let lh = (prev.h / h).ln();
            prev.errors.iter().zip(&errors).map(|(a, b)| [(a[0] / b[0]).ln() / lh, (a[1] / b[1]).ln() / lh]).collect()
        });
        rows.push(ConvergenceRow { cells: cells.clone(), n_dofs: space.n_dofs, h, errors, rates });
    }
    Ok(ConvergenceTable { quantities: quantities.to_vec(), rows })
}

/// Location of the stored Brio–Wu reference profile.
pub fn briowu_reference_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("briowu_reference.csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::problems::SmoothVortex;
    use crate::fem::Mesh;

    #[test]
    fn identical_fields_have_zero_error() {
        let v = SmoothVortex;
        let space = FeSpace::new(Mesh::crossed_grid([-10.0, -10.0], [10.0, 10.0], 6, 6, [true, true]).unwrap(), 1).unwrap();
        // A reference built from the same discrete field.
        let u = space.interpolate(|x| v.initial(x).to_conserved(5.0 / 3.0, EnergyForm::Total));
        let dir = tempfile::tempdir().unwrap();
        let one = FeSpace::new(Mesh::interval(0.0, 1.0, 8, false).unwrap(), 1).unwrap();
        let u1 = one.interpolate(|x| v.initial([x[0], 0.3]).to_conserved(5.0 / 3.0, EnergyForm::Total));
        let p = dir.path().join("r.csv");
        crate::bench::output::write_snapshot_csv(&p, 0.0, &one, &u1, EnergyForm::Total).unwrap();
        let r = Reference::Profile(ReferenceProfile::load(&p).unwrap());
        let e = relative_errors(&one, &u1, EnergyForm::Total, 0.0, 5.0 / 3.0, &r, &[Quantity::Density, Quantity::Magnetic]).unwrap();
        assert!(e.iter().all(|v| v[0] < 1e-15 && v[1] < 1e-15), "{e:?}");
        let exact = Reference::Exact(Box::new(SmoothVortex), 0.0);
        let e = relative_errors(&space, &u, EnergyForm::Total, 0.0, 5.0 / 3.0, &exact, &[Quantity::Velocity]).unwrap();
        assert!(e[0][0] > 0.0 && e[0][0] < 0.2);
    }

    #[test]
    fn interpolation_is_second_order() {
        let v = SmoothVortex;
        let exact = Reference::Exact(Box::new(SmoothVortex), 0.0);
        let err = |n: usize| {
            let s = FeSpace::new(Mesh::crossed_grid([-10.0, -10.0], [10.0, 10.0], n, n, [true, true]).unwrap(), 1).unwrap();
            let u = s.interpolate(|x| v.initial(x).to_conserved(5.0 / 3.0, EnergyForm::Total));
            relative_errors(&s, &u, EnergyForm::Total, 0.0, 5.0 / 3.0, &exact, &[Quantity::Magnetic]).unwrap()[0]
        };
        let (a, b) = (err(20), err(40));
        assert!((a[0] / b[0]).log2() > 1.8 && (a[1] / b[1]).log2() > 1.8, "{a:?} {b:?}");
    }

    #[test]
    fn profile_interpolation_and_range() {
        let dir = tempfile::tempdir().unwrap();
        let one = FeSpace::new(Mesh::interval(0.0, 1.0, 4, false).unwrap(), 1).unwrap();
        let u = one.interpolate(|x| ConservedState { rho: 1.0 + x[0], ..ConservedState::zero() });
        let p = dir.path().join("r.csv");
        crate::bench::output::write_snapshot_csv(&p, 0.1, &one, &u, EnergyForm::Total).unwrap();
        let r = ReferenceProfile::load(&p).unwrap();
        assert!((r.eval(0.3).unwrap().rho - 1.3).abs() < 1e-15);
        assert!(r.eval(1.5).is_err());
    }
}
