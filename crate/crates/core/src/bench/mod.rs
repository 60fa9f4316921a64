//! Benchmarks, run orchestration and output management.

pub mod config;
pub mod convergence;
pub mod output;
pub mod problems;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::{ledger_row, min_entropy, div_b_norm, LedgerRow, LedgerWriter};
use crate::error::{MhdError, Result};
use crate::fem::{FeSpace, Mesh, PhysicsModel, SpatialOperator};
use crate::flux::viscous_flux_registry;
use crate::solver::{CleaningSpeed, Simulation};
use crate::sources::glm_registry;
use crate::stabilization::{viscosity_registry, PhysicalViscosity};
use crate::thermo::EosModel;

pub use config::{MassMode, Overrides, RunConfig};
pub use problems::{problem_registry, Problem};

/// Discrete space for a configuration's problem and mesh.
pub fn build_space(cfg: &RunConfig, problem: &dyn Problem) -> Result<FeSpace> {
    let d = problem.domain();
    let mesh = if d.dim == 1 {
        Mesh::interval(d.lower[0], d.upper[0], cfg.cells[0], d.periodic[0])?
    } else {
        Mesh::crossed_grid(d.lower, d.upper, cfg.cells[0], cfg.cells[1], d.periodic)?
    };
    FeSpace::new(mesh, cfg.degree)
}

/// Validated simulation at `t = 0`.
pub fn build(cfg: &RunConfig) -> Result<Simulation> {
    cfg.validate()?;
    let problem = cfg.make_problem()?;
    let space = build_space(cfg, problem.as_ref())?;
    let eos = EosModel::new(cfg.gamma)?;
    let glm = glm_registry::<f64>().create(&cfg.glm.variant)?;
    let form = glm.energy_form();
    let model = PhysicsModel {
        eos,
        flux: viscous_flux_registry::<f64>().create(&cfg.flux)?,
        glm,
        source: cfg.source_config()?,
        c_r: cfg.glm.c_r,
    };
    let u0 = space.interpolate(|x| problem.initial(x).to_conserved(cfg.gamma, form));
    if let Some(i) = u0.iter().position(|s| !(s.rho > 0.0 && s.specific_internal_energy(form) > 0.0)) {
        return Err(MhdError::InvalidConfig(format!("initial state is inadmissible at {:?}", space.dof_coords[i])));
    }
    let op = SpatialOperator::new(space, model, cfg.boundary, cfg.mass == MassMode::Lumped, cfg.cg_tol)?;
    let viscosity = viscosity_registry(cfg.viscosity_settings()).create(&cfg.visc.mode)?;
    let physical = PhysicalViscosity { kappa: cfg.visc.kappa_phys, mu: cfg.visc.mu_phys, eta: cfg.visc.eta_phys };
    let cleaning = cfg.glm.c_h.map(CleaningSpeed::Fixed).unwrap_or(CleaningSpeed::MaxWaveSpeed);
    Simulation::new(op, u0, viscosity, physical, cfg.cfl, cleaning)
}

/// Run to `t_final` without writing anything.
pub fn run_to_end(cfg: &RunConfig) -> Result<Simulation> {
    let mut sim = build(cfg)?;
    sim.run_until(cfg.t_final, |_, _| Ok(()))?;
    Ok(sim)
}

/// Ledger row for the current state of a simulation.
pub fn current_ledger_row(sim: &Simulation, reconnection: bool) -> LedgerRow {
    let op = &sim.op;
    ledger_row(&op.space, &op.mass, &sim.u, sim.eos(), sim.form(), op.model.glm.active(), reconnection, sim.t)
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: usize,
    pub t: f64,
    pub n_dofs: usize,
    pub outputs: Vec<PathBuf>,
    pub ledger: Vec<LedgerRow>,
}

fn write_final_fields(sim: &Simulation, problem: &str, dir: &Path, tag: &str, outputs: &mut Vec<PathBuf>) -> Result<()> {
    let space = &sim.op.space;
    let snap = dir.join(format!("{problem}_{tag}_snapshot.csv"));
    output::write_snapshot_csv(&snap, sim.t, space, &sim.u, sim.form())?;
    outputs.push(snap);
    if space.dim() == 1 {
        let p = dir.join(format!("{problem}_{tag}.csv"));
        output::write_profile_csv(&p, space, &sim.u, sim.eos(), sim.form())?;
        outputs.push(p);
    } else {
        let p = dir.join(format!("{problem}_{tag}.vtk"));
        output::write_vtk(&p, &format!("{problem} t={:.6e}", sim.t), space, &sim.u, sim.eos(), sim.form())?;
        outputs.push(p);
    }
    Ok(())
}

/// Full run with ledger, snapshots, final fields and manifest under `cfg.output.dir`.
pub fn run(cfg: &RunConfig, log: &mut dyn Write) -> Result<RunSummary> {
    let mut sim = build(cfg)?;
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    let out = &cfg.output;
    let mut outputs = Vec::new();
    let ledger_path = dir.join("ledger.csv");
    let mut ledger = LedgerWriter::create(&ledger_path)?;
    outputs.push(ledger_path);
    let mut rows = vec![current_ledger_row(&sim, out.reconnection)];
    ledger.write(&rows[0])?;
    if out.log_every > 0 {
        writeln!(log, "{:>8} {:>13} {:>11} {:>11} {:>11} {:>11} {:>11}", "step", "t", "dt", "min_rho", "min_e", "min_s", "divB_L2")?;
    }
    let mut snapshot_paths = Vec::new();
    let result = sim.run_until(cfg.t_final, |s, report| {
        let done = s.t >= cfg.t_final;
        if out.ledger_every > 0 && (report.step % out.ledger_every == 0) || done {
            let row = current_ledger_row(s, out.reconnection);
            ledger.write(&row)?;
            rows.push(row);
        }
        if out.snapshot_every > 0 && report.step % out.snapshot_every == 0 {
            let p = dir.join(format!("snapshot_{:06}.csv", report.step));
            output::write_snapshot_csv(&p, s.t, &s.op.space, &s.u, s.form())?;
            snapshot_paths.push(p);
        }
        if out.log_every > 0 && (report.step % out.log_every == 0 || done) {
            let form = s.form();
            let min_e = s.u.iter().map(|v| v.specific_internal_energy(form)).fold(f64::INFINITY, f64::min);
            let min_s = min_entropy(&s.u, s.eos(), form).map(|v| format!("{v:.4e}")).unwrap_or_else(|| "-".into());
            let div = if s.op.space.dim() == 2 { format!("{:.4e}", div_b_norm(&s.op.space, &s.u)) } else { "-".into() };
            writeln!(
                log,
                "{:>8} {:>13.6e} {:>11.4e} {:>11.4e} {:>11.4e} {:>11} {:>11}",
                report.step, report.t, report.dt, report.min_rho, min_e, min_s, div
            )?;
        }
        Ok(())
    });
    ledger.flush()?;
    outputs.extend(snapshot_paths);
    let status = match &result {
        Ok(()) => {
            write_final_fields(&sim, &cfg.problem, &dir, "final", &mut outputs)?;
            "completed".to_string()
        }
        Err(e) => {
            // Last admissible state, for diagnosis.
            write_final_fields(&sim, &cfg.problem, &dir, "abort", &mut outputs)?;
            e.to_string()
        }
    };
    let manifest = output::Manifest {
        crate_version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        n_dofs: sim.op.space.n_dofs,
        n_cells: sim.op.space.n_cells(),
        steps: sim.steps,
        t_final_reached: sim.t,
        status,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let mpath = dir.join("manifest.json");
    manifest.write(&mpath)?;
    outputs.push(mpath);
    result?;
    Ok(RunSummary { steps: sim.steps, t: sim.t, n_dofs: sim.op.space.n_dofs, outputs, ledger: rows })
}

/// Recompute the diagnostics ledger from snapshot files written by a run of `cfg`.
pub fn ledger_from_snapshots(cfg: &RunConfig, snapshots: &[PathBuf], out: &Path) -> Result<Vec<LedgerRow>> {
    let sim = build(cfg)?;
    let op = &sim.op;
    let form = sim.form();
    let mut snaps = snapshots.iter().map(|p| Ok((output::Snapshot::read(p)?, p))).collect::<Result<Vec<_>>>()?;
    snaps.sort_by(|a, b| a.0.t.total_cmp(&b.0.t));
    let mut w = LedgerWriter::create(out)?;
    let mut rows = Vec::new();
    for (snap, path) in &snaps {
        if snap.states.len() != op.space.n_dofs {
            return Err(MhdError::InvalidConfig(format!(
                "{}: {} nodes, but the configuration has {}",
                path.display(),
                snap.states.len(),
                op.space.n_dofs
            )));
        }
        let mismatch = snap.coords.iter().zip(&op.space.dof_coords).any(|(a, b)| (a[0] - b[0]).abs() + (a[1] - b[1]).abs() > 1e-9);
        if mismatch {
            return Err(MhdError::InvalidConfig(format!("{}: node coordinates do not match the configuration", path.display())));
        }
        let u = snap.stored_states(form);
        let row = ledger_row(&op.space, &op.mass, &u, sim.eos(), form, op.model.glm.active(), cfg.output.reconnection, snap.t);
        w.write(&row)?;
        rows.push(row);
    }
    w.flush()?;
    Ok(rows)
}
