use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use viscous_mhd::bench::config::parse_cells;
use viscous_mhd::bench::convergence::{convergence_table, Quantity, Reference, ReferenceProfile};
use viscous_mhd::bench::verify::{format_table, run_suite};
use viscous_mhd::bench::{ledger_from_snapshots, run, MassMode, Overrides};
use viscous_mhd::{MhdError, Result};

#[derive(Parser)]
#[command(name = "viscous-mhd", version, about = "Continuous Galerkin solver for viscously regularized ideal MHD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark from a config file and/or flags.
    Run(RunArgs),
    /// Randomized invariance and property sweeps.
    Verify(VerifyArgs),
    /// Error and rate table over a mesh ladder.
    Convergence(ConvergenceArgs),
    /// Rebuild the diagnostics ledger from snapshot files.
    Ledger(LedgerArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML run configuration; keys left out take the problem defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// contact, vortex, briowu, orszag_tang or gem.
    #[arg(long)]
    problem: Option<String>,
    /// gp, gps, resistive, monolithic or none.
    #[arg(long)]
    flux: Option<String>,
    /// powell, janhunen, bb, none or custom:a,b,c.
    #[arg(long)]
    source: Option<String>,
    /// none, dedner, 9wave or cons.
    #[arg(long)]
    glm: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    /// N (1D) or N,M (2D).
    #[arg(long)]
    cells: Option<String>,
    #[arg(long)]
    tfinal: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Residual-viscosity scaling C_E.
    #[arg(long)]
    ce: Option<f64>,
    /// lumped or consistent.
    #[arg(long)]
    mass: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            problem: self.problem.clone(),
            flux: self.flux.clone(),
            source: self.source.clone(),
            glm: self.glm.clone(),
            degree: self.degree,
            cells: self.cells.as_deref().map(parse_cells).transpose()?,
            t_final: self.tfinal,
            cfl: self.cfl,
            c_e: self.ce,
            mass: self.mass.as_deref().map(str::parse::<MassMode>).transpose()?,
            out: self.out.clone(),
            seed: self.seed,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Print a progress line every N steps (overrides the config).
    #[arg(long)]
    log_every: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// rotation, galilean, thermo, freestream or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Samples per identity (thermo sweeps scale this up).
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Cell counts in the first direction; 2D meshes keep the configured aspect ratio.
    #[arg(long, value_delimiter = ',', required = true)]
    ladder: Vec<usize>,
    /// `exact` or a snapshot CSV holding a 1D reference profile.
    #[arg(long, default_value = "exact")]
    reference: String,
    /// Compared quantities among rho, E, u, B.
    #[arg(long, value_delimiter = ',', default_value = "u,B")]
    quantities: Vec<String>,
}

#[derive(Args)]
struct LedgerArgs {
    /// Configuration of the run that wrote the snapshots.
    #[arg(long)]
    config: PathBuf,
    /// Output ledger CSV.
    #[arg(long, default_value = "ledger.csv")]
    out: PathBuf,
    /// Snapshot CSV files.
    #[arg(required = true)]
    snapshots: Vec<PathBuf>,
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(a) => {
            let mut cfg = a.config.overrides()?.resolve(a.config.config.as_deref())?;
            if let Some(n) = a.log_every {
                cfg.output.log_every = n;
            }
            let summary = run(&cfg, &mut std::io::stdout())?;
            println!("{} steps to t = {:.6e} on {} dofs", summary.steps, summary.t, summary.n_dofs);
            for p in &summary.outputs {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Verify(a) => {
            let rows = run_suite(&a.suite, a.samples, a.seed)?;
            print!("{}", format_table(&rows));
            Ok(rows.iter().all(|r| r.pass))
        }
        Command::Convergence(a) => {
            let cfg = a.config.overrides()?.resolve(a.config.config.as_deref())?;
            let quantities = a.quantities.iter().map(|q| q.parse::<Quantity>()).collect::<Result<Vec<_>>>()?;
            let reference = if a.reference == "exact" {
                Reference::Exact(cfg.make_problem()?, cfg.t_final)
            } else {
                Reference::Profile(ReferenceProfile::load(std::path::Path::new(&a.reference))?)
            };
            let ladder: Vec<Vec<usize>> = a
                .ladder
                .iter()
                .map(|&n| match cfg.cells.as_slice() {
                    [_] => vec![n],
                    [nx, ny] => vec![n, (n * ny + nx / 2) / nx],
                    _ => vec![n],
                })
                .collect();
            let table = convergence_table(&cfg, &ladder, &reference, &quantities)?;
            print!("{table}");
            std::fs::create_dir_all(&cfg.output.dir)?;
            let path = cfg.output.dir.join("convergence.csv");
            table.write_csv(&path)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Ledger(a) => {
            let cfg = viscous_mhd::bench::RunConfig::from_file(&a.config, None)?;
            cfg.validate()?;
            let rows = ledger_from_snapshots(&cfg, &a.snapshots, &a.out)?;
            println!("wrote {} rows to {}", rows.len(), a.out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let code: MhdError = e;
            ExitCode::from(code.exit_code() as u8)
        }
    }
}
