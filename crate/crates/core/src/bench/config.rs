//! Run configuration: problem defaults, TOML overlay and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::problems::{problem_registry, Problem};
use crate::error::{MhdError, Result};
use crate::fem::BoundaryCondition;
use crate::flux::viscous_flux_registry;
use crate::sources::{glm_registry, SourceConfig};
use crate::stabilization::{viscosity_registry, FirstStep, ViscositySettings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassMode {
    Lumped,
    Consistent,
}

impl FromStr for MassMode {
    type Err = MhdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lumped" => Ok(Self::Lumped),
            "consistent" => Ok(Self::Consistent),
            other => Err(MhdError::UnknownName {
                kind: "mass mode",
                name: other.into(),
                available: "lumped, consistent".into(),
            }),
        }
    }
}

impl fmt::Display for MassMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lumped => "lumped",
            Self::Consistent => "consistent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlmConfig {
    pub variant: String,
    /// Fixed cleaning speed; the global maximum wave speed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_h: Option<f64>,
    pub c_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscConfig {
    pub mode: String,
    #[serde(rename = "C_E")]
    pub c_e: f64,
    pub first_step: FirstStep,
    pub kappa_phys: f64,
    pub mu_phys: f64,
    pub eta_phys: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Ledger cadence in steps; 0 records only the initial and final states.
    pub ledger_every: usize,
    /// Snapshot cadence in steps; 0 writes only the final state.
    pub snapshot_every: usize,
    /// Progress log cadence in steps; 0 disables the log.
    pub log_every: usize,
    pub reconnection: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub gamma: f64,
    pub degree: usize,
    pub cells: Vec<usize>,
    pub boundary: BoundaryCondition,
    pub flux: String,
    pub source: String,
    pub glm: GlmConfig,
    pub visc: ViscConfig,
    pub t_final: f64,
    pub cfl: f64,
    pub mass: MassMode,
    pub cg_tol: f64,
    pub seed: u64,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Fully populated defaults for a registered problem.
    pub fn for_problem(name: &str) -> Result<Self> {
        let p = problem_registry().create(name)?;
        let d = p.defaults();
        Ok(Self {
            problem: name.to_string(),
            gamma: d.gamma,
            degree: 1,
            cells: d.cells,
            boundary: d.boundary,
            flux: "gp".into(),
            source: "none".into(),
            glm: GlmConfig { variant: "none".into(), c_h: None, c_r: 0.18 },
            visc: ViscConfig {
                mode: d.visc_mode.into(),
                c_e: d.c_e,
                first_step: FirstStep::InviscidRate,
                kappa_phys: 0.0,
                mu_phys: 0.0,
                eta_phys: d.eta_phys,
            },
            t_final: d.t_final,
            cfl: 0.25,
            mass: if d.lumped { MassMode::Lumped } else { MassMode::Consistent },
            cg_tol: 1e-12,
            seed: 0,
            output: OutputConfig {
                dir: PathBuf::from("out"),
                ledger_every: 1,
                snapshot_every: 0,
                log_every: 0,
                reconnection: d.reconnection,
            },
        })
    }

    /// Parse a possibly partial TOML document on top of the defaults of its problem.
    pub fn from_toml_str(text: &str, fallback_problem: Option<&str>) -> Result<Self> {
        let user: toml::Table = text.parse()?;
        let problem = match user.get("problem") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(_) => return Err(MhdError::InvalidConfig("`problem` must be a string".into())),
            None => fallback_problem
                .ok_or_else(|| MhdError::InvalidConfig("no `problem` given".into()))?
                .to_string(),
        };
        let defaults = Self::for_problem(&problem)?;
        let mut merged = toml::Table::try_from(&defaults).map_err(|e| MhdError::Serialize(e.to_string()))?;
        merge(&mut merged, user);
        let cfg: Self = toml::Value::Table(merged).try_into()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, fallback_problem: Option<&str>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, fallback_problem)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| MhdError::Serialize(e.to_string()))
    }

    pub fn make_problem(&self) -> Result<Box<dyn Problem>> {
        problem_registry().create(&self.problem)
    }

    pub fn source_config(&self) -> Result<SourceConfig> {
        self.source.parse()
    }

    pub fn viscosity_settings(&self) -> ViscositySettings {
        ViscositySettings { c_e: self.visc.c_e, first_step: self.visc.first_step }
    }

    /// Reject inconsistent or out-of-range settings.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MhdError::InvalidConfig(m));
        let problem = self.make_problem()?;
        let domain = problem.domain();
        viscous_flux_registry::<f64>().create(&self.flux)?;
        glm_registry::<f64>().create(&self.glm.variant)?;
        viscosity_registry(self.viscosity_settings()).create(&self.visc.mode)?;
        self.source_config()?;
        if !(1..=3).contains(&self.degree) {
            return bad(format!("degree must be 1, 2 or 3, got {}", self.degree));
        }
        if self.degree == 2 && self.mass == MassMode::Lumped {
            return bad("the P2 lumped mass matrix has zero vertex entries; use consistent mass".into());
        }
        if self.cells.len() != domain.dim {
            return bad(format!("`{}` is {}D but {} cell counts were given", self.problem, domain.dim, self.cells.len()));
        }
        if self.cells.iter().any(|&n| n < 3) {
            return bad(format!("need at least 3 cells per direction, got {:?}", self.cells));
        }
        if self.output.reconnection && (domain.dim != 2 || self.cells[1] % 2 != 0 || domain.lower[1] != -domain.upper[1]) {
            return bad("the reconnection rate needs a 2D mesh with a grid line at y = 0 (even cell count in y)".into());
        }
        let periodic = domain.periodic.iter().take(domain.dim).all(|p| *p);
        if self.boundary == BoundaryCondition::Periodic && !periodic {
            return bad(format!("`{}` is not periodic in every direction", self.problem));
        }
        if self.boundary != BoundaryCondition::Periodic && periodic {
            return bad(format!("`{}` is fully periodic; boundary must be `periodic`", self.problem));
        }
        if !(self.gamma > 1.0) {
            return bad(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be finite and non-negative, got {}", self.t_final));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.visc.c_e > 0.0) {
            return bad(format!("C_E must be positive, got {}", self.visc.c_e));
        }
        if [self.visc.kappa_phys, self.visc.mu_phys, self.visc.eta_phys].iter().any(|v| !(*v >= 0.0)) {
            return bad("physical viscosities must be non-negative".into());
        }
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return bad(format!("cg_tol must lie in (0, 1), got {}", self.cg_tol));
        }
        if !(self.glm.c_r >= 0.0) || self.glm.c_h.is_some_and(|c| !(c > 0.0)) {
            return bad("GLM speeds must be positive".into());
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Command-line overrides, applied after the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub problem: Option<String>,
    pub flux: Option<String>,
    pub source: Option<String>,
    pub glm: Option<String>,
    pub degree: Option<usize>,
    pub cells: Option<Vec<usize>>,
    pub t_final: Option<f64>,
    pub cfl: Option<f64>,
    pub c_e: Option<f64>,
    pub mass: Option<MassMode>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = &self.flux {
            cfg.flux = v.clone();
        }
        if let Some(v) = &self.source {
            cfg.source = v.clone();
        }
        if let Some(v) = &self.glm {
            cfg.glm.variant = v.clone();
        }
        if let Some(v) = self.degree {
            cfg.degree = v;
        }
        if let Some(v) = &self.cells {
            cfg.cells = v.clone();
        }
        if let Some(v) = self.t_final {
            cfg.t_final = v;
        }
        if let Some(v) = self.cfl {
            cfg.cfl = v;
        }
        if let Some(v) = self.c_e {
            cfg.visc.c_e = v;
        }
        if let Some(v) = self.mass {
            cfg.mass = v;
        }
        if let Some(v) = &self.out {
            cfg.output.dir = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
    }

    /// Resolve a configuration from an optional file plus these overrides.
    pub fn resolve(&self, file: Option<&Path>) -> Result<RunConfig> {
        let mut cfg = match file {
            Some(p) => RunConfig::from_file(p, self.problem.as_deref())?,
            None => RunConfig::for_problem(
                self.problem.as_deref().ok_or_else(|| MhdError::InvalidConfig("give --config or --problem".into()))?,
            )?,
        };
        if let (Some(p), Some(_)) = (&self.problem, file) {
            if *p != cfg.problem {
                return Err(MhdError::InvalidConfig(format!("--problem {p} conflicts with the config file ({})", cfg.problem)));
            }
        }
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse `N` or `N,M`.
pub fn parse_cells(s: &str) -> Result<Vec<usize>> {
    let v: std::result::Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    match v {
        Ok(v) if (1..=2).contains(&v.len()) => Ok(v),
        _ => Err(MhdError::InvalidConfig(format!("--cells expects N or N,M, got `{s}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_overlays_problem_defaults() {
        let cfg = RunConfig::from_toml_str("problem = \"gem\"\ncfl = 0.2\n[visc]\nC_E = 2.0\n", None).unwrap();
        assert_eq!(cfg.cells, vec![128, 64]);
        assert_eq!(cfg.visc.eta_phys, 5e-3);
        assert_eq!(cfg.visc.c_e, 2.0);
        assert_eq!(cfg.cfl, 0.2);
        assert_eq!(cfg.boundary, BoundaryCondition::SlipWall);
        cfg.validate().unwrap();
    }

    #[test]
    fn round_trip_is_idempotent() {
        for p in ["contact", "vortex", "briowu", "orszag_tang", "gem"] {
            let mut cfg = RunConfig::for_problem(p).unwrap();
            cfg.glm.c_h = Some(1.5);
            let text = cfg.to_toml_string().unwrap();
            let back = RunConfig::from_toml_str(&text, None).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_toml_string().unwrap(), text);
        }
    }

    #[test]
    fn validation_rejects_bad_combinations() {
        let mut c = RunConfig::for_problem("contact").unwrap();
        c.validate().unwrap();
        c.degree = 2;
        assert!(c.validate().is_err());
        c.mass = MassMode::Consistent;
        c.validate().unwrap();
        c.cells = vec![10, 10];
        assert!(c.validate().is_err());
        let mut g = RunConfig::for_problem("gem").unwrap();
        g.cells = vec![32, 15];
        assert!(g.validate().is_err());
        let mut v = RunConfig::for_problem("vortex").unwrap();
        v.flux = "bogus".into();
        assert!(matches!(v.validate(), Err(MhdError::UnknownName { .. })));
        assert!(RunConfig::from_toml_str("problem = \"vortex\"\nbogus = 1\n", None).is_err());
    }

    #[test]
    fn overrides_and_cells() {
        assert_eq!(parse_cells("49,43").unwrap(), vec![49, 43]);
        assert!(parse_cells("a").is_err());
        let o = Overrides { problem: Some("briowu".into()), cells: Some(vec![320]), c_e: Some(1.0), ..Default::default() };
        let cfg = o.resolve(None).unwrap();
        assert_eq!(cfg.cells, vec![320]);
        assert_eq!(cfg.visc.c_e, 1.0);
    }
}
