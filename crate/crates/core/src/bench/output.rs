//! CSV, VTK and manifest writers.

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::config::RunConfig;
use crate::error::{MhdError, Result};
use crate::fem::FeSpace;
use crate::state::{ConservedState, EnergyForm, Primitive};
use crate::thermo::EosModel;

pub const PROFILE_COLUMNS: [&str; 9] = ["x", "rho", "u_x", "u_y", "u_z", "B_x", "B_y", "B_z", "s"];
pub const SNAPSHOT_COLUMNS: [&str; 12] = ["t", "x", "y", "rho", "m_x", "m_y", "m_z", "E", "B_x", "B_y", "B_z", "phi"];

fn fmt(v: f64) -> String {
    format!("{v:.17e}")
}

/// 1D profile sorted by `x`; `s` is empty where the state has no entropy.
pub fn write_profile_csv(path: &Path, space: &FeSpace, u: &[ConservedState<f64>], eos: &EosModel, form: EnergyForm) -> Result<()> {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| space.dof_coords[a][0].total_cmp(&space.dof_coords[b][0]));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(PROFILE_COLUMNS)?;
    for i in order {
        let s = &u[i];
        let vel = s.velocity();
        let entropy = eos.specific_entropy(s.rho, s.specific_internal_energy(form)).map(fmt).unwrap_or_default();
        let row = [
            fmt(space.dof_coords[i][0]),
            fmt(s.rho),
            fmt(vel[0]),
            fmt(vel[1]),
            fmt(vel[2]),
            fmt(s.b[0]),
            fmt(s.b[1]),
            fmt(s.b[2]),
            entropy,
        ];
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Full nodal state in DOF order; `E` is the physical total energy.
pub fn write_snapshot_csv(path: &Path, t: f64, space: &FeSpace, u: &[ConservedState<f64>], form: EnergyForm) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SNAPSHOT_COLUMNS)?;
    for (s, x) in u.iter().zip(&space.dof_coords) {
        let row = [
            fmt(t),
            fmt(x[0]),
            fmt(x[1]),
            fmt(s.rho),
            fmt(s.m[0]),
            fmt(s.m[1]),
            fmt(s.m[2]),
            fmt(s.physical_energy(form)),
            fmt(s.b[0]),
            fmt(s.b[1]),
            fmt(s.b[2]),
            fmt(s.phi),
        ];
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A snapshot read back from disk, with the energy slot in physical form.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub coords: Vec<[f64; 2]>,
    pub states: Vec<ConservedState<f64>>,
}

impl Snapshot {
    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != SNAPSHOT_COLUMNS {
            return Err(MhdError::InvalidConfig(format!("{}: unexpected snapshot header {header:?}", path.display())));
        }
        let mut t = None;
        let mut coords = Vec::new();
        let mut states = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| MhdError::InvalidConfig(format!("{}: row {}: {e}", path.display(), line + 2)))?;
            if *t.get_or_insert(v[0]) != v[0] {
                return Err(MhdError::InvalidConfig(format!("{}: mixed times in one snapshot", path.display())));
            }
            coords.push([v[1], v[2]]);
            states.push(ConservedState { rho: v[3], m: [v[4], v[5], v[6]], energy: v[7], b: [v[8], v[9], v[10]], phi: v[11] });
        }
        let t = t.ok_or_else(|| MhdError::InvalidConfig(format!("{}: empty snapshot", path.display())))?;
        Ok(Self { t, coords, states })
    }

    /// States with the energy slot converted to `form`.
    pub fn stored_states(&self, form: EnergyForm) -> Vec<ConservedState<f64>> {
        self.states
            .iter()
            .map(|s| {
                let mut v = *s;
                if form == EnergyForm::TotalWithPhi {
                    v.energy += 0.5 * s.phi * s.phi;
                }
                v
            })
            .collect()
    }
}

/// Legacy ASCII VTK of the vertex values. Cells are written with their own
/// copies of the vertices so periodic seams do not wrap across the domain.
pub fn write_vtk(path: &Path, title: &str, space: &FeSpace, u: &[ConservedState<f64>], eos: &EosModel, form: EnergyForm) -> Result<()> {
    let mesh = &space.mesh;
    if mesh.dim != 2 {
        return Err(MhdError::InvalidConfig("VTK output is for 2D meshes".into()));
    }
    let nc = mesh.n_cells();
    let np = 3 * nc;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.replace('\n', " "))?;
    writeln!(w, "ASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {np} double")?;
    for c in 0..nc {
        for x in &mesh.cell_coords[c] {
            writeln!(w, "{:.17e} {:.17e} 0", x[0], x[1])?;
        }
    }
    writeln!(w, "CELLS {nc} {}", 4 * nc)?;
    for c in 0..nc {
        writeln!(w, "3 {} {} {}", 3 * c, 3 * c + 1, 3 * c + 2)?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "5")?;
    }
    let gamma = eos.gamma();
    let prim: Vec<Primitive> = (0..nc)
        .flat_map(|c| mesh.cells[c].iter().map(|&v| u[v]).collect::<Vec<_>>())
        .map(|s| Primitive {
            rho: s.rho,
            u: s.velocity(),
            p: (gamma - 1.0) * s.rho * s.specific_internal_energy(form),
            b: s.b,
            phi: s.phi,
        })
        .collect();
    writeln!(w, "POINT_DATA {np}")?;
    let scalar = |w: &mut BufWriter<std::fs::File>, name: &str, f: &dyn Fn(&Primitive) -> f64| -> Result<()> {
        writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
        for p in &prim {
            writeln!(w, "{:.17e}", f(p))?;
        }
        Ok(())
    };
    scalar(&mut w, "rho", &|p| p.rho)?;
    scalar(&mut w, "p", &|p| p.p)?;
    scalar(&mut w, "phi", &|p| p.phi)?;
    scalar(&mut w, "s", &|p| eos.specific_entropy(p.rho, p.p / ((gamma - 1.0) * p.rho)).unwrap_or(f64::NAN))?;
    for (name, sel) in [("velocity", 0usize), ("B", 1)] {
        writeln!(w, "VECTORS {name} double")?;
        for p in &prim {
            let v = if sel == 0 { p.u } else { p.b };
            writeln!(w, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Machine-readable record of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub crate_version: &'static str,
    pub config: RunConfig,
    pub n_dofs: usize,
    pub n_cells: usize,
    pub steps: usize,
    pub t_final_reached: f64,
    pub status: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| MhdError::Serialize(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh;

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let space = FeSpace::new(Mesh::interval(0.0, 1.0, 5, false).unwrap(), 1).unwrap();
        let u = space.interpolate(|x| {
            Primitive { rho: 1.0 + x[0], u: [x[0], 0.0, 0.0], p: 1.0, b: [0.5, x[0], 0.0], phi: 0.3 }
                .to_conserved(1.4, EnergyForm::TotalWithPhi)
        });
        let p = dir.path().join("s.csv");
        write_snapshot_csv(&p, 0.25, &space, &u, EnergyForm::TotalWithPhi).unwrap();
        let snap = Snapshot::read(&p).unwrap();
        assert_eq!(snap.t, 0.25);
        assert_eq!(snap.stored_states(EnergyForm::TotalWithPhi), u);
        assert_eq!(snap.coords, space.dof_coords);
    }

    #[test]
    fn profile_and_vtk_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let eos = EosModel::new(1.4).unwrap();
        let one = FeSpace::new(Mesh::interval(0.0, 1.0, 4, false).unwrap(), 3).unwrap();
        let u = one.interpolate(|_| Primitive { rho: 1.0, u: [0.0; 3], p: 1.0, b: [0.0; 3], phi: 0.0 }.to_conserved(1.4, EnergyForm::Total));
        let p = dir.path().join("p.csv");
        write_profile_csv(&p, &one, &u, &eos, EnergyForm::Total).unwrap();
        let mut r = csv::Reader::from_path(&p).unwrap();
        let xs: Vec<f64> = r.records().map(|r| r.unwrap()[0].parse().unwrap()).collect();
        assert_eq!(xs.len(), 13);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));

        let two = FeSpace::new(Mesh::crossed_grid([0.0, 0.0], [1.0, 1.0], 3, 3, [true, true]).unwrap(), 1).unwrap();
        let u = two.interpolate(|_| Primitive { rho: 1.0, u: [0.0; 3], p: 1.0, b: [0.0; 3], phi: 0.0 }.to_conserved(1.4, EnergyForm::Total));
        let v = dir.path().join("f.vtk");
        write_vtk(&v, "t", &two, &u, &eos, EnergyForm::Total).unwrap();
        let text = std::fs::read_to_string(&v).unwrap();
        assert!(text.contains("POINTS 108 double"));
        assert!(text.contains("CELLS 36 144"));
    }
}
