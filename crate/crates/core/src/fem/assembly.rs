//! Galerkin residual assembly, boundary conditions and mass inversion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mesh::BoundaryTag;
use super::space::FeSpace;
use super::sparse::{conjugate_gradient, CsrMatrix};
use crate::error::{MhdError, Result};
use crate::flux::{advective_kernel, antisymmetric_mass_tensor, ViscosityCoefficients, ViscousFlux};
use crate::sources::{psi_source, GlmCleaning, GlmParams, SourceConfig};
use crate::state::{ConservedState, EnergyForm, StateGradient, NCOMP};
use crate::thermo::EosModel;

/// The continuous model: closure, regularization and source strategies.
pub struct PhysicsModel {
    pub eos: EosModel,
    pub flux: Box<dyn ViscousFlux<f64>>,
    pub glm: Box<dyn GlmCleaning<f64>>,
    pub source: SourceConfig,
    pub c_r: f64,
}

impl PhysicsModel {
    pub fn form(&self) -> EnergyForm {
        self.glm.energy_form()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Periodic,
    DirichletFixed,
    SlipWall,
}

impl FromStr for BoundaryCondition {
    type Err = MhdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Self::Periodic),
            "dirichlet_fixed" => Ok(Self::DirichletFixed),
            "slip_wall" => Ok(Self::SlipWall),
            other => Err(MhdError::UnknownName {
                kind: "boundary condition",
                name: other.into(),
                available: "periodic, dirichlet_fixed, slip_wall".into(),
            }),
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Periodic => "periodic",
            Self::DirichletFixed => "dirichlet_fixed",
            Self::SlipWall => "slip_wall",
        })
    }
}

/// `free[i][c]` is false where component `c` of dof `i` is held fixed.
pub fn constraint_mask(space: &FeSpace, bc: BoundaryCondition) -> Vec<[bool; NCOMP]> {
    let mut mask = vec![[true; NCOMP]; space.n_dofs];
    match bc {
        BoundaryCondition::Periodic => {}
        BoundaryCondition::DirichletFixed => {
            let all = [BoundaryTag::Left, BoundaryTag::Right, BoundaryTag::Bottom, BoundaryTag::Top];
            for i in space.tagged_dofs(&all) {
                mask[i] = [false; NCOMP];
            }
        }
        BoundaryCondition::SlipWall => {
            for i in space.tagged_dofs(&[BoundaryTag::Bottom, BoundaryTag::Top]) {
                mask[i][2] = false;
                mask[i][6] = false;
            }
            for i in space.tagged_dofs(&[BoundaryTag::Left, BoundaryTag::Right]) {
                mask[i][1] = false;
                mask[i][5] = false;
            }
        }
    }
    mask
}

/// Zero the residual entries of constrained components.
pub fn apply_bc(residual: &mut [ConservedState<f64>], mask: &[[bool; NCOMP]]) {
    for (r, m) in residual.iter_mut().zip(mask) {
        for (c, free) in m.iter().enumerate() {
            if !free {
                r.set(c, 0.0);
            }
        }
    }
}

pub enum MassOperator {
    Lumped(Vec<f64>),
    Consistent { matrix: CsrMatrix, tol: f64 },
}

impl MassOperator {
    pub fn new(space: &FeSpace, lumped: bool, tol: f64) -> Result<Self> {
        if lumped {
            Ok(Self::Lumped(space.lumped_mass()?))
        } else {
            Ok(Self::Consistent { matrix: space.consistent_mass(), tol })
        }
    }

    pub fn is_lumped(&self) -> bool {
        matches!(self, Self::Lumped(_))
    }

    /// `M · field`.
    pub fn apply(&self, field: &[ConservedState<f64>]) -> Vec<ConservedState<f64>> {
        match self {
            Self::Lumped(d) => field.iter().zip(d).map(|(u, m)| u.scaled(*m)).collect(),
            Self::Consistent { matrix, .. } => {
                let n = field.len();
                let mut out = vec![ConservedState::zero(); n];
                let mut x = vec![0.0; n];
                let mut y = vec![0.0; n];
                for c in 0..NCOMP {
                    for i in 0..n {
                        x[i] = field[i].get(c);
                    }
                    matrix.matvec(&x, &mut y);
                    for i in 0..n {
                        out[i].set(c, y[i]);
                    }
                }
                out
            }
        }
    }

    /// Solve `M x = r` with constrained entries held at zero.
    pub fn solve(&self, r: &[ConservedState<f64>], mask: &[[bool; NCOMP]]) -> Result<Vec<ConservedState<f64>>> {
        let n = r.len();
        let mut out: Vec<ConservedState<f64>> = match self {
            Self::Lumped(d) => r.iter().zip(d).map(|(u, m)| u.scaled(1.0 / m)).collect(),
            Self::Consistent { matrix, tol } => {
                let mut out = vec![ConservedState::zero(); n];
                let mut b = vec![0.0; n];
                let mut x = vec![0.0; n];
                let mut m = vec![true; n];
                for c in 0..NCOMP {
                    let mut any = false;
                    for i in 0..n {
                        b[i] = r[i].get(c);
                        m[i] = mask[i][c];
                        any |= b[i] != 0.0;
                        // Diagonal-scaled initial guess.
                        x[i] = b[i] / matrix.get(i, i);
                    }
                    if !any {
                        continue;
                    }
                    conjugate_gradient(matrix, &b, &mut x, Some(&m), *tol, 20 * n + 100)?;
                    for i in 0..n {
                        out[i].set(c, x[i]);
                    }
                }
                out
            }
        };
        apply_bc(&mut out, mask);
        Ok(out)
    }
}

/// Per-stage inputs that are frozen over one time step.
pub struct StageContext<'a> {
    pub visc: &'a [ViscosityCoefficients],
    pub c_h: f64,
}

/// The semi-discrete operator `U ↦ M⁻¹ r(U)` on a fixed space.
pub struct SpatialOperator {
    pub space: FeSpace,
    pub model: PhysicsModel,
    pub bc: BoundaryCondition,
    pub mass: MassOperator,
    pub mask: Vec<[bool; NCOMP]>,
    /// Nodal mesh size from the smoothed projection.
    pub h: Vec<f64>,
    h_cell: Vec<f64>,
}

const MAX_LOCAL: usize = 10;

impl SpatialOperator {
    pub fn new(space: FeSpace, model: PhysicsModel, bc: BoundaryCondition, lumped: bool, cg_tol: f64) -> Result<Self> {
        let periodic_mesh = space.mesh.periodic.iter().take(space.dim()).all(|p| *p);
        if bc == BoundaryCondition::Periodic && !periodic_mesh {
            return Err(MhdError::InvalidConfig("periodic boundary condition on a non-periodic mesh".into()));
        }
        let mass = MassOperator::new(&space, lumped, cg_tol)?;
        let h = space.mesh_size_field()?;
        let h_cell = (0..space.n_cells())
            .map(|c| {
                let d = space.cell_dofs(c);
                d.iter().map(|&i| h[i]).sum::<f64>() / d.len() as f64
            })
            .collect();
        let mask = constraint_mask(&space, bc);
        Ok(Self { space, model, bc, mass, mask, h, h_cell })
    }

    pub fn form(&self) -> EnergyForm {
        self.model.form()
    }

    /// Galerkin residual `r_i` with `M dU/dt = r` (boundary rows not yet zeroed).
    pub fn assemble_rhs(&self, u: &[ConservedState<f64>], ctx: &StageContext) -> Result<Vec<ConservedState<f64>>> {
        let space = &self.space;
        let model = &self.model;
        let form = model.form();
        let dim = space.dim();
        let n = space.n_local;
        let mut columns = Vec::with_capacity(u.len());
        for (i, s) in u.iter().enumerate() {
            if !(s.rho > 0.0) || !s.is_finite() {
                return Err(MhdError::NonPositiveDensity { rho: s.rho, location: format!("dof {i}") });
            }
            let f = advective_kernel(s, &model.eos, form);
            columns.push([f.column(0), f.column(1)]);
        }
        let viscous = model.flux.name() != "none";
        let compensation = model.flux.energy_compensation();
        let sources = !model.source.is_zero() || model.glm.active();
        let quad_needed = viscous || sources;

        let mut r = vec![ConservedState::zero(); u.len()];
        let mut cmat = vec![[0.0; 2]; n * n];
        let mut g = vec![[0.0; 2]; n];
        let mut local = [ConservedState::<f64>::zero(); MAX_LOCAL];
        for c in 0..space.n_cells() {
            let dofs = space.cell_dofs(c);
            space.cell_c_matrix(c, &mut cmat);
            for l in local.iter_mut().take(n) {
                *l = ConservedState::zero();
            }
            // Rows of C sum to zero, so differencing against the row DOF keeps uniform states exact.
            for a in 0..n {
                let ca = &columns[dofs[a]];
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let cab = cmat[a * n + b];
                    let cb = &columns[dofs[b]];
                    for d in 0..dim {
                        let mut diff = cb[d];
                        diff.axpy(-1.0, &ca[d]);
                        local[a].axpy(-cab[d], &diff);
                    }
                }
            }
            if quad_needed {
                let det = space.geom[c].det;
                let nu = &ctx.visc[c];
                let params = GlmParams { c_h: ctx.c_h, c_r: model.c_r, h: self.h_cell[c] };
                for (q, wref) in space.quad.weights.iter().enumerate() {
                    let w = wref * det;
                    space.gradients_at(c, q, &mut g);
                    let u0 = u[dofs[0]];
                    let mut uq = ConservedState::zero();
                    let mut du = [ConservedState::zero(); 3];
                    for (a, &i) in dofs.iter().enumerate() {
                        uq.axpy(space.phi[q][a], &u[i]);
                        let mut diff = u[i];
                        diff.axpy(-1.0, &u0);
                        for d in 0..dim {
                            du[d].axpy(g[a][d], &diff);
                        }
                    }
                    if !(uq.rho > 0.0) {
                        return Err(MhdError::NonPositiveDensity { rho: uq.rho, location: format!("cell {c}") });
                    }
                    if viscous {
                        let fv = model.flux.flux(&uq, &du, nu, &model.eos, form)?;
                        for d in 0..dim {
                            let col = fv.column(d);
                            for a in 0..n {
                                local[a].axpy(-w * g[a][d], &col);
                            }
                        }
                        if compensation && nu.kappa > 0.0 {
                            let sg = StateGradient::from_conserved(&uq, &du, form);
                            let vel = uq.velocity();
                            let f = sg.grad_rho.map(|v| nu.kappa * v);
                            let at = antisymmetric_mass_tensor(&vel, &f);
                            let mut a_grad_u = 0.0;
                            let mut au = [0.0; 3];
                            for k in 0..3 {
                                for j in 0..3 {
                                    a_grad_u += at[k][j] * sg.grad_u[k][j];
                                    au[k] += at[k][j] * vel[j];
                                }
                            }
                            for a in 0..n {
                                let gd: f64 = (0..dim).map(|k| au[k] * g[a][k]).sum();
                                local[a].energy -= 0.5 * w * (a_grad_u * space.phi[q][a] + gd);
                            }
                        }
                    }
                    if sources {
                        let div_b: f64 = (0..dim).map(|d| du[d].b[d]).sum();
                        let grad_phi = [du[0].phi, du[1].phi, du[2].phi];
                        let s = psi_source(&uq, div_b, &model.source)
                            + model.glm.source(&uq, &grad_phi, div_b, &params);
                        for a in 0..n {
                            local[a].axpy(w * space.phi[q][a], &s);
                        }
                    }
                }
            }
            for (a, &i) in dofs.iter().enumerate() {
                r[i] += local[a];
            }
        }
        Ok(r)
    }

    /// `dU/dt = M⁻¹ r(U)` with boundary conditions applied.
    pub fn time_derivative(&self, u: &[ConservedState<f64>], ctx: &StageContext) -> Result<Vec<ConservedState<f64>>> {
        let mut r = self.assemble_rhs(u, ctx)?;
        apply_bc(&mut r, &self.mask);
        self.mass.solve(&r, &self.mask)
    }
}
