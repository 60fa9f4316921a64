//! Continuous Lagrange spaces, mass matrices and the mesh-size projection.

use std::collections::HashMap;

use super::basis::{edge_pairs, LagrangeElement};
use super::mesh::{BoundaryTag, Mesh};
use super::quadrature::{interval_rule, triangle_rule, QuadratureRule};
use super::sparse::{conjugate_gradient, CsrMatrix};
use crate::error::{MhdError, Result};

#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    /// `J^{-T}`: physical gradient = `jinv_t · reference gradient`.
    pub jinv_t: [[f64; 2]; 2],
    /// `|det J|`; quadrature weights already carry the reference measure.
    pub det: f64,
    pub volume: f64,
}

pub struct FeSpace {
    pub mesh: Mesh,
    pub element: LagrangeElement,
    pub n_dofs: usize,
    pub n_local: usize,
    cell_dofs: Vec<usize>,
    pub dof_coords: Vec<[f64; 2]>,
    pub dof_tags: Vec<Vec<BoundaryTag>>,
    pub quad: QuadratureRule,
    /// `phi[q][a]` at reference quadrature points.
    pub phi: Vec<Vec<f64>>,
    pub dphi_ref: Vec<Vec<[f64; 2]>>,
    /// Reference gradients at the local nodes, `node_dphi_ref[b][a] = ∇̂φ_a(x̂_b)`.
    pub node_dphi_ref: Vec<Vec<[f64; 2]>>,
    pub geom: Vec<CellGeometry>,
    /// `∫ φ̂_a ∇̂φ̂_b` on the reference cell, row-major in `(a, b)`.
    c_ref: Vec<[f64; 2]>,
}

impl FeSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Result<Self> {
        if !(1..=3).contains(&degree) {
            return Err(MhdError::InvalidConfig(format!("polynomial degree must be 1, 2 or 3, got {degree}")));
        }
        let dim = mesh.dim;
        let element = LagrangeElement::new(dim, degree);
        let n_local = element.n_local();
        let k = degree;
        let nv = mesh.n_vertices();
        let nvert_local = dim + 1;
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_dofs = Vec::with_capacity(mesh.n_cells() * n_local);
        let mut next_edge_dof = nv;
        // First pass: vertices and edges.
        let mut interior_cells = Vec::new();
        for (c, cell) in mesh.cells.iter().enumerate() {
            let start = cell_dofs.len();
            cell_dofs.extend_from_slice(&cell[..nvert_local]);
            for (a, b) in edge_pairs(dim) {
                let (ga, gb) = (cell[a], cell[b]);
                let key = (ga.min(gb), ga.max(gb));
                let base = *edge_index.entry(key).or_insert_with(|| {
                    let b0 = next_edge_dof;
                    next_edge_dof += k - 1;
                    b0
                });
                for m in 1..k {
                    let j = if ga < gb { m - 1 } else { k - 1 - m };
                    cell_dofs.push(base + j);
                }
            }
            if cell_dofs.len() - start < n_local {
                interior_cells.push(c);
                cell_dofs.push(usize::MAX);
            }
        }
        let mut n_dofs = next_edge_dof;
        for c in interior_cells {
            cell_dofs[c * n_local + n_local - 1] = n_dofs;
            n_dofs += 1;
        }

        let quad = if dim == 1 { interval_rule(2 * k + 1) } else { triangle_rule(2 * k + 1) };
        let phi: Vec<Vec<f64>> =
            quad.points.iter().map(|&p| (0..n_local).map(|a| element.value(a, p)).collect()).collect();
        let dphi_ref: Vec<Vec<[f64; 2]>> =
            quad.points.iter().map(|&p| (0..n_local).map(|a| element.ref_gradient(a, p)).collect()).collect();
        let node_dphi_ref = (0..n_local)
            .map(|b| {
                let p = element.node_reference(b);
                (0..n_local).map(|a| element.ref_gradient(a, p)).collect()
            })
            .collect();
        let mut c_ref = vec![[0.0; 2]; n_local * n_local];
        for (q, w) in quad.weights.iter().enumerate() {
            for a in 0..n_local {
                for b in 0..n_local {
                    for r in 0..2 {
                        c_ref[a * n_local + b][r] += w * phi[q][a] * dphi_ref[q][b][r];
                    }
                }
            }
        }

        let mut geom = Vec::with_capacity(mesh.n_cells());
        for c in 0..mesh.n_cells() {
            let x = &mesh.cell_coords[c];
            let g = if dim == 1 {
                let j = x[1][0] - x[0][0];
                CellGeometry { jinv_t: [[1.0 / j, 0.0], [0.0, 0.0]], det: j.abs(), volume: j.abs() }
            } else {
                let j = [[x[1][0] - x[0][0], x[2][0] - x[0][0]], [x[1][1] - x[0][1], x[2][1] - x[0][1]]];
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                // J^{-T} = (1/det) [[j11, -j10], [-j01, j00]]
                let jinv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
                CellGeometry { jinv_t, det: det.abs(), volume: 0.5 * det.abs() }
            };
            geom.push(g);
        }

        let mut dof_coords = vec![[f64::NAN; 2]; n_dofs];
        let mut dof_tags = vec![Vec::new(); n_dofs];
        for c in 0..mesh.n_cells() {
            let cell = &mesh.cells[c];
            for a in 0..n_local {
                let g = cell_dofs[c * n_local + a];
                if dof_coords[g][0].is_nan() {
                    let lam = element.node_barycentric(a);
                    let mut p = [0.0; 2];
                    for (v, l) in lam.iter().enumerate().take(nvert_local) {
                        for d in 0..2 {
                            p[d] += l * mesh.cell_coords[c][v][d];
                        }
                    }
                    dof_coords[g] = mesh.wrap(p);
                    let on: Vec<usize> = (0..nvert_local).filter(|&v| lam[v] > 0.0).map(|v| cell[v]).collect();
                    let mut tags = mesh.vertex_tags[on[0]].clone();
                    for v in &on[1..] {
                        tags.retain(|t| mesh.vertex_tags[*v].contains(t));
                    }
                    dof_tags[g] = tags;
                }
            }
        }
        Ok(Self {
            mesh,
            element,
            n_dofs,
            n_local,
            cell_dofs,
            dof_coords,
            dof_tags,
            quad,
            phi,
            dphi_ref,
            node_dphi_ref,
            geom,
            c_ref,
        })
    }

    pub fn degree(&self) -> usize {
        self.element.degree
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn cell_dofs(&self, c: usize) -> &[usize] {
        &self.cell_dofs[c * self.n_local..(c + 1) * self.n_local]
    }

    /// Physical gradient from a reference gradient.
    #[inline]
    pub fn physical_gradient(&self, c: usize, g: [f64; 2]) -> [f64; 2] {
        let j = &self.geom[c].jinv_t;
        [j[0][0] * g[0] + j[0][1] * g[1], j[1][0] * g[0] + j[1][1] * g[1]]
    }

    /// Physical basis gradients of cell `c` at quadrature point `q`.
    pub fn gradients_at(&self, c: usize, q: usize, out: &mut [[f64; 2]]) {
        for a in 0..self.n_local {
            out[a] = self.physical_gradient(c, self.dphi_ref[q][a]);
        }
    }

    /// Physical position of quadrature point `q` in cell `c` (unwrapped).
    pub fn quad_point(&self, c: usize, q: usize) -> [f64; 2] {
        let x = &self.mesh.cell_coords[c];
        let p = self.quad.points[q];
        if self.dim() == 1 {
            [x[0][0] + p[0] * (x[1][0] - x[0][0]), 0.0]
        } else {
            [
                x[0][0] + p[0] * (x[1][0] - x[0][0]) + p[1] * (x[2][0] - x[0][0]),
                x[0][1] + p[0] * (x[1][1] - x[0][1]) + p[1] * (x[2][1] - x[0][1]),
            ]
        }
    }

    /// `C^K_ab = ∫_K φ_a ∇φ_b`, written into `out[a * n_local + b]`.
    pub fn cell_c_matrix(&self, c: usize, out: &mut [[f64; 2]]) {
        let det = self.geom[c].det;
        for (o, r) in out.iter_mut().zip(&self.c_ref) {
            let g = self.physical_gradient(c, *r);
            *o = [det * g[0], det * g[1]];
        }
    }

    pub fn interpolate<T>(&self, f: impl Fn([f64; 2]) -> T) -> Vec<T> {
        self.dof_coords.iter().map(|&x| f(x)).collect()
    }

    fn pattern(&self) -> CsrMatrix {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); self.n_dofs];
        for c in 0..self.n_cells() {
            let dofs = self.cell_dofs(c);
            for &i in dofs {
                rows[i].extend_from_slice(dofs);
            }
        }
        CsrMatrix::from_pattern(rows)
    }

    pub fn consistent_mass(&self) -> CsrMatrix {
        let mut m = self.pattern();
        let n = self.n_local;
        for c in 0..self.n_cells() {
            let dofs = self.cell_dofs(c);
            let det = self.geom[c].det;
            for (q, w) in self.quad.weights.iter().enumerate() {
                let wq = w * det;
                for a in 0..n {
                    for b in 0..n {
                        m.add(dofs[a], dofs[b], wq * self.phi[q][a] * self.phi[q][b]);
                    }
                }
            }
        }
        m
    }

    /// Row sums of the consistent mass; rejects degree 2 and any non-positive entry.
    pub fn lumped_mass(&self) -> Result<Vec<f64>> {
        if self.degree() == 2 {
            return Err(MhdError::InvalidConfig(
                "lumped mass is not available for P2: zero or negative lumped entries".into(),
            ));
        }
        let d = self.consistent_mass().row_sums();
        if let Some((i, v)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(MhdError::InvalidConfig(format!("zero or negative lumped entry {v:e} at dof {i}")));
        }
        Ok(d)
    }

    /// `Σ_K w_K ∫_K ∇φ_a·∇φ_b`.
    pub fn weighted_stiffness(&self, weight: impl Fn(usize) -> f64) -> CsrMatrix {
        let mut s = self.pattern();
        let n = self.n_local;
        let mut g = vec![[0.0; 2]; n];
        for c in 0..self.n_cells() {
            let dofs = self.cell_dofs(c);
            let wk = weight(c) * self.geom[c].det;
            for (q, w) in self.quad.weights.iter().enumerate() {
                self.gradients_at(c, q, &mut g);
                for a in 0..n {
                    for b in 0..n {
                        s.add(dofs[a], dofs[b], w * wk * (g[a][0] * g[b][0] + g[a][1] * g[b][1]));
                    }
                }
            }
        }
        s
    }

    /// Smoothed nodal mesh size: `(h, v) + Σ_K (|K|^{2/d} ∇h, ∇v)_K = (|K|^{1/d}/k, v)`.
    pub fn mesh_size_field(&self) -> Result<Vec<f64>> {
        let d = self.dim() as f64;
        let k = self.degree() as f64;
        let mut a = self.consistent_mass();
        let s = self.weighted_stiffness(|c| self.geom[c].volume.powf(2.0 / d));
        a.add_scaled(1.0, &s);
        let mut rhs = vec![0.0; self.n_dofs];
        for c in 0..self.n_cells() {
            let dofs = self.cell_dofs(c);
            let val = self.geom[c].volume.powf(1.0 / d) / k;
            for (q, w) in self.quad.weights.iter().enumerate() {
                for (i, &g) in dofs.iter().enumerate() {
                    rhs[g] += w * self.geom[c].det * val * self.phi[q][i];
                }
            }
        }
        let mut h = vec![0.0; self.n_dofs];
        conjugate_gradient(&a, &rhs, &mut h, None, 1e-14, 10 * self.n_dofs + 100)?;
        Ok(h)
    }

    /// Gradient of a scalar nodal field at every quadrature point, `[cell][q]`.
    pub fn gradient_at_quadrature(&self, field: &[f64]) -> Vec<Vec<[f64; 2]>> {
        let mut g = vec![[0.0; 2]; self.n_local];
        (0..self.n_cells())
            .map(|c| {
                let dofs = self.cell_dofs(c);
                (0..self.quad.len())
                    .map(|q| {
                        self.gradients_at(c, q, &mut g);
                        let mut out = [0.0; 2];
                        for (a, &i) in dofs.iter().enumerate() {
                            out[0] += g[a][0] * field[i];
                            out[1] += g[a][1] * field[i];
                        }
                        out
                    })
                    .collect()
            })
            .collect()
    }

    /// Degrees of freedom carrying any of the given tags.
    pub fn tagged_dofs(&self, tags: &[BoundaryTag]) -> Vec<usize> {
        (0..self.n_dofs).filter(|&i| self.dof_tags[i].iter().any(|t| tags.contains(t))).collect()
    }
}
