//! Structured interval meshes and crossed-triangle grids.

use serde::{Deserialize, Serialize};

use crate::error::{MhdError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Left,
    Right,
    Bottom,
    Top,
}

/// Conforming simplex mesh of an axis-aligned box.
///
/// `vertices` hold canonical coordinates (periodic images folded onto the
/// lower side); `cell_coords` hold each cell's unwrapped vertex positions.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub dim: usize,
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    pub periodic: [bool; 2],
    pub cells_per_dir: [usize; 2],
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub cell_coords: Vec<[[f64; 2]; 3]>,
    pub vertex_tags: Vec<Vec<BoundaryTag>>,
}

impl Mesh {
    pub fn interval(x0: f64, x1: f64, n: usize, periodic: bool) -> Result<Self> {
        if !(x1 > x0) {
            return Err(MhdError::Mesh(format!("empty interval [{x0}, {x1}]")));
        }
        if n < 3 {
            return Err(MhdError::Mesh(format!("need at least 3 cells, got {n}")));
        }
        let dx = (x1 - x0) / n as f64;
        let nv = if periodic { n } else { n + 1 };
        let vertices: Vec<[f64; 2]> = (0..nv).map(|i| [x0 + i as f64 * dx, 0.0]).collect();
        let mut vertex_tags = vec![Vec::new(); nv];
        if !periodic {
            vertex_tags[0].push(BoundaryTag::Left);
            vertex_tags[n].push(BoundaryTag::Right);
        }
        let mut cells = Vec::with_capacity(n);
        let mut cell_coords = Vec::with_capacity(n);
        for i in 0..n {
            cells.push([i, (i + 1) % nv, 0]);
            let a = x0 + i as f64 * dx;
            let b = if i + 1 == n { x1 } else { x0 + (i + 1) as f64 * dx };
            cell_coords.push([[a, 0.0], [b, 0.0], [0.0, 0.0]]);
        }
        Ok(Self {
            dim: 1,
            lower: [x0, 0.0],
            upper: [x1, 0.0],
            periodic: [periodic, false],
            cells_per_dir: [n, 1],
            vertices,
            cells,
            cell_coords,
            vertex_tags,
        })
    }

    /// Each rectangle is split into four triangles through its centre.
    pub fn crossed_grid(lower: [f64; 2], upper: [f64; 2], nx: usize, ny: usize, periodic: [bool; 2]) -> Result<Self> {
        if !(upper[0] > lower[0] && upper[1] > lower[1]) {
            return Err(MhdError::Mesh("degenerate box".into()));
        }
        if nx < 3 || ny < 3 {
            return Err(MhdError::Mesh(format!("need at least 3×3 cells, got {nx}×{ny}")));
        }
        let dx = (upper[0] - lower[0]) / nx as f64;
        let dy = (upper[1] - lower[1]) / ny as f64;
        let nvx = if periodic[0] { nx } else { nx + 1 };
        let nvy = if periodic[1] { ny } else { ny + 1 };
        let mut vertices = Vec::with_capacity(nvx * nvy + nx * ny);
        let mut vertex_tags = Vec::with_capacity(nvx * nvy + nx * ny);
        for j in 0..nvy {
            for i in 0..nvx {
                vertices.push([lower[0] + i as f64 * dx, lower[1] + j as f64 * dy]);
                let mut tags = Vec::new();
                if !periodic[0] && i == 0 {
                    tags.push(BoundaryTag::Left);
                }
                if !periodic[0] && i == nx {
                    tags.push(BoundaryTag::Right);
                }
                if !periodic[1] && j == 0 {
                    tags.push(BoundaryTag::Bottom);
                }
                if !periodic[1] && j == ny {
                    tags.push(BoundaryTag::Top);
                }
                vertex_tags.push(tags);
            }
        }
        let grid = |i: usize, j: usize| (j % nvy) * nvx + (i % nvx);
        let coord = |i: usize, j: usize| {
            let x = if i == nx { upper[0] } else { lower[0] + i as f64 * dx };
            let y = if j == ny { upper[1] } else { lower[1] + j as f64 * dy };
            [x, y]
        };
        let mut cells = Vec::with_capacity(4 * nx * ny);
        let mut cell_coords = Vec::with_capacity(4 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let c = vertices.len();
                let pc = [lower[0] + (i as f64 + 0.5) * dx, lower[1] + (j as f64 + 0.5) * dy];
                vertices.push(pc);
                vertex_tags.push(Vec::new());
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                for s in 0..4 {
                    let (a, b) = (corners[s], corners[(s + 1) % 4]);
                    cells.push([grid(a.0, a.1), grid(b.0, b.1), c]);
                    cell_coords.push([coord(a.0, a.1), coord(b.0, b.1), pc]);
                }
            }
        }
        let mesh = Self {
            dim: 2,
            lower,
            upper,
            periodic,
            cells_per_dir: [nx, ny],
            vertices,
            cells,
            cell_coords,
            vertex_tags,
        };
        mesh.check()?;
        Ok(mesh)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Signed measure of a cell.
    pub fn cell_volume(&self, c: usize) -> f64 {
        let x = &self.cell_coords[c];
        if self.dim == 1 {
            x[1][0] - x[0][0]
        } else {
            0.5 * ((x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]))
        }
    }

    pub fn domain_volume(&self) -> f64 {
        if self.dim == 1 {
            self.upper[0] - self.lower[0]
        } else {
            (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])
        }
    }

    fn check(&self) -> Result<()> {
        for c in 0..self.n_cells() {
            let v = self.cell_volume(c);
            if !(v > 0.0) {
                return Err(MhdError::Mesh(format!("cell {c} has non-positive volume {v}")));
            }
        }
        Ok(())
    }

    /// Fold a physical point into the canonical periodic cell.
    pub fn wrap(&self, mut x: [f64; 2]) -> [f64; 2] {
        for d in 0..self.dim {
            if self.periodic[d] {
                let len = self.upper[d] - self.lower[d];
                let tol = 1e-12 * len;
                if x[d] >= self.upper[d] - tol {
                    x[d] -= len;
                }
                if x[d] < self.lower[d] - tol {
                    x[d] += len;
                }
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_counts() {
        let m = Mesh::interval(0.0, 1.0, 10, false).unwrap();
        assert_eq!(m.n_vertices(), 11);
        let p = Mesh::interval(0.0, 1.0, 10, true).unwrap();
        assert_eq!(p.n_vertices(), 10);
        assert_eq!(p.cells[9], [9, 0, 0]);
        assert!((p.cell_volume(9) - 0.1).abs() < 1e-15);
        assert!(Mesh::interval(0.0, 1.0, 2, true).is_err());
    }

    #[test]
    fn crossed_grid_volumes_sum_to_box() {
        for periodic in [[true, true], [true, false], [false, false]] {
            let m = Mesh::crossed_grid([-1.0, -2.0], [3.0, 1.0], 5, 4, periodic).unwrap();
            assert_eq!(m.n_cells(), 80);
            let total: f64 = (0..m.n_cells()).map(|c| m.cell_volume(c)).sum();
            assert!((total - 12.0).abs() < 1e-12);
        }
        let m = Mesh::crossed_grid([0.0, 0.0], [1.0, 1.0], 49, 43, [true, true]).unwrap();
        assert_eq!(m.n_vertices(), 4214);
    }

    #[test]
    fn boundary_tags_on_walls() {
        let m = Mesh::crossed_grid([0.0, 0.0], [1.0, 1.0], 4, 4, [true, false]).unwrap();
        let top = m.vertex_tags.iter().filter(|t| t.contains(&BoundaryTag::Top)).count();
        assert_eq!(top, 4);
        assert!(m.vertex_tags.iter().all(|t| !t.contains(&BoundaryTag::Left)));
    }
}
