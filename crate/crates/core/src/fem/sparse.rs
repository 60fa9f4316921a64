//! Compressed sparse rows and a Jacobi-preconditioned conjugate gradient.

use crate::error::{MhdError, Result};

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sparsity from per-row sorted, deduplicated column lists; values zero.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(&r);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        Self { n, row_ptr, cols, vals }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        let k = row.binary_search(&j).expect("entry outside sparsity pattern");
        self.vals[self.row_ptr[i] + k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).map(|k| self.vals[self.row_ptr[i] + k]).unwrap_or(0.0)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `self + a·other` for matrices sharing a pattern.
    pub fn add_scaled(&mut self, a: f64, other: &CsrMatrix) {
        assert_eq!(self.cols.len(), other.cols.len());
        for (v, o) in self.vals.iter_mut().zip(&other.vals) {
            *v += a * o;
        }
    }
}

/// Solve `A x = b` for SPD `A`. Entries with `mask[i] == false` are held at zero.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    mask: Option<&[bool]>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = a.n;
    let keep = |v: &mut [f64]| {
        if let Some(m) = mask {
            for (vi, &k) in v.iter_mut().zip(m) {
                if !k {
                    *vi = 0.0;
                }
            }
        }
    };
    let diag = a.diagonal();
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    keep(&mut r);
    keep(x);
    let mut bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bn == 0.0 {
        bn = 1.0;
    }
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    keep(&mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rn: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rn <= rel_tol * bn {
            return Ok(it);
        }
        a.matvec(&p, &mut ap);
        keep(&mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(MhdError::Solver(format!("matrix not positive definite (pAp = {pap:e})")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        keep(&mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(MhdError::Solver(format!("no convergence in {max_iter} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let rows = (0..n).map(|i| (i.saturating_sub(1)..(i + 2).min(n)).collect()).collect();
        let mut a = CsrMatrix::from_pattern(rows);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0);
            }
        }
        a
    }

    #[test]
    fn cg_solves_tridiagonal() {
        let a = laplacian_1d(50);
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; 50];
        a.matvec(&xs, &mut b);
        let mut x = vec![0.0; 50];
        conjugate_gradient(&a, &b, &mut x, None, 1e-13, 500).unwrap();
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn masked_entries_stay_zero() {
        let a = laplacian_1d(10);
        let b = vec![1.0; 10];
        let mut mask = vec![true; 10];
        mask[0] = false;
        mask[9] = false;
        let mut x = vec![0.0; 10];
        conjugate_gradient(&a, &b, &mut x, Some(&mask), 1e-13, 100).unwrap();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[9], 0.0);
        // Interior rows satisfy the restricted system.
        let mut y = vec![0.0; 10];
        a.matvec(&x, &mut y);
        for i in 1..9 {
            assert!((y[i] - 1.0).abs() < 1e-10);
        }
    }
}
