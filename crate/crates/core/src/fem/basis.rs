//! Equispaced Lagrange bases on the reference interval and triangle.
//!
//! Nodes are lattice multi-indices `α` with `|α| = k`, listed in the order
//! vertices, edges, interior. Basis functions are the classical products
//! `φ_α(λ) = Π_c Π_{s<α_c} (kλ_c - s)/(s + 1)` in barycentric coordinates.

/// Reference Lagrange element of dimension 1 or 2 and degree 1..=3.
#[derive(Clone, Debug)]
pub struct LagrangeElement {
    pub dim: usize,
    pub degree: usize,
    /// Lattice index of each local node; length `dim + 1` used.
    pub nodes: Vec<[usize; 3]>,
}

impl LagrangeElement {
    pub fn new(dim: usize, degree: usize) -> Self {
        assert!((1..=2).contains(&dim) && (1..=3).contains(&degree));
        let k = degree;
        let mut nodes = Vec::new();
        let nv = dim + 1;
        for v in 0..nv {
            let mut a = [0; 3];
            a[v] = k;
            nodes.push(a);
        }
        for (a, b) in edge_pairs(dim) {
            for m in 1..k {
                let mut n = [0; 3];
                n[a] = k - m;
                n[b] = m;
                nodes.push(n);
            }
        }
        if dim == 2 && k == 3 {
            nodes.push([1, 1, 1]);
        }
        Self { dim, degree, nodes }
    }

    pub fn n_local(&self) -> usize {
        self.nodes.len()
    }

    /// Barycentric coordinates of a local node.
    pub fn node_barycentric(&self, a: usize) -> [f64; 3] {
        self.nodes[a].map(|v| v as f64 / self.degree as f64)
    }

    /// Barycentric coordinates of a reference point.
    pub fn barycentric(&self, xi: [f64; 2]) -> [f64; 3] {
        if self.dim == 1 {
            [1.0 - xi[0], xi[0], 0.0]
        } else {
            [1.0 - xi[0] - xi[1], xi[0], xi[1]]
        }
    }

    /// Value and barycentric partials of basis `a` at `lam`.
    fn eval_bary(&self, a: usize, lam: &[f64; 3]) -> (f64, [f64; 3]) {
        let k = self.degree as f64;
        let alpha = self.nodes[a];
        let nc = self.dim + 1;
        let mut factors = [(1.0, 0.0); 3];
        for c in 0..nc {
            // Product over s < α_c of (kλ - s)/(s+1) and its λ-derivative.
            let (mut f, mut df) = (1.0, 0.0);
            for s in 0..alpha[c] {
                let t = (k * lam[c] - s as f64) / (s as f64 + 1.0);
                let dt = k / (s as f64 + 1.0);
                df = df * t + f * dt;
                f *= t;
            }
            factors[c] = (f, df);
        }
        let mut value = 1.0;
        for f in factors.iter().take(nc) {
            value *= f.0;
        }
        let mut grad = [0.0; 3];
        for c in 0..nc {
            let mut g = factors[c].1;
            for (d, f) in factors.iter().enumerate().take(nc) {
                if d != c {
                    g *= f.0;
                }
            }
            grad[c] = g;
        }
        (value, grad)
    }

    pub fn value(&self, a: usize, xi: [f64; 2]) -> f64 {
        self.eval_bary(a, &self.barycentric(xi)).0
    }

    /// Gradient with respect to the reference coordinates.
    pub fn ref_gradient(&self, a: usize, xi: [f64; 2]) -> [f64; 2] {
        let (_, g) = self.eval_bary(a, &self.barycentric(xi));
        if self.dim == 1 {
            [g[1] - g[0], 0.0]
        } else {
            [g[1] - g[0], g[2] - g[0]]
        }
    }

    /// Reference coordinates of a local node.
    pub fn node_reference(&self, a: usize) -> [f64; 2] {
        let l = self.node_barycentric(a);
        [l[1], l[2]]
    }
}

/// Local vertex pairs carrying edge nodes, in local node order.
pub fn edge_pairs(dim: usize) -> Vec<(usize, usize)> {
    if dim == 1 {
        vec![(0, 1)]
    } else {
        vec![(0, 1), (1, 2), (2, 0)]
    }
}
