//! Quadrature on the reference interval `[0, 1]` and the reference triangle.

/// Points in reference coordinates with weights that sum to the reference measure.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Rule on `[0, 1]` exact for polynomials of the given degree.
pub fn interval_rule(degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let (x, w) = gauss_legendre(n);
    QuadratureRule {
        points: x.iter().map(|&t| [0.5 * (t + 1.0), 0.0]).collect(),
        weights: w.iter().map(|&v| 0.5 * v).collect(),
        degree: 2 * n - 1,
    }
}

fn symmetric_orbit(points: &mut Vec<[f64; 2]>, weights: &mut Vec<f64>, a: f64, w: f64) {
    let b = 1.0 - 2.0 * a;
    for p in [[a, a], [b, a], [a, b]] {
        points.push(p);
        weights.push(0.5 * w);
    }
}

/// Rule on the triangle `{ξ, η ≥ 0, ξ + η ≤ 1}` exact for the given degree.
pub fn triangle_rule(degree: usize) -> QuadratureRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match degree {
        0..=4 => {
            symmetric_orbit(&mut points, &mut weights, 0.445948490915965, 0.223381589678011);
            symmetric_orbit(&mut points, &mut weights, 0.091576213509771, 0.109951743655322);
            QuadratureRule { points, weights, degree: 4 }
        }
        5 => {
            points.push([1.0 / 3.0, 1.0 / 3.0]);
            weights.push(0.5 * 0.225);
            symmetric_orbit(&mut points, &mut weights, 0.470142064105115, 0.132394152788506);
            symmetric_orbit(&mut points, &mut weights, 0.101286507323456, 0.125939180544827);
            QuadratureRule { points, weights, degree: 5 }
        }
        _ => {
            // Collapsed Gauss product: the Duffy Jacobian adds one degree in the collapsed direction.
            let n = (degree + 2).div_ceil(2);
            let (x, w) = gauss_legendre(n);
            for (i, &s) in x.iter().enumerate() {
                for (j, &t) in x.iter().enumerate() {
                    let u = 0.5 * (s + 1.0);
                    let v = 0.5 * (t + 1.0);
                    points.push([u * (1.0 - v), v]);
                    weights.push(0.25 * w[i] * w[j] * (1.0 - v));
                }
            }
            QuadratureRule { points, weights, degree: 2 * n - 2 }
        }
    }
}
