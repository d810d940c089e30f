//! Gauss-Legendre rules, collapsed simplex rules and a fan triangulation of
//! polytopes from their face lattice.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::polytope::{FaceLattice, WeightedSupport};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(t), P_n'(t))` by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (t * p1 - p0) / (t * t - 1.0))
}

/// Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|t| 0.5 * (t + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// A cubature rule: points and weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Rule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Tensor Gauss rule on the full-dimensional simplex with the given vertices,
/// collapsed onto it by the Duffy map.
pub fn simplex_rule(vertices: &[Vec<f64>], order: usize) -> Rule {
    let k = vertices.len() - 1;
    let m = vertices[0].len();
    let edges = DMatrix::from_fn(m, k, |i, j| vertices[j + 1][i] - vertices[0][i]);
    let volume = if k == m { edges.determinant().abs() } else { 0.0 };
    let (t, w) = gauss_legendre_unit(order);
    let mut rule = Rule::default();
    let total = order.pow(k as u32);
    for mut code in 0..total {
        let mut lambda = vec![0.0; k];
        let mut jac = volume;
        let mut rest = 1.0;
        for (j, l) in lambda.iter_mut().enumerate() {
            let q = code % order;
            code /= order;
            *l = rest * t[q];
            jac *= w[q] * libm::pow(1.0 - t[q], (k - 1 - j) as f64);
            rest *= 1.0 - t[q];
        }
        let p: Vec<f64> = (0..m)
            .map(|i| vertices[0][i] + (0..k).map(|j| lambda[j] * edges[(i, j)]).sum::<f64>())
            .collect();
        rule.points.push(p);
        rule.weights.push(jac);
    }
    rule
}

/// Simplices of a fan triangulation: each face is coned from the centroid of
/// its support points over the triangulations of its facets.
pub fn triangulate(lattice: &FaceLattice, support: &WeightedSupport) -> Vec<Vec<Vec<f64>>> {
    fn rec(face: usize, lattice: &FaceLattice, support: &WeightedSupport) -> Vec<Vec<Vec<f64>>> {
        let f = &lattice.faces[face];
        let pts = support.points();
        if f.dim == 0 {
            return vec![vec![pts[f.indices[0]].clone()]];
        }
        let k = f.indices.len() as f64;
        let centroid: Vec<f64> =
            (0..support.dim()).map(|i| f.indices.iter().map(|&j| pts[j][i]).sum::<f64>() / k).collect();
        let mut out = Vec::new();
        for sub in lattice.subfaces(face, f.dim - 1) {
            for mut s in rec(sub, lattice, support) {
                s.push(centroid.clone());
                out.push(s);
            }
        }
        out
    }
    rec(lattice.top_id(), lattice, support)
}

/// Composite rule over `P` from [`triangulate`].
pub fn polytope_rule(lattice: &FaceLattice, support: &WeightedSupport, order: usize) -> Rule {
    let mut rule = Rule::default();
    for s in triangulate(lattice, support) {
        let r = simplex_rule(&s, order);
        rule.points.extend(r.points);
        rule.weights.extend(r.weights);
    }
    rule
}
