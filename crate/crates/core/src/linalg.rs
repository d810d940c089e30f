//! Small dense helpers shared by the geometric and statistical modules.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).fold(0.0, f64::max)
}

/// `log Σ exp(v_i)` with the max shift.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(v.iter().map(|&x| libm::exp(x - max)).sum::<f64>())
}

/// Orthonormal basis (as matrix columns) of `span(vectors)` by twice-iterated
/// modified Gram-Schmidt. Vectors whose residual norm falls below `tol`
/// (relative to their own norm) are dropped.
pub fn orthonormal_basis(vectors: &[Vec<f64>], dim: usize, tol: f64) -> DMatrix<f64> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm(&w);
        if n > tol * scale {
            w.iter_mut().for_each(|x| *x /= n);
            basis.push(w);
        }
        if basis.len() == dim {
            break;
        }
    }
    DMatrix::from_fn(dim, basis.len(), |i, j| basis[j][i])
}

/// A unit vector orthogonal to every column of `basis`, or `None` when the
/// columns already span the whole space.
pub fn complement_vector(basis: &DMatrix<f64>) -> Option<Vec<f64>> {
    let dim = basis.nrows();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 0..dim {
        let mut w = alloc::vec![0.0; dim];
        w[k] = 1.0;
        for _ in 0..2 {
            for col in basis.column_iter() {
                let c: f64 = w.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                for (wi, bi) in w.iter_mut().zip(col.iter()) {
                    *wi -= c * bi;
                }
            }
        }
        let n = norm(&w);
        if best.as_ref().map_or(true, |(bn, _)| n > *bn) {
            best = Some((n, w));
        }
    }
    match best {
        Some((n, mut w)) if n > 1e-8 => {
            w.iter_mut().for_each(|x| *x /= n);
            Some(w)
        }
        _ => None,
    }
}

/// Solves `h d = rhs` for symmetric positive (semi)definite `h`. Falls back to
/// a ridge-regularized Cholesky when `h` is numerically singular.
pub fn spd_solve(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(rhs));
    }
    let scale = (0..h.nrows()).map(|i| h[(i, i)]).fold(0.0, f64::max).max(1e-300);
    let mut ridge = 1e-12 * scale;
    for _ in 0..12 {
        let mut reg = h.clone();
        for i in 0..h.nrows() {
            reg[(i, i)] += ridge;
        }
        if let Some(ch) = reg.cholesky() {
            return Some(ch.solve(rhs));
        }
        ridge *= 100.0;
    }
    None
}
