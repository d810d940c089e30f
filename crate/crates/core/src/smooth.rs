//! The smooth-density Bernstein measure on `[0, 1]`.
//!
//! With `μ(τ) = 1/(1 − e^{−τ}) − 1/τ` and `τ(x) = μ^{-1}(x)` the density is
//! `ρ(z, x) = τ e^{zτ}/(e^τ − 1)`, an exponential tilt of the uniform density.
//! Convolution powers are computed on a uniform grid with end-corrected
//! trapezoid weights. Because every `ρ(·, x)` is a tilt of the same base
//! sequence, [`ToddPowerGrid`] convolves the base once and reuses it for all `x`.

use alloc::vec;
use alloc::vec::Vec;

use crate::quadrature::gauss_legendre_unit;
use crate::{Error, Result};

/// Below this `|τ|` the Todd functions use their Taylor series.
pub const SERIES_THRESHOLD: f64 = 0.2;

/// `todd_tau` accepts `x ∈ (ε, 1 − ε)`.
pub const ENDPOINT_EPS: f64 = 1e-10;

/// Allowed drift of the plain trapezoid mass of `ρ(·, x)` from 1.
pub const MASS_DRIFT_TOL: f64 = 1e-6;

/// End corrections of the fourth-order Gregory rule.
const GREGORY_ENDS: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

/// `μ(τ)`.
pub fn todd_mu(tau: f64) -> f64 {
    if tau.abs() < SERIES_THRESHOLD {
        let t2 = tau * tau;
        return 0.5
            + tau
                * (1.0 / 12.0
                    + t2 * (-1.0 / 720.0
                        + t2 * (1.0 / 30240.0
                            + t2 * (-1.0 / 1209600.0 + t2 * (1.0 / 47900160.0 - t2 * 691.0 / 1307674368000.0)))));
    }
    1.0 / -libm::expm1(-tau) - 1.0 / tau
}

/// `μ'(τ) > 0`, an even function.
pub fn todd_mu_prime(tau: f64) -> f64 {
    let t = tau.abs();
    if t < SERIES_THRESHOLD {
        let t2 = t * t;
        return 1.0 / 12.0
            + t2 * (-1.0 / 240.0
                + t2 * (1.0 / 6048.0 + t2 * (-1.0 / 172800.0 + t2 * (1.0 / 5322240.0 - t2 * 7601.0 / 1307674368000.0))));
    }
    let e = libm::exp(-t);
    let d = libm::expm1(-t);
    1.0 / (t * t) - e / (d * d)
}

/// `log χ(τ)` with `χ(τ) = (e^τ − 1)/τ`.
pub fn todd_log_chi(tau: f64) -> f64 {
    if tau.abs() < SERIES_THRESHOLD {
        let t2 = tau * tau;
        return tau / 2.0
            + t2 * (1.0 / 24.0
                + t2 * (-1.0 / 2880.0 + t2 * (1.0 / 181440.0 + t2 * (-1.0 / 9676800.0 + t2 / 479001600.0))));
    }
    if tau > 0.0 {
        tau + libm::log(-libm::expm1(-tau)) - libm::log(tau)
    } else {
        libm::log(-libm::expm1(tau)) - libm::log(-tau)
    }
}

/// Solver and quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToddFamily {
    pub tol: f64,
    pub max_iter: usize,
    /// Gauss-Legendre nodes used by [`ToddFamily::integrate`].
    pub quad_nodes: usize,
}

impl Default for ToddFamily {
    fn default() -> Self {
        Self { tol: 1e-13, max_iter: 200, quad_nodes: 64 }
    }
}

impl ToddFamily {
    /// `τ(x)` by Newton's method safeguarded with the bracket `[−1/x, 1/(1−x)]`.
    pub fn tau(&self, x: f64) -> Result<f64> {
        if !(ENDPOINT_EPS..=1.0 - ENDPOINT_EPS).contains(&x) {
            return Err(Error::InvalidArgument(alloc::format!("x = {x} is not in ({ENDPOINT_EPS:e}, 1 − {ENDPOINT_EPS:e})")));
        }
        if x == 0.5 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (-1.0 / x, 1.0 / (1.0 - x));
        let mut t = 0.0;
        let mut resid = f64::INFINITY;
        for _ in 0..self.max_iter {
            let r = todd_mu(t) - x;
            resid = r.abs();
            if resid <= self.tol {
                return Ok(t);
            }
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let next = t - r / todd_mu_prime(t);
            t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                let r = todd_mu(t) - x;
                if r.abs() <= self.tol {
                    return Ok(t);
                }
                break;
            }
        }
        Err(Error::NoConvergence { iterations: self.max_iter, residual: resid })
    }

    /// `ρ(z, x) = exp(zτ − log χ(τ))`.
    pub fn density(&self, z: f64, x: f64) -> Result<f64> {
        let t = self.tau(x)?;
        Ok(libm::exp(z * t - todd_log_chi(t)))
    }

    /// `δ(x) = log χ(τ(x)) − x τ(x)`.
    pub fn delta(&self, x: f64) -> Result<f64> {
        let t = self.tau(x)?;
        Ok(todd_log_chi(t) - x * t)
    }

    /// `K(x) = 1/μ'(τ(x))`.
    pub fn defining_function(&self, x: f64) -> Result<f64> {
        Ok(1.0 / todd_mu_prime(self.tau(x)?))
    }

    /// `A(x) = μ'(τ(x))`, the variance of `ρ(·, x)`; zero at the endpoints.
    pub fn variance(&self, x: f64) -> Result<f64> {
        if x == 0.0 || x == 1.0 {
            return Ok(0.0);
        }
        Ok(todd_mu_prime(self.tau(x)?))
    }

    /// `∫_0^1 f(z) ρ(z, x) dz` by Gauss-Legendre quadrature.
    pub fn integrate(&self, x: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
        let t = self.tau(x)?;
        let lc = todd_log_chi(t);
        let (nodes, weights) = gauss_legendre_unit(self.quad_nodes);
        Ok(nodes.iter().zip(&weights).map(|(&z, &w)| w * f(z) * libm::exp(z * t - lc)).sum())
    }
}

/// A density sampled on `n_grid` equispaced points of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity1D {
    pub n_grid: usize,
    pub values: Vec<f64>,
    pub step: f64,
}

impl GridDensity1D {
    pub fn todd(fam: &ToddFamily, x: f64, n_grid: usize) -> Result<Self> {
        check_grid(n_grid)?;
        let t = fam.tau(x)?;
        let lc = todd_log_chi(t);
        let step = 1.0 / (n_grid - 1) as f64;
        let values = (0..n_grid).map(|k| libm::exp(k as f64 * step * t - lc)).collect();
        Ok(Self { n_grid, values, step })
    }

    pub fn trapezoid_mass(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values.iter().sum();
        self.step * (inner - 0.5 * (self.values[0] + self.values[n - 1]))
    }

    /// Point masses `gregory_k · h · ρ_k` normalized to total mass 1.
    pub fn masses(&self) -> Vec<f64> {
        let g = gregory_weights(self.n_grid);
        let mut w: Vec<f64> = g.iter().zip(&self.values).map(|(a, v)| a * v).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        w
    }
}

fn check_grid(n_grid: usize) -> Result<()> {
    if n_grid < 8 {
        return Err(Error::InvalidArgument("the grid needs at least 8 points".into()));
    }
    Ok(())
}

/// Gregory weights `[3/8, 7/6, 23/24, 1, …, 1, 23/24, 7/6, 3/8]` (without `h`).
pub fn gregory_weights(n: usize) -> Vec<f64> {
    let mut g = vec![1.0; n];
    for (k, &e) in GREGORY_ENDS.iter().enumerate() {
        g[k] = e;
        g[n - 1 - k] = e;
    }
    g
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o += ai * bj;
        }
    }
    out
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().copied().fold(0.0, f64::max);
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

fn mass_drift(fam: &ToddFamily, x: f64, n_grid: usize) -> Result<()> {
    let drift = (GridDensity1D::todd(fam, x, n_grid)?.trapezoid_mass() - 1.0).abs();
    if drift > MASS_DRIFT_TOL {
        return Err(Error::GridTooCoarse { drift });
    }
    Ok(())
}

fn endpoint_or_range(x: f64, f: &impl Fn(f64) -> f64) -> Result<Option<f64>> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutsidePolytope { distance: if x < 0.0 { x } else { 1.0 - x } });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(Some(f(x)));
    }
    Ok(None)
}

/// `B_N(f)(x)` by `N − 1` direct grid convolutions of `ρ(·, x)`.
pub fn smooth_bernstein_apply(fam: &ToddFamily, f: impl Fn(f64) -> f64, n: usize, x: f64, n_grid: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if let Some(v) = endpoint_or_range(x, &f)? {
        return Ok(v);
    }
    check_grid(n_grid)?;
    mass_drift(fam, x, n_grid)?;
    let w = GridDensity1D::todd(fam, x, n_grid)?.masses();
    let mut acc = w.clone();
    for _ in 1..n {
        acc = convolve(&acc, &w);
        let s: f64 = acc.iter().sum();
        acc.iter_mut().for_each(|v| *v /= s);
    }
    let h = 1.0 / (n_grid - 1) as f64;
    let scale = h / n as f64;
    Ok(acc.iter().enumerate().map(|(j, &q)| q * f(j as f64 * scale)).sum())
}

/// The `N`-fold self-convolution of the Gregory base sequence, stored as
/// logarithms so that tilting by `e^{τ j h}` stays finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ToddPowerGrid {
    pub n: usize,
    pub n_grid: usize,
    log_base: Vec<f64>,
}

impl ToddPowerGrid {
    pub fn new(n: usize, n_grid: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        check_grid(n_grid)?;
        let g = gregory_weights(n_grid);
        // binary powering keeps every entry a sum of positive terms
        let mut result: Option<Vec<f64>> = None;
        let mut pow = g;
        let mut k = n;
        loop {
            if k & 1 == 1 {
                result = Some(match result {
                    None => pow.clone(),
                    Some(r) => {
                        let mut c = convolve(&r, &pow);
                        normalize_max(&mut c);
                        c
                    }
                });
            }
            k >>= 1;
            if k == 0 {
                break;
            }
            pow = convolve(&pow, &pow);
            normalize_max(&mut pow);
        }
        let log_base = result.unwrap_or_default().iter().map(|&v| libm::log(v)).collect();
        Ok(Self { n, n_grid, log_base })
    }

    /// Masses of `d𝓑_x^N` at the points `j h / N`.
    pub fn masses(&self, fam: &ToddFamily, x: f64) -> Result<Vec<f64>> {
        let t = fam.tau(x)?;
        let h = 1.0 / (self.n_grid - 1) as f64;
        let logs: Vec<f64> = self.log_base.iter().enumerate().map(|(j, &l)| l + t * j as f64 * h).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut q: Vec<f64> = logs.iter().map(|l| libm::exp(l - max)).collect();
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= s);
        Ok(q)
    }

    /// `B_N(f)(x)`; agrees with [`smooth_bernstein_apply`] up to rounding.
    pub fn apply(&self, fam: &ToddFamily, f: impl Fn(f64) -> f64, x: f64) -> Result<f64> {
        if let Some(v) = endpoint_or_range(x, &f)? {
            return Ok(v);
        }
        mass_drift(fam, x, self.n_grid)?;
        let q = self.masses(fam, x)?;
        let scale = 1.0 / ((self.n_grid - 1) as f64 * self.n as f64);
        Ok(q.iter().enumerate().map(|(j, &m)| m * f(j as f64 * scale)).sum())
    }
}
