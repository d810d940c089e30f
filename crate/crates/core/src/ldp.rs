//! Large-deviation rate functions `I^x(y)` for empirical means of draws
//! from `𝓑(x)`.

use alloc::format;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::convolution::convolution_power;
use crate::expansion::fit_slope;
use crate::family::{ExpFamily, SoftmaxProblem};
use crate::linalg::{dot, norm, sub};
use crate::{Error, Result};

/// Minimum number of hits per `N` for the Monte-Carlo estimator.
pub const MIN_HITS: usize = 20;

/// A real number or `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::PosInfinity => None,
        }
    }
}

impl core::fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v:.16e}"),
            Self::PosInfinity => f.write_str("inf"),
        }
    }
}

/// `δ_K(x) − δ_L(y) + ⟨x − y, τ_K(x)⟩` for `y` in the closure of the face `K`
/// of `x` (with `L` the face of `y`), and `+∞` otherwise.
pub fn rate_closed(fam: &ExpFamily, x: &[f64], y: &[f64]) -> Result<ExtendedReal> {
    let sx = fam.solve(x)?;
    if y.len() != x.len() || !fam.lattice().in_closure(sx.face, y) {
        return Ok(ExtendedReal::PosInfinity);
    }
    let dy = fam.solve(y)?.delta;
    Ok(ExtendedReal::Finite(sx.delta - dy + dot(&sub(x, y), &sx.tau)))
}

/// `sup_τ ⟨y, τ⟩ − log Σ_α m_α(x) e^{⟨α,τ⟩}` by damped Newton.
///
/// When `y` lies in a proper face `L` of the closure of `x`'s face, atoms off
/// `S_L` drop out in the limit and the supremum is taken along `X_L`.
pub fn rate_legendre(fam: &ExpFamily, x: &[f64], y: &[f64]) -> Result<f64> {
    let sx = fam.solve(x)?;
    let lattice = fam.lattice();
    if y.len() != x.len() || !lattice.in_closure(sx.face, y) {
        return Err(Error::InvalidArgument("y is outside the closure of the face of x".into()));
    }
    let face = &lattice.faces[lattice.locate_face(y)?];
    let basis = &face.tangent_basis;
    let project = |p: &[f64]| -> Vec<f64> {
        (0..basis.ncols()).map(|j| basis.column(j).iter().zip(p).map(|(b, c)| b * c).sum()).collect()
    };
    let pts = fam.support().points();
    let problem = SoftmaxProblem {
        coords: face.indices.iter().map(|&i| project(&pts[i])).collect(),
        logits: face.indices.iter().map(|&i| libm::log(sx.masses[i])).collect(),
        target: project(y),
    };
    let min = problem.minimize(fam.newton())?;
    Ok(-min.value)
}

/// How `P(|S_N/N − y| <= r)` is estimated.
pub enum DecayMethod<'a> {
    /// Summing the masses of the convolution power.
    Exact,
    /// Sampling `samples` independent `N`-fold means per `N`.
    MonteCarlo { samples: usize, rng: &'a mut dyn RngCore },
}

/// Result of [`empirical_decay_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// Slope of `−log p_N` against `N`.
    pub slope: f64,
    /// `I^x(y)` from [`rate_closed`].
    pub rate: f64,
    pub relative_error: f64,
    /// `(N, p_N)`.
    pub probabilities: Vec<(usize, f64)>,
}

pub fn empirical_decay_check(
    fam: &ExpFamily,
    x: &[f64],
    y: &[f64],
    radius: f64,
    n_list: &[usize],
    method: DecayMethod<'_>,
) -> Result<DecayReport> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let rate = rate_closed(fam, x, y)?
        .finite()
        .ok_or_else(|| Error::InvalidArgument("y is unreachable from x".into()))?;
    let mut probabilities = Vec::with_capacity(n_list.len());
    match method {
        DecayMethod::Exact => {
            for &n in n_list {
                let cp = convolution_power(fam, x, n)?;
                let p: f64 = cp
                    .atoms
                    .iter()
                    .zip(&cp.masses)
                    .filter(|(a, _)| norm(&sub(a, y)) <= radius)
                    .map(|(_, &w)| w)
                    .sum();
                if p <= 0.0 {
                    return Err(Error::InsufficientHits { n, hits: 0 });
                }
                probabilities.push((n, p));
            }
        }
        DecayMethod::MonteCarlo { samples, rng } => {
            let m = fam.measure_at(x)?;
            let mut cdf = Vec::with_capacity(m.masses.len());
            let mut acc = 0.0;
            for &w in &m.masses {
                acc += w;
                cdf.push(acc);
            }
            let dim = fam.dim();
            for &n in n_list {
                let mut hits = 0usize;
                let mut mean = alloc::vec![0.0; dim];
                for _ in 0..samples {
                    mean.iter_mut().for_each(|v| *v = 0.0);
                    for _ in 0..n {
                        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * acc;
                        let k = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                        for (v, a) in mean.iter_mut().zip(&m.atoms[k]) {
                            *v += a;
                        }
                    }
                    mean.iter_mut().for_each(|v| *v /= n as f64);
                    if norm(&sub(&mean, y)) <= radius {
                        hits += 1;
                    }
                }
                if hits < MIN_HITS {
                    return Err(Error::InsufficientHits { n, hits });
                }
                probabilities.push((n, hits as f64 / samples as f64));
            }
        }
    }
    let pts: Vec<(f64, f64)> = probabilities.iter().map(|&(n, p)| (n as f64, -libm::log(p))).collect();
    let slope = fit_slope(&pts).ok_or_else(|| Error::DegenerateFit(format!("{} values of N", pts.len())))?;
    let relative_error = if rate != 0.0 { (slope - rate) / rate } else { slope };
    Ok(DecayReport { slope, rate, relative_error, probabilities })
}
