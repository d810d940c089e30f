//! Bergman-Bernstein measures on lattice polytopes.
//!
//! For `γ ∈ S_N` let `R_N(γ) = ∫_P m_N^γ(x) dx`. The kernel is
//! `Π_N(x) = Σ_γ m_N^γ(x)/R_N(γ)` and the Bergman-Bernstein measure puts mass
//! `m_N^γ(x)/(Π_N(x) R_N(γ))` at `γ/N`. The family is balanced when `R_N` is
//! constant, in which case this measure coincides with `d𝓑_x^N`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::convolution::{convolution_power, path_weights, ConvolutionPower, LatticeTable};
use crate::family::ExpFamily;
use crate::quadrature::{polytope_rule, Rule};
use crate::{Error, Result};

/// Flags of [`BalanceReport`] use this tolerance.
pub const TOL_BALANCED: f64 = 1e-7;

/// Step of the central differences of `log Π_N`.
pub const KERNEL_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss order per simplex direction.
    pub order: usize,
    /// Lower order used for the error estimate.
    pub check_order: usize,
    /// Largest accepted relative difference between the two orders.
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { order: 16, check_order: 12, tol: 1e-6 }
    }
}

/// The four balance measurements, their flags, and the barycenter-defect residual.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    /// `(max R_N − min R_N)/max R_N`.
    pub r_spread: f64,
    /// `max Π_N − min Π_N` over the sample grid.
    pub kernel_spread: f64,
    /// `max |b(ν_N^x) − x|` over the sample grid.
    pub barycenter_defect: f64,
    /// `max |ν-mass − m_N^γ(x)|` over the grid and `γ`.
    pub mass_defect: f64,
    /// Each measurement is at most [`TOL_BALANCED`].
    pub flags: [bool; 4],
    /// `max |(1/N) A ∇log Π_N − (b(ν_N^x) − x)|` over interior grid points.
    pub bbary_residual: f64,
    pub grid_points: usize,
}

impl BalanceReport {
    pub fn all_hold(&self) -> bool {
        self.flags.iter().all(|&f| f)
    }

    pub fn all_fail(&self) -> bool {
        self.flags.iter().all(|&f| !f)
    }

    /// The four flags agree.
    pub fn coherent(&self) -> bool {
        self.all_hold() || self.all_fail()
    }
}

/// Both sides of `∫_P Π_N ν_N(f) dx = Σ_{γ ∈ S_N} f(γ/N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|NP ∩ ℤ^m \ S_N|`.
    pub missing_lattice_points: usize,
}

#[derive(Debug, Clone)]
pub struct BergmanContext {
    fam: ExpFamily,
    n: usize,
    paths: ConvolutionPower,
    r: Vec<f64>,
    quadrature_error: f64,
    rule: Rule,
}

impl BergmanContext {
    pub fn new(fam: ExpFamily, n: usize, cfg: QuadratureConfig) -> Result<Self> {
        let paths = path_weights(&fam, n)?;
        let rule = polytope_rule(fam.lattice(), fam.support(), cfg.order);
        let check = polytope_rule(fam.lattice(), fam.support(), cfg.check_order);
        let r = norming(&fam, n, &rule, paths.len())?;
        let r_check = norming(&fam, n, &check, paths.len())?;
        let quadrature_error = r.iter().zip(&r_check).map(|(a, b)| (a - b).abs() / a.abs()).fold(0.0, f64::max);
        if !(quadrature_error <= cfg.tol) {
            return Err(Error::QuadratureFailure { rel_diff: quadrature_error });
        }
        Ok(Self { fam, n, paths, r, quadrature_error, rule })
    }

    pub fn family(&self) -> &ExpFamily {
        &self.fam
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `S_N`, in the order used by every per-`γ` table.
    pub fn sums(&self) -> &[Vec<f64>] {
        &self.paths.sums
    }

    /// `𝒫_N(γ)`.
    pub fn path_weights(&self) -> &[f64] {
        &self.paths.masses
    }

    /// `R_N(γ)`.
    pub fn norming_constants(&self) -> &[f64] {
        &self.r
    }

    /// Relative difference between the two quadrature orders.
    pub fn quadrature_error(&self) -> f64 {
        self.quadrature_error
    }

    /// `Q(γ) = R_N(γ)/𝒫_N(γ)`.
    pub fn q_values(&self) -> Vec<f64> {
        self.r.iter().zip(&self.paths.masses).map(|(r, p)| r / p).collect()
    }

    fn power(&self, x: &[f64]) -> Result<ConvolutionPower> {
        let cp = convolution_power(&self.fam, x, self.n)?;
        debug_assert_eq!(cp.sums, self.paths.sums);
        Ok(cp)
    }

    /// `Π_N(x)`.
    pub fn kernel(&self, x: &[f64]) -> Result<f64> {
        let cp = self.power(x)?;
        Ok(cp.masses.iter().zip(&self.r).map(|(m, r)| m / r).sum())
    }

    /// `d𝓑_x^N` together with the masses of `ν_N^x` on the same atoms.
    pub fn measures(&self, x: &[f64]) -> Result<(ConvolutionPower, Vec<f64>)> {
        let cp = self.power(x)?;
        let raw: Vec<f64> = cp.masses.iter().zip(&self.r).map(|(m, r)| m / r).collect();
        let pi: f64 = raw.iter().sum();
        let nu = raw.iter().map(|v| v / pi).collect();
        Ok((cp, nu))
    }

    /// `ν_N^x(f)`.
    pub fn apply(&self, f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
        let (cp, nu) = self.measures(x)?;
        Ok(cp.atoms.iter().zip(&nu).filter(|(_, &w)| w != 0.0).map(|(a, &w)| w * f(a)).sum())
    }

    /// Evaluates the four balance conditions on a grid with `per_dim` points
    /// per axis of the bounding box (points outside `P` are skipped).
    pub fn balanced_report(&self, per_dim: usize) -> Result<BalanceReport> {
        let rmax = self.r.iter().copied().fold(f64::MIN, f64::max);
        let rmin = self.r.iter().copied().fold(f64::MAX, f64::min);
        let r_spread = (rmax - rmin) / rmax;

        let grid = sample_grid(&self.fam, per_dim);
        let (mut kmin, mut kmax) = (f64::MAX, f64::MIN);
        let mut barycenter_defect: f64 = 0.0;
        let mut mass_defect: f64 = 0.0;
        let mut bbary_residual: f64 = 0.0;
        let dim = self.fam.dim();
        for x in &grid {
            let (cp, nu) = self.measures(x)?;
            let pi = self.kernel(x)?;
            kmin = kmin.min(pi);
            kmax = kmax.max(pi);
            let mut b = vec![0.0; dim];
            for (a, &w) in cp.atoms.iter().zip(&nu) {
                for (bi, ai) in b.iter_mut().zip(a) {
                    *bi += w * ai;
                }
            }
            let shift: Vec<f64> = b.iter().zip(x).map(|(bi, xi)| bi - xi).collect();
            barycenter_defect = barycenter_defect.max(shift.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
            for (m, v) in cp.masses.iter().zip(&nu) {
                mass_defect = mass_defect.max((m - v).abs());
            }
            if self.fam.lattice().min_slack(x) >= 100.0 * KERNEL_FD_STEP {
                let a = self.fam.moment_matrices(x)?.a;
                let mut grad = vec![0.0; dim];
                for (k, g) in grad.iter_mut().enumerate() {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[k] += KERNEL_FD_STEP;
                    xm[k] -= KERNEL_FD_STEP;
                    *g = (libm::log(self.kernel(&xp)?) - libm::log(self.kernel(&xm)?)) / (2.0 * KERNEL_FD_STEP);
                }
                let nf = self.n as f64;
                for i in 0..dim {
                    let lhs: f64 = (0..dim).map(|k| a[(i, k)] * grad[k]).sum::<f64>() / nf;
                    bbary_residual = bbary_residual.max((lhs - shift[i]).abs());
                }
            }
        }
        let kernel_spread = kmax - kmin;
        let flags = [
            r_spread <= TOL_BALANCED,
            kernel_spread <= TOL_BALANCED,
            barycenter_defect <= TOL_BALANCED,
            mass_defect <= TOL_BALANCED,
        ];
        Ok(BalanceReport {
            r_spread,
            kernel_spread,
            barycenter_defect,
            mass_defect,
            flags,
            bbary_residual,
            grid_points: grid.len(),
        })
    }

    /// `∫_P Π_N ν_N(f) dx` by the context's quadrature against `Σ_{γ∈S_N} f(γ/N)`.
    pub fn riemann_identity_check(&self, f: impl Fn(&[f64]) -> f64) -> Result<RiemannCheck> {
        let mut lhs = 0.0;
        for (p, w) in self.rule.points.iter().zip(&self.rule.weights) {
            let pi = self.kernel(p)?;
            lhs += w * pi * self.apply(&f, p)?;
        }
        let rhs = self.paths.atoms.iter().map(|a| f(a)).sum();
        Ok(RiemannCheck { lhs, rhs, missing_lattice_points: self.missing_lattice_points()? })
    }

    /// Counts lattice points of `NP` that are not sums of `N` support points.
    pub fn missing_lattice_points(&self) -> Result<usize> {
        let table = LatticeTable::new(self.fam.support())?;
        let have: BTreeSet<Vec<i64>> =
            self.paths.sums.iter().map(|g| g.iter().map(|&c| libm::round(c) as i64).collect()).collect();
        let n = self.n as i64;
        let dims = table.box_dims(self.n);
        let total: usize = dims.iter().product();
        let lattice = self.fam.lattice();
        let mut missing = 0;
        for mut code in 0..total {
            let mut g = Vec::with_capacity(dims.len());
            for (d, lo) in dims.iter().zip(&table.lo) {
                g.push((code % d) as i64 + lo * n);
                code /= d;
            }
            let x: Vec<f64> = g.iter().map(|&c| c as f64 / self.n as f64).collect();
            if lattice.contains(&x) && !have.contains(&g) {
                missing += 1;
            }
        }
        Ok(missing)
    }
}

fn norming(fam: &ExpFamily, n: usize, rule: &Rule, len: usize) -> Result<Vec<f64>> {
    let mut r = vec![0.0; len];
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let cp = convolution_power(fam, p, n)?;
        for (ri, m) in r.iter_mut().zip(&cp.masses) {
            *ri += w * m;
        }
    }
    Ok(r)
}

/// Points of an equispaced bounding-box grid that lie in `P`.
pub fn sample_grid(fam: &ExpFamily, per_dim: usize) -> Vec<Vec<f64>> {
    let dim = fam.dim();
    let pts = fam.support().points();
    let lo: Vec<f64> = (0..dim).map(|i| pts.iter().map(|p| p[i]).fold(f64::MAX, f64::min)).collect();
    let hi: Vec<f64> = (0..dim).map(|i| pts.iter().map(|p| p[i]).fold(f64::MIN, f64::max)).collect();
    let per = per_dim.max(2);
    let mut out = Vec::new();
    for mut code in 0..per.pow(dim as u32) {
        let mut x = Vec::with_capacity(dim);
        for i in 0..dim {
            let k = code % per;
            code /= per;
            x.push(lo[i] + (hi[i] - lo[i]) * k as f64 / (per - 1) as f64);
        }
        if fam.lattice().contains(&x) {
            out.push(x);
        }
    }
    out
}
