//! Dilated convolution powers `d𝓑_x^N` and the Bernstein approximation.
//!
//! The law of `(β_1 + … + β_N)/N` with `β_i` drawn independently from
//! `𝓑(x)` is computed by `N − 1` discrete convolutions. Lattice supports use a
//! dense integer box; other supports merge sums on a `1e-12` coordinate grid.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::family::ExpFamily;
use crate::polytope::WeightedSupport;
use crate::{Error, Result};

pub const DEFAULT_MAX_ATOMS: usize = 2_000_000;

/// Merge grid for non-lattice supports.
pub const MERGE_QUANTUM: f64 = 1e-12;

/// Integer coordinates of a lattice support, shifted to a nonnegative box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeTable {
    pub points: Vec<Vec<i64>>,
    pub lo: Vec<i64>,
    pub span: Vec<i64>,
}

impl LatticeTable {
    pub fn new(support: &WeightedSupport) -> Result<Self> {
        if !support.is_lattice() {
            return Err(Error::NotLattice);
        }
        let points: Vec<Vec<i64>> =
            support.points().iter().map(|p| p.iter().map(|&c| libm::round(c) as i64).collect()).collect();
        let dim = support.dim();
        let lo: Vec<i64> = (0..dim).map(|i| points.iter().map(|p| p[i]).min().unwrap_or(0)).collect();
        let span: Vec<i64> = (0..dim).map(|i| points.iter().map(|p| p[i] - lo[i]).max().unwrap_or(0)).collect();
        Ok(Self { points, lo, span })
    }

    /// Side lengths of the box holding every `N`-fold sum.
    pub fn box_dims(&self, n: usize) -> Vec<usize> {
        self.span.iter().map(|&s| s as usize * n + 1).collect()
    }
}

/// `d𝓑_x^N` (or, from [`path_weights`], the weighted lattice-path counts).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionPower {
    pub n: usize,
    /// The sums `γ ∈ S_N`, in lexicographic order.
    pub sums: Vec<Vec<f64>>,
    /// The atoms `γ/N`.
    pub atoms: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
}

impl ConvolutionPower {
    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let dim = self.atoms.first().map_or(0, |a| a.len());
        let mut b = vec![0.0; dim];
        for (a, &w) in self.atoms.iter().zip(&self.masses) {
            for (bi, ai) in b.iter_mut().zip(a) {
                *bi += w * ai;
            }
        }
        b
    }

    /// `Σ_γ m_N^γ f(γ/N)`; atoms of zero mass are skipped.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.atoms.iter().zip(&self.masses).filter(|(_, &w)| w != 0.0).map(|(a, &w)| w * f(a)).sum()
    }

    /// `I_{N,α}(x) = Σ_γ m_N^γ Π_i (γ_i − N x_i)^{α_i}`.
    pub fn central_moment(&self, x: &[f64], alpha: &[usize]) -> f64 {
        let order: usize = alpha.iter().sum();
        if order == 0 {
            return 1.0;
        }
        if order == 1 {
            return 0.0;
        }
        let nf = self.n as f64;
        self.sums
            .iter()
            .zip(&self.masses)
            .filter(|(_, &w)| w != 0.0)
            .map(|(g, &w)| {
                let mut p = w;
                for ((gi, xi), &a) in g.iter().zip(x).zip(alpha) {
                    p *= libm::pow(gi - nf * xi, a as f64);
                }
                p
            })
            .sum()
    }
}

/// Generic `N`-fold convolution of `Σ_α w_α δ_α` over the support points.
/// Every reachable sum is kept, including those of zero weight.
pub(crate) fn convolve(
    support: &WeightedSupport,
    base: &[f64],
    n: usize,
    max_atoms: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    match LatticeTable::new(support) {
        Ok(table) => convolve_lattice(&table, base, n, max_atoms),
        Err(_) => convolve_hashed(support.points(), base, n, max_atoms),
    }
}

fn convolve_lattice(
    table: &LatticeTable,
    base: &[f64],
    n: usize,
    max_atoms: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let dims = table.box_dims(n);
    let dim = dims.len();
    let mut strides = vec![1usize; dim];
    for i in (0..dim.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1].saturating_mul(dims[i + 1]);
    }
    let cells = dims.iter().fold(1usize, |a, &d| a.saturating_mul(d));
    if cells > max_atoms.saturating_mul(64) {
        return Err(Error::AtomBlowup { atoms: cells, cap: max_atoms });
    }
    let offsets: Vec<usize> = table
        .points
        .iter()
        .map(|p| p.iter().zip(&table.lo).zip(&strides).map(|((c, l), s)| (c - l) as usize * s).sum())
        .collect();

    let mut cur = vec![0.0; cells];
    let mut reach = vec![false; cells];
    for (&off, &w) in offsets.iter().zip(base) {
        cur[off] += w;
        reach[off] = true;
    }
    let mut hi = offsets.iter().copied().max().unwrap_or(0);
    for _ in 1..n {
        let mut next = vec![0.0; cells];
        let mut next_reach = vec![false; cells];
        for idx in 0..=hi {
            if !reach[idx] {
                continue;
            }
            let v = cur[idx];
            for (&off, &w) in offsets.iter().zip(base) {
                next[idx + off] += v * w;
                next_reach[idx + off] = true;
            }
        }
        hi += offsets.iter().copied().max().unwrap_or(0);
        cur = next;
        reach = next_reach;
    }

    let count = reach.iter().filter(|&&r| r).count();
    if count > max_atoms {
        return Err(Error::AtomBlowup { atoms: count, cap: max_atoms });
    }
    let nl: Vec<i64> = table.lo.iter().map(|&l| l * n as i64).collect();
    let mut sums = Vec::with_capacity(count);
    let mut masses = Vec::with_capacity(count);
    for (idx, _) in reach.iter().enumerate().filter(|(_, &r)| r) {
        let mut rem = idx;
        let g: Vec<f64> = (0..dim)
            .map(|i| {
                let q = rem / strides[i];
                rem %= strides[i];
                (q as i64 + nl[i]) as f64
            })
            .collect();
        sums.push(g);
        masses.push(cur[idx]);
    }
    Ok((sums, masses))
}

fn convolve_hashed(
    points: &[Vec<f64>],
    base: &[f64],
    n: usize,
    max_atoms: usize,
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|&c| libm::round(c / MERGE_QUANTUM) as i64).collect() };
    let mut cur: BTreeMap<Vec<i64>, (Vec<f64>, f64)> = BTreeMap::new();
    for (p, &w) in points.iter().zip(base) {
        cur.entry(key(p)).or_insert((p.clone(), 0.0)).1 += w;
    }
    for _ in 1..n {
        let mut next: BTreeMap<Vec<i64>, (Vec<f64>, f64)> = BTreeMap::new();
        for (g, v) in cur.values() {
            for (p, &w) in points.iter().zip(base) {
                let s: Vec<f64> = g.iter().zip(p).map(|(a, b)| a + b).collect();
                next.entry(key(&s)).or_insert((s, 0.0)).1 += v * w;
            }
            if next.len() > max_atoms {
                return Err(Error::AtomBlowup { atoms: next.len(), cap: max_atoms });
            }
        }
        cur = next;
    }
    Ok(cur.into_values().unzip())
}

fn assemble(n: usize, sums: Vec<Vec<f64>>, masses: Vec<f64>) -> ConvolutionPower {
    let nf = n as f64;
    let atoms = sums.iter().map(|g| g.iter().map(|c| c / nf).collect()).collect();
    ConvolutionPower { n, sums, atoms, masses }
}

/// `d𝓑_x^N` with the default atom cap.
pub fn convolution_power(fam: &ExpFamily, x: &[f64], n: usize) -> Result<ConvolutionPower> {
    convolution_power_capped(fam, x, n, DEFAULT_MAX_ATOMS)
}

pub fn convolution_power_capped(fam: &ExpFamily, x: &[f64], n: usize, max_atoms: usize) -> Result<ConvolutionPower> {
    let m = fam.measure_at(x)?;
    let (sums, masses) = convolve(fam.support(), &m.masses, n, max_atoms)?;
    Ok(assemble(n, sums, masses))
}

/// `B_N(f)(x)`.
pub fn bernstein_apply(fam: &ExpFamily, f: impl Fn(&[f64]) -> f64, n: usize, x: &[f64]) -> Result<f64> {
    Ok(convolution_power(fam, x, n)?.integrate(f))
}

/// `I_{N,α}(x)` computed from the convolution power.
pub fn central_moment_direct(fam: &ExpFamily, x: &[f64], alpha: &[usize], n: usize) -> Result<f64> {
    if alpha.len() != fam.dim() {
        return Err(Error::InvalidArgument("multi-index length must equal the dimension".into()));
    }
    Ok(convolution_power(fam, x, n)?.central_moment(x, alpha))
}

/// Weighted lattice-path counts `𝒫_N(γ) = Σ_{β_1+…+β_N=γ} Π c(β_i)`,
/// returned in the `masses` field.
pub fn path_weights(fam: &ExpFamily, n: usize) -> Result<ConvolutionPower> {
    let table = LatticeTable::new(fam.support())?;
    let (sums, masses) = convolve_lattice(&table, fam.support().weights(), n, DEFAULT_MAX_ATOMS)?;
    Ok(assemble(n, sums, masses))
}
