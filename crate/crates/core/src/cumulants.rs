//! Joint cumulants of the centered one-step measure and the coefficients
//! `p_{α,l}(x)` of `I_{N,α}(x) = Σ_l p_{α,l}(x) N^l`.
//!
//! Cumulants of an `N`-fold independent sum are `N` times the one-step
//! cumulants, and first cumulants of the centered measure vanish. Expanding
//! the `N`-fold central moment over set partitions of the index list of `α`
//! therefore gives `p_{α,l}` as the sum, over partitions into exactly `l`
//! blocks of size at least two, of the product of block cumulants.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::convolution::convolution_power;
use crate::family::ExpFamily;
use crate::{Error, Result};

/// Multi-index `α ∈ ℕ^m`.
pub type MultiIndex = Vec<usize>;

/// Largest supported `‖α‖`.
pub const MAX_ORDER: usize = 8;

/// Finite-difference step used by [`recursion_check`].
pub const FD_STEP: f64 = 1e-5;

pub fn order(alpha: &[usize]) -> usize {
    alpha.iter().sum()
}

/// `α!`.
pub fn factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&a| (1..=a).map(|k| k as f64).product::<f64>()).product()
}

/// Every multi-index of length `dim` and total order `k`, in lexicographic order.
pub fn multi_indices(dim: usize, k: usize) -> Vec<MultiIndex> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            rec(dim, left - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        if k == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(dim, k, &mut Vec::with_capacity(dim), &mut out);
    out
}

/// The index list of `α`: coordinate `i` repeated `α_i` times.
fn expand(alpha: &[usize]) -> Vec<usize> {
    alpha.iter().enumerate().flat_map(|(i, &a)| core::iter::repeat(i).take(a)).collect()
}

fn collapse(indices: &[usize], dim: usize) -> MultiIndex {
    let mut a = vec![0; dim];
    for &i in indices {
        a[i] += 1;
    }
    a
}

/// Joint cumulants `κ_β(x)` of `𝓑(x) − x` for `‖β‖ <= max_order`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantTable {
    pub dim: usize,
    pub max_order: usize,
    moments: BTreeMap<MultiIndex, f64>,
    cumulants: BTreeMap<MultiIndex, f64>,
}

impl CumulantTable {
    /// Builds the table from central moments `μ_β = Σ_α m_α(x)(α − x)^β`.
    pub fn from_measure(atoms: &[Vec<f64>], masses: &[f64], x: &[f64], max_order: usize) -> Result<Self> {
        if max_order > MAX_ORDER {
            return Err(Error::InvalidArgument(alloc::format!("cumulant order is capped at {MAX_ORDER}")));
        }
        let dim = x.len();
        let mut moments = BTreeMap::new();
        for k in 0..=max_order {
            for beta in multi_indices(dim, k) {
                let mu = if k == 0 {
                    1.0
                } else if k == 1 {
                    0.0
                } else {
                    atoms
                        .iter()
                        .zip(masses)
                        .filter(|(_, &w)| w != 0.0)
                        .map(|(a, &w)| {
                            let mut p = w;
                            for ((ai, xi), &b) in a.iter().zip(x).zip(&beta) {
                                p *= libm::pow(ai - xi, b as f64);
                            }
                            p
                        })
                        .sum()
                };
                moments.insert(beta, mu);
            }
        }
        let mut table = Self { dim, max_order, moments, cumulants: BTreeMap::new() };
        for k in 1..=max_order {
            for beta in multi_indices(dim, k) {
                let kappa = table.cumulant_from_moments(&beta);
                table.cumulants.insert(beta, kappa);
            }
        }
        Ok(table)
    }

    /// `κ(I) = μ(I) − Σ_{B ∋ first, B ≠ I} κ(B) μ(I \ B)`, using cumulants of
    /// lower order already in the table.
    fn cumulant_from_moments(&self, beta: &[usize]) -> f64 {
        let idx = expand(beta);
        let n = idx.len();
        if n == 1 {
            return 0.0;
        }
        let mut kappa = self.moments[beta];
        let rest = n - 1;
        // Subsets of the remaining n-1 indices joined with the first one, excluding the full set.
        for mask in 0..(1usize << rest) - 1 {
            let mut block = vec![idx[0]];
            let mut other = Vec::with_capacity(rest);
            for (b, &i) in idx[1..].iter().enumerate() {
                if mask >> b & 1 == 1 {
                    block.push(i);
                } else {
                    other.push(i);
                }
            }
            let kb = self.cumulants[&collapse(&block, self.dim)];
            if kb != 0.0 {
                kappa -= kb * self.moments[&collapse(&other, self.dim)];
            }
        }
        kappa
    }

    /// `κ_β`; zero for `‖β‖ <= 1`.
    pub fn cumulant(&self, beta: &[usize]) -> f64 {
        if order(beta) <= 1 {
            return 0.0;
        }
        self.cumulants[beta]
    }

    /// The one-step central moment `I_{1,β}(x)`.
    pub fn moment(&self, beta: &[usize]) -> f64 {
        self.moments[beta]
    }

    /// `p_{α,0}, …, p_{α,⌊‖α‖/2⌋}`.
    pub fn expansion_coefficients(&self, alpha: &[usize]) -> Result<Vec<f64>> {
        let k = order(alpha);
        if k > self.max_order {
            return Err(Error::InvalidArgument(alloc::format!(
                "‖α‖ = {k} exceeds the table order {}",
                self.max_order
            )));
        }
        let mut p = vec![0.0; k / 2 + 1];
        if k == 0 {
            p[0] = 1.0;
            return Ok(p);
        }
        self.partitions(&expand(alpha), 0, 1.0, &mut p);
        Ok(p)
    }

    /// Accumulates products of block cumulants over partitions of `rest` into
    /// blocks of size at least two.
    fn partitions(&self, rest: &[usize], blocks: usize, prod: f64, out: &mut [f64]) {
        if rest.is_empty() {
            out[blocks] += prod;
            return;
        }
        let tail = &rest[1..];
        let t = tail.len();
        for mask in 1usize..(1 << t) {
            let mut block = vec![rest[0]];
            let mut other = Vec::with_capacity(t);
            for (b, &i) in tail.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    block.push(i);
                } else {
                    other.push(i);
                }
            }
            if other.len() == 1 {
                continue;
            }
            let kb = self.cumulants[&collapse(&block, self.dim)];
            if kb != 0.0 {
                self.partitions(&other, blocks + 1, prod * kb, out);
            }
        }
    }
}

pub fn single_step_cumulants(fam: &ExpFamily, x: &[f64], max_order: usize) -> Result<CumulantTable> {
    let m = fam.measure_at(x)?;
    CumulantTable::from_measure(&m.atoms, &m.masses, x, max_order)
}

pub fn expansion_coefficients(fam: &ExpFamily, x: &[f64], alpha: &[usize]) -> Result<Vec<f64>> {
    if alpha.len() != fam.dim() {
        return Err(Error::InvalidArgument("multi-index length must equal the dimension".into()));
    }
    single_step_cumulants(fam, x, order(alpha).max(2))?.expansion_coefficients(alpha)
}

/// Residual of `I_{N,α+e_j} = D_j I_{N,α} + Σ_i α_i I_{N,α−e_i} I_{N,e_i+e_j}`
/// with `D_j g = ⟨A∇g, e_j⟩` and `∇` by central differences.
pub fn recursion_check(fam: &ExpFamily, x: &[f64], alpha: &[usize], j: usize, n: usize) -> Result<f64> {
    let dim = fam.dim();
    if alpha.len() != dim || j >= dim {
        return Err(Error::InvalidArgument("multi-index or axis does not match the dimension".into()));
    }
    let margin = fam.lattice().min_slack(x);
    if margin < 10.0 * FD_STEP {
        return Err(Error::InvalidArgument(alloc::format!("interior margin {margin:e} is below {:e}", 10.0 * FD_STEP)));
    }
    let cp = convolution_power(fam, x, n)?;
    let moment = |beta: &[usize]| cp.central_moment(x, beta);

    let mut up = alpha.to_vec();
    up[j] += 1;
    let lhs = moment(&up);

    let a = fam.moment_matrices(x)?.a;
    let mut dj = 0.0;
    if order(alpha) > 0 {
        for k in 0..dim {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += FD_STEP;
            xm[k] -= FD_STEP;
            let gp = convolution_power(fam, &xp, n)?.central_moment(&xp, alpha);
            let gm = convolution_power(fam, &xm, n)?.central_moment(&xm, alpha);
            dj += a[(j, k)] * (gp - gm) / (2.0 * FD_STEP);
        }
    }

    let mut sum = 0.0;
    for i in 0..dim {
        if alpha[i] == 0 {
            continue;
        }
        let mut down = alpha.to_vec();
        down[i] -= 1;
        let mut pair = vec![0; dim];
        pair[i] += 1;
        pair[j] += 1;
        sum += alpha[i] as f64 * moment(&down) * moment(&pair);
    }
    Ok((lhs - dj - sum).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::WeightedSupport;

    fn interval() -> ExpFamily {
        ExpFamily::new(WeightedSupport::uniform(vec![vec![0.0], vec![1.0]]).unwrap()).unwrap()
    }

    fn triangle() -> ExpFamily {
        ExpFamily::new(
            WeightedSupport::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 2.0, 0.5]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn multi_index_enumeration() {
        assert_eq!(multi_indices(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(3, 3).len(), 10);
        assert_eq!(multi_indices(1, 0), vec![vec![0]]);
        assert_eq!(factorial(&[3, 2]), 12.0);
    }

    #[test]
    fn bernoulli_cumulants() {
        let x = 0.3;
        let t = single_step_cumulants(&interval(), &[x], 4).unwrap();
        assert_eq!(t.cumulant(&[1]), 0.0);
        assert!((t.cumulant(&[2]) - x * (1.0 - x)).abs() < 1e-15);
        assert!((t.cumulant(&[3]) - x * (1.0 - x) * (1.0 - 2.0 * x)).abs() < 1e-15);
        let k4 = x * (1.0 - x) * (1.0 - 6.0 * x * (1.0 - x));
        assert!((t.cumulant(&[4]) - k4).abs() < 1e-15);
    }

    #[test]
    fn second_cumulants_are_the_covariance() {
        let fam = triangle();
        let x = [0.2, 0.3];
        let t = single_step_cumulants(&fam, &x, 2).unwrap();
        let a = fam.moment_matrices(&x).unwrap().a;
        assert!((t.cumulant(&[2, 0]) - a[(0, 0)]).abs() < 1e-15);
        assert!((t.cumulant(&[1, 1]) - a[(0, 1)]).abs() < 1e-15);
    }

    #[test]
    fn low_order_coefficients() {
        let fam = triangle();
        let x = [0.2, 0.3];
        let a = fam.moment_matrices(&x).unwrap().a;
        let p = expansion_coefficients(&fam, &x, &[1, 1]).unwrap();
        assert_eq!(p[0], 0.0);
        assert!((p[1] - a[(0, 1)]).abs() < 1e-15);
        let t = single_step_cumulants(&fam, &x, 3).unwrap();
        let p = t.expansion_coefficients(&[2, 1]).unwrap();
        assert_eq!(p, vec![0.0, t.moment(&[2, 1])]);
        let x = 0.35;
        let t = single_step_cumulants(&interval(), &[x], 4).unwrap();
        let p = t.expansion_coefficients(&[4]).unwrap();
        let v = x * (1.0 - x);
        assert_eq!(p[0], 0.0);
        assert!((p[1] - t.cumulant(&[4])).abs() < 1e-16);
        assert!((p[2] - 3.0 * v * v).abs() < 1e-16);
    }

    #[test]
    fn recursion_examples() {
        let fam = interval();
        assert_eq!(recursion_check(&fam, &[0.3], &[0], 0, 4).unwrap(), 0.0);
        assert!(recursion_check(&fam, &[0.3], &[1], 0, 4).unwrap() <= 1e-6);
        assert!(recursion_check(&fam, &[0.3], &[2], 0, 3).unwrap() <= 1e-5);
        assert!(matches!(recursion_check(&fam, &[1e-6], &[1], 0, 3), Err(Error::InvalidArgument(_))));
    }
}
