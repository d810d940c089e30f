//! The operators `L_ν(x,∂)` of the asymptotic expansion
//! `B_N(f) ~ Σ_ν N^{−ν} L_ν f` and remainder-slope estimates.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::convolution::bernstein_apply;
use crate::cumulants::{factorial, multi_indices, single_step_cumulants, MultiIndex};
use crate::family::ExpFamily;
use crate::{Error, Result};

/// Largest supported `ν`.
pub const MAX_NU: usize = 3;

/// Remainders below this are treated as floating-point noise by [`order_estimate`].
pub const REMAINDER_FLOOR: f64 = 1e-13;

/// Point evaluations of `f` and its partial derivatives.
pub trait DerivativeOracle {
    fn value(&self, x: &[f64]) -> f64;
    /// `∂^α f(x)`, or `None` when unavailable.
    fn derivative(&self, x: &[f64], alpha: &[usize]) -> Option<f64>;
}

/// `p_{α,l}(x)` for every `‖α‖ <= 2 max_ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable {
    pub x: Vec<f64>,
    pub max_nu: usize,
    entries: BTreeMap<MultiIndex, Vec<f64>>,
}

impl ExpansionTable {
    pub fn build(fam: &ExpFamily, x: &[f64], max_nu: usize) -> Result<Self> {
        if max_nu > MAX_NU {
            return Err(Error::InvalidArgument(format!("max_nu is capped at {MAX_NU}")));
        }
        let top = 2 * max_nu;
        let cumulants = single_step_cumulants(fam, x, top.max(2))?;
        let mut entries = BTreeMap::new();
        for k in 0..=top {
            for alpha in multi_indices(fam.dim(), k) {
                let p = cumulants.expansion_coefficients(&alpha)?;
                entries.insert(alpha, p);
            }
        }
        Ok(Self { x: x.to_vec(), max_nu, entries })
    }

    /// `p_{α,l}(x)`; zero outside `0 <= l <= ‖α‖/2`.
    pub fn get(&self, alpha: &[usize], l: usize) -> f64 {
        self.entries.get(alpha).and_then(|p| p.get(l)).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<f64>)> {
        self.entries.iter()
    }
}

/// `L_ν f(x) = Σ_{l=ν}^{2ν} Σ_{‖α‖=l} p_{α,l−ν}(x) ∂^α f(x) / α!`.
pub fn apply_operator(table: &ExpansionTable, nu: usize, f: &dyn DerivativeOracle) -> Result<f64> {
    if nu > table.max_nu {
        return Err(Error::InvalidArgument(format!("table holds ν <= {}", table.max_nu)));
    }
    let dim = table.x.len();
    let mut total = 0.0;
    for l in nu..=2 * nu {
        for alpha in multi_indices(dim, l) {
            let p = table.get(&alpha, l - nu);
            if p == 0.0 {
                continue;
            }
            let d = f.derivative(&table.x, &alpha).ok_or_else(|| Error::MissingDerivative(alpha.clone()))?;
            total += p * d / factorial(&alpha);
        }
    }
    Ok(total)
}

/// `B_N(f)(x) − Σ_{ν<n} N^{−ν} L_ν f(x)`.
pub fn expansion_remainder(fam: &ExpFamily, f: &dyn DerivativeOracle, x: &[f64], big_n: usize, n: usize) -> Result<f64> {
    if n > MAX_NU + 1 {
        return Err(Error::InvalidArgument(format!("expansion order n is capped at {}", MAX_NU + 1)));
    }
    let bn = bernstein_apply(fam, |z| f.value(z), big_n, x)?;
    if n == 0 {
        return Ok(bn);
    }
    let table = ExpansionTable::build(fam, x, n - 1)?;
    remainder_with_table(&table, f, bn, big_n, n)
}

fn remainder_with_table(table: &ExpansionTable, f: &dyn DerivativeOracle, bn: f64, big_n: usize, n: usize) -> Result<f64> {
    let mut partial = 0.0;
    let nf = big_n as f64;
    for nu in 0..n {
        partial += apply_operator(table, nu, f)? / libm::pow(nf, nu as f64);
    }
    Ok(bn - partial)
}

/// Least-squares slope of `log |remainder|` against `log N`.
pub fn order_estimate(fam: &ExpFamily, f: &dyn DerivativeOracle, x: &[f64], n: usize, n_list: &[usize]) -> Result<f64> {
    if n > MAX_NU + 1 {
        return Err(Error::InvalidArgument(format!("expansion order n is capped at {}", MAX_NU + 1)));
    }
    let table = if n > 0 { Some(ExpansionTable::build(fam, x, n - 1)?) } else { None };
    let mut pts = Vec::with_capacity(n_list.len());
    for &big_n in n_list {
        let bn = bernstein_apply(fam, |z| f.value(z), big_n, x)?;
        let r = match &table {
            Some(t) => remainder_with_table(t, f, bn, big_n, n)?,
            None => bn,
        };
        if r.abs() >= REMAINDER_FLOOR {
            pts.push((libm::log(big_n as f64), libm::log(r.abs())));
        }
    }
    fit_slope(&pts).ok_or_else(|| {
        Error::DegenerateFit(format!("{} of {} remainders above the {REMAINDER_FLOOR:e} floor", pts.len(), n_list.len()))
    })
}

/// Ordinary least-squares slope; `None` with fewer than two distinct abscissae.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::TestFunction;
    use crate::polytope::WeightedSupport;

    fn interval() -> ExpFamily {
        ExpFamily::new(WeightedSupport::uniform(alloc::vec![alloc::vec![0.0], alloc::vec![1.0]]).unwrap()).unwrap()
    }

    struct ValueOnly;

    impl DerivativeOracle for ValueOnly {
        fn value(&self, x: &[f64]) -> f64 {
            x[0]
        }
        fn derivative(&self, x: &[f64], alpha: &[usize]) -> Option<f64> {
            if alpha[0] == 0 {
                Some(x[0])
            } else {
                None
            }
        }
    }

    #[test]
    fn low_operators() {
        let fam = interval();
        let x = [0.3];
        let t = ExpansionTable::build(&fam, &x, 2).unwrap();
        let cos = TestFunction::parse("cos3", 1).unwrap();
        assert_eq!(apply_operator(&t, 0, &cos).unwrap(), cos.eval(&x));
        let l1 = apply_operator(&t, 1, &cos).unwrap();
        assert!((l1 - 0.5 * 0.21 * cos.derivative_at(&x, &[2])).abs() < 1e-15);
        let z2 = TestFunction::parse("z2", 1).unwrap();
        assert!((apply_operator(&t, 1, &z2).unwrap() - 0.21).abs() < 1e-15);
        assert_eq!(apply_operator(&t, 2, &TestFunction::Const(1.0)).unwrap(), 0.0);
        assert_eq!(apply_operator(&t, 1, &TestFunction::parse("x1", 1).unwrap()).unwrap(), 0.0);
        assert!(matches!(apply_operator(&t, 1, &ValueOnly), Err(Error::MissingDerivative(_))));
        assert_eq!(t.get(&[0], 0), 1.0);
        assert_eq!(t.get(&[1], 0), 0.0);
    }

    #[test]
    fn quadratic_expansion_terminates() {
        let fam = interval();
        let z2 = TestFunction::parse("z2", 1).unwrap();
        for big_n in [1, 5, 40] {
            assert!(expansion_remainder(&fam, &z2, &[0.3], big_n, 2).unwrap().abs() < 1e-12);
        }
        assert!(matches!(order_estimate(&fam, &z2, &[0.3], 2, &[8, 16, 32]), Err(Error::DegenerateFit(_))));
        let s = order_estimate(&fam, &z2, &[0.3], 1, &[8, 16, 32]).unwrap();
        assert!((s + 1.0).abs() < 1e-9);
    }

    #[test]
    fn cosine_slopes() {
        let fam = interval();
        let cos = TestFunction::parse("cos3", 1).unwrap();
        let ns = [8, 16, 32, 64];
        for n in 1..=2 {
            let s = order_estimate(&fam, &cos, &[0.4], n, &ns).unwrap();
            assert!((s + n as f64).abs() < 0.15, "n = {n}: slope {s}");
        }
    }

    #[test]
    fn fit_of_exact_power() {
        let pts: Vec<(f64, f64)> = [2.0f64, 4.0, 8.0].iter().map(|&n| (libm::log(n), -2.0 * libm::log(n) + 1.0)).collect();
        assert!((fit_slope(&pts).unwrap() + 2.0).abs() < 1e-14);
        assert!(fit_slope(&pts[..1]).is_none());
    }
}
