//! Built-in test functions with closed-form derivatives of every order.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expansion::DerivativeOracle;
use crate::{Error, Result};

/// Direction used by the `cos` family: the first `m` entries.
pub const COS_DIRECTION: [f64; 3] = [1.0, 0.7, 0.4];

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Const(f64),
    /// `z^e = Π z_i^{e_i}`.
    Monomial(Vec<usize>),
    /// `cos(⟨a, z⟩)`.
    Cos(Vec<f64>),
}

impl TestFunction {
    /// Parses a catalog name for dimension `dim`.
    ///
    /// * `one`: the constant 1
    /// * `z<e_1>…<e_m>`: a monomial given by its exponent digits, e.g. `z2` on
    ///   the interval or `z11` on the square; total degree at most 4
    /// * `x<i>`: the `i`-th coordinate (1-based)
    /// * `cos`, `cos<k>`: `cos(k⟨a,z⟩)` with `a` taken from [`COS_DIRECTION`]
    pub fn parse(name: &str, dim: usize) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown test function `{name}` for dimension {dim}"));
        if name == "one" {
            return Ok(Self::Const(1.0));
        }
        if let Some(k) = name.strip_prefix("cos") {
            let k: f64 = if k.is_empty() { 1.0 } else { k.parse().map_err(|_| bad())? };
            if dim > COS_DIRECTION.len() || !k.is_finite() {
                return Err(bad());
            }
            return Ok(Self::Cos(COS_DIRECTION[..dim].iter().map(|a| k * a).collect()));
        }
        if let Some(i) = name.strip_prefix('x') {
            let i: usize = i.parse().map_err(|_| bad())?;
            if i == 0 || i > dim {
                return Err(bad());
            }
            let mut e = alloc::vec![0; dim];
            e[i - 1] = 1;
            return Ok(Self::Monomial(e));
        }
        if let Some(digits) = name.strip_prefix('z') {
            if digits.len() != dim || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let e: Vec<usize> = digits.bytes().map(|b| (b - b'0') as usize).collect();
            if e.iter().sum::<usize>() > 4 {
                return Err(bad());
            }
            return Ok(Self::Monomial(e));
        }
        Err(bad())
    }

    /// Names accepted by [`TestFunction::parse`] in dimension `dim`.
    pub fn names(dim: usize) -> Vec<String> {
        let mut out = alloc::vec![String::from("one")];
        out.extend((1..=dim).map(|i| format!("x{i}")));
        for k in 1..=4 {
            for e in crate::cumulants::multi_indices(dim, k) {
                out.push(format!("z{}", e.iter().map(|d| format!("{d}")).collect::<String>()));
            }
        }
        out.push("cos".into());
        out.push("cos3".into());
        out
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        match self {
            Self::Const(c) => *c,
            Self::Monomial(e) => z.iter().zip(e).map(|(zi, &k)| libm::pow(*zi, k as f64)).product(),
            Self::Cos(a) => libm::cos(crate::linalg::dot(a, z)),
        }
    }

    /// `∂^β f(z)`.
    pub fn derivative_at(&self, z: &[f64], beta: &[usize]) -> f64 {
        let k: usize = beta.iter().sum();
        match self {
            Self::Const(c) => {
                if k == 0 {
                    *c
                } else {
                    0.0
                }
            }
            Self::Monomial(e) => {
                let mut v = 1.0;
                for ((zi, &ei), &bi) in z.iter().zip(e).zip(beta) {
                    if bi > ei {
                        return 0.0;
                    }
                    let falling: f64 = (0..bi).map(|j| (ei - j) as f64).product();
                    v *= falling * libm::pow(*zi, (ei - bi) as f64);
                }
                v
            }
            Self::Cos(a) => {
                let t = crate::linalg::dot(a, z);
                let scale: f64 = a.iter().zip(beta).map(|(ai, &bi)| libm::pow(*ai, bi as f64)).product();
                let d = match k % 4 {
                    0 => libm::cos(t),
                    1 => -libm::sin(t),
                    2 => -libm::cos(t),
                    _ => libm::sin(t),
                };
                scale * d
            }
        }
    }
}

impl DerivativeOracle for TestFunction {
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }

    fn derivative(&self, x: &[f64], alpha: &[usize]) -> Option<f64> {
        Some(self.derivative_at(x, alpha))
    }
}
