//! Model parameters and small exact combinatorics shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(q, k, c)` with an optional vertex count.
///
/// The edge count is `floor(c * n)` unless it was fixed explicitly with
/// [`ModelParams::with_edges`], which oracle-scale instances use to avoid
/// rounding `m / n` back through a float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub q: u16,
    pub k: usize,
    pub c: f64,
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
}

impl ModelParams {
    pub fn new(q: u16, k: usize, c: f64) -> Result<Self> {
        let p = ModelParams { q, k, c, n: None, m: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_n(q: u16, k: usize, c: f64, n: usize) -> Result<Self> {
        let p = ModelParams { q, k, c, n: Some(n), m: None };
        p.validate()?;
        Ok(p)
    }

    /// Exact edge count `m`; `c` is set to `m / n`.
    pub fn with_edges(q: u16, k: usize, n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::params("n must be positive"));
        }
        let p = ModelParams { q, k, c: m as f64 / n as f64, n: Some(n), m: Some(m) };
        p.validate_arity()?;
        Ok(p)
    }

    fn validate_arity(&self) -> Result<()> {
        if self.q < 3 {
            return Err(Error::params(format!("q = {} must be at least 3", self.q)));
        }
        if self.k < 3 {
            return Err(Error::params(format!("k = {} must be at least 3", self.k)));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_arity()?;
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::params(format!("c = {} must be a positive real", self.c)));
        }
        if let Some(n) = self.n {
            if n == 0 {
                return Err(Error::params("n must be positive"));
            }
        }
        Ok(())
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| Error::params("vertex count n is required"))
    }

    /// Checks `m <= C(n, k)`, required by the simple model.
    pub fn check_simple_capacity(&self) -> Result<()> {
        let (n, m) = (self.require_n()?, self.m()?);
        if binom(n as u64, self.k as u64) < m as u128 {
            return Err(Error::params(format!("m = {m} exceeds C({n},{})", self.k)));
        }
        Ok(())
    }

    /// `floor(c * n)`, or the explicit edge count when one was given.
    pub fn m(&self) -> Result<usize> {
        if let Some(m) = self.m {
            return Ok(m);
        }
        let n = self.require_n()?;
        // nudge guards against 8/12*12 = 7.999...
        Ok((self.c * n as f64 + 1e-9).floor() as usize)
    }

    /// `q^(k-1) - 1` as a float.
    pub fn qk1_minus_one(&self) -> f64 {
        (self.q as f64).powi(self.k as i32 - 1) - 1.0
    }

    /// `c * k * (k-1)`, the branching factor of the loose-cycle counts.
    pub fn ckk1(&self) -> f64 {
        self.c * (self.k * (self.k - 1)) as f64
    }
}

/// Exact binomial coefficient, saturating at `u128::MAX`.
pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        let num = (n - i) as u128;
        let den = (i + 1) as u128;
        // acc * num is divisible by den; split to keep the intermediate small.
        let (a, b) = (acc / den, acc % den);
        let Some(hi) = a.checked_mul(num) else { return u128::MAX };
        let lo = b * num / den;
        let Some(next) = hi.checked_add(lo) else { return u128::MAX };
        acc = next;
    }
    acc
}

/// `ln C(n, k)` via log-gamma; exact enough for the landscape and moment code.
pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 256 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    statrs::function::gamma::ln_gamma(n as f64 + 1.0)
}

/// `ln( n! / prod parts_i! )`
pub fn ln_multinomial(parts: &[u64]) -> f64 {
    let n: u64 = parts.iter().sum();
    ln_factorial(n) - parts.iter().map(|&p| ln_factorial(p)).sum::<f64>()
}

/// All compositions of `n` into `parts` non-negative summands, in
/// lexicographic order.
pub fn compositions(n: u64, parts: usize) -> Vec<Vec<u64>> {
    fn rec(remaining: u64, slots: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            cur.push(remaining);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in 0..=remaining {
            cur.push(a);
            rec(remaining - a, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        return out;
    }
    rec(n, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_small_values() {
        assert_eq!(binom(5, 2), 10);
        assert_eq!(binom(4, 3), 4);
        assert_eq!(binom(3, 4), 0);
        assert_eq!(binom(10, 0), 1);
        assert_eq!(binom(100_000, 3), 166_661_666_700_000);
    }

    #[test]
    fn binom_large_does_not_overflow_early() {
        // C(10^6, 7) ~ 1.98e38 still fits in u128
        let b = binom(1_000_000, 7);
        assert!(b < u128::MAX);
        let approx = ln_binom(1_000_000, 7).exp();
        assert!(((b as f64) / approx - 1.0).abs() < 1e-6);
    }

    #[test]
    fn m_is_floor_of_cn() {
        let p = ModelParams::with_n(3, 3, 0.5, 10_001).unwrap();
        assert_eq!(p.m().unwrap(), 5000);
        let p = ModelParams::with_edges(3, 3, 12, 8).unwrap();
        assert_eq!(p.m().unwrap(), 8);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(2, 3, 1.0).is_err());
        assert!(ModelParams::new(3, 2, 1.0).is_err());
        assert!(ModelParams::new(3, 3, 0.0).is_err());
        assert!(ModelParams::with_edges(3, 3, 0, 5).is_err());
    }

    #[test]
    fn composition_count() {
        // C(n + q - 1, q - 1)
        assert_eq!(compositions(12, 3).len(), 91);
        assert!(compositions(4, 2).iter().all(|c| c.iter().sum::<u64>() == 4));
    }
}
