//! Rigidity and condensation thresholds and the core fixed point.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lambert::lambert_w_m1;
use crate::params::ModelParams;

fn qk1(q: u16, k: usize) -> f64 {
    (q as f64).powi(k as i32 - 1)
}

fn check_qk(q: u16, k: usize) -> Result<()> {
    if q < 3 || k < 3 {
        return Err(Error::params(format!("need q >= 3 and k >= 3, got q = {q}, k = {k}")));
    }
    Ok(())
}

/// x = (q-1)(k-1).
pub fn x_of(q: u16, k: usize) -> f64 {
    (q as f64 - 1.0) * (k as f64 - 1.0)
}

/// α = ck / (q^{k-1} - 1), the mean number of (v,γ)-essential edges.
pub fn alpha(params: &ModelParams) -> f64 {
    params.c * params.k as f64 / params.qk1_minus_one()
}

/// h(λ) = λ / (1 - e^{-λ})^{(q-1)(k-1)}.
pub fn h(lambda: f64, q: u16, k: usize) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::params(format!("h needs lambda > 0, got {lambda}")));
    }
    let base = -(-lambda).exp_m1();
    Ok(lambda / base.powf(x_of(q, k)))
}

/// Positive root of e^λ - 1 = xλ, for x > 1.
///
/// Bisection on g(λ) = λ - ln(1 + xλ), which has the same positive root and
/// is far better scaled than the exponential form, then Newton polishing.
pub fn lambda_r_x(x: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(Error::params(format!("x = {x} must exceed 1")));
    }
    let g = |l: f64| l - (x * l).ln_1p();
    // g is negative on (0, root) and minimised at (x-1)/x
    let mut lo = if g(1.0) < 0.0 { 1.0 } else { (x - 1.0) / x };
    let mut hi = (x * x).max(2.0 * lo);
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(Error::Degenerate(format!("failed to bracket the root for x = {x}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut l = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = 1.0 - x / (1.0 + x * l);
        let step = g(l) / d;
        if !step.is_finite() {
            break;
        }
        l -= step;
    }
    Ok(l)
}

/// λ_r = -W_{-1}(-e^{-1/x}/x) - 1/x.
pub fn lambda_r_lambert_x(x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::params(format!("x = {x} must exceed 1")));
    }
    let s = -(-1.0 / x).exp() / x;
    Ok(-lambert_w_m1(s)? - 1.0 / x)
}

pub fn lambda_r(q: u16, k: usize) -> Result<f64> {
    check_qk(q, k)?;
    lambda_r_x(x_of(q, k))
}

pub fn lambda_r_lambert(q: u16, k: usize) -> Result<f64> {
    check_qk(q, k)?;
    lambda_r_lambert_x(x_of(q, k))
}

/// α_r = h(λ_r), the minimum of h.
pub fn alpha_r(q: u16, k: usize) -> Result<f64> {
    h(lambda_r(q, k)?, q, k)
}

/// c_r = (q^{k-1} - 1)/k · λ_r / (1 - e^{-λ_r})^{(q-1)(k-1)}.
pub fn c_r(q: u16, k: usize) -> Result<f64> {
    Ok((qk1(q, k) - 1.0) / k as f64 * alpha_r(q, k)?)
}

/// (q^{k-1}/k)(ln x + ln ln x + 1).
pub fn c_r_asymptotic(q: u16, k: usize) -> Result<f64> {
    check_qk(q, k)?;
    let x = x_of(q, k);
    Ok(qk1(q, k) / k as f64 * (x.ln() + x.ln().ln() + 1.0))
}

/// (q^{k-1} - 1/2) ln q - ln 2, without the o_q(1) correction.
pub fn c_cond(q: u16, k: usize) -> Result<f64> {
    check_qk(q, k)?;
    Ok((qk1(q, k) - 0.5) * (q as f64).ln() - std::f64::consts::LN_2)
}

/// (q^{k-1} - 1) ln q.
pub fn first_regime_bound(q: u16, k: usize) -> f64 {
    (qk1(q, k) - 1.0) * (q as f64).ln()
}

/// ρ_r = (1 - e^{-λ_r})^{q-1}, the core density at the threshold.
pub fn rho_r(q: u16, k: usize) -> Result<f64> {
    Ok((-(-lambda_r(q, k)?).exp_m1()).powi(q as i32 - 1))
}

/// λ_r - (ln x + ln ln x).
pub fn asymptotic_gap_x(x: f64) -> Result<f64> {
    Ok(lambda_r_x(x)? - (x.ln() + x.ln().ln()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub q: u16,
    pub k: usize,
    pub lambda_r: f64,
    pub lambda_r_lambert: f64,
    pub alpha_r: f64,
    pub c_r_exact: f64,
    pub c_r_asymptotic: f64,
    pub c_cond: f64,
    pub first_regime_bound: f64,
    pub rho_r: f64,
    pub asymptotic_gap: f64,
}

pub fn threshold_report(q: u16, k: usize) -> Result<ThresholdReport> {
    let lr = lambda_r(q, k)?;
    Ok(ThresholdReport {
        q,
        k,
        lambda_r: lr,
        lambda_r_lambert: lambda_r_lambert(q, k)?,
        alpha_r: alpha_r(q, k)?,
        c_r_exact: c_r(q, k)?,
        c_r_asymptotic: c_r_asymptotic(q, k)?,
        c_cond: c_cond(q, k)?,
        first_regime_bound: first_regime_bound(q, k),
        rho_r: rho_r(q, k)?,
        asymptotic_gap: asymptotic_gap_x(x_of(q, k))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPoint {
    pub alpha: f64,
    pub lambda: f64,
    pub rho: f64,
    pub upsilon: f64,
    pub converged: bool,
    pub iterations: usize,
    pub at_threshold: bool,
}

pub const FIXED_POINT_TOL: f64 = 1e-14;
pub const FIXED_POINT_MAX_ITER: usize = 100_000;
pub const THRESHOLD_TOL: f64 = 1e-9;
const COLLAPSE: f64 = 1e-10;

/// Iterates ρ_{i+1} = (1 - e^{-λ_i})^{q-1}, λ_i = α ρ_i^{k-1} from ρ_0 = 1.
/// The map is monotone, so the limit is the largest fixed point.
pub fn fixed_point(params: &ModelParams) -> Result<FixedPoint> {
    params.validate()?;
    let (q, k) = (params.q, params.k);
    let a = alpha(params);
    let cr = c_r(q, k)?;
    if (params.c - cr).abs() < THRESHOLD_TOL {
        let lr = lambda_r(q, k)?;
        let rr = rho_r(q, k)?;
        return Ok(FixedPoint { alpha: a, lambda: lr, rho: rr, upsilon: rr, converged: true, iterations: 0, at_threshold: true });
    }
    let step = |rho: f64| (-(-a * rho.powi(k as i32 - 1)).exp_m1()).powi(q as i32 - 1);
    let mut rho = 1.0;
    let mut lambda = a;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < FIXED_POINT_MAX_ITER {
        let next = step(rho);
        iterations += 1;
        let delta = (next - rho).abs();
        rho = next;
        lambda = a * rho.powi(k as i32 - 1);
        if rho < COLLAPSE {
            rho = 0.0;
            lambda = 0.0;
            converged = true;
            break;
        }
        if delta < FIXED_POINT_TOL {
            converged = true;
            break;
        }
    }
    let upsilon = if lambda > 0.0 { (lambda / a).powf(1.0 / (k as f64 - 1.0)) } else { 0.0 };
    Ok(FixedPoint { alpha: a, lambda, rho, upsilon, converged, iterations, at_threshold: false })
}

/// Υ = [(q^{k-1}-1) λ / (ck)]^{1/(k-1)}, with `defined = false` (and value 0)
/// when the fixed point has collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Upsilon {
    pub value: f64,
    pub defined: bool,
}

pub fn upsilon(params: &ModelParams) -> Result<Upsilon> {
    let fp = fixed_point(params)?;
    if fp.lambda > 0.0 {
        let v = (params.qk1_minus_one() * fp.lambda / (params.c * params.k as f64)).powf(1.0 / (params.k as f64 - 1.0));
        Ok(Upsilon { value: v, defined: true })
    } else {
        Ok(Upsilon { value: 0.0, defined: false })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-10 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn alpha_examples() {
        assert!((alpha(&ModelParams::new(3, 3, 12.0).unwrap()) - 4.5).abs() < 1e-15);
        assert!((alpha(&ModelParams::new(3, 3, 8.0 / 3.0).unwrap()) - 1.0).abs() < 1e-15);
        assert!(alpha(&ModelParams::new(3, 3, 1e-12).unwrap()) < 1e-11);
    }

    #[test]
    fn h_examples() {
        let v = h(std::f64::consts::LN_2, 3, 3).unwrap();
        assert!((v - 16.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert!((h(50.0, 3, 3).unwrap() - 50.0).abs() < 1e-15 * 50.0 + 1e-18);
        assert!(h(0.0, 3, 3).is_err());
        assert!(h(-1.0, 3, 3).is_err());
    }

    #[test]
    fn lambda_r_q3k3() {
        let l = lambda_r(3, 3).unwrap();
        assert!((l - 2.336662982263053).abs() < 1e-12);
        assert!((lambda_r_lambert(3, 3).unwrap() - l).abs() < 1e-12);
        let m = golden_min(|l| h(l, 3, 3).unwrap(), 0.5, 10.0);
        assert!((m - l).abs() < 1e-4);
        assert!((alpha_r(3, 3).unwrap() - 3.508901332422845).abs() < 1e-12);
    }

    #[test]
    fn c_r_values() {
        assert!((c_r(3, 3).unwrap() - 9.357070219794252).abs() < 1e-10);
        assert!((c_r(3, 4).unwrap() - 26.47077055348188).abs() < 1e-9);
        assert!((c_r(4, 3).unwrap() - 20.362131194986063).abs() < 1e-9);
        assert!((c_r_asymptotic(3, 3).unwrap() - 8.138785863294515).abs() < 1e-12);
        assert!((c_cond(3, 3).unwrap() - 8.645057273118988).abs() < 1e-12);
        assert!((first_regime_bound(3, 3) - 8.788898309344878).abs() < 1e-12);
        assert!((rho_r(3, 3).unwrap() - 0.8160419050675257).abs() < 1e-12);
    }

    #[test]
    fn residual_over_grid() {
        for q in 3..=10u16 {
            for k in 3..=7 {
                let l = lambda_r(q, k).unwrap();
                let x = x_of(q, k);
                assert!((l.exp_m1() - x * l).abs() < 1e-10, "q={q} k={k}");
                assert!((lambda_r_lambert(q, k).unwrap() - l).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn asymptotic_gap_decreases() {
        let g: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&x| asymptotic_gap_x(x).unwrap()).collect();
        assert!(g[0] > g[1] && g[1] > g[2]);
        assert!((lambda_r_x(1e4).unwrap() - 11.667123907124676).abs() < 1e-9);
    }

    #[test]
    fn c_cond_monotone() {
        for q in 3..10u16 {
            for k in 3..7 {
                let v = c_cond(q, k).unwrap();
                assert!(c_cond(q + 1, k).unwrap() > v && c_cond(q, k + 1).unwrap() > v);
            }
        }
    }

    #[test]
    fn fixed_point_above_and_below() {
        let fp = fixed_point(&ModelParams::new(3, 3, 12.0).unwrap()).unwrap();
        assert!(fp.converged);
        assert!((fp.lambda - 4.24825617137566).abs() < 1e-10);
        assert!((fp.rho - 0.9716259192571846).abs() < 1e-10);
        assert!((fp.upsilon - fp.rho).abs() < 1e-10);
        let fp = fixed_point(&ModelParams::new(3, 3, 5.0).unwrap()).unwrap();
        assert_eq!((fp.lambda, fp.rho), (0.0, 0.0));
        let cr = c_r(3, 3).unwrap();
        let fp = fixed_point(&ModelParams::new(3, 3, cr).unwrap()).unwrap();
        assert!(fp.at_threshold);
        assert!((fp.rho - 0.8160419050675257).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_is_largest_root() {
        for &c in &[9.5, 10.0, 12.0, 20.0] {
            let p = ModelParams::new(3, 3, c).unwrap();
            let fp = fixed_point(&p).unwrap();
            let a = fp.alpha;
            let resid = |l: f64| l - a * (-(-l).exp_m1()).powf(4.0);
            assert!(resid(fp.lambda).abs() < 1e-9);
            // no sign change above the returned root
            let mut l = fp.lambda + 1e-6;
            while l < 100.0 {
                assert!(resid(l) > 0.0);
                l *= 1.05;
            }
        }
    }

    #[test]
    fn upsilon_limits() {
        let u = upsilon(&ModelParams::new(3, 3, 12.0).unwrap()).unwrap();
        assert!(u.defined && (u.value - 0.9716259192571846).abs() < 1e-10);
        let u = upsilon(&ModelParams::new(3, 3, 5.0).unwrap()).unwrap();
        assert!(!u.defined && u.value == 0.0);
        let u = upsilon(&ModelParams::new(3, 3, 1e4).unwrap()).unwrap();
        assert!(u.value > 0.999_999);
    }
}
