//! First- and second-moment functionals over colour densities and overlap
//! matrices, the Ψ/Γ constants, overlap classification and landscape scans.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colouring::OverlapMatrix;
use crate::cycles::{sum_lambda_delta_sq, SeriesMode};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::params::{binom, compositions, ln_multinomial, ModelParams};
use crate::rng::{rng, stream, Rng};
use crate::thresholds::first_regime_bound;

/// Real q×q overlap density, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapDensity {
    q: usize,
    entries: Vec<f64>,
}

impl OverlapDensity {
    /// Entries must lie in [0,1] and sum to 1 (within 1e-9).
    pub fn new(q: usize, entries: Vec<f64>) -> Result<Self> {
        if q == 0 || entries.len() != q * q {
            return Err(Error::params(format!("expected {} entries for q = {q}, got {}", q * q, entries.len())));
        }
        if entries.iter().any(|&x| !(0.0..=1.0 + 1e-12).contains(&x)) {
            return Err(Error::params("overlap entries must lie in [0, 1]"));
        }
        let s: f64 = entries.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::params(format!("overlap entries sum to {s}, not 1")));
        }
        Ok(OverlapDensity { q, entries })
    }

    /// ρ̄: every entry q^{-2}.
    pub fn uniform(q: usize) -> Self {
        OverlapDensity { q, entries: vec![1.0 / (q * q) as f64; q * q] }
    }

    /// q^{-1} times the permutation matrix of `perm` (row i has its mass in column perm[i]).
    pub fn scaled_permutation(perm: &[usize]) -> Self {
        let q = perm.len();
        let mut entries = vec![0.0; q * q];
        for (i, &j) in perm.iter().enumerate() {
            entries[i * q + j] = 1.0 / q as f64;
        }
        OverlapDensity { q, entries }
    }

    pub fn scaled_identity(q: usize) -> Self {
        Self::scaled_permutation(&(0..q).collect::<Vec<_>>())
    }

    pub fn from_counts(m: &OverlapMatrix) -> Self {
        OverlapDensity { q: m.q as usize, entries: m.rho() }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.q + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.chunks(self.q).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.q).map(|j| (0..self.q).map(|i| self.get(i, j)).sum()).collect()
    }

    /// Σ ρ_ij^k.
    pub fn norm_pow(&self, k: usize) -> f64 {
        power_sum(&self.entries, k)
    }

    /// Rows and columns reordered independently.
    pub fn permuted(&self, rows: &[usize], cols: &[usize]) -> Self {
        let q = self.q;
        let mut entries = vec![0.0; q * q];
        for i in 0..q {
            for j in 0..q {
                entries[i * q + j] = self.get(rows[i], cols[j]);
            }
        }
        OverlapDensity { q, entries }
    }

    /// (1-t)·self + t·other.
    pub fn lerp(&self, other: &Self, t: f64) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        OverlapDensity { q: self.q, entries }
    }

    /// Largest deviation of a row or column sum from 1/q.
    pub fn marginal_error(&self) -> f64 {
        let target = 1.0 / self.q as f64;
        self.row_sums().into_iter().chain(self.col_sums()).map(|s| (s - target).abs()).fold(0.0, f64::max)
    }
}

fn power_sum(v: &[f64], k: usize) -> f64 {
    v.iter().map(|&x| x.powi(k as i32)).sum()
}

/// H(ρ) = -Σ ρ ln ρ with 0 ln 0 = 0. Works for densities and flattened matrices.
pub fn entropy(rho: &[f64]) -> f64 {
    -rho.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

fn q_pow_1mk(q: u16, k: usize) -> f64 {
    (q as f64).powi(1 - k as i32)
}

fn check_q(rho: &OverlapDensity, params: &ModelParams) -> Result<()> {
    if rho.q != params.q as usize {
        return Err(Error::Mismatch(format!("overlap is {0}x{0}, params have q = {1}", rho.q, params.q)));
    }
    Ok(())
}

fn ln_positive(x: f64, what: &str) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Degenerate(format!("{what}: log argument {x} is not positive")));
    }
    Ok(x.ln())
}

/// E(ρ) = c ln(1 - 2q^{1-k} + ‖ρ‖_k^k).
pub fn energy(rho: &OverlapDensity, params: &ModelParams) -> Result<f64> {
    check_q(rho, params)?;
    let arg = 1.0 - 2.0 * q_pow_1mk(params.q, params.k) + rho.norm_pow(params.k);
    Ok(params.c * ln_positive(arg, "energy")?)
}

/// f(ρ) = H(ρ) + E(ρ).
pub fn f(rho: &OverlapDensity, params: &ModelParams) -> Result<f64> {
    Ok(entropy(&rho.entries) + energy(rho, params)?)
}

/// Constants of the second-moment computation for one (q, k, c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentFunctions {
    pub params: ModelParams,
    /// f(ρ̄) = 2 ln q + 2c ln(1 - q^{1-k}).
    pub f_bar: f64,
    /// (q²/2)·Ψ; f(ρ̄ + ε) ≈ f(ρ̄) - quad_coeff·‖ε‖².
    pub quad_coeff: f64,
    pub gamma: f64,
    pub psi: f64,
    pub kappa: f64,
}

impl MomentFunctions {
    pub fn new(params: &ModelParams) -> Self {
        let q = params.q as f64;
        let d = params.qk1_minus_one();
        let psi = 1.0 - params.ckk1() / (d * d);
        MomentFunctions {
            params: *params,
            f_bar: 2.0 * q.ln() + 2.0 * params.c * (-q_pow_1mk(params.q, params.k)).ln_1p(),
            quad_coeff: q * q / 2.0 * psi,
            gamma: gamma(params),
            psi,
            kappa: kappa(params.q, params.k),
        }
    }
}

/// Ψ = 1 - ck(k-1)/(q^{k-1}-1)².
pub fn psi(params: &ModelParams) -> f64 {
    1.0 - params.ckk1() / params.qk1_minus_one().powi(2)
}

/// Γ = (ck(k-1)/2)·(q-1)(2q^{k-1} - q - 1)/(q^{k-1}-1)².
pub fn gamma(params: &ModelParams) -> f64 {
    let q = params.q as f64;
    let d = params.qk1_minus_one();
    params.ckk1() / 2.0 * (q - 1.0) * (2.0 * (d + 1.0) - q - 1.0) / (d * d)
}

/// Γ - ck(k-1)(q-1)/(q^{k-1}-1) + ck(k-1)(q-1)²/(2(q^{k-1}-1)²), which vanishes identically.
pub fn gamma_cancellation_residual(params: &ModelParams) -> f64 {
    let q = params.q as f64;
    let d = params.qk1_minus_one();
    gamma(params) - params.ckk1() * (q - 1.0) / d + params.ckk1() * (q - 1.0).powi(2) / (2.0 * d * d)
}

/// κ = q^{1-k}(ln q)^{20}.
pub fn kappa(q: u16, k: usize) -> f64 {
    q_pow_1mk(q, k) * (q as f64).ln().powi(20)
}

/// The density c* = (q^{k-1}-1)²/(k(k-1)) at which Ψ vanishes.
pub fn psi_root(q: u16, k: usize) -> f64 {
    ((q as f64).powi(k as i32 - 1) - 1.0).powi(2) / (k * (k - 1)) as f64
}

fn check_direction(q: usize, direction: &[f64]) -> Result<f64> {
    if direction.len() != q * q {
        return Err(Error::params(format!("direction needs {} entries", q * q)));
    }
    let scale = direction.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    for i in 0..q {
        let row: f64 = direction[i * q..(i + 1) * q].iter().sum();
        let col: f64 = (0..q).map(|r| direction[r * q + i]).sum();
        if row.abs() > 1e-12 * scale * q as f64 || col.abs() > 1e-12 * scale * q as f64 {
            return Err(Error::params("direction must have zero row and column sums"));
        }
    }
    Ok(direction.iter().map(|x| x * x).sum())
}

fn step_from_bar(q: usize, direction: &[f64], t: f64) -> Result<OverlapDensity> {
    let base = 1.0 / (q * q) as f64;
    let entries: Vec<f64> = direction.iter().map(|d| base + t * d).collect();
    if entries.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::params(format!("step t = {t} leaves the simplex")));
    }
    Ok(OverlapDensity { q, entries })
}

/// (f(ρ̄ + t·d) - f(ρ̄), -quad_coeff·t²‖d‖²).
pub fn quadratic_expansion_check(params: &ModelParams, direction: &[f64], t: f64) -> Result<(f64, f64)> {
    let q = params.q as usize;
    let norm2 = check_direction(q, direction)?;
    let mf = MomentFunctions::new(params);
    let exact = f(&step_from_bar(q, direction, t)?, params)? - f(&OverlapDensity::uniform(q), params)?;
    Ok((exact, -mf.quad_coeff * t * t * norm2))
}

/// Central second difference of f at ρ̄ along d, divided by ‖d‖².
/// The analytic value is -q²Ψ.
pub fn hessian_action(params: &ModelParams, direction: &[f64], step: f64) -> Result<f64> {
    let q = params.q as usize;
    let norm2 = check_direction(q, direction)?;
    let plus = f(&step_from_bar(q, direction, step)?, params)?;
    let minus = f(&step_from_bar(q, direction, -step)?, params)?;
    let centre = f(&OverlapDensity::uniform(q), params)?;
    Ok((plus - 2.0 * centre + minus) / (step * step * norm2))
}

/// Central first difference of f at ρ̄ along d; zero for any admissible d.
pub fn gradient_along(params: &ModelParams, direction: &[f64], step: f64) -> Result<f64> {
    let q = params.q as usize;
    check_direction(q, direction)?;
    let plus = f(&step_from_bar(q, direction, step)?, params)?;
    let minus = f(&step_from_bar(q, direction, -step)?, params)?;
    Ok((plus - minus) / (2.0 * step))
}

/// Random q×q matrix with zero row and column sums and unit Frobenius norm.
pub fn random_zero_sum_direction(q: usize, r: &mut Rng) -> Vec<f64> {
    let a: Vec<f64> = (0..q * q).map(|_| r.random::<f64>() - 0.5).collect();
    let qf = q as f64;
    let rows: Vec<f64> = (0..q).map(|i| a[i * q..(i + 1) * q].iter().sum::<f64>() / qf).collect();
    let cols: Vec<f64> = (0..q).map(|j| (0..q).map(|i| a[i * q + j]).sum::<f64>() / qf).collect();
    let mean = a.iter().sum::<f64>() / (qf * qf);
    let mut d: Vec<f64> = (0..q * q).map(|x| a[x] - rows[x / q] - cols[x % q] + mean).collect();
    let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut d {
        *x /= norm;
    }
    d
}

/// n ln q + m ln(1 - q^{1-k}) with m = floor(cn).
pub fn first_moment_log(params: &ModelParams, n: usize) -> f64 {
    let m = (params.c * n as f64 + 1e-9).floor() as usize;
    first_moment_log_edges(params.q, params.k, n, m)
}

/// n ln q + m ln(1 - q^{1-k}); `m = 0` gives n ln q.
pub fn first_moment_log_edges(q: u16, k: usize, n: usize, m: usize) -> f64 {
    n as f64 * (q as f64).ln() + m as f64 * (-q_pow_1mk(q, k)).ln_1p()
}

/// The constant (ck(k-1)/2)(q-1)/(q^{k-1}-1) of the balanced first moment.
pub fn first_moment_correction(params: &ModelParams) -> f64 {
    params.ckk1() / 2.0 * (params.q as f64 - 1.0) / params.qk1_minus_one()
}

const EXACT_MOMENT_MAX_N: usize = 64;

/// ln E[Z_q(H'(n,k,m))] = ln Σ_σ (1 - F(σ)/C(n,k))^m, summed over colour-class
/// compositions with multinomial weights.
pub fn first_moment_exact_log(q: u16, k: usize, n: usize, m: usize) -> Result<f64> {
    if n > EXACT_MOMENT_MAX_N || q as usize > 8 {
        return Err(Error::ResourceGuard(format!("exact first moment limited to n <= {EXACT_MOMENT_MAX_N}, q <= 8")));
    }
    if n < k {
        return Err(Error::params(format!("n = {n} is smaller than k = {k}")));
    }
    let total = binom(n as u64, k as u64) as f64;
    let terms: Vec<f64> = compositions(n as u64, q as usize)
        .into_iter()
        .filter_map(|parts| {
            let mono: u128 = parts.iter().map(|&a| binom(a, k as u64)).sum();
            let p = 1.0 - mono as f64 / total;
            if p <= 0.0 && m > 0 {
                return None;
            }
            let ln_pm = if m == 0 { 0.0 } else { m as f64 * p.ln() };
            Some(ln_multinomial(&parts) + ln_pm)
        })
        .collect();
    Ok(log_sum_exp(&terms))
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Pieces of the asymptotic pair count E[Z^{(2)}_ρ].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairMoment {
    /// H(ρ) + c ln(1 - ‖ρ_{•⋆}‖_k^k - ‖ρ_{⋆•}‖_k^k + ‖ρ‖_k^k), the rate per vertex.
    pub exponent: f64,
    /// (ck(k-1)/2)(1 - A_{k-1}/A_k), with A_j the same bracket at power j.
    pub correction: f64,
    /// ln of the multinomial's polynomial prefactor, when every entry is positive.
    pub log_prefactor: Option<f64>,
    /// n·exponent + correction + log_prefactor.
    pub total: f64,
}

fn pair_bracket(rho: &OverlapDensity, j: usize) -> f64 {
    1.0 - power_sum(&rho.row_sums(), j) - power_sum(&rho.col_sums(), j) + rho.norm_pow(j)
}

pub fn pair_moment_log(rho: &OverlapDensity, params: &ModelParams, n: usize) -> Result<PairMoment> {
    check_q(rho, params)?;
    let k = params.k;
    let ak = pair_bracket(rho, k);
    let exponent = entropy(&rho.entries) + params.c * ln_positive(ak, "pair moment")?;
    let correction = params.ckk1() / 2.0 * (1.0 - pair_bracket(rho, k - 1) / ak);
    let log_prefactor = rho.entries.iter().all(|&x| x > 0.0).then(|| {
        let tau = std::f64::consts::TAU;
        let q2 = (rho.q * rho.q) as f64;
        0.5 * tau.ln() + (1.0 - q2) / 2.0 * (n as f64).ln() - rho.entries.iter().map(|&x| 0.5 * (tau * x).ln()).sum::<f64>()
    });
    let total = n as f64 * exponent + correction + log_prefactor.unwrap_or(0.0);
    Ok(PairMoment { exponent, correction, log_prefactor, total })
}

/// Exact ln E[Z^{(2)}_ρ(H'(n,k,m))] for the integer overlap `counts`: the
/// multinomial number of pairs times P(an edge is bichromatic under both)^m.
pub fn pair_moment_exact_log(counts: &OverlapMatrix, k: usize, m: usize) -> Result<f64> {
    let n = counts.n;
    if n < k as u64 {
        return Err(Error::params(format!("n = {n} is smaller than k = {k}")));
    }
    let b = |a: u64| binom(a, k as u64) as i128;
    let total = b(n);
    let good = total - counts.row_sums().into_iter().map(b).sum::<i128>() - counts.col_sums().into_iter().map(b).sum::<i128>()
        + counts.counts.iter().map(|&a| b(a)).sum::<i128>();
    let ln_p = if good == 0 { f64::NEG_INFINITY } else { (good as f64 / total as f64).ln() };
    let ln_pm = if m == 0 { 0.0 } else { m as f64 * ln_p };
    Ok(ln_multinomial(&counts.counts) + ln_pm)
}

const PAIR_COUNT_MAX_N: usize = 24;

/// Number of ordered pairs (σ, τ) of proper q-colourings of `h` with overlap
/// exactly `target`, by backtracking over the q² joint classes.
pub fn count_pairs_with_overlap(h: &Hypergraph, target: &OverlapMatrix) -> Result<u128> {
    if h.n() as u64 != target.n {
        return Err(Error::Mismatch(format!("overlap has n = {}, hypergraph n = {}", target.n, h.n())));
    }
    if h.n() > PAIR_COUNT_MAX_N {
        return Err(Error::ResourceGuard(format!("pair enumeration limited to n <= {PAIR_COUNT_MAX_N}")));
    }
    let q = target.q as usize;
    let mut remaining = target.counts.clone();
    let mut cell = vec![usize::MAX; h.n()];
    // edges become checkable once their largest vertex is assigned
    let mut closing: Vec<Vec<usize>> = vec![Vec::new(); h.n()];
    for (ei, e) in h.edges().enumerate() {
        closing[*e.iter().max().unwrap() as usize].push(ei);
    }
    fn rec(v: usize, h: &Hypergraph, q: usize, remaining: &mut [u64], cell: &mut [usize], closing: &[Vec<usize>]) -> u128 {
        if v == h.n() {
            return 1;
        }
        let mut total = 0;
        for c in 0..q * q {
            if remaining[c] == 0 {
                continue;
            }
            cell[v] = c;
            let ok = closing[v].iter().all(|&ei| {
                let e = h.edge(ei);
                let first = cell[e[0] as usize];
                let sigma_mono = e.iter().all(|&u| cell[u as usize] / q == first / q);
                let tau_mono = e.iter().all(|&u| cell[u as usize] % q == first % q);
                !sigma_mono && !tau_mono
            });
            if ok {
                remaining[c] -= 1;
                total += rec(v + 1, h, q, remaining, cell, closing);
                remaining[c] += 1;
            }
        }
        cell[v] = usize::MAX;
        total
    }
    Ok(rec(0, h, q, &mut remaining, &mut cell, &closing))
}

/// Number of entries above q^{-1}(1-κ), or unstable when that exceeds q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stability {
    Stable(u16),
    Unstable,
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stability::Stable(s) => write!(f, "{s}"),
            Stability::Unstable => f.write_str("unstable"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapClass {
    /// No entry in the open interval (κ/q, (1-κ)/q).
    pub separable: bool,
    pub stability: Stability,
    /// Every entry exceeds q^{-3}.
    pub interior: bool,
    pub kappa: f64,
    /// κ ≥ 1/2: the interval is empty and every matrix is separable.
    pub degenerate: bool,
}

pub fn classify_overlap(rho: &OverlapDensity, params: &ModelParams) -> Result<OverlapClass> {
    check_q(rho, params)?;
    Ok(classify_with_kappa(rho, kappa(params.q, params.k)))
}

/// The same classification for an arbitrary κ.
pub fn classify_with_kappa(rho: &OverlapDensity, kap: f64) -> OverlapClass {
    let q = rho.q as f64;
    let (lo, hi) = (kap / q, (1.0 - kap) / q);
    let separable = rho.entries.iter().all(|&x| !(x > lo && x < hi));
    let s = rho.entries.iter().filter(|&&x| x > hi).count();
    let stability = if s <= rho.q { Stability::Stable(s as u16) } else { Stability::Unstable };
    let interior = rho.entries.iter().all(|&x| x > 1.0 / (q * q * q));
    OverlapClass { separable, stability, interior, kappa: kap, degenerate: kap >= 0.5 }
}

/// Ψ^{-(q-1)²/2}·exp{-ck(k-1)(q-1)²/(2(q^{k-1}-1)²)}, checked against
/// exp(Σ_ℓ λ_ℓ δ_ℓ²) summed to convergence.
pub fn second_moment_ratio(params: &ModelParams) -> Result<f64> {
    let ps = psi(params);
    if !(ps > 0.0) {
        return Err(Error::Divergent { ratio_num: params.ckk1(), ratio_den: params.qk1_minus_one().powi(2) });
    }
    let q1 = (params.q as f64 - 1.0).powi(2);
    let log_closed = -q1 / 2.0 * ps.ln() - params.ckk1() * q1 / (2.0 * params.qk1_minus_one().powi(2));
    let series = sum_lambda_delta_sq(params, SeriesMode::SeriesConverged)?;
    if (log_closed - series).abs() > 1e-10 * log_closed.abs().max(1.0) {
        return Err(Error::Degenerate(format!("closed form {log_closed} and series {series} disagree")));
    }
    Ok(log_closed.exp())
}

/// Sampler settings for [`landscape_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSettings {
    /// Sinkhorn-normalised random matrices.
    pub samples: usize,
    pub seed: u64,
    /// Entries start as Exp(1)^p with p uniform in [0, spread].
    pub spread: f64,
    /// Points per convex path from ρ̄ to q^{-1}·P.
    pub path_points: usize,
    /// Permutations used for the paths; all of them when q! is at most this.
    pub permutations: usize,
    /// Matrices (1-t)·S + t·q^{-1}P with t in [near_t_min, 1] and S a Sinkhorn sample.
    pub near_permutation_samples: usize,
    pub near_t_min: f64,
}

impl Default for LandscapeSettings {
    fn default() -> Self {
        LandscapeSettings {
            samples: 10_000,
            seed: 1,
            spread: 6.0,
            path_points: 200,
            permutations: 24,
            near_permutation_samples: 0,
            near_t_min: 0.9,
        }
    }
}

const SINKHORN_TOL: f64 = 1e-14;
const SINKHORN_MAX_ITER: usize = 20_000;
const SINKHORN_REDRAWS: usize = 64;
/// Float slack per unit of c allowed when checking the first-regime upper
/// bound; E carries a factor c, so its rounding error grows with it.
pub const BOUND_SLACK: f64 = 1e-12;

/// Alternating row/column scaling to marginals 1/q. `None` if it stalls.
pub fn sinkhorn(q: usize, mut a: Vec<f64>) -> Option<OverlapDensity> {
    let target = 1.0 / q as f64;
    for _ in 0..SINKHORN_MAX_ITER {
        for i in 0..q {
            let s: f64 = a[i * q..(i + 1) * q].iter().sum();
            for x in &mut a[i * q..(i + 1) * q] {
                *x *= target / s;
            }
        }
        let mut err: f64 = 0.0;
        for j in 0..q {
            let s: f64 = (0..q).map(|i| a[i * q + j]).sum();
            for i in 0..q {
                a[i * q + j] *= target / s;
            }
        }
        for i in 0..q {
            let s: f64 = a[i * q..(i + 1) * q].iter().sum();
            err = err.max((s - target).abs());
        }
        if err < SINKHORN_TOL {
            return Some(OverlapDensity { q, entries: a });
        }
    }
    None
}

fn random_positive(q: usize, spread: f64, r: &mut Rng) -> Vec<f64> {
    let p = r.random::<f64>() * spread;
    (0..q * q)
        .map(|_| {
            let e = -(1.0 - r.random::<f64>()).ln();
            e.powf(p).clamp(1e-150, 1e150)
        })
        .collect()
}

fn permutation_set(q: usize, limit: usize, seed: u64) -> Vec<Vec<usize>> {
    let full = (1..=q).try_fold(1usize, |acc, i| acc.checked_mul(i)).filter(|&f| f <= limit);
    if full.is_some() {
        let mut out = Vec::new();
        let mut p: Vec<usize> = (0..q).collect();
        heap_permutations(q, &mut p, &mut out);
        out.sort();
        return out;
    }
    let mut r = rng(seed, stream::LANDSCAPE);
    let mut out = vec![(0..q).collect::<Vec<_>>()];
    while out.len() < limit.max(1) {
        let mut p: Vec<usize> = (0..q).collect();
        for i in (1..q).rev() {
            p.swap(i, r.random_range(0..=i));
        }
        out.push(p);
    }
    out
}

fn heap_permutations(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permutations(k - 1, p, out);
        let j = if k.is_multiple_of(2) { i } else { 0 };
        p.swap(j, k - 1);
    }
}

/// Which probe produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    Sinkhorn,
    Path,
    NearPermutation,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sinkhorn => "sinkhorn",
            Family::Path => "path",
            Family::NearPermutation => "near_permutation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub family: Family,
    pub separable: bool,
    pub stability: Stability,
    pub count: usize,
    /// max f(ρ) - f(ρ̄) within the class.
    pub max_diff: f64,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandscapeReport {
    pub params: ModelParams,
    pub settings: LandscapeSettings,
    pub f_bar: f64,
    pub kappa: f64,
    pub degenerate: bool,
    pub evaluated: usize,
    /// Draws discarded because the scaling stalled; each was redrawn.
    pub sinkhorn_failures: usize,
    pub max_diff: f64,
    pub argmax: Vec<f64>,
    /// Whether c is below (q^{k-1}-1) ln q, so the upper bound was checked.
    pub bound_checked: bool,
    pub bound_violations: usize,
    /// min over samples of bound - f(ρ); negative beyond the slack is a violation.
    pub bound_min_slack: f64,
    pub classes: Vec<ClassSummary>,
}

/// f(ρ̄) - ln(1 + (q^{2k-2}‖ρ‖_k^k - 1)/(q^{k-1}-1)²)·((q^{k-1}-1) ln q - c).
pub fn first_regime_upper_bound(rho: &OverlapDensity, params: &ModelParams) -> f64 {
    let mf = MomentFunctions::new(params);
    let d = params.qk1_minus_one();
    let scaled = (params.q as f64).powi(2 * params.k as i32 - 2) * rho.norm_pow(params.k);
    mf.f_bar - ((scaled - 1.0) / (d * d)).ln_1p() * (first_regime_bound(params.q, params.k) - params.c)
}

struct Probe {
    family: Family,
    rho: Option<OverlapDensity>,
}

struct Evaluated {
    family: Family,
    class: OverlapClass,
    diff: f64,
    slack: Option<f64>,
    rho: OverlapDensity,
}

/// Samples overlap matrices with marginals 1/q, classifies them and reports
/// the largest f(ρ) - f(ρ̄) per (family, class).
pub fn landscape_scan(params: &ModelParams, settings: &LandscapeSettings) -> Result<LandscapeReport> {
    params.validate()?;
    let q = params.q as usize;
    let mf = MomentFunctions::new(params);
    let exact_bar = f(&OverlapDensity::uniform(q), params)?;
    let check_bound = params.c < first_regime_bound(params.q, params.k);
    let slack_tol = BOUND_SLACK * params.c.max(1.0);

    let bar = OverlapDensity::uniform(q);
    let mut probes: Vec<Probe> = Vec::new();
    let perms = permutation_set(q, settings.permutations, settings.seed);
    for p in &perms {
        let target = OverlapDensity::scaled_permutation(p);
        for j in 0..=settings.path_points {
            let t = j as f64 / settings.path_points.max(1) as f64;
            probes.push(Probe { family: Family::Path, rho: Some(bar.lerp(&target, t)) });
        }
    }
    // a draw whose scaling stalls is replaced by the next draw from the same stream
    let sampled: Vec<(Probe, usize)> = (0..settings.samples + settings.near_permutation_samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng(settings.seed.wrapping_add(i as u64), stream::LANDSCAPE);
            let mut failures = 0;
            let mut s = None;
            while s.is_none() && failures < SINKHORN_REDRAWS {
                s = sinkhorn(q, random_positive(q, settings.spread, &mut r));
                failures += usize::from(s.is_none());
            }
            if i < settings.samples {
                return (Probe { family: Family::Sinkhorn, rho: s }, failures);
            }
            let p = &perms[r.random_range(0..perms.len())];
            let t = settings.near_t_min + (1.0 - settings.near_t_min) * r.random::<f64>();
            let rho = s.map(|s| s.lerp(&OverlapDensity::scaled_permutation(p), t));
            (Probe { family: Family::NearPermutation, rho }, failures)
        })
        .collect();
    let sinkhorn_failures = sampled.iter().map(|(_, f)| f).sum();
    probes.extend(sampled.into_iter().map(|(p, _)| p));

    let evaluated: Vec<Evaluated> = probes
        .into_par_iter()
        .filter_map(|p| p.rho.map(|rho| (p.family, rho)))
        .map(|(family, rho)| -> Result<Evaluated> {
            let diff = f(&rho, params)? - exact_bar;
            let class = classify_overlap(&rho, params)?;
            let slack = check_bound.then(|| first_regime_upper_bound(&rho, params) - (diff + exact_bar));
            Ok(Evaluated { family, class, diff, slack, rho })
        })
        .collect::<Result<_>>()?;

    let mut classes: BTreeMap<(Family, bool, Stability), ClassSummary> = BTreeMap::new();
    let mut max_diff = f64::NEG_INFINITY;
    let mut argmax = Vec::new();
    let mut bound_violations = 0;
    let mut bound_min_slack = f64::INFINITY;
    for ev in &evaluated {
        if ev.diff > max_diff {
            max_diff = ev.diff;
            argmax = ev.rho.entries.clone();
        }
        if let Some(s) = ev.slack {
            bound_min_slack = bound_min_slack.min(s);
            if s < -slack_tol {
                bound_violations += 1;
            }
        }
        let key = (ev.family, ev.class.separable, ev.class.stability);
        let entry = classes.entry(key).or_insert_with(|| ClassSummary {
            family: ev.family,
            separable: ev.class.separable,
            stability: ev.class.stability,
            count: 0,
            max_diff: f64::NEG_INFINITY,
            argmax: Vec::new(),
        });
        entry.count += 1;
        if ev.diff > entry.max_diff {
            entry.max_diff = ev.diff;
            entry.argmax = ev.rho.entries.clone();
        }
    }
    Ok(LandscapeReport {
        params: *params,
        settings: settings.clone(),
        f_bar: mf.f_bar,
        kappa: mf.kappa,
        degenerate: mf.kappa >= 0.5,
        evaluated: evaluated.len(),
        sinkhorn_failures,
        max_diff,
        argmax,
        bound_checked: check_bound,
        bound_violations,
        bound_min_slack: if check_bound { bound_min_slack } else { f64::NAN },
        classes: classes.into_values().collect(),
    })
}

/// CSV schema version of [`LandscapeReport::write_csv`].
pub const LANDSCAPE_CSV_VERSION: u32 = 1;

impl LandscapeReport {
    /// One row per (family, class): family, separable, s, count, max f(ρ)-f(ρ̄), argmax row-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["family", "separable", "s", "count", "max_diff", "argmax"])?;
        for c in &self.classes {
            let arg = c.argmax.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" ");
            w.write_record([
                c.family.to_string(),
                c.separable.to_string(),
                c.stability.to_string(),
                c.count.to_string(),
                format!("{:e}", c.max_diff),
                arg,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
