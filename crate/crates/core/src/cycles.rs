//! Loose-cycle census and the Poisson parameters λ_ℓ, δ_ℓ, μ_ℓ.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::params::ModelParams;

/// `counts[ℓ - 2]` is the number of loose ℓ-cycles, for 2 ≤ ℓ ≤ max_len.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleCensus {
    pub max_len: usize,
    pub counts: Vec<u64>,
}

impl CycleCensus {
    pub fn get(&self, ell: usize) -> u64 {
        if ell < 2 || ell > self.max_len {
            return 0;
        }
        self.counts[ell - 2]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().enumerate().map(|(i, &c)| (i + 2, c))
    }
}

pub const DEFAULT_CENSUS_WORK_LIMIT: u64 = 500_000_000;

pub fn count_loose_cycles(h: &Hypergraph, max_len: usize) -> Result<CycleCensus> {
    count_loose_cycles_with_limit(h, max_len, DEFAULT_CENSUS_WORK_LIMIT)
}

fn intersection_size(a: &[Vertex], b: &[Vertex]) -> usize {
    // both sorted
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Loose cycles in the link-vertex formulation.
///
/// A 2-cycle is a pair of edges sharing exactly two vertices. For ℓ ≥ 3 the
/// edges e_0..e_{ℓ-1} meet in exactly one vertex when cyclically adjacent and
/// are disjoint otherwise. Each undirected cycle is counted once: it is
/// enumerated from its least edge index, in the direction with e_1 < e_{ℓ-1}.
pub fn count_loose_cycles_with_limit(h: &Hypergraph, max_len: usize, work_limit: u64) -> Result<CycleCensus> {
    if max_len < 2 {
        return Err(Error::params("maximum cycle length must be at least 2"));
    }
    let mut counts = vec![0u64; max_len - 1];
    let mut work = 0u64;

    for e in 0..h.m() {
        let ev = h.edge(e);
        for &v in ev {
            for &f in h.incident(v) {
                let f = f as usize;
                if f <= e {
                    continue;
                }
                work += 1;
                let fv = h.edge(f);
                // count each pair once, at its least shared vertex
                let first_shared = ev.iter().find(|w| fv.binary_search(w).is_ok());
                if first_shared == Some(&v) && intersection_size(ev, fv) == 2 {
                    counts[0] += 1;
                }
            }
        }
    }
    if work > work_limit {
        return Err(Error::ResourceGuard(format!("cycle census exceeded {work_limit} steps")));
    }

    if max_len >= 3 {
        let mut dfs = Dfs { h, max_len, counts: &mut counts, path: Vec::with_capacity(max_len), work, work_limit };
        for e0 in 0..h.m() {
            dfs.path.clear();
            dfs.path.push(e0);
            dfs.extend(usize::MAX as Vertex)?;
        }
    }
    Ok(CycleCensus { max_len, counts })
}

struct Dfs<'a> {
    h: &'a Hypergraph,
    max_len: usize,
    counts: &'a mut Vec<u64>,
    path: Vec<usize>,
    work: u64,
    work_limit: u64,
}

impl Dfs<'_> {
    /// `arrived` is the link vertex shared by the last two path edges.
    fn extend(&mut self, arrived: Vertex) -> Result<()> {
        let t = self.path.len() - 1;
        let e0 = self.path[0];
        let last = self.path[t];
        let h = self.h;
        for &v in h.edge(last) {
            if v == arrived {
                continue;
            }
            for &f in h.incident(v) {
                let f = f as usize;
                if f <= e0 || self.path.contains(&f) {
                    continue;
                }
                self.work += 1;
                if self.work > self.work_limit {
                    return Err(Error::ResourceGuard(format!("cycle census exceeded {} steps", self.work_limit)));
                }
                let fv = h.edge(f);
                if intersection_size(fv, h.edge(last)) != 1 {
                    continue;
                }
                if t == 0 {
                    self.path.push(f);
                    self.extend(v)?;
                    self.path.pop();
                    continue;
                }
                if self.path[1..t].iter().any(|&g| intersection_size(fv, h.edge(g)) != 0) {
                    continue;
                }
                match intersection_size(fv, h.edge(e0)) {
                    1 => {
                        let ell = t + 2;
                        if ell <= self.max_len && self.path[1] < f {
                            self.counts[ell - 2] += 1;
                        }
                    }
                    0 if t + 3 <= self.max_len => {
                        self.path.push(f);
                        self.extend(v)?;
                        self.path.pop();
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonParams {
    pub ell: usize,
    pub lambda: f64,
    pub delta: f64,
    pub mu: f64,
}

/// λ_ℓ = (ck(k-1))^ℓ / (2ℓ), δ_ℓ = (-1)^ℓ (q-1) / (q^{k-1}-1)^ℓ,
/// μ_ℓ = λ_ℓ(1 + δ_ℓ), for ℓ = 2..=max_len.
pub fn poisson_params(params: &ModelParams, max_len: usize) -> Vec<PoissonParams> {
    let b = params.ckk1();
    let qq = params.qk1_minus_one();
    let q1 = params.q as f64 - 1.0;
    (2..=max_len)
        .map(|ell| {
            let lambda = b.powi(ell as i32) / (2.0 * ell as f64);
            let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
            let delta = sign * q1 / qq.powi(ell as i32);
            PoissonParams { ell, lambda, delta, mu: lambda * (1.0 + delta) }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    ClosedForm,
    /// Partial sum over 2 ≤ ℓ ≤ L.
    Series(usize),
    /// Partial sums until the terms stop changing the total.
    SeriesConverged,
}

/// r = ck(k-1) / (q^{k-1}-1)^2, the ratio of the geometric part of λ_ℓ δ_ℓ^2.
pub fn cycle_ratio(params: &ModelParams) -> f64 {
    params.ckk1() / params.qk1_minus_one().powi(2)
}

/// Σ_{ℓ≥2} λ_ℓ δ_ℓ^2. The closed form is ((q-1)^2/2)[-ln(1-r) - r].
pub fn sum_lambda_delta_sq(params: &ModelParams, mode: SeriesMode) -> Result<f64> {
    let r = cycle_ratio(params);
    if r >= 1.0 {
        return Err(Error::Divergent { ratio_num: params.ckk1(), ratio_den: params.qk1_minus_one().powi(2) });
    }
    let a = (params.q as f64 - 1.0).powi(2) / 2.0;
    Ok(match mode {
        SeriesMode::ClosedForm => a * (-(-r).ln_1p() - r),
        SeriesMode::Series(max_len) => {
            let mut s = 0.0;
            let mut rl = r;
            for ell in 2..=max_len {
                rl *= r;
                s += rl / ell as f64;
            }
            a * s
        }
        SeriesMode::SeriesConverged => {
            let mut s = 0.0;
            let mut rl = r;
            let mut ell = 2usize;
            loop {
                rl *= r;
                let term = rl / ell as f64;
                let next = s + term;
                if next == s || ell > 1_000_000 {
                    break;
                }
                s = next;
                ell += 1;
            }
            a * s
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    pub lambda: f64,
    pub samples: usize,
    pub buckets: usize,
    pub chi2: f64,
    pub dof: usize,
    pub p: f64,
}

pub const MIN_FIT_SAMPLES: usize = 100;

/// Chi-square goodness of fit against Poisson(lambda). Cells are grown from 0
/// upward until each has expected count ≥ 5; the last cell is the upper tail.
pub fn poisson_fit(samples: &[u64], lambda: f64) -> Result<FitReport> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::params("lambda must be positive"));
    }
    if samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::Degenerate(format!("need at least {MIN_FIT_SAMPLES} samples, got {}", samples.len())));
    }
    let total = samples.len() as f64;
    let max_obs = *samples.iter().max().unwrap_or(&0);

    // cell boundaries: cell i covers [lo_i, lo_{i+1}); last is [lo, inf)
    let mut cells: Vec<(u64, f64)> = Vec::new();
    let mut pmf = (-lambda).exp();
    let mut cdf = 0.0;
    let mut acc = 0.0;
    let mut start = 0u64;
    let mut j = 0u64;
    loop {
        acc += pmf * total;
        cdf += pmf;
        j += 1;
        pmf *= lambda / j as f64;
        let tail = (1.0 - cdf).max(0.0) * total;
        if acc >= 5.0 && tail >= 5.0 {
            cells.push((start, acc));
            start = j;
            acc = 0.0;
        } else if tail < 5.0 {
            if acc + tail >= 5.0 || cells.is_empty() {
                cells.push((start, acc + tail));
            } else {
                let last = cells.last_mut().unwrap();
                last.1 += acc + tail;
            }
            break;
        }
        if j > max_obs.max(lambda as u64) + 10_000 {
            cells.push((start, acc + tail));
            break;
        }
    }
    if cells.len() < 2 {
        return Err(Error::Degenerate("fewer than two cells with expected count >= 5".into()));
    }
    let mut observed = vec![0u64; cells.len()];
    for &s in samples {
        let idx = cells.partition_point(|&(lo, _)| lo <= s) - 1;
        observed[idx] += 1;
    }
    let chi2: f64 = cells.iter().zip(&observed).map(|(&(_, e), &o)| (o as f64 - e).powi(2) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::Degenerate(e.to_string()))?;
    let p = dist.sf(chi2);
    Ok(FitReport { ell: None, lambda, samples: samples.len(), buckets: cells.len(), chi2, dof, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn hg(n: usize, edges: &[[Vertex; 3]]) -> Hypergraph {
        Hypergraph::new(n, 3, edges.iter().map(|e| e.to_vec()).collect(), true).unwrap()
    }

    #[test]
    fn census_examples() {
        let c = count_loose_cycles(&hg(6, &[[0, 1, 2], [2, 3, 4], [4, 5, 0]]), 4).unwrap();
        assert_eq!((c.get(2), c.get(3), c.get(4)), (0, 1, 0));
        let c = count_loose_cycles(&hg(4, &[[0, 1, 2], [1, 2, 3]]), 3).unwrap();
        assert_eq!((c.get(2), c.get(3)), (1, 0));
        let c = count_loose_cycles(&hg(5, &[[0, 1, 2], [2, 3, 4]]), 3).unwrap();
        assert_eq!(c.get(2), 0);
    }

    #[test]
    fn duplicate_edges_are_not_two_cycles() {
        let c = count_loose_cycles(&hg(3, &[[0, 1, 2], [0, 1, 2]]), 3).unwrap();
        assert_eq!(c.get(2), 0);
    }

    #[test]
    fn three_edges_through_one_vertex_are_not_a_triangle() {
        let c = count_loose_cycles(&hg(7, &[[0, 1, 2], [0, 3, 4], [0, 5, 6]]), 3).unwrap();
        assert_eq!(c.get(3), 0);
    }

    #[test]
    fn loose_square_and_chord() {
        // square with link vertices 0, 2, 4, 6
        let sq = [[0, 1, 2], [2, 3, 4], [4, 5, 6], [6, 7, 0]];
        let c = count_loose_cycles(&hg(8, &sq), 5).unwrap();
        assert_eq!(c.counts, vec![0, 0, 1, 0]);
    }

    #[test]
    fn census_guard() {
        let h = hg(6, &[[0, 1, 2], [2, 3, 4], [4, 5, 0]]);
        assert!(matches!(count_loose_cycles_with_limit(&h, 3, 1), Err(Error::ResourceGuard(_))));
        assert!(count_loose_cycles(&h, 1).is_err());
    }

    #[test]
    fn poisson_param_examples() {
        let p = ModelParams::new(3, 3, 1.0).unwrap();
        let pp = poisson_params(&p, 3);
        assert!((pp[0].lambda - 9.0).abs() < 1e-12);
        assert!((pp[0].delta - 0.03125).abs() < 1e-15);
        assert!((pp[0].mu - 9.28125).abs() < 1e-12);
        assert!((pp[1].lambda - 36.0).abs() < 1e-12);
        assert!((pp[1].delta + 0.00390625).abs() < 1e-15);
    }

    #[test]
    fn lambda_delta_sum() {
        let p = ModelParams::new(3, 3, 1.0).unwrap();
        let closed = sum_lambda_delta_sq(&p, SeriesMode::ClosedForm).unwrap();
        let series = sum_lambda_delta_sq(&p, SeriesMode::Series(60)).unwrap();
        assert!((closed - 0.009380145626505049).abs() < 1e-15);
        assert!((closed - series).abs() < 1e-12);
        assert!((closed.exp() - 1.0094242770710224).abs() < 1e-12);
        let tiny = ModelParams::new(3, 3, 1e-9).unwrap();
        assert!(sum_lambda_delta_sq(&tiny, SeriesMode::ClosedForm).unwrap() < 1e-18);
        let p = ModelParams::new(3, 3, 11.0).unwrap();
        assert!(matches!(sum_lambda_delta_sq(&p, SeriesMode::ClosedForm), Err(Error::Divergent { .. })));
    }

    fn poisson_draw(r: &mut crate::rng::Rng, lambda: f64) -> u64 {
        let l = (-lambda).exp();
        let (mut k, mut p) = (0u64, 1.0);
        loop {
            p *= r.random::<f64>();
            if p <= l {
                return k;
            }
            k += 1;
        }
    }

    #[test]
    fn fit_is_calibrated_and_detects_misfit() {
        let mut r = crate::rng::rng(11, crate::rng::stream::TEST);
        let mut small = 0;
        let runs = 200;
        for _ in 0..runs {
            let s: Vec<u64> = (0..500).map(|_| poisson_draw(&mut r, 2.25)).collect();
            let f = poisson_fit(&s, 2.25).unwrap();
            assert_eq!(f.dof, f.buckets - 1);
            if f.p < 0.1 {
                small += 1;
            }
        }
        // about 10% of p-values fall below 0.1 when the fit is calibrated
        assert!((5..=40).contains(&small), "{small} of {runs}");
        let zeros = vec![0u64; 100];
        assert!(poisson_fit(&zeros, 5.0).unwrap().p < 1e-6);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(poisson_fit(&[1; 50], 1.0), Err(Error::Degenerate(_))));
        assert!(poisson_fit(&[1; 200], 0.0).is_err());
        // lambda so small that only one cell can reach expected 5
        assert!(matches!(poisson_fit(&[0; 100], 1e-4), Err(Error::Degenerate(_))));
    }
}
