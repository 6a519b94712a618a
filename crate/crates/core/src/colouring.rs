//! Colourings, densities, overlaps, and the exact counting/sampling oracles.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::params::binom;
use crate::rng::{rng, stream};

pub type Colour = u16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Colouring {
    q: u16,
    colours: Vec<Colour>,
}

impl Colouring {
    pub fn new(q: u16, colours: Vec<Colour>) -> Result<Self> {
        if q == 0 {
            return Err(Error::params("q must be positive"));
        }
        if let Some(bad) = colours.iter().find(|&&c| c >= q) {
            return Err(Error::params(format!("colour {bad} >= q = {q}")));
        }
        Ok(Colouring { q, colours })
    }

    pub fn q(&self) -> u16 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.colours.len()
    }

    pub fn as_slice(&self) -> &[Colour] {
        &self.colours
    }

    pub fn get(&self, v: Vertex) -> Colour {
        self.colours[v as usize]
    }

    pub fn set(&mut self, v: Vertex, c: Colour) {
        assert!(c < self.q, "colour out of range");
        self.colours[v as usize] = c;
    }

    /// Class sizes |σ^{-1}(i)|.
    pub fn class_sizes(&self) -> Vec<u64> {
        let mut s = vec![0u64; self.q as usize];
        for &c in &self.colours {
            s[c as usize] += 1;
        }
        s
    }

    /// F(σ) = Σ_i C(|σ^{-1}(i)|, k): monochromatic k-subsets of the
    /// complete hypergraph.
    pub fn mono_count(&self, k: usize) -> u128 {
        self.class_sizes().iter().map(|&a| binom(a, k as u64)).sum()
    }

    pub fn to_line(&self) -> String {
        self.colours.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }

    pub fn from_line(q: u16, line: &str) -> Result<Self> {
        let colours = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse { line: 1, msg: format!("bad colour `{t}`") }))
            .collect::<Result<_>>()?;
        Colouring::new(q, colours)
    }

    /// Exactly balanced class sizes (differing by at most one), placed by a
    /// seeded uniform shuffle.
    pub fn balanced(n: usize, q: u16, seed: u64) -> Result<Self> {
        let mut colours: Vec<Colour> = (0..n).map(|i| (i % q as usize) as Colour).collect();
        let mut r = rng(seed, stream::PLANTED_MAP);
        for i in (1..n).rev() {
            let j = r.random_range(0..=i);
            colours.swap(i, j);
        }
        Colouring::new(q, colours)
    }
}

fn check_len(h: &Hypergraph, sigma: &Colouring) -> Result<()> {
    if h.n() != sigma.n() {
        return Err(Error::Mismatch(format!("colouring has length {}, hypergraph has n = {}", sigma.n(), h.n())));
    }
    Ok(())
}

pub fn is_monochromatic(e: &[Vertex], colours: &[Colour]) -> bool {
    let c0 = colours[e[0] as usize];
    e[1..].iter().all(|&v| colours[v as usize] == c0)
}

pub fn is_proper(h: &Hypergraph, sigma: &Colouring) -> Result<bool> {
    check_len(h, sigma)?;
    Ok(h.edges().all(|e| !is_monochromatic(e, sigma.as_slice())))
}

pub fn mono_count(sigma: &Colouring, k: usize) -> u128 {
    sigma.mono_count(k)
}

/// Colour class counts; `rho()` divides by n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColourDensity {
    pub n: u64,
    pub counts: Vec<u64>,
}

impl ColourDensity {
    pub fn rho(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }
}

pub fn colour_density(sigma: &Colouring) -> ColourDensity {
    ColourDensity { n: sigma.n() as u64, counts: sigma.class_sizes() }
}

/// Joint class counts |σ^{-1}(i) ∩ τ^{-1}(j)|, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    pub q: u16,
    pub n: u64,
    pub counts: Vec<u64>,
}

impl OverlapMatrix {
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.q as usize + j]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        let q = self.q as usize;
        (0..q).map(|i| (0..q).map(|j| self.count(i, j)).sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let q = self.q as usize;
        (0..q).map(|j| (0..q).map(|i| self.count(i, j)).sum()).collect()
    }

    pub fn rho(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }
}

pub fn overlap(sigma: &Colouring, tau: &Colouring) -> Result<OverlapMatrix> {
    if sigma.n() != tau.n() || sigma.q() != tau.q() {
        return Err(Error::Mismatch("colourings differ in length or q".into()));
    }
    let q = sigma.q() as usize;
    let mut counts = vec![0u64; q * q];
    for (&a, &b) in sigma.as_slice().iter().zip(tau.as_slice()) {
        counts[a as usize * q + b as usize] += 1;
    }
    Ok(OverlapMatrix { q: sigma.q(), n: sigma.n() as u64, counts })
}

/// Every class density is within `1/(omega * sqrt(n))` of `1/q`.
pub fn is_balanced(sigma: &Colouring, omega: f64) -> Result<bool> {
    if !(omega > 0.0) {
        return Err(Error::params("omega must be positive"));
    }
    let n = sigma.n() as f64;
    let tol = 1.0 / (omega * n.sqrt());
    let q = sigma.q() as f64;
    Ok(sigma.class_sizes().iter().all(|&a| (a as f64 / n - 1.0 / q).abs() <= tol))
}

/// Size and work limits for the exponential oracles.
#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_vertices: usize,
    pub max_nodes: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 40, max_nodes: 500_000_000 }
    }
}

/// Backtracking counter over proper colourings. Vertices with a fixed colour
/// are assigned first, then the rest by descending degree. Once every edge is
/// bichromatic the remaining vertices are free and contribute q^rest.
struct Counter<'a> {
    h: &'a Hypergraph,
    q: u16,
    order: Vec<Vertex>,
    fixed: usize,
    colours: Vec<Colour>,
    assigned: Vec<u16>,
    first: Vec<Colour>,
    bichromatic: Vec<bool>,
    unsatisfied: usize,
    nodes: u64,
    max_nodes: u64,
    pow: Vec<u128>,
}

impl<'a> Counter<'a> {
    fn new(h: &'a Hypergraph, q: u16, prefix: &[(Vertex, Colour)], limits: OracleLimits) -> Result<Self> {
        if h.n() > limits.max_vertices {
            return Err(Error::ResourceGuard(format!(
                "exact counter limited to n <= {}, got {}",
                limits.max_vertices,
                h.n()
            )));
        }
        let mut is_fixed = vec![false; h.n()];
        let mut order: Vec<Vertex> = Vec::with_capacity(h.n());
        for &(v, _) in prefix {
            if !is_fixed[v as usize] {
                is_fixed[v as usize] = true;
                order.push(v);
            }
        }
        let fixed = order.len();
        let mut rest: Vec<Vertex> = (0..h.n() as Vertex).filter(|&v| !is_fixed[v as usize]).collect();
        rest.sort_by_key(|&v| (std::cmp::Reverse(h.degree(v)), v));
        order.extend(rest);
        let mut pow = vec![1u128; h.n() + 1];
        for i in 1..pow.len() {
            pow[i] = pow[i - 1].saturating_mul(q as u128);
        }
        let mut colours = vec![0; h.n()];
        for &(v, c) in prefix {
            colours[v as usize] = c;
        }
        Ok(Counter {
            h,
            q,
            order,
            fixed,
            colours,
            assigned: vec![0; h.m()],
            first: vec![0; h.m()],
            bichromatic: vec![false; h.m()],
            unsatisfied: h.m(),
            nodes: 0,
            max_nodes: limits.max_nodes,
            pow,
        })
    }

    /// Assigns `c` to `v`; returns false on a completed monochromatic edge.
    /// Changes are recorded in `undo` as edge indices whose flag flipped.
    fn assign(&mut self, v: Vertex, c: Colour, undo: &mut Vec<u32>) -> bool {
        self.colours[v as usize] = c;
        let mut ok = true;
        let k = self.h.k() as u16;
        for &e in self.h.incident(v) {
            let ei = e as usize;
            if self.assigned[ei] == 0 {
                self.first[ei] = c;
            } else if !self.bichromatic[ei] && self.first[ei] != c {
                self.bichromatic[ei] = true;
                self.unsatisfied -= 1;
                undo.push(e);
            }
            self.assigned[ei] += 1;
            if self.assigned[ei] == k && !self.bichromatic[ei] {
                ok = false;
            }
        }
        ok
    }

    fn unassign(&mut self, v: Vertex, undo: &[u32]) {
        for &e in self.h.incident(v) {
            self.assigned[e as usize] -= 1;
        }
        for &e in undo {
            self.bichromatic[e as usize] = false;
            self.unsatisfied += 1;
        }
    }

    fn run(&mut self) -> Result<u128> {
        // fixed prefix first; a conflict there means zero extensions
        let mut undo = Vec::new();
        for i in 0..self.fixed {
            let v = self.order[i];
            let c = self.colours[v as usize];
            if !self.assign(v, c, &mut undo) {
                return Ok(0);
            }
        }
        self.rec(self.fixed)
    }

    fn rec(&mut self, depth: usize) -> Result<u128> {
        if self.unsatisfied == 0 {
            return Ok(self.pow[self.order.len() - depth]);
        }
        if depth == self.order.len() {
            return Ok(0);
        }
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::ResourceGuard(format!("exact counter exceeded {} nodes", self.max_nodes)));
        }
        let v = self.order[depth];
        let mut total = 0u128;
        let mut undo = Vec::new();
        for c in 0..self.q {
            undo.clear();
            if self.assign(v, c, &mut undo) {
                total += self.rec(depth + 1)?;
            }
            self.unassign(v, &undo);
        }
        Ok(total)
    }
}

/// Z_q(h): the exact number of proper q-colourings.
pub fn count_colourings_exact(h: &Hypergraph, q: u16) -> Result<u128> {
    count_colourings_with(h, q, &[], OracleLimits::default())
}

/// Number of proper colourings extending the partial assignment `prefix`.
pub fn count_colourings_with(h: &Hypergraph, q: u16, prefix: &[(Vertex, Colour)], limits: OracleLimits) -> Result<u128> {
    if q == 0 {
        return Err(Error::params("q must be positive"));
    }
    if let Some(&(v, c)) = prefix.iter().find(|&&(v, c)| v as usize >= h.n() || c >= q) {
        return Err(Error::params(format!("prefix entry ({v}, {c}) out of range")));
    }
    Counter::new(h, q, prefix, limits)?.run()
}

/// All proper colourings, in lexicographic order of the assignment vector.
pub fn enumerate_proper(h: &Hypergraph, q: u16, limit: usize) -> Result<Vec<Colouring>> {
    if (q as f64).powi(h.n() as i32) > 5e7 {
        return Err(Error::ResourceGuard(format!("q^n too large to enumerate ({q}^{})", h.n())));
    }
    let n = h.n();
    let mut out = Vec::new();
    let mut cur = vec![0 as Colour; n];
    // odometer over q^n with per-edge check on completion
    loop {
        if h.edges().all(|e| !is_monochromatic(e, &cur)) {
            if out.len() >= limit {
                return Err(Error::ResourceGuard(format!("more than {limit} proper colourings")));
            }
            out.push(Colouring { q, colours: cur.clone() });
        }
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < q {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// A uniformly random proper colouring: draw a rank in `[0, Z)` and descend
/// vertex by vertex using extension counts.
pub fn sample_uniform_colouring(h: &Hypergraph, q: u16, seed: u64) -> Result<Colouring> {
    let limits = OracleLimits::default();
    let z = count_colourings_with(h, q, &[], limits)?;
    if z == 0 {
        return Err(Error::Uncolourable(q));
    }
    let mut r = rng(seed, stream::SAMPLER);
    let mut rank = r.random_range(0..z);
    let mut prefix: Vec<(Vertex, Colour)> = Vec::with_capacity(h.n());
    for v in 0..h.n() as Vertex {
        let mut chosen = None;
        for c in 0..q {
            prefix.push((v, c));
            let cnt = count_colourings_with(h, q, &prefix, limits)?;
            if rank < cnt {
                chosen = Some(c);
                break;
            }
            rank -= cnt;
            prefix.pop();
        }
        if chosen.is_none() {
            unreachable!("rank exceeded extension counts");
        }
    }
    Colouring::new(q, prefix.into_iter().map(|(_, c)| c).collect())
}

pub const PLANTED_MAP_RETRY_CAP: u64 = 1_000_000;

/// Uniform map σ: [n] -> [q] conditioned on F(σ) <= C(n,k) - m, by rejection.
pub fn sample_planted_map(n: usize, q: u16, k: usize, m: usize, seed: u64) -> Result<Colouring> {
    if q == 0 || n == 0 {
        return Err(Error::params("n and q must be positive"));
    }
    let total = binom(n as u64, k as u64);
    if m as u128 > total {
        return Err(Error::params(format!("m = {m} exceeds C({n},{k})")));
    }
    if q == 1 && m >= 1 && total >= 1 {
        return Err(Error::params("q = 1 makes every edge monochromatic"));
    }
    let budget = total - m as u128;
    let mut r = rng(seed, stream::PLANTED_MAP);
    let mut colours = vec![0 as Colour; n];
    for _ in 0..PLANTED_MAP_RETRY_CAP {
        for c in colours.iter_mut() {
            *c = r.random_range(0..q);
        }
        let sigma = Colouring { q, colours };
        if sigma.mono_count(k) <= budget {
            return Ok(sigma);
        }
        colours = sigma.colours;
    }
    Err(Error::RetryCap(PLANTED_MAP_RETRY_CAP))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hg(n: usize, edges: &[&[Vertex]]) -> Hypergraph {
        Hypergraph::new(n, edges.first().map_or(3, |e| e.len()), edges.iter().map(|e| e.to_vec()).collect(), true).unwrap()
    }

    fn col(q: u16, c: &[Colour]) -> Colouring {
        Colouring::new(q, c.to_vec()).unwrap()
    }

    #[test]
    fn properness() {
        let h = hg(3, &[&[0, 1, 2]]);
        assert!(!is_proper(&h, &col(3, &[0, 0, 0])).unwrap());
        assert!(is_proper(&h, &col(3, &[0, 0, 1])).unwrap());
        let empty = Hypergraph::new(3, 3, vec![], false).unwrap();
        assert!(is_proper(&empty, &col(3, &[0, 0, 0])).unwrap());
        assert!(is_proper(&h, &col(3, &[0, 0])).is_err());
    }

    #[test]
    fn mono_counts() {
        assert_eq!(mono_count(&col(1, &[0, 0, 0]), 3), 1);
        assert_eq!(mono_count(&col(2, &[0, 0, 1, 1]), 3), 0);
        assert_eq!(mono_count(&col(2, &[0, 0, 0, 0, 1, 1]), 3), 4);
    }

    #[test]
    fn overlaps() {
        let s = col(3, &[0, 1, 2]);
        let o = overlap(&s, &s).unwrap();
        assert_eq!(o.counts, vec![1, 0, 0, 0, 1, 0, 0, 0, 1]);
        let o = overlap(&col(2, &[0, 0, 1, 1]), &col(2, &[1, 1, 0, 0])).unwrap();
        assert_eq!(o.rho(), vec![0.0, 0.5, 0.5, 0.0]);
        assert_eq!(o.row_sums(), colour_density(&col(2, &[0, 0, 1, 1])).counts);
    }

    #[test]
    fn balance_examples() {
        let s = col(3, &[0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert!(is_balanced(&s, 1e9).unwrap());
        let s = col(3, &[0, 0, 0, 0, 0, 1, 1, 2, 2]);
        assert!(!is_balanced(&s, 10.0).unwrap());
        let mut c = vec![0; 333_400];
        c.extend(std::iter::repeat_n(1, 333_300));
        c.extend(std::iter::repeat_n(2, 333_300));
        assert!(is_balanced(&col(3, &c), 2.0).unwrap());
    }

    #[test]
    fn exact_counts() {
        let h = hg(3, &[&[0, 1, 2]]);
        assert_eq!(count_colourings_exact(&h, 3).unwrap(), 24);
        assert_eq!(count_colourings_exact(&h, 2).unwrap(), 6);
        let h = hg(6, &[&[0, 1, 2], &[3, 4, 5]]);
        assert_eq!(count_colourings_exact(&h, 3).unwrap(), 576);
        let empty = Hypergraph::new(4, 3, vec![], false).unwrap();
        assert_eq!(count_colourings_exact(&empty, 3).unwrap(), 81);
    }

    #[test]
    fn exact_counter_guard() {
        let h = Hypergraph::new(50, 3, vec![], false).unwrap();
        assert!(matches!(count_colourings_exact(&h, 3), Err(Error::ResourceGuard(_))));
        let h = hg(12, &[&[0, 1, 2], &[3, 4, 5], &[6, 7, 8], &[9, 10, 11], &[0, 4, 8]]);
        let tight = OracleLimits { max_vertices: 40, max_nodes: 10 };
        assert!(matches!(count_colourings_with(&h, 3, &[], tight), Err(Error::ResourceGuard(_))));
    }

    #[test]
    fn complete_k4_two_colours() {
        let h = hg(4, &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]]);
        // a 3+1 split leaves a monochromatic triple, so only the 2+2 splits survive
        assert_eq!(count_colourings_exact(&h, 2).unwrap(), 6);
        assert_eq!(enumerate_proper(&h, 2, 100).unwrap().len(), 6);
    }

    #[test]
    fn uniform_sampler_returns_proper() {
        let h = hg(4, &[&[0, 1, 2], &[1, 2, 3]]);
        for s in 0..50 {
            let c = sample_uniform_colouring(&h, 3, s).unwrap();
            assert!(is_proper(&h, &c).unwrap());
        }
        assert!(matches!(sample_uniform_colouring(&h, 1, 0), Err(Error::Uncolourable(1))));
    }

    #[test]
    fn planted_map_admissible() {
        for s in 0..100 {
            let c = sample_planted_map(3, 2, 3, 1, s).unwrap();
            assert!(c.mono_count(3) == 0);
        }
        assert!(sample_planted_map(3, 1, 3, 1, 0).is_err());
    }

    #[test]
    fn line_round_trip() {
        let c = col(3, &[2, 0, 1, 1]);
        assert_eq!(Colouring::from_line(3, &c.to_line()).unwrap(), c);
        assert!(Colouring::from_line(3, "0 3").is_err());
    }

    #[test]
    fn balanced_constructor() {
        let c = Colouring::balanced(10, 3, 1).unwrap();
        assert_eq!(c.class_sizes(), vec![4, 3, 3]);
    }
}
