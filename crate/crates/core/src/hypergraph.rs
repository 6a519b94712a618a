//! k-uniform hypergraphs and the three random models.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::index;
use rand::Rng as _;
use serde::Serialize;

use crate::colouring::Colouring;
use crate::error::{Error, Result};
use crate::params::{binom, ModelParams};
use crate::rng::{rng, stream, Rng};

pub type Vertex = u32;

/// Flat edge storage (each edge sorted) plus a CSR vertex-to-edge incidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    multi: bool,
    edges: Vec<Vertex>,
    offsets: Vec<u32>,
    incidence: Vec<u32>,
}

impl Hypergraph {
    /// Builds and validates a hypergraph. Edges are sorted internally; their
    /// order in `edges` is preserved.
    pub fn new(n: usize, k: usize, edges: Vec<Vec<Vertex>>, multi: bool) -> Result<Self> {
        let mut flat = Vec::with_capacity(edges.len() * k);
        for (i, mut e) in edges.into_iter().enumerate() {
            if e.len() != k {
                return Err(Error::params(format!("edge {i} has {} vertices, expected {k}", e.len())));
            }
            e.sort_unstable();
            flat.extend_from_slice(&e);
        }
        Self::from_flat(n, k, flat, multi)
    }

    fn from_flat(n: usize, k: usize, flat: Vec<Vertex>, multi: bool) -> Result<Self> {
        if k == 0 {
            return Err(Error::params("k must be positive"));
        }
        if n > Vertex::MAX as usize {
            return Err(Error::params("n exceeds the vertex id range"));
        }
        for (i, e) in flat.chunks_exact(k).enumerate() {
            if e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::params(format!("edge {i} has repeated vertices")));
            }
            if e[k - 1] as usize >= n {
                return Err(Error::params(format!("edge {i} has a vertex id >= n = {n}")));
            }
        }
        let mut h = Hypergraph { n, k, multi, edges: flat, offsets: Vec::new(), incidence: Vec::new() };
        if !multi && !h.is_simple() {
            return Err(Error::params("duplicate edge in a simple hypergraph"));
        }
        h.build_incidence();
        Ok(h)
    }

    fn build_incidence(&mut self) {
        let mut deg = vec![0u32; self.n + 1];
        for &v in &self.edges {
            deg[v as usize + 1] += 1;
        }
        for i in 0..self.n {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut inc = vec![0u32; self.edges.len()];
        for (ei, e) in self.edges.chunks_exact(self.k).enumerate() {
            for &v in e {
                inc[fill[v as usize] as usize] = ei as u32;
                fill[v as usize] += 1;
            }
        }
        self.offsets = deg;
        self.incidence = inc;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.edges.len() / self.k
    }

    pub fn multi_edges_allowed(&self) -> bool {
        self.multi
    }

    pub fn edge(&self, i: usize) -> &[Vertex] {
        &self.edges[i * self.k..(i + 1) * self.k]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[Vertex]> + '_ {
        self.edges.chunks_exact(self.k)
    }

    /// Indices of the edges containing `v`, ascending.
    pub fn incident(&self, v: Vertex) -> &[u32] {
        let v = v as usize;
        &self.incidence[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.incident(v).len()
    }

    /// No two edges are equal as sets.
    pub fn is_simple(&self) -> bool {
        let mut seen: HashSet<&[Vertex]> = HashSet::with_capacity(self.m());
        self.edges().all(|e| seen.insert(e))
    }

    /// Same vertex set, keeping only the listed edges (in the given order).
    pub fn edge_subgraph(&self, keep: &[usize]) -> Hypergraph {
        let mut flat = Vec::with_capacity(keep.len() * self.k);
        for &i in keep {
            flat.extend_from_slice(self.edge(i));
        }
        let mut h = Hypergraph { n: self.n, k: self.k, multi: self.multi, edges: flat, offsets: vec![], incidence: vec![] };
        h.build_incidence();
        h
    }

    /// Applies the vertex bijection `perm` (old id -> new id).
    pub fn relabel(&self, perm: &[Vertex]) -> Result<Hypergraph> {
        if perm.len() != self.n {
            return Err(Error::Mismatch(format!("permutation of length {} for n = {}", perm.len(), self.n)));
        }
        let edges = self.edges().map(|e| e.iter().map(|&v| perm[v as usize]).collect()).collect();
        Hypergraph::new(self.n, self.k, edges, self.multi)
    }

    /// Vertex-disjoint union; `other`'s vertices are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Hypergraph) -> Result<Hypergraph> {
        if self.k != other.k {
            return Err(Error::Mismatch("arity differs".into()));
        }
        let shift = self.n as Vertex;
        let mut flat = self.edges.clone();
        flat.extend(other.edges.iter().map(|&v| v + shift));
        Hypergraph::from_flat(self.n + other.n, self.k, flat, self.multi || other.multi)
    }

    /// Line format: header `n k m multi`, then one sorted edge per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + self.edges.len() * 7);
        let _ = writeln!(s, "{} {} {} {}", self.n, self.k, self.m(), self.multi as u8);
        for e in self.edges() {
            let mut first = true;
            for v in e {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Hypergraph> {
        Self::read_text(text.as_bytes())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Hypergraph> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| match l {
            Ok(l) => !l.trim().is_empty(),
            Err(_) => true,
        });
        let perr = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        let (hl, header) = lines.next().ok_or_else(|| perr(0, "missing header"))?;
        let header = header?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(hl, "header must be `n k m multi`")))
            .collect::<Result<_>>()?;
        let [n, k, m, multi] = nums[..] else {
            return Err(perr(hl, "header must be `n k m multi`"));
        };
        if multi > 1 {
            return Err(perr(hl, "multi flag must be 0 or 1"));
        }
        let mut flat = Vec::with_capacity(m * k);
        let mut count = 0;
        for (li, line) in lines {
            let line = line?;
            let before = flat.len();
            for t in line.split_whitespace() {
                flat.push(t.parse::<Vertex>().map_err(|_| perr(li, "bad vertex id"))?);
            }
            if flat.len() - before != k {
                return Err(perr(li, "edge has the wrong number of vertices"));
            }
            flat[before..].sort_unstable();
            count += 1;
        }
        if count != m {
            return Err(perr(hl, &format!("header declares {m} edges, found {count}")));
        }
        Self::from_flat(n, k, flat, multi == 1)
    }
}

/// Uniform k-subset of `[n]`, sorted.
fn random_subset(r: &mut Rng, n: usize, k: usize, out: &mut Vec<Vertex>) {
    out.clear();
    out.extend(index::sample(r, n, k).into_iter().map(|i| i as Vertex));
    out.sort_unstable();
}

/// The `idx`-th k-subset of `[n]` in colexicographic order.
fn unrank_colex(mut idx: u128, n: usize, k: usize) -> Vec<Vertex> {
    let mut out = vec![0; k];
    let mut top = n;
    for slot in (0..k).rev() {
        // largest c with C(c, slot+1) <= idx
        let mut c = top;
        loop {
            c -= 1;
            if binom(c as u64, slot as u64 + 1) <= idx {
                break;
            }
        }
        idx -= binom(c as u64, slot as u64 + 1);
        out[slot] = c as Vertex;
        top = c;
    }
    out
}

const DENSE_ENUMERATION_LIMIT: u128 = 1 << 22;

fn sizes(params: &ModelParams) -> Result<(usize, usize, usize)> {
    let n = params.require_n()?;
    let k = params.k;
    if n < k {
        return Err(Error::params(format!("n = {n} is smaller than k = {k}")));
    }
    Ok((n, k, params.m()?))
}

/// Uniform simple hypergraph with exactly `m` distinct edges.
pub fn gen_simple(params: &ModelParams, seed: u64) -> Result<Hypergraph> {
    let (n, k, m) = sizes(params)?;
    let total = binom(n as u64, k as u64);
    if m as u128 > total {
        return Err(Error::params(format!("m = {m} exceeds C({n},{k}) = {total}")));
    }
    let mut r = rng(seed, stream::EDGES);
    let mut flat = Vec::with_capacity(m * k);
    if total <= DENSE_ENUMERATION_LIMIT && 2 * m as u128 > total {
        // dense regime: sample edge ranks directly
        let mut ranks: Vec<usize> = index::sample(&mut r, total as usize, m).into_vec();
        ranks.sort_unstable();
        for idx in ranks {
            flat.extend(unrank_colex(idx as u128, n, k));
        }
    } else {
        let mut seen: HashSet<Vec<Vertex>> = HashSet::with_capacity(m);
        let mut e = Vec::with_capacity(k);
        while seen.len() < m {
            random_subset(&mut r, n, k, &mut e);
            if seen.insert(e.clone()) {
                flat.extend_from_slice(&e);
            }
        }
    }
    Hypergraph::from_flat(n, k, flat, false)
}

/// `m` independent uniform k-subsets (with replacement).
pub fn gen_multi(params: &ModelParams, seed: u64) -> Result<Hypergraph> {
    let (n, k, m) = sizes(params)?;
    let mut r = rng(seed, stream::EDGES);
    let mut flat = Vec::with_capacity(m * k);
    let mut e = Vec::with_capacity(k);
    for _ in 0..m {
        random_subset(&mut r, n, k, &mut e);
        flat.extend_from_slice(&e);
    }
    Hypergraph::from_flat(n, k, flat, true)
}

/// `m` independent uniform draws from the k-subsets that `sigma` does not
/// colour monochromatically.
pub fn gen_planted(params: &ModelParams, sigma: &Colouring, seed: u64) -> Result<Hypergraph> {
    let (n, k, m) = sizes(params)?;
    if sigma.n() != n {
        return Err(Error::Mismatch(format!("colouring has length {}, n = {n}", sigma.n())));
    }
    let total = binom(n as u64, k as u64);
    let mono = sigma.mono_count(k);
    if mono >= total {
        return Err(Error::NoAdmissibleEdge);
    }
    let colours = sigma.as_slice();
    let mut r = rng(seed, stream::EDGES);
    let mut flat = Vec::with_capacity(m * k);
    let mut e = Vec::with_capacity(k);
    for _ in 0..m {
        loop {
            random_subset(&mut r, n, k, &mut e);
            let c0 = colours[e[0] as usize];
            if e[1..].iter().any(|&v| colours[v as usize] != c0) {
                break;
            }
        }
        flat.extend_from_slice(&e);
    }
    Hypergraph::from_flat(n, k, flat, true)
}

/// Uniformly random vertex permutation, used by relabelling tests and
/// experiments. Deterministic in `seed`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<Vertex> {
    let mut r = rng(seed, stream::TEST);
    let mut p: Vec<Vertex> = (0..n as Vertex).collect();
    for i in (1..n).rev() {
        let j = r.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Breadth-first layers around a root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NeighbourhoodLayers {
    pub root: Vertex,
    /// `layers[i]` is Λ_i, sorted.
    pub layers: Vec<Vec<Vertex>>,
    /// `protruding[i]` is E_i (edge indices, sorted) for `i < depth`.
    pub protruding: Vec<Vec<u32>>,
    /// Least `i` at which an edge of E_i meets N_i twice, or two edges of
    /// E_i share a vertex outside N_i.
    pub cycle_at_depth: Option<usize>,
}

impl NeighbourhoodLayers {
    /// N_i as a sorted vector.
    pub fn ball(&self, i: usize) -> Vec<Vertex> {
        let mut b: Vec<Vertex> = self.layers.iter().take(i + 1).flatten().copied().collect();
        b.sort_unstable();
        b
    }
}

pub fn explore_neighbourhood(h: &Hypergraph, v: Vertex, depth: usize) -> Result<NeighbourhoodLayers> {
    if v as usize >= h.n() {
        return Err(Error::params(format!("vertex {v} out of range")));
    }
    let mut level: HashMap<Vertex, usize> = HashMap::new();
    level.insert(v, 0);
    let mut layers = vec![vec![v]];
    let mut protruding = Vec::new();
    let mut cycle_at_depth = None;
    for i in 0..depth {
        let mut ei: Vec<u32> = layers[i]
            .iter()
            .flat_map(|&u| h.incident(u).iter().copied())
            .filter(|&e| h.edge(e as usize).iter().all(|w| level.get(w).is_none_or(|&d| d >= i)))
            .collect();
        ei.sort_unstable();
        ei.dedup();

        let mut outside: HashMap<Vertex, u32> = HashMap::new();
        let mut event = false;
        for &e in &ei {
            let edge = h.edge(e as usize);
            if edge.iter().filter(|w| level.contains_key(w)).count() >= 2 {
                event = true;
            }
            for w in edge.iter().filter(|w| !level.contains_key(w)) {
                let c = outside.entry(*w).or_insert(0);
                *c += 1;
                if *c >= 2 {
                    event = true;
                }
            }
        }
        if event && cycle_at_depth.is_none() {
            cycle_at_depth = Some(i);
        }
        let mut next: Vec<Vertex> = outside.into_keys().collect();
        next.sort_unstable();
        for &w in &next {
            level.insert(w, i + 1);
        }
        layers.push(next);
        protruding.push(ei);
    }
    Ok(NeighbourhoodLayers { root: v, layers, protruding, cycle_at_depth })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hg(n: usize, edges: &[[Vertex; 3]]) -> Hypergraph {
        Hypergraph::new(n, 3, edges.iter().map(|e| e.to_vec()).collect(), true).unwrap()
    }

    #[test]
    fn simple_trivial_cases() {
        let p = ModelParams::with_edges(3, 3, 3, 1).unwrap();
        let h = gen_simple(&p, 7).unwrap();
        assert_eq!(h.edge(0), &[0, 1, 2]);
        let p = ModelParams::with_edges(3, 3, 4, 4).unwrap();
        let h = gen_simple(&p, 7).unwrap();
        let mut es: Vec<Vec<Vertex>> = h.edges().map(|e| e.to_vec()).collect();
        es.sort();
        assert_eq!(es, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]);
    }

    #[test]
    fn simple_rejects_too_many_edges() {
        let p = ModelParams::with_edges(3, 3, 4, 4).unwrap();
        assert!(gen_simple(&p, 0).is_ok());
        let p = ModelParams::with_edges(3, 3, 4, 5).unwrap();
        assert!(gen_simple(&p, 0).is_err());
        let p = ModelParams::with_n(3, 3, 2.0, 4).unwrap();
        assert!(matches!(gen_simple(&p, 0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn simple_is_simple_in_both_regimes() {
        for (n, m) in [(8usize, 50usize), (200, 400)] {
            let p = ModelParams::with_edges(3, 3, n, m).unwrap();
            for s in 0..5 {
                let h = gen_simple(&p, s).unwrap();
                assert_eq!(h.m(), m);
                assert!(h.is_simple());
            }
        }
    }

    #[test]
    fn unrank_covers_all_subsets() {
        let all: HashSet<Vec<Vertex>> = (0..binom(6, 3)).map(|i| unrank_colex(i, 6, 3)).collect();
        assert_eq!(all.len(), 20);
        assert!(all.iter().all(|e| e.windows(2).all(|w| w[0] < w[1]) && e[2] < 6));
    }

    #[test]
    fn multi_only_subset() {
        let p = ModelParams::with_edges(3, 3, 3, 2).unwrap();
        let h = gen_multi(&p, 1).unwrap();
        assert!(h.multi_edges_allowed());
        assert_eq!(h.edge(0), h.edge(1));
    }

    #[test]
    fn planted_errors_without_admissible_edge() {
        let p = ModelParams::with_edges(3, 3, 3, 1).unwrap();
        let sigma = Colouring::new(3, vec![0, 0, 0]).unwrap();
        assert!(matches!(gen_planted(&p, &sigma, 0), Err(Error::NoAdmissibleEdge)));
    }

    #[test]
    fn planted_never_uses_monochromatic_edge() {
        let p = ModelParams::with_edges(3, 3, 4, 1).unwrap();
        let sigma = Colouring::new(3, vec![0, 0, 0, 1]).unwrap();
        for s in 0..200 {
            let h = gen_planted(&p, &sigma, s).unwrap();
            assert!(h.edge(0).contains(&3));
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let p = ModelParams::with_n(3, 3, 2.0, 100).unwrap();
        assert_eq!(gen_multi(&p, 5).unwrap(), gen_multi(&p, 5).unwrap());
        assert_ne!(gen_multi(&p, 5).unwrap(), gen_multi(&p, 6).unwrap());
    }

    #[test]
    fn neighbourhood_single_edge() {
        let h = hg(3, &[[0, 1, 2]]);
        let nb = explore_neighbourhood(&h, 0, 1).unwrap();
        assert_eq!(nb.layers, vec![vec![0], vec![1, 2]]);
        assert_eq!(nb.cycle_at_depth, None);
    }

    #[test]
    fn neighbourhood_shared_pair_is_cycle_at_one() {
        let h = hg(4, &[[0, 1, 2], [1, 2, 3]]);
        let nb = explore_neighbourhood(&h, 0, 2).unwrap();
        assert_eq!(nb.cycle_at_depth, Some(1));
        assert_eq!(nb.protruding[1], vec![1]);
    }

    #[test]
    fn neighbourhood_root_sharing_edges_are_not_a_cycle() {
        // the two root edges share only the root; the triangle closes via {2,3,4}
        let h = hg(6, &[[0, 1, 2], [2, 3, 4], [4, 5, 0]]);
        let nb = explore_neighbourhood(&h, 0, 3).unwrap();
        assert_eq!(nb.protruding[0], vec![0, 2]);
        assert_eq!(nb.cycle_at_depth, Some(1));
    }

    #[test]
    fn duplicate_root_edges_are_a_cycle_at_zero() {
        let h = hg(3, &[[0, 1, 2], [0, 1, 2]]);
        assert_eq!(explore_neighbourhood(&h, 0, 1).unwrap().cycle_at_depth, Some(0));
    }

    #[test]
    fn text_round_trip() {
        let p = ModelParams::with_n(3, 3, 1.5, 40).unwrap();
        let h = gen_multi(&p, 3).unwrap();
        let t = h.to_text();
        let back = Hypergraph::from_text(&t).unwrap();
        assert_eq!(back, h);
        assert_eq!(back.to_text(), t);
    }

    #[test]
    fn text_parse_errors() {
        assert!(matches!(Hypergraph::from_text("3 3 2 0\n0 1 2\n"), Err(Error::Parse { .. })));
        assert!(matches!(Hypergraph::from_text("3 3 1 0\n0 1\n"), Err(Error::Parse { .. })));
        assert!(Hypergraph::from_text("3 3 2 0\n0 1 2\n2 1 0\n").is_err());
        assert!(Hypergraph::from_text("3 3 2 1\n0 1 2\n2 1 0\n").is_ok());
    }

    #[test]
    fn invalid_edges_rejected() {
        assert!(Hypergraph::new(3, 3, vec![vec![0, 0, 1]], true).is_err());
        assert!(Hypergraph::new(3, 3, vec![vec![0, 1, 3]], true).is_err());
        assert!(Hypergraph::new(3, 3, vec![vec![0, 1]], true).is_err());
    }
}
