//! Flippable sets inside the core, the digraph D(T), and *-flippable kernels.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::colouring::{Colour, Colouring};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::rigidity::strip::{essential_pair, extract_core, CoreTrace};

/// Essential edges of the core sub-hypergraph, grouped by (v, γ).
pub struct FlipContext<'a> {
    h: &'a Hypergraph,
    sigma: &'a Colouring,
    in_core: Vec<bool>,
    essential: BTreeMap<(Vertex, Colour), Vec<u32>>,
}

impl<'a> FlipContext<'a> {
    pub fn new(h: &'a Hypergraph, sigma: &'a Colouring) -> Result<Self> {
        let trace = extract_core(h, sigma)?;
        Ok(Self::with_trace(h, sigma, &trace))
    }

    pub fn with_trace(h: &'a Hypergraph, sigma: &'a Colouring, trace: &CoreTrace) -> Self {
        let mut in_core = vec![false; h.n()];
        for &v in &trace.core {
            in_core[v as usize] = true;
        }
        let mut essential: BTreeMap<(Vertex, Colour), Vec<u32>> = BTreeMap::new();
        for &e in &trace.surviving_edges {
            if let Some(pair) = essential_pair(h.edge(e as usize), sigma.as_slice()) {
                essential.entry(pair).or_default().push(e);
            }
        }
        FlipContext { h, sigma, in_core, essential }
    }

    pub fn core(&self) -> Vec<Vertex> {
        (0..self.h.n() as Vertex).filter(|&v| self.in_core[v as usize]).collect()
    }

    fn check_subset(&self, t: &BTreeSet<Vertex>) -> Result<()> {
        if let Some(&v) = t.iter().find(|&&v| v as usize >= self.h.n() || !self.in_core[v as usize]) {
            return Err(Error::params(format!("vertex {v} is not in the core")));
        }
        Ok(())
    }

    fn essential_for(&self, v: Vertex, g: Colour) -> &[u32] {
        self.essential.get(&(v, g)).map_or(&[], |e| e.as_slice())
    }

    /// Ψ_T(v,γ): every (v,γ)-essential core edge meets T outside v.
    pub fn psi(&self, t: &BTreeSet<Vertex>, v: Vertex, g: Colour) -> bool {
        self.essential_for(v, g)
            .iter()
            .all(|&e| self.h.edge(e as usize).iter().any(|u| *u != v && t.contains(u)))
    }

    fn other_colours(&self, v: Vertex) -> impl Iterator<Item = Colour> + '_ {
        let own = self.sigma.get(v);
        (0..self.sigma.q()).filter(move |&g| g != own)
    }

    pub fn is_flippable(&self, t: &BTreeSet<Vertex>) -> Result<bool> {
        self.check_subset(t)?;
        Ok(t.iter().all(|&v| self.other_colours(v).any(|g| self.psi(t, v, g))))
    }

    pub fn flip_digraph(&self, t: &BTreeSet<Vertex>) -> Result<FlipDigraph> {
        self.check_subset(t)?;
        Ok(self.digraph_unchecked(t))
    }

    fn digraph_unchecked(&self, t: &BTreeSet<Vertex>) -> FlipDigraph {
        let mut d = FlipDigraph::empty(t);
        for &v in t {
            for g in self.other_colours(v) {
                if !self.psi(t, v, g) {
                    continue;
                }
                for &e in self.essential_for(v, g) {
                    for &u in self.h.edge(e as usize) {
                        if u != v && t.contains(&u) {
                            d.add_arc(v, u, g);
                        }
                    }
                }
            }
        }
        d
    }

    /// Peels vertices of in-degree 0 until none remain.
    pub fn star_flippable_kernel(&self, t: &BTreeSet<Vertex>, mode: KernelMode) -> Result<BTreeSet<Vertex>> {
        self.check_subset(t)?;
        let mut s = t.clone();
        match mode {
            KernelMode::Recompute => loop {
                let d = self.digraph_unchecked(&s);
                let drop: Vec<Vertex> = s.iter().copied().filter(|v| d.in_degree(*v) == 0).collect();
                if drop.is_empty() {
                    return Ok(s);
                }
                for v in drop {
                    s.remove(&v);
                }
            },
            KernelMode::FrozenDigraph => {
                let d = self.digraph_unchecked(t);
                loop {
                    let mut indeg: BTreeMap<Vertex, usize> = s.iter().map(|&v| (v, 0)).collect();
                    for &(a, b) in &d.arcs {
                        if s.contains(&a) && s.contains(&b) {
                            *indeg.get_mut(&b).unwrap() += 1;
                        }
                    }
                    let drop: Vec<Vertex> = indeg.iter().filter(|(_, &c)| c == 0).map(|(&v, _)| v).collect();
                    if drop.is_empty() {
                        return Ok(s);
                    }
                    for v in drop {
                        s.remove(&v);
                    }
                }
            }
        }
    }
}

/// Whether the kernel peel recomputes Ψ on the shrinking set or keeps the
/// arcs of the original D(T).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelMode {
    #[default]
    Recompute,
    FrozenDigraph,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipDigraph {
    pub vertices: Vec<Vertex>,
    /// Arcs with multiplicity, in insertion order (by v, γ, edge, u).
    pub arcs: Vec<(Vertex, Vertex)>,
    pub in_deg: BTreeMap<Vertex, usize>,
    pub out_deg: BTreeMap<Vertex, usize>,
    /// d_T^+(v, γ).
    pub per_colour_out: BTreeMap<(Vertex, Colour), usize>,
}

impl FlipDigraph {
    fn empty(t: &BTreeSet<Vertex>) -> Self {
        FlipDigraph {
            vertices: t.iter().copied().collect(),
            arcs: Vec::new(),
            in_deg: t.iter().map(|&v| (v, 0)).collect(),
            out_deg: t.iter().map(|&v| (v, 0)).collect(),
            per_colour_out: BTreeMap::new(),
        }
    }

    fn add_arc(&mut self, v: Vertex, u: Vertex, g: Colour) {
        self.arcs.push((v, u));
        *self.out_deg.get_mut(&v).unwrap() += 1;
        *self.in_deg.get_mut(&u).unwrap() += 1;
        *self.per_colour_out.entry((v, g)).or_insert(0) += 1;
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.in_deg.get(&v).copied().unwrap_or(0)
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out_deg.get(&v).copied().unwrap_or(0)
    }
}

pub fn is_flippable(h: &Hypergraph, sigma: &Colouring, t: &BTreeSet<Vertex>) -> Result<bool> {
    FlipContext::new(h, sigma)?.is_flippable(t)
}

pub fn flip_digraph(h: &Hypergraph, sigma: &Colouring, t: &BTreeSet<Vertex>) -> Result<FlipDigraph> {
    FlipContext::new(h, sigma)?.flip_digraph(t)
}

pub fn star_flippable_kernel(h: &Hypergraph, sigma: &Colouring, t: &BTreeSet<Vertex>, mode: KernelMode) -> Result<BTreeSet<Vertex>> {
    FlipContext::new(h, sigma)?.star_flippable_kernel(t, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    // colour 0: A0 A1 A2 = 0 1 2; colour 1: B0 B1 = 3 4; colour 2: C0 C1 = 5 6
    fn gadget() -> (Hypergraph, Colouring) {
        let (a, b, c) = ([0, 1, 2], [3, 4], [5, 6]);
        let mut edges = Vec::new();
        for &x in &a {
            edges.push(vec![x, b[0], b[1]]);
            edges.push(vec![x, c[0], c[1]]);
        }
        for &x in &b {
            edges.push(vec![x, a[1], a[2]]);
            edges.push(vec![x, c[0], c[1]]);
        }
        for &x in &c {
            edges.push(vec![x, a[1], a[2]]);
            edges.push(vec![x, b[0], b[1]]);
        }
        let h = Hypergraph::new(7, 3, edges, false).unwrap();
        (h, Colouring::new(3, vec![0, 0, 0, 1, 1, 2, 2]).unwrap())
    }

    fn set(v: &[Vertex]) -> BTreeSet<Vertex> {
        v.iter().copied().collect()
    }

    #[test]
    fn gadget_is_all_core() {
        let (h, s) = gadget();
        let ctx = FlipContext::new(&h, &s).unwrap();
        assert_eq!(ctx.core(), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn empty_set() {
        let (h, s) = gadget();
        let ctx = FlipContext::new(&h, &s).unwrap();
        assert!(ctx.is_flippable(&set(&[])).unwrap());
        assert!(ctx.flip_digraph(&set(&[])).unwrap().arcs.is_empty());
        assert!(ctx.star_flippable_kernel(&set(&[]), KernelMode::Recompute).unwrap().is_empty());
    }

    #[test]
    fn singleton_not_flippable() {
        let (h, s) = gadget();
        assert!(!is_flippable(&h, &s, &set(&[0])).unwrap());
    }

    #[test]
    fn mutual_witnesses_form_two_cycle() {
        let (h, s) = gadget();
        let ctx = FlipContext::new(&h, &s).unwrap();
        // A1 -> B0 through {A1,B0,B1}; B0 -> A1 through {B0,A1,A2}
        let t = set(&[1, 3]);
        assert!(ctx.is_flippable(&t).unwrap());
        let d = ctx.flip_digraph(&t).unwrap();
        assert_eq!(d.arcs, vec![(1, 3), (3, 1)]);
        assert_eq!(d.per_colour_out[&(1, 1)], 1);
        assert_eq!(ctx.star_flippable_kernel(&t, KernelMode::Recompute).unwrap(), t);
    }

    #[test]
    fn kernel_drops_unpointed_vertex() {
        let (h, s) = gadget();
        let ctx = FlipContext::new(&h, &s).unwrap();
        // A0 -> B0, but nothing points at A0
        let t = set(&[0, 1, 3]);
        assert!(ctx.is_flippable(&t).unwrap());
        let d = ctx.flip_digraph(&t).unwrap();
        assert_eq!(d.in_degree(0), 0);
        assert_eq!(ctx.star_flippable_kernel(&t, KernelMode::Recompute).unwrap(), set(&[1, 3]));
        assert_eq!(ctx.star_flippable_kernel(&t, KernelMode::FrozenDigraph).unwrap(), set(&[1, 3]));
    }

    #[test]
    fn outside_core_rejected() {
        let h = Hypergraph::new(3, 3, vec![vec![0, 1, 2]], false).unwrap();
        let s = Colouring::new(3, vec![0, 1, 2]).unwrap();
        assert!(is_flippable(&h, &s, &set(&[0])).is_err());
    }
}
