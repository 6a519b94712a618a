//! Essential edges and the simultaneous-round stripping process.

use serde::Serialize;

use crate::colouring::{is_proper, Colour, Colouring};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};

/// Round index stored for vertices that survive into the core.
pub const IN_CORE: u32 = u32::MAX;

/// The unique (v, γ) for which `e` is essential, if any: every vertex of
/// `e` but v has colour γ and σ(v) ≠ γ. Needs k ≥ 3 for uniqueness.
pub fn essential_pair(e: &[Vertex], colours: &[Colour]) -> Option<(Vertex, Colour)> {
    let (a, b, c) = (colours[e[0] as usize], colours[e[1] as usize], colours[e[2] as usize]);
    // majority colour among the first three decides the candidate γ
    let gamma = if a == b || a == c { a } else if b == c { b } else { return None };
    let mut odd = None;
    for &v in e {
        if colours[v as usize] != gamma {
            if odd.is_some() {
                return None;
            }
            odd = Some(v);
        }
    }
    odd.map(|v| (v, gamma))
}

fn check_vertex_colour(h: &Hypergraph, sigma: &Colouring, v: Vertex, gamma: Colour) -> Result<()> {
    if h.n() != sigma.n() {
        return Err(Error::Mismatch(format!("colouring has length {}, n = {}", sigma.n(), h.n())));
    }
    if v as usize >= h.n() {
        return Err(Error::params(format!("vertex {v} out of range")));
    }
    if gamma >= sigma.q() {
        return Err(Error::params(format!("colour {gamma} >= q = {}", sigma.q())));
    }
    if gamma == sigma.get(v) {
        return Err(Error::params(format!("gamma = {gamma} is the colour of vertex {v}")));
    }
    Ok(())
}

/// Edges through `v` whose other k-1 vertices all have colour `gamma`.
pub fn essential_edges(h: &Hypergraph, sigma: &Colouring, v: Vertex, gamma: Colour) -> Result<Vec<u32>> {
    check_vertex_colour(h, sigma, v, gamma)?;
    let colours = sigma.as_slice();
    Ok(h.incident(v)
        .iter()
        .copied()
        .filter(|&e| h.edge(e as usize).iter().all(|&u| u == v || colours[u as usize] == gamma))
        .collect())
}

/// Per-round record of the stripping process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreTrace {
    n: usize,
    removal_round: Vec<u32>,
    pub rounds: Vec<Vec<Vertex>>,
    pub core: Vec<Vertex>,
    pub surviving_edges: Vec<u32>,
}

impl CoreTrace {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Round in which `v` was removed, or `None` if it is in the core.
    pub fn round_of(&self, v: Vertex) -> Option<u32> {
        let r = self.removal_round[v as usize];
        (r != IN_CORE).then_some(r)
    }

    pub fn in_core(&self, v: Vertex) -> bool {
        self.removal_round[v as usize] == IN_CORE
    }

    pub fn core_fraction(&self) -> f64 {
        self.core.len() as f64 / self.n as f64
    }

    /// True if every vertex of `e` is still present in H'(j).
    pub fn edge_alive_at(&self, e: &[Vertex], j: u32) -> bool {
        e.iter().all(|&u| self.removal_round[u as usize] >= j)
    }

    pub fn to_json(&self) -> CoreTraceJson<'_> {
        CoreTraceJson {
            n: self.n,
            rounds: &self.rounds,
            core_size: self.core.len(),
            surviving_edges: self.surviving_edges.len(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CoreTraceJson<'a> {
    pub n: usize,
    pub rounds: &'a [Vec<Vertex>],
    pub core_size: usize,
    pub surviving_edges: usize,
}

/// Runs the stripping process: round i removes, simultaneously, every vertex
/// of H'(i) that has no (v,γ)-essential edge for some γ ≠ σ(v), together
/// with all incident edges.
///
/// Each edge is essential for at most one pair, so per-pair counters plus a
/// worklist of vertices whose counter hit zero give linear total work.
pub fn extract_core(h: &Hypergraph, sigma: &Colouring) -> Result<CoreTrace> {
    if !is_proper(h, sigma)? {
        return Err(Error::ImproperColouring);
    }
    if h.k() < 3 {
        return Err(Error::params("stripping needs k >= 3"));
    }
    let n = h.n();
    let q = sigma.q() as usize;
    let colours = sigma.as_slice();

    let mut owner: Vec<u32> = vec![u32::MAX; h.m()];
    let mut count = vec![0u32; n * q];
    for (ei, e) in h.edges().enumerate() {
        if let Some((v, g)) = essential_pair(e, colours) {
            owner[ei] = v * q as u32 + g as u32;
            count[v as usize * q + g as usize] += 1;
        }
    }

    let mut removal_round = vec![IN_CORE; n];
    let mut edge_alive = vec![true; h.m()];
    let mut current: Vec<Vertex> = (0..n as Vertex)
        .filter(|&v| {
            let own = colours[v as usize] as usize;
            (0..q).any(|g| g != own && count[v as usize * q + g] == 0)
        })
        .collect();
    let mut rounds = Vec::new();
    let mut queued = vec![false; n];
    let mut round = 0u32;
    while !current.is_empty() {
        for &v in &current {
            removal_round[v as usize] = round;
        }
        let mut next = Vec::new();
        for &v in &current {
            for &e in h.incident(v) {
                let ei = e as usize;
                if !edge_alive[ei] {
                    continue;
                }
                edge_alive[ei] = false;
                let o = owner[ei];
                if o == u32::MAX {
                    continue;
                }
                let u = o / q as u32;
                if removal_round[u as usize] != IN_CORE {
                    continue;
                }
                count[o as usize] -= 1;
                if count[o as usize] == 0 && !queued[u as usize] {
                    queued[u as usize] = true;
                    next.push(u);
                }
            }
        }
        current.sort_unstable();
        rounds.push(std::mem::take(&mut current));
        next.sort_unstable();
        current = next;
        round += 1;
    }
    let core: Vec<Vertex> = (0..n as Vertex).filter(|&v| removal_round[v as usize] == IN_CORE).collect();
    let surviving_edges: Vec<u32> = (0..h.m() as u32).filter(|&e| edge_alive[e as usize]).collect();
    Ok(CoreTrace { n, removal_round, rounds, core, surviving_edges })
}
