//! Certificates that a vertex is not 1-frozen, and the exact flip-graph
//! oracle for ℓ-frozenness.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::colouring::{count_colourings_with, is_proper, Colour, Colouring, OracleLimits};
use crate::error::{Error, Result};
use crate::hypergraph::{Hypergraph, Vertex};
use crate::rigidity::strip::{essential_pair, extract_core, CoreTrace};

/// Single-vertex recolourings applied in order to σ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecolouringSequence {
    pub target: Vertex,
    pub steps: Vec<(Vertex, Colour)>,
}

impl RecolouringSequence {
    /// Every step changes exactly one vertex, every intermediate colouring is
    /// proper, and the target ends with a different colour.
    pub fn validate(&self, h: &Hypergraph, sigma: &Colouring) -> Result<()> {
        if !is_proper(h, sigma)? {
            return Err(Error::ImproperColouring);
        }
        self.validate_steps(h, sigma)
    }

    /// [`validate`](Self::validate) without re-checking that σ itself is
    /// proper; cost is linear in the edges touched by the steps.
    pub fn validate_steps(&self, h: &Hypergraph, sigma: &Colouring) -> Result<()> {
        let mut overlay: HashMap<Vertex, Colour> = HashMap::with_capacity(self.steps.len());
        let colour_of = |overlay: &HashMap<Vertex, Colour>, w: Vertex| *overlay.get(&w).unwrap_or(&sigma.get(w));
        for (i, &(v, c)) in self.steps.iter().enumerate() {
            if v as usize >= h.n() || c >= sigma.q() {
                return Err(Error::Degenerate(format!("step {i} is out of range")));
            }
            if colour_of(&overlay, v) == c {
                return Err(Error::Degenerate(format!("step {i} does not change vertex {v}")));
            }
            overlay.insert(v, c);
            for &e in h.incident(v) {
                if h.edge(e as usize).iter().all(|&u| colour_of(&overlay, u) == c) {
                    return Err(Error::Degenerate(format!("step {i} makes an edge monochromatic")));
                }
            }
        }
        if self.target as usize >= h.n() || colour_of(&overlay, self.target) == sigma.get(self.target) {
            return Err(Error::Degenerate("target colour is unchanged".into()));
        }
        Ok(())
    }
}

/// Least γ ≠ σ(v) with no (v,γ)-essential edge alive in H'(j), j = round of v.
fn stripping_colour(h: &Hypergraph, colours: &[Colour], q: u16, trace: &CoreTrace, v: Vertex, j: u32) -> Option<Colour> {
    let own = colours[v as usize];
    (0..q).filter(|&g| g != own).find(|&g| {
        !h.incident(v).iter().any(|&e| {
            let e = h.edge(e as usize);
            essential_pair(e, colours) == Some((v, g)) && trace.edge_alive_at(e, j)
        })
    })
}

/// Builds a recolouring sequence for `v` by running the recolouring process
/// backwards from `v`: v needs some γ with no essential edge in H'(j); every
/// (v,γ)-essential edge of H contains a vertex stripped in an earlier round,
/// which is recoloured first (one witness per edge, recursively). Steps are
/// ordered by (round, vertex) and each uses the least such colour; when a
/// step would close a monochromatic edge, the next proper colour is used.
///
/// Returns `None` when `v` is in the core, was stripped at or after round
/// `depth_budget`, or no valid ordering is found. It never claims frozenness.
pub fn recolouring_certificate_with_trace(
    h: &Hypergraph,
    sigma: &Colouring,
    trace: &CoreTrace,
    v: Vertex,
    depth_budget: usize,
) -> Result<Option<RecolouringSequence>> {
    if v as usize >= h.n() {
        return Err(Error::params(format!("vertex {v} out of range")));
    }
    let Some(jv) = trace.round_of(v) else { return Ok(None) };
    if jv as usize >= depth_budget {
        return Ok(None);
    }
    let colours = sigma.as_slice();
    let q = sigma.q();

    let mut wanted: HashMap<Vertex, Colour> = HashMap::new();
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        if wanted.contains_key(&u) {
            continue;
        }
        let ju = trace.round_of(u).expect("dependencies are stripped earlier");
        let Some(g) = stripping_colour(h, colours, q, trace, u, ju) else { return Ok(None) };
        wanted.insert(u, g);
        for &e in h.incident(u) {
            let e = h.edge(e as usize);
            if essential_pair(e, colours) != Some((u, g)) {
                continue;
            }
            let witness = e
                .iter()
                .filter(|&&w| w != u)
                .filter_map(|&w| trace.round_of(w).filter(|&r| r < ju).map(|r| (r, w)))
                .min();
            match witness {
                Some((_, w)) => stack.push(w),
                None => return Ok(None),
            }
        }
    }

    let mut order: Vec<Vertex> = wanted.keys().copied().collect();
    order.sort_unstable_by_key(|&u| (trace.round_of(u), u));

    let mut overlay: HashMap<Vertex, Colour> = HashMap::with_capacity(order.len());
    let colour_of = |overlay: &HashMap<Vertex, Colour>, w: Vertex| *overlay.get(&w).unwrap_or(&colours[w as usize]);
    let mut steps = Vec::with_capacity(order.len());
    for u in order {
        let cur = colour_of(&overlay, u);
        let first = wanted[&u];
        let candidates = std::iter::once(first).chain((0..q).filter(|&c| c != first && c != colours[u as usize]));
        let mut placed = false;
        for c in candidates {
            if c == cur {
                continue;
            }
            let closes = h.incident(u).iter().any(|&e| {
                h.edge(e as usize).iter().all(|&w| w == u || colour_of(&overlay, w) == c)
            });
            if !closes {
                overlay.insert(u, c);
                steps.push((u, c));
                placed = true;
                break;
            }
        }
        if !placed {
            return Ok(None);
        }
    }
    let seq = RecolouringSequence { target: v, steps };
    debug_assert!(seq.validate_steps(h, sigma).is_ok());
    Ok(Some(seq))
}

pub fn recolouring_certificate(h: &Hypergraph, sigma: &Colouring, v: Vertex, depth_budget: usize) -> Result<Option<RecolouringSequence>> {
    let trace = extract_core(h, sigma)?;
    recolouring_certificate_with_trace(h, sigma, &trace, v, depth_budget)
}

pub const FLIP_STATE_LIMIT: u64 = 10_000_000;

/// Exact ℓ-frozenness by breadth-first search in the graph of proper
/// colourings, with an arc between colourings at Hamming distance ≤ ℓ.
///
/// `result[v]` is true iff every colouring reachable from σ agrees with σ at v.
/// For ℓ ≥ n every proper colouring is one move away, so the answer comes
/// from extension counts instead of a search.
pub fn frozen_set_exact(h: &Hypergraph, sigma: &Colouring, ell: usize) -> Result<Vec<bool>> {
    if !is_proper(h, sigma)? {
        return Err(Error::ImproperColouring);
    }
    if ell == 0 {
        return Ok(vec![true; h.n()]);
    }
    let n = h.n();
    let q = sigma.q();
    if ell >= n {
        let limits = OracleLimits::default();
        let mut out = Vec::with_capacity(n);
        for v in 0..n as Vertex {
            let mut frozen = true;
            for c in (0..q).filter(|&c| c != sigma.get(v)) {
                if count_colourings_with(h, q, &[(v, c)], limits)? > 0 {
                    frozen = false;
                    break;
                }
            }
            out.push(frozen);
        }
        return Ok(out);
    }
    let states = (q as f64).powi(n as i32);
    if states > FLIP_STATE_LIMIT as f64 {
        return Err(Error::ResourceGuard(format!("flip graph has {q}^{n} > {FLIP_STATE_LIMIT} states")));
    }
    let radix: Vec<u64> = (0..n).map(|i| (q as u64).pow(i as u32)).collect();
    let encode = |c: &[Colour]| c.iter().zip(&radix).map(|(&x, &r)| x as u64 * r).sum::<u64>();
    let mut seen = vec![0u64; (states as usize).div_ceil(64)];
    let mark = |seen: &mut Vec<u64>, s: u64| -> bool {
        let (w, b) = ((s / 64) as usize, s % 64);
        let fresh = seen[w] & (1 << b) == 0;
        seen[w] |= 1 << b;
        fresh
    };

    let target = sigma.as_slice();
    let mut moved = vec![false; n];
    let mut unresolved = n;
    let mut queue = std::collections::VecDeque::new();
    let start = encode(target);
    mark(&mut seen, start);
    queue.push_back(start);
    let mut work = vec![0 as Colour; n];
    let mut changed: Vec<Vertex> = Vec::with_capacity(ell);
    while let Some(code) = queue.pop_front() {
        let mut rest = code;
        for w in work.iter_mut() {
            *w = (rest % q as u64) as Colour;
            rest /= q as u64;
        }
        flip_moves(h, q, ell, &mut work, code, &radix, 0, &mut changed, &mut |state, next| {
            if !mark(&mut seen, next) {
                return;
            }
            for v in 0..n {
                if !moved[v] && state[v] != target[v] {
                    moved[v] = true;
                    unresolved -= 1;
                }
            }
            queue.push_back(next);
        });
        if unresolved == 0 {
            return Ok(vec![false; n]);
        }
    }
    Ok(moved.iter().map(|&m| !m).collect())
}

/// Enumerates proper colourings obtained from `work` by recolouring a set of
/// 1..=ell vertices with indices ≥ `from` (in increasing order).
#[allow(clippy::too_many_arguments)]
fn flip_moves(
    h: &Hypergraph,
    q: u16,
    ell: usize,
    work: &mut Vec<Colour>,
    code: u64,
    radix: &[u64],
    from: usize,
    changed: &mut Vec<Vertex>,
    emit: &mut dyn FnMut(&[Colour], u64),
) {
    for v in from..work.len() {
        let orig = work[v];
        for c in 0..q {
            if c == orig {
                continue;
            }
            work[v] = c;
            changed.push(v as Vertex);
            let new_code = code - orig as u64 * radix[v] + c as u64 * radix[v];
            let proper = changed.iter().all(|&u| {
                h.incident(u).iter().all(|&e| {
                    let e = h.edge(e as usize);
                    let c0 = work[e[0] as usize];
                    e[1..].iter().any(|&w| work[w as usize] != c0)
                })
            });
            if proper {
                emit(work, new_code);
            }
            if changed.len() < ell {
                flip_moves(h, q, ell, work, new_code, radix, v + 1, changed, emit);
            }
            changed.pop();
        }
        work[v] = orig;
    }
}

pub fn is_ell_frozen_exact(h: &Hypergraph, sigma: &Colouring, v: Vertex, ell: usize) -> Result<bool> {
    if v as usize >= h.n() {
        return Err(Error::params(format!("vertex {v} out of range")));
    }
    Ok(frozen_set_exact(h, sigma, ell)?[v as usize])
}

/// Vertices whose colour differs somewhere in `colourings` from σ.
pub fn vertices_moved(sigma: &Colouring, colourings: &[Colouring]) -> HashSet<Vertex> {
    let mut out = HashSet::new();
    for t in colourings {
        for (v, (&a, &b)) in sigma.as_slice().iter().zip(t.as_slice()).enumerate() {
            if a != b {
                out.insert(v as Vertex);
            }
        }
    }
    out
}
