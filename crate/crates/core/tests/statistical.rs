use std::collections::HashMap;

use hypercol_core::colouring::{enumerate_proper, sample_planted_map, sample_uniform_colouring};
use hypercol_core::hypergraph::{gen_multi, gen_planted, gen_simple};
use hypercol_core::moments::{count_pairs_with_overlap, pair_moment_exact_log};
use hypercol_core::{Colouring, Hypergraph, ModelParams, OverlapMatrix, Vertex};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson goodness of fit against the uniform law on `cells` outcomes.
fn uniform_p_value<K: std::hash::Hash + Eq>(counts: &HashMap<K, u64>, cells: usize) -> f64 {
    assert!(counts.len() <= cells, "{} outcomes seen, {cells} expected", counts.len());
    let total: u64 = counts.values().sum();
    let expected = total as f64 / cells as f64;
    let seen: f64 = counts.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let unseen = (cells - counts.len()) as f64 * expected;
    let chi2 = seen + unseen;
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(chi2)
}

#[test]
fn planted_map_is_uniform_on_admissible_maps() {
    // n = 3, q = 2, m = 1: the 6 non-constant maps
    let mut counts = HashMap::new();
    for seed in 0..6000 {
        let s = sample_planted_map(3, 2, 3, 1, seed).unwrap();
        assert!(s.class_sizes().iter().all(|&c| c < 3));
        *counts.entry(s.to_line()).or_insert(0) += 1;
    }
    let p = uniform_p_value(&counts, 6);
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn uniform_sampler_is_uniform() {
    let h = Hypergraph::new(5, 3, vec![vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4]], false).unwrap();
    let z = enumerate_proper(&h, 2, 1000).unwrap().len();
    let mut counts = HashMap::new();
    for seed in 0..100 * z as u64 {
        let s = sample_uniform_colouring(&h, 2, seed).unwrap();
        *counts.entry(s.to_line()).or_insert(0) += 1;
    }
    let p = uniform_p_value(&counts, z);
    assert!(p > 0.01, "p = {p} over {z} colourings");
}

#[test]
fn simple_generator_is_uniform_over_edge_sets() {
    // n = 5, k = 3, m = 2: C(10, 2) = 45 edge sets
    let p = ModelParams::with_edges(3, 3, 5, 2).unwrap();
    let mut counts = HashMap::new();
    for seed in 0..9000 {
        let h = gen_simple(&p, seed).unwrap();
        let mut edges: Vec<Vec<Vertex>> = h.edges().map(|e| e.to_vec()).collect();
        edges.sort();
        *counts.entry(edges).or_insert(0) += 1;
    }
    let pv = uniform_p_value(&counts, 45);
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn multi_generator_edges_are_uniform() {
    let p = ModelParams::with_edges(3, 3, 6, 3).unwrap();
    let mut counts = HashMap::new();
    for seed in 0..2000 {
        let h = gen_multi(&p, seed).unwrap();
        for e in h.edges() {
            *counts.entry(e.to_vec()).or_insert(0) += 1;
        }
    }
    let pv = uniform_p_value(&counts, 20);
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn planted_generator_is_uniform_on_admissible_edges() {
    // classes {0,1,2}, {3,4}, {5}: 20 - 1 = 19 admissible triples
    let sigma = Colouring::new(3, vec![0, 0, 0, 1, 1, 2]).unwrap();
    let p = ModelParams::with_edges(3, 3, 6, 2).unwrap();
    let mut counts = HashMap::new();
    for seed in 0..2000 {
        let h = gen_planted(&p, &sigma, seed).unwrap();
        for e in h.edges() {
            assert_ne!(e, [0, 1, 2]);
            *counts.entry(e.to_vec()).or_insert(0) += 1;
        }
    }
    let pv = uniform_p_value(&counts, 19);
    assert!(pv > 0.01, "p = {pv}");
}

#[test]
fn pair_count_mean_matches_exact_expectation() {
    let (n, m) = (8, 4);
    let target = OverlapMatrix { q: 3, n: n as u64, counts: vec![1, 1, 1, 1, 1, 1, 1, 1, 0] };
    let exact = pair_moment_exact_log(&target, 3, m).unwrap().exp();
    let p = ModelParams::with_edges(3, 3, n, m).unwrap();
    let draws = 2000;
    let samples: Vec<f64> =
        (0..draws).map(|seed| count_pairs_with_overlap(&gen_multi(&p, seed).unwrap(), &target).unwrap() as f64).collect();
    let mean = samples.iter().sum::<f64>() / draws as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
    let se = (var / draws as f64).sqrt();
    assert!((mean - exact).abs() <= 3.0 * se, "mean {mean} ± {se}, exact {exact}");
}
