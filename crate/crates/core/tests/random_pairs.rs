//! Randomized pairs and self-maps. Every analysis run re-verifies the
//! augmentation identity internally and hard-errors on a mismatch, so the
//! main assertion is that the analysis succeeds; the values are then
//! cross-checked once more against the reported Lefschetz numbers.
//!
//! Set RELTRACE_SEED to reproduce a particular run.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use reltrace_core::complexes::{SimplicialPair, VertexSelfMap};
use reltrace_core::error::Severity;
use reltrace_core::invariants::{analyze_simplicial, Assertions, Options};

fn seed() -> u64 {
    match std::env::var("RELTRACE_SEED") {
        Ok(s) => s.parse().expect("RELTRACE_SEED must be an integer"),
        Err(_) => 0x5eed_0001,
    }
}

/// Random pair: a random graph with some filled triangles, A the full
/// subcomplex on a random vertex subset.
fn random_pair(rng: &mut StdRng) -> SimplicialPair {
    let n = rng.gen_range(3..=7);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut has_edge = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.5) {
                edges.push(vec![i, j]);
                has_edge[i][j] = true;
            }
        }
    }
    let mut triangles: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if has_edge[i][j] && has_edge[i][k] && has_edge[j][k] && rng.gen_bool(0.4) {
                    triangles.push(vec![i, j, k]);
                }
            }
        }
    }
    let a_vertices: BTreeSet<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    let mut a_simplices: Vec<Vec<usize>> = a_vertices.iter().map(|&v| vec![v]).collect();
    for s in edges.iter().chain(&triangles) {
        if s.iter().all(|v| a_vertices.contains(v)) {
            a_simplices.push(s.clone());
        }
    }
    SimplicialPair::new(names, vec![edges, triangles], a_simplices)
}

/// Random self-map by rejection; falls back to a constant map into A (or
/// to the first vertex when A is empty), which is always simplicial.
fn random_map(rng: &mut StdRng, pair: &SimplicialPair, n: usize) -> VertexSelfMap {
    for _ in 0..60 {
        let map = VertexSelfMap {
            images: (0..n).map(|_| rng.gen_range(0..n)).collect(),
        };
        if !pair
            .validate(&map)
            .iter()
            .any(|d| d.severity == Severity::Error)
        {
            return map;
        }
    }
    let target = (0..n).find(|&v| pair.is_in_a(0, v)).unwrap_or(0);
    VertexSelfMap { images: vec![target; n] }
}

#[test]
fn augmentation_identity_on_random_pairs() {
    let mut rng = StdRng::seed_from_u64(seed());
    let mut analyzed = 0;
    while analyzed < 50 {
        let pair = random_pair(&mut rng);
        let n = pair.vertex_count();
        let map = random_map(&mut rng, &pair, n);
        if pair
            .validate(&map)
            .iter()
            .any(|d| d.severity == Severity::Error)
        {
            continue;
        }
        let analysis =
            analyze_simplicial(&pair, &map, &Assertions::default(), &Options::default())
                .unwrap_or_else(|e| panic!("analysis failed on a random pair: {e}"));
        for part in &analysis.trace.a_parts {
            let l = analysis
                .lefschetz
                .a_components
                .iter()
                .find(|(label, _)| *label == part.component)
                .map(|(_, v)| v.clone())
                .expect("Lefschetz entry for every traced A-part");
            assert_eq!(part.trace.augmentation(), l);
        }
        for part in &analysis.trace.b_parts {
            let l = analysis
                .lefschetz
                .b_components
                .iter()
                .find(|(label, _)| *label == part.component)
                .map(|(_, v)| v.clone())
                .expect("Lefschetz entry for every traced B-part");
            assert_eq!(part.trace.augmentation(), l);
        }
        let traced = analysis.trace.a_parts.len() + analysis.trace.b_parts.len();
        if traced > 0 {
            assert!(analysis
                .consistency
                .passed
                .iter()
                .any(|line| line.contains("augmentation")));
        }
        analyzed += 1;
    }
}
