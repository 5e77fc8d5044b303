//! The canonical class coordinates depend on the chosen spanning tree, but
//! the trace itself does not: transporting one tree's result through the
//! change-of-presentation homomorphism must reproduce the other tree's
//! result class by class, not just in augmentation.

use std::collections::BTreeSet;

use reltrace_core::complexes::{ChainScope, SimplicialPair, VertexSelfMap};
use reltrace_core::covers::{lift_chain_map, lift_chain_complex, transport_hom};
use reltrace_core::fundamental_group::{
    pushforward_classes, twisted_conjugacy_classes, ShadowClassSet, TreeSpec,
};
use reltrace_core::shadow_algebra::TraceVector;

fn traced_lift(
    pair: &SimplicialPair,
    map: &VertexSelfMap,
    vertices: &BTreeSet<usize>,
    scope: ChainScope,
    tree: &TreeSpec,
) -> (reltrace_core::covers::LiftedComplex, ShadowClassSet, TraceVector) {
    let lifted = lift_chain_complex(pair, vertices, scope, tree).unwrap();
    let (_, cmap) = lift_chain_map(pair, map, &lifted).unwrap();
    let sh = twisted_conjugacy_classes(&lifted.ab.moduli, &cmap.twist);
    let trace = cmap.alternating_trace(&sh).unwrap();
    (lifted, sh, trace)
}

/// Computes the same scoped trace under two trees and compares after
/// transporting the second tree's classes into the first tree's
/// coordinates. The transport is itself verified: `pushforward_classes`
/// rejects maps that do not intertwine the twists.
fn assert_tree_independent(
    pair: &SimplicialPair,
    map: &VertexSelfMap,
    vertices: &BTreeSet<usize>,
    scope: ChainScope,
    tree_a: &TreeSpec,
    tree_b: &TreeSpec,
) {
    let (lift1, sh1, trace1) = traced_lift(pair, map, vertices, scope, tree_a);
    let (lift2, sh2, trace2) = traced_lift(pair, map, vertices, scope, tree_b);
    let hom = transport_hom(&lift1.edge_data, &lift2.edge_data);
    let n1 = lift1.edge_data.presentation.generators.len();
    let coord_map = lift2.ab.induced_map(&lift1.ab, &hom.exponent_matrix(n1));
    let class_map = pushforward_classes(&coord_map, &sh2, &sh1).unwrap();
    let transported = trace2.map_classes(|c| class_map.apply(c));
    assert_eq!(transported, trace1);
    assert_eq!(trace1.augmentation(), trace2.augmentation());
}

fn full_vertex_set(n: usize) -> BTreeSet<usize> {
    (0..n).collect()
}

#[test]
fn reflection_of_a_triangle() {
    // Reflection of the circle: degree -1, so the trace is [1] + [b] over
    // two classes and genuinely distinguishes the presentations.
    let pair = SimplicialPair::new(
        vec!["v0".into(), "v1".into(), "v2".into()],
        vec![vec![vec![0, 1], vec![0, 2], vec![1, 2]]],
        vec![],
    );
    let map = VertexSelfMap { images: vec![0, 2, 1] };
    let vertices = full_vertex_set(3);
    let bfs = TreeSpec::Bfs;
    // BFS from v0 picks the star {01, 02}; this tree is the path 01, 12.
    let path = TreeSpec::Explicit(BTreeSet::from([(0, 1), (1, 2)]));
    let (_, sh, trace) = traced_lift(&pair, &map, &vertices, ChainScope::B, &bfs);
    assert_eq!(sh.count(), Some(2.into()));
    assert_eq!(trace.augmentation(), 2.into());
    assert_eq!(trace.essential_count(), 2);
    assert_tree_independent(&pair, &map, &vertices, ChainScope::B, &bfs, &path);
    let priority = TreeSpec::Priority(vec![2, 1, 0]);
    assert_tree_independent(&pair, &map, &vertices, ChainScope::B, &bfs, &priority);
}

#[test]
fn identity_on_circle_with_arc_all_scopes() {
    let pair = SimplicialPair::new(
        vec!["v0".into(), "v1".into(), "v2".into()],
        vec![vec![vec![0, 1], vec![0, 2], vec![1, 2]]],
        vec![vec![0], vec![1], vec![0, 1]],
    );
    let map = VertexSelfMap { images: vec![0, 1, 2] };
    let vertices = full_vertex_set(3);
    let a_vertices: BTreeSet<usize> = [0, 1].into();
    let bfs = TreeSpec::Bfs;
    let other = TreeSpec::Explicit(BTreeSet::from([(0, 2), (1, 2)]));
    for scope in [ChainScope::B, ChainScope::Relative] {
        assert_tree_independent(&pair, &map, &vertices, scope, &bfs, &other);
    }
    // The A-skeleton is a single edge; both trees coincide there, which
    // still exercises the transport on a trivial group.
    assert_tree_independent(
        &pair,
        &map,
        &a_vertices,
        ChainScope::A,
        &bfs,
        &TreeSpec::Priority(vec![1, 0]),
    );
}

#[test]
fn seven_vertex_torus_shift() {
    // Free shift action on the 7-vertex torus triangulation: the trace is
    // zero, but the presentations are large (15 generators) and the
    // transported class map still has to intertwine the twists.
    let n = 7;
    let mut edges = Vec::new();
    for d in 1..=3usize {
        for i in 0..n {
            let mut e = vec![i, (i + d) % n];
            e.sort_unstable();
            edges.push(e);
        }
    }
    let mut triangles = Vec::new();
    for i in 0..n {
        let mut t1 = vec![i, (i + 1) % n, (i + 3) % n];
        t1.sort_unstable();
        triangles.push(t1);
        let mut t2 = vec![i, (i + 2) % n, (i + 3) % n];
        t2.sort_unstable();
        triangles.push(t2);
    }
    let pair = SimplicialPair::new(
        (0..n).map(|i| format!("t{i}")).collect(),
        vec![edges, triangles],
        vec![],
    );
    let map = VertexSelfMap { images: (0..n).map(|i| (i + 1) % n).collect() };
    let vertices = full_vertex_set(n);
    let (_, _, trace) = traced_lift(&pair, &map, &vertices, ChainScope::B, &TreeSpec::Bfs);
    assert!(trace.is_zero());
    assert_tree_independent(
        &pair,
        &map,
        &vertices,
        ChainScope::B,
        &TreeSpec::Bfs,
        &TreeSpec::Priority(vec![6, 5, 4, 3, 2, 1, 0]),
    );
}
