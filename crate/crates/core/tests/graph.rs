mod common;

use std::collections::BTreeMap;

use fiberloom::graph::*;
use fiberloom::{Error, Point2};

fn vertex(id: usize, x: f64, y: f64) -> Vertex {
    Vertex { id, position: Point2::new(x, y) }
}

fn edge(id: usize, v1: usize, v2: usize, target: u32) -> Edge {
    Edge { id, v1, v2, target }
}

#[test]
fn minimal_connections_match_the_published_table() {
    let g = common::fixture("minimal").graph;
    let pairs: Vec<(usize, usize)> = g.connections.iter().map(|c| (c.edge1, c.edge2)).collect();
    assert_eq!(
        pairs,
        [(0, 1), (0, 4), (0, 6), (1, 2), (1, 4), (2, 3), (3, 4), (3, 5), (4, 5), (5, 6)]
    );
    let targets: Vec<f64> = g.connections.iter().map(|c| c.target).collect();
    assert_eq!(targets, [2., 3., 2., 2., 3., 2., 3., 2., 3., 2.]);
    let members: Vec<Vec<usize>> = (0..10)
        .map(|c| g.loops_using_connection(c).into_iter().map(|(_, l)| l).collect())
        .collect();
    let expected: [&[usize]; 10] = [&[2], &[0], &[0, 2], &[1, 2], &[1], &[1, 2], &[1], &[2], &[0], &[0, 2]];
    assert_eq!(members, expected);
}

#[test]
fn star_connection_count_matches_pair_enumeration() {
    for k in 1..=4 {
        let mut vs = vec![vertex(0, 0.0, 0.0)];
        let mut es = Vec::new();
        for i in 0..k {
            let a = i as f64 * std::f64::consts::TAU / k as f64;
            vs.push(vertex(i + 1, a.cos(), a.sin()));
            es.push(edge(i, 0, i + 1, 1));
        }
        let g = FiberGraph::new(vs, es.clone(), &BTreeMap::new()).unwrap();
        let mut oracle = 0;
        for a in &es {
            for b in &es {
                if a.id < b.id && (a.v1 == b.v1 || a.v1 == b.v2 || a.v2 == b.v1 || a.v2 == b.v2) {
                    oracle += 1;
                }
            }
        }
        assert_eq!(g.n_connections(), oracle);
        assert_eq!(oracle, k * (k - 1) / 2);
    }
}

#[test]
fn loops_from_edge_lists() {
    let g = common::fixture("minimal").graph;
    let l0 = g.loop_from_edges(0, &[0, 4, 5, 6, 0]).unwrap();
    assert_eq!(l0.connections, [1, 8, 9, 2]);
    assert!(l0.closed);
    let l2 = g.loop_from_edges(2, &[0, 1, 2, 3, 5, 6, 0]).unwrap();
    assert_eq!(l2.connections, [0, 3, 5, 7, 9, 2]);
    let open = g.loop_from_edges(3, &[0, 1]).unwrap();
    assert_eq!(open.connections, [0]);
    assert!(!open.closed);
    assert_eq!(g.loop_from_edges(4, &[0, 2]), Err(Error::NotChaining(0, 2)));
}

#[test]
fn minimal_matrices() {
    let g = common::fixture("minimal").graph;
    let s = &g.sheets[0];
    let c = [
        [0., 0., 1.], [1., 0., 0.], [1., 0., 1.], [0., 1., 1.], [0., 1., 0.],
        [0., 1., 1.], [0., 1., 0.], [0., 0., 1.], [1., 0., 0.], [1., 0., 1.],
    ];
    let e = [[1., 0., 1.], [0., 1., 1.], [0., 1., 1.], [0., 1., 1.], [1., 1., 0.], [1., 0., 1.], [1., 0., 1.]];
    assert_eq!(s.c.to_rows(), c.map(|r| r.to_vec()).to_vec());
    assert_eq!(s.e.to_rows(), e.map(|r| r.to_vec()).to_vec());
    assert_eq!(g.edge_targets, [2., 2., 2., 2., 3., 2., 2.]);
    assert_eq!(s.c.mul_vec(&[1., 1., 1.]), [1., 1., 2., 2., 1., 2., 1., 1., 1., 2.]);
    let (c2, e2, _) = g.build_sheet_matrices(&s.loops);
    assert_eq!((c2, e2), (s.c.clone(), s.e.clone()));
}

/// Both diagonals of a plus-shaped junction.
fn cross() -> FiberGraph {
    let vs = vec![
        vertex(0, 0.0, 0.0),
        vertex(1, 1.0, 0.0),
        vertex(2, 0.0, 1.0),
        vertex(3, -1.0, 0.0),
        vertex(4, 0.0, -1.0),
    ];
    let es = (0..4).map(|i| edge(i, 0, i + 1, 1)).collect();
    FiberGraph::new(vs, es, &BTreeMap::new()).unwrap()
}

#[test]
fn crossing_directions_conflict() {
    let mut g = cross();
    let both = g
        .add_sheet(&[LoopSpec::Edges(vec![0, 2]), LoopSpec::Edges(vec![1, 3])])
        .unwrap();
    let v = g.validate_sheet_compatibility(&g.sheets[both]).unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].vertex, 0);
    let one = g
        .add_sheet(&[LoopSpec::Edges(vec![0, 2]), LoopSpec::Edges(vec![0, 1])])
        .unwrap();
    assert!(g.validate_sheet_compatibility(&g.sheets[one]).unwrap().is_empty());
}

#[test]
fn minimal_sheet_is_compatible() {
    let g = common::fixture("minimal").graph;
    assert!((0..g.n_vertices()).all(|v| g.degree(v) <= 3));
    assert!(g.validate_sheet_compatibility(&g.sheets[0]).unwrap().is_empty());
}

#[test]
fn cantilever_with_both_diagonals_conflicts() {
    let mut g = common::fixture("cantilever").graph;
    // angular-order oracle at the crossing vertex: opposite sides pair up
    let c = 7;
    assert_eq!(g.degree(c), 4);
    let sides = g.angular_sides(c);
    let d0 = g.connection_between(sides[0], sides[2]).unwrap();
    let d1 = g.connection_between(sides[1], sides[3]).unwrap();
    assert!(g.is_crossing(d0) && g.is_crossing(d1));
    let s = g
        .add_sheet(&[
            LoopSpec::Connections { ids: vec![d0], closed: false },
            LoopSpec::Connections { ids: vec![d1], closed: false },
        ])
        .unwrap();
    let v = g.validate_sheet_compatibility(&g.sheets[s]).unwrap();
    assert!(!v.is_empty());
    assert_eq!(v[0].vertex, c);
    // the shipped sheets each use one direction only
    for sheet in 0..2 {
        assert!(g.validate_sheet_compatibility(&g.sheets[sheet]).unwrap().is_empty());
    }
}

#[test]
fn incompatible_sheet_is_rejected_on_load() {
    let text = std::fs::read_to_string(common::fixture_path("cantilever")).unwrap();
    let bad = text.replacen(
        "[[sheets]]",
        "[[sheets]]\nloops = [{ edges = [6, 7] }, { edges = [8, 9] }]\n\n[[sheets]]",
        1,
    );
    let err = fiberloom::project::Project::from_toml(&bad).unwrap_err();
    assert!(err.to_string().contains("cross"), "{err}");
}
