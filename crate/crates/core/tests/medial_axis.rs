use std::collections::BTreeSet;

use navplan::geometry::{HPolytope, Point2};
use navplan::medial_axis::{
    circumcenter, triangulate, triangulation_count, GraphDump, MedialAxisGraph, NodeId,
    TriangulationMesh,
};
use proptest::prelude::*;

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> HPolytope {
    HPolytope::from_box(Point2::new(x0, y0), Point2::new(x1, y1))
}

fn h_fixture() -> (HPolytope, Vec<HPolytope>) {
    (
        rect(0.0, 0.0, 3.0, 3.0),
        vec![rect(1.0, 2.0, 2.0, 3.0), rect(1.0, 0.0, 2.0, 1.0)],
    )
}

/// Box with one off-center obstacle: two corridors of different length.
fn two_corridor_fixture() -> (HPolytope, Vec<HPolytope>) {
    (rect(0.0, 0.0, 6.0, 3.0), vec![rect(2.0, 0.9, 4.0, 2.0)])
}

/// Minimum route cost over all simple node paths, using chains not in
/// `excluded` (exhaustive DFS oracle).
fn enumerate_paths(dump: &GraphDump, s: NodeId, g: NodeId, excluded: &BTreeSet<usize>) -> f64 {
    fn len(points: &[Point2]) -> f64 {
        points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
    fn dfs(
        dump: &GraphDump,
        at: NodeId,
        g: NodeId,
        excluded: &BTreeSet<usize>,
        seen: &mut BTreeSet<NodeId>,
        cost: f64,
        best: &mut f64,
    ) {
        if at == g {
            *best = best.min(cost);
            return;
        }
        for c in &dump.chains {
            if excluded.contains(&c.id) || c.from == c.to {
                continue;
            }
            let next = if c.from == at {
                c.to
            } else if c.to == at {
                c.from
            } else {
                continue;
            };
            if seen.insert(next) {
                dfs(dump, next, g, excluded, seen, cost + len(&c.points), best);
                seen.remove(&next);
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut seen = BTreeSet::from([s]);
    dfs(dump, s, g, excluded, &mut seen, 0.0, &mut best);
    best
}

fn check_graph_invariants(mesh: &TriangulationMesh, g: &MedialAxisGraph) {
    let a = g.adjacency_matrix();
    for i in 0..a.len() {
        assert!(!a[i][i]);
        for j in 0..a.len() {
            assert_eq!(a[i][j], a[j][i]);
            assert_eq!(a[i][j], !g.chains_between(i, j).is_empty());
        }
    }
    for c in g.chains().filter(|c| !c.temporary) {
        let (ni, nj) = (g.get_node(c.from).unwrap(), g.get_node(c.to).unwrap());
        assert_eq!(c.points[0], mesh.circumcenters[ni.triangle.unwrap()]);
        assert_eq!(
            *c.points.last().unwrap(),
            mesh.circumcenters[nj.triangle.unwrap()]
        );
        for &t in &c.triangles[1..c.triangles.len() - 1] {
            assert_eq!(mesh.connectivity(t), 2);
        }
    }
}

#[test]
fn square_box_has_two_triangles_with_one_neighbor() {
    let mesh = triangulate(&rect(0.0, 0.0, 1.0, 1.0), &[], None).unwrap();
    assert_eq!(mesh.len(), 2);
    assert!((0..2).all(|t| mesh.connectivity(t) == 1));
}

#[test]
fn right_triangle_circumcenter_is_hypotenuse_midpoint() {
    let c = circumcenter(
        Point2::new(0.0, 0.0),
        Point2::new(2.0, 0.0),
        Point2::new(0.0, 2.0),
    );
    assert_eq!(c, Some(Point2::new(1.0, 1.0)));
}

#[test]
fn h_corridor_has_two_nodes_one_edge() {
    let (b, obs) = h_fixture();
    let mesh = triangulate(&b, &obs, None).unwrap();
    let three: usize = (0..mesh.len())
        .filter(|&t| mesh.connectivity(t) == 3)
        .count();
    let g = MedialAxisGraph::build(&mesh);
    assert_eq!(g.node_count(), three);
    assert_eq!(g.node_count(), 2);
    assert_eq!(g.edge_count(), 1);
    check_graph_invariants(&mesh, &g);
}

#[test]
fn two_corridors_deletion_leaves_alternate() {
    let (b, obs) = two_corridor_fixture();
    let mesh = triangulate(&b, &obs, Some(0.5)).unwrap();
    let mut g = MedialAxisGraph::build(&mesh);
    let (s, goal) = g
        .attach_endpoints(&mesh, Point2::new(0.5, 1.5), Point2::new(5.5, 1.5))
        .unwrap();
    let before = g.dump();
    let route = g.shortest_route(s, goal).unwrap();
    let oracle = enumerate_paths(&before, s, goal, &BTreeSet::new());
    assert!((route.cost - oracle).abs() < 1e-9);
    // Shorter corridor runs below the obstacle.
    assert!(route
        .polyline
        .iter()
        .any(|p| p.x > 2.5 && p.x < 3.5 && p.y < 0.9));

    let (_, near) = mesh.nearest_circumcenter(Point2::new(3.0, 0.45)).unwrap();
    let frozen = mesh.clone();
    let count = triangulation_count();
    let removal = g.remove_current_corridor(&route, near).unwrap();
    assert_eq!(mesh, frozen);
    assert_eq!(triangulation_count(), count);
    check_graph_invariants(&mesh, &g);

    let alt = g.shortest_route(s, goal).unwrap();
    let excluded: BTreeSet<usize> = removal.removed_chains.iter().copied().collect();
    let oracle = enumerate_paths(&before, s, goal, &excluded);
    assert!((alt.cost - oracle).abs() < 1e-9);
    assert!(alt
        .polyline
        .iter()
        .any(|p| p.x > 2.5 && p.x < 3.5 && p.y > 2.0));
    assert!(alt.chains.iter().all(|c| !excluded.contains(&c.chain)));
}

#[test]
fn route_polylines_keep_clearance_on_fixtures() {
    for ((b, obs), goal) in [(h_fixture(), 2.5), (two_corridor_fixture(), 5.5)] {
        let mesh = triangulate(&b, &obs, Some(0.25)).unwrap();
        let mut g = MedialAxisGraph::build(&mesh);
        let (s, goal) = g
            .attach_endpoints(&mesh, Point2::new(0.5, 1.5), Point2::new(goal, 1.5))
            .unwrap();
        let route = g.shortest_route(s, goal).unwrap();
        for w in route.polyline.windows(2) {
            let n = (w[0].distance(w[1]) / 0.01).ceil().max(1.0) as usize;
            for k in 0..=n {
                let p = w[0].lerp(w[1], k as f64 / n as f64);
                assert!(
                    obs.iter().all(|o| o.violation(p) > 0.0),
                    "{p:?} touches an obstacle"
                );
            }
        }
    }
}

fn arb_map() -> impl Strategy<Value = Vec<HPolytope>> {
    prop::collection::vec((0.5..8.0f64, 0.5..4.5f64, 0.3..1.5f64, 0.3..1.5f64), 1..4).prop_map(
        |boxes| {
            boxes
                .into_iter()
                .map(|(x, y, w, h)| rect(x, y, (x + w).min(9.5), (y + h).min(5.5)))
                .collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_invariants_hold_after_mutations(obs in arb_map(), qx in 0.1..9.9f64, qy in 0.1..5.9f64) {
        let mesh = triangulate(&rect(0.0, 0.0, 10.0, 6.0), &obs, Some(0.5)).unwrap();
        for t in 0..mesh.len() {
            let c = mesh.centroid(t);
            prop_assert!(obs.iter().all(|o| !o.contains(c, -1e-12)));
            for &u in &mesh.neighbors[t] {
                prop_assert!(mesh.neighbors[u].contains(&t));
            }
        }
        let mut g = MedialAxisGraph::build(&mesh);
        check_graph_invariants(&mesh, &g);

        let q = Point2::new(qx, qy);
        let (cc, t) = mesh.nearest_circumcenter(q).unwrap();
        let best = mesh.circumcenters.iter().map(|c| c.distance(q)).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(cc.distance(q), best);
        prop_assert_eq!(mesh.circumcenters.iter().position(|c| c.distance(q) == best), Some(t));

        if obs.iter().any(|o| o.contains(q, 1e-9)) {
            return Ok(());
        }
        let (s, goal) = g.attach_endpoints(&mesh, q, Point2::new(9.9, 5.9)).unwrap();
        let Ok(route) = g.shortest_route(s, goal) else { return Ok(()) };
        let frozen = mesh.clone();
        let Some(rc) = route.chains.first() else { return Ok(()) };
        let near = rc.triangles[rc.triangles.len() / 2];
        g.remove_current_corridor(&route, near).unwrap();
        prop_assert_eq!(&mesh, &frozen);
        check_graph_invariants(&mesh, &g);
    }

    #[test]
    fn nearest_circumcenter_stays_in_component(obs in arb_map(), qx in 0.1..9.9f64, qy in 0.1..5.9f64) {
        let mesh = triangulate(&rect(0.0, 0.0, 10.0, 6.0), &obs, Some(0.25)).unwrap();
        let q = Point2::new(qx, qy);
        let Some(home) = mesh.locate(q) else { return Ok(()) };
        let labels = mesh.components();
        let (_, t) = mesh.nearest_circumcenter(q).unwrap();
        prop_assert_eq!(labels[t], labels[home]);
    }
}
