use navplan::geometry::Point2;
use navplan::harness::*;
use proptest::prelude::*;

/// Outward edge normals and offsets straight from the vertex list; an
/// independent route to polygon membership.
fn halfplanes(o: &Obstacle, margin: f64) -> Vec<(Point2, f64)> {
    let n = o.vertices.len();
    (0..n)
        .map(|i| {
            let a = o.vertices[i];
            let b = o.vertices[(i + 1) % n];
            let e = b - a;
            let normal = Point2::new(e.y, -e.x) * (1.0 / e.norm());
            (normal, normal.dot(a) + margin)
        })
        .collect()
}

/// Largest halfplane violation; negative strictly inside.
fn depth(planes: &[(Point2, f64)], p: Point2) -> f64 {
    planes
        .iter()
        .map(|&(n, b)| n.dot(p) - b)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn projection(o: &Obstacle, axis: Point2) -> (f64, f64) {
    o.vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let d = axis.dot(*v);
            (lo.min(d), hi.max(d))
        })
}

/// Separating-axis test on the edge normals of both polygons.
fn separated(a: &Obstacle, b: &Obstacle) -> bool {
    halfplanes(a, 0.0)
        .iter()
        .chain(&halfplanes(b, 0.0))
        .any(|&(n, _)| {
            let (alo, ahi) = projection(a, n);
            let (blo, bhi) = projection(b, n);
            ahi < blo || bhi < alo
        })
}

fn signed_area(o: &Obstacle) -> f64 {
    let n = o.vertices.len();
    0.5 * (0..n)
        .map(|i| o.vertices[i].cross(o.vertices[(i + 1) % n]))
        .sum::<f64>()
}

#[test]
fn generated_maps_do_not_overlap() {
    let spec = MapSpec::default();
    for seed in 0..500 {
        let s = generate_map(seed, &spec).unwrap();
        assert_eq!(s.mapped.len(), spec.mapped_count);
        assert_eq!(s.unmapped.len(), spec.unmapped_count);
        let all: Vec<&Obstacle> = s.obstacles().collect();
        for (i, a) in all.iter().enumerate() {
            assert!(
                signed_area(a) > 0.0,
                "seed {seed}: obstacle {i} is not counterclockwise"
            );
            for v in &a.vertices {
                assert!(
                    s.arena.wall_distance(*v) >= 0.0,
                    "seed {seed}: obstacle {i} leaves the arena"
                );
            }
            for b in &all[i + 1..] {
                assert!(separated(a, b), "seed {seed}: obstacles overlap");
            }
            for p in [s.start.position, s.goal] {
                assert!(
                    depth(&halfplanes(a, 0.0), p) > 0.0,
                    "seed {seed}: endpoint covered"
                );
            }
        }
    }
}

#[test]
fn empty_counts_give_an_empty_valid_map() {
    let spec = MapSpec {
        mapped_count: 0,
        unmapped_count: 0,
        ..MapSpec::default()
    };
    let s = generate_map(3, &spec).unwrap();
    assert_eq!(s.obstacles().count(), 0);
    s.validate().unwrap();
}

#[test]
fn open_local_map_is_one_box() {
    let mut s = blocked_corridor(0);
    s.mapped.clear();
    s.unmapped.clear();
    let cfg = RunConfig::default();
    let part = local_map(&s, Point2::new(4.0, 2.5), &cfg).unwrap();
    assert_eq!(part.cells.len(), 1);
    assert_eq!(part.polygons[0].len(), 4);
    // Near a wall the box is clipped to the shrunk arena.
    let (lo, hi) =
        local_bounds(&s, Point2::new(0.5, 0.5), cfg.local_box, cfg.bloat_margin).unwrap();
    assert_eq!(lo, Point2::new(cfg.bloat_margin, cfg.bloat_margin));
    assert!((hi.x - 1.55).abs() < 1e-12 && (hi.y - 1.55).abs() < 1e-12);
}

#[test]
fn plot_without_log_shows_the_arena_only() {
    let s = blocked_corridor(0);
    let svg = render_svg(&s, None);
    assert!(svg.contains("class=\"arena\""));
    assert!(!svg.contains("id=\"trajectory\""));
    assert!(!svg.contains("class=\"replan\""));
}

#[test]
fn rejection_budget_is_reported() {
    let spec = MapSpec {
        mapped_count: 40,
        attempts: 200,
        ..MapSpec::default()
    };
    assert!(matches!(
        generate_map(1, &spec),
        Err(HarnessError::RejectionBudget(200))
    ));
}

#[test]
fn generation_is_deterministic() {
    let spec = MapSpec::default();
    assert_eq!(
        generate_map(7, &spec).unwrap(),
        generate_map(7, &spec).unwrap()
    );
    assert_ne!(
        generate_map(7, &spec).unwrap(),
        generate_map(8, &spec).unwrap()
    );
}

#[test]
fn local_map_matches_pointwise_membership() {
    let cfg = RunConfig::default();
    let spec = MapSpec::default();
    for seed in 0..20 {
        let s = generate_map(seed, &spec).unwrap();
        let planes: Vec<_> = s
            .obstacles()
            .map(|o| halfplanes(o, cfg.bloat_margin))
            .collect();
        for k in 0..5 {
            let center = Point2::new(1.0 + 2.0 * k as f64, 1.0 + (seed % 5) as f64);
            let Some((lo, hi)) = local_bounds(&s, center, cfg.local_box, cfg.bloat_margin) else {
                continue;
            };
            let part = match local_map(&s, center, &cfg) {
                Ok(p) => p,
                Err(HarnessError::Geometry(_)) | Err(HarnessError::Mpc(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let n = 40;
            for i in 0..n {
                for j in 0..n {
                    let p = Point2::new(
                        lo.x + (hi.x - lo.x) * (i as f64 + 0.5) / n as f64,
                        lo.y + (hi.y - lo.y) * (j as f64 + 0.5) / n as f64,
                    );
                    let d = planes
                        .iter()
                        .map(|pl| depth(pl, p))
                        .fold(f64::INFINITY, f64::min);
                    if d.abs() < 1e-6 {
                        continue;
                    }
                    let inside = part.cells.iter().filter(|c| c.contains(p, -1e-9)).count();
                    let on = part.cells.iter().filter(|c| c.contains(p, 1e-9)).count();
                    if d > 0.0 {
                        assert!(on >= 1, "seed {seed}: free point {p:?} not covered");
                        assert!(inside <= 1, "seed {seed}: cells overlap at {p:?}");
                    } else {
                        assert_eq!(on, 0, "seed {seed}: occupied point {p:?} covered");
                    }
                }
            }
        }
    }
}

#[test]
fn empty_arena_reaches_the_goal_without_replans() {
    let mut s = blocked_corridor(0);
    s.mapped.clear();
    s.unmapped.clear();
    let log = run_episode(&s, &RunConfig::default());
    assert_eq!(log.outcome, Outcome::GoalReached);
    assert_eq!(log.replans().count(), 0);
    assert_eq!(log.clearance_violations, 0);
    let last = log.telemetry().last().unwrap();
    assert!(Point2::new(last.x, last.y).distance(s.goal) <= 0.15);
}

#[test]
fn blocked_corridor_replans_and_arrives() {
    let s = blocked_corridor(3);
    let log = run_episode(&s, &RunConfig::default());
    assert_eq!(log.outcome, Outcome::GoalReached);
    assert!(log.replans().count() >= 1);
    assert_eq!(log.clearance_violations, 0);
    assert!(log.min_clearance > 0.0);
}

#[test]
fn closing_both_corridors_gets_stuck() {
    let mut s = blocked_corridor(0);
    s.unmapped.push(Obstacle::rectangle(
        Point2::new(3.5, 3.4),
        Point2::new(3.9, 5.0),
    ));
    let log = run_episode(&s, &RunConfig::default());
    assert_eq!(log.outcome, Outcome::Stuck);
    assert!(log.replans().count() >= 2);
    assert_eq!(log.clearance_violations, 0);
}

#[test]
fn replans_follow_bound_violations_and_publish_routes() {
    let s = blocked_corridor(1);
    let cfg = RunConfig::default();
    let log = run_episode(&s, &cfg);
    let mut version = 0;
    let mut pending_replan: Option<f64> = None;
    let mut deleted = Vec::new();
    for r in &log.records {
        match r {
            LogRecord::Replan(e) => {
                assert!(
                    e.j_lower > cfg.mpc.j_max,
                    "replan without a bound violation"
                );
                assert!(!e.removed_chains.is_empty());
                deleted.extend(e.removed_chains.iter().copied());
                pending_replan = Some(e.t);
            }
            LogRecord::Route {
                t,
                version: v,
                chains,
                ..
            } => {
                assert!(
                    chains.iter().all(|c| !deleted.contains(c)),
                    "route uses a deleted chain"
                );
                if *v > 0 {
                    assert_eq!(Some(*t), pending_replan, "route change without replan");
                    pending_replan = None;
                }
                assert_eq!(*v, version);
                version += 1;
            }
            LogRecord::Plan(p) => assert!(p.j_lower <= p.j_upper + 1e-9),
            _ => {}
        }
    }
    assert!(version >= 2);
}

#[test]
fn episodes_are_reproducible() {
    let s = blocked_corridor(2);
    let cfg = RunConfig::default();
    let a = run_episode(&s, &cfg).without_wall_times();
    let b = run_episode(&s, &cfg).without_wall_times();
    assert_eq!(a.to_jsonl(), b.to_jsonl());
}

#[test]
fn jsonl_round_trips() {
    let mut s = blocked_corridor(0);
    s.unmapped.clear();
    let log = run_episode(&s, &RunConfig::default());
    let text = log.to_jsonl();
    assert!(text.lines().all(|l| l.starts_with("{\"event\":")));
    let back = EpisodeLog::from_jsonl(&text).unwrap();
    assert_eq!(back.records, log.records);
    assert_eq!(back.outcome, log.outcome);
}

#[test]
fn plot_shows_every_layer() {
    let s = blocked_corridor(0);
    let log = run_episode(&s, &RunConfig::default());
    let svg = render_svg(&s, Some(&log));
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("viewBox=\"0 -5 8 5\""));
    assert_eq!(svg.matches("class=\"mapped\"").count(), s.mapped.len());
    assert_eq!(svg.matches("class=\"unmapped\"").count(), s.unmapped.len());
    assert_eq!(
        svg.matches("class=\"replan\"").count(),
        log.replans().count()
    );
    assert!(svg.matches("class=\"chain\"").count() > 0);

    let line = svg
        .lines()
        .find(|l| l.contains("id=\"trajectory\""))
        .unwrap();
    let points: Vec<[f64; 2]> = line
        .split("points=\"")
        .nth(1)
        .unwrap()
        .trim_end_matches("\"/>")
        .split(' ')
        .map(|p| {
            let mut it = p.split(',').map(|v| v.parse::<f64>().unwrap());
            [it.next().unwrap(), it.next().unwrap()]
        })
        .collect();
    assert_eq!(points.len(), log.telemetry().count());
    let max_x = log
        .telemetry()
        .map(|t| t.x)
        .fold(f64::NEG_INFINITY, f64::max);
    let plotted = points
        .iter()
        .map(|p| p[0])
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((max_x - plotted).abs() < 1e-4);
}

#[test]
fn overrides_merge_and_reject_unknown_keys() {
    let cfg = RunConfig::default();
    let c = cfg
        .with_assignments(&[
            "mpc.horizon=8".into(),
            "plant.tau_v=0.25".into(),
            "time_limit=60".into(),
        ])
        .unwrap();
    assert_eq!(c.mpc.horizon, 8);
    assert_eq!(c.plant.tau_v, 0.25);
    assert_eq!(c.time_limit, 60.0);
    assert_eq!(c.mpc.j_max, cfg.mpc.j_max);
    assert!(cfg.with_assignments(&["mpc.horizn=8".into()]).is_err());
    assert!(cfg.with_assignments(&["mpc.horizon=0".into()]).is_err());
    assert!(cfg.with_assignments(&["horizon".into()]).is_err());
}

#[test]
fn scenario_overrides_apply_to_the_episode() {
    let mut s = blocked_corridor(0);
    s.mapped.clear();
    s.unmapped.clear();
    s.overrides = "[overrides]\ntime_limit = 2.0\n"
        .parse::<toml::Table>()
        .unwrap()["overrides"]
        .as_table()
        .unwrap()
        .clone();
    let log = run_episode(&s, &RunConfig::default());
    assert_eq!(log.outcome, Outcome::Timeout);
}

#[test]
fn scenario_validation_rejects_bad_endpoints() {
    let mut s = blocked_corridor(0);
    s.goal = Point2::new(4.0, 2.5);
    assert!(matches!(
        s.validate(),
        Err(HarnessError::InvalidScenario(_))
    ));
    let mut s = blocked_corridor(0);
    s.start.position = Point2::new(-1.0, 2.0);
    assert!(s.validate().is_err());
    assert!(Scenario::from_toml("seed = 1").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_toml_round_trips(seed in 0u64..10_000) {
        let s = generate_map(seed, &MapSpec::default()).unwrap();
        let text = s.to_toml();
        prop_assert!(text.contains("position_m"));
        prop_assert_eq!(Scenario::from_toml(&text).unwrap(), s);
    }

    #[test]
    fn signed_distance_agrees_with_halfplanes(seed in 0u64..1000, x in 0.0f64..10.0, y in 0.0f64..6.0) {
        let s = generate_map(seed, &MapSpec::default()).unwrap();
        let p = Point2::new(x, y);
        for o in s.obstacles() {
            let d = o.signed_distance(p);
            let h = depth(&halfplanes(o, 0.0), p);
            prop_assert_eq!(d < 0.0, h < 0.0);
            // The halfplane depth never overstates the distance outside.
            if h > 0.0 {
                prop_assert!(h <= d + 1e-12);
            } else {
                prop_assert!((d - h).abs() < 1e-9);
            }
        }
    }
}
