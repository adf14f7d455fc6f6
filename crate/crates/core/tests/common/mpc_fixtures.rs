//! Seeded MPC fixtures and checks shared by the mpc and acceptance tests.

use navplan::geometry::{partition_free_space, ConvexPartition, HPolytope, Point2};
use navplan::mpc::{FlatState, MotionPlan, MpcConfig, MpcProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Fixture {
    pub x0: FlatState,
    pub heading: f64,
    pub route: Vec<Point2>,
    pub partition: ConvexPartition,
    pub obstacles: Vec<HPolytope>,
    pub config: MpcConfig,
}

fn square(center: Point2, half: f64) -> HPolytope {
    HPolytope::from_box(
        Point2::new(center.x - half, center.y - half),
        Point2::new(center.x + half, center.y + half),
    )
}

/// Local box around the midpoint of the vehicle and the lookahead point.
fn local_box(x0: Point2, reference: Point2, width: f64) -> HPolytope {
    square(x0.lerp(reference, 0.5), 0.5 * width)
}

/// Straight route with one obstacle set well off to the side: every plan
/// should be feasible without slack.
pub fn open_corridor(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = MpcConfig::default();
    let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let dir = Point2::new(heading.cos(), heading.sin());
    let start = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let speed = rng.gen_range(0.0..0.3);
    let x0 = FlatState::new(start.x, start.y, speed * dir.x, speed * dir.y);
    let route = vec![start, start + dir * 4.0];
    let reference = start + dir * config.lookahead;
    let bounds = local_box(start, reference, 2.1);

    let along = rng.gen_range(0.4..1.6);
    let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let half = rng.gen_range(0.1..0.25);
    let lateral = side * (half + rng.gen_range(0.45..0.7));
    let center = start + dir * along + dir.perp() * lateral;
    let obstacles = vec![square(center, half)];
    let partition = partition_free_space(&bounds, &obstacles).expect("partition");
    Fixture {
        x0,
        heading,
        route,
        partition,
        obstacles,
        config,
    }
}

/// Short-horizon fixture whose terminal reference sits 0.35 to 0.5 m inside
/// an obstacle across the route, beyond the hexagon's reach. At most 4
/// cells.
pub fn blocked_terminal(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = MpcConfig {
        horizon: rng.gen_range(3..=5),
        lookahead: rng.gen_range(0.6..0.85),
        ..MpcConfig::default()
    };
    let start = Point2::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
    let dir = Point2::new(1.0, 0.0);
    let speed = rng.gen_range(0.0..0.2);
    let x0 = FlatState::new(start.x, start.y, speed, 0.0);
    let route = vec![start, start + dir * 3.0];
    let reference = start + dir * config.lookahead;
    let bounds = local_box(start, reference, 2.1);
    // The wall spans the box vertically up to a gap at one side, so the
    // partition has at most 4 cells.
    let near = reference.x - rng.gen_range(0.35..0.5);
    let far = reference.x + rng.gen_range(0.4..0.6);
    let (lo, hi) = if rng.gen_bool(0.5) {
        (start.y - 2.0, start.y + rng.gen_range(0.45..0.9))
    } else {
        (start.y - rng.gen_range(0.45..0.9), start.y + 2.0)
    };
    let obstacles = vec![HPolytope::from_box(
        Point2::new(near, lo),
        Point2::new(far, hi),
    )];
    let partition = partition_free_space(&bounds, &obstacles).expect("partition");
    Fixture {
        x0,
        heading: 0.0,
        route,
        partition,
        obstacles,
        config,
    }
}

/// Largest violation of `±ẋ ± ẏ ≤ v_max` over steps 1..N.
pub fn velocity_violation(plan: &MotionPlan, v_max: f64) -> f64 {
    plan.states[1..]
        .iter()
        .map(|s| s.vx.abs() + s.vy.abs() - v_max)
        .fold(0.0, f64::max)
}

/// Largest distance outside every cell over plan steps 1..N.
pub fn free_space_violation(plan: &MotionPlan, partition: &ConvexPartition) -> f64 {
    plan.states[1..]
        .iter()
        .map(|s| {
            partition
                .cells
                .iter()
                .map(|c| c.normalized().expect("cell").violation(s.position()))
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Indices into `problem.miqp.binaries` grouped by step.
pub fn binaries_by_step(problem: &MpcProblem) -> Vec<Vec<usize>> {
    let l = &problem.layout;
    (1..=l.horizon)
        .map(|k| {
            (0..l.cells)
                .map(|c| {
                    let col = l.binary(k, c);
                    problem
                        .miqp
                        .binaries
                        .iter()
                        .position(|&b| b == col)
                        .expect("binary column")
                })
                .collect()
        })
        .collect()
}

/// Assignment filter for enumeration: exactly one cell per step.
pub fn one_cell_per_step(problem: &MpcProblem) -> impl Fn(&[bool]) -> bool {
    let steps = binaries_by_step(problem);
    move |bits: &[bool]| {
        steps
            .iter()
            .all(|s| s.iter().filter(|&&i| bits[i]).count() == 1)
    }
}
