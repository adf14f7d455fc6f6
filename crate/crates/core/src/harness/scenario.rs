//! Scenarios: arena, mapped and unmapped obstacles, start and goal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::{HPolytope, Point2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub min: Point2,
    pub max: Point2,
}

impl Arena {
    pub fn polytope(&self) -> HPolytope {
        HPolytope::from_box(self.min, self.max)
    }

    /// The arena shrunk by `margin` on every side.
    pub fn shrunk(&self, margin: f64) -> Arena {
        Arena {
            min: Point2::new(self.min.x + margin, self.min.y + margin),
            max: Point2::new(self.max.x - margin, self.max.y - margin),
        }
    }

    /// Distance from `p` to the nearest wall; negative outside.
    pub fn wall_distance(&self, p: Point2) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    pub heading: f64,
}

/// Convex obstacle given by its counterclockwise vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub vertices: Vec<Point2>,
}

impl Obstacle {
    pub fn polytope(&self) -> Result<HPolytope, HarnessError> {
        Ok(HPolytope::from_vertices(&self.vertices)?)
    }

    /// Signed distance from `p` to the polygon boundary; negative inside.
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let n = self.vertices.len();
        let mut best = f64::INFINITY;
        let mut inside = true;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let ab = b - a;
            if ab.cross(p - a) < 0.0 {
                inside = false;
            }
            let s = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
            best = best.min(a.lerp(b, s).distance(p));
        }
        if inside {
            -best
        } else {
            best
        }
    }

    pub fn bounds(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn rectangle(min: Point2, max: Point2) -> Self {
        Obstacle {
            vertices: vec![
                min,
                Point2::new(max.x, min.y),
                max,
                Point2::new(min.x, max.y),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub seed: u64,
    pub arena: Arena,
    /// Known to the global planner.
    pub mapped: Vec<Obstacle>,
    /// Seen only by the local map.
    pub unmapped: Vec<Obstacle>,
    pub start: Pose,
    pub goal: Point2,
    /// Configuration overrides applied on top of the run configuration.
    pub overrides: toml::Table,
}

// File form: every length in meters, angles in radians, named with units.
#[derive(Serialize, Deserialize)]
struct ArenaFile {
    min_m: [f64; 2],
    max_m: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct StartFile {
    position_m: [f64; 2],
    heading_rad: f64,
}

#[derive(Serialize, Deserialize)]
struct GoalFile {
    position_m: [f64; 2],
}

#[derive(Serialize, Deserialize)]
struct ObstacleFile {
    vertices_m: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    seed: u64,
    arena: ArenaFile,
    start: StartFile,
    goal: GoalFile,
    #[serde(default)]
    mapped: Vec<ObstacleFile>,
    #[serde(default)]
    unmapped: Vec<ObstacleFile>,
    #[serde(default)]
    overrides: toml::Table,
}

fn pt(a: [f64; 2]) -> Point2 {
    Point2::new(a[0], a[1])
}

fn arr(p: Point2) -> [f64; 2] {
    [p.x, p.y]
}

impl Scenario {
    pub fn to_toml(&self) -> String {
        let obstacles = |v: &[Obstacle]| {
            v.iter()
                .map(|o| ObstacleFile {
                    vertices_m: o.vertices.iter().map(|&p| arr(p)).collect(),
                })
                .collect()
        };
        let file = ScenarioFile {
            seed: self.seed,
            arena: ArenaFile {
                min_m: arr(self.arena.min),
                max_m: arr(self.arena.max),
            },
            start: StartFile {
                position_m: arr(self.start.position),
                heading_rad: self.start.heading,
            },
            goal: GoalFile {
                position_m: arr(self.goal),
            },
            mapped: obstacles(&self.mapped),
            unmapped: obstacles(&self.unmapped),
            overrides: self.overrides.clone(),
        };
        toml::to_string(&file).expect("scenario serializes")
    }

    pub fn from_toml(text: &str) -> Result<Scenario, HarnessError> {
        let f: ScenarioFile =
            toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        let obstacles = |v: Vec<ObstacleFile>| -> Vec<Obstacle> {
            v.into_iter()
                .map(|o| Obstacle {
                    vertices: o.vertices_m.into_iter().map(pt).collect(),
                })
                .collect()
        };
        let s = Scenario {
            seed: f.seed,
            arena: Arena {
                min: pt(f.arena.min_m),
                max: pt(f.arena.max_m),
            },
            mapped: obstacles(f.mapped),
            unmapped: obstacles(f.unmapped),
            start: Pose {
                position: pt(f.start.position_m),
                heading: f.start.heading_rad,
            },
            goal: pt(f.goal.position_m),
            overrides: f.overrides,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn obstacles(&self) -> impl Iterator<Item = &Obstacle> {
        self.mapped.iter().chain(&self.unmapped)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidScenario(m));
        if !(self.arena.min.x < self.arena.max.x && self.arena.min.y < self.arena.max.y) {
            return bad("arena is empty".into());
        }
        for o in self.obstacles() {
            o.polytope()?;
        }
        for (name, p) in [("start", self.start.position), ("goal", self.goal)] {
            if self.arena.wall_distance(p) <= 0.0 {
                return bad(format!("{name} is outside the arena"));
            }
            if self.obstacles().any(|o| o.signed_distance(p) <= 0.0) {
                return bad(format!("{name} is inside an obstacle"));
            }
        }
        Ok(())
    }
}

/// Parameters of [`generate_map`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapSpec {
    pub arena: Arena,
    pub start: Pose,
    pub goal: Point2,
    pub mapped_count: usize,
    pub unmapped_count: usize,
    /// Circumradius ranges, meters; the mapped range lies above the
    /// unmapped one.
    pub mapped_radius: (f64, f64),
    pub unmapped_radius: (f64, f64),
    /// Required clearance of obstacles from start and goal, meters.
    pub endpoint_clearance: f64,
    /// Minimum gap between obstacles, meters.
    pub gap: f64,
    pub attempts: usize,
}

impl Default for MapSpec {
    fn default() -> Self {
        Self {
            arena: Arena {
                min: Point2::ORIGIN,
                max: Point2::new(10.0, 6.0),
            },
            start: Pose {
                position: Point2::new(0.8, 3.0),
                heading: 0.0,
            },
            goal: Point2::new(9.2, 3.0),
            mapped_count: 4,
            unmapped_count: 3,
            mapped_radius: (0.6, 1.0),
            unmapped_radius: (0.2, 0.4),
            endpoint_clearance: 0.3,
            gap: 0.05,
            attempts: 10_000,
        }
    }
}

/// Random convex polygon: 4 to 7 vertices at sorted angles on a circle.
fn random_polygon(rng: &mut ChaCha8Rng, center: Point2, radius: f64) -> Obstacle {
    let n = rng.gen_range(4..=7);
    let mut angles: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    angles.sort_by(f64::total_cmp);
    Obstacle {
        vertices: angles
            .into_iter()
            .map(|a| center + Point2::new(a.cos(), a.sin()) * radius)
            .collect(),
    }
}

/// Rejection-samples non-overlapping obstacles. Bounding circles keep
/// obstacles apart, from the arena walls and from start and goal.
pub fn generate_map(seed: u64, spec: &MapSpec) -> Result<Scenario, HarnessError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<(Point2, f64)> = Vec::new();
    let mut attempts = 0;
    let mut sample = |count: usize, (lo, hi): (f64, f64), out: &mut Vec<Obstacle>| {
        while out.len() < count {
            attempts += 1;
            if attempts > spec.attempts {
                return Err(HarnessError::RejectionBudget(spec.attempts));
            }
            let r = rng.gen_range(lo..hi);
            let a = &spec.arena;
            if a.max.x - a.min.x <= 2.0 * r || a.max.y - a.min.y <= 2.0 * r {
                continue;
            }
            let c = Point2::new(
                rng.gen_range(a.min.x + r..a.max.x - r),
                rng.gen_range(a.min.y + r..a.max.y - r),
            );
            let poly = random_polygon(&mut rng, c, r);
            let endpoints_clear = [spec.start.position, spec.goal]
                .iter()
                .all(|&p| p.distance(c) > r + spec.endpoint_clearance);
            let apart = placed
                .iter()
                .all(|&(q, s)| q.distance(c) > r + s + spec.gap);
            if endpoints_clear && apart && HPolytope::from_vertices(&poly.vertices).is_ok() {
                placed.push((c, r));
                out.push(poly);
            }
        }
        Ok(())
    };
    let mut mapped = Vec::new();
    sample(spec.mapped_count, spec.mapped_radius, &mut mapped)?;
    let mut unmapped = Vec::new();
    sample(spec.unmapped_count, spec.unmapped_radius, &mut unmapped)?;
    let s = Scenario {
        seed,
        arena: spec.arena,
        mapped,
        unmapped,
        start: spec.start,
        goal: spec.goal,
        overrides: toml::Table::new(),
    };
    s.validate()?;
    Ok(s)
}

/// Two corridors around a mapped block; an unmapped wall closes the lower
/// one, which the global route prefers. `seed` shifts the wall along the
/// corridor.
pub fn blocked_corridor(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = rng.gen_range(4.0..4.6);
    Scenario {
        seed,
        arena: Arena {
            min: Point2::ORIGIN,
            max: Point2::new(8.0, 5.0),
        },
        mapped: vec![Obstacle::rectangle(
            Point2::new(2.5, 1.9),
            Point2::new(5.5, 3.4),
        )],
        unmapped: vec![Obstacle::rectangle(
            Point2::new(x, 0.0),
            Point2::new(x + 0.4, 1.9),
        )],
        start: Pose {
            position: Point2::new(0.8, 2.3),
            heading: 0.0,
        },
        goal: Point2::new(7.2, 2.3),
        overrides: toml::Table::new(),
    }
}
