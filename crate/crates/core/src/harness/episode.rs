//! Closed-loop episode: global route, MPC every period, controller and
//! plant in between, corridor deletion on re-plan requests.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{local_map, HarnessError, RunConfig, Scenario};
use crate::geometry::{bloat, HPolytope, Point2};
use crate::medial_axis::{
    triangulate, GraphDump, MedialAxisError, MedialAxisGraph, NodeId, Route, TriangulationMesh,
};
use crate::miqp::ext_float;
use crate::mpc::{lookahead_reference, plan, FlatState, MotionPlan, PlanOutcome};
use crate::vehicle::{plan_reference, UnicycleState, Vehicle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    GoalReached,
    Stuck,
    Timeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEvent {
    pub t: f64,
    /// `plan`, `incumbent` (iteration limit, incumbent accepted) or `kept`
    /// (iteration limit, previous plan kept).
    pub status: String,
    pub iterations: usize,
    #[serde(with = "ext_float")]
    pub j_lower: f64,
    #[serde(with = "ext_float")]
    pub j_upper: f64,
    pub cells: usize,
    pub wall_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplanEvent {
    pub t: f64,
    #[serde(with = "ext_float")]
    pub j_lower: f64,
    pub iterations: usize,
    pub removed_chains: Vec<usize>,
    /// Deletion plus re-search.
    pub wall_s: f64,
}

/// One line of the episode log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogRecord {
    /// Medial-axis chains of the initial graph.
    Graph {
        chains: Vec<Vec<[f64; 2]>>,
    },
    Route {
        t: f64,
        version: usize,
        cost: f64,
        chains: Vec<usize>,
        points: Vec<[f64; 2]>,
    },
    Plan(PlanEvent),
    Replan(ReplanEvent),
    Telemetry(Telemetry),
    Outcome {
        t: f64,
        outcome: Outcome,
        detail: Option<String>,
        min_clearance: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeLog {
    pub records: Vec<LogRecord>,
    pub outcome: Outcome,
    /// Smallest distance between the robot disk and any obstacle or wall
    /// over all plant steps; negative on contact.
    pub min_clearance: f64,
    pub clearance_violations: usize,
    /// Medial-axis graph at the end of the episode, after deletions.
    pub graph: Option<GraphDump>,
}

impl EpisodeLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<EpisodeLog, HarnessError> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| HarnessError::Parse(e.to_string())))
            .collect::<Result<Vec<LogRecord>, _>>()?;
        let (outcome, min_clearance) = records
            .iter()
            .rev()
            .find_map(|r| match r {
                LogRecord::Outcome {
                    outcome,
                    min_clearance,
                    ..
                } => Some((*outcome, *min_clearance)),
                _ => None,
            })
            .ok_or_else(|| HarnessError::Parse("log has no outcome record".into()))?;
        Ok(EpisodeLog {
            records,
            outcome,
            min_clearance,
            clearance_violations: 0,
            graph: None,
        })
    }

    pub fn telemetry(&self) -> impl Iterator<Item = &Telemetry> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Telemetry(t) => Some(t),
            _ => None,
        })
    }

    pub fn replans(&self) -> impl Iterator<Item = &ReplanEvent> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Replan(e) => Some(e),
            _ => None,
        })
    }

    pub fn plans(&self) -> impl Iterator<Item = &PlanEvent> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Plan(e) => Some(e),
            _ => None,
        })
    }

    /// Copy with every wall-clock field zeroed.
    pub fn without_wall_times(&self) -> EpisodeLog {
        let mut out = self.clone();
        for r in &mut out.records {
            match r {
                LogRecord::Plan(e) => e.wall_s = 0.0,
                LogRecord::Replan(e) => e.wall_s = 0.0,
                _ => {}
            }
        }
        out
    }
}

fn arr(p: Point2) -> [f64; 2] {
    [p.x, p.y]
}

struct Global {
    mesh: TriangulationMesh,
    graph: MedialAxisGraph,
    goal: NodeId,
}

fn build_global(scenario: &Scenario, cfg: &RunConfig) -> Result<(Global, Route), HarnessError> {
    let bounds = scenario.arena.shrunk(cfg.bloat_margin).polytope();
    let obstacles = scenario
        .mapped
        .iter()
        .map(|o| Ok(bloat(&o.polytope()?, cfg.bloat_margin)?))
        .collect::<Result<Vec<HPolytope>, HarnessError>>()?;
    let mesh = triangulate(&bounds, &obstacles, Some(cfg.mesh_max_edge))?;
    let mut graph = MedialAxisGraph::build(&mesh);
    let (s, g) = graph.attach_endpoints(&mesh, scenario.start.position, scenario.goal)?;
    let route = graph.shortest_route(s, g)?;
    Ok((
        Global {
            mesh,
            graph,
            goal: g,
        },
        route,
    ))
}

/// Triangle used to locate the vehicle's corridor: the nearest
/// circumcenter's triangle, or the route triangle with the nearest
/// circumcenter when that one is not on the route.
fn route_triangle(
    mesh: &TriangulationMesh,
    route: &Route,
    q: Point2,
) -> Result<usize, HarnessError> {
    let (_, t) = mesh.nearest_circumcenter(q)?;
    if route.chains.iter().any(|c| c.triangles.contains(&t)) {
        return Ok(t);
    }
    route
        .chains
        .iter()
        .flat_map(|c| c.triangles.iter().copied())
        .min_by(|&a, &b| {
            mesh.circumcenters[a]
                .distance(q)
                .total_cmp(&mesh.circumcenters[b].distance(q))
        })
        .ok_or(HarnessError::MedialAxis(MedialAxisError::NotOnRoute))
}

/// Deletes the vehicle's corridor and routes again from a backtrack node at
/// the vehicle.
fn replan_route(
    global: &mut Global,
    route: &Route,
    q: Point2,
) -> Result<(Route, Vec<usize>), HarnessError> {
    let t = route_triangle(&global.mesh, route, q)?;
    let removal = global.graph.remove_current_corridor(route, t)?;
    let last = removal
        .last_node
        .ok_or(HarnessError::MedialAxis(MedialAxisError::NoRoute))?;
    let b = global.graph.add_backtrack_edge(&global.mesh, q, last)?;
    let next = global.graph.shortest_route(b, global.goal)?;
    Ok((next, removal.removed_chains))
}

struct Episode<'a> {
    scenario: &'a Scenario,
    graph: Option<GraphDump>,
    cfg: RunConfig,
    records: Vec<LogRecord>,
    min_clearance: f64,
    violations: usize,
}

impl Episode<'_> {
    fn clearance(&self, p: Point2) -> f64 {
        let walls = self.scenario.arena.wall_distance(p);
        self.scenario
            .obstacles()
            .map(|o| o.signed_distance(p))
            .fold(walls, f64::min)
            - self.cfg.robot_radius
    }

    fn finish(mut self, t: f64, outcome: Outcome, detail: Option<String>) -> EpisodeLog {
        self.records.push(LogRecord::Outcome {
            t,
            outcome,
            detail,
            min_clearance: self.min_clearance,
        });
        EpisodeLog {
            records: self.records,
            outcome,
            min_clearance: self.min_clearance,
            clearance_violations: self.violations,
            graph: self.graph,
        }
    }

    fn finish_with(
        mut self,
        graph: &MedialAxisGraph,
        t: f64,
        outcome: Outcome,
        detail: Option<String>,
    ) -> EpisodeLog {
        self.graph = Some(graph.dump());
        self.finish(t, outcome, detail)
    }

    fn log_route(&mut self, t: f64, version: usize, route: &Route) {
        self.records.push(LogRecord::Route {
            t,
            version,
            cost: route.cost,
            chains: route.chains.iter().map(|c| c.chain).collect(),
            points: route.polyline.iter().map(|&p| arr(p)).collect(),
        });
    }
}

/// Runs one closed-loop episode. Configuration overrides in the scenario
/// are applied on top of `config`.
pub fn run_episode(scenario: &Scenario, config: &RunConfig) -> EpisodeLog {
    let mut ep = Episode {
        scenario,
        graph: None,
        cfg: config.clone(),
        records: Vec::new(),
        min_clearance: f64::INFINITY,
        violations: 0,
    };
    let cfg = match config.with_overrides(&scenario.overrides) {
        Ok(c) => c,
        Err(e) => return ep.finish(0.0, Outcome::Stuck, Some(e.to_string())),
    };
    ep.cfg = cfg.clone();
    let (mut global, mut route) = match build_global(scenario, &cfg) {
        Ok(g) => g,
        Err(e) => return ep.finish(0.0, Outcome::Stuck, Some(e.to_string())),
    };
    ep.records.push(LogRecord::Graph {
        chains: global
            .graph
            .chains()
            .filter(|c| !c.temporary)
            .map(|c| c.points.iter().map(|&p| arr(p)).collect())
            .collect(),
    });
    let mut version = 0;
    ep.log_route(0.0, version, &route);

    let start = scenario.start;
    let mut vehicle = Vehicle::new(
        UnicycleState {
            x: start.position.x,
            y: start.position.y,
            theta: start.heading,
            v: 0.0,
            omega: 0.0,
        },
        cfg.plant,
        cfg.gains,
    );
    let steps = (cfg.mpc.dt / vehicle.dt).round().max(1.0) as usize;
    let mut current: Option<(MotionPlan, f64)> = None;

    loop {
        let t = vehicle.time();
        if t >= cfg.time_limit {
            return ep.finish_with(&global.graph, t, Outcome::Timeout, None);
        }
        let s = vehicle.state;
        let q = s.position();
        let x0 = FlatState::new(s.x, s.y, s.v * s.theta.cos(), s.v * s.theta.sin());
        let result = lookahead_reference(&route.polyline, q, cfg.mpc.lookahead)
            .map_err(HarnessError::from)
            .and_then(|la| local_map(scenario, q.lerp(la, 0.5), &cfg))
            .and_then(|part| {
                let wall = Instant::now();
                let (out, _) = plan(x0, s.theta, &route.polyline, &part, &cfg.mpc)?;
                Ok((out, part.cells.len(), wall.elapsed().as_secs_f64()))
            });
        let (outcome, cells, wall_s) = match result {
            Ok(r) => r,
            Err(e) => return ep.finish(t, Outcome::Stuck, Some(e.to_string())),
        };
        match outcome {
            PlanOutcome::Plan(p) => {
                log::debug!(
                    "t={t:.2} plan: {} iterations, objective {:.3}",
                    p.stats.iterations,
                    p.objective
                );
                ep.records.push(LogRecord::Plan(PlanEvent {
                    t,
                    status: "plan".into(),
                    iterations: p.stats.iterations,
                    j_lower: p.stats.lower_bound,
                    j_upper: p.stats.upper_bound,
                    cells,
                    wall_s,
                }));
                current = Some((p, t));
            }
            PlanOutcome::IterationLimit {
                incumbent,
                lower_bound,
                iterations,
            } => {
                let usable = incumbent.filter(|p| p.objective <= cfg.mpc.j_max);
                ep.records.push(LogRecord::Plan(PlanEvent {
                    t,
                    status: if usable.is_some() {
                        "incumbent"
                    } else {
                        "kept"
                    }
                    .into(),
                    iterations,
                    j_lower: lower_bound,
                    j_upper: usable.as_ref().map_or(f64::INFINITY, |p| p.objective),
                    cells,
                    wall_s,
                }));
                if let Some(p) = usable {
                    current = Some((p, t));
                }
            }
            PlanOutcome::ReplanRequested {
                lower_bound,
                iterations,
            } => {
                let wall = Instant::now();
                let next = replan_route(&mut global, &route, q);
                let wall_s = wall.elapsed().as_secs_f64();
                let (next, removed) = match next {
                    Ok(r) => r,
                    Err(e) => {
                        ep.records.push(LogRecord::Replan(ReplanEvent {
                            t,
                            j_lower: lower_bound,
                            iterations,
                            removed_chains: Vec::new(),
                            wall_s,
                        }));
                        return ep.finish_with(
                            &global.graph,
                            t,
                            Outcome::Stuck,
                            Some(e.to_string()),
                        );
                    }
                };
                ep.records.push(LogRecord::Replan(ReplanEvent {
                    t,
                    j_lower: lower_bound,
                    iterations,
                    removed_chains: removed,
                    wall_s,
                }));
                log::info!(
                    "t={t:.2} replan: j_lower={lower_bound:.1}, new route cost {:.2}",
                    next.cost
                );
                route = next;
                version += 1;
                ep.log_route(t, version, &route);
            }
        }

        for _ in 0..steps {
            vehicle.advance(|now| current.as_ref().map(|(p, t0)| plan_reference(p, now - t0)));
            let s = vehicle.state;
            ep.records.push(LogRecord::Telemetry(Telemetry {
                t: vehicle.time(),
                x: s.x,
                y: s.y,
                theta: s.theta,
                v: s.v,
                omega: s.omega,
            }));
            let c = ep.clearance(s.position());
            ep.min_clearance = ep.min_clearance.min(c);
            if c <= 0.0 {
                ep.violations += 1;
            }
            if s.position().distance(scenario.goal) <= cfg.goal_tolerance
                && s.v.abs() < cfg.goal_speed
            {
                return ep.finish_with(&global.graph, vehicle.time(), Outcome::GoalReached, None);
            }
        }
    }
}
