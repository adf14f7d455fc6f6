//! Mixed-integer MPC local planner with a lower-bound re-plan trigger.

mod problem;
mod reference;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{regular_hexagon, ConvexPartition, GeometryError, Point2, Zonotope};
use crate::miqp::{self, MiqpError, SolveOptions, SolveStatus};

pub use problem::{build_problem, soften, Layout, MpcProblem};
pub use reference::{
    flat_to_unicycle, lookahead_reference, point_at_arc_length, project_onto_polyline,
    unicycle_from_flat, UnicycleReference, ZERO_SPEED,
};

#[derive(Debug, Error)]
pub enum MpcError {
    #[error("local map has no free space")]
    EmptyPartition,
    #[error("route is empty")]
    EmptyRoute,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Miqp(#[from] MiqpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcConfig {
    pub horizon: usize,
    /// Seconds.
    pub dt: f64,
    /// Stage weights on (x, y, ẋ, ẏ).
    pub q: [f64; 4],
    /// Input weights on (ẍ, ÿ).
    pub r: [f64; 2],
    pub q_terminal: [f64; 4],
    /// m/s.
    pub v_max: f64,
    /// m/s.
    pub v_min: f64,
    /// rad/s.
    pub omega_max: f64,
    pub slack_weight: f64,
    pub j_max: f64,
    /// Meters along the route.
    pub lookahead: f64,
    /// Circumradius of the terminal hexagon, meters.
    pub hexagon_radius: f64,
    /// Branch-and-bound relaxation budget per solve.
    pub iteration_limit: usize,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon: 15,
            dt: 0.5,
            q: [0.1, 0.1, 0.0, 0.0],
            r: [10.0, 10.0],
            q_terminal: [10.0, 10.0, 0.0, 0.0],
            v_max: 0.5,
            v_min: 0.1,
            omega_max: std::f64::consts::PI,
            slack_weight: 1e6,
            j_max: 1000.0,
            lookahead: 2.0,
            hexagon_radius: 0.25,
            iteration_limit: 5000,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<(), MpcError> {
        let bad = |m: &str| Err(MpcError::InvalidConfig(m.to_string()));
        if self.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        if !(self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if self
            .q
            .iter()
            .chain(&self.r)
            .chain(&self.q_terminal)
            .any(|w| !(*w >= 0.0))
        {
            return bad("weights must be nonnegative");
        }
        if !(self.v_min < self.v_max) {
            return bad("v_min must be below v_max");
        }
        if !(self.hexagon_radius > 0.0) || !(self.lookahead > 0.0) {
            return bad("lookahead and hexagon radius must be positive");
        }
        Ok(())
    }
}

/// Double-integrator state in flat outputs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FlatState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl FlatState {
    pub fn new(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Self { x, y, vx, vy }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// One step of the discrete double integrator.
    pub fn step(&self, u: [f64; 2], dt: f64) -> FlatState {
        let half = 0.5 * dt * dt;
        FlatState {
            x: self.x + dt * self.vx + half * u[0],
            y: self.y + dt * self.vy + half * u[1],
            vx: self.vx + dt * u[0],
            vy: self.vy + dt * u[1],
        }
    }
}

/// Terminal position set `reference ⊕ deviation`, with zero velocity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalSpec {
    pub reference: Point2,
    pub deviation: Zonotope,
}

impl TerminalSpec {
    /// Largest violation of the terminal position set (support-function form).
    pub fn violation(&self, p: Point2) -> f64 {
        let set = self.deviation.translated(self.reference);
        set.to_hpolytope()
            .normals()
            .iter()
            .map(|&n| n.dot(p) - set.support(n))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    #[serde(with = "miqp::ext_float")]
    pub lower_bound: f64,
    #[serde(with = "miqp::ext_float")]
    pub upper_bound: f64,
    pub status: SolveStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionPlan {
    pub dt: f64,
    pub states: Vec<FlatState>,
    pub inputs: Vec<[f64; 2]>,
    pub references: Vec<UnicycleReference>,
    pub terminal: TerminalSpec,
    pub objective: f64,
    /// Largest slack in the solution.
    pub max_slack: f64,
    /// Selected partition cell for steps 1..N.
    pub cells: Vec<usize>,
    pub stats: SolverStats,
}

/// One per-step plan export record.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub v_r: f64,
    pub theta_r: f64,
    pub omega_r: f64,
}

impl MotionPlan {
    pub fn duration(&self) -> f64 {
        self.dt * self.inputs.len() as f64
    }

    /// Flat state at time `t` after the plan start along the
    /// piecewise-constant-acceleration trajectory, with its acceleration.
    pub fn sample(&self, t: f64) -> (FlatState, [f64; 2]) {
        let n = self.inputs.len();
        if t >= self.duration() || n == 0 {
            return (*self.states.last().expect("plan has states"), [0.0, 0.0]);
        }
        let t = t.max(0.0);
        let k = ((t / self.dt).floor() as usize).min(n - 1);
        let tau = t - k as f64 * self.dt;
        let u = self.inputs[k];
        (self.states[k].step(u, tau), u)
    }

    /// Per-step dynamics residual `‖x_{k+1} − A x_k − B u_k‖∞`.
    pub fn dynamics_residual(&self) -> f64 {
        self.inputs
            .iter()
            .enumerate()
            .map(|(k, &u)| {
                let p = self.states[k].step(u, self.dt);
                let q = self.states[k + 1];
                [p.x - q.x, p.y - q.y, p.vx - q.vx, p.vy - q.vy]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()))
            })
            .fold(0.0, f64::max)
    }

    pub fn records(&self) -> Vec<PlanRecord> {
        self.states
            .iter()
            .zip(&self.references)
            .enumerate()
            .map(|(k, (s, r))| PlanRecord {
                t: k as f64 * self.dt,
                x: s.x,
                y: s.y,
                vx: s.vx,
                vy: s.vy,
                v_r: r.v,
                theta_r: r.theta,
                omega_r: r.omega,
            })
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&serde_json::to_string(&r).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanOutcome {
    Plan(MotionPlan),
    /// The lower bound exceeded `j_max` (or the relaxation was infeasible).
    ReplanRequested {
        lower_bound: f64,
        iterations: usize,
    },
    /// Relaxation budget exhausted; carries the incumbent if one was found.
    IterationLimit {
        incumbent: Option<MotionPlan>,
        lower_bound: f64,
        iterations: usize,
    },
}

/// Turns a solver vector into a plan. States are re-rolled from `x0` with
/// the solved inputs so the recursion holds to round-off; the last input
/// absorbs any residual terminal velocity.
pub fn extract_plan(
    problem: &MpcProblem,
    z: &[f64],
    config: &MpcConfig,
    initial_heading: f64,
    stats: SolverStats,
) -> MotionPlan {
    let l = &problem.layout;
    let n = l.horizon;
    let mut inputs: Vec<[f64; 2]> = (0..n).map(|k| [z[l.input(k)], z[l.input(k) + 1]]).collect();
    let rollout = |inputs: &[[f64; 2]]| {
        let mut states = vec![problem.x0];
        for &u in inputs {
            let next = states.last().expect("nonempty").step(u, config.dt);
            states.push(next);
        }
        states
    };
    let mut states = rollout(&inputs);
    let last = states[n];
    inputs[n - 1][0] -= last.vx / config.dt;
    inputs[n - 1][1] -= last.vy / config.dt;
    states = rollout(&inputs);
    states[n].vx = 0.0;
    states[n].vy = 0.0;
    let cells = (1..=n)
        .map(|k| {
            (0..l.cells)
                .max_by(|&a, &b| z[l.binary(k, a)].total_cmp(&z[l.binary(k, b)]))
                .unwrap_or(0)
        })
        .collect();
    let max_slack = z[l.slack_start..].iter().fold(0.0f64, |m, &s| m.max(s));
    let references = flat_to_unicycle(&states, &inputs, initial_heading);
    MotionPlan {
        dt: config.dt,
        states,
        inputs,
        references,
        terminal: problem.terminal.clone(),
        objective: problem.miqp.qp.objective(z),
        max_slack,
        cells,
        stats,
    }
}

/// Plans from `x0` toward the lookahead point on `route` inside the local
/// free-space `partition`. `heading` seeds the reference heading at rest.
pub fn plan(
    x0: FlatState,
    heading: f64,
    route: &[Point2],
    partition: &ConvexPartition,
    config: &MpcConfig,
) -> Result<(PlanOutcome, MpcProblem), MpcError> {
    let reference = lookahead_reference(route, x0.position(), config.lookahead)?;
    let terminal = TerminalSpec {
        reference,
        deviation: regular_hexagon(config.hexagon_radius)?,
    };
    let problem = soften(
        &build_problem(x0, &terminal, partition, config)?,
        config.slack_weight,
    );
    let options = SolveOptions {
        j_max: config.j_max,
        iteration_limit: config.iteration_limit,
        ..SolveOptions::default()
    };
    let out = miqp::solve(&problem.miqp, &options)?;
    let stats = SolverStats {
        iterations: out.iterations,
        lower_bound: out.lower_bound,
        upper_bound: out.upper_bound,
        status: out.status,
    };
    let outcome = match out.status {
        SolveStatus::Optimal => {
            let z = out.incumbent.as_deref().expect("optimal has incumbent");
            PlanOutcome::Plan(extract_plan(&problem, z, config, heading, stats))
        }
        SolveStatus::BoundExceeded | SolveStatus::InfeasibleCertified => {
            PlanOutcome::ReplanRequested {
                lower_bound: out.lower_bound,
                iterations: out.iterations,
            }
        }
        SolveStatus::IterationLimit => PlanOutcome::IterationLimit {
            incumbent: out
                .incumbent
                .as_deref()
                .map(|z| extract_plan(&problem, z, config, heading, stats)),
            lower_bound: out.lower_bound,
            iterations: out.iterations,
        },
    };
    Ok((outcome, problem))
}
