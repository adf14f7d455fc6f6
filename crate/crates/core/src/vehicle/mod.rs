//! Unicycle plant with first-order speed and turn-rate lags, and the
//! path-following controller that tracks motion plans.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::mpc::{unicycle_from_flat, MotionPlan, UnicycleReference};

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnicycleState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

impl UnicycleState {
    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.v, self.omega]
            .iter()
            .all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSetpoint {
    pub v_cmd: f64,
    pub omega_cmd: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// Speed lag, seconds.
    pub tau_v: f64,
    /// Turn-rate lag, seconds.
    pub tau_omega: f64,
    /// Setpoint limits: v ∈ [0, v_limit], |ω| ≤ omega_limit.
    pub v_limit: f64,
    pub omega_limit: f64,
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            tau_v: 0.2,
            tau_omega: 0.3,
            v_limit: 0.6,
            omega_limit: 2.0 * PI,
        }
    }
}

impl ActuatorSetpoint {
    pub fn saturated(self, plant: &PlantParams) -> Self {
        Self {
            v_cmd: self.v_cmd.clamp(0.0, plant.v_limit),
            omega_cmd: self.omega_cmd.clamp(-plant.omega_limit, plant.omega_limit),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerGains {
    pub k_t: f64,
    pub k_n: f64,
    pub k_theta: f64,
    /// Speed floor in the steering arctangent, m/s.
    pub v_floor: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            k_t: 1.5,
            k_n: 0.6,
            k_theta: 1.9,
            v_floor: 0.05,
        }
    }
}

fn derivative(s: &UnicycleState, u: &ActuatorSetpoint, tau_v: f64, tau_omega: f64) -> [f64; 5] {
    [
        s.v * s.theta.cos(),
        s.v * s.theta.sin(),
        s.omega,
        (u.v_cmd - s.v) / tau_v,
        (u.omega_cmd - s.omega) / tau_omega,
    ]
}

fn offset(s: &UnicycleState, d: &[f64; 5], h: f64) -> UnicycleState {
    UnicycleState {
        x: s.x + h * d[0],
        y: s.y + h * d[1],
        theta: s.theta + h * d[2],
        v: s.v + h * d[3],
        omega: s.omega + h * d[4],
    }
}

/// One RK4 step of the plant with the setpoint held. `dt` should not
/// exceed 0.02 s.
pub fn step(
    state: &UnicycleState,
    setpoint: &ActuatorSetpoint,
    dt: f64,
    tau_v: f64,
    tau_omega: f64,
) -> UnicycleState {
    let f = |s: &UnicycleState| derivative(s, setpoint, tau_v, tau_omega);
    let k1 = f(state);
    let k2 = f(&offset(state, &k1, 0.5 * dt));
    let k3 = f(&offset(state, &k2, 0.5 * dt));
    let k4 = f(&offset(state, &k3, dt));
    let mut d = [0.0; 5];
    for i in 0..5 {
        d[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    let mut next = offset(state, &d, dt);
    next.theta = wrap_angle(next.theta);
    next
}

/// Tangential and normal components of `reference_point − p` in the frame
/// of heading `theta_r`.
pub fn path_errors(p: Point2, reference_point: Point2, theta_r: f64) -> (f64, f64) {
    let e = reference_point - p;
    let t = Point2::new(theta_r.cos(), theta_r.sin());
    (e.dot(t), e.dot(t.perp()))
}

/// Path-following control law; the result is not saturated.
pub fn control(
    state: &UnicycleState,
    reference_point: Point2,
    reference: &UnicycleReference,
    gains: &ControllerGains,
) -> ActuatorSetpoint {
    let (e_t, e_n) = path_errors(state.position(), reference_point, reference.theta);
    let v_cmd = gains.k_t * e_t * (reference.theta - state.theta).cos() + reference.v;
    let theta_cmd = (gains.k_n * e_n / state.v.max(gains.v_floor)).atan() + reference.theta;
    let omega_cmd = gains.k_theta * wrap_angle(theta_cmd - state.theta) + reference.omega;
    ActuatorSetpoint { v_cmd, omega_cmd }
}

/// Reference position and unicycle reference of a plan `t` seconds after
/// its start, from the exact piecewise-constant-acceleration trajectory.
/// Below [`crate::mpc::ZERO_SPEED`] the heading is taken from the plan's
/// knot references and the turn rate is zero.
pub fn plan_reference(plan: &MotionPlan, t: f64) -> (Point2, UnicycleReference) {
    let (s, a) = plan.sample(t);
    let r = unicycle_from_flat(s.vx, s.vy, a[0], a[1]).unwrap_or_else(|| {
        let k = ((t.max(0.0) / plan.dt).floor() as usize).min(plan.references.len() - 1);
        UnicycleReference {
            v: (s.vx * s.vx + s.vy * s.vy).sqrt(),
            theta: plan.references[k].theta,
            omega: 0.0,
        }
    });
    (s.position(), r)
}

/// Plant and controller with a zero-order-hold control loop.
#[derive(Clone, Debug, PartialEq)]
pub struct Vehicle {
    pub state: UnicycleState,
    pub setpoint: ActuatorSetpoint,
    pub plant: PlantParams,
    pub gains: ControllerGains,
    /// Plant integration step, seconds.
    pub dt: f64,
    /// Plant steps per controller update.
    pub control_every: usize,
    ticks: usize,
}

impl Vehicle {
    /// 100 Hz plant, 50 Hz controller.
    pub fn new(state: UnicycleState, plant: PlantParams, gains: ControllerGains) -> Self {
        Self {
            state,
            setpoint: ActuatorSetpoint::default(),
            plant,
            gains,
            dt: 0.01,
            control_every: 2,
            ticks: 0,
        }
    }

    pub fn time(&self) -> f64 {
        self.ticks as f64 * self.dt
    }

    /// Advances one plant step. `reference` is queried at the current time
    /// on controller ticks; `None` commands a stop.
    pub fn advance(&mut self, reference: impl FnOnce(f64) -> Option<(Point2, UnicycleReference)>) {
        if self.ticks % self.control_every == 0 {
            self.setpoint = match reference(self.time()) {
                Some((p, r)) => control(&self.state, p, &r, &self.gains).saturated(&self.plant),
                None => ActuatorSetpoint::default(),
            };
        }
        self.state = step(
            &self.state,
            &self.setpoint,
            self.dt,
            self.plant.tau_v,
            self.plant.tau_omega,
        );
        self.ticks += 1;
    }
}
