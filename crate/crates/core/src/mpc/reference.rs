//! Terminal reference selection and flat-output to unicycle conversion.

use serde::{Deserialize, Serialize};

use super::{FlatState, MpcError};
use crate::geometry::Point2;

/// Below this speed the heading is held and the turn rate set to zero.
pub const ZERO_SPEED: f64 = 1e-3;

/// Closest point on a polyline: arc length and distance.
pub fn project_onto_polyline(route: &[Point2], q: Point2) -> Option<(f64, f64)> {
    let first = *route.first()?;
    let mut best = (0.0, first.distance(q));
    let mut s = 0.0;
    for w in route.windows(2) {
        let d = w[1] - w[0];
        let len = d.norm();
        if len > 0.0 {
            let t = ((q - w[0]).dot(d) / (len * len)).clamp(0.0, 1.0);
            let dist = w[0].lerp(w[1], t).distance(q);
            if dist < best.1 {
                best = (s + t * len, dist);
            }
        }
        s += len;
    }
    Some(best)
}

/// Point at arc length `s`, clamped to the polyline ends.
pub fn point_at_arc_length(route: &[Point2], s: f64) -> Option<Point2> {
    let mut acc = 0.0;
    for w in route.windows(2) {
        let len = w[0].distance(w[1]);
        if len > 0.0 && acc + len >= s {
            return Some(w[0].lerp(w[1], ((s - acc) / len).clamp(0.0, 1.0)));
        }
        acc += len;
    }
    route.last().copied()
}

/// Line-of-sight reference: the route point `distance` further along the
/// arc than the point closest to `q`, saturating at the route end.
pub fn lookahead_reference(route: &[Point2], q: Point2, distance: f64) -> Result<Point2, MpcError> {
    let (s, _) = project_onto_polyline(route, q).ok_or(MpcError::EmptyRoute)?;
    Ok(point_at_arc_length(route, s + distance).expect("nonempty route"))
}

/// Speed, heading and turn rate of a flat trajectory sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnicycleReference {
    pub v: f64,
    pub theta: f64,
    pub omega: f64,
}

/// Converts one flat sample; `None` when the speed is below [`ZERO_SPEED`].
pub fn unicycle_from_flat(vx: f64, vy: f64, ax: f64, ay: f64) -> Option<UnicycleReference> {
    let v2 = vx * vx + vy * vy;
    let v = v2.sqrt();
    if v < ZERO_SPEED {
        return None;
    }
    Some(UnicycleReference {
        v,
        theta: vy.atan2(vx),
        omega: (vx * ay - vy * ax) / v2,
    })
}

/// References at every knot. Zero-speed knots hold the previous heading
/// (`initial_heading` before the first moving knot) with zero turn rate.
/// The last knot uses zero acceleration.
pub fn flat_to_unicycle(
    states: &[FlatState],
    inputs: &[[f64; 2]],
    initial_heading: f64,
) -> Vec<UnicycleReference> {
    let mut theta = initial_heading;
    states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let [ax, ay] = inputs.get(k).copied().unwrap_or([0.0, 0.0]);
            match unicycle_from_flat(s.vx, s.vy, ax, ay) {
                Some(r) => {
                    theta = r.theta;
                    r
                }
                None => UnicycleReference {
                    v: (s.vx * s.vx + s.vy * s.vy).sqrt(),
                    theta,
                    omega: 0.0,
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn straight() -> Vec<Point2> {
        vec![Point2::new(0.0, 0.0), Point2::new(10.0, 0.0)]
    }

    #[test]
    fn lookahead_on_straight_route() {
        let p = lookahead_reference(&straight(), Point2::new(0.0, 0.0), 2.0).unwrap();
        assert_abs_diff_eq!(p.x, 2.0, epsilon = 1e-12);
        let end = lookahead_reference(&straight(), Point2::new(9.0, 0.3), 2.0).unwrap();
        assert_eq!(end, Point2::new(10.0, 0.0));
    }

    #[test]
    fn lookahead_follows_arc_length_on_l_route() {
        let route = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 5.0),
        ];
        let p = lookahead_reference(&route, Point2::new(0.5, 0.0), 2.0).unwrap();
        // 0.5 m left on the first leg, 1.5 m up the second.
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn empty_route_is_an_error() {
        assert!(matches!(
            lookahead_reference(&[], Point2::ORIGIN, 2.0),
            Err(MpcError::EmptyRoute)
        ));
    }

    #[test]
    fn three_four_five_and_turn_rate() {
        let r = unicycle_from_flat(0.3, 0.4, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(r.v, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.theta, 0.4f64.atan2(0.3), epsilon = 1e-15);
        let r = unicycle_from_flat(1.0, 0.0, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(r.omega, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn circle_has_constant_turn_rate() {
        let (radius, v) = (1.5, 0.4);
        let w = v / radius;
        for k in 0..20 {
            let t = 0.37 * k as f64;
            // Finite-difference velocity and acceleration of the circle.
            let pos = |t: f64| Point2::new(radius * (w * t).cos(), radius * (w * t).sin());
            let h = 1e-4;
            let vel = (pos(t + h) - pos(t - h)) * (0.5 / h);
            let acc = (pos(t + h) - pos(t) * 2.0 + pos(t - h)) * (1.0 / (h * h));
            let r = unicycle_from_flat(vel.x, vel.y, acc.x, acc.y).unwrap();
            assert_abs_diff_eq!(r.omega, w, epsilon = 1e-5);
            assert_abs_diff_eq!(r.v, v, epsilon = 1e-6);
        }
    }

    #[test]
    fn zero_speed_holds_heading() {
        let states = [
            FlatState::new(0.0, 0.0, 0.0, 0.0),
            FlatState::new(0.0, 0.0, 0.0, 0.2),
            FlatState::new(0.0, 0.1, 0.0, 0.0),
        ];
        let refs = flat_to_unicycle(&states, &[[0.0, 0.4], [0.0, -0.4]], 0.7);
        assert_eq!(refs[0].theta, 0.7);
        assert_eq!(refs[0].omega, 0.0);
        assert_abs_diff_eq!(refs[1].theta, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(refs[2].theta, refs[1].theta);
        assert_eq!(refs[2].omega, 0.0);
    }
}
