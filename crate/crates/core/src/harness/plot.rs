//! SVG rendering of a scenario and an episode log.

use std::fmt::Write;

use super::{EpisodeLog, LogRecord, Obstacle, Scenario};
use crate::geometry::Point2;

fn polyline(
    out: &mut String,
    id: Option<&str>,
    class: &str,
    points: impl Iterator<Item = [f64; 2]>,
) {
    let pts: Vec<String> = points.map(|p| format!("{:.4},{:.4}", p[0], p[1])).collect();
    if pts.is_empty() {
        return;
    }
    let id = id.map(|i| format!(" id=\"{i}\"")).unwrap_or_default();
    let _ = writeln!(
        out,
        "<polyline{id} class=\"{class}\" points=\"{}\"/>",
        pts.join(" ")
    );
}

fn polygon(out: &mut String, class: &str, o: &Obstacle) {
    let pts: Vec<String> = o
        .vertices
        .iter()
        .map(|p| format!("{:.4},{:.4}", p.x, p.y))
        .collect();
    let _ = writeln!(
        out,
        "<polygon class=\"{class}\" points=\"{}\"/>",
        pts.join(" ")
    );
}

fn circle(out: &mut String, class: &str, p: Point2, r: f64) {
    let _ = writeln!(
        out,
        "<circle class=\"{class}\" cx=\"{:.4}\" cy=\"{:.4}\" r=\"{r}\"/>",
        p.x, p.y
    );
}

/// World-coordinate SVG (y up) of the arena, obstacles, medial-axis chains,
/// every route version, the driven trajectory and re-plan locations.
pub fn render_svg(scenario: &Scenario, log: Option<&EpisodeLog>) -> String {
    let a = scenario.arena;
    let (w, h) = (a.max.x - a.min.x, a.max.y - a.min.y);
    let px = 100.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"{} {} {} {}\">",
        w * px,
        h * px,
        a.min.x,
        -a.max.y,
        w,
        h
    );
    out.push_str(
        "<style>\
         .arena{fill:#fff;stroke:#000;stroke-width:0.03}\
         .mapped{fill:#777}\
         .unmapped{fill:#d55}\
         .chain{fill:none;stroke:#9bd;stroke-width:0.015}\
         .route{fill:none;stroke:#27a;stroke-width:0.03;stroke-dasharray:0.08 0.05}\
         .trajectory{fill:none;stroke:#e80;stroke-width:0.03}\
         .replan{fill:#c00}\
         .start{fill:#2a2}\
         .goal{fill:#22a}\
         </style>\n",
    );
    out.push_str("<g transform=\"scale(1,-1)\">\n");
    let _ = writeln!(
        out,
        "<rect class=\"arena\" x=\"{}\" y=\"{}\" width=\"{w}\" height=\"{h}\"/>",
        a.min.x, a.min.y
    );
    for o in &scenario.mapped {
        polygon(&mut out, "mapped", o);
    }
    for o in &scenario.unmapped {
        polygon(&mut out, "unmapped", o);
    }
    if let Some(log) = log {
        for r in &log.records {
            match r {
                LogRecord::Graph { chains } => {
                    for c in chains {
                        polyline(&mut out, None, "chain", c.iter().copied());
                    }
                }
                LogRecord::Route { points, .. } => {
                    polyline(&mut out, None, "route", points.iter().copied());
                }
                _ => {}
            }
        }
        polyline(
            &mut out,
            Some("trajectory"),
            "trajectory",
            log.telemetry().map(|t| [t.x, t.y]),
        );
        let mut telemetry = log.telemetry().peekable();
        for e in log.replans() {
            // Position at the last telemetry sample not after the event.
            let mut at = [scenario.start.position.x, scenario.start.position.y];
            while let Some(t) = telemetry.peek() {
                if t.t > e.t + 1e-9 {
                    break;
                }
                at = [t.x, t.y];
                telemetry.next();
            }
            circle(&mut out, "replan", Point2::new(at[0], at[1]), 0.08);
        }
    }
    circle(&mut out, "start", scenario.start.position, 0.1);
    circle(&mut out, "goal", scenario.goal, 0.1);
    out.push_str("</g>\n</svg>\n");
    out
}
