//! Local free-space partition around the vehicle.

use super::{HarnessError, Obstacle, RunConfig, Scenario};
use crate::geometry::{bloat, partition_free_space, ConvexPartition, HPolytope, Point2};
use crate::mpc::MpcError;

/// Corners of the axis-aligned square of side `width` centered at `center`,
/// clipped to the arena shrunk by `margin`. `None` when nothing is left.
pub fn local_bounds(
    scenario: &Scenario,
    center: Point2,
    width: f64,
    margin: f64,
) -> Option<(Point2, Point2)> {
    let arena = scenario.arena.shrunk(margin);
    let h = 0.5 * width;
    let lo = Point2::new(
        (center.x - h).max(arena.min.x),
        (center.y - h).max(arena.min.y),
    );
    let hi = Point2::new(
        (center.x + h).min(arena.max.x),
        (center.y + h).min(arena.max.y),
    );
    (lo.x < hi.x && lo.y < hi.y).then_some((lo, hi))
}

/// Partition of the local box around `center` minus every obstacle
/// (mapped and unmapped) that reaches it, each bloated by the configured
/// margin.
pub fn local_map(
    scenario: &Scenario,
    center: Point2,
    config: &RunConfig,
) -> Result<ConvexPartition, HarnessError> {
    let margin = config.bloat_margin;
    let (blo, bhi) = local_bounds(scenario, center, config.local_box, margin)
        .ok_or(HarnessError::Mpc(MpcError::EmptyPartition))?;
    let mut obstacles = Vec::new();
    for o in scenario.obstacles() {
        let b = bloat(&o.polytope()?, margin)?;
        // Mitered corners of acute vertices reach past the margin.
        let (lo, hi) = Obstacle {
            vertices: b.vertices()?,
        }
        .bounds();
        if lo.x < bhi.x && hi.x > blo.x && lo.y < bhi.y && hi.y > blo.y {
            obstacles.push(b);
        }
    }
    Ok(partition_free_space(
        &HPolytope::from_box(blo, bhi),
        &obstacles,
    )?)
}
