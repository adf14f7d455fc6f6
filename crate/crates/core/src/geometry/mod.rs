//! Convex-set primitives in the plane.
//!
//! Halfspace polytopes (`n_i · p <= d_i`) describe obstacles, the arena and
//! the local-map cells; zonotopes describe the terminal deviation set. The
//! [`region`] submodule handles the non-convex free space (box minus the union
//! of obstacles) and its convex partition.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod region;

pub use region::{partition_free_space, ConvexPartition, FreeSpace};

/// Coincident-vertex tolerance in meters.
pub const GEOMETRIC_TOLERANCE: f64 = 1e-9;

/// Side length of the square used to clip halfspace sets into vertex lists.
const CLIP_EXTENT: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("halfspace data contains non-finite values")]
    NonFinite,
    #[error("normal/offset count mismatch ({normals} normals, {offsets} offsets)")]
    CountMismatch { normals: usize, offsets: usize },
    #[error("zero-length normal in halfspace {0}")]
    ZeroNormal(usize),
    #[error("polygon is degenerate (fewer than 3 distinct vertices or zero area)")]
    Degenerate,
    #[error("polygon is not convex")]
    NotConvex,
    #[error("circumradius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("set is unbounded")]
    Unbounded,
    #[error("boolean polygon operation failed: {0}")]
    Clipping(String),
}

/// A point (or vector) in the plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise rotation by 90 degrees.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point2, s: f64) -> Point2 {
        self + (other - self) * s
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn normalized(self) -> Option<Point2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4})", self.x, self.y)
    }
}

/// Signed area of a closed vertex ring (positive for counterclockwise order).
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| ring[i].cross(ring[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

/// Intersection of halfspaces `n_i · p <= d_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPolytope {
    normals: Vec<Point2>,
    offsets: Vec<f64>,
}

impl HPolytope {
    pub fn new(normals: Vec<Point2>, offsets: Vec<f64>) -> Result<Self, GeometryError> {
        if normals.len() != offsets.len() {
            return Err(GeometryError::CountMismatch {
                normals: normals.len(),
                offsets: offsets.len(),
            });
        }
        if normals.iter().any(|n| !n.is_finite()) || offsets.iter().any(|d| d.is_nan()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { normals, offsets })
    }

    /// Axis-aligned box `[min.x, max.x] x [min.y, max.y]`.
    pub fn from_box(min: Point2, max: Point2) -> Self {
        Self {
            normals: vec![
                Point2::new(1.0, 0.0),
                Point2::new(0.0, 1.0),
                Point2::new(-1.0, 0.0),
                Point2::new(0.0, -1.0),
            ],
            offsets: vec![max.x, max.y, -min.x, -min.y],
        }
    }

    /// Builds the halfspace form of a convex polygon given counterclockwise.
    ///
    /// Duplicate and collinear vertices are dropped. Clockwise input is
    /// reversed rather than rejected.
    pub fn from_vertices(vertices: &[Point2]) -> Result<Self, GeometryError> {
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let mut ring = simplify_ring(vertices);
        if ring.len() < 3 {
            return Err(GeometryError::Degenerate);
        }
        let area = signed_area(&ring);
        if area.abs() <= GEOMETRIC_TOLERANCE {
            return Err(GeometryError::Degenerate);
        }
        if area < 0.0 {
            ring.reverse();
        }
        let n = ring.len();
        let scale = ring.iter().map(|p| p.norm()).fold(1.0, f64::max);
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            let c = ring[(i + 2) % n];
            if (b - a).cross(c - b) < -GEOMETRIC_TOLERANCE * scale {
                return Err(GeometryError::NotConvex);
            }
        }
        let mut normals = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n);
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            // Outward normal of a counterclockwise edge.
            let normal = Point2::new(b.y - a.y, a.x - b.x)
                .normalized()
                .ok_or(GeometryError::Degenerate)?;
            normals.push(normal);
            offsets.push(normal.dot(a));
        }
        Ok(Self { normals, offsets })
    }

    pub fn normals(&self) -> &[Point2] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn halfspaces(&self) -> impl Iterator<Item = (Point2, f64)> + '_ {
        self.normals
            .iter()
            .copied()
            .zip(self.offsets.iter().copied())
    }

    /// True iff `n_i · p <= d_i + tol` for every halfspace.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.halfspaces().all(|(n, d)| n.dot(p) <= d + tol)
    }

    /// Largest violation `max_i (n_i · p - d_i)`; nonpositive inside.
    pub fn violation(&self, p: Point2) -> f64 {
        self.halfspaces()
            .map(|(n, d)| n.dot(p) - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same set with every normal scaled to unit length.
    pub fn normalized(&self) -> Result<Self, GeometryError> {
        let mut normals = Vec::with_capacity(self.len());
        let mut offsets = Vec::with_capacity(self.len());
        for (i, (n, d)) in self.halfspaces().enumerate() {
            let len = n.norm();
            if len <= 0.0 {
                return Err(GeometryError::ZeroNormal(i));
            }
            normals.push(n * (1.0 / len));
            offsets.push(d / len);
        }
        Ok(Self { normals, offsets })
    }

    /// Counterclockwise vertex list of the (bounded) set.
    ///
    /// Returns an empty list for empty sets. Sets reaching the clipping
    /// extent are reported as unbounded.
    pub fn vertices(&self) -> Result<Vec<Point2>, GeometryError> {
        let h = CLIP_EXTENT;
        let rough = self.clip_from(Point2::new(-h, -h), Point2::new(h, h));
        if rough.is_empty() {
            return Ok(rough);
        }
        if rough
            .iter()
            .any(|p| p.x.abs() >= 0.5 * h || p.y.abs() >= 0.5 * h)
        {
            return Err(GeometryError::Unbounded);
        }
        // Second pass from a tight box so rounding scales with the set size.
        let (mut lo, mut hi) = (rough[0], rough[0]);
        for p in &rough {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let pad = 1e-3 * (hi - lo).norm().max(1e-6);
        let ring = self.clip_from(lo - Point2::new(pad, pad), hi + Point2::new(pad, pad));
        Ok(simplify_ring(&ring))
    }

    fn clip_from(&self, lo: Point2, hi: Point2) -> Vec<Point2> {
        let mut ring = vec![lo, Point2::new(hi.x, lo.y), hi, Point2::new(lo.x, hi.y)];
        for (n, d) in self.halfspaces() {
            ring = clip_halfplane(&ring, n, d);
            if ring.is_empty() {
                break;
            }
        }
        ring
    }

    pub fn area(&self) -> f64 {
        self.vertices().map(|v| signed_area(&v)).unwrap_or(0.0)
    }

    /// Support function `h(d) = max_{p in P} d · p`.
    pub fn support(&self, direction: Point2) -> Result<f64, GeometryError> {
        Ok(self
            .vertices()?
            .into_iter()
            .map(|v| direction.dot(v))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn translated(&self, offset: Point2) -> Self {
        Self {
            normals: self.normals.clone(),
            offsets: self.halfspaces().map(|(n, d)| d + n.dot(offset)).collect(),
        }
    }

    /// Outward offset of every face by `margin` (sharp corners).
    pub fn bloat(&self, margin: f64) -> Result<Self, GeometryError> {
        bloat(self, margin)
    }
}

/// Membership test with tolerance; see [`HPolytope::contains`].
pub fn contains(poly: &HPolytope, p: Point2, tol: f64) -> bool {
    poly.contains(p, tol)
}

/// Increases every offset by `margin` after normalizing the normals.
///
/// The result contains the Minkowski sum of the obstacle with a disk of
/// radius `margin`; at vertices it is an outer approximation.
pub fn bloat(obstacle: &HPolytope, margin: f64) -> Result<HPolytope, GeometryError> {
    let mut out = obstacle.normalized()?;
    let margin = margin.max(0.0);
    for d in &mut out.offsets {
        *d += margin;
    }
    Ok(out)
}

/// Sutherland-Hodgman clip of a convex ring against `n · p <= d`.
fn clip_halfplane(ring: &[Point2], n: Point2, d: f64) -> Vec<Point2> {
    let mut out = Vec::with_capacity(ring.len() + 1);
    let len = ring.len();
    for i in 0..len {
        let a = ring[i];
        let b = ring[(i + 1) % len];
        let fa = n.dot(a) - d;
        let fb = n.dot(b) - d;
        if fa <= 0.0 {
            out.push(a);
        }
        if (fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0) {
            let s = fa / (fa - fb);
            out.push(a.lerp(b, s));
        }
    }
    out
}

/// Drops repeated and collinear vertices from a closed ring.
pub(crate) fn simplify_ring(ring: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::with_capacity(ring.len());
    for &p in ring {
        if pts
            .last()
            .is_none_or(|q: &Point2| q.distance(p) > GEOMETRIC_TOLERANCE)
        {
            pts.push(p);
        }
    }
    while pts.len() > 1 && pts[0].distance(pts[pts.len() - 1]) <= GEOMETRIC_TOLERANCE {
        pts.pop();
    }
    let mut changed = true;
    while changed && pts.len() >= 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let a = pts[(i + n - 1) % n];
            let b = pts[i];
            let c = pts[(i + 1) % n];
            let scale = (b - a).norm().max((c - b).norm()).max(1.0);
            if (b - a).cross(c - b).abs() <= GEOMETRIC_TOLERANCE * scale
                && (b - a).dot(c - b) >= 0.0
            {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

/// `center ⊕ { Σ ξ_i g_i : ξ_i ∈ [-1, 1] }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zonotope {
    pub center: Point2,
    pub generators: Vec<Point2>,
}

impl Zonotope {
    pub fn new(center: Point2, generators: Vec<Point2>) -> Self {
        Self { center, generators }
    }

    pub fn point(center: Point2) -> Self {
        Self::new(center, Vec::new())
    }

    pub fn support(&self, direction: Point2) -> f64 {
        direction.dot(self.center)
            + self
                .generators
                .iter()
                .map(|g| direction.dot(*g).abs())
                .sum::<f64>()
    }

    pub fn translated(&self, offset: Point2) -> Self {
        Self::new(self.center + offset, self.generators.clone())
    }

    pub fn minkowski_sum(&self, other: &Zonotope) -> Zonotope {
        minkowski_sum(self, other)
    }

    /// Exact halfspace form.
    ///
    /// Each distinct generator direction contributes the two facets
    /// perpendicular to it. Degenerate zonotopes (points, segments) also get
    /// facets along their generator direction so the set stays bounded.
    pub fn to_hpolytope(&self) -> HPolytope {
        let mut dirs: Vec<Point2> = Vec::new();
        for g in &self.generators {
            let Some(u) = g.normalized() else { continue };
            let parallel = dirs.iter().any(|d| d.cross(u).abs() <= 1e-12);
            if !parallel {
                dirs.push(u);
            }
        }
        let mut facet_normals: Vec<Point2> = dirs.iter().map(|d| d.perp()).collect();
        match dirs.len() {
            0 => facet_normals = vec![Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
            1 => facet_normals.push(dirs[0]),
            _ => {}
        }
        let mut normals = Vec::with_capacity(2 * facet_normals.len());
        let mut offsets = Vec::with_capacity(2 * facet_normals.len());
        for n in facet_normals {
            for s in [n, -n] {
                normals.push(s);
                offsets.push(self.support(s));
            }
        }
        HPolytope { normals, offsets }
    }

    pub fn vertices(&self) -> Vec<Point2> {
        self.to_hpolytope().vertices().unwrap_or_default()
    }
}

/// Center sum and generator concatenation.
pub fn minkowski_sum(a: &Zonotope, b: &Zonotope) -> Zonotope {
    let mut generators = a.generators.clone();
    generators.extend_from_slice(&b.generators);
    Zonotope::new(a.center + b.center, generators)
}

/// Regular hexagon centered at the origin with a vertex on the +x axis.
///
/// Three generators of half-length `r/2` at 0, 60 and 120 degrees.
pub fn regular_hexagon(circumradius: f64) -> Result<Zonotope, GeometryError> {
    if !(circumradius > 0.0) || !circumradius.is_finite() {
        return Err(GeometryError::NonPositiveRadius(circumradius));
    }
    let h = 0.5 * circumradius;
    let generators = (0..3)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_3 * k as f64;
            Point2::new(h * a.cos(), h * a.sin())
        })
        .collect();
    Ok(Zonotope::new(Point2::ORIGIN, generators))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_box() -> HPolytope {
        HPolytope::from_box(Point2::new(-1.0, -1.0), Point2::new(1.0, 1.0))
    }

    #[test]
    fn contains_interior_boundary_and_outside() {
        let b = unit_box();
        assert!(contains(&b, Point2::new(0.0, 0.0), 0.0));
        assert!(contains(&b, Point2::new(1.0, 0.0), 0.0));
        assert!(!contains(&b, Point2::new(1.001, 0.0), 1e-6));
    }

    #[test]
    fn minkowski_of_points_and_translation() {
        let a = Zonotope::point(Point2::new(1.0, 2.0));
        let b = Zonotope::point(Point2::new(3.0, 4.0));
        let s = minkowski_sum(&a, &b);
        assert_eq!(s.center, Point2::new(4.0, 6.0));
        assert!(s.generators.is_empty());

        let sq = Zonotope::new(
            Point2::ORIGIN,
            vec![Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
        );
        let t = minkowski_sum(&sq, &Zonotope::point(Point2::new(5.0, 0.0)));
        assert_eq!(t.center, Point2::new(5.0, 0.0));
        assert_eq!(t.generators, sq.generators);
    }

    #[test]
    fn minkowski_square_support_half_width_two() {
        let sq = Zonotope::new(
            Point2::ORIGIN,
            vec![Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)],
        );
        let s = minkowski_sum(&sq, &sq);
        // h(d) = d·c + Σ|d·g_i| evaluated directly on the generator list.
        let d = Point2::new(1.0, 0.0);
        let oracle = |z: &Zonotope, d: Point2| {
            d.dot(z.center) + z.generators.iter().map(|g| d.dot(*g).abs()).sum::<f64>()
        };
        assert_abs_diff_eq!(oracle(&s, d), 2.0);
        assert_abs_diff_eq!(oracle(&s, d) + oracle(&s, -d), 4.0);
    }

    fn sign_pattern_hull(z: &Zonotope) -> Vec<Point2> {
        let m = z.generators.len();
        let mut pts = Vec::new();
        for mask in 0..(1u32 << m) {
            let mut p = z.center;
            for (i, g) in z.generators.iter().enumerate() {
                p += if mask & (1 << i) != 0 { *g } else { -*g };
            }
            pts.push(p);
        }
        // Extreme points: those not in the convex hull of the others, found
        // by checking for a strictly separating direction among 720 samples.
        let mut out: Vec<Point2> = Vec::new();
        for k in 0..720 {
            let a = k as f64 * std::f64::consts::PI / 360.0;
            let d = Point2::new(a.cos(), a.sin());
            let best = pts
                .iter()
                .copied()
                .max_by(|p, q| d.dot(*p).total_cmp(&d.dot(*q)))
                .unwrap();
            if !out.iter().any(|q| q.distance(best) < 1e-9) {
                out.push(best);
            }
        }
        out
    }

    #[test]
    fn hexagon_vertices_on_circumcircle() {
        let hex = regular_hexagon(1.0).unwrap();
        assert_eq!(hex.generators.len(), 3);
        let verts = sign_pattern_hull(&hex);
        assert_eq!(verts.len(), 6);
        for v in &verts {
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(hex.vertices().len(), 6);
    }

    #[test]
    fn hexagon_width_bounds_and_homogeneity() {
        let hex = regular_hexagon(1.0).unwrap();
        for k in 0..360 {
            let a = (k as f64).to_radians();
            let d = Point2::new(a.cos(), a.sin());
            let w = hex.support(d) + hex.support(-d);
            assert!(w >= 3f64.sqrt() - 1e-12 && w <= 2.0 + 1e-12, "width {w}");
        }
        let big = regular_hexagon(2.0).unwrap();
        for (g1, g2) in hex.generators.iter().zip(&big.generators) {
            assert_abs_diff_eq!(g2.x, 2.0 * g1.x, epsilon = 1e-15);
            assert_abs_diff_eq!(g2.y, 2.0 * g1.y, epsilon = 1e-15);
        }
        assert!(regular_hexagon(0.0).is_err());
        assert!(regular_hexagon(-1.0).is_err());
    }

    #[test]
    fn bloat_zero_and_box() {
        let b = unit_box();
        assert_eq!(bloat(&b, 0.0).unwrap(), b);
        let big = bloat(&b, 0.1).unwrap();
        assert_eq!(big.offsets(), &[1.1, 1.1, 1.1, 1.1]);
    }

    #[test]
    fn bloat_normalizes_scaled_normals() {
        let scaled = HPolytope::new(
            vec![
                Point2::new(3.0, 0.0),
                Point2::new(-2.0, 0.0),
                Point2::new(0.0, 1.0),
                Point2::new(0.0, -5.0),
            ],
            vec![3.0, 2.0, 1.0, 5.0],
        )
        .unwrap();
        let b = bloat(&scaled, 0.5).unwrap();
        assert!(b.contains(Point2::new(1.5, 1.5), 1e-12));
        assert!(!b.contains(Point2::new(1.51, 0.0), 1e-12));
    }

    #[test]
    fn bloat_triangle_keeps_margin_from_vertices() {
        let tri = HPolytope::from_vertices(&[
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(0.5, 1.5),
        ])
        .unwrap();
        let original = tri.vertices().unwrap();
        let grown = bloat(&tri, 0.2).unwrap().vertices().unwrap();
        // Sample the new boundary densely; each original vertex must be at
        // least 0.2 away from every sample.
        let n = grown.len();
        for i in 0..n {
            let a = grown[i];
            let b = grown[(i + 1) % n];
            for s in 0..=200 {
                let p = a.lerp(b, s as f64 / 200.0);
                for v in &original {
                    assert!(p.distance(*v) >= 0.2 - 1e-9);
                }
            }
        }
    }

    #[test]
    fn from_vertices_roundtrip_and_errors() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.5),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let p = HPolytope::from_vertices(&sq).unwrap();
        assert_eq!(p.len(), 4);
        assert_abs_diff_eq!(p.area(), 1.0, epsilon = 1e-12);
        let mut cw = sq.to_vec();
        cw.reverse();
        assert_abs_diff_eq!(
            HPolytope::from_vertices(&cw).unwrap().area(),
            1.0,
            epsilon = 1e-12
        );
        assert_eq!(
            HPolytope::from_vertices(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]),
            Err(GeometryError::Degenerate)
        );
        let dart = [
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 0.3),
            Point2::new(1.0, 2.0),
        ];
        assert_eq!(
            HPolytope::from_vertices(&dart),
            Err(GeometryError::NotConvex)
        );
    }

    #[test]
    fn unbounded_and_empty_sets() {
        let half = HPolytope::new(vec![Point2::new(1.0, 0.0)], vec![0.0]).unwrap();
        assert_eq!(half.vertices(), Err(GeometryError::Unbounded));
        let empty = HPolytope::new(
            vec![Point2::new(1.0, 0.0), Point2::new(-1.0, 0.0)],
            vec![-1.0, -1.0],
        )
        .unwrap();
        assert!(empty.vertices().unwrap().is_empty());
        assert!(HPolytope::new(vec![Point2::new(f64::NAN, 0.0)], vec![0.0]).is_err());
    }

    #[test]
    fn degenerate_zonotopes_stay_bounded() {
        let pt = Zonotope::point(Point2::new(1.0, 2.0)).to_hpolytope();
        assert!(pt.contains(Point2::new(1.0, 2.0), 1e-12));
        assert!(!pt.contains(Point2::new(1.0, 2.1), 1e-12));
        let seg = Zonotope::new(Point2::ORIGIN, vec![Point2::new(1.0, 1.0)]).to_hpolytope();
        assert_abs_diff_eq!(
            seg.support(Point2::new(1.0, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }
}
