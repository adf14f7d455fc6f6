//! Non-convex free space and its convex partition.
//!
//! Free space is the arena polygon minus the union of obstacle polygons,
//! computed with `geo` boolean operations. It is triangulated with a
//! constrained Delaunay triangulation (`spade`) whose constraint edges are the
//! free-space boundary; triangles whose centroid is outside free space are
//! dropped. The convex partition merges those triangles greedily across
//! inessential diagonals (Hertel-Mehlhorn).

use std::collections::HashMap;

use geo::{BooleanOps, Coord, LineString, MultiPolygon, Polygon};
use serde::{Deserialize, Serialize};
use spade::{ConstrainedDelaunayTriangulation, Triangulation};

use super::{signed_area, GeometryError, HPolytope, Point2, GEOMETRIC_TOLERANCE};

/// Box minus the union of obstacles, as a set of polygons with holes.
#[derive(Clone, Debug)]
pub struct FreeSpace {
    polygons: MultiPolygon<f64>,
}

/// A triangulated planar region: vertex positions plus counterclockwise
/// index triples.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Triangulated {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
}

fn to_geo_polygon(ring: &[Point2]) -> Polygon<f64> {
    let mut coords: Vec<Coord<f64>> = ring.iter().map(|p| Coord { x: p.x, y: p.y }).collect();
    if let Some(&first) = coords.first() {
        coords.push(first);
    }
    Polygon::new(LineString::new(coords), Vec::new())
}

fn ring_points(ls: &LineString<f64>) -> Vec<Point2> {
    let mut pts: Vec<Point2> = ls.coords().map(|c| Point2::new(c.x, c.y)).collect();
    if pts.len() > 1 && pts[0] == pts[pts.len() - 1] {
        pts.pop();
    }
    pts
}

impl FreeSpace {
    pub fn new(bounds: &HPolytope, obstacles: &[HPolytope]) -> Result<Self, GeometryError> {
        let outer = bounds.vertices()?;
        if outer.len() < 3 || signed_area(&outer) <= GEOMETRIC_TOLERANCE {
            return Ok(Self {
                polygons: MultiPolygon::new(Vec::new()),
            });
        }
        let mut holes: Vec<Polygon<f64>> = Vec::with_capacity(obstacles.len());
        for obstacle in obstacles {
            let verts = obstacle.vertices()?;
            if verts.len() < 3 || signed_area(&verts) <= GEOMETRIC_TOLERANCE {
                return Err(GeometryError::Degenerate);
            }
            holes.push(to_geo_polygon(&verts));
        }
        let mut region = MultiPolygon::new(vec![to_geo_polygon(&outer)]);
        if !holes.is_empty() {
            let blocked = geo::unary_union(holes.iter());
            region = region.difference(&blocked);
        }
        Ok(Self { polygons: region })
    }

    pub fn is_empty(&self) -> bool {
        self.area() <= GEOMETRIC_TOLERANCE
    }

    /// Every boundary ring (exteriors and holes), without repeated closing point.
    pub fn rings(&self) -> Vec<Vec<Point2>> {
        let mut out = Vec::new();
        for poly in &self.polygons {
            out.push(ring_points(poly.exterior()));
            for hole in poly.interiors() {
                out.push(ring_points(hole));
            }
        }
        out
    }

    pub fn area(&self) -> f64 {
        self.polygons
            .iter()
            .map(|poly| {
                signed_area(&ring_points(poly.exterior())).abs()
                    - poly
                        .interiors()
                        .iter()
                        .map(|h| signed_area(&ring_points(h)).abs())
                        .sum::<f64>()
            })
            .sum()
    }

    /// Even-odd point membership over all rings.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        for ring in self.rings() {
            let n = ring.len();
            for i in 0..n {
                let a = ring[i];
                let b = ring[(i + 1) % n];
                if (a.y > p.y) != (b.y > p.y) {
                    let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                    if p.x < x {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }

    /// Distance from `p` to the nearest boundary edge.
    pub fn boundary_distance(&self, p: Point2) -> f64 {
        let mut best = f64::INFINITY;
        for ring in self.rings() {
            let n = ring.len();
            for i in 0..n {
                best = best.min(point_segment_distance(p, ring[i], ring[(i + 1) % n]));
            }
        }
        best
    }

    /// Constrained Delaunay triangulation of the region.
    ///
    /// With `max_edge` set, boundary edges are subdivided so no constraint
    /// segment is longer than `max_edge`.
    pub fn triangulate(&self, max_edge: Option<f64>) -> Result<Triangulated, GeometryError> {
        let mut cdt: ConstrainedDelaunayTriangulation<spade::Point2<f64>> =
            ConstrainedDelaunayTriangulation::new();
        for ring in self.rings() {
            let pts = match max_edge {
                Some(h) if h > 0.0 => densify(&ring, h),
                _ => ring,
            };
            if pts.len() < 3 {
                continue;
            }
            let mut handles = Vec::with_capacity(pts.len());
            for p in &pts {
                let h = cdt
                    .insert(spade::Point2::new(p.x, p.y))
                    .map_err(|e| GeometryError::Clipping(format!("{e:?}")))?;
                handles.push(h);
            }
            for i in 0..handles.len() {
                let (a, b) = (handles[i], handles[(i + 1) % handles.len()]);
                if a != b {
                    cdt.try_add_constraint(a, b);
                }
            }
        }
        let vertices: Vec<Point2> = cdt
            .vertices()
            .map(|v| Point2::new(v.position().x, v.position().y))
            .collect();
        let mut triangles = Vec::new();
        for face in cdt.inner_faces() {
            let [a, b, c] = face.vertices().map(|v| v.fix().index());
            let (pa, pb, pc) = (vertices[a], vertices[b], vertices[c]);
            if (pb - pa).cross(pc - pa).abs() <= 1e-14 {
                continue;
            }
            let centroid = (pa + pb + pc) * (1.0 / 3.0);
            if self.contains(centroid) {
                triangles.push([a, b, c]);
            }
        }
        Ok(Triangulated {
            vertices,
            triangles,
        })
    }
}

pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 0.0 {
        return p.distance(a);
    }
    let s = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * s)
}

fn densify(ring: &[Point2], max_edge: f64) -> Vec<Point2> {
    let n = ring.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let pieces = ((a.distance(b) / max_edge).ceil() as usize).max(1);
        for k in 0..pieces {
            out.push(a.lerp(b, k as f64 / pieces as f64));
        }
    }
    out
}

/// Convex cells covering free space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPartition {
    pub cells: Vec<HPolytope>,
    /// Counterclockwise vertex list of each cell, same order as `cells`.
    pub polygons: Vec<Vec<Point2>>,
    pub bounding_box: HPolytope,
}

impl ConvexPartition {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn total_area(&self) -> f64 {
        self.polygons.iter().map(|p| signed_area(p)).sum()
    }

    /// Index of the first cell containing `p`.
    pub fn locate(&self, p: Point2, tol: f64) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(p, tol))
    }
}

/// Triangulates `bounds` minus the obstacles and merges triangles into convex
/// cells. An empty free space gives an empty partition.
pub fn partition_free_space(
    bounds: &HPolytope,
    obstacles: &[HPolytope],
) -> Result<ConvexPartition, GeometryError> {
    let free = FreeSpace::new(bounds, obstacles)?;
    let bounding_box = bounds.clone();
    if obstacles.is_empty() {
        let verts = bounds.vertices()?;
        if verts.len() < 3 {
            return Ok(ConvexPartition {
                cells: Vec::new(),
                polygons: Vec::new(),
                bounding_box,
            });
        }
        return Ok(ConvexPartition {
            cells: vec![bounds.clone()],
            polygons: vec![verts],
            bounding_box,
        });
    }
    if free.is_empty() {
        return Ok(ConvexPartition {
            cells: Vec::new(),
            polygons: Vec::new(),
            bounding_box,
        });
    }
    let tri = free.triangulate(None)?;
    let merged = hertel_mehlhorn(&tri.vertices, &tri.triangles);
    let mut cells = Vec::with_capacity(merged.len());
    let mut polygons = Vec::with_capacity(merged.len());
    for poly in merged {
        let pts: Vec<Point2> = poly.iter().map(|&i| tri.vertices[i]).collect();
        match HPolytope::from_vertices(&pts) {
            Ok(cell) => {
                polygons.push(cell.vertices()?);
                cells.push(cell);
            }
            Err(GeometryError::Degenerate) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(ConvexPartition {
        cells,
        polygons,
        bounding_box,
    })
}

fn is_convex_corner(prev: Point2, at: Point2, next: Point2) -> bool {
    let scale = (at - prev).norm().max((next - at).norm()).max(1.0);
    (at - prev).cross(next - at) >= -1e-12 * scale
}

/// Greedy merge of counterclockwise triangles across shared diagonals while
/// the union stays convex. Returns index cycles.
pub fn hertel_mehlhorn(vertices: &[Point2], triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut polys: Vec<Option<Vec<usize>>> = triangles.iter().map(|t| Some(t.to_vec())).collect();
    let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (pi, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            edge_owner.insert((t[k], t[(k + 1) % 3]), pi);
        }
    }

    for p1 in 0..polys.len() {
        let mut k = 0;
        loop {
            let Some(poly1) = polys[p1].as_ref() else {
                break;
            };
            if k >= poly1.len() {
                break;
            }
            let n1 = poly1.len();
            let a = poly1[k];
            let b = poly1[(k + 1) % n1];
            let Some(&p2) = edge_owner.get(&(b, a)) else {
                k += 1;
                continue;
            };
            if p2 == p1 {
                k += 1;
                continue;
            }
            let poly2 = polys[p2].as_ref().expect("edge owner is live");
            let n2 = poly2.len();
            let j = poly2
                .iter()
                .position(|&v| v == b)
                .expect("shared edge start in partner");
            debug_assert_eq!(poly2[(j + 1) % n2], a);

            // Corner at a: previous vertex from poly1, next from poly2.
            let a_prev = vertices[poly1[(k + n1 - 1) % n1]];
            let a_next = vertices[poly2[(j + 2) % n2]];
            // Corner at b: previous vertex from poly2, next from poly1.
            let b_prev = vertices[poly2[(j + n2 - 1) % n2]];
            let b_next = vertices[poly1[(k + 2) % n1]];
            if !is_convex_corner(a_prev, vertices[a], a_next)
                || !is_convex_corner(b_prev, vertices[b], b_next)
            {
                k += 1;
                continue;
            }

            let mut merged = Vec::with_capacity(n1 + n2 - 2);
            merged.extend(poly1.iter().cycle().skip(k + 1).take(n1));
            merged.extend(poly2.iter().cycle().skip(j + 2).take(n2 - 2));

            let old1 = polys[p1].take().unwrap();
            let old2 = polys[p2].take().unwrap();
            for poly in [&old1, &old2] {
                for i in 0..poly.len() {
                    edge_owner.remove(&(poly[i], poly[(i + 1) % poly.len()]));
                }
            }
            for i in 0..merged.len() {
                edge_owner.insert((merged[i], merged[(i + 1) % merged.len()]), p1);
            }
            polys[p1] = Some(merged);
            k = 0;
        }
    }
    polys.into_iter().flatten().collect()
}
