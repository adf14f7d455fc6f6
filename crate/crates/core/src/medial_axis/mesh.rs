//! Triangle mesh of free space with neighbor lists and circumcenters.

use std::cell::Cell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::MedialAxisError;
use crate::geometry::{FreeSpace, HPolytope, Point2};

thread_local! {
    static TRIANGULATIONS: Cell<usize> = const { Cell::new(0) };
}

/// Number of free-space triangulations performed on this thread.
pub fn triangulation_count() -> usize {
    TRIANGULATIONS.with(|c| c.get())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangulationMesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    /// Triangles sharing a side, ascending.
    pub neighbors: Vec<Vec<usize>>,
    pub circumcenters: Vec<Point2>,
}

pub fn circumcenter(a: Point2, b: Point2, c: Point2) -> Option<Point2> {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    if d.abs() <= 1e-14 * (ab.norm() * ac.norm()).max(1e-300) {
        return None;
    }
    let (b2, c2) = (ab.dot(ab), ac.dot(ac));
    let ux = (ac.y * b2 - ab.y * c2) / d;
    let uy = (ab.x * c2 - ac.x * b2) / d;
    Some(Point2::new(a.x + ux, a.y + uy))
}

/// Constrained Delaunay triangulation of `bounds` minus `obstacles`.
///
/// `max_edge` subdivides boundary edges before triangulating.
pub fn triangulate(
    bounds: &HPolytope,
    obstacles: &[HPolytope],
    max_edge: Option<f64>,
) -> Result<TriangulationMesh, MedialAxisError> {
    TRIANGULATIONS.with(|c| c.set(c.get() + 1));
    let free = FreeSpace::new(bounds, obstacles)?;
    let tri = free.triangulate(max_edge)?;
    TriangulationMesh::from_triangles(tri.vertices, tri.triangles)
}

impl TriangulationMesh {
    /// Builds neighbor lists (shared sides) and circumcenters.
    pub fn from_triangles(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MedialAxisError> {
        let mut circumcenters = Vec::with_capacity(triangles.len());
        let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
        let mut neighbors = vec![Vec::new(); triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(MedialAxisError::InvalidMesh(format!(
                    "triangle {t} index out of range"
                )));
            }
            let cc = circumcenter(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]])
                .ok_or_else(|| {
                    MedialAxisError::InvalidMesh(format!("triangle {t} is degenerate"))
                })?;
            circumcenters.push(cc);
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                match edge_owner.get(&key) {
                    Some(&other) => {
                        neighbors[t].push(other);
                        neighbors[other].push(t);
                    }
                    None => {
                        edge_owner.insert(key, t);
                    }
                }
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        Ok(Self {
            vertices,
            triangles,
            neighbors,
            circumcenters,
        })
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn connectivity(&self, t: usize) -> usize {
        self.neighbors[t].len()
    }

    pub fn centroid(&self, t: usize) -> Point2 {
        let [a, b, c] = self.triangles[t];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) * (1.0 / 3.0)
    }

    /// Circumcenter closest to `q`; ties go to the lowest triangle index.
    pub fn nearest_circumcenter(&self, q: Point2) -> Result<(Point2, usize), MedialAxisError> {
        let mut best: Option<(f64, usize)> = None;
        for (t, cc) in self.circumcenters.iter().enumerate() {
            let d = cc.distance(q);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, t));
            }
        }
        let (_, t) = best.ok_or(MedialAxisError::EmptyMesh)?;
        Ok((self.circumcenters[t], t))
    }

    /// Triangle containing `q` (boundary inclusive), lowest index first.
    pub fn locate(&self, q: Point2) -> Option<usize> {
        (0..self.len()).find(|&t| {
            let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
            let d1 = (b - a).cross(q - a);
            let d2 = (c - b).cross(q - b);
            let d3 = (a - c).cross(q - c);
            let tol = -1e-12;
            (d1 >= tol && d2 >= tol && d3 >= tol) || (d1 <= -tol && d2 <= -tol && d3 <= -tol)
        })
    }

    /// Connected-component label per triangle (flood fill over neighbors).
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.len()];
        let mut next = 0;
        for s in 0..self.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = next;
            while let Some(t) = stack.pop() {
                for &u in &self.neighbors[t] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Triangle path from `from` to `to` with the fewest hops.
    pub(crate) fn triangle_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev = vec![usize::MAX; self.len()];
        let mut queue = std::collections::VecDeque::from([from]);
        prev[from] = from;
        while let Some(t) = queue.pop_front() {
            if t == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = prev[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for &u in &self.neighbors[t] {
                if prev[u] == usize::MAX {
                    prev[u] = t;
                    queue.push_back(u);
                }
            }
        }
        None
    }
}
