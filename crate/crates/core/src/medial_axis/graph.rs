//! Medial-axis graph over 3-connected triangles with a triangle-chain map.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use super::mesh::TriangulationMesh;
use super::MedialAxisError;
use crate::geometry::Point2;

pub type NodeId = usize;
pub type ChainId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    /// Circumcenter of a 3-connected triangle.
    Branch,
    /// Temporary start or goal attachment.
    Endpoint,
    /// Temporary node at the vehicle added after a corridor deletion.
    Backtrack,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub position: Point2,
    /// Mesh triangle for branch nodes.
    pub triangle: Option<usize>,
    pub kind: NodeKind,
}

/// Circumcenter polyline between two nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub id: ChainId,
    pub from: NodeId,
    pub to: NodeId,
    pub points: Vec<Point2>,
    /// Mesh triangles whose circumcenters make up the chain, in order.
    pub triangles: Vec<usize>,
    /// Corridor (maximal run of non-branch triangles) this chain follows.
    pub segment: Option<usize>,
    pub temporary: bool,
}

impl Chain {
    pub fn length(&self) -> f64 {
        polyline_length(&self.points)
    }
}

pub fn polyline_length(points: &[Point2]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SegEnd {
    Node(NodeId),
    DeadEnd,
}

/// Maximal run of non-branch triangles; `a` precedes `triangles[0]`.
#[derive(Clone, Debug, PartialEq)]
struct Segment {
    triangles: Vec<usize>,
    a: SegEnd,
    b: SegEnd,
    cyclic: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Location {
    Node(NodeId),
    Segment { segment: usize, index: usize },
}

/// A chain as traversed by a route (points oriented in travel direction).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteChain {
    pub chain: ChainId,
    pub from: NodeId,
    pub to: NodeId,
    pub points: Vec<Point2>,
    pub triangles: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub chains: Vec<RouteChain>,
    pub polyline: Vec<Point2>,
    pub cost: f64,
}

/// Outcome of deleting the occupied corridor.
#[derive(Clone, Debug, PartialEq)]
pub struct Removal {
    pub removed_chains: Vec<ChainId>,
    /// Index into the route of the chain that contained the vehicle.
    pub route_index: usize,
    /// Node to back out to; `None` when the corridor behind is a dead end.
    pub last_node: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MedialAxisGraph {
    nodes: Vec<Option<Node>>,
    chains: BTreeMap<ChainId, Chain>,
    pair_chains: BTreeMap<(NodeId, NodeId), BTreeSet<ChainId>>,
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
    segment_chains: BTreeMap<usize, BTreeSet<ChainId>>,
    segments: Vec<Segment>,
    location: Vec<Location>,
    circumcenters: Vec<Point2>,
    removed_segments: BTreeSet<usize>,
    next_chain: ChainId,
    endpoints: Vec<NodeId>,
    backtrack: Option<NodeId>,
    branch_count: usize,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

impl MedialAxisGraph {
    pub fn build(mesh: &TriangulationMesh) -> Self {
        let nt = mesh.len();
        let mut nodes = Vec::new();
        let mut location = vec![Location::Node(usize::MAX); nt];
        let mut node_of = vec![usize::MAX; nt];
        for t in 0..nt {
            if mesh.connectivity(t) == 3 {
                node_of[t] = nodes.len();
                location[t] = Location::Node(nodes.len());
                nodes.push(Some(Node {
                    position: mesh.circumcenters[t],
                    triangle: Some(t),
                    kind: NodeKind::Branch,
                }));
            }
        }
        let branch_count = nodes.len();
        let mut segments: Vec<Segment> = Vec::new();
        let mut visited = vec![false; nt];

        // Walks from `start` (non-branch) away from `prev` until a branch
        // triangle or a dead end.
        let walk = |start: usize, prev: Option<usize>, visited: &mut Vec<bool>| {
            let mut list = Vec::new();
            let mut prev = prev;
            let mut cur = start;
            loop {
                visited[cur] = true;
                list.push(cur);
                let next = mesh.neighbors[cur]
                    .iter()
                    .copied()
                    .find(|&u| Some(u) != prev && !(visited[u] && node_of[u] == usize::MAX));
                match next {
                    None => return (list, SegEnd::DeadEnd),
                    Some(u) if node_of[u] != usize::MAX => return (list, SegEnd::Node(node_of[u])),
                    Some(u) => {
                        prev = Some(cur);
                        cur = u;
                    }
                }
            }
        };

        for t in 0..nt {
            if node_of[t] == usize::MAX {
                continue;
            }
            for &u in &mesh.neighbors[t] {
                if node_of[u] != usize::MAX {
                    if t < u {
                        segments.push(Segment {
                            triangles: Vec::new(),
                            a: SegEnd::Node(node_of[t]),
                            b: SegEnd::Node(node_of[u]),
                            cyclic: false,
                        });
                    }
                } else if !visited[u] {
                    let (list, end) = walk(u, Some(t), &mut visited);
                    segments.push(Segment {
                        triangles: list,
                        a: SegEnd::Node(node_of[t]),
                        b: end,
                        cyclic: false,
                    });
                }
            }
        }
        // Components without branch triangles: paths between dead ends, then cycles.
        for t in 0..nt {
            if !visited[t] && node_of[t] == usize::MAX && mesh.connectivity(t) <= 1 {
                let (list, end) = walk(t, None, &mut visited);
                segments.push(Segment {
                    triangles: list,
                    a: SegEnd::DeadEnd,
                    b: end,
                    cyclic: false,
                });
            }
        }
        for t in 0..nt {
            if !visited[t] && node_of[t] == usize::MAX {
                let (list, _) = walk(t, None, &mut visited);
                segments.push(Segment {
                    triangles: list,
                    a: SegEnd::DeadEnd,
                    b: SegEnd::DeadEnd,
                    cyclic: true,
                });
            }
        }
        for (s, seg) in segments.iter().enumerate() {
            for (index, &t) in seg.triangles.iter().enumerate() {
                location[t] = Location::Segment { segment: s, index };
            }
        }

        let mut graph = Self {
            nodes,
            chains: BTreeMap::new(),
            pair_chains: BTreeMap::new(),
            adjacency: BTreeMap::new(),
            segment_chains: BTreeMap::new(),
            segments,
            location,
            circumcenters: mesh.circumcenters.clone(),
            removed_segments: BTreeSet::new(),
            next_chain: 0,
            endpoints: Vec::new(),
            backtrack: None,
            branch_count,
        };
        for s in 0..graph.segments.len() {
            let seg = graph.segments[s].clone();
            if let (SegEnd::Node(a), SegEnd::Node(b)) = (seg.a, seg.b) {
                // Self-loops cannot shorten a route and stay out of the map.
                if a == b {
                    continue;
                }
                let ta = graph.node(a).triangle.expect("branch node");
                let tb = graph.node(b).triangle.expect("branch node");
                let mut triangles = vec![ta];
                triangles.extend(&seg.triangles);
                triangles.push(tb);
                graph.insert_chain(a, b, triangles, None, None, Some(s), false);
            }
        }
        graph
    }

    fn node(&self, id: NodeId) -> &Node {
        self.nodes[id].as_ref().expect("live node")
    }

    pub fn get_node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id).and_then(|n| n.as_ref())
    }

    /// Number of branch (persistent) nodes.
    pub fn node_count(&self) -> usize {
        self.branch_count
    }

    /// Number of adjacent branch-node pairs.
    pub fn edge_count(&self) -> usize {
        self.pair_chains
            .keys()
            .filter(|(a, b)| *a < self.branch_count && *b < self.branch_count)
            .count()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.as_ref().map(|n| (i, n)))
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.pair_chains.contains_key(&key(a, b))
    }

    /// Dense adjacency over all node slots (purged slots are all-false).
    pub fn adjacency_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.nodes.len();
        let mut m = vec![vec![false; n]; n];
        for &(a, b) in self.pair_chains.keys() {
            m[a][b] = true;
            m[b][a] = true;
        }
        m
    }

    pub fn chains_between(&self, a: NodeId, b: NodeId) -> Vec<&Chain> {
        self.pair_chains
            .get(&key(a, b))
            .map(|ids| ids.iter().map(|id| &self.chains[id]).collect())
            .unwrap_or_default()
    }

    pub fn chain(&self, id: ChainId) -> Option<&Chain> {
        self.chains.get(&id)
    }

    pub fn chains(&self) -> impl Iterator<Item = &Chain> {
        self.chains.values()
    }

    pub fn backtrack_node(&self) -> Option<NodeId> {
        self.backtrack
    }

    pub fn temporary_nodes(&self) -> Vec<NodeId> {
        self.nodes()
            .filter(|(_, n)| n.kind != NodeKind::Branch)
            .map(|(i, _)| i)
            .collect()
    }

    /// Inserts a chain; the polyline is `head` + circumcenters of
    /// `triangles` + `tail`.
    #[allow(clippy::too_many_arguments)]
    fn insert_chain(
        &mut self,
        from: NodeId,
        to: NodeId,
        triangles: Vec<usize>,
        head: Option<Point2>,
        tail: Option<Point2>,
        segment: Option<usize>,
        temporary: bool,
    ) -> ChainId {
        let id = self.next_chain;
        self.next_chain += 1;
        let mut points = Vec::with_capacity(triangles.len() + 2);
        points.extend(head);
        points.extend(triangles.iter().map(|&t| self.circumcenters[t]));
        points.extend(tail);
        self.chains.insert(
            id,
            Chain {
                id,
                from,
                to,
                points,
                triangles,
                segment,
                temporary,
            },
        );
        if from != to {
            self.pair_chains
                .entry(key(from, to))
                .or_default()
                .insert(id);
            self.adjacency.entry(from).or_default().insert(to);
            self.adjacency.entry(to).or_default().insert(from);
        }
        if let Some(s) = segment {
            self.segment_chains.entry(s).or_default().insert(id);
        }
        id
    }

    fn delete_chain(&mut self, id: ChainId) -> Option<Chain> {
        let chain = self.chains.remove(&id)?;
        let k = key(chain.from, chain.to);
        if let Some(set) = self.pair_chains.get_mut(&k) {
            set.remove(&id);
            if set.is_empty() {
                self.pair_chains.remove(&k);
                if let Some(a) = self.adjacency.get_mut(&chain.from) {
                    a.remove(&chain.to);
                }
                if let Some(b) = self.adjacency.get_mut(&chain.to) {
                    b.remove(&chain.from);
                }
            }
        }
        if let Some(s) = chain.segment {
            if let Some(set) = self.segment_chains.get_mut(&s) {
                set.remove(&id);
            }
        }
        Some(chain)
    }

    fn purge_node(&mut self, id: NodeId) {
        let ids: Vec<ChainId> = self
            .chains
            .values()
            .filter(|c| c.from == id || c.to == id)
            .map(|c| c.id)
            .collect();
        for c in ids {
            self.delete_chain(c);
        }
        self.adjacency.remove(&id);
        self.nodes[id] = None;
    }

    fn new_node(&mut self, position: Point2, kind: NodeKind) -> NodeId {
        self.nodes.push(Some(Node {
            position,
            triangle: None,
            kind,
        }));
        self.nodes.len() - 1
    }

    /// Removes the temporary start/goal nodes and their chains.
    pub fn purge_endpoints(&mut self) {
        for id in std::mem::take(&mut self.endpoints) {
            self.purge_node(id);
        }
    }

    pub fn purge_backtrack(&mut self) {
        if let Some(id) = self.backtrack.take() {
            self.purge_node(id);
        }
    }

    /// Adds a temporary node at `q` connected through its corridor to the
    /// branch nodes at the corridor ends (removed corridors are skipped).
    pub fn attach_point(
        &mut self,
        mesh: &TriangulationMesh,
        q: Point2,
    ) -> Result<NodeId, MedialAxisError> {
        let (_, t) = mesh.nearest_circumcenter(q)?;
        let id = self.new_node(q, NodeKind::Endpoint);
        self.endpoints.push(id);
        match self.location[t] {
            Location::Node(n) => {
                self.insert_chain(id, n, vec![t], Some(q), None, None, true);
            }
            Location::Segment { segment, index } => {
                if self.removed_segments.contains(&segment) {
                    return Ok(id);
                }
                let seg = self.segments[segment].clone();
                if seg.cyclic {
                    return Ok(id);
                }
                if let SegEnd::Node(a) = seg.a {
                    let mut tris: Vec<usize> =
                        seg.triangles[..=index].iter().rev().copied().collect();
                    tris.push(self.node(a).triangle.expect("branch node"));
                    self.insert_chain(id, a, tris, Some(q), None, Some(segment), true);
                }
                if let SegEnd::Node(b) = seg.b {
                    let mut tris: Vec<usize> = seg.triangles[index..].to_vec();
                    tris.push(self.node(b).triangle.expect("branch node"));
                    self.insert_chain(id, b, tris, Some(q), None, Some(segment), true);
                }
            }
        }
        Ok(id)
    }

    /// Replaces any previous endpoints with temporary start and goal nodes.
    pub fn attach_endpoints(
        &mut self,
        mesh: &TriangulationMesh,
        start: Point2,
        goal: Point2,
    ) -> Result<(NodeId, NodeId), MedialAxisError> {
        self.purge_endpoints();
        let s = self.attach_point(mesh, start)?;
        let g = self.attach_point(mesh, goal)?;
        self.link_same_corridor(mesh, s, g)?;
        Ok((s, g))
    }

    /// Attaches `goal` and links it directly to `from` when both lie in the
    /// same corridor.
    pub fn attach_goal_from(
        &mut self,
        mesh: &TriangulationMesh,
        from: NodeId,
        goal: Point2,
    ) -> Result<NodeId, MedialAxisError> {
        let g = self.attach_point(mesh, goal)?;
        self.link_same_corridor(mesh, from, g)?;
        Ok(g)
    }

    fn link_same_corridor(
        &mut self,
        mesh: &TriangulationMesh,
        s: NodeId,
        g: NodeId,
    ) -> Result<(), MedialAxisError> {
        let (ps, pg) = (self.node(s).position, self.node(g).position);
        let (_, ts) = mesh.nearest_circumcenter(ps)?;
        let (_, tg) = mesh.nearest_circumcenter(pg)?;
        match (self.location[ts], self.location[tg]) {
            (
                Location::Segment {
                    segment: a,
                    index: i,
                },
                Location::Segment {
                    segment: b,
                    index: j,
                },
            ) if a == b && !self.removed_segments.contains(&a) => {
                let seg = &self.segments[a];
                let tris: Vec<usize> = if i <= j {
                    seg.triangles[i..=j].to_vec()
                } else {
                    seg.triangles[j..=i].iter().rev().copied().collect()
                };
                self.insert_chain(s, g, tris, Some(ps), Some(pg), Some(a), true);
            }
            (Location::Node(a), Location::Node(b)) if a == b => {
                self.insert_chain(s, g, vec![ts], Some(ps), Some(pg), None, true);
            }
            _ => {}
        }
        Ok(())
    }

    /// A* over node positions; edge cost is the cheapest parallel chain.
    pub fn shortest_route(&self, start: NodeId, goal: NodeId) -> Result<Route, MedialAxisError> {
        if self.get_node(start).is_none() || self.get_node(goal).is_none() {
            return Err(MedialAxisError::UnknownNode);
        }
        if start == goal {
            return Ok(Route {
                chains: Vec::new(),
                polyline: vec![self.node(start).position],
                cost: 0.0,
            });
        }
        let goal_pos = self.node(goal).position;
        let h = |n: NodeId| self.node(n).position.distance(goal_pos);
        let mut dist: BTreeMap<NodeId, f64> = BTreeMap::new();
        let mut came: BTreeMap<NodeId, (NodeId, ChainId)> = BTreeMap::new();
        let mut closed: BTreeSet<NodeId> = BTreeSet::new();
        let mut open = BinaryHeap::new();
        dist.insert(start, 0.0);
        open.push(Frontier {
            f: h(start),
            node: start,
        });
        while let Some(Frontier { node, .. }) = open.pop() {
            if !closed.insert(node) {
                continue;
            }
            if node == goal {
                break;
            }
            let d = dist[&node];
            let Some(nbrs) = self.adjacency.get(&node) else {
                continue;
            };
            for &m in nbrs {
                if closed.contains(&m) {
                    continue;
                }
                let (cid, len) = self.pair_chains[&key(node, m)]
                    .iter()
                    .map(|id| (*id, self.chains[id].length()))
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                    .expect("adjacent pair has a chain");
                let nd = d + len;
                if dist.get(&m).map_or(true, |&old| nd < old) {
                    dist.insert(m, nd);
                    came.insert(m, (node, cid));
                    open.push(Frontier {
                        f: nd + h(m),
                        node: m,
                    });
                }
            }
        }
        if !closed.contains(&goal) {
            return Err(MedialAxisError::NoRoute);
        }
        let mut steps = Vec::new();
        let mut cur = goal;
        while cur != start {
            let (prev, cid) = came[&cur];
            steps.push((prev, cur, cid));
            cur = prev;
        }
        steps.reverse();
        let mut chains = Vec::with_capacity(steps.len());
        let mut polyline: Vec<Point2> = Vec::new();
        for (from, to, cid) in steps {
            let c = &self.chains[&cid];
            let (mut points, mut triangles) = (c.points.clone(), c.triangles.clone());
            if c.from != from {
                points.reverse();
                triangles.reverse();
            }
            for &p in &points {
                if polyline.last().map_or(true, |l| l.distance(p) > 1e-12) {
                    polyline.push(p);
                }
            }
            chains.push(RouteChain {
                chain: cid,
                from,
                to,
                points,
                triangles,
            });
        }
        Ok(Route {
            chains,
            polyline,
            cost: dist[&goal],
        })
    }

    /// Deletes the corridor containing `near_triangle` (the triangle of the
    /// circumcenter nearest the vehicle) from the chain map. When the
    /// triangle is shared by two route chains (a branch node), the later one
    /// is removed.
    pub fn remove_current_corridor(
        &mut self,
        route: &Route,
        near_triangle: usize,
    ) -> Result<Removal, MedialAxisError> {
        let k = route
            .chains
            .iter()
            .rposition(|c| c.triangles.contains(&near_triangle))
            .ok_or(MedialAxisError::NotOnRoute)?;
        let rc = &route.chains[k];
        let segment = self
            .chains
            .get(&rc.chain)
            .and_then(|c| c.segment)
            .or_else(|| match self.location[near_triangle] {
                Location::Segment { segment, .. } => Some(segment),
                Location::Node(_) => None,
            });
        let mut removed = Vec::new();
        if let Some(s) = segment {
            self.removed_segments.insert(s);
            let ids: Vec<ChainId> = self
                .segment_chains
                .get(&s)
                .map(|set| set.iter().copied().collect())
                .unwrap_or_default();
            for id in ids {
                if self.delete_chain(id).is_some() {
                    removed.push(id);
                }
            }
        }
        if self.delete_chain(rc.chain).is_some() {
            removed.push(rc.chain);
        }

        let origin_is_branch = self
            .get_node(rc.from)
            .is_some_and(|n| n.kind == NodeKind::Branch);
        let last_node = if origin_is_branch {
            Some(rc.from)
        } else {
            segment.and_then(|s| self.end_behind(s, rc))
        };
        Ok(Removal {
            removed_chains: removed,
            route_index: k,
            last_node,
        })
    }

    /// The end of segment `s` opposite to the travel direction of `rc`.
    fn end_behind(&self, s: usize, rc: &RouteChain) -> Option<NodeId> {
        let seg = &self.segments[s];
        let idx: Vec<usize> = rc
            .triangles
            .iter()
            .filter_map(|&t| match self.location[t] {
                Location::Segment { segment, index } if segment == s => Some(index),
                _ => None,
            })
            .collect();
        let forward = match (idx.first(), idx.last()) {
            (Some(a), Some(b)) if a != b => b > a,
            // Single triangle: travel heads toward the chain's target end.
            _ => {
                let target_tri = self.get_node(rc.to).and_then(|n| n.triangle);
                match (seg.b, target_tri) {
                    (SegEnd::Node(b), Some(_)) => b == rc.to,
                    _ => true,
                }
            }
        };
        let behind = if forward { seg.a } else { seg.b };
        match behind {
            SegEnd::Node(n) => Some(n),
            SegEnd::DeadEnd => None,
        }
    }

    /// Adds a temporary node at `q_veh` with a chain back to `last_node`
    /// along the circumcenters between them. Any previous backtrack node is
    /// purged first.
    pub fn add_backtrack_edge(
        &mut self,
        mesh: &TriangulationMesh,
        q_veh: Point2,
        last_node: NodeId,
    ) -> Result<NodeId, MedialAxisError> {
        let target = self
            .get_node(last_node)
            .and_then(|n| n.triangle)
            .ok_or(MedialAxisError::UnknownNode)?;
        self.purge_backtrack();
        let (_, t) = mesh.nearest_circumcenter(q_veh)?;
        let (triangles, segment) = match self.location[t] {
            Location::Node(_) if t == target => (vec![t], None),
            Location::Segment { segment, index } => {
                let seg = &self.segments[segment];
                if seg.a == SegEnd::Node(last_node) {
                    let mut tris: Vec<usize> =
                        seg.triangles[..=index].iter().rev().copied().collect();
                    tris.push(target);
                    (tris, Some(segment))
                } else if seg.b == SegEnd::Node(last_node) {
                    let mut tris = seg.triangles[index..].to_vec();
                    tris.push(target);
                    (tris, Some(segment))
                } else {
                    let path = mesh
                        .triangle_path(t, target)
                        .ok_or(MedialAxisError::Unreachable)?;
                    (path, None)
                }
            }
            Location::Node(_) => (
                mesh.triangle_path(t, target)
                    .ok_or(MedialAxisError::Unreachable)?,
                None,
            ),
        };
        let id = self.new_node(q_veh, NodeKind::Backtrack);
        self.backtrack = Some(id);
        self.insert_chain(id, last_node, triangles, Some(q_veh), None, segment, true);
        Ok(id)
    }

    pub fn dump(&self) -> GraphDump {
        GraphDump {
            nodes: self
                .nodes()
                .map(|(id, n)| DumpNode {
                    id,
                    x: n.position.x,
                    y: n.position.y,
                    triangle: n.triangle,
                    kind: n.kind,
                })
                .collect(),
            adjacency: self.pair_chains.keys().copied().collect(),
            chains: self.chains.values().cloned().collect(),
            removed_segments: self.removed_segments.iter().copied().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Frontier {
    f: f64,
    node: NodeId,
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Structured debug export of the graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub nodes: Vec<DumpNode>,
    pub adjacency: Vec<(NodeId, NodeId)>,
    pub chains: Vec<Chain>,
    pub removed_segments: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DumpNode {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub triangle: Option<usize>,
    pub kind: NodeKind,
}
