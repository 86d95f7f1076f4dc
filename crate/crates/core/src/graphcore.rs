//! Finite graphs with a marked boundary, and their extraction from a host
//! graph: a connected interior set Ω picks up its exterior neighbors B, and
//! the edge set keeps exactly the host edges with at least one end in Ω.

use serde::Serialize;
use thiserror::Error;

use crate::tiling::{HostGraph, Tiling};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("interior vertex set is empty")]
    EmptyInterior,
    #[error("interior vertex set is not connected in the host graph")]
    DisconnectedInterior,
    #[error("vertex {vertex} has untrusted depth; enlarge the tiling")]
    UntrustedFrontier { vertex: u32 },
    #[error("vertex {vertex} is not a host vertex")]
    VertexNotInHost { vertex: u32 },
    #[error("removed vertex {vertex} is not inside the ball")]
    RemovedNotInBall { vertex: u32 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("boundary is empty")]
    EmptyBoundary,
    #[error("edge ({a}, {b}) is out of range or a self-loop")]
    BadEdge { a: u32, b: u32 },
}

/// A finite simple connected graph with a nonempty boundary vertex set.
///
/// Indices 0..n_interior are interior, the rest boundary; within each block
/// vertices are sorted by host id when host-backed. This makes the Laplacian
/// block split positional.
#[derive(Debug, Clone)]
pub struct GraphWithBoundary {
    n_interior: usize,
    n_boundary: usize,
    adjacency: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
    host_ids: Option<Vec<u32>>,
}

impl GraphWithBoundary {
    /// Builds a hand-specified graph; used for closed-form fixtures.
    pub fn from_parts(
        n_interior: usize,
        n_boundary: usize,
        edges: &[(u32, u32)],
    ) -> Result<Self, GraphError> {
        let n = n_interior + n_boundary;
        if n_boundary == 0 {
            return Err(GraphError::EmptyBoundary);
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n || a == b {
                return Err(GraphError::BadEdge { a, b });
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(GraphError::BadEdge { a, b });
            }
            adjacency[a as usize].push(b);
            adjacency[b as usize].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mut edges: Vec<(u32, u32)> = seen.into_iter().collect();
        edges.sort_unstable();
        let g = Self {
            n_interior,
            n_boundary,
            adjacency,
            edges,
            host_ids: None,
        };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n_interior + self.n_boundary
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_boundary(&self) -> usize {
        self.n_boundary
    }

    pub fn is_interior(&self, v: u32) -> bool {
        (v as usize) < self.n_interior
    }

    pub fn adjacency(&self) -> &[Vec<u32>] {
        &self.adjacency
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn host_ids(&self) -> Option<&[u32]> {
        self.host_ids.as_deref()
    }

    pub fn host_id(&self, v: u32) -> Option<u32> {
        self.host_ids.as_ref().map(|ids| ids[v as usize])
    }

    /// Index of a host vertex in this graph, if present.
    pub fn index_of_host(&self, host: u32) -> Option<u32> {
        let ids = self.host_ids.as_ref()?;
        ids.iter().position(|&h| h == host).map(|i| i as u32)
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return false;
        }
        let d = self.bfs_distances(0);
        d.iter().all(|&x| x != u32::MAX)
    }

    pub fn bfs_distances(&self, source: u32) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        let mut queue = std::collections::VecDeque::new();
        dist[source as usize] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest path length between two vertices of the graph.
    pub fn graph_distance(&self, u: u32, v: u32) -> u32 {
        self.bfs_distances(u)[v as usize]
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            format_version: 1,
            n_interior: self.n_interior,
            n_boundary: self.n_boundary,
            edges: self.edges.clone(),
            host_ids: self.host_ids.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GraphDocument {
    pub format_version: u32,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub edges: Vec<(u32, u32)>,
    pub host_ids: Option<Vec<u32>>,
}

/// Induces the graph with boundary determined by the interior set Ω:
/// B = exterior neighbors of Ω, edges = host edges touching Ω.
///
/// The closed 1-neighborhood of Ω must lie within trusted depth, otherwise
/// the truncated host could present fake boundary.
pub fn induce_subgraph(host: &HostGraph, interior: &[u32]) -> Result<GraphWithBoundary, GraphError> {
    if interior.is_empty() {
        return Err(GraphError::EmptyInterior);
    }
    let n_host = host.n() as u32;
    let mut omega: Vec<u32> = interior.to_vec();
    omega.sort_unstable();
    omega.dedup();
    for &v in &omega {
        if v >= n_host {
            return Err(GraphError::VertexNotInHost { vertex: v });
        }
    }
    let in_omega = {
        let mut flags = vec![false; host.n()];
        for &v in &omega {
            flags[v as usize] = true;
        }
        flags
    };
    // Connectivity of Ω inside the host.
    {
        let mut seen = vec![false; host.n()];
        let mut queue = std::collections::VecDeque::new();
        seen[omega[0] as usize] = true;
        queue.push_back(omega[0]);
        let mut count = 1usize;
        while let Some(v) = queue.pop_front() {
            for &w in &host.adjacency[v as usize] {
                if in_omega[w as usize] && !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        if count != omega.len() {
            return Err(GraphError::DisconnectedInterior);
        }
    }
    // Trusted-depth guard over the closed neighborhood.
    for &v in &omega {
        if !host.trusted(v) {
            return Err(GraphError::UntrustedFrontier { vertex: v });
        }
        for &w in &host.adjacency[v as usize] {
            if !host.trusted(w) {
                return Err(GraphError::UntrustedFrontier { vertex: w });
            }
        }
    }
    let mut boundary: Vec<u32> = Vec::new();
    for &v in &omega {
        for &w in &host.adjacency[v as usize] {
            if !in_omega[w as usize] {
                boundary.push(w);
            }
        }
    }
    boundary.sort_unstable();
    boundary.dedup();
    if boundary.is_empty() {
        return Err(GraphError::EmptyBoundary);
    }

    // Index layout: interior block then boundary block, each sorted by host id.
    let mut index_of = std::collections::HashMap::new();
    let mut host_ids = Vec::with_capacity(omega.len() + boundary.len());
    for (i, &v) in omega.iter().chain(boundary.iter()).enumerate() {
        index_of.insert(v, i as u32);
        host_ids.push(v);
    }
    let n = host_ids.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut edges = Vec::new();
    for &v in &omega {
        let vi = index_of[&v];
        for &w in &host.adjacency[v as usize] {
            let wi = index_of[&w];
            // Count each edge once; Ω–Ω edges appear from both ends.
            if in_omega[w as usize] && w < v {
                continue;
            }
            adjacency[vi as usize].push(wi);
            adjacency[wi as usize].push(vi);
            edges.push((vi.min(wi), vi.max(wi)));
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    edges.sort_unstable();
    Ok(GraphWithBoundary {
        n_interior: omega.len(),
        n_boundary: boundary.len(),
        adjacency,
        edges,
        host_ids: Some(host_ids),
    })
}

/// BFS ball of the given radius around a center, as an induced subgraph.
pub fn ball_subgraph(
    host: &HostGraph,
    center: u32,
    radius: u32,
) -> Result<GraphWithBoundary, GraphError> {
    if center >= host.n() as u32 {
        return Err(GraphError::VertexNotInHost { vertex: center });
    }
    let dist = host.bfs_distances(center);
    let interior: Vec<u32> = (0..host.n() as u32)
        .filter(|&v| dist[v as usize] <= radius)
        .collect();
    induce_subgraph(host, &interior)
}

/// Ball with one interior vertex deleted; the deleted vertex re-enters as a
/// boundary vertex of the result.
pub fn punctured_ball(
    host: &HostGraph,
    center: u32,
    radius: u32,
    removed: u32,
) -> Result<GraphWithBoundary, GraphError> {
    if center >= host.n() as u32 {
        return Err(GraphError::VertexNotInHost { vertex: center });
    }
    let dist = host.bfs_distances(center);
    if removed >= host.n() as u32 || dist[removed as usize] > radius {
        return Err(GraphError::RemovedNotInBall { vertex: removed });
    }
    let interior: Vec<u32> = (0..host.n() as u32)
        .filter(|&v| dist[v as usize] <= radius && v != removed)
        .collect();
    induce_subgraph(host, &interior)
}

/// A long thin interior whose two tips have host-adjacent boundary vertices:
/// the closed fan of tiles around a π/r tiling-vertex, minus one adjacent
/// pair. Graph distance between the removed pair inside the subgraph is the
/// long way around the fan, while they stay adjacent in the host.
#[derive(Debug, Clone)]
pub struct HorseshoePlan {
    pub interior: Vec<u32>,
    pub w1: u32,
    pub w2: u32,
}

pub fn horseshoe_plan(tiling: &Tiling, host: &HostGraph) -> Option<HorseshoePlan> {
    // Corners of class 2 have the largest fans (2r tiles). Pick the first
    // whose fan closes with every tile's closed neighborhood trusted.
    for corner_id in 0..tiling.corners.len() as u32 {
        if tiling.corners[corner_id as usize].class != 2 {
            continue;
        }
        let Some(cycle) = tiling.tiles_around_corner(corner_id) else {
            continue;
        };
        let all_trusted = cycle.iter().all(|&t| {
            host.trusted(t) && host.adjacency[t as usize].iter().all(|&w| host.trusted(w))
        });
        if !all_trusted || cycle.len() < 8 {
            continue;
        }
        // Remove the lexicographically smallest adjacent pair along the cycle.
        let m = cycle.len();
        let (mut best, mut best_key) = (0usize, (u32::MAX, u32::MAX));
        for i in 0..m {
            let a = cycle[i];
            let b = cycle[(i + 1) % m];
            let key = (a.min(b), a.max(b));
            if key < best_key {
                best_key = key;
                best = i;
            }
        }
        let w1 = cycle[best];
        let w2 = cycle[(best + 1) % m];
        let interior: Vec<u32> = (0..m - 2)
            .map(|off| cycle[(best + 2 + off) % m])
            .collect();
        return Some(HorseshoePlan { interior, w1, w2 });
    }
    None
}
