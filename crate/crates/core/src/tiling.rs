//! Triangle-group tilings of the disk and their dual host graphs.
//!
//! Starting from the fundamental triangle of T*(p, q, r) in canonical
//! position, tiles are grown breadth-first by reflecting existing tiles
//! across their own sides. Deduplication is geometric (incenter hashing),
//! which a reflection-word enumeration oracle validates at small depth.
//! The dual graph has one vertex per tile at its incenter and one edge per
//! shared side; every interior vertex has degree exactly 3.

use serde::Serialize;
use thiserror::Error;

use crate::hypgeo::{
    hyp_distance, triangle_from_angles, DiskPoint, GeoError, HypIsometry, HypTriangle,
};
use crate::util::PointKeyMap;

/// Hard ceiling on requested depth. Hyperbolic growth is exponential; past
/// this the tiling is no longer desk-scale.
pub const DEPTH_CAP: u32 = 9;

const TILE_CAP: usize = 1_000_000;

/// Dedup grid cell for incenters, corners and side midpoints.
const DEDUP_CELL: f64 = 1e-7;
/// Hyperbolic distance below which two candidate points are the same point.
const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TilingError {
    #[error(transparent)]
    Geometry(#[from] GeoError),
    #[error("requested depth {requested} exceeds the cap {cap}")]
    DepthCapExceeded { requested: u32, cap: u32 },
    #[error("tiling exceeded {cap} tiles before reaching the requested depth")]
    TooManyTiles { cap: usize },
}

#[derive(Debug, Clone)]
pub struct Tile {
    pub id: u32,
    /// BFS reflection depth; equals the minimal reflection-word length.
    pub depth: u32,
    pub triangle: HypTriangle,
    pub incenter: DiskPoint,
    /// Maps the seed tile onto this tile.
    pub isometry: HypIsometry,
    /// Global corner ids, indexed by local vertex (0 ↦ angle π/p, 1 ↦ π/q, 2 ↦ π/r).
    pub corner_ids: [u32; 3],
    /// Neighbor tile across side k (the side opposite local vertex k), when known.
    pub neighbors: [Option<u32>; 3],
}

/// A tiling vertex: a point where tiles meet. A corner of angle class c is
/// fully surrounded once 2·(signature component c) tiles share it.
#[derive(Debug, Clone)]
pub struct CornerRecord {
    pub position: DiskPoint,
    /// 0, 1, or 2: the local vertex index every incident tile sees it as.
    pub class: u8,
    /// Incident tiles in discovery order.
    pub tiles: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct SideRecord {
    /// (tile id, local side index) pairs; 1 for frontier sides, 2 for shared.
    pub tiles: Vec<(u32, u8)>,
    /// Global corner ids of the two endpoints, sorted.
    pub corners: (u32, u32),
}

#[derive(Debug)]
pub struct Tiling {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub max_depth: u32,
    pub tiles: Vec<Tile>,
    pub corners: Vec<CornerRecord>,
    pub sides: Vec<SideRecord>,
    pub seed_triangle: HypTriangle,
    pub seed_incenter: DiskPoint,
    pub seed_inradius: f64,
}

pub fn generate_tiling(p: u32, q: u32, r: u32, max_depth: u32) -> Result<Tiling, TilingError> {
    if max_depth > DEPTH_CAP {
        return Err(TilingError::DepthCapExceeded {
            requested: max_depth,
            cap: DEPTH_CAP,
        });
    }
    let seed_triangle = triangle_from_angles(p, q, r)?;
    let (seed_incenter, seed_inradius) = seed_triangle.incenter_and_inradius()?;

    let mut tiles: Vec<Tile> = Vec::new();
    let mut corners: Vec<CornerRecord> = Vec::new();
    let mut sides: Vec<SideRecord> = Vec::new();
    let mut center_map = PointKeyMap::new(DEDUP_CELL, DEDUP_TOL);
    let mut corner_map = PointKeyMap::new(DEDUP_CELL, DEDUP_TOL);
    let mut side_map = PointKeyMap::new(DEDUP_CELL, DEDUP_TOL);

    // Registers the tile's corners and sides, reusing corner ids handed down
    // from the parent tile (mirror endpoints are shared exactly).
    let register = |tile_id: u32,
                        triangle: &HypTriangle,
                        known_corners: [Option<u32>; 3],
                        corners: &mut Vec<CornerRecord>,
                        sides: &mut Vec<SideRecord>,
                        corner_map: &mut PointKeyMap,
                        side_map: &mut PointKeyMap|
     -> [u32; 3] {
        let mut ids = [0u32; 3];
        for v in 0..3 {
            let id = match known_corners[v] {
                Some(id) => id,
                None => {
                    let (id, fresh) = corner_map.find_or_insert(triangle.vertex(v));
                    if fresh {
                        corners.push(CornerRecord {
                            position: triangle.vertex(v),
                            class: v as u8,
                            tiles: Vec::new(),
                        });
                    }
                    id
                }
            };
            debug_assert_eq!(corners[id as usize].class, v as u8);
            corners[id as usize].tiles.push(tile_id);
            ids[v] = id;
        }
        for k in 0..3u8 {
            let seg = triangle.side(k as usize);
            let (sid, fresh) = side_map.find_or_insert(seg.midpoint());
            if fresh {
                let (a, b) = (ids[(k as usize + 1) % 3], ids[(k as usize + 2) % 3]);
                sides.push(SideRecord {
                    tiles: Vec::new(),
                    corners: (a.min(b), a.max(b)),
                });
            }
            sides[sid as usize].tiles.push((tile_id, k));
        }
        ids
    };

    let (seed_center_id, _) = center_map.find_or_insert(seed_incenter);
    debug_assert_eq!(seed_center_id, 0);
    let seed_corner_ids = register(
        0,
        &seed_triangle,
        [None, None, None],
        &mut corners,
        &mut sides,
        &mut corner_map,
        &mut side_map,
    );
    tiles.push(Tile {
        id: 0,
        depth: 0,
        triangle: seed_triangle,
        incenter: seed_incenter,
        isometry: HypIsometry::identity(),
        corner_ids: seed_corner_ids,
        neighbors: [None; 3],
    });

    let mut cursor = 0usize;
    while cursor < tiles.len() {
        let (depth, triangle, incenter, isometry, corner_ids) = {
            let t = &tiles[cursor];
            (t.depth, t.triangle, t.incenter, t.isometry, t.corner_ids)
        };
        cursor += 1;
        if depth >= max_depth {
            continue;
        }
        for k in 0..3usize {
            let mirror = triangle.reflection_across_side(k);
            let image_center = mirror.apply(incenter);
            let (center_id, fresh) = center_map.find_or_insert(image_center);
            if !fresh {
                continue;
            }
            let new_id = center_id;
            debug_assert_eq!(new_id as usize, tiles.len());
            if tiles.len() >= TILE_CAP {
                return Err(TilingError::TooManyTiles { cap: TILE_CAP });
            }
            let new_triangle = triangle.transformed(&mirror);
            // The two mirror endpoints are fixed, so those corner ids carry over.
            let mut known = [None; 3];
            known[(k + 1) % 3] = Some(corner_ids[(k + 1) % 3]);
            known[(k + 2) % 3] = Some(corner_ids[(k + 2) % 3]);
            let new_corner_ids = register(
                new_id,
                &new_triangle,
                known,
                &mut corners,
                &mut sides,
                &mut corner_map,
                &mut side_map,
            );
            tiles.push(Tile {
                id: new_id,
                depth: depth + 1,
                triangle: new_triangle,
                incenter: image_center,
                isometry: mirror.compose(&isometry),
                corner_ids: new_corner_ids,
                neighbors: [None; 3],
            });
        }
    }

    // Neighbor links from the side registry.
    for side in &sides {
        debug_assert!(
            side.tiles.len() <= 2,
            "a side key collected {} tiles; dedup broke",
            side.tiles.len()
        );
        if let [(a, ka), (b, kb)] = side.tiles[..] {
            tiles[a as usize].neighbors[ka as usize] = Some(b);
            tiles[b as usize].neighbors[kb as usize] = Some(a);
        }
    }

    Ok(Tiling {
        p,
        q,
        r,
        max_depth,
        tiles,
        corners,
        sides,
        seed_triangle,
        seed_incenter,
        seed_inradius,
    })
}

impl Tiling {
    pub fn signature(&self) -> [u32; 3] {
        [self.p, self.q, self.r]
    }

    /// Tiles around a corner in cyclic order, or None while the fan is still
    /// open at the tiling frontier. A closed fan has 2·(signature component)
    /// tiles for the corner's class.
    pub fn tiles_around_corner(&self, corner_id: u32) -> Option<Vec<u32>> {
        let record = &self.corners[corner_id as usize];
        let expected = 2 * self.signature()[record.class as usize] as usize;
        let start = *record.tiles.first()?;
        let mut cycle = vec![start];
        let local = |tile: &Tile| {
            (0..3)
                .find(|&v| tile.corner_ids[v] == corner_id)
                .expect("corner registry names a tile that lacks the corner")
        };
        // Step across one of the two sides at the corner, never back the way
        // we came.
        let mut prev: Option<u32> = None;
        let mut here = start;
        loop {
            let tile = &self.tiles[here as usize];
            let v = local(tile);
            let exits = [(v + 1) % 3, (v + 2) % 3];
            let mut advanced = false;
            for &side in &exits {
                match tile.neighbors[side] {
                    Some(n) if Some(n) != prev => {
                        if n == cycle[0] && cycle.len() > 1 {
                            return if cycle.len() == expected {
                                Some(cycle)
                            } else {
                                None
                            };
                        }
                        prev = Some(here);
                        here = n;
                        cycle.push(n);
                        advanced = true;
                        break;
                    }
                    _ => {}
                }
            }
            if !advanced {
                return None;
            }
            if cycle.len() > expected {
                return None;
            }
        }
    }

    pub fn host_graph(&self) -> HostGraph {
        let n = self.tiles.len();
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = Vec::new();
        for tile in &self.tiles {
            for nb in tile.neighbors.into_iter().flatten() {
                adjacency[tile.id as usize].push(nb);
                if tile.id < nb {
                    edges.push((tile.id, nb));
                }
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        edges.sort_unstable();
        HostGraph {
            p: self.p,
            q: self.q,
            r: self.r,
            max_depth: self.max_depth,
            adjacency,
            edges,
            depth: self.tiles.iter().map(|t| t.depth).collect(),
            centers: self.tiles.iter().map(|t| t.incenter).collect(),
            seed_diameter: self.seed_triangle.diameter(),
            dual_edge_length: 2.0 * self.seed_inradius,
        }
    }
}

/// Dual graph of a tiling: one vertex per tile at its incenter.
#[derive(Debug, Clone)]
pub struct HostGraph {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub max_depth: u32,
    pub adjacency: Vec<Vec<u32>>,
    pub edges: Vec<(u32, u32)>,
    pub depth: Vec<u32>,
    pub centers: Vec<DiskPoint>,
    pub seed_diameter: f64,
    /// Incenter-to-incenter distance across any shared side: 2·inradius.
    pub dual_edge_length: f64,
}

impl HostGraph {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    /// Vertices at this depth or less have their full neighborhood present.
    pub fn trusted(&self, v: u32) -> bool {
        self.max_depth > 0 && self.depth[v as usize] <= self.max_depth - 1
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize].len()
    }

    /// Hop distances from `source` to every vertex.
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
}

/// Empirical rough-isometry constants for the embedding of the host graph
/// into the disk (vertices at tile incenters, graph metric in hops).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmbeddingCertificate {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub sampled_vertices: usize,
}

/// Fits C₁ over sampled vertex pairs with C₂ fixed at the tile diameter
/// (any point of the plane lies within one tile of some incenter, so the
/// diameter also serves as the covering radius C₃). The sample is the BFS
/// prefix of the vertex ids, which is nested across depths: growing the
/// tiling can only shrink graph distances, never grow the certificate.
pub fn embedding_rough_isometry_check(host: &HostGraph, sample_size: usize) -> EmbeddingCertificate {
    let slack = host.seed_diameter;
    let n = host.n().min(sample_size);
    let mut c1 = 1.0f64;
    for a in 0..n as u32 {
        let dist = host.bfs_distances(a);
        for b in (a + 1)..n as u32 {
            let hops = dist[b as usize];
            if hops == 0 || hops == u32::MAX {
                continue;
            }
            let d_graph = hops as f64;
            let d_disk = hyp_distance(host.centers[a as usize], host.centers[b as usize]);
            // Two-sided fit: d_disk ≤ C₁·d_graph + C₂ and d_graph ≤ C₁·(d_disk + C₂).
            c1 = c1.max((d_disk - slack) / d_graph);
            c1 = c1.max(d_graph / (d_disk + slack));
        }
    }
    EmbeddingCertificate {
        c1,
        c2: slack,
        c3: slack,
        sampled_vertices: n,
    }
}

/// Versioned JSON document for a tiling and its dual graph.
#[derive(Debug, Serialize)]
pub struct TilingDocument {
    pub format_version: u32,
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub max_depth: u32,
    pub tiles: Vec<TileEntry>,
    pub dual_edges: Vec<(u32, u32)>,
}

#[derive(Debug, Serialize)]
pub struct TileEntry {
    pub id: u32,
    pub depth: u32,
    pub incenter: [f64; 2],
    pub vertices: [[f64; 2]; 3],
}

impl Tiling {
    pub fn to_document(&self) -> TilingDocument {
        let host = self.host_graph();
        TilingDocument {
            format_version: 1,
            p: self.p,
            q: self.q,
            r: self.r,
            max_depth: self.max_depth,
            tiles: self
                .tiles
                .iter()
                .map(|t| TileEntry {
                    id: t.id,
                    depth: t.depth,
                    incenter: [t.incenter.x(), t.incenter.y()],
                    vertices: [
                        [t.triangle.vertex(0).x(), t.triangle.vertex(0).y()],
                        [t.triangle.vertex(1).x(), t.triangle.vertex(1).y()],
                        [t.triangle.vertex(2).x(), t.triangle.vertex(2).y()],
                    ],
                })
                .collect(),
            dual_edges: host.edges,
        }
    }
}
