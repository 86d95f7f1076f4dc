//! ε-separated sampling of a domain and its boundary.
//!
//! The discretization graph has a boundary block V_Σ of maximal ε-separated
//! points on the domain boundary, an interior block of maximal ε-separated
//! points at least 4ε inside, one collar copy exactly 4ε inward of every
//! boundary vertex, and edges between any two vertices within 3ε plus the
//! boundary-collar pairings. The cobblestone map sends every sample to the
//! subgraph vertex whose tile it lives on, and the rough-isometry report
//! measures how far that map is from a graph isomorphism.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::domain::{
    BoundaryPrimitive, DomainModel, Piece, PieceKind, SegmentSource, SHRINK_FACTOR,
};
use crate::graphcore::{GraphError, GraphWithBoundary};
use crate::hypgeo::{direction_from, hyp_distance, point_at_direction, DiskPoint};
use crate::util::{SpatialHash, SplitMix64};

/// Candidate sets are this many times denser than ε.
pub const CANDIDATE_REFINEMENT: f64 = 10.0;
/// The interior keeps this many ε away from the boundary; collar copies sit
/// exactly there.
pub const COLLAR_FACTOR: f64 = 4.0;
/// Vertices within this many ε become adjacent (boundary-inclusive).
pub const EDGE_FACTOR: f64 = 3.0;
/// ε may not exceed the shrunken-triangle inradius over this divisor.
pub const EPSILON_MAX_DIVISOR: f64 = 4.0;
/// All-pairs distance checks switch to sampling beyond this many pairs.
pub const PAIR_CAP: u64 = 20_000_000;

const DIST_GUARD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DiscretizeError {
    #[error("epsilon must be positive")]
    EpsilonNotPositive,
    #[error("epsilon {epsilon} exceeds the cap {max} for this signature")]
    EpsilonTooLarge { epsilon: f64, max: f64 },
    #[error("no candidates to select from")]
    EmptyCandidates,
    #[error("domain has no pieces or no boundary")]
    DegenerateDomain,
    #[error("discretization graph is disconnected; epsilon too large")]
    Disconnected,
    #[error("no inward collar direction found for boundary vertex {index}")]
    CollarPlacement { index: usize },
    #[error("vertex {vertex} cannot be classified by any piece or primitive")]
    Unclassifiable { vertex: u32 },
    #[error("map length {got} does not match source graph size {expected}")]
    MapSizeMismatch { got: usize, expected: usize },
    #[error("{pairs} pairs exceed the cap and no sampling seed was given")]
    PairCapExceeded { pairs: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// The sampled graph. Interior vertices come first (grid points, then collar
/// copies), boundary vertices last, matching the boundary-block convention
/// of the spectrum routines.
#[derive(Debug, Clone)]
pub struct DiscretizationGraph {
    pub graph: GraphWithBoundary,
    /// Position of every graph vertex, aligned with graph indices.
    pub positions: Vec<DiskPoint>,
    /// (boundary vertex, its collar copy), both as graph indices.
    pub collar_pairs: Vec<(u32, u32)>,
    pub epsilon: f64,
    /// For every boundary-block vertex, the (curve, primitive) of the
    /// domain boundary it was sampled from.
    pub boundary_sources: Vec<(u32, u32)>,
    /// How many interior vertices are grid points; the rest are collar
    /// copies in boundary order.
    pub n_grid_interior: usize,
}

#[derive(Debug, Serialize)]
pub struct DiscretizationDocument {
    pub format_version: u32,
    pub epsilon: f64,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub n_collar_pairs: usize,
    pub positions: Vec<[f64; 2]>,
    pub roles: Vec<&'static str>,
    pub edges: Vec<(u32, u32)>,
}

impl DiscretizationGraph {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn to_document(&self) -> DiscretizationDocument {
        let n_interior = self.graph.n_interior();
        let collar_targets: HashSet<u32> = self.collar_pairs.iter().map(|&(_, c)| c).collect();
        DiscretizationDocument {
            format_version: 1,
            epsilon: self.epsilon,
            n_interior,
            n_boundary: self.graph.n_boundary(),
            n_collar_pairs: self.collar_pairs.len(),
            positions: self.positions.iter().map(|p| [p.x(), p.y()]).collect(),
            roles: (0..self.n())
                .map(|v| {
                    if v >= n_interior {
                        "boundary"
                    } else if collar_targets.contains(&(v as u32)) {
                        "collar"
                    } else {
                        "interior"
                    }
                })
                .collect(),
            edges: self.graph.edges().to_vec(),
        }
    }
}

/// Largest admissible ε for the domain's signature.
pub fn epsilon_max(d: &DomainModel) -> f64 {
    d.rho / EPSILON_MAX_DIVISOR
}

/// Greedy selection in lexicographic order of quantized coordinates.
/// Returns indices into `points` in selection order. Selected points are
/// pairwise more than ε apart and every input point is within ε of one.
fn greedy_separated(points: &[DiskPoint], epsilon: f64) -> Vec<u32> {
    let quant = |v: f64| (v / 1e-9).round() as i64;
    let mut order: Vec<u32> = (0..points.len() as u32).collect();
    order.sort_by_key(|&i| {
        let p = points[i as usize];
        (quant(p.x()), quant(p.y()), i)
    });
    let mut selected_hash = SpatialHash::new(epsilon + 1e-9);
    let mut chosen = Vec::new();
    for &i in &order {
        let p = points[i as usize];
        if selected_hash.within(p, epsilon).is_empty() {
            selected_hash.insert(p);
            chosen.push(i);
        }
    }
    chosen
}

/// Maximal ε-separated subset of a finite candidate set.
pub fn maximal_separated_subset(
    candidates: &[DiskPoint],
    epsilon: f64,
) -> Result<Vec<DiskPoint>, DiscretizeError> {
    if epsilon <= 0.0 {
        return Err(DiscretizeError::EpsilonNotPositive);
    }
    if candidates.is_empty() {
        return Err(DiscretizeError::EmptyCandidates);
    }
    Ok(greedy_separated(candidates, epsilon)
        .into_iter()
        .map(|i| candidates[i as usize])
        .collect())
}

/// Arc-length samples along one boundary primitive, spaced at most `spacing`
/// apart, start point included and end point left to the next primitive.
fn sample_primitive(prim: &BoundaryPrimitive, spacing: f64, out: &mut Vec<DiskPoint>) {
    match prim {
        BoundaryPrimitive::Circle { circle, .. } => {
            let n = (circle.perimeter() / spacing).ceil().max(8.0) as usize;
            for i in 0..n {
                out.push(circle.point_at_angle(std::f64::consts::TAU * i as f64 / n as f64));
            }
        }
        BoundaryPrimitive::Segment { seg, .. } => {
            let n = (seg.length() / spacing).ceil().max(1.0) as usize;
            for i in 0..n {
                out.push(seg.point_at(i as f64 / n as f64));
            }
        }
        BoundaryPrimitive::Fillet { arc, .. } => {
            let n = (arc.length() / spacing).ceil().max(1.0) as usize;
            for i in 0..n {
                out.push(arc.point_at(i as f64 / n as f64));
            }
        }
    }
}

/// Tile members of a cycle-gon piece, recovered by matching its polygon
/// vertices against the shrunken-triangle vertices (exact copies).
fn gon_members(d: &DomainModel, piece: &Piece) -> Vec<u32> {
    let mut by_bits: HashMap<(u64, u64), u32> = HashMap::new();
    for stone in &d.cobblestones {
        for k in 0..3 {
            let v = stone.shrunken.vertex(k);
            by_bits.insert((v.x().to_bits(), v.y().to_bits()), stone.vertex);
        }
    }
    let mut members: Vec<u32> = piece
        .polygon
        .iter()
        .filter_map(|p| by_bits.get(&(p.x().to_bits(), p.y().to_bits())).copied())
        .collect();
    members.sort_unstable();
    members.dedup();
    members
}

/// Geometry shared by the interior filters: which cobblestones, pieces and
/// boundary primitives are close enough to matter near a query point.
struct ProximityIndex<'a> {
    d: &'a DomainModel,
    centers: SpatialHash,
    reach: f64,
    pieces_of_stone: Vec<Vec<u32>>,
    prims_of_stone: Vec<Vec<(u32, u32)>>,
    ball_radius: f64,
}

impl<'a> ProximityIndex<'a> {
    fn build(d: &'a DomainModel, epsilon: f64) -> Self {
        let n = d.cobblestones.len();
        // Farthest a domain point can be from the center of its tile: the
        // unshrunken vertex distance.
        let r_tile = d.cobblestones[0]
            .shrunken
            .vertices()
            .iter()
            .map(|&v| hyp_distance(d.cobblestones[0].center, v))
            .fold(0.0, f64::max)
            / SHRINK_FACTOR;
        let reach = r_tile + COLLAR_FACTOR * epsilon + epsilon;
        let mut centers = SpatialHash::new(reach);
        for stone in &d.cobblestones {
            centers.insert(stone.center);
        }
        let mut pieces_of_stone = vec![Vec::new(); n];
        for (pi, piece) in d.pieces.iter().enumerate() {
            match piece.kind {
                PieceKind::Triangle { vertex } => {
                    pieces_of_stone[vertex as usize].push(pi as u32)
                }
                PieceKind::Quad { edge: (a, b) } => {
                    pieces_of_stone[a as usize].push(pi as u32);
                    pieces_of_stone[b as usize].push(pi as u32);
                }
                PieceKind::CycleGon { .. } => {
                    for m in gon_members(d, piece) {
                        pieces_of_stone[m as usize].push(pi as u32);
                    }
                }
            }
        }
        let mut prims_of_stone = vec![Vec::new(); n];
        for (ci, curve) in d.boundary.iter().enumerate() {
            for (qi, prim) in curve.primitives.iter().enumerate() {
                for (si, stone) in d.cobblestones.iter().enumerate() {
                    if prim.distance_to(stone.center) <= r_tile + DIST_GUARD {
                        prims_of_stone[si].push((ci as u32, qi as u32));
                    }
                }
            }
        }
        ProximityIndex {
            d,
            centers,
            reach,
            pieces_of_stone,
            prims_of_stone,
            ball_radius: d.rho / 2.0,
        }
    }

    fn nearby_stones(&self, p: DiskPoint) -> Vec<u32> {
        self.centers.within(p, self.reach)
    }

    /// Containment in the domain via nearby pieces and removed balls only;
    /// exact for any point, since pieces live inside their tiles.
    fn contains(&self, p: DiskPoint, stones: &[u32]) -> bool {
        for &s in stones {
            if self.is_ball_vertex(s)
                && hyp_distance(p, self.d.cobblestones[s as usize].center) < self.ball_radius
            {
                return false;
            }
        }
        stones.iter().any(|&s| {
            self.pieces_of_stone[s as usize]
                .iter()
                .any(|&pi| self.d.pieces[pi as usize].contains(p, 1e-12))
        })
    }

    fn is_ball_vertex(&self, stone: u32) -> bool {
        self.d
            .removed_balls
            .binary_search_by_key(&stone, |&(v, _)| v)
            .is_ok()
    }

    /// Minimum distance to any boundary primitive near the given stones.
    /// Only valid as a filter for thresholds below the index reach.
    fn boundary_distance(&self, p: DiskPoint, stones: &[u32]) -> f64 {
        let mut best = f64::INFINITY;
        let mut seen: HashSet<(u32, u32)> = HashSet::new();
        for &s in stones {
            for &(ci, qi) in &self.prims_of_stone[s as usize] {
                if seen.insert((ci, qi)) {
                    let dist =
                        self.d.boundary[ci as usize].primitives[qi as usize].distance_to(p);
                    best = best.min(dist);
                }
            }
        }
        best
    }
}

/// Builds the discretization graph of a domain at parameter ε.
pub fn build_discretization(
    d: &DomainModel,
    epsilon: f64,
) -> Result<DiscretizationGraph, DiscretizeError> {
    if epsilon <= 0.0 {
        return Err(DiscretizeError::EpsilonNotPositive);
    }
    let cap = epsilon_max(d);
    if epsilon > cap + DIST_GUARD {
        return Err(DiscretizeError::EpsilonTooLarge {
            epsilon,
            max: cap,
        });
    }
    if d.pieces.is_empty() || d.boundary.is_empty() || d.cobblestones.is_empty() {
        return Err(DiscretizeError::DegenerateDomain);
    }
    let spacing = epsilon / CANDIDATE_REFINEMENT;
    let collar = COLLAR_FACTOR * epsilon;

    // Boundary candidates, tagged by their primitive.
    let mut bound_cand: Vec<DiskPoint> = Vec::new();
    let mut bound_tag: Vec<(u32, u32)> = Vec::new();
    for (ci, curve) in d.boundary.iter().enumerate() {
        for (qi, prim) in curve.primitives.iter().enumerate() {
            let before = bound_cand.len();
            sample_primitive(prim, spacing, &mut bound_cand);
            bound_tag.resize(bound_cand.len(), (ci as u32, qi as u32));
            debug_assert!(bound_cand.len() > before);
        }
    }
    if bound_cand.is_empty() {
        return Err(DiscretizeError::DegenerateDomain);
    }
    let sigma_sel = greedy_separated(&bound_cand, epsilon);
    let v_sigma: Vec<DiskPoint> = sigma_sel.iter().map(|&i| bound_cand[i as usize]).collect();
    let boundary_sources: Vec<(u32, u32)> =
        sigma_sel.iter().map(|&i| bound_tag[i as usize]).collect();

    // Interior candidates: a polar grid of uniform hyperbolic density,
    // clipped to the domain minus the 4ε collar band.
    let index = ProximityIndex::build(d, epsilon);
    let r_max = d
        .pieces
        .iter()
        .flat_map(|p| p.polygon.iter())
        .map(|&v| hyp_distance(DiskPoint::origin(), v))
        .fold(0.0, f64::max)
        + spacing;
    let mut interior_cand: Vec<DiskPoint> = Vec::new();
    let accept = |p: DiskPoint, cand: &mut Vec<DiskPoint>| {
        let stones = index.nearby_stones(p);
        if stones.is_empty() {
            return;
        }
        if !index.contains(p, &stones) {
            return;
        }
        if index.boundary_distance(p, &stones) < collar {
            return;
        }
        cand.push(p);
    };
    accept(DiskPoint::origin(), &mut interior_cand);
    let mut ring = 1u64;
    loop {
        let radius = ring as f64 * spacing;
        if radius > r_max {
            break;
        }
        let count = ((std::f64::consts::TAU * radius.sinh()) / spacing).ceil().max(1.0) as u64;
        for i in 0..count {
            let angle = std::f64::consts::TAU * i as f64 / count as f64;
            let p = point_at_direction(DiskPoint::origin(), angle, radius);
            accept(p, &mut interior_cand);
        }
        ring += 1;
    }
    let grid_sel = greedy_separated(&interior_cand, epsilon);
    let mut positions: Vec<DiskPoint> = grid_sel
        .iter()
        .map(|&i| interior_cand[i as usize])
        .collect();
    let n_grid_interior = positions.len();

    // Collar copies, exactly 4ε inward of each boundary vertex. Directions
    // are tried on a ladder around the inward normal until one lands inside.
    let mut collar_pairs_local: Vec<usize> = Vec::with_capacity(v_sigma.len());
    for (bi, (&p, &(ci, qi))) in v_sigma.iter().zip(boundary_sources.iter()).enumerate() {
        let prim = &d.boundary[ci as usize].primitives[qi as usize];
        let base_dirs: [f64; 2] = match prim {
            BoundaryPrimitive::Circle { circle, .. } => {
                let away = direction_from(p, circle.center) + std::f64::consts::PI;
                [away, away + std::f64::consts::PI]
            }
            BoundaryPrimitive::Segment { seg, .. } => {
                let far = if hyp_distance(p, seg.end) > hyp_distance(p, seg.start) {
                    seg.end
                } else {
                    seg.start
                };
                let tangent = direction_from(p, far);
                [
                    tangent + std::f64::consts::FRAC_PI_2,
                    tangent - std::f64::consts::FRAC_PI_2,
                ]
            }
            BoundaryPrimitive::Fillet { arc, .. } => {
                let toward = direction_from(p, arc.center);
                [toward, toward + std::f64::consts::PI]
            }
        };
        // Fan of directions around each inward normal, fine enough to hit
        // the narrow cone available near a sharp corner of the boundary.
        let step = std::f64::consts::PI / 48.0;
        let mut found = None;
        'ladder: for floor in [epsilon, 0.0] {
            for dir in base_dirs {
                for k in 0..=24i32 {
                    for sign in [1.0, -1.0] {
                        if k == 0 && sign < 0.0 {
                            continue;
                        }
                        let q =
                            point_at_direction(p, dir + sign * k as f64 * step, collar);
                        let stones = index.nearby_stones(q);
                        if !index.contains(q, &stones) {
                            continue;
                        }
                        if index.boundary_distance(q, &stones) < floor {
                            continue;
                        }
                        found = Some(q);
                        break 'ladder;
                    }
                }
            }
        }
        let q = found.ok_or(DiscretizeError::CollarPlacement { index: bi })?;
        collar_pairs_local.push(positions.len());
        positions.push(q);
    }
    let n_interior = positions.len();
    positions.extend(v_sigma.iter().copied());
    let n = positions.len();

    // Edges: every pair within 3ε (inclusive), plus the collar pairings.
    let edge_reach = EDGE_FACTOR * epsilon + 1e-9;
    let mut all_hash = SpatialHash::new(edge_reach);
    for &p in &positions {
        all_hash.insert(p);
    }
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (i, &p) in positions.iter().enumerate() {
        for j in all_hash.within(p, EDGE_FACTOR * epsilon + DIST_GUARD) {
            if (j as usize) > i {
                edges.push((i as u32, j));
            }
        }
    }
    let mut collar_pairs: Vec<(u32, u32)> = Vec::with_capacity(v_sigma.len());
    for (bi, &partner) in collar_pairs_local.iter().enumerate() {
        let b_global = (n_interior + bi) as u32;
        edges.push((partner as u32, b_global));
        collar_pairs.push((b_global, partner as u32));
    }

    let graph = GraphWithBoundary::from_parts(n_interior, n - n_interior, &edges)
        .map_err(|e| match e {
            GraphError::Disconnected => DiscretizeError::Disconnected,
            other => DiscretizeError::Graph(other),
        })?;
    Ok(DiscretizationGraph {
        graph,
        positions,
        collar_pairs,
        epsilon,
        boundary_sources,
        n_grid_interior,
    })
}

/// The cobblestone map φ̄ from discretization vertices to subgraph vertices.
///
/// Boundary samples follow their primitive: a shrunken-triangle side maps to
/// that tile's boundary vertex, a removed-ball circle to its center vertex,
/// and lateral or fillet samples to the nearest triangle-side's vertex.
/// Interior samples map through their piece: a triangle to its center when
/// interior (else to a fixed interior neighbor), a quadrilateral to its
/// interior endpoint, a cycle-gon to a fixed interior member of its ring.
pub fn cobblestone_map(
    dg: &DiscretizationGraph,
    d: &DomainModel,
    g: &GraphWithBoundary,
) -> Result<Vec<u32>, DiscretizeError> {
    let n = dg.graph.n();
    let n_interior = dg.graph.n_interior();
    let mut phi = vec![u32::MAX; n];

    // Boundary triangle-side primitives, for the nearest-side rule.
    let mut side_prims: Vec<(&crate::hypgeo::GeodesicSegment, u32)> = Vec::new();
    for curve in &d.boundary {
        for prim in &curve.primitives {
            if let BoundaryPrimitive::Segment {
                seg,
                source: SegmentSource::TriangleSide { vertex },
            } = prim
            {
                side_prims.push((seg, *vertex));
            }
        }
    }
    let nearest_side = |p: DiskPoint| -> Option<u32> {
        side_prims
            .iter()
            .map(|(seg, v)| (seg.distance_to(p), *v))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, v)| v)
    };

    for bi in 0..dg.graph.n_boundary() {
        let global = n_interior + bi;
        let p = dg.positions[global];
        let (ci, qi) = dg.boundary_sources[bi];
        let target = match &d.boundary[ci as usize].primitives[qi as usize] {
            BoundaryPrimitive::Segment {
                source: SegmentSource::TriangleSide { vertex },
                ..
            } => *vertex,
            BoundaryPrimitive::Circle { vertex, .. } => *vertex,
            BoundaryPrimitive::Segment { .. } | BoundaryPrimitive::Fillet { .. } => nearest_side(p)
                .ok_or(DiscretizeError::Unclassifiable {
                    vertex: global as u32,
                })?,
        };
        if g.is_interior(target) {
            return Err(DiscretizeError::Unclassifiable {
                vertex: global as u32,
            });
        }
        phi[global] = target;
    }

    let interior_neighbor = |w: u32| -> Option<u32> {
        g.neighbors(w).iter().copied().find(|&u| g.is_interior(u))
    };
    for (global, &p) in dg.positions.iter().enumerate().take(n_interior) {
        let mut target = None;
        for piece in &d.pieces {
            if !piece.contains(p, 1e-9) {
                continue;
            }
            target = match piece.kind {
                PieceKind::Triangle { vertex } => {
                    if g.is_interior(vertex) {
                        Some(vertex)
                    } else {
                        interior_neighbor(vertex)
                    }
                }
                PieceKind::Quad { edge: (a, b) } => {
                    let (lo, hi) = (a.min(b), a.max(b));
                    if g.is_interior(lo) {
                        Some(lo)
                    } else if g.is_interior(hi) {
                        Some(hi)
                    } else {
                        None
                    }
                }
                PieceKind::CycleGon { .. } => gon_members(d, piece)
                    .into_iter()
                    .find(|&m| g.is_interior(m)),
            };
            break;
        }
        phi[global] = target.ok_or(DiscretizeError::Unclassifiable {
            vertex: global as u32,
        })?;
    }
    Ok(phi)
}

/// Empirical rough-isometry constants of a vertex map.
#[derive(Debug, Clone, Serialize)]
pub struct RoughIsometryReport {
    /// Multiplicative constant, at least 1.
    pub c1: f64,
    /// Additive constant of the two-sided inequality.
    pub c2: f64,
    /// Covering radius of the image in the target.
    pub c3: f64,
    pub pairs_checked: u64,
    pub sampled: bool,
    /// Whether boundary maps onto boundary, as a boundary-respecting rough
    /// isometry requires.
    pub boundary_onto: bool,
    pub c1_witness: (u32, u32),
    pub c2_witness: (u32, u32),
    pub c3_witness: Option<u32>,
}

/// Measures the constants over all vertex pairs (or a seeded sample when the
/// pair count exceeds the cap): C₁ is the worst distance ratio in either
/// direction, C₂ the worst additive residual given C₁, C₃ the covering
/// radius of the image.
pub fn rough_isometry_constants(
    phi: &[u32],
    source: &GraphWithBoundary,
    target: &GraphWithBoundary,
    sample_seed: Option<u64>,
) -> Result<RoughIsometryReport, DiscretizeError> {
    let n_s = source.n();
    let n_t = target.n();
    if phi.len() != n_s {
        return Err(DiscretizeError::MapSizeMismatch {
            got: phi.len(),
            expected: n_s,
        });
    }
    for (v, &w) in phi.iter().enumerate() {
        if w as usize >= n_t {
            return Err(DiscretizeError::Unclassifiable { vertex: v as u32 });
        }
    }
    let dist_t: Vec<Vec<u32>> = (0..n_t as u32).map(|v| target.bfs_distances(v)).collect();

    let total_pairs = (n_s as u64) * (n_s as u64);
    let (sources, sampled) = if total_pairs <= PAIR_CAP {
        ((0..n_s as u32).collect::<Vec<u32>>(), false)
    } else {
        let Some(seed) = sample_seed else {
            return Err(DiscretizeError::PairCapExceeded { pairs: total_pairs });
        };
        let want = ((PAIR_CAP / n_s as u64) as usize).max(1).min(n_s);
        let mut rng = SplitMix64::new(seed);
        let mut seen = HashSet::new();
        let mut picks = Vec::with_capacity(want);
        while picks.len() < want {
            let v = rng.below(n_s) as u32;
            if seen.insert(v) {
                picks.push(v);
            }
        }
        (picks, true)
    };

    // Cache source BFS rows so residuals can be measured against the final
    // multiplicative constant.
    let rows: Vec<Vec<u16>> = sources
        .iter()
        .map(|&s| {
            source
                .bfs_distances(s)
                .into_iter()
                .map(|x| {
                    debug_assert!(x < u16::MAX as u32, "distance overflows the cache");
                    x as u16
                })
                .collect()
        })
        .collect();

    let mut c1 = 1.0f64;
    let mut c1_witness = (0u32, 0u32);
    for (row, &s) in rows.iter().zip(sources.iter()) {
        let ts = phi[s as usize];
        for j in 0..n_s {
            let dx = row[j] as f64;
            let dy = dist_t[ts as usize][phi[j] as usize] as f64;
            if dx > 0.0 && dy > 0.0 {
                let r = (dy / dx).max(dx / dy);
                if r > c1 {
                    c1 = r;
                    c1_witness = (s, j as u32);
                }
            }
        }
    }
    let mut c2 = 0.0f64;
    let mut c2_witness = (0u32, 0u32);
    for (row, &s) in rows.iter().zip(sources.iter()) {
        let ts = phi[s as usize];
        for j in 0..n_s {
            let dx = row[j] as f64;
            let dy = dist_t[ts as usize][phi[j] as usize] as f64;
            let residual = (dx / c1 - dy).max(dy - c1 * dx);
            if residual > c2 {
                c2 = residual;
                c2_witness = (s, j as u32);
            }
        }
    }

    let mut imaged = vec![false; n_t];
    for &w in phi {
        imaged[w as usize] = true;
    }
    let mut c3 = 0.0f64;
    let mut c3_witness = None;
    for t in 0..n_t {
        let nearest = (0..n_t)
            .filter(|&s| imaged[s])
            .map(|s| dist_t[t][s])
            .min()
            .unwrap_or(u32::MAX) as f64;
        if nearest > c3 {
            c3 = nearest;
            c3_witness = Some(t as u32);
        }
    }

    let mut boundary_image = vec![false; n_t];
    let mut boundary_into = true;
    for v in source.n_interior()..n_s {
        let w = phi[v];
        if g_is_boundary(target, w) {
            boundary_image[w as usize] = true;
        } else {
            boundary_into = false;
        }
    }
    let boundary_onto = boundary_into
        && (target.n_interior()..n_t).all(|w| boundary_image[w]);

    Ok(RoughIsometryReport {
        c1,
        c2,
        c3,
        pairs_checked: (rows.len() as u64) * (n_s as u64),
        sampled,
        boundary_onto,
        c1_witness,
        c2_witness,
        c3_witness,
    })
}

fn g_is_boundary(g: &GraphWithBoundary, v: u32) -> bool {
    !g.is_interior(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, CornerMode};
    use crate::graphcore::ball_subgraph;
    use crate::tiling::generate_tiling;
    use std::sync::OnceLock;

    struct Fixture {
        g: GraphWithBoundary,
        domain: DomainModel,
        dg: DiscretizationGraph,
    }

    fn fixture(radius: u32, depth: u32) -> Fixture {
        let tiling = generate_tiling(2, 3, 7, depth).unwrap();
        let host = tiling.host_graph();
        let g = ball_subgraph(&host, 0, radius).unwrap();
        let domain = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        let eps = epsilon_max(&domain) / 2.0;
        let dg = build_discretization(&domain, eps).unwrap();
        Fixture { g, domain, dg }
    }

    fn ball1() -> &'static Fixture {
        static CELL: OnceLock<Fixture> = OnceLock::new();
        CELL.get_or_init(|| fixture(1, 3))
    }

    fn ball2() -> &'static Fixture {
        static CELL: OnceLock<Fixture> = OnceLock::new();
        CELL.get_or_init(|| fixture(2, 4))
    }

    #[test]
    fn separated_subset_keeps_or_merges_close_pairs() {
        let a = DiskPoint::origin();
        let b = DiskPoint::new(0.1, 0.0).unwrap();
        // d(a, b) = 2 atanh(0.1), a little over 0.2.
        assert!((hyp_distance(a, b) - 0.2006706954621512).abs() < 1e-12);
        let one = maximal_separated_subset(&[a, b], 1.0).unwrap();
        assert_eq!(one.len(), 1);
        let both = maximal_separated_subset(&[a, b], 0.1).unwrap();
        assert_eq!(both.len(), 2);
        let single = maximal_separated_subset(&[b], 0.5).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].x().to_bits(), b.x().to_bits());
    }

    #[test]
    fn separated_subset_rejects_bad_input() {
        assert!(matches!(
            maximal_separated_subset(&[], 0.5),
            Err(DiscretizeError::EmptyCandidates)
        ));
        assert!(matches!(
            maximal_separated_subset(&[DiskPoint::origin()], 0.0),
            Err(DiscretizeError::EpsilonNotPositive)
        ));
    }

    #[test]
    fn separated_subset_posts_hold_on_a_cloud() {
        let mut rng = SplitMix64::new(7);
        let mut cloud = Vec::new();
        for _ in 0..400 {
            let x = rng.unit_f64() * 1.2 - 0.6;
            let y = rng.unit_f64() * 1.2 - 0.6;
            if x * x + y * y < 0.6 {
                cloud.push(DiskPoint::new(x, y).unwrap());
            }
        }
        let eps = 0.15;
        let picked = maximal_separated_subset(&cloud, eps).unwrap();
        for i in 0..picked.len() {
            for j in 0..i {
                assert!(hyp_distance(picked[i], picked[j]) > eps);
            }
        }
        for &c in &cloud {
            let covered = picked.iter().any(|&p| hyp_distance(p, c) <= eps);
            assert!(covered, "candidate not covered");
        }
        let again = maximal_separated_subset(&cloud, eps).unwrap();
        assert_eq!(picked.len(), again.len());
        for (p, q) in picked.iter().zip(again.iter()) {
            assert_eq!(p.x().to_bits(), q.x().to_bits());
            assert_eq!(p.y().to_bits(), q.y().to_bits());
        }
    }

    #[test]
    fn epsilon_cap_is_enforced() {
        let f = ball1();
        let cap = epsilon_max(&f.domain);
        assert!(matches!(
            build_discretization(&f.domain, cap * 1.01),
            Err(DiscretizeError::EpsilonTooLarge { .. })
        ));
    }

    #[test]
    fn boundary_block_is_separated_and_maximal() {
        let f = ball1();
        let eps = f.dg.epsilon;
        let nb = f.dg.graph.n_boundary();
        let ni = f.dg.graph.n_interior();
        assert!(nb > 0);
        for i in 0..nb {
            for j in 0..i {
                let d = hyp_distance(f.dg.positions[ni + i], f.dg.positions[ni + j]);
                assert!(d > eps, "boundary separation violated: {d}");
            }
        }
        // Probe with the dense candidate set: every probe point on every
        // primitive must be within eps of some selected vertex.
        let spacing = eps / CANDIDATE_REFINEMENT;
        let mut probes = Vec::new();
        for curve in &f.domain.boundary {
            for prim in &curve.primitives {
                sample_primitive(prim, spacing, &mut probes);
            }
        }
        for &probe in &probes {
            let covered = (0..nb)
                .any(|i| hyp_distance(f.dg.positions[ni + i], probe) <= eps);
            assert!(covered, "probe point farther than eps from V_sigma");
        }
    }

    #[test]
    fn edges_respect_the_three_epsilon_threshold() {
        let f = ball1();
        let eps = f.dg.epsilon;
        let n = f.dg.n();
        let pairings: HashSet<(u32, u32)> = f
            .dg
            .collar_pairs
            .iter()
            .map(|&(b, c)| (b.min(c), b.max(c)))
            .collect();
        let edge_set: HashSet<(u32, u32)> = f
            .dg
            .graph
            .edges()
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        for i in 0..n as u32 {
            for j in 0..i {
                let key = (j, i);
                let d = hyp_distance(f.dg.positions[i as usize], f.dg.positions[j as usize]);
                if d <= EDGE_FACTOR * eps - 1e-9 {
                    assert!(edge_set.contains(&key), "missing edge at distance {d}");
                }
                if edge_set.contains(&key) && !pairings.contains(&key) {
                    assert!(d <= EDGE_FACTOR * eps + 1e-9, "edge too long: {d}");
                }
            }
        }
    }

    #[test]
    fn collar_copies_pair_exactly_once_at_four_epsilon() {
        let f = ball1();
        let eps = f.dg.epsilon;
        assert_eq!(f.dg.collar_pairs.len(), f.dg.graph.n_boundary());
        let mut seen_b = HashSet::new();
        let mut seen_c = HashSet::new();
        for &(b, c) in &f.dg.collar_pairs {
            assert!(seen_b.insert(b) && seen_c.insert(c));
            assert!(!f.dg.graph.is_interior(b));
            assert!(f.dg.graph.is_interior(c));
            let d = hyp_distance(f.dg.positions[b as usize], f.dg.positions[c as usize]);
            assert!((d - COLLAR_FACTOR * eps).abs() < 1e-9, "pair distance {d}");
            assert!(f.domain.contains(f.dg.positions[c as usize]));
            let adjacent = f.dg.graph.neighbors(b).contains(&c);
            assert!(adjacent, "pairing edge missing");
        }
    }

    #[test]
    fn interior_grid_keeps_the_collar_clear() {
        let f = ball1();
        let eps = f.dg.epsilon;
        for i in 0..f.dg.n_grid_interior {
            let bd = f.domain.boundary_distance(f.dg.positions[i]);
            assert!(
                bd >= COLLAR_FACTOR * eps - 1e-9,
                "grid point at boundary distance {bd}"
            );
        }
    }

    #[test]
    fn every_circle_meets_its_packing_bound() {
        let f = ball1();
        let eps = f.dg.epsilon;
        for (ci, curve) in f.domain.boundary.iter().enumerate() {
            if !curve.is_circle() {
                continue;
            }
            let BoundaryPrimitive::Circle { circle, .. } = &curve.primitives[0] else {
                unreachable!()
            };
            let count = f
                .dg
                .boundary_sources
                .iter()
                .filter(|&&(c, _)| c == ci as u32)
                .count();
            let bound = (circle.perimeter() / eps).ceil() / 3.0;
            assert!(
                count as f64 >= bound,
                "circle {ci}: {count} vertices < bound {bound}"
            );
        }
    }

    #[test]
    fn halving_epsilon_at_least_doubles_the_boundary_block() {
        let f = ball1();
        let eps = f.dg.epsilon;
        let finer = build_discretization(&f.domain, eps / 2.0).unwrap();
        assert!(
            finer.graph.n_boundary() >= 2 * f.dg.graph.n_boundary(),
            "{} vs {}",
            finer.graph.n_boundary(),
            f.dg.graph.n_boundary()
        );
    }

    #[test]
    fn rebuild_is_deterministic() {
        let f = ball1();
        let again = build_discretization(&f.domain, f.dg.epsilon).unwrap();
        assert_eq!(f.dg.n(), again.n());
        for (p, q) in f.dg.positions.iter().zip(again.positions.iter()) {
            assert_eq!(p.x().to_bits(), q.x().to_bits());
            assert_eq!(p.y().to_bits(), q.y().to_bits());
        }
        assert_eq!(f.dg.graph.edges(), again.graph.edges());
    }

    #[test]
    fn cobblestone_map_obeys_the_case_rules() {
        let f = ball2();
        let phi = cobblestone_map(&f.dg, &f.domain, &f.g).unwrap();
        let ni = f.dg.graph.n_interior();
        // Boundary samples land in B, interior samples in the interior.
        for (v, &w) in phi.iter().enumerate() {
            if v >= ni {
                assert!(!f.g.is_interior(w), "V_sigma vertex mapped into interior");
            } else {
                assert!(f.g.is_interior(w), "V_I vertex mapped into boundary");
            }
        }
        // Circle samples map to the circle's own vertex.
        for bi in 0..f.dg.graph.n_boundary() {
            let (ci, qi) = f.dg.boundary_sources[bi];
            if let BoundaryPrimitive::Circle { vertex, .. } =
                &f.domain.boundary[ci as usize].primitives[qi as usize]
            {
                assert_eq!(phi[ni + bi], *vertex);
            }
        }
        // Samples inside the shrunken triangle of an interior vertex map to
        // that vertex.
        for (v, &w) in phi.iter().enumerate().take(ni) {
            let p = f.dg.positions[v];
            for stone in &f.domain.cobblestones {
                if f.g.is_interior(stone.vertex) && stone.shrunken.contains(p, -1e-9) {
                    assert_eq!(w, stone.vertex);
                }
            }
        }
        // Surjective onto the whole vertex set.
        let mut hit = vec![false; f.g.n()];
        for &w in &phi {
            hit[w as usize] = true;
        }
        assert!(hit.iter().all(|&h| h), "cobblestone map not surjective");
    }

    #[test]
    fn identity_map_has_trivial_constants() {
        let f = ball2();
        let phi: Vec<u32> = (0..f.g.n() as u32).collect();
        let report = rough_isometry_constants(&phi, &f.g, &f.g, None).unwrap();
        assert_eq!(report.c1, 1.0);
        assert_eq!(report.c2, 0.0);
        assert_eq!(report.c3, 0.0);
        assert!(report.boundary_onto);
        assert!(!report.sampled);
    }

    #[test]
    fn collapse_map_constants_satisfy_the_inequality() {
        let f = ball2();
        let n = f.g.n();
        let phi = vec![0u32; n];
        let report = rough_isometry_constants(&phi, &f.g, &f.g, None).unwrap();
        // The graph has diameter at least 3, all packed into C2.
        assert!(report.c2 >= 3.0 / report.c1 - 1e-12);
        // Re-check the two-sided inequality over all pairs.
        for u in 0..n as u32 {
            let row = f.g.bfs_distances(u);
            for v in 0..n {
                let dx = row[v] as f64;
                assert!(dx / report.c1 - report.c2 <= 1e-12);
                assert!(0.0 <= report.c1 * dx + report.c2 + 1e-12);
            }
        }
    }

    #[test]
    fn discretization_constants_are_finite_and_boundary_respecting() {
        let f = ball2();
        let phi = cobblestone_map(&f.dg, &f.domain, &f.g).unwrap();
        let report = rough_isometry_constants(&phi, &f.dg.graph, &f.g, Some(11)).unwrap();
        assert!(report.c1 >= 1.0 && report.c1.is_finite());
        assert!(report.c2 >= 0.0 && report.c2.is_finite());
        assert_eq!(report.c3, 0.0, "surjective map must cover the target");
        assert!(report.boundary_onto);
        // Spot-check the inequality on a few sources.
        let dist_t: Vec<Vec<u32>> = (0..f.g.n() as u32)
            .map(|v| f.g.bfs_distances(v))
            .collect();
        for &s in &[0u32, 7, 23] {
            let row = f.dg.graph.bfs_distances(s);
            for j in 0..f.dg.n() {
                let dx = row[j] as f64;
                let dy = dist_t[phi[s as usize] as usize][phi[j] as usize] as f64;
                assert!(dy <= report.c1 * dx + report.c2 + 1e-9);
                assert!(dx / report.c1 - report.c2 <= dy + 1e-9);
            }
        }
    }

    #[test]
    fn pair_cap_forces_sampling_or_errors() {
        // A path long enough that the pair count tops the cap.
        let n = 5000u32;
        let edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let g = GraphWithBoundary::from_parts(n as usize - 1, 1, &edges).unwrap();
        let phi: Vec<u32> = (0..n).collect();
        assert!(matches!(
            rough_isometry_constants(&phi, &g, &g, None),
            Err(DiscretizeError::PairCapExceeded { .. })
        ));
        let report = rough_isometry_constants(&phi, &g, &g, Some(3)).unwrap();
        assert!(report.sampled);
        assert_eq!(report.c1, 1.0);
        assert_eq!(report.c2, 0.0);
        assert_eq!(report.c3, 0.0);
    }

    #[test]
    fn document_round_trip_counts() {
        let f = ball1();
        let doc = f.dg.to_document();
        assert_eq!(doc.positions.len(), f.dg.n());
        assert_eq!(doc.roles.len(), f.dg.n());
        assert_eq!(doc.n_collar_pairs, f.dg.graph.n_boundary());
        assert_eq!(
            doc.roles.iter().filter(|r| **r == "collar").count(),
            f.dg.collar_pairs.len()
        );
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"epsilon\""));
    }
}
