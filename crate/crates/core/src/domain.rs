//! Hyperbolic domains read off a subgraph of the tiling's dual graph.
//!
//! Every vertex of the boundary-augmented subgraph contributes a copy of the
//! fundamental triangle shrunk by 9/10 toward its incenter. Adjacent vertices
//! are joined by a quadrilateral across their shared tile side, and a tiling
//! corner whose full ring of tiles lies in the subgraph (with consecutive
//! centers adjacent) is filled by a cycle-gon. A ball of radius rho/2 is then
//! removed at every boundary vertex, rho being the inradius of the shrunken
//! triangle, and boundary corners are smoothed by circular fillet arcs
//! confined to lambda/10 neighborhoods, lambda being the shortest segment
//! class the construction can produce.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::graphcore::GraphWithBoundary;
use crate::hypgeo::{
    angle_at, direction_from, hyp_distance, point_at_direction, signed_distance_to_geodesic,
    CircularArc, DiskPoint, GeoError, GeodesicSegment, HypCircle, HypTriangle,
};
use crate::tiling::Tiling;

/// Shrink factor applied from the incenter toward each triangle vertex.
pub const SHRINK_FACTOR: f64 = 0.9;
/// Fillet arcs stay within lambda over this factor of their corner.
pub const FILLET_FRACTION: f64 = 10.0;
/// Relative tolerance for fillet-arc length quadrature.
pub const FILLET_QUADRATURE_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error(transparent)]
    Geometry(#[from] GeoError),
    #[error("graph carries no host tile references")]
    MissingHostIds,
    #[error("graph vertex {vertex} maps to no tile of the tiling")]
    TileLookup { vertex: u32 },
    #[error("edge ({a}, {b}) has no shared tile side")]
    SharedSideNotFound { a: u32, b: u32 },
    #[error("boundary corner of vertex {vertex} at tiling corner {corner} met {count} segments, expected 2")]
    CornerIncidence { vertex: u32, corner: u32, count: usize },
    #[error("pieces {a} and {b} overlap")]
    OverlappingPieces { a: usize, b: usize },
    #[error("sample point escaped piece {piece}")]
    SampleEscaped { piece: usize },
    #[error("no shrunken triangle piece for vertex {vertex}")]
    MissingTriangle { vertex: u32 },
    #[error("no quadrilateral piece for edge ({a}, {b})")]
    MissingQuad { a: u32, b: u32 },
    #[error("quadrilateral piece for ({a}, {b}) does not match any graph edge")]
    UnexpectedQuad { a: u32, b: u32 },
    #[error("cycle-gon expected at tiling corner {corner} but missing")]
    MissingGon { corner: u32 },
    #[error("cycle-gon at tiling corner {corner} has no fully surrounded cycle")]
    UnexpectedGon { corner: u32 },
    #[error("removed balls do not match the boundary vertex set (vertex {vertex})")]
    BallMismatch { vertex: u32 },
    #[error("removed ball at vertex {vertex} leaves its shrunken triangle")]
    BallOutsideTriangle { vertex: u32 },
    #[error("boundary has {circles} circles for {boundary} boundary vertices")]
    CircleCountMismatch { circles: usize, boundary: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CornerMode {
    /// Corners replaced by tangent circular fillets.
    Smooth,
    /// Corners kept as-is; used to measure what the smoothing changes.
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceKind {
    /// Shrunken triangle of a graph vertex (interior or boundary).
    Triangle { vertex: u32 },
    /// Connector quadrilateral of an edge, tagged by graph vertex pair.
    Quad { edge: (u32, u32) },
    /// Cycle-gon filling a fully surrounded tiling corner.
    CycleGon { corner: u32 },
}

/// A convex polygon piece of the domain, vertices in counterclockwise order.
#[derive(Debug, Clone)]
pub struct Piece {
    pub kind: PieceKind,
    pub polygon: Vec<DiskPoint>,
}

impl Piece {
    fn new(kind: PieceKind, mut polygon: Vec<DiskPoint>) -> Self {
        // Normalize to counterclockwise so signed side distances agree.
        let mut shoelace = 0.0;
        for i in 0..polygon.len() {
            let a = polygon[i];
            let b = polygon[(i + 1) % polygon.len()];
            shoelace += a.x() * b.y() - b.x() * a.y();
        }
        if shoelace < 0.0 {
            polygon.reverse();
        }
        Piece { kind, polygon }
    }

    /// True when `p` is on the interior side of every edge. Negative `tol`
    /// demands strict interiority by that margin.
    pub fn contains(&self, p: DiskPoint, tol: f64) -> bool {
        let n = self.polygon.len();
        (0..n).all(|i| {
            signed_distance_to_geodesic(p, self.polygon[i], self.polygon[(i + 1) % n]) >= -tol
        })
    }

    /// A point well inside the piece: the vertex average in the Klein model,
    /// where geodesic convexity is ordinary convexity.
    pub fn interior_anchor(&self) -> DiskPoint {
        let (mut kx, mut ky) = (0.0, 0.0);
        for v in &self.polygon {
            let (x, y) = klein(*v);
            kx += x;
            ky += y;
        }
        let n = self.polygon.len() as f64;
        from_klein(kx / n, ky / n)
    }
}

fn klein(p: DiskPoint) -> (f64, f64) {
    let s = 2.0 / (1.0 + p.euclidean_norm() * p.euclidean_norm());
    (s * p.x(), s * p.y())
}

fn from_klein(kx: f64, ky: f64) -> DiskPoint {
    let n2 = kx * kx + ky * ky;
    let s = 1.0 + (1.0 - n2).max(0.0).sqrt();
    DiskPoint::new(kx / s, ky / s).expect("Klein average escaped the disk")
}

/// Where a boundary segment comes from; drives the cobblestone map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentSource {
    /// Uncovered side of the shrunken triangle of this graph vertex.
    TriangleSide { vertex: u32 },
    /// Lateral side of the connector quadrilateral of this edge, at the
    /// given tiling corner.
    Lateral { edge: (u32, u32), corner: u32 },
    /// Straight chord standing in for a fillet at a nearly flat corner.
    CornerChord,
}

#[derive(Debug, Clone)]
pub enum BoundaryPrimitive {
    Segment {
        seg: GeodesicSegment,
        source: SegmentSource,
    },
    Fillet {
        arc: CircularArc,
        /// The corner this fillet replaces; the arc stays within
        /// lambda/10 of it.
        corner: DiskPoint,
    },
    Circle {
        circle: HypCircle,
        /// Boundary graph vertex whose ball was removed.
        vertex: u32,
    },
}

impl BoundaryPrimitive {
    pub fn length(&self) -> f64 {
        match self {
            BoundaryPrimitive::Segment { seg, .. } => seg.length(),
            BoundaryPrimitive::Fillet { arc, .. } => arc.length_by_quadrature(FILLET_QUADRATURE_TOL),
            BoundaryPrimitive::Circle { circle, .. } => circle.perimeter(),
        }
    }

    pub fn distance_to(&self, p: DiskPoint) -> f64 {
        match self {
            BoundaryPrimitive::Segment { seg, .. } => seg.distance_to(p),
            BoundaryPrimitive::Fillet { arc, .. } => arc.distance_to(p),
            BoundaryPrimitive::Circle { circle, .. } => {
                (hyp_distance(circle.center, p) - circle.radius).abs()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub primitives: Vec<BoundaryPrimitive>,
}

impl BoundaryCurve {
    pub fn is_circle(&self) -> bool {
        matches!(
            self.primitives.as_slice(),
            [BoundaryPrimitive::Circle { .. }]
        )
    }

    pub fn length(&self) -> f64 {
        self.primitives.iter().map(|p| p.length()).sum()
    }
}

/// The tile of one subgraph vertex together with its shrunken triangle.
#[derive(Debug, Clone)]
pub struct Cobblestone {
    pub vertex: u32,
    pub tile: u32,
    pub center: DiskPoint,
    pub shrunken: HypTriangle,
}

#[derive(Debug, Clone)]
pub struct DomainModel {
    pub pieces: Vec<Piece>,
    /// One removed ball per boundary vertex, keyed by graph vertex index.
    pub removed_balls: Vec<(u32, HypCircle)>,
    pub boundary: Vec<BoundaryCurve>,
    pub cobblestones: Vec<Cobblestone>,
    /// Interior angles at the pre-smoothing boundary corners.
    pub corner_angles: Vec<f64>,
    /// Shortest segment class of the construction for this signature.
    pub lambda: f64,
    /// Inradius of the shrunken fundamental triangle.
    pub rho: f64,
    pub mode: CornerMode,
}

#[derive(Debug, Serialize)]
pub struct DomainDocument {
    pub format_version: u32,
    pub mode: CornerMode,
    pub lambda: f64,
    pub rho: f64,
    pub n_triangles: usize,
    pub n_quads: usize,
    pub n_cycle_gons: usize,
    pub removed_balls: Vec<BallEntry>,
    pub curves: Vec<CurveEntry>,
    pub total_boundary_length: f64,
}

#[derive(Debug, Serialize)]
pub struct BallEntry {
    pub vertex: u32,
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Serialize)]
pub struct CurveEntry {
    pub circle: bool,
    pub primitives: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub n_triangles: usize,
    pub n_quads: usize,
    pub n_cycle_gons: usize,
    pub n_removed_balls: usize,
    pub n_boundary_curves: usize,
    pub n_outer_curves: usize,
}

impl DomainModel {
    pub fn n_triangles(&self) -> usize {
        self.pieces
            .iter()
            .filter(|p| matches!(p.kind, PieceKind::Triangle { .. }))
            .count()
    }

    pub fn n_quads(&self) -> usize {
        self.pieces
            .iter()
            .filter(|p| matches!(p.kind, PieceKind::Quad { .. }))
            .count()
    }

    pub fn n_cycle_gons(&self) -> usize {
        self.pieces
            .iter()
            .filter(|p| matches!(p.kind, PieceKind::CycleGon { .. }))
            .count()
    }

    pub fn n_outer_curves(&self) -> usize {
        self.boundary.iter().filter(|c| !c.is_circle()).count()
    }

    /// True when `p` lies in the domain: inside some piece and outside every
    /// removed ball. Corners are resolved at the pre-smoothing polygon.
    pub fn contains(&self, p: DiskPoint) -> bool {
        if self.removed_balls.iter().any(|(_, b)| b.contains(p)) {
            return false;
        }
        self.pieces.iter().any(|piece| piece.contains(p, 1e-12))
    }

    /// Distance from `p` to the nearest boundary primitive.
    pub fn boundary_distance(&self, p: DiskPoint) -> f64 {
        self.boundary
            .iter()
            .flat_map(|c| c.primitives.iter())
            .map(|prim| prim.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distinct boundary segment lengths, clustered at the given gap.
    pub fn segment_length_classes(&self, gap: f64) -> usize {
        let lengths: Vec<f64> = self
            .boundary
            .iter()
            .flat_map(|c| c.primitives.iter())
            .filter_map(|p| match p {
                BoundaryPrimitive::Segment { seg, .. } => Some(seg.length()),
                _ => None,
            })
            .collect();
        cluster_count(lengths, gap)
    }

    /// Distinct pre-smoothing corner angles, clustered at the given gap.
    pub fn corner_angle_classes(&self, gap: f64) -> usize {
        cluster_count(self.corner_angles.clone(), gap)
    }

    pub fn to_document(&self) -> DomainDocument {
        DomainDocument {
            format_version: 1,
            mode: self.mode,
            lambda: self.lambda,
            rho: self.rho,
            n_triangles: self.n_triangles(),
            n_quads: self.n_quads(),
            n_cycle_gons: self.n_cycle_gons(),
            removed_balls: self
                .removed_balls
                .iter()
                .map(|(v, b)| BallEntry {
                    vertex: *v,
                    center: [b.center.x(), b.center.y()],
                    radius: b.radius,
                })
                .collect(),
            curves: self
                .boundary
                .iter()
                .map(|c| CurveEntry {
                    circle: c.is_circle(),
                    primitives: c.primitives.len(),
                    length: c.length(),
                })
                .collect(),
            total_boundary_length: boundary_length(self),
        }
    }
}

fn cluster_count(mut values: Vec<f64>, gap: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    values.sort_by(f64::total_cmp);
    1 + values.windows(2).filter(|w| w[1] - w[0] > gap).count()
}

/// Shrinks a triangle by moving each vertex toward the incenter so that the
/// new vertex sits at 9/10 of the original incenter distance.
pub fn shrink_triangle(t: &HypTriangle) -> Result<HypTriangle, GeoError> {
    let (incenter, _) = t.incenter_and_inradius()?;
    let mut vertices = [DiskPoint::origin(); 3];
    for (k, v) in vertices.iter_mut().enumerate() {
        let target = t.vertex(k);
        let d = hyp_distance(incenter, target);
        *v = point_at_direction(
            incenter,
            direction_from(incenter, target),
            SHRINK_FACTOR * d,
        );
    }
    HypTriangle::from_vertices(vertices)
}

/// The shortest segment class and the shrunken-triangle inradius for a
/// signature, computed once from the seed triangle and its reflections. The
/// classes are the three shrunken sides and the three corner laterals.
pub fn lambda_and_rho(tiling: &Tiling) -> Result<(f64, f64), GeoError> {
    let seed_prime = shrink_triangle(&tiling.seed_triangle)?;
    let (_, rho) = seed_prime.incenter_and_inradius()?;
    let mut lambda = seed_prime
        .side_lengths()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    for side in 0..3 {
        let mirror = tiling.seed_triangle.reflection_across_side(side);
        let neighbor = tiling.seed_triangle.transformed(&mirror);
        let neighbor_prime = shrink_triangle(&neighbor)?;
        for corner in [(side + 1) % 3, (side + 2) % 3] {
            let lateral = hyp_distance(seed_prime.vertex(corner), neighbor_prime.vertex(corner));
            lambda = lambda.min(lateral);
        }
    }
    Ok((lambda, rho))
}

/// One boundary segment of the pre-smoothing skeleton, with its endpoint
/// keys (graph vertex, tiling corner).
struct SkeletonSegment {
    seg: GeodesicSegment,
    keys: [(u32, u32); 2],
    source: SegmentSource,
}

struct FilletPieces {
    trim_start: DiskPoint,
    trim_end: DiskPoint,
    primitive: BoundaryPrimitive,
}

/// Replaces the corner at `p` between rays toward `a` and `b` by a tangent
/// circular arc through the trim points. Falls back to a straight join when
/// the corner is too flat for a finite tangent circle.
fn fillet_corner(p: DiskPoint, a: DiskPoint, b: DiskPoint, trim: f64) -> FilletPieces {
    let phi1 = direction_from(p, a);
    let phi2 = direction_from(p, b);
    let p1 = point_at_direction(p, phi1, trim);
    let p2 = point_at_direction(p, phi2, trim);
    let mut delta = (phi2 - phi1).rem_euclid(std::f64::consts::TAU);
    if delta > std::f64::consts::PI {
        delta -= std::f64::consts::TAU;
    }
    let alpha = delta.abs() / 2.0;
    let tan_term = alpha.tan() * trim.sinh();
    if !(1e-9..=0.999).contains(&tan_term) {
        // Nearly straight corner (or a degenerate cusp): the chord between
        // the trim points already stays inside the lambda/10 ball.
        return FilletPieces {
            trim_start: p1,
            trim_end: p2,
            primitive: BoundaryPrimitive::Segment {
                seg: GeodesicSegment::new(p1, p2),
                source: SegmentSource::CornerChord,
            },
        };
    }
    let radius = tan_term.atanh();
    let dist = (trim.cosh() * radius.cosh()).acosh();
    let center = point_at_direction(p, phi1 + delta / 2.0, dist);
    let start_angle = direction_from(center, p1);
    let end_angle = direction_from(center, p2);
    let mut sweep = (end_angle - start_angle).rem_euclid(std::f64::consts::TAU);
    if sweep > std::f64::consts::PI {
        sweep -= std::f64::consts::TAU;
    }
    FilletPieces {
        trim_start: p1,
        trim_end: p2,
        primitive: BoundaryPrimitive::Fillet {
            arc: CircularArc {
                center,
                radius,
                start_angle,
                sweep,
            },
            corner: p,
        },
    }
}

/// Builds the domain of a subgraph over its tiling.
pub fn build_domain(
    g: &GraphWithBoundary,
    tiling: &Tiling,
    mode: CornerMode,
) -> Result<DomainModel, DomainError> {
    let host_ids = g.host_ids().ok_or(DomainError::MissingHostIds)?;
    let n = g.n();
    let mut tile_of = vec![0u32; n];
    for v in 0..n {
        let tile = host_ids[v];
        if tile as usize >= tiling.tiles.len() {
            return Err(DomainError::TileLookup { vertex: v as u32 });
        }
        tile_of[v] = tile;
    }
    let (lambda, rho) = lambda_and_rho(tiling)?;
    let seed_prime = shrink_triangle(&tiling.seed_triangle)?;

    // Shrunken triangles, congruent by construction: transport the shrunken
    // seed by each tile's isometry so vertex k matches corner_ids[k].
    let mut shrunken = Vec::with_capacity(n);
    let mut cobblestones = Vec::with_capacity(n);
    for v in 0..n {
        let tile = &tiling.tiles[tile_of[v] as usize];
        let tri = seed_prime.transformed(&tile.isometry);
        cobblestones.push(Cobblestone {
            vertex: v as u32,
            tile: tile.id,
            center: tile.incenter,
            shrunken: tri,
        });
        shrunken.push(tri);
    }
    let corner_index = |v: usize, corner: u32| -> usize {
        let tile = &tiling.tiles[tile_of[v] as usize];
        (0..3)
            .find(|&k| tile.corner_ids[k] == corner)
            .expect("corner does not belong to the vertex tile")
    };
    let h_point = |v: usize, corner: u32| shrunken[v].vertex(corner_index(v, corner));

    let mut pieces: Vec<Piece> = (0..n)
        .map(|v| {
            Piece::new(
                PieceKind::Triangle { vertex: v as u32 },
                shrunken[v].vertices().to_vec(),
            )
        })
        .collect();

    // Connector quadrilaterals, one per edge of the augmented graph.
    let mut edge_set: HashSet<(u32, u32)> = HashSet::new();
    struct QuadInfo {
        a: usize,
        b: usize,
        corners: (u32, u32),
    }
    let mut quads = Vec::new();
    for &(a, b) in g.edges() {
        edge_set.insert((a.min(b), a.max(b)));
        let (a, b) = (a as usize, b as usize);
        let tile_a = &tiling.tiles[tile_of[a] as usize];
        let side = (0..3)
            .find(|&k| tile_a.neighbors[k] == Some(tile_of[b]))
            .ok_or(DomainError::SharedSideNotFound {
                a: a as u32,
                b: b as u32,
            })?;
        let c1 = tile_a.corner_ids[(side + 1) % 3];
        let c2 = tile_a.corner_ids[(side + 2) % 3];
        pieces.push(Piece::new(
            PieceKind::Quad {
                edge: (a as u32, b as u32),
            },
            vec![
                h_point(a, c1),
                h_point(a, c2),
                h_point(b, c2),
                h_point(b, c1),
            ],
        ));
        quads.push(QuadInfo {
            a,
            b,
            corners: (c1, c2),
        });
    }
    let in_eprime =
        |x: u32, y: u32| -> bool { edge_set.contains(&(x.min(y), x.max(y))) };

    // Cycle-gons at fully surrounded tiling corners.
    let vertex_of_tile: HashMap<u32, u32> = (0..n as u32).map(|v| (tile_of[v as usize], v)).collect();
    let mut gon_corners: HashSet<u32> = HashSet::new();
    for corner_id in 0..tiling.corners.len() as u32 {
        let Some(ring) = tiling.tiles_around_corner(corner_id) else {
            continue;
        };
        let members: Option<Vec<u32>> = ring
            .iter()
            .map(|t| vertex_of_tile.get(t).copied())
            .collect();
        let Some(members) = members else { continue };
        let closed = (0..members.len())
            .all(|i| in_eprime(members[i], members[(i + 1) % members.len()]));
        if !closed {
            continue;
        }
        gon_corners.insert(corner_id);
        let polygon = members
            .iter()
            .map(|&v| h_point(v as usize, corner_id))
            .collect();
        pieces.push(Piece::new(PieceKind::CycleGon { corner: corner_id }, polygon));
    }

    // Interior-angle wedges contributed by quadrilaterals at each
    // (vertex, corner) key; used to classify boundary corners.
    let mut quad_wedges: HashMap<(u32, u32), f64> = HashMap::new();
    for q in &quads {
        let (c1, c2) = q.corners;
        for (v, u) in [(q.a, q.b), (q.b, q.a)] {
            for (x, y) in [(c1, c2), (c2, c1)] {
                let wedge = angle_at(h_point(v, x), h_point(v, y), h_point(u, x));
                *quad_wedges.entry((v as u32, x)).or_insert(0.0) += wedge;
            }
        }
    }

    // Pre-smoothing boundary skeleton.
    let mut skeleton: Vec<SkeletonSegment> = Vec::new();
    for v in 0..n {
        let tile = &tiling.tiles[tile_of[v] as usize];
        for side in 0..3 {
            let neighbor = tile.neighbors[side]
                .expect("subgraph tile inside trusted depth lacks a neighbor");
            let covered = vertex_of_tile
                .get(&neighbor)
                .is_some_and(|&u| in_eprime(v as u32, u));
            if covered {
                continue;
            }
            let c1 = tile.corner_ids[(side + 1) % 3];
            let c2 = tile.corner_ids[(side + 2) % 3];
            skeleton.push(SkeletonSegment {
                seg: GeodesicSegment::new(h_point(v, c1), h_point(v, c2)),
                keys: [(v as u32, c1), (v as u32, c2)],
                source: SegmentSource::TriangleSide { vertex: v as u32 },
            });
        }
    }
    for q in &quads {
        for corner in [q.corners.0, q.corners.1] {
            if gon_corners.contains(&corner) {
                continue;
            }
            skeleton.push(SkeletonSegment {
                seg: GeodesicSegment::new(h_point(q.a, corner), h_point(q.b, corner)),
                keys: [(q.a as u32, corner), (q.b as u32, corner)],
                source: SegmentSource::Lateral {
                    edge: (q.a as u32, q.b as u32),
                    corner,
                },
            });
        }
    }

    // Each (vertex, corner) key must meet exactly two skeleton segments for
    // the boundary to close into curves.
    let mut incidence: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (i, s) in skeleton.iter().enumerate() {
        for key in s.keys {
            incidence.entry(key).or_default().push(i);
        }
    }
    for (key, segs) in &incidence {
        if segs.len() != 2 {
            return Err(DomainError::CornerIncidence {
                vertex: key.0,
                corner: key.1,
                count: segs.len(),
            });
        }
    }

    // Walk the skeleton into closed curves, then smooth their corners.
    let trim = lambda / FILLET_FRACTION;
    let mut used = vec![false; skeleton.len()];
    let mut boundary: Vec<BoundaryCurve> = Vec::new();
    let mut corner_angles: Vec<f64> = Vec::new();
    for start in 0..skeleton.len() {
        if used[start] {
            continue;
        }
        // Oriented cycle of (segment index, entry key position).
        let mut cycle: Vec<(usize, usize)> = Vec::new();
        let mut here = start;
        let mut entry = 0usize;
        loop {
            used[here] = true;
            cycle.push((here, entry));
            let exit_key = skeleton[here].keys[1 - entry];
            let pair = &incidence[&exit_key];
            let next = if pair[0] == here { pair[1] } else { pair[0] };
            if next == start {
                break;
            }
            entry = if skeleton[next].keys[0] == exit_key { 0 } else { 1 };
            here = next;
        }
        let len = cycle.len();
        let point_of = |step: usize, end: usize| -> DiskPoint {
            let (idx, entry) = cycle[step];
            let key = skeleton[idx].keys[if end == 0 { entry } else { 1 - entry }];
            h_point(key.0 as usize, key.1)
        };
        // Corner data between consecutive segments.
        let mut junctions = Vec::with_capacity(len);
        for i in 0..len {
            let j = (i + 1) % len;
            let p = point_of(i, 1);
            let key = {
                let (idx, entry) = cycle[i];
                skeleton[idx].keys[1 - entry]
            };
            let tprime_angle =
                shrunken[key.0 as usize].angles()[corner_index(key.0 as usize, key.1)];
            let theta = tprime_angle + quad_wedges.get(&key).copied().unwrap_or(0.0);
            corner_angles.push(theta);
            junctions.push((p, point_of(i, 0), point_of(j, 1)));
        }
        let mut primitives = Vec::new();
        match mode {
            CornerMode::Sharp => {
                for &(idx, entry) in &cycle {
                    let seg = if entry == 0 {
                        skeleton[idx].seg
                    } else {
                        skeleton[idx].seg.reversed()
                    };
                    primitives.push(BoundaryPrimitive::Segment {
                        seg,
                        source: skeleton[idx].source,
                    });
                }
            }
            CornerMode::Smooth => {
                let fillets: Vec<FilletPieces> = junctions
                    .iter()
                    .map(|&(p, a, b)| fillet_corner(p, a, b, trim))
                    .collect();
                for i in 0..len {
                    let prev = if i == 0 { len - 1 } else { i - 1 };
                    let (idx, _) = cycle[i];
                    primitives.push(BoundaryPrimitive::Segment {
                        seg: GeodesicSegment::new(fillets[prev].trim_end, fillets[i].trim_start),
                        source: skeleton[idx].source,
                    });
                    primitives.push(fillets[i].primitive.clone());
                }
            }
        }
        boundary.push(BoundaryCurve { primitives });
    }

    // Remove a ball at every boundary vertex; each is its own curve.
    let mut removed_balls = Vec::new();
    for v in g.n_interior()..n {
        let circle = HypCircle::new(cobblestones[v].center, rho / 2.0);
        removed_balls.push((v as u32, circle));
        boundary.push(BoundaryCurve {
            primitives: vec![BoundaryPrimitive::Circle {
                circle,
                vertex: v as u32,
            }],
        });
    }

    Ok(DomainModel {
        pieces,
        removed_balls,
        boundary,
        cobblestones,
        corner_angles,
        lambda,
        rho,
        mode,
    })
}

/// Total boundary length: exact segments and circles, fillets by quadrature.
pub fn boundary_length(d: &DomainModel) -> f64 {
    d.boundary.iter().map(|c| c.length()).sum()
}

/// Verifies that the domain is structurally the subgraph: piece tags in
/// bijection with vertices, edges and surrounded corners, removed balls in
/// bijection with the boundary vertex set and safely inside their triangles.
pub fn structural_equivalence_check(
    d: &DomainModel,
    g: &GraphWithBoundary,
    tiling: &Tiling,
) -> Result<EquivalenceReport, DomainError> {
    let n = g.n();
    let mut have_triangle = vec![false; n];
    let mut quad_tags: HashSet<(u32, u32)> = HashSet::new();
    let mut gon_tags: HashSet<u32> = HashSet::new();
    for piece in &d.pieces {
        match piece.kind {
            PieceKind::Triangle { vertex } => have_triangle[vertex as usize] = true,
            PieceKind::Quad { edge: (a, b) } => {
                quad_tags.insert((a.min(b), a.max(b)));
            }
            PieceKind::CycleGon { corner } => {
                gon_tags.insert(corner);
            }
        }
    }
    if let Some(v) = have_triangle.iter().position(|&ok| !ok) {
        return Err(DomainError::MissingTriangle { vertex: v as u32 });
    }
    let mut edge_set: HashSet<(u32, u32)> = HashSet::new();
    for &(a, b) in g.edges() {
        edge_set.insert((a.min(b), a.max(b)));
    }
    for &(a, b) in &edge_set {
        if !quad_tags.contains(&(a, b)) {
            return Err(DomainError::MissingQuad { a, b });
        }
    }
    for &(a, b) in &quad_tags {
        if !edge_set.contains(&(a, b)) {
            return Err(DomainError::UnexpectedQuad { a, b });
        }
    }

    // Recompute the surrounded-corner set from the graph and tiling.
    let host_ids = g.host_ids().ok_or(DomainError::MissingHostIds)?;
    let vertex_of_tile: HashMap<u32, u32> = (0..n as u32)
        .map(|v| (host_ids[v as usize], v))
        .collect();
    for corner_id in 0..tiling.corners.len() as u32 {
        let surrounded = tiling.tiles_around_corner(corner_id).is_some_and(|ring| {
            let members: Option<Vec<u32>> = ring
                .iter()
                .map(|t| vertex_of_tile.get(t).copied())
                .collect();
            members.is_some_and(|m| {
                (0..m.len()).all(|i| {
                    let (x, y) = (m[i], m[(i + 1) % m.len()]);
                    edge_set.contains(&(x.min(y), x.max(y)))
                })
            })
        });
        if surrounded && !gon_tags.contains(&corner_id) {
            return Err(DomainError::MissingGon { corner: corner_id });
        }
        if !surrounded && gon_tags.contains(&corner_id) {
            return Err(DomainError::UnexpectedGon { corner: corner_id });
        }
    }

    // Removed balls: exactly the boundary vertices, each strictly inside its
    // shrunken triangle.
    let mut ball_vertices: HashSet<u32> = HashSet::new();
    for (v, circle) in &d.removed_balls {
        if g.is_interior(*v) || !ball_vertices.insert(*v) {
            return Err(DomainError::BallMismatch { vertex: *v });
        }
        let stone = &d.cobblestones[*v as usize];
        if hyp_distance(circle.center, stone.center) > 1e-9 {
            return Err(DomainError::BallMismatch { vertex: *v });
        }
        let tri = &stone.shrunken;
        if !tri.contains(circle.center, 0.0) {
            return Err(DomainError::BallOutsideTriangle { vertex: *v });
        }
        for side in 0..3 {
            let s = tri.side(side);
            let gap = signed_distance_to_geodesic(circle.center, s.start, s.end).abs();
            if gap <= circle.radius {
                return Err(DomainError::BallOutsideTriangle { vertex: *v });
            }
        }
    }
    for v in g.n_interior() as u32..n as u32 {
        if !ball_vertices.contains(&v) {
            return Err(DomainError::BallMismatch { vertex: v });
        }
    }
    let circles = d.boundary.iter().filter(|c| c.is_circle()).count();
    if circles != g.n_boundary() {
        return Err(DomainError::CircleCountMismatch {
            circles,
            boundary: g.n_boundary(),
        });
    }
    Ok(EquivalenceReport {
        n_triangles: d.n_triangles(),
        n_quads: d.n_quads(),
        n_cycle_gons: d.n_cycle_gons(),
        n_removed_balls: d.removed_balls.len(),
        n_boundary_curves: d.boundary.len(),
        n_outer_curves: d.n_outer_curves(),
    })
}

/// Samples interior points of every piece and checks that no sample lands in
/// a second piece. Pieces tile the domain, so multiplicity must be one.
pub fn validate_no_overlap(d: &DomainModel) -> Result<(), DomainError> {
    for (i, piece) in d.pieces.iter().enumerate() {
        let anchor = piece.interior_anchor();
        let (ax, ay) = klein(anchor);
        let mut samples = vec![anchor];
        for v in &piece.polygon {
            let (kx, ky) = klein(*v);
            samples.push(from_klein(0.5 * kx + 0.5 * ax, 0.5 * ky + 0.5 * ay));
            samples.push(from_klein(0.85 * kx + 0.15 * ax, 0.85 * ky + 0.15 * ay));
        }
        for sample in samples {
            if !piece.contains(sample, 1e-12) {
                return Err(DomainError::SampleEscaped { piece: i });
            }
            for (j, other) in d.pieces.iter().enumerate() {
                if j != i && other.contains(sample, -1e-10) {
                    return Err(DomainError::OverlappingPieces { a: i, b: j });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::{ball_subgraph, induce_subgraph, punctured_ball};
    use crate::hypgeo::triangle_from_angles;
    use crate::tiling::generate_tiling;

    fn setup(depth: u32) -> (Tiling, crate::tiling::HostGraph) {
        let tiling = generate_tiling(2, 3, 7, depth).unwrap();
        let host = tiling.host_graph();
        (tiling, host)
    }

    #[test]
    fn shrink_moves_vertices_by_the_stated_factor() {
        let t = triangle_from_angles(2, 3, 7).unwrap();
        let (incenter, _) = t.incenter_and_inradius().unwrap();
        let s = shrink_triangle(&t).unwrap();
        for k in 0..3 {
            let before = hyp_distance(incenter, t.vertex(k));
            let after = hyp_distance(incenter, s.vertex(k));
            assert!((after - SHRINK_FACTOR * before).abs() < 1e-9);
            assert!(t.contains(s.vertex(k), -1e-9), "vertex {k} not interior");
        }
    }

    #[test]
    fn shrink_preserves_threefold_symmetry() {
        let t = triangle_from_angles(4, 4, 4).unwrap();
        let (incenter, _) = t.incenter_and_inradius().unwrap();
        let s = shrink_triangle(&t).unwrap();
        let d: Vec<f64> = (0..3)
            .map(|k| hyp_distance(incenter, s.vertex(k)))
            .collect();
        assert!((d[0] - d[1]).abs() < 1e-9);
        assert!((d[1] - d[2]).abs() < 1e-9);
    }

    #[test]
    fn per_tile_shrink_agrees_with_transported_seed() {
        let (tiling, _) = setup(3);
        let seed_prime = shrink_triangle(&tiling.seed_triangle).unwrap();
        for tile in tiling.tiles.iter().take(15) {
            let direct = shrink_triangle(&tile.triangle).unwrap();
            let transported = seed_prime.transformed(&tile.isometry);
            for k in 0..3 {
                let gap = hyp_distance(direct.vertex(k), transported.vertex(k));
                assert!(gap < 1e-8, "tile {} vertex {k} off by {gap}", tile.id);
            }
        }
    }

    #[test]
    fn single_vertex_domain_inventory() {
        let (tiling, host) = setup(4);
        let g = induce_subgraph(&host, &[0]).unwrap();
        let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        assert_eq!(d.n_triangles(), 4);
        assert_eq!(d.n_quads(), 3);
        assert_eq!(d.n_cycle_gons(), 0);
        assert_eq!(d.removed_balls.len(), 3);
        assert_eq!(d.boundary.len(), 4);
        assert_eq!(d.n_outer_curves(), 1);
        let report = structural_equivalence_check(&d, &g, &tiling).unwrap();
        assert_eq!(report.n_boundary_curves, 4);
    }

    #[test]
    fn four_cycle_produces_one_gon() {
        // Tiles 0, 2, 7, 3 ring the right-angle corner of the seed tile.
        let (tiling, host) = setup(4);
        let g = induce_subgraph(&host, &[0, 2, 3, 7]).unwrap();
        let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        assert_eq!(d.n_cycle_gons(), 1);
        let gon = d
            .pieces
            .iter()
            .find(|p| matches!(p.kind, PieceKind::CycleGon { .. }))
            .unwrap();
        assert_eq!(gon.polygon.len(), 4);
        structural_equivalence_check(&d, &g, &tiling).unwrap();
        validate_no_overlap(&d).unwrap();
    }

    #[test]
    fn ball_domains_pass_equivalence_and_inequality() {
        let (tiling, host) = setup(5);
        for radius in 1..=3u32 {
            let g = ball_subgraph(&host, 0, radius).unwrap();
            let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
            let report = structural_equivalence_check(&d, &g, &tiling).unwrap();
            assert_eq!(report.n_triangles, g.n());
            assert_eq!(report.n_quads, g.edges().len());
            assert_eq!(
                report.n_boundary_curves,
                report.n_outer_curves + g.n_boundary()
            );
            let total = boundary_length(&d);
            let floor = crate::hypgeo::circle_perimeter(d.rho / 2.0) * g.n_boundary() as f64;
            assert!(total > floor, "radius {radius}: {total} <= {floor}");
        }
    }

    #[test]
    fn punctured_domain_gains_exactly_one_circle() {
        let (tiling, host) = setup(5);
        let plain = ball_subgraph(&host, 0, 3).unwrap();
        let punct = punctured_ball(&host, 0, 3, 0).unwrap();
        let d_plain = build_domain(&plain, &tiling, CornerMode::Smooth).unwrap();
        let d_punct = build_domain(&punct, &tiling, CornerMode::Smooth).unwrap();
        assert_eq!(d_plain.n_triangles(), d_punct.n_triangles());
        assert_eq!(d_plain.n_quads(), d_punct.n_quads());
        assert_eq!(d_punct.boundary.len(), d_plain.boundary.len() + 1);
        assert_eq!(d_punct.n_outer_curves(), d_plain.n_outer_curves());
        // The extra circle sits at the removed vertex.
        let center_tile_incenter = tiling.tiles[0].incenter;
        let has_center_ball = d_punct
            .removed_balls
            .iter()
            .any(|(_, b)| hyp_distance(b.center, center_tile_incenter) < 1e-9);
        assert!(has_center_ball);
    }

    #[test]
    fn class_counts_stay_within_bounds() {
        let (tiling, host) = setup(5);
        let g = ball_subgraph(&host, 0, 2).unwrap();
        let d = build_domain(&g, &tiling, CornerMode::Sharp).unwrap();
        assert!(d.segment_length_classes(1e-7) <= 9);
        assert!(d.corner_angle_classes(1e-7) <= 18);
        let total = d.segment_length_classes(1e-7) + d.corner_angle_classes(1e-7) + 1;
        assert!(total <= 28, "{total} primitive classes");
        // Every boundary segment is at least one lambda long.
        for curve in &d.boundary {
            for prim in &curve.primitives {
                if let BoundaryPrimitive::Segment { seg, .. } = prim {
                    assert!(seg.length() >= d.lambda - 1e-9);
                }
            }
        }
    }

    #[test]
    fn fillets_are_tangent_and_confined() {
        let (tiling, host) = setup(4);
        let g = ball_subgraph(&host, 0, 1).unwrap();
        let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        let trim = d.lambda / FILLET_FRACTION;
        let mut fillets = 0;
        for curve in &d.boundary {
            let prims = &curve.primitives;
            for (i, prim) in prims.iter().enumerate() {
                let BoundaryPrimitive::Fillet { arc, corner } = prim else {
                    continue;
                };
                fillets += 1;
                // Confinement: the whole arc stays within trim of the corner.
                for s in 0..=10 {
                    let x = arc.point_at(s as f64 / 10.0);
                    assert!(hyp_distance(x, *corner) <= trim + 1e-9);
                }
                // Tangency: at the junction the radius is orthogonal to the
                // adjacent segment.
                let BoundaryPrimitive::Segment { seg: before, .. } =
                    &prims[(i + prims.len() - 1) % prims.len()]
                else {
                    panic!("fillet not preceded by a segment")
                };
                let p1 = arc.start();
                assert!(hyp_distance(p1, before.end) < 1e-9);
                let to_center = direction_from(p1, arc.center);
                let along = direction_from(p1, before.start);
                let mut diff = (to_center - along).rem_euclid(std::f64::consts::TAU);
                if diff > std::f64::consts::PI {
                    diff = std::f64::consts::TAU - diff;
                }
                assert!(
                    (diff - std::f64::consts::FRAC_PI_2).abs() < 1e-7,
                    "not tangent: {diff}"
                );
            }
        }
        assert!(fillets > 0, "smooth domain produced no fillets");
    }

    #[test]
    fn sharp_and_smooth_lengths_differ_by_corner_budget() {
        let (tiling, host) = setup(5);
        let g = ball_subgraph(&host, 0, 2).unwrap();
        let sharp = build_domain(&g, &tiling, CornerMode::Sharp).unwrap();
        let smooth = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        let corners = sharp.corner_angles.len();
        let budget = 6.0 * (sharp.lambda / FILLET_FRACTION) * corners as f64;
        let gap = (boundary_length(&sharp) - boundary_length(&smooth)).abs();
        assert!(gap < budget, "{gap} vs budget {budget}");
    }

    #[test]
    fn corner_angle_routes_agree() {
        // The wedge-sum interior angle and the bearing difference between
        // the two boundary rays must describe the same corner.
        let (tiling, host) = setup(5);
        let g = ball_subgraph(&host, 0, 2).unwrap();
        let d = build_domain(&g, &tiling, CornerMode::Sharp).unwrap();
        let mut checked = 0;
        let mut angle_iter = d.corner_angles.iter();
        for curve in &d.boundary {
            if curve.is_circle() {
                continue;
            }
            let segs: Vec<&GeodesicSegment> = curve
                .primitives
                .iter()
                .map(|p| match p {
                    BoundaryPrimitive::Segment { seg, .. } => seg,
                    _ => panic!("sharp curve holds only segments"),
                })
                .collect();
            for i in 0..segs.len() {
                let j = (i + 1) % segs.len();
                let p = segs[i].end;
                assert!(hyp_distance(p, segs[j].start) < 1e-9);
                let bearing = angle_at(p, segs[i].start, segs[j].end);
                let theta = *angle_iter.next().unwrap();
                let expected = theta.min(std::f64::consts::TAU - theta);
                assert!(
                    (bearing - expected).abs() < 1e-7,
                    "corner angle mismatch: {bearing} vs {expected}"
                );
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn fillet_quadrature_matches_closed_form() {
        let (tiling, host) = setup(4);
        let g = ball_subgraph(&host, 0, 1).unwrap();
        let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        for curve in &d.boundary {
            for prim in &curve.primitives {
                if let BoundaryPrimitive::Fillet { arc, .. } = prim {
                    let quad = arc.length_by_quadrature(FILLET_QUADRATURE_TOL);
                    let exact = arc.length();
                    assert!((quad - exact).abs() <= 1e-7 * exact.max(1e-12));
                }
            }
        }
    }

    #[test]
    fn no_overlap_on_ball_domains() {
        let (tiling, host) = setup(5);
        for radius in 1..=2u32 {
            let g = ball_subgraph(&host, 0, radius).unwrap();
            let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
            validate_no_overlap(&d).unwrap();
        }
    }

    #[test]
    fn mutated_domain_fails_the_check() {
        let (tiling, host) = setup(4);
        let g = ball_subgraph(&host, 0, 1).unwrap();
        let mut d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        let idx = d
            .pieces
            .iter()
            .position(|p| matches!(p.kind, PieceKind::Quad { .. }))
            .unwrap();
        let PieceKind::Quad { edge } = d.pieces[idx].kind else {
            unreachable!()
        };
        d.pieces.remove(idx);
        match structural_equivalence_check(&d, &g, &tiling) {
            Err(DomainError::MissingQuad { a, b }) => {
                assert_eq!((a.min(b), a.max(b)), (edge.0.min(edge.1), edge.0.max(edge.1)));
            }
            other => panic!("expected a missing-quad failure, got {other:?}"),
        }
    }

    #[test]
    fn graphs_without_host_references_are_rejected() {
        let (tiling, _) = setup(3);
        let g = GraphWithBoundary::from_parts(1, 2, &[(0, 1), (0, 2)]).unwrap();
        assert!(matches!(
            build_domain(&g, &tiling, CornerMode::Smooth),
            Err(DomainError::MissingHostIds)
        ));
    }

    #[test]
    fn document_export_is_complete() {
        let (tiling, host) = setup(4);
        let g = ball_subgraph(&host, 0, 1).unwrap();
        let d = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        let doc = d.to_document();
        assert_eq!(doc.n_triangles, g.n());
        assert_eq!(doc.removed_balls.len(), g.n_boundary());
        assert!(doc.total_boundary_length > 0.0);
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"format_version\":1"));
    }
}
