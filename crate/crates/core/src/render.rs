//! SVG renderings of tilings, domains, and discretizations.
//!
//! Output is a plain string with no external references. Geodesic sides are
//! drawn as arcs of the Euclidean circle through both endpoints that meets
//! the unit circle at right angles; hyperbolic circles coincide with
//! Euclidean circles and are drawn directly.

use std::fmt::Write;

use crate::discretize::DiscretizationGraph;
use crate::domain::{BoundaryCurve, BoundaryPrimitive, DomainModel};
use crate::graphcore::GraphWithBoundary;
use crate::hypgeo::{CircularArc, DiskPoint, GeodesicSegment, HypCircle};
use crate::tiling::{HostGraph, Tiling};

/// Canvas width in pixels for the larger side of the content box.
const CANVAS: f64 = 1000.0;

/// How a geodesic through two disk points is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeodesicPath {
    /// The two points are collinear with the origin; the geodesic is a
    /// straight chord.
    Line,
    /// Arc of the circle centered at (cx, cy) with radius r, walked
    /// counterclockwise from the first point iff `ccw`.
    Arc { cx: f64, cy: f64, r: f64, ccw: bool },
}

/// Circle through p and q orthogonal to the unit circle. The center m of
/// such a circle satisfies 2·z·m = |z|² + 1 for z on it, which pins m from
/// the two endpoints; orthogonality gives r² = |m|² − 1.
pub fn geodesic_path(p: DiskPoint, q: DiskPoint) -> GeodesicPath {
    let (px, py) = (p.x(), p.y());
    let (qx, qy) = (q.x(), q.y());
    let cross = px * qy - py * qx;
    let scale = (p.euclidean_norm() * q.euclidean_norm()).max(1e-12);
    if cross.abs() < 1e-7 * scale {
        return GeodesicPath::Line;
    }
    let bp = px * px + py * py + 1.0;
    let bq = qx * qx + qy * qy + 1.0;
    let det = 4.0 * cross;
    let cx = (bp * 2.0 * qy - 2.0 * py * bq) / det;
    let cy = (2.0 * px * bq - bp * 2.0 * qx) / det;
    let rr = cx * cx + cy * cy - 1.0;
    if rr <= 0.0 {
        return GeodesicPath::Line;
    }
    let ccw = (px - cx) * (qy - cy) - (py - cy) * (qx - cx) > 0.0;
    GeodesicPath::Arc { cx, cy, r: rr.sqrt(), ccw }
}

/// Disk-to-pixel mapping: uniform scale, y flipped.
#[derive(Debug, Clone, Copy)]
struct Frame {
    min_x: f64,
    max_y: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn fit(points: &[(f64, f64)], pad_frac: f64) -> Frame {
        let mut min_x = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for &(x, y) in points {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        let span = (max_x - min_x).max(max_y - min_y).max(1e-6);
        let pad = span * pad_frac;
        min_x -= pad;
        max_x += pad;
        min_y -= pad;
        max_y += pad;
        let scale = CANVAS / (max_x - min_x).max(max_y - min_y);
        Frame {
            min_x,
            max_y,
            scale,
            width: (max_x - min_x) * scale,
            height: (max_y - min_y) * scale,
        }
    }

    fn full_disk() -> Frame {
        Frame::fit(&[(-1.0, -1.0), (1.0, 1.0)], 0.02)
    }

    fn map(&self, p: DiskPoint) -> (f64, f64) {
        ((p.x() - self.min_x) * self.scale, (self.max_y - p.y()) * self.scale)
    }

    fn px(&self, d: f64) -> f64 {
        d * self.scale
    }
}

fn open_svg(out: &mut String, frame: &Frame) {
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {:.1} {:.1}\" \
         width=\"{:.0}\" height=\"{:.0}\">\n",
        frame.width, frame.height, frame.width, frame.height
    )
    .unwrap();
    out.push_str(
        "<style>\n\
         .disk { fill: none; stroke: #999999; stroke-width: 1.5; }\n\
         .tile { fill: none; stroke: #d4d4d4; stroke-width: 1; }\n\
         .dual { fill: none; stroke: #4a7dbb; stroke-width: 1.6; }\n\
         .piece { fill: #dbe7f6; stroke: none; }\n\
         .ball { fill: #ffffff; stroke: #7d9cc4; stroke-width: 1; }\n\
         .boundary { fill: none; stroke: #184a86; stroke-width: 2; }\n\
         .cross { fill: none; stroke: #b03030; stroke-width: 1.8; }\n\
         .dot { fill: #222222; stroke: none; }\n\
         .grid { fill: #2f8f5b; stroke: none; }\n\
         .collar { fill: none; stroke: #2f8f5b; stroke-width: 1; }\n\
         .sample { fill: #d97706; stroke: none; }\n\
         </style>\n",
    );
}

fn disk_outline(out: &mut String, frame: &Frame) {
    let (cx, cy) = frame.map(DiskPoint::origin());
    write!(
        out,
        "<circle class=\"disk\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\"/>\n",
        cx,
        cy,
        frame.px(1.0)
    )
    .unwrap();
}

/// Path command from p to q, assuming the pen is already at p. The pixel
/// map flips y, so a counterclockwise disk arc becomes sweep flag 1.
fn geodesic_cmd(frame: &Frame, p: DiskPoint, q: DiskPoint) -> String {
    let (qx, qy) = frame.map(q);
    match geodesic_path(p, q) {
        GeodesicPath::Line => format!("L {:.3} {:.3}", qx, qy),
        GeodesicPath::Arc { r, ccw, .. } => format!(
            "A {:.3} {:.3} 0 0 {} {:.3} {:.3}",
            frame.px(r),
            frame.px(r),
            if ccw { 1 } else { 0 },
            qx,
            qy
        ),
    }
}

fn segment_element(out: &mut String, frame: &Frame, class: &str, seg: &GeodesicSegment) {
    let (sx, sy) = frame.map(seg.start);
    write!(
        out,
        "<path class=\"{}\" d=\"M {:.3} {:.3} {}\"/>\n",
        class,
        sx,
        sy,
        geodesic_cmd(frame, seg.start, seg.end)
    )
    .unwrap();
}

fn polygon_element(out: &mut String, frame: &Frame, class: &str, pts: &[DiskPoint]) {
    if pts.len() < 2 {
        return;
    }
    let (sx, sy) = frame.map(pts[0]);
    let mut d = format!("M {:.3} {:.3}", sx, sy);
    for i in 0..pts.len() {
        let p = pts[i];
        let q = pts[(i + 1) % pts.len()];
        d.push(' ');
        d.push_str(&geodesic_cmd(frame, p, q));
    }
    d.push_str(" Z");
    write!(out, "<path class=\"{}\" d=\"{}\"/>\n", class, d).unwrap();
}

fn circle_element(out: &mut String, frame: &Frame, class: &str, circle: &HypCircle) {
    let (ex, ey, er) = circle.euclidean_center_radius();
    let (cx, cy) = frame.map(DiskPoint::new(ex, ey).unwrap_or_else(|_| DiskPoint::origin()));
    write!(
        out,
        "<circle class=\"{}\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\"/>\n",
        class,
        cx,
        cy,
        frame.px(er)
    )
    .unwrap();
}

/// Arc command for a piece of a hyperbolic circle. The disk map preserves
/// orientation, so the hyperbolic sweep sign fixes the Euclidean direction;
/// the large-arc flag comes from the Euclidean angles of the endpoints.
fn arc_cmd(frame: &Frame, arc: &CircularArc) -> String {
    let circle = HypCircle::new(arc.center, arc.radius);
    let (ex, ey, er) = circle.euclidean_center_radius();
    let s = arc.start();
    let e = arc.end();
    let a0 = (s.y() - ey).atan2(s.x() - ex);
    let a1 = (e.y() - ey).atan2(e.x() - ex);
    let ccw = arc.sweep > 0.0;
    let extent = if ccw {
        (a1 - a0).rem_euclid(std::f64::consts::TAU)
    } else {
        (a0 - a1).rem_euclid(std::f64::consts::TAU)
    };
    let large = extent > std::f64::consts::PI;
    let (qx, qy) = frame.map(e);
    format!(
        "A {:.3} {:.3} 0 {} {} {:.3} {:.3}",
        frame.px(er),
        frame.px(er),
        if large { 1 } else { 0 },
        if ccw { 1 } else { 0 },
        qx,
        qy
    )
}

fn cross_element(out: &mut String, frame: &Frame, p: DiskPoint, half_px: f64) {
    let (x, y) = frame.map(p);
    write!(
        out,
        "<path class=\"cross\" d=\"M {:.3} {:.3} L {:.3} {:.3} M {:.3} {:.3} L {:.3} {:.3}\"/>\n",
        x - half_px,
        y - half_px,
        x + half_px,
        y + half_px,
        x - half_px,
        y + half_px,
        x + half_px,
        y - half_px
    )
    .unwrap();
}

fn dot_element(out: &mut String, frame: &Frame, class: &str, p: DiskPoint, r_px: f64) {
    let (x, y) = frame.map(p);
    write!(
        out,
        "<circle class=\"{}\" cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.2}\"/>\n",
        class, x, y, r_px
    )
    .unwrap();
}

/// Full-disk view of a tiling and its dual graph.
pub fn render_tiling(tiling: &Tiling, host: &HostGraph) -> String {
    let frame = Frame::full_disk();
    let mut out = String::new();
    open_svg(&mut out, &frame);
    disk_outline(&mut out, &frame);
    for tile in &tiling.tiles {
        polygon_element(&mut out, &frame, "tile", &tile.triangle.vertices());
    }
    for &(a, b) in &host.edges {
        let seg = GeodesicSegment::new(host.centers[a as usize], host.centers[b as usize]);
        segment_element(&mut out, &frame, "dual", &seg);
    }
    out.push_str("</svg>\n");
    out
}

fn boundary_curve_element(out: &mut String, frame: &Frame, curve: &BoundaryCurve) {
    if curve.primitives.len() == 1 {
        if let BoundaryPrimitive::Circle { circle, .. } = &curve.primitives[0] {
            circle_element(out, frame, "boundary", circle);
            return;
        }
    }
    let first = match &curve.primitives[0] {
        BoundaryPrimitive::Segment { seg, .. } => seg.start,
        BoundaryPrimitive::Fillet { arc, .. } => arc.start(),
        BoundaryPrimitive::Circle { circle, .. } => circle.point_at_angle(0.0),
    };
    let (sx, sy) = frame.map(first);
    let mut d = format!("M {:.3} {:.3}", sx, sy);
    for prim in &curve.primitives {
        d.push(' ');
        match prim {
            BoundaryPrimitive::Segment { seg, .. } => {
                d.push_str(&geodesic_cmd(frame, seg.start, seg.end));
            }
            BoundaryPrimitive::Fillet { arc, .. } => {
                d.push_str(&arc_cmd(frame, arc));
            }
            BoundaryPrimitive::Circle { circle, .. } => {
                // A full circle inside a chain should not occur; fall back
                // to a chord-free jump to its rightmost point.
                let (qx, qy) = frame.map(circle.point_at_angle(0.0));
                d.push_str(&format!("M {:.3} {:.3}", qx, qy));
            }
        }
    }
    d.push_str(" Z");
    write!(out, "<path class=\"boundary\" d=\"{}\"/>\n", d).unwrap();
}

fn domain_frame(domain: &DomainModel, tiling: &Tiling) -> Frame {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for piece in &domain.pieces {
        for v in &piece.polygon {
            pts.push((v.x(), v.y()));
        }
    }
    for stone in &domain.cobblestones {
        for v in tiling.tiles[stone.tile as usize].triangle.vertices() {
            pts.push((v.x(), v.y()));
        }
    }
    Frame::fit(&pts, 0.04)
}

fn domain_layers(
    out: &mut String,
    frame: &Frame,
    domain: &DomainModel,
    g: &GraphWithBoundary,
    tiling: &Tiling,
) {
    disk_outline(out, frame);
    for stone in &domain.cobblestones {
        polygon_element(
            out,
            frame,
            "tile",
            &tiling.tiles[stone.tile as usize].triangle.vertices(),
        );
    }
    for piece in &domain.pieces {
        polygon_element(out, frame, "piece", &piece.polygon);
    }
    for (_, ball) in &domain.removed_balls {
        circle_element(out, frame, "ball", ball);
    }
    for curve in &domain.boundary {
        boundary_curve_element(out, frame, curve);
    }
    for stone in &domain.cobblestones {
        if g.is_interior(stone.vertex) {
            cross_element(out, frame, stone.center, 5.0);
        } else {
            dot_element(out, frame, "dot", stone.center, 3.5);
        }
    }
}

/// Domain view: faint source tiles, filled pieces, removed balls, the
/// smoothed boundary, and the interior-cross / boundary-dot markers.
pub fn render_domain(domain: &DomainModel, g: &GraphWithBoundary, tiling: &Tiling) -> String {
    let frame = domain_frame(domain, tiling);
    let mut out = String::new();
    open_svg(&mut out, &frame);
    domain_layers(&mut out, &frame, domain, g, tiling);
    out.push_str("</svg>\n");
    out
}

/// Domain view with the discretization on top: grid interior points,
/// collar copies, and boundary samples.
pub fn render_discretization(
    domain: &DomainModel,
    g: &GraphWithBoundary,
    tiling: &Tiling,
    dg: &DiscretizationGraph,
) -> String {
    let frame = domain_frame(domain, tiling);
    let mut out = String::new();
    open_svg(&mut out, &frame);
    domain_layers(&mut out, &frame, domain, g, tiling);
    let n_interior = dg.graph.n_interior();
    for (i, &p) in dg.positions.iter().enumerate() {
        if i < dg.n_grid_interior {
            dot_element(&mut out, &frame, "grid", p, 1.8);
        } else if i < n_interior {
            dot_element(&mut out, &frame, "collar", p, 2.4);
        } else {
            dot_element(&mut out, &frame, "sample", p, 2.2);
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_discretization, epsilon_max};
    use crate::domain::{build_domain, CornerMode};
    use crate::graphcore::ball_subgraph;
    use crate::tiling::generate_tiling;

    fn pt(x: f64, y: f64) -> DiskPoint {
        DiskPoint::new(x, y).unwrap()
    }

    /// The arc circle must meet the unit circle at a right angle, which is
    /// the identity |m|^2 = r^2 + 1, and the hyperbolic midpoint must lie
    /// on it between the endpoints in the declared direction.
    #[test]
    fn geodesic_arcs_are_orthogonal_and_pass_through_the_midpoint() {
        let pairs = [
            (pt(0.3, 0.1), pt(-0.2, 0.5)),
            (pt(0.01, 0.6), pt(0.59, 0.02)),
            (pt(-0.4, -0.4), pt(0.1, -0.7)),
            (pt(0.85, 0.1), pt(0.1, 0.85)),
        ];
        for (p, q) in pairs {
            let GeodesicPath::Arc { cx, cy, r, ccw } = geodesic_path(p, q) else {
                panic!("generic pair should be an arc");
            };
            assert!((cx * cx + cy * cy - 1.0 - r * r).abs() < 1e-9);
            let mid = GeodesicSegment::new(p, q).midpoint();
            let dist = ((mid.x() - cx).powi(2) + (mid.y() - cy).powi(2)).sqrt();
            assert!((dist - r).abs() < 1e-9, "midpoint off the arc circle");
            let ang = |z: DiskPoint| (z.y() - cy).atan2(z.x() - cx);
            let (a0, a1, am) = (ang(p), ang(q), ang(mid));
            let full = if ccw {
                (a1 - a0).rem_euclid(std::f64::consts::TAU)
            } else {
                (a0 - a1).rem_euclid(std::f64::consts::TAU)
            };
            let part = if ccw {
                (am - a0).rem_euclid(std::f64::consts::TAU)
            } else {
                (a0 - am).rem_euclid(std::f64::consts::TAU)
            };
            assert!(full < std::f64::consts::PI, "geodesic arc should be minor");
            assert!(part < full, "midpoint not between the endpoints");
        }
    }

    #[test]
    fn diameter_pairs_fall_back_to_lines() {
        assert_eq!(geodesic_path(pt(0.4, 0.2), pt(-0.6, -0.3)), GeodesicPath::Line);
        assert_eq!(geodesic_path(pt(0.0, 0.0), pt(0.5, 0.1)), GeodesicPath::Line);
    }

    #[test]
    fn tiling_svg_has_one_element_per_tile_and_dual_edge() {
        let tiling = generate_tiling(2, 3, 7, 2).unwrap();
        let host = tiling.host_graph();
        let svg = render_tiling(&tiling, &host);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("class=\"tile\"").count(), tiling.tiles.len());
        assert_eq!(svg.matches("class=\"dual\"").count(), host.edges.len());
        assert_eq!(svg.matches("class=\"disk\"").count(), 1);
    }

    #[test]
    fn domain_svg_counts_match_the_model() {
        let tiling = generate_tiling(2, 3, 7, 3).unwrap();
        let host = tiling.host_graph();
        let g = ball_subgraph(&host, 0, 1).unwrap();
        let domain = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        let svg = render_domain(&domain, &g, &tiling);
        assert_eq!(svg.matches("class=\"piece\"").count(), domain.pieces.len());
        assert_eq!(svg.matches("class=\"ball\"").count(), domain.removed_balls.len());
        assert_eq!(svg.matches("class=\"boundary\"").count(), domain.boundary.len());
        assert_eq!(svg.matches("class=\"cross\"").count(), g.n_interior());
        assert_eq!(svg.matches("class=\"dot\"").count(), g.n_boundary());
        assert_eq!(svg, render_domain(&domain, &g, &tiling), "render not deterministic");
    }

    #[test]
    fn discretization_overlay_counts_match_the_graph() {
        let tiling = generate_tiling(2, 3, 7, 3).unwrap();
        let host = tiling.host_graph();
        let g = ball_subgraph(&host, 0, 1).unwrap();
        let domain = build_domain(&g, &tiling, CornerMode::Smooth).unwrap();
        let dg = build_discretization(&domain, epsilon_max(&domain)).unwrap();
        let svg = render_discretization(&domain, &g, &tiling, &dg);
        let n_collar = dg.graph.n_interior() - dg.n_grid_interior;
        assert_eq!(svg.matches("class=\"grid\"").count(), dg.n_grid_interior);
        assert_eq!(svg.matches("class=\"collar\"").count(), n_collar);
        assert_eq!(svg.matches("class=\"sample\"").count(), dg.graph.n_boundary());
    }
}
