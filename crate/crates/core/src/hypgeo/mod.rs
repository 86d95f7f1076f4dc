//! Hyperbolic geometry in the Poincaré disk model.
//!
//! The disk {(x, y) : x² + y² < 1} carries the metric 4(dx² + dy²)/(1 − x² − y²)².
//! Geodesics are diameters and circular arcs orthogonal to the unit circle.
//! All distances, lengths and angles in this crate are hyperbolic unless a name
//! says otherwise; Euclidean quantities only appear for rendering and hashing.

mod isometry;
mod triangle;

pub use isometry::HypIsometry;
pub use triangle::{triangle_from_angles, HypTriangle};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two points closer than this are treated as the same point.
pub const POINT_TOLERANCE: f64 = 1e-9;

/// Points with Euclidean norm at or above 1 − this margin are rejected:
/// so close to the ideal boundary the metric blows up and coordinates
/// carry no usable precision.
pub const DISK_BOUNDARY_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("point ({x}, {y}) lies outside the usable disk (|z| = {norm})")]
    PointOutsideDisk { x: f64, y: f64, norm: f64 },
    #[error("mirror endpoints coincide (separation {separation:.3e})")]
    DegenerateMirror { separation: f64 },
    #[error("({p}, {q}, {r}) is not hyperbolic: angle sum must satisfy 1/p + 1/q + 1/r < 1")]
    NotHyperbolic { p: u32, q: u32, r: u32 },
    #[error("triangle signature entries must be at least 2, got ({p}, {q}, {r})")]
    SignatureTooSmall { p: u32, q: u32, r: u32 },
    #[error("interior angles must be positive and sum to less than pi")]
    InvalidAngles,
    #[error("incenter search failed to equalize side distances (spread {spread:.3e})")]
    IncenterFailure { spread: f64 },
}

/// A point strictly inside the Poincaré disk.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiskPoint {
    x: f64,
    y: f64,
}

impl DiskPoint {
    pub fn new(x: f64, y: f64) -> Result<Self, GeoError> {
        let norm = x.hypot(y);
        if !norm.is_finite() || norm >= 1.0 - DISK_BOUNDARY_MARGIN {
            return Err(GeoError::PointOutsideDisk { x, y, norm });
        }
        Ok(Self { x, y })
    }

    pub fn origin() -> Self {
        Self { x: 0.0, y: 0.0 }
    }

    pub fn x(self) -> f64 {
        self.x
    }

    pub fn y(self) -> f64 {
        self.y
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    pub fn from_complex(z: Complex64) -> Result<Self, GeoError> {
        Self::new(z.re, z.im)
    }

    /// Euclidean norm, used for hashing and rendering only.
    pub fn euclidean_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn euclidean_distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Same-point test at the crate-wide tolerance, measured hyperbolically.
    pub fn approx_eq(self, other: Self) -> bool {
        hyp_distance(self, other) < POINT_TOLERANCE
    }
}

/// Hyperbolic distance 2·atanh(|z₁ − z₂| / |1 − z̄₁z₂|).
pub fn hyp_distance(a: DiskPoint, b: DiskPoint) -> f64 {
    let za = a.to_complex();
    let zb = b.to_complex();
    let num = (za - zb).norm();
    let den = (Complex64::new(1.0, 0.0) - za.conj() * zb).norm();
    let ratio = (num / den).min(1.0 - 1e-16);
    2.0 * ratio.atanh()
}

/// Initial direction (angle) of the geodesic leaving `from` toward `to`.
pub fn direction_from(from: DiskPoint, to: DiskPoint) -> f64 {
    let t = HypIsometry::translation_to_origin(from);
    t.apply_raw(to.to_complex()).arg()
}

/// The point at hyperbolic distance `dist` from `from` along direction `angle`.
pub fn point_at_direction(from: DiskPoint, angle: f64, dist: f64) -> DiskPoint {
    let w = Complex64::from_polar((dist / 2.0).tanh(), angle);
    let back = HypIsometry::translation_from_origin(from);
    DiskPoint::from_complex(back.apply_raw(w))
        .expect("geodesic point escaped the disk; distance too large for f64")
}

/// Signed distance from `x` to the full geodesic through `p` and `q`.
/// Positive on the left of the direction p → q.
pub fn signed_distance_to_geodesic(x: DiskPoint, p: DiskPoint, q: DiskPoint) -> f64 {
    let t = HypIsometry::translation_to_origin(p);
    let theta = t.apply_raw(q.to_complex()).arg();
    let w = t.apply_raw(x.to_complex()) * Complex64::from_polar(1.0, -theta);
    (2.0 * w.im / (1.0 - w.norm_sqr())).asinh()
}

/// Interior angle at `at` between the geodesics toward `toward_a` and `toward_b`,
/// in (0, pi].
pub fn angle_at(at: DiskPoint, toward_a: DiskPoint, toward_b: DiskPoint) -> f64 {
    let da = direction_from(at, toward_a);
    let db = direction_from(at, toward_b);
    let mut diff = (db - da).rem_euclid(std::f64::consts::TAU);
    if diff > std::f64::consts::PI {
        diff = std::f64::consts::TAU - diff;
    }
    diff
}

/// Geodesic segment between two disk points.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GeodesicSegment {
    pub start: DiskPoint,
    pub end: DiskPoint,
}

impl GeodesicSegment {
    pub fn new(start: DiskPoint, end: DiskPoint) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        hyp_distance(self.start, self.end)
    }

    /// Point at parameter t ∈ [0, 1], proportional to hyperbolic arc length.
    pub fn point_at(&self, t: f64) -> DiskPoint {
        let to_origin = HypIsometry::translation_to_origin(self.start);
        let w = to_origin.apply_raw(self.end.to_complex());
        let half = w.norm().min(1.0 - 1e-16).atanh();
        let scaled = Complex64::from_polar((t * half).tanh(), w.arg());
        DiskPoint::from_complex(to_origin.inverse().apply_raw(scaled))
            .expect("interpolant escaped the disk")
    }

    /// Point at hyperbolic distance `dist` from `start` along the segment.
    pub fn point_at_distance(&self, dist: f64) -> DiskPoint {
        let len = self.length();
        self.point_at(if len > 0.0 { dist / len } else { 0.0 })
    }

    pub fn midpoint(&self) -> DiskPoint {
        self.point_at(0.5)
    }

    pub fn reversed(&self) -> Self {
        Self { start: self.end, end: self.start }
    }

    /// Distance from `x` to this segment (clamped to the endpoints).
    pub fn distance_to(&self, x: DiskPoint) -> f64 {
        let t = HypIsometry::translation_to_origin(self.start);
        let q = t.apply_raw(self.end.to_complex());
        let theta = q.arg();
        let rot = Complex64::from_polar(1.0, -theta);
        let w = t.apply_raw(x.to_complex()) * rot;
        let reach = q.norm();
        // Foot of the perpendicular onto the real diameter solves
        // w_x t² − (1 + |w|²) t + w_x = 0 for t ∈ (−1, 1).
        let foot = if w.re.abs() < 1e-300 {
            0.0
        } else {
            let s = 1.0 + w.norm_sqr();
            let disc = (s * s - 4.0 * w.re * w.re).max(0.0).sqrt();
            (s - disc) / (2.0 * w.re)
        };
        let clamped = foot.clamp(0.0_f64.min(reach), 0.0_f64.max(reach));
        let fp = DiskPoint::new(clamped, 0.0).expect("foot parameter inside disk");
        let wp = DiskPoint::from_complex(w).expect("frame image inside disk");
        hyp_distance(wp, fp)
    }
}

/// Hyperbolic circle: all points at distance `radius` from `center`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HypCircle {
    pub center: DiskPoint,
    pub radius: f64,
}

impl HypCircle {
    pub fn new(center: DiskPoint, radius: f64) -> Self {
        assert!(radius > 0.0, "circle radius must be positive, got {radius}");
        Self { center, radius }
    }

    pub fn perimeter(&self) -> f64 {
        circle_perimeter(self.radius)
    }

    pub fn contains(&self, p: DiskPoint) -> bool {
        hyp_distance(self.center, p) < self.radius
    }

    /// Point on the circle in direction `angle` as seen from the center.
    pub fn point_at_angle(&self, angle: f64) -> DiskPoint {
        point_at_direction(self.center, angle, self.radius)
    }

    /// The Euclidean circle this hyperbolic circle coincides with, for rendering.
    pub fn euclidean_center_radius(&self) -> (f64, f64, f64) {
        let d = hyp_distance(DiskPoint::origin(), self.center);
        let dir = if self.center.euclidean_norm() > 0.0 {
            self.center.to_complex() / self.center.euclidean_norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let near = ((d - self.radius) / 2.0).tanh();
        let far = ((d + self.radius) / 2.0).tanh();
        let mid = dir * ((near + far) / 2.0);
        (mid.re, mid.im, (far - near) / 2.0)
    }
}

/// Perimeter of a hyperbolic circle of radius `r`: 2π·sinh(r).
pub fn circle_perimeter(r: f64) -> f64 {
    assert!(r >= 0.0, "radius must be nonnegative, got {r}");
    std::f64::consts::TAU * r.sinh()
}

/// Arc of a hyperbolic circle, parametrized by the center-frame angle.
///
/// Angles are measured after translating `center` to the origin; `sweep` is
/// signed, so the arc runs from `start_angle` to `start_angle + sweep`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CircularArc {
    pub center: DiskPoint,
    pub radius: f64,
    pub start_angle: f64,
    pub sweep: f64,
}

impl CircularArc {
    pub fn point_at(&self, t: f64) -> DiskPoint {
        let angle = self.start_angle + t * self.sweep;
        point_at_direction(self.center, angle, self.radius)
    }

    pub fn start(&self) -> DiskPoint {
        self.point_at(0.0)
    }

    pub fn end(&self) -> DiskPoint {
        self.point_at(1.0)
    }

    /// Exact arc length sinh(R)·|sweep|.
    pub fn length(&self) -> f64 {
        self.radius.sinh() * self.sweep.abs()
    }

    /// Arc length by doubling chord sums until the relative change drops
    /// below `rel_tol`. Cross-checks the closed form.
    pub fn length_by_quadrature(&self, rel_tol: f64) -> f64 {
        let mut n = 8usize;
        let mut prev = self.chord_sum(n);
        loop {
            n *= 2;
            let next = self.chord_sum(n);
            if (next - prev).abs() <= rel_tol * next.abs() || n > 1 << 20 {
                return next;
            }
            prev = next;
        }
    }

    fn chord_sum(&self, n: usize) -> f64 {
        let mut total = 0.0;
        let mut prev = self.point_at(0.0);
        for i in 1..=n {
            let next = self.point_at(i as f64 / n as f64);
            total += hyp_distance(prev, next);
            prev = next;
        }
        total
    }

    pub fn distance_to(&self, x: DiskPoint) -> f64 {
        let t = HypIsometry::translation_to_origin(self.center);
        let phi = t.apply_raw(x.to_complex()).arg();
        let rel = (phi - self.start_angle) / self.sweep;
        let wrapped = ((phi - self.start_angle).rem_euclid(std::f64::consts::TAU)) / self.sweep;
        let inside = (0.0..=1.0).contains(&rel) || (0.0..=1.0).contains(&wrapped);
        if inside {
            (hyp_distance(self.center, x) - self.radius).abs()
        } else {
            hyp_distance(x, self.start()).min(hyp_distance(x, self.end()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-9;

    fn pt(x: f64, y: f64) -> DiskPoint {
        DiskPoint::new(x, y).unwrap()
    }

    /// Independent check: integrate the radial metric 2/(1 − r²) dr by Simpson.
    fn radial_distance_quadrature(r: f64) -> f64 {
        let n = 20_000;
        let h = r / n as f64;
        let f = |t: f64| 2.0 / (1.0 - t * t);
        let mut acc = f(0.0) + f(r);
        for i in 1..n {
            let t = i as f64 * h;
            acc += if i % 2 == 1 { 4.0 * f(t) } else { 2.0 * f(t) };
        }
        acc * h / 3.0
    }

    #[test]
    fn distance_matches_radial_quadrature() {
        for &r in &[0.1, 0.3, 0.5, 0.8, 0.95] {
            let d = hyp_distance(DiskPoint::origin(), pt(r, 0.0));
            let oracle = radial_distance_quadrature(r);
            assert!((d - oracle).abs() < 1e-7, "r={r}: {d} vs {oracle}");
            // Closed form along a radius: ln((1 + r)/(1 − r)).
            assert!((d - ((1.0 + r) / (1.0 - r)).ln()).abs() < EPS);
        }
    }

    #[test]
    fn distance_origin_to_half() {
        let d = hyp_distance(DiskPoint::origin(), pt(0.5, 0.0));
        assert!((d - 3.0_f64.ln()).abs() < EPS, "expected ln 3, got {d}");
    }

    #[test]
    fn distance_small_step() {
        let d = hyp_distance(DiskPoint::origin(), pt(0.1, 0.0));
        assert!((d - (1.1_f64 / 0.9).ln()).abs() < EPS);
    }

    #[test]
    fn distance_is_symmetric_and_definite() {
        let a = pt(0.3, -0.2);
        let b = pt(-0.4, 0.55);
        assert!((hyp_distance(a, b) - hyp_distance(b, a)).abs() < 1e-14);
        assert_eq!(hyp_distance(a, a), 0.0);
        assert!(hyp_distance(a, b) > 0.0);
    }

    #[test]
    fn point_near_boundary_rejected() {
        assert!(matches!(
            DiskPoint::new(1.0 - 1e-13, 0.0),
            Err(GeoError::PointOutsideDisk { .. })
        ));
        assert!(DiskPoint::new(1.0 - 1e-11, 0.0).is_ok());
    }

    #[test]
    fn segment_midpoint_of_symmetric_pair() {
        let seg = GeodesicSegment::new(pt(-0.5, 0.0), pt(0.5, 0.0));
        let mid = seg.point_at(0.5);
        assert!(mid.euclidean_norm() < EPS, "midpoint should be the origin");
    }

    #[test]
    fn segment_quarter_point_along_radius() {
        let seg = GeodesicSegment::new(DiskPoint::origin(), pt(0.5, 0.0));
        let quarter = seg.point_at(0.25);
        // Total length is ln 3, so the quarter point lies at hyperbolic
        // distance ln(3)/4, which is Euclidean radius tanh(ln(3)/8); in closed
        // form (3^{1/4} − 1) / (3^{1/4} + 1).
        let root = 3.0_f64.powf(0.25);
        let expected = (root - 1.0) / (root + 1.0);
        assert!((quarter.x() - expected).abs() < EPS, "got {}", quarter.x());
        assert!(quarter.y().abs() < EPS);
        let d = hyp_distance(DiskPoint::origin(), quarter);
        assert!((d - 3.0_f64.ln() / 4.0).abs() < EPS);
        // And the halfway point sits at radius tanh(ln(3)/4) = 2 − √3.
        let half = seg.point_at(0.5);
        assert!((half.x() - (2.0 - 3.0_f64.sqrt())).abs() < EPS);
    }

    #[test]
    fn segment_endpoint_parameters() {
        let seg = GeodesicSegment::new(pt(0.1, 0.2), pt(-0.3, 0.4));
        assert!(seg.point_at(0.0).approx_eq(seg.start));
        assert!(seg.point_at(1.0).approx_eq(seg.end));
    }

    #[test]
    fn segment_arc_length_consistency() {
        // Chord sums along point_at samples must reproduce the distance.
        let seg = GeodesicSegment::new(pt(0.2, -0.1), pt(-0.5, 0.3));
        let n = 4096;
        let mut acc = 0.0;
        let mut prev = seg.start;
        for i in 1..=n {
            let next = seg.point_at(i as f64 / n as f64);
            acc += hyp_distance(prev, next);
            prev = next;
        }
        assert!((acc - seg.length()).abs() < 1e-7);
    }

    #[test]
    fn segment_distance_to_point() {
        let seg = GeodesicSegment::new(pt(-0.5, 0.0), pt(0.5, 0.0));
        let x = pt(0.0, 0.3);
        let expected = hyp_distance(x, DiskPoint::origin());
        assert!((seg.distance_to(x) - expected).abs() < EPS);
        // Beyond an endpoint the distance clamps to that endpoint.
        let far = pt(0.8, 0.1);
        let clamped = hyp_distance(far, seg.end);
        assert!((seg.distance_to(far) - clamped).abs() < EPS);
    }

    #[test]
    fn circle_perimeter_values() {
        assert_eq!(circle_perimeter(0.0), 0.0);
        let p = circle_perimeter(1.0);
        assert!((p - std::f64::consts::TAU * 1.0_f64.sinh()).abs() < 1e-12);
        // Independent route: 2 sinh 1 = e − 1/e.
        let e = std::f64::consts::E;
        assert!((p - std::f64::consts::PI * (e - 1.0 / e)).abs() < 1e-12);
        assert!((p - 7.384_006_872_882_645).abs() < 1e-9);
    }

    #[test]
    fn circle_euclidean_form_matches_points() {
        let c = HypCircle::new(pt(0.4, 0.1), 0.35);
        let (ex, ey, er) = c.euclidean_center_radius();
        for i in 0..16 {
            let p = c.point_at_angle(i as f64 * std::f64::consts::TAU / 16.0);
            let d = (p.x() - ex).hypot(p.y() - ey);
            assert!((d - er).abs() < 1e-10, "angle sample {i} off by {}", (d - er).abs());
        }
    }

    #[test]
    fn arc_length_closed_form_vs_quadrature() {
        let arc = CircularArc {
            center: pt(0.2, -0.3),
            radius: 0.4,
            start_angle: 0.3,
            sweep: 1.1,
        };
        let exact = arc.length();
        let quad = arc.length_by_quadrature(1e-10);
        assert!((exact - quad).abs() < 1e-8 * exact.max(1.0));
    }

    #[test]
    fn signed_distance_sides() {
        let p = pt(-0.5, 0.0);
        let q = pt(0.5, 0.0);
        assert!(signed_distance_to_geodesic(pt(0.0, 0.2), p, q) > 0.0);
        assert!(signed_distance_to_geodesic(pt(0.0, -0.2), p, q) < 0.0);
        assert!(signed_distance_to_geodesic(pt(0.2, 0.0), p, q).abs() < EPS);
    }

    #[test]
    fn angle_at_right_angle() {
        let a = angle_at(DiskPoint::origin(), pt(0.5, 0.0), pt(0.0, 0.5));
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < EPS);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn triangle_inequality(
            ax in -0.9f64..0.9, ay in -0.9f64..0.9,
            bx in -0.9f64..0.9, by in -0.9f64..0.9,
            cx in -0.9f64..0.9, cy in -0.9f64..0.9,
        ) {
            prop_assume!(ax.hypot(ay) < 0.95 && bx.hypot(by) < 0.95 && cx.hypot(cy) < 0.95);
            let a = pt(ax, ay);
            let b = pt(bx, by);
            let c = pt(cx, cy);
            let ab = hyp_distance(a, b);
            let bc = hyp_distance(b, c);
            let ac = hyp_distance(a, c);
            prop_assert!(ac <= ab + bc + 1e-9);
        }

        #[test]
        fn point_along_segment_splits_distance(
            ax in -0.8f64..0.8, ay in -0.8f64..0.8,
            bx in -0.8f64..0.8, by in -0.8f64..0.8,
            t in 0.0f64..1.0,
        ) {
            prop_assume!(ax.hypot(ay) < 0.9 && bx.hypot(by) < 0.9);
            let a = pt(ax, ay);
            let b = pt(bx, by);
            prop_assume!(hyp_distance(a, b) > 1e-6);
            let seg = GeodesicSegment::new(a, b);
            let m = seg.point_at(t);
            let total = seg.length();
            prop_assert!((hyp_distance(a, m) - t * total).abs() < 1e-9);
            prop_assert!((hyp_distance(m, b) - (1.0 - t) * total).abs() < 1e-9);
        }
    }
}
