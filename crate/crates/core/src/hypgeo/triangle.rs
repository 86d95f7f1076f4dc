use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{
    angle_at, hyp_distance, signed_distance_to_geodesic, DiskPoint, GeoError, GeodesicSegment,
    HypIsometry, POINT_TOLERANCE,
};

/// A geodesic triangle in the disk. Vertex k carries interior angle `angles[k]`;
/// side k is the side opposite vertex k.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HypTriangle {
    vertices: [DiskPoint; 3],
    angles: [f64; 3],
}

/// The fundamental triangle of the (p, q, r) triangle group, in canonical
/// position: the π/p vertex at the origin, the π/q vertex on the positive
/// real axis, the π/r vertex in the upper half disk.
pub fn triangle_from_angles(p: u32, q: u32, r: u32) -> Result<HypTriangle, GeoError> {
    if p < 2 || q < 2 || r < 2 {
        return Err(GeoError::SignatureTooSmall { p, q, r });
    }
    // Hyperbolic iff 1/p + 1/q + 1/r < 1, checked exactly in integers.
    let (pp, qq, rr) = (p as u64, q as u64, r as u64);
    if qq * rr + pp * rr + pp * qq >= pp * qq * rr {
        return Err(GeoError::NotHyperbolic { p, q, r });
    }
    let pi = std::f64::consts::PI;
    HypTriangle::from_interior_angles(pi / p as f64, pi / q as f64, pi / r as f64)
}

impl HypTriangle {
    /// Builds the triangle with the given interior angles in canonical position.
    pub fn from_interior_angles(alpha: f64, beta: f64, gamma: f64) -> Result<Self, GeoError> {
        let pi = std::f64::consts::PI;
        if !(alpha > 0.0 && beta > 0.0 && gamma > 0.0 && alpha + beta + gamma < pi) {
            return Err(GeoError::InvalidAngles);
        }
        // Hyperbolic law of cosines for angles: side c opposite gamma satisfies
        // cosh c = (cos gamma + cos alpha cos beta) / (sin alpha sin beta).
        let cosh_c = (gamma.cos() + alpha.cos() * beta.cos()) / (alpha.sin() * beta.sin());
        let cosh_b = (beta.cos() + alpha.cos() * gamma.cos()) / (alpha.sin() * gamma.sin());
        let c = cosh_c.acosh();
        let b = cosh_b.acosh();
        let v0 = DiskPoint::origin();
        let v1 = DiskPoint::new((c / 2.0).tanh(), 0.0)?;
        let v2 = DiskPoint::from_complex(Complex64::from_polar((b / 2.0).tanh(), alpha))?;
        Ok(Self {
            vertices: [v0, v1, v2],
            angles: [alpha, beta, gamma],
        })
    }

    /// Builds the triangle spanned by three given points, measuring its
    /// interior angles in place.
    pub fn from_vertices(vertices: [DiskPoint; 3]) -> Result<Self, GeoError> {
        for k in 0..3 {
            let sep = hyp_distance(vertices[k], vertices[(k + 1) % 3]);
            if sep < POINT_TOLERANCE {
                return Err(GeoError::DegenerateMirror { separation: sep });
            }
        }
        let mut angles = [0.0; 3];
        for (k, angle) in angles.iter_mut().enumerate() {
            *angle = angle_at(vertices[k], vertices[(k + 1) % 3], vertices[(k + 2) % 3]);
        }
        if angles.iter().sum::<f64>() >= std::f64::consts::PI {
            return Err(GeoError::InvalidAngles);
        }
        Ok(Self { vertices, angles })
    }

    pub fn vertices(&self) -> [DiskPoint; 3] {
        self.vertices
    }

    pub fn vertex(&self, k: usize) -> DiskPoint {
        self.vertices[k]
    }

    pub fn angles(&self) -> [f64; 3] {
        self.angles
    }

    /// Side opposite vertex k, oriented so the triangle stays on a consistent side.
    pub fn side(&self, k: usize) -> GeodesicSegment {
        GeodesicSegment::new(self.vertices[(k + 1) % 3], self.vertices[(k + 2) % 3])
    }

    pub fn side_lengths(&self) -> [f64; 3] {
        [self.side(0).length(), self.side(1).length(), self.side(2).length()]
    }

    /// Longest side; for a triangle this is also its diameter.
    pub fn diameter(&self) -> f64 {
        self.side_lengths().iter().cloned().fold(0.0, f64::max)
    }

    /// Gauss-Bonnet: area = π − (sum of interior angles).
    pub fn area(&self) -> f64 {
        std::f64::consts::PI - self.angles.iter().sum::<f64>()
    }

    pub fn transformed(&self, iso: &HypIsometry) -> Self {
        Self {
            vertices: [
                iso.apply(self.vertices[0]),
                iso.apply(self.vertices[1]),
                iso.apply(self.vertices[2]),
            ],
            angles: self.angles,
        }
    }

    /// Reflection across side k (the side opposite vertex k).
    pub fn reflection_across_side(&self, k: usize) -> HypIsometry {
        let s = self.side(k);
        HypIsometry::reflection_across(s.start, s.end)
            .expect("triangle sides have positive length")
    }

    /// Signed distance from x to the geodesic carrying side k, positive on the
    /// triangle's side (the side containing the opposite vertex).
    fn inward_distance(&self, k: usize, x: DiskPoint) -> f64 {
        let s = self.side(k);
        let d = signed_distance_to_geodesic(x, s.start, s.end);
        let v = signed_distance_to_geodesic(self.vertices[k], s.start, s.end);
        if v >= 0.0 {
            d
        } else {
            -d
        }
    }

    /// True if x lies in the closed triangle, within `tol` of it.
    pub fn contains(&self, x: DiskPoint, tol: f64) -> bool {
        (0..3).all(|k| self.inward_distance(k, x) >= -tol)
    }

    /// Distance from x to the triangle boundary (minimum over the three sides).
    pub fn boundary_distance(&self, x: DiskPoint) -> f64 {
        (0..3)
            .map(|k| self.side(k).distance_to(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Incenter and inradius.
    ///
    /// The incenter is found on the interior bisector at vertex 0: points
    /// there are equidistant from the two adjacent sides by reflection
    /// symmetry, so it remains to equalize against the opposite side, a
    /// monotone one-dimensional root find.
    pub fn incenter_and_inradius(&self) -> Result<(DiskPoint, f64), GeoError> {
        let (center, _) = self.incenter_from_vertex(0)?;
        let dists: Vec<f64> = (0..3).map(|k| self.side(k).distance_to(center)).collect();
        let spread = dists.iter().cloned().fold(f64::MIN, f64::max)
            - dists.iter().cloned().fold(f64::MAX, f64::min);
        if spread > 1e-9 {
            return Err(GeoError::IncenterFailure { spread });
        }
        let radius = dists.iter().sum::<f64>() / 3.0;
        Ok((center, radius))
    }

    /// Root find along the bisector at `vertex`; exposed for cross-checking
    /// that different vertices agree.
    pub fn incenter_from_vertex(&self, vertex: usize) -> Result<(DiskPoint, f64), GeoError> {
        let v = self.vertices[vertex];
        let adj_a = self.vertices[(vertex + 1) % 3];
        let adj_b = self.vertices[(vertex + 2) % 3];
        let to_origin = HypIsometry::translation_to_origin(v);
        let da = to_origin.apply_raw(adj_a.to_complex());
        let db = to_origin.apply_raw(adj_b.to_complex());
        let bisector = {
            let sum = da / da.norm() + db / db.norm();
            sum / sum.norm()
        };
        let back = to_origin.inverse();
        let at = |t: f64| {
            DiskPoint::from_complex(back.apply_raw(bisector * (t / 2.0).tanh()))
                .expect("bisector point inside disk")
        };
        let opposite = self.side(vertex);
        let adjacent = GeodesicSegment::new(v, adj_a);
        // g(t) = inward distance to the opposite side minus distance to an
        // adjacent side: positive at the vertex, negative once the bisector
        // meets the opposite side.
        let g = |t: f64| {
            let x = at(t);
            self.inward_distance(vertex, x) - adjacent.distance_to(x)
        };
        let mut lo = 0.0;
        let mut hi = hyp_distance(v, adj_a) + hyp_distance(v, adj_b);
        let mut grow = 0;
        while g(hi) > 0.0 {
            hi *= 2.0;
            grow += 1;
            if grow > 60 {
                return Err(GeoError::IncenterFailure { spread: f64::INFINITY });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let center = at(0.5 * (lo + hi));
        let radius = opposite.distance_to(center);
        Ok((center, radius))
    }
}
