use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DiskPoint, GeoError, POINT_TOLERANCE};

/// An isometry of the Poincaré disk.
///
/// Orientation-preserving isometries are Möbius maps z ↦ (az + b)/(b̄z + ā)
/// with |a|² − |b|² = 1; orientation-reversing ones conjugate z first.
/// The pair (a, b) is kept normalized so compositions stay stable.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HypIsometry {
    a: Complex64,
    b: Complex64,
    reverses: bool,
}

impl HypIsometry {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
            reverses: false,
        }
    }

    /// Rotation by `angle` about the origin.
    pub fn rotation(angle: f64) -> Self {
        Self {
            a: Complex64::from_polar(1.0, angle / 2.0),
            b: Complex64::new(0.0, 0.0),
            reverses: false,
        }
    }

    /// Rotation by `angle` about an arbitrary center.
    pub fn rotation_about(center: DiskPoint, angle: f64) -> Self {
        let to = Self::translation_to_origin(center);
        to.inverse().compose(&Self::rotation(angle)).compose(&to)
    }

    /// The unique translation along the geodesic through `p` and the origin
    /// that carries `p` to the origin.
    pub fn translation_to_origin(p: DiskPoint) -> Self {
        let z = p.to_complex();
        let s = (1.0 - z.norm_sqr()).sqrt();
        Self {
            a: Complex64::new(1.0 / s, 0.0),
            b: -z / s,
            reverses: false,
        }
    }

    /// Inverse of [`translation_to_origin`]: carries the origin to `p`.
    pub fn translation_from_origin(p: DiskPoint) -> Self {
        Self::translation_to_origin(p).inverse()
    }

    /// Reflection across the geodesic through `p` and `q`.
    pub fn reflection_across(p: DiskPoint, q: DiskPoint) -> Result<Self, GeoError> {
        let separation = super::hyp_distance(p, q);
        if separation < POINT_TOLERANCE {
            return Err(GeoError::DegenerateMirror { separation });
        }
        let t = Self::translation_to_origin(p);
        let theta = t.apply_raw(q.to_complex()).arg();
        // In the frame where the mirror is the diameter at angle theta,
        // reflection is z ↦ e^{2iθ} z̄.
        let mirror = Self {
            a: Complex64::from_polar(1.0, theta),
            b: Complex64::new(0.0, 0.0),
            reverses: true,
        };
        Ok(t.inverse().compose(&mirror).compose(&t))
    }

    /// Composition self ∘ other (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let (oa, ob) = if self.reverses {
            (other.a.conj(), other.b.conj())
        } else {
            (other.a, other.b)
        };
        let mut a = self.a * oa + self.b * ob.conj();
        let mut b = self.a * ob + self.b * oa.conj();
        // Renormalize |a|² − |b|² to 1 to stop drift over long words.
        let det = (a.norm_sqr() - b.norm_sqr()).sqrt();
        a /= det;
        b /= det;
        Self {
            a,
            b,
            reverses: self.reverses ^ other.reverses,
        }
    }

    pub fn inverse(&self) -> Self {
        if self.reverses {
            // (M ∘ conj)⁻¹ = conj ∘ M⁻¹, and conj ∘ (a, b) = (ā, b̄) ∘ conj.
            Self {
                a: self.a,
                b: -self.b.conj(),
                reverses: true,
            }
        } else {
            Self {
                a: self.a.conj(),
                b: -self.b,
                reverses: false,
            }
        }
    }

    pub fn reverses_orientation(&self) -> bool {
        self.reverses
    }

    pub(crate) fn apply_raw(&self, z: Complex64) -> Complex64 {
        let w = if self.reverses { z.conj() } else { z };
        (self.a * w + self.b) / (self.b.conj() * w + self.a.conj())
    }

    pub fn apply(&self, p: DiskPoint) -> DiskPoint {
        let image = self.apply_raw(p.to_complex());
        // Isometries preserve the disk; clamp the rare last-ulp escape.
        DiskPoint::from_complex(image).unwrap_or_else(|_| {
            let n = image.norm();
            let pulled = image * ((1.0 - 1e-11) / n);
            DiskPoint::from_complex(pulled).expect("clamped image inside disk")
        })
    }
}
