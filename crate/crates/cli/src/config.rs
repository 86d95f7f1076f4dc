//! Run configuration shared by every experiment command.

use serde::Serialize;
use steklov_core::tiling::DEPTH_CAP;
use thiserror::Error;

/// Extra tiling depth beyond the largest ball radius. The ball interior
/// needs complete adjacency, and the domain construction walks the corner
/// fans of the boundary tiles, which reach one ring further.
pub const DEPTH_MARGIN: u32 = 2;

/// Discretization cost grows quickly with the subgraph; the comparison
/// experiment stays at desk scale.
pub const COMPARE_RADIUS_CAP: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Balls,
    PuncturedBalls,
    Horseshoe,
    CustomList,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub family: Family,
    pub radius_min: u32,
    pub radius_max: u32,
    pub depth: u32,
    pub k_max: usize,
    /// Sampling scale as a fraction of the domain's largest admissible ε.
    pub epsilon_factor: f64,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("signature ({p},{q},{r}) is not hyperbolic: 1/p + 1/q + 1/r must be < 1")]
    NotHyperbolic { p: u32, q: u32, r: u32 },
    #[error("depth {depth} exceeds the tiling depth cap {cap}")]
    DepthTooLarge { depth: u32, cap: u32 },
    #[error("radius range {min}..={max} is empty or starts below 1")]
    BadRadiusRange { min: u32, max: u32 },
    #[error("depth {depth} too shallow for radius {radius}: need radius + {margin}")]
    DepthTooShallow { depth: u32, radius: u32, margin: u32 },
    #[error("k-max must be at least 1")]
    KMaxZero,
    #[error("epsilon-factor {value} outside (0, 1]")]
    BadEpsilonFactor { value: f64 },
    #[error("radius {radius} exceeds the comparison cap {cap}")]
    CompareRadiusTooLarge { radius: u32, cap: u32 },
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (p, q, r) = (self.p, self.q, self.r);
        // Exact integer form of 1/p + 1/q + 1/r < 1, so that the Euclidean
        // boundary cases like (2,3,6) do not slip through in floats.
        let (pu, qu, ru) = (p as u64, q as u64, r as u64);
        if p < 2 || q < 2 || r < 2 || qu * ru + pu * ru + pu * qu >= pu * qu * ru {
            return Err(ConfigError::NotHyperbolic { p, q, r });
        }
        if self.depth > DEPTH_CAP {
            return Err(ConfigError::DepthTooLarge { depth: self.depth, cap: DEPTH_CAP });
        }
        if self.k_max == 0 {
            return Err(ConfigError::KMaxZero);
        }
        if !(self.epsilon_factor > 0.0 && self.epsilon_factor <= 1.0) {
            return Err(ConfigError::BadEpsilonFactor { value: self.epsilon_factor });
        }
        match self.family {
            // Horseshoes derive their extent from the corner fan and custom
            // lists carry explicit vertex sets, so the radius coupling only
            // applies to ball families.
            Family::Horseshoe | Family::CustomList => Ok(()),
            _ => {
                if self.radius_min < 1 || self.radius_min > self.radius_max {
                    return Err(ConfigError::BadRadiusRange {
                        min: self.radius_min,
                        max: self.radius_max,
                    });
                }
                if self.depth < self.radius_max + DEPTH_MARGIN {
                    return Err(ConfigError::DepthTooShallow {
                        depth: self.depth,
                        radius: self.radius_max,
                        margin: DEPTH_MARGIN,
                    });
                }
                Ok(())
            }
        }
    }

    /// Comparison runs additionally cap the family size.
    pub fn validate_for_compare(&self) -> Result<(), ConfigError> {
        self.validate()?;
        if self.radius_max > COMPARE_RADIUS_CAP {
            return Err(ConfigError::CompareRadiusTooLarge {
                radius: self.radius_max,
                cap: COMPARE_RADIUS_CAP,
            });
        }
        Ok(())
    }

    pub fn radii(&self) -> impl Iterator<Item = u32> {
        self.radius_min..=self.radius_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            p: 2,
            q: 3,
            r: 7,
            family: Family::Balls,
            radius_min: 1,
            radius_max: 3,
            depth: 5,
            k_max: 5,
            epsilon_factor: 0.5,
            seed: 7,
        }
    }

    #[test]
    fn valid_config_passes() {
        base().validate().unwrap();
    }

    #[test]
    fn euclidean_and_spherical_signatures_are_rejected() {
        let mut cfg = base();
        cfg.r = 6;
        assert!(matches!(cfg.validate(), Err(ConfigError::NotHyperbolic { .. })));
        cfg.r = 3;
        cfg.q = 3;
        cfg.p = 2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn depth_is_checked_against_cap_and_radius() {
        let mut cfg = base();
        cfg.depth = DEPTH_CAP + 1;
        assert!(matches!(cfg.validate(), Err(ConfigError::DepthTooLarge { .. })));
        cfg.depth = 4;
        assert!(matches!(cfg.validate(), Err(ConfigError::DepthTooShallow { .. })));
    }

    #[test]
    fn compare_cap_applies_only_to_compare() {
        let mut cfg = base();
        cfg.radius_max = 5;
        cfg.depth = 7;
        cfg.validate().unwrap();
        assert!(matches!(
            cfg.validate_for_compare(),
            Err(ConfigError::CompareRadiusTooLarge { .. })
        ));
    }

    #[test]
    fn epsilon_factor_must_be_a_fraction() {
        let mut cfg = base();
        cfg.epsilon_factor = 0.0;
        assert!(cfg.validate().is_err());
        cfg.epsilon_factor = 1.5;
        assert!(cfg.validate().is_err());
        cfg.epsilon_factor = 1.0;
        cfg.validate().unwrap();
    }
}
