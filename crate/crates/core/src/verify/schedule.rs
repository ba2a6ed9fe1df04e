use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neighbourhood radius `ε_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum EpsilonSchedule {
    /// `max(c · T^(−p), floor)`.
    Power { c: f64, p: f64, floor: f64 },
    /// The same radius at every horizon.
    Fixed { eps: f64 },
}

impl EpsilonSchedule {
    pub const CANONICAL_EXPONENT: f64 = 1.0 / 3.0;

    /// Validated power schedule: `c > 0`, `0 < p < 1/2`, `floor ≥ 0`.
    pub fn power(c: f64, p: f64, floor: f64) -> Result<Self> {
        let s = EpsilonSchedule::Power { c, p, floor };
        s.validate()?;
        Ok(s)
    }

    /// Power schedule without the exponent restriction, for diagnostics
    /// with radii that shrink too fast.
    pub fn power_unchecked(c: f64, p: f64, floor: f64) -> Self {
        EpsilonSchedule::Power { c, p, floor }
    }

    /// `T^(−1/3)`.
    pub fn canonical() -> Self {
        EpsilonSchedule::Power {
            c: 1.0,
            p: Self::CANONICAL_EXPONENT,
            floor: 0.0,
        }
    }

    pub fn fixed(eps: f64) -> Result<Self> {
        let s = EpsilonSchedule::Fixed { eps };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            EpsilonSchedule::Power { c, p, floor } => {
                c > 0.0 && c.is_finite() && p > 0.0 && p < 0.5 && floor >= 0.0 && floor.is_finite()
            }
            EpsilonSchedule::Fixed { eps } => eps > 0.0 && eps.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameters(format!("invalid epsilon schedule {self:?}")))
        }
    }

    pub fn at(&self, horizon: f64) -> f64 {
        match *self {
            EpsilonSchedule::Power { c, p, floor } => (c * horizon.powf(-p)).max(floor),
            EpsilonSchedule::Fixed { eps } => eps,
        }
    }

    /// Multiplies the radius by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        match *self {
            EpsilonSchedule::Power { c, p, floor } => EpsilonSchedule::Power {
                c: c * k,
                p,
                floor: floor * k,
            },
            EpsilonSchedule::Fixed { eps } => EpsilonSchedule::Fixed { eps: eps * k },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_must_be_below_one_half() {
        assert!(EpsilonSchedule::power(1.0, 0.5, 0.0).is_err());
        assert!(EpsilonSchedule::power(1.0, 0.0, 0.0).is_err());
        assert!(EpsilonSchedule::power(0.5, 1.0 / 3.0, 0.0).is_ok());
    }

    #[test]
    fn decreasing_towards_floor() {
        let s = EpsilonSchedule::power(1.0, 1.0 / 3.0, 0.01).unwrap();
        let vals: Vec<f64> = [1.0, 8.0, 64.0, 1e9].iter().map(|&t| s.at(t)).collect();
        assert!((vals[1] - 0.5).abs() < 1e-15);
        assert!(vals.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(vals[3], 0.01);
    }
}
