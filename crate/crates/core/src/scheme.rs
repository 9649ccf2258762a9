//! Scheme configuration shared by the 1D and 2D solvers.

use serde::{Deserialize, Serialize};

use crate::splitting::PointUpdate;
use crate::systems::SystemKind;
use crate::Error;

/// Bound-preserving limiting of one DoF family. For the Euler equations
/// `Global` and `Local` both enforce positivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimiterMode {
    Off,
    Global,
    Local,
}

impl LimiterMode {
    pub fn is_on(self) -> bool {
        self != LimiterMode::Off
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "off" | "none" => Ok(LimiterMode::Off),
            "global" | "on" => Ok(LimiterMode::Global),
            "local" => Ok(LimiterMode::Local),
            other => Err(Error::Config(format!("unknown limiter mode '{other}'"))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            LimiterMode::Off => "off",
            LimiterMode::Global => "global",
            LimiterMode::Local => "local",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub point_update: PointUpdate,
    pub average_limiter: LimiterMode,
    pub point_limiter: LimiterMode,
    /// Shock-sensor strength; zero disables the sensor.
    pub kappa: f64,
    pub cfl: f64,
    /// Maximum number of time-step halvings per step.
    pub max_retries: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            point_update: PointUpdate::LlfFvs,
            average_limiter: LimiterMode::Local,
            point_limiter: LimiterMode::Local,
            kappa: 0.0,
            cfl: 0.4,
            max_retries: 20,
        }
    }
}

impl SchemeConfig {
    pub fn unlimited(point_update: PointUpdate, cfl: f64) -> Self {
        SchemeConfig {
            point_update,
            average_limiter: LimiterMode::Off,
            point_limiter: LimiterMode::Off,
            kappa: 0.0,
            cfl,
            max_retries: 20,
        }
    }

    pub fn any_limiter(&self) -> bool {
        self.average_limiter.is_on() || self.point_limiter.is_on()
    }

    pub fn fully_limited(&self) -> bool {
        self.average_limiter.is_on() && self.point_limiter.is_on()
    }

    pub fn validate(&self, kind: SystemKind) -> Result<(), Error> {
        if !self.point_update.supports(kind) {
            return Err(Error::Config(format!(
                "point update {} is not available for scalar laws",
                self.point_update.label()
            )));
        }
        if !(self.cfl > 0.0 && self.cfl.is_finite()) {
            return Err(Error::Config(format!("CFL number must be positive, got {}", self.cfl)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be non-negative, got {}", self.kappa)));
        }
        Ok(())
    }
}

/// Counters accumulated over the stages of a step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    /// Interfaces whose anti-diffusive flux was reduced.
    pub limited_interfaces: usize,
    /// Point values pulled towards the first-order update.
    pub limited_points: usize,
    /// Interfaces where the shock sensor was active.
    pub sensor_active: usize,
    /// Cell-center values pulled towards the average.
    pub fixed_centers: usize,
}

impl StageStats {
    pub fn add(&mut self, o: &StageStats) {
        self.limited_interfaces += o.limited_interfaces;
        self.limited_points += o.limited_points;
        self.sensor_active += o.sensor_active;
        self.fixed_centers += o.fixed_centers;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut c = SchemeConfig::default();
        assert!(c.validate(SystemKind::Scalar).is_ok());
        c.point_update = PointUpdate::VhFvs;
        assert!(c.validate(SystemKind::Scalar).is_err());
        assert!(c.validate(SystemKind::Euler { gamma: 1.4 }).is_ok());
        c.kappa = -1.0;
        assert!(c.validate(SystemKind::Euler { gamma: 1.4 }).is_err());
        c.kappa = 0.0;
        c.cfl = 0.0;
        assert!(c.validate(SystemKind::Euler { gamma: 1.4 }).is_err());
    }

    #[test]
    fn limiter_mode_parse() {
        assert_eq!(LimiterMode::parse("LOCAL").unwrap(), LimiterMode::Local);
        assert!(LimiterMode::parse("sometimes").is_err());
    }
}
