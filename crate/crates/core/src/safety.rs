//! Shared simulation constants and the braking-distance formula.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{convert_speed, feet_to_meters};

#[derive(Debug, Error, PartialEq)]
pub enum SafetyError {
    #[error("deceleration must be positive, got {0}")]
    Deceleration(f64),
    #[error("speed must be non-negative, got {0}")]
    Speed(f64),
    #[error("constant `{0}` must be strictly positive, got {1}")]
    NonPositive(&'static str, f64),
}

/// Thresholds and physical constants shared by every layer. All SI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConstants {
    /// seconds between BSMs
    pub bsm_interval: f64,
    /// m/s
    pub queue_speed_threshold: f64,
    /// meters
    pub queue_gap_threshold: f64,
    /// m/s^2, braking deceleration
    pub decel: f64,
    /// meters
    pub dsrc_range: f64,
    /// milliseconds
    pub safety_latency_req: f64,
}

impl Default for SimConstants {
    fn default() -> Self {
        SimConstants {
            bsm_interval: 0.1,
            queue_speed_threshold: convert_speed(5.0),
            queue_gap_threshold: feet_to_meters(20.0),
            decel: feet_to_meters(11.2),
            dsrc_range: 300.0,
            safety_latency_req: 200.0,
        }
    }
}

impl SimConstants {
    pub fn validate(&self) -> Result<(), SafetyError> {
        let fields = [
            ("bsm_interval", self.bsm_interval),
            ("queue_speed_threshold", self.queue_speed_threshold),
            ("queue_gap_threshold", self.queue_gap_threshold),
            ("decel", self.decel),
            ("dsrc_range", self.dsrc_range),
            ("safety_latency_req", self.safety_latency_req),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SafetyError::NonPositive(name, v));
            }
        }
        Ok(())
    }
}

/// Braking distance `v^2 / (2a)` from the moment the first warning arrives.
pub fn min_safety_distance(speed: f64, decel: f64) -> Result<f64, SafetyError> {
    if !(decel > 0.0) {
        return Err(SafetyError::Deceleration(decel));
    }
    if !(speed >= 0.0) {
        return Err(SafetyError::Speed(speed));
    }
    Ok(speed * speed / (2.0 * decel))
}
