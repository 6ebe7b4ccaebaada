//! The Basic Safety Message record and its NDJSON trace form.

use serde::{Deserialize, Serialize};

use crate::engine::Millis;
use crate::geo::GeoPoint;

/// Per-vehicle 10 Hz status record. Semantic only, not a J2735 encoding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bsm {
    /// ms since scenario start
    pub t: Millis,
    pub vehicle_id: String,
    pub pos: GeoPoint,
    /// m/s
    pub speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
}

/// One line of an offline BSM trace.
///
/// `rx_t` is the receive time at the Fixed Edge (defaults to `t`); `truth`
/// is the omniscient queue state of the receiving zone at the first whole
/// second at or after `rx_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub t: Millis,
    pub vehicle_id: String,
    pub lat: f64,
    pub lon: f64,
    pub speed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_t: Option<Millis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<bool>,
}

impl TraceRecord {
    pub fn from_bsm(bsm: &Bsm, rx_t: Millis, truth: Option<bool>) -> Self {
        TraceRecord {
            t: bsm.t,
            vehicle_id: bsm.vehicle_id.clone(),
            lat: bsm.pos.lat,
            lon: bsm.pos.lon,
            speed: bsm.speed,
            heading: bsm.heading,
            rx_t: Some(rx_t),
            truth,
        }
    }

    pub fn bsm(&self) -> Bsm {
        Bsm {
            t: self.t,
            vehicle_id: self.vehicle_id.clone(),
            pos: GeoPoint { lat: self.lat, lon: self.lon },
            speed: self.speed,
            heading: self.heading,
        }
    }

    pub fn received_at(&self) -> Millis {
        self.rx_t.unwrap_or(self.t)
    }
}
