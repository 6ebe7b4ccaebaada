use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::engine::Millis;
use crate::geo::{distance, GeoPoint};
use crate::radio::LinkKind;
use crate::safety::{min_safety_distance, SimConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WarningReason {
    HardBrake,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarningMessage {
    pub source_vehicle: String,
    pub t_emit: Millis,
    pub pos: GeoPoint,
    pub reason: WarningReason,
    /// sender speed at emission, m/s; selects the latency tier
    pub speed: f64,
}

impl WarningMessage {
    pub fn hard_brake(source: &str, t: Millis, pos: GeoPoint, speed: f64) -> Self {
        WarningMessage { source_vehicle: source.to_string(), t_emit: t, pos, reason: WarningReason::HardBrake, speed }
    }

    pub fn to_document(&self) -> Value {
        json!({
            "source_vehicle": self.source_vehicle,
            "t_emit": self.t_emit,
            "lat": self.pos.lat,
            "lon": self.pos.lon,
            "reason": "HARD_BRAKE",
            "speed": self.speed,
        })
    }

    pub fn from_document(doc: &Value) -> Option<Self> {
        Some(WarningMessage {
            source_vehicle: doc.get("source_vehicle")?.as_str()?.to_string(),
            t_emit: doc.get("t_emit")?.as_u64()?,
            pos: GeoPoint { lat: doc.get("lat")?.as_f64()?, lon: doc.get("lon")?.as_f64()? },
            reason: WarningReason::HardBrake,
            speed: doc.get("speed")?.as_f64()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Safe,
    Unsafe,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Safe => "SAFE",
            Verdict::Unsafe => "UNSAFE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AvoidanceDecision {
    pub vehicle: String,
    pub source: String,
    pub t_recv: Millis,
    /// meters between receiver and the warning's origin
    pub gap: f64,
    /// braking distance at the receiver's speed, meters
    pub d_min: f64,
    pub verdict: Verdict,
    pub link_used: LinkKind,
    pub latency: Millis,
    pub within_safety_latency: bool,
    /// receiver speed on receipt, m/s
    pub speed: f64,
}

/// The receiving vehicle as seen at `t_recv`.
#[derive(Debug, Clone, Copy)]
pub struct Receiver<'a> {
    pub id: &'a str,
    pub pos: GeoPoint,
    pub speed: f64,
}

/// Per-receiver memory of which warnings were already acted on, keyed by
/// (source, reason).
#[derive(Debug, Clone, Default)]
pub struct WarningLog {
    seen: BTreeSet<(String, String, WarningReason)>,
}

impl WarningLog {
    fn first(&mut self, rx: &str, w: &WarningMessage) -> bool {
        self.seen.insert((rx.to_string(), w.source_vehicle.clone(), w.reason))
    }
}

/// Judge the first copy of a warning; later copies (e.g. the LTE relay
/// after a DSRC hit) yield `None`.
pub fn on_warning(
    rx: Receiver<'_>,
    w: &WarningMessage,
    t_recv: Millis,
    link: LinkKind,
    constants: &SimConstants,
    log: &mut WarningLog,
) -> Option<AvoidanceDecision> {
    if !log.first(rx.id, w) {
        return None;
    }
    let gap = distance(rx.pos, w.pos);
    let d_min = min_safety_distance(rx.speed, constants.decel).expect("constants validated");
    let latency = t_recv.saturating_sub(w.t_emit);
    Some(AvoidanceDecision {
        vehicle: rx.id.to_string(),
        source: w.source_vehicle.clone(),
        t_recv,
        gap,
        d_min,
        verdict: if gap >= d_min { Verdict::Safe } else { Verdict::Unsafe },
        link_used: link,
        latency,
        within_safety_latency: latency as f64 <= constants.safety_latency_req,
        speed: rx.speed,
    })
}
