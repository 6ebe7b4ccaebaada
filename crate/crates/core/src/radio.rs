//! Per-link delivery model: range gating, loss ramp, latency sampling and
//! log-distance RSSI for coverage reports.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Millis;
use crate::geo::{distance, GeoPoint};
use crate::rng::RngStream;
use crate::units::mps_to_mph;

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("{0:?} range must be positive, got {1}")]
    Range(LinkKind, f64),
    #[error("{0:?} base loss must lie in [0, 1), got {1}")]
    BaseLoss(LinkKind, f64),
    #[error("{0:?} obstruction must lie in [0, 1], got {1}")]
    Obstruction(LinkKind, f64),
    #[error("{0:?} ramp start fraction must lie in [0, 1], got {1}")]
    RampStart(LinkKind, f64),
    #[error("latency tiers must not be empty")]
    NoTiers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Dsrc,
    Lte,
    WifiBackhaul,
    Fiber,
    /// vehicle-to-access-point Wi-Fi
    Wifi,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Dsrc => "DSRC",
            LinkKind::Lte => "LTE",
            LinkKind::WifiBackhaul => "WIFI_BACKHAUL",
            LinkKind::Fiber => "FIBER",
            LinkKind::Wifi => "WIFI",
        }
    }

    pub fn parse(s: &str) -> Option<LinkKind> {
        [LinkKind::Dsrc, LinkKind::Lte, LinkKind::WifiBackhaul, LinkKind::Fiber, LinkKind::Wifi]
            .into_iter()
            .find(|k| k.as_str() == s)
    }

    /// Short-range access links carry beacons and drive handoff.
    pub fn is_access(self) -> bool {
        matches!(self, LinkKind::Dsrc | LinkKind::Wifi)
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform `mean ± jitter` latency in whole milliseconds, floored at 1 ms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyProfile {
    pub mean_ms: Millis,
    #[serde(default)]
    pub jitter_ms: Millis,
}

impl LatencyProfile {
    pub const fn fixed(mean_ms: Millis) -> Self {
        LatencyProfile { mean_ms, jitter_ms: 0 }
    }

    pub fn sample(&self, rng: &mut RngStream) -> Millis {
        let offset = rng.symmetric(self.jitter_ms);
        (self.mean_ms as i64 + offset).max(1) as Millis
    }
}

/// Latency looked up by the sender's speed: the tier whose nominal speed is
/// closest wins (ties go to the lower tier).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedTier {
    pub speed_mph: f64,
    #[serde(flatten)]
    pub latency: LatencyProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieredLatency {
    tiers: Vec<SpeedTier>,
}

impl TieredLatency {
    pub fn new(mut tiers: Vec<SpeedTier>) -> Result<Self, RadioError> {
        if tiers.is_empty() {
            return Err(RadioError::NoTiers);
        }
        tiers.sort_by(|a, b| a.speed_mph.total_cmp(&b.speed_mph));
        Ok(TieredLatency { tiers })
    }

    pub fn lookup(&self, speed_mps: f64) -> LatencyProfile {
        let mph = mps_to_mph(speed_mps);
        let mut best = &self.tiers[0];
        for t in &self.tiers[1..] {
            if (t.speed_mph - mph).abs() < (best.speed_mph - mph).abs() {
                best = t;
            }
        }
        best.latency
    }

    pub fn tiers(&self) -> &[SpeedTier] {
        &self.tiers
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delivery {
    Delivered { latency: Millis },
    Lost,
}

/// A transmission between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet<P> {
    pub payload: P,
    pub tx: String,
    pub rx: String,
    pub link: LinkKind,
    pub t_send: Millis,
    pub t_recv: Millis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub kind: LinkKind,
    /// meters; `None` = unbounded (LTE) or point-to-point (backhaul)
    pub range: Option<f64>,
    pub latency: LatencyProfile,
    pub p_near: f64,
    pub ramp_start_frac: f64,
    pub obstruction: f64,
}

impl LinkModel {
    pub fn dsrc() -> Self {
        LinkModel {
            kind: LinkKind::Dsrc,
            range: Some(300.0),
            latency: LatencyProfile::fixed(4),
            p_near: 0.0,
            ramp_start_frac: 0.8,
            obstruction: 0.0,
        }
    }

    pub fn lte() -> Self {
        LinkModel { kind: LinkKind::Lte, range: None, latency: LatencyProfile::fixed(50), ..Self::dsrc() }
    }

    pub fn wifi_backhaul() -> Self {
        LinkModel { kind: LinkKind::WifiBackhaul, range: None, latency: LatencyProfile::fixed(6), ..Self::dsrc() }
    }

    pub fn fiber() -> Self {
        LinkModel { kind: LinkKind::Fiber, range: None, latency: LatencyProfile::fixed(1), ..Self::dsrc() }
    }

    pub fn wifi() -> Self {
        LinkModel {
            kind: LinkKind::Wifi,
            range: Some(100.0),
            latency: LatencyProfile::fixed(10),
            ..Self::dsrc()
        }
    }

    pub fn validate(&self) -> Result<(), RadioError> {
        if let Some(r) = self.range {
            if !(r > 0.0 && r.is_finite()) {
                return Err(RadioError::Range(self.kind, r));
            }
        }
        if !(0.0..1.0).contains(&self.p_near) {
            return Err(RadioError::BaseLoss(self.kind, self.p_near));
        }
        if !(0.0..=1.0).contains(&self.obstruction) {
            return Err(RadioError::Obstruction(self.kind, self.obstruction));
        }
        if !(0.0..=1.0).contains(&self.ramp_start_frac) {
            return Err(RadioError::RampStart(self.kind, self.ramp_start_frac));
        }
        Ok(())
    }

    pub fn with_obstruction(&self, obstruction: f64) -> Self {
        LinkModel { obstruction, ..self.clone() }
    }

    /// `range * (1 - obstruction)`, `None` when unbounded.
    pub fn effective_range(&self) -> Option<f64> {
        self.range.map(|r| r * (1.0 - self.obstruction))
    }

    pub fn in_range_at(&self, d: f64) -> bool {
        self.effective_range().is_none_or(|r| d <= r)
    }

    pub fn in_range(&self, tx: GeoPoint, rx: GeoPoint) -> bool {
        self.range.is_none() || self.in_range_at(distance(tx, rx))
    }

    /// Flat `p_near` up to `ramp_start_frac * R_eff`, then linear to 1 at `R_eff`.
    pub fn p_loss(&self, d: f64) -> f64 {
        let Some(r) = self.effective_range() else {
            return self.p_near;
        };
        if d >= r {
            return 1.0;
        }
        let knee = self.ramp_start_frac * r;
        if d <= knee {
            return self.p_near;
        }
        self.p_near + (1.0 - self.p_near) * (d - knee) / (r - knee)
    }

    pub fn sample_delivery(
        &self,
        d: f64,
        profile: &LatencyProfile,
        loss_rng: &mut RngStream,
        latency_rng: &mut RngStream,
    ) -> Delivery {
        if !self.in_range_at(d) {
            return Delivery::Lost;
        }
        if loss_rng.unit() < self.p_loss(d) {
            return Delivery::Lost;
        }
        Delivery::Delivered { latency: profile.sample(latency_rng) }
    }
}

/// Log-distance path loss parameters for coverage reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RssiParams {
    pub tx_power_dbm: f64,
    pub pl0_db: f64,
    pub exponent: f64,
    pub d0_m: f64,
}

impl Default for RssiParams {
    fn default() -> Self {
        RssiParams { tx_power_dbm: 20.0, pl0_db: 47.9, exponent: 2.7, d0_m: 1.0 }
    }
}

/// `P_tx - PL0 - 10 n log10(d / d0)`, distances below `d0` clamped to `d0`.
pub fn rssi_dbm(d: f64, p: &RssiParams) -> f64 {
    let d = d.max(p.d0_m);
    p.tx_power_dbm - p.pl0_db - 10.0 * p.exponent * (d / p.d0_m).log10()
}
