//! Beacon-driven hard handoff between LTE and a short-range access link
//! (DSRC, or Wi-Fi with an association gap).
//!
//! A vehicle switches onto the access link when a beacon reaches it and
//! falls back to LTE once `miss_threshold` beacon intervals pass without
//! one. Exactly one link is active at any instant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Millis;
use crate::radio::LinkKind;

#[derive(Debug, Error, PartialEq)]
pub enum HandoffError {
    #[error("beacon interval must be positive")]
    Interval,
    #[error("miss threshold must be at least 1")]
    MissThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeaconConfig {
    pub interval: Millis,
    pub miss_threshold: u32,
    /// gap before a fresh Wi-Fi association carries traffic
    pub wifi_association_delay: Millis,
}

impl Default for BeaconConfig {
    fn default() -> Self {
        BeaconConfig { interval: 100, miss_threshold: 3, wifi_association_delay: 25_000 }
    }
}

impl BeaconConfig {
    pub fn validate(&self) -> Result<(), HandoffError> {
        if self.interval == 0 {
            return Err(HandoffError::Interval);
        }
        if self.miss_threshold == 0 {
            return Err(HandoffError::MissThreshold);
        }
        Ok(())
    }

    pub fn exit_after(&self) -> Millis {
        self.interval * self.miss_threshold as Millis
    }

    fn association_delay(&self, link: LinkKind) -> Millis {
        match link {
            LinkKind::Wifi => self.wifi_association_delay,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Active {
    Lte,
    Access { link: LinkKind, rsu: String, usable_from: Millis },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HandoffEvent {
    pub t: Millis,
    pub from: LinkKind,
    pub to: LinkKind,
    /// serving RSU after the event, if any
    pub rsu: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandoffState {
    active: Active,
    last_beacon_at: Option<Millis>,
    beacons_missed: u32,
    heard: BTreeMap<String, (LinkKind, Millis)>,
}

impl Default for HandoffState {
    fn default() -> Self {
        Self::new()
    }
}

impl HandoffState {
    pub fn new() -> Self {
        HandoffState { active: Active::Lte, last_beacon_at: None, beacons_missed: 0, heard: BTreeMap::new() }
    }

    pub fn active(&self) -> &Active {
        &self.active
    }

    pub fn last_beacon_at(&self) -> Option<Millis> {
        self.last_beacon_at
    }

    pub fn beacons_missed(&self) -> u32 {
        self.beacons_missed
    }

    /// The link every upstream message is sent on. Never both.
    pub fn active_link(&self) -> LinkKind {
        match &self.active {
            Active::Lte => LinkKind::Lte,
            Active::Access { link, .. } => *link,
        }
    }

    pub fn serving_rsu(&self) -> Option<&str> {
        match &self.active {
            Active::Lte => None,
            Active::Access { rsu, .. } => Some(rsu),
        }
    }

    /// False while a fresh association is still being set up.
    pub fn can_send(&self, t: Millis) -> bool {
        match &self.active {
            Active::Lte => true,
            Active::Access { usable_from, .. } => t >= *usable_from,
        }
    }

    pub fn on_beacon(&mut self, rsu: &str, link: LinkKind, t: Millis, cfg: &BeaconConfig) -> Option<HandoffEvent> {
        self.heard.insert(rsu.to_string(), (link, t));
        match &self.active {
            Active::Lte => {
                self.active = Active::Access {
                    link,
                    rsu: rsu.to_string(),
                    usable_from: t + cfg.association_delay(link),
                };
                self.last_beacon_at = Some(t);
                self.beacons_missed = 0;
                Some(HandoffEvent { t, from: LinkKind::Lte, to: link, rsu: Some(rsu.to_string()) })
            }
            Active::Access { rsu: serving, .. } if serving == rsu => {
                self.last_beacon_at = Some(t);
                self.beacons_missed = 0;
                None
            }
            // another RSU; the serving one keeps the vehicle until it goes quiet
            Active::Access { .. } => None,
        }
    }

    pub fn on_tick(&mut self, t: Millis, cfg: &BeaconConfig) -> Option<HandoffEvent> {
        let Active::Access { link, rsu, .. } = &self.active else {
            return None;
        };
        let (link, serving) = (*link, rsu.clone());
        let last = self.last_beacon_at.unwrap_or(0);
        self.beacons_missed = (t.saturating_sub(last) / cfg.interval) as u32;
        if t.saturating_sub(last) < cfg.exit_after() {
            return None;
        }
        let fresh = self
            .heard
            .iter()
            .filter(|(id, (_, at))| **id != serving && t.saturating_sub(*at) < cfg.exit_after())
            .max_by_key(|(id, (_, at))| (*at, std::cmp::Reverse((*id).clone())))
            .map(|(id, (k, at))| (id.clone(), *k, *at));
        match fresh {
            Some((next, next_link, at)) => {
                let usable_from = if next_link == link && next_link != LinkKind::Wifi {
                    t
                } else {
                    t + cfg.association_delay(next_link)
                };
                self.active = Active::Access { link: next_link, rsu: next.clone(), usable_from };
                self.last_beacon_at = Some(at);
                self.beacons_missed = 0;
                Some(HandoffEvent { t, from: link, to: next_link, rsu: Some(next) })
            }
            None => {
                self.active = Active::Lte;
                Some(HandoffEvent { t, from: link, to: LinkKind::Lte, rsu: None })
            }
        }
    }
}
