//! One-way corridor kinematics, scripted events and omniscient queue truth.
//!
//! Vehicles are point masses ordered by arc-length `s`. Car following is a
//! minimal rule: a vehicle brakes at the shared deceleration whenever it can
//! no longer stop within the clearance to its leader (less a standstill
//! margin) or to a red stop line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Millis;
use crate::geo::{distance, GeoPoint};
use crate::safety::{min_safety_distance, SimConstants};

#[derive(Debug, Error, PartialEq)]
pub enum MobilityError {
    #[error("corridor needs at least 2 points, got {0}")]
    TooShort(usize),
    #[error("corridor has zero length")]
    ZeroLength,
    #[error("{what} `{id}` offset {s} m is outside the corridor [0, {len}]")]
    OffsetOutside { what: &'static str, id: String, s: f64, len: f64 },
    #[error("unknown vehicle `{0}`")]
    UnknownVehicle(String),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("vehicle `{0}` already exists")]
    DuplicateVehicle(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    points: Vec<GeoPoint>,
    cumulative: Vec<f64>,
    signals: Vec<(String, f64)>,
    rsus: Vec<(String, f64)>,
}

impl Corridor {
    pub fn new(
        points: Vec<GeoPoint>,
        signals: Vec<(String, f64)>,
        rsus: Vec<(String, f64)>,
    ) -> Result<Self, MobilityError> {
        if points.len() < 2 {
            return Err(MobilityError::TooShort(points.len()));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += distance(w[0], w[1]);
            cumulative.push(acc);
        }
        if acc <= 0.0 {
            return Err(MobilityError::ZeroLength);
        }
        let c = Corridor { points, cumulative, signals, rsus };
        for (what, list) in [("signal", &c.signals), ("rsu", &c.rsus)] {
            for (id, s) in list {
                if !(0.0..=acc).contains(s) {
                    return Err(MobilityError::OffsetOutside { what, id: id.clone(), s: *s, len: acc });
                }
            }
        }
        Ok(c)
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn points(&self) -> &[GeoPoint] {
        &self.points
    }

    pub fn signals(&self) -> &[(String, f64)] {
        &self.signals
    }

    pub fn rsus(&self) -> &[(String, f64)] {
        &self.rsus
    }

    pub fn rsu_offset(&self, id: &str) -> Option<f64> {
        self.rsus.iter().find(|(r, _)| r == id).map(|(_, s)| *s)
    }

    /// Linear interpolation along the polyline segment containing `s`.
    pub fn position_geo(&self, s: f64) -> GeoPoint {
        let s = s.clamp(0.0, self.length());
        let seg = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => return self.points[i],
            Err(i) => i - 1,
        };
        let (a, b) = (self.points[seg], self.points[seg + 1]);
        let span = self.cumulative[seg + 1] - self.cumulative[seg];
        let f = (s - self.cumulative[seg]) / span;
        GeoPoint { lat: a.lat + (b.lat - a.lat) * f, lon: a.lon + (b.lon - a.lon) * f }
    }

    /// Bearing of the segment containing `s`, degrees clockwise from north.
    pub fn heading_at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length());
        let seg = self
            .cumulative
            .windows(2)
            .position(|w| s <= w[1])
            .unwrap_or(self.points.len() - 2);
        let (a, b) = (self.points[seg], self.points[seg + 1]);
        let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
        let dl = (b.lon - a.lon).to_radians();
        let y = dl.sin() * p2.cos();
        let x = p1.cos() * p2.sin() - p1.sin() * p2.cos() * dl.cos();
        y.atan2(x).to_degrees().rem_euclid(360.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BrakeLatch {
    HardBrake,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: String,
    /// arc-length position, meters
    pub s: f64,
    /// m/s
    pub speed: f64,
    /// m/s^2 applied during the last step
    pub accel: f64,
    pub connected: bool,
    pub desired_speed: f64,
    pub latch: Option<BrakeLatch>,
}

impl VehicleState {
    pub fn new(id: impl Into<String>, s: f64, speed: f64, connected: bool) -> Self {
        VehicleState {
            id: id.into(),
            s,
            speed,
            accel: 0.0,
            connected,
            desired_speed: speed,
            latch: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Directive {
    HardBrake { vehicle: String, t: Millis },
    SignalRed { signal: String, t: Millis, duration: Millis },
    Spawn { vehicle: String, t: Millis, s: f64, speed: f64, connected: bool },
}

impl Directive {
    pub fn time(&self) -> Millis {
        match self {
            Directive::HardBrake { t, .. } | Directive::SignalRed { t, .. } | Directive::Spawn { t, .. } => *t,
        }
    }
}

/// Timed directives, applied in time order (ties keep script order).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioScript {
    directives: Vec<Directive>,
    cursor: usize,
}

impl ScenarioScript {
    pub fn new(mut directives: Vec<Directive>) -> Self {
        directives.sort_by_key(Directive::time);
        ScenarioScript { directives, cursor: 0 }
    }

    /// Directives due at or before `t` that have not been handed out yet.
    pub fn due(&mut self, t: Millis) -> Vec<Directive> {
        let start = self.cursor;
        while self.cursor < self.directives.len() && self.directives[self.cursor].time() <= t {
            self.cursor += 1;
        }
        self.directives[start..self.cursor].to_vec()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarFollowing {
    /// m/s^2 used when recovering toward desired speed
    pub accel: f64,
    /// clearance kept to the leader when stopped, meters
    pub standstill_gap: f64,
}

impl Default for CarFollowing {
    fn default() -> Self {
        CarFollowing { accel: 2.0, standstill_gap: 4.0 }
    }
}

#[derive(Debug, Clone)]
struct SignalState {
    s: f64,
    red_until: Option<Millis>,
    /// vehicles that could not stop when the signal turned red
    passing: Vec<String>,
}

/// Owns every vehicle on the corridor and advances them in lock-step.
#[derive(Debug, Clone)]
pub struct Traffic {
    corridor: Corridor,
    vehicles: Vec<VehicleState>,
    signals: BTreeMap<String, SignalState>,
    decel: f64,
    following: CarFollowing,
    departed: Vec<String>,
}

/// Kinematic update under constant acceleration, stopping at zero speed.
fn integrate(v: f64, a: f64, dt: f64) -> (f64, f64) {
    if a < 0.0 && v + a * dt <= 0.0 {
        return (v * v / (-2.0 * a), 0.0);
    }
    (v * dt + 0.5 * a * dt * dt, (v + a * dt).max(0.0))
}

impl Traffic {
    pub fn new(corridor: Corridor, constants: &SimConstants, following: CarFollowing) -> Self {
        let signals = corridor
            .signals()
            .iter()
            .map(|(id, s)| (id.clone(), SignalState { s: *s, red_until: None, passing: Vec::new() }))
            .collect();
        Traffic {
            corridor,
            vehicles: Vec::new(),
            signals,
            decel: constants.decel,
            following,
            departed: Vec::new(),
        }
    }

    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    /// Vehicles ordered front (largest `s`) to back.
    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    pub fn vehicle(&self, id: &str) -> Option<&VehicleState> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    /// Ids of vehicles that have left the far end of the corridor.
    pub fn departed(&self) -> &[String] {
        &self.departed
    }

    pub fn spawn(&mut self, vehicle: VehicleState) -> Result<(), MobilityError> {
        if self.vehicle(&vehicle.id).is_some() || self.departed.contains(&vehicle.id) {
            return Err(MobilityError::DuplicateVehicle(vehicle.id));
        }
        let len = self.corridor.length();
        if !(0.0..=len).contains(&vehicle.s) {
            return Err(MobilityError::OffsetOutside { what: "vehicle", id: vehicle.id, s: vehicle.s, len });
        }
        let at = self.vehicles.iter().position(|v| v.s < vehicle.s).unwrap_or(self.vehicles.len());
        self.vehicles.insert(at, vehicle);
        Ok(())
    }

    pub fn latch_brake(&mut self, id: &str, why: BrakeLatch) -> Result<(), MobilityError> {
        let v = self
            .vehicles
            .iter_mut()
            .find(|v| v.id == id)
            .ok_or_else(|| MobilityError::UnknownVehicle(id.to_string()))?;
        if v.latch.is_none() {
            v.latch = Some(why);
        }
        Ok(())
    }

    /// Turn a signal red at `now`. Vehicles already inside their braking
    /// distance of the stop line are let through.
    pub fn signal_red(&mut self, id: &str, now: Millis, duration: Millis, dt: f64) -> Result<(), MobilityError> {
        let decel = self.decel;
        let sig = self.signals.get_mut(id).ok_or_else(|| MobilityError::UnknownSignal(id.to_string()))?;
        sig.red_until = Some(now.saturating_add(duration));
        sig.passing = self
            .vehicles
            .iter()
            .filter(|v| {
                v.s < sig.s && sig.s - v.s - v.speed * dt < min_safety_distance(v.speed, decel).unwrap_or(0.0)
            })
            .map(|v| v.id.clone())
            .collect();
        Ok(())
    }

    pub fn is_red(&self, id: &str, now: Millis) -> bool {
        self.signals.get(id).and_then(|s| s.red_until).is_some_and(|until| now < until)
    }

    /// Advance every vehicle by `dt` seconds; `now` is the time at the end
    /// of the step (used to expire red phases).
    pub fn step(&mut self, dt: f64, now: Millis) {
        for sig in self.signals.values_mut() {
            if sig.red_until.is_some_and(|until| now > until) {
                sig.red_until = None;
                sig.passing.clear();
            }
        }
        let decel = self.decel;
        let gap0 = self.following.standstill_gap;
        let lead_positions: Vec<f64> = self.vehicles.iter().map(|v| v.s).collect();
        let red: Vec<(f64, &[String])> = self
            .signals
            .values()
            .filter(|s| s.red_until.is_some())
            .map(|s| (s.s, s.passing.as_slice()))
            .collect();

        let mut next = self.vehicles.clone();
        for (i, v) in next.iter_mut().enumerate() {
            let mut clearance = f64::INFINITY;
            if i > 0 {
                clearance = lead_positions[i - 1] - v.s - gap0;
            }
            for (sig_s, passing) in &red {
                if v.s < *sig_s && !passing.contains(&v.id) {
                    clearance = clearance.min(sig_s - v.s);
                }
            }
            let can_stop_after = |a: f64| {
                let (ds, v2) = integrate(v.speed, a, dt);
                clearance - ds >= min_safety_distance(v2, decel).unwrap_or(0.0)
            };
            let a = if v.latch.is_some() {
                -decel
            } else {
                let recover = (self.following.accel).min((v.desired_speed - v.speed) / dt).max(0.0);
                if recover > 0.0 && can_stop_after(recover) {
                    recover
                } else if can_stop_after(0.0) {
                    0.0
                } else {
                    -decel
                }
            };
            let a = if v.speed <= 0.0 && a < 0.0 { 0.0 } else { a };
            let (ds, v2) = integrate(v.speed, a, dt);
            v.s += ds;
            v.speed = v2;
            v.accel = a;
        }
        let len = self.corridor.length();
        for v in next.iter().filter(|v| v.s >= len) {
            self.departed.push(v.id.clone());
        }
        next.retain(|v| v.s < len);
        self.vehicles = next;
    }

    pub fn position_geo(&self, v: &VehicleState) -> GeoPoint {
        self.corridor.position_geo(v.s)
    }
}

/// Omniscient queue state of an arc-length zone: at least `min_vehicles`
/// slow vehicles, connected or not, with every consecutive gap among them
/// under the gap threshold.
pub fn ground_truth_queue(
    vehicles: &[VehicleState],
    zone: (f64, f64),
    constants: &SimConstants,
    min_vehicles: usize,
) -> bool {
    let mut slow: Vec<f64> = vehicles
        .iter()
        .filter(|v| v.s >= zone.0 && v.s <= zone.1 && v.speed < constants.queue_speed_threshold)
        .map(|v| v.s)
        .collect();
    if slow.len() < min_vehicles.max(1) {
        return false;
    }
    slow.sort_by(f64::total_cmp);
    slow.windows(2).all(|w| w[1] - w[0] < constants.queue_gap_threshold)
}
