//! Scenario files: a strict TOML schema resolved into SI model parameters.
//!
//! Unknown keys are rejected. Errors carry the 1-based line of the offending
//! table so the CLI can print `path:line: message`.

use std::fmt;
use std::ops::Range;

use serde::Deserialize;
use toml::Spanned;

use crate::archive::RetentionPolicy;
use crate::engine::Millis;
use crate::geo::GeoPoint;
use crate::handoff::BeaconConfig;
use crate::mobility::{CarFollowing, Corridor, Directive, VehicleState};
use crate::radio::{LatencyProfile, LinkKind, LinkModel, RssiParams, SpeedTier, TieredLatency};
use crate::safety::SimConstants;
use crate::units::{convert_speed, feet_to_meters};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn of(&self, span: Range<usize>) -> usize {
        self.0[..span.start.min(self.0.len())].matches('\n').count() + 1
    }

    fn err<T>(&self, span: Range<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError { line: Some(self.of(span)), message: message.into() })
    }
}

// ---- raw file schema ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    seed: u64,
    t_end_s: f64,
    #[serde(default = "default_region")]
    region: String,
    corridor: Spanned<RawCorridor>,
    #[serde(default)]
    signal: Vec<Spanned<RawSignal>>,
    #[serde(default)]
    rsu: Vec<Spanned<RawRsu>>,
    #[serde(default)]
    vehicle: Vec<Spanned<RawVehicle>>,
    #[serde(default)]
    directive: Vec<Spanned<RawDirective>>,
    #[serde(default)]
    constants: Option<Spanned<RawConstants>>,
    #[serde(default)]
    links: Option<RawLinks>,
    #[serde(default)]
    handoff: Option<Spanned<RawHandoff>>,
    #[serde(default)]
    archive: Option<Spanned<RawArchive>>,
    #[serde(default)]
    rssi: Option<RssiParams>,
}

fn default_region() -> String {
    "corridor".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorridor {
    origin: Option<GeoPoint>,
    length_m: Option<f64>,
    points: Option<Vec<GeoPoint>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSignal {
    id: String,
    s_m: f64,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Access {
    Dsrc,
    Wifi,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRsu {
    id: String,
    s_m: f64,
    #[serde(default)]
    obstruction: f64,
    #[serde(default = "default_access")]
    access: Access,
    #[serde(default = "yes")]
    queue_detection: bool,
}

fn default_access() -> Access {
    Access::Dsrc
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    id: String,
    s_m: Option<f64>,
    gap_ft: Option<f64>,
    gap_m: Option<f64>,
    speed_mph: f64,
    desired_speed_mph: Option<f64>,
    #[serde(default = "yes")]
    connected: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum RawDirective {
    HardBrake { vehicle: String, t_s: f64 },
    SignalRed { signal: String, t_s: f64, duration_s: f64 },
    Spawn { vehicle: String, t_s: f64, s_m: f64, speed_mph: f64, #[serde(default = "yes")] connected: bool },
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    bsm_interval_s: Option<f64>,
    queue_speed_threshold_mph: Option<f64>,
    queue_gap_threshold_ft: Option<f64>,
    decel_ftps2: Option<f64>,
    dsrc_range_m: Option<f64>,
    safety_latency_req_ms: Option<f64>,
    queue_min_vehicles: Option<usize>,
    accel_mps2: Option<f64>,
    standstill_gap_m: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLink {
    range_m: Option<f64>,
    p_near: Option<f64>,
    ramp_start_frac: Option<f64>,
    data: Option<LatencyProfile>,
    warning: Option<Vec<SpeedTier>>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawLinks {
    dsrc: Option<RawLink>,
    lte: Option<RawLink>,
    wifi_backhaul: Option<RawLink>,
    wifi: Option<RawLink>,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum WifiProfile {
    Udp,
    Tcp,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawHandoff {
    beacon_interval_ms: Option<Millis>,
    miss_threshold: Option<u32>,
    wifi_association_delay_s: Option<f64>,
    wifi_profile: Option<WifiProfile>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawArchive {
    fixed_retention_s: Option<f64>,
}

// ---- resolved model ----

#[derive(Debug, Clone, PartialEq)]
pub struct RsuSpec {
    pub id: String,
    pub s: f64,
    pub obstruction: f64,
    pub access: LinkKind,
    pub queue_detection: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Links {
    pub dsrc: LinkModel,
    pub lte: LinkModel,
    pub wifi_backhaul: LinkModel,
    pub wifi: LinkModel,
    pub dsrc_warning: TieredLatency,
    pub lte_warning: TieredLatency,
}

impl Links {
    pub fn model(&self, kind: LinkKind) -> &LinkModel {
        match kind {
            LinkKind::Dsrc => &self.dsrc,
            LinkKind::Lte => &self.lte,
            LinkKind::WifiBackhaul | LinkKind::Fiber => &self.wifi_backhaul,
            LinkKind::Wifi => &self.wifi,
        }
    }
}

fn tiers(pairs: &[(f64, Millis)]) -> Vec<SpeedTier> {
    pairs
        .iter()
        .map(|(mph, ms)| SpeedTier { speed_mph: *mph, latency: LatencyProfile::fixed(*ms) })
        .collect()
}

impl Default for Links {
    fn default() -> Self {
        Links {
            dsrc: LinkModel::dsrc(),
            lte: LinkModel::lte(),
            wifi_backhaul: LinkModel::wifi_backhaul(),
            wifi: LinkModel::wifi(),
            dsrc_warning: TieredLatency::new(tiers(&[(20.0, 88), (35.0, 102), (50.0, 125)])).expect("non-empty"),
            lte_warning: TieredLatency::new(tiers(&[(20.0, 2590), (35.0, 2810), (50.0, 3000)])).expect("non-empty"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub t_end: Millis,
    pub region: String,
    pub corridor: Corridor,
    pub rsus: Vec<RsuSpec>,
    pub vehicles: Vec<VehicleState>,
    pub directives: Vec<Directive>,
    pub constants: SimConstants,
    pub queue_min_vehicles: usize,
    pub following: CarFollowing,
    pub links: Links,
    pub beacons: BeaconConfig,
    pub fixed_retention: RetentionPolicy,
    pub rssi: RssiParams,
}

impl Scenario {
    pub fn tick_ms(&self) -> Millis {
        (self.constants.bsm_interval * 1000.0).round() as Millis
    }

    /// Access-link model of an RSU, obstruction applied.
    pub fn access_model(&self, rsu: &RsuSpec) -> LinkModel {
        self.links.model(rsu.access).with_obstruction(rsu.obstruction)
    }
}

fn secs_to_ms(s: f64) -> Option<Millis> {
    (s.is_finite() && s >= 0.0).then(|| (s * 1000.0).round() as Millis)
}

fn apply_link(base: &mut LinkModel, raw: &RawLink, allow_range: bool) -> Result<(), String> {
    if let Some(r) = raw.range_m {
        if !allow_range {
            return Err(format!("{} range is fixed by design", base.kind))
        }
        base.range = Some(r);
    }
    if let Some(p) = raw.p_near {
        base.p_near = p;
    }
    if let Some(f) = raw.ramp_start_frac {
        base.ramp_start_frac = f;
    }
    if let Some(d) = raw.data {
        base.latency = d;
    }
    base.validate().map_err(|e| e.to_string())
}

pub fn parse(text: &str) -> Result<Scenario, ConfigError> {
    let lines = Lines(text);
    let raw: RawScenario = toml::from_str(text).map_err(|e| ConfigError {
        line: e.span().map(|s| lines.of(s)),
        message: e.message().trim().to_string(),
    })?;

    let t_end = secs_to_ms(raw.t_end_s).ok_or_else(|| ConfigError {
        line: None,
        message: format!("t_end_s must be a non-negative number, got {}", raw.t_end_s),
    })?;

    // constants
    let mut constants = SimConstants::default();
    let mut following = CarFollowing::default();
    let mut queue_min_vehicles = 2;
    if let Some(c) = &raw.constants {
        let span = c.span();
        let c = c.get_ref();
        if let Some(v) = c.bsm_interval_s {
            constants.bsm_interval = v;
        }
        if let Some(v) = c.queue_speed_threshold_mph {
            constants.queue_speed_threshold = convert_speed(v);
        }
        if let Some(v) = c.queue_gap_threshold_ft {
            constants.queue_gap_threshold = feet_to_meters(v);
        }
        if let Some(v) = c.decel_ftps2 {
            constants.decel = feet_to_meters(v);
        }
        if let Some(v) = c.dsrc_range_m {
            constants.dsrc_range = v;
        }
        if let Some(v) = c.safety_latency_req_ms {
            constants.safety_latency_req = v;
        }
        if let Some(v) = c.queue_min_vehicles {
            if v < 2 {
                return lines.err(span, "queue_min_vehicles must be at least 2");
            }
            queue_min_vehicles = v;
        }
        if let Some(v) = c.accel_mps2 {
            if !(v > 0.0) {
                return lines.err(span, "accel_mps2 must be positive");
            }
            following.accel = v;
        }
        if let Some(v) = c.standstill_gap_m {
            if !(v >= 1.0) {
                return lines.err(span, "standstill_gap_m must be at least 1 m");
            }
            following.standstill_gap = v;
        }
        if let Err(e) = constants.validate() {
            return lines.err(span, e.to_string());
        }
        let tick = constants.bsm_interval * 1000.0;
        if (tick - tick.round()).abs() > 1e-9 || tick.round() < 1.0 || 1000 % (tick.round() as u64) != 0 {
            return lines.err(span, "bsm_interval_s must be a whole number of ms dividing 1 s");
        }
    }

    let cspan = raw.corridor.span();
    let c = raw.corridor.get_ref();
    let points = match (&c.points, c.origin, c.length_m) {
        (Some(p), None, None) => p.clone(),
        (None, Some(o), Some(len)) if len > 0.0 => vec![o, o.north_by(len)],
        _ => return lines.err(cspan, "corridor needs either `points` or `origin` + positive `length_m`"),
    };
    for p in &points {
        if let Err(e) = GeoPoint::new(p.lat, p.lon) {
            return lines.err(cspan, e.to_string());
        }
    }
    let signals: Vec<(String, f64)> = raw.signal.iter().map(|s| (s.get_ref().id.clone(), s.get_ref().s_m)).collect();
    let rsu_offsets: Vec<(String, f64)> = raw.rsu.iter().map(|r| (r.get_ref().id.clone(), r.get_ref().s_m)).collect();
    for list in [&raw.signal.iter().map(|s| (s.span(), s.get_ref().id.as_str())).collect::<Vec<_>>(),
                 &raw.rsu.iter().map(|s| (s.span(), s.get_ref().id.as_str())).collect::<Vec<_>>()] {
        for (i, (span, id)) in list.iter().enumerate() {
            if list[..i].iter().any(|(_, other)| other == id) {
                return lines.err(span.clone(), format!("duplicate id `{id}`"));
            }
        }
    }
    let corridor = Corridor::new(points, signals, rsu_offsets).map_err(|e| ConfigError {
        line: Some(lines.of(cspan.clone())),
        message: e.to_string(),
    })?;

    // links
    let mut links = Links::default();
    links.dsrc.range = Some(constants.dsrc_range);
    if let Some(l) = &raw.links {
        // nested tables do not keep spans; anchor on the first [links.*] header
        let at = text.find("[links").unwrap_or(0);
        let span = at..at;
        let apply = |base: &mut LinkModel, raw: &Option<RawLink>, allow_range: bool, warning: Option<&mut TieredLatency>| {
            let Some(raw) = raw else { return Ok(()) };
            apply_link(base, raw, allow_range)?;
            match (warning, &raw.warning) {
                (Some(w), Some(t)) => *w = TieredLatency::new(t.clone()).map_err(|e| e.to_string())?,
                (None, Some(_)) => return Err(format!("{} has no warning profile", base.kind)),
                _ => {}
            }
            Ok::<(), String>(())
        };
        let result = apply(&mut links.dsrc, &l.dsrc, false, Some(&mut links.dsrc_warning))
            .and_then(|_| apply(&mut links.lte, &l.lte, false, Some(&mut links.lte_warning)))
            .and_then(|_| apply(&mut links.wifi_backhaul, &l.wifi_backhaul, false, None))
            .and_then(|_| apply(&mut links.wifi, &l.wifi, true, None));
        if let Err(e) = result {
            return lines.err(span, e);
        }
    }

    let mut rsus = Vec::new();
    for r in &raw.rsu {
        let span = r.span();
        let r = r.get_ref();
        if !(0.0..=1.0).contains(&r.obstruction) {
            return lines.err(span, format!("rsu `{}` obstruction must lie in [0, 1]", r.id));
        }
        rsus.push(RsuSpec {
            id: r.id.clone(),
            s: r.s_m,
            obstruction: r.obstruction,
            access: match r.access {
                Access::Dsrc => LinkKind::Dsrc,
                Access::Wifi => LinkKind::Wifi,
            },
            queue_detection: r.queue_detection,
        });
    }

    let mut vehicles: Vec<VehicleState> = Vec::new();
    let mut prev_s: Option<f64> = None;
    for v in &raw.vehicle {
        let span = v.span();
        let v = v.get_ref();
        if vehicles.iter().any(|o| o.id == v.id) {
            return lines.err(span, format!("duplicate vehicle `{}`", v.id));
        }
        let s = match (v.s_m, v.gap_ft, v.gap_m, prev_s) {
            (Some(s), None, None, _) => s,
            (None, Some(g), None, Some(p)) => p - feet_to_meters(g),
            (None, None, Some(g), Some(p)) => p - g,
            (None, _, _, None) => return lines.err(span, format!("vehicle `{}`: the first vehicle needs `s_m`", v.id)),
            _ => return lines.err(span, format!("vehicle `{}`: give exactly one of `s_m`, `gap_ft`, `gap_m`", v.id)),
        };
        if !(0.0..=corridor.length()).contains(&s) {
            return lines.err(span, format!("vehicle `{}` at {s:.1} m is off the {:.1} m corridor", v.id, corridor.length()));
        }
        if !(v.speed_mph >= 0.0) || v.desired_speed_mph.is_some_and(|d| !(d >= 0.0)) {
            return lines.err(span, format!("vehicle `{}`: speeds must be non-negative", v.id));
        }
        let mut state = VehicleState::new(v.id.clone(), s, convert_speed(v.speed_mph), v.connected);
        state.desired_speed = convert_speed(v.desired_speed_mph.unwrap_or(v.speed_mph));
        vehicles.push(state);
        prev_s = Some(s);
    }

    let mut directives = Vec::new();
    for d in &raw.directive {
        let span = d.span();
        let bad_time = || format!("directive time must be a non-negative number");
        let directive = match d.get_ref() {
            RawDirective::HardBrake { vehicle, t_s } => {
                let known = vehicles.iter().any(|v| &v.id == vehicle)
                    || raw.directive.iter().any(|o| matches!(o.get_ref(), RawDirective::Spawn { vehicle: s, .. } if s == vehicle));
                if !known {
                    return lines.err(span, format!("hard_brake names unknown vehicle `{vehicle}`"));
                }
                Directive::HardBrake { vehicle: vehicle.clone(), t: secs_to_ms(*t_s).ok_or_else(bad_time).or_else(|m| lines.err(span.clone(), m))? }
            }
            RawDirective::SignalRed { signal, t_s, duration_s } => {
                if !corridor.signals().iter().any(|(id, _)| id == signal) {
                    return lines.err(span, format!("signal_red names unknown signal `{signal}`"));
                }
                Directive::SignalRed {
                    signal: signal.clone(),
                    t: secs_to_ms(*t_s).ok_or_else(bad_time).or_else(|m| lines.err(span.clone(), m))?,
                    duration: secs_to_ms(*duration_s).ok_or_else(bad_time).or_else(|m| lines.err(span.clone(), m))?,
                }
            }
            RawDirective::Spawn { vehicle, t_s, s_m, speed_mph, connected } => {
                if !(0.0..=corridor.length()).contains(s_m) || !(*speed_mph >= 0.0) {
                    return lines.err(span, format!("spawn of `{vehicle}` has an invalid position or speed"));
                }
                Directive::Spawn {
                    vehicle: vehicle.clone(),
                    t: secs_to_ms(*t_s).ok_or_else(bad_time).or_else(|m| lines.err(span.clone(), m))?,
                    s: *s_m,
                    speed: convert_speed(*speed_mph),
                    connected: *connected,
                }
            }
        };
        directives.push(directive);
    }

    let mut beacons = BeaconConfig::default();
    if let Some(h) = &raw.handoff {
        let span = h.span();
        let h = h.get_ref();
        if let Some(v) = h.beacon_interval_ms {
            beacons.interval = v;
        }
        if let Some(v) = h.miss_threshold {
            beacons.miss_threshold = v;
        }
        match (h.wifi_association_delay_s, h.wifi_profile) {
            (Some(_), Some(_)) => return lines.err(span, "give either wifi_association_delay_s or wifi_profile, not both"),
            (Some(s), None) => {
                beacons.wifi_association_delay =
                    secs_to_ms(s).ok_or(()).or_else(|_| lines.err(span.clone(), "wifi_association_delay_s must be non-negative"))?
            }
            (None, Some(WifiProfile::Udp)) => beacons.wifi_association_delay = 25_000,
            (None, Some(WifiProfile::Tcp)) => beacons.wifi_association_delay = 28_000,
            (None, None) => {}
        }
        if let Err(e) = beacons.validate() {
            return lines.err(span, e.to_string());
        }
    }
    let tick = (constants.bsm_interval * 1000.0).round() as Millis;
    if beacons.interval % tick != 0 {
        let line = raw.handoff.as_ref().map(|h| lines.of(h.span()));
        return Err(ConfigError { line, message: format!("beacon_interval_ms must be a multiple of the {tick} ms tick") });
    }

    let mut fixed_retention = RetentionPolicy::max_age(60_000).expect("positive");
    if let Some(a) = &raw.archive {
        if let Some(s) = a.get_ref().fixed_retention_s {
            fixed_retention = secs_to_ms(s)
                .and_then(|ms| RetentionPolicy::max_age(ms).ok())
                .ok_or(())
                .or_else(|_| lines.err(a.span(), "fixed_retention_s must be positive"))?;
        }
    }

    Ok(Scenario {
        name: raw.name,
        seed: raw.seed,
        t_end,
        region: raw.region,
        corridor,
        rsus,
        vehicles,
        directives,
        constants,
        queue_min_vehicles,
        following,
        links,
        beacons,
        fixed_retention,
        rssi: raw.rssi.unwrap_or_default(),
    })
}

macro_rules! bundled_scenarios {
    ($($name:literal),* $(,)?) => {
        /// Scenario files shipped with the crate, by name.
        pub const BUNDLED: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../scenarios/", $name, ".toml")))),*
        ];
    };
}

bundled_scenarios!(
    "collision_avoidance_20mph",
    "collision_avoidance_35mph",
    "collision_avoidance_50mph",
    "wifi_lte_handoff",
    "wifi_lte_handoff_tcp",
    "queue_full_penetration",
    "queue_mixed_penetration",
    "corridor_coverage_sweep",
    "handoff_single_pass",
);

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
t_end_s = 10

[corridor]
origin = { lat = 34.6, lon = -82.8 }
length_m = 1000

[[rsu]]
id = "r1"
s_m = 500

[[vehicle]]
id = "a"
s_m = 400
speed_mph = 20

[[vehicle]]
id = "b"
gap_ft = 100
speed_mph = 20
connected = false
"#;

    #[test]
    fn minimal_parses_with_defaults() {
        let s = parse(MINIMAL).unwrap();
        assert_eq!(s.t_end, 10_000);
        assert_eq!(s.tick_ms(), 100);
        assert_eq!(s.vehicles.len(), 2);
        assert!((s.vehicles[0].s - s.vehicles[1].s - 30.48).abs() < 1e-9);
        assert!(!s.vehicles[1].connected);
        assert_eq!(s.links.dsrc.range, Some(300.0));
        assert_eq!(s.beacons, BeaconConfig::default());
        assert_eq!(s.rsus[0].access, LinkKind::Dsrc);
    }

    #[test]
    fn unknown_keys_are_line_anchored() {
        let text = MINIMAL.replace("speed_mph = 20\nconnected", "speed_mph = 20\ncolour = \"red\"\nconnected");
        let err = parse(&text).unwrap_err();
        assert!(err.message.contains("colour"), "{err}");
        assert_eq!(err.line, Some(22));
    }

    #[test]
    fn semantic_errors_point_at_their_table() {
        let text = MINIMAL.replace("s_m = 400", "s_m = 4000");
        let err = parse(&text).unwrap_err();
        assert_eq!(err.line, Some(13), "{err}");
        let text = format!("{MINIMAL}\n[[directive]]\nkind = \"hard_brake\"\nvehicle = \"zz\"\nt_s = 1\n");
        let err = parse(&text).unwrap_err();
        assert!(err.message.contains("zz"));
        assert_eq!(err.line, Some(24));
    }

    #[test]
    fn wifi_profiles() {
        let udp = parse(&format!("{MINIMAL}\n[handoff]\nwifi_profile = \"udp\"\n")).unwrap();
        assert_eq!(udp.beacons.wifi_association_delay, 25_000);
        let tcp = parse(&format!("{MINIMAL}\n[handoff]\nwifi_profile = \"tcp\"\n")).unwrap();
        assert_eq!(tcp.beacons.wifi_association_delay, 28_000);
        assert!(parse(&format!("{MINIMAL}\n[handoff]\nwifi_profile = \"tcp\"\nwifi_association_delay_s = 3\n")).is_err());
    }

    #[test]
    fn bad_link_overrides() {
        assert!(parse(&format!("{MINIMAL}\n[links.dsrc]\np_near = 1.5\n")).is_err());
        assert!(parse(&format!("{MINIMAL}\n[links.lte]\nrange_m = 5\n")).is_err());
        assert!(parse(&format!("{MINIMAL}\n[links.wifi_backhaul]\nwarning = [{{ speed_mph = 1, mean_ms = 2 }}]\n")).is_err());
        let ok = parse(&format!("{MINIMAL}\n[links.dsrc]\ndata = {{ mean_ms = 4, jitter_ms = 2 }}\n")).unwrap();
        assert_eq!(ok.links.dsrc.latency, LatencyProfile { mean_ms: 4, jitter_ms: 2 });
    }

    #[test]
    fn every_bundled_scenario_parses() {
        for (name, text) in BUNDLED {
            let s = parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&s.name, name);
        }
    }
}
