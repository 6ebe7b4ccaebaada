//! One scenario run: mobility ticks drive BSMs and beacons, radio deliveries
//! are engine events, and each edge node owns its broker, archive and apps.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::apps::{on_warning, AvoidanceDecision, QueueDecision, QueueDetector, QueueParams, Receiver, WarningLog, WarningMessage};
use crate::archive::{Archive, Record, RetentionPolicy};
use crate::broker::{Broker, BrokerMessage, TapId, Topic};
use crate::bsm::{Bsm, TraceRecord};
use crate::engine::{EngineError, Event, EventKind, Millis, Scheduler, SimSummary};
use crate::geo::{distance, GeoPoint};
use crate::handoff::{Active, HandoffEvent, HandoffState};
use crate::mobility::{ground_truth_queue, BrakeLatch, Directive, ScenarioScript, Traffic, VehicleState};
use crate::radio::{rssi_dbm, Delivery, LatencyProfile, LinkKind, LinkModel, Packet};
use crate::rng::RngStream;
use crate::scenario::{RsuSpec, Scenario};

pub const SYSTEM_EDGE: &str = "system";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario setup failed: {0}")]
    Setup(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficClass {
    Beacon,
    Bsm,
    Warning,
    BsmForward,
    QueueStatus,
}

impl TrafficClass {
    pub fn as_str(self) -> &'static str {
        match self {
            TrafficClass::Beacon => "beacon",
            TrafficClass::Bsm => "bsm",
            TrafficClass::Warning => "warning",
            TrafficClass::BsmForward => "bsm_forward",
            TrafficClass::QueueStatus => "queue_status",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Delivered,
    Lost,
    /// sent on an access link whose association is still being set up
    NotAssociated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketRecord {
    pub class: TrafficClass,
    pub link: LinkKind,
    pub tx: String,
    pub rx: String,
    pub t_send: Millis,
    pub t_recv: Option<Millis>,
    pub outcome: Outcome,
    /// tx-rx distance, meters (0 for wired and cellular hops)
    pub distance: f64,
    pub in_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HandoffRecord {
    pub vehicle: String,
    #[serde(flatten)]
    pub event: HandoffEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueRecord {
    pub decision: QueueDecision,
    pub truth: bool,
}

#[derive(Debug, Clone)]
enum Payload {
    Beacon { rsu: usize },
    Bsm { bsm: Bsm, rsu: Option<usize> },
    Warning(WarningMessage),
    WarningUplink(WarningMessage),
    Forward(BrokerMessage),
}

#[derive(Debug, Clone)]
pub struct InFlight {
    packet: Packet<Payload>,
    class: TrafficClass,
}

#[derive(Debug, Clone)]
pub enum SimEvent {
    Tick,
    Beacon { rsu: usize, id: String },
    Deliver(Box<InFlight>),
    DetectorTick { rsu: usize, id: String },
    Prune,
}

impl EventKind for SimEvent {
    fn kind(&self) -> &'static str {
        match self {
            SimEvent::Tick => "mobility-tick",
            SimEvent::Beacon { .. } => "beacon",
            SimEvent::Deliver(_) => "radio-delivery",
            SimEvent::DetectorTick { .. } => "detector-tick",
            SimEvent::Prune => "app-timer",
        }
    }

    fn subject(&self) -> String {
        match self {
            SimEvent::Tick => "corridor".to_string(),
            SimEvent::Beacon { id, .. } | SimEvent::DetectorTick { id, .. } => id.clone(),
            SimEvent::Deliver(f) => format!("{}:{}>{}", f.class.as_str(), f.packet.tx, f.packet.rx),
            SimEvent::Prune => "archive-prune".to_string(),
        }
    }
}

struct FixedEdge {
    spec: RsuSpec,
    pos: GeoPoint,
    model: LinkModel,
    zone: (f64, f64),
    broker: Broker,
    archive: Archive,
    tap: TapId,
    detector: Option<QueueDetector>,
    received: Vec<(Millis, Bsm)>,
}

struct Streams(BTreeMap<LinkKind, (RngStream, RngStream)>);

impl Streams {
    fn new(seed: u64) -> Self {
        let mut m = BTreeMap::new();
        for k in [LinkKind::Dsrc, LinkKind::Lte, LinkKind::WifiBackhaul, LinkKind::Fiber, LinkKind::Wifi] {
            let name = k.as_str().to_ascii_lowercase();
            m.insert(
                k,
                (RngStream::new(seed, format!("radio.{name}.loss")), RngStream::new(seed, format!("radio.{name}.latency"))),
            );
        }
        Streams(m)
    }
}

/// Everything a finished run leaves behind.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub summary: SimSummary,
    pub packets: Vec<PacketRecord>,
    pub handoffs: Vec<HandoffRecord>,
    pub avoidance: Vec<AvoidanceDecision>,
    pub queue: Vec<QueueRecord>,
    /// Fixed Edge archives, in RSU order
    pub fixed_archives: Vec<Archive>,
    pub system_archive: Archive,
    /// per-RSU received BSMs, each labelled with the live truth of the
    /// evaluation second it was received in
    pub traces: Vec<(String, Vec<TraceRecord>)>,
    pub event_trace: Option<Vec<String>>,
}

impl RunOutput {
    pub fn queue_for<'a>(&'a self, rsu: &'a str) -> impl Iterator<Item = &'a QueueRecord> + 'a {
        self.queue.iter().filter(move |q| q.decision.rsu == rsu)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub keep_event_trace: bool,
}

struct World {
    sc: Scenario,
    tick: Millis,
    traffic: Traffic,
    script: ScenarioScript,
    handoff: BTreeMap<String, HandoffState>,
    fixed: Vec<FixedEdge>,
    system: Broker,
    system_archive: Archive,
    system_tap: TapId,
    warning_topic: Topic,
    streams: Streams,
    warning_log: WarningLog,
    packets: Vec<PacketRecord>,
    handoffs: Vec<HandoffRecord>,
    avoidance: Vec<AvoidanceDecision>,
    queue: Vec<QueueRecord>,
}

fn topic(s: String) -> Result<Topic, String> {
    Topic::new(s).map_err(|e| e.to_string())
}

impl World {
    fn new(sc: &Scenario) -> Result<World, String> {
        let sc = sc.clone();
        let mut traffic = Traffic::new(sc.corridor.clone(), &sc.constants, sc.following);
        let params = QueueParams::from_constants(&sc.constants);
        let mut fixed = Vec::new();
        for spec in &sc.rsus {
            let model = sc.access_model(spec);
            let reach = model.effective_range().unwrap_or(0.0);
            let mut broker = Broker::new(spec.id.clone());
            let tap = broker.add_tap();
            broker.subscribe("uplink", "bsm/raw/#").map_err(|e| e.to_string())?;
            let detector = if spec.queue_detection {
                broker.subscribe("detector", "bsm/raw/+").map_err(|e| e.to_string())?;
                Some(QueueDetector::new(spec.id.clone(), params))
            } else {
                None
            };
            fixed.push(FixedEdge {
                pos: sc.corridor.position_geo(spec.s),
                zone: (spec.s - reach, spec.s + reach),
                archive: Archive::new(spec.id.clone(), sc.fixed_retention),
                spec: spec.clone(),
                model,
                broker,
                tap,
                detector,
                received: Vec::new(),
            });
        }
        let mut system = Broker::new(SYSTEM_EDGE);
        let system_tap = system.add_tap();
        let warning_topic = topic(format!("warning/region/{}", sc.region))?;
        let mut handoff = BTreeMap::new();
        for v in &sc.vehicles {
            traffic.spawn(v.clone()).map_err(|e| e.to_string())?;
            if v.connected {
                handoff.insert(v.id.clone(), HandoffState::new());
                system.subscribe(&v.id, warning_topic.as_str()).map_err(|e| e.to_string())?;
            }
        }
        Ok(World {
            tick: sc.tick_ms(),
            script: ScenarioScript::new(sc.directives.clone()),
            streams: Streams::new(sc.seed),
            system_archive: Archive::new(SYSTEM_EDGE, RetentionPolicy::unbounded()),
            sc,
            traffic,
            handoff,
            fixed,
            system,
            system_tap,
            warning_topic,
            warning_log: WarningLog::default(),
            packets: Vec::new(),
            handoffs: Vec::new(),
            avoidance: Vec::new(),
            queue: Vec::new(),
        })
    }

    fn handle(&mut self, sched: &mut Scheduler<SimEvent>, ev: Event<SimEvent>) -> Result<(), String> {
        let now = ev.fire_at;
        match ev.kind {
            SimEvent::Tick => self.on_tick(sched, now),
            SimEvent::Beacon { rsu, .. } => {
                self.send_beacons(sched, now, rsu);
                Ok(())
            }
            SimEvent::Deliver(f) => self.on_delivery(sched, now, *f),
            SimEvent::DetectorTick { rsu, .. } => self.on_detector(sched, now, rsu),
            SimEvent::Prune => {
                for fe in &mut self.fixed {
                    fe.archive.prune(now);
                }
                if let Some(every) = self.sc.fixed_retention.prune_interval() {
                    sched.schedule_in(every, SimEvent::Prune);
                }
                Ok(())
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn transmit(
        &mut self,
        sched: &mut Scheduler<SimEvent>,
        now: Millis,
        class: TrafficClass,
        model: &LinkModel,
        profile: LatencyProfile,
        tx: &str,
        rx: &str,
        d: f64,
        payload: Payload,
    ) {
        let (loss, lat) = self.streams.0.get_mut(&model.kind).expect("one pair per link kind");
        let outcome = model.sample_delivery(d, &profile, loss, lat);
        let t_recv = match outcome {
            Delivery::Delivered { latency } => {
                let t_recv = now + latency;
                let packet = Packet { payload, tx: tx.to_string(), rx: rx.to_string(), link: model.kind, t_send: now, t_recv };
                sched.schedule_in(latency, SimEvent::Deliver(Box::new(InFlight { packet, class })));
                Some(t_recv)
            }
            Delivery::Lost => None,
        };
        self.packets.push(PacketRecord {
            class,
            link: model.kind,
            tx: tx.to_string(),
            rx: rx.to_string(),
            t_send: now,
            t_recv,
            outcome: if t_recv.is_some() { Outcome::Delivered } else { Outcome::Lost },
            distance: d,
            in_range: model.in_range_at(d),
        });
    }

    fn connected_ids(&self) -> Vec<String> {
        self.traffic.vehicles().iter().filter(|v| v.connected).map(|v| v.id.clone()).collect()
    }

    fn on_tick(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis) -> Result<(), String> {
        if now > 0 {
            self.traffic.step(self.tick as f64 / 1000.0, now);
        }
        for d in self.script.due(now) {
            self.apply(sched, now, d)?;
        }
        let ids = self.connected_ids();
        for id in &ids {
            let hs = self.handoff.get_mut(id).expect("connected vehicles have handoff state");
            if let Some(event) = hs.on_tick(now, &self.sc.beacons) {
                self.handoffs.push(HandoffRecord { vehicle: id.clone(), event });
            }
        }
        for id in &ids {
            self.send_bsm(sched, now, id)?;
        }
        if now % self.sc.beacons.interval == 0 {
            for (i, fe) in self.fixed.iter().enumerate() {
                sched.schedule(now, SimEvent::Beacon { rsu: i, id: fe.spec.id.clone() }).map_err(|e| e.to_string())?;
            }
        }
        if now > 0 && now % 1000 == 0 {
            for (i, fe) in self.fixed.iter().enumerate().filter(|(_, fe)| fe.detector.is_some()) {
                sched.schedule(now, SimEvent::DetectorTick { rsu: i, id: fe.spec.id.clone() }).map_err(|e| e.to_string())?;
            }
        }
        sched.schedule_in(self.tick, SimEvent::Tick);
        Ok(())
    }

    fn apply(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis, d: Directive) -> Result<(), String> {
        match d {
            Directive::HardBrake { vehicle, .. } => {
                self.traffic.latch_brake(&vehicle, BrakeLatch::HardBrake).map_err(|e| e.to_string())?;
                let v = self.traffic.vehicle(&vehicle).expect("just latched").clone();
                if v.connected {
                    self.on_hard_brake(sched, now, &v);
                }
            }
            Directive::SignalRed { signal, duration, .. } => {
                let dt = self.tick as f64 / 1000.0;
                self.traffic.signal_red(&signal, now, duration, dt).map_err(|e| e.to_string())?;
            }
            Directive::Spawn { vehicle, s, speed, connected, .. } => {
                self.traffic.spawn(VehicleState::new(vehicle.clone(), s, speed, connected)).map_err(|e| e.to_string())?;
                if connected {
                    self.handoff.insert(vehicle.clone(), HandoffState::new());
                    self.system.subscribe(&vehicle, self.warning_topic.as_str()).map_err(|e| e.to_string())?;
                }
            }
        }
        Ok(())
    }

    fn on_hard_brake(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis, v: &VehicleState) {
        let pos = self.traffic.position_geo(v);
        let w = WarningMessage::hard_brake(&v.id, now, pos, v.speed);
        let dsrc = self.sc.links.dsrc.clone();
        let dsrc_profile = self.sc.links.dsrc_warning.lookup(v.speed);
        let peers: Vec<(String, GeoPoint)> = self
            .traffic
            .vehicles()
            .iter()
            .filter(|o| o.connected && o.id != v.id)
            .map(|o| (o.id.clone(), self.traffic.position_geo(o)))
            .collect();
        for (id, at) in peers {
            let d = distance(pos, at);
            if dsrc.in_range_at(d) {
                self.transmit(sched, now, TrafficClass::Warning, &dsrc, dsrc_profile, &v.id, &id, d, Payload::Warning(w.clone()));
            }
        }
        let lte = self.sc.links.lte.clone();
        let lte_profile = self.sc.links.lte_warning.lookup(v.speed);
        self.transmit(sched, now, TrafficClass::Warning, &lte, lte_profile, &v.id, SYSTEM_EDGE, 0.0, Payload::WarningUplink(w));
    }

    fn send_bsm(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis, id: &str) -> Result<(), String> {
        let v = self.traffic.vehicle(id).ok_or_else(|| format!("vehicle `{id}` vanished"))?;
        let pos = self.traffic.position_geo(v);
        let bsm = Bsm {
            t: now,
            vehicle_id: id.to_string(),
            pos,
            speed: v.speed,
            heading: Some(self.traffic.corridor().heading_at(v.s)),
        };
        let active = self.handoff[id].active().clone();
        match active {
            Active::Lte => {
                let lte = self.sc.links.lte.clone();
                self.transmit(sched, now, TrafficClass::Bsm, &lte, lte.latency, id, SYSTEM_EDGE, 0.0, Payload::Bsm { bsm, rsu: None });
            }
            Active::Access { rsu, usable_from, .. } => {
                let i = self.fixed.iter().position(|f| f.spec.id == rsu).ok_or_else(|| format!("unknown rsu `{rsu}`"))?;
                let model = self.fixed[i].model.clone();
                let d = distance(pos, self.fixed[i].pos);
                if now < usable_from {
                    self.packets.push(PacketRecord {
                        class: TrafficClass::Bsm,
                        link: model.kind,
                        tx: id.to_string(),
                        rx: rsu,
                        t_send: now,
                        t_recv: None,
                        outcome: Outcome::NotAssociated,
                        distance: d,
                        in_range: model.in_range_at(d),
                    });
                } else {
                    self.transmit(sched, now, TrafficClass::Bsm, &model, model.latency, id, &rsu, d, Payload::Bsm { bsm, rsu: Some(i) });
                }
            }
        }
        Ok(())
    }

    fn send_beacons(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis, rsu: usize) {
        let (id, pos, model) = {
            let fe = &self.fixed[rsu];
            (fe.spec.id.clone(), fe.pos, fe.model.clone())
        };
        let targets: Vec<(String, f64)> = self
            .traffic
            .vehicles()
            .iter()
            .filter(|v| v.connected)
            .map(|v| (v.id.clone(), distance(self.traffic.position_geo(v), pos)))
            .filter(|(_, d)| model.in_range_at(*d))
            .collect();
        for (vid, d) in targets {
            self.transmit(sched, now, TrafficClass::Beacon, &model, model.latency, &id, &vid, d, Payload::Beacon { rsu });
        }
    }

    fn system_publish(&mut self, msg: BrokerMessage) -> Vec<(String, BrokerMessage)> {
        self.system.publish(msg);
        for m in self.system.drain_tap(self.system_tap) {
            self.system_archive.append(Record { topic: m.topic, t: m.t_pub, payload: m.payload, origin: m.publisher });
        }
        self.system.drain_all()
    }

    fn on_delivery(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis, f: InFlight) -> Result<(), String> {
        let Packet { payload, rx, .. } = f.packet;
        match payload {
            Payload::Beacon { rsu } => {
                let (id, link) = (self.fixed[rsu].spec.id.clone(), self.fixed[rsu].spec.access);
                if self.traffic.vehicle(&rx).is_some() {
                    if let Some(hs) = self.handoff.get_mut(&rx) {
                        if let Some(event) = hs.on_beacon(&id, link, now, &self.sc.beacons) {
                            self.handoffs.push(HandoffRecord { vehicle: rx, event });
                        }
                    }
                }
            }
            Payload::Bsm { bsm, rsu: Some(i) } => self.fixed_edge_bsm(sched, now, i, bsm)?,
            Payload::Bsm { bsm, rsu: None } => {
                let msg = BrokerMessage {
                    topic: topic(format!("bsm/raw/{}", bsm.vehicle_id))?,
                    payload: serde_json::to_value(&bsm).map_err(|e| e.to_string())?,
                    publisher: bsm.vehicle_id.clone(),
                    t_pub: now,
                };
                self.system_publish(msg);
            }
            Payload::Warning(w) => self.receive_warning(&rx, &w, now, LinkKind::Dsrc),
            Payload::WarningUplink(w) => {
                let msg = BrokerMessage {
                    topic: self.warning_topic.clone(),
                    payload: w.to_document(),
                    publisher: w.source_vehicle.clone(),
                    t_pub: now,
                };
                for (client, m) in self.system_publish(msg) {
                    if let Some(w) = WarningMessage::from_document(&m.payload) {
                        if client != w.source_vehicle {
                            self.receive_warning(&client, &w, now, LinkKind::Lte);
                        }
                    }
                }
            }
            Payload::Forward(mut msg) => {
                msg.t_pub = now;
                self.system_publish(msg);
            }
        }
        Ok(())
    }

    fn receive_warning(&mut self, rx: &str, w: &WarningMessage, now: Millis, link: LinkKind) {
        let Some(v) = self.traffic.vehicle(rx) else { return };
        let receiver = Receiver { id: rx, pos: self.traffic.position_geo(v), speed: v.speed };
        if let Some(d) = on_warning(receiver, w, now, link, &self.sc.constants, &mut self.warning_log) {
            self.avoidance.push(d);
            // both verdicts start braking on the next tick
            let _ = self.traffic.latch_brake(rx, BrakeLatch::Warning);
        }
    }

    fn fixed_edge_bsm(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis, i: usize, bsm: Bsm) -> Result<(), String> {
        let msg = BrokerMessage {
            topic: topic(format!("bsm/raw/{}", bsm.vehicle_id))?,
            payload: serde_json::to_value(&bsm).map_err(|e| e.to_string())?,
            publisher: bsm.vehicle_id.clone(),
            t_pub: now,
        };
        let fe = &mut self.fixed[i];
        fe.broker.publish(msg);
        for m in fe.broker.drain_tap(fe.tap) {
            fe.archive.append(Record { topic: m.topic, t: m.t_pub, payload: m.payload, origin: m.publisher });
        }
        let mut forwards = Vec::new();
        for (client, m) in fe.broker.drain_all() {
            let b: Bsm = serde_json::from_value(m.payload).map_err(|e| e.to_string())?;
            match client.as_str() {
                "detector" => {
                    if let Some(det) = fe.detector.as_mut() {
                        det.push(now, b.clone());
                    }
                    fe.received.push((now, b));
                }
                "uplink" => {
                    let d = distance(b.pos, fe.pos);
                    let mut payload = serde_json::to_value(&b).map_err(|e| e.to_string())?;
                    if let Value::Object(map) = &mut payload {
                        map.insert("rsu".into(), json!(fe.spec.id));
                        map.insert("rx_t".into(), json!(now));
                        map.insert("rssi_dbm".into(), json!(rssi_dbm(d, &self.sc.rssi)));
                    }
                    forwards.push(BrokerMessage {
                        topic: topic(format!("bsm/processed/{}", fe.spec.id))?,
                        payload,
                        publisher: fe.spec.id.clone(),
                        t_pub: now,
                    });
                }
                other => return Err(format!("unexpected client `{other}` at {}", fe.spec.id)),
            }
        }
        let id = self.fixed[i].spec.id.clone();
        let backhaul = self.sc.links.wifi_backhaul.clone();
        for msg in forwards {
            self.transmit(sched, now, TrafficClass::BsmForward, &backhaul, backhaul.latency, &id, SYSTEM_EDGE, 0.0, Payload::Forward(msg));
        }
        Ok(())
    }

    fn on_detector(&mut self, sched: &mut Scheduler<SimEvent>, now: Millis, i: usize) -> Result<(), String> {
        let fe = &mut self.fixed[i];
        let Some(det) = fe.detector.as_mut() else { return Ok(()) };
        let decision = det.evaluate(now);
        let truth = ground_truth_queue(self.traffic.vehicles(), fe.zone, &self.sc.constants, self.sc.queue_min_vehicles);
        let msg = BrokerMessage {
            topic: topic(format!("queue/status/{}", fe.spec.id))?,
            payload: serde_json::to_value(&decision).map_err(|e| e.to_string())?,
            publisher: fe.spec.id.clone(),
            t_pub: now,
        };
        fe.broker.publish(msg.clone());
        for m in fe.broker.drain_tap(fe.tap) {
            fe.archive.append(Record { topic: m.topic, t: m.t_pub, payload: m.payload, origin: m.publisher });
        }
        let id = fe.spec.id.clone();
        self.queue.push(QueueRecord { decision, truth });
        let backhaul = self.sc.links.wifi_backhaul.clone();
        self.transmit(sched, now, TrafficClass::QueueStatus, &backhaul, backhaul.latency, &id, SYSTEM_EDGE, 0.0, Payload::Forward(msg));
        Ok(())
    }
}

/// Run a validated scenario to its end time.
pub fn run(sc: &Scenario, opts: RunOptions) -> Result<RunOutput, SimError> {
    let mut world = World::new(sc).map_err(SimError::Setup)?;
    let mut sched = Scheduler::new();
    if opts.keep_event_trace {
        sched = sched.with_trace();
    }
    sched.schedule(0, SimEvent::Tick)?;
    if let Some(every) = sc.fixed_retention.prune_interval() {
        sched.schedule(every, SimEvent::Prune)?;
    }
    let summary = sched.run_until(sc.t_end, |s, ev| world.handle(s, ev))?;
    let event_trace = sched.trace().map(|t| t.to_vec());

    let mut traces = Vec::new();
    for fe in world.fixed.iter().filter(|f| f.detector.is_some()) {
        let truth: BTreeMap<Millis, bool> = world
            .queue
            .iter()
            .filter(|q| q.decision.rsu == fe.spec.id)
            .map(|q| (q.decision.t, q.truth))
            .collect();
        let records = fe
            .received
            .iter()
            .map(|(rx, b)| {
                let second = rx.div_ceil(1000) * 1000;
                TraceRecord::from_bsm(b, *rx, truth.get(&second).copied())
            })
            .collect();
        traces.push((fe.spec.id.clone(), records));
    }

    Ok(RunOutput {
        scenario: world.sc,
        summary,
        packets: world.packets,
        handoffs: world.handoffs,
        avoidance: world.avoidance,
        queue: world.queue,
        fixed_archives: world.fixed.into_iter().map(|f| f.archive).collect(),
        system_archive: world.system_archive,
        traces,
        event_trace,
    })
}
