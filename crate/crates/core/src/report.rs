//! Metrics tables and run artifacts.
//!
//! A [`MetricsReport`] is a list of sections of labelled rows. The CSV form is
//! one `section,row,column,value` line per cell; the text form renders the
//! very same cell strings, so neither can carry a number the other lacks.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::apps::Verdict;
use crate::broker::SubscriptionFilter;
use crate::engine::Millis;
use crate::exec::Strategy;
use crate::radio::LinkKind;
use crate::replay::write_trace;
use crate::sim::{Outcome, RunOutput, TrafficClass};
use crate::sweep::{coverage, CoverageRow};
use crate::units::{meters_to_feet, mps_to_mph, round_feet};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Empty,
    Int(i64),
    Num(f64, usize),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Empty => String::new(),
            Cell::Int(v) => v.to_string(),
            Cell::Num(v, places) => format!("{v:.places$}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

fn num(v: f64, places: usize) -> Cell {
    Cell::Num(v, places)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Cell>)>,
}

impl Section {
    fn new(name: &str, columns: &[&str]) -> Self {
        Section { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    fn row(&mut self, label: impl Into<String>, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push((label.into(), cells));
    }

    pub fn get(&self, row: &str, column: &str) -> Option<&Cell> {
        let c = self.columns.iter().position(|n| n == column)?;
        self.rows.iter().find(|(r, _)| r == row).map(|(_, cells)| &cells[c])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub sections: Vec<Section>,
}

fn mean(xs: &[Millis]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<Millis>() as f64 / xs.len() as f64)
}

impl MetricsReport {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn from_run(out: &RunOutput) -> MetricsReport {
        let sc = &out.scenario;
        let t_end = sc.t_end;
        let mut sections = Vec::new();

        let mut s = Section::new("summary", &["scenario", "seed", "t_end_ms", "events", "handoff_events", "trace_sha256"]);
        s.row(
            "run",
            vec![
                sc.name.as_str().into(),
                sc.seed.into(),
                t_end.into(),
                out.summary.events_processed.into(),
                out.handoffs.len().into(),
                out.summary.trace_hash.clone().into(),
            ],
        );
        sections.push(s);

        // packets still in flight at t_end are left out
        let settled = out.packets.iter().filter(|p| p.t_recv.is_none_or(|t| t <= t_end));
        let mut groups: BTreeMap<(TrafficClass, LinkKind), Vec<_>> = BTreeMap::new();
        for p in settled {
            groups.entry((p.class, p.link)).or_default().push(p);
        }
        let mut s = Section::new(
            "links",
            &["sent", "delivered", "lost", "loss_pct", "avg_latency_ms", "max_latency_ms", "not_associated"],
        );
        for ((class, link), ps) in &groups {
            let not_assoc = ps.iter().filter(|p| p.outcome == Outcome::NotAssociated).count();
            let lat: Vec<Millis> = ps.iter().filter_map(|p| p.t_recv.map(|r| r - p.t_send)).collect();
            let sent = ps.len() - not_assoc;
            let lost = sent - lat.len();
            s.row(
                format!("{}/{}", link.as_str(), class.as_str()),
                vec![
                    sent.into(),
                    lat.len().into(),
                    lost.into(),
                    if sent > 0 { num(100.0 * lost as f64 / sent as f64, 3) } else { Cell::Empty },
                    mean(&lat).map_or(Cell::Empty, |m| num(m, 3)),
                    lat.iter().max().copied().into(),
                    not_assoc.into(),
                ],
            );
        }
        sections.push(s);

        let mut s = Section::new("handoffs", &["t_ms", "vehicle", "from", "to", "rsu"]);
        for (i, h) in out.handoffs.iter().enumerate() {
            s.row(
                (i + 1).to_string(),
                vec![
                    h.event.t.into(),
                    h.vehicle.as_str().into(),
                    h.event.from.as_str().into(),
                    h.event.to.as_str().into(),
                    h.event.rsu.clone().into(),
                ],
            );
        }
        sections.push(s);

        let req = sc.constants.safety_latency_req;
        let mut s = Section::new(
            "collision_avoidance",
            &["source", "t_recv_ms", "speed_mph", "gap_ft", "dmin_ft", "verdict", "link", "latency_ms", "requirement_ms", "within_requirement"],
        );
        for d in &out.avoidance {
            s.row(
                d.vehicle.as_str(),
                vec![
                    d.source.as_str().into(),
                    d.t_recv.into(),
                    num(mps_to_mph(d.speed), 1),
                    round_feet(d.gap).into(),
                    round_feet(d.d_min).into(),
                    d.verdict.as_str().into(),
                    d.link_used.as_str().into(),
                    d.latency.into(),
                    num(req, 0),
                    d.within_safety_latency.into(),
                ],
            );
        }
        sections.push(s);

        // one row per warning source, laid out like the field table
        let mut s = Section::new(
            "safety",
            &["receiver", "speed_mph", "gap_available_ft", "dmin_ft", "verdict", "dsrc_latency_ms", "lte_latency_ms", "requirement_ms"],
        );
        let mut sources: Vec<&str> = out.avoidance.iter().map(|d| d.source.as_str()).collect();
        sources.dedup();
        for src in sources {
            let ds: Vec<_> = out.avoidance.iter().filter(|d| d.source == src).collect();
            let dsrc: Vec<Millis> = ds.iter().filter(|d| d.link_used == LinkKind::Dsrc).map(|d| d.latency).collect();
            let lte: Vec<Millis> = ds.iter().filter(|d| d.link_used == LinkKind::Lte).map(|d| d.latency).collect();
            let Some(first) = ds.iter().find(|d| d.link_used == LinkKind::Dsrc).or(ds.first()) else { continue };
            s.row(
                src,
                vec![
                    first.vehicle.as_str().into(),
                    num(mps_to_mph(first.speed), 1),
                    round_feet(first.gap).into(),
                    round_feet(first.d_min).into(),
                    first.verdict.as_str().into(),
                    mean(&dsrc).map_or(Cell::Empty, |m| num(m, 1)),
                    mean(&lte).map_or(Cell::Empty, |m| num(m, 1)),
                    num(req, 0),
                ],
            );
        }
        sections.push(s);

        let mut s = Section::new("data_exchange", &["nodes", "link", "data", "samples", "avg_delay_ms", "max_delay_ms"]);
        let hops: [(&str, &str, &str, &dyn Fn(&crate::sim::PacketRecord) -> bool); 4] = [
            ("mobile_fixed", "Mobile Edge (CV) - Fixed Edge", "Basic Safety Messages", &|p| {
                p.class == TrafficClass::Bsm && p.link.is_access()
            }),
            ("fixed_system", "System Edge - Fixed Edge", "Queue detection information", &|p| p.class == TrafficClass::QueueStatus),
            ("fixed_system_bsm", "System Edge - Fixed Edge", "Forwarded BSMs", &|p| p.class == TrafficClass::BsmForward),
            ("mobile_system", "Mobile Edge (CV) - System Edge", "Basic Safety Messages", &|p| {
                p.class == TrafficClass::Bsm && p.link == LinkKind::Lte
            }),
        ];
        for (label, nodes, data, pick) in hops {
            let ps: Vec<_> = out.packets.iter().filter(|p| pick(p) && p.t_recv.is_some_and(|t| t <= t_end)).collect();
            if ps.is_empty() {
                continue;
            }
            let mut links: Vec<&str> = ps.iter().map(|p| p.link.as_str()).collect();
            links.sort_unstable();
            links.dedup();
            let lat: Vec<Millis> = ps.iter().map(|p| p.t_recv.expect("filtered") - p.t_send).collect();
            s.row(
                label,
                vec![
                    nodes.into(),
                    links.join("+").into(),
                    data.into(),
                    lat.len().into(),
                    mean(&lat).map_or(Cell::Empty, |m| num(m, 3)),
                    lat.iter().max().copied().into(),
                ],
            );
        }
        sections.push(s);

        // configured profiles, side by side: the BSM hop and the warning tiers are separate
        let mut s = Section::new("latency_profiles", &["link", "traffic", "speed_mph", "mean_ms", "jitter_ms"]);
        let links = &sc.links;
        for (label, m, traffic) in [
            ("dsrc_data", &links.dsrc, "bsm"),
            ("lte_data", &links.lte, "bsm"),
            ("wifi_backhaul_data", &links.wifi_backhaul, "forward"),
            ("wifi_data", &links.wifi, "bsm"),
        ] {
            s.row(label, vec![m.kind.as_str().into(), traffic.into(), Cell::Empty, m.latency.mean_ms.into(), m.latency.jitter_ms.into()]);
        }
        for (name, kind, table) in [("dsrc_warning", LinkKind::Dsrc, &links.dsrc_warning), ("lte_warning", LinkKind::Lte, &links.lte_warning)] {
            for t in table.tiers() {
                s.row(
                    format!("{name}_{}", t.speed_mph),
                    vec![kind.as_str().into(), "warning".into(), num(t.speed_mph, 1), t.latency.mean_ms.into(), t.latency.jitter_ms.into()],
                );
            }
        }
        sections.push(s);

        let mut s = Section::new(
            "queue",
            &["evaluations", "queued_s", "truth_s", "accuracy", "false_negatives", "false_positives", "first_truth_ms", "first_queued_ms"],
        );
        let mut rsus: Vec<&str> = out.queue.iter().map(|q| q.decision.rsu.as_str()).collect();
        rsus.sort_unstable();
        rsus.dedup();
        for rsu in rsus {
            let qs: Vec<_> = out.queue_for(rsu).collect();
            let dec: Vec<bool> = qs.iter().map(|q| q.decision.queued).collect();
            let truth: Vec<bool> = qs.iter().map(|q| q.truth).collect();
            let fneg = qs.iter().filter(|q| q.truth && !q.decision.queued).count();
            let fpos = qs.iter().filter(|q| !q.truth && q.decision.queued).count();
            s.row(
                rsu,
                vec![
                    qs.len().into(),
                    dec.iter().filter(|d| **d).count().into(),
                    truth.iter().filter(|d| **d).count().into(),
                    crate::apps::accuracy(&dec, &truth).ok().map_or(Cell::Empty, |a| num(a, 4)),
                    fneg.into(),
                    fpos.into(),
                    qs.iter().find(|q| q.truth).map(|q| q.decision.t).into(),
                    qs.iter().find(|q| q.decision.queued).map(|q| q.decision.t).into(),
                ],
            );
        }
        sections.push(s);

        let mut s = Section::new("archive", &["records", "appended", "bsm_records", "queue_records"]);
        let bsm = SubscriptionFilter::new("bsm/#").expect("valid");
        let queue = SubscriptionFilter::new("queue/#").expect("valid");
        for a in out.fixed_archives.iter().chain(std::iter::once(&out.system_archive)) {
            let count = |f: &SubscriptionFilter| a.records().filter(|(_, r)| f.matches(&r.topic)).count();
            s.row(a.name(), vec![a.len().into(), a.appended().into(), count(&bsm).into(), count(&queue).into()]);
        }
        sections.push(s);

        MetricsReport { sections }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> io::Result<()> {
        let mut out = csv_writer(w);
        out.write_record(["section", "row", "column", "value"])?;
        for s in &self.sections {
            for (label, cells) in &s.rows {
                for (col, cell) in s.columns.iter().zip(cells) {
                    out.write_record([s.name.as_str(), label, col, &cell.render()])?;
                }
            }
        }
        out.flush()
    }

    pub fn render_text(&self) -> String {
        let mut text = String::new();
        for s in &self.sections {
            text.push_str(&format!("[{}]\n", s.name));
            if s.rows.is_empty() {
                text.push_str("(none)\n\n");
                continue;
            }
            let header: Vec<String> = std::iter::once("row".to_string()).chain(s.columns.iter().cloned()).collect();
            let body: Vec<Vec<String>> = s
                .rows
                .iter()
                .map(|(label, cells)| std::iter::once(label.clone()).chain(cells.iter().map(Cell::render)).collect())
                .collect();
            let widths: Vec<usize> = (0..header.len())
                .map(|i| body.iter().map(|r| r[i].chars().count()).chain([header[i].len()]).max().unwrap_or(0))
                .collect();
            for line in std::iter::once(&header).chain(&body) {
                let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                text.push_str(cells.join("  ").trim_end());
                text.push('\n');
            }
            text.push('\n');
        }
        text
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Text,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "text" => Some(Format::Text),
            "csv" => Some(Format::Csv),
            "both" => Some(Format::Both),
            _ => None,
        }
    }
}

fn ft(m: f64) -> String {
    format!("{:.3}", meters_to_feet(m))
}

pub fn write_decisions<W: Write>(out: &RunOutput, w: W) -> io::Result<()> {
    let mut c = csv_writer(w);
    c.write_record(["t_ms", "vehicle", "gap_ft", "dmin_ft", "verdict", "link", "latency_ms"])?;
    for d in &out.avoidance {
        c.write_record([
            d.t_recv.to_string(),
            d.vehicle.clone(),
            round_feet(d.gap).to_string(),
            round_feet(d.d_min).to_string(),
            d.verdict.as_str().to_string(),
            d.link_used.as_str().to_string(),
            d.latency.to_string(),
        ])?;
    }
    c.flush()
}

pub fn write_queue_decisions<W: Write>(out: &RunOutput, w: W) -> io::Result<()> {
    let mut c = csv_writer(w);
    c.write_record(["t_ms", "rsu", "avg_speed_mph", "avg_gap_ft", "queued", "truth"])?;
    for q in &out.queue {
        let d = &q.decision;
        c.write_record([
            d.t.to_string(),
            d.rsu.clone(),
            d.avg_speed.map(|v| format!("{:.3}", mps_to_mph(v))).unwrap_or_default(),
            d.avg_gap.map(ft).unwrap_or_default(),
            d.queued.to_string(),
            q.truth.to_string(),
        ])?;
    }
    c.flush()
}

pub fn write_handoffs<W: Write>(out: &RunOutput, w: W) -> io::Result<()> {
    let mut c = csv_writer(w);
    c.write_record(["t_ms", "vehicle", "from", "to"])?;
    for h in &out.handoffs {
        c.write_record([h.event.t.to_string(), h.vehicle.clone(), h.event.from.as_str().into(), h.event.to.as_str().into()])?;
    }
    c.flush()
}

pub fn write_packets<W: Write>(out: &RunOutput, w: W) -> io::Result<()> {
    let mut c = csv_writer(w);
    c.write_record(["t_send_ms", "t_recv_ms", "class", "link", "tx", "rx", "outcome", "distance_m", "in_range"])?;
    for p in &out.packets {
        c.write_record([
            p.t_send.to_string(),
            p.t_recv.map(|t| t.to_string()).unwrap_or_default(),
            p.class.as_str().to_string(),
            p.link.as_str().to_string(),
            p.tx.clone(),
            p.rx.clone(),
            match p.outcome {
                Outcome::Delivered => "delivered",
                Outcome::Lost => "lost",
                Outcome::NotAssociated => "not_associated",
            }
            .to_string(),
            format!("{:.3}", p.distance),
            p.in_range.to_string(),
        ])?;
    }
    c.flush()
}

pub fn write_coverage<W: Write>(rows: &[CoverageRow], w: W) -> io::Result<()> {
    let mut c = csv_writer(w);
    c.write_record(["rsu", "distance_m", "rssi_dbm", "p_loss", "empirical_loss"])?;
    for r in rows {
        c.write_record([
            r.rsu.clone(),
            format!("{:.1}", r.distance),
            format!("{:.3}", r.rssi_dbm),
            format!("{:.4}", r.p_loss),
            format!("{:.4}", r.empirical_loss),
        ])?;
    }
    c.flush()
}

/// Monte Carlo draws per coverage grid point.
pub const COVERAGE_DRAWS: usize = 10_000;

/// Write every artifact of a run into `dir`, creating it if needed.
pub fn write_artifacts(out: &RunOutput, dir: &Path, format: Format) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let create = |name: &str| File::create(dir.join(name)).map(BufWriter::new);
    let report = MetricsReport::from_run(out);
    if matches!(format, Format::Text | Format::Both) {
        create("report.txt")?.write_all(report.render_text().as_bytes())?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        report.write_csv(create("report.csv")?)?;
    }
    write_decisions(out, create("decisions.csv")?)?;
    write_queue_decisions(out, create("queue_decisions.csv")?)?;
    write_handoffs(out, create("handoffs.csv")?)?;
    write_packets(out, create("packets.csv")?)?;
    let mut w = create("archive.ndjson")?;
    out.system_archive.export_ndjson(&mut w)?;
    w.flush()?;
    for (rsu, records) in &out.traces {
        let mut w = create(&format!("trace_{rsu}.ndjson"))?;
        write_trace(&mut w, records)?;
        w.flush()?;
    }
    let rows = coverage(&out.scenario, 10.0, COVERAGE_DRAWS, Strategy::default());
    write_coverage(&rows, create("coverage.csv")?)?;
    if let Some(lines) = &out.event_trace {
        let mut w = create("events.log")?;
        for l in lines {
            writeln!(w, "{l}")?;
        }
        w.flush()?;
    }
    Ok(())
}

/// True when every decision of a run agrees with its verdict rule.
pub fn decisions_consistent(out: &RunOutput) -> bool {
    out.avoidance.iter().all(|d| (d.verdict == Verdict::Safe) == (d.gap >= d.d_min))
}
