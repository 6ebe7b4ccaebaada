//! Offline queue detection over an NDJSON BSM trace.

use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

use crate::apps::{accuracy, detect_queue, QueueDecision, QueueParams};
use crate::bsm::{Bsm, TraceRecord};
use crate::engine::Millis;
use crate::exec::Strategy;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("reading trace: {0}")]
    Io(#[from] std::io::Error),
}

/// Parse a trace; blank lines are skipped.
pub fn read_trace<R: BufRead>(r: R) -> Result<Vec<TraceRecord>, ReplayError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TraceRecord = serde_json::from_str(&line)
            .map_err(|e| ReplayError::Malformed { line: i + 1, message: e.to_string() })?;
        if !(-90.0..=90.0).contains(&rec.lat) || !(-180.0..=180.0).contains(&rec.lon) {
            return Err(ReplayError::Malformed { line: i + 1, message: "coordinates out of range".into() });
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn write_trace<W: std::io::Write>(mut w: W, records: &[TraceRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutput {
    pub decisions: Vec<QueueDecision>,
    /// per-decision truth, when the trace carries any
    pub truth: Vec<Option<bool>>,
    /// over seconds that have a truth label; `None` without truth data
    pub accuracy: Option<f64>,
}

/// Evaluate once per second, at every whole second from just after the
/// first receive time to the last one.
pub fn replay(rsu: &str, records: &[TraceRecord], params: &QueueParams) -> ReplayOutput {
    replay_with(rsu, records, params, Strategy::default())
}

pub fn replay_with(rsu: &str, records: &[TraceRecord], params: &QueueParams, strategy: Strategy) -> ReplayOutput {
    if records.is_empty() {
        return ReplayOutput { decisions: Vec::new(), truth: Vec::new(), accuracy: None };
    }
    let mut sorted: Vec<(Millis, Bsm)> = records.iter().map(|r| (r.received_at(), r.bsm())).collect();
    sorted.sort_by(|a, b| (a.0, a.1.t, &a.1.vehicle_id).cmp(&(b.0, b.1.t, &b.1.vehicle_id)));
    let w = params.window;
    let first = sorted[0].0 / w + 1;
    let last = sorted[sorted.len() - 1].0.div_ceil(w);
    let seconds: Vec<Millis> = (first..=last).map(|k| k * w).collect();

    let decisions = strategy.map(&seconds, |&t| {
        let lo = sorted.partition_point(|(rx, _)| rx + w <= t);
        let hi = sorted.partition_point(|(rx, _)| *rx <= t);
        let window: Vec<Bsm> = sorted[lo..hi].iter().map(|(_, b)| b.clone()).collect();
        detect_queue(rsu, t, &window, params)
    });

    let mut labelled: BTreeMap<Millis, bool> = BTreeMap::new();
    for r in records {
        if let Some(v) = r.truth {
            labelled.insert(r.received_at(), v);
        }
    }
    let truth: Vec<Option<bool>> = seconds
        .iter()
        .map(|t| {
            if labelled.is_empty() {
                return None;
            }
            // the label of an evaluation second rides on the records received inside it
            let lo = t.saturating_sub(w);
            labelled.range(lo + 1..=*t).next_back().or_else(|| labelled.range(..=*t).next_back()).map(|(_, v)| *v)
        })
        .collect();
    let paired: (Vec<bool>, Vec<bool>) = decisions
        .iter()
        .zip(&truth)
        .filter_map(|(d, t)| t.map(|t| (d.queued, t)))
        .unzip();
    let accuracy = accuracy(&paired.0, &paired.1).ok();
    ReplayOutput { decisions, truth, accuracy }
}
