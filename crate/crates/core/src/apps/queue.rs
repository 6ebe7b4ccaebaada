//! Threshold queue detection over a one-second BSM window.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::bsm::Bsm;
use crate::engine::Millis;
use crate::geo::{distance, GeoPoint, EARTH_RADIUS_M};
use crate::safety::SimConstants;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AccuracyError {
    #[error("accuracy is undefined for an empty series")]
    Empty,
    #[error("decision and truth series differ in length ({0} vs {1})")]
    Misaligned(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueParams {
    pub speed_threshold: f64,
    pub gap_threshold: f64,
    pub min_cvs: usize,
    /// evaluation window and cadence, ms
    pub window: Millis,
}

impl QueueParams {
    pub fn from_constants(c: &SimConstants) -> Self {
        QueueParams {
            speed_threshold: c.queue_speed_threshold,
            gap_threshold: c.queue_gap_threshold,
            min_cvs: 2,
            window: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueDecision {
    pub rsu: String,
    pub t: Millis,
    /// mean of per-CV window speeds, m/s
    pub avg_speed: Option<f64>,
    /// mean consecutive separation, meters
    pub avg_gap: Option<f64>,
    pub queued: bool,
    pub n_cvs: usize,
}

/// Order positions along the axis through the two mutually farthest points.
fn order_along_axis(points: &mut [(String, GeoPoint)]) {
    if points.len() < 3 {
        // two points: either order gives the same single separation
        points.sort_by(|a, b| a.0.cmp(&b.0));
        return;
    }
    let (mut ia, mut ib, mut best) = (0, 1, -1.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = distance(points[i].1, points[j].1);
            if d > best {
                (ia, ib, best) = (i, j, d);
            }
        }
    }
    let a = points[ia].1;
    let b = points[ib].1;
    let k = a.lat.to_radians().cos();
    let local = |p: GeoPoint| ((p.lon - a.lon).to_radians() * k * EARTH_RADIUS_M, (p.lat - a.lat).to_radians() * EARTH_RADIUS_M);
    let axis = local(b);
    points.sort_by(|p, q| {
        let (px, py) = local(p.1);
        let (qx, qy) = local(q.1);
        (px * axis.0 + py * axis.1).total_cmp(&(qx * axis.0 + qy * axis.1)).then_with(|| p.0.cmp(&q.0))
    });
}

/// Pure function of the window: per-CV mean speed and latest position,
/// averaged across CVs.
pub fn detect_queue(rsu: &str, t: Millis, window: &[Bsm], params: &QueueParams) -> QueueDecision {
    let mut per_cv: BTreeMap<&str, Vec<&Bsm>> = BTreeMap::new();
    for b in window {
        per_cv.entry(b.vehicle_id.as_str()).or_default().push(b);
    }
    let mut speeds = Vec::with_capacity(per_cv.len());
    let mut latest = Vec::with_capacity(per_cv.len());
    for (id, msgs) in per_cv.iter_mut() {
        msgs.sort_by_key(|b| b.t);
        speeds.push(msgs.iter().map(|b| b.speed).sum::<f64>() / msgs.len() as f64);
        latest.push((id.to_string(), msgs.last().expect("non-empty").pos));
    }
    let n_cvs = speeds.len();
    let avg_speed = (n_cvs > 0).then(|| speeds.iter().sum::<f64>() / n_cvs as f64);
    let avg_gap = (n_cvs >= 2).then(|| {
        order_along_axis(&mut latest);
        let gaps: Vec<f64> = latest.windows(2).map(|w| distance(w[0].1, w[1].1)).collect();
        gaps.iter().sum::<f64>() / gaps.len() as f64
    });
    let queued = n_cvs >= params.min_cvs.max(2)
        && avg_speed.is_some_and(|s| s < params.speed_threshold)
        && avg_gap.is_some_and(|g| g < params.gap_threshold);
    QueueDecision { rsu: rsu.to_string(), t, avg_speed, avg_gap, queued, n_cvs }
}

/// Fixed Edge receive buffer feeding `detect_queue`.
#[derive(Debug, Clone)]
pub struct QueueDetector {
    rsu: String,
    params: QueueParams,
    buffer: Vec<(Millis, Bsm)>,
}

impl QueueDetector {
    pub fn new(rsu: impl Into<String>, params: QueueParams) -> Self {
        QueueDetector { rsu: rsu.into(), params, buffer: Vec::new() }
    }

    pub fn rsu(&self) -> &str {
        &self.rsu
    }

    pub fn push(&mut self, rx_t: Millis, bsm: Bsm) {
        self.buffer.push((rx_t, bsm));
    }

    /// BSMs received in `(t - window, t]`.
    pub fn window_at(&self, t: Millis) -> Vec<Bsm> {
        let w = self.params.window;
        self.buffer
            .iter()
            .filter(|(rx, _)| *rx <= t && *rx + w > t)
            .map(|(_, b)| b.clone())
            .collect()
    }

    pub fn evaluate(&mut self, t: Millis) -> QueueDecision {
        let window = self.window_at(t);
        let d = detect_queue(&self.rsu, t, &window, &self.params);
        self.buffer.retain(|(rx, _)| *rx > t);
        d
    }
}

/// Fraction of evaluation seconds where the detector agreed with truth.
pub fn accuracy(decisions: &[bool], truth: &[bool]) -> Result<f64, AccuracyError> {
    if decisions.len() != truth.len() {
        return Err(AccuracyError::Misaligned(decisions.len(), truth.len()));
    }
    if decisions.is_empty() {
        return Err(AccuracyError::Empty);
    }
    let hits = decisions.iter().zip(truth).filter(|(d, t)| d == t).count();
    Ok(hits as f64 / decisions.len() as f64)
}
