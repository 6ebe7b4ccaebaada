//! Append-only in-memory document store with retention and time/topic queries.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::broker::{SubscriptionFilter, Topic};
use crate::engine::Millis;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArchiveError {
    #[error("invalid range: {t0} > {t1}")]
    Range { t0: Millis, t1: Millis },
    #[error("retention max_age must be positive")]
    Retention,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub topic: Topic,
    pub t: Millis,
    pub payload: Value,
    pub origin: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RetentionPolicy {
    /// `None` keeps records forever
    pub max_age: Option<Millis>,
}

impl RetentionPolicy {
    pub fn unbounded() -> Self {
        RetentionPolicy { max_age: None }
    }

    pub fn max_age(ms: Millis) -> Result<Self, ArchiveError> {
        if ms == 0 {
            return Err(ArchiveError::Retention);
        }
        Ok(RetentionPolicy { max_age: Some(ms) })
    }

    /// How often the engine should prune: a quarter of the horizon.
    pub fn prune_interval(&self) -> Option<Millis> {
        self.max_age.map(|a| (a / 4).max(1))
    }
}

#[derive(Debug, Clone)]
pub struct Archive {
    name: String,
    retention: RetentionPolicy,
    records: Vec<(u64, Record)>,
    next_seq: u64,
}

impl Archive {
    pub fn new(name: impl Into<String>, retention: RetentionPolicy) -> Self {
        Archive { name: name.into(), retention, records: Vec::new(), next_seq: 0 }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn retention(&self) -> RetentionPolicy {
        self.retention
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Total appends ever made, including pruned records.
    pub fn appended(&self) -> u64 {
        self.next_seq
    }

    pub fn append(&mut self, rec: Record) -> u64 {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.records.push((seq, rec));
        seq
    }

    /// Unpruned records with `t` in `[t0, t1]` whose topic matches, in
    /// `(t, seq)` order.
    pub fn query(&self, t0: Millis, t1: Millis, filter: &SubscriptionFilter) -> Result<Vec<(u64, &Record)>, ArchiveError> {
        if t0 > t1 {
            return Err(ArchiveError::Range { t0, t1 });
        }
        let mut out: Vec<(u64, &Record)> = self
            .records
            .iter()
            .filter(|(_, r)| r.t >= t0 && r.t <= t1 && filter.matches(&r.topic))
            .map(|(s, r)| (*s, r))
            .collect();
        out.sort_by_key(|(s, r)| (r.t, *s));
        Ok(out)
    }

    /// Drop records older than the retention horizon. Returns how many went.
    pub fn prune(&mut self, now: Millis) -> usize {
        let Some(max_age) = self.retention.max_age else {
            return 0;
        };
        let before = self.records.len();
        let horizon = now.saturating_sub(max_age);
        self.records.retain(|(_, r)| r.t >= horizon);
        before - self.records.len()
    }

    pub fn records(&self) -> impl Iterator<Item = (u64, &Record)> {
        self.records.iter().map(|(s, r)| (*s, r))
    }

    /// One JSON document per line with sorted keys, in append order.
    pub fn export_ndjson<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (seq, r) in &self.records {
            let doc = json!({
                "seq": seq,
                "t": r.t,
                "topic": r.topic.as_str(),
                "origin": r.origin,
                "payload": r.payload,
            });
            writeln!(w, "{doc}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(topic: &str, t: Millis) -> Record {
        Record { topic: Topic::new(topic).unwrap(), t, payload: json!({"b": 1, "a": [1, 2]}), origin: "rsu1".into() }
    }

    fn all() -> SubscriptionFilter {
        SubscriptionFilter::new("#").unwrap()
    }

    #[test]
    fn sequence_numbers_increase() {
        let mut a = Archive::new("fixed", RetentionPolicy::unbounded());
        let n = a.append(rec("bsm/raw/v1", 10));
        assert_eq!(a.append(rec("bsm/raw/v1", 5)), n + 1);
        let q = a.query(10, 10, &all()).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].0, n);
    }

    #[test]
    fn empty_and_invalid_ranges() {
        let mut a = Archive::new("fixed", RetentionPolicy::unbounded());
        a.append(rec("bsm/raw/v1", 4));
        assert!(a.query(5, 5, &all()).unwrap().is_empty());
        assert_eq!(a.query(6, 5, &all()), Err(ArchiveError::Range { t0: 6, t1: 5 }));
    }

    #[test]
    fn prune_applies_retention() {
        let mut a = Archive::new("fixed", RetentionPolicy::max_age(60_000).unwrap());
        assert_eq!(a.retention().prune_interval(), Some(15_000));
        a.append(rec("bsm/raw/v1", 0));
        a.append(rec("bsm/raw/v1", 30_000));
        assert_eq!(a.prune(59_000), 0);
        assert_eq!(a.prune(75_000), 1);
        assert_eq!(a.len(), 1);
        assert_eq!(a.appended(), 2);
        let mut forever = Archive::new("sys", RetentionPolicy::unbounded());
        forever.append(rec("x", 0));
        assert_eq!(forever.prune(u64::MAX), 0);
        assert!(RetentionPolicy::max_age(0).is_err());
    }

    #[test]
    fn topic_filtering_and_export() {
        let mut a = Archive::new("sys", RetentionPolicy::unbounded());
        a.append(rec("bsm/raw/v1", 1));
        a.append(rec("queue/status/r1", 2));
        a.append(rec("bsm/processed/r1", 3));
        let bsm = a.query(0, 10, &SubscriptionFilter::new("bsm/#").unwrap()).unwrap();
        assert_eq!(bsm.len(), 2);
        let mut out = Vec::new();
        a.export_ndjson(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"origin":"rsu1","payload":{"a":[1,2],"b":1},"seq":0,"t":1,"topic":"bsm/raw/v1"}"#
        );
    }

    proptest::proptest! {
        #[test]
        fn query_is_sorted_sound_and_complete(ts in proptest::collection::vec(0u64..100, 0..60), t0 in 0u64..50, w in 0u64..60) {
            let mut a = Archive::new("x", RetentionPolicy::unbounded());
            for (i, t) in ts.iter().enumerate() {
                a.append(rec(if i % 3 == 0 { "queue/status/r" } else { "bsm/raw/v" }, *t));
            }
            let f = SubscriptionFilter::new("bsm/#").unwrap();
            let q = a.query(t0, t0 + w, &f).unwrap();
            proptest::prop_assert!(q.windows(2).all(|p| (p[0].1.t, p[0].0) < (p[1].1.t, p[1].0)));
            let expected = ts.iter().enumerate().filter(|(i, t)| i % 3 != 0 && **t >= t0 && **t <= t0 + w).count();
            proptest::prop_assert_eq!(q.len(), expected);
        }
    }
}
