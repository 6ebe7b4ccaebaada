//! Topic-based publish/subscribe with `+` / `#` subject filtering.
//!
//! Semantics: no retained messages, no sessions, exactly-once delivery per
//! subscriber even when several of its filters match. Inboxes are FIFO, so
//! per-publisher ordering is preserved.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::engine::Millis;

pub const MAX_TOPIC_BYTES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrokerError {
    #[error("topic `{0}` is malformed: {1}")]
    Topic(String, &'static str),
    #[error("filter `{0}` is malformed: {1}")]
    Filter(String, &'static str),
}

fn check_len(s: &str) -> Result<(), &'static str> {
    if s.is_empty() {
        return Err("empty");
    }
    if s.len() > MAX_TOPIC_BYTES {
        return Err("longer than 256 bytes");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Topic(String);

impl Topic {
    pub fn new(s: impl Into<String>) -> Result<Self, BrokerError> {
        let s = s.into();
        let bad = |why| BrokerError::Topic(s.clone(), why);
        check_len(&s).map_err(bad)?;
        for level in s.split('/') {
            if level.is_empty() {
                return Err(bad("empty level"));
            }
            if level.contains(['+', '#']) {
                return Err(bad("wildcard in topic"));
            }
        }
        Ok(Topic(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn levels(&self) -> impl Iterator<Item = &str> {
        self.0.split('/')
    }
}

impl fmt::Display for Topic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Topic {
    type Error = BrokerError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Topic::new(s)
    }
}

impl From<Topic> for String {
    fn from(t: Topic) -> String {
        t.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Level {
    Exact(String),
    One,
    Rest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubscriptionFilter {
    raw: String,
    levels: Vec<Level>,
}

impl SubscriptionFilter {
    pub fn new(s: impl Into<String>) -> Result<Self, BrokerError> {
        let raw = s.into();
        let bad = |why| BrokerError::Filter(raw.clone(), why);
        check_len(&raw).map_err(bad)?;
        let parts: Vec<&str> = raw.split('/').collect();
        let mut levels = Vec::with_capacity(parts.len());
        for (i, part) in parts.iter().enumerate() {
            let level = match *part {
                "" => return Err(bad("empty level")),
                "+" => Level::One,
                "#" if i + 1 == parts.len() => Level::Rest,
                "#" => return Err(bad("`#` must be the last level")),
                p if p.contains(['+', '#']) => return Err(bad("wildcard must fill a whole level")),
                p => Level::Exact(p.to_string()),
            };
            levels.push(level);
        }
        Ok(SubscriptionFilter { raw, levels })
    }

    pub fn as_str(&self) -> &str {
        &self.raw
    }

    pub fn matches(&self, topic: &Topic) -> bool {
        let mut topic_levels = topic.levels();
        for level in &self.levels {
            match level {
                Level::Rest => return true,
                Level::One => {
                    if topic_levels.next().is_none() {
                        return false;
                    }
                }
                Level::Exact(want) => match topic_levels.next() {
                    Some(got) if got == want => {}
                    _ => return false,
                },
            }
        }
        topic_levels.next().is_none()
    }
}

pub fn matches(filter: &SubscriptionFilter, topic: &Topic) -> bool {
    filter.matches(topic)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokerMessage {
    pub topic: Topic,
    pub payload: Value,
    pub publisher: String,
    pub t_pub: Millis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubscriptionId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TapId(pub usize);

#[derive(Debug, Default)]
struct Client {
    subs: Vec<(SubscriptionId, SubscriptionFilter)>,
    inbox: VecDeque<BrokerMessage>,
}

/// A single broker instance. Several may coexist (one per edge node).
#[derive(Debug, Default)]
pub struct Broker {
    name: String,
    clients: BTreeMap<String, Client>,
    taps: Vec<VecDeque<BrokerMessage>>,
    next_id: u64,
    published: u64,
}

impl Broker {
    pub fn new(name: impl Into<String>) -> Self {
        Broker { name: name.into(), ..Default::default() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn published(&self) -> u64 {
        self.published
    }

    pub fn subscribe(&mut self, client: &str, filter: &str) -> Result<SubscriptionId, BrokerError> {
        let filter = SubscriptionFilter::new(filter)?;
        let entry = self.clients.entry(client.to_string()).or_default();
        if let Some((id, _)) = entry.subs.iter().find(|(_, f)| f.raw == filter.raw) {
            return Ok(*id);
        }
        let id = SubscriptionId(self.next_id);
        self.next_id += 1;
        entry.subs.push((id, filter));
        Ok(id)
    }

    pub fn unsubscribe(&mut self, id: SubscriptionId) -> bool {
        for client in self.clients.values_mut() {
            if let Some(pos) = client.subs.iter().position(|(s, _)| *s == id) {
                client.subs.remove(pos);
                return true;
            }
        }
        false
    }

    /// Observers that see every published message; not counted as deliveries.
    pub fn add_tap(&mut self) -> TapId {
        self.taps.push(VecDeque::new());
        TapId(self.taps.len() - 1)
    }

    /// Enqueue `msg` once for every subscriber with at least one matching
    /// filter. Returns the number of subscribers scheduled.
    pub fn publish(&mut self, msg: BrokerMessage) -> usize {
        self.published += 1;
        let mut count = 0;
        for client in self.clients.values_mut() {
            if client.subs.iter().any(|(_, f)| f.matches(&msg.topic)) {
                client.inbox.push_back(msg.clone());
                count += 1;
            }
        }
        for tap in &mut self.taps {
            tap.push_back(msg.clone());
        }
        count
    }

    pub fn drain(&mut self, client: &str) -> Vec<BrokerMessage> {
        self.clients.get_mut(client).map(|c| c.inbox.drain(..).collect()).unwrap_or_default()
    }

    /// Drain every client inbox, in client-name order.
    pub fn drain_all(&mut self) -> Vec<(String, BrokerMessage)> {
        let mut out = Vec::new();
        for (name, c) in &mut self.clients {
            out.extend(c.inbox.drain(..).map(|m| (name.clone(), m)));
        }
        out
    }

    pub fn drain_tap(&mut self, tap: TapId) -> Vec<BrokerMessage> {
        self.taps.get_mut(tap.0).map(|t| t.drain(..).collect()).unwrap_or_default()
    }
}
