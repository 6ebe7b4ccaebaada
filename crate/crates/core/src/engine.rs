//! Deterministic discrete-event scheduler.
//!
//! Events fire in `(fire_at, seq)` order: equal timestamps are FIFO by
//! insertion. Time is integer milliseconds. The loop is single threaded;
//! independent schedulers share nothing and may live on separate threads.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};

use sha2::{Digest, Sha256};
use thiserror::Error;

/// Milliseconds since scenario start.
pub type Millis = u64;

/// Payloads carried by the scheduler describe themselves for the trace.
pub trait EventKind {
    fn kind(&self) -> &'static str;
    fn subject(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ticket(pub u64);

#[derive(Debug, Clone)]
pub struct Event<E> {
    pub fire_at: Millis,
    pub seq: u64,
    pub kind: E,
}

impl<E> PartialEq for Event<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}

impl<E> Eq for Event<E> {}

impl<E> PartialOrd for Event<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Event<E> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        (other.fire_at, other.seq).cmp(&(self.fire_at, self.seq))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("cannot schedule at {fire_at} ms, clock is already at {now} ms")]
    InPast { fire_at: Millis, now: Millis },
    #[error("run end {t_end} ms is before the clock ({now} ms)")]
    EndInPast { t_end: Millis, now: Millis },
    #[error("run aborted at {fire_at} ms by event #{seq} ({kind} {subject}): {reason}")]
    Aborted {
        fire_at: Millis,
        seq: u64,
        kind: &'static str,
        subject: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimSummary {
    pub events_processed: u64,
    pub clock: Millis,
    pub pending: usize,
    /// hex SHA-256 of every processed `t,kind,subject` line
    pub trace_hash: String,
}

pub struct Scheduler<E> {
    now: Millis,
    next_seq: u64,
    queue: BinaryHeap<Event<E>>,
    processed: u64,
    hasher: Sha256,
    trace: Option<Vec<String>>,
}

impl<E: EventKind> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E: EventKind> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: 0,
            next_seq: 0,
            queue: BinaryHeap::new(),
            processed: 0,
            hasher: Sha256::new(),
            trace: None,
        }
    }

    /// Keep the textual event trace in memory in addition to hashing it.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn now(&self) -> Millis {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn schedule(&mut self, fire_at: Millis, kind: E) -> Result<Ticket, EngineError> {
        if fire_at < self.now {
            return Err(EngineError::InPast { fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Event { fire_at, seq, kind });
        Ok(Ticket(seq))
    }

    pub fn schedule_in(&mut self, delay: Millis, kind: E) -> Ticket {
        self.schedule(self.now + delay, kind)
            .expect("relative schedule is never in the past")
    }

    /// Process every event with `fire_at <= t_end`, then park the clock at `t_end`.
    pub fn run_until<F>(&mut self, t_end: Millis, mut handler: F) -> Result<SimSummary, EngineError>
    where
        F: FnMut(&mut Scheduler<E>, Event<E>) -> Result<(), String>,
    {
        if t_end < self.now {
            return Err(EngineError::EndInPast { t_end, now: self.now });
        }
        while self.queue.peek().is_some_and(|ev| ev.fire_at <= t_end) {
            let ev = self.queue.pop().expect("peeked");
            debug_assert!(ev.fire_at >= self.now);
            self.now = ev.fire_at;
            let (fire_at, seq, kind) = (ev.fire_at, ev.seq, ev.kind.kind());
            let subject = ev.kind.subject();
            let mut line = String::with_capacity(24 + subject.len());
            let _ = writeln!(line, "{fire_at},{kind},{subject}");
            self.hasher.update(line.as_bytes());
            if let Some(trace) = self.trace.as_mut() {
                line.pop();
                trace.push(line);
            }
            self.processed += 1;

            let outcome = catch_unwind(AssertUnwindSafe(|| handler(self, ev)));
            let reason = match outcome {
                Ok(Ok(())) => continue,
                Ok(Err(reason)) => reason,
                Err(panic) => panic
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| panic.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "handler panicked".to_string()),
            };
            return Err(EngineError::Aborted { fire_at, seq, kind, subject, reason });
        }
        self.now = t_end;
        Ok(self.summary())
    }

    pub fn summary(&self) -> SimSummary {
        let digest = self.hasher.clone().finalize();
        let mut trace_hash = String::with_capacity(64);
        for b in digest {
            let _ = write!(trace_hash, "{b:02x}");
        }
        SimSummary {
            events_processed: self.processed,
            clock: self.now,
            pending: self.queue.len(),
            trace_hash,
        }
    }

    /// Retained trace lines, if [`Scheduler::with_trace`] was used.
    pub fn trace(&self) -> Option<&[String]> {
        self.trace.as_deref()
    }
}
