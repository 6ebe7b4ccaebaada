//! The connected-vehicle applications: collision avoidance on the Mobile
//! Edge and threshold-based queue detection on the Fixed Edge.

pub mod collision;
pub mod queue;

pub use collision::{on_warning, AvoidanceDecision, Receiver, Verdict, WarningLog, WarningMessage, WarningReason};
pub use queue::{accuracy, detect_queue, QueueDecision, QueueDetector, QueueParams};
