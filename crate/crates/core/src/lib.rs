//! Deterministic discrete-event simulator of a three-layer connected-vehicle
//! testbed: vehicles (Mobile Edge), roadside units (Fixed Edge) and a backend
//! (System Edge), joined by DSRC, LTE and Wi-Fi links.

pub mod apps;
pub mod archive;
pub mod broker;
pub mod bsm;
pub mod engine;
pub mod exec;
pub mod geo;
pub mod handoff;
pub mod mobility;
pub mod radio;
pub mod replay;
pub mod report;
pub mod rng;
pub mod safety;
pub mod scenario;
pub mod sim;
pub mod sweep;
pub mod units;

pub use engine::Millis;
pub use geo::{distance, GeoPoint};
pub use safety::{min_safety_distance, SimConstants};
pub use scenario::{parse as parse_scenario, Scenario};
pub use sim::{run, RunOptions, RunOutput};
