//! Unit conversions between the SI quantities used internally and the
//! imperial quantities used in scenario files and reports.

/// Meters per second in one mile per hour (exact by definition).
pub const MPS_PER_MPH: f64 = 0.44704;
/// Meters in one international foot (exact by definition).
pub const METERS_PER_FOOT: f64 = 0.3048;

pub fn convert_speed(mph: f64) -> f64 {
    mph * MPS_PER_MPH
}

pub fn mps_to_mph(mps: f64) -> f64 {
    mps / MPS_PER_MPH
}

pub fn feet_to_meters(ft: f64) -> f64 {
    ft * METERS_PER_FOOT
}

pub fn meters_to_feet(m: f64) -> f64 {
    m / METERS_PER_FOOT
}

/// Round to the nearest whole foot, halves away from zero.
pub fn round_feet(m: f64) -> i64 {
    meters_to_feet(m).round() as i64
}
