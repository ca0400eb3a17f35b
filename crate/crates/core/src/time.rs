//! Simulated time in integer nanoseconds.
//!
//! All scheduling happens on an integer clock so that event ordering and
//! backoff slot arithmetic are exact and platform independent. Conversions
//! from configuration values (seconds, microseconds) round to the nearest
//! nanosecond.

use std::fmt;
use std::ops::{Add, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);

    pub fn from_secs(s: f64) -> Self {
        debug_assert!(s >= 0.0 && s.is_finite());
        SimTime((s * 1e9).round() as u64)
    }

    pub fn from_micros(us: f64) -> Self {
        debug_assert!(us >= 0.0 && us.is_finite());
        SimTime((us * 1e3).round() as u64)
    }

    pub fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.9}s", self.as_secs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_to_nanoseconds() {
        assert_eq!(SimTime::from_secs(0.1).as_nanos(), 100_000_000);
        assert_eq!(SimTime::from_micros(13.0).as_nanos(), 13_000);
        assert_eq!(SimTime::from_micros(466.6666667).as_nanos(), 466_667);
        assert!((SimTime(2_500_000_000).as_secs() - 2.5).abs() < 1e-15);
    }
}
