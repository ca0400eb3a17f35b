//! Beacon timing and broadcast CSMA/CA primitives.
//!
//! Broadcast frames get a single transmission attempt: no ACK, no retry and
//! therefore no contention-window doubling. The backoff counter is drawn
//! uniformly from `{0, ..., cw_min}` and only counts down during idle slots
//! that follow a DIFS of idle medium.

use rand::Rng;

use crate::time::SimTime;

/// On-air duration of a frame: preamble plus payload at the PHY rate.
pub fn frame_airtime(size_bytes: u32, data_rate_mbps: f64, preamble_us: f64) -> f64 {
    preamble_us * 1e-6 + (size_bytes as f64 * 8.0) / (data_rate_mbps * 1e6)
}

pub fn draw_backoff<R: Rng + ?Sized>(rng: &mut R, cw_min: u32) -> u32 {
    rng.random_range(0..=cw_min)
}

/// First generation instant of a vehicle, uniform on `[0, period)`.
pub fn first_generation_time<R: Rng + ?Sized>(period_s: f64, rng: &mut R) -> f64 {
    rng.random::<f64>() * period_s
}

/// `current + period·(1 + U)`, `U ~ Uniform[0, jitter]`.
pub fn next_generation_time<R: Rng + ?Sized>(
    current_s: f64,
    period_s: f64,
    jitter: f64,
    rng: &mut R,
) -> f64 {
    let u = if jitter > 0.0 {
        rng.random_range(0.0..=jitter)
    } else {
        0.0
    };
    current_s + period_s * (1.0 + u)
}

/// Whole backoff slots consumed when the medium turns busy at `busy_at`
/// after having been idle since `idle_since`.
pub fn slots_elapsed(idle_since: SimTime, busy_at: SimTime, difs: SimTime, slot: SimTime) -> u32 {
    let counting_from = idle_since + difs;
    if busy_at <= counting_from {
        return 0;
    }
    ((busy_at - counting_from).as_nanos() / slot.as_nanos()) as u32
}
