//! Log-distance propagation and SINR-threshold reception.
//!
//! Received power is `tx_power - PL(d)` with `PL(d) = PL(d0) + 10·γ·log10(d/d0)`,
//! `d0 = 1 m` and `PL(d0)` the free-space loss at the carrier frequency.
//! Distances below `d0` are clamped to it. A frame is decoded when its power
//! clears the sensitivity and its SINR stays above the capture threshold for
//! the whole time it is on air; interference adds in linear power. Frames
//! that would fail against thermal noise alone count as below sensitivity,
//! not as collision losses.

use crate::config::SimConfig;
use crate::time::SimTime;

const SPEED_OF_LIGHT_MPS: f64 = 299_792_458.0;
const REFERENCE_DISTANCE_M: f64 = 1.0;
const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Free-space loss at the 1 m reference distance.
pub fn reference_loss_db(channel_freq_ghz: f64) -> f64 {
    let f_hz = channel_freq_ghz * 1e9;
    20.0 * (4.0 * std::f64::consts::PI * REFERENCE_DISTANCE_M * f_hz / SPEED_OF_LIGHT_MPS).log10()
}

pub fn path_loss_db(distance_m: f64, config: &SimConfig) -> f64 {
    let d = distance_m.max(REFERENCE_DISTANCE_M);
    reference_loss_db(config.channel_freq_ghz)
        + 10.0 * config.path_loss_exponent * (d / REFERENCE_DISTANCE_M).log10()
}

pub fn noise_floor_dbm(config: &SimConfig) -> f64 {
    THERMAL_NOISE_DBM_PER_HZ + 10.0 * (config.bandwidth_mhz * 1e6).log10() + config.noise_figure_db
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Disposition {
    Received,
    CollisionLoss,
    BelowSensitivity,
}

impl Disposition {
    pub fn as_str(self) -> &'static str {
        match self {
            Disposition::Received => "received",
            Disposition::CollisionLoss => "collision",
            Disposition::BelowSensitivity => "below_sensitivity",
        }
    }
}

/// Another frame on air while the frame of interest is being received.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interferer {
    pub start: SimTime,
    pub end: SimTime,
    /// Power at the receiver, mW. `f64::INFINITY` marks the receiver's own
    /// transmission (half duplex).
    pub power_mw: f64,
}

/// Radio parameters of a run in linear units.
#[derive(Clone, Copy, Debug)]
pub struct LinkBudget {
    tx_power_mw: f64,
    reference_gain: f64,
    half_exponent: f64,
    pub sensitivity_mw: f64,
    pub noise_mw: f64,
    pub sinr_threshold: f64,
}

impl LinkBudget {
    pub fn new(config: &SimConfig) -> Self {
        LinkBudget {
            tx_power_mw: dbm_to_mw(config.tx_power_dbm),
            reference_gain: dbm_to_mw(-reference_loss_db(config.channel_freq_ghz)),
            half_exponent: config.path_loss_exponent / 2.0,
            sensitivity_mw: dbm_to_mw(config.rx_sensitivity_dbm),
            noise_mw: dbm_to_mw(noise_floor_dbm(config)),
            sinr_threshold: dbm_to_mw(config.sinr_threshold_db),
        }
    }

    /// Received power in mW from the squared transmitter-receiver distance.
    pub fn rx_power_mw_sq(&self, distance_sq: f64) -> f64 {
        let d2 = distance_sq.max(REFERENCE_DISTANCE_M * REFERENCE_DISTANCE_M);
        let spread = if self.half_exponent == 1.5 {
            d2 * d2.sqrt()
        } else {
            d2.powf(self.half_exponent)
        };
        self.tx_power_mw * self.reference_gain / spread
    }

    pub fn rx_power_mw(&self, distance_m: f64) -> f64 {
        self.rx_power_mw_sq(distance_m * distance_m)
    }

    /// Above the sensitivity: the frame occupies the medium for carrier sense.
    pub fn audible(&self, power_mw: f64) -> bool {
        power_mw >= self.sensitivity_mw
    }

    /// Audible and strong enough to clear the SINR threshold against noise
    /// alone. Anything weaker is lost whatever else is on air.
    pub fn decodable(&self, power_mw: f64) -> bool {
        self.audible(power_mw) && power_mw / self.noise_mw >= self.sinr_threshold
    }
}

/// Largest total interference power present at any instant of `[start, end)`.
pub fn peak_interference_mw(start: SimTime, end: SimTime, interferers: &[Interferer]) -> f64 {
    match interferers.len() {
        0 => return 0.0,
        1 => {
            let i = &interferers[0];
            return if i.start < end && i.end > start { i.power_mw } else { 0.0 };
        }
        _ => {}
    }
    // (time, is_start, power): ends sort before starts at the same instant
    let mut edges: Vec<(SimTime, bool, f64)> = Vec::with_capacity(2 * interferers.len());
    for i in interferers {
        let s = i.start.max(start);
        let e = i.end.min(end);
        if s < e {
            edges.push((s, true, i.power_mw));
            edges.push((e, false, i.power_mw));
        }
    }
    edges.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut level = 0.0f64;
    let mut peak = 0.0f64;
    let mut active = 0usize;
    for (_, is_start, p) in edges {
        if is_start {
            active += 1;
            level += p;
            peak = peak.max(level);
        } else {
            active -= 1;
            // recompute from zero rather than drifting on subtraction
            level = if active == 0 { 0.0 } else { level - p };
        }
    }
    peak
}

/// Fate of a frame received at `signal_mw` over `[start, end)`.
pub fn reception_outcome(
    signal_mw: f64,
    start: SimTime,
    end: SimTime,
    interferers: &[Interferer],
    budget: &LinkBudget,
) -> Disposition {
    if !budget.decodable(signal_mw) {
        return Disposition::BelowSensitivity;
    }
    let sinr_ok = |interference: f64| signal_mw / (budget.noise_mw + interference) >= budget.sinr_threshold;
    // cheap bounds before the exact sweep: total power caps the peak from
    // above, the strongest single interferer from below
    let overlapping = || interferers.iter().filter(|i| i.start < end && i.end > start);
    let total: f64 = overlapping().map(|i| i.power_mw).sum();
    if sinr_ok(total) {
        return Disposition::Received;
    }
    let strongest = overlapping().map(|i| i.power_mw).fold(0.0, f64::max);
    if !sinr_ok(strongest) {
        return Disposition::CollisionLoss;
    }
    let interference = peak_interference_mw(start, end, interferers);
    if signal_mw / (budget.noise_mw + interference) >= budget.sinr_threshold {
        Disposition::Received
    } else {
        Disposition::CollisionLoss
    }
}
