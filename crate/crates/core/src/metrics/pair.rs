use super::abs_linear_area;
use super::aoi::avg_aoi;
use super::risk::{avg_delta_ttc, classify_risky, relative_speed};
use super::trace::PairTrace;
use super::tracking::avg_tracking_error;
use crate::config::SimConfig;
use crate::error::Result;
use crate::mobility::Vehicle;
use crate::phy::ReceptionRecord;
use crate::time::SimTime;

/// Per directed pair summary over its observation interval.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMetrics {
    pub sender_id: u32,
    pub receiver_id: u32,
    pub receptions: u64,
    pub avg_tracking_error_m: f64,
    /// `None` when the pair is excluded for low relative speed.
    pub avg_delta_ttc_s: Option<f64>,
    pub avg_aoi_s: f64,
    pub mean_delay_s: f64,
    pub relative_speed_mps: f64,
    pub risky: bool,
    pub excluded_low_relspeed: bool,
}

/// Batch computation from a complete trace.
pub fn pair_metrics(trace: &PairTrace, truth: &[Vehicle], config: &SimConfig) -> Result<PairMetrics> {
    let avg_tracking_error_m = avg_tracking_error(trace, truth)?;
    let avg_aoi_s = avg_aoi(trace)?;
    let s = relative_speed(trace, truth);
    let excluded = s < config.rel_speed_floor_mps;
    let avg_delta_ttc_s = if excluded {
        None
    } else {
        Some(avg_delta_ttc(trace, truth, config.rel_speed_floor_mps)?)
    };
    let delays: f64 = trace.receptions.iter().map(|r| r.delay_s()).sum();
    Ok(PairMetrics {
        sender_id: trace.sender_id,
        receiver_id: trace.receiver_id,
        receptions: trace.receptions.len() as u64,
        avg_tracking_error_m,
        avg_delta_ttc_s,
        avg_aoi_s,
        mean_delay_s: delays / trace.receptions.len() as f64,
        relative_speed_mps: s,
        risky: avg_delta_ttc_s.is_some_and(|d| classify_risky(d, config)),
        excluded_low_relspeed: excluded,
    })
}

/// Incremental form of [`pair_metrics`] for receptions arriving in time
/// order, so that long runs need not keep their reception logs.
#[derive(Clone, Copy, Debug, Default)]
pub struct PairAccumulator {
    count: u64,
    first_rx: f64,
    last_rx: f64,
    held_gen: SimTime,
    held_x: f64,
    error_area: f64,
    delta_ttc_area: f64,
    aoi_area: f64,
    delay_sum: f64,
}

impl PairAccumulator {
    pub fn push(&mut self, record: &ReceptionRecord, sender: &Vehicle, receiver: &Vehicle) {
        let t = record.rx_time.as_secs();
        if self.count > 0 {
            debug_assert!(t >= self.last_rx);
            let t0 = self.last_rx;
            let len = t - t0;
            let e0 = sender.x_at(t0) - self.held_x;
            let e1 = sender.x_at(t) - self.held_x;
            self.error_area += abs_linear_area(e0, e1, len);
            let s = (sender.speed - receiver.speed).abs();
            if s > 0.0 {
                self.delta_ttc_area += abs_linear_area(e0 / s, e1 / s, len);
            }
            self.aoi_area += len * (0.5 * (t0 + t) - self.held_gen.as_secs());
        } else {
            self.first_rx = t;
        }
        if self.count == 0 || record.gen_time > self.held_gen {
            self.held_gen = record.gen_time;
            self.held_x = record.gen_pos_x;
        }
        self.delay_sum += record.delay_s();
        self.last_rx = t;
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_communicating(&self) -> bool {
        self.count >= 2 && self.last_rx > self.first_rx
    }

    pub fn finish(
        &self,
        sender: &Vehicle,
        receiver: &Vehicle,
        config: &SimConfig,
    ) -> Option<PairMetrics> {
        if !self.is_communicating() {
            return None;
        }
        let span = self.last_rx - self.first_rx;
        let s = (sender.speed - receiver.speed).abs();
        let excluded = s < config.rel_speed_floor_mps;
        let avg_delta_ttc_s = (!excluded).then(|| self.delta_ttc_area / span);
        Some(PairMetrics {
            sender_id: sender.id,
            receiver_id: receiver.id,
            receptions: self.count,
            avg_tracking_error_m: self.error_area / span,
            avg_delta_ttc_s,
            avg_aoi_s: self.aoi_area / span,
            mean_delay_s: self.delay_sum / self.count as f64,
            relative_speed_mps: s,
            risky: avg_delta_ttc_s.is_some_and(|d| classify_risky(d, config)),
            excluded_low_relspeed: excluded,
        })
    }
}
