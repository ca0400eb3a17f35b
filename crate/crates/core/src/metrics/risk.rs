//! Time-to-collision error induced by tracking error, and the risky-pair rule.
//!
//! With relative speed `s`, a position error `δpos` shifts the receiver's TTC
//! estimate by `δTTC = δpos / s`. A pair is risky when its time-averaged δTTC
//! exceeds reaction time plus braking time. Over- and under-estimates count
//! alike.

use super::abs_linear_area;
use super::trace::PairTrace;
use super::tracking::tracking_error_at;
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::mobility::Vehicle;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TtcValues {
    /// TTC the receiver computes from the sender's reported position.
    pub calculated_s: f64,
    /// TTC from the sender's true position.
    pub actual_s: f64,
    /// Tracking error over relative speed.
    pub delta_s: f64,
}

pub fn relative_speed(trace: &PairTrace, truth: &[Vehicle]) -> f64 {
    (truth[trace.sender_id as usize].speed - truth[trace.receiver_id as usize].speed).abs()
}

fn checked_relative_speed(trace: &PairTrace, truth: &[Vehicle], floor: f64) -> Result<f64> {
    let s = relative_speed(trace, truth);
    if s < floor {
        Err(Error::LowRelativeSpeed(s))
    } else {
        Ok(s)
    }
}

/// Calculated and actual TTC of the receiver with respect to the sender at `t`.
///
/// `|calculated − actual| = delta` whenever the reported and true sender
/// positions lie on the same side of the receiver.
pub fn ttc_values(t: f64, trace: &PairTrace, truth: &[Vehicle], floor: f64) -> Result<TtcValues> {
    let error = tracking_error_at(t, trace, truth)?;
    let s = checked_relative_speed(trace, truth, floor)?;
    let reported = trace.freshest_at(t).expect("inside interval").gen_pos_x;
    let receiver_x = truth[trace.receiver_id as usize].x_at(t);
    let sender_x = truth[trace.sender_id as usize].x_at(t);
    Ok(TtcValues {
        calculated_s: (receiver_x - reported).abs() / s,
        actual_s: (receiver_x - sender_x).abs() / s,
        delta_s: error / s,
    })
}

/// Time-average of `δTTC(t)` over the observation interval, integrated
/// directly rather than derived from the average tracking error.
pub fn avg_delta_ttc(trace: &PairTrace, truth: &[Vehicle], floor: f64) -> Result<f64> {
    trace.require_communicating()?;
    let s = checked_relative_speed(trace, truth, floor)?;
    let sender = &truth[trace.sender_id as usize];
    let mut area = 0.0;
    let mut held = &trace.receptions[0];
    for pair in trace.receptions.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        if cur.gen_time > held.gen_time {
            held = cur;
        }
        let t0 = cur.rx_time.as_secs();
        let t1 = next.rx_time.as_secs();
        let d0 = (sender.x_at(t0) - held.gen_pos_x) / s;
        let d1 = (sender.x_at(t1) - held.gen_pos_x) / s;
        area += abs_linear_area(d0, d1, t1 - t0);
    }
    Ok(area / (trace.t_end() - trace.t_start()))
}

pub fn classify_risky(avg_delta_ttc_s: f64, config: &SimConfig) -> bool {
    avg_delta_ttc_s > config.risk_threshold_s()
}
