//! Position error of a receiver's view of a sender, along the direction of
//! travel only.

use super::abs_linear_area;
use super::trace::PairTrace;
use crate::error::Result;
use crate::mobility::Vehicle;

/// `|x_u(t) − x_reported|` at `t ∈ [T_start, T_end]`, where `x_reported` is
/// the position in the freshest beacon received by `t`.
pub fn tracking_error_at(t: f64, trace: &PairTrace, truth: &[Vehicle]) -> Result<f64> {
    trace.check_in_interval(t)?;
    let sender = &truth[trace.sender_id as usize];
    let snapshot = trace.freshest_at(t).expect("t >= T_start");
    Ok((sender.x_at(t) - snapshot.gen_pos_x).abs())
}

/// Time-average of the tracking error over the observation interval.
pub fn avg_tracking_error(trace: &PairTrace, truth: &[Vehicle]) -> Result<f64> {
    trace.require_communicating()?;
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
        let e0 = sender.x_at(t0) - held.gen_pos_x;
        let e1 = sender.x_at(t1) - held.gen_pos_x;
        area += abs_linear_area(e0, e1, t1 - t0);
    }
    Ok(area / (trace.t_end() - trace.t_start()))
}
