//! Age of Information: `Δ(t) = t − g(t)` with `g(t)` the generation time of
//! the freshest beacon received by `t`. The age drops only on informative
//! receptions; an older beacon arriving late leaves the curve unchanged.

use super::pair::PairMetrics;
use super::trace::PairTrace;
use crate::error::Result;

/// Area under the age sawtooth over `[T_start, T_end]` divided by its length.
pub fn avg_aoi(trace: &PairTrace) -> Result<f64> {
    trace.require_communicating()?;
    let mut area = 0.0;
    let mut freshest = trace.receptions[0].gen_time;
    for pair in trace.receptions.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        freshest = freshest.max(cur.gen_time);
        let g = freshest.as_secs();
        let t0 = cur.rx_time.as_secs();
        let t1 = next.rx_time.as_secs();
        area += (t1 - t0) * (0.5 * (t0 + t1) - g);
    }
    Ok(area / (trace.t_end() - trace.t_start()))
}

/// Mean pair AoI over communicating pairs; `None` when there are none.
pub fn system_aoi(pairs: &[PairMetrics]) -> Option<f64> {
    if pairs.is_empty() {
        return None;
    }
    Some(pairs.iter().map(|p| p.avg_aoi_s).sum::<f64>() / pairs.len() as f64)
}
