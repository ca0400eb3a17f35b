//! Tracking error, TTC error and collision risk, Age of Information, delay,
//! loss and throughput, computed from reception logs and ground truth.
//!
//! Time averages are exact: between consecutive receptions every integrand
//! is linear (or the absolute value of a linear function) in time, so each
//! segment is integrated in closed form.

pub mod aoi;
pub mod pair;
pub mod risk;
pub mod run;
pub mod trace;
pub mod tracking;

pub use aoi::{avg_aoi, system_aoi};
pub use pair::{pair_metrics, PairAccumulator, PairMetrics};
pub use risk::{avg_delta_ttc, classify_risky, ttc_values, TtcValues};
pub use run::{
    delay_and_loss, throughput, write_pairs_csv, DelayLoss, MetricsCollector, RunMetrics,
    Throughput,
};
pub use trace::{group_traces, PairTrace};
pub use tracking::{avg_tracking_error, tracking_error_at};

/// `∫ |v(t)| dt` over a segment of length `len` on which `v` is linear with
/// endpoint values `v0` and `v1`; splits at the zero crossing if any.
pub(crate) fn abs_linear_area(v0: f64, v1: f64, len: f64) -> f64 {
    if len <= 0.0 {
        return 0.0;
    }
    if (v0 >= 0.0) == (v1 >= 0.0) || v0 == 0.0 || v1 == 0.0 {
        0.5 * (v0.abs() + v1.abs()) * len
    } else {
        0.5 * len * (v0 * v0 + v1 * v1) / (v0.abs() + v1.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::abs_linear_area;

    #[test]
    fn abs_area_cases() {
        assert_eq!(abs_linear_area(2.0, 2.0, 3.0), 6.0);
        assert_eq!(abs_linear_area(0.0, 5.0, 1.0), 2.5);
        assert_eq!(abs_linear_area(-4.0, -2.0, 1.0), 3.0);
        // symmetric crossing: two triangles of height 1 and half-width 1
        assert_eq!(abs_linear_area(-1.0, 1.0, 2.0), 1.0);
        assert_eq!(abs_linear_area(1.0, 1.0, 0.0), 0.0);
    }
}
