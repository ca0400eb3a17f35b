use std::io::Write;
use std::path::Path;

use super::aoi::system_aoi;
use super::pair::{pair_metrics, PairAccumulator, PairMetrics};
use super::trace::group_traces;
use crate::config::SimConfig;
use crate::engine::{scenario, LossCounters, ReceptionSink, SimulationRun};
use crate::error::{Error, Result};
use crate::mobility::Vehicle;
use crate::phy::ReceptionRecord;
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Throughput {
    pub total_pps: f64,
    pub per_vehicle_pps: f64,
}

/// `K / τ` packets per second network-wide, and the same per vehicle.
pub fn throughput(received: u64, tau_s: f64, vehicle_count: usize) -> Throughput {
    assert!(tau_s > 0.0, "observation interval must be positive");
    let total_pps = received as f64 / tau_s;
    Throughput {
        total_pps,
        per_vehicle_pps: if vehicle_count == 0 {
            0.0
        } else {
            total_pps / vehicle_count as f64
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayLoss {
    pub mean_delay_s: Option<f64>,
    pub collision_losses: u64,
    pub queue_drops: u64,
}

/// Mean generation-to-reception delay over `receptions`, with the measured
/// loss counters passed through.
pub fn delay_and_loss(receptions: &[ReceptionRecord], counters: &LossCounters) -> DelayLoss {
    let mean_delay_s = (!receptions.is_empty())
        .then(|| receptions.iter().map(|r| r.delay_s()).sum::<f64>() / receptions.len() as f64);
    DelayLoss {
        mean_delay_s,
        collision_losses: counters.measured.collision_losses,
        queue_drops: counters.measured.queue_drops,
    }
}

/// Network-level aggregates of one run over the measured interval.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub vehicle_count: u64,
    /// Risky share of communicating, non-excluded pairs.
    pub risk_proportion: Option<f64>,
    pub system_aoi_s: Option<f64>,
    pub mean_tracking_error_m: Option<f64>,
    pub throughput_pps: f64,
    pub per_vehicle_throughput_pps: f64,
    pub mean_delay_s: Option<f64>,
    pub receptions: u64,
    pub queue_drops: u64,
    pub collision_losses: u64,
    pub communicating_pair_count: u64,
    pub excluded_pair_count: u64,
    pub risky_pair_count: u64,
}

impl RunMetrics {
    pub fn assemble(
        pairs: &[PairMetrics],
        counters: &LossCounters,
        delay: &DelayLoss,
        config: &SimConfig,
    ) -> Self {
        let excluded = pairs.iter().filter(|p| p.excluded_low_relspeed).count() as u64;
        let risky = pairs.iter().filter(|p| p.risky).count() as u64;
        let eligible = pairs.len() as u64 - excluded;
        let tput = throughput(
            counters.measured.received,
            config.measured_interval_s(),
            counters.vehicle_count as usize,
        );
        RunMetrics {
            vehicle_count: counters.vehicle_count,
            risk_proportion: (eligible > 0).then(|| risky as f64 / eligible as f64),
            system_aoi_s: system_aoi(pairs),
            mean_tracking_error_m: (!pairs.is_empty()).then(|| {
                pairs.iter().map(|p| p.avg_tracking_error_m).sum::<f64>() / pairs.len() as f64
            }),
            throughput_pps: tput.total_pps,
            per_vehicle_throughput_pps: tput.per_vehicle_pps,
            mean_delay_s: delay.mean_delay_s,
            receptions: counters.measured.received,
            queue_drops: delay.queue_drops,
            collision_losses: delay.collision_losses,
            communicating_pair_count: pairs.len() as u64,
            excluded_pair_count: excluded,
            risky_pair_count: risky,
        }
    }

    /// Batch evaluation of a finished run with its full reception log.
    pub fn evaluate(run: &SimulationRun, config: &SimConfig) -> Result<(Vec<PairMetrics>, RunMetrics)> {
        let from = config.warmup();
        let measured: Vec<ReceptionRecord> = run
            .receptions
            .iter()
            .filter(|r| r.rx_time >= from)
            .copied()
            .collect();
        let mut pairs = Vec::new();
        for trace in group_traces(&measured, from).values() {
            if trace.is_communicating() {
                pairs.push(pair_metrics(trace, &run.vehicles, config)?);
            }
        }
        let delay = delay_and_loss(&measured, &run.counters);
        let metrics = RunMetrics::assemble(&pairs, &run.counters, &delay, config);
        Ok((pairs, metrics))
    }
}

/// Streaming sink that folds receptions into per-pair accumulators as the
/// engine produces them.
#[derive(Debug)]
pub struct MetricsCollector {
    vehicles: Vec<Vehicle>,
    from: SimTime,
    pairs: Vec<PairAccumulator>,
    delay_sum: f64,
    count: u64,
}

impl MetricsCollector {
    pub fn new(config: &SimConfig) -> Self {
        let vehicles = scenario(config);
        let n = vehicles.len();
        MetricsCollector {
            vehicles,
            from: config.warmup(),
            pairs: vec![PairAccumulator::default(); n * n],
            delay_sum: 0.0,
            count: 0,
        }
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn finish(&self, counters: &LossCounters, config: &SimConfig) -> (Vec<PairMetrics>, RunMetrics) {
        let n = self.vehicles.len();
        let mut pairs = Vec::new();
        for s in 0..n {
            for r in 0..n {
                if let Some(p) = self.pairs[s * n + r].finish(&self.vehicles[s], &self.vehicles[r], config) {
                    pairs.push(p);
                }
            }
        }
        let delay = DelayLoss {
            mean_delay_s: (self.count > 0).then(|| self.delay_sum / self.count as f64),
            collision_losses: counters.measured.collision_losses,
            queue_drops: counters.measured.queue_drops,
        };
        let metrics = RunMetrics::assemble(&pairs, counters, &delay, config);
        (pairs, metrics)
    }
}

impl ReceptionSink for MetricsCollector {
    fn on_reception(&mut self, record: &ReceptionRecord) {
        if record.rx_time < self.from {
            return;
        }
        let n = self.vehicles.len();
        let (s, r) = (record.sender_id as usize, record.receiver_id as usize);
        self.pairs[s * n + r].push(record, &self.vehicles[s], &self.vehicles[r]);
        self.delay_sum += record.delay_s();
        self.count += 1;
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Pair-level dump, one row per communicating pair.
pub fn write_pairs_csv(pairs: &[PairMetrics], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(
            out,
            "sender,receiver,receptions,avg_tracking_error_m,avg_delta_ttc_s,avg_aoi_s,mean_delay_s,risky,excluded"
        )?;
        for p in pairs {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                p.sender_id,
                p.receiver_id,
                p.receptions,
                p.avg_tracking_error_m,
                opt(p.avg_delta_ttc_s),
                p.avg_aoi_s,
                p.mean_delay_s,
                p.risky,
                p.excluded_low_relspeed
            )?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}
