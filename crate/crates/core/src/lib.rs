//! Discrete-event simulation of periodic V2V safety beaconing on a highway.
//!
//! Vehicles drive at constant speeds on a multi-lane road and broadcast
//! position beacons over a shared channel with CSMA/CA access and
//! SINR-threshold reception. From the resulting reception logs the crate
//! computes per-pair tracking error, TTC error and collision risk, Age of
//! Information, delay, loss and throughput, and sweeps those over beacon
//! rates, densities and queue configurations.
//!
//! ```no_run
//! use beaconsim::{run_simulation, RunMetrics, SimConfig};
//!
//! let config = SimConfig { beacon_rate_hz: 25.0, ..SimConfig::default() };
//! let run = run_simulation(&config).unwrap();
//! let (_pairs, metrics) = RunMetrics::evaluate(&run, &config).unwrap();
//! println!("risk = {:?}, AoI = {:?}", metrics.risk_proportion, metrics.system_aoi_s);
//! ```

pub mod config;
pub mod engine;
pub mod error;
pub mod event;
pub mod experiment;
pub mod metrics;
pub mod mobility;
pub mod phy;
pub mod rng;
pub mod time;

pub use config::{QueueDiscipline, SimConfig};
pub use engine::{
    run_simulation, run_with_sink, run_with_transmitters, scenario, write_frame_log_csv, Counts, FrameLogRow,
    LossCounters, ReceptionSink, RecordingSink, SimSummary, SimulationRun,
};
pub use experiment::{Metric, SweepResult, SweepSpec};
pub use error::{Error, Result};
pub use metrics::{MetricsCollector, PairMetrics, RunMetrics};
pub use mobility::Vehicle;
pub use phy::{Beacon, Disposition, ReceptionRecord};
pub use time::SimTime;
