use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use beaconsim::experiment::{optimal_rate, run_sweep, write_figure_csv, SweepOptions};
use beaconsim::metrics::write_pairs_csv;
use beaconsim::mobility::write_scenario_csv;
use beaconsim::{
    run_with_sink, write_frame_log_csv, Metric, MetricsCollector, QueueDiscipline, RecordingSink,
    RunMetrics, SimConfig, SweepResult, SweepSpec,
};
use clap::{Parser, Subcommand, ValueEnum};

/// V2V safety-beacon simulator.
#[derive(Parser, Debug)]
#[command(name = "beaconsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one configuration and report its network metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Extra `key=value` overrides applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Directory for config, metrics, pairs and scenario files.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write every per-receiver frame outcome to `frames.csv`.
        #[arg(long, requires = "out")]
        frame_log: bool,
    },
    /// Run a rate × density × queue grid over several seeds.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Suppress per-run progress lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Grid-optimal beacon rate of one sweep slice.
    Optimal {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        metric: OptimalMetric,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        capacity: usize,
        #[arg(long, value_enum, default_value = "fcfs")]
        discipline: Discipline,
    },
    /// Long-format CSV of one metric over all sweep cells.
    Figure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        which: FigureMetric,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OptimalMetric {
    Risk,
    Aoi,
    Throughput,
}

impl From<OptimalMetric> for Metric {
    fn from(m: OptimalMetric) -> Self {
        match m {
            OptimalMetric::Risk => Metric::Risk,
            OptimalMetric::Aoi => Metric::Aoi,
            OptimalMetric::Throughput => Metric::Throughput,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FigureMetric {
    Risk,
    Aoi,
    Delay,
    Loss,
    Throughput,
}

impl From<FigureMetric> for Metric {
    fn from(m: FigureMetric) -> Self {
        match m {
            FigureMetric::Risk => Metric::Risk,
            FigureMetric::Aoi => Metric::Aoi,
            FigureMetric::Delay => Metric::Delay,
            FigureMetric::Loss => Metric::CollisionLoss,
            FigureMetric::Throughput => Metric::Throughput,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Discipline {
    Fcfs,
    Lcfs,
}

impl From<Discipline> for QueueDiscipline {
    fn from(d: Discipline) -> Self {
        match d {
            Discipline::Fcfs => QueueDiscipline::Fcfs,
            Discipline::Lcfs => QueueDiscipline::Lcfs,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".to_string())
}

fn metrics_text(m: &RunMetrics, balanced: bool) -> String {
    let lines = [
        ("vehicle_count", m.vehicle_count.to_string()),
        ("risk_proportion", opt(m.risk_proportion)),
        ("system_aoi_s", opt(m.system_aoi_s)),
        ("mean_tracking_error_m", opt(m.mean_tracking_error_m)),
        ("throughput_pps", m.throughput_pps.to_string()),
        ("per_vehicle_throughput_pps", m.per_vehicle_throughput_pps.to_string()),
        ("mean_delay_s", opt(m.mean_delay_s)),
        ("receptions", m.receptions.to_string()),
        ("queue_drops", m.queue_drops.to_string()),
        ("collision_losses", m.collision_losses.to_string()),
        ("communicating_pairs", m.communicating_pair_count.to_string()),
        ("excluded_pairs", m.excluded_pair_count.to_string()),
        ("risky_pairs", m.risky_pair_count.to_string()),
        ("counters_balance", balanced.to_string()),
    ];
    lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(
    config: &Path,
    seed: Option<u64>,
    overrides: &[String],
    out: Option<&Path>,
    frame_log: bool,
) -> Result<()> {
    let mut cfg = SimConfig::from_file(config)?;
    for kv in overrides {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{kv}`");
        };
        cfg.set(k, v)?;
    }
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    cfg.validate()?;

    let (pairs, metrics, balanced, frames, vehicles) = if frame_log {
        let mut sink = RecordingSink::with_frame_log();
        let summary = run_with_sink(&cfg, &mut sink)?;
        let run = beaconsim::SimulationRun {
            receptions: sink.receptions,
            counters: summary.counters,
            vehicles: summary.vehicles,
        };
        let (pairs, metrics) = RunMetrics::evaluate(&run, &cfg)?;
        (pairs, metrics, run.counters.balances(), sink.frame_log, run.vehicles)
    } else {
        let mut collector = MetricsCollector::new(&cfg);
        let summary = run_with_sink(&cfg, &mut collector)?;
        let (pairs, metrics) = collector.finish(&summary.counters, &cfg);
        (pairs, metrics, summary.counters.balances(), None, summary.vehicles)
    };

    let text = metrics_text(&metrics, balanced);
    print!("config_hash = {}\n{text}", cfg.config_hash());
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_text(&dir.join("config.txt"), &cfg.to_kv_string())?;
        write_text(&dir.join("metrics.txt"), &text)?;
        write_pairs_csv(&pairs, dir.join("pairs.csv"))?;
        write_scenario_csv(&vehicles, dir.join("scenario.csv"))?;
        if let Some(frames) = frames {
            write_frame_log_csv(&frames, dir.join("frames.csv"))?;
        }
    }
    Ok(())
}

fn cmd_sweep(spec: &Path, out: &Path, workers: Option<usize>, quiet: bool) -> Result<ExitCode> {
    let spec = SweepSpec::from_file(spec)?;
    let options = SweepOptions {
        workers,
        progress: !quiet,
    };
    let result = run_sweep(&spec, out, &options)?;
    let failed: Vec<_> = result.failures().collect();
    for row in &failed {
        eprintln!(
            "failed: density={} {} cap={} rate={} seed={}: {}",
            row.cell.density,
            row.cell.discipline,
            row.cell.capacity,
            row.cell.rate_hz,
            row.cell.seed,
            row.error.as_deref().unwrap_or("unknown error")
        );
    }
    println!(
        "{} runs, {} failed, results in {}",
        result.rows.len(),
        failed.len(),
        out.display()
    );
    Ok(if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_optimal(input: &Path, metric: Metric, density: f64, capacity: usize, discipline: QueueDiscipline) -> Result<()> {
    let result = SweepResult::load(input)?;
    let best = optimal_rate(&result, metric, density, capacity, discipline)?;
    println!("optimal_rate_hz = {}", best.rate_hz);
    println!("{} = {}", metric.column(), best.value);
    println!("rate_hz,mean,std,n_seeds");
    for (rate, stat) in &best.curve {
        println!("{rate},{},{},{}", stat.mean, stat.std, stat.n);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            seed,
            overrides,
            out,
            frame_log,
        } => cmd_run(&config, seed, &overrides, out.as_deref(), frame_log).map(|_| ExitCode::SUCCESS),
        Command::Sweep {
            spec,
            out,
            workers,
            quiet,
        } => cmd_sweep(&spec, &out, workers, quiet),
        Command::Optimal {
            input,
            metric,
            density,
            capacity,
            discipline,
        } => cmd_optimal(&input, metric.into(), density, capacity, discipline.into()).map(|_| ExitCode::SUCCESS),
        Command::Figure { input, which, out } => SweepResult::load(&input)
            .and_then(|r| write_figure_csv(&r, which.into(), &out))
            .map(|_| ExitCode::SUCCESS)
            .map_err(Into::into),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn figure_names_map_to_metrics() {
        assert_eq!(Metric::from(FigureMetric::Loss), Metric::CollisionLoss);
        assert_eq!(Metric::from(OptimalMetric::Throughput), Metric::Throughput);
    }

    #[test]
    fn missing_values_print_as_none() {
        let m = RunMetrics {
            vehicle_count: 1,
            risk_proportion: None,
            system_aoi_s: None,
            mean_tracking_error_m: None,
            throughput_pps: 0.0,
            per_vehicle_throughput_pps: 0.0,
            mean_delay_s: None,
            receptions: 0,
            queue_drops: 0,
            collision_losses: 0,
            communicating_pair_count: 0,
            excluded_pair_count: 0,
            risky_pair_count: 0,
        };
        let text = metrics_text(&m, true);
        assert!(text.contains("risk_proportion = none\n"));
        assert_eq!(text.lines().count(), 14);
    }
}
