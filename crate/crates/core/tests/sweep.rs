use std::fs;
use std::path::Path;

use beaconsim::experiment::{
    emit_figure_data, optimal_rate, run_sweep, Metric, SweepOptions, SweepResult, SweepSpec,
    RUNS_FILE, SUMMARY_FILE,
};
use beaconsim::QueueDiscipline;

const SPEC: &str = "\
rates_hz = 5, 20
densities = 50
queue_capacities = 1, 10
disciplines = fcfs
seeds = 1, 2
sim_duration_s = 2
warmup_s = 0.5
";

fn quiet(workers: usize) -> SweepOptions {
    SweepOptions {
        workers: Some(workers),
        progress: false,
    }
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn product_count_and_canonical_files() {
    let spec = SweepSpec::parse(SPEC).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&spec, dir.path(), &quiet(1)).unwrap();
    assert_eq!(result.rows.len(), 2 * 2 * 2);
    assert_eq!(result.executed, 8);
    assert_eq!(result.summary.len(), 4);
    assert_eq!(result.failures().count(), 0);
    assert!(result.rows.iter().all(|r| r.counters_balance));
    assert!(!dir.path().join("runs.partial.csv").exists());

    // aggregation is reproducible from the raw rows on disk
    let loaded = SweepResult::load(dir.path()).unwrap();
    assert_eq!(loaded.rows, result.rows);
    assert_eq!(loaded.summary, result.summary);
}

#[test]
fn rerun_is_idempotent_and_does_no_work() {
    let spec = SweepSpec::parse(SPEC).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_sweep(&spec, dir.path(), &quiet(1)).unwrap();
    let (runs, summary) = (read(dir.path(), RUNS_FILE), read(dir.path(), SUMMARY_FILE));
    let again = run_sweep(&spec, dir.path(), &quiet(1)).unwrap();
    assert_eq!(again.executed, 0);
    assert_eq!(read(dir.path(), RUNS_FILE), runs);
    assert_eq!(read(dir.path(), SUMMARY_FILE), summary);
}

#[test]
fn output_independent_of_workers_and_execution_order() {
    let spec = SweepSpec::parse(SPEC).unwrap();
    let serial = tempfile::tempdir().unwrap();
    run_sweep(&spec, serial.path(), &quiet(1)).unwrap();

    let parallel = tempfile::tempdir().unwrap();
    run_sweep(&spec, parallel.path(), &quiet(3)).unwrap();
    assert_eq!(read(parallel.path(), RUNS_FILE), read(serial.path(), RUNS_FILE));
    assert_eq!(read(parallel.path(), SUMMARY_FILE), read(serial.path(), SUMMARY_FILE));

    // seed 2 and the high rate first, then the rest on resume
    let staged = tempfile::tempdir().unwrap();
    let first = SweepSpec {
        seeds: vec![2],
        rates_hz: vec![20.0],
        ..spec.clone()
    };
    run_sweep(&first, staged.path(), &quiet(2)).unwrap();
    let rest = run_sweep(&spec, staged.path(), &quiet(2)).unwrap();
    assert_eq!(rest.executed, 6);
    assert_eq!(read(staged.path(), RUNS_FILE), read(serial.path(), RUNS_FILE));
    assert_eq!(read(staged.path(), SUMMARY_FILE), read(serial.path(), SUMMARY_FILE));
}

#[test]
fn interrupted_sweep_resumes_from_partial_log() {
    let spec = SweepSpec::parse(SPEC).unwrap();
    let reference = tempfile::tempdir().unwrap();
    run_sweep(&spec, reference.path(), &quiet(1)).unwrap();
    let full = read(reference.path(), RUNS_FILE);

    // header + three finished runs + a torn line, as a crash would leave
    let dir = tempfile::tempdir().unwrap();
    let mut lines: Vec<&str> = full.lines().take(4).collect();
    lines.push("deadbeef,50,fcfs,1,");
    fs::write(dir.path().join("runs.partial.csv"), lines.join("\n")).unwrap();

    let resumed = run_sweep(&spec, dir.path(), &quiet(1)).unwrap();
    assert_eq!(resumed.executed, 5);
    assert_eq!(read(dir.path(), RUNS_FILE), full);
}

#[test]
fn optimum_and_figure_from_a_sweep() {
    let spec = SweepSpec::parse(SPEC).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let result = run_sweep(&spec, dir.path(), &quiet(1)).unwrap();
    let best = optimal_rate(&result, Metric::Aoi, 50.0, 10, QueueDiscipline::Fcfs).unwrap();
    assert_eq!(best.curve.len(), 2);
    // sparse network: faster beaconing is fresher
    assert_eq!(best.rate_hz, 20.0);
    assert!(optimal_rate(&result, Metric::Aoi, 200.0, 10, QueueDiscipline::Fcfs).is_err());

    let mut buf = Vec::new();
    emit_figure_data(&result, Metric::Throughput, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("density,capacity,discipline,rate_hz,metric_mean,metric_std,n_seeds")
    );
    assert_eq!(lines.count(), 4);
}
