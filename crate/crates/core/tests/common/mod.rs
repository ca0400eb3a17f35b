//! Reference computations shared by the oracle and acceptance tests. They
//! deliberately avoid the crate's metric code paths.

#![allow(dead_code)]

use beaconsim::metrics::PairTrace;
use beaconsim::{ReceptionRecord, SimTime, Vehicle};
use rand::Rng;

pub fn vehicle(id: u32, x0: f64, speed: f64) -> Vehicle {
    Vehicle {
        id,
        lane: 0,
        x0,
        y: 2.0,
        speed,
    }
}

pub fn record(sender: &Vehicle, receiver_id: u32, seq: u32, gen_s: f64, rx_s: f64) -> ReceptionRecord {
    let gen_time = SimTime::from_secs(gen_s);
    ReceptionRecord {
        sender_id: sender.id,
        receiver_id,
        seq,
        gen_time,
        rx_time: SimTime::from_secs(rx_s),
        gen_pos_x: sender.x_at(gen_time.as_secs()),
        sender_speed: sender.speed,
    }
}

/// Receptions at `k·P + d` of beacons generated at `k·P`.
pub fn periodic_trace(period: f64, delay: f64, count: u32) -> (PairTrace, Vec<Vehicle>) {
    let truth = vec![vehicle(0, 0.0, 25.0), vehicle(1, 50.0, 20.0)];
    let recs = (0..count)
        .map(|k| {
            let g = k as f64 * period;
            record(&truth[0], 1, k, g, g + delay)
        })
        .collect();
    (PairTrace::new(0, 1, recs), truth)
}

/// A sender/receiver pair with jittered reception gaps, random delays and
/// occasional out-of-order (stale) deliveries.
pub fn random_trace<R: Rng>(rng: &mut R) -> (PairTrace, Vec<Vehicle>) {
    let truth = vec![
        vehicle(0, rng.random_range(0.0..1000.0), rng.random_range(15.0..35.0)),
        vehicle(1, rng.random_range(0.0..1000.0), rng.random_range(15.0..35.0)),
    ];
    let n = rng.random_range(2..40);
    let mut rx = rng.random_range(1.0..2.0);
    let mut recs = Vec::with_capacity(n);
    let mut last_gen: f64 = 0.0;
    for seq in 0..n {
        rx += rng.random_range(0.002..0.25);
        let gen = if seq > 0 && rng.random_bool(0.15) {
            // stale: older than the newest already delivered
            (last_gen - rng.random_range(0.0..0.05)).max(0.0)
        } else {
            rx - rng.random_range(0.0005..0.2)
        };
        last_gen = last_gen.max(gen);
        recs.push(record(&truth[0], 1, seq as u32, gen, rx));
    }
    (PairTrace::new(0, 1, recs), truth)
}

/// Freshest (generation time, reported x) known at each step midpoint.
fn midpoint_walk(trace: &PairTrace, dt: f64, mut f: impl FnMut(f64, f64, f64) -> f64) -> f64 {
    let recs = &trace.receptions;
    let t0 = recs.first().unwrap().rx_time.as_secs();
    let t1 = recs.last().unwrap().rx_time.as_secs();
    let mut idx = 0;
    let mut best_gen = f64::NEG_INFINITY;
    let mut best_x = 0.0;
    let mut sum = 0.0;
    let mut a = t0;
    while a < t1 {
        let b = (a + dt).min(t1);
        let mid = 0.5 * (a + b);
        while idx < recs.len() && recs[idx].rx_time.as_secs() <= mid {
            let g = recs[idx].gen_time.as_secs();
            if g > best_gen {
                best_gen = g;
                best_x = recs[idx].gen_pos_x;
            }
            idx += 1;
        }
        sum += f(mid, best_gen, best_x) * (b - a);
        a = b;
    }
    sum / (t1 - t0)
}

pub fn riemann_tracking_error(trace: &PairTrace, truth: &[Vehicle], dt: f64) -> f64 {
    let sender = truth[trace.sender_id as usize];
    midpoint_walk(trace, dt, |t, _, x| (sender.x0 + sender.speed * t - x).abs())
}

pub fn riemann_aoi(trace: &PairTrace, dt: f64) -> f64 {
    midpoint_walk(trace, dt, |t, g, _| t - g)
}

/// Trapezoids under the age sawtooth between consecutive receptions.
pub fn trapezoid_aoi(trace: &PairTrace) -> f64 {
    let recs = &trace.receptions;
    let mut g = f64::NEG_INFINITY;
    let mut area = 0.0;
    for w in recs.windows(2) {
        g = g.max(w[0].gen_time.as_secs());
        let (a, b) = (w[0].rx_time.as_secs(), w[1].rx_time.as_secs());
        area += 0.5 * ((a - g) + (b - g)) * (b - a);
    }
    let span = recs.last().unwrap().rx_time.as_secs() - recs[0].rx_time.as_secs();
    area / span
}

/// Runs `config` and checks `avg_δTTC · s_uv` against the average tracking
/// error on every pair with a δTTC. Returns (pairs checked, worst relative gap).
pub fn ttc_identity(config: &beaconsim::SimConfig) -> (usize, f64) {
    let run = beaconsim::run_simulation(config).unwrap();
    let (pairs, _) = beaconsim::RunMetrics::evaluate(&run, config).unwrap();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for p in &pairs {
        if let Some(d) = p.avg_delta_ttc_s {
            checked += 1;
            let gap = (d * p.relative_speed_mps - p.avg_tracking_error_m).abs();
            worst = worst.max(gap / p.avg_tracking_error_m);
        }
    }
    (checked, worst)
}

/// Small engine runs spanning both disciplines, sparse and congested.
pub fn identity_configs() -> Vec<beaconsim::SimConfig> {
    use beaconsim::{QueueDiscipline, SimConfig};
    let base = SimConfig {
        sim_duration_s: 6.0,
        ..SimConfig::default()
    };
    vec![
        SimConfig {
            beacon_rate_hz: 10.0,
            ..base.clone()
        },
        SimConfig {
            beacon_rate_hz: 50.0,
            seed: 2,
            ..base.clone()
        },
        SimConfig {
            density_veh_per_km: 200.0,
            beacon_rate_hz: 25.0,
            queue_capacity: 5,
            sim_duration_s: 3.0,
            ..base.clone()
        },
        SimConfig {
            density_veh_per_km: 120.0,
            beacon_rate_hz: 80.0,
            queue_capacity: 10,
            queue_discipline: QueueDiscipline::Lcfs,
            sim_duration_s: 3.0,
            seed: 3,
            ..base
        },
    ]
}
