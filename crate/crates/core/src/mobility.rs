//! Vehicle placement and constant-speed kinematics on a straight multi-lane
//! highway. Traffic flows in +x; lanes only set the lateral offset.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vehicle {
    pub id: u32,
    pub lane: u32,
    /// Longitudinal position at t = 0, meters.
    pub x0: f64,
    /// Lane-center lateral position, meters.
    pub y: f64,
    /// Constant forward speed, m/s. Always positive.
    pub speed: f64,
}

impl Vehicle {
    pub fn x_at(&self, t: f64) -> f64 {
        self.x0 + self.speed * t
    }

    /// Position at time `t` (seconds). The road is unbounded: vehicles keep
    /// going past its nominal end.
    pub fn position_at(&self, t: f64) -> (f64, f64) {
        (self.x_at(t), self.y)
    }
}

/// Euclidean distance between two vehicles at time `t`.
pub fn distance(u: &Vehicle, v: &Vehicle, t: f64) -> f64 {
    debug_assert_ne!(u.id, v.id);
    let dx = u.x_at(t) - v.x_at(t);
    let dy = u.y - v.y;
    dx.hypot(dy)
}

fn sample_speed<R: Rng + ?Sized>(normal: &Normal<f64>, rng: &mut R) -> f64 {
    loop {
        let s = normal.sample(rng);
        if s > 0.0 {
            return s;
        }
    }
}

/// Lays vehicles out on an even grid over `[0, road_length_m)`, assigning
/// lanes round-robin, and draws Gaussian speeds (non-positive draws are
/// resampled).
pub fn place_vehicles(config: &SimConfig, rng: &mut SimRng) -> Vec<Vehicle> {
    let n = config.vehicle_count();
    let spacing = config.road_length_m / n.max(1) as f64;
    let normal = Normal::new(config.speed_mean_mps, config.speed_spread_mps)
        .expect("validated speed parameters");
    (0..n)
        .map(|i| {
            let lane = (i % config.lanes as usize) as u32;
            Vehicle {
                id: i as u32,
                lane,
                x0: i as f64 * spacing,
                y: (lane as f64 + 0.5) * config.lane_width_m,
                speed: sample_speed(&normal, rng),
            }
        })
        .collect()
}

/// Writes `id,lane,x0,speed` rows for reproducibility audits.
pub fn write_scenario_csv(vehicles: &[Vehicle], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(path).map_err(|e| Error::io(path, e))?,
    );
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "id,lane,x0,speed")?;
        for v in vehicles {
            writeln!(out, "{},{},{},{}", v.id, v.lane, v.x0, v.speed)?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{build_rng, SCENARIO_STREAM};

    fn vehicle(id: u32, x0: f64, y: f64, speed: f64) -> Vehicle {
        Vehicle {
            id,
            lane: 0,
            x0,
            y,
            speed,
        }
    }

    #[test]
    fn linear_kinematics() {
        let v = vehicle(0, 0.0, 2.0, 25.0);
        assert_eq!(v.position_at(0.1), (2.5, 2.0));
        assert_eq!(v.position_at(0.0), (0.0, 2.0));
        let far = vehicle(1, 990.0, 2.0, 25.0);
        assert_eq!(far.x_at(10.0), 1240.0);
    }

    #[test]
    fn distances() {
        let a = vehicle(0, 0.0, 2.0, 25.0);
        let b = vehicle(1, 100.0, 2.0, 25.0);
        assert_eq!(distance(&a, &b, 0.0), 100.0);
        let c = vehicle(2, 3.0, 6.0, 25.0);
        assert!((distance(&a, &c, 0.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lane_split_for_fifty_vehicles() {
        let cfg = SimConfig::default();
        let vs = place_vehicles(&cfg, &mut build_rng(1, SCENARIO_STREAM));
        assert_eq!(vs.len(), 50);
        let per_lane: Vec<usize> = (0..3)
            .map(|l| vs.iter().filter(|v| v.lane == l).count())
            .collect();
        assert_eq!(per_lane, vec![17, 17, 16]);
        for v in &vs {
            assert!(v.x0 >= 0.0 && v.x0 < cfg.road_length_m);
            assert!(v.speed > 0.0);
            assert_eq!(v.y, (v.lane as f64 + 0.5) * 4.0);
        }
    }

    #[test]
    fn two_hundred_vehicles_at_high_density() {
        let cfg = SimConfig {
            density_veh_per_km: 200.0,
            ..SimConfig::default()
        };
        assert_eq!(place_vehicles(&cfg, &mut build_rng(3, SCENARIO_STREAM)).len(), 200);
    }

    #[test]
    fn speed_sample_mean_within_three_sigma() {
        let cfg = SimConfig {
            density_veh_per_km: 200.0,
            ..SimConfig::default()
        };
        for seed in 0..10 {
            let vs = place_vehicles(&cfg, &mut build_rng(seed, SCENARIO_STREAM));
            let n = vs.len() as f64;
            let mean = vs.iter().map(|v| v.speed).sum::<f64>() / n;
            assert!(
                (mean - 25.0).abs() < 3.0 * 3.0 / n.sqrt(),
                "seed {seed}: mean {mean}"
            );
        }
    }

    #[test]
    fn nonpositive_speeds_are_resampled() {
        let cfg = SimConfig {
            speed_mean_mps: 0.5,
            speed_spread_mps: 3.0,
            density_veh_per_km: 200.0,
            ..SimConfig::default()
        };
        let vs = place_vehicles(&cfg, &mut build_rng(11, SCENARIO_STREAM));
        assert!(vs.iter().all(|v| v.speed > 0.0));
    }
}
