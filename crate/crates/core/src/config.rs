//! Simulation parameters and their plain-text `key = value` form.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::time::SimTime;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueueDiscipline {
    Fcfs,
    Lcfs,
}

impl fmt::Display for QueueDiscipline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueueDiscipline::Fcfs => "fcfs",
            QueueDiscipline::Lcfs => "lcfs",
        })
    }
}

impl FromStr for QueueDiscipline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fcfs" => Ok(QueueDiscipline::Fcfs),
            "lcfs" => Ok(QueueDiscipline::Lcfs),
            other => Err(Error::config(
                "queue_discipline",
                format!("expected fcfs or lcfs, got `{other}`"),
            )),
        }
    }
}

/// Every knob of a single simulation run.
///
/// Highway geometry, traffic, radio and MAC parameters, queueing, the
/// risk-model constants and run control. All fields are public and every
/// one of them can be set from a config file through [`SimConfig::set`].
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub road_length_m: f64,
    pub lanes: u32,
    pub lane_width_m: f64,
    pub density_veh_per_km: f64,
    pub speed_mean_mps: f64,
    /// Standard deviation of the Gaussian speed law.
    pub speed_spread_mps: f64,

    pub beacon_rate_hz: f64,
    /// Per-interval jitter as a fraction of the nominal beacon period.
    pub rate_jitter: f64,
    pub packet_size_bytes: u32,
    pub data_rate_mbps: f64,

    pub channel_freq_ghz: f64,
    pub bandwidth_mhz: f64,
    pub path_loss_exponent: f64,
    pub tx_power_dbm: f64,
    pub rx_sensitivity_dbm: f64,
    pub sinr_threshold_db: f64,
    pub noise_figure_db: f64,

    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    pub preamble_us: f64,
    pub cw_min: u32,

    pub queue_capacity: usize,
    pub queue_discipline: QueueDiscipline,

    pub t_react_s: f64,
    pub decel_mps2: f64,
    pub rel_speed_floor_mps: f64,

    pub sim_duration_s: f64,
    pub warmup_s: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            road_length_m: 1000.0,
            lanes: 3,
            lane_width_m: 4.0,
            density_veh_per_km: 50.0,
            speed_mean_mps: 25.0,
            speed_spread_mps: 3.0,
            beacon_rate_hz: 10.0,
            rate_jitter: 0.1,
            packet_size_bytes: 320,
            data_rate_mbps: 6.0,
            channel_freq_ghz: 5.9,
            bandwidth_mhz: 10.0,
            path_loss_exponent: 3.0,
            tx_power_dbm: 33.0,
            rx_sensitivity_dbm: -93.0,
            sinr_threshold_db: 8.0,
            noise_figure_db: 6.0,
            slot_us: 13.0,
            sifs_us: 32.0,
            difs_us: 58.0,
            preamble_us: 40.0,
            cw_min: 15,
            queue_capacity: 1,
            queue_discipline: QueueDiscipline::Fcfs,
            t_react_s: 1.0,
            decel_mps2: 4.6,
            rel_speed_floor_mps: 0.05,
            sim_duration_s: 60.0,
            warmup_s: 1.0,
            seed: 1,
        }
    }
}

/// Keys accepted by [`SimConfig::set`], in canonical output order.
pub const CONFIG_KEYS: &[&str] = &[
    "road_length_m",
    "lanes",
    "lane_width_m",
    "density_veh_per_km",
    "speed_mean_mps",
    "speed_spread_mps",
    "beacon_rate_hz",
    "rate_jitter",
    "packet_size_bytes",
    "data_rate_mbps",
    "channel_freq_ghz",
    "bandwidth_mhz",
    "path_loss_exponent",
    "tx_power_dbm",
    "rx_sensitivity_dbm",
    "sinr_threshold_db",
    "noise_figure_db",
    "slot_us",
    "sifs_us",
    "difs_us",
    "preamble_us",
    "cw_min",
    "queue_capacity",
    "queue_discipline",
    "t_react_s",
    "decel_mps2",
    "rel_speed_floor_mps",
    "sim_duration_s",
    "warmup_s",
    "seed",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{}`", value.trim())))
}

impl SimConfig {
    /// Number of vehicles on the road: `density × length / 1000`, rounded
    /// half away from zero (half up for the nonnegative values used here).
    pub fn vehicle_count(&self) -> usize {
        (self.density_veh_per_km * self.road_length_m / 1000.0).round() as usize
    }

    /// Time to stop from the mean speed at the common deceleration.
    pub fn t_brake_s(&self) -> f64 {
        self.speed_mean_mps / self.decel_mps2
    }

    /// δTTC above which a pair is classified risky.
    pub fn risk_threshold_s(&self) -> f64 {
        self.t_react_s + self.t_brake_s()
    }

    pub fn beacon_period_s(&self) -> f64 {
        1.0 / self.beacon_rate_hz
    }

    pub fn duration(&self) -> SimTime {
        SimTime::from_secs(self.sim_duration_s)
    }

    pub fn warmup(&self) -> SimTime {
        SimTime::from_secs(self.warmup_s)
    }

    /// Length of the measured interval, `sim_duration_s - warmup_s`.
    pub fn measured_interval_s(&self) -> f64 {
        self.sim_duration_s - self.warmup_s
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "road_length_m" => self.road_length_m = parse_num(key, v)?,
            "lanes" => self.lanes = parse_num(key, v)?,
            "lane_width_m" => self.lane_width_m = parse_num(key, v)?,
            "density_veh_per_km" => self.density_veh_per_km = parse_num(key, v)?,
            "speed_mean_mps" => self.speed_mean_mps = parse_num(key, v)?,
            "speed_spread_mps" => self.speed_spread_mps = parse_num(key, v)?,
            "beacon_rate_hz" => self.beacon_rate_hz = parse_num(key, v)?,
            "rate_jitter" => self.rate_jitter = parse_num(key, v)?,
            "packet_size_bytes" => self.packet_size_bytes = parse_num(key, v)?,
            "data_rate_mbps" => self.data_rate_mbps = parse_num(key, v)?,
            "channel_freq_ghz" => self.channel_freq_ghz = parse_num(key, v)?,
            "bandwidth_mhz" => self.bandwidth_mhz = parse_num(key, v)?,
            "path_loss_exponent" => self.path_loss_exponent = parse_num(key, v)?,
            "tx_power_dbm" => self.tx_power_dbm = parse_num(key, v)?,
            "rx_sensitivity_dbm" => self.rx_sensitivity_dbm = parse_num(key, v)?,
            "sinr_threshold_db" => self.sinr_threshold_db = parse_num(key, v)?,
            "noise_figure_db" => self.noise_figure_db = parse_num(key, v)?,
            "slot_us" => self.slot_us = parse_num(key, v)?,
            "sifs_us" => self.sifs_us = parse_num(key, v)?,
            "difs_us" => self.difs_us = parse_num(key, v)?,
            "preamble_us" => self.preamble_us = parse_num(key, v)?,
            "cw_min" => self.cw_min = parse_num(key, v)?,
            "queue_capacity" => self.queue_capacity = parse_num(key, v)?,
            "queue_discipline" => self.queue_discipline = v.parse()?,
            "t_react_s" => self.t_react_s = parse_num(key, v)?,
            "decel_mps2" => self.decel_mps2 = parse_num(key, v)?,
            "rel_speed_floor_mps" => self.rel_speed_floor_mps = parse_num(key, v)?,
            "sim_duration_s" => self.sim_duration_s = parse_num(key, v)?,
            "warmup_s" => self.warmup_s = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "road_length_m" => self.road_length_m.to_string(),
            "lanes" => self.lanes.to_string(),
            "lane_width_m" => self.lane_width_m.to_string(),
            "density_veh_per_km" => self.density_veh_per_km.to_string(),
            "speed_mean_mps" => self.speed_mean_mps.to_string(),
            "speed_spread_mps" => self.speed_spread_mps.to_string(),
            "beacon_rate_hz" => self.beacon_rate_hz.to_string(),
            "rate_jitter" => self.rate_jitter.to_string(),
            "packet_size_bytes" => self.packet_size_bytes.to_string(),
            "data_rate_mbps" => self.data_rate_mbps.to_string(),
            "channel_freq_ghz" => self.channel_freq_ghz.to_string(),
            "bandwidth_mhz" => self.bandwidth_mhz.to_string(),
            "path_loss_exponent" => self.path_loss_exponent.to_string(),
            "tx_power_dbm" => self.tx_power_dbm.to_string(),
            "rx_sensitivity_dbm" => self.rx_sensitivity_dbm.to_string(),
            "sinr_threshold_db" => self.sinr_threshold_db.to_string(),
            "noise_figure_db" => self.noise_figure_db.to_string(),
            "slot_us" => self.slot_us.to_string(),
            "sifs_us" => self.sifs_us.to_string(),
            "difs_us" => self.difs_us.to_string(),
            "preamble_us" => self.preamble_us.to_string(),
            "cw_min" => self.cw_min.to_string(),
            "queue_capacity" => self.queue_capacity.to_string(),
            "queue_discipline" => self.queue_discipline.to_string(),
            "t_react_s" => self.t_react_s.to_string(),
            "decel_mps2" => self.decel_mps2.to_string(),
            "rel_speed_floor_mps" => self.rel_speed_floor_mps.to_string(),
            "sim_duration_s" => self.sim_duration_s.to_string(),
            "warmup_s" => self.warmup_s.to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` lines on top of the defaults. Blank lines and
    /// `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (key, value, line) in key_values(text)? {
            cfg.set(&key, &value).map_err(|e| Error::Parse {
                line,
                reason: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SimConfig::parse(&text)
    }

    /// Canonical `key = value` rendering; parses back to an equal config.
    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.get(key).expect("canonical key"));
            out.push('\n');
        }
        out
    }

    /// Short stable digest of the canonical rendering, used to key sweep cells.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_kv_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("road_length_m", self.road_length_m),
            ("lane_width_m", self.lane_width_m),
            ("density_veh_per_km", self.density_veh_per_km),
            ("speed_mean_mps", self.speed_mean_mps),
            ("beacon_rate_hz", self.beacon_rate_hz),
            ("data_rate_mbps", self.data_rate_mbps),
            ("channel_freq_ghz", self.channel_freq_ghz),
            ("bandwidth_mhz", self.bandwidth_mhz),
            ("path_loss_exponent", self.path_loss_exponent),
            ("slot_us", self.slot_us),
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
            ("preamble_us", self.preamble_us),
            ("t_react_s", self.t_react_s),
            ("decel_mps2", self.decel_mps2),
            ("rel_speed_floor_mps", self.rel_speed_floor_mps),
            ("sim_duration_s", self.sim_duration_s),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {value}")));
            }
        }
        let nonnegative = [
            ("speed_spread_mps", self.speed_spread_mps),
            ("rate_jitter", self.rate_jitter),
            ("noise_figure_db", self.noise_figure_db),
            ("warmup_s", self.warmup_s),
        ];
        for (key, value) in nonnegative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::config(key, format!("must be nonnegative, got {value}")));
            }
        }
        for (key, value) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("rx_sensitivity_dbm", self.rx_sensitivity_dbm),
            ("sinr_threshold_db", self.sinr_threshold_db),
        ] {
            if !value.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        if self.lanes == 0 {
            return Err(Error::config("lanes", "must be at least 1"));
        }
        if self.queue_capacity == 0 {
            return Err(Error::config("queue_capacity", "must be at least 1"));
        }
        if self.warmup_s >= self.sim_duration_s {
            return Err(Error::config("warmup_s", "must be shorter than sim_duration_s"));
        }
        if self.vehicle_count() > u32::MAX as usize {
            return Err(Error::config("density_veh_per_km", "too many vehicles"));
        }
        Ok(())
    }
}

/// Splits `key = value` text into trimmed pairs with 1-based line numbers.
pub(crate) fn key_values(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            reason: format!("expected `key = value`, got `{line}`"),
        })?;
        out.push((key.trim().to_string(), value.trim().to_string(), idx + 1));
    }
    Ok(out)
}
