use std::path::Path;

use crate::config::{key_values, QueueDiscipline, SimConfig};
use crate::error::{Error, Result};

/// One simulation of the sweep grid, before seeding is applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub density: f64,
    pub discipline: QueueDiscipline,
    pub capacity: usize,
    pub rate_hz: f64,
    pub seed: u64,
}

/// Grid of runs: every combination of the listed axes, each under every seed,
/// on top of a shared base configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub rates_hz: Vec<f64>,
    pub densities: Vec<f64>,
    pub queue_capacities: Vec<usize>,
    pub disciplines: Vec<QueueDiscipline>,
    pub seeds: Vec<u64>,
    pub base: SimConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            rates_hz: vec![1.0, 5.0, 10.0, 15.0, 20.0, 25.0, 35.0, 50.0, 65.0, 80.0],
            densities: vec![50.0, 200.0],
            queue_capacities: vec![1, 5, 10, 100],
            disciplines: vec![QueueDiscipline::Fcfs],
            seeds: (1..=10).collect(),
            base: SimConfig::default(),
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::config(key, format!("cannot parse list item `{s}`")))
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(key, "list is empty"));
    }
    Ok(items)
}

impl SweepSpec {
    /// Parses a sweep file. Axis keys take comma-separated lists;
    /// `seed_count = N` is shorthand for `seeds = 1,...,N`. Any other key
    /// overrides the base simulation config.
    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = SweepSpec::default();
        for (key, value, line) in key_values(text)? {
            let at = |e: Error| Error::Parse {
                line,
                reason: e.to_string(),
            };
            match key.as_str() {
                "rates_hz" => spec.rates_hz = parse_list(&key, &value).map_err(at)?,
                "densities" => spec.densities = parse_list(&key, &value).map_err(at)?,
                "queue_capacities" => {
                    spec.queue_capacities = parse_list(&key, &value).map_err(at)?
                }
                "disciplines" => spec.disciplines = parse_list(&key, &value).map_err(at)?,
                "seeds" => spec.seeds = parse_list(&key, &value).map_err(at)?,
                "seed_count" => {
                    let n: u64 = value
                        .parse()
                        .map_err(|_| at(Error::config(&key, "expected a count")))?;
                    spec.seeds = (1..=n).collect();
                }
                _ => spec.base.set(&key, &value).map_err(at)?,
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SweepSpec::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let axes = [
            ("rates_hz", self.rates_hz.len()),
            ("densities", self.densities.len()),
            ("queue_capacities", self.queue_capacities.len()),
            ("disciplines", self.disciplines.len()),
            ("seeds", self.seeds.len()),
        ];
        for (key, len) in axes {
            if len == 0 {
                return Err(Error::config(key, "list is empty"));
            }
        }
        self.base.validate()?;
        for cell in self.cells() {
            self.config_for(&cell).validate()?;
        }
        Ok(())
    }

    /// All runs in canonical order: density, discipline, capacity, rate,
    /// seed, each axis in the order listed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.run_count());
        for &density in &self.densities {
            for &discipline in &self.disciplines {
                for &capacity in &self.queue_capacities {
                    for &rate_hz in &self.rates_hz {
                        for &seed in &self.seeds {
                            out.push(Cell {
                                density,
                                discipline,
                                capacity,
                                rate_hz,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn run_count(&self) -> usize {
        self.rates_hz.len()
            * self.densities.len()
            * self.queue_capacities.len()
            * self.disciplines.len()
            * self.seeds.len()
    }

    pub fn config_for(&self, cell: &Cell) -> SimConfig {
        SimConfig {
            density_veh_per_km: cell.density,
            queue_discipline: cell.discipline,
            queue_capacity: cell.capacity,
            beacon_rate_hz: cell.rate_hz,
            seed: cell.seed,
            ..self.base.clone()
        }
    }
}
