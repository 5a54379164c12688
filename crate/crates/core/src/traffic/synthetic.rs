//! Seeded synthetic traffic: diurnal sinusoid per grid, static hotspot bumps,
//! a shared mean-reverting pattern on designated distant grid pairs, and
//! truncated Gaussian noise. A stand-in for city-scale measurements.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{TrafficFrame, TrafficSeries};
use crate::error::{Error, Result};
use crate::seed;
use crate::Real;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hotspot {
    pub x: f64,
    pub y: f64,
    pub intensity: f64,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticPair {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub nx: usize,
    pub ny: usize,
    pub days: u32,
    #[serde(default = "default_slots_per_day")]
    pub slots_per_day: u32,
    pub base: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub hotspots: Vec<Hotspot>,
    /// Distant grid pairs that share a latent traffic pattern.
    #[serde(default)]
    pub semantic_pairs: Vec<SemanticPair>,
    /// Stationary standard deviation of the shared pair pattern.
    #[serde(default)]
    pub pair_amplitude: f64,
    /// One-slot persistence of the shared pattern (AR(1) coefficient).
    #[serde(default = "default_pair_rho")]
    pub pair_rho: f64,
    pub noise_std: f64,
    pub seed: u64,
}

fn default_slots_per_day() -> u32 {
    48
}

fn default_pair_rho() -> f64 {
    0.9
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Config("synthetic grid dims must be positive".into()));
        }
        if self.days == 0 || self.slots_per_day == 0 {
            return Err(Error::Config("synthetic series must cover at least one slot".into()));
        }
        if self.amplitude >= self.base && self.amplitude > 0.0 {
            return Err(Error::Config(format!(
                "diurnal amplitude {} must stay below the base level {} to keep traffic non-negative",
                self.amplitude, self.base
            )));
        }
        if !(0.0..1.0).contains(&self.pair_rho) {
            return Err(Error::Config(format!(
                "pair_rho {} must lie in [0, 1)",
                self.pair_rho
            )));
        }
        for p in &self.semantic_pairs {
            for (x, y) in [p.a, p.b] {
                if x >= self.nx || y >= self.ny {
                    return Err(Error::Config(format!(
                        "semantic pair grid ({x},{y}) outside the {}x{} grid",
                        self.nx, self.ny
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Generate the full series. A pure function of the config: the same seed
/// yields a bitwise-identical series.
pub fn gen_synthetic(config: &SyntheticConfig) -> Result<TrafficSeries> {
    config.validate()?;
    let mut rng = seed::rng(config.seed, "synthetic-traffic");
    use rand::Rng;

    let n_slots = (config.days * config.slots_per_day) as usize;
    let (nx, ny) = (config.nx, config.ny);

    // per-grid diurnal phase, drawn once
    let phases = Array2::from_shape_fn((nx, ny), |_| rng.random_range(0.0..std::f64::consts::TAU));

    // static hotspot field
    let mut hotspot = Array2::<Real>::zeros((nx, ny));
    for h in &config.hotspots {
        for ((x, y), v) in hotspot.indexed_iter_mut() {
            let dx = x as f64 + 0.5 - h.x;
            let dy = y as f64 + 0.5 - h.y;
            *v += h.intensity * (-(dx * dx + dy * dy) / (2.0 * h.radius * h.radius)).exp();
        }
    }

    // shared AR(1) pattern per semantic pair, stationary std = pair_amplitude
    let rho = config.pair_rho;
    let innovation = config.pair_amplitude * (1.0 - rho * rho).sqrt();
    let mut pair_levels: Vec<f64> = (0..config.semantic_pairs.len())
        .map(|_| config.pair_amplitude * trunc_normal(&mut rng))
        .collect();

    let omega = std::f64::consts::TAU / config.slots_per_day as f64;
    let mut frames = Vec::with_capacity(n_slots);
    for slot in 0..n_slots {
        let mut values = Array2::<Real>::zeros((nx, ny));
        for ((x, y), v) in values.indexed_iter_mut() {
            *v = config.base
                + config.amplitude * (omega * slot as f64 + phases[[x, y]]).sin()
                + hotspot[[x, y]];
        }
        for (p, level) in config.semantic_pairs.iter().zip(&pair_levels) {
            values[[p.a.0, p.a.1]] += *level;
            values[[p.b.0, p.b.1]] += *level;
        }
        if config.noise_std > 0.0 {
            for v in values.iter_mut() {
                *v += config.noise_std * trunc_normal(&mut rng);
            }
        }
        values.mapv_inplace(|v| v.max(0.0));
        frames.push(TrafficFrame::new(values, slot as u64)?);

        for level in pair_levels.iter_mut() {
            *level = rho * *level + innovation * trunc_normal(&mut rng);
        }
    }

    TrafficSeries::new(frames, (24 * 60) / config.slots_per_day)
}

/// Standard normal clamped to +-3; symmetric, so still zero-mean.
fn trunc_normal(rng: &mut impl rand::Rng) -> f64 {
    let v: f64 = deepbsc_nn::Scalar::std_normal(rng);
    v.clamp(-3.0, 3.0)
}
