//! Training samples, dataset splitting and the synthetic dataset builder.

use std::io::Read;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnnError;
use crate::measurement::{self, ResistivitySample};

pub const INPUT_DIM: usize = 4;
/// Index of the resistivity input.
pub const RESISTIVITY: usize = 3;

/// Inputs are `(moisture %, pH, temperature °C, resistivity kΩ·m)`; the
/// target is salinity %.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub inputs: [f64; INPUT_DIM],
    pub target: f64,
}

impl Sample {
    pub fn new(moisture_pct: f64, ph: f64, temperature_c: f64, resistivity_kohm_m: f64, salinity_pct: f64) -> Self {
        Self { inputs: [moisture_pct, ph, temperature_c, resistivity_kohm_m], target: salinity_pct }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self { train: 0.70, validation: 0.15, test: 0.15 }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<(), AnnError> {
        let all = [self.train, self.validation, self.test];
        if all.iter().any(|f| !(*f > 0.0)) || ((all.iter().sum::<f64>()) - 1.0).abs() > 1e-9 {
            return Err(AnnError::Config(format!("split fractions {all:?} must be positive and sum to 1")));
        }
        Ok(())
    }
}

/// Sample indices of each partition.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn select(&self, samples: &[Sample]) -> (Vec<Sample>, Vec<Sample>, Vec<Sample>) {
        let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i]).collect::<Vec<_>>();
        (pick(&self.train), pick(&self.validation), pick(&self.test))
    }
}

/// Seeded shuffle, then `floor(n·train)`, `floor(n·validation)` and the
/// remainder to test.
pub fn split_indices(n: usize, fractions: SplitFractions, seed: u64) -> Result<SplitIndices, AnnError> {
    fractions.validate()?;
    if n < 3 {
        return Err(AnnError::TooFewSamples(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    // the tiny bias keeps e.g. 100 * 0.7 from flooring to 69
    let n_train = (n as f64 * fractions.train + 1e-9).floor() as usize;
    let n_val = (n as f64 * fractions.validation + 1e-9).floor() as usize;
    let test = order.split_off(n_train + n_val);
    let validation = order.split_off(n_train);
    Ok(SplitIndices { train: order, validation, test })
}

pub fn split_dataset(
    samples: &[Sample],
    fractions: SplitFractions,
    seed: u64,
) -> Result<(Vec<Sample>, Vec<Sample>, Vec<Sample>), AnnError> {
    Ok(split_indices(samples.len(), fractions, seed)?.select(samples))
}

/// How many samples to emit per calibration point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawPlan {
    PerPoint(usize),
    /// Cycle over the calibration points until this many samples exist.
    Total(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub moisture_levels: Vec<f64>,
    pub draws: DrawPlan,
    pub seed: u64,
    pub ph_range: (f64, f64),
    pub temperature_range: (f64, f64),
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            moisture_levels: vec![5.0, 10.0, 20.0, 30.0],
            draws: DrawPlan::Total(100),
            seed: 7,
            ph_range: (3.1, 5.0),
            temperature_range: (21.0, 23.0),
        }
    }
}

/// Builds `(moisture, pH, temperature, resistivity) → salinity` samples from
/// calibration rows. Resistivity and salinity come from the table; pH and
/// temperature are drawn uniformly from the configured field ranges.
pub fn synthesize_training_set(
    calibration: &[ResistivitySample],
    config: &SynthesisConfig,
) -> Result<Vec<Sample>, AnnError> {
    let present = measurement::moisture_levels(calibration);
    let mut points: Vec<&ResistivitySample> = Vec::new();
    for &level in &config.moisture_levels {
        if !present.contains(&level) {
            return Err(AnnError::MissingLevel(level));
        }
        points.extend(calibration.iter().filter(|s| s.moisture_pct == level));
    }
    let total = match config.draws {
        DrawPlan::PerPoint(k) => points.len() * k,
        DrawPlan::Total(n) => n,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (ph_lo, ph_hi) = config.ph_range;
    let (t_lo, t_hi) = config.temperature_range;
    let samples = (0..total)
        .map(|i| {
            let p = points[i % points.len()];
            let ph = rng.random_range(ph_lo..=ph_hi);
            let t = rng.random_range(t_lo..=t_hi);
            Sample::new(p.moisture_pct, ph, t, p.resistivity_kohm_m, p.salinity_pct)
        })
        .collect();
    Ok(samples)
}

#[derive(Deserialize)]
struct SampleRecord {
    moisture_pct: f64,
    ph: f64,
    temperature_c: f64,
    resistivity_kohm_m: f64,
    salinity_pct: f64,
}

pub const DATASET_HEADER: &str = "moisture_pct,ph,temperature_c,resistivity_kohm_m,salinity_pct";

/// Reads a training dataset with header [`DATASET_HEADER`].
pub fn load_dataset<R: Read>(source: R) -> Result<Vec<Sample>, AnnError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut out = Vec::new();
    for (idx, rec) in reader.deserialize::<SampleRecord>().enumerate() {
        let r = rec.map_err(|e| AnnError::Parse { row: idx + 1, message: e.to_string() })?;
        let s = Sample::new(r.moisture_pct, r.ph, r.temperature_c, r.resistivity_kohm_m, r.salinity_pct);
        if s.inputs.iter().chain([&s.target]).any(|v| !v.is_finite()) {
            return Err(AnnError::Parse { row: idx + 1, message: "non-finite value".into() });
        }
        out.push(s);
    }
    Ok(out)
}

pub fn dataset_to_csv(samples: &[Sample]) -> String {
    let mut out = String::from(DATASET_HEADER);
    out.push('\n');
    for s in samples {
        let [m, ph, t, rho] = s.inputs;
        out.push_str(&format!("{m},{ph},{t},{rho},{}\n", s.target));
    }
    out
}
