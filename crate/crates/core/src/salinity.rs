//! Exponential resistivity/salinity models `ρ = A·exp(−B·X)`.
//!
//! Models are fitted by ordinary least squares on `(X, ln ρ)` and inverted in
//! closed form, `X = ln(A/ρ) / B`. R² is always reported in ln-space so it
//! matches the regression that produced the coefficients.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measurement::{self, ResistivitySample};

/// Implied salinities in `(100, OUT_OF_CALIBRATION_LIMIT]` are returned with
/// a warning, anything beyond is an error.
pub const OUT_OF_CALIBRATION_LIMIT: f64 = 110.0;
/// Fits below this R² are flagged as low confidence.
pub const LOW_CONFIDENCE_R2: f64 = 0.6;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resistivity {resistivity} exceeds model amplitude {amplitude}; implied salinity would be negative")]
    AboveCalibration { resistivity: f64, amplitude: f64 },
    #[error("resistivity {resistivity} implies salinity {salinity:.2}%, beyond the {limit}% calibration limit")]
    BelowCalibration { resistivity: f64, salinity: f64, limit: f64 },
    #[error("R² undefined: data has zero variance in ln-space")]
    UndefinedRSquared,
    #[error("no model available")]
    NoModel,
    #[error("no calibration rows at moisture level {0}%")]
    UnknownLevel(f64),
    #[error("model bank I/O: {0}")]
    Io(#[from] io::Error),
    #[error("model bank format: {0}")]
    Format(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialModel {
    pub moisture_pct: f64,
    pub amplitude: f64,
    pub decay: f64,
    /// ln-space R² of the fit; `None` for hand-specified coefficients.
    pub r_squared: Option<f64>,
    #[serde(default)]
    pub n_points: usize,
}

/// Result of inverting a model. `out_of_calibration` is set when the implied
/// salinity lies in `(100, 110]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inversion {
    pub salinity_pct: f64,
    pub out_of_calibration: bool,
}

impl ExponentialModel {
    pub fn new(amplitude: f64, decay: f64, moisture_pct: f64) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(ModelError::Domain(format!("amplitude must be > 0, got {amplitude}")));
        }
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(ModelError::Domain(format!("decay must be > 0, got {decay}")));
        }
        Ok(Self { moisture_pct, amplitude, decay, r_squared: None, n_points: 0 })
    }

    pub fn predict_resistivity(&self, salinity_pct: f64) -> Result<f64> {
        if !(salinity_pct >= 0.0) || !salinity_pct.is_finite() {
            return Err(ModelError::Domain(format!("salinity must be >= 0, got {salinity_pct}")));
        }
        Ok(self.amplitude * (-self.decay * salinity_pct).exp())
    }

    pub fn invert_salinity(&self, resistivity_kohm_m: f64) -> Result<Inversion> {
        if !(resistivity_kohm_m > 0.0) || !resistivity_kohm_m.is_finite() {
            return Err(ModelError::Domain(format!("resistivity must be > 0, got {resistivity_kohm_m}")));
        }
        if resistivity_kohm_m > self.amplitude {
            return Err(ModelError::AboveCalibration { resistivity: resistivity_kohm_m, amplitude: self.amplitude });
        }
        let salinity = (self.amplitude / resistivity_kohm_m).ln() / self.decay;
        if salinity > OUT_OF_CALIBRATION_LIMIT {
            return Err(ModelError::BelowCalibration {
                resistivity: resistivity_kohm_m,
                salinity,
                limit: OUT_OF_CALIBRATION_LIMIT,
            });
        }
        Ok(Inversion { salinity_pct: salinity, out_of_calibration: salinity > 100.0 })
    }

    pub fn is_low_confidence(&self) -> bool {
        self.r_squared.is_some_and(|r2| r2 < LOW_CONFIDENCE_R2)
    }
}

fn check_points(points: &[(f64, f64)], min: usize) -> Result<()> {
    if points.len() < min {
        return Err(ModelError::InsufficientData(format!("need at least {min} points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*y > 0.0) || !y.is_finite() || !x.is_finite()) {
        return Err(ModelError::Domain(format!("point ({x}, {y}) needs finite salinity and positive resistivity")));
    }
    Ok(())
}

/// Fits `ρ = A·exp(−B·X)` to `(salinity, resistivity)` points.
pub fn fit_exponential(points: &[(f64, f64)], moisture_pct: f64) -> Result<ExponentialModel> {
    check_points(points, 3)?;
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_ly = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y.ln() - mean_ly);
    }
    if sxx == 0.0 {
        return Err(ModelError::InsufficientData("all points share one salinity value".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_ly - slope * mean_x;
    let mut model = ExponentialModel::new(intercept.exp(), -slope, moisture_pct).map_err(|_| {
        ModelError::Domain(format!("fitted slope {slope} is not a decay; resistivity must fall with salinity"))
    })?;
    model.r_squared = Some(r_squared(&model, points)?.clamp(0.0, 1.0));
    model.n_points = points.len();
    Ok(model)
}

/// ln-space coefficient of determination of `model` against `points`.
pub fn r_squared(model: &ExponentialModel, points: &[(f64, f64)]) -> Result<f64> {
    check_points(points, 2)?;
    let n = points.len() as f64;
    let mean_ly = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let ln_a = model.amplitude.ln();
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(x, y) in points {
        let ly = y.ln();
        let r = ly - (ln_a - model.decay * x);
        ss_res += r * r;
        ss_tot += (ly - mean_ly) * (ly - mean_ly);
    }
    if ss_tot == 0.0 {
        return Err(ModelError::UndefinedRSquared);
    }
    Ok(1.0 - ss_res / ss_tot)
}

/// Which calibration rows of a level enter the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PointSelection {
    /// Every row.
    All,
    /// Rows in ascending salinity up to (not including) the first one whose
    /// resistivity rises above its predecessor's.
    #[default]
    TruncateAtReversal,
}

impl PointSelection {
    pub fn apply(self, points: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        match self {
            PointSelection::All => sorted,
            PointSelection::TruncateAtReversal => {
                let cut = sorted.windows(2).position(|w| w[1].1 > w[0].1).map_or(sorted.len(), |i| i + 1);
                sorted.truncate(cut);
                sorted
            }
        }
    }
}

/// Fits one moisture level of a calibration set.
pub fn fit_level(samples: &[ResistivitySample], moisture_pct: f64, selection: PointSelection) -> Result<ExponentialModel> {
    let points = measurement::points_at_moisture(samples, moisture_pct);
    if points.is_empty() {
        return Err(ModelError::UnknownLevel(moisture_pct));
    }
    fit_exponential(&selection.apply(&points), moisture_pct)
}

/// One model per calibrated moisture level, kept sorted by moisture.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelBank {
    models: Vec<ExponentialModel>,
}

impl ModelBank {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fits every requested level; `None` fits all levels present.
    pub fn fit(samples: &[ResistivitySample], levels: Option<&[f64]>, selection: PointSelection) -> Result<Self> {
        let all = measurement::moisture_levels(samples);
        let levels = levels.map_or(all, <[f64]>::to_vec);
        let mut bank = Self::new();
        for level in levels {
            bank.insert(fit_level(samples, level, selection)?);
        }
        Ok(bank)
    }

    /// Inserts or replaces the model at its moisture level.
    pub fn insert(&mut self, model: ExponentialModel) {
        match self.models.binary_search_by(|m| m.moisture_pct.total_cmp(&model.moisture_pct)) {
            Ok(i) => self.models[i] = model,
            Err(i) => self.models.insert(i, model),
        }
    }

    pub fn models(&self) -> &[ExponentialModel] {
        &self.models
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    /// Nearest calibrated level; ties go to the lower moisture.
    pub fn select(&self, moisture_pct: f64) -> Result<&ExponentialModel> {
        let mut best: Option<&ExponentialModel> = None;
        for m in &self.models {
            let d = (m.moisture_pct - moisture_pct).abs();
            // strict less keeps the earlier (lower) level on ties
            if best.is_none_or(|b| d < (b.moisture_pct - moisture_pct).abs()) {
                best = Some(m);
            }
        }
        best.ok_or(ModelError::NoModel)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ModelBank = serde_json::from_str(text)?;
        let mut bank = Self::new();
        for m in raw.models {
            let checked = ExponentialModel::new(m.amplitude, m.decay, m.moisture_pct)?;
            if bank.models.iter().any(|x| x.moisture_pct == m.moisture_pct) {
                return Err(ModelError::Domain(format!("duplicate model for moisture {}", m.moisture_pct)));
            }
            bank.insert(ExponentialModel { r_squared: m.r_squared, n_points: m.n_points, ..checked });
        }
        Ok(bank)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
