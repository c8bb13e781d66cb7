//! Crop suitability rules: compare a reading against optimum ranges.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measurement::SoilReading;

#[derive(Debug, Error)]
pub enum RangesError {
    #[error("invalid {parameter} range: min {min} exceeds max {max}")]
    Inverted { parameter: &'static str, min: f64, max: f64 },
    #[error("invalid {parameter} range: bounds must be finite")]
    NonFinite { parameter: &'static str },
    #[error("ranges I/O: {0}")]
    Io(#[from] io::Error),
    #[error("ranges format: {0}")]
    Format(#[from] serde_json::Error),
}

/// Closed interval `[min, max]`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl From<[f64; 2]> for Interval {
    fn from([min, max]: [f64; 2]) -> Self {
        Self { min, max }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.min, i.max]
    }
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn check(&self, parameter: &'static str) -> Result<(), RangesError> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(RangesError::NonFinite { parameter });
        }
        if self.min > self.max {
            return Err(RangesError::Inverted { parameter, min: self.min, max: self.max });
        }
        Ok(())
    }

    fn classify(&self, v: f64) -> std::cmp::Ordering {
        if v < self.min {
            std::cmp::Ordering::Less
        } else if v > self.max {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumRanges {
    pub ph: Interval,
    pub moisture_pct: Interval,
    pub temperature_c: Interval,
}

impl OptimumRanges {
    pub fn validate(&self) -> Result<(), RangesError> {
        self.ph.check("ph")?;
        self.moisture_pct.check("moisture_pct")?;
        self.temperature_c.check("temperature_c")
    }

    pub fn from_json(text: &str) -> Result<Self, RangesError> {
        let r: Self = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String, RangesError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn load_ranges(path: impl AsRef<Path>) -> Result<OptimumRanges, RangesError> {
    OptimumRanges::from_json(&fs::read_to_string(path)?)
}

/// Writes via a temporary sibling and rename, so readers see either the old
/// or the new document.
pub fn save_ranges(ranges: &OptimumRanges, path: impl AsRef<Path>) -> Result<(), RangesError> {
    ranges.validate()?;
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, ranges.to_json()?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    LowPh,
    HighPh,
    LowMoisture,
    HighMoisture,
    LowTemperature,
    HighTemperature,
}

impl Problem {
    pub fn tag(&self) -> &'static str {
        match self {
            Problem::LowPh => "low-ph",
            Problem::HighPh => "high-ph",
            Problem::LowMoisture => "low-moisture",
            Problem::HighMoisture => "high-moisture",
            Problem::LowTemperature => "low-temperature",
            Problem::HighTemperature => "high-temperature",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub suitable: bool,
    /// Ordered pH, moisture, temperature.
    pub problems: Vec<Problem>,
}

pub fn analyze(reading: &SoilReading, ranges: &OptimumRanges) -> Decision {
    use std::cmp::Ordering::*;
    let checks = [
        (reading.ph, ranges.ph, Problem::LowPh, Problem::HighPh),
        (reading.moisture_pct, ranges.moisture_pct, Problem::LowMoisture, Problem::HighMoisture),
        (reading.temperature_c, ranges.temperature_c, Problem::LowTemperature, Problem::HighTemperature),
    ];
    let problems: Vec<Problem> = checks
        .into_iter()
        .filter_map(|(v, range, low, high)| match range.classify(v) {
            Less => Some(low),
            Greater => Some(high),
            Equal => None,
        })
        .collect();
    Decision { suitable: problems.is_empty(), problems }
}
