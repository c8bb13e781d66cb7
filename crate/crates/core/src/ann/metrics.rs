use serde::Serialize;

use super::data::Sample;
use super::network::Network;
use super::AnnError;

pub const HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    /// MSE in normalized target space.
    pub mse: f64,
    /// Pearson correlation between predictions and targets.
    pub r: f64,
    pub r_squared: f64,
}

/// Pearson correlation; errors when either side has zero variance.
pub fn pearson(outputs: &[f64], targets: &[f64]) -> Result<f64, AnnError> {
    assert_eq!(outputs.len(), targets.len());
    let n = outputs.len() as f64;
    let mo = outputs.iter().sum::<f64>() / n;
    let mt = targets.iter().sum::<f64>() / n;
    let (mut sot, mut soo, mut stt) = (0.0, 0.0, 0.0);
    for (o, t) in outputs.iter().zip(targets) {
        sot += (o - mo) * (t - mt);
        soo += (o - mo) * (o - mo);
        stt += (t - mt) * (t - mt);
    }
    if !(soo > 0.0) || !(stt > 0.0) {
        return Err(AnnError::UndefinedCorrelation);
    }
    Ok((sot / (soo.sqrt() * stt.sqrt())).clamp(-1.0, 1.0))
}

pub fn evaluate(network: &Network, samples: &[Sample]) -> Result<Evaluation, AnnError> {
    if samples.is_empty() {
        return Err(AnnError::Config("cannot evaluate on an empty sample set".into()));
    }
    let outputs = samples.iter().map(|s| network.forward(&s.inputs)).collect::<Result<Vec<_>, _>>()?;
    let targets: Vec<f64> = samples.iter().map(|s| s.target).collect();
    let r = pearson(&outputs, &targets)?;
    Ok(Evaluation { mse: network.mse(samples), r, r_squared: r * r })
}

/// Equal-width error histogram. Bins are half-open except the last, which
/// is closed on both sides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        assert!(bins >= 1);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if values.is_empty() {
            (-0.5, 0.5)
        } else if hi > lo {
            (lo, hi)
        } else {
            // all identical: centre a unit-wide range on the value
            (lo - 0.5, lo + 0.5)
        };
        let width = (hi - lo) / bins as f64;
        let mut bin_edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
        bin_edges.push(hi);
        let mut counts = vec![0; bins];
        for &v in values {
            let idx = (((v - lo) / width).floor() as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Self { bin_edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Index of the bin holding `v`, if inside the range.
    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let last = self.counts.len() - 1;
        if v < self.bin_edges[0] || v > self.bin_edges[last + 1] {
            return None;
        }
        Some(self.bin_edges[1..].iter().position(|&e| v < e).unwrap_or(last))
    }
}

/// Histogram of `target − output` in salinity units.
pub fn error_histogram(network: &Network, samples: &[Sample], bins: usize) -> Result<Histogram, AnnError> {
    let errors = samples
        .iter()
        .map(|s| network.forward(&s.inputs).map(|y| s.target - y))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Histogram::from_values(&errors, bins))
}
