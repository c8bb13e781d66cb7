use serde::{Deserialize, Serialize};

use super::data::{Sample, INPUT_DIM};

/// Optional pre-transform applied before the affine scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    #[default]
    Linear,
    /// Natural log; for strictly positive features spanning decades.
    Log,
}

impl Transform {
    fn forward(self, x: f64) -> f64 {
        match self {
            Transform::Linear => x,
            Transform::Log => x.ln(),
        }
    }

    fn inverse(self, u: f64) -> f64 {
        match self {
            Transform::Linear => u,
            Transform::Log => u.exp(),
        }
    }
}

/// Affine map of one (optionally log-transformed) feature from
/// `[min, max]` onto `[-1, 1]`. `min`/`max` are in transformed units. A
/// constant feature maps to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureScale {
    pub min: f64,
    pub max: f64,
    #[serde(default)]
    pub transform: Transform,
}

impl FeatureScale {
    pub fn fit(values: impl IntoIterator<Item = f64>) -> Self {
        Self::fit_with(values, Transform::Linear)
    }

    pub fn fit_with(values: impl IntoIterator<Item = f64>, transform: Transform) -> Self {
        let (min, max) = values
            .into_iter()
            .map(|v| transform.forward(v))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Self { min, max, transform }
    }

    fn is_constant(&self) -> bool {
        self.max <= self.min
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.is_constant() {
            0.0
        } else {
            2.0 * (self.transform.forward(x) - self.min) / (self.max - self.min) - 1.0
        }
    }

    pub fn unapply(&self, y: f64) -> f64 {
        let u = if self.is_constant() { self.min } else { (y + 1.0) * 0.5 * (self.max - self.min) + self.min };
        self.transform.inverse(u)
    }

}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub inputs: [FeatureScale; INPUT_DIM],
    pub target: FeatureScale,
}

impl Normalizer {
    /// Identity-like normalizer for hand-built networks: inputs and target
    /// pass through `[-1, 1]` unchanged.
    pub fn identity() -> Self {
        let unit = FeatureScale { min: -1.0, max: 1.0, transform: Transform::Linear };
        Self { inputs: [unit; INPUT_DIM], target: unit }
    }

    /// Fits per-feature min/max scaling. Panics on an empty slice.
    pub fn fit(samples: &[Sample]) -> Self {
        Self::fit_with(samples, [Transform::Linear; INPUT_DIM])
    }

    /// As [`Normalizer::fit`] with a pre-transform per input feature.
    pub fn fit_with(samples: &[Sample], transforms: [Transform; INPUT_DIM]) -> Self {
        assert!(!samples.is_empty(), "normalizer needs at least one sample");
        let inputs =
            std::array::from_fn(|i| FeatureScale::fit_with(samples.iter().map(|s| s.inputs[i]), transforms[i]));
        let target = FeatureScale::fit(samples.iter().map(|s| s.target));
        Self { inputs, target }
    }

    pub fn apply_inputs(&self, x: &[f64; INPUT_DIM]) -> [f64; INPUT_DIM] {
        std::array::from_fn(|i| self.inputs[i].apply(x[i]))
    }

    pub fn unapply_inputs(&self, z: &[f64; INPUT_DIM]) -> [f64; INPUT_DIM] {
        std::array::from_fn(|i| self.inputs[i].unapply(z[i]))
    }

    pub fn apply_target(&self, t: f64) -> f64 {
        self.target.apply(t)
    }

    pub fn unapply_target(&self, y: f64) -> f64 {
        self.target.unapply(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn endpoints_map_to_unit_interval() {
        let s = FeatureScale::fit([0.0, 50.0, 100.0]);
        assert_eq!([s.apply(0.0), s.apply(50.0), s.apply(100.0)], [-1.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let s = FeatureScale::fit([4.2, 4.2, 4.2]);
        assert_eq!(s.apply(4.2), 0.0);
        assert_eq!(s.unapply(0.0), 4.2);
    }

    #[test]
    fn fit_over_samples() {
        let samples = vec![
            Sample { inputs: [5.0, 3.1, 21.0, 25.0], target: 0.0 },
            Sample { inputs: [30.0, 5.0, 23.0, 0.02], target: 100.0 },
        ];
        let n = Normalizer::fit(&samples);
        assert_eq!(n.apply_inputs(&samples[0].inputs), [-1.0, -1.0, -1.0, 1.0]);
        assert_eq!(n.apply_inputs(&samples[1].inputs), [1.0, 1.0, 1.0, -1.0]);
        assert_eq!(n.apply_target(50.0), 0.0);
    }

    #[test]
    fn log_feature_round_trip() {
        let s = FeatureScale::fit_with([0.02, 0.2, 2.0, 20.0], Transform::Log);
        assert_eq!(s.apply(0.02), -1.0);
        assert!((s.apply(20.0) - 1.0).abs() < 1e-15);
        assert!((s.apply(0.632455532) - 0.0).abs() < 1e-9);
        for x in [0.02, 0.5, 7.0, 20.0] {
            assert!((s.unapply(s.apply(x)) - x).abs() <= 1e-12 * x);
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_identity(
            lo in -1e3f64..1e3, width in 1e-3f64..1e3, xs in proptest::collection::vec(0.0f64..1.0, 1..20)
        ) {
            let s = FeatureScale { min: lo, max: lo + width, transform: Transform::Linear };
            for u in xs {
                let x = lo + u * width;
                let back = s.unapply(s.apply(x));
                prop_assert!((back - x).abs() <= 1e-12 * x.abs().max(1.0));
            }
        }
    }
}
