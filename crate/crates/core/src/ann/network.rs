//! Single-hidden-layer network: tanh hidden units, linear output.
//!
//! Parameters live in one flat vector laid out as
//! `[hidden weights (H×4, row-major) | hidden biases (H) | output weights (H) | output bias]`.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{Sample, INPUT_DIM};
use super::normalize::Normalizer;
use super::AnnError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkTopology {
    pub input_dim: usize,
    pub hidden_units: usize,
    pub output_dim: usize,
}

impl NetworkTopology {
    pub fn new(hidden_units: usize) -> Result<Self, AnnError> {
        let t = Self { input_dim: INPUT_DIM, hidden_units, output_dim: 1 };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), AnnError> {
        if self.input_dim != INPUT_DIM || self.output_dim != 1 || self.hidden_units == 0 {
            return Err(AnnError::Config(format!(
                "topology must be {INPUT_DIM}→H→1 with H ≥ 1, got {}→{}→{}",
                self.input_dim, self.hidden_units, self.output_dim
            )));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        6 * self.hidden_units + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub topology: NetworkTopology,
    parameters: Vec<f64>,
    pub normalizer: Normalizer,
    /// Seed the network was trained with, if any.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Network {
    pub fn new(topology: NetworkTopology, parameters: Vec<f64>, normalizer: Normalizer) -> Result<Self, AnnError> {
        topology.validate()?;
        if parameters.len() != topology.parameter_count() {
            return Err(AnnError::Config(format!(
                "expected {} parameters for H = {}, got {}",
                topology.parameter_count(),
                topology.hidden_units,
                parameters.len()
            )));
        }
        if parameters.iter().any(|p| !p.is_finite()) {
            return Err(AnnError::Numeric("non-finite network parameter".into()));
        }
        Ok(Self { topology, parameters, normalizer, seed: None })
    }

    pub fn zeros(hidden_units: usize, normalizer: Normalizer) -> Result<Self, AnnError> {
        let topology = NetworkTopology::new(hidden_units)?;
        Self::new(topology, vec![0.0; topology.parameter_count()], normalizer)
    }

    /// Parameters uniform in `[-0.5, 0.5]`.
    pub fn random(hidden_units: usize, normalizer: Normalizer, rng: &mut impl Rng) -> Result<Self, AnnError> {
        let topology = NetworkTopology::new(hidden_units)?;
        let params = (0..topology.parameter_count()).map(|_| rng.random_range(-0.5..=0.5)).collect();
        Self::new(topology, params, normalizer)
    }

    pub fn seeded(hidden_units: usize, normalizer: Normalizer, seed: u64) -> Result<Self, AnnError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random(hidden_units, normalizer, &mut rng)
    }

    pub fn parameters(&self) -> &[f64] {
        &self.parameters
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), AnnError> {
        if params.len() != self.parameters.len() {
            return Err(AnnError::Config("parameter vector length mismatch".into()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(AnnError::Numeric("non-finite network parameter".into()));
        }
        self.parameters.copy_from_slice(params);
        Ok(())
    }

    fn h(&self) -> usize {
        self.topology.hidden_units
    }

    fn hidden_weight(&self, j: usize, i: usize) -> f64 {
        self.parameters[j * INPUT_DIM + i]
    }

    fn hidden_bias(&self, j: usize) -> f64 {
        self.parameters[self.h() * INPUT_DIM + j]
    }

    fn output_weight(&self, j: usize) -> f64 {
        self.parameters[self.h() * (INPUT_DIM + 1) + j]
    }

    fn output_bias(&self) -> f64 {
        self.parameters[self.h() * (INPUT_DIM + 2)]
    }

    /// Hidden activations for a normalized input.
    pub fn hidden_activations(&self, z: &[f64; INPUT_DIM]) -> Vec<f64> {
        (0..self.h())
            .map(|j| {
                let a: f64 = (0..INPUT_DIM).map(|i| self.hidden_weight(j, i) * z[i]).sum::<f64>() + self.hidden_bias(j);
                a.tanh()
            })
            .collect()
    }

    /// Output in normalized target space for a normalized input.
    pub fn forward_normalized(&self, z: &[f64; INPUT_DIM]) -> f64 {
        let hidden = self.hidden_activations(z);
        hidden.iter().enumerate().map(|(j, h)| self.output_weight(j) * h).sum::<f64>() + self.output_bias()
    }

    /// Predicted salinity % for raw `(moisture, pH, temperature, resistivity)`.
    pub fn forward(&self, input: &[f64; INPUT_DIM]) -> Result<f64, AnnError> {
        if input.iter().any(|v| !v.is_finite()) {
            return Err(AnnError::Domain(format!("non-finite input {input:?}")));
        }
        let z = self.normalizer.apply_inputs(input);
        Ok(self.normalizer.unapply_target(self.forward_normalized(&z)))
    }

    /// Residuals `target − output` in normalized target space.
    pub fn residuals(&self, batch: &[Sample]) -> DVector<f64> {
        DVector::from_iterator(
            batch.len(),
            batch.iter().map(|s| {
                let z = self.normalizer.apply_inputs(&s.inputs);
                self.normalizer.apply_target(s.target) - self.forward_normalized(&z)
            }),
        )
    }

    /// Mean squared residual in normalized target space.
    pub fn mse(&self, batch: &[Sample]) -> f64 {
        if batch.is_empty() {
            return f64::NAN;
        }
        self.residuals(batch).norm_squared() / batch.len() as f64
    }

    /// ∂(target − output)/∂parameter, one row per sample.
    pub fn jacobian(&self, batch: &[Sample]) -> DMatrix<f64> {
        let h = self.h();
        let mut jac = DMatrix::zeros(batch.len(), self.topology.parameter_count());
        for (row, s) in batch.iter().enumerate() {
            let z = self.normalizer.apply_inputs(&s.inputs);
            let hidden = self.hidden_activations(&z);
            for j in 0..h {
                let v = self.output_weight(j);
                let dact = -v * (1.0 - hidden[j] * hidden[j]);
                for i in 0..INPUT_DIM {
                    jac[(row, j * INPUT_DIM + i)] = dact * z[i];
                }
                jac[(row, h * INPUT_DIM + j)] = dact;
                jac[(row, h * (INPUT_DIM + 1) + j)] = -hidden[j];
            }
            jac[(row, h * (INPUT_DIM + 2))] = -1.0;
        }
        jac
    }

    pub fn to_json(&self) -> Result<String, AnnError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, AnnError> {
        let raw: Network = serde_json::from_str(text)?;
        let mut net = Network::new(raw.topology, raw.parameters, raw.normalizer)?;
        net.seed = raw.seed;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AnnError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AnnError> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_network_outputs_target_midpoint() {
        let mut n = Normalizer::identity();
        n.target = crate::ann::FeatureScale::fit([0.0, 100.0]);
        let net = Network::zeros(3, n).unwrap();
        assert_eq!(net.forward(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 50.0);
    }

    #[test]
    fn hand_set_single_unit() {
        let mut net = Network::zeros(1, Normalizer::identity()).unwrap();
        net.set_parameters(&[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let y = net.forward_normalized(&[0.5, 0.3, -0.2, 0.9]);
        assert_relative_eq!(y, 0.4621, epsilon = 5e-5);
        assert_eq!(y, 0.5f64.tanh());
        // identity normalizer leaves the output unchanged
        assert_relative_eq!(net.forward(&[0.5, 0.3, -0.2, 0.9]).unwrap(), y, epsilon = 1e-15);
    }

    #[test]
    fn hidden_activations_bounded() {
        let net = Network::seeded(8, Normalizer::identity(), 3).unwrap();
        for k in 0..50 {
            let x = k as f64 - 25.0;
            for a in net.hidden_activations(&[x, -x, 0.5 * x, 1.0]) {
                assert!(a >= -1.0 && a <= 1.0);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs_and_shapes() {
        let net = Network::zeros(2, Normalizer::identity()).unwrap();
        assert!(matches!(net.forward(&[f64::NAN, 0.0, 0.0, 0.0]), Err(AnnError::Domain(_))));
        assert!(Network::zeros(0, Normalizer::identity()).is_err());
        let topo = NetworkTopology::new(2).unwrap();
        assert!(Network::new(topo, vec![0.0; 12], Normalizer::identity()).is_err());
        assert_eq!(topo.parameter_count(), 13);
    }

    #[test]
    fn output_bias_column_is_minus_one() {
        let net = Network::zeros(3, Normalizer::identity()).unwrap();
        let batch = vec![Sample { inputs: [0.0; 4], target: 0.3 }; 5];
        let j = net.jacobian(&batch);
        let last = j.ncols() - 1;
        for r in 0..5 {
            assert_eq!(j[(r, last)], -1.0);
        }
    }

    #[test]
    fn duplicated_sample_duplicates_row() {
        let net = Network::seeded(3, Normalizer::identity(), 11).unwrap();
        let s = Sample { inputs: [0.1, -0.4, 0.7, 0.2], target: 0.5 };
        let j = net.jacobian(&[s, s]);
        assert_eq!(j.row(0), j.row(1));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let net = Network::seeded(10, Normalizer::identity(), 5).unwrap();
        let back = Network::from_json(&net.to_json().unwrap()).unwrap();
        assert_eq!(net, back);
    }
}
