//! Levenberg-Marquardt training loop with validation-based early stopping.

use std::fmt;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::data::{split_indices, Sample, SplitFractions, SplitIndices, INPUT_DIM, RESISTIVITY};
use super::lm::lm_step;
use super::network::Network;
use super::normalize::{Normalizer, Transform};
use super::AnnError;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub hidden_units: usize,
    pub split: SplitFractions,
    pub seed: u64,
    pub max_epochs: usize,
    pub mu_initial: f64,
    pub mu_increase: f64,
    pub mu_decrease: f64,
    pub mu_max: f64,
    /// Consecutive epochs without a new validation minimum before stopping.
    pub patience: usize,
    /// Stop once training MSE falls to this value.
    pub goal: f64,
    /// Log-scale the resistivity input before min/max scaling.
    pub log_resistivity: bool,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            hidden_units: 10,
            split: SplitFractions::default(),
            seed: 7,
            max_epochs: 1000,
            mu_initial: 1e-3,
            mu_increase: 10.0,
            mu_decrease: 0.1,
            mu_max: 1e10,
            patience: 6,
            goal: 0.0,
            log_resistivity: true,
        }
    }
}

impl TrainingConfig {
    pub fn input_transforms(&self) -> [Transform; INPUT_DIM] {
        let mut t = [Transform::Linear; INPUT_DIM];
        if self.log_resistivity {
            t[RESISTIVITY] = Transform::Log;
        }
        t
    }

    pub fn validate(&self) -> Result<(), AnnError> {
        self.split.validate()?;
        let bad = |m: &str| Err(AnnError::Config(m.to_string()));
        if self.hidden_units == 0 {
            return bad("hidden_units must be >= 1");
        }
        if !(self.mu_initial > 0.0) {
            return bad("mu_initial must be > 0");
        }
        if !(self.mu_increase > 1.0) {
            return bad("mu_increase must be > 1");
        }
        if !(self.mu_decrease > 0.0 && self.mu_decrease < 1.0) {
            return bad("mu_decrease must lie in (0, 1)");
        }
        if !(self.mu_max >= self.mu_initial) {
            return bad("mu_max must be >= mu_initial");
        }
        if self.patience == 0 {
            return bad("patience must be >= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    PatienceExhausted,
    MaxEpochs,
    MuOverflow,
    GoalReached,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::PatienceExhausted => "patience-exhausted",
            StopReason::MaxEpochs => "max-epochs",
            StopReason::MuOverflow => "mu-overflow",
            StopReason::GoalReached => "goal-reached",
        })
    }
}

/// Per-epoch MSE history. Index 0 holds the untrained network; every later
/// index is one accepted LM step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub mse_train: Vec<f64>,
    pub mse_validation: Vec<f64>,
    pub mse_test: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_mse: f64,
    pub stop_reason: StopReason,
    pub split: SplitIndices,
}

impl TrainReport {
    pub fn epochs(&self) -> usize {
        self.mse_train.len() - 1
    }

    /// `epoch,mse_train,mse_val,mse_test`; an empty test set leaves its
    /// column blank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,mse_train,mse_val,mse_test\n");
        for (epoch, ((tr, va), te)) in self.mse_train.iter().zip(&self.mse_validation).zip(&self.mse_test).enumerate() {
            let te = if te.is_nan() { String::new() } else { te.to_string() };
            out.push_str(&format!("{epoch},{tr},{va},{te}\n"));
        }
        out
    }
}

/// Splits `dataset` by `config.split` and `config.seed`, fits the
/// normalizer on the whole dataset and trains.
pub fn train(config: &TrainingConfig, dataset: &[Sample]) -> Result<(Network, TrainReport), AnnError> {
    config.validate()?;
    let split = split_indices(dataset.len(), config.split, config.seed)?;
    let (tr, va, te) = split.select(dataset);
    let normalizer = Normalizer::fit_with(dataset, config.input_transforms());
    let (net, mut report) = train_on_split(config, normalizer, &tr, &va, &te)?;
    report.split = split;
    Ok((net, report))
}

/// Trains on explicit partitions. The returned network is the snapshot at
/// the lowest validation MSE, not the last iterate.
pub fn train_on_split(
    config: &TrainingConfig,
    normalizer: Normalizer,
    train_set: &[Sample],
    validation_set: &[Sample],
    test_set: &[Sample],
) -> Result<(Network, TrainReport), AnnError> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(AnnError::Config("training partition is empty".into()));
    }
    if validation_set.is_empty() {
        return Err(AnnError::Config("validation partition is empty".into()));
    }
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(1);
    let mut net = Network::random(config.hidden_units, normalizer, &mut init_rng)?;
    net.seed = Some(config.seed);

    let test_mse = |n: &Network| if test_set.is_empty() { f64::NAN } else { n.mse(test_set) };
    let mut current = net.mse(train_set);
    let mut mse_train = vec![current];
    let mut mse_validation = vec![net.mse(validation_set)];
    let mut mse_test = vec![test_mse(&net)];
    let mut best_epoch = 0;
    let mut best_val = mse_validation[0];
    let mut best_params = net.parameters().to_vec();
    let mut failures = 0;
    let mut mu = config.mu_initial;

    let stop_reason = 'epochs: loop {
        if current <= config.goal {
            break StopReason::GoalReached;
        }
        if mse_train.len() > config.max_epochs {
            break StopReason::MaxEpochs;
        }
        let jac = net.jacobian(train_set);
        let res = net.residuals(train_set);
        let w = DVector::from_column_slice(net.parameters());
        let mut candidate = net.clone();
        loop {
            let delta = lm_step(&jac, &res, mu)?;
            let trial = &w - &delta;
            let trial_mse = if trial.iter().all(|v| v.is_finite()) {
                candidate.set_parameters(trial.as_slice())?;
                candidate.mse(train_set)
            } else {
                f64::INFINITY
            };
            if trial_mse < current {
                current = trial_mse;
                net = candidate;
                mu *= config.mu_decrease;
                break;
            }
            mu *= config.mu_increase;
            if mu > config.mu_max {
                break 'epochs StopReason::MuOverflow;
            }
        }

        let val = net.mse(validation_set);
        mse_train.push(current);
        mse_validation.push(val);
        mse_test.push(test_mse(&net));
        if val < best_val {
            best_val = val;
            best_epoch = mse_train.len() - 1;
            best_params.copy_from_slice(net.parameters());
            failures = 0;
        } else {
            failures += 1;
            if failures >= config.patience {
                break StopReason::PatienceExhausted;
            }
        }
    };

    net.set_parameters(&best_params)?;
    let report = TrainReport {
        mse_train,
        mse_validation,
        mse_test,
        best_epoch,
        best_val_mse: best_val,
        stop_reason,
        split: SplitIndices::default(),
    };
    Ok((net, report))
}
