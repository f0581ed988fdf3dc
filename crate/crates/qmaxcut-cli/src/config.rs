//! The TOML experiment configuration and seed derivation.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

/// Top-level experiment description. Every field has a default, so a config
/// file only names what it changes.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Graph sizes N to sweep.
    pub node_sizes: Vec<usize>,
    /// QAOA depths P to sweep.
    pub qaoa_steps: Vec<usize>,
    /// Hyperplane-rounding rounds used for the GW column of `eval`.
    pub gw_rounds: usize,
    pub ensemble: EnsembleConfig,
    pub trainer: TrainerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            output_dir: PathBuf::from("out"),
            node_sizes: vec![10],
            qaoa_steps: vec![1, 2, 3, 4, 5, 6, 7, 8],
            gw_rounds: qmaxcut::gw::DEFAULT_ROUNDS,
            ensemble: EnsembleConfig::default(),
            trainer: TrainerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub edge_prob: f64,
    pub train_size: usize,
    pub test_size: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            edge_prob: 0.5,
            train_size: 100,
            test_size: 100,
        }
    }
}

/// Trainer hyperparameters; `steps` and `seed` are filled per sweep cell.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub epochs: usize,
    pub step_size: f64,
    pub minibatch: usize,
    pub init_mean: f64,
    pub init_std: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        let base = qmaxcut::TrainConfig::new(1);
        TrainerConfig {
            epochs: base.epochs,
            step_size: base.step_size,
            minibatch: base.minibatch,
            init_mean: base.init_mean,
            init_std: base.init_std,
            adam_beta1: base.adam_beta1,
            adam_beta2: base.adam_beta2,
            adam_eps: base.adam_eps,
        }
    }
}

impl TrainerConfig {
    pub fn to_train_config(&self, steps: usize, seed: u64) -> qmaxcut::TrainConfig {
        qmaxcut::TrainConfig {
            steps,
            init_mean: self.init_mean,
            init_std: self.init_std,
            step_size: self.step_size,
            minibatch: self.minibatch,
            epochs: self.epochs,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
            seed,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = toml::from_str(&text)
            .map_err(|e| CliError::input(format!("bad config {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.node_sizes.is_empty() || self.node_sizes.iter().any(|&n| n == 0) {
            return Err(CliError::input("node_sizes must be nonempty, all >= 1"));
        }
        if self.qaoa_steps.is_empty() || self.qaoa_steps.iter().any(|&p| p == 0) {
            return Err(CliError::input("qaoa_steps must be nonempty, all >= 1"));
        }
        if !(0.0..=1.0).contains(&self.ensemble.edge_prob) {
            return Err(CliError::input("ensemble.edge_prob must lie in [0, 1]"));
        }
        if self.ensemble.train_size == 0 || self.ensemble.test_size == 0 {
            return Err(CliError::input("ensemble set sizes must be >= 1"));
        }
        if self.gw_rounds == 0 {
            return Err(CliError::input("gw_rounds must be >= 1"));
        }
        Ok(())
    }
}

/// Seed-derivation domains; every derived stream mixes the master seed with
/// one of these tags plus context indices, so reruns are byte-identical and
/// streams never collide across commands.
pub mod seeds {
    pub const TRAIN_GRAPHS: u64 = 1;
    pub const TEST_GRAPHS: u64 = 2;
    pub const TRAIN_CELL: u64 = 3;
    pub const GW: u64 = 4;
    pub const COMPILE: u64 = 5;

    fn splitmix64(mut x: u64) -> u64 {
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = x;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn derive(master: u64, parts: &[u64]) -> u64 {
        let mut acc = splitmix64(master);
        for &part in parts {
            acc = splitmix64(acc ^ part);
        }
        acc
    }
}
