use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    /// Pairwise filter layer in front of the MLP.
    #[default]
    DeepPink,
    /// The MLP fed the concatenated `(x, x̃)` directly.
    NaiveMlp,
}

/// How the per-run results of an ensemble are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Elementwise mean of the per-run statistics `W`.
    #[default]
    MeanStatistic,
    /// Average `Z` and `Z̃` across runs, then form `W`.
    MeanImportance,
}

pub const DEFAULT_L1_MULTIPLIER: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Base L1 strength; `None` means `√(2 ln p / n)`.
    pub l1_lambda: Option<f64>,
    /// Scale applied to the base strength. Defaults to 0.1: at 1.0 the
    /// constant L1 pull, which Adam turns into a full-size step, can shrink
    /// the whole network to zero before the signal path forms.
    pub l1_multiplier: f64,
    pub runs: usize,
    pub seed: Seed,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub architecture: Architecture,
    pub aggregation: Aggregation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            batch_size: 10,
            epochs: 200,
            l1_lambda: None,
            l1_multiplier: DEFAULT_L1_MULTIPLIER,
            runs: 5,
            seed: Seed(0),
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            architecture: Architecture::DeepPink,
            aggregation: Aggregation::MeanStatistic,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = seed;
        self
    }

    /// The penalty actually applied for a problem with `p` features and `n` rows.
    pub fn effective_lambda(&self, p: usize, n: usize) -> f64 {
        let base = self
            .l1_lambda
            .unwrap_or_else(|| (2.0 * (p as f64).ln() / n as f64).sqrt());
        self.l1_multiplier * base
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning rate must be positive");
        }
        if self.batch_size < 1 {
            return bad("batch size must be at least 1");
        }
        if self.epochs < 1 {
            return bad("epochs must be at least 1");
        }
        if self.runs < 1 {
            return bad("runs must be at least 1");
        }
        if let Some(l) = self.l1_lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return bad("l1 lambda must be non-negative");
            }
        }
        if !(self.l1_multiplier >= 0.0) || !self.l1_multiplier.is_finite() {
            return bad("l1 multiplier must be non-negative");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam betas must lie in [0, 1)");
        }
        if !(self.adam_eps > 0.0) {
            return bad("Adam epsilon must be positive");
        }
        Ok(())
    }
}
