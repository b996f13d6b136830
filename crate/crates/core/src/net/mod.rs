//! Paired-input neural network for knockoff importance.
//!
//! Each feature `j` and its knockoff pass through a two-weight linear filter
//! `h_j = z_j x_j + z̃_j x̃_j`. The filter outputs are scaled by `w0` and fed to
//! an MLP with two ReLU hidden layers of width `p`. Importances are
//! `Z_j = z_j w_j` and `Z̃_j = z̃_j w_j`, where `w = w0 ⊙ (W1 W2 w3)`.
//!
//! Weight orientation: `W1` and `W2` are stored `inputs × outputs`, so a
//! hidden layer computes `ReLU(W1ᵀ g + b1)` and the path product `W1 W2 w3`
//! composes without transposes.

mod adam;
mod batch;
mod config;
mod gradcheck;
mod mlp;
mod naive;
mod pink;
mod record;
mod train;

pub use adam::{adam_step, AdamState};
pub use batch::Batch;
pub use config::{Aggregation, Architecture, TrainConfig, DEFAULT_L1_MULTIPLIER};
pub use gradcheck::{gradient_check, GradientCheckReport};
pub use mlp::Mlp;
pub use naive::NaiveMlp;
pub use pink::PinkNetwork;
pub use record::{MlpRecord, NetworkRecord, PinkNetworkRecord, WeightsRecord};
pub use train::{
    run_ensemble, run_ensemble_with_seeds, train, train_network, EnsembleResult, RunRecord, TrainedNetwork,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::filter;

/// Importances of every feature and its knockoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportancePair {
    /// `Z`, importance of the original features.
    pub original: Vec<f64>,
    /// `Z̃`, importance of the knockoffs.
    pub knockoff: Vec<f64>,
    /// Aggregate path weight `w0 ⊙ (W1 W2 w3)`; absent for the naive baseline.
    pub path_weight: Option<Vec<f64>>,
}

impl ImportancePair {
    /// `W_j = Z_j² − Z̃_j²`.
    pub fn statistics(&self) -> Vec<f64> {
        filter::knockoff_statistic(&self.original, &self.knockoff).expect("importance vectors have equal length")
    }
}

/// Flat access to every trainable tensor, in a fixed order.
pub trait Parameters {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn to_flat(&self) -> Vec<f64> {
        self.tensors().concat()
    }

    fn set_flat(&mut self, values: &[f64]) {
        let mut offset = 0;
        for t in self.tensors_mut() {
            t.copy_from_slice(&values[offset..offset + t.len()]);
            offset += t.len();
        }
        assert_eq!(offset, values.len(), "flat parameter length mismatch");
    }

    fn all_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// A model trainable on `(x, x̃, y)` batches.
pub trait Network: Parameters + Clone + Send + Sync {
    fn p(&self) -> usize;

    fn predict(&self, batch: &Batch) -> DVector<f64>;

    /// Sum of absolute values of the penalized (non-bias) weights.
    fn l1_norm(&self) -> f64;

    /// Mean squared error plus `lambda · l1_norm`.
    fn loss(&self, batch: &Batch, lambda: f64) -> f64 {
        let pred = self.predict(batch);
        let mse = (pred - &batch.y).norm_squared() / batch.len() as f64;
        mse + lambda * self.l1_norm()
    }

    /// Loss and its exact (sub)gradient, shaped like `self`.
    fn loss_and_gradient(&self, batch: &Batch, lambda: f64) -> (f64, Self);

    fn importance(&self) -> ImportancePair;
}

/// Subgradient of `|x|` with the value 0 at 0.
pub(crate) fn l1_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
