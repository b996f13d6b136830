use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::adam::{adam_step, AdamState};
use super::record::NetworkRecord;
use super::{Aggregation, Architecture, Batch, ImportancePair, NaiveMlp, Network, PinkNetwork, TrainConfig};
use crate::data::ResponseVector;
use crate::error::{Error, Result};
use crate::knockoffs::AugmentedDesign;
use crate::rng::Seed;

/// Trains a freshly initialized paired-input network.
///
/// The response is centered first. Initialization uses
/// `cfg.seed.child("init", 0)` and batch shuffling `cfg.seed.child("shuffle", 0)`.
pub fn train(aug: &AugmentedDesign, y: &ResponseVector, cfg: &TrainConfig) -> Result<PinkNetwork> {
    let net = PinkNetwork::init(aug.p(), cfg.seed.child("init", 0));
    train_network(net, aug, y, cfg)
}

/// Mini-batch Adam on the penalized squared error, starting from `net`.
pub fn train_network<N: Network>(
    mut net: N,
    aug: &AugmentedDesign,
    y: &ResponseVector,
    cfg: &TrainConfig,
) -> Result<N> {
    cfg.validate()?;
    y.check_matches(aug.original())?;
    if net.p() != aug.p() {
        return Err(Error::DimensionMismatch(format!(
            "network expects {} features, design has {}",
            net.p(),
            aug.p()
        )));
    }
    let y = y.centered();
    let (n, p) = (aug.n(), aug.p());
    let lambda = cfg.effective_lambda(p, n);
    let mut rng = cfg.seed.child("shuffle", 0).rng();
    let mut order: Vec<usize> = (0..n).collect();
    let mut state = AdamState::new(&net);
    let mut step = 0u64;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for rows in order.chunks(cfg.batch_size) {
            let batch = Batch::from_rows(aug, &y, rows);
            let (loss, grad) = net.loss_and_gradient(&batch, lambda);
            if !loss.is_finite() {
                return Err(Error::DivergedTraining { epoch, loss });
            }
            step += 1;
            adam_step(&mut net, &grad, &mut state, step, cfg);
        }
        if !net.all_finite() {
            return Err(Error::DivergedTraining { epoch, loss: f64::NAN });
        }
    }
    Ok(net)
}

/// A trained model of either architecture.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedNetwork {
    DeepPink(PinkNetwork),
    NaiveMlp(NaiveMlp),
}

impl TrainedNetwork {
    pub fn importance(&self) -> ImportancePair {
        match self {
            TrainedNetwork::DeepPink(n) => n.importance(),
            TrainedNetwork::NaiveMlp(n) => n.importance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: Seed,
    pub network: TrainedNetwork,
    pub importance: ImportancePair,
    pub statistics: Vec<f64>,
}

impl RunRecord {
    pub fn to_record(&self, cfg: &TrainConfig) -> NetworkRecord {
        NetworkRecord::new(&self.network, cfg.clone().with_seed(self.seed))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Aggregated knockoff statistics, one per feature.
    pub statistics: Vec<f64>,
    pub runs: Vec<RunRecord>,
}

/// Trains `cfg.runs` networks on the sub-streams `cfg.seed.child("run", r)`
/// and aggregates their statistics.
pub fn run_ensemble(aug: &AugmentedDesign, y: &ResponseVector, cfg: &TrainConfig) -> Result<EnsembleResult> {
    let seeds: Vec<Seed> = (0..cfg.runs as u64).map(|r| cfg.seed.child("run", r)).collect();
    run_ensemble_with_seeds(aug, y, cfg, &seeds)
}

/// Like [`run_ensemble`] with explicit per-run seeds (`cfg.runs` is ignored).
pub fn run_ensemble_with_seeds(
    aug: &AugmentedDesign,
    y: &ResponseVector,
    cfg: &TrainConfig,
    seeds: &[Seed],
) -> Result<EnsembleResult> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("ensemble needs at least one run".into()));
    }
    let runs: Vec<RunRecord> = seeds
        .par_iter()
        .map(|&seed| train_one(aug, y, &cfg.clone().with_seed(seed)))
        .collect::<Result<_>>()?;

    let p = aug.p();
    let k = runs.len() as f64;
    let statistics = match cfg.aggregation {
        Aggregation::MeanStatistic => (0..p)
            .map(|j| runs.iter().map(|r| r.statistics[j]).sum::<f64>() / k)
            .collect(),
        Aggregation::MeanImportance => {
            let mean = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(f).sum::<f64>() / k;
            (0..p)
                .map(|j| {
                    let z = mean(&|r| r.importance.original[j]);
                    let zk = mean(&|r| r.importance.knockoff[j]);
                    z * z - zk * zk
                })
                .collect()
        }
    };
    Ok(EnsembleResult { statistics, runs })
}

fn train_one(aug: &AugmentedDesign, y: &ResponseVector, cfg: &TrainConfig) -> Result<RunRecord> {
    let network = match cfg.architecture {
        Architecture::DeepPink => TrainedNetwork::DeepPink(train(aug, y, cfg)?),
        Architecture::NaiveMlp => {
            let init = NaiveMlp::init(aug.p(), cfg.seed.child("init", 0));
            TrainedNetwork::NaiveMlp(train_network(init, aug, y, cfg)?)
        }
    };
    let importance = network.importance();
    let statistics = importance.statistics();
    Ok(RunRecord {
        seed: cfg.seed,
        network,
        importance,
        statistics,
    })
}
