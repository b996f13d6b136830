//! Synthetic experiments: Gaussian designs with an autoregressive precision
//! matrix, sparse coefficients, linear or cubic single-index responses, and
//! the full knockoff pipeline repeated over seeded repetitions.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DesignMatrix, ResponseVector};
use crate::error::{Error, Result};
use crate::filter::{self, Rule};
use crate::knockoffs::{sample_knockoffs, AugmentedDesign, KnockoffModel};
use crate::linalg;
use crate::net::{run_ensemble, TrainConfig};
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseModel {
    /// `y = X β + ε`
    Linear,
    /// `y_i = (x_iᵀ β)³ / 2 + ε_i`
    SingleIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub s_sparsity: usize,
    pub amplitude: f64,
    pub rho: f64,
    pub sigma_noise: f64,
    pub model: ResponseModel,
    pub q: f64,
    pub rule: Rule,
    pub repetitions: usize,
    pub seed: Seed,
    pub train: TrainConfig,
}

impl SimConfig {
    /// Linear design: 30 signals of magnitude 1.5.
    pub fn linear(p: usize) -> Self {
        SimConfig {
            n: 1000,
            p,
            s_sparsity: 30.min(p),
            amplitude: 1.5,
            rho: 0.5,
            sigma_noise: 1.0,
            model: ResponseModel::Linear,
            q: 0.2,
            rule: Rule::KnockoffPlus,
            repetitions: 10,
            seed: Seed(0),
            train: TrainConfig::default(),
        }
    }

    /// Single-index design with link `x³/2`: 10 signals of magnitude 1.5.
    pub fn single_index(p: usize) -> Self {
        SimConfig {
            s_sparsity: 10.min(p),
            model: ResponseModel::SingleIndex,
            ..Self::linear(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n < 2 {
            return bad(format!("n = {} must be at least 2", self.n));
        }
        if self.p < 1 {
            return bad("p must be at least 1".into());
        }
        if self.s_sparsity > self.p {
            return bad(format!("sparsity {} exceeds p = {}", self.s_sparsity, self.p));
        }
        if !(self.rho > -1.0 && self.rho < 1.0) {
            return bad(format!("rho = {} must lie in (-1, 1)", self.rho));
        }
        if !(self.sigma_noise > 0.0) || !self.sigma_noise.is_finite() {
            return bad("noise level must be positive".into());
        }
        if !self.amplitude.is_finite() {
            return bad("amplitude must be finite".into());
        }
        if self.repetitions < 1 {
            return bad("need at least one repetition".into());
        }
        filter::check_level(self.q)?;
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub beta: Vec<f64>,
    /// Zero-based indices of the nonzero coefficients, ascending.
    pub support: Vec<usize>,
}

/// Precision matrix `Ω_jk = ρ^|j−k|`.
pub fn ar_precision(p: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |j, k| rho.powi(j.abs_diff(k) as i32))
}

/// Rows i.i.d. `N(0, Ω⁻¹)`, drawn as `x = L⁻ᵀ e` with `Ω = L Lᵀ` and `e`
/// standard normal (filled row by row). Returns the design and `Σ = Ω⁻¹`.
pub fn gen_design(cfg: &SimConfig, seed: Seed) -> Result<(DesignMatrix, DMatrix<f64>)> {
    let (n, p) = (cfg.n, cfg.p);
    let omega = ar_precision(p, cfg.rho);
    let chol = linalg::cholesky(&omega)
        .ok_or_else(|| Error::NumericalFailure("Cholesky of the precision matrix failed".into()))?;
    let mut rng = seed.rng();
    let draws: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
    // Column i of `et` is row i of E.
    let et = DMatrix::from_column_slice(p, n, &draws);
    let upper = chol.l().transpose();
    let xt = upper
        .solve_upper_triangular(&et)
        .ok_or_else(|| Error::NumericalFailure("triangular solve failed".into()))?;
    let sigma = linalg::symmetrize(&chol.inverse());
    let x = DesignMatrix::from_matrix(xt.transpose())?.assume_centered();
    Ok((x, sigma))
}

/// Support uniform without replacement, signs uniform on ±1.
pub fn gen_beta(cfg: &SimConfig, seed: Seed) -> GroundTruth {
    let mut rng = seed.rng();
    let mut support = index::sample(&mut rng, cfg.p, cfg.s_sparsity).into_vec();
    support.sort_unstable();
    let mut beta = vec![0.0; cfg.p];
    for &j in &support {
        beta[j] = if rng.random_bool(0.5) {
            cfg.amplitude
        } else {
            -cfg.amplitude
        };
    }
    GroundTruth { beta, support }
}

pub fn link(model: ResponseModel, index: f64) -> f64 {
    match model {
        ResponseModel::Linear => index,
        ResponseModel::SingleIndex => index.powi(3) / 2.0,
    }
}

pub fn gen_response(x: &DesignMatrix, truth: &GroundTruth, cfg: &SimConfig, seed: Seed) -> Result<ResponseVector> {
    if truth.beta.len() != x.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta has length {}, design has {} columns",
            truth.beta.len(),
            x.p()
        )));
    }
    let beta = DVector::from_column_slice(&truth.beta);
    let index = x.values() * beta;
    let mut rng = seed.rng();
    let y = index.map(|v| {
        let e: f64 = StandardNormal.sample(&mut rng);
        link(cfg.model, v) + cfg.sigma_noise * e
    });
    ResponseVector::new(y)
}

/// Sub-streams of one repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionSeeds {
    pub repetition: Seed,
    pub design: Seed,
    pub beta: Seed,
    pub noise: Seed,
    pub knockoff: Seed,
    pub network: Seed,
}

impl RepetitionSeeds {
    pub fn derive(experiment: Seed, rep: usize) -> Self {
        let r = experiment.child("rep", rep as u64);
        RepetitionSeeds {
            repetition: r,
            design: r.child("design", 0),
            beta: r.child("beta", 0),
            noise: r.child("noise", 0),
            knockoff: r.child("knockoff", 0),
            network: r.child("network", 0),
        }
    }
}

/// Everything generated for one repetition before training.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub sigma: DMatrix<f64>,
    pub truth: GroundTruth,
    pub y: ResponseVector,
    pub model: KnockoffModel,
    pub augmented: AugmentedDesign,
}

/// Design, coefficients, response and knockoffs (from the analytic Σ).
pub fn simulate_data(cfg: &SimConfig, seeds: &RepetitionSeeds) -> Result<SimulatedData> {
    let (x, sigma) = gen_design(cfg, seeds.design)?;
    let truth = gen_beta(cfg, seeds.beta);
    let y = gen_response(&x, &truth, cfg, seeds.noise)?;
    let model = KnockoffModel::equicorrelated(&sigma)?;
    let augmented = sample_knockoffs(&x, &model, seeds.knockoff)?;
    Ok(SimulatedData {
        sigma,
        truth,
        y,
        model,
        augmented,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub rep: usize,
    pub seeds: RepetitionSeeds,
    pub fdp: f64,
    pub power: f64,
    pub n_selected: usize,
    /// `None` when the threshold is infinite.
    pub threshold: Option<f64>,
    pub selected: Vec<usize>,
    pub support: Vec<usize>,
    pub statistics: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// Mean FDP over repetitions.
    pub empirical_fdr: f64,
    pub mean_power: f64,
    pub mean_n_selected: f64,
    pub median_n_selected: f64,
    pub fdp_std_error: f64,
    pub power_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: SimConfig,
    /// How Σ was obtained for the knockoffs.
    pub knockoff_covariance: String,
    pub repetitions: Vec<RepetitionRecord>,
    pub aggregates: Aggregates,
}

pub fn run_repetition(cfg: &SimConfig, rep: usize) -> Result<RepetitionRecord> {
    let seeds = RepetitionSeeds::derive(cfg.seed, rep);
    let data = simulate_data(cfg, &seeds)?;
    let train = cfg.train.clone().with_seed(seeds.network);
    let ensemble = run_ensemble(&data.augmented, &data.y, &train)?;
    let report = filter::select(&ensemble.statistics, cfg.q, cfg.rule)?;
    let metrics = filter::evaluate(&report.selected, &data.truth.support);
    Ok(RepetitionRecord {
        rep,
        seeds,
        fdp: metrics.fdp,
        power: metrics.power,
        n_selected: metrics.n_selected,
        threshold: report.threshold.is_finite().then_some(report.threshold),
        selected: report.selected,
        support: data.truth.support,
        statistics: ensemble.statistics,
    })
}

/// Runs every repetition (in parallel on the current rayon pool) and
/// assembles the records in repetition order.
pub fn run_experiment(cfg: &SimConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let repetitions: Vec<RepetitionRecord> = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| {
            run_repetition(cfg, rep).map_err(|e| Error::Repetition {
                rep,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let aggregates = aggregate(&repetitions);
    Ok(ExperimentReport {
        config: cfg.clone(),
        knockoff_covariance: "analytic: inverse of the autoregressive precision matrix".into(),
        repetitions,
        aggregates,
    })
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn aggregate(records: &[RepetitionRecord]) -> Aggregates {
    let fdp: Vec<f64> = records.iter().map(|r| r.fdp).collect();
    let power: Vec<f64> = records.iter().map(|r| r.power).collect();
    let mut sizes: Vec<f64> = records.iter().map(|r| r.n_selected as f64).collect();
    let (empirical_fdr, fdp_std_error) = mean_and_se(&fdp);
    let (mean_power, power_std_error) = mean_and_se(&power);
    let (mean_n_selected, _) = mean_and_se(&sizes);
    sizes.sort_by(f64::total_cmp);
    let m = sizes.len();
    let median_n_selected = if m % 2 == 1 {
        sizes[m / 2]
    } else {
        (sizes[m / 2 - 1] + sizes[m / 2]) / 2.0
    };
    Aggregates {
        empirical_fdr,
        mean_power,
        mean_n_selected,
        median_n_selected,
        fdp_std_error,
        power_std_error,
    }
}
