//! Monte Carlo checks of the Gaussian knockoff sampler.

use deeppink::knockoffs::{exchangeability_diagnostic, sample_knockoffs, AugmentedDesign, KnockoffModel};
use deeppink::simgen::{gen_design, SimConfig};
use deeppink::{DesignMatrix, Seed};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

/// Σ = Ω⁻¹ for `Ω_jk = ρ^|j−k|`, by Gauss-Jordan inversion.
fn ar_sigma(p: usize, rho: f64) -> DMatrix<f64> {
    let omega = DMatrix::from_fn(p, p, |j, k| rho.powi(j.abs_diff(k) as i32));
    omega.try_inverse().unwrap()
}

/// `[[Σ, Σ − diag s], [Σ − diag s, Σ]]`, assembled entry by entry.
fn block_target(sigma: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let p = sigma.nrows();
    DMatrix::from_fn(2 * p, 2 * p, |i, j| {
        let (a, b) = (i % p, j % p);
        let cross = (i < p) != (j < p);
        sigma[(a, b)] - if cross && a == b { s[a] } else { 0.0 }
    })
}

fn sample_cov(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() as f64;
    let mut c = m.clone();
    for mut col in c.column_iter_mut() {
        let mu = col.mean();
        col.add_scalar_mut(-mu);
    }
    c.tr_mul(&c) / (n - 1.0)
}

fn max_dev(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

fn ar_knockoffs(n: usize, p: usize, seed: u64) -> (AugmentedDesign, KnockoffModel) {
    let mut cfg = SimConfig::linear(p);
    cfg.n = n;
    let (x, sigma) = gen_design(&cfg, Seed(seed).child("design", 0)).unwrap();
    let model = KnockoffModel::equicorrelated(&sigma).unwrap();
    let aug = sample_knockoffs(&x, &model, Seed(seed).child("knockoff", 0)).unwrap();
    (aug, model)
}

#[test]
fn independent_features_give_uncorrelated_knockoffs() {
    let (n, p) = (100_000, 4);
    let mut rng = Seed(11).rng();
    let draws: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = DesignMatrix::from_matrix(DMatrix::from_row_slice(n, p, &draws))
        .unwrap()
        .assume_centered();
    let s = DVector::from_element(p, 1.0 - 1e-9);
    let model = KnockoffModel::new(&DMatrix::identity(p, p), &s).unwrap();
    let aug = sample_knockoffs(&x, &model, Seed(12)).unwrap();
    for j in 0..p {
        let a = aug.x().column(j);
        let b = aug.knockoff().column(j);
        let corr = (a.dot(&b) - n as f64 * a.mean() * b.mean()) / ((a.variance() * b.variance()).sqrt() * n as f64);
        assert!(corr.abs() < 0.02, "feature {j}: corr {corr}");
    }
}

#[test]
fn joint_covariance_matches_block_structure() {
    let p = 10;
    let (aug, model) = ar_knockoffs(100_000, p, 3);
    let target = block_target(&ar_sigma(p, 0.5), model.s());
    let dev = max_dev(&sample_cov(&aug.stacked()), &target);
    assert!(dev <= 0.03, "max deviation {dev}");
}

#[test]
fn deviation_shrinks_with_sample_size() {
    let p = 10;
    let target_for = |m: &KnockoffModel| block_target(&ar_sigma(p, 0.5), m.s());
    let mean_dev = |n: usize| {
        (0..5)
            .map(|seed| {
                let (aug, model) = ar_knockoffs(n, p, 100 + seed);
                max_dev(&sample_cov(&aug.stacked()), &target_for(&model))
            })
            .sum::<f64>()
            / 5.0
    };
    let (small, large) = (mean_dev(1_000), mean_dev(100_000));
    assert!(
        large < small,
        "n=1e5 deviation {large} not below n=1e3 deviation {small}"
    );
}

#[test]
fn diagnostic_passes_for_correct_knockoffs() {
    let (aug, model) = ar_knockoffs(100_000, 10, 5);
    let d = exchangeability_diagnostic(&aug, &model);
    assert!(d.pass, "{d:?}");
    assert!(d.max_deviation <= 0.03);
}

#[test]
fn diagnostic_fails_when_knockoffs_copy_the_features() {
    let (aug, model) = ar_knockoffs(100_000, 10, 6);
    let copied = AugmentedDesign::new(aug.original().clone(), aug.x().clone()).unwrap();
    let d = exchangeability_diagnostic(&copied, &model);
    assert!(!d.pass, "{d:?}");
    // Cov(X, X) = Σ while the target is Σ − diag s.
    let s_max = model.s().max();
    assert!((d.cross_deviation - s_max).abs() < 0.05, "{d:?}");
}

#[test]
fn diagnostic_fails_for_row_permuted_knockoffs() {
    let p = 10;
    let (aug, model) = ar_knockoffs(100_000, p, 7);
    let mut rows: Vec<usize> = (0..aug.n()).collect();
    rows.shuffle(&mut Seed(8).rng());
    let permuted = AugmentedDesign::new(aug.original().clone(), aug.knockoff().select_rows(&rows)).unwrap();
    let d = exchangeability_diagnostic(&permuted, &model);
    assert!(!d.pass, "{d:?}");
    // Cross covariance collapses to zero, so the deviation is the largest |Σ − diag s| entry.
    let target = ar_sigma(p, 0.5) - DMatrix::from_diagonal(model.s());
    assert!((d.cross_deviation - target.amax()).abs() < 0.03, "{d:?}");
}

#[test]
fn sampling_is_deterministic() {
    let (a, _) = ar_knockoffs(500, 6, 9);
    let (b, _) = ar_knockoffs(500, 6, 9);
    assert_eq!(a.knockoff(), b.knockoff());
    let (c, _) = ar_knockoffs(500, 6, 10);
    assert_ne!(a.knockoff(), c.knockoff());
}
