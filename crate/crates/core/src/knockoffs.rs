//! Gaussian model-X knockoffs.
//!
//! For `x ~ N(0, Σ)` and a gap vector `s > 0`, knockoffs are drawn from
//!
//! ```text
//! x̃ | x ~ N( (I − diag{s} Σ⁻¹) x ,  2 diag{s} − diag{s} Σ⁻¹ diag{s} )
//! ```
//!
//! which makes `(x, x̃)` jointly Gaussian with covariance
//! `[[Σ, Σ − diag{s}], [Σ − diag{s}, Σ]]`. Sampling never sees the response.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs_diff, min_eigenvalue, repair_pd, spd_inverse, symmetrize};
use crate::rng::Seed;

pub const DEFAULT_SHRINK_FACTOR: f64 = 0.95;
pub const DEFAULT_PD_TOLERANCE: f64 = 1e-8;
/// Constant `c` in the diagnostic tolerance `c · max_j Σ_jj · √(ln p / n)`.
pub const DIAGNOSTIC_CONSTANT: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceMode {
    Known(DMatrix<f64>),
    Empirical,
    /// Linear shrinkage toward the diagonal; `None` picks the intensity from data.
    Shrinkage(Option<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub sigma: DMatrix<f64>,
    /// Shrinkage intensity actually used, for `Shrinkage` mode.
    pub shrinkage: Option<f64>,
    /// Diagonal jitter added to restore positive definiteness.
    pub jitter: f64,
}

/// Estimates Σ for a centered design.
///
/// `Empirical` is `XᵀX / (n − 1)`. `Shrinkage(γ)` returns
/// `(1 − γ) Σ̂ + γ diag(Σ̂)`; with `γ = None` the intensity is the ratio of the
/// summed variance estimates of the off-diagonal entries to their summed
/// squares, clipped to `[0, 1]`.
pub fn estimate_covariance(x: &DesignMatrix, mode: &CovarianceMode) -> Result<CovarianceEstimate> {
    let p = x.p();
    let (raw, shrinkage) = match mode {
        CovarianceMode::Known(sigma) => {
            if sigma.shape() != (p, p) {
                return Err(Error::DimensionMismatch(format!(
                    "known covariance is {}x{}, expected {p}x{p}",
                    sigma.nrows(),
                    sigma.ncols()
                )));
            }
            if sigma.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("known covariance has non-finite entries".into()));
            }
            (sigma.clone(), None)
        }
        CovarianceMode::Empirical => {
            require_centered(x)?;
            (empirical_covariance(x.values()), None)
        }
        CovarianceMode::Shrinkage(gamma) => {
            require_centered(x)?;
            let emp = empirical_covariance(x.values());
            let gamma = match gamma {
                Some(g) if (0.0..=1.0).contains(g) => *g,
                Some(g) => return Err(Error::InvalidInput(format!("shrinkage intensity {g} outside [0, 1]"))),
                None => shrinkage_intensity(x.values(), &emp),
            };
            (shrink_to_diagonal(&emp, gamma), Some(gamma))
        }
    };
    let (sigma, jitter) = repair_pd(&raw, "covariance")?;
    Ok(CovarianceEstimate {
        sigma,
        shrinkage,
        jitter,
    })
}

fn require_centered(x: &DesignMatrix) -> Result<()> {
    if x.is_centered() {
        Ok(())
    } else {
        Err(Error::InvalidInput("design matrix must be centered".into()))
    }
}

fn empirical_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    symmetrize(&(x.tr_mul(x) / (n - 1.0)))
}

fn shrink_to_diagonal(emp: &DMatrix<f64>, gamma: f64) -> DMatrix<f64> {
    let mut out = emp * (1.0 - gamma);
    for i in 0..emp.nrows() {
        out[(i, i)] = emp[(i, i)];
    }
    out
}

fn shrinkage_intensity(x: &DMatrix<f64>, emp: &DMatrix<f64>) -> f64 {
    let (n, p) = x.shape();
    let nf = n as f64;
    let var_scale = nf / (nf - 1.0).powi(3);
    let mut var_sum = 0.0;
    let mut energy = 0.0;
    for j in 0..p {
        let xj = x.column(j);
        for k in (j + 1)..p {
            let xk = x.column(k);
            let mean_w = xj.dot(&xk) / nf;
            let dev: f64 = xj.iter().zip(xk.iter()).map(|(a, b)| (a * b - mean_w).powi(2)).sum();
            var_sum += var_scale * dev;
            energy += emp[(j, k)].powi(2);
        }
    }
    if energy <= 0.0 {
        1.0
    } else {
        (var_sum / energy).clamp(0.0, 1.0)
    }
}

/// Equicorrelated knockoff gaps.
///
/// On the correlation scale every gap is `shrink_factor · min(1, 2 λ_min)`;
/// the result is mapped back to the scale of `sigma`. If the conditional
/// covariance still fails to factor, the gaps are halved until it does.
pub fn equicorrelated_s(sigma: &DMatrix<f64>, shrink_factor: f64) -> Result<DVector<f64>> {
    check_square(sigma)?;
    if !(shrink_factor > 0.0 && shrink_factor < 1.0) {
        return Err(Error::InvalidInput(format!(
            "shrink factor {shrink_factor} must lie in (0, 1)"
        )));
    }
    let p = sigma.nrows();
    let diag: Vec<f64> = (0..p).map(|i| sigma[(i, i)]).collect();
    if diag.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            what: "covariance diagonal".into(),
            min_eigenvalue: diag.iter().copied().fold(f64::INFINITY, f64::min),
        });
    }
    let sd: Vec<f64> = diag.iter().map(|d| d.sqrt()).collect();
    let corr = DMatrix::from_fn(p, p, |i, j| sigma[(i, j)] / (sd[i] * sd[j]));
    let lambda = min_eigenvalue(&corr)?;
    if !(lambda > 0.0) {
        return Err(Error::NotPositiveDefinite {
            what: "covariance".into(),
            min_eigenvalue: lambda,
        });
    }
    let gap = shrink_factor * (2.0 * lambda).min(1.0);
    let mut s = DVector::from_iterator(p, diag.iter().map(|d| gap * d));

    let omega = spd_inverse(sigma)?;
    for _ in 0..64 {
        let v = conditional_covariance(&omega, &s);
        if linalg::cholesky(&v).is_some() && min_eigenvalue(&v)? >= DEFAULT_PD_TOLERANCE {
            return Ok(s);
        }
        s *= 0.5;
    }
    Err(Error::NumericalFailure(
        "could not find knockoff gaps with a positive definite conditional covariance".into(),
    ))
}

fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// `2 diag{s} − diag{s} Ω diag{s}`.
fn conditional_covariance(omega: &DMatrix<f64>, s: &DVector<f64>) -> DMatrix<f64> {
    let p = s.len();
    let v = DMatrix::from_fn(p, p, |i, j| {
        let two_s = if i == j { 2.0 * s[i] } else { 0.0 };
        two_s - s[i] * omega[(i, j)] * s[j]
    });
    symmetrize(&v)
}

/// Everything needed to draw knockoffs for a fixed Σ and gap vector.
#[derive(Debug, Clone, PartialEq)]
pub struct KnockoffModel {
    sigma: DMatrix<f64>,
    omega: DMatrix<f64>,
    s: DVector<f64>,
    mean_map: DMatrix<f64>,
    cond_chol: DMatrix<f64>,
}

impl KnockoffModel {
    pub fn new(sigma: &DMatrix<f64>, s: &DVector<f64>) -> Result<Self> {
        Self::with_tolerance(sigma, s, DEFAULT_PD_TOLERANCE)
    }

    pub fn with_tolerance(sigma: &DMatrix<f64>, s: &DVector<f64>, pd_tolerance: f64) -> Result<Self> {
        check_square(sigma)?;
        let p = sigma.nrows();
        if s.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "gap vector has length {}, expected {p}",
                s.len()
            )));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("gap vector has non-finite entries".into()));
        }
        let sigma = symmetrize(sigma);
        let omega = spd_inverse(&sigma)?;
        if max_abs_diff(&(&omega * &sigma), &DMatrix::identity(p, p)) > 1e-6 {
            return Err(Error::SingularSigma);
        }

        let v = conditional_covariance(&omega, s);
        let min_eig = min_eigenvalue(&v)?;
        if s.iter().any(|v| !(*v > 0.0)) || min_eig < pd_tolerance {
            return Err(Error::NotPositiveDefinite {
                what: "knockoff conditional covariance".into(),
                min_eigenvalue: min_eig,
            });
        }
        let chol = linalg::cholesky(&v).ok_or_else(|| Error::NotPositiveDefinite {
            what: "knockoff conditional covariance".into(),
            min_eigenvalue: min_eig,
        })?;
        let cond_chol = chol.l();
        if max_abs_diff(&(&cond_chol * cond_chol.transpose()), &v) > 1e-8 * (1.0 + v.amax()) {
            return Err(Error::NumericalFailure("Cholesky reconstruction check failed".into()));
        }

        let mut mean_map = -DMatrix::from_diagonal(s) * &omega;
        for i in 0..p {
            mean_map[(i, i)] += 1.0;
        }
        Ok(KnockoffModel {
            sigma,
            omega,
            s: s.clone(),
            mean_map,
            cond_chol,
        })
    }

    /// Equicorrelated gaps with the default shrink factor, then [`KnockoffModel::new`].
    pub fn equicorrelated(sigma: &DMatrix<f64>) -> Result<Self> {
        let s = equicorrelated_s(sigma, DEFAULT_SHRINK_FACTOR)?;
        Self::new(sigma, &s)
    }

    pub fn p(&self) -> usize {
        self.s.len()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn omega(&self) -> &DMatrix<f64> {
        &self.omega
    }

    pub fn s(&self) -> &DVector<f64> {
        &self.s
    }

    /// `A = I − diag{s} Ω`, so that `E[x̃ | x] = A x`.
    pub fn mean_map(&self) -> &DMatrix<f64> {
        &self.mean_map
    }

    /// Lower Cholesky factor of the conditional covariance.
    pub fn cond_chol(&self) -> &DMatrix<f64> {
        &self.cond_chol
    }

    pub fn conditional_covariance(&self) -> DMatrix<f64> {
        conditional_covariance(&self.omega, &self.s)
    }

    /// The `2p × 2p` covariance of `(x, x̃)`.
    pub fn joint_covariance(&self) -> DMatrix<f64> {
        let p = self.p();
        let mut cross = self.sigma.clone();
        for i in 0..p {
            cross[(i, i)] -= self.s[i];
        }
        let mut out = DMatrix::zeros(2 * p, 2 * p);
        out.view_mut((0, 0), (p, p)).copy_from(&self.sigma);
        out.view_mut((p, p), (p, p)).copy_from(&self.sigma);
        out.view_mut((0, p), (p, p)).copy_from(&cross);
        out.view_mut((p, 0), (p, p)).copy_from(&cross);
        out
    }
}

/// Original features paired with their knockoffs; column `j` of `knockoff`
/// is the copy of column `j` of `original`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDesign {
    original: DesignMatrix,
    knockoff: DMatrix<f64>,
}

impl AugmentedDesign {
    pub fn new(original: DesignMatrix, knockoff: DMatrix<f64>) -> Result<Self> {
        if knockoff.shape() != original.values().shape() {
            return Err(Error::DimensionMismatch(format!(
                "knockoff matrix is {:?}, original is {:?}",
                knockoff.shape(),
                original.values().shape()
            )));
        }
        if knockoff.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("knockoff matrix has non-finite entries".into()));
        }
        Ok(AugmentedDesign { original, knockoff })
    }

    pub fn original(&self) -> &DesignMatrix {
        &self.original
    }

    pub fn x(&self) -> &DMatrix<f64> {
        self.original.values()
    }

    pub fn knockoff(&self) -> &DMatrix<f64> {
        &self.knockoff
    }

    pub fn n(&self) -> usize {
        self.original.n()
    }

    pub fn p(&self) -> usize {
        self.original.p()
    }

    /// `[X, X̃]` as an `n × 2p` matrix.
    pub fn stacked(&self) -> DMatrix<f64> {
        let (n, p) = (self.n(), self.p());
        let mut out = DMatrix::zeros(n, 2 * p);
        out.view_mut((0, 0), (n, p)).copy_from(self.x());
        out.view_mut((0, p), (n, p)).copy_from(&self.knockoff);
        out
    }

    pub fn knockoff_names(&self) -> Vec<String> {
        self.original
            .column_names()
            .iter()
            .map(|name| format!("{name}_ko"))
            .collect()
    }

    /// Exchanges each listed feature with its knockoff.
    pub fn swap(&self, features: &[usize]) -> Result<AugmentedDesign> {
        let mut x = self.x().clone();
        let mut xk = self.knockoff.clone();
        for &j in features {
            if j >= self.p() {
                return Err(Error::DimensionMismatch(format!("feature {j} out of range")));
            }
            x.set_column(j, &self.knockoff.column(j));
            xk.set_column(j, &self.x().column(j));
        }
        let mut original = DesignMatrix::new(x, self.original.column_names().to_vec())?;
        if self.original.is_centered() {
            original = original.assume_centered();
        }
        AugmentedDesign::new(original, xk)
    }
}

/// Draws `X̃ = X Aᵀ + E Lᵀ` with `E` standard normal, filled row by row
/// from the generator seeded by `seed`.
pub fn sample_knockoffs(x: &DesignMatrix, model: &KnockoffModel, seed: Seed) -> Result<AugmentedDesign> {
    if x.p() != model.p() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} columns, knockoff model has {}",
            x.p(),
            model.p()
        )));
    }
    require_centered(x)?;
    let (n, p) = (x.n(), x.p());
    let mut rng = seed.rng();
    let noise: Vec<f64> = (0..n * p).map(|_| StandardNormal.sample(&mut rng)).collect();
    let e = DMatrix::from_row_slice(n, p, &noise);
    let knockoff = x.values() * model.mean_map().transpose() + e * model.cond_chol().transpose();
    AugmentedDesign::new(x.clone(), knockoff)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeabilityDiagnostic {
    pub n: usize,
    pub p: usize,
    /// Max-norm deviation of the empirical Cov(X) from Σ.
    pub original_deviation: f64,
    /// Max-norm deviation of the empirical Cov(X̃) from Σ.
    pub knockoff_deviation: f64,
    /// Max-norm deviation of the empirical Cov(X, X̃) from Σ − diag{s}.
    pub cross_deviation: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the empirical covariance of `[X, X̃]` with the block structure
/// implied by `model`.
pub fn exchangeability_diagnostic(aug: &AugmentedDesign, model: &KnockoffModel) -> ExchangeabilityDiagnostic {
    let (n, p) = (aug.n(), aug.p());
    let mut stacked = aug.stacked();
    for mut col in stacked.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    let emp = stacked.tr_mul(&stacked) / (n as f64 - 1.0);
    let target = model.joint_covariance();
    let block_dev = |r: usize, c: usize| {
        let e = emp.view((r, c), (p, p)).clone_owned();
        let t = target.view((r, c), (p, p)).clone_owned();
        max_abs_diff(&e, &t)
    };
    let original_deviation = block_dev(0, 0);
    let knockoff_deviation = block_dev(p, p);
    let cross_deviation = block_dev(0, p).max(block_dev(p, 0));
    let max_deviation = original_deviation.max(knockoff_deviation).max(cross_deviation);
    let scale = (0..p).map(|i| model.sigma()[(i, i)]).fold(0.0, f64::max);
    let tolerance = DIAGNOSTIC_CONSTANT * scale * ((p.max(2) as f64).ln() / n as f64).sqrt();
    ExchangeabilityDiagnostic {
        n,
        p,
        original_deviation,
        knockoff_deviation,
        cross_deviation,
        max_deviation,
        tolerance,
        pass: max_deviation <= tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn empirical_covariance_of_alternating_pair() {
        let x = DesignMatrix::from_matrix(m(4, 2, &[1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0]))
            .unwrap()
            .standardize(false)
            .unwrap();
        // Exactly singular: the repair step adds the smallest jitter that factors.
        let est = estimate_covariance(&x, &CovarianceMode::Empirical).unwrap();
        let expected = m(2, 2, &[4.0 / 3.0, -4.0 / 3.0, -4.0 / 3.0, 4.0 / 3.0]);
        assert!(max_abs_diff(&est.sigma, &expected) <= 1e-4 * 4.0 / 3.0 + 1e-15);
        assert!(est.jitter > 0.0);
    }

    #[test]
    fn full_shrinkage_is_the_diagonal() {
        let x = DesignMatrix::from_matrix(m(4, 2, &[1.0, 0.5, 2.0, 1.0, -1.0, 0.0, 3.0, 2.5]))
            .unwrap()
            .standardize(false)
            .unwrap();
        let emp = estimate_covariance(&x, &CovarianceMode::Empirical).unwrap().sigma;
        let full = estimate_covariance(&x, &CovarianceMode::Shrinkage(Some(1.0))).unwrap();
        assert_eq!(full.sigma, DMatrix::from_diagonal(&emp.diagonal()));
        assert_eq!(full.shrinkage, Some(1.0));
    }

    #[test]
    fn automatic_shrinkage_in_unit_interval() {
        let x = DesignMatrix::from_matrix(m(
            5,
            3,
            &[
                1.0, 0.2, -0.3, 0.4, 1.1, 0.0, -0.7, 0.3, 0.9, 0.1, -1.2, 0.5, -0.8, -0.4, -1.1,
            ],
        ))
        .unwrap()
        .standardize(true)
        .unwrap();
        let est = estimate_covariance(&x, &CovarianceMode::Shrinkage(None)).unwrap();
        let g = est.shrinkage.unwrap();
        assert!((0.0..=1.0).contains(&g));
    }

    #[test]
    fn uncentered_design_rejected_for_estimation() {
        let x = DesignMatrix::from_matrix(m(3, 1, &[1.0, 2.0, 3.0])).unwrap();
        assert!(estimate_covariance(&x, &CovarianceMode::Empirical).is_err());
    }

    #[test]
    fn known_mode_checks_shape() {
        let x = DesignMatrix::from_matrix(m(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 7.0])).unwrap();
        let err = estimate_covariance(&x, &CovarianceMode::Known(DMatrix::identity(3, 3)));
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
        let ok = estimate_covariance(&x, &CovarianceMode::Known(DMatrix::identity(2, 2))).unwrap();
        assert_eq!(ok.sigma, DMatrix::identity(2, 2));
    }

    #[test]
    fn equicorrelated_identity() {
        let s = equicorrelated_s(&DMatrix::identity(4, 4), 0.95).unwrap();
        assert!(s.iter().all(|v| (*v - 0.95).abs() < 1e-12));
    }

    #[test]
    fn equicorrelated_pair() {
        let sigma = m(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let s = equicorrelated_s(&sigma, 0.9).unwrap();
        assert!((s[0] - 0.9).abs() < 1e-12 && (s[1] - 0.9).abs() < 1e-12);
        let model = KnockoffModel::new(&sigma, &s).unwrap();
        let v = model.conditional_covariance();
        assert!(max_abs_diff(&v, &m(2, 2, &[0.72, 0.54, 0.54, 0.72])) < 1e-12);
        assert!(min_eigenvalue(&v).unwrap() > 0.0);
    }

    #[test]
    fn equicorrelated_nearly_collinear_pair() {
        let sigma = m(2, 2, &[1.0, 0.99, 0.99, 1.0]);
        let s = equicorrelated_s(&sigma, 0.95).unwrap();
        // λ_min = 0.01, so the unshrunk gap is 0.02.
        assert!((s[0] - 0.95 * 0.02).abs() < 1e-10);
        let model = KnockoffModel::new(&sigma, &s).unwrap();
        assert!(min_eigenvalue(&model.conditional_covariance()).unwrap() >= DEFAULT_PD_TOLERANCE);
    }

    #[test]
    fn equicorrelated_rescales_to_covariance_units() {
        let sigma = m(2, 2, &[4.0, 1.0, 1.0, 1.0]);
        let s = equicorrelated_s(&sigma, 0.95).unwrap();
        // correlation 0.5 → λ_min 0.5 → gap 0.95 on the correlation scale
        assert!((s[0] - 0.95 * 4.0).abs() < 1e-10);
        assert!((s[1] - 0.95).abs() < 1e-10);
        assert!(KnockoffModel::new(&sigma, &s).is_ok());
    }

    #[test]
    fn model_for_correlated_pair() {
        let sigma = m(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let s = DVector::from_vec(vec![0.9, 0.9]);
        let model = KnockoffModel::new(&sigma, &s).unwrap();
        assert!(max_abs_diff(model.omega(), &m(2, 2, &[4.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0])) < 1e-12);
        assert!(max_abs_diff(model.mean_map(), &m(2, 2, &[-0.2, 0.6, 0.6, -0.2])) < 1e-12);
        let l = model.cond_chol();
        assert!(l[(0, 1)] == 0.0);
        assert!(max_abs_diff(&(l * l.transpose()), &m(2, 2, &[0.72, 0.54, 0.54, 0.72])) < 1e-12);
    }

    #[test]
    fn identity_model_is_nearly_independent() {
        let s = DVector::from_element(3, 1.0 - 1e-3);
        let model = KnockoffModel::new(&DMatrix::identity(3, 3), &s).unwrap();
        assert!(model.mean_map().amax() < 1.01e-3);
        assert!(max_abs_diff(&model.conditional_covariance(), &DMatrix::identity(3, 3)) < 1e-5);
    }

    #[test]
    fn zero_gap_rejected() {
        let s = DVector::from_vec(vec![0.5, 0.0]);
        let err = KnockoffModel::new(&DMatrix::identity(2, 2), &s);
        assert!(matches!(err, Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn gap_too_large_rejected() {
        // s = 2.5 > 2 λ_min makes 2s − s² negative.
        let s = DVector::from_vec(vec![2.5, 2.5]);
        let err = KnockoffModel::new(&DMatrix::identity(2, 2), &s);
        match err {
            Err(Error::NotPositiveDefinite { min_eigenvalue, .. }) => assert!(min_eigenvalue < 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_sigma_rejected() {
        let sigma = m(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let s = DVector::from_vec(vec![0.1, 0.1]);
        assert!(matches!(KnockoffModel::new(&sigma, &s), Err(Error::SingularSigma)));
    }

    #[test]
    fn sampling_is_deterministic_and_checks_shape() {
        let x = DesignMatrix::from_matrix(m(3, 2, &[1.0, 0.0, -1.0, 2.0, 0.0, -2.0]))
            .unwrap()
            .standardize(false)
            .unwrap();
        let model = KnockoffModel::equicorrelated(&DMatrix::identity(2, 2)).unwrap();
        let a = sample_knockoffs(&x, &model, Seed(3)).unwrap();
        let b = sample_knockoffs(&x, &model, Seed(3)).unwrap();
        assert_eq!(a.knockoff(), b.knockoff());
        let c = sample_knockoffs(&x, &model, Seed(4)).unwrap();
        assert_ne!(a.knockoff(), c.knockoff());
        let wrong = KnockoffModel::equicorrelated(&DMatrix::identity(3, 3)).unwrap();
        assert!(matches!(
            sample_knockoffs(&x, &wrong, Seed(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn swap_exchanges_pairs() {
        let x = DesignMatrix::from_matrix(m(2, 2, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        let aug = AugmentedDesign::new(x, m(2, 2, &[5.0, 6.0, 7.0, 8.0])).unwrap();
        let swapped = aug.swap(&[1]).unwrap();
        assert_eq!(swapped.x(), &m(2, 2, &[1.0, 6.0, 3.0, 8.0]));
        assert_eq!(swapped.knockoff(), &m(2, 2, &[5.0, 2.0, 7.0, 4.0]));
        assert_eq!(aug.knockoff_names(), vec!["X1_ko", "X2_ko"]);
    }
}
