//! Finite-difference verification of [`Network::loss_and_gradient`].

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Batch, Network, Parameters, PinkNetwork};
use crate::rng::Seed;

pub const FD_STEP: f64 = 1e-5;
pub const KINK_MARGIN: f64 = 1e-6;
pub const GRADIENT_TOLERANCE: f64 = 1e-4;
/// Denominator floor of the relative error, so coordinates with vanishing
/// gradient are compared absolutely.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheckReport {
    pub instances: usize,
    pub coordinates_checked: usize,
    pub coordinates_skipped: usize,
    pub max_relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR)
}

/// A network with every parameter drawn at random (filters unequal, biases
/// nonzero) and a random batch of `rows` observations.
pub fn random_instance(seed: Seed, p: usize, rows: usize) -> (PinkNetwork, Batch) {
    let mut net = PinkNetwork::init(p, seed.child("init", 0));
    let mut rng = seed.child("perturb", 0).rng();
    let mut normal = |scale: f64| -> f64 {
        let v: f64 = StandardNormal.sample(&mut rng);
        scale * v
    };
    for t in net.tensors_mut() {
        for v in t.iter_mut() {
            *v += normal(0.3);
        }
    }
    let x = DMatrix::from_fn(rows, p, |_, _| normal(1.0));
    let xk = DMatrix::from_fn(rows, p, |_, _| normal(1.0));
    let y = DVector::from_fn(rows, |_, _| normal(2.0));
    (net, Batch::new(x, xk, y).expect("consistent shapes"))
}

/// Compares analytic gradients with central differences on `instances`
/// random networks with `p ∈ {2, …, 8}` and batches of 3, skipping
/// coordinates whose perturbation crosses a ReLU or L1 kink.
pub fn gradient_check(seed: Seed, instances: usize) -> GradientCheckReport {
    let mut checked = 0;
    let mut skipped = 0;
    let mut worst: f64 = 0.0;
    let mut rng = seed.child("sizes", 0).rng();
    for i in 0..instances {
        let p = rng.random_range(2..=8);
        let lambda = rng.random_range(0.0..0.1);
        let (net, batch) = random_instance(seed.child("instance", i as u64), p, 3);
        let (_, grad) = net.loss_and_gradient(&batch, lambda);
        let analytic = grad.to_flat();
        let theta = net.to_flat();
        let penalized = penalized_mask(&net);
        let base_pattern = net.pre_activations(&batch);
        if base_pattern.iter().any(|u| u.abs() < KINK_MARGIN) {
            skipped += theta.len();
            continue;
        }
        let mut probe = net.clone();
        for k in 0..theta.len() {
            if penalized[k] && theta[k].abs() <= FD_STEP + KINK_MARGIN {
                skipped += 1;
                continue;
            }
            let mut shifted = theta.clone();
            shifted[k] = theta[k] + FD_STEP;
            probe.set_flat(&shifted);
            let up = probe.loss(&batch, lambda);
            let up_pattern = probe.pre_activations(&batch);
            shifted[k] = theta[k] - FD_STEP;
            probe.set_flat(&shifted);
            let down = probe.loss(&batch, lambda);
            let down_pattern = probe.pre_activations(&batch);
            if crosses_kink(&base_pattern, &up_pattern) || crosses_kink(&base_pattern, &down_pattern) {
                skipped += 1;
                continue;
            }
            let numeric = (up - down) / (2.0 * FD_STEP);
            worst = worst.max(relative_error(analytic[k], numeric));
            checked += 1;
        }
    }
    GradientCheckReport {
        instances,
        coordinates_checked: checked,
        coordinates_skipped: skipped,
        max_relative_error: worst,
        tolerance: GRADIENT_TOLERANCE,
        pass: worst <= GRADIENT_TOLERANCE,
    }
}

fn crosses_kink(a: &[f64], b: &[f64]) -> bool {
    a.iter()
        .zip(b)
        .any(|(u, v)| (*u > 0.0) != (*v > 0.0) || v.abs() < KINK_MARGIN)
}

fn penalized_mask(net: &PinkNetwork) -> Vec<bool> {
    net.tensors()
        .iter()
        .zip(PinkNetwork::PENALIZED)
        .flat_map(|(t, pen)| std::iter::repeat_n(pen, t.len()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradients_agree_with_finite_differences() {
        let report = gradient_check(Seed(2024), 10);
        assert!(report.coordinates_checked > 100);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let (net, batch) = random_instance(Seed(5), 3, 3);
        let (_, grad) = net.loss_and_gradient(&batch, 0.0);
        let k = 4;
        let theta = net.to_flat();
        let mut probe = net.clone();
        let mut shifted = theta.clone();
        shifted[k] += FD_STEP;
        probe.set_flat(&shifted);
        let up = probe.loss(&batch, 0.0);
        shifted[k] = theta[k] - FD_STEP;
        probe.set_flat(&shifted);
        let down = probe.loss(&batch, 0.0);
        let numeric = (up - down) / (2.0 * FD_STEP);
        let wrong = grad.to_flat()[k] * 1.01 + 1e-3;
        assert!(relative_error(wrong, numeric) > GRADIENT_TOLERANCE);
    }
}
