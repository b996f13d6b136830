use super::{Parameters, TrainConfig};

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new<P: Parameters>(params: &P) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update at step `t` (1-based).
pub fn adam_step<P: Parameters>(params: &mut P, grads: &P, state: &mut AdamState, t: u64, cfg: &TrainConfig) {
    assert!(t >= 1, "Adam steps are 1-based");
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let exp = i32::try_from(t).unwrap_or(i32::MAX);
    let bc1 = 1.0 - b1.powi(exp);
    let bc2 = 1.0 - b2.powi(exp);
    let step = cfg.learning_rate / bc1;
    let inv_bc2 = 1.0 / bc2;
    let eps = cfg.adam_eps;
    let grads = grads.tensors();
    for (k, theta) in params.tensors_mut().into_iter().enumerate() {
        let g = grads[k];
        let m = &mut state.m[k][..];
        let v = &mut state.v[k][..];
        assert_eq!(theta.len(), g.len(), "gradient shape mismatch");
        assert_eq!(theta.len(), m.len(), "moment shape mismatch");
        for (((th, &gi), mi), vi) in theta.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = b1 * *mi + (1.0 - b1) * gi;
            *vi = b2 * *vi + (1.0 - b2) * gi * gi;
            *th -= step * *mi / ((*vi * inv_bc2).sqrt() + eps);
        }
    }
}
