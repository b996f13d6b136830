use nalgebra::{DMatrix, DVector};

use super::mlp::Mlp;
use super::{Batch, ImportancePair, Network, Parameters};
use crate::rng::Seed;

/// Baseline without the filter layer: the MLP sees `(x, x̃)` as `2p` inputs.
///
/// Importances come from the path product `W1 W2 w3`: entry `j` scores the
/// original feature and entry `j + p` its knockoff.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveMlp {
    pub mlp: Mlp,
}

impl NaiveMlp {
    pub fn init(p: usize, seed: Seed) -> Self {
        assert!(p >= 1, "network needs at least one feature");
        let mut rng = seed.rng();
        NaiveMlp {
            mlp: Mlp::init(2 * p, p, &mut rng),
        }
    }

    pub fn zeros(p: usize) -> Self {
        NaiveMlp {
            mlp: Mlp::zeros(2 * p, p),
        }
    }

    fn inputs(&self, batch: &Batch) -> DMatrix<f64> {
        assert_eq!(batch.p(), self.p(), "batch has the wrong number of features");
        let (b, p) = batch.x.shape();
        let mut g = DMatrix::zeros(b, 2 * p);
        g.view_mut((0, 0), (b, p)).copy_from(&batch.x);
        g.view_mut((0, p), (b, p)).copy_from(&batch.knockoff);
        g
    }
}

impl Parameters for NaiveMlp {
    fn tensors(&self) -> Vec<&[f64]> {
        self.mlp.tensors().to_vec()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.mlp.tensors_mut().into_iter().collect()
    }
}

impl Network for NaiveMlp {
    fn p(&self) -> usize {
        self.mlp.hidden()
    }

    fn predict(&self, batch: &Batch) -> DVector<f64> {
        self.mlp.forward(&self.inputs(batch)).0
    }

    fn l1_norm(&self) -> f64 {
        self.mlp.l1_norm()
    }

    fn loss_and_gradient(&self, batch: &Batch, lambda: f64) -> (f64, Self) {
        let b = batch.len() as f64;
        let g = self.inputs(batch);
        let (pred, cache) = self.mlp.forward(&g);
        let resid = pred - &batch.y;
        let loss = resid.norm_squared() / b + lambda * self.l1_norm();
        let dy = resid * (2.0 / b);
        let mut grad = NaiveMlp::zeros(self.p());
        self.mlp.backward(&g, &cache, &dy, &mut grad.mlp, false);
        self.mlp.add_l1_subgradient(&mut grad.mlp, lambda);
        (loss, grad)
    }

    fn importance(&self) -> ImportancePair {
        let p = self.p();
        let path = self.mlp.path_product();
        ImportancePair {
            original: path.rows(0, p).iter().copied().collect(),
            knockoff: path.rows(p, p).iter().copied().collect(),
            path_weight: None,
        }
    }
}
