use nalgebra::{DMatrix, DVector};

use super::mlp::{normal_vec, Mlp};
use super::{l1_sign, Batch, ImportancePair, Network, Parameters};
use crate::error::{Error, Result};
use crate::rng::Seed;

/// Filter layer plus MLP.
#[derive(Debug, Clone, PartialEq)]
pub struct PinkNetwork {
    /// Filter weights on the original features.
    pub z: DVector<f64>,
    /// Filter weights on the knockoffs.
    pub z_tilde: DVector<f64>,
    /// Weights from the filters into the MLP.
    pub w0: DVector<f64>,
    pub mlp: Mlp,
}

impl PinkNetwork {
    /// Filters start at `1/√2` on both sides of every pair; `w0` is drawn
    /// first (variance `2/p`), then the MLP weights.
    pub fn init(p: usize, seed: Seed) -> Self {
        assert!(p >= 1, "network needs at least one feature");
        let mut rng = seed.rng();
        let filter = std::f64::consts::FRAC_1_SQRT_2;
        let w0 = DVector::from_vec(normal_vec(p, p, &mut rng));
        let mlp = Mlp::init(p, p, &mut rng);
        PinkNetwork {
            z: DVector::from_element(p, filter),
            z_tilde: DVector::from_element(p, filter),
            w0,
            mlp,
        }
    }

    pub fn zeros(p: usize) -> Self {
        PinkNetwork {
            z: DVector::zeros(p),
            z_tilde: DVector::zeros(p),
            w0: DVector::zeros(p),
            mlp: Mlp::zeros(p, p),
        }
    }

    /// Prediction for one observation.
    pub fn forward(&self, x: &[f64], knockoff: &[f64]) -> Result<f64> {
        let p = self.p();
        if x.len() != p || knockoff.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "expected {p} features, got {} and {}",
                x.len(),
                knockoff.len()
            )));
        }
        let batch = Batch::single(x, knockoff, 0.0)?;
        Ok(self.predict(&batch)[0])
    }

    /// Which of [`Parameters::tensors`] carry the L1 penalty (biases do not).
    pub const PENALIZED: [bool; 9] = [true, true, true, true, false, true, false, true, false];

    /// Hidden-layer pre-activations for every row of the batch, flattened.
    /// Their signs fix the network's linear region.
    pub fn pre_activations(&self, batch: &Batch) -> Vec<f64> {
        self.check_batch(batch);
        let g = self.scaled_filter(&self.filter(batch));
        self.mlp.pre_activations(&g)
    }

    /// Gradient of the penalized loss; same layout as the network.
    pub fn backward(&self, batch: &Batch, lambda: f64) -> PinkNetwork {
        self.loss_and_gradient(batch, lambda).1
    }

    /// Filter outputs `h` (batch × p).
    fn filter(&self, batch: &Batch) -> DMatrix<f64> {
        let mut h = batch.x.clone();
        for j in 0..self.p() {
            let (zj, ztj) = (self.z[j], self.z_tilde[j]);
            let xk = batch.knockoff.column(j);
            for (hv, kv) in h.column_mut(j).iter_mut().zip(xk.iter()) {
                *hv = zj * *hv + ztj * kv;
            }
        }
        h
    }

    fn scaled_filter(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let mut g = h.clone();
        for (mut col, w) in g.column_iter_mut().zip(self.w0.iter()) {
            col *= *w;
        }
        g
    }

    fn check_batch(&self, batch: &Batch) {
        assert_eq!(batch.p(), self.p(), "batch has the wrong number of features");
    }
}

impl Parameters for PinkNetwork {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut out = vec![self.z.as_slice(), self.z_tilde.as_slice(), self.w0.as_slice()];
        out.extend(self.mlp.tensors());
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![
            self.z.as_mut_slice(),
            self.z_tilde.as_mut_slice(),
            self.w0.as_mut_slice(),
        ];
        out.extend(self.mlp.tensors_mut());
        out
    }
}

impl Network for PinkNetwork {
    fn p(&self) -> usize {
        self.z.len()
    }

    fn predict(&self, batch: &Batch) -> DVector<f64> {
        self.check_batch(batch);
        let g = self.scaled_filter(&self.filter(batch));
        self.mlp.forward(&g).0
    }

    fn l1_norm(&self) -> f64 {
        self.z
            .iter()
            .chain(self.z_tilde.iter())
            .chain(self.w0.iter())
            .map(|v| v.abs())
            .sum::<f64>()
            + self.mlp.l1_norm()
    }

    fn loss_and_gradient(&self, batch: &Batch, lambda: f64) -> (f64, Self) {
        self.check_batch(batch);
        let b = batch.len() as f64;
        let h = self.filter(batch);
        let g = self.scaled_filter(&h);
        let (pred, cache) = self.mlp.forward(&g);
        let resid = pred - &batch.y;
        let loss = resid.norm_squared() / b + lambda * self.l1_norm();
        let dy = resid * (2.0 / b);

        let mut grad = PinkNetwork::zeros(self.p());
        let dg = self
            .mlp
            .backward(&g, &cache, &dy, &mut grad.mlp, true)
            .expect("input gradient requested");
        for j in 0..self.p() {
            let dgj = dg.column(j);
            grad.w0[j] = dgj.dot(&h.column(j));
            let w0j = self.w0[j];
            let mut dz = 0.0;
            let mut dzt = 0.0;
            for ((d, xv), kv) in dgj
                .iter()
                .zip(batch.x.column(j).iter())
                .zip(batch.knockoff.column(j).iter())
            {
                let dh = d * w0j;
                dz += dh * xv;
                dzt += dh * kv;
            }
            grad.z[j] = dz;
            grad.z_tilde[j] = dzt;
        }

        if lambda != 0.0 {
            grad.z.zip_apply(&self.z, |g, w| *g += lambda * l1_sign(w));
            grad.z_tilde.zip_apply(&self.z_tilde, |g, w| *g += lambda * l1_sign(w));
            grad.w0.zip_apply(&self.w0, |g, w| *g += lambda * l1_sign(w));
            self.mlp.add_l1_subgradient(&mut grad.mlp, lambda);
        }
        (loss, grad)
    }

    fn importance(&self) -> ImportancePair {
        let path = self.w0.component_mul(&self.mlp.path_product());
        let original = self.z.component_mul(&path);
        let knockoff = self.z_tilde.component_mul(&path);
        ImportancePair {
            original: original.as_slice().to_vec(),
            knockoff: knockoff.as_slice().to_vec(),
            path_weight: Some(path.as_slice().to_vec()),
        }
    }
}
