use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::l1_sign;
use crate::linalg::{matmul, Op};

/// Two ReLU hidden layers and a linear output.
///
/// `w1` is `inputs × hidden` and `w2` is `hidden × hidden`; for a batch `G`
/// (rows are observations) the hidden layers are `ReLU(G W1 + b1)` and
/// `ReLU(A1 W2 + b2)`, and the output is `A2 w3 + b3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
    pub w3: DVector<f64>,
    pub b3: f64,
}

pub(crate) struct MlpCache {
    u1: DMatrix<f64>,
    a1: DMatrix<f64>,
    u2: DMatrix<f64>,
    a2: DMatrix<f64>,
}

pub(crate) fn normal_vec<R: Rng>(len: usize, fan_in: usize, rng: &mut R) -> Vec<f64> {
    let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
    (0..len).map(|_| dist.sample(rng)).collect()
}

fn add_row_bias(m: &mut DMatrix<f64>, bias: &DVector<f64>) {
    for (mut col, b) in m.column_iter_mut().zip(bias.iter()) {
        col.add_scalar_mut(*b);
    }
}

fn relu(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.map(|v| if v > 0.0 { v } else { 0.0 })
}

fn relu_mask(grad: &mut DMatrix<f64>, pre: &DMatrix<f64>) {
    grad.zip_apply(pre, |g, u| {
        if u <= 0.0 {
            *g = 0.0
        }
    });
}

fn column_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()))
}

impl Mlp {
    /// Normal weights with variance `2 / fan_in`, zero biases. Draw order:
    /// `w1`, `w2`, `w3`, each in column-major order.
    pub fn init<R: Rng>(inputs: usize, hidden: usize, rng: &mut R) -> Self {
        let w1 = DMatrix::from_vec(inputs, hidden, normal_vec(inputs * hidden, inputs, rng));
        let w2 = DMatrix::from_vec(hidden, hidden, normal_vec(hidden * hidden, hidden, rng));
        let w3 = DVector::from_vec(normal_vec(hidden, hidden, rng));
        Mlp {
            w1,
            b1: DVector::zeros(hidden),
            w2,
            b2: DVector::zeros(hidden),
            w3,
            b3: 0.0,
        }
    }

    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Mlp {
            w1: DMatrix::zeros(inputs, hidden),
            b1: DVector::zeros(hidden),
            w2: DMatrix::zeros(hidden, hidden),
            b2: DVector::zeros(hidden),
            w3: DVector::zeros(hidden),
            b3: 0.0,
        }
    }

    pub fn inputs(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    pub(crate) fn forward(&self, g: &DMatrix<f64>) -> (DVector<f64>, MlpCache) {
        let mut u1 = matmul(g, Op::N, &self.w1, Op::N);
        add_row_bias(&mut u1, &self.b1);
        let a1 = relu(&u1);
        let mut u2 = matmul(&a1, Op::N, &self.w2, Op::N);
        add_row_bias(&mut u2, &self.b2);
        let a2 = relu(&u2);
        let mut out = &a2 * &self.w3;
        out.add_scalar_mut(self.b3);
        (out, MlpCache { u1, a1, u2, a2 })
    }

    pub(crate) fn pre_activations(&self, g: &DMatrix<f64>) -> Vec<f64> {
        let (_, cache) = self.forward(g);
        cache.u1.iter().chain(cache.u2.iter()).copied().collect()
    }

    /// Accumulates parameter gradients for output sensitivities `dy` into
    /// `grad` and, when asked, returns the gradient with respect to `g`.
    pub(crate) fn backward(
        &self,
        g: &DMatrix<f64>,
        cache: &MlpCache,
        dy: &DVector<f64>,
        grad: &mut Mlp,
        input_grad: bool,
    ) -> Option<DMatrix<f64>> {
        grad.w3 = cache.a2.tr_mul(dy);
        grad.b3 = dy.sum();

        let mut du2 = dy * self.w3.transpose();
        relu_mask(&mut du2, &cache.u2);
        grad.w2 = matmul(&cache.a1, Op::T, &du2, Op::N);
        grad.b2 = column_sums(&du2);

        let mut du1 = matmul(&du2, Op::N, &self.w2, Op::T);
        relu_mask(&mut du1, &cache.u1);
        grad.w1 = matmul(g, Op::T, &du1, Op::N);
        grad.b1 = column_sums(&du1);

        input_grad.then(|| matmul(&du1, Op::N, &self.w1, Op::T))
    }

    pub fn l1_norm(&self) -> f64 {
        self.w1
            .iter()
            .chain(self.w2.iter())
            .chain(self.w3.iter())
            .map(|v| v.abs())
            .sum()
    }

    pub(crate) fn add_l1_subgradient(&self, grad: &mut Mlp, lambda: f64) {
        if lambda == 0.0 {
            return;
        }
        grad.w1.zip_apply(&self.w1, |g, w| *g += lambda * l1_sign(w));
        grad.w2.zip_apply(&self.w2, |g, w| *g += lambda * l1_sign(w));
        grad.w3.zip_apply(&self.w3, |g, w| *g += lambda * l1_sign(w));
    }

    /// `W1 · W2 · w3`, one entry per input.
    pub fn path_product(&self) -> DVector<f64> {
        &self.w1 * (&self.w2 * &self.w3)
    }

    pub(crate) fn tensors(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice(),
            self.b1.as_slice(),
            self.w2.as_slice(),
            self.b2.as_slice(),
            self.w3.as_slice(),
            std::slice::from_ref(&self.b3),
        ]
    }

    pub(crate) fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_mut_slice(),
            self.b1.as_mut_slice(),
            self.w2.as_mut_slice(),
            self.b2.as_mut_slice(),
            self.w3.as_mut_slice(),
            std::slice::from_mut(&mut self.b3),
        ]
    }
}
