//! Thin helpers over `nalgebra` for the symmetric positive definite matrices
//! that show up throughout the knockoff construction.

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn cholesky(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let eig = SymmetricEigen::try_new(symmetrize(m), 1e-14, 10_000)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigendecomposition did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = cholesky(m).ok_or(Error::SingularSigma)?;
    let inv = symmetrize(&chol.inverse());
    if inv.iter().all(|v| v.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::SingularSigma)
    }
}

fn mean_diagonal(m: &DMatrix<f64>) -> f64 {
    m.trace() / m.nrows() as f64
}

/// Adds escalating diagonal jitter, starting at `1e-10 · tr/p` and growing
/// ×10 up to `1e-4 · tr/p`, until the matrix admits a Cholesky factor.
/// Returns the repaired matrix and the jitter added (0 when none was needed).
pub fn repair_pd(m: &DMatrix<f64>, what: &str) -> Result<(DMatrix<f64>, f64)> {
    let sym = symmetrize(m);
    if cholesky(&sym).is_some() {
        return Ok((sym, 0.0));
    }
    let scale = mean_diagonal(&sym).abs().max(f64::MIN_POSITIVE);
    let mut factor = 1e-10;
    while factor <= 1e-4 * (1.0 + 1e-9) {
        let jitter = factor * scale;
        let mut candidate = sym.clone();
        for i in 0..candidate.nrows() {
            candidate[(i, i)] += jitter;
        }
        if cholesky(&candidate).is_some() {
            return Ok((candidate, jitter));
        }
        factor *= 10.0;
    }
    Err(Error::NotPositiveDefinite {
        what: what.to_string(),
        min_eigenvalue: min_eigenvalue(&sym).unwrap_or(f64::NAN),
    })
}

/// Whether an operand of [`matmul`] is used as stored or transposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    N,
    T,
}

/// `op(a) · op(b)` through `matrixmultiply`, with transposes expressed as
/// stride swaps instead of copies.
pub fn matmul(a: &DMatrix<f64>, op_a: Op, b: &DMatrix<f64>, op_b: Op) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(0, 0);
    matmul_into(a, op_a, b, op_b, &mut out);
    out
}

pub fn matmul_into(a: &DMatrix<f64>, op_a: Op, b: &DMatrix<f64>, op_b: Op, out: &mut DMatrix<f64>) {
    let (m, k, rsa, csa) = match op_a {
        Op::N => (a.nrows(), a.ncols(), 1, a.nrows()),
        Op::T => (a.ncols(), a.nrows(), a.nrows(), 1),
    };
    let (k2, n, rsb, csb) = match op_b {
        Op::N => (b.nrows(), b.ncols(), 1, b.nrows()),
        Op::T => (b.ncols(), b.nrows(), b.nrows(), 1),
    };
    assert_eq!(k, k2, "matmul: inner dimensions differ");
    if out.shape() != (m, n) {
        *out = DMatrix::zeros(m, n);
    }
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.fill(0.0);
        return;
    }
    // SAFETY: the shapes and strides describe the column-major buffers of
    // `a`, `b` and `out`, which are valid for the whole call and do not alias.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            0.0,
            out.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}
