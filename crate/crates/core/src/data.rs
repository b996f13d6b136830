//! Design matrices and responses.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column constants removed by [`DesignMatrix::standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    /// Sample standard deviations divided out, or `None` when only centered.
    pub scales: Option<Vec<f64>>,
}

/// An `n × p` matrix of observations, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    column_names: Vec<String>,
    centered: bool,
    scaled: bool,
    standardization: Option<Standardization>,
}

impl DesignMatrix {
    pub fn new(values: DMatrix<f64>, column_names: Vec<String>) -> Result<Self> {
        let (n, p) = values.shape();
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidInput("need at least 1 column".into()));
        }
        if column_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {p} columns",
                column_names.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite value at row {}, column {}",
                pos % n,
                pos / n
            )));
        }
        Ok(DesignMatrix {
            values,
            column_names,
            centered: false,
            scaled: false,
            standardization: None,
        })
    }

    /// Columns named `X1 … Xp`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let names = default_names(values.ncols());
        Self::new(values, names)
    }

    /// Marks a matrix whose columns are known to have mean zero in
    /// population (e.g. simulated Gaussian rows) as centered without
    /// modifying it.
    pub fn assume_centered(mut self) -> Self {
        self.centered = true;
        self
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn is_scaled(&self) -> bool {
        self.scaled
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// Centers every column and, if `scale` is set, divides by the sample
    /// standard deviation (denominator `n − 1`).
    pub fn standardize(&self, scale: bool) -> Result<DesignMatrix> {
        let n = self.n();
        let mut values = self.values.clone();
        let mut means = Vec::with_capacity(self.p());
        let mut scales = Vec::with_capacity(self.p());
        for (j, mut col) in values.column_iter_mut().enumerate() {
            let mean = col.iter().sum::<f64>() / n as f64;
            col.add_scalar_mut(-mean);
            means.push(mean);
            if scale {
                let ss: f64 = col.iter().map(|v| v * v).sum();
                let sd = (ss / (n - 1) as f64).sqrt();
                if !(sd > 0.0) || sd < 1e-12 * (1.0 + mean.abs()) {
                    return Err(Error::ZeroVarianceColumn(j));
                }
                col /= sd;
                scales.push(sd);
            }
        }
        Ok(DesignMatrix {
            values,
            column_names: self.column_names.clone(),
            centered: true,
            scaled: scale,
            standardization: Some(Standardization {
                means,
                scales: scale.then_some(scales),
            }),
        })
    }

    /// Rows at the given indices, in order.
    pub fn select_rows(&self, rows: &[usize]) -> DMatrix<f64> {
        self.values.select_rows(rows)
    }
}

pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("X{j}")).collect()
}

/// Response vector paired with a [`DesignMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    values: DVector<f64>,
    centered: bool,
    mean: f64,
}

impl ResponseVector {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("empty response".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite response value".into()));
        }
        Ok(ResponseVector {
            values,
            centered: false,
            mean: 0.0,
        })
    }

    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        Self::new(DVector::from_vec(values))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    /// Mean removed by [`ResponseVector::centered`].
    pub fn removed_mean(&self) -> f64 {
        self.mean
    }

    pub fn centered(&self) -> ResponseVector {
        if self.centered {
            return self.clone();
        }
        let mean = self.values.mean();
        ResponseVector {
            values: self.values.add_scalar(-mean),
            centered: true,
            mean,
        }
    }

    pub fn check_matches(&self, x: &DesignMatrix) -> Result<()> {
        if self.len() != x.n() {
            return Err(Error::DimensionMismatch(format!(
                "response has {} entries but design has {} rows",
                self.len(),
                x.n()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(v: &[f64]) -> DesignMatrix {
        DesignMatrix::from_matrix(DMatrix::from_column_slice(v.len(), 1, v)).unwrap()
    }

    fn mean_sd(x: &DesignMatrix) -> (f64, f64) {
        let c = x.values().column(0);
        let n = c.len() as f64;
        let mean = c.sum() / n;
        let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var.sqrt())
    }

    #[test]
    fn three_point_column_scales_to_unit() {
        let x = column(&[1.0, 2.0, 3.0]).standardize(true).unwrap();
        let got: Vec<f64> = x.values().iter().copied().collect();
        assert_eq!(got, vec![-1.0, 0.0, 1.0]);
        assert!(x.is_centered() && x.is_scaled());
    }

    #[test]
    fn centered_column_unchanged_without_scaling() {
        let x = column(&[-2.0, 0.5, 1.5]);
        let y = x.standardize(false).unwrap();
        assert_eq!(x.values(), y.values());
        assert!(!y.is_scaled());
    }

    #[test]
    fn skewed_column_has_zero_mean_unit_sd() {
        let x = column(&[0.0, 0.0, 4.0]).standardize(true).unwrap();
        // Removed mean 4/3, sample sd sqrt(((4/3)^2*2 + (8/3)^2)/2) = sqrt(16/3).
        let info = x.standardization().unwrap();
        assert!((info.means[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((info.scales.as_ref().unwrap()[0] - (16.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let (mean, sd) = mean_sd(&x);
        assert!(mean.abs() < 1e-8);
        assert!((sd - 1.0).abs() < 1e-8);
    }

    #[test]
    fn constant_column_cannot_be_scaled() {
        let x = DesignMatrix::from_matrix(DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0])).unwrap();
        assert!(matches!(x.standardize(true), Err(Error::ZeroVarianceColumn(1))));
        assert!(x.standardize(false).is_ok());
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(DesignMatrix::from_matrix(DMatrix::zeros(1, 3)).is_err());
        assert!(DesignMatrix::from_matrix(DMatrix::zeros(3, 0)).is_err());
        let mut m = DMatrix::zeros(3, 2);
        m[(1, 1)] = f64::NAN;
        assert!(DesignMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn response_centering() {
        let y = ResponseVector::from_vec(vec![1.0, 2.0, 6.0]).unwrap().centered();
        assert_eq!(y.removed_mean(), 3.0);
        assert_eq!(y.values().as_slice(), &[-2.0, -1.0, 3.0]);
    }
}
