use nalgebra::{DMatrix, DVector};

use crate::data::ResponseVector;
use crate::error::{Error, Result};
use crate::knockoffs::AugmentedDesign;

/// Rows of original features, knockoffs and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub x: DMatrix<f64>,
    pub knockoff: DMatrix<f64>,
    pub y: DVector<f64>,
}

impl Batch {
    pub fn new(x: DMatrix<f64>, knockoff: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.shape() != knockoff.shape() || x.nrows() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "batch shapes x {:?}, knockoff {:?}, y {}",
                x.shape(),
                knockoff.shape(),
                y.len()
            )));
        }
        if y.is_empty() {
            return Err(Error::InvalidInput("empty batch".into()));
        }
        Ok(Batch { x, knockoff, y })
    }

    /// A single observation.
    pub fn single(x: &[f64], knockoff: &[f64], y: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_row_slice(1, x.len(), x),
            DMatrix::from_row_slice(1, knockoff.len(), knockoff),
            DVector::from_element(1, y),
        )
    }

    pub fn from_rows(aug: &AugmentedDesign, y: &ResponseVector, rows: &[usize]) -> Self {
        Batch {
            x: aug.x().select_rows(rows),
            knockoff: aug.knockoff().select_rows(rows),
            y: DVector::from_iterator(rows.len(), rows.iter().map(|&i| y.values()[i])),
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}
