//! JSON form of trained networks. Matrices are nested arrays, one inner
//! array per row, with `w1[j][k]` the weight from input `j` to hidden unit `k`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ImportancePair, Mlp, NaiveMlp, PinkNetwork, TrainConfig, TrainedNetwork};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRecord {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinkNetworkRecord {
    pub z: Vec<f64>,
    pub z_tilde: Vec<f64>,
    pub w0: Vec<f64>,
    #[serde(flatten)]
    pub mlp: MlpRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "kebab-case")]
pub enum WeightsRecord {
    DeepPink(PinkNetworkRecord),
    NaiveMlp(MlpRecord),
}

/// A trained network with the configuration and seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub config: TrainConfig,
    pub seed: u64,
    pub weights: WeightsRecord,
    pub importance: ImportancePair,
    pub statistics: Vec<f64>,
}

impl NetworkRecord {
    pub fn new(network: &TrainedNetwork, config: TrainConfig) -> Self {
        let weights = match network {
            TrainedNetwork::DeepPink(n) => WeightsRecord::DeepPink(n.into()),
            TrainedNetwork::NaiveMlp(n) => WeightsRecord::NaiveMlp((&n.mlp).into()),
        };
        let importance = network.importance();
        NetworkRecord {
            seed: config.seed.value(),
            config,
            weights,
            statistics: importance.statistics(),
            importance,
        }
    }

    /// Rebuilds the network from its weights.
    pub fn network(&self) -> Result<TrainedNetwork> {
        Ok(match &self.weights {
            WeightsRecord::DeepPink(r) => TrainedNetwork::DeepPink(r.try_into()?),
            WeightsRecord::NaiveMlp(r) => TrainedNetwork::NaiveMlp(NaiveMlp { mlp: r.try_into()? }),
        })
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidInput(format!("{what}: ragged matrix")));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

impl From<&Mlp> for MlpRecord {
    fn from(m: &Mlp) -> Self {
        MlpRecord {
            w1: rows(&m.w1),
            b1: m.b1.as_slice().to_vec(),
            w2: rows(&m.w2),
            b2: m.b2.as_slice().to_vec(),
            w3: m.w3.as_slice().to_vec(),
            b3: m.b3,
        }
    }
}

impl TryFrom<&MlpRecord> for Mlp {
    type Error = Error;

    fn try_from(r: &MlpRecord) -> Result<Self> {
        let w1 = matrix(&r.w1, "w1")?;
        let w2 = matrix(&r.w2, "w2")?;
        let hidden = w1.ncols();
        if w2.shape() != (hidden, hidden) || r.b1.len() != hidden || r.b2.len() != hidden || r.w3.len() != hidden {
            return Err(Error::DimensionMismatch("inconsistent MLP weight shapes".into()));
        }
        Ok(Mlp {
            w1,
            b1: DVector::from_column_slice(&r.b1),
            w2,
            b2: DVector::from_column_slice(&r.b2),
            w3: DVector::from_column_slice(&r.w3),
            b3: r.b3,
        })
    }
}

impl From<&PinkNetwork> for PinkNetworkRecord {
    fn from(n: &PinkNetwork) -> Self {
        PinkNetworkRecord {
            z: n.z.as_slice().to_vec(),
            z_tilde: n.z_tilde.as_slice().to_vec(),
            w0: n.w0.as_slice().to_vec(),
            mlp: (&n.mlp).into(),
        }
    }
}

impl TryFrom<&PinkNetworkRecord> for PinkNetwork {
    type Error = Error;

    fn try_from(r: &PinkNetworkRecord) -> Result<Self> {
        let mlp = Mlp::try_from(&r.mlp)?;
        let p = r.z.len();
        if r.z_tilde.len() != p || r.w0.len() != p || mlp.inputs() != p || mlp.hidden() != p {
            return Err(Error::DimensionMismatch("inconsistent network weight shapes".into()));
        }
        Ok(PinkNetwork {
            z: DVector::from_column_slice(&r.z),
            z_tilde: DVector::from_column_slice(&r.z_tilde),
            w0: DVector::from_column_slice(&r.w0),
            mlp,
        })
    }
}
