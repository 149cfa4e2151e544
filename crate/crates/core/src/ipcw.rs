//! Inverse probability-of-censoring weights.

use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{kaplan_meier, StepFunction};
use crate::forest::WeightMatrix;

/// One weight per training record, each `>= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IpcwVector(Vec<f64>);

impl IpcwVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 1.0) {
            return Err(Error::InvalidWeights(format!(
                "IPCW entry {i} is {} (must be finite and >= 1)",
                weights[i]
            )));
        }
        Ok(IpcwVector(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiply every entry by `c`. Used to check scale invariance of
    /// [`combine_weights`]; the result may fall below 1.
    pub fn scaled(&self, c: f64) -> Vec<f64> {
        self.0.iter().map(|w| w * c).collect()
    }

    /// `train_id,ipcw` CSV.
    pub fn write_csv(&self, path: impl AsRef<Path>, train_ids: &[String]) -> Result<()> {
        if train_ids.len() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                got: train_ids.len(),
            });
        }
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["train_id", "ipcw"])?;
        for (id, v) in train_ids.iter().zip(&self.0) {
            w.write_record([id.as_str(), &v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path.as_ref(), e))
    }
}

/// `G(t)`: Kaplan–Meier curve of remaining uncensored, computed with the
/// event indicator flipped.
pub fn censoring_km(train: &Dataset) -> Result<StepFunction> {
    kaplan_meier(train.flipped_events().records())
}

/// `IPCW_i = 1 / G(X_i-)`, the inverse probability of not having been
/// censored strictly before the record's own time.
pub fn ipcw_weights(train: &Dataset) -> Result<IpcwVector> {
    let g = censoring_km(train)?;
    let weights = train
        .records()
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let survive = g.left_limit(r.time);
            if survive <= 0.0 {
                Err(Error::IpcwUndefined { index: i })
            } else {
                Ok(1.0 / survive)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    IpcwVector::new(weights)
}

/// Elementwise `ipcw_i * sw_ij`, each test column renormalized to sum 1.
/// Accepts any positive scaling of the IPCW vector.
pub fn combine_weights(ipcw: &[f64], sw: &WeightMatrix) -> Result<WeightMatrix> {
    if ipcw.len() != sw.n_train() {
        return Err(Error::DimensionMismatch {
            expected: sw.n_train(),
            got: ipcw.len(),
        });
    }
    let columns = sw
        .columns()
        .iter()
        .map(|col| {
            let prod: Vec<f64> = col.iter().zip(ipcw).map(|(s, w)| s * w).collect();
            let total: f64 = prod.iter().sum();
            if !(total > 0.0) {
                return Err(Error::InvalidWeights("combined weight column sums to zero".into()));
            }
            Ok(prod.into_iter().map(|x| x / total).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    WeightMatrix::from_columns(sw.n_train(), columns)
}
