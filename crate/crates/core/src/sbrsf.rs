//! Similarity-based random survival forests.
//!
//! 1. Fit a global forest with uniform bootstrap sampling.
//! 2. Turn terminal-node co-occurrence into one sampling distribution over
//!    the training set per test case (optionally multiplied by IPCW and
//!    hard-thresholded).
//! 3. For every test case, fit a forest whose bootstrap draws from that
//!    distribution and keep its ensemble CHF for the case.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{survival_from_chf, ChfCurve, StepFunction};
use crate::forest::{fit_forest_with_view, predict_chf, similarity_weights, ForestConfig, WeightMatrix};
use crate::ipcw::{combine_weights, ipcw_weights, IpcwVector};
use crate::seed::{derive_seed, Stream};
use crate::tree::TrainingView;

/// How per-test-case forests are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaseSeeds {
    /// Test case `j` uses a seed derived from `(SbrsfConfig::seed, j)`.
    #[default]
    Derived,
    /// Every per-case forest uses `per_case.seed`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbrsfConfig {
    /// Global forest; its sampling weights are ignored (always uniform).
    pub global: ForestConfig,
    /// Template for the per-test-case forests; sampling weights are filled
    /// in per case.
    pub per_case: ForestConfig,
    pub dependent_censoring: bool,
    /// Relative hard threshold `tau` in `[0, 1)`: weights below
    /// `tau * max(column)` are zeroed before renormalization.
    pub threshold: Option<f64>,
    pub case_seeds: CaseSeeds,
    pub seed: u64,
}

impl SbrsfConfig {
    /// Same forest settings for the global and per-case forests.
    pub fn symmetric(forest: ForestConfig, seed: u64) -> Self {
        SbrsfConfig {
            global: forest.clone(),
            per_case: forest,
            dependent_censoring: false,
            threshold: None,
            case_seeds: CaseSeeds::Derived,
            seed,
        }
    }

    fn case_seed(&self, j: usize) -> u64 {
        match self.case_seeds {
            CaseSeeds::Derived => derive_seed(self.seed, Stream::TestCase, j as u64),
            CaseSeeds::Fixed => self.per_case.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbrsfPrediction {
    pub per_test_chf: Vec<ChfCurve>,
    /// Weights used for per-case sampling (uniform for plain RSF).
    pub weight_matrix: WeightMatrix,
    /// Present when dependent-censoring adjustment ran.
    pub ipcw: Option<IpcwVector>,
}

impl SbrsfPrediction {
    /// Long-format `test_id,time,chf,survival`, one row per CHF jump. A
    /// curve without jumps is written as a single row at time 0.
    pub fn write_csv(&self, path: impl AsRef<Path>, test_ids: &[String]) -> Result<()> {
        write_predictions(path, &self.per_test_chf, test_ids)
    }
}

pub fn write_predictions(path: impl AsRef<Path>, chfs: &[ChfCurve], test_ids: &[String]) -> Result<()> {
    if chfs.len() != test_ids.len() {
        return Err(Error::DimensionMismatch {
            expected: chfs.len(),
            got: test_ids.len(),
        });
    }
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["test_id", "time", "chf", "survival"])?;
    for (id, chf) in test_ids.iter().zip(chfs) {
        let s = survival_from_chf(chf);
        if chf.times().is_empty() {
            w.write_record([id.as_str(), "0", &chf.baseline().to_string(), &s.baseline().to_string()])?;
        }
        for ((t, h), sv) in chf.times().iter().zip(chf.values()).zip(s.values()) {
            w.write_record([id.as_str(), &t.to_string(), &h.to_string(), &sv.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io(path.as_ref(), e))
}

/// Read a long-format prediction file back into per-id CHFs, in first
/// appearance order.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<(String, ChfCurve)>> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let mut order: Vec<String> = Vec::new();
    let mut acc: HashMap<String, (Vec<f64>, Vec<f64>)> = HashMap::new();
    for (line, row) in r.records().enumerate() {
        let row = row?;
        let parse = |k: usize| -> Result<f64> {
            let v = row.get(k).unwrap_or("");
            v.parse().map_err(|_| Error::Parse {
                line: line + 2,
                message: format!("bad number {v:?}"),
            })
        };
        let id = row.get(0).unwrap_or("").to_string();
        let (t, h) = (parse(1)?, parse(2)?);
        let entry = acc.entry(id.clone()).or_insert_with(|| {
            order.push(id);
            (Vec::new(), Vec::new())
        });
        entry.0.push(t);
        entry.1.push(h);
    }
    order
        .into_iter()
        .map(|id| {
            let (t, h) = acc.remove(&id).expect("id recorded on insert");
            StepFunction::new(t, h, 0.0).map(|c| (id, c))
        })
        .collect()
}

/// Zero weights below `tau * max` in every column, then renormalize.
pub fn apply_threshold(weights: &WeightMatrix, tau: f64) -> Result<WeightMatrix> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Config(format!("threshold {tau} must lie in [0, 1)")));
    }
    let columns = weights
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let max = col.iter().copied().fold(0.0, f64::max);
            let cut = tau * max;
            let kept: Vec<f64> = col.iter().map(|&w| if w < cut { 0.0 } else { w }).collect();
            let total: f64 = kept.iter().sum();
            if !(total > 0.0) {
                return Err(Error::InvalidWeights(format!(
                    "threshold leaves no positive weight for test case {j}"
                )));
            }
            Ok(kept.into_iter().map(|w| w / total).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    WeightMatrix::from_columns(weights.n_train(), columns)
}

/// Steps 1 and 2: global forest, similarity weights, optional IPCW and
/// threshold.
pub fn sampling_weights(
    train: &Dataset,
    test: &Dataset,
    config: &SbrsfConfig,
) -> Result<(WeightMatrix, Option<IpcwVector>)> {
    let view = TrainingView::new(train);
    sampling_weights_with_view(&view, train, test, config)
}

fn sampling_weights_with_view(
    view: &TrainingView,
    train: &Dataset,
    test: &Dataset,
    config: &SbrsfConfig,
) -> Result<(WeightMatrix, Option<IpcwVector>)> {
    let global_config = ForestConfig {
        sampling_weights: None,
        ..config.global.clone()
    };
    let global = fit_forest_with_view(view, &global_config)?;
    let mut weights = similarity_weights(&global, train, test)?;
    let mut ipcw = None;
    if config.dependent_censoring {
        let w = ipcw_weights(train)?;
        weights = combine_weights(w.as_slice(), &weights)?;
        ipcw = Some(w);
    }
    if let Some(tau) = config.threshold {
        weights = apply_threshold(&weights, tau)?;
    }
    Ok((weights, ipcw))
}

/// Step 3: one weighted forest per test case, each discarded once its
/// ensemble CHF for that case is extracted.
pub fn predict_with_weights(
    train: &Dataset,
    test: &Dataset,
    weights: &WeightMatrix,
    config: &SbrsfConfig,
) -> Result<Vec<ChfCurve>> {
    let view = TrainingView::new(train);
    predict_with_weights_view(&view, test, weights, config)
}

fn predict_with_weights_view(
    view: &TrainingView,
    test: &Dataset,
    weights: &WeightMatrix,
    config: &SbrsfConfig,
) -> Result<Vec<ChfCurve>> {
    if weights.n_train() != view.len() || weights.n_test() != test.len() {
        return Err(Error::DimensionMismatch {
            expected: view.len() * test.len(),
            got: weights.n_train() * weights.n_test(),
        });
    }
    test.records()
        .par_iter()
        .enumerate()
        .map(|(j, rec)| {
            let forest_config = ForestConfig {
                sampling_weights: Some(weights.column(j).to_vec()),
                seed: config.case_seed(j),
                ..config.per_case.clone()
            };
            fit_forest_with_view(view, &forest_config)
                .and_then(|f| predict_chf(&f, &rec.covariates))
                .map_err(|e| Error::TestCase {
                    case: j,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Full similarity-based pipeline.
pub fn sbrsf_fit_predict(train: &Dataset, test: &Dataset, config: &SbrsfConfig) -> Result<SbrsfPrediction> {
    train.require_event()?;
    check_dims(train, test)?;
    let view = TrainingView::new(train);
    let (weights, ipcw) = sampling_weights_with_view(&view, train, test, config)?;
    let per_test_chf = predict_with_weights_view(&view, test, &weights, config)?;
    Ok(SbrsfPrediction {
        per_test_chf,
        weight_matrix: weights,
        ipcw,
    })
}

/// Plain random survival forest baseline: one uniform-bootstrap forest for
/// all test cases.
pub fn rsf_fit_predict(train: &Dataset, test: &Dataset, config: &ForestConfig) -> Result<SbrsfPrediction> {
    train.require_event()?;
    check_dims(train, test)?;
    let view = TrainingView::new(train);
    let forest_config = ForestConfig {
        sampling_weights: None,
        ..config.clone()
    };
    let forest = fit_forest_with_view(&view, &forest_config)?;
    let per_test_chf = test
        .records()
        .par_iter()
        .map(|r| predict_chf(&forest, &r.covariates))
        .collect::<Result<Vec<_>>>()?;
    Ok(SbrsfPrediction {
        per_test_chf,
        weight_matrix: WeightMatrix::uniform(train.len(), test.len()),
        ipcw: None,
    })
}

fn check_dims(train: &Dataset, test: &Dataset) -> Result<()> {
    if train.n_features() != test.n_features() {
        return Err(Error::DimensionMismatch {
            expected: train.n_features(),
            got: test.n_features(),
        });
    }
    Ok(())
}
