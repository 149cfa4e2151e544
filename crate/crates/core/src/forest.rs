//! Random survival forests: weighted bootstrap, ensemble CHF and
//! terminal-node co-occurrence weights.

use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::{ChfCurve, StepFunction};
use crate::seed::{derive_seed, rng_from_seed, Stream};
use crate::tree::{grow_with_view, SurvivalTree, TrainingView, TreeConfig};

/// Bootstrap redraws allowed per tree before giving up.
pub const REDRAW_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    /// Number of trees `B`.
    pub n_trees: usize,
    /// `tree.seed` is ignored; per-tree seeds derive from `seed`.
    pub tree: TreeConfig,
    /// Bootstrap sampling probabilities, one per training record. Uniform
    /// when absent.
    pub sampling_weights: Option<Vec<f64>>,
    pub seed: u64,
}

impl ForestConfig {
    pub fn new(n_trees: usize, tree: TreeConfig, seed: u64) -> Self {
        ForestConfig {
            n_trees,
            tree,
            sampling_weights: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<SurvivalTree>,
    config: ForestConfig,
    train_size: usize,
}

impl Forest {
    pub fn trees(&self) -> &[SurvivalTree] {
        &self.trees
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn train_size(&self) -> usize {
        self.train_size
    }

    fn n_features(&self) -> usize {
        self.trees[0].n_features()
    }
}

/// Draws bootstrap indices from a probability vector. All-equal weights use
/// plain uniform index draws so weighted and unweighted fits coincide.
#[derive(Debug, Clone)]
pub enum BootstrapSampler {
    Uniform(usize),
    Weighted(WeightedIndex<f64>),
}

impl BootstrapSampler {
    pub fn new(n: usize, weights: Option<&[f64]>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let Some(w) = weights else {
            return Ok(BootstrapSampler::Uniform(n));
        };
        check_probability_vector(w, n)?;
        if w.iter().all(|&x| x == w[0]) {
            return Ok(BootstrapSampler::Uniform(n));
        }
        WeightedIndex::new(w)
            .map(BootstrapSampler::Weighted)
            .map_err(|e| Error::InvalidWeights(e.to_string()))
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            BootstrapSampler::Uniform(n) => rng.gen_range(0..*n),
            BootstrapSampler::Weighted(w) => w.sample(rng),
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, size: usize) -> Vec<usize> {
        (0..size).map(|_| self.draw(rng)).collect()
    }
}

pub(crate) fn check_probability_vector(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::InvalidWeights(format!("expected {n} weights, got {}", w.len())));
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidWeights(format!(
            "weight {i} is {} (must be finite and nonnegative)",
            w[i]
        )));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// The bootstrap sample and tree configuration used for tree `b`.
///
/// Samples of size `N_train` are drawn with replacement until one holds at
/// least `d0` distinct death times, at most [`REDRAW_CAP`] times.
pub fn bootstrap_draw(data: &Dataset, config: &ForestConfig, b: usize) -> Result<(Vec<usize>, TreeConfig)> {
    let view = TrainingView::new(data);
    let sampler = BootstrapSampler::new(data.len(), config.sampling_weights.as_deref())?;
    draw_for_tree(&view, &sampler, config, b)
}

fn draw_for_tree(
    view: &TrainingView,
    sampler: &BootstrapSampler,
    config: &ForestConfig,
    b: usize,
) -> Result<(Vec<usize>, TreeConfig)> {
    let tree_seed = derive_seed(config.seed, Stream::Tree, b as u64);
    let mut rng = rng_from_seed(tree_seed);
    let tree_config = TreeConfig {
        seed: derive_seed(tree_seed, Stream::Tree, u64::MAX),
        ..config.tree
    };
    for _ in 0..REDRAW_CAP {
        let sample = sampler.sample_n(&mut rng, view.len());
        if view.unique_death_times(&sample) >= config.tree.d0 {
            return Ok((sample, tree_config));
        }
    }
    Err(Error::RetryCapExhausted {
        tree: b,
        d0: config.tree.d0,
        attempts: REDRAW_CAP,
    })
}

/// Fit `B` trees on weighted bootstrap samples. Trees are grown in parallel;
/// the result depends only on `config.seed`.
pub fn fit_forest(data: &Dataset, config: &ForestConfig) -> Result<Forest> {
    let view = TrainingView::new(data);
    fit_forest_with_view(&view, config)
}

pub(crate) fn fit_forest_with_view(view: &TrainingView, config: &ForestConfig) -> Result<Forest> {
    if config.n_trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    config.tree.validate(view.columns.len())?;
    if !view.events.iter().any(|&e| e) {
        return Err(Error::InvalidData("training data has no observed events".into()));
    }
    let sampler = BootstrapSampler::new(view.len(), config.sampling_weights.as_deref())?;
    let trees = (0..config.n_trees)
        .into_par_iter()
        .map(|b| {
            let (sample, tree_config) = draw_for_tree(view, &sampler, config, b)?;
            grow_with_view(view, &sample, &tree_config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        trees,
        config: config.clone(),
        train_size: view.len(),
    })
}

/// Ensemble CHF: pointwise mean of the terminal-node CHFs reached by
/// `covariates`.
pub fn predict_chf(forest: &Forest, covariates: &[f64]) -> Result<ChfCurve> {
    let p = forest.n_features();
    if covariates.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: covariates.len(),
        });
    }
    let leaves: Vec<&ChfCurve> = forest
        .trees
        .iter()
        .map(|t| {
            let leaf = t.route_unchecked(covariates);
            t.node(leaf).chf.as_ref().expect("terminal node carries a CHF")
        })
        .collect();
    StepFunction::pointwise_mean(&leaves)
}

/// `N_train x N_test` nonnegative weights, stored one test column at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n_train: usize,
    columns: Vec<Vec<f64>>,
}

impl WeightMatrix {
    pub fn from_columns(n_train: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(c) = columns.iter().find(|c| c.len() != n_train) {
            return Err(Error::DimensionMismatch {
                expected: n_train,
                got: c.len(),
            });
        }
        if columns.iter().flatten().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidWeights("negative or non-finite weight".into()));
        }
        Ok(WeightMatrix { n_train, columns })
    }

    /// Every column equal to `1 / n_train`.
    pub fn uniform(n_train: usize, n_test: usize) -> Self {
        WeightMatrix {
            n_train,
            columns: vec![vec![1.0 / n_train as f64; n_train]; n_test],
        }
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_test(&self) -> usize {
        self.columns.len()
    }

    /// Weight of training case `i` for test case `j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.columns[j][i]
    }

    /// The `N_train` weights attached to test case `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Rows are training records, columns test records.
    pub fn write_csv(&self, path: impl AsRef<Path>, train_ids: &[String], test_ids: &[String]) -> Result<()> {
        if train_ids.len() != self.n_train || test_ids.len() != self.n_test() {
            return Err(Error::DimensionMismatch {
                expected: self.n_train * self.n_test(),
                got: train_ids.len() * test_ids.len(),
            });
        }
        let mut w = csv::Writer::from_path(path.as_ref())?;
        let mut header = vec!["train_id".to_string()];
        header.extend(test_ids.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in train_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.columns.iter().map(|c| c[i].to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path.as_ref(), e))
    }

    /// Read a matrix written by [`WeightMatrix::write_csv`]. Returns the
    /// matrix with its training and test ids.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<(Self, Vec<String>, Vec<String>)> {
        let mut r = csv::Reader::from_path(path.as_ref())?;
        let test_ids: Vec<String> = r.headers()?.iter().skip(1).map(str::to_string).collect();
        let mut columns = vec![Vec::new(); test_ids.len()];
        let mut train_ids = Vec::new();
        for (line, row) in r.records().enumerate() {
            let row = row?;
            train_ids.push(row.get(0).unwrap_or("").to_string());
            for (j, c) in columns.iter_mut().enumerate() {
                let cell = row.get(j + 1).unwrap_or("");
                c.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                    line: line + 2,
                    message: format!("bad weight {cell:?}"),
                })?);
            }
        }
        let m = WeightMatrix::from_columns(train_ids.len(), columns)?;
        Ok((m, train_ids, test_ids))
    }
}

/// Co-occurrence similarity of each training case with each test case.
///
/// For test case `j`, training case `i` scores one point per tree in which
/// `j` lands in a terminal node containing `i` (once per node, whatever the
/// bootstrap multiplicity). Each test column is then scaled to sum to 1.
pub fn similarity_weights(forest: &Forest, train: &Dataset, test: &Dataset) -> Result<WeightMatrix> {
    if train.len() != forest.train_size {
        return Err(Error::DimensionMismatch {
            expected: forest.train_size,
            got: train.len(),
        });
    }
    let p = forest.n_features();
    if test.n_features() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: test.n_features(),
        });
    }
    let n = train.len();
    let columns = test
        .records()
        .par_iter()
        .map(|rec| {
            let mut counts = vec![0u32; n];
            for t in &forest.trees {
                let leaf = t.route_unchecked(&rec.covariates);
                for i in t.node(leaf).unique_members() {
                    counts[i] += 1;
                }
            }
            let total: u64 = counts.iter().map(|&c| u64::from(c)).sum();
            assert!(total > 0, "terminal nodes are never empty");
            let total = total as f64;
            counts.iter().map(|&c| f64::from(c) / total).collect()
        })
        .collect();
    Ok(WeightMatrix { n_train: n, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SurvivalRecord;
    use crate::tree::grow_tree;
    use rand::SeedableRng;

    fn data(n: usize, seed: u64) -> Dataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let records = (0..n)
            .map(|_| {
                let x: f64 = rng.gen_range(-1.0..1.0);
                let z: f64 = rng.gen_range(-1.0..1.0);
                let t = (if x > 0.0 { 1.0 } else { 5.0 }) * rng.gen_range(0.5..1.5);
                SurvivalRecord::new(t, rng.gen_bool(0.8), vec![x, z])
            })
            .collect();
        Dataset::new(records, vec!["x".into(), "z".into()]).unwrap()
    }

    fn cfg(b: usize, d0: usize, seed: u64) -> ForestConfig {
        ForestConfig::new(b, TreeConfig { d0, mtry: 1, seed: 0 }, seed)
    }

    #[test]
    fn single_tree_forest_is_grow_tree_on_its_draw() {
        let d = data(50, 1);
        let c = cfg(1, 2, 11);
        let f = fit_forest(&d, &c).unwrap();
        let (sample, tc) = bootstrap_draw(&d, &c, 0).unwrap();
        assert_eq!(f.trees()[0], grow_tree(&d, &sample, &tc).unwrap());
        let x = &d.record(3).covariates;
        let leaf = f.trees()[0].leaf_chf(x).unwrap();
        assert_eq!(&predict_chf(&f, x).unwrap(), leaf);
    }

    #[test]
    fn deterministic() {
        let d = data(60, 2);
        let c = cfg(8, 2, 5);
        assert_eq!(fit_forest(&d, &c).unwrap(), fit_forest(&d, &c).unwrap());
    }

    #[test]
    fn concentrated_on_censored_record_fails_after_retries() {
        let mut records = data(20, 3).records().to_vec();
        records[0].event = false;
        let d = Dataset::new(records, vec!["x".into(), "z".into()]).unwrap();
        let mut w = vec![0.0; 20];
        w[0] = 1.0;
        let mut c = cfg(2, 1, 1);
        c.sampling_weights = Some(w);
        assert!(matches!(fit_forest(&d, &c), Err(Error::RetryCapExhausted { .. })));
    }

    #[test]
    fn invalid_weights_rejected() {
        let d = data(5, 3);
        let mut c = cfg(1, 1, 1);
        c.sampling_weights = Some(vec![0.5, 0.5, 0.5, -0.5, 0.0]);
        assert!(matches!(fit_forest(&d, &c), Err(Error::InvalidWeights(_))));
        c.sampling_weights = Some(vec![0.2; 4]);
        assert!(matches!(fit_forest(&d, &c), Err(Error::InvalidWeights(_))));
    }

    #[test]
    fn ensemble_is_monotone_and_zero_at_origin() {
        let d = data(80, 4);
        let f = fit_forest(&d, &cfg(10, 2, 3)).unwrap();
        for r in d.records().iter().take(10) {
            let h = predict_chf(&f, &r.covariates).unwrap();
            assert!(h.is_non_decreasing());
            assert_eq!(h.eval(0.0), 0.0);
        }
        assert!(predict_chf(&f, &[1.0]).is_err());
    }

    #[test]
    fn single_node_trees_weight_by_inbag_presence() {
        let d = data(30, 5);
        let deaths = TrainingView::new(&d).unique_death_times(&(0..30).collect::<Vec<_>>());
        // d0 large enough that no split is admissible
        let f = fit_forest(&d, &cfg(6, deaths.div_ceil(2) + 1, 2)).unwrap();
        assert!(f.trees().iter().all(|t| t.nodes().len() == 1));
        let w = similarity_weights(&f, &d, &d).unwrap();
        let mut inbag = vec![0.0; 30];
        for t in f.trees() {
            for i in t.node(0).unique_members() {
                inbag[i] += 1.0;
            }
        }
        let total: f64 = inbag.iter().sum();
        for j in 0..w.n_test() {
            for (i, c) in inbag.iter().enumerate() {
                assert!((w.get(i, j) - c / total).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_tree_leaf_counting() {
        let d = data(40, 6);
        let f = fit_forest(&d, &cfg(1, 1, 8)).unwrap();
        let w = similarity_weights(&f, &d, &d).unwrap();
        let t = &f.trees()[0];
        for j in 0..d.len() {
            let leaf = t.route(&d.record(j).covariates).unwrap();
            let members: Vec<usize> = t.node(leaf).unique_members().collect();
            let k = members.len() as f64;
            for i in 0..d.len() {
                let expect = if members.contains(&i) { 1.0 / k } else { 0.0 };
                assert_eq!(w.get(i, j), expect);
            }
        }
    }

    #[test]
    fn columns_sum_to_one() {
        let d = data(70, 7);
        let f = fit_forest(&d, &cfg(12, 2, 1)).unwrap();
        let w = similarity_weights(&f, &d, &d).unwrap();
        for c in w.columns() {
            assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(c.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn uniform_bootstrap_inclusion_frequency() {
        let n = 20;
        let sampler = BootstrapSampler::new(n, None).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let reps = 4000;
        let mut included = vec![0usize; n];
        for _ in 0..reps {
            let mut seen = vec![false; n];
            for i in sampler.sample_n(&mut rng, n) {
                seen[i] = true;
            }
            for (c, s) in included.iter_mut().zip(seen) {
                *c += usize::from(s);
            }
        }
        let expect = 1.0 - (1.0 - 1.0 / n as f64).powi(n as i32);
        for c in included {
            let freq = c as f64 / reps as f64;
            assert!((freq - expect).abs() < 0.04, "{freq} vs {expect}");
        }
    }

    #[test]
    fn weight_matrix_csv_round_trip() {
        let m = WeightMatrix::from_columns(2, vec![vec![0.25, 0.75], vec![1.0, 0.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.csv");
        let ids = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        m.write_csv(&p, &ids(&["a", "b"]), &ids(&["t0", "t1"])).unwrap();
        let (back, tr, te) = WeightMatrix::read_csv(&p).unwrap();
        assert_eq!(back, m);
        assert_eq!(tr, ids(&["a", "b"]));
        assert_eq!(te, ids(&["t0", "t1"]));
    }
}
