//! Experiment runner behind the `simrsf` binary.
//!
//! Every command writes its outputs plus a `manifest.json` listing the
//! resolved configuration, seeds, per-stage timings and a SHA-256 of each
//! output file. When a stage fails, everything written so far moves to a
//! `quarantine/` subdirectory together with the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::KvConfig;
use crate::dataset::{load_csv, split_train_test, CsvSchema, Dataset};
use crate::error::{Error, Result};
use crate::evaluation::{compare_auc, parse_grid, time_varying_auc, AucComparison, AucCurve};
use crate::forest::{ForestConfig, WeightMatrix};
use crate::sbrsf::{
    predict_with_weights, read_predictions, rsf_fit_predict, sampling_weights, sbrsf_fit_predict, write_predictions,
    CaseSeeds, SbrsfConfig,
};
use crate::seed::{derive_seed, Stream};
use crate::simgen::{simulate, SimConfig};
use crate::tree::TreeConfig;

pub const MANIFEST: &str = "manifest.json";
pub const QUARANTINE: &str = "quarantine";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageRecord {
    pub name: String,
    pub seconds: f64,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputFile {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one command invocation, sufficient to rerun it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved configuration in `key = value` form.
    pub config: String,
    pub seeds: serde_json::Map<String, serde_json::Value>,
    pub workers: usize,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<OutputFile>,
    pub summary: serde_json::Map<String, serde_json::Value>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Output bookkeeping shared by all commands.
pub struct Run {
    out_dir: PathBuf,
    written: Vec<PathBuf>,
    manifest: RunManifest,
}

impl Run {
    pub fn new(out_dir: impl Into<PathBuf>, command: &str, workers: usize) -> Result<Self> {
        let out_dir = out_dir.into();
        fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
        Ok(Run {
            out_dir,
            written: Vec::new(),
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                command: command.to_string(),
                config: String::new(),
                seeds: Default::default(),
                workers,
                stages: Vec::new(),
                outputs: Vec::new(),
                summary: Default::default(),
            },
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// Register a file written under the output directory.
    pub fn wrote(&mut self, name: &str) {
        self.written.push(self.path(name));
    }

    pub fn set_config(&mut self, config: &KvConfig) {
        self.manifest.config = config.to_string();
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.manifest.seeds.insert(name.into(), value.into());
    }

    pub fn summary(&mut self, name: &str, value: impl Into<serde_json::Value>) {
        self.manifest.summary.insert(name.into(), value.into());
    }

    /// Run one named stage, recording its wall time and outcome.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let result = f(self);
        self.manifest.stages.push(StageRecord {
            name: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
            ok: result.is_ok(),
            error: result.as_ref().err().map(ToString::to_string),
        });
        result
    }

    fn inventory(&self, files: &[PathBuf], base: &Path) -> Result<Vec<OutputFile>> {
        files
            .iter()
            .map(|p| {
                let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
                Ok(OutputFile {
                    file: p.strip_prefix(base).unwrap_or(p).to_string_lossy().into_owned(),
                    bytes: bytes.len() as u64,
                    sha256: format!("{:x}", Sha256::digest(&bytes)),
                })
            })
            .collect()
    }

    /// Write the manifest. On failure, move outputs to quarantine first.
    pub fn finish<T>(mut self, result: Result<T>) -> Result<(T, RunManifest)> {
        match result {
            Ok(v) => {
                self.manifest.outputs = self.inventory(&self.written, &self.out_dir)?;
                self.write_manifest(&self.out_dir)?;
                Ok((v, self.manifest))
            }
            Err(e) => {
                let q = self.out_dir.join(QUARANTINE);
                fs::create_dir_all(&q).map_err(|err| Error::io(&q, err))?;
                let mut moved = Vec::new();
                for p in &self.written {
                    if p.exists() {
                        let dest = q.join(p.file_name().unwrap_or_default());
                        fs::rename(p, &dest).map_err(|err| Error::io(p, err))?;
                        moved.push(dest);
                    }
                }
                self.manifest.outputs = self.inventory(&moved, &self.out_dir)?;
                self.write_manifest(&q)?;
                Err(e)
            }
        }
    }

    fn write_manifest(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

/// Build a rayon pool with `workers` threads (0 = all cores) and run `f`
/// inside it.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn parse_list(s: Option<&str>) -> Vec<String> {
    s.map(|v| {
        v.split(',')
            .map(|x| x.trim().to_string())
            .filter(|x| !x.is_empty())
            .collect()
    })
    .unwrap_or_default()
}

pub fn load_dataset(path: &Path, categorical: &[String]) -> Result<Dataset> {
    let schema = CsvSchema::infer(path, categorical)?;
    load_csv(path, &schema)
}

/// Forest settings under `prefix` (`n_trees`, `d0`, `mtry`), falling back
/// to `fallback`. Missing values are filled in on `resolved`.
fn forest_section(
    cfg: &KvConfig,
    prefix: &str,
    fallback: &TreeConfigDefaults,
    resolved: &mut KvConfig,
) -> Result<(usize, TreeConfig)> {
    let s = cfg.section(prefix);
    let n_trees = s.get_or("n_trees", fallback.n_trees)?;
    let d0 = s.get_or("d0", fallback.d0)?;
    let mtry = s.get_or("mtry", fallback.mtry)?;
    resolved.set(format!("{prefix}.n_trees"), n_trees);
    resolved.set(format!("{prefix}.d0"), d0);
    resolved.set(format!("{prefix}.mtry"), mtry);
    Ok((n_trees, TreeConfig { d0, mtry, seed: 0 }))
}

struct TreeConfigDefaults {
    n_trees: usize,
    d0: usize,
    mtry: usize,
}

/// Model settings shared by `run`, `fit` and `predict`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub seed: u64,
    pub rsf: ForestConfig,
    pub sbrsf: SbrsfConfig,
}

impl ModelSpec {
    /// Read `seed`, `rsf.*` and `sbrsf.*` keys; write the fully resolved
    /// values back into `resolved`.
    pub fn from_kv(cfg: &KvConfig, n_features: usize, resolved: &mut KvConfig) -> Result<Self> {
        let seed: u64 = cfg.get_or("seed", 1)?;
        resolved.set("seed", seed);
        let tree_default = TreeConfig::default_for(n_features);
        let base = TreeConfigDefaults {
            n_trees: 200,
            d0: tree_default.d0,
            mtry: tree_default.mtry,
        };
        let (rsf_trees, rsf_tree) = forest_section(cfg, "rsf", &base, resolved)?;
        let rsf_defaults = TreeConfigDefaults {
            n_trees: rsf_trees,
            d0: rsf_tree.d0,
            mtry: rsf_tree.mtry,
        };
        let (g_trees, g_tree) = forest_section(cfg, "sbrsf.global", &rsf_defaults, resolved)?;
        let (c_trees, c_tree) = forest_section(cfg, "sbrsf.per_case", &rsf_defaults, resolved)?;
        for t in [&rsf_tree, &g_tree, &c_tree] {
            t.validate(n_features)?;
        }
        let forest_seed = derive_seed(seed, Stream::GlobalForest, 0);
        let rsf = ForestConfig::new(rsf_trees, rsf_tree, forest_seed);
        let dependent = cfg.get_or("sbrsf.dependent_censoring", false)?;
        resolved.set("sbrsf.dependent_censoring", dependent);
        let threshold: Option<f64> = cfg.get("sbrsf.threshold")?;
        if let Some(t) = threshold {
            resolved.set("sbrsf.threshold", t);
        }
        let case_seeds = match cfg.get_str("sbrsf.case_seeds").unwrap_or("derived") {
            "derived" => CaseSeeds::Derived,
            "fixed" => CaseSeeds::Fixed,
            other => return Err(Error::Config(format!("unknown sbrsf.case_seeds {other:?}"))),
        };
        resolved.set(
            "sbrsf.case_seeds",
            if case_seeds == CaseSeeds::Fixed {
                "fixed"
            } else {
                "derived"
            },
        );
        let sbrsf = SbrsfConfig {
            // the global forest is paired with the RSF baseline's seed
            global: ForestConfig::new(g_trees, g_tree, forest_seed),
            per_case: ForestConfig::new(c_trees, c_tree, forest_seed),
            dependent_censoring: dependent,
            threshold,
            case_seeds,
            seed,
        };
        Ok(ModelSpec { seed, rsf, sbrsf })
    }
}

/// Data source, split, models and evaluation grid for `run`.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub train: Dataset,
    pub test: Dataset,
    pub simulated: Option<crate::simgen::SimulatedData>,
    pub models: ModelSpec,
    pub grid: Vec<f64>,
    /// Configuration with every default and referenced file inlined.
    pub resolved: KvConfig,
}

impl ExperimentSpec {
    /// Resolve an experiment configuration. Relative paths are taken from
    /// `base_dir`.
    pub fn resolve(cfg: &KvConfig, base_dir: &Path) -> Result<Self> {
        let mut resolved = KvConfig::new();
        let seed: u64 = cfg.get_or("seed", 1)?;
        let source = cfg.get_str("data.source").unwrap_or("simulate");
        let rel = |p: &str| -> PathBuf {
            let p = Path::new(p);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        let categorical = parse_list(cfg.get_str("data.categorical"));
        let mut simulated = None;
        let (train, test) = match source {
            "simulate" => {
                let mut sim_kv = match cfg.get_str("data.sim_config") {
                    Some(p) => KvConfig::load(rel(p))?,
                    None => KvConfig::new(),
                };
                for k in cfg.section("sim").keys() {
                    sim_kv.set(k, cfg.section("sim").get_str(k).unwrap_or_default());
                }
                if !sim_kv.contains("seed") {
                    sim_kv.set("seed", seed);
                }
                let sim_cfg = SimConfig::from_kv(&sim_kv)?;
                resolved.set("data.source", "simulate");
                resolved.merge_section("sim", &sim_cfg.to_kv());
                let sim = simulate(&sim_cfg)?;
                let fraction: f64 = cfg.get_or("split.fraction", 0.7)?;
                let split_seed: u64 = cfg.get_or("split.seed", seed)?;
                resolved.set("split.fraction", fraction);
                resolved.set("split.seed", split_seed);
                let parts = split_train_test(&sim.dataset, fraction, split_seed)?;
                simulated = Some(sim);
                parts
            }
            "csv" => {
                resolved.set("data.source", "csv");
                if !categorical.is_empty() {
                    resolved.set("data.categorical", categorical.join(","));
                }
                if let Some(p) = cfg.get_str("data.path") {
                    let full = load_dataset(&rel(p), &categorical)?;
                    let fraction: f64 = cfg.get_or("split.fraction", 0.7)?;
                    let split_seed: u64 = cfg.get_or("split.seed", seed)?;
                    resolved.set("data.path", rel(p).display());
                    resolved.set("split.fraction", fraction);
                    resolved.set("split.seed", split_seed);
                    split_train_test(&full, fraction, split_seed)?
                } else {
                    let tr = cfg.require_str("data.train")?;
                    let te = cfg.require_str("data.test")?;
                    resolved.set("data.train", rel(tr).display());
                    resolved.set("data.test", rel(te).display());
                    (
                        load_dataset(&rel(tr), &categorical)?,
                        load_dataset(&rel(te), &categorical)?,
                    )
                }
            }
            other => return Err(Error::Config(format!("unknown data.source {other:?}"))),
        };
        if train.feature_names() != test.feature_names() {
            return Err(Error::Schema("train and test covariate columns differ".into()));
        }
        let models = ModelSpec::from_kv(cfg, train.n_features(), &mut resolved)?;
        let grid_spec = cfg.get_str("eval.grid").unwrap_or("1:20:1");
        let grid = parse_grid(grid_spec)?;
        resolved.set("eval.grid", grid_spec);
        Ok(ExperimentSpec {
            train,
            test,
            simulated,
            models,
            grid,
            resolved,
        })
    }
}

/// Results of `run`, also summarized in its manifest.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rsf_auc: AucCurve,
    pub sbrsf_auc: AucCurve,
    pub comparison: AucComparison,
    pub manifest: RunManifest,
}

/// `run`: RSF and SB-RSF on one split, AUC curves, comparison and plot.
pub fn cmd_run(cfg: &KvConfig, base_dir: &Path, out_dir: &Path, workers: usize) -> Result<RunOutcome> {
    let mut run = Run::new(out_dir, "run", workers)?;
    let result = with_workers(workers, || run_stages(&mut run, cfg, base_dir)).and_then(|r| r);
    let ((rsf_auc, sbrsf_auc, comparison), manifest) = run.finish(result)?;
    Ok(RunOutcome {
        rsf_auc,
        sbrsf_auc,
        comparison,
        manifest,
    })
}

fn run_stages(run: &mut Run, cfg: &KvConfig, base_dir: &Path) -> Result<(AucCurve, AucCurve, AucComparison)> {
    let spec = run.stage("resolve", |_| ExperimentSpec::resolve(cfg, base_dir))?;
    run.set_config(&spec.resolved);
    run.seed("master", spec.models.seed);
    run.seed("forest", spec.models.rsf.seed);
    if let Some(s) = spec.resolved.get::<u64>("sim.seed")? {
        run.seed("simulation", s);
    }
    if let Some(s) = spec.resolved.get::<u64>("split.seed")? {
        run.seed("split", s);
    }

    run.stage("write_data", |r| {
        fs::write(r.path("config.conf"), spec.resolved.to_string()).map_err(|e| Error::io(r.path("config.conf"), e))?;
        r.wrote("config.conf");
        spec.train.write_csv(r.path("train.csv"))?;
        r.wrote("train.csv");
        spec.test.write_csv(r.path("test.csv"))?;
        r.wrote("test.csv");
        if let Some(sim) = &spec.simulated {
            sim.dataset.write_csv(r.path("data.csv"))?;
            r.wrote("data.csv");
            sim.write_oracle_csv(r.path("oracle.csv"))?;
            r.wrote("oracle.csv");
            r.summary("censored_fraction", sim.censored_fraction());
            if let Some(l) = sim.censoring_level {
                r.summary("censoring_level", l);
            }
        }
        Ok(())
    })?;

    let rsf = run.stage("rsf", |r| {
        let p = rsf_fit_predict(&spec.train, &spec.test, &spec.models.rsf)?;
        p.write_csv(r.path("rsf_predictions.csv"), spec.test.ids())?;
        r.wrote("rsf_predictions.csv");
        Ok(p)
    })?;

    let (weights, ipcw) = run.stage("similarity_weights", |r| {
        let (w, ipcw) = sampling_weights(&spec.train, &spec.test, &spec.models.sbrsf)?;
        w.write_csv(r.path("sbrsf_weights.csv"), spec.train.ids(), spec.test.ids())?;
        r.wrote("sbrsf_weights.csv");
        Ok((w, ipcw))
    })?;
    if let Some(ipcw) = &ipcw {
        run.stage("ipcw", |r| {
            ipcw.write_csv(r.path("ipcw.csv"), spec.train.ids())?;
            r.wrote("ipcw.csv");
            r.summary("ipcw", ipcw_summary(ipcw.as_slice()));
            Ok(())
        })?;
    }

    let sb_chf = run.stage("sbrsf", |r| {
        let chf = predict_with_weights(&spec.train, &spec.test, &weights, &spec.models.sbrsf)?;
        write_predictions(r.path("sbrsf_predictions.csv"), &chf, spec.test.ids())?;
        r.wrote("sbrsf_predictions.csv");
        Ok(chf)
    })?;

    run.stage("evaluate", |r| {
        let rsf_auc = time_varying_auc(&spec.test, &rsf.per_test_chf, &spec.grid)?;
        let sb_auc = time_varying_auc(&spec.test, &sb_chf, &spec.grid)?;
        rsf_auc.write_csv(r.path("rsf_auc.csv"))?;
        r.wrote("rsf_auc.csv");
        sb_auc.write_csv(r.path("sbrsf_auc.csv"))?;
        r.wrote("sbrsf_auc.csv");
        let cmp = compare_auc(&sb_auc, &rsf_auc)?;
        cmp.write_csv(r.path("comparison.csv"))?;
        r.wrote("comparison.csv");
        fs::write(r.path("auc_plot.svg"), auc_plot_svg(&sb_auc, &rsf_auc))
            .map_err(|e| Error::io(r.path("auc_plot.svg"), e))?;
        r.wrote("auc_plot.svg");
        r.summary("sbrsf_mean_auc", sb_auc.mean());
        r.summary("rsf_mean_auc", rsf_auc.mean());
        r.summary("mean_diff_sbrsf_minus_rsf", cmp.mean_diff());
        r.summary("sbrsf_win_fraction", cmp.win_fraction());
        r.summary("defined_grid_points", cmp.n_compared);
        Ok((rsf_auc, sb_auc, cmp))
    })
}

fn ipcw_summary(w: &[f64]) -> serde_json::Value {
    let n = w.len() as f64;
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    serde_json::json!({ "n": w.len(), "min": min, "max": max, "mean": w.iter().sum::<f64>() / n })
}

/// `simulate`: dataset CSV, oracle CSV and the resolved config.
pub fn cmd_simulate(sim: &SimConfig, out_dir: &Path, workers: usize) -> Result<RunManifest> {
    let mut run = Run::new(out_dir, "simulate", workers)?;
    let kv = sim.to_kv();
    run.set_config(&kv);
    run.seed("simulation", sim.seed);
    let result = run.stage("simulate", |r| {
        let data = with_workers(workers, || simulate(sim))??;
        fs::write(r.path("config.conf"), kv.to_string()).map_err(|e| Error::io(r.path("config.conf"), e))?;
        r.wrote("config.conf");
        data.dataset.write_csv(r.path("data.csv"))?;
        r.wrote("data.csv");
        data.write_oracle_csv(r.path("oracle.csv"))?;
        r.wrote("oracle.csv");
        r.summary("n", data.dataset.len());
        r.summary("censored_fraction", data.censored_fraction());
        if let Some(l) = data.censoring_level {
            r.summary("censoring_level", l);
        }
        Ok(())
    });
    run.finish(result).map(|(_, m)| m)
}

fn model_resolved(cfg: &KvConfig, train: &Dataset) -> Result<(ModelSpec, KvConfig)> {
    let mut resolved = KvConfig::new();
    let m = ModelSpec::from_kv(cfg, train.n_features(), &mut resolved)?;
    Ok((m, resolved))
}

/// `fit`: global forest and per-test-case sampling weights.
pub fn cmd_fit(cfg: &KvConfig, train: &Dataset, test: &Dataset, out_dir: &Path, workers: usize) -> Result<RunManifest> {
    let mut run = Run::new(out_dir, "fit", workers)?;
    let result = (|| {
        let (m, resolved) = run.stage("resolve", |_| model_resolved(cfg, train))?;
        run.set_config(&resolved);
        run.seed("master", m.seed);
        run.seed("forest", m.sbrsf.global.seed);
        run.stage("similarity_weights", |r| {
            let (w, ipcw) = with_workers(workers, || sampling_weights(train, test, &m.sbrsf))??;
            w.write_csv(r.path("weights.csv"), train.ids(), test.ids())?;
            r.wrote("weights.csv");
            if let Some(ipcw) = ipcw {
                ipcw.write_csv(r.path("ipcw.csv"), train.ids())?;
                r.wrote("ipcw.csv");
                r.summary("ipcw", ipcw_summary(ipcw.as_slice()));
            }
            Ok(())
        })
    })();
    run.finish(result).map(|(_, m)| m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rsf,
    Sbrsf,
}

/// `predict`: per-test-case CHFs, optionally from precomputed weights.
pub fn cmd_predict(
    cfg: &KvConfig,
    train: &Dataset,
    test: &Dataset,
    method: Method,
    weights: Option<&Path>,
    out_dir: &Path,
    workers: usize,
) -> Result<RunManifest> {
    let mut run = Run::new(out_dir, "predict", workers)?;
    let result = (|| {
        let (m, resolved) = run.stage("resolve", |_| model_resolved(cfg, train))?;
        run.set_config(&resolved);
        run.seed("master", m.seed);
        run.seed("forest", m.rsf.seed);
        run.stage("predict", |r| {
            let chf = with_workers(workers, || -> Result<_> {
                Ok(match (method, weights) {
                    (Method::Rsf, _) => rsf_fit_predict(train, test, &m.rsf)?.per_test_chf,
                    (Method::Sbrsf, None) => sbrsf_fit_predict(train, test, &m.sbrsf)?.per_test_chf,
                    (Method::Sbrsf, Some(p)) => {
                        let (w, train_ids, test_ids) = WeightMatrix::read_csv(p)?;
                        if train_ids != train.ids() || test_ids != test.ids() {
                            return Err(Error::InvalidData(
                                "weight matrix ids do not match the train/test files".into(),
                            ));
                        }
                        predict_with_weights(train, test, &w, &m.sbrsf)?
                    }
                })
            })??;
            write_predictions(r.path("predictions.csv"), &chf, test.ids())?;
            r.wrote("predictions.csv");
            Ok(())
        })
    })();
    run.finish(result).map(|(_, m)| m)
}

/// `evaluate`: AUC curve of stored predictions against a test file.
pub fn cmd_evaluate(predictions: &Path, test: &Dataset, grid: &[f64]) -> Result<AucCurve> {
    let preds = read_predictions(predictions)?;
    let by_id: std::collections::HashMap<&str, &crate::estimators::ChfCurve> =
        preds.iter().map(|(id, c)| (id.as_str(), c)).collect();
    let matched = test.ids().iter().filter(|id| by_id.contains_key(id.as_str())).count();
    if matched == 0 {
        return Err(Error::InvalidData("no test ids match the prediction file".into()));
    }
    let chfs = test
        .ids()
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|c| (*c).clone())
                .ok_or_else(|| Error::InvalidData(format!("no prediction for test id {id:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    time_varying_auc(test, &chfs, grid)
}

/// Two-series AUC-vs-time chart as standalone SVG: the similarity-based
/// method in red, the baseline in black.
pub fn auc_plot_svg(sbrsf: &AucCurve, rsf: &AucCurve) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 20.0, 30.0, 60.0);
    let pts: Vec<(f64, f64)> = sbrsf.defined().chain(rsf.defined()).collect();
    let (tmin, tmax) = sbrsf
        .grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let (mut amin, mut amax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, v)| {
        (a.min(v), b.max(v))
    });
    if !amin.is_finite() {
        (amin, amax) = (0.0, 1.0);
    }
    let pad = ((amax - amin) * 0.1).max(0.005);
    let (amin, amax) = ((amin - pad).max(0.0), (amax + pad).min(1.0));
    let tspan = if tmax > tmin { tmax - tmin } else { 1.0 };
    let x = |t: f64| left + (t - tmin) / tspan * (w - left - right);
    let y = |a: f64| top + (amax - a) / (amax - amin) * (h - top - bottom);

    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    s += &format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - bottom,
        w - right,
        h - bottom,
        h - bottom
    );
    for k in 0..=5 {
        let a = amin + (amax - amin) * k as f64 / 5.0;
        s += &format!(
            "<line x1=\"{}\" y1=\"{:.2}\" x2=\"{left}\" y2=\"{:.2}\" stroke=\"black\"/><text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{a:.3}</text>\n",
            left - 4.0,
            y(a),
            y(a),
            left - 6.0,
            y(a) + 4.0
        );
    }
    for &t in &sbrsf.grid {
        s += &format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{t}</text>\n",
            x(t),
            h - bottom + 16.0
        );
    }
    s += &format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">time</text>\n<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">time-varying AUC</text>\n",
        (left + w - right) / 2.0,
        h - 18.0,
        (top + h - bottom) / 2.0,
        (top + h - bottom) / 2.0
    );
    for (curve, color) in [(rsf, "black"), (sbrsf, "red")] {
        for (t, a) in curve.defined() {
            s += &format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>\n",
                x(t),
                y(a)
            );
        }
    }
    s += &format!(
        "<circle cx=\"{}\" cy=\"14\" r=\"4\" fill=\"red\"/><text x=\"{}\" y=\"18\">SB-RSF</text>\n<circle cx=\"{}\" cy=\"14\" r=\"4\" fill=\"black\"/><text x=\"{}\" y=\"18\">RSF</text>\n",
        left + 10.0,
        left + 18.0,
        left + 90.0,
        left + 98.0
    );
    s += "</svg>\n";
    s
}
