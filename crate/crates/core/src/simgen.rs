//! Synthetic survival data with subspace-specific covariate effects.
//!
//! Covariates are iid uniform. A binary partition of covariate space picks
//! a coefficient vector, whose linear predictor `Y` sets the Weibull scale
//! `exp(Y)`: `S(t) = exp(-(t / exp(Y))^shape)`. Censoring is none, uniform
//! on `(0, c_max)`, or Weibull with a scale that also depends on `Y`.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Weibull};
use rayon::prelude::*;

use crate::config::KvConfig;
use crate::dataset::{Dataset, SurvivalRecord};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, Stream};

const BLOCK: usize = 256;
const PILOT_SIZE: usize = 20_000;

/// Routing rule at an internal partition node.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitRule {
    /// `x[feature] <= threshold` selects the first child.
    Threshold { feature: usize, threshold: f64 },
    /// `(x[a] + shift_a) * (x[b] + shift_b) > 0` selects the first child.
    ProductPositive {
        a: usize,
        shift_a: f64,
        b: usize,
        shift_b: f64,
    },
}

impl SplitRule {
    fn first(&self, x: &[f64]) -> bool {
        match *self {
            SplitRule::Threshold { feature, threshold } => x[feature] <= threshold,
            SplitRule::ProductPositive { a, shift_a, b, shift_b } => (x[a] + shift_a) * (x[b] + shift_b) > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    Leaf(usize),
    Node {
        rule: SplitRule,
        first: Box<Partition>,
        second: Box<Partition>,
    },
}

impl Partition {
    fn leaf_ids(&self, out: &mut Vec<usize>) {
        match self {
            Partition::Leaf(id) => out.push(*id),
            Partition::Node { first, second, .. } => {
                first.leaf_ids(out);
                second.leaf_ids(out);
            }
        }
    }

    fn max_feature(&self) -> Option<usize> {
        match self {
            Partition::Leaf(_) => None,
            Partition::Node { rule, first, second } => {
                let here = match *rule {
                    SplitRule::Threshold { feature, .. } => feature,
                    SplitRule::ProductPositive { a, b, .. } => a.max(b),
                };
                [Some(here), first.max_feature(), second.max_feature()]
                    .into_iter()
                    .flatten()
                    .max()
            }
        }
    }

    /// Compact text form: `L<id>`, `T<f>@<thr>(<first>,<second>)`,
    /// `P<a>@<shift>*<b>@<shift>(<first>,<second>)`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.write_text(&mut s);
        s
    }

    fn write_text(&self, s: &mut String) {
        match self {
            Partition::Leaf(id) => {
                let _ = write!(s, "L{id}");
            }
            Partition::Node { rule, first, second } => {
                match *rule {
                    SplitRule::Threshold { feature, threshold } => {
                        let _ = write!(s, "T{feature}@{threshold}(");
                    }
                    SplitRule::ProductPositive { a, shift_a, b, shift_b } => {
                        let _ = write!(s, "P{a}@{shift_a}*{b}@{shift_b}(");
                    }
                }
                first.write_text(s);
                s.push(',');
                second.write_text(s);
                s.push(')');
            }
        }
    }

    pub fn parse(text: &str) -> Result<Partition> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = PartitionParser {
            s: compact.as_bytes(),
            at: 0,
        };
        let tree = p.node()?;
        if p.at != p.s.len() {
            return Err(p.err("trailing characters"));
        }
        Ok(tree)
    }
}

struct PartitionParser<'a> {
    s: &'a [u8],
    at: usize,
}

impl PartitionParser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Config(format!(
            "partition: {what} at offset {} in {:?}",
            self.at,
            String::from_utf8_lossy(self.s)
        ))
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.s.get(self.at) == Some(&c) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected {:?}", c as char)))
        }
    }

    fn token(&mut self, stops: &[u8]) -> &str {
        let start = self.at;
        while self.at < self.s.len() && !stops.contains(&self.s[self.at]) {
            self.at += 1;
        }
        std::str::from_utf8(&self.s[start..self.at]).unwrap_or("")
    }

    fn number<T: std::str::FromStr>(&mut self, stops: &[u8]) -> Result<T> {
        let tok = self.token(stops).to_string();
        tok.parse().map_err(|_| self.err(&format!("bad number {tok:?}")))
    }

    fn node(&mut self) -> Result<Partition> {
        let kind = *self.s.get(self.at).ok_or_else(|| self.err("unexpected end"))?;
        self.at += 1;
        let rule = match kind {
            b'L' => return Ok(Partition::Leaf(self.number(b",)")?)),
            b'T' => {
                let feature = self.number(b"@")?;
                self.expect(b'@')?;
                let threshold = self.number(b"(")?;
                SplitRule::Threshold { feature, threshold }
            }
            b'P' => {
                let a = self.number(b"@")?;
                self.expect(b'@')?;
                let shift_a = self.number(b"*")?;
                self.expect(b'*')?;
                let b = self.number(b"@")?;
                self.expect(b'@')?;
                let shift_b = self.number(b"(")?;
                SplitRule::ProductPositive { a, shift_a, b, shift_b }
            }
            _ => {
                self.at -= 1;
                return Err(self.err("expected L, T or P"));
            }
        };
        self.expect(b'(')?;
        let first = self.node()?;
        self.expect(b',')?;
        let second = self.node()?;
        self.expect(b')')?;
        Ok(Partition::Node {
            rule,
            first: Box::new(first),
            second: Box::new(second),
        })
    }
}

/// Covariate-space partition with one coefficient vector per subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceModel {
    pub partition: Partition,
    /// Indexed by leaf id.
    pub coefficients: Vec<Vec<f64>>,
}

impl SubspaceModel {
    pub fn new(partition: Partition, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        let m = SubspaceModel {
            partition,
            coefficients,
        };
        let mut ids = Vec::new();
        m.partition.leaf_ids(&mut ids);
        ids.sort_unstable();
        if ids != (0..m.coefficients.len()).collect::<Vec<_>>() {
            return Err(Error::Config(format!(
                "partition leaves {ids:?} must be exactly 0..{} (one per coefficient vector)",
                m.coefficients.len()
            )));
        }
        let p = m.coefficients[0].len();
        if m.coefficients.iter().any(|c| c.len() != p) {
            return Err(Error::Config("coefficient vectors differ in length".into()));
        }
        if m.partition.max_feature().is_some_and(|f| f >= p) {
            return Err(Error::Config(
                "partition uses a feature beyond the coefficient length".into(),
            ));
        }
        Ok(m)
    }

    pub fn n_subspaces(&self) -> usize {
        self.coefficients.len()
    }

    pub fn n_features(&self) -> usize {
        self.coefficients[0].len()
    }

    pub fn subspace(&self, x: &[f64]) -> usize {
        let mut at = &self.partition;
        loop {
            match at {
                Partition::Leaf(id) => return *id,
                Partition::Node { rule, first, second } => {
                    at = if rule.first(x) { first } else { second };
                }
            }
        }
    }

    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.coefficients[self.subspace(x)]
            .iter()
            .zip(x)
            .map(|(b, v)| b * v)
            .sum()
    }
}

/// Two-branch model: `0.2 x1 - 0.1 x2 + 0.5 x3` where
/// `(x1 + 7)(x3 - 10) > 0`, otherwise `0.3 x1 + 0.1 x2 - 0.3 x3`.
pub fn example1_model() -> SubspaceModel {
    SubspaceModel::new(
        Partition::Node {
            rule: SplitRule::ProductPositive {
                a: 0,
                shift_a: 7.0,
                b: 2,
                shift_b: -10.0,
            },
            first: Box::new(Partition::Leaf(0)),
            second: Box::new(Partition::Leaf(1)),
        },
        vec![vec![0.2, -0.1, 0.5], vec![0.3, 0.1, -0.3]],
    )
    .expect("valid built-in model")
}

/// Linear predictor of the two-branch model; input must have length 3.
pub fn linear_predictor_ex1(x: &[f64]) -> Result<f64> {
    if x.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: x.len(),
        });
    }
    Ok(example1_model().linear_predictor(x))
}

/// Four-subspace model on five covariates; the first three drive the
/// partition. Constants are arbitrary choices of this crate.
pub fn example2_model() -> SubspaceModel {
    let t = |feature: usize, first: Partition, second: Partition| Partition::Node {
        rule: SplitRule::Threshold {
            feature,
            threshold: 0.0,
        },
        first: Box::new(first),
        second: Box::new(second),
    };
    SubspaceModel::new(
        t(
            0,
            t(1, Partition::Leaf(0), Partition::Leaf(1)),
            t(2, Partition::Leaf(2), Partition::Leaf(3)),
        ),
        vec![
            vec![0.2, -0.1, 0.3, 0.1, -0.2],
            vec![-0.3, 0.2, 0.1, -0.1, 0.2],
            vec![0.1, 0.3, -0.2, 0.2, 0.1],
            vec![-0.2, -0.2, 0.2, -0.3, -0.1],
        ],
    )
    .expect("valid built-in model")
}

/// Either a fixed censoring level or a target censoring fraction to
/// calibrate against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CensoringLevel {
    Fixed(f64),
    TargetFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Censoring {
    None,
    /// `C ~ Uniform(0, c_max)`; the level is `c_max`.
    Uniform(CensoringLevel),
    /// `C = exp(intercept + slope * Y) * W` with `W ~ Weibull(1, shape)`;
    /// the level is `intercept`.
    Dependent {
        shape: f64,
        slope: f64,
        level: CensoringLevel,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    pub covariate_range: (f64, f64),
    pub weibull_shape: f64,
    pub model: SubspaceModel,
    pub censoring: Censoring,
    pub seed: u64,
}

impl SimConfig {
    /// 1000 cases, three covariates on (-15, 15), Weibull shape 2, uniform
    /// censoring calibrated to 20%.
    pub fn example1(seed: u64) -> Self {
        SimConfig {
            n: 1000,
            p: 3,
            covariate_range: (-15.0, 15.0),
            weibull_shape: 2.0,
            model: example1_model(),
            censoring: Censoring::Uniform(CensoringLevel::TargetFraction(0.2)),
            seed,
        }
    }

    /// Four subspaces over five covariates, otherwise as [`SimConfig::example1`].
    pub fn example2_default() -> Self {
        SimConfig {
            p: 5,
            model: example2_model(),
            ..Self::example1(0)
        }
    }

    /// Example 1 covariates with censoring whose scale tracks the linear
    /// predictor.
    pub fn dependent_censoring(seed: u64) -> Self {
        SimConfig {
            censoring: Censoring::Dependent {
                shape: 1.0,
                slope: 0.5,
                level: CensoringLevel::TargetFraction(0.3),
            },
            ..Self::example1(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        let (lo, hi) = self.covariate_range;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Config(format!("covariate range ({lo}, {hi}) is empty")));
        }
        if !(self.weibull_shape > 0.0) || !self.weibull_shape.is_finite() {
            return Err(Error::Config("weibull_shape must be positive".into()));
        }
        if self.model.n_features() != self.p {
            return Err(Error::Config(format!(
                "model has {} coefficients per subspace but p = {}",
                self.model.n_features(),
                self.p
            )));
        }
        let check_level = |l: CensoringLevel| match l {
            CensoringLevel::TargetFraction(f) if !(f > 0.0 && f < 1.0) => Err(Error::Config(format!(
                "target censoring fraction {f} must lie in (0, 1)"
            ))),
            CensoringLevel::Fixed(v) if !v.is_finite() => Err(Error::Config("censoring level must be finite".into())),
            _ => Ok(()),
        };
        match self.censoring {
            Censoring::None => {}
            Censoring::Uniform(l) => {
                check_level(l)?;
                if let CensoringLevel::Fixed(c) = l {
                    if !(c > 0.0) {
                        return Err(Error::Config("c_max must be positive".into()));
                    }
                }
            }
            Censoring::Dependent { shape, slope, level } => {
                check_level(level)?;
                if !(shape > 0.0) || !slope.is_finite() {
                    return Err(Error::Config(
                        "dependent censoring needs shape > 0 and finite slope".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvConfig {
        let mut c = KvConfig::new();
        c.set("n", self.n);
        c.set("p", self.p);
        c.set("covariate_low", self.covariate_range.0);
        c.set("covariate_high", self.covariate_range.1);
        c.set("weibull_shape", self.weibull_shape);
        c.set("seed", self.seed);
        c.set("model.partition", self.model.partition.to_text());
        for (k, b) in self.model.coefficients.iter().enumerate() {
            let v: Vec<String> = b.iter().map(f64::to_string).collect();
            c.set(format!("model.coef.{k}"), v.join(","));
        }
        let mut level = |l: CensoringLevel, fixed_key: &str| match l {
            CensoringLevel::Fixed(v) => c.set(format!("censoring.{fixed_key}"), v),
            CensoringLevel::TargetFraction(f) => c.set("censoring.target_fraction", f),
        };
        match self.censoring {
            Censoring::None => c.set("censoring", "none"),
            Censoring::Uniform(l) => {
                level(l, "c_max");
                c.set("censoring", "uniform");
            }
            Censoring::Dependent { shape, slope, level: l } => {
                level(l, "intercept");
                c.set("censoring", "dependent");
                c.set("censoring.shape", shape);
                c.set("censoring.slope", slope);
            }
        }
        c
    }

    /// Parse from key/value entries. `preset = example1 | example2 |
    /// dependent` supplies defaults that explicit keys override.
    pub fn from_kv(c: &KvConfig) -> Result<Self> {
        let base = match c.get_str("preset") {
            None | Some("example1") => Self::example1(0),
            Some("example2") => Self::example2_default(),
            Some("dependent") => Self::dependent_censoring(0),
            Some(other) => return Err(Error::Config(format!("unknown preset {other:?}"))),
        };
        let model = if c.contains("model.partition") {
            let partition = Partition::parse(c.require_str("model.partition")?)?;
            let mut coefficients = Vec::new();
            while let Some(v) = c.get_str(&format!("model.coef.{}", coefficients.len())) {
                coefficients.push(
                    v.split(',')
                        .map(|s| {
                            s.trim()
                                .parse::<f64>()
                                .map_err(|_| Error::Config(format!("bad coefficient {s:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            if coefficients.is_empty() {
                return Err(Error::Config("model.partition given without model.coef.0".into()));
            }
            SubspaceModel::new(partition, coefficients)?
        } else {
            base.model.clone()
        };
        let level = |fixed_key: &str, default: CensoringLevel| -> Result<CensoringLevel> {
            if let Some(v) = c.get::<f64>(&format!("censoring.{fixed_key}"))? {
                Ok(CensoringLevel::Fixed(v))
            } else if let Some(f) = c.get::<f64>("censoring.target_fraction")? {
                Ok(CensoringLevel::TargetFraction(f))
            } else {
                Ok(default)
            }
        };
        let default_level = match base.censoring {
            Censoring::Uniform(l) | Censoring::Dependent { level: l, .. } => l,
            Censoring::None => CensoringLevel::TargetFraction(0.2),
        };
        let kind = c.get_str("censoring").unwrap_or(match base.censoring {
            Censoring::None => "none",
            Censoring::Uniform(_) => "uniform",
            Censoring::Dependent { .. } => "dependent",
        });
        let censoring = match kind {
            "none" => Censoring::None,
            "uniform" => Censoring::Uniform(level("c_max", default_level)?),
            "dependent" => {
                let (shape0, slope0) = match base.censoring {
                    Censoring::Dependent { shape, slope, .. } => (shape, slope),
                    _ => (1.0, 0.5),
                };
                Censoring::Dependent {
                    shape: c.get_or("censoring.shape", shape0)?,
                    slope: c.get_or("censoring.slope", slope0)?,
                    level: level("intercept", default_level)?,
                }
            }
            other => return Err(Error::Config(format!("unknown censoring {other:?}"))),
        };
        let cfg = SimConfig {
            n: c.get_or("n", base.n)?,
            p: c.get_or("p", model.n_features())?,
            covariate_range: (
                c.get_or("covariate_low", base.covariate_range.0)?,
                c.get_or("covariate_high", base.covariate_range.1)?,
            ),
            weibull_shape: c.get_or("weibull_shape", base.weibull_shape)?,
            model,
            censoring,
            seed: c.get_or("seed", base.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_kv(&KvConfig::load(path)?)
    }
}

/// Generated data plus quantities never shown to the models.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub dataset: Dataset,
    pub true_times: Vec<f64>,
    pub subspace_ids: Vec<usize>,
    /// Resolved censoring level (`c_max` or intercept), when censored.
    pub censoring_level: Option<f64>,
}

impl SimulatedData {
    pub fn censored_fraction(&self) -> f64 {
        let n = self.dataset.len();
        (n - self.dataset.n_events()) as f64 / n as f64
    }

    /// `id,true_time,subspace_id`.
    pub fn write_oracle_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path.as_ref())?;
        w.write_record(["id", "true_time", "subspace_id"])?;
        for ((id, t), s) in self.dataset.ids().iter().zip(&self.true_times).zip(&self.subspace_ids) {
            w.write_record([id.as_str(), &t.to_string(), &s.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path.as_ref(), e))
    }
}

/// One subject's latent draws, before the censoring level is applied.
struct Latent {
    x: Vec<f64>,
    y: f64,
    event_time: f64,
    /// `U(0,1)` for uniform censoring, standard Weibull for dependent.
    censor_raw: f64,
}

fn draw_latent(cfg: &SimConfig, master: u64, stream: Stream, n: usize) -> Vec<Latent> {
    let (lo, hi) = cfg.covariate_range;
    let n_blocks = n.div_ceil(BLOCK);
    (0..n_blocks)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = rng_from_seed(derive_seed(master, stream, b as u64));
            let len = BLOCK.min(n - b * BLOCK);
            let censor_shape = match cfg.censoring {
                Censoring::Dependent { shape, .. } => shape,
                _ => 1.0,
            };
            let censor_dist = Weibull::new(1.0, censor_shape).expect("validated shape");
            (0..len)
                .map(|_| {
                    let x: Vec<f64> = (0..cfg.p).map(|_| rng.gen_range(lo..hi)).collect();
                    let y = cfg.model.linear_predictor(&x);
                    let event_time = Weibull::new(y.exp(), cfg.weibull_shape)
                        .map(|d| d.sample(&mut rng))
                        .unwrap_or(f64::INFINITY);
                    let censor_raw = match cfg.censoring {
                        Censoring::Dependent { .. } => censor_dist.sample(&mut rng),
                        _ => rng.gen::<f64>(),
                    };
                    Latent {
                        x,
                        y,
                        event_time,
                        censor_raw,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn censor_time(c: &Censoring, level: f64, l: &Latent) -> f64 {
    match *c {
        Censoring::None => f64::INFINITY,
        Censoring::Uniform(_) => level * l.censor_raw,
        Censoring::Dependent { slope, .. } => (level + slope * l.y).exp() * l.censor_raw,
    }
}

/// Bisection on the censoring level so the pilot sample's censored
/// fraction matches `target`. Uniform levels are searched on a log scale.
fn calibrate(cfg: &SimConfig, target: f64) -> f64 {
    let pilot = draw_latent(cfg, cfg.seed, Stream::Pilot, PILOT_SIZE);
    let uniform = matches!(cfg.censoring, Censoring::Uniform(_));
    let to_level = |u: f64| if uniform { u.exp() } else { u };
    let fraction = |u: f64| {
        let level = to_level(u);
        let censored = pilot
            .iter()
            .filter(|l| l.event_time > censor_time(&cfg.censoring, level, l))
            .count();
        censored as f64 / pilot.len() as f64
    };
    // fraction decreases in the level
    let (mut lo, mut hi) = (-60.0, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fraction(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    to_level(0.5 * (lo + hi))
}

/// Generate a dataset. Identical configs give identical output.
pub fn simulate(cfg: &SimConfig) -> Result<SimulatedData> {
    cfg.validate()?;
    let level = match cfg.censoring {
        Censoring::None => None,
        Censoring::Uniform(l) | Censoring::Dependent { level: l, .. } => Some(match l {
            CensoringLevel::Fixed(v) => v,
            CensoringLevel::TargetFraction(f) => {
                let v = calibrate(cfg, f);
                log::info!("calibrated censoring level {v} for target fraction {f}");
                v
            }
        }),
    };
    let latent = draw_latent(cfg, cfg.seed, Stream::Simulation, cfg.n);
    let mut records = Vec::with_capacity(cfg.n);
    let mut true_times = Vec::with_capacity(cfg.n);
    let mut subspace_ids = Vec::with_capacity(cfg.n);
    for l in latent {
        let c = censor_time(&cfg.censoring, level.unwrap_or(0.0), &l);
        let event = l.event_time <= c;
        let time = if event { l.event_time } else { c };
        subspace_ids.push(cfg.model.subspace(&l.x));
        true_times.push(l.event_time);
        records.push(SurvivalRecord::new(time, event, l.x));
    }
    let names = (1..=cfg.p).map(|j| format!("x{j}")).collect();
    Ok(SimulatedData {
        dataset: Dataset::new(records, names)?,
        true_times,
        subspace_ids,
        censoring_level: level,
    })
}
