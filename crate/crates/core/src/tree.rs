//! Survival trees grown by log-rank splitting.
//!
//! Every terminal node must keep at least `d0` distinct death times. Split
//! search is exhaustive over midpoints between consecutive distinct values
//! of each candidate feature; the log-rank statistic of every candidate is
//! updated incrementally as records move from the right child to the left,
//! so one feature costs `O(m log m)` at a node of `m` records.

use std::fmt::Write as _;

use rand::seq::index;

use crate::dataset::{Dataset, SurvivalRecord};
use crate::error::{Error, Result};
use crate::estimators::{nelson_aalen_pairs, ChfCurve};
use crate::seed::rng_from_seed;

/// Growth parameters for one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    /// Minimum number of distinct death times in every terminal node.
    pub d0: usize,
    /// Candidate features drawn at each split.
    pub mtry: usize,
    pub seed: u64,
}

impl TreeConfig {
    /// `d0 = 3`, `mtry = ceil(sqrt(p))`.
    pub fn default_for(n_features: usize) -> Self {
        TreeConfig {
            d0: 3,
            mtry: (n_features as f64).sqrt().ceil().max(1.0) as usize,
            seed: 0,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.d0 == 0 {
            return Err(Error::Config("d0 must be at least 1".into()));
        }
        if self.mtry == 0 || self.mtry > n_features {
            return Err(Error::Config(format!(
                "mtry {} must lie in 1..={n_features}",
                self.mtry
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub split: Option<Split>,
    /// `(left, right)` child indices.
    pub children: Option<(usize, usize)>,
    /// Sorted training indices, with bootstrap multiplicity. Terminal only.
    pub members: Vec<usize>,
    pub chf: Option<ChfCurve>,
    /// Number of sample records that reached this node.
    pub n_records: usize,
    pub depth: usize,
}

impl TreeNode {
    pub fn is_terminal(&self) -> bool {
        self.split.is_none()
    }

    /// Distinct training indices of a terminal node.
    pub fn unique_members(&self) -> impl Iterator<Item = usize> + '_ {
        let m = &self.members;
        m.iter()
            .enumerate()
            .filter(move |(k, &i)| *k == 0 || m[k - 1] != i)
            .map(|(_, &i)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTree {
    nodes: Vec<TreeNode>,
    root: usize,
    n_features: usize,
}

impl SurvivalTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, i: usize) -> &TreeNode {
        &self.nodes[i]
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn terminal_nodes(&self) -> impl Iterator<Item = (usize, &TreeNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_terminal())
    }

    /// Index of the terminal node reached by `covariates`; ties at a
    /// threshold go left.
    pub fn route(&self, covariates: &[f64]) -> Result<usize> {
        if covariates.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: covariates.len(),
            });
        }
        Ok(self.route_unchecked(covariates))
    }

    pub(crate) fn route_unchecked(&self, x: &[f64]) -> usize {
        let mut at = self.root;
        loop {
            let node = &self.nodes[at];
            match (node.split, node.children) {
                (Some(s), Some((l, r))) => at = if x[s.feature] <= s.threshold { l } else { r },
                _ => return at,
            }
        }
    }

    /// Terminal-node CHF for `covariates`.
    pub fn leaf_chf(&self, covariates: &[f64]) -> Result<&ChfCurve> {
        let leaf = self.route(covariates)?;
        Ok(self.nodes[leaf].chf.as_ref().expect("terminal node carries a CHF"))
    }

    /// Indented text dump, one node per line.
    pub fn dump(&self, data: &Dataset) -> String {
        let mut out = String::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            let pad = "  ".repeat(n.depth);
            match (n.split, n.children) {
                (Some(s), Some((l, r))) => {
                    let name = data
                        .feature_names()
                        .get(s.feature)
                        .cloned()
                        .unwrap_or_else(|| format!("x{}", s.feature));
                    let _ = writeln!(out, "{pad}node {i}: {name} <= {} (n={})", s.threshold, n.n_records);
                    stack.push(r);
                    stack.push(l);
                }
                _ => {
                    let deaths = n.members.iter().filter(|&&m| data.record(m).event).count();
                    let unique = n.chf.as_ref().map_or(0, |c| c.times().len());
                    let _ = writeln!(
                        out,
                        "{pad}node {i}: leaf (n={}, deaths={deaths}, unique_death_times={unique})",
                        n.n_records
                    );
                }
            }
        }
        out
    }
}

/// Column-major copy of a training set used during growth.
#[derive(Debug, Clone)]
pub(crate) struct TrainingView {
    pub columns: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    pub events: Vec<bool>,
}

impl TrainingView {
    pub fn new(data: &Dataset) -> Self {
        let p = data.n_features();
        let mut columns = vec![Vec::with_capacity(data.len()); p];
        for r in data.records() {
            for (c, &x) in columns.iter_mut().zip(&r.covariates) {
                c.push(x);
            }
        }
        TrainingView {
            columns,
            times: data.records().iter().map(|r| r.time).collect(),
            events: data.records().iter().map(|r| r.event).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn unique_death_times(&self, sample: &[usize]) -> usize {
        let mut t: Vec<f64> = sample
            .iter()
            .filter(|&&i| self.events[i])
            .map(|&i| self.times[i])
            .collect();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t.len()
    }
}

/// Absolute standardized two-sample log-rank statistic with hypergeometric
/// variance. Returns 0 when the variance vanishes.
pub fn logrank_score(left: &[SurvivalRecord], right: &[SurvivalRecord]) -> Result<f64> {
    if left.is_empty() || right.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut all: Vec<(f64, bool, bool)> = left
        .iter()
        .map(|r| (r.time, r.event, true))
        .chain(right.iter().map(|r| (r.time, r.event, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n_total = all.len();
    let mut n_left_at_risk = left.len();
    let (mut num, mut var) = (0.0, 0.0);
    let mut i = 0;
    while i < n_total {
        let t = all[i].0;
        let n = (n_total - i) as f64;
        let n1 = n_left_at_risk as f64;
        let (mut d, mut d1, mut leaving_left) = (0.0, 0.0, 0usize);
        let mut j = i;
        while j < n_total && all[j].0 == t {
            if all[j].1 {
                d += 1.0;
                if all[j].2 {
                    d1 += 1.0;
                }
            }
            if all[j].2 {
                leaving_left += 1;
            }
            j += 1;
        }
        if d > 0.0 {
            num += d1 - n1 * d / n;
            if n > 1.0 {
                var += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
            }
        }
        n_left_at_risk -= leaving_left;
        i = j;
    }
    Ok(if var > 0.0 { num.abs() / var.sqrt() } else { 0.0 })
}

/// Grow one tree on `sample_indices` (indices into `data`, repeats allowed).
pub fn grow_tree(data: &Dataset, sample_indices: &[usize], config: &TreeConfig) -> Result<SurvivalTree> {
    config.validate(data.n_features())?;
    let view = TrainingView::new(data);
    grow_with_view(&view, sample_indices, config)
}

pub(crate) fn grow_with_view(view: &TrainingView, sample: &[usize], config: &TreeConfig) -> Result<SurvivalTree> {
    let p = view.columns.len();
    config.validate(p)?;
    if let Some(&bad) = sample.iter().find(|&&i| i >= view.len()) {
        return Err(Error::InvalidData(format!(
            "sample index {bad} out of range for {} records",
            view.len()
        )));
    }
    let found = view.unique_death_times(sample);
    if found < config.d0 {
        return Err(Error::InsufficientDeaths {
            found,
            required: config.d0,
        });
    }

    let mut rng = rng_from_seed(config.seed);
    let mut nodes: Vec<TreeNode> = Vec::new();
    let mut scratch = SplitScratch::default();
    // (node index, members)
    let mut stack: Vec<(usize, Vec<usize>)> = Vec::new();
    nodes.push(empty_node(sample.len(), 0));
    stack.push((0, sample.to_vec()));

    while let Some((at, mut members)) = stack.pop() {
        let depth = nodes[at].depth;
        let ctx = NodeContext::new(view, &members);
        let mut best: Option<(f64, Split)> = None;
        if ctx.total_deaths >= 2 * config.d0 {
            let mut features: Vec<usize> = index::sample(&mut rng, p, config.mtry).into_vec();
            features.sort_unstable();
            for f in features {
                scan_feature(view, &ctx, &members, f, config.d0, &mut scratch, |threshold, score| {
                    if best.is_none_or(|(b, _)| score > b) {
                        best = Some((score, Split { feature: f, threshold }));
                    }
                });
            }
        }
        match best {
            Some((_, split)) => {
                let col = &view.columns[split.feature];
                let (left, right): (Vec<usize>, Vec<usize>) = members.iter().partition(|&&i| col[i] <= split.threshold);
                let l = nodes.len();
                nodes.push(empty_node(left.len(), depth + 1));
                nodes.push(empty_node(right.len(), depth + 1));
                nodes[at].split = Some(split);
                nodes[at].children = Some((l, l + 1));
                stack.push((l + 1, right));
                stack.push((l, left));
            }
            None => {
                members.sort_unstable();
                let mut pairs: Vec<(f64, bool)> = members.iter().map(|&i| (view.times[i], view.events[i])).collect();
                nodes[at].chf = Some(nelson_aalen_pairs(&mut pairs));
                nodes[at].members = members;
            }
        }
    }
    Ok(SurvivalTree {
        nodes,
        root: 0,
        n_features: p,
    })
}

fn empty_node(n_records: usize, depth: usize) -> TreeNode {
    TreeNode {
        split: None,
        children: None,
        members: Vec::new(),
        chf: None,
        n_records,
        depth,
    }
}

/// Per-node event summaries on a compressed time axis.
struct NodeContext {
    /// Local time rank of each member, aligned with the members slice.
    rank: Vec<usize>,
    /// Deaths per time rank.
    deaths: Vec<usize>,
    /// Cumulative `sum d_j / n_j` up to and including each rank.
    hazard: Vec<f64>,
    /// Cumulative `sum c_j / n_j` where `c_j = d_j (n_j - d_j) / (n_j - 1)`.
    lin: Vec<f64>,
    /// Cumulative `sum c_j / n_j^2`.
    quad: Vec<f64>,
    unique_deaths: usize,
    total_deaths: usize,
}

impl NodeContext {
    fn new(view: &TrainingView, members: &[usize]) -> Self {
        let mut utimes: Vec<f64> = members.iter().map(|&i| view.times[i]).collect();
        utimes.sort_by(f64::total_cmp);
        utimes.dedup();
        let k = utimes.len();
        let mut count = vec![0usize; k];
        let mut deaths = vec![0usize; k];
        let rank: Vec<usize> = members
            .iter()
            .map(|&i| {
                let r = utimes.partition_point(|&t| t < view.times[i]);
                count[r] += 1;
                if view.events[i] {
                    deaths[r] += 1;
                }
                r
            })
            .collect();
        let mut hazard = vec![0.0; k];
        let mut lin = vec![0.0; k];
        let mut quad = vec![0.0; k];
        let mut at_risk = members.len();
        let (mut h, mut a, mut b) = (0.0, 0.0, 0.0);
        let mut unique_deaths = 0;
        for r in 0..k {
            let d = deaths[r];
            if d > 0 {
                unique_deaths += 1;
                let n = at_risk as f64;
                let df = d as f64;
                h += df / n;
                if at_risk > 1 {
                    let c = df * (n - df) / (n - 1.0);
                    a += c / n;
                    b += c / (n * n);
                }
            }
            hazard[r] = h;
            lin[r] = a;
            quad[r] = b;
            at_risk -= count[r];
        }
        NodeContext {
            rank,
            total_deaths: deaths.iter().sum(),
            deaths,
            hazard,
            lin,
            quad,
            unique_deaths,
        }
    }
}

#[derive(Default)]
struct SplitScratch {
    order: Vec<usize>,
    left_deaths: Vec<usize>,
    fen_count: Vec<f64>,
    fen_quad: Vec<f64>,
}

fn fen_add(tree: &mut [f64], pos: usize, v: f64) {
    let mut i = pos + 1;
    while i <= tree.len() {
        tree[i - 1] += v;
        i += i & i.wrapping_neg();
    }
}

/// Sum over positions `< pos`.
fn fen_prefix(tree: &[f64], pos: usize) -> f64 {
    let mut i = pos;
    let mut s = 0.0;
    while i > 0 {
        s += tree[i - 1];
        i -= i & i.wrapping_neg();
    }
    s
}

/// Visit every admissible split of feature `f` in ascending threshold order
/// with its log-rank score.
///
/// With `L` the left child, the log-rank numerator is
/// `sum_{i in L} (delta_i - H(T_i))` and the variance is
/// `sum_{i in L} A(T_i) - sum_{i,k in L} B(min(T_i, T_k))`, where `H`, `A`,
/// `B` are the cumulative sums held in [`NodeContext`].
fn scan_feature(
    view: &TrainingView,
    ctx: &NodeContext,
    members: &[usize],
    f: usize,
    d0: usize,
    scratch: &mut SplitScratch,
    mut visit: impl FnMut(f64, f64),
) {
    let col = &view.columns[f];
    let m = members.len();
    let order = &mut scratch.order;
    order.clear();
    order.extend(0..m);
    order.sort_by(|&a, &b| col[members[a]].total_cmp(&col[members[b]]));
    if col[members[order[0]]] == col[members[order[m - 1]]] {
        return;
    }
    let k = ctx.deaths.len();
    scratch.left_deaths.clear();
    scratch.left_deaths.resize(k, 0);
    scratch.fen_count.clear();
    scratch.fen_count.resize(k, 0.0);
    scratch.fen_quad.clear();
    scratch.fen_quad.resize(k, 0.0);

    let mut left_unique = 0usize;
    let mut right_unique = ctx.unique_deaths;
    let (mut obs, mut expct, mut lin, mut quad) = (0.0, 0.0, 0.0, 0.0);
    let mut n_left = 0.0;

    for pos in 0..m - 1 {
        let local = order[pos];
        let i = members[local];
        let r = ctx.rank[local];
        if view.events[i] {
            obs += 1.0;
            let ld = &mut scratch.left_deaths[r];
            if *ld == 0 {
                left_unique += 1;
            }
            *ld += 1;
            if *ld == ctx.deaths[r] {
                right_unique -= 1;
            }
        }
        expct += ctx.hazard[r];
        lin += ctx.lin[r];
        let b = ctx.quad[r];
        let count_below = fen_prefix(&scratch.fen_count, r);
        let count_at_or_above = n_left - count_below;
        let quad_below = fen_prefix(&scratch.fen_quad, r);
        quad += b + 2.0 * (b * count_at_or_above + quad_below);
        fen_add(&mut scratch.fen_count, r, 1.0);
        fen_add(&mut scratch.fen_quad, r, b);
        n_left += 1.0;

        let x = col[i];
        let next = col[members[order[pos + 1]]];
        if x < next && left_unique >= d0 && right_unique >= d0 {
            let var = lin - quad;
            let score = if var > 1e-12 * lin {
                (obs - expct).abs() / var.sqrt()
            } else {
                0.0
            };
            let mut threshold = x + (next - x) / 2.0;
            if !(threshold < next) {
                threshold = x;
            }
            visit(threshold, score);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn rec(t: f64, e: bool) -> SurvivalRecord {
        SurvivalRecord::new(t, e, vec![0.0])
    }

    fn dataset(rows: &[(f64, bool, Vec<f64>)]) -> Dataset {
        let p = rows[0].2.len();
        let records = rows
            .iter()
            .map(|(t, e, x)| SurvivalRecord::new(*t, *e, x.clone()))
            .collect();
        Dataset::new(records, (0..p).map(|j| format!("x{j}")).collect()).unwrap()
    }

    #[test]
    fn logrank_identical_groups_is_zero() {
        let g = vec![rec(1.0, true), rec(2.0, false), rec(3.0, true)];
        assert_eq!(logrank_score(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn logrank_two_singletons() {
        let s = logrank_score(&[rec(1.0, true)], &[rec(10.0, true)]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        let s2 = logrank_score(&[rec(10.0, true)], &[rec(1.0, true)]).unwrap();
        assert_eq!(s, s2);
    }

    #[test]
    fn logrank_two_by_two_toy() {
        // one event time: n=4, d=1, n1=2 -> num = 1 - 0.5, var = 1*0.5*0.5*3/3
        let l = vec![rec(1.0, true), rec(5.0, false)];
        let r = vec![rec(5.0, false), rec(5.0, false)];
        let s = logrank_score(&l, &r).unwrap();
        assert!((s - 0.5 / 0.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn logrank_empty_group_errors() {
        assert!(logrank_score(&[], &[rec(1.0, true)]).is_err());
    }

    #[test]
    fn single_node_when_d0_equals_unique_deaths() {
        let d = dataset(&[
            (1.0, true, vec![0.0]),
            (2.0, true, vec![1.0]),
            (3.0, true, vec![2.0]),
            (4.0, false, vec![3.0]),
        ]);
        let cfg = TreeConfig {
            d0: 3,
            mtry: 1,
            seed: 1,
        };
        let t = grow_tree(&d, &[0, 1, 2, 3], &cfg).unwrap();
        assert_eq!(t.nodes().len(), 1);
        let na = crate::estimators::nelson_aalen(d.records()).unwrap();
        assert_eq!(t.node(0).chf.as_ref().unwrap(), &na);
    }

    #[test]
    fn insufficient_deaths_errors() {
        let d = dataset(&[(1.0, true, vec![0.0]), (2.0, false, vec![1.0])]);
        let cfg = TreeConfig {
            d0: 2,
            mtry: 1,
            seed: 1,
        };
        assert!(matches!(
            grow_tree(&d, &[0, 1], &cfg),
            Err(Error::InsufficientDeaths { found: 1, required: 2 })
        ));
    }

    #[test]
    fn route_boundary_goes_left() {
        let d = dataset(&[
            (1.0, true, vec![1.0]),
            (2.0, true, vec![1.5]),
            (10.0, true, vec![2.5]),
            (11.0, true, vec![3.0]),
        ]);
        let cfg = TreeConfig {
            d0: 2,
            mtry: 1,
            seed: 0,
        };
        let t = grow_tree(&d, &[0, 1, 2, 3], &cfg).unwrap();
        let s = t.node(t.root()).split.unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.threshold, 2.0);
        let (l, r) = t.node(t.root()).children.unwrap();
        assert_eq!(t.route(&[1.9]).unwrap(), l);
        assert_eq!(t.route(&[2.0]).unwrap(), l);
        assert_eq!(t.route(&[2.1]).unwrap(), r);
        assert!(t.route(&[1.0, 2.0]).is_err());
        assert!(t.dump(&d).contains("x0 <= 2"));
    }

    fn random_data(seed: u64, n: usize, p: usize) -> Dataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<(f64, bool, Vec<f64>)> = (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..p).map(|_| rng.gen_range(0..6) as f64).collect();
                let t = (rng.gen_range(1..9) as f64) + if x[0] > 2.0 { 5.0 } else { 0.0 };
                (t, rng.gen_bool(0.7), x)
            })
            .collect();
        dataset(&rows)
    }

    #[test]
    fn incremental_scores_match_direct() {
        for seed in 0..60 {
            let d = random_data(seed, 14, 2);
            let view = TrainingView::new(&d);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed + 1000);
            let members: Vec<usize> = (0..14).map(|_| rng.gen_range(0..14)).collect();
            let ctx = NodeContext::new(&view, &members);
            let mut scratch = SplitScratch::default();
            for f in 0..2 {
                let mut seen = Vec::new();
                scan_feature(&view, &ctx, &members, f, 1, &mut scratch, |thr, score| {
                    seen.push((thr, score))
                });
                for (thr, score) in seen {
                    let (l, r): (Vec<SurvivalRecord>, Vec<SurvivalRecord>) = members
                        .iter()
                        .map(|&i| d.record(i).clone())
                        .partition(|rec| rec.covariates[f] <= thr);
                    let direct = logrank_score(&l, &r).unwrap();
                    assert!((direct - score).abs() < 1e-9, "seed {seed} f {f}: {direct} vs {score}");
                }
            }
        }
    }

    #[test]
    fn deterministic_growth() {
        let d = random_data(5, 60, 3);
        let s: Vec<usize> = (0..60).collect();
        let cfg = TreeConfig {
            d0: 2,
            mtry: 2,
            seed: 9,
        };
        assert_eq!(grow_tree(&d, &s, &cfg).unwrap(), grow_tree(&d, &s, &cfg).unwrap());
    }

    #[test]
    fn finds_step_in_single_covariate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<(f64, bool, Vec<f64>)> = (0..200)
            .map(|_| {
                let x: f64 = rng.gen_range(0.0..10.0);
                let base = if x <= 4.0 { 1.0 } else { 20.0 };
                (base + rng.gen_range(0.0..1.0), true, vec![x])
            })
            .collect();
        let d = dataset(&rows);
        let s: Vec<usize> = (0..200).collect();
        let t = grow_tree(
            &d,
            &s,
            &TreeConfig {
                d0: 1,
                mtry: 1,
                seed: 0,
            },
        )
        .unwrap();
        let thr = t.node(t.root()).split.unwrap().threshold;
        assert!((thr - 4.0).abs() < 0.2, "root threshold {thr}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn leaves_partition_sample_and_keep_d0(seed in 0u64..1000, d0 in 1usize..4) {
            let d = random_data(seed, 40, 3);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let sample: Vec<usize> = (0..40).map(|_| rng.gen_range(0..40)).collect();
            let cfg = TreeConfig { d0, mtry: 2, seed };
            let view = TrainingView::new(&d);
            match grow_tree(&d, &sample, &cfg) {
                Err(Error::InsufficientDeaths { .. }) => prop_assert!(view.unique_death_times(&sample) < d0),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
                Ok(t) => {
                    let mut all: Vec<usize> = Vec::new();
                    for (id, leaf) in t.terminal_nodes() {
                        prop_assert!(!leaf.members.is_empty());
                        prop_assert!(view.unique_death_times(&leaf.members) >= d0);
                        all.extend(&leaf.members);
                        for &m in &leaf.members {
                            let x = &d.record(m).covariates;
                            // members with this covariate pattern all route here
                            prop_assert_eq!(t.route(x).unwrap(), id);
                        }
                    }
                    let mut s = sample.clone();
                    s.sort_unstable();
                    all.sort_unstable();
                    prop_assert_eq!(all, s);
                    for n in t.nodes() {
                        prop_assert_eq!(n.split.is_some(), n.children.is_some());
                    }
                }
            }
        }
    }
}
