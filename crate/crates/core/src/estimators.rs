//! Kaplan–Meier and Nelson–Aalen estimators and the step functions they
//! produce.

use std::io::Write;
use std::path::Path;

use crate::dataset::SurvivalRecord;
use crate::error::{Error, Result};

/// Right-continuous piecewise-constant function on `[0, inf)`.
///
/// `eval(t)` returns the value at the largest jump point `<= t`, or the
/// baseline before the first jump. Past the last jump the last value holds.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    times: Vec<f64>,
    values: Vec<f64>,
    baseline: f64,
}

/// A step function holding a cumulative hazard: baseline 0, nonnegative and
/// non-decreasing.
pub type ChfCurve = StepFunction;

impl StepFunction {
    pub fn new(times: Vec<f64>, values: Vec<f64>, baseline: f64) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidData(
                "step function jump times must be strictly increasing".into(),
            ));
        }
        if times.first().is_some_and(|&t| !(t >= 0.0)) {
            return Err(Error::InvalidData("negative jump time".into()));
        }
        Ok(StepFunction {
            times,
            values,
            baseline,
        })
    }

    pub fn constant(value: f64) -> Self {
        StepFunction {
            times: Vec::new(),
            values: Vec::new(),
            baseline: value,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            self.baseline
        } else {
            self.values[k - 1]
        }
    }

    /// Value just before `t`.
    pub fn left_limit(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x < t);
        if k == 0 {
            self.baseline
        } else {
            self.values[k - 1]
        }
    }

    pub fn is_non_decreasing(&self) -> bool {
        let mut prev = self.baseline;
        self.values.iter().all(|&v| {
            let ok = v >= prev;
            prev = v;
            ok
        })
    }

    /// Pointwise arithmetic mean over the union of jump times. Exact up to
    /// floating-point summation in curve order.
    pub fn pointwise_mean(curves: &[&StepFunction]) -> Result<StepFunction> {
        if curves.is_empty() {
            return Err(Error::EmptyInput);
        }
        let b = curves.len() as f64;
        let mut grid: Vec<f64> = curves.iter().flat_map(|c| c.times.iter().copied()).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let mut cursors = vec![0usize; curves.len()];
        let mut values = Vec::with_capacity(grid.len());
        for &t in &grid {
            let mut sum = 0.0;
            for (c, k) in curves.iter().zip(cursors.iter_mut()) {
                while *k < c.times.len() && c.times[*k] <= t {
                    *k += 1;
                }
                sum += if *k == 0 { c.baseline } else { c.values[*k - 1] };
            }
            values.push(sum / b);
        }
        let baseline = curves.iter().map(|c| c.baseline).sum::<f64>() / b;
        Ok(StepFunction {
            times: grid,
            values,
            baseline,
        })
    }

    /// Two-column `time,value` CSV; the baseline is written at time 0 when
    /// no jump occurs there.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = String::from("time,value\n");
        if self.times.first().is_none_or(|&t| t > 0.0) {
            out.push_str(&format!("0,{}\n", self.baseline));
        }
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{v}\n"));
        }
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

/// Distinct event time with its death count and risk-set size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct EventTime {
    pub time: f64,
    pub deaths: usize,
    pub at_risk: usize,
}

/// Event table over `(time, event)` pairs. Deaths at a time are pooled;
/// records censored at that time stay in its risk set.
pub(crate) fn event_table(pairs: &mut [(f64, bool)]) -> Vec<EventTime> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        let t = pairs[i].0;
        let mut j = i;
        let mut deaths = 0;
        while j < n && pairs[j].0 == t {
            deaths += usize::from(pairs[j].1);
            j += 1;
        }
        if deaths > 0 {
            out.push(EventTime {
                time: t,
                deaths,
                at_risk: n - i,
            });
        }
        i = j;
    }
    out
}

fn pairs_of(records: &[SurvivalRecord]) -> Result<Vec<(f64, bool)>> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(records.iter().map(|r| (r.time, r.event)).collect())
}

pub(crate) fn kaplan_meier_pairs(pairs: &mut [(f64, bool)]) -> StepFunction {
    let table = event_table(pairs);
    let mut s = 1.0;
    let mut times = Vec::with_capacity(table.len());
    let mut values = Vec::with_capacity(table.len());
    for e in table {
        s *= 1.0 - e.deaths as f64 / e.at_risk as f64;
        times.push(e.time);
        values.push(s);
    }
    StepFunction {
        times,
        values,
        baseline: 1.0,
    }
}

pub(crate) fn nelson_aalen_pairs(pairs: &mut [(f64, bool)]) -> ChfCurve {
    let table = event_table(pairs);
    let mut h = 0.0;
    let mut times = Vec::with_capacity(table.len());
    let mut values = Vec::with_capacity(table.len());
    for e in table {
        h += e.deaths as f64 / e.at_risk as f64;
        times.push(e.time);
        values.push(h);
    }
    StepFunction {
        times,
        values,
        baseline: 0.0,
    }
}

/// Product-limit survival curve.
pub fn kaplan_meier(records: &[SurvivalRecord]) -> Result<StepFunction> {
    Ok(kaplan_meier_pairs(&mut pairs_of(records)?))
}

/// Cumulative hazard `H(t) = sum over event times t_j <= t of d_j / n_j`.
pub fn nelson_aalen(records: &[SurvivalRecord]) -> Result<ChfCurve> {
    Ok(nelson_aalen_pairs(&mut pairs_of(records)?))
}

/// `S(t) = exp(-H(t))`.
pub fn survival_from_chf(chf: &ChfCurve) -> StepFunction {
    StepFunction {
        times: chf.times.clone(),
        values: chf.values.iter().map(|h| (-h).exp()).collect(),
        baseline: (-chf.baseline).exp(),
    }
}
