//! Cumulative/dynamic time-varying AUC.
//!
//! At time `t`, cases are records with an event at or before `t` and
//! controls are records still under observation after `t`; records
//! censored at or before `t` are left out. A record's risk score at `t` is
//! its predicted cumulative hazard `H(t)`. Tied scores count one half.

use std::io::Write;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimators::ChfCurve;

#[derive(Debug, Clone, PartialEq)]
pub struct AucCurve {
    pub grid: Vec<f64>,
    /// `None` where there are no cases or no controls.
    pub auc: Vec<Option<f64>>,
    pub n_cases: Vec<usize>,
    pub n_controls: Vec<usize>,
}

impl AucCurve {
    pub fn defined(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.iter().zip(&self.auc).filter_map(|(&t, a)| a.map(|a| (t, a)))
    }

    pub fn n_defined(&self) -> usize {
        self.auc.iter().flatten().count()
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.n_defined();
        (n > 0).then(|| self.auc.iter().flatten().sum::<f64>() / n as f64)
    }

    /// `t,auc,n_cases,n_controls`; undefined entries are written as `NA`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("t,auc,n_cases,n_controls\n");
        for k in 0..self.grid.len() {
            let a = self.auc[k].map_or_else(|| "NA".to_string(), |a| a.to_string());
            out.push_str(&format!(
                "{},{a},{},{}\n",
                self.grid[k], self.n_cases[k], self.n_controls[k]
            ));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = csv::Reader::from_path(path.as_ref())?;
        let mut c = AucCurve {
            grid: Vec::new(),
            auc: Vec::new(),
            n_cases: Vec::new(),
            n_controls: Vec::new(),
        };
        for (line, row) in r.records().enumerate() {
            let row = row?;
            let bad = |what: &str| Error::Parse {
                line: line + 2,
                message: format!("bad {what}"),
            };
            c.grid
                .push(row.get(0).and_then(|v| v.parse().ok()).ok_or_else(|| bad("t"))?);
            c.auc.push(match row.get(1) {
                Some("NA") => None,
                Some(v) => Some(v.parse().map_err(|_| bad("auc"))?),
                None => return Err(bad("auc")),
            });
            c.n_cases
                .push(row.get(2).and_then(|v| v.parse().ok()).ok_or_else(|| bad("n_cases"))?);
            c.n_controls.push(
                row.get(3)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| bad("n_controls"))?,
            );
        }
        check_grid(&c.grid)?;
        Ok(c)
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Grid("grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Parse `start:stop:step` (stop included when it lies on the step
/// lattice) or a comma-separated list of times.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Grid(format!("bad number {s:?} in {spec:?}")))
    };
    let grid: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Grid(format!("expected start:stop:step, got {spec:?}")));
        }
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || stop < start {
            return Err(Error::Grid(format!("empty or non-advancing range {spec:?}")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..n).map(|k| start + k as f64 * step).collect()
    } else {
        spec.split(',').map(num).collect::<Result<_>>()?
    };
    check_grid(&grid)?;
    Ok(grid)
}

/// AUC of cases against controls, ties counted one half. Computed from
/// integer pair counts.
pub fn pairwise_auc(case_scores: &[f64], control_scores: &[f64]) -> Option<f64> {
    if case_scores.is_empty() || control_scores.is_empty() {
        return None;
    }
    let mut controls = control_scores.to_vec();
    controls.sort_by(f64::total_cmp);
    // twice the Mann-Whitney count
    let mut doubled: u64 = 0;
    for &s in case_scores {
        let below = controls.partition_point(|&c| c < s);
        let at_or_below = controls.partition_point(|&c| c <= s);
        doubled += 2 * below as u64 + (at_or_below - below) as u64;
    }
    let pairs = 2 * case_scores.len() as u64 * control_scores.len() as u64;
    Some(doubled as f64 / pairs as f64)
}

/// Time-varying AUC of predicted CHFs against the observed test outcomes.
pub fn time_varying_auc(test: &Dataset, predictions: &[ChfCurve], grid: &[f64]) -> Result<AucCurve> {
    time_varying_auc_by(test, predictions, grid, |h| h)
}

/// As [`time_varying_auc`] with the risk score `transform(H(t))`.
pub fn time_varying_auc_by(
    test: &Dataset,
    predictions: &[ChfCurve],
    grid: &[f64],
    transform: impl Fn(f64) -> f64,
) -> Result<AucCurve> {
    if predictions.len() != test.len() {
        return Err(Error::DimensionMismatch {
            expected: test.len(),
            got: predictions.len(),
        });
    }
    check_grid(grid)?;
    let mut out = AucCurve {
        grid: grid.to_vec(),
        auc: Vec::with_capacity(grid.len()),
        n_cases: Vec::with_capacity(grid.len()),
        n_controls: Vec::with_capacity(grid.len()),
    };
    let mut cases = Vec::new();
    let mut controls = Vec::new();
    for &t in grid {
        cases.clear();
        controls.clear();
        for (r, h) in test.records().iter().zip(predictions) {
            if r.time <= t {
                if r.event {
                    cases.push(transform(h.eval(t)));
                }
            } else {
                controls.push(transform(h.eval(t)));
            }
        }
        out.auc.push(pairwise_auc(&cases, &controls));
        out.n_cases.push(cases.len());
        out.n_controls.push(controls.len());
    }
    Ok(out)
}

/// Pointwise mean of curves on a shared grid, skipping undefined entries.
/// Case and control counts are summed.
pub fn average_curves(curves: &[AucCurve]) -> Result<AucCurve> {
    let first = curves.first().ok_or(Error::EmptyInput)?;
    if curves.iter().any(|c| c.grid != first.grid) {
        return Err(Error::Grid("curves have different grids".into()));
    }
    let k = first.grid.len();
    let mut out = AucCurve {
        grid: first.grid.clone(),
        auc: Vec::with_capacity(k),
        n_cases: vec![0; k],
        n_controls: vec![0; k],
    };
    for i in 0..k {
        let vals: Vec<f64> = curves.iter().filter_map(|c| c.auc[i]).collect();
        out.auc
            .push((!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64));
        for c in curves {
            out.n_cases[i] += c.n_cases[i];
            out.n_controls[i] += c.n_controls[i];
        }
    }
    Ok(out)
}

/// Per-time comparison of two AUC curves.
#[derive(Debug, Clone, PartialEq)]
pub struct AucComparison {
    pub grid: Vec<f64>,
    pub auc_a: Vec<Option<f64>>,
    pub auc_b: Vec<Option<f64>>,
    /// `a - b` where both are defined.
    pub diff: Vec<Option<f64>>,
    pub n_compared: usize,
    pub n_a_wins: usize,
}

impl AucComparison {
    /// Fraction of compared grid points where `a > b`.
    pub fn win_fraction(&self) -> Option<f64> {
        (self.n_compared > 0).then(|| self.n_a_wins as f64 / self.n_compared as f64)
    }

    pub fn mean_diff(&self) -> Option<f64> {
        (self.n_compared > 0).then(|| self.diff.iter().flatten().sum::<f64>() / self.n_compared as f64)
    }

    /// `t,auc_a,auc_b,diff` with `NA` for undefined entries.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let fmt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        let mut out = String::from("t,auc_a,auc_b,diff\n");
        for k in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.grid[k],
                fmt(self.auc_a[k]),
                fmt(self.auc_b[k]),
                fmt(self.diff[k])
            ));
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }
}

pub fn compare_auc(a: &AucCurve, b: &AucCurve) -> Result<AucComparison> {
    if a.grid != b.grid {
        return Err(Error::Grid("compared curves use different grids".into()));
    }
    let diff: Vec<Option<f64>> = a
        .auc
        .iter()
        .zip(&b.auc)
        .map(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => Some(x - y),
            _ => None,
        })
        .collect();
    let n_compared = diff.iter().flatten().count();
    let n_a_wins = diff.iter().flatten().filter(|&&d| d > 0.0).count();
    Ok(AucComparison {
        grid: a.grid.clone(),
        auc_a: a.auc.clone(),
        auc_b: b.auc.clone(),
        diff,
        n_compared,
        n_a_wins,
    })
}
