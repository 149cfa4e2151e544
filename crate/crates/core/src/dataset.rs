//! Right-censored survival data and CSV ingestion.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, Stream};

/// One subject: observed time, event indicator and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalRecord {
    /// Observed time, the minimum of event and censoring time.
    pub time: f64,
    /// `true` when the observed time is the event time.
    pub event: bool,
    pub covariates: Vec<f64>,
}

impl SurvivalRecord {
    pub fn new(time: f64, event: bool, covariates: Vec<f64>) -> Self {
        SurvivalRecord {
            time,
            event,
            covariates,
        }
    }
}

/// An immutable collection of records sharing one covariate dimension.
///
/// Construction checks shape and time validity. The at-least-one-event
/// requirement is enforced where trees are fitted (see
/// [`Dataset::require_event`]) so that held-out parts without events can
/// still be represented and evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<SurvivalRecord>,
    feature_names: Vec<String>,
    ids: Vec<String>,
}

impl Dataset {
    /// Build a dataset with row-index ids.
    pub fn new(records: Vec<SurvivalRecord>, feature_names: Vec<String>) -> Result<Self> {
        let ids = (0..records.len()).map(|i| i.to_string()).collect();
        Self::with_ids(records, feature_names, ids)
    }

    pub fn with_ids(records: Vec<SurvivalRecord>, feature_names: Vec<String>, ids: Vec<String>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        if feature_names.is_empty() {
            return Err(Error::Schema("zero covariate columns".into()));
        }
        if ids.len() != records.len() {
            return Err(Error::DimensionMismatch {
                expected: records.len(),
                got: ids.len(),
            });
        }
        let p = feature_names.len();
        for (i, r) in records.iter().enumerate() {
            if r.covariates.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: r.covariates.len(),
                });
            }
            if !r.time.is_finite() || r.time < 0.0 {
                return Err(Error::InvalidData(format!(
                    "record {i}: time {} is not a finite nonnegative number",
                    r.time
                )));
            }
            if r.covariates.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidData(format!("record {i}: non-finite covariate")));
            }
        }
        if let Some(i) = records.iter().position(|r| r.time == 0.0) {
            log::warn!("record {i} has observed time 0");
        }
        Ok(Dataset {
            records,
            feature_names,
            ids,
        })
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &SurvivalRecord {
        &self.records[i]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    pub fn require_event(&self) -> Result<()> {
        if self.n_events() == 0 {
            return Err(Error::InvalidData("dataset has no observed events".into()));
        }
        Ok(())
    }

    /// Copy of the rows at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let records = indices.iter().map(|&i| self.records[i].clone()).collect();
        let ids = indices.iter().map(|&i| self.ids[i].clone()).collect();
        Dataset::with_ids(records, self.feature_names.clone(), ids)
    }

    /// Same records with every event indicator flipped.
    pub fn flipped_events(&self) -> Dataset {
        Dataset {
            records: self
                .records
                .iter()
                .map(|r| SurvivalRecord::new(r.time, !r.event, r.covariates.clone()))
                .collect(),
            feature_names: self.feature_names.clone(),
            ids: self.ids.clone(),
        }
    }

    /// Write as `id,time,event,<features>` CSV. Numbers use the shortest
    /// representation that parses back to the same bits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["id".to_string(), "time".into(), "event".into()];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        for (id, r) in self.ids.iter().zip(&self.records) {
            let mut row = vec![id.clone(), r.time.to_string(), u8::from(r.event).to_string()];
            row.extend(r.covariates.iter().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

/// One input covariate column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// Level labels for categorical columns. When `None`, levels are
    /// discovered from the data and sorted lexicographically.
    pub categories: Option<Vec<String>>,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Numeric,
            categories: None,
        }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical,
            categories: None,
        }
    }
}

/// Column-role mapping for [`load_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub time_column: String,
    pub event_column: String,
    pub id_column: Option<String>,
    pub features: Vec<FeatureSpec>,
}

impl CsvSchema {
    /// Every column that is not the time, event or id column becomes a
    /// covariate; names listed in `categorical` are one-hot encoded.
    pub fn from_headers(
        headers: &[String],
        time_column: &str,
        event_column: &str,
        id_column: Option<&str>,
        categorical: &[String],
    ) -> Self {
        let features = headers
            .iter()
            .filter(|h| h.as_str() != time_column && h.as_str() != event_column && Some(h.as_str()) != id_column)
            .map(|h| {
                if categorical.contains(h) {
                    FeatureSpec::categorical(h.clone())
                } else {
                    FeatureSpec::numeric(h.clone())
                }
            })
            .collect();
        CsvSchema {
            time_column: time_column.to_string(),
            event_column: event_column.to_string(),
            id_column: id_column.map(str::to_string),
            features,
        }
    }

    /// Schema for a file using the conventional `time`/`event`/`id` names,
    /// reading the header to find the covariates. `id` is used when present.
    pub fn infer(path: impl AsRef<Path>, categorical: &[String]) -> Result<Self> {
        let mut r = csv::Reader::from_path(path.as_ref()).map_err(|e| annotate_open(path.as_ref(), e))?;
        let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let id = headers.iter().any(|h| h == "id").then_some("id");
        Ok(Self::from_headers(&headers, "time", "event", id, categorical))
    }
}

fn annotate_open(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Schema(format!("{}: {other:?}", path.display())),
    }
}

fn column_index(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Schema(format!("column {name:?} not found in header")))
}

/// Load and validate a survival CSV.
///
/// Categorical features are expanded to one indicator column per level,
/// named `<feature>=<level>`. Row order is preserved. Empty cells are
/// rejected.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    if schema.features.is_empty() {
        return Err(Error::Schema("zero covariate columns".into()));
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| annotate_open(path, e))?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let time_col = column_index(&headers, &schema.time_column)?;
    let event_col = column_index(&headers, &schema.event_column)?;
    let id_col = schema
        .id_column
        .as_deref()
        .map(|c| column_index(&headers, c))
        .transpose()?;
    let feature_cols = schema
        .features
        .iter()
        .map(|f| column_index(&headers, &f.name))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for row in reader.records() {
        rows.push(row?);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    // header is line 1
    let line_of = |i: usize| i + 2;
    let cell = |i: usize, row: &csv::StringRecord, col: usize| -> Result<String> {
        let v = row.get(col).unwrap_or("").trim();
        if v.is_empty() {
            return Err(Error::MissingValue {
                line: line_of(i),
                column: headers[col].clone(),
            });
        }
        Ok(v.to_string())
    };

    // resolve categorical levels
    let mut levels: Vec<Option<Vec<String>>> = Vec::with_capacity(schema.features.len());
    for (f, &col) in schema.features.iter().zip(&feature_cols) {
        levels.push(match f.kind {
            FeatureKind::Numeric => None,
            FeatureKind::Categorical => Some(match &f.categories {
                Some(c) => c.clone(),
                None => {
                    let mut seen = BTreeSet::new();
                    for (i, row) in rows.iter().enumerate() {
                        seen.insert(cell(i, row, col)?);
                    }
                    seen.into_iter().collect()
                }
            }),
        });
    }

    let mut feature_names = Vec::new();
    for (f, lv) in schema.features.iter().zip(&levels) {
        match lv {
            None => feature_names.push(f.name.clone()),
            Some(lv) => feature_names.extend(lv.iter().map(|l| format!("{}={l}", f.name))),
        }
    }

    let mut records = Vec::with_capacity(rows.len());
    let mut ids = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let t_raw = cell(i, row, time_col)?;
        let time: f64 = t_raw.parse().map_err(|_| Error::Parse {
            line: line_of(i),
            message: format!("non-numeric time {t_raw:?}"),
        })?;
        if !time.is_finite() || time < 0.0 {
            return Err(Error::Parse {
                line: line_of(i),
                message: format!("time {t_raw:?} must be finite and nonnegative"),
            });
        }
        let e_raw = cell(i, row, event_col)?;
        let event = match e_raw.as_str() {
            "0" => false,
            "1" => true,
            _ => {
                return Err(Error::InvalidEvent {
                    line: line_of(i),
                    value: e_raw,
                })
            }
        };
        let mut covariates = Vec::with_capacity(feature_names.len());
        for ((f, &col), lv) in schema.features.iter().zip(&feature_cols).zip(&levels) {
            let v = cell(i, row, col)?;
            match lv {
                None => covariates.push(v.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_of(i),
                    message: format!("non-numeric value {v:?} in column {:?}", f.name),
                })?),
                Some(lv) => {
                    if !lv.contains(&v) {
                        return Err(Error::Parse {
                            line: line_of(i),
                            message: format!("unknown level {v:?} for column {:?}", f.name),
                        });
                    }
                    covariates.extend(lv.iter().map(|l| if *l == v { 1.0 } else { 0.0 }));
                }
            }
        }
        ids.push(match id_col {
            Some(c) => cell(i, row, c)?,
            None => i.to_string(),
        });
        records.push(SurvivalRecord::new(time, event, covariates));
    }
    Dataset::with_ids(records, feature_names, ids)
}

/// Deterministic train/test partition.
///
/// The training part receives `round(fraction * n)` records; both parts
/// keep the original relative row order.
pub fn split_train_test(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("split fraction {fraction} must lie in (0, 1)")));
    }
    let n = data.len();
    let n_train = (fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::InvalidData(format!(
            "split fraction {fraction} on {n} records leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_from_seed(derive_seed(seed, Stream::Split, 0));
    order.shuffle(&mut rng);
    let mut train_idx = order[..n_train].to_vec();
    let mut test_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let train = data.subset(&train_idx)?;
    if train.n_events() == 0 {
        return Err(Error::InvalidData("training part has zero events".into()));
    }
    let test = data.subset(&test_idx)?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn toy(n: usize) -> Dataset {
        let records = (0..n)
            .map(|i| SurvivalRecord::new(i as f64 + 1.0, i % 2 == 0, vec![i as f64]))
            .collect();
        Dataset::new(records, vec!["x".into()]).unwrap()
    }

    #[test]
    fn loads_three_rows() {
        let f = write_tmp("time,event,x\n5,1,0.5\n3,0,1.5\n8,1,2.5\n");
        let schema = CsvSchema::infer(f.path(), &[]).unwrap();
        let d = load_csv(f.path(), &schema).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.n_features(), 1);
        let times: Vec<f64> = d.records().iter().map(|r| r.time).collect();
        assert_eq!(times, vec![5.0, 3.0, 8.0]);
        let events: Vec<bool> = d.records().iter().map(|r| r.event).collect();
        assert_eq!(events, vec![true, false, true]);
        assert_eq!(d.ids(), &["0", "1", "2"]);
    }

    #[test]
    fn rejects_event_two() {
        let f = write_tmp("time,event,x\n5,2,0.5\n");
        let schema = CsvSchema::infer(f.path(), &[]).unwrap();
        let err = load_csv(f.path(), &schema).unwrap_err();
        assert!(err.to_string().contains("invalid event indicator"), "{err}");
    }

    #[test]
    fn one_hot_expands_categorical() {
        let f = write_tmp("time,event,g,x\n1,1,B,0\n2,0,A,1\n3,1,C,2\n4,1,A,3\n");
        let schema = CsvSchema::infer(f.path(), &["g".to_string()]).unwrap();
        let d = load_csv(f.path(), &schema).unwrap();
        assert_eq!(d.feature_names(), &["g=A", "g=B", "g=C", "x"]);
        for r in d.records() {
            let hot: f64 = r.covariates[..3].iter().sum();
            assert_eq!(hot, 1.0);
        }
        assert_eq!(d.record(0).covariates, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_missing_and_bad_cells() {
        let f = write_tmp("time,event,x\n5,1,\n");
        let schema = CsvSchema::infer(f.path(), &[]).unwrap();
        assert!(matches!(load_csv(f.path(), &schema), Err(Error::MissingValue { .. })));

        let f = write_tmp("time,event,x\nabc,1,2\n");
        assert!(matches!(load_csv(f.path(), &schema), Err(Error::Parse { .. })));

        let f = write_tmp("time,event\n1,1\n");
        let schema = CsvSchema::infer(f.path(), &[]).unwrap();
        assert!(matches!(load_csv(f.path(), &schema), Err(Error::Schema(_))));

        let schema = CsvSchema::from_headers(&["time".into(), "event".into(), "x".into()], "time", "event", None, &[]);
        assert!(matches!(
            load_csv("/nonexistent/file.csv", &schema),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn zero_time_is_allowed() {
        let d = Dataset::new(vec![SurvivalRecord::new(0.0, true, vec![1.0])], vec!["x".into()]);
        assert!(d.is_ok());
    }

    #[test]
    fn split_counts_and_disjointness() {
        let d = toy(10);
        let (tr, te) = split_train_test(&d, 0.7, 1).unwrap();
        assert_eq!(tr.len(), 7);
        assert_eq!(te.len(), 3);
        let mut all: Vec<&String> = tr.ids().iter().chain(te.ids()).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 10);

        let (tr2, te2) = split_train_test(&d, 0.7, 1).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
    }

    #[test]
    fn split_rejects_empty_part() {
        let d = toy(2);
        assert!(split_train_test(&d, 0.999, 1).is_err());
    }

    #[test]
    fn split_rejects_training_without_events() {
        let records = vec![
            SurvivalRecord::new(1.0, false, vec![0.0]),
            SurvivalRecord::new(2.0, false, vec![1.0]),
        ];
        let d = Dataset::new(records, vec!["x".into()]).unwrap();
        assert!(split_train_test(&d, 0.5, 3).is_err());
    }
}
