//! Right-censored survival datasets: CSV ingestion with one-hot encoding,
//! seeded train/test and D_k/D_l splitting, and the shared evaluation grid.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util;

/// Cell tokens treated as missing values.
const MISSING_TOKENS: &[&str] = &["", "NA", "na", "N/A", "?", "NaN", "nan"];

/// Default number of points on an evaluation grid.
pub const DEFAULT_GRID_RESOLUTION: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRecord {
    pub covariates: Vec<f64>,
    pub time: f64,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    records: Vec<SurvivalRecord>,
    feature_names: Vec<String>,
}

impl SurvivalDataset {
    pub fn new(records: Vec<SurvivalRecord>, feature_names: Vec<String>) -> Result<Self> {
        let ds = Self::new_unchecked(records, feature_names);
        ds.validate()?;
        Ok(ds)
    }

    pub(crate) fn new_unchecked(records: Vec<SurvivalRecord>, feature_names: Vec<String>) -> Self {
        SurvivalDataset {
            records,
            feature_names,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.records.len() < 2 {
            return Err(Error::Validation(format!(
                "a dataset needs at least 2 records, got {}",
                self.records.len()
            )));
        }
        let d = self.feature_names.len();
        for (i, r) in self.records.iter().enumerate() {
            if !(r.time.is_finite() && r.time >= 0.0) {
                return Err(Error::Validation(format!(
                    "record {i}: time must be finite and nonnegative, got {}",
                    r.time
                )));
            }
            if r.covariates.len() != d {
                return Err(Error::Validation(format!(
                    "record {i}: expected {d} covariates, got {}",
                    r.covariates.len()
                )));
            }
        }
        if !self.records.iter().any(|r| r.event) {
            return Err(Error::Validation("dataset contains no events".into()));
        }
        Ok(())
    }

    pub fn records(&self) -> &[SurvivalRecord] {
        &self.records
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn d(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_events(&self) -> usize {
        self.records.iter().filter(|r| r.event).count()
    }

    /// `(time, event)` pairs in record order.
    pub fn outcomes(&self) -> Vec<(f64, bool)> {
        self.records.iter().map(|r| (r.time, r.event)).collect()
    }

    /// Subset by index; the result is not re-validated.
    pub fn select(&self, indices: &[usize]) -> SurvivalDataset {
        SurvivalDataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    pub fn concat(&self, other: &SurvivalDataset) -> SurvivalDataset {
        let mut records = self.records.clone();
        records.extend(other.records.iter().cloned());
        SurvivalDataset {
            records,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Writes covariates plus `time` and `event` (`1`/`0`) columns. Reals are
    /// printed in shortest round-trip form, so re-loading is bit-exact.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("time");
        header.push("event");
        w.write_record(&header)?;
        for r in &self.records {
            let mut row: Vec<String> = r.covariates.iter().map(|v| v.to_string()).collect();
            row.push(r.time.to_string());
            row.push(if r.event { "1".into() } else { "0".into() });
            w.write_record(&row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        util::write_atomic(path, self.to_csv_string()?.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub time_column: String,
    pub event_column: String,
    #[serde(default)]
    pub categorical_columns: Vec<String>,
    pub event_true_values: Vec<String>,
    /// Median (numeric) / mode (categorical) imputation of missing covariates.
    /// Off by default: missing cells are rejected.
    #[serde(default)]
    pub impute_missing: bool,
}

impl DatasetSchema {
    /// Schema matching the layout produced by [`SurvivalDataset::write_csv`].
    pub fn numeric(time_column: &str, event_column: &str) -> Self {
        DatasetSchema {
            time_column: time_column.into(),
            event_column: event_column.into(),
            categorical_columns: Vec::new(),
            event_true_values: vec!["1".into()],
            impute_missing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnEncoding {
    Numeric {
        median: Option<f64>,
    },
    /// One indicator per level, levels in first-appearance order.
    OneHot {
        levels: Vec<String>,
        mode: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedColumn {
    pub name: String,
    pub encoding: ColumnEncoding,
}

/// Column-to-feature mapping learned from a training file. Applying it to
/// query files guarantees the same feature layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    pub columns: Vec<EncodedColumn>,
    pub impute_missing: bool,
}

impl FeatureEncoder {
    pub fn feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for col in &self.columns {
            match &col.encoding {
                ColumnEncoding::Numeric { .. } => names.push(col.name.clone()),
                ColumnEncoding::OneHot { levels, .. } => {
                    names.extend(levels.iter().map(|l| format!("{}={}", col.name, l)))
                }
            }
        }
        names
    }

    pub fn dim(&self) -> usize {
        self.columns
            .iter()
            .map(|c| match &c.encoding {
                ColumnEncoding::Numeric { .. } => 1,
                ColumnEncoding::OneHot { levels, .. } => levels.len(),
            })
            .sum()
    }

    /// Encodes one data row. `row_no` is the 1-based data row for messages.
    fn encode(
        &self,
        header: &HashMap<String, usize>,
        row: &csv::StringRecord,
        row_no: usize,
    ) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim());
        for col in &self.columns {
            let idx = *header
                .get(&col.name)
                .ok_or_else(|| Error::Schema(format!("missing column `{}`", col.name)))?;
            let cell = row.get(idx).unwrap_or("").trim();
            let missing = is_missing(cell);
            if missing && !self.impute_missing {
                return Err(Error::Validation(format!(
                    "missing value at data row {row_no}, column `{}`",
                    col.name
                )));
            }
            match &col.encoding {
                ColumnEncoding::Numeric { median } => {
                    let v = if missing {
                        median.ok_or_else(|| {
                            Error::Validation(format!(
                                "column `{}` has no observed values to impute from",
                                col.name
                            ))
                        })?
                    } else {
                        parse_real(cell, row_no, &col.name)?
                    };
                    out.push(v);
                }
                ColumnEncoding::OneHot { levels, mode } => {
                    let level = if missing {
                        mode.as_deref().ok_or_else(|| {
                            Error::Validation(format!(
                                "column `{}` has no observed values to impute from",
                                col.name
                            ))
                        })?
                    } else {
                        cell
                    };
                    let pos = levels.iter().position(|l| l == level).ok_or_else(|| {
                        Error::Schema(format!(
                            "unknown category `{level}` in column `{}` at data row {row_no}",
                            col.name
                        ))
                    })?;
                    out.extend((0..levels.len()).map(|k| if k == pos { 1.0 } else { 0.0 }));
                }
            }
        }
        Ok(out)
    }
}

fn is_missing(cell: &str) -> bool {
    MISSING_TOKENS.contains(&cell)
}

fn parse_real(cell: &str, row_no: usize, column: &str) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| Error::Parse {
        row: row_no,
        column: column.to_string(),
        value: cell.to_string(),
    })
}

fn header_index(headers: &csv::StringRecord) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if map.insert(h.trim().to_string(), i).is_some() {
            return Err(Error::Schema(format!("duplicate column `{}`", h.trim())));
        }
    }
    Ok(map)
}

type RawRows = (HashMap<String, usize>, Vec<String>, Vec<csv::StringRecord>);

fn read_rows(path: &Path) -> Result<RawRows> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = rdr.headers()?.clone();
    let order = headers.iter().map(|h| h.trim().to_string()).collect();
    let index = header_index(&headers)?;
    let rows = rdr.records().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((index, order, rows))
}

pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<SurvivalDataset> {
    load_csv_with_encoder(path, schema).map(|(ds, _)| ds)
}

/// Loads a dataset and returns the encoder fitted on it.
pub fn load_csv_with_encoder(
    path: &Path,
    schema: &DatasetSchema,
) -> Result<(SurvivalDataset, FeatureEncoder)> {
    let (index, order, rows) = read_rows(path)?;
    parse_table(&index, &order, &rows, schema)
}

fn parse_table(
    index: &HashMap<String, usize>,
    order: &[String],
    rows: &[csv::StringRecord],
    schema: &DatasetSchema,
) -> Result<(SurvivalDataset, FeatureEncoder)> {
    if schema.time_column == schema.event_column {
        return Err(Error::Schema(
            "time_column and event_column must be distinct".into(),
        ));
    }
    for name in [&schema.time_column, &schema.event_column]
        .into_iter()
        .chain(schema.categorical_columns.iter())
    {
        if !index.contains_key(name) {
            return Err(Error::Schema(format!("missing column `{name}`")));
        }
    }
    let time_idx = index[&schema.time_column];
    let event_idx = index[&schema.event_column];

    let mut columns = Vec::new();
    for name in order {
        if *name == schema.time_column || *name == schema.event_column {
            continue;
        }
        let idx = index[name];
        let cells = rows.iter().map(|r| r.get(idx).unwrap_or("").trim());
        let encoding = if schema.categorical_columns.contains(name) {
            let mut levels: Vec<String> = Vec::new();
            let mut counts: Vec<usize> = Vec::new();
            for c in cells.filter(|c| !is_missing(c)) {
                match levels.iter().position(|l| l == c) {
                    Some(p) => counts[p] += 1,
                    None => {
                        levels.push(c.to_string());
                        counts.push(1);
                    }
                }
            }
            // first maximum wins, i.e. first-appearance order on ties
            let mode = counts
                .iter()
                .enumerate()
                .fold(None::<(usize, usize)>, |best, (i, &c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((i, c)),
                })
                .map(|(i, _)| levels[i].clone());
            ColumnEncoding::OneHot { levels, mode }
        } else {
            let median = if schema.impute_missing {
                let mut vals = Vec::new();
                for (r, c) in cells.enumerate() {
                    if !is_missing(c) {
                        vals.push(parse_real(c, r + 1, name)?);
                    }
                }
                median(&mut vals)
            } else {
                None
            };
            ColumnEncoding::Numeric { median }
        };
        columns.push(EncodedColumn {
            name: name.clone(),
            encoding,
        });
    }
    let encoder = FeatureEncoder {
        columns,
        impute_missing: schema.impute_missing,
    };

    let mut records = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let row_no = r + 1;
        let t_cell = row.get(time_idx).unwrap_or("").trim();
        let e_cell = row.get(event_idx).unwrap_or("").trim();
        if is_missing(t_cell) || is_missing(e_cell) {
            return Err(Error::Validation(format!(
                "missing outcome at data row {row_no}"
            )));
        }
        let time = parse_real(t_cell, row_no, &schema.time_column)?;
        let event = schema.event_true_values.iter().any(|v| v == e_cell);
        let covariates = encoder.encode(index, row, row_no)?;
        records.push(SurvivalRecord {
            covariates,
            time,
            event,
        });
    }
    let ds = SurvivalDataset::new(records, encoder.feature_names())?;
    Ok((ds, encoder))
}

fn median(vals: &mut [f64]) -> Option<f64> {
    if vals.is_empty() {
        return None;
    }
    vals.sort_by(f64::total_cmp);
    let m = vals.len() / 2;
    Some(if vals.len() % 2 == 1 {
        vals[m]
    } else {
        0.5 * (vals[m - 1] + vals[m])
    })
}

/// Reads covariate rows from a query file using a previously fitted encoder.
/// Outcome columns, if present, are ignored.
pub fn load_queries(path: &Path, encoder: &FeatureEncoder) -> Result<Vec<Vec<f64>>> {
    let (index, _, rows) = read_rows(path)?;
    for col in &encoder.columns {
        if !index.contains_key(&col.name) {
            return Err(Error::Schema(format!(
                "query file is missing column `{}`",
                col.name
            )));
        }
    }
    rows.iter()
        .enumerate()
        .map(|(r, row)| encoder.encode(&index, row, r + 1))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    /// Share of the training part that forms D_l.
    pub dl_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            dl_fraction: 0.5,
            seed: 0,
        }
    }
}

/// Train/test partition plus the D_k (machine fitting) / D_l (aggregation)
/// subdivision of train.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub train: SurvivalDataset,
    pub test: SurvivalDataset,
    pub d_k: SurvivalDataset,
    pub d_l: SurvivalDataset,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub d_k_idx: Vec<usize>,
    pub d_l_idx: Vec<usize>,
}

/// Size of the first part when `n` items are divided with `fraction` going
/// first; the remainder row always lands on the second part.
pub(crate) fn first_part(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 1e-9).floor() as usize
}

fn check_part(name: &str, ds: &SurvivalDataset) -> Result<()> {
    if ds.n() < 2 {
        return Err(Error::Split(format!("{name} has {} records (< 2)", ds.n())));
    }
    if ds.n_events() == 0 {
        return Err(Error::Split(format!("{name} contains no events")));
    }
    Ok(())
}

/// Halves a training set into (D_k, D_l) by position; D_l takes the remainder.
pub fn subdivide(
    train: &SurvivalDataset,
    dl_fraction: f64,
) -> Result<(SurvivalDataset, SurvivalDataset)> {
    if !(dl_fraction > 0.0 && dl_fraction < 1.0) {
        return Err(Error::Params(format!(
            "dl_fraction must be in (0,1), got {dl_fraction}"
        )));
    }
    let n_k = first_part(train.n(), 1.0 - dl_fraction);
    let idx: Vec<usize> = (0..train.n()).collect();
    let d_k = train.select(&idx[..n_k]);
    let d_l = train.select(&idx[n_k..]);
    check_part("D_k", &d_k)?;
    check_part("D_l", &d_l)?;
    Ok((d_k, d_l))
}

pub fn split(dataset: &SurvivalDataset, spec: &SplitSpec) -> Result<DataSplit> {
    for (name, f) in [
        ("train_fraction", spec.train_fraction),
        ("dl_fraction", spec.dl_fraction),
    ] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Params(format!("{name} must be in (0,1), got {f}")));
        }
    }
    let n = dataset.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut util::rng(spec.seed));

    let n_train = first_part(n, spec.train_fraction);
    let train_idx = order[..n_train].to_vec();
    let test_idx = order[n_train..].to_vec();
    let n_k = first_part(n_train, 1.0 - spec.dl_fraction);
    let d_k_idx = train_idx[..n_k].to_vec();
    let d_l_idx = train_idx[n_k..].to_vec();

    let out = DataSplit {
        train: dataset.select(&train_idx),
        test: dataset.select(&test_idx),
        d_k: dataset.select(&d_k_idx),
        d_l: dataset.select(&d_l_idx),
        train_idx,
        test_idx,
        d_k_idx,
        d_l_idx,
    };
    check_part("train", &out.train)?;
    check_part("test", &out.test)?;
    check_part("D_k", &out.d_k)?;
    check_part("D_l", &out.d_l)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::DegenerateGrid(format!(
                "grid needs at least 2 points, got {}",
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DegenerateGrid(
                "grid times must be finite and strictly increasing".into(),
            ));
        }
        Ok(TimeGrid { times })
    }

    /// `resolution` equally spaced points over the observed event-time range.
    pub fn from_outcomes(outcomes: &[(f64, bool)], resolution: usize) -> Result<Self> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(t, e) in outcomes {
            if e {
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::DegenerateGrid(
                "fewer than 2 distinct event times".into(),
            ));
        }
        Self::linspace(lo, hi, resolution)
    }

    pub fn linspace(start: f64, end: f64, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::DegenerateGrid(format!(
                "resolution must be >= 2, got {resolution}"
            )));
        }
        let step = (end - start) / (resolution - 1) as f64;
        let mut times: Vec<f64> = (0..resolution).map(|i| start + step * i as f64).collect();
        times[resolution - 1] = end;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Index of the last grid point `<= t`, `None` before the grid starts.
    pub fn floor_index(&self, t: f64) -> Option<usize> {
        let k = self.times.partition_point(|&g| g <= t);
        k.checked_sub(1)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.times.iter().map(|t| t * factor).collect())
    }
}

pub fn make_time_grid(dataset: &SurvivalDataset, resolution: usize) -> Result<TimeGrid> {
    TimeGrid::from_outcomes(&dataset.outcomes(), resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn toy_schema() -> DatasetSchema {
        DatasetSchema {
            time_column: "time".into(),
            event_column: "cens".into(),
            categorical_columns: vec!["sex".into()],
            event_true_values: vec!["1".into()],
            impute_missing: false,
        }
    }

    fn synthetic(n: usize) -> SurvivalDataset {
        let records = (0..n)
            .map(|i| SurvivalRecord {
                covariates: vec![i as f64],
                time: 1.0 + i as f64,
                event: i % 3 != 2,
            })
            .collect();
        SurvivalDataset::new(records, vec!["x".into()]).unwrap()
    }

    #[test]
    fn one_hot_adds_one_column_per_level() {
        let f = write_tmp("age,sex,time,cens\n50,M,3,1\n61,F,5,0\n44,M,2,1\n");
        let ds = load_csv(f.path(), &toy_schema()).unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.d(), 3);
        assert_eq!(ds.feature_names(), &["age", "sex=M", "sex=F"]);
        assert_eq!(ds.records()[1].covariates, vec![61.0, 0.0, 1.0]);
        assert!(!ds.records()[1].event);
        for r in ds.records() {
            assert_eq!(r.covariates[1] + r.covariates[2], 1.0);
        }
    }

    #[test]
    fn missing_schema_column_is_schema_error() {
        let f = write_tmp("age,sex,time\n50,M,3\n61,F,5\n");
        assert!(matches!(
            load_csv(f.path(), &toy_schema()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn bad_number_reports_row() {
        let f = write_tmp("age,sex,time,cens\n50,M,3,1\nold,F,5,0\n");
        match load_csv(f.path(), &toy_schema()) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "age");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_value_rejected_unless_imputing() {
        let text = "age,sex,time,cens\n50,M,3,1\n,F,5,0\n70,,4,1\n60,M,6,1\n";
        let f = write_tmp(text);
        assert!(matches!(
            load_csv(f.path(), &toy_schema()),
            Err(Error::Validation(_))
        ));

        let mut schema = toy_schema();
        schema.impute_missing = true;
        let ds = load_csv(f.path(), &schema).unwrap();
        // median of {50, 70, 60}
        assert_eq!(ds.records()[1].covariates[0], 60.0);
        // mode of {M, F, M}
        assert_eq!(&ds.records()[2].covariates[1..], &[1.0, 0.0]);
    }

    #[test]
    fn same_time_and_event_column_rejected() {
        let f = write_tmp("time,x\n1,2\n3,4\n");
        let schema = DatasetSchema::numeric("time", "time");
        assert!(matches!(load_csv(f.path(), &schema), Err(Error::Schema(_))));
    }

    #[test]
    fn queries_reuse_training_levels() {
        let f = write_tmp("age,sex,time,cens\n50,M,3,1\n61,F,5,0\n44,M,2,1\n");
        let (_, enc) = load_csv_with_encoder(f.path(), &toy_schema()).unwrap();
        let q = write_tmp("sex,age\nF,30\nM,31\n");
        let rows = load_queries(q.path(), &enc).unwrap();
        assert_eq!(rows, vec![vec![30.0, 0.0, 1.0], vec![31.0, 1.0, 0.0]]);
        let bad = write_tmp("sex,age\nX,30\n");
        assert!(matches!(
            load_queries(bad.path(), &enc),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn split_counts_for_ten_rows() {
        let ds = synthetic(10);
        let s = split(
            &ds,
            &SplitSpec {
                train_fraction: 0.8,
                dl_fraction: 0.5,
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!(
            (s.train.n(), s.test.n(), s.d_k.n(), s.d_l.n()),
            (8, 2, 4, 4)
        );
    }

    #[test]
    fn ceiling_rule_gives_test_138_of_686() {
        // direct count: the train side takes floor(0.8 n), test the rest
        let n = 686usize;
        let mut test = 0;
        while (n - test) as f64 > 0.8 * n as f64 {
            test += 1;
        }
        assert_eq!(test, 138);
        let ds = synthetic(n);
        let s = split(
            &ds,
            &SplitSpec {
                train_fraction: 0.8,
                dl_fraction: 0.5,
                seed: 1,
            },
        )
        .unwrap();
        assert_eq!(s.test.n(), test);
        assert_eq!(s.d_k.n() + s.d_l.n(), n - test);
    }

    #[test]
    fn split_is_seed_deterministic() {
        let ds = synthetic(40);
        let spec = SplitSpec {
            train_fraction: 0.8,
            dl_fraction: 0.5,
            seed: 11,
        };
        let a = split(&ds, &spec).unwrap();
        let b = split(&ds, &spec).unwrap();
        assert_eq!(a.train_idx, b.train_idx);
        assert_eq!(a.d_l_idx, b.d_l_idx);
        let c = split(&ds, &SplitSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.train_idx, c.train_idx);
    }

    #[test]
    fn split_rejects_tiny_partitions() {
        let ds = synthetic(5);
        let spec = SplitSpec {
            train_fraction: 0.8,
            dl_fraction: 0.5,
            seed: 0,
        };
        assert!(matches!(split(&ds, &spec), Err(Error::Split(_))));
    }

    #[test]
    fn grid_examples() {
        let g = TimeGrid::from_outcomes(&[(1.0, true), (3.0, true)], 3).unwrap();
        assert_eq!(g.times(), &[1.0, 2.0, 3.0]);
        let g = TimeGrid::from_outcomes(&[(0.5, true), (0.5, true), (2.0, true)], 2).unwrap();
        assert_eq!(g.times(), &[0.5, 2.0]);
        let g = TimeGrid::from_outcomes(&[(1.0, true), (2.0, true), (5.0, true)], 5).unwrap();
        assert_eq!(g.times(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn grid_ignores_censored_times_and_rejects_single_event_time() {
        let g = TimeGrid::from_outcomes(&[(1.0, true), (3.0, true), (9.0, false)], 3).unwrap();
        assert_eq!(g.end(), 3.0);
        assert!(matches!(
            TimeGrid::from_outcomes(&[(1.0, true), (1.0, true), (4.0, false)], 3),
            Err(Error::DegenerateGrid(_))
        ));
    }
}
