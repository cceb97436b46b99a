//! Tabular gait-feature datasets: loading, cleaning, scaling, partitioning
//! and a seeded synthetic generator with known ground truth.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Loaded,
    Synthetic { seed: u64 },
}

/// Feature matrix (row-major) with binary labels, 1 = ASD and 0 = typical.
///
/// Missing cells are stored as NaN until [`clean`] drops their rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<u8>,
    column_names: Vec<String>,
    n_rows: usize,
    n_cols: usize,
    provenance: Provenance,
}

impl Dataset {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
        column_names: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::InvalidDataset(format!(
                "every row must have {n_cols} values"
            )));
        }
        let n_rows = rows.len();
        let features = rows.into_iter().flatten().collect();
        Self::from_flat(features, labels, column_names, n_rows, provenance)
    }

    pub fn from_flat(
        features: Vec<f64>,
        labels: Vec<u8>,
        column_names: Vec<String>,
        n_rows: usize,
        provenance: Provenance,
    ) -> Result<Self> {
        let n_cols = column_names.len();
        if n_rows < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 rows, got {n_rows}"
            )));
        }
        if n_cols == 0 {
            return Err(Error::InvalidDataset("need at least 1 feature column".into()));
        }
        if features.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                actual: features.len(),
            });
        }
        if labels.len() != n_rows {
            return Err(Error::DimensionMismatch {
                expected: n_rows,
                actual: labels.len(),
            });
        }
        if let Some((row, &l)) = labels.iter().enumerate().find(|(_, &l)| l > 1) {
            return Err(Error::InvalidLabel {
                row,
                value: l.to_string(),
            });
        }
        if features.iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidDataset("infinite feature value".into()));
        }
        let mut seen = HashSet::new();
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        Ok(Self {
            features,
            labels,
            column_names,
            n_rows,
            n_cols,
            provenance,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.features[row * self.n_cols + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.value(r, col)).collect()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, row: usize) -> u8 {
        self.labels[row]
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn has_missing(&self) -> bool {
        self.features.iter().any(|v| v.is_nan())
    }

    /// Row counts for label 0 and label 1.
    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.n_rows - ones, ones]
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len() * self.n_cols);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            if r >= self.n_rows {
                return Err(Error::InvalidParameter(format!("row {r} out of range")));
            }
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Self::from_flat(
            features,
            labels,
            self.column_names.clone(),
            rows.len(),
            self.provenance,
        )
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.n_cols) {
            return Err(Error::InvalidParameter(format!("column {c} out of range")));
        }
        let mut features = Vec::with_capacity(self.n_rows * cols.len());
        for r in 0..self.n_rows {
            let row = self.row(r);
            features.extend(cols.iter().map(|&c| row[c]));
        }
        let names = cols.iter().map(|&c| self.column_names[c].clone()).collect();
        Self::from_flat(features, self.labels.clone(), names, self.n_rows, self.provenance)
    }

    /// Same features with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<u8>) -> Result<Self> {
        Self::from_flat(
            self.features.clone(),
            labels,
            self.column_names.clone(),
            self.n_rows,
            self.provenance,
        )
    }

    pub fn to_csv_string(&self, label_column: &str) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.column_names.iter().map(String::as_str).collect();
        header.push(label_column);
        w.write_record(&header)?;
        for r in 0..self.n_rows {
            let mut rec: Vec<String> = self
                .row(r)
                .iter()
                .map(|v| if v.is_nan() { String::new() } else { v.to_string() })
                .collect();
            rec.push(self.labels[r].to_string());
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

// ---------------------------------------------------------------------------
// CSV loading

#[derive(Clone, Debug)]
pub struct CsvOptions {
    pub label_column: String,
    /// Token mapped to label 1; every other token maps to 0. When `None`
    /// the label column must hold numeric 0/1.
    pub positive_label: Option<String>,
}

impl CsvOptions {
    pub fn new(label_column: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            positive_label: None,
        }
    }

    pub fn positive_label(mut self, token: impl Into<String>) -> Self {
        self.positive_label = Some(token.into());
        self
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    load_csv_with(path, &CsvOptions::new(label_column))
}

pub fn load_csv_with(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    read_csv(file, opts)
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let label_idx = header
        .iter()
        .position(|h| *h == opts.label_column)
        .ok_or_else(|| Error::MissingLabelColumn(opts.label_column.clone()))?;
    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::DuplicateColumn(h.clone()));
        }
    }
    let names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut label_tokens = Vec::new();
    let mut n_rows = 0;
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (i, cell) in rec.iter().enumerate() {
            if i == label_idx {
                label_tokens.push(cell.to_owned());
            } else if cell.is_empty() {
                features.push(f64::NAN);
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::UnparseableCell {
                    row: row + 1,
                    column: header[i].clone(),
                    value: cell.to_owned(),
                })?;
                if !v.is_finite() {
                    return Err(Error::UnparseableCell {
                        row: row + 1,
                        column: header[i].clone(),
                        value: cell.to_owned(),
                    });
                }
                features.push(v);
            }
        }
        n_rows += 1;
    }
    let labels = map_labels(&label_tokens, opts.positive_label.as_deref())?;
    Dataset::from_flat(features, labels, names, n_rows, Provenance::Loaded)
}

fn map_labels(tokens: &[String], positive: Option<&str>) -> Result<Vec<u8>> {
    match positive {
        Some(pos) => {
            let distinct: HashSet<&str> = tokens.iter().map(String::as_str).collect();
            if distinct.len() > 2 {
                return Err(Error::InvalidDataset(format!(
                    "label column has {} distinct values, expected 2",
                    distinct.len()
                )));
            }
            Ok(tokens.iter().map(|t| u8::from(t == pos)).collect())
        }
        None => tokens
            .iter()
            .enumerate()
            .map(|(row, t)| match t.parse::<f64>() {
                Ok(0.0) => Ok(0),
                Ok(1.0) => Ok(1),
                _ => Err(Error::InvalidLabel {
                    row: row + 1,
                    value: t.clone(),
                }),
            })
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Cleaning

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub dropped_columns: Vec<DroppedColumn>,
    pub dropped_rows: usize,
}

const SQUARE_RTOL: f64 = 1e-9;

fn approx_square(value: f64, base: f64) -> bool {
    let sq = base * base;
    let diff = (value - sq).abs();
    diff == 0.0 || diff <= SQUARE_RTOL * value.abs().max(sq.abs())
}

/// Drop rows with missing cells, constant columns, exact duplicate columns,
/// and columns that equal the elementwise square of another retained
/// column (variance stored next to standard deviation).
pub fn clean(d: &Dataset) -> Result<(Dataset, CleanReport)> {
    let keep_rows: Vec<usize> = (0..d.n_rows)
        .filter(|&r| !d.row(r).iter().any(|v| v.is_nan()))
        .collect();
    let dropped_rows = d.n_rows - keep_rows.len();
    if keep_rows.len() < 2 {
        return Err(Error::Degenerate(format!(
            "only {} complete rows remain",
            keep_rows.len()
        )));
    }
    let cols: Vec<Vec<f64>> = (0..d.n_cols)
        .map(|c| keep_rows.iter().map(|&r| d.value(r, c)).collect())
        .collect();

    let mut report = CleanReport {
        dropped_columns: Vec::new(),
        dropped_rows,
    };
    let mut retained = vec![true; d.n_cols];
    for (c, col) in cols.iter().enumerate() {
        if col.iter().all(|&v| v == col[0]) {
            retained[c] = false;
            report.dropped_columns.push(DroppedColumn {
                name: d.column_names[c].clone(),
                reason: "zero_variance".into(),
            });
        }
    }
    for c in 0..d.n_cols {
        if !retained[c] {
            continue;
        }
        if let Some(first) = (0..c).find(|&p| retained[p] && cols[p] == cols[c]) {
            retained[c] = false;
            report.dropped_columns.push(DroppedColumn {
                name: d.column_names[c].clone(),
                reason: format!("duplicate of {}", d.column_names[first]),
            });
        }
    }
    for c in 0..d.n_cols {
        if !retained[c] {
            continue;
        }
        let base = (0..d.n_cols).find(|&b| {
            b != c
                && retained[b]
                && cols[c]
                    .iter()
                    .zip(&cols[b])
                    .all(|(&v, &x)| approx_square(v, x))
        });
        if let Some(b) = base {
            retained[c] = false;
            report.dropped_columns.push(DroppedColumn {
                name: d.column_names[c].clone(),
                reason: format!("square of {}", d.column_names[b]),
            });
        }
    }

    let keep_cols: Vec<usize> = (0..d.n_cols).filter(|&c| retained[c]).collect();
    if keep_cols.is_empty() {
        return Err(Error::Degenerate("every column was removed".into()));
    }
    let cleaned = d.select_rows(&keep_rows)?.select_columns(&keep_cols)?;
    Ok((cleaned, report))
}

// ---------------------------------------------------------------------------
// Min-max scaling

/// Per-column affine map onto [0, 1], fit on one set of rows and reusable on
/// others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub range: Vec<f64>,
}

impl MinMaxScaler {
    /// Fit on `rows`. Constant columns get range 0 and transform to 0.
    pub fn fit(d: &Dataset, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyRows);
        }
        let mut min = vec![f64::INFINITY; d.n_cols];
        let mut max = vec![f64::NEG_INFINITY; d.n_cols];
        for &r in rows {
            for (c, &v) in d.row(r).iter().enumerate() {
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
        let range = min.iter().zip(&max).map(|(lo, hi)| hi - lo).collect();
        Ok(Self { min, range })
    }

    pub fn fit_all(d: &Dataset) -> Result<Self> {
        let rows: Vec<usize> = (0..d.n_rows).collect();
        Self::fit(d, &rows)
    }

    pub fn transform_value(&self, col: usize, v: f64) -> f64 {
        if self.range[col] > 0.0 {
            (v - self.min[col]) / self.range[col]
        } else {
            0.0
        }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(c, &v)| self.transform_value(c, v))
            .collect()
    }

    pub fn transform(&self, d: &Dataset) -> Result<Dataset> {
        if self.min.len() != d.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                actual: d.n_cols,
            });
        }
        let features = (0..d.n_rows)
            .flat_map(|r| self.transform_row(d.row(r)))
            .collect();
        Dataset::from_flat(
            features,
            d.labels.clone(),
            d.column_names.clone(),
            d.n_rows,
            d.provenance,
        )
    }
}

/// Map every column onto [0, 1]. Fails on a constant column, which means
/// [`clean`] was skipped.
pub fn normalize_minmax(d: &Dataset) -> Result<(Dataset, MinMaxScaler)> {
    let scaler = MinMaxScaler::fit_all(d)?;
    if let Some(c) = scaler.range.iter().position(|&r| r <= 0.0 || r.is_nan()) {
        return Err(Error::ConstantColumn(d.column_names[c].clone()));
    }
    let out = scaler.transform(d)?;
    Ok((out, scaler))
}

// ---------------------------------------------------------------------------
// Partitioning

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validate: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitIndices {
    pub fn train_and_validate(&self) -> Vec<usize> {
        let mut v = self.train.clone();
        v.extend_from_slice(&self.validate);
        v
    }
}

pub const DEFAULT_TRAIN_FRAC: f64 = 0.8;
/// Algorithm default: the 0.2 held out is halved between validation and test.
pub const DEFAULT_VALIDATE_FRAC: f64 = 0.2 * 0.5;

fn class_members(d: &Dataset) -> [Vec<usize>; 2] {
    let mut members = [Vec::new(), Vec::new()];
    for (i, &l) in d.labels.iter().enumerate() {
        members[l as usize].push(i);
    }
    members
}

/// Largest-remainder allocation of `total` across classes in proportion to
/// `quota_base`, never exceeding `capacity`. Ties go to the lower class.
fn allocate(total: usize, quota_base: [usize; 2], n: usize, capacity: [usize; 2]) -> [usize; 2] {
    let quotas = quota_base.map(|c| c as f64 * total as f64 / n as f64);
    let mut alloc = [0usize; 2];
    for k in 0..2 {
        alloc[k] = (quotas[k].floor() as usize).min(capacity[k]);
    }
    let mut left = total.saturating_sub(alloc[0] + alloc[1]);
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    while left > 0 {
        let mut progressed = false;
        for &k in &order {
            if left > 0 && alloc[k] < capacity[k] {
                alloc[k] += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    alloc
}

/// Stratified train/validate/test partition. Partition sizes are
/// `round(frac * n)` overall; each class is spread across partitions by
/// largest remainder.
pub fn split(d: &Dataset, train_frac: f64, validate_frac: f64, seed: u64) -> Result<SplitIndices> {
    if !(train_frac > 0.0 && validate_frac > 0.0 && train_frac + validate_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fractions train={train_frac}, validate={validate_frac} must be positive and sum below 1"
        )));
    }
    let mut members = class_members(d);
    for (class, m) in members.iter().enumerate() {
        if m.len() < 3 {
            return Err(Error::ClassTooSmall {
                class: class as u8,
                count: m.len(),
                needed: 3,
            });
        }
    }
    let n = d.n_rows;
    let n_train = (train_frac * n as f64).round() as usize;
    let n_validate = (validate_frac * n as f64).round() as usize;
    if n_train == 0 || n_validate == 0 || n_train + n_validate >= n {
        return Err(Error::InvalidParameter(format!(
            "fractions leave an empty partition for {n} rows"
        )));
    }
    let sizes = [members[0].len(), members[1].len()];
    let train = allocate(n_train, sizes, n, sizes);
    let remaining = [sizes[0] - train[0], sizes[1] - train[1]];
    let validate = allocate(n_validate, sizes, n, remaining);

    let mut rng = rng::stream(seed, &[0x5911]);
    let mut out = SplitIndices {
        train: Vec::new(),
        validate: Vec::new(),
        test: Vec::new(),
    };
    for (k, m) in members.iter_mut().enumerate() {
        m.shuffle(&mut rng);
        out.train.extend_from_slice(&m[..train[k]]);
        out.validate.extend_from_slice(&m[train[k]..train[k] + validate[k]]);
        out.test.extend_from_slice(&m[train[k] + validate[k]..]);
    }
    out.train.sort_unstable();
    out.validate.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

/// Stratified k-fold assignment: each class is shuffled, the classes are
/// concatenated, and position `p` goes to fold `p mod k`. Returns
/// `(train, test)` index pairs, both sorted.
pub fn kfold_indices(d: &Dataset, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let n = d.n_rows;
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k={k} folds invalid for {n} rows"
        )));
    }
    let mut members = class_members(d);
    for (class, m) in members.iter().enumerate() {
        if m.len() < 2 {
            return Err(Error::ClassTooSmall {
                class: class as u8,
                count: m.len(),
                needed: 2,
            });
        }
    }
    let mut rng = rng::stream(seed, &[0xF01D]);
    let mut fold_of = vec![0usize; n];
    let mut p = 0;
    for m in members.iter_mut() {
        m.shuffle(&mut rng);
        for &i in m.iter() {
            fold_of[i] = p % k;
            p += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == f);
            (train, test)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Synthetic data

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub n_informative: usize,
    pub class_separation: f64,
    #[serde(default)]
    pub redundant_pairs: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n_rows: usize, n_cols: usize, n_informative: usize, class_separation: f64, seed: u64) -> Self {
        Self {
            n_rows,
            n_cols,
            n_informative,
            class_separation,
            redundant_pairs: 0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_rows < 4 {
            return bad(format!("n_rows={} too small", self.n_rows));
        }
        if self.n_cols == 0 {
            return bad("n_cols must be positive".into());
        }
        if self.n_informative > self.n_cols {
            return bad("n_informative exceeds n_cols".into());
        }
        if self.redundant_pairs * 2 + self.n_informative > self.n_cols {
            return bad("redundant pairs and informative columns exceed n_cols".into());
        }
        if !(self.class_separation > 0.0 && self.class_separation.is_finite()) {
            return bad("class_separation must be positive".into());
        }
        Ok(())
    }
}

/// Balanced two-class data. Informative columns are N(±separation/2, 1) by
/// class at seeded positions among the base columns; the rest are N(0, 1)
/// noise. The last `redundant_pairs` columns are squares of noise columns.
pub fn synthesize(spec: &SynthSpec) -> Result<(Dataset, FeatureMask)> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, &[0x5E7]);
    let n_base = spec.n_cols - spec.redundant_pairs;

    let mut base_cols: Vec<usize> = (0..n_base).collect();
    base_cols.shuffle(&mut rng);
    let mut informative = base_cols[..spec.n_informative].to_vec();
    informative.sort_unstable();
    let mut noise: Vec<usize> = base_cols[spec.n_informative..].to_vec();
    noise.sort_unstable();
    let squared_bases = &noise[noise.len() - spec.redundant_pairs..];

    let mut labels: Vec<u8> = (0..spec.n_rows).map(|i| u8::from(i >= spec.n_rows.div_ceil(2))).collect();
    labels.shuffle(&mut rng);

    let mut is_informative = vec![false; n_base];
    for &c in &informative {
        is_informative[c] = true;
    }
    let half_gap = spec.class_separation / 2.0;
    let mut features = Vec::with_capacity(spec.n_rows * spec.n_cols);
    for &label in &labels {
        let start = features.len();
        for &inf in &is_informative {
            let z: f64 = StandardNormal.sample(&mut rng);
            let shift = if inf {
                if label == 1 { half_gap } else { -half_gap }
            } else {
                0.0
            };
            features.push(z + shift);
        }
        for &b in squared_bases {
            let v = features[start + b];
            features.push(v * v);
        }
    }
    let names = (0..spec.n_cols).map(|c| format!("f{c}")).collect();
    let d = Dataset::from_flat(
        features,
        labels,
        names,
        spec.n_rows,
        Provenance::Synthetic { seed: spec.seed },
    )?;
    let mask = FeatureMask::from_indices(spec.n_cols, &informative)?;
    Ok((d, mask))
}
