//! Tabular datasets: CSV ingestion, feature standardization and the
//! row-major feature store shared by both solvers.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Supervised task carried by a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification { n_classes: usize },
}

impl Task {
    pub fn is_classification(&self) -> bool {
        matches!(self, Task::Classification { .. })
    }

    pub fn n_classes(&self) -> Option<usize> {
        match *self {
            Task::Classification { n_classes } => Some(n_classes),
            Task::Regression => None,
        }
    }
}

/// Task requested at load time; the class count is discovered from the data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Regression,
    Classification,
}

/// Target of a single row. Class indices are zero-based internally.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Response {
    Value(f64),
    Class(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Real(Vec<f64>),
    Class(Vec<usize>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Real(v) => v.len(),
            Target::Class(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn subset(&self, idx: &[usize]) -> Target {
        match self {
            Target::Real(v) => Target::Real(idx.iter().map(|&i| v[i]).collect()),
            Target::Class(v) => Target::Class(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Per-column affine transform applied by [`load_csv`] when standardizing.
///
/// Constant columns are centered but never scaled (their scale is 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Fits column means and population standard deviations.
    pub fn fit(features: &[f64], d: usize) -> Self {
        let n = features.len() / d;
        let mut means = vec![0.0; d];
        for row in features.chunks_exact(d) {
            for (m, &x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut var = vec![0.0; d];
        for row in features.chunks_exact(d) {
            for j in 0..d {
                let t = row[j] - means[j];
                var[j] += t * t;
            }
        }
        let scales = var
            .iter()
            .zip(&means)
            .map(|(&v, &m)| {
                let sd = (v / n as f64).sqrt();
                // relative threshold: a column of identical large values can
                // still pick up rounding noise in its variance
                if sd <= 1e-12 * m.abs().max(1.0) {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Standardizer { means, scales }
    }

    pub fn transform_row(&self, row: &mut [f64]) {
        for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.scales) {
            *x = (*x - m) / s;
        }
    }

    pub fn inverse_row(&self, row: &mut [f64]) {
        for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.scales) {
            *x = *x * s + m;
        }
    }
}

/// N rows of d real features plus a target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    n: usize,
    d: usize,
    target: Target,
    task: Task,
    pub column_names: Vec<String>,
    pub target_name: String,
    /// Original label text for each dense class index.
    pub class_labels: Vec<String>,
    pub standardizer: Option<Standardizer>,
}

impl Dataset {
    /// Builds a regression dataset from row vectors.
    pub fn regression(rows: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let (features, n, d) = flatten(rows)?;
        if y.len() != n {
            return Err(Error::Dimension(format!("{n} rows but {} targets", y.len())));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!("target at row {i} is not finite")));
        }
        Ok(Dataset {
            features,
            n,
            d,
            target: Target::Real(y),
            task: Task::Regression,
            column_names: default_names(d),
            target_name: "y".into(),
            class_labels: Vec::new(),
            standardizer: None,
        })
    }

    /// Builds a classification dataset; `labels` are zero-based class indices
    /// and every class in `0..n_classes` must occur.
    pub fn classification(rows: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize) -> Result<Self> {
        let (features, n, d) = flatten(rows)?;
        if labels.len() != n {
            return Err(Error::Dimension(format!("{n} rows but {} labels", labels.len())));
        }
        check_classes(&labels, n_classes)?;
        Ok(Dataset {
            features,
            n,
            d,
            target: Target::Class(labels),
            task: Task::Classification { n_classes },
            column_names: default_names(d),
            target_name: "y".into(),
            class_labels: (1..=n_classes).map(|c| c.to_string()).collect(),
            standardizer: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.d)
    }

    pub fn response(&self, i: usize) -> Response {
        match &self.target {
            Target::Real(v) => Response::Value(v[i]),
            Target::Class(v) => Response::Class(v[i]),
        }
    }

    /// Real-valued targets, or `None` for classification data.
    pub fn y(&self) -> Option<&[f64]> {
        match &self.target {
            Target::Real(v) => Some(v),
            Target::Class(_) => None,
        }
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match &self.target {
            Target::Class(v) => Some(v),
            Target::Real(_) => None,
        }
    }

    /// Rows `idx` in the given order. Transform metadata is kept, and a
    /// classification subset keeps the full class count even if some class
    /// is absent from it.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n: idx.len(),
            d: self.d,
            target: self.target.subset(idx),
            task: self.task,
            column_names: self.column_names.clone(),
            target_name: self.target_name.clone(),
            class_labels: self.class_labels.clone(),
            standardizer: self.standardizer.clone(),
        }
    }

    /// Per-column (min, max) over all rows.
    pub fn feature_ranges(&self) -> Vec<(f64, f64)> {
        let mut r = vec![(f64::INFINITY, f64::NEG_INFINITY); self.d];
        for row in self.rows() {
            for (b, &x) in r.iter_mut().zip(row) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        r
    }

    /// Standardizes features in place and keeps the transform.
    pub fn standardize(&mut self) {
        if self.standardizer.is_some() {
            return;
        }
        let s = Standardizer::fit(&self.features, self.d);
        self.apply_standardizer(s);
    }

    /// Applies a transform fitted elsewhere (e.g. on a training split).
    /// Data that already carries a transform is left unchanged.
    pub fn apply_standardizer(&mut self, s: Standardizer) {
        if self.standardizer.is_some() {
            return;
        }
        for row in self.features.chunks_exact_mut(self.d) {
            s.transform_row(row);
        }
        self.standardizer = Some(s);
    }

    /// Features mapped back to input units.
    pub fn original_row(&self, i: usize) -> Vec<f64> {
        let mut r = self.row(i).to_vec();
        if let Some(s) = &self.standardizer {
            s.inverse_row(&mut r);
        }
        r
    }

    /// Writes the dataset in input units, optionally with an extra integer
    /// column (e.g. generator cluster labels).
    pub fn write_csv(&self, path: &Path, extra: Option<(&str, &[usize])>) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header: Vec<String> = self.column_names.clone();
        header.push(self.target_name.clone());
        if let Some((name, _)) = extra {
            header.push(name.to_string());
        }
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut rec: Vec<String> = self.original_row(i).iter().map(|v| format!("{v}")).collect();
            rec.push(match self.response(i) {
                Response::Value(v) => format!("{v}"),
                Response::Class(c) => self.class_labels[c].clone(),
            });
            if let Some((_, vals)) = extra {
                rec.push(vals[i].to_string());
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

fn flatten(rows: Vec<Vec<f64>>) -> Result<(Vec<f64>, usize, usize)> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty("dataset has no rows".into()));
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::Empty("dataset has no feature columns".into()));
    }
    let mut out = Vec::with_capacity(n * d);
    for (i, r) in rows.into_iter().enumerate() {
        if r.len() != d {
            return Err(Error::Dimension(format!("row {i} has {} features, expected {d}", r.len())));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dimension(format!("feature {j} of row {i} is not finite")));
        }
        out.extend(r);
    }
    Ok((out, n, d))
}

fn check_classes(labels: &[usize], n_classes: usize) -> Result<()> {
    let mut seen = vec![false; n_classes];
    for &c in labels {
        if c >= n_classes {
            return Err(Error::ClassOutOfRange { class: c, n_classes });
        }
        seen[c] = true;
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::Config(format!("class {} never occurs", c + 1)));
    }
    Ok(())
}

/// Reads a headered CSV. Every column other than `target_column` is a
/// numeric feature.
pub fn load_csv(path: &Path, target_column: &str, task: TaskKind, standardize: bool) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Empty(format!("{} has no header", path.display())));
    }
    let t_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingColumn(target_column.to_string()))?;
    let feat_idx: Vec<usize> = (0..headers.len()).filter(|&j| j != t_idx).collect();
    if feat_idx.is_empty() {
        return Err(Error::Empty("no feature columns besides the target".into()));
    }

    let mut rows = Vec::new();
    let mut raw_target = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row_no = r + 1;
        let mut row = Vec::with_capacity(feat_idx.len());
        for &j in &feat_idx {
            let cell = rec.get(j).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                row: row_no,
                column: headers[j].clone(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row: row_no,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                });
            }
            row.push(v);
        }
        rows.push(row);
        raw_target.push((row_no, rec.get(t_idx).unwrap_or("").to_string()));
    }
    if rows.is_empty() {
        return Err(Error::Empty(format!("{} has no data rows", path.display())));
    }

    let mut ds = match task {
        TaskKind::Regression => {
            let mut y = Vec::with_capacity(raw_target.len());
            for (row_no, cell) in &raw_target {
                let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row: *row_no,
                    column: target_column.to_string(),
                    value: cell.clone(),
                })?;
                y.push(v);
            }
            Dataset::regression(rows, y)?
        }
        TaskKind::Classification => {
            let (labels, names) = encode_labels(raw_target.iter().map(|(_, s)| s.as_str()));
            let m = names.len();
            let mut ds = Dataset::classification(rows, labels, m)?;
            ds.class_labels = names;
            ds
        }
    };
    ds.column_names = feat_idx.iter().map(|&j| headers[j].clone()).collect();
    ds.target_name = target_column.to_string();
    if standardize {
        ds.standardize();
    }
    Ok(ds)
}

/// Dense class indices. Labels sort numerically when all parse as numbers,
/// lexically otherwise.
fn encode_labels<'a>(raw: impl Iterator<Item = &'a str> + Clone) -> (Vec<usize>, Vec<String>) {
    let numeric = raw.clone().all(|s| s.parse::<f64>().is_ok());
    let mut names: Vec<String> = raw.clone().map(str::to_string).collect();
    if numeric {
        names.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    } else {
        names.sort();
    }
    names.dedup();
    let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let labels = raw.map(|s| index[s]).collect();
    (labels, names)
}
