//! Dataset model, CSV ingestion, missing-value imputation, PCA reduction and
//! multi-sampling.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{ClusterError, Result};
use crate::matrix::Matrix;

/// An `n × d` table of observations with an optional class label per row and
/// a mask of cells that were absent in the source.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    points: Matrix,
    labels: Option<Vec<String>>,
    missing: Vec<bool>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, points: Matrix) -> Result<Self> {
        if points.rows() == 0 || points.cols() == 0 {
            return Err(ClusterError::EmptyDataset);
        }
        let missing = vec![false; points.rows() * points.cols()];
        Ok(Self {
            name: name.into(),
            points,
            labels: None,
            missing,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n() {
            return Err(ClusterError::DimensionMismatch {
                expected: self.n(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Attaches a row-major missing mask. Masked cells are stored as NaN.
    pub fn with_missing_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.missing.len() {
            return Err(ClusterError::DimensionMismatch {
                expected: self.missing.len(),
                found: mask.len(),
            });
        }
        for (v, &m) in self.points.as_mut_slice().iter_mut().zip(&mask) {
            if m {
                *v = f64::NAN;
            }
        }
        self.missing = mask;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn d(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[row * self.d() + col]
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|&m| m)
    }

    /// Keeps only the listed feature columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        let d = self.d();
        let points = self.points.select_columns(columns)?;
        let missing = (0..self.n())
            .flat_map(|r| columns.iter().map(move |&c| r * d + c))
            .map(|i| self.missing[i])
            .collect();
        Ok(Dataset {
            name: self.name.clone(),
            points,
            labels: self.labels.clone(),
            missing,
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let d = self.d();
        let missing = rows
            .iter()
            .flat_map(|&r| self.missing[r * d..(r + 1) * d].iter().copied())
            .collect();
        Dataset {
            name: self.name.clone(),
            points: self.points.select_rows(rows),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r].clone()).collect()),
            missing,
        }
    }

    /// Writes the points as CSV, appending the label (if any) as the last
    /// column. Missing cells are written as `missing_token`.
    pub fn write_csv<W: Write>(&self, out: W, missing_token: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in 0..self.n() {
            let mut record: Vec<String> = self
                .points
                .row(r)
                .iter()
                .enumerate()
                .map(|(c, v)| {
                    if self.is_missing(r, c) {
                        missing_token.to_owned()
                    } else {
                        v.to_string()
                    }
                })
                .collect();
            if let Some(labels) = &self.labels {
                record.push(labels[r].clone());
            }
            w.write_record(&record)?;
        }
        w.flush().map_err(|source| ClusterError::Io {
            path: "<output>".into(),
            source,
        })?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Delimiter {
    #[default]
    Comma,
    /// Any run of spaces or tabs, as used by the Joensuu point files.
    Whitespace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    /// Zero-based index of the class label column, excluded from the features.
    pub label_column: Option<usize>,
    pub missing_token: String,
    pub has_header: bool,
    pub delimiter: Delimiter,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            label_column: None,
            missing_token: "?".to_owned(),
            has_header: false,
            delimiter: Delimiter::Comma,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| ClusterError::Io {
        path: path.to_owned(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_owned());
    read_csv(BufReader::new(file), name, options)
}

/// Parses delimited text into a [`Dataset`]. Row numbers in errors count data
/// rows from zero (the header, if any, is not counted); columns are zero-based
/// positions in the source file.
pub fn read_csv<R: Read>(reader: R, name: impl Into<String>, options: &CsvOptions) -> Result<Dataset> {
    let records = match options.delimiter {
        Delimiter::Comma => {
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(options.has_header)
                .flexible(true)
                .trim(csv::Trim::All)
                .from_reader(reader);
            let mut rows = Vec::new();
            for rec in rdr.records() {
                let rec = rec?;
                // a trailing blank line comes through as a single empty field
                if rec.len() == 1 && rec[0].is_empty() {
                    continue;
                }
                rows.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
            }
            rows
        }
        Delimiter::Whitespace => {
            let mut text = String::new();
            let mut reader = reader;
            reader
                .read_to_string(&mut text)
                .map_err(|source| ClusterError::Io {
                    path: "<input>".into(),
                    source,
                })?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .skip(usize::from(options.has_header))
                .map(|l| l.split_whitespace().map(str::to_owned).collect())
                .collect()
        }
    };
    build_dataset(records, name.into(), options)
}

fn build_dataset(records: Vec<Vec<String>>, name: String, options: &CsvOptions) -> Result<Dataset> {
    let width = records.first().ok_or(ClusterError::EmptyDataset)?.len();
    if let Some(lc) = options.label_column {
        if lc >= width {
            return Err(ClusterError::invalid(format!(
                "label column {lc} is out of range for {width} columns"
            )));
        }
    }
    let d = width - usize::from(options.label_column.is_some());
    let mut values = Vec::with_capacity(records.len() * d);
    let mut mask = Vec::with_capacity(records.len() * d);
    let mut labels = Vec::new();
    for (row, rec) in records.iter().enumerate() {
        if rec.len() != width {
            return Err(ClusterError::RaggedRow {
                row,
                expected: width,
                found: rec.len(),
            });
        }
        for (column, cell) in rec.iter().enumerate() {
            if Some(column) == options.label_column {
                labels.push(cell.clone());
            } else if *cell == options.missing_token {
                values.push(f64::NAN);
                mask.push(true);
            } else {
                let v: f64 = cell.parse().map_err(|_| ClusterError::Parse {
                    row,
                    column,
                    value: cell.clone(),
                })?;
                values.push(v);
                mask.push(false);
            }
        }
    }
    let points = Matrix::new(records.len(), d, values)?;
    let mut ds = Dataset::new(name, points)?.with_missing_mask(mask)?;
    if options.label_column.is_some() {
        ds = ds.with_labels(labels)?;
    }
    Ok(ds)
}

/// Fills each missing cell with the mean of that feature over the observed
/// values of rows sharing the same label. Rows without a label, or classes
/// with no observed value for the feature, fall back to the global feature
/// mean.
pub fn impute_local_mean(data: &Dataset) -> Result<Dataset> {
    if !data.has_missing() {
        return Ok(data.clone());
    }
    let (n, d) = (data.n(), data.d());
    let mut global = vec![(0.0, 0usize); d];
    let mut by_class: HashMap<&str, Vec<(f64, usize)>> = HashMap::new();
    for r in 0..n {
        let class = data.labels().map(|l| l[r].as_str());
        for c in 0..d {
            if data.is_missing(r, c) {
                continue;
            }
            let v = data.points.row(r)[c];
            global[c].0 += v;
            global[c].1 += 1;
            if let Some(class) = class {
                let acc = &mut by_class.entry(class).or_insert_with(|| vec![(0.0, 0); d])[c];
                acc.0 += v;
                acc.1 += 1;
            }
        }
    }
    if let Some(column) = global.iter().position(|&(_, count)| count == 0) {
        return Err(ClusterError::AllMissing { column });
    }

    let mut out = data.clone();
    for r in 0..n {
        let class = data.labels().map(|l| l[r].as_str());
        for c in 0..d {
            if !data.is_missing(r, c) {
                continue;
            }
            let (sum, count) = class
                .and_then(|cl| by_class.get(cl))
                .map(|acc| acc[c])
                .filter(|&(_, count)| count > 0)
                .unwrap_or(global[c]);
            out.points.row_mut(r)[c] = sum / count as f64;
        }
    }
    out.missing.iter_mut().for_each(|m| *m = false);
    Ok(out)
}

/// Principal axes of a centered (optionally standardized) dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// One unit-length component per row (`r × d`), ordered by decreasing
    /// explained variance.
    components: Matrix,
    explained_variance: Vec<f64>,
    explained_variance_ratio: Vec<f64>,
    total_variance: f64,
    mean: Vec<f64>,
    scale: Option<Vec<f64>>,
}

impl PcaModel {
    pub fn components(&self) -> &Matrix {
        &self.components
    }

    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn explained_variance_ratio(&self) -> &[f64] {
        &self.explained_variance_ratio
    }

    pub fn cumulative_ratio(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> Option<&[f64]> {
        self.scale.as_deref()
    }
}

/// Fits PCA on the sample covariance (n − 1 denominator) and keeps the
/// smallest number of leading components whose cumulative explained variance
/// reaches `variance_threshold`. With `standardize` each feature is divided by
/// its standard deviation first (correlation PCA).
pub fn pca_fit(data: &Dataset, variance_threshold: f64, standardize: bool) -> Result<PcaModel> {
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(ClusterError::invalid(format!(
            "variance threshold must be in (0, 1], got {variance_threshold}"
        )));
    }
    if data.has_missing() {
        return Err(ClusterError::invalid("dataset has missing values; impute first"));
    }
    let (n, d) = (data.n(), data.d());
    if n < 2 {
        return Err(ClusterError::TooMany {
            requested: 2,
            available: n,
        });
    }
    let mut mean = vec![0.0; d];
    for row in data.points.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut centered = DMatrix::<f64>::zeros(n, d);
    for (r, row) in data.points.iter_rows().enumerate() {
        for c in 0..d {
            centered[(r, c)] = row[c] - mean[c];
        }
    }
    let scale = if standardize {
        let s: Vec<f64> = (0..d)
            .map(|c| {
                let var = centered.column(c).norm_squared() / (n - 1) as f64;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        for c in 0..d {
            centered.column_mut(c).unscale_mut(s[c]);
        }
        Some(s)
    } else {
        None
    };

    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(ClusterError::ZeroVariance);
    }

    let mut cumulative = 0.0;
    let mut r = d;
    for (i, ev) in eigenvalues.iter().enumerate() {
        cumulative += ev / total;
        if cumulative >= variance_threshold - 1e-12 {
            r = i + 1;
            break;
        }
    }

    let mut components = Matrix::zeros(r, d);
    for (out, &src) in order.iter().take(r).enumerate() {
        let v = eig.eigenvectors.column(src);
        // fix the sign so the largest-magnitude entry is positive
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (dst, x) in components.row_mut(out).iter_mut().zip(v.iter()) {
            *dst = sign * x;
        }
    }

    Ok(PcaModel {
        components,
        explained_variance: eigenvalues[..r].to_vec(),
        explained_variance_ratio: eigenvalues[..r].iter().map(|ev| ev / total).collect(),
        total_variance: total,
        mean,
        scale,
    })
}

/// Projects centered (and scaled, if the model was standardized) rows onto
/// the model's components.
pub fn pca_transform(model: &PcaModel, data: &Dataset) -> Result<Dataset> {
    if data.d() != model.input_dim() {
        return Err(ClusterError::DimensionMismatch {
            expected: model.input_dim(),
            found: data.d(),
        });
    }
    let r = model.n_components();
    let mut out = Matrix::zeros(data.n(), r);
    let mut buf = vec![0.0; data.d()];
    for (i, row) in data.points.iter_rows().enumerate() {
        for (c, b) in buf.iter_mut().enumerate() {
            *b = row[c] - model.mean[c];
            if let Some(s) = &model.scale {
                *b /= s[c];
            }
        }
        for (j, dst) in out.row_mut(i).iter_mut().enumerate() {
            *dst = model.components.row(j).iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
    let mut ds = Dataset::new(format!("{}-pca{r}", data.name), out)?;
    if let Some(labels) = &data.labels {
        ds = ds.with_labels(labels.clone())?;
    }
    Ok(ds)
}

/// Shuffles `0..n` and cuts it into `j` contiguous blocks whose sizes differ
/// by at most one (the first `n % j` blocks get the extra element).
pub fn subsample_indices<R: Rng + ?Sized>(n: usize, j: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if j == 0 {
        return Err(ClusterError::invalid("number of subsamples must be at least 1"));
    }
    if j > n {
        return Err(ClusterError::TooMany {
            requested: j,
            available: n,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let (base, extra) = (n / j, n % j);
    let mut blocks = Vec::with_capacity(j);
    let mut start = 0;
    for b in 0..j {
        let len = base + usize::from(b < extra);
        blocks.push(perm[start..start + len].to_vec());
        start += len;
    }
    Ok(blocks)
}

pub fn draw_subsamples<R: Rng + ?Sized>(data: &Dataset, j: usize, rng: &mut R) -> Result<Vec<Dataset>> {
    Ok(subsample_indices(data.n(), j, rng)?
        .iter()
        .map(|idx| data.select_rows(idx))
        .collect())
}
