//! Grouped tabular datasets: CSV ingestion, soft-impute completion,
//! standardization and per-group holdout splits.

use std::collections::HashMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Raw CSV contents: a header and string cells. Empty cells are `None`.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<String>>>,
}

impl RawTable {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let mut seen = HashMap::new();
        for name in &header {
            if seen.insert(name.as_str(), ()).is_some() {
                return Err(Error::DuplicateHeader(name.clone()));
            }
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            rows.push(
                record
                    .iter()
                    .map(|c| if c.is_empty() { None } else { Some(c.to_owned()) })
                    .collect(),
            );
        }
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        Ok(RawTable { header, rows })
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    /// True when every non-empty cell of the column parses as a float.
    pub fn is_numeric(&self, col: usize) -> bool {
        self.rows
            .iter()
            .filter_map(|r| r[col].as_deref())
            .all(|v| v.parse::<f64>().is_ok())
    }

    /// Parses the given columns into a matrix plus an observed-mask.
    /// Rows are reported 1-based as they appear after the header.
    pub fn numeric_block(&self, cols: &[usize]) -> Result<(Array2<f64>, Array2<bool>)> {
        let n = self.rows.len();
        let mut values = Array2::<f64>::zeros((n, cols.len()));
        let mut observed = Array2::<bool>::from_elem((n, cols.len()), true);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                match row[c].as_deref() {
                    None => observed[[i, j]] = false,
                    Some(cell) => {
                        let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                            row: i + 1,
                            column: self.header[c].clone(),
                            value: cell.to_owned(),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::NonNumeric {
                                row: i + 1,
                                column: self.header[c].clone(),
                                value: cell.to_owned(),
                            });
                        }
                        values[[i, j]] = v;
                    }
                }
            }
        }
        Ok((values, observed))
    }

    pub fn text_column(&self, col: usize) -> Vec<String> {
        self.rows
            .iter()
            .map(|r| r[col].clone().unwrap_or_default())
            .collect()
    }
}

/// Which CSV columns play which role.
#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub group_col: String,
    pub response_cols: Vec<String>,
    /// `None` selects every column not otherwise claimed.
    pub feature_cols: Option<Vec<String>>,
    /// Carried along verbatim (e.g. a ground-truth label column).
    pub passthrough_cols: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Feature,
    Response,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    pub role: Role,
    pub mean: f64,
    pub sd: f64,
}

/// Per-column (mean, sd) used to map standardized values back to raw units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub columns: Vec<ColumnScale>,
}

impl Standardization {
    pub fn get(&self, name: &str) -> Option<&ColumnScale> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(file)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Maps standardized values of the named columns back to raw units.
    pub fn destandardize_named(&self, names: &[String], values: &[f64]) -> Result<Vec<f64>> {
        if names.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: values.len(),
            });
        }
        let scales = names
            .iter()
            .map(|n| {
                self.get(n)
                    .cloned()
                    .ok_or_else(|| Error::NoStandardization(n.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        destandardize(values, &scales)
    }
}

/// Inverse of standardization: `raw = value * sd + mean` per column.
pub fn destandardize(values: &[f64], scales: &[ColumnScale]) -> Result<Vec<f64>> {
    if values.len() != scales.len() {
        return Err(Error::DimensionMismatch {
            expected: scales.len(),
            got: values.len(),
        });
    }
    Ok(values
        .iter()
        .zip(scales)
        .map(|(v, s)| v * s.sd + s.mean)
        .collect())
}

/// Sample mean and sd (n - 1 denominator) of every column, then the
/// standardized matrix. Fails on the first column with zero variance.
pub fn standardize_columns(m: ArrayView2<f64>) -> std::result::Result<(Array2<f64>, Vec<(f64, f64)>), usize> {
    let n = m.nrows();
    let mut out = m.to_owned();
    let mut moments = Vec::with_capacity(m.ncols());
    for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        if !(sd > 0.0) || sd <= 1e-14 * mean.abs() {
            return Err(j);
        }
        col.mapv_inplace(|v| (v - mean) / sd);
        moments.push((mean, sd));
    }
    Ok((out, moments))
}

/// Standardized design matrix, named responses and per-row group labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Array2<f64>,
    /// One column per response.
    pub responses: Array2<f64>,
    pub group_of: Vec<String>,
    pub feature_names: Vec<String>,
    pub response_names: Vec<String>,
    pub passthrough: Vec<(String, Vec<String>)>,
    /// Observed-mask over `[features | responses]`; `None` means complete.
    pub observed: Option<Array2<bool>>,
    pub standardization: Option<Standardization>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn missing_count(&self) -> usize {
        self.observed
            .as_ref()
            .map_or(0, |m| m.iter().filter(|o| !**o).count())
    }

    pub fn response_index(&self, name: &str) -> Result<usize> {
        self.response_names
            .iter()
            .position(|r| r == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|r| r == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    }

    pub fn passthrough_column(&self, name: &str) -> Option<&[String]> {
        self.passthrough
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    /// Fails when any cell is missing, naming the first one found.
    pub fn require_complete(&self) -> Result<()> {
        if let Some(mask) = &self.observed {
            if let Some(((i, j), _)) = mask.indexed_iter().find(|(_, o)| !**o) {
                let p = self.p();
                let column = if j < p {
                    self.feature_names[j].clone()
                } else {
                    self.response_names[j - p].clone()
                };
                return Err(Error::MissingValue { row: i + 1, column });
            }
        }
        Ok(())
    }

    /// Standardizes every feature and response column to mean 0, sd 1 and
    /// records the original moments.
    pub fn standardize(&self) -> Result<Dataset> {
        self.require_complete()?;
        let (x, fm) = standardize_columns(self.x.view())
            .map_err(|j| Error::ZeroVariance(self.feature_names[j].clone()))?;
        let (responses, rm) = standardize_columns(self.responses.view())
            .map_err(|j| Error::ZeroVariance(self.response_names[j].clone()))?;
        let mut columns = Vec::with_capacity(fm.len() + rm.len());
        for (name, (mean, sd)) in self.feature_names.iter().zip(fm) {
            columns.push(ColumnScale { name: name.clone(), role: Role::Feature, mean, sd });
        }
        for (name, (mean, sd)) in self.response_names.iter().zip(rm) {
            columns.push(ColumnScale { name: name.clone(), role: Role::Response, mean, sd });
        }
        Ok(Dataset {
            x,
            responses,
            standardization: Some(Standardization { columns }),
            ..self.clone()
        })
    }

    /// Rows of the design matrix and one response restricted to `rows`.
    pub fn subset(&self, rows: &[usize], response: usize) -> (Array2<f64>, Array1<f64>) {
        let x = self.x.select(Axis(0), rows);
        let y = rows.iter().map(|&r| self.responses[[r, response]]).collect();
        (x, y)
    }
}

impl Dataset {
    /// Writes `group_col`, passthrough columns, features then responses.
    /// Missing cells are written empty.
    pub fn write_csv(&self, out: impl Write, group_col: &str) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![group_col.to_owned()];
        header.extend(self.passthrough.iter().map(|(n, _)| n.clone()));
        header.extend(self.feature_names.iter().cloned());
        header.extend(self.response_names.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec = vec![self.group_of[i].clone()];
            rec.extend(self.passthrough.iter().map(|(_, v)| v[i].clone()));
            let (xr, yr) = (self.x.row(i), self.responses.row(i));
            for (j, v) in xr.iter().chain(yr.iter()).copied().enumerate() {
                let seen = self.observed.as_ref().is_none_or(|m| m[[i, j]]);
                rec.push(if seen { format_value(v) } else { String::new() });
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

/// Reads a CSV file into a dataset and its group index.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<(Dataset, GroupIndex)> {
    let table = RawTable::read(path)?;
    dataset_from_table(&table, schema)
}

pub fn dataset_from_table(table: &RawTable, schema: &Schema) -> Result<(Dataset, GroupIndex)> {
    if schema.response_cols.is_empty() {
        return Err(Error::InvalidArgument("at least one response column required".into()));
    }
    let group_col = table.column_index(&schema.group_col)?;
    let response_idx = schema
        .response_cols
        .iter()
        .map(|c| table.column_index(c))
        .collect::<Result<Vec<_>>>()?;
    let passthrough_idx = schema
        .passthrough_cols
        .iter()
        .map(|c| table.column_index(c))
        .collect::<Result<Vec<_>>>()?;
    let feature_idx: Vec<usize> = match &schema.feature_cols {
        Some(cols) => cols
            .iter()
            .map(|c| table.column_index(c))
            .collect::<Result<Vec<_>>>()?,
        None => (0..table.header.len())
            .filter(|i| {
                *i != group_col && !response_idx.contains(i) && !passthrough_idx.contains(i)
            })
            .collect(),
    };
    if feature_idx.is_empty() {
        return Err(Error::InvalidArgument("at least one feature column required".into()));
    }
    let mut claimed: Vec<usize> = feature_idx.iter().chain(&response_idx).copied().collect();
    claimed.push(group_col);
    claimed.sort_unstable();
    if claimed.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("a column is assigned more than one role".into()));
    }

    let all_numeric: Vec<usize> = feature_idx.iter().chain(&response_idx).copied().collect();
    let (values, observed) = table.numeric_block(&all_numeric)?;
    let p = feature_idx.len();
    let x = values.slice(ndarray::s![.., ..p]).to_owned();
    let responses = values.slice(ndarray::s![.., p..]).to_owned();

    let group_of = table.text_column(group_col);
    if let Some(row) = table.rows.iter().position(|r| r[group_col].is_none()) {
        return Err(Error::MissingValue { row: row + 1, column: schema.group_col.clone() });
    }
    let gi = GroupIndex::from_labels(&group_of);
    let complete = observed.iter().all(|o| *o);
    let ds = Dataset {
        x,
        responses,
        group_of,
        feature_names: feature_idx.iter().map(|&i| table.header[i].clone()).collect(),
        response_names: schema.response_cols.clone(),
        passthrough: passthrough_idx
            .iter()
            .map(|&i| (table.header[i].clone(), table.text_column(i)))
            .collect(),
        observed: if complete { None } else { Some(observed) },
        standardization: None,
    };
    Ok((ds, gi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub id: String,
    pub rows: Vec<usize>,
}

/// Observation groups (must-link blocks) in first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupIndex {
    pub groups: Vec<Group>,
}

impl GroupIndex {
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut pos: HashMap<&str, usize> = HashMap::new();
        let mut groups: Vec<Group> = Vec::new();
        for (row, label) in labels.iter().enumerate() {
            let label = label.as_ref();
            let g = *pos.entry(label).or_insert_with(|| {
                groups.push(Group { id: label.to_owned(), rows: Vec::new() });
                groups.len() - 1
            });
            groups[g].rows.push(row);
        }
        GroupIndex { groups }
    }

    pub fn m(&self) -> usize {
        self.groups.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.rows.len()).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.groups.iter().map(|g| g.rows.len()).sum()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.id == id)
    }

    /// Expands a per-group label vector to one label per row.
    pub fn expand<T: Copy + Default>(&self, per_group: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); self.n_rows()];
        for (g, label) in self.groups.iter().zip(per_group) {
            for &r in &g.rows {
                out[r] = *label;
            }
        }
        out
    }
}

/// Per-group train/test row lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HoldoutSplit {
    pub train_rows: Vec<Vec<usize>>,
    pub test_rows: Vec<Vec<usize>>,
    pub holdout_fraction: f64,
}

impl HoldoutSplit {
    /// Rows on which a group is scored: held-out rows when there are any,
    /// otherwise every row of the group.
    pub fn eval_rows<'a>(&'a self, gi: &'a GroupIndex, g: usize) -> &'a [usize] {
        if self.test_rows[g].is_empty() {
            &gi.groups[g].rows
        } else {
            &self.test_rows[g]
        }
    }
}

/// Moves `floor(fraction * n_i)` rows of every group into the test set.
pub fn grouped_holdout(gi: &GroupIndex, fraction: f64, seed: u64) -> Result<HoldoutSplit> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidArgument(format!(
            "holdout fraction {fraction} outside [0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_rows = Vec::with_capacity(gi.m());
    let mut test_rows = Vec::with_capacity(gi.m());
    for g in &gi.groups {
        let n = g.rows.len();
        let k = if n <= 1 { 0 } else { (fraction * n as f64).floor() as usize };
        let mut picked = vec![false; n];
        for i in index::sample(&mut rng, n, k) {
            picked[i] = true;
        }
        let (mut test, mut train) = (Vec::with_capacity(k), Vec::with_capacity(n - k));
        for (i, &r) in g.rows.iter().enumerate() {
            if picked[i] { test.push(r) } else { train.push(r) }
        }
        train_rows.push(train);
        test_rows.push(test);
    }
    Ok(HoldoutSplit { train_rows, test_rows, holdout_fraction: fraction })
}

#[derive(Debug, Clone, Copy)]
pub struct ImputeOptions {
    pub lambda: f64,
    /// Keep at most this many singular values; `None` keeps all.
    pub rank_max: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ImputeOptions {
    fn default() -> Self {
        ImputeOptions { lambda: 0.0, rank_max: Some(2), tol: 1e-5, max_iter: 100 }
    }
}

#[derive(Debug, Clone)]
pub struct ImputeOutcome {
    pub matrix: Array2<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `0.5 * ||P_obs(X - Z)||_F^2 + lambda * ||Z||_*`
pub fn soft_impute_objective(x: &Array2<f64>, observed: &Array2<bool>, z: &Array2<f64>, lambda: f64) -> f64 {
    let fit: f64 = ndarray::Zip::from(x)
        .and(z)
        .and(observed)
        .fold(0.0, |acc, a, b, o| if *o { acc + (a - b) * (a - b) } else { acc });
    let nuclear = if lambda > 0.0 { linalg::svd(z.view()).s.sum() } else { 0.0 };
    0.5 * fit + lambda * nuclear
}

/// Matrix completion by iterated SVD with soft-thresholded singular values.
/// Observed entries of the result are copied from `x` unchanged.
pub fn soft_impute(x: &Array2<f64>, observed: &Array2<bool>, opts: &ImputeOptions) -> Result<ImputeOutcome> {
    if x.dim() != observed.dim() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: observed.len() });
    }
    if opts.lambda < 0.0 || !opts.lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda_svd must be a nonnegative number".into()));
    }
    let (n, p) = x.dim();
    let mut z = x.clone();
    for j in 0..p {
        let (sum, count) = (0..n)
            .filter(|&i| observed[[i, j]])
            .fold((0.0, 0usize), |(s, c), i| (s + x[[i, j]], c + 1));
        if count == 0 {
            return Err(Error::AllMissingColumn(j));
        }
        let mean = sum / count as f64;
        for i in 0..n {
            if !observed[[i, j]] {
                z[[i, j]] = mean;
            }
        }
    }
    if observed.iter().all(|o| *o) {
        return Ok(ImputeOutcome { matrix: x.clone(), iterations: 0, converged: true });
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let filled = ndarray::Zip::from(x)
            .and(&z)
            .and(observed)
            .map_collect(|a, b, o| if *o { *a } else { *b });
        let d = linalg::svd(filled.view());
        let keep = opts.rank_max.unwrap_or(usize::MAX);
        let shrunk = Array1::from_iter(
            d.s.iter()
                .enumerate()
                .map(|(i, s)| if i < keep { (s - opts.lambda).max(0.0) } else { 0.0 }),
        );
        let next = d.reconstruct(&shrunk);
        let change = (&next - &z).mapv(|v| v * v).sum().sqrt();
        let scale = z.mapv(|v| v * v).sum().sqrt().max(f64::MIN_POSITIVE);
        z = next;
        if change / scale < opts.tol {
            converged = true;
            break;
        }
    }
    let matrix = ndarray::Zip::from(x)
        .and(&z)
        .and(observed)
        .map_collect(|a, b, o| if *o { *a } else { *b });
    Ok(ImputeOutcome { matrix, iterations, converged })
}

/// Runs `soft_impute` on columns scaled by their observed mean and sd, then
/// maps back. Observed entries are returned bit-for-bit.
pub fn soft_impute_scaled(x: &Array2<f64>, observed: &Array2<bool>, opts: &ImputeOptions) -> Result<ImputeOutcome> {
    if x.dim() != observed.dim() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: observed.len() });
    }
    let (n, p) = x.dim();
    let mut moments = Vec::with_capacity(p);
    for j in 0..p {
        let seen: Vec<f64> = (0..n).filter(|&i| observed[[i, j]]).map(|i| x[[i, j]]).collect();
        if seen.is_empty() {
            return Err(Error::AllMissingColumn(j));
        }
        let mean = seen.iter().sum::<f64>() / seen.len() as f64;
        let var = seen.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (seen.len().max(2) - 1) as f64;
        let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
        moments.push((mean, sd));
    }
    let scaled = Array2::from_shape_fn((n, p), |(i, j)| (x[[i, j]] - moments[j].0) / moments[j].1);
    let mut out = soft_impute(&scaled, observed, opts)?;
    for ((i, j), v) in out.matrix.indexed_iter_mut() {
        *v = if observed[[i, j]] { x[[i, j]] } else { moments[j].0 + moments[j].1 * *v };
    }
    Ok(out)
}

/// Formats a float so that it parses back to the same value.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

/// Writes `table` with numeric columns replaced by `matrix` columns.
pub fn write_table(
    out: &mut impl Write,
    table: &RawTable,
    numeric_cols: &[usize],
    matrix: &Array2<f64>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for (i, row) in table.rows.iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|c| c.clone().unwrap_or_default()).collect();
        for (j, &c) in numeric_cols.iter().enumerate() {
            rec[c] = format_value(matrix[[i, j]]);
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
