//! Mixed numeric/categorical microdata: schema, CSV I/O and the scaled view
//! used for distance computation.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RwnError};

pub const DEFAULT_MISSING: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
            categories: Vec::new(),
        }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            categories: categories.into_iter().map(Into::into).collect(),
        }
    }
}

/// Parse a schema file: a JSON list of `{name, kind, categories?}`.
pub fn read_schema(path: impl AsRef<Path>) -> Result<Vec<ColumnSchema>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| RwnError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_reader(file).map_err(|e| RwnError::Schema(format!("{}: {e}", path.display())))
}

pub fn write_schema(schema: &[ColumnSchema], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(schema).expect("schema serializes");
    std::fs::write(path, json + "\n").map_err(|source| RwnError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One value of the data grid. Categorical cells hold an index into the
/// column's category list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Numeric(f64),
    Categorical(u32),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Numeric(v) => Some(v),
            _ => None,
        }
    }

    /// Bitwise equality, so that `-0.0` and `0.0` are distinguished.
    pub fn identical(&self, other: &Cell) -> bool {
        match (self, other) {
            (Cell::Numeric(a), Cell::Numeric(b)) => a.to_bits() == b.to_bits(),
            _ => self == other,
        }
    }
}

/// Validated n×p microdata, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    cells: Vec<Cell>,
    n: usize,
}

impl Dataset {
    pub fn new(schema: Vec<ColumnSchema>, cells: Vec<Cell>) -> Result<Self> {
        validate_schema(&schema)?;
        let p = schema.len();
        if cells.is_empty() {
            return Err(RwnError::EmptyFile);
        }
        if !cells.len().is_multiple_of(p) {
            return Err(RwnError::ShapeMismatch(format!(
                "{} cells do not fill rows of {p} columns",
                cells.len()
            )));
        }
        for (idx, cell) in cells.iter().enumerate() {
            let col = &schema[idx % p];
            let ok = match (*cell, col.kind) {
                (Cell::Missing, _) => true,
                (Cell::Numeric(v), ColumnKind::Numeric) => v.is_finite(),
                (Cell::Categorical(c), ColumnKind::Categorical) => (c as usize) < col.categories.len(),
                _ => false,
            };
            if !ok {
                return Err(RwnError::Schema(format!(
                    "row {}, column `{}`: cell {cell:?} does not conform to the column",
                    idx / p,
                    col.name
                )));
            }
        }
        let n = cells.len() / p;
        Ok(Self { schema, cells, n })
    }

    /// Build an all-numeric dataset from rows.
    pub fn from_numeric_rows(names: &[&str], rows: &[Vec<f64>]) -> Result<Self> {
        let schema = names.iter().map(|n| ColumnSchema::numeric(*n)).collect();
        let cells = rows.iter().flat_map(|r| r.iter().map(|&v| Cell::Numeric(v))).collect();
        Self::new(schema, cells)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.schema.len()
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[i * self.p() + j]
    }

    pub fn row(&self, i: usize) -> &[Cell] {
        let p = self.p();
        &self.cells[i * p..(i + 1) * p]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn numeric_columns(&self) -> Vec<usize> {
        (0..self.p())
            .filter(|&j| self.schema[j].kind == ColumnKind::Numeric)
            .collect()
    }

    /// Copy of column `j` as optional floats (categorical cells map to `None`).
    pub fn numeric_column(&self, j: usize) -> Vec<Option<f64>> {
        (0..self.n).map(|i| self.cell(i, j).as_f64()).collect()
    }

    pub fn label(&self, j: usize, code: u32) -> &str {
        &self.schema[j].categories[code as usize]
    }

    /// Rows `idx` in the given order, same schema.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let cells = idx.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self::new(self.schema.clone(), cells)
    }

    /// Columns `cols` in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let schema = cols.iter().map(|&j| self.schema[j].clone()).collect();
        let cells = (0..self.n)
            .flat_map(|i| cols.iter().map(move |&j| self.cell(i, j)))
            .collect();
        Self::new(schema, cells)
    }

    pub fn with_cells(&self, cells: Vec<Cell>) -> Result<Self> {
        if cells.len() != self.cells.len() {
            return Err(RwnError::ShapeMismatch(format!(
                "expected {} cells, got {}",
                self.cells.len(),
                cells.len()
            )));
        }
        Self::new(self.schema.clone(), cells)
    }

    /// Bit-exact equality of schema and every cell.
    pub fn identical(&self, other: &Dataset) -> bool {
        self.schema == other.schema
            && self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| a.identical(b))
    }
}

fn validate_schema(schema: &[ColumnSchema]) -> Result<()> {
    if schema.is_empty() {
        return Err(RwnError::Schema("at least one column is required".into()));
    }
    let mut names = HashSet::new();
    for col in schema {
        if !names.insert(col.name.as_str()) {
            return Err(RwnError::Schema(format!("duplicate column name `{}`", col.name)));
        }
        match col.kind {
            ColumnKind::Numeric if !col.categories.is_empty() => {
                return Err(RwnError::Schema(format!(
                    "numeric column `{}` declares categories",
                    col.name
                )))
            }
            ColumnKind::Categorical => {
                let mut seen = HashSet::new();
                for label in &col.categories {
                    if !seen.insert(label) {
                        return Err(RwnError::Schema(format!(
                            "column `{}` lists category `{label}` twice",
                            col.name
                        )));
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub enum SchemaSource {
    Infer,
    Given(Vec<ColumnSchema>),
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub missing: String,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            missing: DEFAULT_MISSING.to_string(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: SchemaSource, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| RwnError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, schema, opts)
}

pub fn read_csv<R: Read>(reader: R, schema: SchemaSource, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(RwnError::EmptyFile);
    }
    let p = header.len();

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |pos| pos.line());
        if rec.len() != p {
            return Err(RwnError::MalformedRow {
                line,
                expected: p,
                found: rec.len(),
            });
        }
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(RwnError::EmptyFile);
    }

    let schema = match schema {
        SchemaSource::Given(schema) => {
            let names: Vec<&str> = schema.iter().map(|c| c.name.as_str()).collect();
            if names != header {
                return Err(RwnError::Schema(format!(
                    "header {header:?} does not match schema columns {names:?}"
                )));
            }
            schema
        }
        SchemaSource::Infer => infer_schema(&header, &records, &opts.missing),
    };
    validate_schema(&schema)?;

    let lookups: Vec<HashMap<&str, u32>> = schema
        .iter()
        .map(|c| {
            c.categories
                .iter()
                .enumerate()
                .map(|(k, l)| (l.as_str(), k as u32))
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(records.len() * p);
    for (line, rec) in &records {
        for (j, token) in rec.iter().enumerate() {
            let col = &schema[j];
            let cell = if token == opts.missing {
                Cell::Missing
            } else {
                match col.kind {
                    ColumnKind::Numeric => match token.trim().parse::<f64>() {
                        Ok(v) if v.is_finite() => Cell::Numeric(v),
                        _ => {
                            return Err(RwnError::UnparseableNumber {
                                line: *line,
                                column: col.name.clone(),
                                token: token.to_string(),
                            })
                        }
                    },
                    ColumnKind::Categorical => match lookups[j].get(token) {
                        Some(&code) => Cell::Categorical(code),
                        None => {
                            return Err(RwnError::UnknownCategory {
                                line: *line,
                                column: col.name.clone(),
                                label: token.to_string(),
                            })
                        }
                    },
                }
            };
            cells.push(cell);
        }
    }
    Dataset::new(schema, cells)
}

/// A column is numeric iff every non-missing token parses as a finite
/// number. Categories are listed in sorted order.
fn infer_schema(header: &[String], records: &[(u64, csv::StringRecord)], missing: &str) -> Vec<ColumnSchema> {
    header
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let tokens = records.iter().map(|(_, r)| &r[j]).filter(|t| *t != missing);
            let numeric = tokens
                .clone()
                .all(|t| t.trim().parse::<f64>().is_ok_and(f64::is_finite));
            if numeric {
                ColumnSchema::numeric(name.clone())
            } else {
                let labels: BTreeSet<&str> = tokens.collect();
                ColumnSchema::categorical(name.clone(), labels)
            }
        })
        .collect()
}

pub fn write_csv(d: &Dataset, path: impl AsRef<Path>, opts: &CsvOptions) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| RwnError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(d, std::io::BufWriter::new(file), opts)
}

pub fn write_csv_to<W: Write>(d: &Dataset, writer: W, opts: &CsvOptions) -> Result<()> {
    for col in d.schema() {
        if col.categories.contains(&opts.missing) {
            return Err(RwnError::Schema(format!(
                "column `{}` has a category equal to the missing sentinel `{}`",
                col.name, opts.missing
            )));
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(d.schema().iter().map(|c| c.name.as_str()))?;
    let mut fields: Vec<String> = Vec::with_capacity(d.p());
    for i in 0..d.n() {
        fields.clear();
        for (j, cell) in d.row(i).iter().enumerate() {
            fields.push(match *cell {
                Cell::Missing => opts.missing.clone(),
                // Display for f64 emits the shortest string that round-trips
                Cell::Numeric(v) => format!("{v}"),
                Cell::Categorical(c) => d.label(j, c).to_string(),
            });
        }
        w.write_record(&fields)?;
    }
    w.flush().map_err(|source| RwnError::Io {
        path: "<csv output>".into(),
        source,
    })?;
    Ok(())
}

/// Per-column affine transform applied before distance computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnScaling {
    Numeric { mean: f64, sd: f64 },
    Categorical,
}

impl ColumnScaling {
    fn apply(&self, v: f64) -> f64 {
        match *self {
            ColumnScaling::Numeric { mean, sd } if sd > 0.0 => (v - mean) / sd,
            ColumnScaling::Numeric { .. } => 0.0,
            ColumnScaling::Categorical => v,
        }
    }
}

/// Numeric columns z-scored with the sample standard deviation; categorical
/// columns kept as category codes and compared by mismatch. Missing cells are
/// stored as NaN.
#[derive(Debug, Clone)]
pub struct StandardizedView {
    n: usize,
    kinds: Vec<ColumnKind>,
    values: Vec<f64>,
    scaling: Vec<ColumnScaling>,
    missing_penalty: Vec<f64>,
}

pub fn standardize(d: &Dataset) -> StandardizedView {
    let scaling = (0..d.p())
        .map(|j| match d.schema()[j].kind {
            ColumnKind::Categorical => ColumnScaling::Categorical,
            ColumnKind::Numeric => {
                let vals: Vec<f64> = d.numeric_column(j).into_iter().flatten().collect();
                let (mean, sd) = mean_sd(&vals);
                ColumnScaling::Numeric { mean, sd }
            }
        })
        .collect();
    StandardizedView::with_scaling(d, scaling).expect("scaling derived from the dataset")
}

/// Sample mean and standard deviation (divisor n-1); `sd = 0` for fewer
/// than two values.
pub fn mean_sd(vals: &[f64]) -> (f64, f64) {
    if vals.is_empty() {
        return (0.0, 0.0);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = vals.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

impl StandardizedView {
    /// Apply an externally supplied scaling, e.g. the original data's scaling
    /// to a perturbed release so both live in the same units.
    pub fn with_scaling(d: &Dataset, scaling: Vec<ColumnScaling>) -> Result<Self> {
        if scaling.len() != d.p() {
            return Err(RwnError::ShapeMismatch(format!(
                "scaling has {} columns, dataset has {}",
                scaling.len(),
                d.p()
            )));
        }
        let kinds: Vec<ColumnKind> = d.schema().iter().map(|c| c.kind).collect();
        for (s, k) in scaling.iter().zip(&kinds) {
            let ok = matches!(
                (s, k),
                (ColumnScaling::Numeric { .. }, ColumnKind::Numeric)
                    | (ColumnScaling::Categorical, ColumnKind::Categorical)
            );
            if !ok {
                return Err(RwnError::ShapeMismatch("scaling kinds do not match the schema".into()));
            }
        }
        let p = d.p();
        let mut values = Vec::with_capacity(d.n() * p);
        for i in 0..d.n() {
            for (j, cell) in d.row(i).iter().enumerate() {
                values.push(match *cell {
                    Cell::Missing => f64::NAN,
                    Cell::Numeric(v) => scaling[j].apply(v),
                    Cell::Categorical(c) => c as f64,
                });
            }
        }
        let mut view = Self {
            n: d.n(),
            kinds,
            values,
            scaling,
            missing_penalty: Vec::new(),
        };
        view.missing_penalty = (0..p).map(|j| view.mean_pair_contribution(j)).collect();
        Ok(view)
    }

    /// Unscaled view: numeric values used as-is.
    pub fn raw(d: &Dataset) -> Self {
        let scaling = d
            .schema()
            .iter()
            .map(|c| match c.kind {
                ColumnKind::Numeric => ColumnScaling::Numeric { mean: 0.0, sd: 1.0 },
                ColumnKind::Categorical => ColumnScaling::Categorical,
            })
            .collect();
        Self::with_scaling(d, scaling).expect("identity scaling matches schema")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.kinds.len()
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    pub fn scaling(&self) -> &[ColumnScaling] {
        &self.scaling
    }

    /// Transformed value, or `None` when the cell is missing.
    pub fn value(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.values[i * self.p() + j];
        (!v.is_nan()).then_some(v)
    }

    pub(crate) fn row_raw(&self, i: usize) -> &[f64] {
        let p = self.p();
        &self.values[i * p..(i + 1) * p]
    }

    /// Squared-distance contribution substituted when either cell of a pair
    /// is missing in column `j`.
    pub fn missing_penalty(&self, j: usize) -> f64 {
        self.missing_penalty[j]
    }

    /// Mean squared contribution of column `j` over all complete pairs, in
    /// closed form: 2·s² for numeric columns and 1 − Σ c(c−1)/(m(m−1)) for
    /// categorical ones.
    fn mean_pair_contribution(&self, j: usize) -> f64 {
        let col: Vec<f64> = (0..self.n).filter_map(|i| self.value(i, j)).collect();
        let m = col.len();
        if m < 2 {
            return 0.0;
        }
        match self.kinds[j] {
            ColumnKind::Numeric => {
                let (_, sd) = mean_sd(&col);
                2.0 * sd * sd
            }
            ColumnKind::Categorical => {
                let mut counts: HashMap<u64, u64> = HashMap::new();
                for v in &col {
                    *counts.entry(v.to_bits()).or_default() += 1;
                }
                let same: u64 = counts.values().map(|c| c * (c - 1)).sum();
                1.0 - same as f64 / (m as f64 * (m as f64 - 1.0))
            }
        }
    }
}
