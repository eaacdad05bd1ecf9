//! KPI tables as ingested: named numeric columns with explicit missing cells.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{KpiError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Feature,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub role: ColumnRole,
    #[serde(default)]
    pub unit: Option<String>,
}

impl ColumnSchema {
    pub fn feature(name: impl Into<String>) -> Self {
        Self { name: name.into(), role: ColumnRole::Feature, unit: None }
    }

    pub fn target(name: impl Into<String>) -> Self {
        Self { name: name.into(), role: ColumnRole::Target, unit: None }
    }
}

/// A cell is `None` when the value is missing.
pub type Cell = Option<f64>;

/// Ordered KPI records. Construction does not enforce invariants; call
/// [`Dataset::validate`] to check them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: Vec<ColumnSchema>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    EmptyName,
    DuplicateName,
    MultipleTargets,
    RowWidth,
    TargetNotBinary,
    NonFinite,
}

impl Rule {
    pub fn describe(self) -> &'static str {
        match self {
            Rule::EmptyName => "column name is empty",
            Rule::DuplicateName => "column name is not unique",
            Rule::MultipleTargets => "more than one target column",
            Rule::RowWidth => "row width differs from schema width",
            Rule::TargetNotBinary => "target not in {0,1}",
            Rule::NonFinite => "non-finite value",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub row: Option<usize>,
    pub column: Option<String>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.describe())?;
        if let Some(row) = self.row {
            write!(f, " at row {row}")?;
        }
        if let Some(col) = &self.column {
            write!(f, " in column {col:?}")?;
        }
        Ok(())
    }
}

impl Dataset {
    pub fn new(schema: Vec<ColumnSchema>, rows: Vec<Vec<Cell>>) -> Self {
        Self { schema, rows }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.schema.len()
    }

    pub fn target_index(&self) -> Option<usize> {
        self.schema.iter().position(|c| c.role == ColumnRole::Target)
    }

    pub fn feature_indices(&self) -> Vec<usize> {
        self.schema.iter().enumerate().filter(|(_, c)| c.role == ColumnRole::Feature).map(|(i, _)| i).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices().into_iter().map(|i| self.schema[i].name.clone()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|c| c.name == name)
    }

    pub fn column(&self, index: usize) -> impl Iterator<Item = Cell> + '_ {
        self.rows.iter().map(move |r| r.get(index).copied().flatten())
    }

    /// Missing-cell count per schema column.
    pub fn null_counts(&self) -> Vec<usize> {
        (0..self.schema.len()).map(|j| self.column(j).filter(Option::is_none).count()).collect()
    }

    /// Checks every dataset invariant. An empty result means the dataset is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for col in &self.schema {
            if col.name.trim().is_empty() {
                out.push(Violation { row: None, column: Some(col.name.clone()), rule: Rule::EmptyName });
            } else if !seen.insert(col.name.as_str()) {
                out.push(Violation { row: None, column: Some(col.name.clone()), rule: Rule::DuplicateName });
            }
        }
        let targets: Vec<_> = self.schema.iter().filter(|c| c.role == ColumnRole::Target).collect();
        if targets.len() > 1 {
            for t in &targets[1..] {
                out.push(Violation { row: None, column: Some(t.name.clone()), rule: Rule::MultipleTargets });
            }
        }

        let width = self.schema.len();
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != width {
                out.push(Violation { row: Some(i), column: None, rule: Rule::RowWidth });
            }
            for (j, cell) in row.iter().enumerate().take(width) {
                let Some(v) = cell else { continue };
                let name = Some(self.schema[j].name.clone());
                if !v.is_finite() {
                    out.push(Violation { row: Some(i), column: name, rule: Rule::NonFinite });
                } else if self.schema[j].role == ColumnRole::Target && *v != 0.0 && *v != 1.0 {
                    out.push(Violation { row: Some(i), column: name, rule: Rule::TargetNotBinary });
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a CSV with a header row. Empty fields and `NaN` become missing.
    ///
    /// Without a `schema`, the last column is the target and the rest are
    /// features. With one, roles and units are taken from the matching
    /// schema entries and unlisted columns default to features.
    pub fn from_csv<R: Read>(reader: R, schema: Option<&[ColumnSchema]>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            return Err(KpiError::InvalidDataset("CSV has no header row".into()));
        }

        let columns = match schema {
            None => {
                let last = headers.len() - 1;
                headers
                    .iter()
                    .enumerate()
                    .map(
                        |(i, h)| {
                            if i == last {
                                ColumnSchema::target(h.clone())
                            } else {
                                ColumnSchema::feature(h.clone())
                            }
                        },
                    )
                    .collect::<Vec<_>>()
            }
            Some(sidecar) => {
                for entry in sidecar {
                    if !headers.contains(&entry.name) {
                        return Err(KpiError::UnknownColumn(entry.name.clone()));
                    }
                }
                headers
                    .iter()
                    .map(|h| {
                        sidecar
                            .iter()
                            .find(|c| &c.name == h)
                            .cloned()
                            .unwrap_or_else(|| ColumnSchema::feature(h.clone()))
                    })
                    .collect()
            }
        };

        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let mut row = Vec::with_capacity(columns.len());
            for (j, field) in record.iter().enumerate() {
                row.push(parse_cell(field).ok_or_else(|| {
                    KpiError::InvalidDataset(format!(
                        "row {i}, column {:?}: cannot parse {field:?} as a number",
                        columns[j].name
                    ))
                })?);
            }
            rows.push(row);
        }
        Ok(Self { schema: columns, rows })
    }
}

fn parse_cell(field: &str) -> Option<Cell> {
    if field.is_empty() || field.eq_ignore_ascii_case("nan") {
        return Some(None);
    }
    let v: f64 = field.parse().ok()?;
    v.is_finite().then_some(Some(v))
}

/// Dense row-major design matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
    feature_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, feature_names: Vec<String>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = feature_names.len();
        if n_rows == 0 || n_cols == 0 {
            return Err(KpiError::InvalidArgument("feature matrix must be at least 1x1".into()));
        }
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            if row.len() != n_cols {
                return Err(KpiError::WidthMismatch { expected: n_cols, got: row.len() });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(KpiError::InvalidArgument("feature matrix entries must be finite".into()));
            }
            values.extend(row);
        }
        Ok(Self { n_rows, n_cols, values, feature_names })
    }

    /// Builds a matrix with generated names `x0, x1, ...`.
    pub fn from_unnamed(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        Self::from_rows(rows, (0..p).map(|j| format!("x{j}")).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self { n_rows: indices.len(), n_cols: self.n_cols, values, feature_names: self.feature_names.clone() }
    }

    /// Applies `f(column, value)` to every entry.
    pub(crate) fn map_entries(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let n_cols = self.n_cols;
        let values = self.values.iter().enumerate().map(|(k, &v)| f(k % n_cols, v)).collect();
        Self { values, ..self.clone() }
    }
}

/// Binary labels aligned with a [`FeatureMatrix`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelVector(Vec<u8>);

impl LabelVector {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(KpiError::InvalidArgument(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self(labels))
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, class: u8) -> usize {
        self.0.iter().filter(|&&l| l == class).count()
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self(indices.iter().map(|&i| self.0[i]).collect())
    }
}
