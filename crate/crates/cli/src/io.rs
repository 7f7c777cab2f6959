//! Comma-separated input with a header row.
//!
//! Numeric columns must parse to finite numbers. Categorical columns are
//! reference-coded: the alphabetically first level is the reference and
//! every other level `l` of column `c` becomes an indicator `c[l]`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use zigev_core::model::{validate_spec, Covariate, Dataset, ModelSpec, ValidationReport};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, names: &[&String], path: &Path) -> CliResult<Vec<usize>> {
        let missing: Vec<&str> = names
            .iter()
            .filter(|n| self.column(n).is_none())
            .map(|n| n.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(CliError::parse(path, format!("missing column(s): {}", missing.join(", "))));
        }
        Ok(names.iter().map(|n| self.column(n).expect("checked")).collect())
    }
}

/// Reads a header plus zero or more records.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::parse(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(CliError::parse(path, "empty file: no header row"));
    }
    let mut seen = BTreeSet::new();
    for h in &headers {
        if !seen.insert(h) {
            return Err(CliError::parse(path, format!("duplicate header '{h}'")));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::parse(path, e.to_string()))?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(Table { headers, rows })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnCoding {
    Numeric,
    /// Sorted levels; the first is the reference.
    Categorical { levels: Vec<String> },
}

/// How source columns map onto design-matrix columns. Saved with every fit
/// so new rows are coded exactly like the training data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub x_columns: Vec<String>,
    pub z_columns: Vec<String>,
    pub codings: BTreeMap<String, ColumnCoding>,
}

impl Design {
    fn covariates(&self, columns: &[String]) -> Vec<Covariate> {
        let mut out = vec![Covariate::intercept()];
        for c in columns {
            match &self.codings[c] {
                ColumnCoding::Numeric => out.push(Covariate::continuous(c.clone())),
                ColumnCoding::Categorical { levels } => {
                    out.extend(levels.iter().skip(1).map(|l| Covariate::categorical(format!("{c}[{l}]"))))
                }
            }
        }
        out
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec::new(self.covariates(&self.x_columns), self.covariates(&self.z_columns))
    }

    fn matrix(&self, columns: &[String], table: &Table, path: &Path) -> CliResult<Array2<f64>> {
        let width = self.covariates(columns).len();
        let mut m = Array2::<f64>::zeros((table.rows.len(), width));
        let idx = table.require(&columns.iter().collect::<Vec<_>>(), path)?;
        for (r, row) in table.rows.iter().enumerate() {
            m[[r, 0]] = 1.0;
            let mut j = 1;
            for (c, &ci) in columns.iter().zip(&idx) {
                let cell = &row[ci];
                match &self.codings[c] {
                    ColumnCoding::Numeric => {
                        m[[r, j]] = parse_number(cell, r, c, path)?;
                        j += 1;
                    }
                    ColumnCoding::Categorical { levels } => {
                        let pos = levels.iter().position(|l| l == cell).ok_or_else(|| {
                            CliError::parse(
                                path,
                                format!("row {}, column '{c}': unknown level '{cell}'", r + 1),
                            )
                        })?;
                        if pos > 0 {
                            m[[r, j + pos - 1]] = 1.0;
                        }
                        j += levels.len() - 1;
                    }
                }
            }
        }
        Ok(m)
    }

    /// X and Z design matrices (intercepts included) for the rows of `table`.
    pub fn matrices(&self, table: &Table, path: &Path) -> CliResult<(Array2<f64>, Array2<f64>)> {
        Ok((
            self.matrix(&self.x_columns, table, path)?,
            self.matrix(&self.z_columns, table, path)?,
        ))
    }
}

fn parse_number(cell: &str, row: usize, column: &str, path: &Path) -> CliResult<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::parse(
            path,
            format!("row {}, column '{column}': cannot parse '{cell}' as a finite number", row + 1),
        )),
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    pub spec: ModelSpec,
    pub design: Design,
    pub report: ValidationReport,
}

impl Loaded {
    /// In strict mode a failed identifiability check is an error; otherwise
    /// it comes back as a warning message.
    pub fn check(&self, strict: bool) -> CliResult<Option<String>> {
        match (self.report.passed, strict) {
            (true, _) => Ok(None),
            (false, true) => Err(CliError::Validation(self.report.to_string())),
            (false, false) => Ok(Some(format!("warning: {}", self.report))),
        }
    }
}

/// Loads a dataset and builds its model spec. Columns listed in
/// `categorical` are reference-coded, all others are numeric.
pub fn load_dataset(
    path: &Path,
    response: &str,
    x_columns: &[String],
    z_columns: &[String],
    categorical: &[String],
) -> CliResult<Loaded> {
    let table = read_table(path)?;
    if table.rows.is_empty() {
        return Err(CliError::parse(path, "empty file: no data rows"));
    }
    let response_name = response.to_string();
    let mut wanted: Vec<&String> = vec![&response_name];
    wanted.extend(x_columns.iter().chain(z_columns).chain(categorical));
    table.require(&wanted, path)?;

    let mut codings = BTreeMap::new();
    for c in x_columns.iter().chain(z_columns) {
        let coding = if categorical.contains(c) {
            let ci = table.column(c).expect("checked");
            let levels: BTreeSet<&String> = table.rows.iter().map(|r| &r[ci]).collect();
            ColumnCoding::Categorical {
                levels: levels.into_iter().cloned().collect(),
            }
        } else {
            ColumnCoding::Numeric
        };
        codings.insert(c.clone(), coding);
    }
    let design = Design {
        x_columns: x_columns.to_vec(),
        z_columns: z_columns.to_vec(),
        codings,
    };

    let yi = table.column(response).expect("checked");
    let y = table
        .rows
        .iter()
        .enumerate()
        .map(|(r, row)| match row[yi].parse::<f64>() {
            Ok(0.0) => Ok(0u8),
            Ok(1.0) => Ok(1u8),
            _ => Err(CliError::parse(
                path,
                format!("row {}, column '{response}': response '{}' is not 0 or 1", r + 1, row[yi]),
            )),
        })
        .collect::<CliResult<Vec<u8>>>()?;
    let (x, z) = design.matrices(&table, path)?;
    let dataset = Dataset::new(y, x, z)?;
    let spec = design.spec();
    let report = validate_spec(&spec);
    Ok(Loaded {
        dataset,
        spec,
        design,
        report,
    })
}
