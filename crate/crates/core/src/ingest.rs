//! Input-output tables and their conversion into economic networks.
//!
//! Tables are CSV: header rows naming the sector columns, one row per
//! sector holding its sales to every column, plus a value-added row and a
//! gross-output row. Sector `i` selling to sector `j` is read as `i` holding
//! a claim on `j`, so after scaling each column by `j`'s inputs plus value
//! added, the flows become the cross-holdings.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::network::{EconomicNetwork, NetworkData, NetworkError};
use crate::rng::stream_rng;
use crate::Scalar;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is empty")]
    Empty,
    #[error("no row labelled {0:?}")]
    MissingRow(String),
    #[error("line {line}: expected {expected} fields, found {got}")]
    Ragged { line: u64, expected: usize, got: usize },
    #[error("line {line}, column {column:?}: {value:?} is not a number")]
    NonNumeric { line: u64, column: String, value: String },
    #[error("row {0:?} appears more than once")]
    DuplicateRow(String),
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("constructed network is invalid: {0}")]
    Invalid(#[from] NetworkError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Layout of the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormatOptions {
    pub delimiter: u8,
    /// Number of header rows; the last one names the columns.
    pub header_rows: usize,
    /// Leading label columns; the first holds the row key.
    pub row_key_columns: usize,
    pub value_added_label: String,
    pub gross_output_label: String,
    /// Columns that are neither sectors nor final demand, such as totals.
    pub skip_column_labels: Vec<String>,
    pub year: Option<String>,
}

impl Default for FormatOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header_rows: 1,
            row_key_columns: 1,
            value_added_label: "VA".into(),
            gross_output_label: "TOT_GO".into(),
            skip_column_labels: vec!["TOT".into()],
            year: None,
        }
    }
}

/// Parsed input-output table. `flows[(i, j)]` is what `i` sells to `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoTable {
    pub labels: Vec<String>,
    pub flows: DenseMatrix<f64>,
    pub value_added: Vec<f64>,
    pub gross_output: Vec<f64>,
    pub year: Option<String>,
}

impl IoTable {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let n = self.n();
        if self.flows.rows() != n || self.flows.cols() != n || self.value_added.len() != n || self.gross_output.len() != n
        {
            return Err(IngestError::InvalidTable("dimensions disagree".into()));
        }
        if let Some(i) = self.gross_output.iter().position(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(IngestError::InvalidTable(format!("gross output of {} is {}", self.labels[i], self.gross_output[i])));
        }
        if self.value_added.iter().chain(self.flows.to_rows().iter().flatten()).any(|x| !x.is_finite()) {
            return Err(IngestError::InvalidTable("non-finite entry".into()));
        }
        Ok(())
    }
}

pub fn load_io_table(path: impl AsRef<Path>, options: &FormatOptions) -> Result<IoTable, IngestError> {
    read_io_table(File::open(path)?, options)
}

pub fn read_io_table(input: impl Read, options: &FormatOptions) -> Result<IoTable, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let records = reader.records().collect::<Result<Vec<_>, _>>()?;
    if records.len() <= options.header_rows || options.header_rows == 0 {
        return Err(IngestError::Empty);
    }
    let header = &records[options.header_rows - 1];
    let width = header.len();
    let keys = options.row_key_columns.max(1);
    let skip: BTreeSet<&str> = options.skip_column_labels.iter().map(String::as_str).collect();
    let columns: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .skip(keys)
        .map(|(c, l)| (c, l.trim().to_string()))
        .filter(|(_, l)| !skip.contains(l.as_str()))
        .collect();
    let index: BTreeMap<&str, usize> = columns.iter().enumerate().map(|(i, (_, l))| (l.as_str(), i)).collect();
    if index.len() != columns.len() {
        return Err(IngestError::InvalidTable("duplicate column label".into()));
    }
    let n = columns.len();

    let mut flows = DenseMatrix::zeros(n, n);
    let mut seen = BTreeSet::new();
    let mut va = None;
    let mut go = None;
    for record in &records[options.header_rows..] {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(IngestError::Ragged { line, expected: width, got: record.len() });
        }
        let key = record[0].trim();
        let target = if key == options.value_added_label {
            Some(&mut va)
        } else if key == options.gross_output_label {
            Some(&mut go)
        } else {
            None
        };
        let row = index.get(key).copied();
        if target.is_none() && row.is_none() {
            continue;
        }
        if !seen.insert(key.to_string()) {
            return Err(IngestError::DuplicateRow(key.to_string()));
        }
        let values = columns
            .iter()
            .map(|(c, label)| {
                let cell = record[*c].trim();
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| IngestError::NonNumeric {
                    line,
                    column: label.clone(),
                    value: cell.to_string(),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        match (target, row) {
            (Some(slot), _) => *slot = Some(values),
            (None, Some(i)) => {
                for (j, v) in values.into_iter().enumerate() {
                    flows[(i, j)] = v;
                }
            }
            (None, None) => unreachable!(),
        }
    }
    let value_added = va.ok_or_else(|| IngestError::MissingRow(options.value_added_label.clone()))?;
    let gross_output = go.ok_or_else(|| IngestError::MissingRow(options.gross_output_label.clone()))?;
    let table = IoTable {
        labels: columns.into_iter().map(|(_, l)| l).collect(),
        flows,
        value_added,
        gross_output,
        year: options.year.clone(),
    };
    table.validate()?;
    Ok(table)
}

/// Writes `table` in the default layout, with a trailing total column.
pub fn write_io_table(out: impl Write, table: &IoTable) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sector".to_string()];
    header.extend(table.labels.iter().cloned());
    header.push("TOT".into());
    w.write_record(&header)?;
    let mut emit = |key: &str, values: &[f64]| -> Result<(), IngestError> {
        let mut row = vec![key.to_string()];
        row.extend(values.iter().map(|v| v.to_string()));
        row.push(values.iter().sum::<f64>().to_string());
        w.write_record(&row)?;
        Ok(())
    };
    for (i, label) in table.labels.iter().enumerate() {
        emit(label, table.flows.row(i))?;
    }
    emit("VA", &table.value_added)?;
    emit("TOT_GO", &table.gross_output)?;
    w.flush()?;
    Ok(())
}

/// Knobs for [`build_network`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildOptions {
    /// Failure cost as a share of value added.
    pub beta_factor: f64,
    /// Nodes whose value added is below this share of the median are dropped.
    pub va_cutoff: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { beta_factor: 0.1, va_cutoff: 1e-6 }
    }
}

/// Column share left for a column without value added.
const NO_VA_COLUMN_SUM: f64 = 1.0 - 1e-6;

/// Cross-holdings from flows: negative flows reversed, columns scaled by
/// inputs plus value added, diagonal cleared.
pub fn cross_holdings(table: &IoTable) -> DenseMatrix<f64> {
    let n = table.n();
    let z = &table.flows;
    let pos = DenseMatrix::from_fn(n, n, |i, j| z[(i, j)].max(0.0) + (-z[(j, i)]).max(0.0));
    let mut c = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let inputs = pos.column_sum(j);
        if inputs <= 0.0 {
            continue;
        }
        let va = table.value_added[j].max(0.0);
        let scale = if va > 0.0 { 1.0 / (inputs + va) } else { NO_VA_COLUMN_SUM / inputs };
        for i in 0..n {
            c[(i, j)] = pos[(i, j)] * scale;
        }
    }
    for i in 0..n {
        c[(i, i)] = 0.0;
    }
    c
}

/// Indices kept after dropping nodes with negligible value added.
pub fn kept_nodes(table: &IoTable, va_cutoff: f64) -> Vec<usize> {
    let mut sorted = table.value_added.clone();
    sorted.sort_by(f64::total_cmp);
    let median = match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
    };
    let floor = va_cutoff * median;
    (0..table.n()).filter(|&i| table.value_added[i] >= floor).collect()
}

/// Network with one asset per sector priced at gross output, thresholds
/// at the no-default market value minus value added, and failure costs
/// proportional to value added.
pub fn build_network<T: Scalar>(table: &IoTable, options: &BuildOptions) -> Result<EconomicNetwork<T>, IngestError> {
    table.validate()?;
    if !(options.beta_factor.is_finite() && options.beta_factor >= 0.0) {
        return Err(IngestError::InvalidTable(format!("beta factor {} must be >= 0", options.beta_factor)));
    }
    let keep = kept_nodes(table, options.va_cutoff);
    if keep.is_empty() {
        return Err(IngestError::InvalidTable("no node survives the value-added cutoff".into()));
    }
    let n = keep.len();
    let full = cross_holdings(table);
    let c = DenseMatrix::from_fn(n, n, |i, j| T::of(full[(keep[i], keep[j])]));
    let p: Vec<T> = keep.iter().map(|&i| T::of(table.gross_output[i])).collect();
    let va: Vec<T> = keep.iter().map(|&i| T::of(table.value_added[i].max(0.0))).collect();
    let labels: Vec<String> = keep.iter().map(|&i| table.labels[i].clone()).collect();
    let beta: Vec<T> = va.iter().map(|&v| v * T::of(options.beta_factor)).collect();

    let draft = NetworkData::new(c, DenseMatrix::identity(n), p, vec![T::zero(); n], beta).with_labels(labels);
    let draft = EconomicNetwork::new(draft)?;
    let market = draft.market_values(&BTreeSet::new())?;
    let mut data = draft.into_data();
    data.theta = market.iter().zip(&va).map(|(&v, &a)| (v - a).max(T::zero())).collect();
    Ok(EconomicNetwork::new(data)?)
}

/// Bundled 200-sector synthetic table, generated by `synthetic_table(200, 1)`.
pub const SYNTHETIC_200_CSV: &str = include_str!("../fixtures/synthetic_200.csv");

pub fn bundled_fixture() -> IoTable {
    let options = FormatOptions { year: Some("synthetic-1".into()), ..FormatOptions::default() };
    read_io_table(SYNTHETIC_200_CSV.as_bytes(), &options).expect("bundled fixture parses")
}

/// Three-sector table used in smoke tests.
pub fn fixture_three_sector() -> IoTable {
    IoTable {
        labels: vec!["AGR".into(), "MAN".into(), "SRV".into()],
        flows: DenseMatrix::from_rows(vec![vec![5.0, 30.0, 10.0], vec![20.0, 40.0, 35.0], vec![15.0, 25.0, 50.0]])
            .expect("rectangular"),
        value_added: vec![60.0, 80.0, 120.0],
        gross_output: vec![100.0, 175.0, 215.0],
        year: Some("fixture".into()),
    }
}

/// Random table with `n` sectors. Each sector buys from about a fifth of
/// the others with log-normal volumes, and its value added is a random
/// share of gross output.
pub fn synthetic_table(n: usize, seed: u64) -> IoTable {
    let mut rng = stream_rng(seed, 0);
    let volume = LogNormal::new(0.0, 1.5).expect("valid parameters");
    let scale = LogNormal::new(3.0, 1.0).expect("valid parameters");
    let mut flows = DenseMatrix::zeros(n, n);
    let mut value_added = Vec::with_capacity(n);
    let mut gross_output = Vec::with_capacity(n);
    for j in 0..n {
        let size: f64 = scale.sample(&mut rng);
        let mut inputs = 0.0;
        for i in 0..n {
            if i != j && rng.random_bool(0.2) {
                let v = size * volume.sample(&mut rng);
                flows[(i, j)] = v;
                inputs += v;
            }
        }
        let share: f64 = rng.random_range(0.1..0.6);
        let va = if inputs > 0.0 { inputs * share / (1.0 - share) } else { size };
        value_added.push(va);
        gross_output.push(inputs + va);
    }
    IoTable {
        labels: (0..n).map(|i| format!("S{i:03}")).collect(),
        flows,
        value_added,
        gross_output,
        year: Some(format!("synthetic-{seed}")),
    }
}
