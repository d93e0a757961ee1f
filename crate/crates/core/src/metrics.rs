//! Stress-test reports: default fractions under a range of intervention
//! budgets, tail value at risk, and histogram tables.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::infmax::{Algorithm, InfmaxError};
use crate::influence::{reduce_to_influence, InfluenceError, ThresholdModel};
use crate::linalg::DenseMatrix;
use crate::network::{EconomicNetwork, EquilibriumMode, NetworkError};
use crate::rng::mix;
use crate::scenarios::{apply_shock, ScenarioError};
use crate::Scalar;

/// Tail fractions reported by default.
pub const DEFAULT_QUANTILES: [f64; 5] = [0.1, 0.2, 0.4, 0.6, 1.0];

/// Histogram bin width used unless configured.
pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no scenarios to aggregate")]
    Empty,
    #[error("paired samples differ in length: {0} vs {1}")]
    Length(usize, usize),
    #[error("quantile {0} not in (0, 1]")]
    Quantile(f64),
    #[error("budget fraction {0} must be finite and nonnegative")]
    Budget(f64),
    #[error("bin width {0} must be in (0, 1]")]
    BinWidth(f64),
    #[error("scenario {scenario}: {source}")]
    Scenario { scenario: usize, source: Box<MetricsError> },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Influence(#[from] InfluenceError),
    #[error(transparent)]
    Infmax(#[from] InfmaxError),
    #[error(transparent)]
    Shock(#[from] ScenarioError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Value at risk of `baseline` at tail fraction `q`: the `ceil(q N)`-th
/// largest sample.
pub fn value_at_risk(baseline: &[f64], q: f64) -> Result<f64, MetricsError> {
    if baseline.is_empty() {
        return Err(MetricsError::Empty);
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(MetricsError::Quantile(q));
    }
    let mut sorted = baseline.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Mean of `samples` over the scenarios whose `baseline` reaches the
/// value at risk at tail fraction `q`. With `q = 1` this is the plain mean.
pub fn tvar(samples: &[f64], baseline: &[f64], q: f64) -> Result<f64, MetricsError> {
    if samples.len() != baseline.len() {
        return Err(MetricsError::Length(samples.len(), baseline.len()));
    }
    let var = value_at_risk(baseline, q)?;
    let tail: Vec<f64> = samples.iter().zip(baseline).filter(|(_, &b)| b >= var).map(|(&s, _)| s).collect();
    if tail.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Provenance recorded with every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub model: ThresholdModel,
    pub replicates: usize,
    pub firms: usize,
    pub scenarios: usize,
    pub total_assets: f64,
    /// Free-form settings of the caller, such as the shock model.
    #[serde(default)]
    pub extra: serde_json::Value,
}

/// Settings of [`budget_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Budgets as shares of the unshocked total asset value.
    pub budgets: Vec<f64>,
    pub algorithm: Algorithm,
    pub model: ThresholdModel,
    pub replicates: usize,
    pub seed: u64,
}

/// Per-scenario default fractions at each budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressReport {
    pub budgets: Vec<f64>,
    /// `fractions[s][b]`: default fraction of scenario `s` under budget `b`.
    pub fractions: Vec<Vec<f64>>,
    pub metadata: ReportMetadata,
}

/// One cell of the TVaR table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvarEntry {
    pub q: f64,
    pub budget: f64,
    pub tvar: f64,
    /// Percentage drop relative to the zero budget, when one is present.
    pub reduction_pct: Option<f64>,
}

impl StressReport {
    pub fn scenarios(&self) -> usize {
        self.fractions.len()
    }

    /// Default fractions of every scenario under budget column `b`.
    pub fn column(&self, b: usize) -> Vec<f64> {
        self.fractions.iter().map(|row| row[b]).collect()
    }

    /// Column of the zero budget, if the sweep included it.
    pub fn baseline_column(&self) -> Option<usize> {
        self.budgets.iter().position(|&b| b == 0.0)
    }

    /// TVaR for every `(q, budget)` pair, conditioning on the zero-budget tail.
    pub fn tvar_table(&self, quantiles: &[f64]) -> Result<Vec<TvarEntry>, MetricsError> {
        let base_col = self.baseline_column();
        let baseline = match base_col {
            Some(b) => self.column(b),
            None => return Err(MetricsError::Budget(0.0)),
        };
        let mut out = Vec::new();
        for &q in quantiles {
            let base = tvar(&baseline, &baseline, q)?;
            for (b, &budget) in self.budgets.iter().enumerate() {
                let value = tvar(&self.column(b), &baseline, q)?;
                let reduction_pct = (base > 0.0).then(|| 100.0 * (base - value) / base);
                out.push(TvarEntry { q, budget, tvar: value, reduction_pct });
            }
        }
        Ok(out)
    }
}

/// Solves every shocked scenario, optimizes an intervention at each budget
/// and records the resulting default fractions.
///
/// Budgets are visited in increasing order and a budget's result is never
/// worse than the best plan found at a smaller budget, since that plan is
/// still affordable.
pub fn budget_sweep<T: Scalar>(
    net: &EconomicNetwork<T>,
    shocks: &DenseMatrix<T>,
    config: &SweepConfig,
) -> Result<StressReport, MetricsError> {
    if let Some(&b) = config.budgets.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(MetricsError::Budget(b));
    }
    let total: T = net.prices().iter().copied().sum();
    let mut order: Vec<usize> = (0..config.budgets.len()).collect();
    order.sort_by(|&a, &b| config.budgets[a].total_cmp(&config.budgets[b]));
    let fractions = (0..shocks.rows())
        .into_par_iter()
        .map(|s| {
            sweep_scenario(net, shocks.row(s), total, &order, config, mix(config.seed, s as u64))
                .map_err(|e| MetricsError::Scenario { scenario: s, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StressReport {
        budgets: config.budgets.clone(),
        fractions,
        metadata: ReportMetadata {
            seed: config.seed,
            algorithm: config.algorithm,
            model: config.model,
            replicates: config.replicates,
            firms: net.n(),
            scenarios: shocks.rows(),
            total_assets: total.as_f64(),
            extra: serde_json::Value::Null,
        },
    })
}

fn sweep_scenario<T: Scalar>(
    net: &EconomicNetwork<T>,
    gross: &[T],
    total: T,
    order: &[usize],
    config: &SweepConfig,
    seed: u64,
) -> Result<Vec<f64>, MetricsError> {
    let n = net.n().max(1) as f64;
    let shocked = apply_shock(net, gross)?;
    let baseline = shocked.solve_equilibrium(EquilibriumMode::BestCase)?;
    let mut out = vec![baseline.default_count() as f64 / n; config.budgets.len()];
    if baseline.failed.is_empty() {
        return Ok(out);
    }
    let inst = reduce_to_influence(&shocked, &baseline)?;
    let mut best = baseline.default_count();
    for &b in order {
        let budget = total * T::of(config.budgets[b]);
        if budget > T::zero() {
            let plan = config.algorithm.run(&inst, &config.model, budget, config.replicates, seed)?;
            let after = shocked.apply_intervention(&plan.firm_payments(&inst, shocked.n()))?;
            best = best.min(after.default_count());
        }
        out[b] = best as f64 / n;
    }
    Ok(out)
}

/// Histogram with equal bins on `[0, 1]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: impl IntoIterator<Item = f64>, bin_width: f64) -> Result<Self, MetricsError> {
        let bins = bin_count(bin_width)?;
        let mut counts = vec![0; bins];
        for v in values {
            // nudge so values on a bin edge are not lost to rounding
            let i = ((v.clamp(0.0, 1.0) * bins as f64) + 1e-9).floor() as usize;
            counts[i.min(bins - 1)] += 1;
        }
        Ok(Self { bin_width, counts })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let n = self.bins() as f64;
        (i as f64 / n, (i + 1) as f64 / n)
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

fn bin_count(width: f64) -> Result<usize, MetricsError> {
    if !(width > 0.0 && width <= 1.0) {
        return Err(MetricsError::BinWidth(width));
    }
    Ok(((1.0 / width).round() as usize).max(1))
}

fn header_line(out: &mut impl Write, meta: &ReportMetadata) -> Result<(), MetricsError> {
    writeln!(out, "# {}", serde_json::to_string(meta)?)?;
    Ok(())
}

fn csv_file(path: &Path, meta: &ReportMetadata) -> Result<csv::Writer<BufWriter<File>>, MetricsError> {
    let mut file = BufWriter::new(File::create(path)?);
    header_line(&mut file, meta)?;
    Ok(csv::Writer::from_writer(file))
}

/// Files written by [`write_report`].
pub const REPORT_FILES: [&str; 5] =
    ["defaults.csv", "tvar.csv", "hist_defaults.csv", "hist_2d.csv", "hist_averted.csv"];

/// Writes the per-scenario table, the TVaR table and the histogram tables
/// into `dir`. Each CSV starts with a `# {metadata}` line.
pub fn write_report(
    dir: impl AsRef<Path>,
    report: &StressReport,
    quantiles: &[f64],
    bin_width: f64,
) -> Result<Vec<PathBuf>, MetricsError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let meta = &report.metadata;
    let paths: Vec<PathBuf> = REPORT_FILES.iter().map(|f| dir.join(f)).collect();

    let mut w = csv_file(&paths[0], meta)?;
    let mut header = vec!["scenario".to_string()];
    header.extend(report.budgets.iter().map(|b| format!("budget_{b}")));
    w.write_record(&header)?;
    for (s, row) in report.fractions.iter().enumerate() {
        let mut rec = vec![s.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv_file(&paths[1], meta)?;
    w.write_record(["q", "budget", "tvar", "reduction_pct"])?;
    if report.baseline_column().is_some() && report.scenarios() > 0 {
        for e in report.tvar_table(quantiles)? {
            let pct = e.reduction_pct.map(|p| p.to_string()).unwrap_or_default();
            w.write_record([e.q.to_string(), e.budget.to_string(), e.tvar.to_string(), pct])?;
        }
    }
    w.flush()?;

    let hists = (0..report.budgets.len())
        .map(|b| Histogram::new(report.column(b), bin_width))
        .collect::<Result<Vec<_>, _>>()?;
    let bins = bin_count(bin_width)?;

    let mut w = csv_file(&paths[2], meta)?;
    w.write_record(["budget", "bin_lo", "bin_hi", "count", "density"])?;
    for (b, h) in hists.iter().enumerate() {
        for i in 0..h.bins() {
            let (lo, hi) = h.edges(i);
            let density = if report.scenarios() == 0 { 0.0 } else { h.counts[i] as f64 / (report.scenarios() as f64 * (hi - lo)) };
            w.write_record([
                report.budgets[b].to_string(),
                lo.to_string(),
                hi.to_string(),
                h.counts[i].to_string(),
                density.to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv_file(&paths[3], meta)?;
    let mut header = vec!["bin_lo".to_string(), "bin_hi".to_string()];
    header.extend(report.budgets.iter().map(|b| format!("budget_{b}")));
    w.write_record(&header)?;
    for i in 0..bins {
        let (lo, hi) = hists.first().map_or((0.0, 0.0), |h| h.edges(i));
        let mut rec = vec![lo.to_string(), hi.to_string()];
        rec.extend(hists.iter().map(|h| h.counts[i].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv_file(&paths[4], meta)?;
    w.write_record(["budget", "bin_lo", "bin_hi", "count"])?;
    if let Some(base) = report.baseline_column() {
        for (b, &budget) in report.budgets.iter().enumerate() {
            if b == base {
                continue;
            }
            let averted = report.fractions.iter().map(|row| row[base] - row[b]);
            let h = Histogram::new(averted, bin_width)?;
            for i in 0..h.bins() {
                let (lo, hi) = h.edges(i);
                w.write_record([budget.to_string(), lo.to_string(), hi.to_string(), h.counts[i].to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(paths)
}
