use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::maxshock::{find_max_shock, ShockHeuristic};
use super::shocks::{apply_shock, ShockSpec};
use super::ScenarioError;
use crate::linalg::DenseMatrix;
use crate::network::{EconomicNetwork, EquilibriumMode};
use crate::Scalar;

/// Shift of the common factor in adversarial draws.
const COMMON_SHIFT: f64 = -1.0;

/// How much of a batch to draw from the shifted proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversarialSpec {
    /// Share of scenarios drawn from the shifted proposal, in `[0, 1]`.
    pub fraction: f64,
    /// Budget of the max-shock search, as a share of total asset value.
    pub budget_fraction: f64,
    pub heuristic: ShockHeuristic,
}

impl Default for AdversarialSpec {
    fn default() -> Self {
        Self { fraction: 0.0, budget_fraction: 0.01, heuristic: ShockHeuristic::Discount }
    }
}

/// Gross returns per scenario with likelihood-ratio weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBatch<T> {
    pub gross: DenseMatrix<T>,
    /// Nominal density over proposal density; averages of `weight * h`
    /// are unbiased for the nominal mean of `h`.
    pub weights: Vec<f64>,
    pub adversarial: Vec<bool>,
    /// Mean shift of `(z, e_1..e_m)` in the adversarial component.
    pub shift: Vec<f64>,
}

impl<T: Scalar> ScenarioBatch<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Scenario batch from a two-component mixture: the nominal factor model
/// and a copy whose factors are shifted so the assets picked by a max-shock
/// search lose everything on average. The first `round(fraction * count)`
/// scenarios come from the shifted component; with fraction 0 the batch is
/// plain Monte Carlo with unit weights.
pub fn importance_weighted_batch<T: Scalar>(
    net: &EconomicNetwork<T>,
    spec: &ShockSpec,
    adversarial: &AdversarialSpec,
) -> Result<ScenarioBatch<T>, ScenarioError> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&adversarial.fraction) {
        return Err(ScenarioError::InvalidSpec(format!("adversarial fraction {} not in [0, 1]", adversarial.fraction)));
    }
    let m = net.m();
    let n_adv = (adversarial.fraction * spec.count as f64).round() as usize;
    let shift = if n_adv == 0 || spec.sigma == 0.0 { vec![0.0; m + 1] } else { shift_for(net, spec, adversarial)? };
    let alpha = if spec.count == 0 { 0.0 } else { n_adv as f64 / spec.count as f64 };
    let shift_norm = shift.iter().map(|x| x * x).sum::<f64>();

    let mut gross = DenseMatrix::zeros(spec.count, m);
    let mut weights = Vec::with_capacity(spec.count);
    for s in 0..spec.count {
        let mut z = spec.factors(s, m);
        if s < n_adv {
            z.iter_mut().zip(&shift).for_each(|(z, mu)| *z += mu);
        }
        let tilt = z.iter().zip(&shift).map(|(z, mu)| z * mu).sum::<f64>() - shift_norm / 2.0;
        weights.push(if shift_norm == 0.0 { 1.0 } else { 1.0 / ((1.0 - alpha) + alpha * tilt.exp()) });
        for (i, r) in spec.returns_from(&z).into_iter().enumerate() {
            gross[(s, i)] = T::of(spec.gross(r));
        }
    }
    Ok(ScenarioBatch { gross, weights, adversarial: (0..spec.count).map(|s| s < n_adv).collect(), shift })
}

fn shift_for<T: Scalar>(
    net: &EconomicNetwork<T>,
    spec: &ShockSpec,
    adversarial: &AdversarialSpec,
) -> Result<Vec<f64>, ScenarioError> {
    let total: T = net.prices().iter().copied().sum();
    let target = find_max_shock(net, total * T::of(adversarial.budget_fraction), adversarial.heuristic)?;
    let mut shift = vec![0.0; net.m() + 1];
    shift[0] = COMMON_SHIFT;
    let own = ((-1.0 - spec.drift) / spec.sigma - spec.rho.sqrt() * COMMON_SHIFT) / (1.0 - spec.rho).sqrt();
    for a in target.assets {
        shift[a + 1] = own;
    }
    Ok(shift)
}

/// Best-case default count of one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub defaults: usize,
    pub fraction: f64,
}

/// Solves every scenario of `batch`, in scenario order.
pub fn evaluate_batch<T: Scalar>(
    net: &EconomicNetwork<T>,
    batch: &ScenarioBatch<T>,
) -> Result<Vec<ScenarioOutcome>, ScenarioError> {
    let n = net.n().max(1) as f64;
    (0..batch.len())
        .into_par_iter()
        .map(|s| {
            let eq = apply_shock(net, batch.gross.row(s))?.solve_equilibrium(EquilibriumMode::BestCase)?;
            Ok(ScenarioOutcome { defaults: eq.default_count(), fraction: eq.default_count() as f64 / n })
        })
        .collect()
}

/// Unbiased weighted mean `sum(w h) / N` and its standard error.
pub fn weighted_mean(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let terms: Vec<f64> = values.iter().zip(weights).map(|(v, w)| v * w).collect();
    let mean = terms.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One row per scenario: index, optionally the gross returns, default
/// count, default fraction and weight.
pub fn write_batch_csv<T: Scalar, W: Write>(
    out: W,
    batch: &ScenarioBatch<T>,
    outcomes: &[ScenarioOutcome],
    include_returns: bool,
) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(out);
    let m = batch.gross.cols();
    let mut header = vec!["scenario".to_string()];
    if include_returns {
        header.extend((0..m).map(|a| format!("gross_{a}")));
    }
    header.extend(["defaults", "default_fraction", "weight"].map(String::from));
    w.write_record(&header)?;
    for (s, o) in outcomes.iter().enumerate() {
        let mut row = vec![s.to_string()];
        if include_returns {
            row.extend(batch.gross.row(s).iter().map(|g| g.to_string()));
        }
        row.extend([o.defaults.to_string(), o.fraction.to_string(), batch.weights[s].to_string()]);
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
