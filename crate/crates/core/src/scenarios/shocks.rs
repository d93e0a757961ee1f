use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::linalg::DenseMatrix;
use crate::network::EconomicNetwork;
use crate::rng::{derive_seed, stream_rng, Substream};
use crate::Scalar;

/// One-factor Gaussian return model.
///
/// Asset `i` in a scenario returns
/// `r_i = drift + sigma * (sqrt(rho) * z + sqrt(1 - rho) * e_i)` with
/// independent standard normals `z` (shared) and `e_i`; the gross return is
/// `max(1 + r_i, floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockSpec {
    pub rho: f64,
    pub sigma: f64,
    pub drift: f64,
    #[serde(default)]
    pub floor: f64,
    pub count: usize,
    pub seed: u64,
}

impl Default for ShockSpec {
    fn default() -> Self {
        Self { rho: 0.6, sigma: 0.15, drift: -0.3, floor: 0.0, count: 5000, seed: 0 }
    }
}

impl ShockSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::InvalidSpec(msg));
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho {} not in [0, 1)", self.rho));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return bad(format!("sigma {} must be >= 0", self.sigma));
        }
        if !self.drift.is_finite() {
            return bad("drift must be finite".into());
        }
        if !(self.floor.is_finite() && self.floor >= 0.0) {
            return bad(format!("floor {} must be >= 0", self.floor));
        }
        Ok(())
    }

    /// Seed of the stream that scenario `index` draws from.
    pub(crate) fn scenario_seed(&self) -> u64 {
        derive_seed(self.seed, Substream::Shocks)
    }

    /// Standard normal factors for one scenario: the common factor first.
    pub(crate) fn factors(&self, index: usize, m: usize) -> Vec<f64> {
        let mut rng = stream_rng(self.scenario_seed(), index as u64);
        (0..=m).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Raw returns from factors `(z, e_1..e_m)`.
    pub(crate) fn returns_from(&self, factors: &[f64]) -> Vec<f64> {
        let common = self.rho.sqrt() * factors[0];
        let own = (1.0 - self.rho).sqrt();
        factors[1..].iter().map(|e| self.drift + self.sigma * (common + own * e)).collect()
    }

    pub(crate) fn gross(&self, r: f64) -> f64 {
        (1.0 + r).max(self.floor)
    }
}

/// Raw returns before flooring, one row per scenario.
pub fn sample_returns(spec: &ShockSpec, m: usize) -> Result<DenseMatrix<f64>, ScenarioError> {
    spec.validate()?;
    let rows: Vec<Vec<f64>> = (0..spec.count).map(|s| spec.returns_from(&spec.factors(s, m))).collect();
    Ok(DenseMatrix::from_fn(spec.count, m, |s, i| rows[s][i]))
}

/// Gross returns `max(1 + r, floor)`, one row per scenario.
pub fn sample_shocks<T: Scalar>(spec: &ShockSpec, m: usize) -> Result<DenseMatrix<T>, ScenarioError> {
    let r = sample_returns(spec, m)?;
    Ok(DenseMatrix::from_fn(spec.count, m, |s, i| T::of(spec.gross(r[(s, i)]))))
}

/// Copy of `net` with prices multiplied by `gross`.
pub fn apply_shock<T: Scalar>(net: &EconomicNetwork<T>, gross: &[T]) -> Result<EconomicNetwork<T>, ScenarioError> {
    if gross.len() != net.m() {
        return Err(crate::network::NetworkError::Length { what: "gross returns", expected: net.m(), got: gross.len() }
            .into());
    }
    let p = net.prices().iter().zip(gross).map(|(&p, &g)| p * g).collect();
    Ok(net.with_prices(p)?)
}
