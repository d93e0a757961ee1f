//! Influence maximization on a reduced instance.
//!
//! Seeding a node reverses its default outright (integral) or contributes a
//! payment toward its threshold (fractional). The objective is the expected
//! weight of the final activated set under random thresholds.

mod brute;
mod cascade;
mod discount;
mod greedy;
mod plan;
mod sigma;

use thiserror::Error;

use crate::influence::InfluenceError;

pub use brute::{brute_force_optimum, BRUTE_FORCE_FRACTIONAL_MAX_K, BRUTE_FORCE_MAX_FAMILY};
pub use cascade::{calc_frac_cascade, calc_int_cascade, CascadeResult};
pub use discount::{discount_frac, discount_frac_cost_adjusted, gamma_minus, gamma_plus};
pub use greedy::{greedy_frac, greedy_int};
pub use plan::{InterventionPlan, PlanKind, PlanRecord, PlanStyle, Seeds};
pub use sigma::{estimate_sigma, SigmaEstimate, DEFAULT_REPLICATES};

#[derive(Debug, Error)]
pub enum InfmaxError {
    #[error("payment {value} on node {node} is negative")]
    NegativePayment { node: usize, value: f64 },
    #[error("cascade lost node {node} in round {round}")]
    NonMonotoneCascade { node: usize, round: usize },
    #[error("{what} has length {got}, expected {expected}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("budget {0} must be finite and nonnegative")]
    Budget(f64),
    #[error("replicate count must be at least 1")]
    Replicates,
    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),
    #[error(transparent)]
    Influence(#[from] InfluenceError),
}

pub(crate) fn check_budget<T: crate::Scalar>(budget: T) -> Result<(), InfmaxError> {
    if budget.is_finite() && budget >= T::zero() {
        Ok(())
    } else {
        Err(InfmaxError::Budget(budget.as_f64()))
    }
}

/// Selectable intervention optimizers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    GreedyFrac,
    GreedyInt,
    DiscountFrac,
    #[default]
    DiscountFracCost,
    BruteInt,
    BruteFrac,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::GreedyFrac,
        Algorithm::GreedyInt,
        Algorithm::DiscountFrac,
        Algorithm::DiscountFracCost,
        Algorithm::BruteInt,
        Algorithm::BruteFrac,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GreedyFrac => "greedy-frac",
            Algorithm::GreedyInt => "greedy-int",
            Algorithm::DiscountFrac => "discount-frac",
            Algorithm::DiscountFracCost => "discount-frac-cost",
            Algorithm::BruteInt => "brute-int",
            Algorithm::BruteFrac => "brute-frac",
        }
    }

    /// Runs the optimizer. Exhaustive searches use the nominal thresholds
    /// and ignore `model`; the heuristics ignore `replicates` and `seed`.
    pub fn run<T: crate::Scalar, M: crate::influence::ThresholdDistribution<T> + ?Sized>(
        self,
        inst: &crate::influence::InfluenceInstance<T>,
        model: &M,
        budget: T,
        replicates: usize,
        seed: u64,
    ) -> Result<InterventionPlan<T>, InfmaxError> {
        match self {
            Algorithm::GreedyFrac => greedy_frac(inst, model, budget, replicates, seed),
            Algorithm::GreedyInt => greedy_int(inst, model, budget, replicates, seed),
            Algorithm::DiscountFrac => discount_frac(inst, model, budget),
            Algorithm::DiscountFracCost => discount_frac_cost_adjusted(inst, model, budget),
            Algorithm::BruteInt => brute_force_optimum(inst, PlanStyle::Integral, budget),
            Algorithm::BruteFrac => brute_force_optimum(inst, PlanStyle::Fractional, budget),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = if s == "brute" { "brute-int" } else { s };
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}
