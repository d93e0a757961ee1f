//! Shock scenarios: correlated return draws, adversarial asset shocks and
//! hardness-reduction fixtures.

mod gadget;
mod importance;
mod maxshock;
mod shocks;

use thiserror::Error;

use crate::network::NetworkError;

pub use gadget::{build_is_gadget, build_max_shock_gadget, GadgetSpec, IsGadget, MaxShockGadget};
pub use importance::{
    evaluate_batch, importance_weighted_batch, weighted_mean, write_batch_csv, AdversarialSpec, ScenarioBatch,
    ScenarioOutcome,
};
pub use maxshock::{find_max_shock, zero_assets, MaxShock, ShockHeuristic, EXACT_MAX_ASSETS};
pub use shocks::{apply_shock, sample_returns, sample_shocks, ShockSpec};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid shock spec: {0}")]
    InvalidSpec(String),
    #[error("zeroing the chosen assets costs {cost}, more than the budget {budget}")]
    BudgetExceeded { cost: f64, budget: f64 },
    #[error("asset {0} out of range")]
    AssetIndex(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("gadget construction failed: {0}")]
    Infeasible(String),
    #[error("exact search handles at most {limit} assets, network has {m}")]
    TooManyAssets { m: usize, limit: usize },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
