//! Financial contagion in cross-holding networks: equilibrium solving,
//! intervention planning as influence maximization, shock scenarios and
//! stress reports.

pub mod infmax;
pub mod influence;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod scenarios;
mod scalar;

pub use scalar::Scalar;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Network = network::EconomicNetwork<f64>;
pub type Data = network::NetworkData<f64>;
pub type Equilibrium = network::EquilibriumState<f64>;
pub type Instance = influence::InfluenceInstance<f64>;
pub type Plan = infmax::InterventionPlan<f64>;
