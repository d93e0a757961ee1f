use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::sigma::SigmaEstimate;
use crate::influence::InfluenceInstance;
use crate::Scalar;

/// Whether seeds are bought outright or paid toward fractionally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStyle {
    Integral,
    Fractional,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanKind<T> {
    /// Reversed outright; each seed costs its influence threshold.
    Integral(BTreeSet<usize>),
    /// Payment per reduced node.
    Fractional(Vec<T>),
}

/// A budget-feasible intervention on a reduced instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionPlan<T> {
    pub kind: PlanKind<T>,
    pub budget: T,
    pub spent: T,
    pub estimate: Option<SigmaEstimate>,
}

impl<T: Scalar> InterventionPlan<T> {
    pub fn integral(seeds: BTreeSet<usize>, inst: &InfluenceInstance<T>, budget: T) -> Self {
        let spent = seeds.iter().map(|&u| inst.theta_tilde()[u]).sum();
        Self { kind: PlanKind::Integral(seeds), budget, spent, estimate: None }
    }

    pub fn fractional(x: Vec<T>, budget: T) -> Self {
        let spent = x.iter().copied().sum();
        Self { kind: PlanKind::Fractional(x), budget, spent, estimate: None }
    }

    pub fn empty(style: PlanStyle, k: usize, budget: T) -> Self {
        match style {
            PlanStyle::Integral => Self { kind: PlanKind::Integral(BTreeSet::new()), budget, spent: T::zero(), estimate: None },
            PlanStyle::Fractional => Self::fractional(vec![T::zero(); k], budget),
        }
    }

    pub fn style(&self) -> PlanStyle {
        match self.kind {
            PlanKind::Integral(_) => PlanStyle::Integral,
            PlanKind::Fractional(_) => PlanStyle::Fractional,
        }
    }

    /// True when nothing is paid to anyone.
    pub fn is_empty(&self) -> bool {
        match &self.kind {
            PlanKind::Integral(s) => s.is_empty(),
            PlanKind::Fractional(x) => x.iter().all(|&v| v == T::zero()),
        }
    }

    /// Payment per reduced node; integral seeds pay their full threshold.
    pub fn payments(&self, inst: &InfluenceInstance<T>) -> Vec<T> {
        match &self.kind {
            PlanKind::Integral(s) => {
                let mut x = vec![T::zero(); inst.k()];
                for &u in s {
                    x[u] = inst.theta_tilde()[u];
                }
                x
            }
            PlanKind::Fractional(x) => x.clone(),
        }
    }

    /// Firm-level intervention vector for a network with `n` firms.
    pub fn firm_payments(&self, inst: &InfluenceInstance<T>, n: usize) -> Vec<T> {
        inst.lift_payments(&self.payments(inst), n)
    }

    pub fn with_estimate(mut self, estimate: SigmaEstimate) -> Self {
        self.estimate = Some(estimate);
        self
    }

    /// Serializable form keyed by original firm indices.
    pub fn record(&self, inst: &InfluenceInstance<T>) -> PlanRecord {
        let map = inst.node_map();
        let seeds = match &self.kind {
            PlanKind::Integral(s) => Seeds::Integral { nodes: s.iter().map(|&u| map[u]).collect() },
            PlanKind::Fractional(x) => Seeds::Fractional {
                payments: x
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v != T::zero())
                    .map(|(u, &v)| (map[u], v.as_f64()))
                    .collect(),
            },
        };
        PlanRecord {
            seeds,
            spent: self.spent.as_f64(),
            budget: self.budget.as_f64(),
            sigma_estimate: self.estimate.map(|e| e.mean),
            stderr: self.estimate.map(|e| e.stderr),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seeds {
    Integral { nodes: Vec<usize> },
    /// `(firm, amount)` pairs with nonzero amounts.
    Fractional { payments: Vec<(usize, f64)> },
}

/// JSON shape of a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    #[serde(flatten)]
    pub seeds: Seeds,
    pub spent: f64,
    pub budget: f64,
    pub sigma_estimate: Option<f64>,
    pub stderr: Option<f64>,
}
