use std::collections::BTreeSet;

use super::cascade::CascadeState;
use super::plan::InterventionPlan;
use super::{check_budget, InfmaxError};
use crate::influence::{InfluenceError, InfluenceInstance, ThresholdDistribution};
use crate::Scalar;

/// Influence that the set `a` exerts on node `v`.
pub fn gamma_plus<T: Scalar>(inst: &InfluenceInstance<T>, v: usize, a: &BTreeSet<usize>) -> Result<T, InfmaxError> {
    check(inst, v)?;
    Ok(inst.influence(a)?[v])
}

/// Influence that node `v` exerts on the set `a`.
pub fn gamma_minus<T: Scalar>(inst: &InfluenceInstance<T>, v: usize, a: &BTreeSet<usize>) -> Result<T, InfmaxError> {
    let col = inst.column(v)?;
    a.iter()
        .map(|&u| {
            check(inst, u)?;
            Ok(col[u])
        })
        .sum()
}

fn check<T: Scalar>(inst: &InfluenceInstance<T>, v: usize) -> Result<(), InfmaxError> {
    if v < inst.k() {
        Ok(())
    } else {
        Err(InfluenceError::NodeIndex { index: v, k: inst.k() }.into())
    }
}

fn out_influence<T: Scalar>(inst: &InfluenceInstance<T>, v: usize, outside: &[bool]) -> T {
    inst.column_unchecked(v).into_iter().zip(outside).filter(|(_, &o)| o).map(|(x, _)| x).sum()
}

/// Keeps the first candidate with the strictly largest score.
fn argmax<T: Scalar>(scored: impl Iterator<Item = (usize, T, T)>) -> Option<(usize, T)> {
    let mut best: Option<(usize, T, T)> = None;
    for c in scored {
        if best.is_none_or(|b| c.1 > b.1) {
            best = Some(c);
        }
    }
    best.map(|(v, _, cost)| (v, cost))
}

/// Pays, one node at a time, the node with the most influence on the nodes
/// not yet paid. Each payment tops the node up to its largest possible
/// threshold net of influence from the paid nodes.
pub fn discount_frac<T: Scalar, M: ThresholdDistribution<T> + ?Sized>(
    inst: &InfluenceInstance<T>,
    model: &M,
    budget: T,
) -> Result<InterventionPlan<T>, InfmaxError> {
    check_budget(budget)?;
    let k = inst.k();
    let theta_max = model.upper_support(inst.theta_tilde());
    let mut x = vec![T::zero(); k];
    let mut paid = vec![false; k];
    let mut pushed = vec![T::zero(); k];
    let mut spent = T::zero();
    loop {
        let outside: Vec<bool> = paid.iter().map(|p| !p).collect();
        let pick = argmax((0..k).filter(|&v| !paid[v]).filter_map(|v| {
            let top_up = theta_max[v] - pushed[v];
            // a zero top-up would leave the paid set unchanged
            (top_up > T::zero() && T::within_budget(spent + top_up, budget))
                .then(|| (v, out_influence(inst, v, &outside), top_up))
        }));
        let Some((v, top_up)) = pick else { break };
        x[v] = top_up;
        paid[v] = true;
        spent += top_up;
        inst.accumulate(v, &mut pushed);
    }
    Ok(InterventionPlan::fractional(x, budget))
}

/// Like [`discount_frac`], but scores each node by its influence on the
/// not-yet-activated nodes per unit of top-up cost, where the activated set
/// is the cascade the current payments guarantee. Nodes that need no
/// payment join the activated set for free.
pub fn discount_frac_cost_adjusted<T: Scalar, M: ThresholdDistribution<T> + ?Sized>(
    inst: &InfluenceInstance<T>,
    model: &M,
    budget: T,
) -> Result<InterventionPlan<T>, InfmaxError> {
    check_budget(budget)?;
    let k = inst.k();
    let theta_max = model.upper_support(inst.theta_tilde());
    let mut x = vec![T::zero(); k];
    let mut spent = T::zero();
    let mut state = CascadeState::new(k);
    loop {
        state.run_fractional(inst, &x, &theta_max)?;
        let outside: Vec<bool> = state.active.iter().map(|a| !a).collect();
        let pick = argmax((0..k).filter(|&v| outside[v]).filter_map(|v| {
            let top_up = theta_max[v] - state.influence[v];
            T::within_budget(spent + top_up, budget).then(|| {
                let reach = out_influence(inst, v, &outside);
                (v, reach / top_up, top_up)
            })
        }));
        let Some((v, top_up)) = pick else { break };
        x[v] = top_up;
        spent += top_up;
    }
    Ok(InterventionPlan::fractional(x, budget))
}
