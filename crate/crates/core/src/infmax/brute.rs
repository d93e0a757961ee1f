use std::collections::BTreeSet;

use super::cascade::CascadeState;
use super::plan::{InterventionPlan, PlanStyle};
use super::sigma::SigmaEstimate;
use super::{check_budget, InfmaxError};
use crate::influence::InfluenceInstance;
use crate::Scalar;

/// Most seed sets the integral search will evaluate.
pub const BRUTE_FORCE_MAX_FAMILY: usize = 1 << 22;

/// Largest instance the fractional search accepts.
pub const BRUTE_FORCE_FRACTIONAL_MAX_K: usize = 20;

/// Exact optimum under the nominal thresholds.
///
/// The integral search enumerates every affordable seed set. The fractional
/// search runs a shortest-path recursion over activation orders: reaching a
/// set `S ∪ {v}` from `S` costs `max(0, θ_v - f(S)_v)`, and any payment
/// vector activating a set costs at least the cheapest order reaching it.
pub fn brute_force_optimum<T: Scalar>(
    inst: &InfluenceInstance<T>,
    style: PlanStyle,
    budget: T,
) -> Result<InterventionPlan<T>, InfmaxError> {
    check_budget(budget)?;
    match style {
        PlanStyle::Integral => integral(inst, budget),
        PlanStyle::Fractional => fractional(inst, budget),
    }
}

fn exact(mean: f64) -> SigmaEstimate {
    SigmaEstimate { mean, stderr: 0.0, replicates: 1 }
}

struct Search<'a, T> {
    inst: &'a InfluenceInstance<T>,
    budget: T,
    candidates: Vec<usize>,
    mask: Vec<bool>,
    state: CascadeState<T>,
    visited: usize,
    total: T,
    best: (T, Vec<bool>),
}

impl<T: Scalar> Search<'_, T> {
    fn visit(&mut self, from: usize, spent: T) -> Result<(), InfmaxError> {
        self.visited += 1;
        if self.visited > BRUTE_FORCE_MAX_FAMILY {
            return Err(InfmaxError::InstanceTooLarge(format!(
                "more than {BRUTE_FORCE_MAX_FAMILY} affordable seed sets"
            )));
        }
        self.state.run_integral(self.inst, &self.mask, self.inst.theta_tilde());
        let w = self.state.weight(self.inst);
        if w > self.best.0 {
            self.best = (w, self.mask.clone());
        }
        for i in from..self.candidates.len() {
            if self.best.0 >= self.total {
                break;
            }
            let v = self.candidates[i];
            let cost = spent + self.inst.theta_tilde()[v];
            if !T::within_budget(cost, self.budget) {
                continue;
            }
            self.mask[v] = true;
            self.visit(i + 1, cost)?;
            self.mask[v] = false;
        }
        Ok(())
    }
}

fn integral<T: Scalar>(inst: &InfluenceInstance<T>, budget: T) -> Result<InterventionPlan<T>, InfmaxError> {
    let k = inst.k();
    let mut search = Search {
        inst,
        budget,
        // free nodes activate without being seeded
        candidates: (0..k).filter(|&v| inst.theta_tilde()[v] > T::zero()).collect(),
        mask: vec![false; k],
        state: CascadeState::new(k),
        visited: 0,
        total: inst.weights().iter().copied().sum(),
        best: (-T::one(), vec![false; k]),
    };
    search.visit(0, T::zero())?;
    let (w, mask) = search.best;
    let seeds: BTreeSet<usize> = (0..k).filter(|&v| mask[v]).collect();
    Ok(InterventionPlan::integral(seeds, inst, budget).with_estimate(exact(w.as_f64())))
}

fn fractional<T: Scalar>(inst: &InfluenceInstance<T>, budget: T) -> Result<InterventionPlan<T>, InfmaxError> {
    let k = inst.k();
    if k > BRUTE_FORCE_FRACTIONAL_MAX_K {
        return Err(InfmaxError::InstanceTooLarge(format!(
            "{k} nodes, fractional search handles at most {BRUTE_FORCE_FRACTIONAL_MAX_K}"
        )));
    }
    let a = inst.to_dense();
    let theta = inst.theta_tilde();
    let states = 1usize << k;
    let mut cost = vec![T::infinity(); states];
    let mut last = vec![u8::MAX; states];
    cost[0] = T::zero();
    let mut pushed = vec![T::zero(); k];
    for mask in 0..states {
        if !cost[mask].is_finite() {
            continue;
        }
        for (u, slot) in pushed.iter_mut().enumerate() {
            *slot = (0..k).filter(|&v| mask >> v & 1 == 1).map(|v| a[(u, v)]).sum();
        }
        for v in (0..k).filter(|&v| mask >> v & 1 == 0) {
            let step = (theta[v] - pushed[v]).max(T::zero());
            let c = cost[mask] + step;
            let next = mask | 1 << v;
            if T::within_budget(c, budget) && c < cost[next] {
                cost[next] = c;
                last[next] = v as u8;
            }
        }
    }
    let weight = |mask: usize| -> T { (0..k).filter(|&v| mask >> v & 1 == 1).map(|v| inst.weights()[v]).sum() };
    let mut best = 0usize;
    for mask in 1..states {
        if !cost[mask].is_finite() {
            continue;
        }
        let (w, wb) = (weight(mask), weight(best));
        if w > wb || (w == wb && cost[mask] < cost[best]) {
            best = mask;
        }
    }
    let mut order = Vec::new();
    let mut mask = best;
    while mask != 0 {
        let v = last[mask] as usize;
        order.push(v);
        mask &= !(1 << v);
    }
    order.reverse();
    let mut x = vec![T::zero(); k];
    let mut prefix = vec![T::zero(); k];
    for v in order {
        x[v] = (theta[v] - prefix[v]).max(T::zero());
        inst.accumulate(v, &mut prefix);
    }
    let mut state = CascadeState::new(k);
    state.run_fractional(inst, &x, theta)?;
    let w = state.weight(inst).as_f64();
    Ok(InterventionPlan::fractional(x, budget).with_estimate(exact(w)))
}
