use std::collections::BTreeSet;

use rayon::prelude::*;

use super::plan::InterventionPlan;
use super::sigma::{sigma_of, Seeding, SigmaEstimate};
use super::{check_budget, InfmaxError};
use crate::influence::{InfluenceInstance, ThresholdDistribution};
use crate::rng::mix;
use crate::Scalar;

/// First candidate with the strictly largest estimate.
fn best_of(scores: &[(usize, SigmaEstimate)]) -> Option<(usize, f64)> {
    scores.iter().fold(None, |best, &(v, e)| match best {
        Some((_, m)) if e.mean <= m => best,
        _ => Some((v, e.mean)),
    })
}

/// Hill-climbing over seed sets. Each seed costs its influence threshold;
/// unaffordable candidates are skipped and the search stops once no
/// affordable candidate raises the estimate.
pub fn greedy_int<T: Scalar, M: ThresholdDistribution<T> + ?Sized>(
    inst: &InfluenceInstance<T>,
    model: &M,
    budget: T,
    replicates: usize,
    seed: u64,
) -> Result<InterventionPlan<T>, InfmaxError> {
    check_budget(budget)?;
    let k = inst.k();
    let theta = inst.theta_tilde();
    let mut mask = vec![false; k];
    let mut spent = T::zero();
    for step in 0.. {
        let step_seed = mix(seed, step);
        let candidates: Vec<usize> =
            (0..k).filter(|&v| !mask[v] && T::within_budget(spent + theta[v], budget)).collect();
        if candidates.is_empty() {
            break;
        }
        let base = sigma_of(inst, Seeding::Integral(&mask), model, replicates, step_seed)?;
        let scores = candidates
            .par_iter()
            .map(|&v| {
                let mut trial = mask.clone();
                trial[v] = true;
                sigma_of(inst, Seeding::Integral(&trial), model, replicates, step_seed).map(|e| (v, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match best_of(&scores) {
            Some((v, m)) if m > base.mean => {
                mask[v] = true;
                spent += theta[v];
            }
            _ => break,
        }
    }
    let seeds: BTreeSet<usize> = (0..k).filter(|&v| mask[v]).collect();
    let plan = InterventionPlan::integral(seeds, inst, budget);
    let estimate = sigma_of(inst, Seeding::Integral(&mask), model, replicates, seed)?;
    Ok(plan.with_estimate(estimate))
}

/// Greedy over payment vectors. Each step tops one unpaid node up to its
/// largest possible threshold, net of influence from the nodes already
/// paid, choosing the top-up that most raises the estimate.
pub fn greedy_frac<T: Scalar, M: ThresholdDistribution<T> + ?Sized>(
    inst: &InfluenceInstance<T>,
    model: &M,
    budget: T,
    replicates: usize,
    seed: u64,
) -> Result<InterventionPlan<T>, InfmaxError> {
    check_budget(budget)?;
    let k = inst.k();
    let theta_max = model.upper_support(inst.theta_tilde());
    let mut x = vec![T::zero(); k];
    let mut paid = vec![false; k];
    let mut spent = T::zero();
    for step in 0.. {
        let step_seed = mix(seed, step);
        let pushed = inst.influence_of_mask(&paid);
        let candidates: Vec<(usize, T)> = (0..k)
            .filter(|&v| !paid[v])
            .map(|v| (v, theta_max[v] - pushed[v]))
            .filter(|&(_, top_up)| top_up > T::zero() && T::within_budget(spent + top_up, budget))
            .collect();
        if candidates.is_empty() {
            break;
        }
        let base = sigma_of(inst, Seeding::Fractional(&x), model, replicates, step_seed)?;
        let scores = candidates
            .par_iter()
            .map(|&(v, top_up)| {
                let mut trial = x.clone();
                trial[v] = top_up;
                sigma_of(inst, Seeding::Fractional(&trial), model, replicates, step_seed).map(|e| (v, e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        match best_of(&scores) {
            Some((v, m)) if m > base.mean => {
                let top_up = candidates.iter().find(|c| c.0 == v).expect("scored candidate").1;
                x[v] = top_up;
                paid[v] = true;
                spent += top_up;
            }
            _ => break,
        }
    }
    let estimate = sigma_of(inst, Seeding::Fractional(&x), model, replicates, seed)?;
    Ok(InterventionPlan::fractional(x, budget).with_estimate(estimate))
}
