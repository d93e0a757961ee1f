use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cascade::{check_len, check_payments, CascadeState};
use super::plan::{InterventionPlan, PlanKind};
use super::InfmaxError;
use crate::influence::{InfluenceInstance, ThresholdDistribution};
use crate::rng::stream_rng;
use crate::Scalar;

/// Threshold draws per estimate unless told otherwise.
pub const DEFAULT_REPLICATES: usize = 10_000;

/// Monte Carlo estimate of the expected activated weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replicates: usize,
}

#[derive(Clone, Copy)]
pub(crate) enum Seeding<'a, T> {
    Integral(&'a [bool]),
    Fractional(&'a [T]),
}

/// Expected activated weight of `plan`; replicate `r` draws its thresholds
/// from stream `r` of `seed`.
pub fn estimate_sigma<T: Scalar, M: ThresholdDistribution<T> + ?Sized>(
    inst: &InfluenceInstance<T>,
    plan: &InterventionPlan<T>,
    model: &M,
    replicates: usize,
    seed: u64,
) -> Result<SigmaEstimate, InfmaxError> {
    match &plan.kind {
        PlanKind::Integral(s) => {
            let mut mask = vec![false; inst.k()];
            for &u in s {
                if u >= inst.k() {
                    return Err(crate::influence::InfluenceError::NodeIndex { index: u, k: inst.k() }.into());
                }
                mask[u] = true;
            }
            sigma_of(inst, Seeding::Integral(&mask), model, replicates, seed)
        }
        PlanKind::Fractional(x) => {
            check_len("payments", x.len(), inst.k())?;
            check_payments(x)?;
            sigma_of(inst, Seeding::Fractional(x), model, replicates, seed)
        }
    }
}

fn run<T: Scalar>(
    state: &mut CascadeState<T>,
    inst: &InfluenceInstance<T>,
    seeding: Seeding<'_, T>,
    theta: &[T],
) -> Result<f64, InfmaxError> {
    match seeding {
        Seeding::Integral(mask) => state.run_integral(inst, mask, theta),
        Seeding::Fractional(x) => state.run_fractional(inst, x, theta)?,
    };
    Ok(state.weight(inst).as_f64())
}

pub(crate) fn sigma_of<T: Scalar, M: ThresholdDistribution<T> + ?Sized>(
    inst: &InfluenceInstance<T>,
    seeding: Seeding<'_, T>,
    model: &M,
    replicates: usize,
    seed: u64,
) -> Result<SigmaEstimate, InfmaxError> {
    if replicates == 0 {
        return Err(InfmaxError::Replicates);
    }
    let k = inst.k();
    if model.is_fixed() {
        let mean = run(&mut CascadeState::new(k), inst, seeding, inst.theta_tilde())?;
        return Ok(SigmaEstimate { mean, stderr: 0.0, replicates });
    }
    let samples: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map_init(
            || (CascadeState::new(k), vec![T::zero(); k]),
            |(state, theta), r| {
                model.sample_into(inst.theta_tilde(), &mut stream_rng(seed, r as u64), theta);
                run(state, inst, seeding, theta)
            },
        )
        .collect::<Result<_, _>>()?;
    Ok(summarize(&samples))
}

fn summarize(samples: &[f64]) -> SigmaEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let stderr = if samples.len() > 1 {
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    SigmaEstimate { mean, stderr, replicates: samples.len() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::influence::ThresholdModel;
    use crate::linalg::DenseMatrix;

    fn pair() -> InfluenceInstance<f64> {
        // 0 pushes 0.3 onto 1; node 1 has nominal threshold 0.3
        let a = DenseMatrix::from_rows(vec![vec![0.0, 0.0], vec![0.3, 0.0]]).unwrap();
        InfluenceInstance::from_parts(a, vec![0.5, 0.3], None, None).unwrap()
    }

    #[test]
    fn fixed_model_is_a_single_cascade() {
        let inst = pair();
        let plan = InterventionPlan::integral([0].into_iter().collect(), &inst, 1.0);
        let e = estimate_sigma(&inst, &plan, &ThresholdModel::Fixed, 17, 3).unwrap();
        assert_eq!(e, SigmaEstimate { mean: 2.0, stderr: 0.0, replicates: 17 });
    }

    #[test]
    fn nothing_paid_nothing_saved() {
        let inst = pair();
        let plan = InterventionPlan::fractional(vec![0.0, 0.0], 0.0);
        let model = ThresholdModel::uniform_band(0.5).unwrap();
        assert_eq!(estimate_sigma(&inst, &plan, &model, 100, 3).unwrap().mean, 0.0);
    }

    #[test]
    fn band_estimate_matches_exact_expectation() {
        // seeding 0 activates 1 iff θ_1 <= 0.3 with θ_1 ~ U[0.15, 0.45], probability 1/2
        let inst = pair();
        let plan = InterventionPlan::integral([0].into_iter().collect(), &inst, 1.0);
        let model = ThresholdModel::uniform_band(0.5).unwrap();
        let e = estimate_sigma(&inst, &plan, &model, 20_000, 8).unwrap();
        assert!((e.mean - 1.5).abs() < 3.0 * e.stderr, "{e:?}");
        assert!(e.stderr > 0.0);
    }

    #[test]
    fn estimates_are_deterministic() {
        let inst = pair();
        let plan = InterventionPlan::fractional(vec![0.6, 0.1], 1.0);
        let model = ThresholdModel::uniform_band(1.0).unwrap();
        let a = estimate_sigma(&inst, &plan, &model, 1000, 99).unwrap();
        let b = estimate_sigma(&inst, &plan, &model, 1000, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_replicates_rejected() {
        let inst = pair();
        let plan = InterventionPlan::fractional(vec![0.0, 0.0], 0.0);
        assert!(matches!(estimate_sigma(&inst, &plan, &ThresholdModel::Fixed, 0, 1), Err(InfmaxError::Replicates)));
    }
}
