use std::collections::BTreeSet;

use serde::Serialize;

use super::InfmaxError;
use crate::influence::{InfluenceError, InfluenceInstance};
use crate::Scalar;

/// Final activated set of a cascade.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CascadeResult<T> {
    pub activated: BTreeSet<usize>,
    pub weight: T,
    /// Rounds in which at least one node activated.
    pub rounds: usize,
}

/// Integral cascade: seeds are active from the start, others activate once
/// the influence of the active set reaches their threshold.
pub fn calc_int_cascade<T: Scalar>(
    inst: &InfluenceInstance<T>,
    seeds: &BTreeSet<usize>,
    theta: &[T],
) -> Result<CascadeResult<T>, InfmaxError> {
    check_len("theta", theta.len(), inst.k())?;
    let mut mask = vec![false; inst.k()];
    for &s in seeds {
        if s >= inst.k() {
            return Err(InfluenceError::NodeIndex { index: s, k: inst.k() }.into());
        }
        mask[s] = true;
    }
    let mut state = CascadeState::new(inst.k());
    Ok(state.run_integral(inst, &mask, theta).finish(inst))
}

/// Fractional cascade: a node activates once its payment plus the influence
/// of the active set reaches its threshold. Membership is recomputed every
/// round; a round that drops a node is reported as an error.
pub fn calc_frac_cascade<T: Scalar>(
    inst: &InfluenceInstance<T>,
    x: &[T],
    theta: &[T],
) -> Result<CascadeResult<T>, InfmaxError> {
    check_len("payments", x.len(), inst.k())?;
    check_len("theta", theta.len(), inst.k())?;
    check_payments(x)?;
    let mut state = CascadeState::new(inst.k());
    state.run_fractional(inst, x, theta)?;
    Ok(state.finish(inst))
}

pub(crate) fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), InfmaxError> {
    if got == expected {
        Ok(())
    } else {
        Err(InfmaxError::Length { what, expected, got })
    }
}

pub(crate) fn check_payments<T: Scalar>(x: &[T]) -> Result<(), InfmaxError> {
    match x.iter().position(|v| !v.is_finite() || *v < T::zero()) {
        Some(node) => Err(InfmaxError::NegativePayment { node, value: x[node].as_f64() }),
        None => Ok(()),
    }
}

/// Reusable buffers for repeated cascades on one instance.
pub(crate) struct CascadeState<T> {
    pub active: Vec<bool>,
    pub influence: Vec<T>,
    pub rounds: usize,
    frontier: Vec<usize>,
}

impl<T: Scalar> CascadeState<T> {
    pub fn new(k: usize) -> Self {
        Self { active: vec![false; k], influence: vec![T::zero(); k], rounds: 0, frontier: Vec::new() }
    }

    fn reset(&mut self) {
        self.active.iter_mut().for_each(|a| *a = false);
        self.influence.iter_mut().for_each(|x| *x = T::zero());
        self.rounds = 0;
        self.frontier.clear();
    }

    /// Spreads the current frontier until nothing new activates.
    fn spread(&mut self, inst: &InfluenceInstance<T>, x: Option<&[T]>, theta: &[T]) {
        while !self.frontier.is_empty() {
            self.rounds += 1;
            for &v in &self.frontier {
                inst.accumulate(v, &mut self.influence);
            }
            self.frontier.clear();
            for v in 0..self.active.len() {
                if self.active[v] {
                    continue;
                }
                let pushed = match x {
                    Some(x) => self.influence[v] + x[v],
                    None => self.influence[v],
                };
                if T::clears(pushed, theta[v]) {
                    self.frontier.push(v);
                }
            }
            for &v in &self.frontier {
                self.active[v] = true;
            }
        }
    }

    pub fn run_integral(&mut self, inst: &InfluenceInstance<T>, seeds: &[bool], theta: &[T]) -> &mut Self {
        self.reset();
        for (v, &s) in seeds.iter().enumerate() {
            // zero-threshold nodes join the first round alongside the seeds
            if s || T::clears(T::zero(), theta[v]) {
                self.active[v] = true;
                self.frontier.push(v);
            }
        }
        self.spread(inst, None, theta);
        self
    }

    pub fn run_fractional(
        &mut self,
        inst: &InfluenceInstance<T>,
        x: &[T],
        theta: &[T],
    ) -> Result<&mut Self, InfmaxError> {
        self.reset();
        for v in 0..x.len() {
            if T::clears(x[v], theta[v]) {
                self.active[v] = true;
                self.frontier.push(v);
            }
        }
        self.spread(inst, Some(x), theta);
        // influence only grows, so every active node must still clear
        for v in 0..x.len() {
            if self.active[v] && !T::clears(self.influence[v] + x[v], theta[v]) {
                return Err(InfmaxError::NonMonotoneCascade { node: v, round: self.rounds });
            }
        }
        Ok(self)
    }

    pub fn weight(&self, inst: &InfluenceInstance<T>) -> T {
        self.active.iter().zip(inst.weights()).filter(|(&a, _)| a).map(|(_, &w)| w).sum()
    }

    pub fn finish(&mut self, inst: &InfluenceInstance<T>) -> CascadeResult<T> {
        CascadeResult {
            activated: self.active.iter().enumerate().filter(|(_, &a)| a).map(|(v, _)| v).collect(),
            weight: self.weight(inst),
            rounds: self.rounds,
        }
    }
}
