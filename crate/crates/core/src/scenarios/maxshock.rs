use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::network::{EconomicNetwork, EquilibriumMode, EquilibriumState};
use crate::Scalar;

/// Largest asset count the exact search accepts.
pub const EXACT_MAX_ASSETS: usize = 20;

/// How [`find_max_shock`] chooses assets to wipe out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShockHeuristic {
    /// Zero the asset that adds the most best-case defaults, re-solving the
    /// equilibrium for every candidate.
    Greedy,
    /// Zero the asset whose value loss, spread over surviving firms, eats
    /// the largest share of their distance to failure.
    Discount,
    /// Enumerate every affordable asset set.
    Exact,
}

/// Chosen asset set and the equilibrium it leads to.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct MaxShock<T> {
    pub assets: BTreeSet<usize>,
    pub cost: T,
    pub equilibrium: EquilibriumState<T>,
}

/// Sets the listed asset prices to zero. Fails when their total price
/// exceeds `budget`.
pub fn zero_assets<T: Scalar>(
    net: &EconomicNetwork<T>,
    assets: &BTreeSet<usize>,
    budget: T,
) -> Result<(EconomicNetwork<T>, T), ScenarioError> {
    let mut p = net.prices().to_vec();
    let mut cost = T::zero();
    for &a in assets {
        if a >= p.len() {
            return Err(ScenarioError::AssetIndex(a));
        }
        cost += p[a];
        p[a] = T::zero();
    }
    if !T::within_budget(cost, budget) {
        return Err(ScenarioError::BudgetExceeded { cost: cost.as_f64(), budget: budget.as_f64() });
    }
    Ok((net.with_prices(p)?, cost))
}

fn defaults_with<T: Scalar>(net: &EconomicNetwork<T>, zeroed: &[bool]) -> Result<EquilibriumState<T>, ScenarioError> {
    let p = net.prices().iter().zip(zeroed).map(|(&p, &z)| if z { T::zero() } else { p }).collect();
    Ok(net.with_prices(p)?.solve_equilibrium(EquilibriumMode::BestCase)?)
}

/// Picks assets to zero, at total price at most `budget`, so as to
/// maximize best-case defaults.
pub fn find_max_shock<T: Scalar>(
    net: &EconomicNetwork<T>,
    budget: T,
    heuristic: ShockHeuristic,
) -> Result<MaxShock<T>, ScenarioError> {
    if !(budget.is_finite() && budget >= T::zero()) {
        return Err(ScenarioError::BudgetExceeded { cost: 0.0, budget: budget.as_f64() });
    }
    let zeroed = match heuristic {
        ShockHeuristic::Exact => exact(net, budget)?,
        ShockHeuristic::Greedy => greedy(net, budget, |zeroed, candidates| {
            let counts = candidates
                .par_iter()
                .map(|&a| {
                    let mut trial = zeroed.to_vec();
                    trial[a] = true;
                    defaults_with(net, &trial).map(|eq| T::of(eq.default_count() as f64))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(counts)
        })?,
        ShockHeuristic::Discount => {
            let loss = value_loss_columns(net)?;
            greedy(net, budget, |zeroed, candidates| {
                let eq = defaults_with(net, zeroed)?;
                let slack: Vec<Option<T>> = (0..net.n())
                    .map(|i| {
                        (!eq.failed.contains(&i)).then(|| (eq.market_values[i] - net.thresholds()[i]).max(T::zero()))
                    })
                    .collect();
                Ok(candidates
                    .iter()
                    .map(|&a| {
                        let hit = net.prices()[a];
                        slack
                            .iter()
                            .zip(&loss[a])
                            .filter_map(|(s, &l)| s.map(|s| (s, l * hit)))
                            .map(|(s, l)| match () {
                                _ if l <= T::zero() => T::zero(),
                                _ if l >= s => T::one(),
                                _ => l / s,
                            })
                            .sum()
                    })
                    .collect())
            })?
        }
    };
    let assets: BTreeSet<usize> = (0..net.m()).filter(|&a| zeroed[a]).collect();
    let cost = assets.iter().map(|&a| net.prices()[a]).sum();
    let equilibrium = defaults_with(net, &zeroed)?;
    Ok(MaxShock { assets, cost, equilibrium })
}

/// `Ĉ (I - C)^-1 D` by column: the market value each firm loses per unit
/// drop in an asset's price, before failure costs.
fn value_loss_columns<T: Scalar>(net: &EconomicNetwork<T>) -> Result<Vec<Vec<T>>, ScenarioError> {
    let d = &net.data().d;
    (0..net.m())
        .map(|a| {
            let book = net.solve(&d.column(a).collect::<Vec<_>>())?;
            Ok(book.iter().zip(net.self_share()).map(|(&v, &c)| v * c).collect())
        })
        .collect()
}

/// Adds the best-scoring affordable asset until none is affordable; ties
/// go to the lowest index.
fn greedy<T: Scalar>(
    net: &EconomicNetwork<T>,
    budget: T,
    mut score: impl FnMut(&[bool], &[usize]) -> Result<Vec<T>, ScenarioError>,
) -> Result<Vec<bool>, ScenarioError> {
    let p = net.prices();
    let mut zeroed = vec![false; net.m()];
    let mut cost = T::zero();
    loop {
        let candidates: Vec<usize> = (0..net.m())
            .filter(|&a| !zeroed[a] && p[a] > T::zero() && T::within_budget(cost + p[a], budget))
            .collect();
        if candidates.is_empty() {
            return Ok(zeroed);
        }
        let scores = score(&zeroed, &candidates)?;
        let mut best = 0;
        for i in 1..candidates.len() {
            if scores[i] > scores[best] {
                best = i;
            }
        }
        let a = candidates[best];
        zeroed[a] = true;
        cost += p[a];
    }
}

fn exact<T: Scalar>(net: &EconomicNetwork<T>, budget: T) -> Result<Vec<bool>, ScenarioError> {
    let m = net.m();
    if m > EXACT_MAX_ASSETS {
        return Err(ScenarioError::TooManyAssets { m, limit: EXACT_MAX_ASSETS });
    }
    let p = net.prices();
    let to_mask = |bits: usize| -> Vec<bool> { (0..m).map(|a| bits >> a & 1 == 1).collect() };
    let cost_of = |bits: usize| -> T { (0..m).filter(|&a| bits >> a & 1 == 1).map(|a| p[a]).sum() };
    let results = (0..1usize << m)
        .into_par_iter()
        .filter(|&bits| T::within_budget(cost_of(bits), budget))
        .map(|bits| defaults_with(net, &to_mask(bits)).map(|eq| (bits, eq.default_count())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = (0usize, 0usize);
    for &(bits, count) in &results {
        let better = count > best.1 || (count == best.1 && cost_of(bits) < cost_of(best.0));
        if better {
            best = (bits, count);
        }
    }
    Ok(to_mask(best.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::network::NetworkData;

    /// Three firms on three unit-price assets; firm 2 also holds half of
    /// firm 0, so zeroing asset 0 takes down both.
    fn net() -> EconomicNetwork<f64> {
        let c = DenseMatrix::from_rows(vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.0, 0.0],
        ])
        .unwrap();
        let data = NetworkData::new(c, DenseMatrix::identity(3), vec![1.0; 3], vec![0.4, 0.5, 1.2], vec![0.5, 0.0, 0.0]);
        EconomicNetwork::new(data).unwrap()
    }

    #[test]
    fn zero_budget_keeps_baseline() {
        for h in [ShockHeuristic::Greedy, ShockHeuristic::Discount, ShockHeuristic::Exact] {
            let r = find_max_shock(&net(), 0.0, h).unwrap();
            assert!(r.assets.is_empty());
            assert_eq!(r.equilibrium.default_count(), 0);
        }
    }

    #[test]
    fn full_budget_fails_everyone() {
        for h in [ShockHeuristic::Greedy, ShockHeuristic::Discount, ShockHeuristic::Exact] {
            let r = find_max_shock(&net(), 3.0, h).unwrap();
            assert_eq!(r.equilibrium.default_count(), 3);
        }
    }

    #[test]
    fn one_asset_picks_the_contagious_one() {
        for h in [ShockHeuristic::Greedy, ShockHeuristic::Discount, ShockHeuristic::Exact] {
            let r = find_max_shock(&net(), 1.0, h).unwrap();
            assert_eq!(r.assets, [0].into_iter().collect(), "{h:?}");
            assert_eq!(r.equilibrium.failed, [0, 2].into_iter().collect());
        }
    }

    #[test]
    fn zeroing_over_budget_is_an_error() {
        let err = zero_assets(&net(), &[0, 1].into_iter().collect(), 1.5).unwrap_err();
        assert!(matches!(err, ScenarioError::BudgetExceeded { .. }));
        let (shocked, cost) = zero_assets(&net(), &[1].into_iter().collect(), 1.0).unwrap();
        assert_eq!(cost, 1.0);
        assert_eq!(shocked.prices(), &[1.0, 0.0, 1.0]);
    }

    #[test]
    fn exact_never_loses_to_greedy_and_grows_with_budget() {
        let mut last = 0;
        for b in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            let exact = find_max_shock(&net(), b, ShockHeuristic::Exact).unwrap();
            let greedy = find_max_shock(&net(), b, ShockHeuristic::Greedy).unwrap();
            assert!(greedy.equilibrium.default_count() <= exact.equilibrium.default_count());
            assert!(exact.equilibrium.default_count() >= last);
            last = exact.equilibrium.default_count();
        }
    }
}
