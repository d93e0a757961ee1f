//! Reduction of a post-shock network to an influence-maximization instance.
//!
//! Restricting to the firms `T` that fail in the best-case equilibrium,
//! reversing the default of a set `S ⊆ T` raises book values by
//! `(I - C)^-1 beta 1_S`. Dropping each node's effect on itself gives the
//! influence function `f(S)`, and the book-value slack a node must recover
//! (with its own failure cost already reversed) is its influence threshold.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::DenseMatrix;
use crate::network::{EconomicNetwork, EquilibriumState, NetworkError};
use crate::rng::stream_rng;
use crate::Scalar;

/// Reduced instances larger than this apply `f` through linear solves
/// instead of materializing the `k x k` operator.
pub const DEFAULT_DENSE_CUTOFF: usize = 5000;

#[derive(Debug, Error)]
pub enum InfluenceError {
    #[error("no firm fails, nothing to intervene on")]
    EmptyFailedSet,
    #[error("node {index} out of range for an instance with {k} nodes")]
    NodeIndex { index: usize, k: usize },
    #[error("invalid influence instance: {0}")]
    InvalidInstance(String),
    #[error("invalid threshold model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone)]
enum Operator<T> {
    /// Off-diagonal influence, `a[(u, v)] = f({v})_u`.
    Dense(DenseMatrix<T>),
    Implicit(Implicit<T>),
}

#[derive(Debug, Clone)]
struct Implicit<T> {
    network: EconomicNetwork<T>,
    /// `[(I - C)^-1]_{tt} beta_t` for each reduced node.
    self_influence: Vec<T>,
}

/// Influence-maximization view of the firms that fail without intervention.
#[derive(Debug, Clone)]
pub struct InfluenceInstance<T> {
    operator: Operator<T>,
    theta_tilde: Vec<T>,
    raw_theta_tilde: Vec<T>,
    weights: Vec<T>,
    node_map: Vec<usize>,
    free_seeds: BTreeSet<usize>,
}

/// Knobs for [`reduce_to_influence_with`].
#[derive(Debug, Clone)]
pub struct ReduceOptions<T> {
    /// Node weights in the objective; all ones when `None`.
    pub weights: Option<Vec<T>>,
    pub dense_cutoff: usize,
}

impl<T> Default for ReduceOptions<T> {
    fn default() -> Self {
        Self { weights: None, dense_cutoff: DEFAULT_DENSE_CUTOFF }
    }
}

/// Builds the reduced instance for the best-case equilibrium `eq` of `net`,
/// with unit node weights.
pub fn reduce_to_influence<T: Scalar>(
    net: &EconomicNetwork<T>,
    eq: &EquilibriumState<T>,
) -> Result<InfluenceInstance<T>, InfluenceError> {
    reduce_to_influence_with(net, eq, ReduceOptions::default())
}

pub fn reduce_to_influence_with<T: Scalar>(
    net: &EconomicNetwork<T>,
    eq: &EquilibriumState<T>,
    options: ReduceOptions<T>,
) -> Result<InfluenceInstance<T>, InfluenceError> {
    if eq.failed.is_empty() {
        return Err(InfluenceError::EmptyFailedSet);
    }
    let node_map: Vec<usize> = eq.failed.iter().copied().collect();
    let k = node_map.len();
    if let Some(&bad) = node_map.iter().find(|&&t| t >= net.n()) {
        return Err(NetworkError::FirmIndex(bad).into());
    }
    let weights = match options.weights {
        Some(w) => {
            check_weights(&w, k)?;
            w
        }
        None => vec![T::one(); k],
    };
    let beta = net.failure_costs();
    let book_theta = net.book_thresholds();
    let book_at_t = net.book_values(&eq.failed)?;

    let (operator, self_influence) = if k <= options.dense_cutoff {
        let inv = net.leontief_inverse();
        let a = DenseMatrix::from_fn(k, k, |u, v| {
            if u == v {
                T::zero()
            } else {
                inv[(node_map[u], node_map[v])] * beta[node_map[v]]
            }
        });
        let own = node_map.iter().map(|&t| inv[(t, t)] * beta[t]).collect();
        (Operator::Dense(a), own)
    } else {
        let mut e = vec![T::zero(); net.n()];
        let mut own = Vec::with_capacity(k);
        for &t in &node_map {
            e[t] = T::one();
            own.push(net.solve(&e)?[t] * beta[t]);
            e[t] = T::zero();
        }
        let op = Operator::Implicit(Implicit { network: net.clone(), self_influence: own.clone() });
        (op, own)
    };

    // slack with the node's own failure cost already reversed
    let raw_theta_tilde: Vec<T> = node_map
        .iter()
        .zip(&self_influence)
        .map(|(&t, &own)| book_theta[t] - book_at_t[t] - own)
        .collect();
    Ok(InfluenceInstance::assemble(operator, raw_theta_tilde, weights, node_map))
}

fn check_weights<T: Scalar>(w: &[T], k: usize) -> Result<(), InfluenceError> {
    if w.len() != k {
        return Err(InfluenceError::InvalidInstance(format!("{} weights for {k} nodes", w.len())));
    }
    if w.iter().any(|x| !(x.is_finite() && *x >= T::zero())) {
        return Err(InfluenceError::InvalidInstance("weights must be finite and nonnegative".into()));
    }
    Ok(())
}

impl<T: Scalar> InfluenceInstance<T> {
    fn assemble(operator: Operator<T>, raw: Vec<T>, weights: Vec<T>, node_map: Vec<usize>) -> Self {
        let theta_tilde: Vec<T> = raw.iter().map(|&x| x.max(T::zero())).collect();
        let free_seeds = theta_tilde
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == T::zero())
            .map(|(i, _)| i)
            .collect();
        Self { operator, theta_tilde, raw_theta_tilde: raw, weights, node_map, free_seeds }
    }

    /// Instance from an explicit influence matrix (`a[(u, v)] = f({v})_u`).
    /// The diagonal is ignored; negative thresholds become free seeds.
    pub fn from_parts(
        a: DenseMatrix<T>,
        theta_tilde: Vec<T>,
        weights: Option<Vec<T>>,
        node_map: Option<Vec<usize>>,
    ) -> Result<Self, InfluenceError> {
        let k = theta_tilde.len();
        if a.rows() != k || a.cols() != k {
            return Err(InfluenceError::InvalidInstance(format!(
                "influence matrix is {}x{}, expected {k}x{k}",
                a.rows(),
                a.cols()
            )));
        }
        let mut a = a;
        for u in 0..k {
            a[(u, u)] = T::zero();
            for v in 0..k {
                if !(a[(u, v)].is_finite() && a[(u, v)] >= T::zero()) {
                    return Err(InfluenceError::InvalidInstance(format!("A[{u},{v}] must be finite and >= 0")));
                }
            }
        }
        if theta_tilde.iter().any(|x| !x.is_finite()) {
            return Err(InfluenceError::InvalidInstance("thresholds must be finite".into()));
        }
        let weights = weights.unwrap_or_else(|| vec![T::one(); k]);
        check_weights(&weights, k)?;
        let node_map = node_map.unwrap_or_else(|| (0..k).collect());
        if node_map.len() != k || node_map.iter().collect::<BTreeSet<_>>().len() != k {
            return Err(InfluenceError::InvalidInstance("node map must list k distinct firms".into()));
        }
        Ok(Self::assemble(Operator::Dense(a), theta_tilde, weights, node_map))
    }

    /// Number of reduced nodes.
    pub fn k(&self) -> usize {
        self.theta_tilde.len()
    }

    /// Influence thresholds after taking the positive part.
    pub fn theta_tilde(&self) -> &[T] {
        &self.theta_tilde
    }

    /// Influence thresholds before taking the positive part.
    pub fn raw_theta_tilde(&self) -> &[T] {
        &self.raw_theta_tilde
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Original firm index of each reduced node.
    pub fn node_map(&self) -> &[usize] {
        &self.node_map
    }

    /// Nodes whose threshold is zero; they activate at no cost.
    pub fn free_seeds(&self) -> &BTreeSet<usize> {
        &self.free_seeds
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.operator, Operator::Dense(_))
    }

    pub fn with_weights(mut self, weights: Vec<T>) -> Result<Self, InfluenceError> {
        check_weights(&weights, self.k())?;
        self.weights = weights;
        Ok(self)
    }

    /// Total weight of a set of nodes.
    pub fn weight_of<'a>(&self, nodes: impl IntoIterator<Item = &'a usize>) -> T {
        nodes.into_iter().map(|&u| self.weights[u]).sum()
    }

    fn check_node(&self, u: usize) -> Result<(), InfluenceError> {
        if u < self.k() {
            Ok(())
        } else {
            Err(InfluenceError::NodeIndex { index: u, k: self.k() })
        }
    }

    /// `f(S)`: influence on every reduced node when the defaults in `S` are reversed.
    pub fn influence(&self, s: &BTreeSet<usize>) -> Result<Vec<T>, InfluenceError> {
        let mut mask = vec![false; self.k()];
        for &u in s {
            self.check_node(u)?;
            mask[u] = true;
        }
        Ok(self.influence_of_mask(&mask))
    }

    pub(crate) fn influence_of_mask(&self, mask: &[bool]) -> Vec<T> {
        match &self.operator {
            Operator::Dense(a) => (0..self.k())
                .map(|u| {
                    a.row(u).iter().zip(mask).filter(|(_, &m)| m).map(|(&x, _)| x).sum()
                })
                .collect(),
            Operator::Implicit(imp) => {
                let beta = imp.network.failure_costs();
                let mut rhs = vec![T::zero(); imp.network.n()];
                for (u, &m) in mask.iter().enumerate() {
                    if m {
                        rhs[self.node_map[u]] = beta[self.node_map[u]];
                    }
                }
                let lifted = imp.network.solve(&rhs).expect("dimension fixed at construction");
                self.node_map
                    .iter()
                    .enumerate()
                    .map(|(u, &t)| if mask[u] { lifted[t] - imp.self_influence[u] } else { lifted[t] })
                    .collect()
            }
        }
    }

    /// `f({v})`, the influence exerted by node `v` alone.
    pub fn column(&self, v: usize) -> Result<Vec<T>, InfluenceError> {
        self.check_node(v)?;
        Ok(self.column_unchecked(v))
    }

    pub(crate) fn column_unchecked(&self, v: usize) -> Vec<T> {
        match &self.operator {
            Operator::Dense(a) => a.column(v).collect(),
            Operator::Implicit(_) => {
                let mut mask = vec![false; self.k()];
                mask[v] = true;
                self.influence_of_mask(&mask)
            }
        }
    }

    /// Adds `f({v})` into `acc`; `f` is additive across nodes.
    pub(crate) fn accumulate(&self, v: usize, acc: &mut [T]) {
        match &self.operator {
            Operator::Dense(a) => {
                for (u, slot) in acc.iter_mut().enumerate() {
                    *slot += a[(u, v)];
                }
            }
            Operator::Implicit(_) => {
                for (slot, x) in acc.iter_mut().zip(self.column_unchecked(v)) {
                    *slot += x;
                }
            }
        }
    }

    /// Materializes the reduced operator.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        match &self.operator {
            Operator::Dense(a) => a.clone(),
            Operator::Implicit(_) => {
                let cols: Vec<Vec<T>> = (0..self.k()).map(|v| self.column_unchecked(v)).collect();
                DenseMatrix::from_fn(self.k(), self.k(), |u, v| cols[v][u])
            }
        }
    }

    /// Lifts a reduced payment vector to a firm-level intervention.
    pub fn lift_payments(&self, x: &[T], n: usize) -> Vec<T> {
        let mut gamma = vec![T::zero(); n];
        for (u, &t) in self.node_map.iter().enumerate() {
            gamma[t] = x[u];
        }
        gamma
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
struct InstanceJson<T> {
    k: usize,
    #[serde(rename = "A")]
    a: DenseMatrix<T>,
    theta_tilde: Vec<T>,
    weights: Vec<T>,
    node_map: Vec<usize>,
    free_seeds: Vec<usize>,
}

impl<T: Scalar> Serialize for InfluenceInstance<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        InstanceJson {
            k: self.k(),
            a: self.to_dense(),
            theta_tilde: self.raw_theta_tilde.clone(),
            weights: self.weights.clone(),
            node_map: self.node_map.clone(),
            free_seeds: self.free_seeds.iter().copied().collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for InfluenceInstance<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = InstanceJson::<T>::deserialize(d)?;
        if j.k != j.theta_tilde.len() {
            return Err(serde::de::Error::custom("k does not match theta_tilde"));
        }
        Self::from_parts(j.a, j.theta_tilde, Some(j.weights), Some(j.node_map)).map_err(serde::de::Error::custom)
    }
}

/// Distribution of influence thresholds around their nominal values.
///
/// Draws must be independent across nodes. Whether `F_u ∘ f_u` stays
/// monotone submodular is up to the implementor.
pub trait ThresholdDistribution<T: Scalar>: Sync {
    /// Writes one draw per node into `out`.
    fn sample_into(&self, nominal: &[T], rng: &mut dyn RngCore, out: &mut [T]);

    /// Largest threshold each node can draw.
    fn upper_support(&self, nominal: &[T]) -> Vec<T>;

    /// True when every draw equals the nominal thresholds.
    fn is_fixed(&self) -> bool;
}

/// Built-in threshold models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ThresholdModel {
    Fixed,
    /// Independent uniform draws on
    /// `[max(0, θ(1 - half_width)), θ(1 + half_width)]`.
    UniformBand { half_width: f64 },
}

impl ThresholdModel {
    pub fn uniform_band(half_width: f64) -> Result<Self, InfluenceError> {
        if !(0.0..=1.0).contains(&half_width) {
            return Err(InfluenceError::InvalidModel(format!("band half-width {half_width} not in [0, 1]")));
        }
        Ok(if half_width == 0.0 { ThresholdModel::Fixed } else { ThresholdModel::UniformBand { half_width } })
    }

    pub fn half_width(&self) -> f64 {
        match self {
            ThresholdModel::Fixed => 0.0,
            ThresholdModel::UniformBand { half_width } => *half_width,
        }
    }
}

impl<T: Scalar> ThresholdDistribution<T> for ThresholdModel {
    fn sample_into(&self, nominal: &[T], rng: &mut dyn RngCore, out: &mut [T]) {
        let h = T::of(self.half_width());
        for (slot, &theta) in out.iter_mut().zip(nominal) {
            *slot = if h == T::zero() {
                theta
            } else {
                let lo = (theta * (T::one() - h)).max(T::zero());
                let hi = theta * (T::one() + h);
                let u: f64 = rng.random();
                lo + (hi - lo) * T::of(u)
            };
        }
    }

    fn upper_support(&self, nominal: &[T]) -> Vec<T> {
        let h = T::of(self.half_width());
        nominal.iter().map(|&t| t * (T::one() + h)).collect()
    }

    fn is_fixed(&self) -> bool {
        self.half_width() == 0.0
    }
}

/// One threshold draw per node, a deterministic function of `seed`.
pub fn sample_thresholds<T: Scalar, M: ThresholdDistribution<T>>(
    inst: &InfluenceInstance<T>,
    model: &M,
    seed: u64,
) -> Vec<T> {
    let mut out = vec![T::zero(); inst.k()];
    model.sample_into(inst.theta_tilde(), &mut stream_rng(seed, 0), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EquilibriumMode, NetworkData};
    use approx::assert_abs_diff_eq;

    fn two_firm(theta: [f64; 2]) -> EconomicNetwork<f64> {
        let c = DenseMatrix::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        EconomicNetwork::new(NetworkData::new(c, DenseMatrix::identity(2), vec![1.0, 0.5], theta.to_vec(), vec![0.3, 0.3]))
            .unwrap()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn two_firm_thresholds_by_hand() {
        // θ/ĉ = (1.6, 1.8); (I-C)^-1 (Dp - β1_{T\u}) gives 22/15 at u=0 and 17/15 at u=1
        let net = two_firm([0.8, 0.9]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let inst = reduce_to_influence(&net, &eq).unwrap();
        assert_eq!(inst.node_map(), &[0, 1]);
        assert_abs_diff_eq!(inst.theta_tilde()[0], 1.6 - 22.0 / 15.0, epsilon = 1e-13);
        assert_abs_diff_eq!(inst.theta_tilde()[1], 1.8 - 17.0 / 15.0, epsilon = 1e-13);
        // (I-C)^-1 β off-diagonal: 0.3 * 2/3
        let a = inst.to_dense();
        assert_abs_diff_eq!(a[(0, 1)], 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(a[(1, 0)], 0.2, epsilon = 1e-14);
        assert_eq!(a[(0, 0)], 0.0);
        assert!(inst.free_seeds().is_empty());
    }

    #[test]
    fn paying_the_threshold_reverses_a_default() {
        let net = two_firm([0.9, 0.9]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let inst = reduce_to_influence(&net, &eq).unwrap();
        for u in 0..2 {
            let mut x = vec![0.0; 2];
            x[u] = inst.theta_tilde()[u];
            let after = net.apply_intervention(&inst.lift_payments(&x, 2)).unwrap();
            assert!(!after.failed.contains(&u));
            x[u] -= 1e-6;
            let after = net.apply_intervention(&inst.lift_payments(&x, 2)).unwrap();
            assert!(after.failed.contains(&u));
        }
    }

    #[test]
    fn empty_failed_set_is_an_error() {
        let net = two_firm([0.0, 0.0]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        assert!(matches!(reduce_to_influence(&net, &eq), Err(InfluenceError::EmptyFailedSet)));
    }

    #[test]
    fn single_failed_node_has_no_propagation() {
        // firm 2 owns nothing of firm 0 and is owned by no one; only firm 2 fails
        let c = DenseMatrix::from_rows(vec![
            vec![0.0, 0.3, 0.0],
            vec![0.2, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ])
        .unwrap();
        let data = NetworkData::new(c, DenseMatrix::identity(3), vec![1.0, 1.0, 0.2], vec![0.5, 0.5, 0.5], vec![0.1; 3]);
        let net = EconomicNetwork::new(data).unwrap();
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        assert_eq!(eq.failed, set(&[2]));
        let inst = reduce_to_influence(&net, &eq).unwrap();
        assert_eq!(inst.to_dense(), DenseMatrix::zeros(1, 1));
        // slack net of own cost: 0.5 - (0.2 - 0.1) - 0.1
        assert_abs_diff_eq!(inst.theta_tilde()[0], 0.3, epsilon = 1e-14);
    }

    #[test]
    fn zero_failure_costs_give_zero_influence() {
        let c = DenseMatrix::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let data = NetworkData::new(c, DenseMatrix::identity(2), vec![1.0, 0.5], vec![0.9, 0.9], vec![0.0, 0.0]);
        let net = EconomicNetwork::new(data).unwrap();
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let inst = reduce_to_influence(&net, &eq).unwrap();
        assert_eq!(inst.influence(&set(&[0, 1])).unwrap(), vec![0.0, 0.0]);
        let v = net.market_values(&set(&[])).unwrap();
        for (u, &t) in inst.node_map().iter().enumerate() {
            assert_abs_diff_eq!(inst.theta_tilde()[u], (0.9 - v[t]) / 0.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn influence_of_empty_set_is_zero_and_bad_index_errors() {
        let net = two_firm([0.9, 0.9]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let inst = reduce_to_influence(&net, &eq).unwrap();
        assert_eq!(inst.influence(&set(&[])).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(inst.influence(&set(&[5])), Err(InfluenceError::NodeIndex { index: 5, k: 2 })));
    }

    #[test]
    fn implicit_operator_matches_dense() {
        let net = two_firm([0.9, 0.9]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let dense = reduce_to_influence(&net, &eq).unwrap();
        let implicit =
            reduce_to_influence_with(&net, &eq, ReduceOptions { weights: None, dense_cutoff: 0 }).unwrap();
        assert!(!implicit.is_dense());
        for s in [set(&[]), set(&[0]), set(&[1]), set(&[0, 1])] {
            let a = dense.influence(&s).unwrap();
            let b = implicit.influence(&s).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-14);
            }
        }
        for (x, y) in dense.theta_tilde().iter().zip(implicit.theta_tilde()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn negative_thresholds_become_free_seeds() {
        let a = DenseMatrix::from_rows(vec![vec![0.0, 0.1], vec![0.2, 0.0]]).unwrap();
        let inst = InfluenceInstance::from_parts(a, vec![-0.5, 0.3], None, None).unwrap();
        assert_eq!(inst.theta_tilde(), &[0.0, 0.3]);
        assert_eq!(inst.raw_theta_tilde(), &[-0.5, 0.3]);
        assert_eq!(inst.free_seeds(), &set(&[0]));
    }

    #[test]
    fn from_parts_rejects_negative_influence() {
        let a = DenseMatrix::from_rows(vec![vec![0.0, -0.1], vec![0.2, 0.0]]).unwrap();
        assert!(InfluenceInstance::from_parts(a, vec![0.5, 0.3], None, None).is_err());
    }

    #[test]
    fn json_round_trip() {
        let net = two_firm([0.9, 0.9]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let inst = reduce_to_influence(&net, &eq).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        let back: InfluenceInstance<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_dense(), inst.to_dense());
        assert_eq!(back.theta_tilde(), inst.theta_tilde());
        assert_eq!(back.node_map(), inst.node_map());
    }

    #[test]
    fn fixed_model_returns_nominal_thresholds() {
        let a = DenseMatrix::zeros(3, 3);
        let inst = InfluenceInstance::from_parts(a, vec![0.1, 0.2, 0.3], None, None).unwrap();
        assert_eq!(sample_thresholds(&inst, &ThresholdModel::Fixed, 9), vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn band_sampling_is_deterministic_and_in_range() {
        let a = DenseMatrix::zeros(3, 3);
        let inst = InfluenceInstance::from_parts(a, vec![0.0, 0.2, 1.0], None, None).unwrap();
        let model = ThresholdModel::uniform_band(0.5).unwrap();
        let x = sample_thresholds(&inst, &model, 42);
        assert_eq!(x, sample_thresholds(&inst, &model, 42));
        assert_ne!(x, sample_thresholds(&inst, &model, 43));
        assert_eq!(x[0], 0.0);
        assert!((0.1..=0.3).contains(&x[1]));
        assert!((0.5..=1.5).contains(&x[2]));
    }

    #[test]
    fn band_sample_mean_matches_nominal() {
        let model = ThresholdModel::uniform_band(0.5).unwrap();
        let nominal = [0.25, 1.0, 3.0];
        let mut rng = stream_rng(11, 0);
        let mut sums = [0.0; 3];
        let mut out = [0.0; 3];
        let draws = 100_000;
        for _ in 0..draws {
            ThresholdDistribution::<f64>::sample_into(&model, &nominal, &mut rng, &mut out);
            for i in 0..3 {
                sums[i] += out[i];
            }
        }
        for i in 0..3 {
            let mean = sums[i] / draws as f64;
            assert!((mean - nominal[i]).abs() < 0.01 * nominal[i], "node {i}: mean {mean}");
        }
    }

    #[test]
    fn band_half_width_is_validated() {
        assert!(ThresholdModel::uniform_band(1.5).is_err());
        assert_eq!(ThresholdModel::uniform_band(0.0).unwrap(), ThresholdModel::Fixed);
        let m = ThresholdModel::uniform_band(0.5).unwrap();
        assert_eq!(ThresholdDistribution::<f64>::upper_support(&m, &[2.0]), vec![3.0]);
    }
}
