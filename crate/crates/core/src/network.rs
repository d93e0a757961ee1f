//! Cross-holding economic network: values, failures and equilibria.
//!
//! Firms hold underlying assets (`D`, priced by `p`) and fractions of each
//! other (`C`). Book values solve `V = C V + D p - beta * 1_failed` and market
//! values are `v = Ĉ V` with `Ĉ_ii = 1 - sum_j C_ji`. A firm fails when its
//! market value falls below its threshold `theta_i`, which costs `beta_i` of
//! book value. Failure sets that reproduce themselves form a lattice; the
//! best case (fewest failures) and worst case are its extremes.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError, LuFactorization};
use crate::Scalar;

/// Whether every asset must be fully owned by the firms in the network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetAllocation {
    /// Each column of `D` sums to one.
    #[default]
    Full,
    /// Columns of `D` may sum to less than one (part of the asset is held
    /// outside the network).
    Partial,
}

impl AssetAllocation {
    fn is_full(&self) -> bool {
        *self == AssetAllocation::Full
    }
}

/// Raw model parameters; the serialized network format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NetworkData<T> {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "C")]
    pub c: DenseMatrix<T>,
    #[serde(rename = "D")]
    pub d: DenseMatrix<T>,
    pub p: Vec<T>,
    pub theta: Vec<T>,
    pub beta: Vec<T>,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "AssetAllocation::is_full")]
    pub allocation: AssetAllocation,
}

impl<T: Scalar> NetworkData<T> {
    /// Labels default to `firm0..firm{n-1}`.
    pub fn new(
        c: DenseMatrix<T>,
        d: DenseMatrix<T>,
        p: Vec<T>,
        theta: Vec<T>,
        beta: Vec<T>,
    ) -> Self {
        let n = c.rows();
        let m = d.cols();
        Self {
            n,
            m,
            c,
            d,
            p,
            theta,
            beta,
            labels: (0..n).map(|i| format!("firm{i}")).collect(),
            allocation: AssetAllocation::Full,
        }
    }

    pub fn with_allocation(mut self, allocation: AssetAllocation) -> Self {
        self.allocation = allocation;
        self
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }
}

/// One breached model invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Dimension { field: &'static str, expected: String, got: String },
    NonFinite { field: &'static str, index: String },
    Negative { field: &'static str, index: String, value: f64 },
    NonzeroDiagonal { index: usize, value: f64 },
    ColumnSumNotBelowOne { column: usize, sum: f64 },
    AssetNotFullyAllocated { asset: usize, sum: f64 },
    LabelCount { expected: usize, got: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension { field, expected, got } => {
                write!(f, "{field} has dimension {got}, expected {expected}")
            }
            Violation::NonFinite { field, index } => write!(f, "{field}{index} is not finite"),
            Violation::Negative { field, index, value } => {
                write!(f, "{field}{index} = {value} is negative")
            }
            Violation::NonzeroDiagonal { index, value } => {
                write!(f, "nonzero diagonal at {index} (C = {value})")
            }
            Violation::ColumnSumNotBelowOne { column, sum } => {
                write!(f, "column {column} sum not < 1 (sum = {sum})")
            }
            Violation::AssetNotFullyAllocated { asset, sum } => {
                write!(f, "asset {asset} shares sum to {sum}, expected 1")
            }
            Violation::LabelCount { expected, got } => {
                write!(f, "labels has {got} entries, expected {expected}")
            }
        }
    }
}

const ALLOCATION_TOLERANCE: f64 = 1e-9;

/// Lists every breached invariant; an empty list means the data is a valid network.
pub fn validate_network<T: Scalar>(data: &NetworkData<T>) -> Vec<Violation> {
    let mut out = Vec::new();
    let (n, m) = (data.n, data.m);
    let dims = |field, er: usize, ec: usize, gr: usize, gc: usize| Violation::Dimension {
        field,
        expected: format!("{er}x{ec}"),
        got: format!("{gr}x{gc}"),
    };
    if data.c.rows() != n || data.c.cols() != n {
        out.push(dims("C", n, n, data.c.rows(), data.c.cols()));
    }
    if data.d.rows() != n || data.d.cols() != m {
        out.push(dims("D", n, m, data.d.rows(), data.d.cols()));
    }
    for (field, v, len) in [("p", &data.p, m), ("theta", &data.theta, n), ("beta", &data.beta, n)] {
        if v.len() != len {
            out.push(Violation::Dimension {
                field,
                expected: len.to_string(),
                got: v.len().to_string(),
            });
        }
    }
    if data.labels.len() != n {
        out.push(Violation::LabelCount { expected: n, got: data.labels.len() });
    }
    if !out.is_empty() {
        return out;
    }

    for i in 0..n {
        for j in 0..n {
            let x = data.c[(i, j)];
            if !x.is_finite() {
                out.push(Violation::NonFinite { field: "C", index: format!("[{i},{j}]") });
            } else if x < T::zero() {
                out.push(Violation::Negative {
                    field: "C",
                    index: format!("[{i},{j}]"),
                    value: x.as_f64(),
                });
            }
        }
        if data.c[(i, i)] != T::zero() {
            out.push(Violation::NonzeroDiagonal { index: i, value: data.c[(i, i)].as_f64() });
        }
    }
    for j in 0..n {
        let sum = data.c.column_sum(j);
        if sum.is_nan() || sum >= T::one() {
            out.push(Violation::ColumnSumNotBelowOne { column: j, sum: sum.as_f64() });
        }
    }
    for i in 0..n {
        for k in 0..m {
            let x = data.d[(i, k)];
            if !x.is_finite() {
                out.push(Violation::NonFinite { field: "D", index: format!("[{i},{k}]") });
            } else if x < T::zero() {
                out.push(Violation::Negative {
                    field: "D",
                    index: format!("[{i},{k}]"),
                    value: x.as_f64(),
                });
            }
        }
    }
    for k in 0..m {
        let sum = data.d.column_sum(k).as_f64();
        let bad = match data.allocation {
            AssetAllocation::Full => (sum - 1.0).abs() > ALLOCATION_TOLERANCE,
            AssetAllocation::Partial => sum > 1.0 + ALLOCATION_TOLERANCE,
        };
        if bad {
            out.push(Violation::AssetNotFullyAllocated { asset: k, sum });
        }
    }
    for (field, v, nonneg) in
        [("p", &data.p, true), ("beta", &data.beta, true), ("theta", &data.theta, false)]
    {
        for (i, &x) in v.iter().enumerate() {
            if !x.is_finite() {
                out.push(Violation::NonFinite { field, index: format!("[{i}]") });
            } else if nonneg && x < T::zero() {
                out.push(Violation::Negative { field, index: format!("[{i}]"), value: x.as_f64() });
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid network: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("I - C is singular: {0}")]
    Singular(#[from] LinalgError),
    #[error("intervention payment at firm {index} is negative or not finite ({value})")]
    NegativeIntervention { index: usize, value: f64 },
    #[error("{what} has length {got}, expected {expected}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("firm index {0} out of range")]
    FirmIndex(usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Which extreme of the equilibrium lattice to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumMode {
    /// Fewest failures; reached by iterating up from no failures.
    BestCase,
    /// Most failures; reached by iterating down from all failures.
    WorstCase,
    /// Reached by reversing defaults of an existing best-case equilibrium
    /// after an intervention (see [`EconomicNetwork::apply_intervention`]).
    Reversal,
}

/// A self-consistent failure set with its book and market values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct EquilibriumState<T> {
    pub book_values: Vec<T>,
    pub market_values: Vec<T>,
    pub failed: BTreeSet<usize>,
    pub mode: EquilibriumMode,
    pub iterations: usize,
}

impl<T: Scalar> EquilibriumState<T> {
    pub fn default_count(&self) -> usize {
        self.failed.len()
    }

    pub fn total_market_value(&self) -> T {
        self.market_values.iter().copied().sum()
    }
}

/// Structure shared by every network with the same `C`: the factorized
/// `I - C`, `Ĉ`, and the lazily built `(I - C)^-1`.
#[derive(Debug)]
struct Structure<T> {
    lu: LuFactorization<T>,
    c_hat: Vec<T>,
    inverse: OnceLock<DenseMatrix<T>>,
}

/// A validated network with its cached factorization.
///
/// Cloning is cheap in the factorization: clones and price-shocked copies
/// share it.
#[derive(Debug, Clone)]
pub struct EconomicNetwork<T> {
    data: NetworkData<T>,
    underlying: Vec<T>,
    structure: Arc<Structure<T>>,
}

impl<T: Scalar> EconomicNetwork<T> {
    pub fn new(data: NetworkData<T>) -> Result<Self, NetworkError> {
        let violations = validate_network(&data);
        if !violations.is_empty() {
            return Err(NetworkError::Invalid(violations));
        }
        let n = data.n;
        let i_minus_c = DenseMatrix::from_fn(n, n, |i, j| {
            let id = if i == j { T::one() } else { T::zero() };
            id - data.c[(i, j)]
        });
        let lu = LuFactorization::new(&i_minus_c)?;
        let c_hat = (0..n).map(|j| T::one() - data.c.column_sum(j)).collect();
        let underlying = data.d.mul_vec(&data.p);
        Ok(Self {
            data,
            underlying,
            structure: Arc::new(Structure { lu, c_hat, inverse: OnceLock::new() }),
        })
    }

    pub fn data(&self) -> &NetworkData<T> {
        &self.data
    }

    pub fn into_data(self) -> NetworkData<T> {
        self.data
    }

    pub fn n(&self) -> usize {
        self.data.n
    }

    pub fn m(&self) -> usize {
        self.data.m
    }

    pub fn cross_holdings(&self) -> &DenseMatrix<T> {
        &self.data.c
    }

    pub fn prices(&self) -> &[T] {
        &self.data.p
    }

    pub fn thresholds(&self) -> &[T] {
        &self.data.theta
    }

    pub fn failure_costs(&self) -> &[T] {
        &self.data.beta
    }

    pub fn labels(&self) -> &[String] {
        &self.data.labels
    }

    /// `Ĉ_ii`, the share of firm `i` held outside the network.
    pub fn self_share(&self) -> &[T] {
        &self.structure.c_hat
    }

    /// `D p`.
    pub fn underlying_values(&self) -> &[T] {
        &self.underlying
    }

    /// `Ĉ^-1 theta`: thresholds expressed in book-value units.
    pub fn book_thresholds(&self) -> Vec<T> {
        self.data.theta.iter().zip(self.self_share()).map(|(&t, &c)| t / c).collect()
    }

    /// Same network with new asset prices; shares the factorization.
    pub fn with_prices(&self, p: Vec<T>) -> Result<Self, NetworkError> {
        if p.len() != self.m() {
            return Err(NetworkError::Length { what: "prices", expected: self.m(), got: p.len() });
        }
        if let Some((i, &x)) = p.iter().enumerate().find(|(_, x)| !(x.is_finite() && **x >= T::zero())) {
            return Err(NetworkError::Invalid(vec![Violation::Negative {
                field: "p",
                index: format!("[{i}]"),
                value: x.as_f64(),
            }]));
        }
        let mut data = self.data.clone();
        data.p = p;
        let underlying = data.d.mul_vec(&data.p);
        Ok(Self { data, underlying, structure: Arc::clone(&self.structure) })
    }

    /// `(I - C)^-1`, built once per cross-holding structure.
    pub fn leontief_inverse(&self) -> &DenseMatrix<T> {
        self.structure.inverse.get_or_init(|| self.structure.lu.inverse())
    }

    /// Solves `(I - C) x = rhs`.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>, NetworkError> {
        Ok(self.structure.lu.solve(rhs)?)
    }

    /// `Ĉ (I - C)^-1`, which is column stochastic.
    pub fn dependency_matrix(&self) -> DenseMatrix<T> {
        let inv = self.leontief_inverse();
        let c_hat = self.self_share();
        DenseMatrix::from_fn(self.n(), self.n(), |i, j| c_hat[i] * inv[(i, j)])
    }

    fn net_underlying(&self, failed: &[bool]) -> Vec<T> {
        self.underlying
            .iter()
            .zip(&self.data.beta)
            .zip(failed)
            .map(|((&u, &b), &f)| if f { u - b } else { u })
            .collect()
    }

    fn book_values_mask(&self, failed: &[bool]) -> Vec<T> {
        self.structure
            .lu
            .solve(&self.net_underlying(failed))
            .expect("length checked by caller")
    }

    fn check_set(&self, failed: &BTreeSet<usize>) -> Result<Vec<bool>, NetworkError> {
        let mut mask = vec![false; self.n()];
        for &i in failed {
            *mask.get_mut(i).ok_or(NetworkError::FirmIndex(i))? = true;
        }
        Ok(mask)
    }

    /// `V = (I - C)^-1 (D p - beta * 1_failed)`.
    pub fn book_values(&self, failed: &BTreeSet<usize>) -> Result<Vec<T>, NetworkError> {
        let mask = self.check_set(failed)?;
        Ok(self.book_values_mask(&mask))
    }

    /// `v = Ĉ (I - C)^-1 (D p - beta * 1_failed)`. Does not check that
    /// `failed` is self-consistent.
    pub fn market_values(&self, failed: &BTreeSet<usize>) -> Result<Vec<T>, NetworkError> {
        Ok(self.to_market(&self.book_values(failed)?))
    }

    fn to_market(&self, book: &[T]) -> Vec<T> {
        book.iter().zip(self.self_share()).map(|(&v, &c)| c * v).collect()
    }

    /// Indicator `v_i < theta_i` for the given failure set.
    pub fn failure_indicator(&self, failed: &BTreeSet<usize>) -> Result<BTreeSet<usize>, NetworkError> {
        let v = self.market_values(failed)?;
        Ok(self.below_threshold(&v).collect())
    }

    fn below_threshold<'a>(&'a self, market: &'a [T]) -> impl Iterator<Item = usize> + 'a {
        market
            .iter()
            .zip(&self.data.theta)
            .enumerate()
            .filter(|(_, (&v, &t))| !T::clears(v, t))
            .map(|(i, _)| i)
    }

    /// Best- or worst-case equilibrium of the uncontrolled network.
    pub fn solve_equilibrium(&self, mode: EquilibriumMode) -> Result<EquilibriumState<T>, NetworkError> {
        let zero = vec![T::zero(); self.n()];
        self.iterate_lattice(&zero, mode)
    }

    /// Extreme equilibria of the network where firm `i` fails iff
    /// `V_i + gamma_i < [Ĉ^-1 theta]_i`.
    pub fn intervened_equilibrium(
        &self,
        gamma: &[T],
        mode: EquilibriumMode,
    ) -> Result<EquilibriumState<T>, NetworkError> {
        self.check_gamma(gamma)?;
        self.iterate_lattice(gamma, mode)
    }

    fn iterate_lattice(&self, gamma: &[T], mode: EquilibriumMode) -> Result<EquilibriumState<T>, NetworkError> {
        let n = self.n();
        let c_hat = self.self_share();
        let theta = &self.data.theta;
        let (mut failed, growing) = match mode {
            EquilibriumMode::BestCase => (vec![false; n], true),
            EquilibriumMode::WorstCase => (vec![true; n], false),
            EquilibriumMode::Reversal => {
                return self.apply_intervention(gamma);
            }
        };
        let mut iterations = 0;
        loop {
            iterations += 1;
            let book = self.book_values_mask(&failed);
            let mut changed = false;
            for i in 0..n {
                let fails = !T::clears(c_hat[i] * (book[i] + gamma[i]), theta[i]);
                // synchronous sweep: up from nothing only adds, down from all only removes
                if growing && fails && !failed[i] {
                    failed[i] = true;
                    changed = true;
                } else if !growing && !fails && failed[i] {
                    failed[i] = false;
                    changed = true;
                }
            }
            if !changed {
                let market = self.to_market(&book);
                return Ok(EquilibriumState {
                    book_values: book,
                    market_values: market,
                    failed: mask_to_set(&failed),
                    mode,
                    iterations,
                });
            }
        }
    }

    fn check_gamma(&self, gamma: &[T]) -> Result<(), NetworkError> {
        if gamma.len() != self.n() {
            return Err(NetworkError::Length { what: "gamma", expected: self.n(), got: gamma.len() });
        }
        if let Some((index, &g)) = gamma.iter().enumerate().find(|(_, g)| !(g.is_finite() && **g >= T::zero())) {
            return Err(NetworkError::NegativeIntervention { index, value: g.as_f64() });
        }
        Ok(())
    }

    /// Applies intervention payments `gamma` (book-value units) after the
    /// uncontrolled best-case cascade has happened.
    ///
    /// Starting from the best-case failure set, a failed firm `i` has its
    /// default reversed once `V_i + gamma_i` clears `[Ĉ^-1 theta]_i` with its
    /// own failure cost removed; reversals raise other firms' values and the
    /// sweep repeats until nothing changes. The result is an equilibrium of
    /// the intervened network (`V_i + gamma_i < [Ĉ^-1 theta]_i` exactly for
    /// failed firms) and its failure set shrinks as `gamma` grows.
    pub fn apply_intervention(&self, gamma: &[T]) -> Result<EquilibriumState<T>, NetworkError> {
        self.check_gamma(gamma)?;
        let baseline = self.solve_equilibrium(EquilibriumMode::BestCase)?;
        let n = self.n();
        let mut failed = vec![false; n];
        for &i in &baseline.failed {
            failed[i] = true;
        }
        if baseline.failed.is_empty() {
            return Ok(EquilibriumState { mode: EquilibriumMode::Reversal, ..baseline });
        }
        let inv = self.leontief_inverse();
        let c_hat = self.self_share();
        let beta = &self.data.beta;
        let theta = &self.data.theta;
        let mut iterations = baseline.iterations;
        loop {
            iterations += 1;
            let book = self.book_values_mask(&failed);
            let reversed: Vec<usize> = (0..n)
                .filter(|&i| failed[i])
                .filter(|&i| {
                    let without_own_cost = book[i] + beta[i] * inv[(i, i)];
                    T::clears(c_hat[i] * (without_own_cost + gamma[i]), theta[i])
                })
                .collect();
            if reversed.is_empty() {
                let market = self.to_market(&book);
                return Ok(EquilibriumState {
                    book_values: book,
                    market_values: market,
                    failed: mask_to_set(&failed),
                    mode: EquilibriumMode::Reversal,
                    iterations,
                });
            }
            for i in reversed {
                failed[i] = false;
            }
        }
    }
}

fn mask_to_set(mask: &[bool]) -> BTreeSet<usize> {
    mask.iter().enumerate().filter(|(_, &f)| f).map(|(i, _)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_firm(dp: [f64; 2], theta: [f64; 2], beta: [f64; 2]) -> EconomicNetwork<f64> {
        let c = DenseMatrix::from_rows(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let d = DenseMatrix::identity(2);
        EconomicNetwork::new(NetworkData::new(c, d, dp.to_vec(), theta.to_vec(), beta.to_vec())).unwrap()
    }

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn column_sum_of_one_is_a_violation() {
        let c = DenseMatrix::from_rows(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let data = NetworkData::new(c, DenseMatrix::identity(2), vec![1.0; 2], vec![0.0; 2], vec![0.0; 2]);
        let v = validate_network(&data);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("column 0 sum not < 1"), "{}", v[0]);
    }

    #[test]
    fn nonzero_diagonal_is_a_violation() {
        let c = DenseMatrix::from_rows(vec![vec![0.1, 0.0], vec![0.0, 0.0]]).unwrap();
        let data = NetworkData::new(c, DenseMatrix::identity(2), vec![1.0; 2], vec![0.0; 2], vec![0.0; 2]);
        let v = validate_network(&data);
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("nonzero diagonal at 0"), "{}", v[0]);
    }

    #[test]
    fn valid_two_firm_network_has_no_violations() {
        let net = two_firm([1.0, 1.0], [0.0, 0.0], [0.0, 0.0]);
        assert!(validate_network(net.data()).is_empty());
    }

    #[test]
    fn negative_price_and_beta_and_allocation_are_reported() {
        let c = DenseMatrix::zeros(2, 2);
        let d = DenseMatrix::from_rows(vec![vec![0.5], vec![0.2]]).unwrap();
        let data = NetworkData::new(c, d, vec![-1.0], vec![0.0; 2], vec![0.0, -0.1]);
        let v = validate_network(&data);
        assert!(v.iter().any(|x| matches!(x, Violation::AssetNotFullyAllocated { asset: 0, .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::Negative { field: "p", .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::Negative { field: "beta", .. })));
        let partial = NetworkData { allocation: AssetAllocation::Partial, p: vec![1.0], beta: vec![0.0; 2], ..data };
        assert!(validate_network(&partial).is_empty());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let data = NetworkData::new(
            DenseMatrix::zeros(2, 2),
            DenseMatrix::identity(2),
            vec![1.0; 3],
            vec![0.0; 2],
            vec![0.0; 2],
        );
        assert!(matches!(validate_network(&data)[0], Violation::Dimension { field: "p", .. }));
        assert!(matches!(EconomicNetwork::new(data), Err(NetworkError::Invalid(_))));
    }

    #[test]
    fn dependency_matrix_two_firm() {
        let net = two_firm([1.0, 1.0], [0.0, 0.0], [0.0, 0.0]);
        let m = net.dependency_matrix();
        let want = [[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(m[(i, j)], want[i][j], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn dependency_matrix_without_cross_holdings_is_identity() {
        let data = NetworkData::new(
            DenseMatrix::zeros(3, 3),
            DenseMatrix::identity(3),
            vec![1.0; 3],
            vec![0.0; 3],
            vec![0.0; 3],
        );
        let m = EconomicNetwork::new(data).unwrap().dependency_matrix();
        assert_eq!(m, DenseMatrix::identity(3));
    }

    #[test]
    fn market_values_two_firm() {
        let net = two_firm([1.0, 1.0], [0.0, 0.0], [0.0, 0.0]);
        let v = net.market_values(&set(&[])).unwrap();
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-14);

        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.3, 0.3]);
        let v = net.market_values(&set(&[1])).unwrap();
        assert_abs_diff_eq!(v[0], 2.2 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v[1], 1.4 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn zero_failure_costs_make_failed_set_irrelevant() {
        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.0, 0.0]);
        assert_eq!(net.market_values(&set(&[0, 1])).unwrap(), net.market_values(&set(&[])).unwrap());
    }

    #[test]
    fn out_of_range_failed_index_is_an_error() {
        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.3, 0.3]);
        assert!(matches!(net.market_values(&set(&[2])), Err(NetworkError::FirmIndex(2))));
    }

    #[test]
    fn best_case_two_firm_cascade() {
        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.3, 0.3]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        assert_eq!(eq.failed, set(&[0, 1]));
        assert_abs_diff_eq!(eq.market_values[0], 1.6 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eq.market_values[1], 1.1 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn contagion_takes_a_second_sweep() {
        // firm 1 fails on its own; its failure cost then drags firm 0 under
        let net = two_firm([1.0, 0.5], [0.8, 0.9], [0.3, 0.3]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        assert_eq!(eq.failed, set(&[0, 1]));
        assert_eq!(eq.iterations, 3);
    }

    #[test]
    fn zero_thresholds_mean_no_failures() {
        let net = two_firm([1.0, 0.5], [0.0, 0.0], [0.3, 0.3]);
        for mode in [EquilibriumMode::BestCase, EquilibriumMode::WorstCase] {
            let eq = net.solve_equilibrium(mode).unwrap();
            assert!(eq.failed.is_empty());
            assert_abs_diff_eq!(eq.market_values[0], 2.5 / 3.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_failure_costs_collapse_the_lattice() {
        let net = two_firm([1.0, 0.5], [0.8, 0.9], [0.0, 0.0]);
        let best = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let worst = net.solve_equilibrium(EquilibriumMode::WorstCase).unwrap();
        assert_eq!(best.failed, set(&[1]));
        assert_eq!(worst.failed, best.failed);
    }

    #[test]
    fn self_fulfilling_failures_separate_best_and_worst() {
        // each firm survives if the other does, fails if the other fails
        let net = two_firm([1.0, 1.0], [0.9, 0.9], [0.3, 0.3]);
        let best = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let worst = net.solve_equilibrium(EquilibriumMode::WorstCase).unwrap();
        assert!(best.failed.is_empty());
        assert_eq!(worst.failed, set(&[0, 1]));
    }

    #[test]
    fn tie_at_threshold_survives() {
        let net = two_firm([1.0, 1.0], [1.0, 1.0], [0.3, 0.3]);
        let eq = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        assert!(eq.failed.is_empty());
    }

    #[test]
    fn null_intervention_matches_best_case() {
        let net = two_firm([1.0, 0.5], [0.8, 0.9], [0.3, 0.3]);
        let best = net.solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        let after = net.apply_intervention(&[0.0, 0.0]).unwrap();
        assert_eq!(after.failed, best.failed);
        assert_eq!(after.market_values, best.market_values);
    }

    #[test]
    fn rescuing_firm_one_saves_firm_zero() {
        // slack of firm 1 net of its own failure cost: 1.8 - 17/15 = 2/3
        let net = two_firm([1.0, 0.5], [0.8, 0.9], [0.3, 0.3]);
        let saved = net.apply_intervention(&[0.0, 2.0 / 3.0]).unwrap();
        assert!(saved.failed.is_empty());
        let short = net.apply_intervention(&[0.0, 2.0 / 3.0 - 1e-6]).unwrap();
        assert_eq!(short.failed, set(&[0, 1]));
    }

    #[test]
    fn huge_payments_rescue_everyone() {
        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.3, 0.3]);
        let gamma = net.book_thresholds();
        assert!(net.apply_intervention(&gamma).unwrap().failed.is_empty());
    }

    #[test]
    fn negative_payment_is_rejected() {
        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.3, 0.3]);
        assert!(matches!(
            net.apply_intervention(&[0.0, -0.1]),
            Err(NetworkError::NegativeIntervention { index: 1, .. })
        ));
        assert!(matches!(net.apply_intervention(&[0.0]), Err(NetworkError::Length { .. })));
    }

    #[test]
    fn with_prices_shares_structure() {
        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.3, 0.3]);
        let _ = net.leontief_inverse();
        let shocked = net.with_prices(vec![0.5, 0.5]).unwrap();
        assert!(Arc::ptr_eq(&net.structure, &shocked.structure));
        assert_eq!(shocked.underlying_values(), &[0.5, 0.5]);
        assert!(net.with_prices(vec![-1.0, 0.5]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let net = two_firm([1.0, 0.5], [0.9, 0.9], [0.3, 0.3]);
        let json = serde_json::to_string(net.data()).unwrap();
        assert!(json.contains("\"C\":[[0.0,0.5],[0.5,0.0]]"));
        assert!(!json.contains("allocation"));
        let back: NetworkData<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, net.data());
    }

    #[test]
    fn works_in_single_precision() {
        let c = DenseMatrix::from_rows(vec![vec![0.0f32, 0.5], vec![0.5, 0.0]]).unwrap();
        let data = NetworkData::new(c, DenseMatrix::identity(2), vec![1.0, 0.5], vec![0.9, 0.9], vec![0.3, 0.3]);
        let eq = EconomicNetwork::new(data).unwrap().solve_equilibrium(EquilibriumMode::BestCase).unwrap();
        assert_eq!(eq.failed.len(), 2);
        assert!((eq.market_values[0] - 1.6 / 3.0).abs() < 1e-6);
    }
}
