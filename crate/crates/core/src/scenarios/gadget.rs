use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::linalg::DenseMatrix;
use crate::network::{EconomicNetwork, NetworkData};
use crate::Scalar;

/// Undirected simple graph and a target independent-set size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub k: usize,
}

impl GadgetSpec {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>, k: usize) -> Result<Self, ScenarioError> {
        let spec = Self { vertices, edges, k };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.vertices == 0 {
            return Err(ScenarioError::InvalidGraph("graph has no vertices".into()));
        }
        let mut seen = BTreeSet::new();
        for &(i, j) in &self.edges {
            if i >= self.vertices || j >= self.vertices {
                return Err(ScenarioError::InvalidGraph(format!("edge ({i}, {j}) out of range")));
            }
            if i == j {
                return Err(ScenarioError::InvalidGraph(format!("self-loop at {i}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(ScenarioError::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(())
    }

    fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect()
    }

    /// Second-layer nodes as parent lists: one node with both endpoints per
    /// edge, and for each non-adjacent pair one node under each endpoint.
    fn second_layer(&self) -> Vec<Vec<usize>> {
        let edges = self.edge_set();
        let mut out = Vec::new();
        for i in 0..self.vertices {
            for j in i + 1..self.vertices {
                if edges.contains(&(i, j)) {
                    out.push(vec![i, j]);
                } else {
                    out.push(vec![i]);
                    out.push(vec![j]);
                }
            }
        }
        out
    }
}

/// Intervention instance whose optimum encodes an independent set.
#[derive(Debug, Clone)]
pub struct IsGadget<T> {
    pub network: EconomicNetwork<T>,
    /// Parents of each second-layer firm; firm `vertices + i` is entry `i`.
    pub second_layer: Vec<Vec<usize>>,
    /// `k / |U|`.
    pub budget: T,
    /// `k |U|` reversed defaults.
    pub target: usize,
}

/// Two-layer network from a graph `G = (U, E)`.
///
/// First-layer firm `i` is vertex `i`; each second-layer firm holds
/// `1/|U|` of every parent. With `p = D p = beta = 2` every firm fails, all
/// influence thresholds equal `1/|U|`, and reversing a first-layer default
/// pushes `2/|U|` onto each child. Saving `k |U|` firms with `k` seeds is
/// possible exactly when `G` has an independent set of size `k`.
pub fn build_is_gadget<T: Scalar>(spec: &GadgetSpec) -> Result<IsGadget<T>, ScenarioError> {
    spec.validate()?;
    let u = spec.vertices;
    let second_layer = spec.second_layer();
    let n = u + second_layer.len();
    let w = T::one() / T::of(u as f64);
    let mut c = DenseMatrix::zeros(n, n);
    for (idx, parents) in second_layer.iter().enumerate() {
        for &i in parents {
            c[(u + idx, i)] = w;
        }
    }
    let beta = T::of(2.0);
    // book values are zero once everyone fails, so theta / ĉ - beta = 1/|U|
    let theta = (0..n).map(|i| if i < u { w * (beta + w) } else { beta + w }).collect();
    let labels = (0..n)
        .map(|i| if i < u { format!("u1_{i}") } else { format!("u2_{}", i - u) })
        .collect();
    let data = NetworkData::new(c, DenseMatrix::identity(n), vec![beta; n], theta, vec![beta; n]).with_labels(labels);
    let network = EconomicNetwork::new(data).map_err(|e| ScenarioError::Infeasible(e.to_string()))?;
    Ok(IsGadget { network, second_layer, budget: T::of(spec.k as f64) * w, target: spec.k * u })
}

/// Asset-shock instance whose worst shock encodes an independent set.
#[derive(Debug, Clone)]
pub struct MaxShockGadget<T> {
    pub network: EconomicNetwork<T>,
    /// `k`: one unit-price asset per vertex.
    pub budget: T,
    /// `k |U|` defaults.
    pub target: usize,
}

/// Firms on one unit-price asset per vertex, no cross-holdings and no
/// failure costs. Vertex `i` has a mirror firm holding `1/|U|` of asset
/// `i`; every edge has a firm holding `1/|U|` of both endpoints; every
/// non-adjacent pair has one firm per endpoint holding `1/|U|` of it. Each
/// firm fails as soon as any asset it holds is wiped out, so zeroing the
/// assets of `Z` fails `|Z| |U| - e(Z)` firms.
pub fn build_max_shock_gadget<T: Scalar>(spec: &GadgetSpec) -> Result<MaxShockGadget<T>, ScenarioError> {
    spec.validate()?;
    let u = spec.vertices;
    let holdings: Vec<Vec<usize>> = (0..u).map(|i| vec![i]).chain(spec.second_layer()).collect();
    let n = holdings.len();
    let w = T::one() / T::of(u as f64);
    let margin = w / T::of(10.0);
    let mut d = DenseMatrix::zeros(n, u);
    let mut theta = Vec::with_capacity(n);
    for (f, assets) in holdings.iter().enumerate() {
        for &a in assets {
            d[(f, a)] = w;
        }
        theta.push(T::of(assets.len() as f64) * w - margin);
    }
    let data = NetworkData::new(DenseMatrix::zeros(n, n), d, vec![T::one(); u], theta, vec![T::zero(); n]);
    let network = EconomicNetwork::new(data).map_err(|e| ScenarioError::Infeasible(e.to_string()))?;
    Ok(MaxShockGadget { network, budget: T::of(spec.k as f64), target: spec.k * u })
}
