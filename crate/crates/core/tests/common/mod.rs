#![allow(dead_code)]

use std::collections::BTreeSet;

use netcascade::linalg::DenseMatrix;
use netcascade::network::{EconomicNetwork, NetworkData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random valid network with one asset per firm. Thresholds sit between
/// 60% and 120% of the no-failure market value, so cascades are common.
pub fn random_network(n: usize, seed: u64) -> EconomicNetwork<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|i| if i != j && rng.random_bool(0.6) { rng.random() } else { 0.0 }).collect();
        let total: f64 = col.iter().sum();
        if total > 0.0 {
            let target = rng.random_range(0.1..0.6);
            col.iter_mut().for_each(|x| *x *= target / total);
        }
        for i in 0..n {
            c[(i, j)] = col[i];
        }
    }
    let p: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let beta: Vec<f64> = p.iter().map(|&p| p * rng.random_range(0.0..0.5)).collect();
    let zero = vec![0.0; n];
    let probe = EconomicNetwork::new(NetworkData::new(c.clone(), DenseMatrix::identity(n), p.clone(), zero, beta.clone()))
        .expect("valid probe");
    let v = probe.market_values(&BTreeSet::new()).unwrap();
    let theta = v.iter().map(|&v| v * rng.random_range(0.6..1.2)).collect();
    EconomicNetwork::new(NetworkData::new(c, DenseMatrix::identity(n), p, theta, beta)).expect("valid network")
}

/// Random network whose best case has at least one failure.
pub fn failing_network(n: usize, seed: u64) -> EconomicNetwork<f64> {
    (0..)
        .map(|k| random_network(n, seed.wrapping_mul(1_000_003).wrapping_add(k)))
        .find(|net| {
            !net.solve_equilibrium(netcascade::network::EquilibriumMode::BestCase).unwrap().failed.is_empty()
        })
        .unwrap()
}

/// Random influence matrix with column sums below one and thresholds in
/// `(0, 1)`.
pub fn random_instance(k: usize, seed: u64) -> netcascade::Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DenseMatrix::from_fn(k, k, |u, v| if u != v && rng.random_bool(0.5) { rng.random_range(0.0..0.5) } else { 0.0 });
    let theta = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let weights = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
    netcascade::Instance::from_parts(a, theta, Some(weights), None).unwrap()
}

pub fn subsets(k: usize) -> impl Iterator<Item = BTreeSet<usize>> {
    (0..1usize << k).map(move |bits| (0..k).filter(|&i| bits >> i & 1 == 1).collect())
}
