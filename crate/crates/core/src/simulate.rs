//! Planted-partition generators.
//!
//! Intervals have unit length, so every rate is a per-interval intensity.

use alloc::vec;
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;

use crate::error::{Error, Result};
use crate::tensor::{build_tensor, Edge, InteractionTensor};

/// Generative parameters: label weights and a `K x K x D` rate array stored
/// as `rates[(k * K + g) * D + d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedModel {
    pub n_nodes: usize,
    pub n_intervals: usize,
    pub node_weights: Vec<f64>,
    pub time_weights: Vec<f64>,
    pub rates: Vec<f64>,
}

impl PlantedModel {
    pub fn k(&self) -> usize {
        self.node_weights.len()
    }

    pub fn d(&self) -> usize {
        self.time_weights.len()
    }

    pub fn rate(&self, k: usize, g: usize, d: usize) -> f64 {
        self.rates[(k * self.k() + g) * self.d() + d]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 || self.n_intervals == 0 {
            return Err(Error::InvalidDimension("N and U must be positive"));
        }
        for w in [&self.node_weights, &self.time_weights] {
            if w.is_empty() || w.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
                return Err(Error::InvalidModel("weights must be finite and >= 0"));
            }
            if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidModel("weights must sum to 1"));
            }
        }
        if self.rates.len() != self.k() * self.k() * self.d() {
            return Err(Error::InvalidModel("rates must have K * K * D entries"));
        }
        if self.rates.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return Err(Error::InvalidModel("rates must be finite and >= 0"));
        }
        Ok(())
    }
}

/// A sampled graph with its planted labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub tensor: InteractionTensor,
    pub node_labels: Vec<usize>,
    pub interval_labels: Vec<usize>,
}

fn draw_labels(weights: &[f64], len: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(weights)
        .map_err(|_| Error::InvalidModel("weights must have positive total"))?;
    Ok((0..len).map(|_| dist.sample(rng)).collect())
}

fn draw_counts(
    model: &PlantedModel,
    node_labels: &[usize],
    interval_labels: &[usize],
    rng: &mut ChaCha8Rng,
) -> Result<InteractionTensor> {
    let dists: Vec<Option<Poisson<f64>>> = model
        .rates
        .iter()
        .map(|&l| (l > 0.0).then(|| Poisson::new(l).expect("validated rate")))
        .collect();
    let (k, d) = (model.k(), model.d());
    let mut edges = Vec::new();
    for (u, &y) in interval_labels.iter().enumerate() {
        for i in 0..model.n_nodes {
            for j in 0..model.n_nodes {
                if i == j {
                    continue;
                }
                let idx = (node_labels[i] * k + node_labels[j]) * d + y;
                if let Some(p) = &dists[idx] {
                    let count = p.sample(rng) as u64;
                    if count > 0 {
                        edges.push(Edge::new(i, j, u, count));
                    }
                }
            }
        }
    }
    build_tensor(edges, model.n_nodes, model.n_intervals)
}

/// Draws labels from the weights, then independent Poisson counts on every
/// off-diagonal pair and interval.
pub fn sample_planted(model: &PlantedModel, seed: u64) -> Result<Sample> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_labels = draw_labels(&model.node_weights, model.n_nodes, &mut rng)?;
    let interval_labels = draw_labels(&model.time_weights, model.n_intervals, &mut rng)?;
    let tensor = draw_counts(model, &node_labels, &interval_labels, &mut rng)?;
    Ok(Sample {
        tensor,
        node_labels,
        interval_labels,
    })
}

/// Three node and three time clusters with uniform weights. The node-level
/// rates are `psi` on the diagonal and 2 elsewhere, scaled by
/// `(1, sqrt(gamma), gamma)` in the three time clusters.
pub fn scenario1_model(
    psi: f64,
    gamma: f64,
    n_nodes: usize,
    n_intervals: usize,
) -> Result<PlantedModel> {
    if !(psi >= 2.0 && psi.is_finite()) {
        return Err(Error::InvalidModel("psi must be >= 2"));
    }
    if !(gamma >= 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidModel("gamma must be >= 1"));
    }
    let scale = [1.0, libm::sqrt(gamma), gamma];
    let mut rates = vec![0.0; 27];
    for k in 0..3 {
        for g in 0..3 {
            let base = if k == g { psi } else { 2.0 };
            for (d, s) in scale.iter().enumerate() {
                rates[(k * 3 + g) * 3 + d] = base * s;
            }
        }
    }
    let third = [1.0 / 3.0; 3];
    let model = PlantedModel {
        n_nodes,
        n_intervals,
        node_weights: third.to_vec(),
        time_weights: third.to_vec(),
        rates,
    };
    model.validate()?;
    Ok(model)
}

pub fn scenario1(
    psi: f64,
    gamma: f64,
    n_nodes: usize,
    n_intervals: usize,
    seed: u64,
) -> Result<Sample> {
    sample_planted(&scenario1_model(psi, gamma, n_nodes, n_intervals)?, seed)
}

/// Two node and two time clusters: an assortative pattern `[[2,1],[1,2]]` in
/// the first time cluster and a disassortative one `[[1,2],[2,1]]` in the
/// second.
pub fn scenario2_model(n_nodes: usize, n_intervals: usize) -> Result<PlantedModel> {
    if n_nodes < 4 || n_intervals < 4 {
        return Err(Error::InvalidDimension("N and U must be at least 4"));
    }
    let l1 = [[2.0, 1.0], [1.0, 2.0]];
    let l2 = [[1.0, 2.0], [2.0, 1.0]];
    let mut rates = vec![0.0; 8];
    for k in 0..2 {
        for g in 0..2 {
            rates[(k * 2 + g) * 2] = l1[k][g];
            rates[(k * 2 + g) * 2 + 1] = l2[k][g];
        }
    }
    Ok(PlantedModel {
        n_nodes,
        n_intervals,
        node_weights: vec![0.5; 2],
        time_weights: vec![0.5; 2],
        rates,
    })
}

/// With `fixed_balanced_y`, exactly `U/2` intervals go to each time cluster
/// (a random balanced assignment) instead of i.i.d. draws.
pub fn scenario2(
    n_nodes: usize,
    n_intervals: usize,
    seed: u64,
    fixed_balanced_y: bool,
) -> Result<Sample> {
    let model = scenario2_model(n_nodes, n_intervals)?;
    if !fixed_balanced_y {
        return sample_planted(&model, seed);
    }
    if !n_intervals.is_multiple_of(2) {
        return Err(Error::InvalidDimension("a balanced split needs an even U"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let node_labels = draw_labels(&model.node_weights, n_nodes, &mut rng)?;
    let mut interval_labels: Vec<usize> = (0..n_intervals).map(|u| u % 2).collect();
    interval_labels.shuffle(&mut rng);
    let tensor = draw_counts(&model, &node_labels, &interval_labels, &mut rng)?;
    Ok(Sample {
        tensor,
        node_labels,
        interval_labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous(rate: f64, n: usize, u: usize) -> PlantedModel {
        PlantedModel {
            n_nodes: n,
            n_intervals: u,
            node_weights: vec![1.0],
            time_weights: vec![1.0],
            rates: vec![rate],
        }
    }

    #[test]
    fn zero_rates_give_empty_tensor() {
        let s = sample_planted(&homogeneous(0.0, 5, 4), 3).unwrap();
        assert_eq!(s.tensor.nnz(), 0);
    }

    #[test]
    fn homogeneous_total_matches_poisson_mean() {
        // total ~ Poisson(2 * 50 * 49 * 50); the mean of 50 draws has
        // standard deviation sqrt(245000 / 50)
        let model = homogeneous(2.0, 50, 50);
        let mean = (0..50)
            .map(|s| sample_planted(&model, s).unwrap().tensor.total() as f64)
            .sum::<f64>()
            / 50.0;
        let sigma = (245_000.0f64 / 50.0).sqrt();
        assert!((mean - 245_000.0).abs() <= 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn scenario1_rates() {
        let m = scenario1_model(2.0, 1.4, 10, 10).unwrap();
        for k in 0..3 {
            for g in 0..3 {
                assert_eq!(m.rate(k, g, 0), 2.0);
                assert!((m.rate(k, g, 1) - 2.0 * 1.4f64.sqrt()).abs() < 1e-15);
                assert!((m.rate(k, g, 2) - 2.8).abs() < 1e-15);
            }
        }
        let flat = scenario1_model(3.0, 1.0, 10, 10).unwrap();
        for k in 0..3 {
            for g in 0..3 {
                let r = flat.rate(k, g, 0);
                assert_eq!(r, if k == g { 3.0 } else { 2.0 });
                assert_eq!(flat.rate(k, g, 1), r);
                assert_eq!(flat.rate(k, g, 2), r);
            }
        }
        assert!(scenario1_model(1.9, 1.0, 10, 10).is_err());
        assert!(scenario1_model(2.0, 0.9, 10, 10).is_err());
    }

    #[test]
    fn scenario2_rates_compensate() {
        let m = scenario2_model(10, 10).unwrap();
        for k in 0..2 {
            for g in 0..2 {
                let avg = 0.5 * (m.rate(k, g, 0) + m.rate(k, g, 1));
                assert_eq!(avg, 1.5);
            }
        }
        assert_eq!(m.rate(0, 0, 0), 2.0);
        assert_eq!(m.rate(0, 1, 0), 1.0);
        assert_eq!(m.rate(0, 0, 1), 1.0);
        assert_eq!(m.rate(1, 0, 1), 2.0);
    }

    #[test]
    fn balanced_split() {
        let s = scenario2(10, 100, 4, true).unwrap();
        assert_eq!(s.interval_labels.iter().filter(|&&y| y == 0).count(), 50);
        assert!(scenario2(10, 99, 4, true).is_err());
        assert!(scenario2(3, 10, 4, false).is_err());
    }

    #[test]
    fn reproducible() {
        assert_eq!(
            scenario1(2.5, 1.2, 12, 8, 9).unwrap(),
            scenario1(2.5, 1.2, 12, 8, 9).unwrap()
        );
        assert_ne!(
            scenario1(2.5, 1.2, 12, 8, 9).unwrap().tensor,
            scenario1(2.5, 1.2, 12, 8, 10).unwrap().tensor
        );
    }

    #[test]
    fn invalid_models() {
        let mut m = homogeneous(1.0, 3, 3);
        m.node_weights = vec![0.5, 0.4];
        m.rates = vec![1.0; 4];
        assert!(m.validate().is_err());
        let mut m = homogeneous(f64::NAN, 3, 3);
        assert!(m.validate().is_err());
        m.rates = vec![1.0, 2.0];
        assert!(m.validate().is_err());
    }
}
