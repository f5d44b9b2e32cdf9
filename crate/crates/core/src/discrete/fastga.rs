//! Heavy-tailed mutation strength: `P(k) ∝ k^-beta` over `1..=floor(d/2)`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_BETA: f64 = 1.5;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLaw {
    pub beta: f64,
    cumulative: Vec<f64>,
}

impl PowerLaw {
    /// Support `1..=max(1, floor(d/2))`.
    pub fn new(dim: usize, beta: f64) -> Self {
        let probabilities = strength_probabilities(dim, beta);
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { beta, cumulative }
    }

    pub fn support_max(&self) -> usize {
        self.cumulative.len()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        idx.min(self.cumulative.len() - 1) + 1
    }
}

/// Exact probabilities `k^-beta / Z` for `k = 1..=max(1, floor(d/2))`.
pub fn strength_probabilities(dim: usize, beta: f64) -> Vec<f64> {
    let kmax = (dim / 2).max(1);
    let weights: Vec<f64> = (1..=kmax).map(|k| (k as f64).powf(-beta)).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn two_variables_always_flip_one() {
        let law = PowerLaw::new(2, DEFAULT_BETA);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!((0..1000).all(|_| law.sample(&mut rng) == 1));
    }

    #[test]
    fn ratio_of_first_to_fifth() {
        let p = strength_probabilities(10, 1.5);
        assert_eq!(p.len(), 5);
        assert!((p[0] / p[4] - 5f64.powf(1.5)).abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
