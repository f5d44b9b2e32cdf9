//! One-shot optimization: independent Gaussian samples around the center
//! with a radius shrinking as the dimension grows relative to the budget.

use rand_chacha::ChaCha8Rng;

use super::{gaussian_vec, ContinuousSetup};
use crate::optimizer::Solver;
use crate::space::SearchBox;

/// `min(1, sqrt(ln(1 + budget) / d))`.
pub fn recentering_radius(budget: usize, dim: usize) -> f64 {
    ((1.0 + budget as f64).ln() / dim as f64).sqrt().min(1.0)
}

pub struct Recentering {
    sigma: f64,
    bounds: SearchBox,
    rng: ChaCha8Rng,
}

impl Recentering {
    pub fn new(setup: &ContinuousSetup) -> Self {
        Self { sigma: recentering_radius(setup.budget, setup.dim()), bounds: setup.bounds.clone(), rng: setup.rng() }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Solver for Recentering {
    fn ask(&mut self, _id: u64) -> Vec<f64> {
        let mut x: Vec<f64> = gaussian_vec(&mut self.rng, self.bounds.dim()).into_iter().map(|z| self.sigma * z).collect();
        self.bounds.clip(&mut x);
        x
    }

    fn tell(&mut self, _id: u64, _x: &[f64], _loss: f64) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_clamps_at_one() {
        assert_eq!(recentering_radius(1000, 2), 1.0);
    }

    #[test]
    fn radius_high_dimension() {
        assert!((recentering_radius(100, 100) - 0.2148).abs() < 1e-4);
    }
}
