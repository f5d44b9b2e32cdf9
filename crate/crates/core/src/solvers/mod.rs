//! Continuous base solvers. All of them work in the normalized encoding,
//! where the origin is the domain center and one unit is one variable scale.

pub mod cma;
pub mod de;
pub mod es;
pub mod line_search;
pub mod metamodel;
pub mod powell;
pub mod quadratic;
pub mod recentering;
pub mod tbpsa;
pub mod trust_region;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::space::SearchBox;

/// Construction parameters shared by continuous solvers.
#[derive(Debug, Clone)]
pub struct ContinuousSetup {
    pub bounds: SearchBox,
    /// Evaluations this solver is expected to receive.
    pub budget: usize,
    pub num_workers: usize,
    pub noisy: bool,
    pub seed: u64,
}

impl ContinuousSetup {
    pub fn unbounded(dim: usize, budget: usize, seed: u64) -> Self {
        Self { bounds: SearchBox::unbounded(dim), budget, num_workers: 1, noisy: false, seed }
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub(crate) fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
