//! Travelling salesman instances with a permutation encoding that always
//! decodes to a valid tour.
//!
//! Variable `i` takes values in `0..=n-1-i` and picks the next city from the
//! list of cities not yet visited, in index order.

use abbo_core::{derive_seed, DomainSpec, VariableKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::problem::FunctionSpec;
use crate::transform::TransformSpec;
use crate::BenchError;

pub const NAME: &str = "simple_tsp";

/// `n` cities uniform in the unit square.
pub fn cities(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["cities".into()]));
    (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect()
}

pub fn domain(n: usize) -> DomainSpec {
    let kinds = (0..n).map(|i| VariableKind::Integer { low: 0, high: (n - 1 - i) as i64 }).collect();
    DomainSpec::new(kinds).expect("ranges are non-empty")
}

/// Visiting order encoded by `choices`; out-of-range choices are clamped.
pub fn decode(choices: &[i64]) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..choices.len()).collect();
    choices
        .iter()
        .map(|&c| {
            let k = (c.max(0) as usize).min(remaining.len() - 1);
            remaining.remove(k)
        })
        .collect()
}

/// Length of the closed tour.
pub fn tour_length(cities: &[[f64; 2]], tour: &[usize]) -> f64 {
    (0..tour.len())
        .map(|i| {
            let a = cities[tour[i]];
            let b = cities[tour[(i + 1) % tour.len()]];
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .sum()
}

pub fn simple_tsp(n_cities: usize, seed: u64) -> Result<FunctionSpec, BenchError> {
    if n_cities < 3 {
        return Err(BenchError::InvalidSpec(format!("simple_tsp needs at least 3 cities, got {n_cities}")));
    }
    Ok(FunctionSpec::new(NAME, n_cities, TransformSpec { transform_seed: seed, ..TransformSpec::default() }))
}
