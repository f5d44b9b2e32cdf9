//! Discrete and mixed-domain solvers. They work in the native encoding: one
//! scalar per variable holding its value (integer, category index or real).

pub mod ea;
pub mod fastga;
pub mod softmax;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::space::VariableKind;

/// Construction parameters shared by discrete solvers.
#[derive(Debug, Clone)]
pub struct DiscreteSetup {
    pub kinds: Vec<VariableKind>,
    pub budget: usize,
    pub num_workers: usize,
    pub noisy: bool,
    pub seed: u64,
}

impl DiscreteSetup {
    pub fn new(kinds: Vec<VariableKind>, budget: usize, seed: u64) -> Self {
        Self { kinds, budget, num_workers: 1, noisy: false, seed }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Indices of variables that have more than one admissible value.
    pub fn mutable_variables(&self) -> Result<Vec<usize>> {
        let mutable: Vec<usize> = (0..self.kinds.len()).filter(|&i| is_mutable(&self.kinds[i])).collect();
        if mutable.is_empty() {
            return Err(Error::Config("every variable has a single admissible value; nothing to mutate".into()));
        }
        Ok(mutable)
    }
}

fn is_mutable(kind: &VariableKind) -> bool {
    !matches!(kind, VariableKind::Integer { low, high } if low == high)
}

/// Uniform random value of a variable; unbounded integers start at 0 and
/// continuous variables at their center plus a scale-sized Gaussian.
pub fn random_value(kind: &VariableKind, rng: &mut ChaCha8Rng) -> f64 {
    match *kind {
        VariableKind::Integer { low, high } => rng.random_range(low..=high) as f64,
        VariableKind::Categorical { arity } => rng.random_range(0..arity) as f64,
        VariableKind::UnboundedInteger => 0.0,
        VariableKind::Continuous { lower, upper, scale } => match (lower, upper) {
            (Some(l), Some(u)) => rng.random_range(l..=u),
            _ => {
                let z: f64 = StandardNormal.sample(rng);
                clamp_continuous(kind, z * scale)
            }
        },
    }
}

fn clamp_continuous(kind: &VariableKind, v: f64) -> f64 {
    match *kind {
        VariableKind::Continuous { lower, upper, .. } => {
            let v = lower.map_or(v, |l| v.max(l));
            upper.map_or(v, |u| v.min(u))
        }
        _ => v,
    }
}

/// Exponent `j >= 0` with `P(j) = 2^-(j+1)`.
fn geometric_exponent(rng: &mut ChaCha8Rng) -> i32 {
    let mut j = 0;
    while j < 62 && rng.random::<bool>() {
        j += 1;
    }
    j
}

/// A value of the variable different from `current` (for finite alphabets a
/// uniformly random other value; unbounded integers move by `±2^j`;
/// continuous variables by a scale-sized Gaussian step).
pub fn mutate_value(kind: &VariableKind, current: f64, rng: &mut ChaCha8Rng) -> f64 {
    match *kind {
        VariableKind::Integer { low, high } => {
            let span = (high - low) as u64;
            let cur = (current as i64 - low) as u64;
            let pick = rng.random_range(0..span);
            let v = if pick >= cur { pick + 1 } else { pick };
            (low + v as i64) as f64
        }
        VariableKind::Categorical { arity } => {
            let cur = current as usize;
            let pick = rng.random_range(0..arity - 1);
            (if pick >= cur { pick + 1 } else { pick }) as f64
        }
        VariableKind::UnboundedInteger => {
            let step = 2f64.powi(geometric_exponent(rng));
            if rng.random::<bool>() {
                current + step
            } else {
                current - step
            }
        }
        VariableKind::Continuous { scale, .. } => {
            let z: f64 = StandardNormal.sample(rng);
            clamp_continuous(kind, current + scale * z)
        }
    }
}

/// Mutates each variable of `mutable` with probability `rate`, forcing at
/// least one change.
pub fn mutate_with_rate(
    kinds: &[VariableKind],
    mutable: &[usize],
    parent: &[f64],
    rate: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut child = parent.to_vec();
    let mut changed = false;
    for &i in mutable {
        if rng.random::<f64>() < rate {
            child[i] = mutate_value(&kinds[i], parent[i], rng);
            changed = true;
        }
    }
    if !changed {
        let i = mutable[rng.random_range(0..mutable.len())];
        child[i] = mutate_value(&kinds[i], parent[i], rng);
    }
    child
}

/// Mutates exactly `min(k, |mutable|)` distinct variables.
pub fn mutate_exactly(
    kinds: &[VariableKind],
    mutable: &[usize],
    parent: &[f64],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut pool = mutable.to_vec();
    let k = k.clamp(1, pool.len());
    let mut child = parent.to_vec();
    for n in 0..k {
        let j = rng.random_range(n..pool.len());
        pool.swap(n, j);
        let i = pool[n];
        child[i] = mutate_value(&kinds[i], parent[i], rng);
    }
    child
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_mutations_always_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kinds = [VariableKind::Integer { low: -2, high: 2 }, VariableKind::Categorical { arity: 3 }];
        for _ in 0..1000 {
            let a = rng.random_range(-2..=2) as f64;
            let b = mutate_value(&kinds[0], a, &mut rng);
            assert!(b != a && (-2.0..=2.0).contains(&b));
            let c = rng.random_range(0..3) as f64;
            let d = mutate_value(&kinds[1], c, &mut rng);
            assert!(d != c && (0.0..3.0).contains(&d));
        }
    }

    #[test]
    fn single_valued_domain_is_rejected() {
        let setup = DiscreteSetup::new(vec![VariableKind::Integer { low: 1, high: 1 }; 3], 10, 0);
        assert!(matches!(setup.mutable_variables(), Err(Error::Config(_))));
    }

    #[test]
    fn unbounded_steps_are_powers_of_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let d = mutate_value(&VariableKind::UnboundedInteger, 5.0, &mut rng) - 5.0;
            assert!(d.abs() >= 1.0 && d.abs().log2().fract() == 0.0);
        }
    }

    #[test]
    fn exact_strength_changes_k_variables() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let kinds = vec![VariableKind::Integer { low: 0, high: 1 }; 10];
        let mutable: Vec<usize> = (0..10).collect();
        let parent = vec![0.0; 10];
        for k in 1..=5 {
            let child = mutate_exactly(&kinds, &mutable, &parent, k, &mut rng);
            assert_eq!(child.iter().filter(|v| **v != 0.0).count(), k);
        }
    }
}
