//! (1+1) evolutionary algorithms on native-encoded points.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::fastga::{PowerLaw, DEFAULT_BETA};
use super::{mutate_exactly, mutate_with_rate, random_value, DiscreteSetup};
use crate::error::Result;
use crate::optimizer::Solver;
use crate::space::VariableKind;

/// Probability of re-evaluating the incumbent in the optimistic noisy variant.
pub const RESAMPLE_PROBABILITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EaVariant {
    /// `r = 1/d`.
    Fixed,
    /// `r(t) = max(1/d, (1 - t/budget) / 2)`.
    LinearDecay,
    /// Doubles on success, shrinks by `2^(-1/4)` on failure, within `[1/d, 1/2]`.
    Adaptive,
    /// Draws `r` uniformly from `{1/d, sqrt(1/(2d)), 1/2}` per mutation.
    Portfolio,
    /// Resamples the incumbent half of the time and compares candidates by
    /// an optimistic mean.
    OptimisticNoisy,
    /// Mutates exactly `k` variables with `k` from a power law.
    FastGa,
}

pub fn linear_decay_rate(dim: usize, t: usize, budget: usize) -> f64 {
    let floor = 1.0 / dim as f64;
    floor.max((1.0 - t as f64 / budget as f64) / 2.0)
}

pub fn adapt_rate(rate: f64, success: bool, dim: usize) -> f64 {
    let floor = (1.0 / dim as f64).min(0.5);
    if success {
        (2.0 * rate).min(0.5)
    } else {
        (rate * 2f64.powf(-0.25)).max(floor)
    }
}

pub fn portfolio_rates(dim: usize) -> [f64; 3] {
    let d = dim as f64;
    [1.0 / d, (1.0 / (2.0 * d)).sqrt(), 0.5]
}

#[derive(Debug, Clone, Default)]
struct Arm {
    point: Vec<f64>,
    count: usize,
    total: f64,
}

impl Arm {
    fn mean(&self) -> f64 {
        self.total / self.count as f64
    }
}

fn key(point: &[f64]) -> Vec<u64> {
    point.iter().map(|v| v.to_bits()).collect()
}

pub struct DiscreteEa {
    variant: EaVariant,
    kinds: Vec<VariableKind>,
    mutable: Vec<usize>,
    rng: ChaCha8Rng,
    budget: usize,
    asked: usize,
    told: usize,
    incumbent: Vec<f64>,
    incumbent_loss: Option<f64>,
    initial_issued: bool,
    rate: f64,
    strength: PowerLaw,
    arms: Vec<Arm>,
    arm_index: HashMap<Vec<u64>, usize>,
}

impl DiscreteEa {
    pub fn new(setup: &DiscreteSetup, variant: EaVariant) -> Result<Self> {
        let mutable = setup.mutable_variables()?;
        let mut rng = setup.rng();
        let incumbent = setup.kinds.iter().map(|k| random_value(k, &mut rng)).collect();
        let dim = setup.kinds.len();
        Ok(Self {
            variant,
            kinds: setup.kinds.clone(),
            mutable,
            rng,
            budget: setup.budget,
            asked: 0,
            told: 0,
            incumbent,
            incumbent_loss: None,
            initial_issued: false,
            rate: (1.0 / dim as f64).min(0.5),
            strength: PowerLaw::new(dim, DEFAULT_BETA),
            arms: Vec::new(),
            arm_index: HashMap::new(),
        })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn incumbent(&self) -> (&[f64], Option<f64>) {
        (&self.incumbent, self.incumbent_loss)
    }

    fn dim(&self) -> usize {
        self.kinds.len()
    }

    fn mutation_rate(&mut self) -> f64 {
        let dim = self.dim();
        match self.variant {
            EaVariant::Fixed | EaVariant::OptimisticNoisy | EaVariant::FastGa => 1.0 / dim as f64,
            EaVariant::LinearDecay => linear_decay_rate(dim, self.asked, self.budget),
            EaVariant::Adaptive => self.rate,
            EaVariant::Portfolio => portfolio_rates(dim)[self.rng.random_range(0..3)],
        }
    }

    fn exploration_bonus(&self, count: usize) -> f64 {
        (2.0 * (self.told.max(1) as f64).ln() / count as f64).sqrt()
    }

    fn record_arm(&mut self, x: &[f64], loss: f64) -> usize {
        let idx = *self.arm_index.entry(key(x)).or_insert_with(|| {
            self.arms.push(Arm { point: x.to_vec(), ..Arm::default() });
            self.arms.len() - 1
        });
        self.arms[idx].count += 1;
        self.arms[idx].total += loss;
        idx
    }

    fn tell_noisy(&mut self, x: &[f64], loss: f64) {
        let idx = self.record_arm(x, loss);
        let incumbent_arm = self.arm_index.get(&key(&self.incumbent)).copied();
        match incumbent_arm {
            Some(inc) if inc != idx => {
                let arm = &self.arms[idx];
                let optimistic = arm.mean() - self.exploration_bonus(arm.count);
                if optimistic <= self.arms[inc].mean() {
                    self.incumbent = x.to_vec();
                }
            }
            Some(_) => {}
            None => self.incumbent = x.to_vec(),
        }
        let inc = self.arm_index[&key(&self.incumbent)];
        self.incumbent_loss = Some(self.arms[inc].mean());
    }
}

impl Solver for DiscreteEa {
    fn ask(&mut self, _id: u64) -> Vec<f64> {
        self.asked += 1;
        if !self.initial_issued {
            self.initial_issued = true;
            return self.incumbent.clone();
        }
        if self.variant == EaVariant::OptimisticNoisy
            && self.incumbent_loss.is_some()
            && self.rng.random::<f64>() < RESAMPLE_PROBABILITY
        {
            return self.incumbent.clone();
        }
        if self.variant == EaVariant::FastGa {
            let k = self.strength.sample(&mut self.rng);
            return mutate_exactly(&self.kinds, &self.mutable, &self.incumbent, k, &mut self.rng);
        }
        let rate = self.mutation_rate();
        mutate_with_rate(&self.kinds, &self.mutable, &self.incumbent, rate, &mut self.rng)
    }

    fn tell(&mut self, _id: u64, x: &[f64], loss: f64) {
        self.told += 1;
        if self.variant == EaVariant::OptimisticNoisy {
            self.tell_noisy(x, loss);
            return;
        }
        match self.incumbent_loss {
            None => {
                self.incumbent = x.to_vec();
                self.incumbent_loss = Some(loss);
            }
            Some(best) => {
                if self.variant == EaVariant::Adaptive {
                    self.rate = adapt_rate(self.rate, loss < best, self.dim());
                }
                if loss <= best {
                    self.incumbent = x.to_vec();
                    self.incumbent_loss = Some(loss);
                }
            }
        }
    }

    /// Optimistic noisy variant: the point with the lowest pessimistic mean
    /// `mean + sqrt(2 ln t / n)`; other variants defer to the incumbent.
    fn recommend(&self) -> Option<Vec<f64>> {
        if self.variant != EaVariant::OptimisticNoisy {
            return None;
        }
        self.arms
            .iter()
            .map(|a| (a, a.mean() + self.exploration_bonus(a.count)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(a, _)| a.point.clone())
    }

    fn start_from(&mut self, x: &[f64]) {
        self.incumbent = x.to_vec();
        self.incumbent_loss = None;
        self.initial_issued = false;
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        if self.incumbent_loss.is_none_or(|best| loss <= best) {
            self.incumbent = x.to_vec();
            self.incumbent_loss = Some(loss);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn binary(d: usize) -> Vec<VariableKind> {
        vec![VariableKind::Integer { low: 0, high: 1 }; d]
    }

    fn onemax(x: &[f64]) -> f64 {
        x.iter().filter(|v| **v == 0.0).count() as f64
    }

    #[test]
    fn improvement_is_accepted() {
        let mut ea = DiscreteEa::new(&DiscreteSetup::new(binary(3), 10, 0), EaVariant::Fixed).unwrap();
        ea.tell(0, &[0.0, 0.0, 0.0], 3.0);
        ea.tell(1, &[1.0, 0.0, 0.0], 2.0);
        assert_eq!(ea.incumbent(), (&[1.0, 0.0, 0.0][..], Some(2.0)));
        ea.tell(2, &[0.0, 0.0, 0.0], 3.0);
        assert_eq!(ea.incumbent().1, Some(2.0));
    }

    #[test]
    fn adaptive_doubles_on_success() {
        assert_eq!(adapt_rate(0.125, true, 10), 0.25);
        assert_eq!(adapt_rate(0.4, true, 10), 0.5);
    }

    #[test]
    fn linear_decay_midway() {
        assert_eq!(linear_decay_rate(10, 50, 100), 0.25);
        assert_eq!(linear_decay_rate(10, 100, 100), 0.1);
    }

    proptest! {
        #[test]
        fn adaptive_rate_stays_in_range(d in 1usize..50, outcomes in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mut r = (1.0 / d as f64).min(0.5);
            let floor = r;
            for s in outcomes {
                r = adapt_rate(r, s, d);
                prop_assert!(r >= floor - 1e-15 && r <= 0.5);
            }
        }
    }

    #[test]
    fn every_mutation_differs_from_incumbent() {
        for variant in [EaVariant::Fixed, EaVariant::LinearDecay, EaVariant::Adaptive, EaVariant::Portfolio, EaVariant::FastGa] {
            let mut ea = DiscreteEa::new(&DiscreteSetup::new(binary(8), 300, 2), variant).unwrap();
            for id in 0..300 {
                let parent = ea.incumbent().0.to_vec();
                let x = ea.ask(id);
                if id > 0 {
                    assert_ne!(x, parent, "{variant:?}");
                }
                ea.tell(id, &x, onemax(&x));
            }
        }
    }

    #[test]
    fn fixed_rate_solves_onemax() {
        let mut ea = DiscreteEa::new(&DiscreteSetup::new(binary(20), 2000, 11), EaVariant::Fixed).unwrap();
        for id in 0..2000 {
            let x = ea.ask(id);
            ea.tell(id, &x, onemax(&x));
        }
        assert_eq!(ea.incumbent().1, Some(0.0));
    }

    #[test]
    fn optimistic_noisy_recommends_best_mean_arm() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let kinds = vec![VariableKind::Integer { low: 1, high: 4 }];
        let mut ea = DiscreteEa::new(&DiscreteSetup::new(kinds, 600, 5), EaVariant::OptimisticNoisy).unwrap();
        let mut noise_rng = ChaCha8Rng::seed_from_u64(99);
        let noise = Normal::new(0.0, 0.5).unwrap();
        for id in 0..600 {
            let x = ea.ask(id);
            let loss = (x[0] - 3.0).abs() + noise.sample(&mut noise_rng);
            ea.tell(id, &x, loss);
        }
        let rec = ea.recommend().unwrap();
        assert_eq!(rec, vec![3.0]);
    }
}
