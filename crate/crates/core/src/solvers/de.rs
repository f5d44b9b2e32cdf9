//! Differential evolution, rand/1/bin.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::ContinuousSetup;
use crate::error::{Error, Result};
use crate::optimizer::Solver;
use crate::space::SearchBox;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeInit {
    Uniform,
    LatinHypercube,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeConfig {
    pub population: usize,
    pub weight: f64,
    pub crossover: f64,
    pub init: DeInit,
}

impl DeConfig {
    /// NP = max(30, d), F = 0.8, CR = 0.5, uniform initialization.
    pub fn standard(dim: usize) -> Self {
        Self { population: dim.max(30), weight: 0.8, crossover: 0.5, init: DeInit::Uniform }
    }

    /// NP = 30 with Latin-hypercube initialization.
    pub fn lhs() -> Self {
        Self { population: 30, weight: 0.8, crossover: 0.5, init: DeInit::LatinHypercube }
    }
}

/// `a + F (b - c)`.
pub fn mutant(a: &[f64], b: &[f64], c: &[f64], weight: f64) -> Vec<f64> {
    a.iter().zip(b).zip(c).map(|((ai, bi), ci)| ai + weight * (bi - ci)).collect()
}

/// Binomial crossover: coordinate `j` comes from the mutant when
/// `uniforms[j] < crossover` or `j == forced`.
pub fn binomial_crossover(target: &[f64], mutant: &[f64], crossover: f64, forced: usize, uniforms: &[f64]) -> Vec<f64> {
    (0..target.len())
        .map(|j| if j == forced || uniforms[j] < crossover { mutant[j] } else { target[j] })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Member {
    pub point: Vec<f64>,
    /// `None` until the member's own evaluation is told.
    pub loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DeState {
    pub members: Vec<Member>,
    pub weight: f64,
    pub crossover: f64,
}

impl DeState {
    /// Proposal for `slot` using three distinct random donors other than `slot`.
    pub fn propose(&self, slot: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let np = self.members.len();
        let mut donors = [slot; 3];
        for k in 0..3 {
            loop {
                let candidate = rng.random_range(0..np);
                if candidate != slot && !donors[..k].contains(&candidate) {
                    donors[k] = candidate;
                    break;
                }
            }
        }
        let [a, b, c] = donors.map(|i| &self.members[i].point);
        let m = mutant(a, b, c, self.weight);
        let dim = m.len();
        let forced = rng.random_range(0..dim);
        let uniforms: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        binomial_crossover(&self.members[slot].point, &m, self.crossover, forced, &uniforms)
    }

    /// Replaces the slot iff the proposal is at least as good.
    pub fn select(&mut self, slot: usize, point: &[f64], loss: f64) -> bool {
        let member = &mut self.members[slot];
        match member.loss {
            Some(current) if loss > current => false,
            _ => {
                member.point = point.to_vec();
                member.loss = Some(loss);
                true
            }
        }
    }
}

enum Role {
    Initial(usize),
    Trial(usize),
}

pub struct DifferentialEvolution {
    state: DeState,
    bounds: SearchBox,
    rng: ChaCha8Rng,
    next_initial: usize,
    next_slot: usize,
    roles: HashMap<u64, Role>,
}

impl DifferentialEvolution {
    pub fn new(setup: &ContinuousSetup, config: DeConfig) -> Result<Self> {
        if config.population < 4 {
            return Err(Error::Config(format!("differential evolution needs at least 4 members, got {}", config.population)));
        }
        let mut rng = setup.rng();
        let dim = setup.dim();
        let np = config.population;
        let mut points = vec![vec![0.0; dim]; np];
        for j in 0..dim {
            let (lo, hi) = match (setup.bounds.lower[j], setup.bounds.upper[j]) {
                (lo, hi) if lo.is_finite() && hi.is_finite() => (lo, hi),
                _ => (-1.0, 1.0),
            };
            match config.init {
                DeInit::Uniform => {
                    for p in points.iter_mut() {
                        p[j] = rng.random_range(lo..=hi);
                    }
                }
                DeInit::LatinHypercube => {
                    let mut strata: Vec<usize> = (0..np).collect();
                    for i in (1..np).rev() {
                        strata.swap(i, rng.random_range(0..=i));
                    }
                    for (p, s) in points.iter_mut().zip(strata) {
                        let u = (s as f64 + rng.random::<f64>()) / np as f64;
                        p[j] = lo + u * (hi - lo);
                    }
                }
            }
        }
        let members = points.into_iter().map(|point| Member { point, loss: None }).collect();
        Ok(Self {
            state: DeState { members, weight: config.weight, crossover: config.crossover },
            bounds: setup.bounds.clone(),
            rng,
            next_initial: 0,
            next_slot: 0,
            roles: HashMap::new(),
        })
    }

    pub fn state(&self) -> &DeState {
        &self.state
    }

    fn worst_slot(&self) -> usize {
        let key = |m: &Member| m.loss.unwrap_or(f64::INFINITY);
        (0..self.state.members.len())
            .max_by(|&a, &b| key(&self.state.members[a]).total_cmp(&key(&self.state.members[b])).then(b.cmp(&a)))
            .unwrap_or(0)
    }
}

impl Solver for DifferentialEvolution {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        let np = self.state.members.len();
        if self.next_initial < np {
            let slot = self.next_initial;
            self.next_initial += 1;
            self.roles.insert(id, Role::Initial(slot));
            return self.state.members[slot].point.clone();
        }
        let slot = self.next_slot;
        self.next_slot = (slot + 1) % np;
        let mut x = self.state.propose(slot, &mut self.rng);
        self.bounds.clip(&mut x);
        self.roles.insert(id, Role::Trial(slot));
        x
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        match self.roles.remove(&id) {
            Some(Role::Initial(slot)) => {
                let member = &mut self.state.members[slot];
                if member.point == x {
                    member.loss = Some(loss);
                } else {
                    self.state.select(slot, x, loss);
                }
            }
            Some(Role::Trial(slot)) => {
                self.state.select(slot, x, loss);
            }
            None => {}
        }
    }

    fn start_from(&mut self, x: &[f64]) {
        if self.next_initial == 0 {
            self.state.members[0].point = x.to_vec();
        } else {
            let slot = self.worst_slot();
            self.state.members[slot] = Member { point: x.to_vec(), loss: None };
        }
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        let slot = self.worst_slot();
        if self.state.members[slot].loss.is_none_or(|l| loss < l) {
            self.state.members[slot] = Member { point: x.to_vec(), loss: Some(loss) };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_crossover_is_mutant() {
        let t = [0.0, 0.0, 0.0];
        let m = [1.0, 2.0, 3.0];
        assert_eq!(binomial_crossover(&t, &m, 1.0, 0, &[0.99, 0.5, 0.7]), m.to_vec());
    }

    #[test]
    fn zero_weight_gives_first_donor() {
        let a = [1.0, -2.0];
        assert_eq!(mutant(&a, &[5.0, 5.0], &[-3.0, 7.0], 0.0), a.to_vec());
    }

    #[test]
    fn crossover_forces_one_coordinate() {
        let x = binomial_crossover(&[0.0; 4], &[1.0; 4], 0.0, 2, &[0.5; 4]);
        assert_eq!(x, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn worse_proposal_keeps_slot() {
        let mut s = DeState { members: vec![Member { point: vec![1.0], loss: Some(2.0) }; 4], weight: 0.8, crossover: 0.5 };
        assert!(!s.select(0, &[9.0], 3.0));
        assert_eq!(s.members[0].point, vec![1.0]);
        assert!(s.select(0, &[9.0], 2.0));
        assert_eq!(s.members[0].point, vec![9.0]);
    }

    #[test]
    fn rejects_tiny_population() {
        let cfg = DeConfig { population: 3, ..DeConfig::standard(2) };
        assert!(matches!(DifferentialEvolution::new(&ContinuousSetup::unbounded(2, 10, 0), cfg), Err(Error::Config(_))));
    }

    #[test]
    fn lhs_covers_every_stratum() {
        let mut setup = ContinuousSetup::unbounded(3, 100, 5);
        setup.bounds = SearchBox { lower: vec![0.0; 3], upper: vec![1.0; 3] };
        let de = DifferentialEvolution::new(&setup, DeConfig::lhs()).unwrap();
        for j in 0..3 {
            let mut strata: Vec<usize> = de.state().members.iter().map(|m| (m.point[j] * 30.0).floor() as usize).collect();
            strata.sort_unstable();
            assert_eq!(strata, (0..30).collect::<Vec<_>>());
        }
    }

    #[test]
    fn slot_losses_never_increase() {
        let mut de = DifferentialEvolution::new(&ContinuousSetup::unbounded(3, 2000, 8), DeConfig::standard(3)).unwrap();
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let mut previous: Vec<Option<f64>> = vec![None; 30];
        for id in 0..2000 {
            let x = de.ask(id);
            de.tell(id, &x, f(&x));
            for (p, m) in previous.iter_mut().zip(&de.state().members) {
                if let (Some(before), Some(now)) = (*p, m.loss) {
                    assert!(now <= before);
                }
                *p = m.loss;
            }
        }
        let best = de.state().members.iter().filter_map(|m| m.loss).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "best {best}");
    }
}
