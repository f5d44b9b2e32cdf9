//! Test-based population-size adaptation: a (mu/mu, lambda) evolution
//! strategy with self-adapted step sizes whose population grows when
//! progress stalls, recommending an average of recent centers instead of any
//! single observation. The naive variant recommends the best observed point.

use std::collections::HashMap;
use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{gaussian_vec, ContinuousSetup};
use crate::optimizer::Solver;
use crate::space::SearchBox;

pub const ELITE_FRACTION: f64 = 0.25;
pub const CENTER_WINDOW: usize = 5;
pub const STAGNATION_GENERATIONS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Offspring {
    pub point: Vec<f64>,
    pub loss: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct TbpsaState {
    pub center: Vec<f64>,
    pub sigma: f64,
    pub population: usize,
    pub elite_fraction: f64,
    pub centers: VecDeque<Vec<f64>>,
    pub window: usize,
    pub naive: bool,
    best_elite_mean: f64,
    stagnant: usize,
}

impl TbpsaState {
    pub fn new(center: Vec<f64>, population: usize, naive: bool) -> Self {
        Self {
            center,
            sigma: 1.0,
            population: population.max(4),
            elite_fraction: ELITE_FRACTION,
            centers: VecDeque::new(),
            window: CENTER_WINDOW,
            naive,
            best_elite_mean: f64::INFINITY,
            stagnant: 0,
        }
    }

    pub fn elite_size(&self, generation_len: usize) -> usize {
        ((generation_len as f64 * self.elite_fraction).ceil() as usize).clamp(1, generation_len)
    }

    /// Moves the center to the elite mean and the step size to the elite's
    /// geometric mean. Returns true when the elite mean loss stagnated long
    /// enough to call for a larger population.
    pub fn update(&mut self, generation: &[Offspring]) -> bool {
        if generation.is_empty() {
            return false;
        }
        let mut order: Vec<usize> = (0..generation.len()).collect();
        order.sort_by(|&a, &b| generation[a].loss.total_cmp(&generation[b].loss));
        let elite = &order[..self.elite_size(generation.len())];
        let n = elite.len() as f64;
        let dim = self.center.len();
        let mut center = vec![0.0; dim];
        for &i in elite {
            for (c, x) in center.iter_mut().zip(&generation[i].point) {
                *c += x / n;
            }
        }
        self.center = center;
        self.sigma = (elite.iter().map(|&i| generation[i].sigma.ln()).sum::<f64>() / n).exp();
        self.centers.push_back(self.center.clone());
        while self.centers.len() > self.window {
            self.centers.pop_front();
        }
        let elite_mean = elite.iter().map(|&i| generation[i].loss).sum::<f64>() / n;
        if elite_mean < self.best_elite_mean {
            self.best_elite_mean = elite_mean;
            self.stagnant = 0;
            false
        } else {
            self.stagnant += 1;
            if self.stagnant >= STAGNATION_GENERATIONS {
                self.stagnant = 0;
                true
            } else {
                false
            }
        }
    }

    /// Mean of the most recent centers, if any generation has completed.
    pub fn averaged_center(&self) -> Option<Vec<f64>> {
        if self.centers.is_empty() {
            return None;
        }
        let k = self.centers.len() as f64;
        let mut avg = vec![0.0; self.center.len()];
        for c in &self.centers {
            for (a, x) in avg.iter_mut().zip(c) {
                *a += x / k;
            }
        }
        Some(avg)
    }
}

pub struct Tbpsa {
    state: TbpsaState,
    bounds: SearchBox,
    rng: ChaCha8Rng,
    budget: usize,
    asked: usize,
    generation: usize,
    issued: HashMap<u64, (usize, f64)>,
    buffer: Vec<Offspring>,
    best_observed: Option<(Vec<f64>, f64)>,
}

impl Tbpsa {
    pub fn new(setup: &ContinuousSetup, naive: bool) -> Self {
        let population = (4 * setup.dim()).max(4).max(setup.num_workers);
        Self {
            state: TbpsaState::new(vec![0.0; setup.dim()], population, naive),
            bounds: setup.bounds.clone(),
            rng: setup.rng(),
            budget: setup.budget,
            asked: 0,
            generation: 0,
            issued: HashMap::new(),
            buffer: Vec::new(),
            best_observed: None,
        }
    }

    pub fn state(&self) -> &TbpsaState {
        &self.state
    }
}

impl Solver for Tbpsa {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        let dim = self.state.center.len();
        let tau = 1.0 / (2.0 * dim as f64).sqrt();
        let eta: f64 = StandardNormal.sample(&mut self.rng);
        let sigma = self.state.sigma * (tau * eta).exp();
        let z = gaussian_vec(&mut self.rng, dim);
        let mut x: Vec<f64> = self.state.center.iter().zip(&z).map(|(c, zi)| c + sigma * zi).collect();
        self.bounds.clip(&mut x);
        self.issued.insert(id, (self.generation, sigma));
        self.asked += 1;
        x
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        if self.best_observed.as_ref().is_none_or(|(_, l)| loss < *l) {
            self.best_observed = Some((x.to_vec(), loss));
        }
        let Some((generation, sigma)) = self.issued.remove(&id) else { return };
        if generation != self.generation {
            return;
        }
        self.buffer.push(Offspring { point: x.to_vec(), loss, sigma });
        if self.buffer.len() >= self.state.population {
            let offspring = std::mem::take(&mut self.buffer);
            let stalled = self.state.update(&offspring);
            self.generation += 1;
            let remaining = self.budget.saturating_sub(self.asked);
            if stalled && 2 * self.state.population <= remaining / 2 {
                self.state.population *= 2;
                log::debug!("TBPSA population doubled to {}", self.state.population);
            }
        }
    }

    fn recommend(&self) -> Option<Vec<f64>> {
        if self.state.naive {
            self.best_observed.as_ref().map(|(x, _)| x.clone())
        } else {
            self.state.averaged_center()
        }
    }

    fn start_from(&mut self, x: &[f64]) {
        self.state.center = x.to_vec();
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        if self.best_observed.as_ref().is_none_or(|(_, l)| loss < *l) {
            self.best_observed = Some((x.to_vec(), loss));
            self.state.center = x.to_vec();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elite_center_of_four_points() {
        let mut s = TbpsaState::new(vec![0.0, 0.0], 4, false);
        s.elite_fraction = 0.5;
        let gen: Vec<Offspring> = [([0.0, 0.0], 1.0), ([2.0, 0.0], 2.0), ([0.0, 2.0], 3.0), ([2.0, 2.0], 4.0)]
            .into_iter()
            .map(|(p, loss)| Offspring { point: p.to_vec(), loss, sigma: 1.0 })
            .collect();
        s.update(&gen);
        assert_eq!(s.center, vec![1.0, 0.0]);
    }

    #[test]
    fn naive_recommends_best_observation() {
        let mut t = Tbpsa::new(&ContinuousSetup::unbounded(2, 100, 4), true);
        let mut best = (vec![], f64::INFINITY);
        for id in 0..50 {
            let x = t.ask(id);
            let l = x[0].abs() + x[1].abs();
            if l < best.1 {
                best = (x.clone(), l);
            }
            t.tell(id, &x, l);
        }
        assert_eq!(t.recommend(), Some(best.0));
    }

    #[test]
    fn no_recommendation_before_first_generation() {
        let mut t = Tbpsa::new(&ContinuousSetup::unbounded(2, 100, 4), false);
        let x = t.ask(0);
        t.tell(0, &x, 1.0);
        assert_eq!(t.recommend(), None);
    }

    #[test]
    fn population_doubles_on_flat_function() {
        let mut t = Tbpsa::new(&ContinuousSetup::unbounded(1, 10_000, 4), false);
        for id in 0..200 {
            let x = t.ask(id);
            t.tell(id, &x, 1.0);
        }
        assert!(t.state().population > 4);
    }
}
