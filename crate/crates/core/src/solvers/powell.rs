//! Powell's conjugate-direction method: sweeps of line searches along a
//! direction set, replacing the direction of largest decrease by the overall
//! sweep displacement when that is expected to pay off.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use super::line_search::LineSearch;
use super::{gaussian_vec, norm, ContinuousSetup};
use crate::optimizer::Solver;
use crate::space::SearchBox;

const CONDITION_LIMIT: f64 = 1e10;
/// Smallest line-search step relative to the size of the current point.
const MIN_STEP: f64 = 1e-16;

#[derive(Debug, Clone)]
enum Phase {
    /// Waiting for the loss at the starting point.
    Base,
    /// Line search along direction `index`; `index == dim` is the sweep
    /// displacement candidate.
    Line { index: usize, search: LineSearch },
    /// Waiting for the loss at `2 x - x0`.
    Extrapolate,
}

pub struct Powell {
    bounds: SearchBox,
    rng: ChaCha8Rng,
    directions: Vec<Vec<f64>>,
    steps: Vec<f64>,
    x: Vec<f64>,
    fx: f64,
    sweep_start: (Vec<f64>, f64),
    largest_decrease: (f64, usize),
    phase: Phase,
    main_pending: Option<u64>,
    sweeps: usize,
}

impl Powell {
    pub fn new(setup: &ContinuousSetup) -> Self {
        let dim = setup.dim();
        Self {
            bounds: setup.bounds.clone(),
            rng: setup.rng(),
            directions: axes(dim),
            steps: vec![1.0; dim + 1],
            x: vec![0.0; dim],
            fx: f64::INFINITY,
            sweep_start: (vec![0.0; dim], f64::INFINITY),
            largest_decrease: (0.0, 0),
            phase: Phase::Base,
            main_pending: None,
            sweeps: 0,
        }
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn position(&self) -> (&[f64], f64) {
        (&self.x, self.fx)
    }

    fn dim(&self) -> usize {
        self.x.len()
    }

    fn along(&self, direction: &[f64], t: f64) -> Vec<f64> {
        let mut p: Vec<f64> = self.x.iter().zip(direction).map(|(xi, di)| xi + t * di).collect();
        self.bounds.clip(&mut p);
        p
    }

    fn direction(&self, index: usize) -> Vec<f64> {
        if index < self.dim() {
            self.directions[index].clone()
        } else {
            unit(self.x.iter().zip(&self.sweep_start.0).map(|(a, b)| a - b).collect())
        }
    }

    fn start_line(&mut self, index: usize) {
        let search = LineSearch::new(self.fx, self.steps[index]);
        self.phase = Phase::Line { index, search };
    }

    fn begin_sweep(&mut self) {
        if self.sweeps > 0 && self.fx >= self.sweep_start.1 {
            self.directions = axes(self.dim());
        }
        self.sweeps += 1;
        self.sweep_start = (self.x.clone(), self.fx);
        self.largest_decrease = (0.0, 0);
        self.start_line(0);
    }

    fn finish_line(&mut self, index: usize, search: &LineSearch) {
        let (t, ft) = search.result();
        let direction = self.direction(index);
        if ft < self.fx {
            let decrease = self.fx - ft;
            self.x = self.along(&direction, t);
            self.fx = ft;
            if index < self.dim() && decrease > self.largest_decrease.0 {
                self.largest_decrease = (decrease, index);
            }
        }
        let floor = MIN_STEP * (1.0 + norm(&self.x));
        self.steps[index] = t.abs().max(0.1 * self.steps[index]).max(floor);
        if index + 1 < self.dim() {
            self.start_line(index + 1);
        } else if index + 1 == self.dim() && self.dim() > 1 {
            self.phase = Phase::Extrapolate;
        } else {
            if index == self.dim() {
                self.replace_direction(direction);
            }
            self.begin_sweep();
        }
    }

    fn replace_direction(&mut self, new_direction: Vec<f64>) {
        let mut candidate = self.directions.clone();
        let big = self.largest_decrease.1;
        candidate.remove(big);
        candidate.push(new_direction);
        if condition_number(&candidate) < CONDITION_LIMIT {
            self.directions = candidate;
            let step = self.steps.remove(big);
            self.steps.insert(self.dim() - 1, step);
        } else {
            log::debug!("Powell direction replacement skipped: set would become ill-conditioned");
        }
    }

    fn extrapolated(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.x.iter().zip(&self.sweep_start.0).map(|(a, b)| 2.0 * a - b).collect();
        self.bounds.clip(&mut p);
        p
    }

    fn decide_replacement(&mut self, fe: f64) {
        let f0 = self.sweep_start.1;
        let fn_ = self.fx;
        let delta = self.largest_decrease.0;
        let displacement = norm(&self.x.iter().zip(&self.sweep_start.0).map(|(a, b)| a - b).collect::<Vec<_>>());
        let worth = fe < f0
            && displacement > 0.0
            && 2.0 * (f0 - 2.0 * fn_ + fe) * (f0 - fn_ - delta).powi(2) < (f0 - fe).powi(2) * delta;
        if worth {
            let dim = self.dim();
            self.steps[dim] = displacement;
            self.start_line(dim);
        } else {
            self.begin_sweep();
        }
    }

    fn probe(&mut self) -> Vec<f64> {
        let scale = self.steps.iter().copied().fold(0.0, f64::max).max(MIN_STEP);
        let dim = self.dim();
        let z = gaussian_vec(&mut self.rng, dim);
        let mut p: Vec<f64> = self.x.iter().zip(&z).map(|(xi, zi)| xi + scale * zi).collect();
        self.bounds.clip(&mut p);
        p
    }
}

fn axes(dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect()
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}

/// Ratio of extreme singular values of the matrix with `directions` as rows.
pub fn condition_number(directions: &[Vec<f64>]) -> f64 {
    let n = directions.len();
    let m = DMatrix::from_fn(n, n, |r, c| directions[r][c]);
    let s = m.singular_values();
    let smallest = s.min();
    if smallest > 0.0 {
        s.max() / smallest
    } else {
        f64::INFINITY
    }
}

impl Solver for Powell {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        if self.main_pending.is_some() {
            return self.probe();
        }
        let point = match &self.phase {
            Phase::Base => {
                let mut p = self.x.clone();
                self.bounds.clip(&mut p);
                p
            }
            Phase::Line { index, search } => {
                let t = search.next().unwrap_or(0.0);
                self.along(&self.direction(*index), t)
            }
            Phase::Extrapolate => self.extrapolated(),
        };
        self.main_pending = Some(id);
        point
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        if self.main_pending != Some(id) {
            return;
        }
        self.main_pending = None;
        match std::mem::replace(&mut self.phase, Phase::Base) {
            Phase::Base => {
                self.x = x.to_vec();
                self.fx = loss;
                self.begin_sweep();
            }
            Phase::Line { index, mut search } => {
                search.feed(loss);
                if search.is_done() {
                    self.finish_line(index, &search);
                } else {
                    self.phase = Phase::Line { index, search };
                }
            }
            Phase::Extrapolate => {
                if loss < self.fx {
                    self.x = x.to_vec();
                    self.fx = loss;
                }
                self.decide_replacement(loss);
            }
        }
    }

    fn start_from(&mut self, x: &[f64]) {
        self.x = x.to_vec();
        self.fx = f64::INFINITY;
        self.phase = Phase::Base;
        self.main_pending = None;
        self.sweeps = 0;
    }
}
