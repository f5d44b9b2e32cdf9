//! (1+1) evolution strategy with the one-fifth success rule.

use rand_chacha::ChaCha8Rng;

use super::{gaussian_vec, ContinuousSetup};
use crate::optimizer::Solver;
use crate::space::SearchBox;

pub const SIGMA_FLOOR: f64 = 1e-15;

/// Step-size state. With `c_up = 2` and `c_down = 2^(-1/4)`, one success and
/// four failures leave sigma unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct EsState {
    pub incumbent: Vec<f64>,
    /// `None` until the first tell.
    pub incumbent_loss: Option<f64>,
    pub sigma: f64,
    pub c_up: f64,
    pub c_down: f64,
}

impl EsState {
    pub fn new(start: Vec<f64>, sigma: f64) -> Self {
        Self { incumbent: start, incumbent_loss: None, sigma, c_up: 2.0, c_down: 2f64.powf(-0.25) }
    }

    /// Applies one told offspring; returns whether it was a success.
    pub fn step(&mut self, point: &[f64], loss: f64) -> bool {
        let Some(best) = self.incumbent_loss else {
            // The first observation only fixes the reference loss.
            self.incumbent = point.to_vec();
            self.incumbent_loss = Some(loss);
            return false;
        };
        let success = loss < best;
        if success {
            self.incumbent = point.to_vec();
            self.incumbent_loss = Some(loss);
            self.sigma *= self.c_up;
        } else {
            self.sigma *= self.c_down;
        }
        if self.sigma < SIGMA_FLOOR {
            log::debug!("(1+1)-ES step size underflow, clamping to {SIGMA_FLOOR}");
            self.sigma = SIGMA_FLOOR;
        }
        success
    }
}

pub struct OnePlusOneEs {
    state: EsState,
    bounds: SearchBox,
    rng: ChaCha8Rng,
}

impl OnePlusOneEs {
    pub fn new(setup: &ContinuousSetup) -> Self {
        Self { state: EsState::new(vec![0.0; setup.dim()], 1.0), bounds: setup.bounds.clone(), rng: setup.rng() }
    }

    pub fn state(&self) -> &EsState {
        &self.state
    }
}

impl Solver for OnePlusOneEs {
    fn ask(&mut self, _id: u64) -> Vec<f64> {
        let z = gaussian_vec(&mut self.rng, self.state.incumbent.len());
        let mut x: Vec<f64> = self.state.incumbent.iter().zip(&z).map(|(m, zi)| m + self.state.sigma * zi).collect();
        self.bounds.clip(&mut x);
        x
    }

    fn tell(&mut self, _id: u64, x: &[f64], loss: f64) {
        self.state.step(x, loss);
    }

    fn start_from(&mut self, x: &[f64]) {
        self.state.incumbent = x.to_vec();
        self.state.incumbent_loss = None;
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        if self.state.incumbent_loss.is_none_or(|best| loss < best) {
            self.state.incumbent = x.to_vec();
            self.state.incumbent_loss = Some(loss);
        }
    }
}
