//! Optimizes a growing prefix of the coordinates, keeping the others pinned
//! at the domain center.

use crate::optimizer::Solver;

/// `min(d, 1 + floor(t / ceil(0.8 budget / d)))`.
pub fn active_coordinates(t: usize, dim: usize, budget: usize) -> usize {
    let period = ((0.8 * budget as f64 / dim as f64).ceil() as usize).max(1);
    dim.min(1 + t / period)
}

pub struct Progressive {
    child: Box<dyn Solver>,
    dim: usize,
    budget: usize,
    asked: usize,
}

impl Progressive {
    pub fn new(child: Box<dyn Solver>, dim: usize, budget: usize) -> Self {
        Self { child, dim, budget, asked: 0 }
    }
}

impl Solver for Progressive {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        let active = active_coordinates(self.asked, self.dim, self.budget);
        self.asked += 1;
        let mut x = self.child.ask(id);
        x[active..].iter_mut().for_each(|v| *v = 0.0);
        x
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        self.child.tell(id, x, loss);
    }

    fn recommend(&self) -> Option<Vec<f64>> {
        let active = active_coordinates(self.asked.saturating_sub(1), self.dim, self.budget);
        self.child.recommend().map(|mut x| {
            x[active..].iter_mut().for_each(|v| *v = 0.0);
            x
        })
    }

    fn start_from(&mut self, x: &[f64]) {
        self.child.start_from(x);
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        self.child.inject(x, loss);
    }

    fn exhausted(&self) -> bool {
        self.child.exhausted()
    }
}
