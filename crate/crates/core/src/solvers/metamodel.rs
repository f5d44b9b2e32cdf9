//! Quadratic surrogate proposals, and a wrapper that occasionally evaluates
//! the surrogate's minimizer instead of the child's own sample.

use std::collections::HashSet;

use super::quadratic::{quadratic_terms, QuadraticModel};
use crate::optimizer::Solver;

/// Proposes the minimizer of a quadratic fitted to the most recent points.
///
/// Needs at least `quadratic_terms(d) + d` points. Returns `None` when the
/// fit is degenerate, not positive definite, or its minimizer falls outside
/// the bounding box of the fitted points inflated twofold around its center.
pub fn metamodel_propose(archive: &[(Vec<f64>, f64)], dim: usize) -> Option<Vec<f64>> {
    let terms = quadratic_terms(dim);
    if archive.len() < terms + dim {
        return None;
    }
    let recent = &archive[archive.len().saturating_sub(2 * terms)..];
    let points: Vec<Vec<f64>> = recent.iter().map(|(x, _)| x.clone()).collect();
    let losses: Vec<f64> = recent.iter().map(|(_, l)| *l).collect();
    let model = QuadraticModel::fit(&points, &losses)?;
    if !model.is_positive_definite() {
        return None;
    }
    let x = model.minimizer()?;
    for j in 0..dim {
        let lo = points.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        let half = hi - lo;
        if x[j] < mid - half || x[j] > mid + half {
            return None;
        }
    }
    Some(x)
}

/// Period between surrogate proposals: `4 + floor(3 ln d)` asks.
pub fn proposal_period(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

pub struct MetaModel {
    child: Box<dyn Solver>,
    dim: usize,
    period: usize,
    asks: usize,
    archive: Vec<(Vec<f64>, f64)>,
    surrogate_ids: HashSet<u64>,
    best_loss: f64,
}

impl MetaModel {
    pub fn new(child: Box<dyn Solver>, dim: usize) -> Self {
        Self {
            child,
            dim,
            period: proposal_period(dim),
            asks: 0,
            archive: Vec::new(),
            surrogate_ids: HashSet::new(),
            best_loss: f64::INFINITY,
        }
    }
}

impl Solver for MetaModel {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        self.asks += 1;
        if self.asks % self.period == 0 {
            if let Some(x) = metamodel_propose(&self.archive, self.dim) {
                self.surrogate_ids.insert(id);
                return x;
            }
        }
        self.child.ask(id)
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        self.archive.push((x.to_vec(), loss));
        let improved = loss < self.best_loss;
        self.best_loss = self.best_loss.min(loss);
        if self.surrogate_ids.remove(&id) {
            if improved {
                self.child.inject(x, loss);
            }
        } else {
            self.child.tell(id, x, loss);
        }
    }

    fn recommend(&self) -> Option<Vec<f64>> {
        self.child.recommend()
    }

    fn start_from(&mut self, x: &[f64]) {
        self.child.start_from(x);
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        self.best_loss = self.best_loss.min(loss);
        self.child.inject(x, loss);
    }

    fn exhausted(&self) -> bool {
        self.child.exhausted()
    }
}
