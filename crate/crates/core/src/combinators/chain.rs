//! Runs children one after another, each starting from the best point found
//! so far.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::optimizer::Solver;

/// Splits `budget` between children. Children with an absolute ask count are
/// served first (capped by what is left); the rest share the remainder in
/// proportion to their fractions, rounded down, and the last child receives
/// whatever rounding left over.
pub fn allocate_budgets(budget: usize, fractions: &[f64], absolute: &[Option<usize>]) -> Result<Vec<usize>> {
    if fractions.is_empty() || fractions.len() != absolute.len() {
        return Err(Error::Config("chain needs one fraction per child".into()));
    }
    let mut quotas = vec![0usize; fractions.len()];
    let mut remaining = budget;
    for (q, a) in quotas.iter_mut().zip(absolute) {
        if let Some(n) = a {
            *q = (*n).min(remaining);
            remaining -= *q;
        }
    }
    let shared: f64 = fractions.iter().zip(absolute).filter(|(_, a)| a.is_none()).map(|(f, _)| f).sum();
    let pool = remaining;
    if shared > 0.0 {
        for (i, f) in fractions.iter().enumerate() {
            if absolute[i].is_none() {
                let share = ((pool as f64) * f / shared + 1e-9).floor() as usize;
                quotas[i] = share.min(remaining);
                remaining -= quotas[i];
            }
        }
    }
    let last = quotas.len() - 1;
    quotas[last] += remaining;
    Ok(quotas)
}

pub struct Chain {
    children: Vec<Box<dyn Solver>>,
    quotas: Vec<usize>,
    current: usize,
    used: usize,
    owners: HashMap<u64, usize>,
    best: Option<(Vec<f64>, f64)>,
}

impl Chain {
    pub fn new(children: Vec<Box<dyn Solver>>, quotas: Vec<usize>) -> Self {
        assert_eq!(children.len(), quotas.len(), "one quota per child");
        Self { children, quotas, current: 0, used: 0, owners: HashMap::new(), best: None }
    }

    pub fn current_child(&self) -> usize {
        self.current
    }

    fn advance(&mut self) {
        while self.current + 1 < self.children.len()
            && (self.used >= self.quotas[self.current] || self.children[self.current].exhausted())
        {
            let leftover = self.quotas[self.current].saturating_sub(self.used);
            self.current += 1;
            self.quotas[self.current] += leftover;
            self.used = 0;
            if let Some((x, _)) = &self.best {
                self.children[self.current].start_from(x);
            }
        }
    }
}

impl Solver for Chain {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        self.advance();
        self.used += 1;
        self.owners.insert(id, self.current);
        self.children[self.current].ask(id)
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        if self.best.as_ref().is_none_or(|(_, l)| loss < *l) {
            self.best = Some((x.to_vec(), loss));
        }
        if let Some(child) = self.owners.remove(&id) {
            self.children[child].tell(id, x, loss);
        }
    }

    fn recommend(&self) -> Option<Vec<f64>> {
        self.children[self.current].recommend()
    }

    fn start_from(&mut self, x: &[f64]) {
        self.children[self.current].start_from(x);
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        self.children[self.current].inject(x, loss);
    }

    fn exhausted(&self) -> bool {
        self.current + 1 == self.children.len() && self.children[self.current].exhausted()
    }
}
