//! Runs every child on an equal slice of an exploration phase, then gives the
//! rest of the budget to the child with the best told loss.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::optimizer::Solver;

/// Phase-one budget per child: `floor(budget * fraction)` split evenly,
/// remainder to child 0.
pub fn phase_budgets(budget: usize, children: usize, fraction: f64) -> Result<Vec<usize>> {
    if children < 2 {
        return Err(Error::Config("bet_and_run needs at least two children".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("bet_and_run phase fraction must lie in (0, 1), got {fraction}")));
    }
    let phase = (budget as f64 * fraction + 1e-9).floor() as usize;
    let each = phase / children;
    if each == 0 {
        return Err(Error::Config(format!(
            "bet_and_run phase of {phase} evaluations leaves nothing for each of {children} children"
        )));
    }
    let mut out = vec![each; children];
    out[0] += phase - each * children;
    Ok(out)
}

pub struct BetAndRun {
    children: Vec<Box<dyn Solver>>,
    phase_left: Vec<usize>,
    cursor: usize,
    best: Vec<f64>,
    survivor: Option<usize>,
    owners: HashMap<u64, usize>,
}

impl BetAndRun {
    pub fn new(children: Vec<Box<dyn Solver>>, phase: Vec<usize>) -> Self {
        let n = children.len();
        Self { children, phase_left: phase, cursor: 0, best: vec![f64::INFINITY; n], survivor: None, owners: HashMap::new() }
    }

    pub fn survivor(&self) -> Option<usize> {
        self.survivor
    }

    /// Lowest best told loss; ties go to the lowest index.
    fn pick_survivor(&self) -> usize {
        let mut s = 0;
        for (i, l) in self.best.iter().enumerate() {
            if *l < self.best[s] {
                s = i;
            }
        }
        s
    }
}

impl Solver for BetAndRun {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        let n = self.children.len();
        let child = if self.survivor.is_none() && self.phase_left.iter().any(|&p| p > 0) {
            while self.phase_left[self.cursor] == 0 {
                self.cursor = (self.cursor + 1) % n;
            }
            let c = self.cursor;
            self.phase_left[c] -= 1;
            self.cursor = (c + 1) % n;
            c
        } else {
            match self.survivor {
                Some(s) => s,
                None => {
                    let s = self.pick_survivor();
                    log::debug!("bet_and_run keeps child {s}");
                    self.survivor = Some(s);
                    s
                }
            }
        };
        self.owners.insert(id, child);
        self.children[child].ask(id)
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        if let Some(child) = self.owners.remove(&id) {
            self.best[child] = self.best[child].min(loss);
            self.children[child].tell(id, x, loss);
        }
    }

    fn recommend(&self) -> Option<Vec<f64>> {
        self.survivor.and_then(|s| self.children[s].recommend())
    }

    fn start_from(&mut self, x: &[f64]) {
        for c in &mut self.children {
            c.start_from(x);
        }
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        match self.survivor {
            Some(s) => self.children[s].inject(x, loss),
            None => self.children.iter_mut().for_each(|c| c.inject(x, loss)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_way_split() {
        assert_eq!(phase_budgets(1000, 3, 0.2).unwrap(), vec![68, 66, 66]);
    }

    #[test]
    fn empty_share_is_rejected() {
        assert!(matches!(phase_budgets(10, 3, 0.2), Err(Error::Config(_))));
    }

    struct Constant(f64);

    impl Solver for Constant {
        fn ask(&mut self, _id: u64) -> Vec<f64> {
            vec![self.0]
        }
        fn tell(&mut self, _id: u64, _x: &[f64], _loss: f64) {}
    }

    fn survivor_for(levels: [f64; 3]) -> usize {
        let children: Vec<Box<dyn Solver>> = levels.iter().map(|&l| Box::new(Constant(l)) as Box<dyn Solver>).collect();
        let mut b = BetAndRun::new(children, phase_budgets(30, 3, 0.3).unwrap());
        for id in 0..30 {
            let x = b.ask(id);
            b.tell(id, &x, x[0]);
        }
        b.survivor().unwrap()
    }

    #[test]
    fn best_child_survives() {
        assert_eq!(survivor_for([3.0, 1.0, 2.0]), 1);
    }

    #[test]
    fn tie_keeps_first_child() {
        assert_eq!(survivor_for([1.0, 1.0, 1.0]), 0);
    }
}
