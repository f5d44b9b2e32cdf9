//! The ask/tell/recommend contract.
//!
//! A [`Solver`] proposes vectors in its own encoding (normalized or native,
//! see [`crate::space`]). The [`OptimizerHandle`] wraps a solver tree and owns
//! everything the contract promises independently of the algorithm: candidate
//! ids, the budget, outstanding asks, the archive of observations and the
//! incumbent.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{DomainSpec, Point};

/// A-priori features of a run: the only information a solver may rely on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunContext {
    pub domain: DomainSpec,
    pub budget: usize,
    pub num_workers: usize,
    pub noisy: bool,
    pub master_seed: u64,
}

impl RunContext {
    pub fn new(domain: DomainSpec, budget: usize, num_workers: usize, noisy: bool, master_seed: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::InvalidContext("budget must be positive".into()));
        }
        if num_workers == 0 || num_workers > budget {
            return Err(Error::InvalidContext(format!(
                "num_workers must be in 1..={budget}, got {num_workers}"
            )));
        }
        Ok(Self { domain, budget, num_workers, noisy, master_seed })
    }
}

/// An algorithm operating on plain vectors in a fixed encoding.
///
/// Ids are unique per run and assigned by the handle. `tell` receives the
/// vector that was returned by `ask` for that id; solvers must tolerate tells
/// for ids they do not track (re-tells, stale generations).
pub trait Solver: Send {
    fn ask(&mut self, id: u64) -> Vec<f64>;

    fn tell(&mut self, id: u64, x: &[f64], loss: f64);

    /// Solver-specific estimate of the optimum. `None` defers to the
    /// handle's incumbent.
    fn recommend(&self) -> Option<Vec<f64>> {
        None
    }

    /// Re-centres the search on `x` before the first ask (chaining handoff).
    fn start_from(&mut self, _x: &[f64]) {}

    /// Offers an externally evaluated point (e.g. a surrogate proposal).
    fn inject(&mut self, _x: &[f64], _loss: f64) {}

    /// True once the solver has nothing left to propose on its own.
    fn exhausted(&self) -> bool {
        false
    }
}

/// How solver vectors map onto domain points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Normalized,
    Native,
}

impl Encoding {
    pub fn decode(self, domain: &DomainSpec, x: &[f64]) -> Point {
        match self {
            Encoding::Normalized => domain.decode_normalized(x),
            Encoding::Native => domain.decode_native(x),
        }
    }
}

/// A proposed point and the observations told for it so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: u64,
    pub point: Point,
    pub observations: Vec<f64>,
}

impl Candidate {
    pub fn mean_loss(&self) -> Option<f64> {
        mean(&self.observations)
    }
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecommendationSource {
    /// The solver's own estimate.
    Solver,
    /// Best told candidate.
    Incumbent,
    /// No tells yet: the domain center, flagged as a degenerate answer.
    Center,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation {
    pub point: Point,
    pub source: RecommendationSource,
}

impl Recommendation {
    pub fn is_fallback_center(&self) -> bool {
        self.source == RecommendationSource::Center
    }
}

#[derive(Debug, Clone)]
struct Told {
    x: Vec<f64>,
    candidate: Candidate,
}

#[derive(Debug, Clone)]
struct Pending {
    x: Vec<f64>,
    point: Point,
}

/// Live optimizer state for one run.
pub struct OptimizerHandle {
    domain: DomainSpec,
    budget: usize,
    num_workers: usize,
    noisy: bool,
    encoding: Encoding,
    solver: Box<dyn Solver>,
    next_id: u64,
    asked: usize,
    told: usize,
    pending: BTreeMap<u64, Pending>,
    archive: HashMap<u64, Told>,
    incumbent: Option<u64>,
}

impl std::fmt::Debug for OptimizerHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OptimizerHandle")
            .field("budget", &self.budget)
            .field("num_workers", &self.num_workers)
            .field("asked", &self.asked)
            .field("told", &self.told)
            .field("incumbent", &self.incumbent)
            .finish_non_exhaustive()
    }
}

impl OptimizerHandle {
    pub fn new(ctx: &RunContext, encoding: Encoding, solver: Box<dyn Solver>) -> Self {
        Self {
            domain: ctx.domain.clone(),
            budget: ctx.budget,
            num_workers: ctx.num_workers,
            noisy: ctx.noisy,
            encoding,
            solver,
            next_id: 0,
            asked: 0,
            told: 0,
            pending: BTreeMap::new(),
            archive: HashMap::new(),
            incumbent: None,
        }
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn num_workers(&self) -> usize {
        self.num_workers
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn asks(&self) -> usize {
        self.asked
    }

    pub fn tells(&self) -> usize {
        self.told
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn ask(&mut self) -> Result<Candidate> {
        if self.asked >= self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        if self.pending.len() >= self.num_workers {
            return Err(Error::TooManyPending { pending: self.pending.len(), num_workers: self.num_workers });
        }
        let id = self.next_id;
        self.next_id += 1;
        self.asked += 1;
        let x = self.solver.ask(id);
        let point = self.encoding.decode(&self.domain, &x);
        debug_assert!(self.domain.contains(&point), "solver produced a point outside the domain");
        self.pending.insert(id, Pending { x, point: point.clone() });
        Ok(Candidate { id, point, observations: Vec::new() })
    }

    pub fn tell(&mut self, candidate: &Candidate, loss: f64) -> Result<()> {
        if !loss.is_finite() {
            return Err(Error::InvalidLoss(loss));
        }
        let id = candidate.id;
        let x = if let Some(p) = self.pending.get(&id) {
            if p.point != candidate.point {
                return Err(Error::Contract(format!("candidate {id} does not match the asked point")));
            }
            let p = self.pending.remove(&id).expect("checked above");
            self.archive.insert(
                id,
                Told { x: p.x.clone(), candidate: Candidate { id, point: p.point, observations: Vec::new() } },
            );
            p.x
        } else if let Some(t) = self.archive.get(&id) {
            if t.candidate.point != candidate.point {
                return Err(Error::Contract(format!("candidate {id} does not match the told point")));
            }
            t.x.clone()
        } else {
            return Err(Error::UnknownCandidate(id));
        };
        self.archive.get_mut(&id).expect("inserted above").candidate.observations.push(loss);
        self.told += 1;
        self.solver.tell(id, &x, loss);
        self.update_incumbent(id);
        Ok(())
    }

    fn update_incumbent(&mut self, id: u64) {
        let Some(current) = self.incumbent else {
            self.incumbent = Some(id);
            return;
        };
        if !self.noisy {
            if current != id && self.mean_of(id) < self.mean_of(current) {
                self.incumbent = Some(id);
            }
            return;
        }
        if current == id {
            // The incumbent's own mean moved; it may have lost its place.
            self.incumbent = self.archive.keys().copied().min_by(|a, b| self.noisy_order(*a, *b));
        } else if self.noisy_order(id, current).is_lt() {
            self.incumbent = Some(id);
        }
    }

    fn mean_of(&self, id: u64) -> f64 {
        self.archive[&id].candidate.mean_loss().unwrap_or(f64::INFINITY)
    }

    /// Lowest mean first, then more observations, then lower id.
    fn noisy_order(&self, a: u64, b: u64) -> std::cmp::Ordering {
        let (ca, cb) = (&self.archive[&a].candidate, &self.archive[&b].candidate);
        self.mean_of(a)
            .total_cmp(&self.mean_of(b))
            .then(cb.observations.len().cmp(&ca.observations.len()))
            .then(a.cmp(&b))
    }

    /// Best told candidate so far.
    pub fn incumbent(&self) -> Option<&Candidate> {
        self.incumbent.map(|id| &self.archive[&id].candidate)
    }

    pub fn candidate(&self, id: u64) -> Option<&Candidate> {
        self.archive.get(&id).map(|t| &t.candidate)
    }

    pub fn recommend(&self) -> Recommendation {
        if self.told == 0 {
            log::warn!("recommend called before any tell; returning the domain center");
            return Recommendation { point: self.domain.center(), source: RecommendationSource::Center };
        }
        if let Some(x) = self.solver.recommend() {
            return Recommendation {
                point: self.encoding.decode(&self.domain, &x),
                source: RecommendationSource::Solver,
            };
        }
        let best = self.incumbent().expect("told > 0 implies an incumbent");
        Recommendation { point: best.point.clone(), source: RecommendationSource::Incumbent }
    }
}
