//! Runs a continuous solver over the normalized encoding of a mixed domain,
//! turning each categorical logit block into a sampled category.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::optimizer::Solver;
use crate::space::{to_reals, DomainSpec, VariableKind};

pub const TEMPERATURE: f64 = 1.0;

/// `softmax(logits / temperature)`.
pub fn softmax(logits: &[f64], temperature: f64) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| ((l - max) / temperature).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn sample_index(probabilities: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probabilities.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probabilities.len() - 1
}

pub struct SoftmaxBridge {
    domain: DomainSpec,
    inner: Box<dyn Solver>,
    rng: ChaCha8Rng,
    temperature: f64,
    logits: HashMap<u64, Vec<f64>>,
    best: Option<(Vec<f64>, f64)>,
}

impl SoftmaxBridge {
    /// `inner` must work in the normalized encoding of `domain`.
    pub fn new(domain: DomainSpec, inner: Box<dyn Solver>, seed: u64) -> Self {
        Self {
            domain,
            inner,
            rng: ChaCha8Rng::seed_from_u64(seed),
            temperature: TEMPERATURE,
            logits: HashMap::new(),
            best: None,
        }
    }

    /// Native point realized from a normalized vector, sampling categories.
    fn realize(&mut self, u: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.domain.len());
        let mut offset = 0;
        for (var, spec) in self.domain.variables().iter().enumerate() {
            match spec.kind {
                VariableKind::Categorical { arity } => {
                    let p = softmax(&u[offset..offset + arity], self.temperature);
                    out.push(sample_index(&p, &mut self.rng) as f64);
                    offset += arity;
                }
                _ => {
                    out.push(self.domain.decode_scalar(var, u[offset]).as_f64());
                    offset += 1;
                }
            }
        }
        out
    }

    fn decode(&self, u: &[f64]) -> Vec<f64> {
        to_reals(&self.domain.decode_normalized(u))
    }

    fn lift(&self, x: &[f64]) -> Vec<f64> {
        self.domain.encode_normalized(&self.domain.decode_native(x))
    }
}

impl Solver for SoftmaxBridge {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        let u = self.inner.ask(id);
        let x = self.realize(&u);
        self.logits.insert(id, u);
        x
    }

    fn tell(&mut self, id: u64, _x: &[f64], loss: f64) {
        let Some(u) = self.logits.remove(&id) else { return };
        if self.best.as_ref().is_none_or(|(_, l)| loss < *l) {
            self.best = Some((u.clone(), loss));
        }
        self.inner.tell(id, &u, loss);
    }

    /// Argmax decoding of the inner recommendation, or of the best told
    /// logits when the inner solver has none.
    fn recommend(&self) -> Option<Vec<f64>> {
        match self.inner.recommend() {
            Some(u) => Some(self.decode(&u)),
            None => self.best.as_ref().map(|(u, _)| self.decode(u)),
        }
    }

    fn start_from(&mut self, x: &[f64]) {
        let u = self.lift(x);
        self.inner.start_from(&u);
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        let u = self.lift(x);
        self.inner.inject(&u, loss);
    }

    fn exhausted(&self) -> bool {
        self.inner.exhausted()
    }
}
