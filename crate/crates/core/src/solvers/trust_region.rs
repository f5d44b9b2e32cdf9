//! Model-based trust-region local search with linear or quadratic
//! interpolation models.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;

use super::quadratic::{quadratic_terms, LinearModel, QuadraticModel};
use super::{distance, gaussian_vec, norm, ContinuousSetup};
use crate::optimizer::Solver;
use crate::space::SearchBox;

pub const RHO_FLOOR: f64 = 1e-12;
pub const SHRINK: f64 = 0.5;
/// Repeated evaluations per model point for the quadratic variant in noisy mode.
pub const NOISY_REPEATS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    Quadratic,
}

impl ModelKind {
    pub fn points_needed(self, dim: usize) -> usize {
        match self {
            ModelKind::Linear => dim + 1,
            ModelKind::Quadratic => quadratic_terms(dim),
        }
    }
}

/// Pattern of unit offsets: `e_i`, `-e_i`, then `(e_i + e_j)/sqrt 2`, long
/// enough to make `count` points (including the center) well poised.
fn pattern(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let unit = |i: usize| {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        e
    };
    for i in 0..dim {
        out.push(unit(i));
    }
    for i in 0..dim {
        let mut e = unit(i);
        e[i] = -1.0;
        out.push(e);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let mut e = vec![0.0; dim];
            e[i] = s;
            e[j] = s;
            out.push(e);
        }
    }
    out.truncate(count.saturating_sub(1));
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Purpose {
    Sample,
    Step,
}

#[derive(Debug, Clone)]
struct Request {
    point: Vec<f64>,
    purpose: Purpose,
    needed: usize,
    asked: usize,
    told: usize,
    total: f64,
    ids: Vec<u64>,
}

pub struct TrustRegion {
    kind: ModelKind,
    bounds: SearchBox,
    rng: ChaCha8Rng,
    rho: f64,
    repeats: usize,
    archive: Vec<(Vec<f64>, f64)>,
    center: Option<(Vec<f64>, f64)>,
    queue: VecDeque<Vec<f64>>,
    current: Option<Request>,
    geometry_cursor: usize,
}

impl TrustRegion {
    pub fn new(setup: &ContinuousSetup, kind: ModelKind) -> Self {
        let repeats = if setup.noisy && kind == ModelKind::Quadratic { NOISY_REPEATS } else { 1 };
        let mut tr = Self {
            kind,
            bounds: setup.bounds.clone(),
            rng: setup.rng(),
            rho: 1.0,
            repeats,
            archive: Vec::new(),
            center: None,
            queue: VecDeque::new(),
            current: None,
            geometry_cursor: 0,
        };
        tr.seed_pattern(vec![0.0; setup.dim()]);
        tr
    }

    /// A solver positioned at the best point of `archive`, for inspecting the
    /// next model step.
    pub fn from_archive(kind: ModelKind, bounds: SearchBox, rho: f64, archive: Vec<(Vec<f64>, f64)>, seed: u64) -> Self {
        let setup = ContinuousSetup { bounds, budget: 1, num_workers: 1, noisy: false, seed };
        let mut tr = Self::new(&setup, kind);
        tr.queue.clear();
        tr.rho = rho;
        tr.center = archive.iter().min_by(|a, b| a.1.total_cmp(&b.1)).cloned();
        tr.archive = archive;
        tr
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn dim(&self) -> usize {
        self.bounds.dim()
    }

    fn seed_pattern(&mut self, start: Vec<f64>) {
        self.queue.clear();
        let needed = self.kind.points_needed(self.dim());
        let offsets = pattern(self.dim(), needed);
        self.queue.push_back(start.clone());
        for e in offsets {
            let mut p: Vec<f64> = start.iter().zip(&e).map(|(s, ei)| s + self.rho * ei).collect();
            self.bounds.clip(&mut p);
            self.queue.push_back(p);
        }
    }

    fn random_probe(&mut self, around: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        let z = gaussian_vec(&mut self.rng, dim);
        let n = norm(&z).max(f64::MIN_POSITIVE);
        let mut p: Vec<f64> = around.iter().zip(&z).map(|(c, zi)| c + self.rho * zi / n).collect();
        self.bounds.clip(&mut p);
        p
    }

    /// Model step from the current center, or `None` if the model cannot be
    /// fitted or gives no usable move.
    pub fn propose(&self) -> Option<Vec<f64>> {
        let (c, _) = self.center.as_ref()?;
        let needed = self.kind.points_needed(self.dim());
        if self.archive.len() < needed {
            return None;
        }
        let mut nearest: Vec<&(Vec<f64>, f64)> = self.archive.iter().collect();
        nearest.sort_by(|a, b| distance(&a.0, c).total_cmp(&distance(&b.0, c)));
        let fit_size = match self.kind {
            ModelKind::Linear => needed,
            ModelKind::Quadratic => needed + self.dim(),
        };
        nearest.truncate(fit_size);
        let points: Vec<Vec<f64>> = nearest.iter().map(|(x, _)| x.clone()).collect();
        let losses: Vec<f64> = nearest.iter().map(|(_, l)| *l).collect();
        let mut step = match self.kind {
            ModelKind::Linear => {
                let model = LinearModel::fit(&points, &losses)?;
                let g = norm(&model.gradient);
                if !(g > 0.0) {
                    return None;
                }
                c.iter().zip(&model.gradient).map(|(ci, gi)| ci - self.rho * gi / g).collect::<Vec<f64>>()
            }
            ModelKind::Quadratic => {
                let model = QuadraticModel::fit(&points, &losses)?;
                match model.minimizer() {
                    Some(m) => {
                        let d = distance(&m, c);
                        if d <= self.rho {
                            m
                        } else {
                            c.iter().zip(&m).map(|(ci, mi)| ci + self.rho * (mi - ci) / d).collect()
                        }
                    }
                    None => {
                        let grad = model.gradient(c);
                        let g = norm(&grad);
                        if !(g > 0.0) {
                            return None;
                        }
                        c.iter().zip(&grad).map(|(ci, gi)| ci - self.rho * gi / g).collect()
                    }
                }
            }
        };
        self.bounds.clip(&mut step);
        if step.iter().any(|v| !v.is_finite()) || distance(&step, c) == 0.0 {
            return None;
        }
        Some(step)
    }

    fn geometry_probe(&mut self) -> Vec<f64> {
        let Some((c, _)) = self.center.clone() else { return vec![0.0; self.dim()] };
        let offsets = pattern(self.dim(), 2 * self.dim() + 1);
        let e = &offsets[self.geometry_cursor % offsets.len()];
        self.geometry_cursor += 1;
        let mut p: Vec<f64> = c.iter().zip(e).map(|(ci, ei)| ci + self.rho * ei).collect();
        self.bounds.clip(&mut p);
        p
    }

    fn next_request(&mut self) -> Request {
        let (point, purpose) = if let Some(p) = self.queue.pop_front() {
            (p, Purpose::Sample)
        } else if let Some(p) = self.propose() {
            (p, Purpose::Step)
        } else {
            log::debug!("trust-region model unavailable, probing at radius {}", self.rho);
            let c = self.center.as_ref().map(|c| c.0.clone()).unwrap_or_else(|| vec![0.0; self.dim()]);
            (self.random_probe(&c), Purpose::Sample)
        };
        Request { point, purpose, needed: self.repeats, asked: 0, told: 0, total: 0.0, ids: Vec::new() }
    }

    fn absorb(&mut self, point: Vec<f64>, loss: f64, purpose: Purpose) {
        let improved = self.center.as_ref().is_none_or(|(_, f)| loss < *f);
        self.archive.push((point.clone(), loss));
        if improved {
            self.center = Some((point, loss));
        } else if purpose == Purpose::Step {
            self.rho = (self.rho * SHRINK).max(RHO_FLOOR);
            let probe = self.geometry_probe();
            self.queue.push_back(probe);
        }
    }
}

impl Solver for TrustRegion {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        if self.current.is_none() {
            self.current = Some(self.next_request());
        }
        let request = self.current.as_mut().expect("request just created");
        if request.asked < request.needed {
            request.asked += 1;
            request.ids.push(id);
            return request.point.clone();
        }
        let c = self.center.as_ref().map(|c| c.0.clone()).unwrap_or_else(|| vec![0.0; self.dim()]);
        self.random_probe(&c)
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        let Some(request) = self.current.as_mut().filter(|r| r.ids.contains(&id)) else {
            if self.repeats == 1 {
                self.absorb(x.to_vec(), loss, Purpose::Sample);
            }
            return;
        };
        request.told += 1;
        request.total += loss;
        if request.told == request.needed {
            let request = self.current.take().expect("current request");
            let mean = request.total / request.needed as f64;
            self.absorb(request.point, mean, request.purpose);
        }
    }

    fn start_from(&mut self, x: &[f64]) {
        self.center = None;
        self.current = None;
        self.seed_pattern(x.to_vec());
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        self.absorb(x.to_vec(), loss, Purpose::Sample);
    }
}
