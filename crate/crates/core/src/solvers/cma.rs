//! CMA-ES with cumulative step-size adaptation, rank-one and rank-mu
//! covariance updates. The diagonal variant (separable CMA) keeps only the
//! diagonal of the covariance and uses the accelerated learning rates for that
//! case.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_chacha::ChaCha8Rng;

use super::{gaussian_vec, ContinuousSetup};
use crate::optimizer::Solver;
use crate::space::SearchBox;

const EIGEN_FLOOR: f64 = 1e-12;
const SIGMA_MIN: f64 = 1e-300;
const SIGMA_MAX: f64 = 1e10;

/// Log-rank weights `ln(mu + 1/2) - ln(i)` normalized to sum to one.
pub fn recombination_weights(mu: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=mu).map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Default population size `4 + floor(3 ln d)`.
pub fn default_population(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

#[derive(Debug, Clone)]
pub struct CmaState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    pub diagonal: bool,
    pub p_sigma: DVector<f64>,
    pub p_c: DVector<f64>,
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    mu_eff: f64,
    c_sigma: f64,
    d_sigma: f64,
    c_c: f64,
    c_1: f64,
    c_mu: f64,
    chi_n: f64,
    /// Eigenvectors of `cov`.
    basis: DMatrix<f64>,
    /// Square roots of the eigenvalues of `cov`.
    scales: DVector<f64>,
    pub generation: usize,
    eigen_generation: usize,
    eigen_period: usize,
}

impl CmaState {
    pub fn new(mean: Vec<f64>, sigma: f64, lambda: usize, diagonal: bool) -> Self {
        let n = mean.len();
        let nf = n as f64;
        let lambda = lambda.max(2);
        let mu = (lambda / 2).max(1);
        let weights = recombination_weights(mu);
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let mut c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let mut c_mu = (2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff)).min(1.0 - c_1);
        if diagonal {
            let boost = (nf + 2.0) / 3.0;
            c_1 = (c_1 * boost).min(0.5);
            c_mu = (c_mu * boost).min(1.0 - c_1);
        }
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        let eigen_period = ((lambda as f64 / ((c_1 + c_mu) * nf * 10.0)).floor() as usize).max(1);
        Self {
            mean: DVector::from_vec(mean),
            sigma,
            cov: DMatrix::identity(n, n),
            diagonal,
            p_sigma: DVector::zeros(n),
            p_c: DVector::zeros(n),
            lambda,
            mu,
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
            basis: DMatrix::identity(n, n),
            scales: DVector::from_element(n, 1.0),
            generation: 0,
            eigen_generation: 0,
            eigen_period,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Draws `m + sigma * C^(1/2) z`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let z = DVector::from_vec(gaussian_vec(rng, self.dim()));
        let y = if self.diagonal { self.scales.component_mul(&z) } else { &self.basis * self.scales.component_mul(&z) };
        (&self.mean + self.sigma * y).iter().copied().collect()
    }

    /// `C^(-1/2) v`.
    fn inv_sqrt_times(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.diagonal {
            v.component_div(&self.scales)
        } else {
            let t = self.basis.transpose() * v;
            &self.basis * t.component_div(&self.scales)
        }
    }

    /// One generation update from told `(point, loss)` pairs.
    pub fn step(&mut self, generation: &[(Vec<f64>, f64)]) {
        if generation.is_empty() {
            return;
        }
        let n = self.dim();
        let mut order: Vec<usize> = (0..generation.len()).collect();
        order.sort_by(|&a, &b| generation[a].1.total_cmp(&generation[b].1));
        let mu = self.mu.min(generation.len());
        let weights: Vec<f64> = if mu == self.mu {
            self.weights.clone()
        } else {
            recombination_weights(mu)
        };

        let old_mean = self.mean.clone();
        let steps: Vec<DVector<f64>> = order[..mu]
            .iter()
            .map(|&i| (DVector::from_column_slice(&generation[i].0) - &old_mean) / self.sigma)
            .collect();
        let y_w = steps.iter().zip(&weights).fold(DVector::zeros(n), |acc, (y, w)| acc + y * *w);
        self.mean = &old_mean + self.sigma * &y_w;

        let cs = self.c_sigma;
        self.p_sigma = (1.0 - cs) * &self.p_sigma + (cs * (2.0 - cs) * self.mu_eff).sqrt() * self.inv_sqrt_times(&y_w);
        let norm_ps = self.p_sigma.norm();
        let g = (self.generation + 1) as f64;
        let h_sigma = norm_ps / (1.0 - (1.0 - cs).powf(2.0 * g)).sqrt() < (1.4 + 2.0 / (n as f64 + 1.0)) * self.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        let cc = self.c_c;
        self.p_c = (1.0 - cc) * &self.p_c + h * (cc * (2.0 - cc) * self.mu_eff).sqrt() * &y_w;

        let delta_h = (1.0 - h) * cc * (2.0 - cc);
        let keep = 1.0 - self.c_1 - self.c_mu;
        if self.diagonal {
            for i in 0..n {
                let rank_mu: f64 = steps.iter().zip(&weights).map(|(y, w)| w * y[i] * y[i]).sum();
                let cii = self.cov[(i, i)];
                self.cov[(i, i)] = keep * cii
                    + self.c_1 * (self.p_c[i] * self.p_c[i] + delta_h * cii)
                    + self.c_mu * rank_mu;
            }
        } else {
            let mut rank_mu = DMatrix::zeros(n, n);
            for (y, w) in steps.iter().zip(&weights) {
                rank_mu.ger(*w, y, y, 1.0);
            }
            let rank_one = &self.p_c * self.p_c.transpose();
            self.cov = keep * &self.cov + self.c_1 * (rank_one + delta_h * &self.cov) + self.c_mu * rank_mu;
            symmetrize(&mut self.cov);
        }

        self.sigma *= ((cs / self.d_sigma) * (norm_ps / self.chi_n - 1.0)).exp();
        self.sigma = self.sigma.clamp(SIGMA_MIN, SIGMA_MAX);
        self.generation += 1;

        if !self.cov.iter().all(|v| v.is_finite()) || !self.mean.iter().all(|v| v.is_finite()) {
            log::warn!("CMA state became non-finite; resetting covariance and paths");
            self.mean = old_mean;
            self.cov = DMatrix::identity(n, n);
            self.p_c.fill(0.0);
            self.p_sigma.fill(0.0);
            self.eigen_generation = 0;
        }
        self.refresh_eigen(false);
    }

    fn refresh_eigen(&mut self, force: bool) {
        if self.diagonal {
            for i in 0..self.dim() {
                if self.cov[(i, i)] < EIGEN_FLOOR {
                    log::debug!("diagonal CMA variance floored at {EIGEN_FLOOR}");
                    self.cov[(i, i)] = EIGEN_FLOOR;
                }
                self.scales[i] = self.cov[(i, i)].sqrt();
            }
            return;
        }
        if !force && self.generation - self.eigen_generation < self.eigen_period {
            return;
        }
        self.eigen_generation = self.generation;
        let eig = SymmetricEigen::new(self.cov.clone());
        let mut values = eig.eigenvalues;
        if values.iter().any(|v| *v < EIGEN_FLOOR) {
            log::debug!("CMA covariance lost definiteness; flooring eigenvalues at {EIGEN_FLOOR}");
            values.apply(|v| *v = v.max(EIGEN_FLOOR));
            self.cov = &eig.eigenvectors * DMatrix::from_diagonal(&values) * eig.eigenvectors.transpose();
            symmetrize(&mut self.cov);
        }
        self.basis = eig.eigenvectors;
        self.scales = values.map(f64::sqrt);
    }

    /// Moves the mean without touching the learned shape.
    pub fn recenter(&mut self, x: &[f64]) {
        self.mean = DVector::from_column_slice(x);
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Ask/tell wrapper buffering one generation at a time.
pub struct Cma {
    state: CmaState,
    bounds: SearchBox,
    rng: ChaCha8Rng,
    issued: HashMap<u64, usize>,
    buffer: Vec<(Vec<f64>, f64)>,
    best_loss: f64,
}

impl Cma {
    /// Population is `max(4 + floor(3 ln d), num_workers)` so that a full
    /// wave of asks fits in one generation.
    pub fn new(setup: &ContinuousSetup, diagonal: bool) -> Self {
        let lambda = default_population(setup.dim()).max(setup.num_workers);
        Self {
            state: CmaState::new(vec![0.0; setup.dim()], 1.0, lambda, diagonal),
            bounds: setup.bounds.clone(),
            rng: setup.rng(),
            issued: HashMap::new(),
            buffer: Vec::new(),
            best_loss: f64::INFINITY,
        }
    }

    pub fn state(&self) -> &CmaState {
        &self.state
    }
}

impl Solver for Cma {
    fn ask(&mut self, id: u64) -> Vec<f64> {
        let mut x = self.state.sample(&mut self.rng);
        self.bounds.clip(&mut x);
        self.issued.insert(id, self.state.generation);
        x
    }

    fn tell(&mut self, id: u64, x: &[f64], loss: f64) {
        self.best_loss = self.best_loss.min(loss);
        if self.issued.remove(&id) != Some(self.state.generation) {
            return;
        }
        self.buffer.push((x.to_vec(), loss));
        if self.buffer.len() >= self.state.lambda {
            let generation = std::mem::take(&mut self.buffer);
            self.state.step(&generation);
        }
    }

    fn start_from(&mut self, x: &[f64]) {
        self.state.recenter(x);
    }

    fn inject(&mut self, x: &[f64], loss: f64) {
        if loss < self.best_loss {
            self.best_loss = loss;
            self.state.recenter(x);
        }
    }
}
