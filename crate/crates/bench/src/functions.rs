//! Base test functions with their analytic minima.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

/// Continuous base functions. Every entry has minimum value 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFunction {
    Sphere,
    Cigar,
    Ellipsoid,
    Hm,
    Ackley,
    Rosenbrock,
    Griewank,
    Lunacek,
    DeceptiveMultimodal,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 9] = [
        BaseFunction::Sphere,
        BaseFunction::Cigar,
        BaseFunction::Ellipsoid,
        BaseFunction::Hm,
        BaseFunction::Ackley,
        BaseFunction::Rosenbrock,
        BaseFunction::Griewank,
        BaseFunction::Lunacek,
        BaseFunction::DeceptiveMultimodal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Cigar => "cigar",
            BaseFunction::Ellipsoid => "ellipsoid",
            BaseFunction::Hm => "hm",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Griewank => "griewank",
            BaseFunction::Lunacek => "lunacek",
            BaseFunction::DeceptiveMultimodal => "deceptive_multimodal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            BaseFunction::Sphere => sphere(x),
            BaseFunction::Cigar => cigar(x),
            BaseFunction::Ellipsoid => ellipsoid(x),
            BaseFunction::Hm => hm(x),
            BaseFunction::Ackley => ackley(x),
            BaseFunction::Rosenbrock => rosenbrock(x),
            BaseFunction::Griewank => griewank(x),
            BaseFunction::Lunacek => lunacek(x),
            BaseFunction::DeceptiveMultimodal => deceptive_multimodal(x),
        }
    }

    /// Location of the global minimum in dimension `d`.
    pub fn minimizer(self, d: usize) -> Vec<f64> {
        match self {
            BaseFunction::Rosenbrock => vec![1.0; d],
            BaseFunction::Lunacek => vec![LUNACEK_MU0; d],
            _ => vec![0.0; d],
        }
    }

    pub fn minimum(self) -> f64 {
        0.0
    }
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// `x1^2 + 1e6 * sum_{i>=2} x_i^2`.
pub fn cigar(x: &[f64]) -> f64 {
    match x.split_first() {
        Some((first, rest)) => first * first + 1e6 * sphere(rest),
        None => 0.0,
    }
}

/// `sum_i 10^(6 (i-1)/(d-1)) x_i^2`; plain sphere when `d = 1`.
pub fn ellipsoid(x: &[f64]) -> f64 {
    let d = x.len();
    if d <= 1 {
        return sphere(x);
    }
    x.iter().enumerate().map(|(i, v)| 10f64.powf(6.0 * i as f64 / (d - 1) as f64) * v * v).sum()
}

/// `sum_i x_i^2 (1.1 + cos(1/x_i))` with zero coordinates contributing 0.
pub fn hm(x: &[f64]) -> f64 {
    x.iter().filter(|v| **v != 0.0).map(|v| v * v * (1.1 + (1.0 / v).cos())).sum()
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let quad = (sphere(x) / n).sqrt();
    let osc = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    20.0 * (1.0 - (-0.2 * quad).exp()) + (E - osc.exp())
}

/// Chained Rosenbrock; `(1 - x)^2` in one dimension.
pub fn rosenbrock(x: &[f64]) -> f64 {
    if x.len() == 1 {
        return (1.0 - x[0]).powi(2);
    }
    x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2)).sum()
}

pub fn griewank(x: &[f64]) -> f64 {
    let prod: f64 = x.iter().enumerate().map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos()).product();
    sphere(x) / 4000.0 + (1.0 - prod)
}

pub const LUNACEK_MU0: f64 = 2.5;

/// Lunacek bi-Rastrigin: the better of two spherical funnels around `mu0`
/// and `mu1`, plus a Rastrigin ripple centred on `mu0`.
pub fn lunacek(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let s = 1.0 - 1.0 / (2.0 * (d + 20.0).sqrt() - 8.2);
    let mu1 = -((LUNACEK_MU0 * LUNACEK_MU0 - 1.0) / s).sqrt();
    let first: f64 = x.iter().map(|v| (v - LUNACEK_MU0).powi(2)).sum();
    let second: f64 = d + s * x.iter().map(|v| (v - mu1).powi(2)).sum::<f64>();
    let ripple: f64 = x.iter().map(|v| 1.0 - (2.0 * PI * (v - LUNACEK_MU0)).cos()).sum();
    first.min(second) + 10.0 * ripple
}

/// `r (1.1 + sin(1/r)) + (1 - cos(2 pi r)) / (2 pi)` with `r = |x|`, and 0 at
/// the origin.
pub fn deceptive_multimodal(x: &[f64]) -> f64 {
    let r = sphere(x).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    r * (1.1 + (1.0 / r).sin()) + (1.0 - (2.0 * PI * r).cos()) / (2.0 * PI)
}

/// Loss for OneMax on bits: number of zeros.
pub fn onemax_loss(bits: &[i64]) -> f64 {
    bits.iter().filter(|&&b| b != 1).count() as f64
}

/// Loss for LeadingOnes: `d` minus the length of the leading run of ones.
pub fn leadingones_loss(bits: &[i64]) -> f64 {
    (bits.len() - bits.iter().take_while(|&&b| b == 1).count()) as f64
}
