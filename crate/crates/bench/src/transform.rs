//! Random instance transforms: translation, rotation and sign flips.

use abbo_core::derive_seed;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Multiplier applied to the translation standard deviation for far optima.
pub const FAR_OPTIMUM_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(default)]
    pub translation_std: f64,
    #[serde(default)]
    pub far_optimum: bool,
    #[serde(default)]
    pub rotate: bool,
    #[serde(default)]
    pub symmetrize: bool,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub transform_seed: u64,
}

impl Default for TransformSpec {
    fn default() -> Self {
        Self { translation_std: 0.0, far_optimum: false, rotate: false, symmetrize: false, noise_std: 0.0, transform_seed: 0 }
    }
}

impl TransformSpec {
    pub fn translated(std: f64, seed: u64) -> Self {
        Self { translation_std: std, transform_seed: seed, ..Self::default() }
    }

    pub fn effective_translation_std(&self) -> f64 {
        if self.far_optimum {
            self.translation_std * FAR_OPTIMUM_FACTOR
        } else {
            self.translation_std
        }
    }

    pub fn is_noisy(&self) -> bool {
        self.noise_std > 0.0
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        for (name, v) in [("translation_std", self.translation_std), ("noise_std", self.noise_std)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a finite non-negative number, got {v}"));
            }
        }
        Ok(())
    }
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// column signs fixed so that `R` has a positive diagonal.
pub fn haar_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Concrete draw of `z = S M (x - t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub shift: Vec<f64>,
    pub rotation: Option<DMatrix<f64>>,
    pub signs: Option<Vec<f64>>,
}

impl Transform {
    pub fn identity(d: usize) -> Self {
        Self { shift: vec![0.0; d], rotation: None, signs: None }
    }

    /// Draws `t`, `M`, `S` for dimension `d`, each from its own stream of
    /// `spec.transform_seed`.
    pub fn sample(spec: &TransformSpec, d: usize) -> Self {
        Self::sample_labelled(spec, d, &[])
    }

    /// Like [`Transform::sample`] with extra labels separating the streams of
    /// several transforms drawn from one seed.
    pub fn sample_labelled(spec: &TransformSpec, d: usize, labels: &[&str]) -> Self {
        let stream = |what: &str| {
            let mut all: Vec<abbo_core::Label> = labels.iter().map(|l| (*l).into()).collect();
            all.push(what.into());
            ChaCha8Rng::seed_from_u64(derive_seed(spec.transform_seed, &all))
        };
        let std = spec.effective_translation_std();
        let shift = if std > 0.0 {
            let mut rng = stream("shift");
            (0..d).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
        } else {
            vec![0.0; d]
        };
        let rotation = spec.rotate.then(|| haar_orthogonal(d, &mut stream("rotation")));
        let signs = spec.symmetrize.then(|| {
            let mut rng = stream("signs");
            (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
        });
        Self { shift, rotation, signs }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// `S M (x - t)`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = x.iter().zip(&self.shift).map(|(a, t)| a - t).collect();
        let mut z = match &self.rotation {
            Some(m) => (m * DVector::from_vec(centered)).data.into(),
            None => centered,
        };
        if let Some(s) = &self.signs {
            z.iter_mut().zip(s).for_each(|(v, si)| *v *= si);
        }
        z
    }

    /// Inverse map: the `x` with `apply(x) = z`.
    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        let mut y = z.to_vec();
        if let Some(s) = &self.signs {
            y.iter_mut().zip(s).for_each(|(v, si)| *v *= si);
        }
        if let Some(m) = &self.rotation {
            y = (m.transpose() * DVector::from_vec(y)).data.into();
        }
        y.iter().zip(&self.shift).map(|(a, t)| a + t).collect()
    }
}
