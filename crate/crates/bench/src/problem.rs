//! Function descriptions and their compiled, evaluable form.

use abbo_core::{DomainSpec, EvalError, Objective, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::functions::{leadingones_loss, onemax_loss, BaseFunction};
use crate::transform::{Transform, TransformSpec};
use crate::{lsgo, tsp, BenchError};

pub const ONEMAX: &str = "onemax";
pub const LEADINGONES: &str = "leadingones";

/// One term of a composite: `weight * base(block variables)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub base: String,
    pub indices: Vec<usize>,
    pub weight: f64,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub base: String,
    pub dimension: usize,
    #[serde(default)]
    pub transform: TransformSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<BlockSpec>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub conflicting: bool,
}

impl FunctionSpec {
    pub fn new(base: &str, dimension: usize, transform: TransformSpec) -> Self {
        Self { base: base.to_string(), dimension, transform, blocks: Vec::new(), conflicting: false }
    }

    pub fn with_transform_seed(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        spec.transform.transform_seed = seed;
        spec
    }

    pub fn is_noisy(&self) -> bool {
        self.transform.is_noisy()
    }
}

#[derive(Debug, Clone)]
struct CompiledBlock {
    base: BaseFunction,
    indices: Vec<usize>,
    weight: f64,
    transform: Transform,
    center: Vec<f64>,
}

impl CompiledBlock {
    fn eval(&self, x: &[f64]) -> f64 {
        let sub: Vec<f64> = self.indices.iter().map(|&i| x[i]).collect();
        self.weight * self.base.eval(&recentered(&self.center, &self.transform.apply(&sub)))
    }
}

#[derive(Debug, Clone)]
enum Body {
    Continuous { base: BaseFunction, transform: Transform, center: Vec<f64> },
    Composite { blocks: Vec<CompiledBlock>, shift: Option<Vec<f64>> },
    OneMax,
    LeadingOnes,
    Tsp { cities: Vec<[f64; 2]> },
}

fn recentered(center: &[f64], z: &[f64]) -> Vec<f64> {
    center.iter().zip(z).map(|(c, v)| c + v).collect()
}

/// Compiled benchmark function. Immutable and shareable across threads;
/// noisy evaluation goes through an [`Evaluator`] owning its noise stream.
#[derive(Debug, Clone)]
pub struct Function {
    spec: FunctionSpec,
    domain: DomainSpec,
    body: Body,
}

/// Builds the evaluable for `spec`.
///
/// Continuous functions evaluate `f(z* + S M (x - t))` where `z*` is the base
/// function's own minimizer, so the transformed optimum sits at `t`.
pub fn make_function(spec: &FunctionSpec) -> Result<Function, BenchError> {
    let d = spec.dimension;
    if d == 0 {
        return Err(BenchError::InvalidSpec("dimension must be positive".into()));
    }
    spec.transform.validate().map_err(BenchError::InvalidSpec)?;
    if !spec.blocks.is_empty() && spec.base != lsgo::NAME {
        return Err(BenchError::InvalidSpec(format!("{} does not take composite blocks", spec.base)));
    }
    let continuous = || DomainSpec::continuous(d).map_err(|e| BenchError::InvalidSpec(e.to_string()));
    let binary = || DomainSpec::binary(d).map_err(|e| BenchError::InvalidSpec(e.to_string()));
    let (domain, body) = match spec.base.as_str() {
        ONEMAX => (binary()?, Body::OneMax),
        LEADINGONES => (binary()?, Body::LeadingOnes),
        tsp::NAME => {
            if d < 3 {
                return Err(BenchError::InvalidSpec(format!("simple_tsp needs at least 3 cities, got {d}")));
            }
            (tsp::domain(d), Body::Tsp { cities: tsp::cities(d, spec.transform.transform_seed) })
        }
        lsgo::NAME => (continuous()?, compile_composite(spec)?),
        name => {
            let base = BaseFunction::from_name(name).ok_or_else(|| BenchError::UnknownFunction(name.to_string()))?;
            let transform = Transform::sample(&spec.transform, d);
            (continuous()?, Body::Continuous { base, transform, center: base.minimizer(d) })
        }
    };
    Ok(Function { spec: spec.clone(), domain, body })
}

fn compile_composite(spec: &FunctionSpec) -> Result<Body, BenchError> {
    let d = spec.dimension;
    if spec.blocks.is_empty() {
        return Err(BenchError::InvalidSpec("composite without blocks".into()));
    }
    let shared = Transform::sample_labelled(&spec.transform, d, &["global"]).shift;
    let mut overlapping = false;
    let mut seen = vec![false; d];
    let mut blocks = Vec::with_capacity(spec.blocks.len());
    for (k, block) in spec.blocks.iter().enumerate() {
        let base = BaseFunction::from_name(&block.base).ok_or_else(|| BenchError::UnknownFunction(block.base.clone()))?;
        if block.indices.is_empty() || block.indices.iter().any(|&i| i >= d) {
            return Err(BenchError::InvalidSpec(format!("block {k} has indices outside 0..{d}")));
        }
        if !(block.weight != 0.0 && block.weight.is_finite()) {
            return Err(BenchError::InvalidSpec(format!("block {k} has weight {}", block.weight)));
        }
        for &i in &block.indices {
            overlapping |= seen[i];
            seen[i] = true;
        }
        let size = block.indices.len();
        let label = k.to_string();
        let own = Transform::sample_labelled(&spec.transform, size, &["block", &label]);
        let shift = if spec.conflicting { own.shift } else { block.indices.iter().map(|&i| shared[i]).collect() };
        blocks.push(CompiledBlock {
            base,
            indices: block.indices.clone(),
            weight: block.weight,
            transform: Transform { shift, rotation: own.rotation, signs: own.signs },
            center: base.minimizer(size),
        });
    }
    let negative = spec.blocks.iter().any(|b| b.weight < 0.0);
    let shift = (!negative && (!spec.conflicting || !overlapping)).then(|| {
        let mut x = shared.clone();
        if spec.conflicting {
            for b in &blocks {
                for (j, &i) in b.indices.iter().enumerate() {
                    x[i] = b.transform.shift[j];
                }
            }
        }
        x
    });
    Ok(Body::Composite { blocks, shift })
}

fn integers(point: &[Value]) -> Vec<i64> {
    point
        .iter()
        .map(|v| match *v {
            Value::Int(i) => i,
            Value::Category(c) => c as i64,
            Value::Real(r) => r.round() as i64,
        })
        .collect()
}

impl Function {
    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn is_noisy(&self) -> bool {
        self.spec.is_noisy()
    }

    /// Noise-free objective `g0`.
    pub fn noise_free(&self, point: &[Value]) -> f64 {
        match &self.body {
            Body::Continuous { base, transform, center } => {
                let x: Vec<f64> = point.iter().map(Value::as_f64).collect();
                base.eval(&recentered(center, &transform.apply(&x)))
            }
            Body::Composite { blocks, .. } => {
                let x: Vec<f64> = point.iter().map(Value::as_f64).collect();
                blocks.iter().map(|b| b.eval(&x)).sum()
            }
            Body::OneMax => onemax_loss(&integers(point)),
            Body::LeadingOnes => leadingones_loss(&integers(point)),
            Body::Tsp { cities } => tsp::tour_length(cities, &tsp::decode(&integers(point))),
        }
    }

    /// Known optimal value of `g0`, if any.
    pub fn optimum_value(&self) -> Option<f64> {
        match &self.body {
            Body::Tsp { .. } => None,
            Body::Composite { shift: None, .. } => None,
            _ => Some(0.0),
        }
    }

    /// A point attaining [`Function::optimum_value`].
    pub fn optimum_point(&self) -> Option<Vec<Value>> {
        let reals = |x: &[f64]| x.iter().map(|v| Value::Real(*v)).collect();
        match &self.body {
            Body::Continuous { transform, .. } => Some(reals(&transform.shift)),
            Body::Composite { shift, .. } => shift.as_deref().map(reals),
            Body::OneMax | Body::LeadingOnes => Some(vec![Value::Int(1); self.dimension()]),
            Body::Tsp { .. } => None,
        }
    }

    /// The drawn transform of a non-composite continuous function.
    pub fn transform(&self) -> Option<&Transform> {
        match &self.body {
            Body::Continuous { transform, .. } => Some(transform),
            _ => None,
        }
    }

    /// Simple regret of `point`: `g0(point)` minus the known optimum, or
    /// `g0(point)` when the optimum is unknown.
    pub fn regret(&self, point: &[Value]) -> f64 {
        self.noise_free(point) - self.optimum_value().unwrap_or(0.0)
    }

    /// Noisy evaluation stream seeded by `noise_seed`.
    pub fn evaluator(&self, noise_seed: u64) -> Evaluator<'_> {
        Evaluator { function: self, rng: ChaCha8Rng::seed_from_u64(noise_seed) }
    }
}

/// `g(x) = g0(x) + noise_std * N(0, 1)`, fresh noise on every call.
pub struct Evaluator<'a> {
    function: &'a Function,
    rng: ChaCha8Rng,
}

impl Evaluator<'_> {
    pub fn sample(&mut self, point: &[Value]) -> f64 {
        let clean = self.function.noise_free(point);
        let sigma = self.function.spec.transform.noise_std;
        if sigma > 0.0 {
            clean + sigma * self.rng.sample::<f64, _>(StandardNormal)
        } else {
            clean
        }
    }
}

impl Objective for Evaluator<'_> {
    fn evaluate(&mut self, point: &[Value]) -> Result<f64, EvalError> {
        Ok(self.sample(point))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reals(x: &[f64]) -> Vec<Value> {
        x.iter().map(|v| Value::Real(*v)).collect()
    }

    #[test]
    fn plain_sphere_is_zero_at_center() {
        let f = make_function(&FunctionSpec::new("sphere", 4, TransformSpec::default())).unwrap();
        assert_eq!(f.noise_free(&reals(&[0.0; 4])), 0.0);
        assert_eq!(f.noise_free(&reals(&[1.0, 2.0, 0.0, 0.0])), 5.0);
    }

    #[test]
    fn cigar_unit_vector() {
        let f = make_function(&FunctionSpec::new("cigar", 3, TransformSpec::default())).unwrap();
        assert_eq!(f.noise_free(&reals(&[0.0, 1.0, 0.0])), 1e6);
    }

    #[test]
    fn translated_sphere_minimum_at_shift() {
        let f = make_function(&FunctionSpec::new("sphere", 5, TransformSpec::translated(1.0, 9))).unwrap();
        let t = f.transform().unwrap().shift.clone();
        assert_eq!(f.noise_free(&reals(&t)), 0.0);
        let y: Vec<f64> = t.iter().map(|v| v + 1.0).collect();
        assert!((f.noise_free(&reals(&y)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_sphere_is_distance_to_shift() {
        let spec = TransformSpec { translation_std: 1.0, rotate: true, transform_seed: 4, ..Default::default() };
        let f = make_function(&FunctionSpec::new("sphere", 6, spec)).unwrap();
        let t = f.transform().unwrap().shift.clone();
        let x = [0.5, -0.5, 1.0, 2.0, 0.0, 3.0];
        let expected: f64 = x.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum();
        assert!((f.noise_free(&reals(&x)) - expected).abs() < 1e-10);
    }

    #[test]
    fn unknown_base() {
        let err = make_function(&FunctionSpec::new("nope", 2, TransformSpec::default())).unwrap_err();
        assert_eq!(err, BenchError::UnknownFunction("nope".into()));
    }

    #[test]
    fn discrete_domains() {
        let f = make_function(&FunctionSpec::new(ONEMAX, 5, TransformSpec::default())).unwrap();
        assert_eq!(f.noise_free(&[Value::Int(1), Value::Int(0), Value::Int(1), Value::Int(1), Value::Int(0)]), 2.0);
        assert_eq!(f.optimum_value(), Some(0.0));
        let tsp = make_function(&tsp::simple_tsp(5, 2).unwrap()).unwrap();
        assert_eq!(tsp.domain().len(), 5);
        assert_eq!(tsp.optimum_value(), None);
    }

    #[test]
    fn composite_sum_of_aligned_spheres() {
        let mut spec = FunctionSpec::new(lsgo::NAME, 4, TransformSpec::translated(1.0, 3));
        spec.blocks = vec![
            BlockSpec { base: "sphere".into(), indices: vec![0, 1], weight: 1.0 },
            BlockSpec { base: "sphere".into(), indices: vec![2, 3], weight: 10.0 },
        ];
        let f = make_function(&spec).unwrap();
        let opt = f.optimum_point().unwrap();
        assert_eq!(f.noise_free(&opt), 0.0);
        let mut moved = opt.clone();
        moved[2] = Value::Real(moved[2].as_f64() + 1.0);
        assert!((f.noise_free(&moved) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn conflicting_overlap_has_unknown_optimum() {
        let mut spec = FunctionSpec::new(lsgo::NAME, 5, TransformSpec::translated(1.0, 3));
        spec.blocks = vec![
            BlockSpec { base: "sphere".into(), indices: vec![0, 1, 2], weight: 1.0 },
            BlockSpec { base: "sphere".into(), indices: vec![2, 3, 4], weight: 1.0 },
        ];
        spec.conflicting = true;
        assert_eq!(make_function(&spec).unwrap().optimum_value(), None);
        spec.conflicting = false;
        assert_eq!(make_function(&spec).unwrap().optimum_value(), Some(0.0));
    }
}
