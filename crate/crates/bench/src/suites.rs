//! Named benchmark suites and their JSON manifest form.

use std::collections::HashSet;

use abbo_core::derive_seed;
use serde::{Deserialize, Serialize};

use crate::functions::BaseFunction;
use crate::lsgo::{lsgo_composite, LsgoLayout};
use crate::problem::{make_function, FunctionSpec, LEADINGONES, ONEMAX};
use crate::transform::TransformSpec;
use crate::tsp::simple_tsp;
use crate::BenchError;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

pub const SUITE_NAMES: [&str; 6] =
    ["yabbob_lite", "parallel_multimodal_lite", "noisy_lite", "lsgo_lite", "discrete_lite", "large_scale_smoke"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteProblem {
    pub id: String,
    pub function: FunctionSpec,
    pub budgets: Vec<usize>,
    pub num_workers: Vec<usize>,
}

impl SuiteProblem {
    /// The function instance used for one repetition: the transform seed is
    /// re-derived from the master seed and the repetition index.
    pub fn instance(&self, suite: &str, master_seed: u64, seed: u64) -> FunctionSpec {
        let labels = [suite.into(), (&self.id).into(), "instance".into(), seed.into(), self.function.transform.transform_seed.into()];
        self.function.with_transform_seed(derive_seed(master_seed, &labels))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSuite {
    pub name: String,
    pub problems: Vec<SuiteProblem>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    #[serde(flatten)]
    suite: BenchmarkSuite,
}

impl BenchmarkSuite {
    pub fn by_name(name: &str) -> Option<Self> {
        let suite = match name {
            "yabbob_lite" => yabbob_lite(),
            "parallel_multimodal_lite" => parallel_multimodal_lite(),
            "noisy_lite" => noisy_lite(),
            "lsgo_lite" => lsgo_lite(),
            "discrete_lite" => discrete_lite(),
            "large_scale_smoke" => large_scale_smoke(),
            _ => return None,
        };
        Some(suite)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let mut ids = HashSet::new();
        for p in &self.problems {
            if !ids.insert(p.id.as_str()) {
                return Err(BenchError::InvalidSpec(format!("duplicate problem id `{}`", p.id)));
            }
            if p.budgets.is_empty() || p.num_workers.is_empty() {
                return Err(BenchError::InvalidSpec(format!("problem `{}` lists no budgets or workers", p.id)));
            }
            for &b in &p.budgets {
                for &w in &p.num_workers {
                    if w == 0 || b < w {
                        return Err(BenchError::InvalidSpec(format!("problem `{}`: budget {b} with {w} workers", p.id)));
                    }
                }
            }
            make_function(&p.function)?;
        }
        Ok(())
    }

    /// Number of (problem, budget, workers) configurations.
    pub fn configurations(&self) -> usize {
        self.problems.iter().map(|p| p.budgets.len() * p.num_workers.len()).sum()
    }

    pub fn to_manifest(&self) -> String {
        let manifest = Manifest { format_version: MANIFEST_FORMAT_VERSION, suite: self.clone() };
        serde_json::to_string_pretty(&manifest).expect("suite serializes")
    }

    pub fn from_manifest(text: &str) -> Result<Self, BenchError> {
        let manifest: Manifest = serde_json::from_str(text).map_err(|e| BenchError::Manifest(e.to_string()))?;
        if manifest.format_version != MANIFEST_FORMAT_VERSION {
            return Err(BenchError::Manifest(format!(
                "unsupported manifest format version {} (expected {MANIFEST_FORMAT_VERSION})",
                manifest.format_version
            )));
        }
        manifest.suite.validate()?;
        Ok(manifest.suite)
    }
}

fn problem(id: String, function: FunctionSpec, budgets: &[usize], num_workers: &[usize]) -> SuiteProblem {
    SuiteProblem { id, function, budgets: budgets.to_vec(), num_workers: num_workers.to_vec() }
}

pub const YABBOB_FUNCTIONS: [BaseFunction; 8] = [
    BaseFunction::Sphere,
    BaseFunction::Cigar,
    BaseFunction::Ellipsoid,
    BaseFunction::Hm,
    BaseFunction::Ackley,
    BaseFunction::Rosenbrock,
    BaseFunction::Griewank,
    BaseFunction::Lunacek,
];

/// 8 translated functions × d ∈ {5, 20} × budgets {100, 1000, 10000}, sequential.
pub fn yabbob_lite() -> BenchmarkSuite {
    let mut problems = Vec::new();
    for f in YABBOB_FUNCTIONS {
        for d in [5, 20] {
            let spec = FunctionSpec::new(f.name(), d, TransformSpec::translated(1.0, 0));
            problems.push(problem(format!("{}_d{d}", f.name()), spec, &[100, 1000, 10_000], &[1]));
        }
    }
    BenchmarkSuite { name: "yabbob_lite".into(), problems }
}

/// Rotated multimodal functions with 10 or 100 workers.
pub fn parallel_multimodal_lite() -> BenchmarkSuite {
    let fs = [
        BaseFunction::Ackley,
        BaseFunction::Rosenbrock,
        BaseFunction::DeceptiveMultimodal,
        BaseFunction::Griewank,
        BaseFunction::Lunacek,
        BaseFunction::Hm,
    ];
    let mut problems = Vec::new();
    for f in fs {
        for d in [5, 20] {
            let transform = TransformSpec { translation_std: 1.0, rotate: true, ..TransformSpec::default() };
            let spec = FunctionSpec::new(f.name(), d, transform);
            problems.push(problem(format!("{}_d{d}", f.name()), spec, &[1000, 10_000], &[10, 100]));
        }
    }
    BenchmarkSuite { name: "parallel_multimodal_lite".into(), problems }
}

/// Additive Gaussian noise with standard deviation 0.1, 1 or 10.
pub fn noisy_lite() -> BenchmarkSuite {
    let mut problems = Vec::new();
    for f in [BaseFunction::Sphere, BaseFunction::Rosenbrock, BaseFunction::Cigar] {
        for d in [2, 10] {
            for noise in [0.1, 1.0, 10.0] {
                let transform = TransformSpec { translation_std: 1.0, noise_std: noise, ..TransformSpec::default() };
                let spec = FunctionSpec::new(f.name(), d, transform);
                problems.push(problem(format!("{}_d{d}_noise{noise}", f.name()), spec, &[1000, 10_000], &[1]));
            }
        }
    }
    BenchmarkSuite { name: "noisy_lite".into(), problems }
}

/// Composites at d ∈ {50, 200}: disjoint, overlapping, and overlapping with
/// conflicting block optima.
pub fn lsgo_lite() -> BenchmarkSuite {
    let layouts = [
        ("disjoint", LsgoLayout::default()),
        ("overlap", LsgoLayout { overlap: true, ..LsgoLayout::default() }),
        ("conflicting", LsgoLayout { overlap: true, conflicting: true, ..LsgoLayout::default() }),
    ];
    let mut problems = Vec::new();
    for d in [50, 200] {
        for (k, (name, layout)) in layouts.iter().enumerate() {
            let spec = lsgo_composite(d, layout, k as u64).expect("dimension large enough");
            problems.push(problem(format!("lsgo_d{d}_{name}"), spec, &[1000, 10_000], &[1]));
        }
    }
    BenchmarkSuite { name: "lsgo_lite".into(), problems }
}

/// OneMax, LeadingOnes and SimpleTSP.
pub fn discrete_lite() -> BenchmarkSuite {
    let mut problems = Vec::new();
    for base in [ONEMAX, LEADINGONES] {
        for d in [20, 100] {
            let spec = FunctionSpec::new(base, d, TransformSpec::default());
            problems.push(problem(format!("{base}_d{d}"), spec, &[100, 1000, 10_000], &[1]));
        }
    }
    for n in [10, 30] {
        let spec = simple_tsp(n, 0).expect("enough cities");
        problems.push(problem(format!("simple_tsp_n{n}"), spec, &[100, 1000, 10_000], &[1]));
    }
    BenchmarkSuite { name: "discrete_lite".into(), problems }
}

/// Sphere and ellipsoid at d = 1000.
pub fn large_scale_smoke() -> BenchmarkSuite {
    let problems = [BaseFunction::Sphere, BaseFunction::Ellipsoid]
        .into_iter()
        .map(|f| {
            let spec = FunctionSpec::new(f.name(), 1000, TransformSpec::translated(1.0, 0));
            problem(format!("{}_d1000", f.name()), spec, &[1000], &[1])
        })
        .collect();
    BenchmarkSuite { name: "large_scale_smoke".into(), problems }
}
