//! Partially separable composites: weighted sums of base functions over
//! (possibly overlapping) groups of variables.

use abbo_core::derive_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::functions::BaseFunction;
use crate::problem::{BlockSpec, FunctionSpec};
use crate::transform::TransformSpec;
use crate::BenchError;

pub const NAME: &str = "lsgo_composite";
pub const BLOCK_BASES: [BaseFunction; 4] =
    [BaseFunction::Ellipsoid, BaseFunction::Rosenbrock, BaseFunction::Ackley, BaseFunction::Sphere];
pub const WEIGHT_RANGE: (f64, f64) = (1e-3, 1e3);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LsgoLayout {
    /// Exact number of blocks; `None` keeps drawing blocks until every
    /// variable is covered.
    pub block_count: Option<usize>,
    /// Consecutive blocks share `max(1, floor(size / 4))` variables.
    pub overlap: bool,
    /// Each block gets its own shift, so overlapping blocks pull shared
    /// variables towards different optima.
    pub conflicting: bool,
}

/// Variables shared between a block of `size` and the next one.
pub fn overlap_share(size: usize) -> usize {
    (size / 4).max(1)
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    rng.random_range(lo.ln()..=hi.ln()).exp()
}

fn block_size(rng: &mut ChaCha8Rng, max: usize) -> usize {
    (log_uniform(rng, 2.0, max as f64).round() as usize).clamp(2, max)
}

fn span(sizes: &[usize], overlap: bool) -> usize {
    let shared: usize = if overlap { sizes[..sizes.len() - 1].iter().map(|&s| overlap_share(s)).sum() } else { 0 };
    sizes.iter().sum::<usize>() - shared
}

fn place(sizes: &[usize], overlap: bool) -> Vec<Vec<usize>> {
    let mut start = 0;
    sizes
        .iter()
        .map(|&s| {
            let block: Vec<usize> = (start..start + s).collect();
            start += s - if overlap { overlap_share(s) } else { 0 };
            block
        })
        .collect()
}

fn index_sets(d: usize, layout: &LsgoLayout, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>, BenchError> {
    let max = (d / 2).max(2);
    match layout.block_count {
        Some(0) => Err(BenchError::InvalidSpec("block count must be positive".into())),
        Some(k) => {
            let mut sizes: Vec<usize> = (0..k).map(|_| block_size(rng, max)).collect();
            while span(&sizes, layout.overlap) > d {
                let (i, &largest) = sizes.iter().enumerate().max_by_key(|(i, s)| (**s, usize::MAX - i)).unwrap();
                if largest <= 2 {
                    return Err(BenchError::InvalidSpec(format!("dimension {d} is too small for {k} blocks")));
                }
                sizes[i] -= 1;
            }
            Ok(place(&sizes, layout.overlap))
        }
        None => {
            let mut blocks = Vec::new();
            let mut start = 0;
            while start < d {
                let size = block_size(rng, max).min(d - start);
                if size < 2 {
                    blocks.push(vec![d - 2, d - 1]);
                    break;
                }
                blocks.push((start..start + size).collect());
                if start + size == d {
                    break;
                }
                start += size - if layout.overlap { overlap_share(size) } else { 0 };
            }
            Ok(blocks)
        }
    }
}

/// Random composite over `d` variables. Every block is rotated; the shared
/// shift (or per-block shifts when conflicting) has unit standard deviation.
pub fn lsgo_composite(d: usize, layout: &LsgoLayout, transform_seed: u64) -> Result<FunctionSpec, BenchError> {
    if d < 4 {
        return Err(BenchError::InvalidSpec(format!("composites need at least 4 variables, got {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(transform_seed, &["lsgo".into(), "layout".into()]));
    let sets = index_sets(d, layout, &mut rng)?;
    let blocks = sets
        .into_iter()
        .map(|indices| {
            let base = BLOCK_BASES[rng.random_range(0..BLOCK_BASES.len())];
            let weight = log_uniform(&mut rng, WEIGHT_RANGE.0, WEIGHT_RANGE.1);
            BlockSpec { base: base.name().to_string(), indices, weight }
        })
        .collect();
    let transform = TransformSpec { translation_std: 1.0, rotate: true, transform_seed, ..TransformSpec::default() };
    let mut spec = FunctionSpec::new(NAME, d, transform);
    spec.blocks = blocks;
    spec.conflicting = layout.conflicting;
    Ok(spec)
}
