//! Rule-based algorithm selection from a-priori problem features.

use crate::optimizer::RunContext;
use crate::spec::{AlgorithmSpec, WrapKind};

/// Features known before any evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionContext {
    /// Scalar dimension of the normalized encoding.
    pub d: usize,
    pub budget: usize,
    pub num_workers: usize,
    pub noisy: bool,
    pub has_discrete: bool,
    pub all_discrete: bool,
    pub has_categorical: bool,
    /// Largest number of values of a finite discrete variable (integer ranges
    /// count their width); 0 without discrete variables.
    pub max_arity: usize,
    pub has_unbounded_discrete: bool,
    pub fully_continuous: bool,
}

impl SelectionContext {
    /// Purely continuous context.
    pub fn continuous(d: usize, budget: usize, num_workers: usize, noisy: bool) -> Self {
        Self {
            d,
            budget,
            num_workers,
            noisy,
            has_discrete: false,
            all_discrete: false,
            has_categorical: false,
            max_arity: 0,
            has_unbounded_discrete: false,
            fully_continuous: true,
        }
    }

    pub fn from_run(ctx: &RunContext) -> Self {
        Self::from_parts(ctx, ctx.budget)
    }

    /// Context for a sub-run of `budget` evaluations on the same domain.
    pub fn from_parts(ctx: &RunContext, budget: usize) -> Self {
        let domain = &ctx.domain;
        Self {
            d: domain.dimension(),
            budget,
            num_workers: ctx.num_workers.min(budget.max(1)),
            noisy: ctx.noisy,
            has_discrete: domain.has_discrete(),
            all_discrete: domain.all_discrete(),
            has_categorical: domain.has_categorical(),
            max_arity: domain.max_arity(),
            has_unbounded_discrete: domain.has_unbounded_discrete(),
            fully_continuous: domain.all_continuous(),
        }
    }
}

/// Applies the ordered rules; returns the index (1-18) of the rule that fired
/// and the selected algorithm.
pub fn select_algorithm(ctx: &SelectionContext) -> (usize, AlgorithmSpec) {
    let (d, b, w) = (ctx.d, ctx.budget, ctx.num_workers);
    let leaf = AlgorithmSpec::leaf;

    if ctx.has_discrete {
        if ctx.noisy && ctx.has_categorical {
            return (1, leaf("optimistic-noisy-discrete"));
        }
        let finite = !ctx.has_unbounded_discrete;
        if finite && ctx.max_arity < 5 && w == 1 {
            return (2, leaf("linear-decay-discrete"));
        }
        if finite && ctx.max_arity < 5 && w > 1 {
            return (3, leaf("adaptive-discrete"));
        }
        if finite {
            let inner = select_algorithm(&SelectionContext::continuous(d, b, w, ctx.noisy)).1;
            return (4, AlgorithmSpec::wrap(WrapKind::Softmax, inner));
        }
        return (5, leaf("fastga"));
    }

    if ctx.noisy {
        if d > 100 {
            return (6, AlgorithmSpec::wrap(WrapKind::Progressive, leaf("de")));
        }
        if d <= 30 {
            return (7, leaf("tbpsa"));
        }
        if b > 100 {
            return (8, leaf("sqp"));
        }
        return (9, leaf("tbpsa"));
    }

    if 2 * w > b || b < d {
        return (10, leaf("recentering"));
    }
    if 5 * w > b && d < 5 && b < 100 {
        return (11, leaf("diagonal-cma"));
    }
    if 5 * w > b && d < 5 && b < 500 {
        let spec = AlgorithmSpec::Chain {
            children: vec![
                AlgorithmSpec::leaf_with("diagonal-cma", &[("asks", 100.0)]),
                AlgorithmSpec::wrap(WrapKind::Metamodel, leaf("cma")),
            ],
            fractions: vec![0.5, 0.5],
        };
        return (12, spec);
    }
    if 5 * w > b {
        return (13, leaf("naive-tbpsa"));
    }

    if b > 6000 && d > 7 {
        let spec = AlgorithmSpec::Chain { children: vec![leaf("cma"), leaf("powell")], fractions: vec![0.5, 0.5] };
        return (14, spec);
    }
    if b < 30 * d && d > 30 {
        return (15, leaf("one-plus-one-es"));
    }
    if d < 5 && b < 30 * d {
        return (16, AlgorithmSpec::wrap(WrapKind::Metamodel, leaf("cma")));
    }
    if b < 30 * d {
        return (17, leaf("cobyla"));
    }
    (18, leaf("cma"))
}
