//! Instantiates algorithm trees into live optimizer handles.

use crate::combinators::{allocate_budgets, phase_budgets, BetAndRun, Chain, Progressive};
use crate::discrete::ea::{DiscreteEa, EaVariant};
use crate::discrete::softmax::SoftmaxBridge;
use crate::discrete::DiscreteSetup;
use crate::error::{Error, Result};
use crate::optimizer::{Encoding, OptimizerHandle, RunContext, Solver};
use crate::seed::{derive_seed, Label};
use crate::solvers::cma::Cma;
use crate::solvers::de::{DeConfig, DifferentialEvolution};
use crate::solvers::es::OnePlusOneEs;
use crate::solvers::metamodel::MetaModel;
use crate::solvers::powell::Powell;
use crate::solvers::recentering::Recentering;
use crate::solvers::tbpsa::Tbpsa;
use crate::solvers::trust_region::{ModelKind, TrustRegion};
use crate::solvers::ContinuousSetup;
use crate::space::VariableKind;
use crate::spec::{AlgorithmSpec, WrapKind};
use crate::wizard::{select_algorithm, SelectionContext};

/// Maximum number of nested wizard expansions.
pub const MAX_WIZARD_DEPTH: usize = 3;

const CONTINUOUS: &[&str] = &[
    "one-plus-one-es",
    "cma",
    "diagonal-cma",
    "de",
    "lhs-de",
    "tbpsa",
    "naive-tbpsa",
    "powell",
    "cobyla",
    "sqp",
    "recentering",
];

const DISCRETE: &[&str] = &[
    "discrete-one-plus-one",
    "linear-decay-discrete",
    "adaptive-discrete",
    "portfolio-discrete",
    "optimistic-noisy-discrete",
    "fastga",
];

const WIZARD: &str = "abbo";

/// Every registered leaf id.
pub fn known_solvers() -> Vec<&'static str> {
    CONTINUOUS.iter().chain(DISCRETE).copied().chain(std::iter::once(WIZARD)).collect()
}

fn unknown(name: &str) -> Error {
    Error::UnknownSolver { name: name.to_string(), known: known_solvers().join(", ") }
}

/// Checks leaf ids and parameters without instantiating anything.
pub fn validate_spec(spec: &AlgorithmSpec) -> Result<()> {
    match spec {
        AlgorithmSpec::Leaf { solver, params } => {
            if !known_solvers().contains(&solver.as_str()) {
                return Err(unknown(solver));
            }
            for (key, value) in params {
                if key != "asks" {
                    return Err(Error::Config(format!("unknown parameter '{key}' for {solver}")));
                }
                if !(*value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::Config(format!("asks must be a positive integer, got {value}")));
                }
            }
            Ok(())
        }
        AlgorithmSpec::Chain { children, .. } | AlgorithmSpec::BetAndRun { children, .. } => {
            children.iter().try_for_each(validate_spec)
        }
        AlgorithmSpec::Wrap { child, .. } => validate_spec(child),
    }
}

/// Encoding the root solver of a run on this context works in.
pub fn root_encoding(ctx: &RunContext) -> Encoding {
    if ctx.domain.has_discrete() {
        Encoding::Native
    } else {
        Encoding::Normalized
    }
}

/// Builds the tree for `ctx`. Each node's seed is derived from the master
/// seed and its path of child indices.
pub fn build_optimizer(spec: &AlgorithmSpec, ctx: &RunContext) -> Result<OptimizerHandle> {
    validate_spec(spec)?;
    let encoding = root_encoding(ctx);
    let env = Env {
        ctx,
        budget: ctx.budget,
        native: encoding == Encoding::Native,
        normalized_only: false,
        path: Vec::new(),
        wizard_depth: 0,
    };
    let solver = env.build(spec)?;
    Ok(OptimizerHandle::new(ctx, encoding, solver))
}

#[derive(Clone)]
struct Env<'a> {
    ctx: &'a RunContext,
    budget: usize,
    native: bool,
    normalized_only: bool,
    path: Vec<u64>,
    wizard_depth: usize,
}

impl Env<'_> {
    fn seed(&self, tag: &str) -> u64 {
        let mut labels: Vec<Label> = vec![Label::Str(tag)];
        labels.extend(self.path.iter().map(|&i| Label::Int(i)));
        derive_seed(self.ctx.master_seed, &labels)
    }

    fn child(&self, index: usize, budget: usize) -> Self {
        let mut env = self.clone();
        env.path.push(index as u64);
        env.budget = budget.max(1);
        env
    }

    fn normalized(&self, normalized_only: bool) -> Self {
        let mut env = self.clone();
        env.native = false;
        env.normalized_only |= normalized_only;
        env
    }

    fn continuous_setup(&self) -> ContinuousSetup {
        ContinuousSetup {
            bounds: self.ctx.domain.normalized_box(),
            budget: self.budget,
            num_workers: self.ctx.num_workers,
            noisy: self.ctx.noisy,
            seed: self.seed("solver"),
        }
    }

    /// Runs `inner` in the normalized encoding, bridging from native if needed.
    fn in_normalized(&self, normalized_only: bool, inner: impl FnOnce(&Self) -> Result<Box<dyn Solver>>) -> Result<Box<dyn Solver>> {
        let solver = inner(&self.normalized(normalized_only))?;
        if self.native {
            Ok(Box::new(SoftmaxBridge::new(self.ctx.domain.clone(), solver, self.seed("softmax"))))
        } else {
            Ok(solver)
        }
    }

    fn build(&self, spec: &AlgorithmSpec) -> Result<Box<dyn Solver>> {
        match spec {
            AlgorithmSpec::Leaf { solver, .. } => self.leaf(solver),
            AlgorithmSpec::Chain { children, fractions } => {
                let absolute: Vec<Option<usize>> = children.iter().map(|c| c.param("asks").map(|v| v as usize)).collect();
                let quotas = allocate_budgets(self.budget, fractions, &absolute)?;
                let built = children
                    .iter()
                    .enumerate()
                    .map(|(i, c)| self.child(i, quotas[i]).build(c))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Box::new(Chain::new(built, quotas)))
            }
            AlgorithmSpec::BetAndRun { children, phase_fraction } => {
                let phase = phase_budgets(self.budget, children.len(), *phase_fraction)?;
                let rest = self.budget - phase.iter().sum::<usize>();
                let built = children
                    .iter()
                    .enumerate()
                    .map(|(i, c)| self.child(i, phase[i] + rest).build(c))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Box::new(BetAndRun::new(built, phase)))
            }
            AlgorithmSpec::Wrap { kind: WrapKind::Softmax, child } => {
                self.in_normalized(false, |env| env.child(0, env.budget).build(child))
            }
            AlgorithmSpec::Wrap { kind: WrapKind::Metamodel, child } => self.in_normalized(true, |env| {
                let inner = env.child(0, env.budget).build(child)?;
                Ok(Box::new(MetaModel::new(inner, env.ctx.domain.dimension())))
            }),
            AlgorithmSpec::Wrap { kind: WrapKind::Progressive, child } => self.in_normalized(true, |env| {
                let inner = env.child(0, env.budget).build(child)?;
                Ok(Box::new(Progressive::new(inner, env.ctx.domain.dimension(), env.budget)))
            }),
        }
    }

    fn leaf(&self, name: &str) -> Result<Box<dyn Solver>> {
        if name == WIZARD {
            if self.wizard_depth >= MAX_WIZARD_DEPTH {
                return Err(Error::Config(format!("wizard nesting deeper than {MAX_WIZARD_DEPTH}")));
            }
            let selection = SelectionContext::from_parts(self.ctx, self.budget);
            let (rule, spec) = select_algorithm(&selection);
            log::debug!("wizard rule {rule} selected {spec}");
            let mut env = self.clone();
            env.wizard_depth += 1;
            return env.build(&spec);
        }
        if CONTINUOUS.contains(&name) {
            return self.in_normalized(false, |env| env.continuous_leaf(name));
        }
        if DISCRETE.contains(&name) {
            return self.discrete_leaf(name);
        }
        Err(unknown(name))
    }

    fn continuous_leaf(&self, name: &str) -> Result<Box<dyn Solver>> {
        let setup = self.continuous_setup();
        Ok(match name {
            "one-plus-one-es" => Box::new(OnePlusOneEs::new(&setup)),
            "cma" => Box::new(Cma::new(&setup, false)),
            "diagonal-cma" => Box::new(Cma::new(&setup, true)),
            "de" => Box::new(DifferentialEvolution::new(&setup, DeConfig::standard(setup.dim()))?),
            "lhs-de" => Box::new(DifferentialEvolution::new(&setup, DeConfig::lhs())?),
            "tbpsa" => Box::new(Tbpsa::new(&setup, false)),
            "naive-tbpsa" => Box::new(Tbpsa::new(&setup, true)),
            "powell" => Box::new(Powell::new(&setup)),
            "cobyla" => Box::new(TrustRegion::new(&setup, ModelKind::Linear)),
            "sqp" => Box::new(TrustRegion::new(&setup, ModelKind::Quadratic)),
            "recentering" => Box::new(Recentering::new(&setup)),
            other => return Err(unknown(other)),
        })
    }

    fn discrete_leaf(&self, name: &str) -> Result<Box<dyn Solver>> {
        if self.normalized_only {
            return Err(Error::Config(format!("{name} works on native values and cannot run under a continuous-only wrapper")));
        }
        let kinds: Vec<VariableKind> = if self.native {
            self.ctx.domain.kinds().cloned().collect()
        } else {
            let bounds = self.ctx.domain.normalized_box();
            bounds
                .lower
                .iter()
                .zip(&bounds.upper)
                .map(|(l, u)| VariableKind::Continuous {
                    lower: l.is_finite().then_some(*l),
                    upper: u.is_finite().then_some(*u),
                    scale: 1.0,
                })
                .collect()
        };
        let setup = DiscreteSetup {
            kinds,
            budget: self.budget,
            num_workers: self.ctx.num_workers,
            noisy: self.ctx.noisy,
            seed: self.seed("solver"),
        };
        let variant = match name {
            "discrete-one-plus-one" => EaVariant::Fixed,
            "linear-decay-discrete" => EaVariant::LinearDecay,
            "adaptive-discrete" => EaVariant::Adaptive,
            "portfolio-discrete" => EaVariant::Portfolio,
            "optimistic-noisy-discrete" => EaVariant::OptimisticNoisy,
            "fastga" => EaVariant::FastGa,
            other => return Err(unknown(other)),
        };
        Ok(Box::new(DiscreteEa::new(&setup, variant)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::DomainSpec;

    fn ctx(domain: DomainSpec, budget: usize) -> RunContext {
        RunContext::new(domain, budget, 1, false, 7).unwrap()
    }

    #[test]
    fn unknown_leaf_lists_known_ids() {
        let err = build_optimizer(&AlgorithmSpec::leaf("nonexistent"), &ctx(DomainSpec::continuous(2).unwrap(), 10)).unwrap_err();
        match err {
            Error::UnknownSolver { name, known } => {
                assert_eq!(name, "nonexistent");
                assert!(known.contains("cma") && known.contains("abbo"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn every_known_leaf_builds_on_mixed_and_continuous_domains() {
        let mixed = DomainSpec::new(vec![
            VariableKind::Categorical { arity: 3 },
            VariableKind::Integer { low: 0, high: 9 },
            VariableKind::real(),
        ])
        .unwrap();
        for domain in [DomainSpec::continuous(3).unwrap(), mixed] {
            for name in known_solvers() {
                build_optimizer(&AlgorithmSpec::leaf(name), &ctx(domain.clone(), 50)).unwrap();
            }
        }
    }

    #[test]
    fn discrete_leaf_under_metamodel_is_rejected() {
        let spec: AlgorithmSpec = "metamodel(fastga)".parse().unwrap();
        let err = build_optimizer(&spec, &ctx(DomainSpec::binary(4).unwrap(), 10)).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn root_encoding_follows_domain() {
        assert_eq!(root_encoding(&ctx(DomainSpec::continuous(2).unwrap(), 5)), Encoding::Normalized);
        assert_eq!(root_encoding(&ctx(DomainSpec::binary(2).unwrap(), 5)), Encoding::Native);
    }
}
