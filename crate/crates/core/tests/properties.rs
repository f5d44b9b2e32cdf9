use abbo_core::{
    build_optimizer, drive, known_solvers, run_loop, AlgorithmSpec, DomainSpec, Error, FnObjective, RunContext, Value,
    VariableKind, WrapKind,
};
use proptest::prelude::*;

fn squares(p: &[Value]) -> f64 {
    p.iter().map(|v| v.as_f64().powi(2)).sum()
}

fn kind_strategy() -> impl Strategy<Value = VariableKind> {
    prop_oneof![
        (proptest::option::of(-5.0..0.0f64), proptest::option::of(0.5..5.0f64), 0.1..3.0f64)
            .prop_map(|(lower, upper, scale)| VariableKind::Continuous { lower, upper, scale }),
        (-4i64..4, 0i64..6).prop_map(|(low, width)| VariableKind::Integer { low, high: low + width }),
        (2usize..6).prop_map(|arity| VariableKind::Categorical { arity }),
        Just(VariableKind::UnboundedInteger),
    ]
}

fn domain_strategy() -> impl Strategy<Value = DomainSpec> {
    proptest::collection::vec(kind_strategy(), 1..5).prop_map(|kinds| DomainSpec::new(kinds).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_solver_asks_inside_the_domain(domain in domain_strategy(), workers in 1usize..4, seed in any::<u64>()) {
        for name in known_solvers() {
            let ctx = RunContext::new(domain.clone(), 24, workers, false, seed).unwrap();
            let mut handle = match build_optimizer(&AlgorithmSpec::leaf(name), &ctx) {
                Ok(h) => h,
                // Domains where every variable is single-valued have nothing to mutate.
                Err(Error::Config(_)) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            let mut f = FnObjective(|p: &[Value]| {
                assert!(domain.contains(p), "{name} asked {p:?}");
                squares(p)
            });
            drive(&mut handle, &mut f, |_, _| {}).unwrap();
            prop_assert_eq!(handle.tells(), 24);
            prop_assert!(domain.contains(&handle.recommend().point));
        }
    }

    #[test]
    fn parallel_asks_never_collide(w in 1usize..20, seed in any::<u64>()) {
        for name in ["cma", "de", "tbpsa", "powell", "cobyla", "sqp", "one-plus-one-es", "recentering"] {
            let ctx = RunContext::new(DomainSpec::continuous(3).unwrap(), 40, w, false, seed).unwrap();
            let mut handle = build_optimizer(&AlgorithmSpec::leaf(name), &ctx).unwrap();
            let ids: Vec<u64> = (0..w).map(|_| handle.ask().unwrap().id).collect();
            let mut sorted = ids.clone();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), w);
            prop_assert_eq!(handle.pending(), w);
        }
    }

    #[test]
    fn noise_free_incumbent_never_worsens(seed in any::<u64>(), w in 1usize..4) {
        for name in ["cma", "de", "tbpsa", "powell", "sqp", "abbo"] {
            let ctx = RunContext::new(DomainSpec::continuous(4).unwrap(), 120, w, false, seed).unwrap();
            let mut handle = build_optimizer(&AlgorithmSpec::leaf(name), &ctx).unwrap();
            let mut best = f64::INFINITY;
            let mut f = FnObjective(|p: &[Value]| p.iter().map(|v| v.as_f64().abs()).sum::<f64>());
            drive(&mut handle, &mut f, |_, h| {
                let now = h.incumbent().unwrap().mean_loss().unwrap();
                assert!(now <= best);
                best = now;
            })
            .unwrap();
        }
    }
}

fn leaf_names() -> impl Strategy<Value = AlgorithmSpec> {
    prop::sample::select(vec![
        "cma", "diagonal-cma", "de", "lhs-de", "tbpsa", "naive-tbpsa", "powell", "cobyla", "sqp", "one-plus-one-es",
        "recentering", "abbo",
    ])
    .prop_map(AlgorithmSpec::leaf)
}

fn tree_strategy() -> impl Strategy<Value = AlgorithmSpec> {
    leaf_names().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (proptest::collection::vec(inner.clone(), 1..4), proptest::collection::vec(1.0..4.0f64, 3)).prop_map(
                |(children, weights)| {
                    let w = &weights[..children.len()];
                    let total: f64 = w.iter().sum();
                    let mut fractions: Vec<f64> = w.iter().map(|x| x / total).collect();
                    let head: f64 = fractions[..fractions.len() - 1].iter().sum();
                    *fractions.last_mut().unwrap() = 1.0 - head;
                    AlgorithmSpec::Chain { children, fractions }
                }
            ),
            (proptest::collection::vec(inner.clone(), 2..4), 0.1..0.6f64)
                .prop_map(|(children, phase_fraction)| AlgorithmSpec::BetAndRun { children, phase_fraction }),
            inner.clone().prop_map(|c| AlgorithmSpec::wrap(WrapKind::Metamodel, c)),
            inner.prop_map(|c| AlgorithmSpec::wrap(WrapKind::Progressive, c)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_trees_spend_exactly_the_budget(spec in tree_strategy(), budget in 60usize..400, w in 1usize..5, seed in any::<u64>()) {
        let ctx = RunContext::new(DomainSpec::continuous(3).unwrap(), budget, w, false, seed).unwrap();
        let text = spec.to_string();
        prop_assert_eq!(text.parse::<AlgorithmSpec>().unwrap(), spec.clone());
        let mut count = 0usize;
        let mut f = FnObjective(|p: &[Value]| {
            count += 1;
            squares(p)
        });
        match run_loop(&spec, &mut f, &ctx) {
            Ok(outcome) => {
                prop_assert_eq!(outcome.history.len(), budget);
                prop_assert_eq!(count, budget);
            }
            // Tiny exploration slices inside small sub-budgets are rejected up front.
            Err(abbo_core::RunError::Build(Error::Config(_))) => {}
            Err(e) => panic!("{text}: {e}"),
        }
    }

    #[test]
    fn runs_are_reproducible(spec in tree_strategy(), seed in any::<u64>()) {
        let ctx = RunContext::new(DomainSpec::continuous(2).unwrap(), 150, 2, false, seed).unwrap();
        let mut f = FnObjective(squares);
        let a = run_loop(&spec, &mut f, &ctx);
        let b = run_loop(&spec, &mut f, &ctx);
        if let (Ok(a), Ok(b)) = (a, b) {
            let bits = |h: &[(usize, f64)]| h.iter().map(|(i, l)| (*i, l.to_bits())).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a.history), bits(&b.history));
            prop_assert_eq!(a.recommendation, b.recommendation);
        }
    }
}

#[test]
fn waves_follow_worker_count() {
    let ctx = RunContext::new(DomainSpec::continuous(2).unwrap(), 5, 2, false, 1).unwrap();
    let mut handle = build_optimizer(&AlgorithmSpec::leaf("cma"), &ctx).unwrap();
    let mut pending_at_tell = Vec::new();
    let mut f = FnObjective(|_: &[Value]| 7.0);
    let outcome = drive(&mut handle, &mut f, |_, h| pending_at_tell.push(h.pending())).unwrap();
    // Waves of 2, 2, 1: pending counts after each tell.
    assert_eq!(pending_at_tell, vec![1, 0, 1, 0, 0]);
    assert_eq!(outcome.history, (1..=5).map(|i| (i, 7.0)).collect::<Vec<_>>());
}

#[test]
fn evaluation_failure_keeps_partial_history() {
    let ctx = RunContext::new(DomainSpec::continuous(2).unwrap(), 10, 1, false, 1).unwrap();
    struct FailsAtFour(usize);
    impl abbo_core::Objective for FailsAtFour {
        fn evaluate(&mut self, _p: &[Value]) -> Result<f64, abbo_core::EvalError> {
            self.0 += 1;
            if self.0 == 4 {
                Err(abbo_core::EvalError("boom".into()))
            } else {
                Ok(1.0)
            }
        }
    }
    let err = run_loop(&AlgorithmSpec::leaf("de"), &mut FailsAtFour(0), &ctx).unwrap_err();
    assert_eq!(err.partial_history().len(), 3);
}

#[test]
fn chained_child_starts_from_best_point() {
    // A one-shot first stage, then a (1+1)-ES whose first ask must be a
    // mutation of the best point found by the first stage.
    let ctx = RunContext::new(DomainSpec::continuous(2).unwrap(), 60, 1, false, 3).unwrap();
    let spec: AlgorithmSpec = "chain(recentering,one-plus-one-es;0.5,0.5)".parse().unwrap();
    let mut handle = build_optimizer(&spec, &ctx).unwrap();
    let target = [0.3, -0.2];
    let loss = |p: &[Value]| p.iter().zip(target).map(|(v, t)| (v.as_f64() - t).powi(2)).sum::<f64>();
    let mut best = (f64::INFINITY, vec![]);
    for _ in 0..30 {
        let c = handle.ask().unwrap();
        let l = loss(&c.point);
        if l < best.0 {
            best = (l, c.point.clone());
        }
        handle.tell(&c, l).unwrap();
    }
    let first = handle.ask().unwrap();
    let gap: f64 = first.point.iter().zip(&best.1).map(|(a, b)| (a.as_f64() - b.as_f64()).powi(2)).sum::<f64>().sqrt();
    // One standard-normal step in 2-d exceeds 5 with negligible probability.
    assert!(gap < 5.0, "first ask {:?} far from best {:?}", first.point, best.1);
    let mut incumbent = best.0;
    handle.tell(&first, loss(&first.point)).unwrap();
    while handle.asks() < 60 {
        let c = handle.ask().unwrap();
        handle.tell(&c, loss(&c.point)).unwrap();
        let now = handle.incumbent().unwrap().mean_loss().unwrap();
        assert!(now <= incumbent);
        incumbent = now;
    }
}

#[test]
fn chain_first_asks_come_from_first_child() {
    // diagonal-cma never proposes the exact center after its first draw while
    // powell's first ask is exactly the start point.
    let ctx = RunContext::new(DomainSpec::continuous(3).unwrap(), 40, 1, false, 9).unwrap();
    let spec: AlgorithmSpec = "chain(powell,cma;0.5,0.5)".parse().unwrap();
    let mut handle = build_optimizer(&spec, &ctx).unwrap();
    let c = handle.ask().unwrap();
    assert_eq!(c.point, vec![Value::Real(0.0); 3]);
}

#[test]
fn identical_bet_and_run_children_keep_the_first() {
    use abbo_core::combinators::{phase_budgets, BetAndRun};
    use abbo_core::solvers::es::OnePlusOneEs;
    use abbo_core::solvers::ContinuousSetup;
    use abbo_core::Solver;
    let setup = ContinuousSetup::unbounded(3, 100, 5);
    let children: Vec<Box<dyn Solver>> = (0..3).map(|_| Box::new(OnePlusOneEs::new(&setup)) as Box<dyn Solver>).collect();
    let mut b = BetAndRun::new(children, phase_budgets(100, 3, 0.3).unwrap());
    for id in 0..100 {
        let x = b.ask(id);
        b.tell(id, &x, x.iter().map(|v| v * v).sum());
    }
    assert_eq!(b.survivor(), Some(0));
}

#[test]
fn progressive_pins_inactive_coordinates_to_center() {
    let domain = DomainSpec::bounded(10, -2.0, 6.0).unwrap();
    let center = domain.center();
    let ctx = RunContext::new(domain, 100, 1, true, 4).unwrap();
    let spec: AlgorithmSpec = "progressive(de)".parse().unwrap();
    let mut handle = build_optimizer(&spec, &ctx).unwrap();
    for t in 0..100 {
        let c = handle.ask().unwrap();
        let active = abbo_core::combinators::active_coordinates(t, 10, 100);
        assert_eq!(&c.point[active..], &center[active..]);
        handle.tell(&c, squares(&c.point)).unwrap();
    }
}
