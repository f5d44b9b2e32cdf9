use abbo_core::discrete::fastga::{PowerLaw, DEFAULT_BETA};
use abbo_core::solvers::de::{DeState, Member};
use abbo_core::solvers::es::{EsState, SIGMA_FLOOR};
use abbo_core::solvers::metamodel::metamodel_propose;
use abbo_core::solvers::quadratic::quadratic_terms;
use abbo_core::solvers::tbpsa::{Offspring, TbpsaState};
use abbo_core::{run_loop, AlgorithmSpec, DomainSpec, FnObjective, RunContext, Value};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Two-sided 1% critical value of the standard normal.
const Z_CRITICAL_1PCT: f64 = 2.5758293035489004;
/// 99th percentile of the chi-square distribution with 4 degrees of freedom.
const CHI2_4DF_99PCT: f64 = 13.276704135987622;

fn haar_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
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

/// Normal-approximation Mann-Whitney statistic with midranks for ties.
fn rank_sum_z(a: &[f64], b: &[f64]) -> f64 {
    let mut all: Vec<(f64, usize)> = a.iter().map(|&x| (x, 0)).chain(b.iter().map(|&x| (x, 1))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut ranks = vec![0.0; all.len()];
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let mid = (i + j) as f64 / 2.0 + 1.0;
        ranks[i..=j].iter_mut().for_each(|r| *r = mid);
        i = j + 1;
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let r1: f64 = all.iter().zip(&ranks).filter(|(s, _)| s.1 == 0).map(|(_, r)| r).sum();
    let u = r1 - n1 * (n1 + 1.0) / 2.0;
    (u - n1 * n2 / 2.0) / (n1 * n2 * (n1 + n2 + 1.0) / 12.0).sqrt()
}

#[test]
fn cma_is_rotation_invariant_in_distribution() {
    let d = 4;
    let ellipsoid = |x: &[f64]| x.iter().enumerate().map(|(i, v)| 1e3f64.powf(i as f64 / (d - 1) as f64) * v * v).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let m = haar_orthogonal(d, &mut rng);
    let mut plain = Vec::new();
    let mut rotated = Vec::new();
    for seed in 0..20 {
        let ctx = RunContext::new(DomainSpec::continuous(d).unwrap(), 300, 1, false, seed).unwrap();
        let reals = |p: &[Value]| p.iter().map(Value::as_f64).collect::<Vec<_>>();
        let best = |h: &[(usize, f64)]| h.iter().map(|x| x.1).fold(f64::INFINITY, f64::min).ln();
        let mut f = FnObjective(|p: &[Value]| ellipsoid(&reals(p)));
        plain.push(best(&run_loop(&AlgorithmSpec::leaf("cma"), &mut f, &ctx).unwrap().history));
        let mut g = FnObjective(|p: &[Value]| {
            let y = &m * DVector::from_vec(reals(p));
            ellipsoid(y.as_slice())
        });
        rotated.push(best(&run_loop(&AlgorithmSpec::leaf("cma"), &mut g, &ctx).unwrap().history));
    }
    let z = rank_sum_z(&plain, &rotated);
    assert!(z.abs() < Z_CRITICAL_1PCT, "z = {z}, plain {plain:?}, rotated {rotated:?}");
}

#[test]
fn fastga_strengths_follow_the_power_law() {
    let d = 10;
    let law = PowerLaw::new(d, DEFAULT_BETA);
    assert_eq!(law.support_max(), 5);
    let z: f64 = (1..=5).map(|k| (k as f64).powf(-1.5)).sum();
    let n = 10_000;
    let mut counts = [0usize; 5];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..n {
        counts[law.sample(&mut rng) - 1] += 1;
    }
    let chi2: f64 = (1..=5)
        .map(|k| {
            let expected = n as f64 * (k as f64).powf(-1.5) / z;
            (counts[k - 1] as f64 - expected).powi(2) / expected
        })
        .sum();
    assert!(chi2 < CHI2_4DF_99PCT, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn metamodel_recovers_convex_quadratic_minimizers() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..30 {
        let d = [2, 5, 10][trial % 3];
        let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let h = &a * a.transpose() + DMatrix::identity(d, d) * (0.1 * d as f64);
        let xstar = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let f = |x: &DVector<f64>| 0.5 * (x - &xstar).dot(&(&h * (x - &xstar))) + 3.0;
        let archive: Vec<(Vec<f64>, f64)> = (0..quadratic_terms(d) + d)
            .map(|_| {
                let x = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
                (x.as_slice().to_vec(), f(&x))
            })
            .collect();
        let proposal = metamodel_propose(&archive, d).expect("fit");
        let err = (DVector::from_vec(proposal) - &xstar).norm();
        assert!(err < 1e-6, "d = {d}, error {err}");
    }
}

proptest! {
    #[test]
    fn es_step_size_follows_success_counts(outcomes in proptest::collection::vec(any::<bool>(), 1..60)) {
        let mut state = EsState::new(vec![0.0], 1.0);
        state.step(&[0.0], 0.0);
        let mut loss = 0.0;
        let mut expected = 1.0f64;
        for &win in &outcomes {
            let told = if win { loss - 1.0 } else { loss + 1.0 };
            prop_assert_eq!(state.step(&[told], told), win);
            if win {
                loss = told;
                expected *= 2.0;
            } else {
                expected *= 2f64.powf(-0.25);
            }
            expected = expected.max(SIGMA_FLOOR);
            prop_assert!((state.sigma - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn de_member_losses_never_increase(
        trials in proptest::collection::vec((0usize..6, -10.0..10.0f64), 1..100),
    ) {
        let members = (0..6).map(|i| Member { point: vec![i as f64], loss: Some(i as f64) }).collect();
        let mut state = DeState { members, weight: 0.8, crossover: 0.5 };
        for (slot, loss) in trials {
            let before = state.members[slot].loss.unwrap();
            let replaced = state.select(slot, &[loss], loss);
            let after = state.members[slot].loss.unwrap();
            prop_assert!(after <= before);
            prop_assert_eq!(replaced, loss <= before);
        }
    }

    #[test]
    fn tbpsa_center_is_the_elite_mean(
        gen in proptest::collection::vec((proptest::collection::vec(-5.0..5.0f64, 3), -1.0..1.0f64, 0.1..2.0f64), 4..20),
    ) {
        let offspring: Vec<Offspring> = gen.iter().map(|(p, l, s)| Offspring { point: p.clone(), loss: *l, sigma: *s }).collect();
        let mut state = TbpsaState::new(vec![0.0; 3], offspring.len(), false);
        state.update(&offspring);
        let mut order: Vec<&Offspring> = offspring.iter().collect();
        order.sort_by(|a, b| a.loss.total_cmp(&b.loss));
        let mu = (offspring.len() as f64 / 4.0).ceil() as usize;
        let elite = &order[..mu];
        for j in 0..3 {
            let lo = elite.iter().map(|o| o.point[j]).fold(f64::INFINITY, f64::min);
            let hi = elite.iter().map(|o| o.point[j]).fold(f64::NEG_INFINITY, f64::max);
            let mean = elite.iter().map(|o| o.point[j]).sum::<f64>() / mu as f64;
            prop_assert!(state.center[j] >= lo - 1e-12 && state.center[j] <= hi + 1e-12);
            prop_assert!((state.center[j] - mean).abs() < 1e-12);
        }
        let sigma = (elite.iter().map(|o| o.sigma.ln()).sum::<f64>() / mu as f64).exp();
        prop_assert!((state.sigma - sigma).abs() < 1e-12 * sigma);
    }
}
