mod common;

use common::*;
use cvswap::estimators::*;
use cvswap::fock::{
    inner_product, prepare, prepare_raw, tensor, CutoffSpec, Ensemble, FockState, MixedEnsemble, PrepKind,
    ProductState,
};
use cvswap::sampling::Seed;
use cvswap::C64;
use proptest::prelude::*;

fn poisson_cdf(e: f64, m: usize) -> f64 {
    let mut term = (-e).exp();
    let mut acc = term;
    for k in 1..=m {
        term *= e / k as f64;
        acc += term;
    }
    acc
}

#[test]
fn overlap_at_full_threshold_and_the_sandwich() {
    let mut rng = rng(101);
    for k in 0..120 {
        let n = 1 + k % 10;
        let (a, b) = (random_state(&mut rng, &[n]), random_state(&mut rng, &[n]));
        let joint = tensor(&a, &b);
        let overlap = inner_product(&a, &b).unwrap().norm_sqr();
        assert!((swap2m_expectation(&joint, n).unwrap() - overlap).abs() < 1e-10);
        for m in 0..=n {
            let err = (overlap - swap2m_expectation(&joint, m).unwrap()).abs();
            let global = error_bound_global(&joint, m).unwrap();
            let local = error_bound_local(&a, &b, m).unwrap();
            assert!(err <= global + 1e-12, "n={n} m={m}: {err} > {global}");
            assert!(global <= local + 1e-12, "n={n} m={m}: {global} > {local}");
        }
    }
}

#[test]
fn shot_weights_are_unbiased() {
    let mut rng = rng(102);
    for m in [0, 1, 3, 6] {
        let a = random_mixture(&mut rng, &[6], 2);
        let b = random_state(&mut rng, &[5]);
        let exp = cv_swap_experiment(&a, &b, m).unwrap();
        let mut by_enumeration = 0.0;
        for (pattern, p) in exp.distribution().unwrap() {
            let c = pattern.counts();
            if c[0] + c[1] <= 2 * m {
                by_enumeration += p * if c[0] % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
        let direct: f64 = a
            .iter()
            .map(|(w, s)| {
                let joint = tensor(s, &b.embed(&CutoffSpec::new(vec![5]).unwrap()).unwrap());
                w * swap2m_expectation(&joint, m).unwrap()
            })
            .sum();
        assert!((by_enumeration - exp.exact().re).abs() < 1e-12);
        assert!((by_enumeration - direct).abs() < 1e-12, "m={m}: {by_enumeration} vs {direct}");
    }
}

#[test]
fn direct_oracle_matches_multi_pair_parity() {
    let mut rng = rng(103);
    let joint = random_state(&mut rng, &[2, 1, 2, 2]);
    for threshold in [Threshold::Unbounded, Threshold::PerPair(vec![1, 1]), Threshold::Total(2)] {
        let exact = parity_overlap_exact(&ProductState::from(joint.clone()), &[(0, 2), (1, 3)], &threshold).unwrap();
        let direct = swap_expectation_direct(&joint, &[(0, 2), (1, 3)], &threshold).unwrap();
        assert!((exact - direct).abs() < 1e-12, "{threshold:?}: {exact} vs {direct}");
    }
}

#[test]
fn estimates_are_deterministic_and_within_stderr() {
    let c = CutoffSpec::new(vec![16]).unwrap();
    let a = prepare(&PrepKind::Squeezed { z: C64::new(0.5, 0.0) }, &c).unwrap().state;
    let b = prepare(&PrepKind::Squeezed { z: C64::new(-0.5, 0.0) }, &c).unwrap().state;
    let r1 = cv_swap_estimate(&a, &b, 16, 50_000, 42).unwrap();
    let r2 = cv_swap_estimate(&a, &b, 16, 50_000, 42).unwrap();
    assert_eq!(r1, r2);
    let truth = analytic_squeezed_overlap(0.5);
    assert!((r1.mean.re - truth).abs() <= 5.0 * r1.stderr.unwrap());
    for w in cv_swap_experiment(&a, &b, 2).unwrap().outcomes(100, Seed::new(1)).unwrap() {
        assert!(w.pattern.counts().len() == 2);
    }
    let single = cv_swap_estimate(&a, &b, 16, 1, 42).unwrap();
    assert!(single.stderr.is_none());
}

#[test]
fn saturated_shots_count_in_the_denominator() {
    let c = CutoffSpec::new(vec![12]).unwrap();
    let a = prepare(&PrepKind::Coherent { alpha: C64::new(1.5, 0.0) }, &c).unwrap().state;
    let r = cv_swap_estimate(&a, &a, 1, 20_000, 5).unwrap();
    assert!(r.discarded > 0);
    assert_eq!(r.shots, 20_000);
    let exact = cv_swap_experiment(&a, &a, 1).unwrap().exact().re;
    assert!((r.mean.re - exact).abs() <= 5.0 * r.stderr.unwrap());
}

#[test]
fn single_pair_parity_is_the_cv_swap_test() {
    let mut rng = rng(104);
    let a = random_mixture(&mut rng, &[3], 2);
    let b = random_state(&mut rng, &[4]);
    let input = ProductState::from_factors(vec![a.clone(), MixedEnsemble::pure(b.clone())]).unwrap();
    let p = parity_overlap_estimate(&input, &[(0, 1)], &Threshold::PerPair(vec![2]), 3_000, 8).unwrap();
    assert_eq!(p, cv_swap_estimate(&a, &b, 2, 3_000, 8).unwrap());
}

#[test]
fn tmss_against_vacuum_pairs() {
    let r: f64 = 1.0;
    let c = CutoffSpec::uniform(2, 30).unwrap();
    let tmss = prepare(&PrepKind::Tmss { r }, &c).unwrap().state;
    let vac = FockState::vacuum(c);
    let one = ProductState::from_factors(vec![tmss.clone().into(), vac.clone().into()]).unwrap();
    let exact = parity_overlap_exact(&one, &[(0, 2), (1, 3)], &Threshold::Unbounded).unwrap();
    let renormalised = 1.0 / (0..=30).map(|n| r.tanh().powi(2 * n)).sum::<f64>();
    assert!((exact - renormalised).abs() < 1e-12);
    assert!((exact - 1.0 / r.cosh().powi(2)).abs() < 1e-7);

    let small = CutoffSpec::uniform(2, 8).unwrap();
    let t = prepare_raw(&PrepKind::Tmss { r }, &small).unwrap().normalized().unwrap();
    let v = FockState::vacuum(small);
    let two = ProductState::from_factors(vec![t.clone().into(), t.into(), v.clone().into(), v.into()]).unwrap();
    let exact = parity_overlap_exact(&two, &[(0, 4), (1, 5), (2, 6), (3, 7)], &Threshold::Unbounded).unwrap();
    let p0 = 1.0 / (0..=8).map(|n| r.tanh().powi(2 * n)).sum::<f64>();
    assert!((exact - p0 * p0).abs() < 1e-12);
}

#[test]
fn squeezed_pair_parity_structure() {
    for r in [0.8, 1.0, 1.2] {
        let joint = squeezed_pair_raw(r, 40).unwrap();
        let limit = analytic_squeezed_overlap(r);
        for m in 4..=20 {
            let v = swap2m_expectation(&joint, m).unwrap();
            assert!((v - analytic_swap2m_squeezed(r, m)).abs() < 10.0 * r.tanh().powi(82));
            assert_eq!(v > limit, m % 2 == 0);
            assert!((error_bound_global(&joint, m).unwrap() - squeezed_bound(r, m)).abs() < 1e-10);
        }
    }
}

#[test]
fn local_bound_of_coherent_pairs_is_poissonian() {
    let c = CutoffSpec::new(vec![40]).unwrap();
    for e in [0.5f64, 2.0, 6.0] {
        let a = prepare(&PrepKind::Coherent { alpha: C64::new(e.sqrt(), 0.0) }, &c).unwrap().state;
        let b = prepare(&PrepKind::Coherent { alpha: C64::new(-e.sqrt(), 0.0) }, &c).unwrap().state;
        for m in [1, 4, 10] {
            let want = 1.0 - poisson_cdf(e, m).powi(2);
            assert!((error_bound_local(&a, &b, m).unwrap() - want).abs() < 1e-9);
        }
    }
}

#[test]
fn squeezed_planner() {
    let plan = cutoff_for_squeezed(1.0, 0.01).unwrap();
    let scan = (0..).find(|&m| 1f64.tanh().powi(2 * (m as i32 + 1)) <= 0.01).unwrap();
    assert_eq!(plan.m, scan);
    assert_eq!(plan.method, PlanMethod::SqueezedClosedForm);
    for r in [1.5, 2.0, 3.0] {
        for eps in [0.1, 1e-3, 1e-6] {
            let minimal = cutoff_for_squeezed(r, eps).unwrap().m as f64;
            // the closed form is a real number; M itself is its ceiling
            assert!(squeezed_large_r_cutoff(r, eps).ceil() >= minimal, "r={r} eps={eps}");
        }
    }
    assert!(cutoff_for_squeezed(1.0, 1.5).is_err());
}

#[test]
fn chernoff_planner() {
    assert_eq!(chernoff_candidate(1.0, 0.1), 4);
    assert!(chernoff_bound(1.0, 4) < 0.1);
    for e in [2.0, 10.0] {
        let mut prev = 1.0;
        for m in (e as usize + 1)..(e as usize + 40) {
            let b = chernoff_bound(e, m);
            assert!(b < prev);
            prev = b;
        }
    }
    // the bound dominates the exact Poisson tail
    for m in 3..20 {
        assert!(1.0 - poisson_cdf(2.0, m).powi(2) <= 2.0 * chernoff_bound(2.0, m).sqrt() + 1e-15);
    }
}

#[test]
fn normal_planner() {
    let plan = cutoff_for_coherent_normal(100.0, 0.01).unwrap();
    assert!(1.0 - normal_cdf((plan.m as f64 - 100.0) / 10.0).powi(2) <= 0.01);
    assert_eq!(plan.method, PlanMethod::NormalQuantile);
    assert!(cutoff_for_coherent_normal(10.0, 0.01).is_err());
    let near_one = cutoff_for_coherent_normal(25.0, 1.0 - 1e-12).unwrap();
    assert!(near_one.m <= 25);
    for e in [25.0, 100.0, 400.0, 2500.0] {
        for eps in [1e-4, 1e-6, 1e-9, 1e-12] {
            let m = cutoff_for_coherent_normal(e, eps).unwrap().m as f64;
            let envelope = e + (std::f64::consts::PI * e / 8.0).sqrt() * (2.0 / eps).ln();
            assert!(m <= envelope.ceil(), "E={e} eps={eps}: {m} > {envelope}");
        }
    }
}

#[test]
fn weak_tail_bound_is_looser_than_chernoff() {
    // 1 - q_2M <= 1 - e^{-E/M}: valid but much weaker than the Chernoff bound
    for e in [1.0, 5.0, 20.0] {
        let m = chernoff_candidate(e, 1e-3);
        let weak = 1.0 - (-e / m as f64).exp();
        assert!(weak > chernoff_bound(e, m));
    }
}

#[test]
fn exact_tail_planner() {
    let joint = squeezed_pair_raw(0.7, 40).unwrap();
    let plan = cutoff_exact_tail(&joint, 1e-4).unwrap();
    assert!(error_bound_global(&joint, plan.m).unwrap() <= 1e-4);
    assert!(plan.m == 0 || error_bound_global(&joint, plan.m - 1).unwrap() > 1e-4);
}

#[test]
fn leak_warning_is_reported() {
    let p = prepare(&PrepKind::Coherent { alpha: C64::new(2.0, 0.0) }, &CutoffSpec::new(vec![12]).unwrap()).unwrap();
    assert!(p.warning);
    assert!(p.leak > 1e-6 && p.leak < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn per_shot_weights_are_bounded(seed in 0u64..1000, m in 0usize..5) {
        let mut rng = rng(seed);
        let a = random_state(&mut rng, &[4]);
        let b = random_state(&mut rng, &[4]);
        let exp = cv_swap_experiment(&a, &b, m).unwrap();
        let r = exp.estimate(64, Seed::new(seed)).unwrap();
        prop_assert!(r.mean.re.abs() <= 1.0 && r.mean.im == 0.0);
        prop_assert!(exp.exact().re.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn ensemble_linearity(seed in 0u64..1000, w in 0.05f64..0.95) {
        let mut rng = rng(seed);
        let (x, y, b) = (random_state(&mut rng, &[3]), random_state(&mut rng, &[3]), random_state(&mut rng, &[3]));
        let mix = Ensemble::new(vec![(w, x.clone()), (1.0 - w, y.clone())]).unwrap();
        let m = cv_swap_experiment(&mix, &b, 3).unwrap().exact().re;
        let lin = w * cv_swap_experiment(&x, &b, 3).unwrap().exact().re
            + (1.0 - w) * cv_swap_experiment(&y, &b, 3).unwrap().exact().re;
        prop_assert!((m - lin).abs() < 1e-12);
    }
}
