use std::f64::consts::PI;

use cvswap::fock::{
    apply_circuit, apply_gate, basis_state, compose_single_particle, gate_matrix, inner_product, prepare,
    prepare_raw, rectangular_decompose, tensor, truncation_weight, CutoffSpec, FockState, GateSpec, MeshStats,
    PhotonPattern, PrepKind,
};
use cvswap::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn cut(v: &[usize]) -> CutoffSpec {
    CutoffSpec::new(v.to_vec()).unwrap()
}

fn annihilation(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n + 1, n + 1, |r, c| if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

fn dag(a: &DMatrix<C64>) -> DMatrix<C64> {
    a.adjoint()
}

/// Compares two matrices on basis states whose total photon number is at most
/// `safe`, for an `n_modes`-mode space with per-mode cutoff `n`.
fn safe_deviation(a: &DMatrix<C64>, b: &DMatrix<C64>, n: usize, n_modes: usize, safe: usize) -> f64 {
    let total = |mut i: usize| {
        let mut t = 0;
        for _ in 0..n_modes {
            t += i % (n + 1);
            i /= n + 1;
        }
        t
    };
    let mut worst: f64 = 0.0;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            if total(r) <= safe && total(c) <= safe {
                worst = worst.max((a[(r, c)] - b[(r, c)]).norm());
            }
        }
    }
    worst
}

fn single_mode_generators(n: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let a = annihilation(n);
    let ad = dag(&a);
    (a, ad)
}

#[test]
fn single_mode_gates_match_matrix_exponential() {
    let n = 12;
    let (a, ad) = single_mode_generators(n);
    let num = &ad * &a;
    for alpha in [C64::new(0.3, 0.2), C64::new(-0.5, 0.1), C64::new(0.0, -0.45)] {
        let gen = &ad * alpha - &a * alpha.conj();
        let exact = gate_matrix(&GateSpec::displacement(alpha, 0), &cut(&[n])).unwrap();
        assert!(safe_deviation(&exact, &gen.exp(), n, 1, n / 2) < 1e-8, "displacement {alpha}");
    }
    // the a^2 generator couples far up the ladder, so only weak squeezing
    // stays clean inside the cutoff-12 safe region
    for z in [C64::new(0.02, 0.0), C64::from_polar(0.03, 1.1), C64::new(-0.025, 0.0)] {
        let gen = (&a * &a * z.conj() - &ad * &ad * z) * C64::new(0.5, 0.0);
        let exact = gate_matrix(&GateSpec::squeeze(z, 0), &cut(&[n])).unwrap();
        let dev = safe_deviation(&exact, &gen.exp(), n, 1, n / 2);
        assert!(dev < 1e-8, "squeeze {z}: {dev}");
    }
    for phi in [0.0, 0.4, 2.0, 5.9] {
        let gen = &num * C64::new(0.0, -phi);
        let exact = gate_matrix(&GateSpec::phase(phi, 0), &cut(&[n])).unwrap();
        assert!(safe_deviation(&exact, &gen.exp(), n, 1, n) < 1e-12);
    }
}

#[test]
fn two_mode_gates_match_matrix_exponential() {
    let n = 10;
    let (a, _) = single_mode_generators(n);
    let id = DMatrix::<C64>::identity(n + 1, n + 1);
    let (a1, a2) = (kron(&a, &id), kron(&id, &a));
    let (a1d, a2d) = (dag(&a1), dag(&a2));
    for (theta, phi) in [(PI / 4.0, 0.0), (0.3, 1.2), (PI / 2.0, 1.5 * PI), (2.5, 4.0)] {
        let e = C64::from_polar(1.0, phi);
        let gen = (&a1d * &a2 * e - &a2d * &a1 * e.conj()) * C64::new(theta, 0.0);
        let exact = gate_matrix(&GateSpec::beamsplitter(theta, phi, 0, 1), &cut(&[n, n])).unwrap();
        // number blocks up to the single-mode cutoff are complete, so the two agree there
        assert!(safe_deviation(&exact, &gen.exp(), n, 2, n) < 1e-10, "beamsplitter {theta} {phi}");
    }
    for r in [0.1, -0.15, 0.2] {
        let gen = (&a1 * &a2 - &a1d * &a2d) * C64::new(r, 0.0);
        let exact = gate_matrix(&GateSpec::two_mode_squeeze(r, 0, 1), &cut(&[n, n])).unwrap();
        let dev = safe_deviation(&exact, &gen.exp(), n, 2, n / 2);
        assert!(dev < 1e-8, "two-mode squeeze {r}: {dev}");
    }
}

/// `<m|D|n> = (sqrt(m) <m-1|D|n-1> - conj(alpha) <m|D|n-1>) / sqrt(n)`, seeded
/// with the coherent-state column.
fn displacement_by_ladder(alpha: C64, n: usize) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(n + 1, n + 1);
    let mut amp = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for m in 0..=n {
        if m > 0 {
            amp *= alpha / (m as f64).sqrt();
        }
        d[(m, 0)] = amp;
    }
    for c in 1..=n {
        for m in 0..=n {
            let up = if m > 0 { d[(m - 1, c - 1)] * (m as f64).sqrt() } else { C64::new(0.0, 0.0) };
            d[(m, c)] = (up - alpha.conj() * d[(m, c - 1)]) / (c as f64).sqrt();
        }
    }
    d
}

/// Strong-parameter check: the exponential is taken on a much larger
/// truncation and compared on the low-photon corner of a cutoff-12 matrix.
#[test]
fn squeeze_matches_wide_exponential() {
    let (n, wide) = (12, 60);
    let (a, ad) = single_mode_generators(wide);
    for z in [C64::new(0.3, 0.0), C64::from_polar(0.5, 2.0), C64::new(-0.4, 0.0)] {
        let gen = (&a * &a * z.conj() - &ad * &ad * z) * C64::new(0.5, 0.0);
        let big = gen.exp();
        let exact = gate_matrix(&GateSpec::squeeze(z, 0), &cut(&[n])).unwrap();
        let corner = big.view((0, 0), (n + 1, n + 1)).into_owned();
        let dev = (&exact - &corner).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "squeeze {z}: {dev}");
    }
}

#[test]
fn displacement_matches_ladder_recurrence() {
    for alpha in [C64::new(1.0, 0.0), C64::new(-0.7, 1.3), C64::new(0.1, -2.0)] {
        let n = 30;
        let exact = gate_matrix(&GateSpec::displacement(alpha, 0), &cut(&[n])).unwrap();
        let ladder = displacement_by_ladder(alpha, n);
        let dev = (&exact - &ladder).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "alpha {alpha}: {dev}");
    }
}

#[test]
fn coherent_overlap_closed_form() {
    let c = cut(&[30]);
    let pts = [C64::new(0.3, -0.8), C64::new(-1.0, 0.0), C64::new(0.5, 0.5), C64::new(0.0, 0.9)];
    for &a in &pts {
        for &b in &pts {
            let sa = prepare_raw(&PrepKind::Coherent { alpha: a }, &c).unwrap();
            let sb = prepare_raw(&PrepKind::Coherent { alpha: b }, &c).unwrap();
            let expected = (-(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b).exp();
            assert!((inner_product(&sa, &sb).unwrap() - expected).norm() < 1e-10);
        }
    }
}

fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    let ln: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    (-lambda + k as f64 * lambda.ln() - ln).exp()
}

#[test]
fn coherent_photon_statistics_are_poisson() {
    let s = prepare(&PrepKind::Coherent { alpha: C64::new(0.6, 0.8) }, &cut(&[30])).unwrap().state;
    for (k, p) in s.marginal_distribution(0).unwrap().iter().enumerate() {
        assert!((p - poisson_pmf(1.0, k)).abs() < 1e-10);
    }
    // q_2M of a coherent pair is the Poisson(|a|^2 + |b|^2) CDF
    let a = prepare_raw(&PrepKind::Coherent { alpha: C64::new(0.9, 0.0) }, &cut(&[30])).unwrap();
    let b = prepare_raw(&PrepKind::Coherent { alpha: C64::new(0.0, 1.2) }, &cut(&[30])).unwrap();
    let joint = tensor(&a, &b);
    let lambda = 0.81 + 1.44;
    for m in 0..8 {
        let cdf: f64 = (0..=2 * m).map(|k| poisson_pmf(lambda, k)).sum();
        assert!((truncation_weight(&joint, &[0, 1], 2 * m).unwrap() - cdf).abs() < 1e-10);
    }
}

#[test]
fn tmss_truncation_weight_closed_form() {
    let r: f64 = 0.9;
    let s = prepare_raw(&PrepKind::Tmss { r }, &cut(&[80, 80])).unwrap();
    for m in 0..15 {
        let q = truncation_weight(&s, &[0, 1], 2 * m).unwrap();
        assert!((1.0 - q - r.tanh().powi(2 * (m as i32 + 1))).abs() < 1e-12);
    }
}

#[test]
fn swap_identity_is_the_fock_permutation() {
    let c = cut(&[5, 5]);
    let gates = [GateSpec::beamsplitter(PI / 2.0, 1.5 * PI, 0, 1), GateSpec::phase(1.5 * PI, 0), GateSpec::phase(1.5 * PI, 1)];
    let phase = gate_matrix(&gates[1], &cut(&[5])).unwrap();
    let total = phase.kronecker(&phase) * gate_matrix(&gates[0], &c).unwrap();
    let swap = gate_matrix(&GateSpec::mode_swap(0, 1), &c).unwrap();
    let dev = (&total - &swap).iter().map(|x| x.norm()).fold(0.0, f64::max);
    assert!(dev < 1e-12, "{dev}");
}

#[test]
fn balanced_beamsplitter_outputs_are_swap_eigenvectors() {
    let n = 8;
    let c = cut(&[n, n]);
    for t in 0..=n {
        for p in 0..=t {
            let s = basis_state(&PhotonPattern::new(vec![p, t - p]), &c).unwrap();
            let out = apply_gate(&s, &GateSpec::beamsplitter(PI / 4.0, 0.0, 0, 1)).unwrap();
            let swapped = apply_gate(&out, &GateSpec::mode_swap(0, 1)).unwrap();
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            for (x, y) in swapped.amplitudes().iter().zip(out.amplitudes()) {
                assert!((x - y * sign).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn random_unitary_mesh_recomposes() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for l in [3, 4, 6, 7] {
        let g = DMatrix::from_fn(l, l, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let q = g.qr().q();
        let gates = rectangular_decompose(&q).unwrap();
        let back = compose_single_particle(&gates, l).unwrap();
        let dev = (&back - &q).iter().map(|x| x.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-10, "L = {l}: {dev}");
        let stats = MeshStats::of(&gates, l);
        assert!(stats.beamsplitters <= l * (l - 1) / 2);
        assert!(stats.depth <= 4 * l + 4, "depth {} for L = {l}", stats.depth);
    }
}

#[test]
fn empty_circuit_is_identity() {
    let s = prepare(&PrepKind::Squeezed { z: C64::new(0.4, 0.0) }, &cut(&[20])).unwrap().state;
    assert_eq!(apply_circuit(&s, &[]).unwrap(), s);
}

fn state_strategy(dims: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)), dims)
}

fn passive_gate() -> impl Strategy<Value = GateSpec> {
    prop_oneof![
        (0.0..PI, 0.0..(2.0 * PI)).prop_map(|(t, p)| GateSpec::beamsplitter(t, p, 0, 1)),
        (0.0..(2.0 * PI), 0usize..2).prop_map(|(p, m)| GateSpec::phase(p, m)),
        Just(GateSpec::mode_swap(0, 1)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn number_conserving_gates_preserve_total_photon_distribution(
        amps in state_strategy(49),
        gates in prop::collection::vec(passive_gate(), 1..5),
    ) {
        let s = FockState::new(cut(&[6, 6]), amps).unwrap();
        let out = apply_circuit(&s, &gates).unwrap();
        let before = s.total_photon_distribution();
        let after = out.total_photon_distribution();
        // complete number blocks only
        for t in 0..=6 {
            prop_assert!((before[t] - after[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn passive_circuit_then_inverse_is_identity(
        amps in state_strategy(36),
        gates in prop::collection::vec(passive_gate(), 1..6),
    ) {
        let s = FockState::new(cut(&[5, 5]), amps).unwrap();
        let low = FockState::new(
            s.cutoff().clone(),
            s.amplitudes().iter().enumerate()
                .map(|(i, a)| if i / 6 + i % 6 <= 5 { *a } else { C64::new(0.0, 0.0) })
                .collect(),
        ).unwrap();
        let inverse: Vec<GateSpec> = gates.iter().rev().map(|g| g.inverse()).collect();
        let back = apply_circuit(&apply_circuit(&low, &gates).unwrap(), &inverse).unwrap();
        for (x, y) in back.amplitudes().iter().zip(low.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn inner_product_is_sesquilinear(
        a in state_strategy(8), b in state_strategy(8), c in state_strategy(8),
        (x, y) in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let cc = cut(&[7]);
        let (a, b, c) = (
            FockState::new(cc.clone(), a).unwrap(),
            FockState::new(cc.clone(), b).unwrap(),
            FockState::new(cc.clone(), c).unwrap(),
        );
        let k = C64::new(x, y);
        let ab = inner_product(&a, &b).unwrap();
        prop_assert!((ab - inner_product(&b, &a).unwrap().conj()).norm() < 1e-12);
        let comb = FockState::new(cc, b.amplitudes().iter().zip(c.amplitudes()).map(|(p, q)| p * k + q).collect()).unwrap();
        let lhs = inner_product(&a, &comb).unwrap();
        let rhs = ab * k + inner_product(&a, &c).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
        prop_assert!(ab.norm_sqr() <= a.norm_sq() * b.norm_sq() * (1.0 + 1e-12));
    }

    #[test]
    fn truncation_weight_is_monotone(amps in state_strategy(36)) {
        let s = FockState::new(cut(&[5, 5]), amps).unwrap().normalized().unwrap();
        let mut last = 0.0;
        for t in 0..=10 {
            let q = truncation_weight(&s, &[0, 1], t).unwrap();
            prop_assert!(q + 1e-15 >= last);
            last = q;
        }
        prop_assert!((last - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_norm_multiplies(a in state_strategy(4), b in state_strategy(3)) {
        let a = FockState::new(cut(&[3]), a).unwrap();
        let b = FockState::new(cut(&[2]), b).unwrap();
        let t = tensor(&a, &b);
        prop_assert_eq!(t.modes(), 2);
        prop_assert!((t.norm_sq() - a.norm_sq() * b.norm_sq()).abs() < 1e-12);
    }
}
