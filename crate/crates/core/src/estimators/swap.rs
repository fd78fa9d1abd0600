use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::engine::{Experiment, Mixer};
use super::EstimatorResult;
use crate::fock::{
    local_cumulative, prepare_raw, tensor, truncation_weight, AsEnsemble, CutoffSpec, FockState, GateSpec, PrepKind,
    ProductState,
};
use crate::sampling::Seed;
use crate::{tensor as dense, Error, Result, C64};

/// Detector threshold for multi-pair parity tests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// Pair `p` keeps shots with `n_a + n_b <= 2 M_p`.
    PerPair(Vec<usize>),
    /// Keeps shots whose photon count summed over all paired modes is at most `2 M`.
    Total(usize),
    Unbounded,
}

/// Per-mode cutoffs under which balanced beamsplitters on `pairs` act
/// exactly: both modes of a pair get the sum of their cutoffs.
pub fn pair_padding(cutoffs: &[usize], pairs: &[(usize, usize)]) -> Vec<usize> {
    let mut pad = cutoffs.to_vec();
    for &(a, b) in pairs {
        pad[a] = cutoffs[a] + cutoffs[b];
        pad[b] = pad[a];
    }
    pad
}

fn check_pairs(modes: usize, pairs: &[(usize, usize)], threshold: &Threshold) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::invalid("no mode pairs given"));
    }
    let mut used = vec![false; modes];
    for &(a, b) in pairs {
        for m in [a, b] {
            if m >= modes {
                return Err(Error::invalid(format!("pair mode {m} out of range for {modes} modes")));
            }
            if std::mem::replace(&mut used[m], true) {
                return Err(Error::invalid(format!("mode {m} appears in more than one pair")));
            }
        }
    }
    if let Threshold::PerPair(ms) = threshold {
        if ms.len() != pairs.len() {
            return Err(Error::invalid(format!("{} thresholds for {} pairs", ms.len(), pairs.len())));
        }
    }
    Ok(())
}

/// Parity test across `pairs`: `BS(pi/4, 0)^+` on each pair `(a, b)`, then
/// every shot scores `(-1)^(sum of n_a)` when inside the threshold and zero
/// otherwise.
pub fn parity_experiment(input: &ProductState, pairs: &[(usize, usize)], threshold: &Threshold) -> Result<Experiment> {
    parity_experiment_after(input, &[], pairs, threshold)
}

/// As [`parity_experiment`], with `prelude` gates applied to the input
/// before the beamsplitters. Prelude gates see the padded cutoffs.
pub fn parity_experiment_after(
    input: &ProductState,
    prelude: &[GateSpec],
    pairs: &[(usize, usize)],
    threshold: &Threshold,
) -> Result<Experiment> {
    check_pairs(input.modes(), pairs, threshold)?;
    for g in prelude {
        g.validate(input.modes())?;
    }
    let pad = pair_padding(&input.per_mode_max(), pairs);
    let mixer: Vec<Mixer> = prelude
        .iter()
        .cloned()
        .map(Mixer::Gate)
        .chain(pairs.iter().map(|&(a, b)| Mixer::Gate(GateSpec::beamsplitter(PI / 4.0, PI, a, b))))
        .collect();
    let pairs_owned = pairs.to_vec();
    let threshold_owned = threshold.clone();
    let score = move |modes: &[usize], counts: &[usize]| -> (C64, bool) {
        let mut odd = false;
        let mut discarded = false;
        let mut total = 0;
        for (p, &(a, b)) in pairs_owned.iter().enumerate() {
            let Some(ia) = modes.iter().position(|&m| m == a) else { continue };
            let ib = modes.iter().position(|&m| m == b).expect("paired modes share a group");
            let (na, nb) = (counts[ia], counts[ib]);
            odd ^= na % 2 == 1;
            total += na + nb;
            if let Threshold::PerPair(ms) = &threshold_owned {
                discarded |= na + nb > 2 * ms[p];
            }
        }
        if let Threshold::Total(m) = threshold_owned {
            discarded |= total > 2 * m;
        }
        let w = if discarded {
            0.0
        } else if odd {
            -1.0
        } else {
            1.0
        };
        (C64::new(w, 0.0), discarded)
    };
    let single = matches!(threshold, Threshold::Total(_));
    Experiment::build(input, &pad, &mixer, single, Box::new(score))
}

pub fn parity_overlap_estimate(
    input: &ProductState,
    pairs: &[(usize, usize)],
    threshold: &Threshold,
    shots: u64,
    seed: u64,
) -> Result<EstimatorResult> {
    parity_experiment(input, pairs, threshold)?.estimate(shots, Seed::new(seed))
}

/// Exact expectation `tr(prod_p SWAP_{2M_p} rho)` of the parity estimator.
pub fn parity_overlap_exact(input: &ProductState, pairs: &[(usize, usize)], threshold: &Threshold) -> Result<f64> {
    Ok(parity_experiment(input, pairs, threshold)?.exact().re)
}

fn single_mode_ensemble<P: AsEnsemble<FockState> + ?Sized>(p: &P, what: &str) -> Result<crate::fock::MixedEnsemble> {
    let e = p.as_ensemble().into_owned();
    if e.first().modes() != 1 {
        return Err(Error::shape(format!("{what} must be single-mode")));
    }
    Ok(e)
}

pub fn cv_swap_experiment<A, B>(a: &A, b: &B, m: usize) -> Result<Experiment>
where
    A: AsEnsemble<FockState> + ?Sized,
    B: AsEnsemble<FockState> + ?Sized,
{
    let input = ProductState::from_factors(vec![single_mode_ensemble(a, "A")?, single_mode_ensemble(b, "B")?])?;
    parity_experiment(&input, &[(0, 1)], &Threshold::PerPair(vec![m]))
}

/// Ancilla-free CV SWAP test of two single-mode preparations with detector
/// threshold `2m`.
pub fn cv_swap_estimate<A, B>(a: &A, b: &B, m: usize, shots: u64, seed: u64) -> Result<EstimatorResult>
where
    A: AsEnsemble<FockState> + ?Sized,
    B: AsEnsemble<FockState> + ?Sized,
{
    cv_swap_experiment(a, b, m)?.estimate(shots, Seed::new(seed))
}

/// Exact `tr(SWAP_2M rho)` for a two-mode input, from the post-beamsplitter
/// photon statistics. Amplitudes are used as given (no renormalisation).
pub fn swap2m_expectation(joint: &FockState, m: usize) -> Result<f64> {
    if joint.modes() != 2 {
        return Err(Error::shape("swap2m_expectation needs a two-mode state"));
    }
    parity_overlap_exact(&ProductState::from(joint.clone()), &[(0, 1)], &Threshold::PerPair(vec![m]))
}

/// `<psi| prod_p SWAP_p Q |psi>` evaluated directly on the amplitudes, with
/// `Q` the threshold projector. No beamsplitter is involved.
pub fn swap_expectation_direct(joint: &FockState, pairs: &[(usize, usize)], threshold: &Threshold) -> Result<f64> {
    check_pairs(joint.modes(), pairs, threshold)?;
    let dims = joint.dims();
    let strides = dense::strides(&dims);
    let amps = joint.amplitudes();
    let mut pattern = vec![0; dims.len()];
    let mut acc = C64::new(0.0, 0.0);
    'outer: for (i, a) in amps.iter().enumerate() {
        if a.re == 0.0 && a.im == 0.0 {
            continue;
        }
        dense::decode_into(i, &dims, &mut pattern);
        let mut total = 0;
        for (p, &(x, y)) in pairs.iter().enumerate() {
            let s = pattern[x] + pattern[y];
            total += s;
            if let Threshold::PerPair(ms) = threshold {
                if s > 2 * ms[p] {
                    continue 'outer;
                }
            }
        }
        if let Threshold::Total(m) = threshold {
            if total > 2 * m {
                continue;
            }
        }
        for &(x, y) in pairs {
            pattern.swap(x, y);
        }
        if pattern.iter().zip(&dims).any(|(n, d)| n >= d) {
            continue;
        }
        acc += amps[dense::encode(&pattern, &strides)].conj() * a;
    }
    Ok(acc.re)
}

/// `1 - q_2M` of a two-mode state: the weight above total photon number `2m`.
pub fn error_bound_global(joint: &FockState, m: usize) -> Result<f64> {
    if joint.modes() != 2 {
        return Err(Error::shape("error_bound_global needs a two-mode state"));
    }
    Ok(1.0 - truncation_weight(joint, &[0, 1], 2 * m)?)
}

/// `1 - q^rho_M q^sigma_M`.
pub fn error_bound_local<A, B>(rho: &A, sigma: &B, m: usize) -> Result<f64>
where
    A: AsEnsemble<FockState> + ?Sized,
    B: AsEnsemble<FockState> + ?Sized,
{
    let qa = local_cumulative(&single_mode_ensemble(rho, "rho")?, 0, m)?;
    let qb = local_cumulative(&single_mode_ensemble(sigma, "sigma")?, 0, m)?;
    Ok(1.0 - qa * qb)
}

pub fn analytic_squeezed_overlap(r: f64) -> f64 {
    1.0 / (2.0 * r).cosh()
}

/// `tr(SWAP_2M S(r)|0><0|S(r)^+ x S(-r)|0><0|S(-r)^+)`.
pub fn analytic_swap2m_squeezed(r: f64, m: usize) -> f64 {
    let tail = r.tanh().powi(2 * (m as i32 + 1));
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    (1.0 + sign * tail) / (2.0 * r).cosh()
}

/// Squeezed and anti-squeezed vacuum `S(r)|0> x S(-r)|0>`, truncated at `n`
/// photons per mode without renormalisation.
pub fn squeezed_pair_raw(r: f64, n: usize) -> Result<FockState> {
    let c = CutoffSpec::new(vec![n])?;
    let a = prepare_raw(&PrepKind::Squeezed { z: C64::new(r, 0.0) }, &c)?;
    let b = prepare_raw(&PrepKind::Squeezed { z: C64::new(-r, 0.0) }, &c)?;
    Ok(tensor(&a, &b))
}
