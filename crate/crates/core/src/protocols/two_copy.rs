//! Two-copy test for `|<Psi| PERM_A |Psi>|^2` on a register ordered
//! `A_1 B_1 ... A_n B_n`.
//!
//! The second copy lives on modes `2n..4n`. `PERM_{A'}` never becomes a
//! gate: the second copy's `A_j` factor is simply placed on the global mode
//! of `A'_{j+1}`.

use crate::estimators::{parity_experiment, parity_experiment_after, EstimatorResult, Experiment, Threshold};
use crate::fock::{FockState, GateSpec, MixedEnsemble, ProductState};
use crate::sampling::Seed;
use crate::{Error, Result};

fn check(psi: &FockState) -> Result<usize> {
    let modes = psi.modes();
    if modes % 2 != 0 || modes < 4 {
        return Err(Error::shape(format!("register of {modes} modes is not A_1 B_1 ... A_n B_n with n >= 2")));
    }
    if !psi.is_normalized() {
        return Err(Error::invalid("two-copy input is not normalised"));
    }
    Ok(modes / 2)
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..2 * n).map(|k| (k, 2 * n + k)).collect()
}

/// Global mode of local mode `k` of the permuted second copy.
fn primed_mode(k: usize, n: usize) -> usize {
    if k % 2 == 0 {
        2 * n + 2 * ((k / 2 + 1) % n)
    } else {
        2 * n + k
    }
}

pub fn two_copy_experiment(psi: &FockState) -> Result<Experiment> {
    let n = check(psi)?;
    let first = (0..2 * n).collect();
    let second = (0..2 * n).map(|k| primed_mode(k, n)).collect();
    let input = ProductState::with_modes(vec![
        (first, MixedEnsemble::pure(psi.clone())),
        (second, MixedEnsemble::pure(psi.clone())),
    ])?;
    parity_experiment(&input, &pairs(n), &Threshold::Unbounded)
}

pub fn two_copy_test(psi: &FockState, shots: u64, seed: u64) -> Result<EstimatorResult> {
    two_copy_experiment(psi)?.estimate(shots, Seed::new(seed))
}

/// Reference path: the same test with `PERM_{A'}` realised by a chain of
/// mode swaps on the second copy.
pub fn two_copy_experiment_with_gates(psi: &FockState) -> Result<Experiment> {
    let n = check(psi)?;
    let input = ProductState::from_factors(vec![MixedEnsemble::pure(psi.clone()), MixedEnsemble::pure(psi.clone())])?;
    // SWAP_{A'_1 A'_2} ... SWAP_{A'_{n-1} A'_n} applied right to left
    let chain: Vec<GateSpec> =
        (0..n - 1).rev().map(|j| GateSpec::mode_swap(2 * n + 2 * j, 2 * n + 2 * j + 2)).collect();
    parity_experiment_after(&input, &chain, &pairs(n), &Threshold::Unbounded)
}

/// `|psi>_{AB}^{(x) n}` on `A_1 B_1 ... A_n B_n`.
pub fn replicate_purification(psi: &FockState, n: usize) -> Result<FockState> {
    if psi.modes() != 2 || n < 2 {
        return Err(Error::shape("need a two-mode purification and n >= 2"));
    }
    let mut out = psi.clone();
    for _ in 1..n {
        out = crate::fock::tensor(&out, psi);
    }
    Ok(out)
}
