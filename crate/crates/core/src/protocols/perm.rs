use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::estimators::{EstimatorResult, Experiment, Mixer};
use crate::fock::{rectangular_decompose, AsEnsemble, FockState, GateSpec, PhotonPattern, ProductState};
use crate::sampling::Seed;
use crate::{Error, Result, C64};

/// A detected pattern of the PERM test and its eigenvalue weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermOutcomeWeight {
    pub pattern: PhotonPattern,
    pub weight: C64,
}

/// `F[k][j] = w^{jk} / sqrt L`.
pub fn dft_matrix(l: usize) -> DMatrix<C64> {
    let s = 1.0 / (l as f64).sqrt();
    DMatrix::from_fn(l, l, |k, j| C64::from_polar(s, TAU * ((j * k) % l) as f64 / l as f64))
}

/// `e^{2 pi i k / L}` for `k < L`, exact at quarter turns so that `L = 2`
/// produces the same +-1 weights as the parity estimator.
pub fn roots_of_unity(l: usize) -> Vec<C64> {
    (0..l)
        .map(|k| {
            if (4 * k) % l == 0 {
                [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][4 * k / l]
            } else {
                C64::from_polar(1.0, TAU * k as f64 / l as f64)
            }
        })
        .collect()
}

/// Single-particle action of the mixer. The shift `a_j -> a_{j-1}` has
/// eigenmodes `b_k = sum_j w^{jk} a_j / sqrt L` with eigenvalue `w^k`, and
/// `conj(F)` maps `b_k` onto mode `k`. The rows are then reversed so that
/// eigenmode `L - 1 - j` lands on detector `j`, which makes the `L = 2`
/// mixer exactly `BS(pi/4, pi)`.
pub fn perm_mixer_matrix(l: usize) -> DMatrix<C64> {
    let f = dft_matrix(l);
    DMatrix::from_fn(l, l, |r, c| f[(l - 1 - r, c)].conj())
}

/// Mixer circuit: the rectangular mesh of the mixer's adjoint, inverted.
pub fn perm_mixer_gates(l: usize) -> Result<Vec<GateSpec>> {
    if l < 2 {
        return Err(Error::invalid("the PERM test needs at least two modes"));
    }
    if l == 2 {
        return Ok(vec![GateSpec::beamsplitter(PI / 4.0, PI, 0, 1)]);
    }
    let mesh = rectangular_decompose(&perm_mixer_matrix(l).adjoint())?;
    Ok(mesh.iter().rev().map(GateSpec::inverse).collect())
}

/// Compiled PERM test on `L` single-mode inputs.
pub struct PermTest {
    experiment: Experiment,
    roots: Vec<C64>,
}

impl PermTest {
    pub fn new<P: AsEnsemble<FockState>>(states: &[P]) -> Result<Self> {
        let l = states.len();
        let gates = perm_mixer_gates(l)?;
        let mut factors = Vec::with_capacity(l);
        for (k, s) in states.iter().enumerate() {
            let e = s.as_ensemble().into_owned();
            if e.first().modes() != 1 {
                return Err(Error::shape(format!("PERM input {k} is not single-mode")));
            }
            factors.push(e);
        }
        let cutoff = factors[0].first().cutoff().max(0);
        if let Some(k) = factors.iter().position(|f| f.first().cutoff().max(0) != cutoff) {
            return Err(Error::shape(format!("PERM input {k} has a different cutoff from input 0")));
        }
        let input = ProductState::from_factors(factors)?;
        let pad = vec![cutoff * l; l];
        let roots = roots_of_unity(l);
        let table = roots.clone();
        let score = move |modes: &[usize], counts: &[usize]| -> (C64, bool) {
            let k: usize = modes.iter().zip(counts).map(|(&m, &n)| (l - 1 - m) * n).sum();
            (table[k % l], false)
        };
        let mixer: Vec<Mixer> = gates.into_iter().map(Mixer::Gate).collect();
        Ok(PermTest { experiment: Experiment::build(&input, &pad, &mixer, true, Box::new(score))?, roots })
    }

    /// Exact `tr(rho_0 rho_1 ... rho_{L-1})`.
    pub fn experiment(&self) -> &Experiment {
        &self.experiment
    }

    pub fn exact(&self) -> C64 {
        self.experiment.exact()
    }

    pub fn estimate(&self, shots: u64, seed: u64) -> Result<EstimatorResult> {
        self.experiment.estimate(shots, Seed::new(seed))
    }

    pub fn outcomes(&self, shots: u64, seed: u64) -> Result<Vec<PermOutcomeWeight>> {
        let l = self.roots.len();
        Ok(self
            .experiment
            .outcomes(shots, Seed::new(seed))?
            .into_iter()
            .map(|o| {
                let k: usize = o.pattern.counts().iter().enumerate().map(|(j, n)| (l - 1 - j) * n).sum();
                PermOutcomeWeight { weight: self.roots[k % l], pattern: o.pattern }
            })
            .collect())
    }
}

pub fn perm_test<P: AsEnsemble<FockState>>(states: &[P], shots: u64, seed: u64) -> Result<EstimatorResult> {
    PermTest::new(states)?.estimate(shots, seed)
}
