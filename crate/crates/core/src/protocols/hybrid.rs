//! SWAP test on qubit (x) CV-mode inputs. A qubit is carried as a Fock mode
//! with cutoff 1, so an input is a two-mode state on `(qubit, mode)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dv::{qubit_bell_matrix, BellOutcome};
use crate::estimators::{pair_padding, EstimatorResult, Experiment, Mixer};
use crate::fock::{AsEnsemble, FockState, GateSpec, MixedEnsemble, PhotonPattern, ProductState};
use crate::sampling::Seed;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HybridOutcome {
    pub bell: BellOutcome,
    pub photons: PhotonPattern,
}

// global modes: A = 0, B = 1, A' = 2, B' = 3
pub struct HybridSwapTest {
    experiment: Experiment,
}

fn hybrid_factor<P: AsEnsemble<FockState> + ?Sized>(p: &P, what: &str) -> Result<MixedEnsemble> {
    let e = p.as_ensemble().into_owned();
    let s = e.first();
    if s.modes() != 2 || s.cutoff().max(0) != 1 {
        return Err(Error::shape(format!("{what} must be a qubit (cutoff 1) followed by one CV mode")));
    }
    Ok(e)
}

impl HybridSwapTest {
    pub fn new<A, B>(a: &A, b: &B, m: usize) -> Result<Self>
    where
        A: AsEnsemble<FockState> + ?Sized,
        B: AsEnsemble<FockState> + ?Sized,
    {
        let input = ProductState::from_factors(vec![hybrid_factor(a, "state A")?, hybrid_factor(b, "state B")?])?;
        let pad = pair_padding(&input.per_mode_max(), &[(1, 3)]);
        let mixer = vec![
            Mixer::Dense { modes: vec![0, 2], matrix: qubit_bell_matrix().adjoint() },
            Mixer::Gate(GateSpec::beamsplitter(PI / 4.0, PI, 1, 3)),
        ];
        let score = move |_: &[usize], c: &[usize]| -> (C64, bool) {
            // group modes come in factor order: A, B, A', B'
            let (i, nb, j, nb2) = (c[0], c[1], c[2], c[3]);
            if nb + nb2 > 2 * m {
                return (C64::new(0.0, 0.0), true);
            }
            let odd = (i * j + nb) % 2 == 1;
            (C64::new(if odd { -1.0 } else { 1.0 }, 0.0), false)
        };
        Ok(HybridSwapTest { experiment: Experiment::build(&input, &pad, &mixer, true, Box::new(score))? })
    }

    pub fn experiment(&self) -> &Experiment {
        &self.experiment
    }

    pub fn exact(&self) -> f64 {
        self.experiment.exact().re
    }

    pub fn estimate(&self, shots: u64, seed: u64) -> Result<EstimatorResult> {
        self.experiment.estimate(shots, Seed::new(seed))
    }

    pub fn outcomes(&self, shots: u64, seed: u64) -> Result<Vec<HybridOutcome>> {
        Ok(self
            .experiment
            .outcomes(shots, Seed::new(seed))?
            .into_iter()
            .map(|o| {
                let c = o.pattern.counts();
                HybridOutcome {
                    bell: BellOutcome { labels: vec![(c[0], c[2])] },
                    photons: PhotonPattern::new(vec![c[1], c[3]]),
                }
            })
            .collect())
    }
}

pub fn hybrid_swap_estimate<A, B>(a: &A, b: &B, m: usize, shots: u64, seed: u64) -> Result<EstimatorResult>
where
    A: AsEnsemble<FockState> + ?Sized,
    B: AsEnsemble<FockState> + ?Sized,
{
    HybridSwapTest::new(a, b, m)?.estimate(shots, seed)
}
