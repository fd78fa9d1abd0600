use rayon::prelude::*;
use serde::Serialize;

use crate::estimators::{parity_experiment, EstimatorResult, Threshold};
use crate::fock::{apply_circuit, FockState, GateSpec, MixedEnsemble, ProductState, LEAK_ERROR};
use crate::sampling::Seed;
use crate::{Error, Result};

/// Sampled and exact compiling cost over a training set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompileCost {
    pub cost: f64,
    pub exact_cost: f64,
    pub terms: Vec<EstimatorResult>,
    pub exact_terms: Vec<f64>,
    /// Largest norm lost to the cutoff by either circuit.
    pub leak: f64,
}

fn check_a_only(gates: &[GateSpec], which: &str) -> Result<()> {
    for g in gates {
        g.validate(2)?;
        if g.modes() != [0] {
            return Err(Error::invalid(format!("{which} gate {g:?} touches the reference mode")));
        }
    }
    Ok(())
}

/// `1 - (1/K) sum_j |<psi_j| U^+ V |psi_j>|^2` estimated with a parity test
/// on the pairs `(A, A')` and `(R, R')` for every training state on `A R`.
/// Term `j` draws from the seed derived with label `j`. Circuit outputs are
/// renormalised after truncation; a norm loss above the hard leak limit is
/// an error.
pub fn compile_cost(
    training: &[FockState],
    u_gates: &[GateSpec],
    v_gates: &[GateSpec],
    threshold: &Threshold,
    shots_per_term: u64,
    seed: u64,
) -> Result<CompileCost> {
    if training.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    check_a_only(u_gates, "U")?;
    check_a_only(v_gates, "V")?;
    let root = Seed::new(seed);
    let run = |psi: &FockState, gates: &[GateSpec]| -> Result<(FockState, f64)> {
        let out = apply_circuit(psi, gates)?;
        let leak = (psi.norm_sq() - out.norm_sq()).max(0.0);
        if leak > LEAK_ERROR {
            return Err(Error::LeakTooLarge { leak, limit: LEAK_ERROR });
        }
        Ok((out.normalized()?, leak))
    };
    let terms: Vec<(EstimatorResult, f64, f64)> = training
        .par_iter()
        .enumerate()
        .map(|(j, psi)| {
            if psi.modes() != 2 {
                return Err(Error::shape(format!("training state {j} is not a two-mode state")));
            }
            let (left, leak_u) = run(psi, u_gates)?;
            let (right, leak_v) = run(psi, v_gates)?;
            let input = ProductState::from_factors(vec![MixedEnsemble::pure(left), MixedEnsemble::pure(right)])?;
            let exp = parity_experiment(&input, &[(0, 2), (1, 3)], threshold)?;
            Ok((exp.estimate(shots_per_term, root.derive(j as u64))?, exp.exact().re, leak_u.max(leak_v)))
        })
        .collect::<Result<_>>()?;
    let k = terms.len() as f64;
    let cost = 1.0 - terms.iter().map(|(r, _, _)| r.mean.re).sum::<f64>() / k;
    let exact_cost = 1.0 - terms.iter().map(|(_, e, _)| e).sum::<f64>() / k;
    let leak = terms.iter().map(|(_, _, l)| *l).fold(0.0, f64::max);
    let (terms, exact_terms) = terms.into_iter().map(|(r, e, _)| (r, e)).unzip();
    Ok(CompileCost { cost, exact_cost, terms, exact_terms, leak })
}
