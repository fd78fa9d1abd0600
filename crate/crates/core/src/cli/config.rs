//! JSON run configuration shared by every subcommand.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dv::DvBasis;
use crate::estimators::Threshold;
use crate::fock::{
    apply_circuit, basis_state, prepare, tensor, CutoffSpec, Ensemble, FockState, GateSpec, MixedEnsemble,
    PhotonPattern, PrepKind, LEAK_ERROR,
};
use crate::{Error, Result, C64};

pub const DEFAULT_SHOTS: u64 = 1000;

/// Complex numbers are written as `[re, im]`; a bare number is read as real.
mod complex {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<C64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(x) => C64::new(x, 0.0),
            Repr::Pair([re, im]) => C64::new(re, im),
        })
    }
}

mod complex_vec {
    use super::*;

    #[derive(Deserialize)]
    struct Wrap(#[serde(with = "complex")] C64);

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<C64>, D::Error> {
        Ok(Vec::<Wrap>::deserialize(d)?.into_iter().map(|w| w.0).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    Vacuum {
        #[serde(default = "one")]
        modes: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Coherent {
        #[serde(with = "complex")]
        alpha: C64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Squeezed {
        #[serde(with = "complex")]
        z: C64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Tmss {
        r: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Fock {
        pattern: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cutoff: Option<usize>,
    },
    Amplitudes {
        cutoff: Vec<usize>,
        #[serde(with = "complex_vec")]
        amplitudes: Vec<C64>,
    },
    /// A qubit carried as a Fock mode with cutoff 1.
    Qubit {
        #[serde(with = "complex_vec")]
        amplitudes: Vec<C64>,
    },
    Product {
        factors: Vec<StateEntry>,
    },
    Mixture {
        components: Vec<Component>,
    },
    File {
        path: String,
    },
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub state: StateEntry,
}

/// A preparation followed by an optional circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    #[serde(flatten)]
    pub spec: StateSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub circuit: Vec<GateSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MSpec {
    Uniform(usize),
    PerPair(Vec<usize>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Squeezed,
    Coherent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanChoice {
    Chernoff,
    Normal,
}

/// One run description. Which fields matter depends on the subcommand.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<String>,
    /// Default per-mode cutoff for preparations that do not set one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<StateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(usize, usize)>>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<MSpec>,
    /// Threshold on the photon count summed over every pair.
    #[serde(rename = "M_total", default, skip_serializing_if = "Option::is_none")]
    pub m_total: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<PlanChoice>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<f64>>,
    #[serde(rename = "M_range", default, skip_serializing_if = "Option::is_none")]
    pub m_range: Option<[usize; 2]>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purification: Option<StateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,

    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub training: Vec<StateEntry>,
    #[serde(rename = "U", default, skip_serializing_if = "Vec::is_empty")]
    pub u: Vec<GateSpec>,
    #[serde(rename = "V", default, skip_serializing_if = "Vec::is_empty")]
    pub v: Vec<GateSpec>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<DvBasis>,

    /// Set by `--dump-shots`; never part of the document.
    #[serde(skip)]
    pub keep_shots: bool,
}

pub fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| config_error(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn shots(&self) -> Result<u64> {
        match self.shots.unwrap_or(DEFAULT_SHOTS) {
            0 => Err(config_error("shots must be at least 1")),
            s => Ok(s),
        }
    }

    pub fn runs(&self) -> Result<u64> {
        match self.runs.unwrap_or(1) {
            0 => Err(config_error("runs must be at least 1")),
            r => Ok(r),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Fills every defaulted scalar so the embedded copy is self-contained.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        c.shots.get_or_insert(DEFAULT_SHOTS);
        c.runs.get_or_insert(1);
        c.seed.get_or_insert(0);
        c
    }

    /// Threshold for `pairs` parity tests: `M` (one value or one per pair),
    /// `M_total`, or unbounded when neither is set.
    pub fn threshold(&self, pairs: usize) -> Result<Threshold> {
        match (&self.m, self.m_total) {
            (Some(_), Some(_)) => Err(config_error("set either M or M_total, not both")),
            (Some(MSpec::Uniform(m)), None) => Ok(Threshold::PerPair(vec![*m; pairs])),
            (Some(MSpec::PerPair(ms)), None) => {
                if ms.len() != pairs {
                    return Err(config_error(format!("{} thresholds for {pairs} pairs", ms.len())));
                }
                Ok(Threshold::PerPair(ms.clone()))
            }
            (None, Some(m)) => Ok(Threshold::Total(m)),
            (None, None) => Ok(Threshold::Unbounded),
        }
    }

    fn cutoff_or(&self, own: Option<usize>, what: &str) -> Result<usize> {
        own.or(self.cutoff).ok_or_else(|| config_error(format!("{what} needs a cutoff (per state or top-level)")))
    }

    /// Builds a preparation; `warnings` collects leak warnings.
    pub fn build(&self, entry: &StateEntry, warnings: &mut Vec<String>) -> Result<MixedEnsemble> {
        let base = match &entry.spec {
            StateSpec::Mixture { components } => {
                if !entry.circuit.is_empty() {
                    return Err(config_error("put circuits on mixture components, not on the mixture"));
                }
                let mut out = Vec::with_capacity(components.len());
                for c in components {
                    let e = self.build(&c.state, warnings)?;
                    if e.len() != 1 {
                        return Err(config_error("mixture components must be pure"));
                    }
                    out.push((c.weight, e.first().clone()));
                }
                return Ensemble::new(out).map_err(|e| config_error(e.to_string()));
            }
            spec => self.build_pure(spec, warnings)?,
        };
        Ok(MixedEnsemble::pure(run_circuit(&base, &entry.circuit, warnings)?))
    }

    fn build_pure(&self, spec: &StateSpec, warnings: &mut Vec<String>) -> Result<FockState> {
        let mut prep = |kind: PrepKind, cutoff: CutoffSpec| -> Result<FockState> {
            let p = prepare(&kind, &cutoff)?;
            if p.warning {
                warnings.push(format!("{kind:?}: truncation leak {:.3e}", p.leak));
            }
            Ok(p.state)
        };
        match spec {
            StateSpec::Vacuum { modes, cutoff } => {
                Ok(FockState::vacuum(CutoffSpec::uniform(*modes, self.cutoff_or(*cutoff, "vacuum")?)?))
            }
            StateSpec::Coherent { alpha, cutoff } => {
                prep(PrepKind::Coherent { alpha: *alpha }, CutoffSpec::new(vec![self.cutoff_or(*cutoff, "coherent")?])?)
            }
            StateSpec::Squeezed { z, cutoff } => {
                prep(PrepKind::Squeezed { z: *z }, CutoffSpec::new(vec![self.cutoff_or(*cutoff, "squeezed")?])?)
            }
            StateSpec::Tmss { r, cutoff } => {
                prep(PrepKind::Tmss { r: *r }, CutoffSpec::uniform(2, self.cutoff_or(*cutoff, "tmss")?)?)
            }
            StateSpec::Fock { pattern, cutoff } => {
                let n = match cutoff.or(self.cutoff) {
                    Some(n) => n,
                    None => pattern.iter().copied().max().unwrap_or(0),
                };
                basis_state(&PhotonPattern::new(pattern.clone()), &CutoffSpec::uniform(pattern.len(), n)?)
            }
            StateSpec::Amplitudes { cutoff, amplitudes } => {
                FockState::new(CutoffSpec::new(cutoff.clone())?, amplitudes.clone())?.normalized()
            }
            StateSpec::Qubit { amplitudes } => {
                if amplitudes.len() != 2 {
                    return Err(config_error("a qubit has two amplitudes"));
                }
                FockState::new(CutoffSpec::new(vec![1])?, amplitudes.clone())?.normalized()
            }
            StateSpec::Product { factors } => {
                let mut acc: Option<FockState> = None;
                for f in factors {
                    let e = self.build(f, warnings)?;
                    if e.len() != 1 {
                        return Err(config_error("product factors must be pure"));
                    }
                    let s = e.first().clone();
                    acc = Some(match acc {
                        None => s,
                        Some(a) => tensor(&a, &s),
                    });
                }
                acc.ok_or_else(|| config_error("empty product"))
            }
            StateSpec::File { path } => FockState::load(path),
            StateSpec::Mixture { .. } => unreachable!("handled by build"),
        }
    }
}

/// Applies `gates`, renormalising and rejecting a norm loss above the hard
/// leak limit.
pub fn run_circuit(state: &FockState, gates: &[GateSpec], warnings: &mut Vec<String>) -> Result<FockState> {
    if gates.is_empty() {
        return Ok(state.clone());
    }
    let out = apply_circuit(state, gates)?;
    let leak = (state.norm_sq() - out.norm_sq()).max(0.0);
    if leak > LEAK_ERROR {
        return Err(Error::LeakTooLarge { leak, limit: LEAK_ERROR });
    }
    if leak > crate::fock::LEAK_WARN {
        warnings.push(format!("circuit truncation leak {leak:.3e}"));
    }
    out.normalized()
}
