use std::borrow::Cow;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cutoff::{CutoffSpec, PhotonPattern};
use crate::tensor;
use crate::{Error, Result, C64};

/// Dense amplitude tensor over a truncated multimode Fock basis, stored
/// row-major (the last mode varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    cutoff: CutoffSpec,
    amplitudes: Vec<C64>,
    norm_sq: f64,
}

impl FockState {
    pub fn new(cutoff: CutoffSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != cutoff.dim() {
            return Err(Error::shape(format!(
                "{} amplitudes for a cutoff of dimension {}",
                amplitudes.len(),
                cutoff.dim()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("non-finite amplitude"));
        }
        let norm_sq = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        Ok(FockState { cutoff, amplitudes, norm_sq })
    }

    pub fn vacuum(cutoff: CutoffSpec) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff.dim()];
        amplitudes[0] = C64::new(1.0, 0.0);
        FockState { cutoff, amplitudes, norm_sq: 1.0 }
    }

    pub fn cutoff(&self) -> &CutoffSpec {
        &self.cutoff
    }

    pub fn modes(&self) -> usize {
        self.cutoff.modes()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cutoff.dims()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq - 1.0).abs() <= 1e-9
    }

    pub fn index_of(&self, pattern: &PhotonPattern) -> Result<usize> {
        pattern.check_within(&self.cutoff)?;
        Ok(tensor::encode(pattern.counts(), &tensor::strides(&self.dims())))
    }

    pub fn pattern_of(&self, index: usize) -> PhotonPattern {
        PhotonPattern::new(tensor::decode(index, &self.dims()))
    }

    pub fn amplitude(&self, pattern: &PhotonPattern) -> Result<C64> {
        Ok(self.amplitudes[self.index_of(pattern)?])
    }

    pub fn normalized(&self) -> Result<FockState> {
        if self.norm_sq <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / self.norm_sq.sqrt();
        FockState::new(self.cutoff.clone(), self.amplitudes.iter().map(|a| a * s).collect())
    }

    /// Zero-pads into a larger cutoff. Every new per-mode maximum must be at
    /// least the current one.
    pub fn embed(&self, cutoff: &CutoffSpec) -> Result<FockState> {
        if cutoff.modes() != self.modes()
            || cutoff.per_mode_max().iter().zip(self.cutoff.per_mode_max()).any(|(new, old)| new < old)
        {
            return Err(Error::shape(format!(
                "cannot embed cutoff {:?} into {:?}",
                self.cutoff.per_mode_max(),
                cutoff.per_mode_max()
            )));
        }
        if cutoff == &self.cutoff {
            return Ok(self.clone());
        }
        let new_strides = tensor::strides(&cutoff.dims());
        let old_dims = self.dims();
        let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff.dim()];
        let mut pattern = vec![0; self.modes()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            tensor::decode_into(i, &old_dims, &mut pattern);
            amplitudes[tensor::encode(&pattern, &new_strides)] = *a;
        }
        Ok(FockState { cutoff: cutoff.clone(), amplitudes, norm_sq: self.norm_sq })
    }

    /// Relabels modes: new mode `k` carries what was on old mode `perm[k]`.
    pub fn permute_modes(&self, perm: &[usize]) -> Result<FockState> {
        let mut seen = vec![false; self.modes()];
        if perm.len() != self.modes() {
            return Err(Error::shape("permutation length differs from mode count"));
        }
        for &p in perm {
            if p >= self.modes() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::invalid(format!("{perm:?} is not a permutation")));
            }
        }
        let (amplitudes, _) = tensor::permute_axes(&self.amplitudes, &self.dims(), perm);
        let cutoff = CutoffSpec::new(perm.iter().map(|&p| self.cutoff.max(p)).collect())?;
        Ok(FockState { cutoff, amplitudes, norm_sq: self.norm_sq })
    }

    /// Unnormalised distribution of the total photon number.
    pub fn total_photon_distribution(&self) -> Vec<f64> {
        let dims = self.dims();
        let mut pmf = vec![0.0; self.cutoff.total_max() + 1];
        let mut pattern = vec![0; dims.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            tensor::decode_into(i, &dims, &mut pattern);
            pmf[pattern.iter().sum::<usize>()] += a.norm_sqr();
        }
        pmf
    }

    /// Unnormalised marginal photon-number distribution of one mode.
    pub fn marginal_distribution(&self, mode: usize) -> Result<Vec<f64>> {
        if mode >= self.modes() {
            return Err(Error::invalid(format!("mode {mode} out of range")));
        }
        let dims = self.dims();
        let stride = tensor::strides(&dims)[mode];
        let mut pmf = vec![0.0; dims[mode]];
        for (i, a) in self.amplitudes.iter().enumerate() {
            pmf[(i / stride) % dims[mode]] += a.norm_sqr();
        }
        Ok(pmf)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<StateDocument>(text)?.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// On-disk form: `{modes, per_mode_max, amplitudes: [re0, im0, re1, ...]}`.
#[derive(Serialize, Deserialize)]
struct StateDocument {
    modes: usize,
    per_mode_max: Vec<usize>,
    amplitudes: Vec<f64>,
}

impl From<&FockState> for StateDocument {
    fn from(s: &FockState) -> Self {
        StateDocument {
            modes: s.modes(),
            per_mode_max: s.cutoff.per_mode_max().to_vec(),
            amplitudes: s.amplitudes.iter().flat_map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl TryFrom<StateDocument> for FockState {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        if doc.modes != doc.per_mode_max.len() {
            return Err(Error::shape("`modes` disagrees with `per_mode_max`"));
        }
        if doc.amplitudes.len() % 2 != 0 {
            return Err(Error::shape("interleaved amplitude list has odd length"));
        }
        let amps = doc.amplitudes.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
        FockState::new(CutoffSpec::new(doc.per_mode_max)?, amps)
    }
}

pub fn basis_state(pattern: &PhotonPattern, cutoff: &CutoffSpec) -> Result<FockState> {
    pattern.check_within(cutoff)?;
    let mut amplitudes = vec![C64::new(0.0, 0.0); cutoff.dim()];
    amplitudes[tensor::encode(pattern.counts(), &tensor::strides(&cutoff.dims()))] = C64::new(1.0, 0.0);
    FockState::new(cutoff.clone(), amplitudes)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &FockState, b: &FockState) -> Result<C64> {
    if a.cutoff != b.cutoff {
        return Err(Error::shape(format!(
            "inner product of cutoffs {:?} and {:?}",
            a.cutoff.per_mode_max(),
            b.cutoff.per_mode_max()
        )));
    }
    Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum())
}

pub fn tensor(a: &FockState, b: &FockState) -> FockState {
    let mut amplitudes = Vec::with_capacity(a.amplitudes.len() * b.amplitudes.len());
    for x in &a.amplitudes {
        amplitudes.extend(b.amplitudes.iter().map(|y| x * y));
    }
    FockState { cutoff: a.cutoff.join(&b.cutoff), amplitudes, norm_sq: a.norm_sq * b.norm_sq }
}

/// Weight of the state inside `sum(n_k for k in modes) <= threshold`.
pub fn truncation_weight(state: &FockState, modes: &[usize], threshold: usize) -> Result<f64> {
    if let Some(&bad) = modes.iter().find(|&&m| m >= state.modes()) {
        return Err(Error::invalid(format!("mode {bad} out of range")));
    }
    let dims = state.dims();
    let mut pattern = vec![0; dims.len()];
    let mut q = 0.0;
    for (i, a) in state.amplitudes.iter().enumerate() {
        tensor::decode_into(i, &dims, &mut pattern);
        if modes.iter().map(|&m| pattern[m]).sum::<usize>() <= threshold {
            q += a.norm_sqr();
        }
    }
    Ok(q)
}

/// Marginal photon-number CDF of one mode at `m`, for a pure state or an
/// ensemble.
pub fn local_cumulative<P: AsEnsemble<FockState> + ?Sized>(prep: &P, mode: usize, m: usize) -> Result<f64> {
    let ens = prep.as_ensemble();
    let mut q = 0.0;
    for (w, s) in ens.iter() {
        let pmf = s.marginal_distribution(mode)?;
        q += w * pmf.iter().take(m + 1).sum::<f64>();
    }
    Ok(q)
}

/// Shape compatibility required between the members of an ensemble.
pub trait EnsembleMember: Clone {
    fn same_shape(&self, other: &Self) -> bool;
}

impl EnsembleMember for FockState {
    fn same_shape(&self, other: &Self) -> bool {
        self.cutoff == other.cutoff
    }
}

/// Convex mixture of pure state preparations.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<S> {
    components: Vec<(f64, S)>,
}

pub type MixedEnsemble = Ensemble<FockState>;

impl<S: EnsembleMember> Ensemble<S> {
    pub fn new(components: Vec<(f64, S)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return Err(Error::invalid("empty ensemble"));
        };
        if components.iter().any(|(w, _)| !(*w > 0.0 && *w <= 1.0)) {
            return Err(Error::invalid("ensemble weights must lie in (0, 1]"));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("ensemble weights sum to {total}")));
        }
        if components.iter().any(|(_, s)| !s.same_shape(first)) {
            return Err(Error::shape("ensemble members differ in shape"));
        }
        Ok(Ensemble { components })
    }

    pub fn pure(state: S) -> Self {
        Ensemble { components: vec![(1.0, state)] }
    }

    pub fn components(&self) -> &[(f64, S)] {
        &self.components
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.components.iter().map(|(w, s)| (*w, s))
    }

    pub fn first(&self) -> &S {
        &self.components[0].1
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

impl<S: EnsembleMember> From<S> for Ensemble<S> {
    fn from(s: S) -> Self {
        Ensemble::pure(s)
    }
}

/// Anything that can be viewed as an ensemble: a pure state or a mixture.
pub trait AsEnsemble<S: EnsembleMember> {
    fn as_ensemble(&self) -> Cow<'_, Ensemble<S>>;
}

impl<S: EnsembleMember> AsEnsemble<S> for S {
    fn as_ensemble(&self) -> Cow<'_, Ensemble<S>> {
        Cow::Owned(Ensemble::pure(self.clone()))
    }
}

impl<S: EnsembleMember> AsEnsemble<S> for Ensemble<S> {
    fn as_ensemble(&self) -> Cow<'_, Ensemble<S>> {
        Cow::Borrowed(self)
    }
}

/// Product of independent preparations; each factor occupies an explicit
/// list of global modes and the lists partition `0..modes`.
#[derive(Clone, Debug)]
pub struct ProductState {
    factors: Vec<(Vec<usize>, MixedEnsemble)>,
    modes: usize,
}

impl ProductState {
    /// Factors laid out on consecutive modes.
    pub fn from_factors(factors: Vec<MixedEnsemble>) -> Result<Self> {
        let mut next = 0;
        let placed = factors
            .into_iter()
            .map(|f| {
                let m = f.first().modes();
                let modes = (next..next + m).collect();
                next += m;
                (modes, f)
            })
            .collect();
        Self::with_modes(placed)
    }

    pub fn with_modes(factors: Vec<(Vec<usize>, MixedEnsemble)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::invalid("empty product state"));
        }
        let modes: usize = factors.iter().map(|(m, _)| m.len()).sum();
        let mut seen = vec![false; modes];
        for (ms, f) in &factors {
            if ms.len() != f.first().modes() {
                return Err(Error::shape("factor mode list disagrees with its state"));
            }
            for &m in ms {
                if m >= modes || std::mem::replace(&mut seen[m], true) {
                    return Err(Error::invalid("factor mode lists must partition the modes"));
                }
            }
        }
        Ok(ProductState { factors, modes })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn factors(&self) -> &[(Vec<usize>, MixedEnsemble)] {
        &self.factors
    }

    /// Per-mode maximum photon number in global mode order.
    pub fn per_mode_max(&self) -> Vec<usize> {
        let mut out = vec![0; self.modes];
        for (ms, f) in &self.factors {
            for (k, &m) in ms.iter().enumerate() {
                out[m] = f.first().cutoff().max(k);
            }
        }
        out
    }

    /// Moves the content of global mode `k` to mode `map[k]`.
    pub fn relabel(&self, map: &[usize]) -> Result<Self> {
        if map.len() != self.modes {
            return Err(Error::shape("relabeling length differs from mode count"));
        }
        let factors = self
            .factors
            .iter()
            .map(|(ms, f)| (ms.iter().map(|&m| map[m]).collect(), f.clone()))
            .collect();
        Self::with_modes(factors)
    }

    /// Concatenates two products; `other`'s modes are shifted past ours.
    pub fn join(&self, other: &ProductState) -> ProductState {
        let mut factors = self.factors.clone();
        factors.extend(
            other.factors.iter().map(|(ms, f)| (ms.iter().map(|m| m + self.modes).collect(), f.clone())),
        );
        ProductState { factors, modes: self.modes + other.modes }
    }
}

impl From<FockState> for ProductState {
    fn from(s: FockState) -> Self {
        let modes = s.modes();
        ProductState { factors: vec![((0..modes).collect(), Ensemble::pure(s))], modes }
    }
}

impl From<MixedEnsemble> for ProductState {
    fn from(e: MixedEnsemble) -> Self {
        let modes = e.first().modes();
        ProductState { factors: vec![((0..modes).collect(), e)], modes }
    }
}
