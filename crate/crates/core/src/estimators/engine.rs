//! Exact outcome distributions of "mix, then count photons" experiments on
//! product inputs, with per-outcome scoring.
//!
//! Factors of the input that are never linked by a mixer gate stay
//! independent, so each connected group is simulated on its own and the
//! groups are sampled on separate random streams.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::fock::{local_op, tensor, CutoffSpec, FockState, GateSpec, LocalOp, PhotonPattern, ProductState};
use crate::sampling::{estimator_statistics, CumulativeTable, Seed, ShotOutcome};
use crate::{Error, Result, C64};

use super::EstimatorResult;

/// Largest dense group the engine will simulate.
pub const MAX_GROUP_DIM: usize = 1 << 24;

/// Component combinations propagated concurrently before accumulation.
const COMBO_CHUNK: usize = 8;

/// One mixer element acting on global modes.
#[derive(Clone, Debug)]
pub enum Mixer {
    Gate(GateSpec),
    /// Matrix on the row-major local basis of `modes` at their padded cutoffs.
    Dense { modes: Vec<usize>, matrix: DMatrix<C64> },
}

impl Mixer {
    fn modes(&self) -> Vec<usize> {
        match self {
            Mixer::Gate(g) => g.modes(),
            Mixer::Dense { modes, .. } => modes.clone(),
        }
    }
}

/// Scores one group outcome: receives the group's global modes and the
/// photon counts on them (same order), returns the weight and whether the
/// shot is discarded by the detector threshold.
pub type Score = dyn Fn(&[usize], &[usize]) -> (C64, bool) + Send + Sync;

struct Group {
    modes: Vec<usize>,
    dims: Vec<usize>,
    probs: Vec<f64>,
    table: CumulativeTable,
    value: C64,
}

/// A fully simulated experiment: exact expectation plus a sampler.
pub struct Experiment {
    modes: usize,
    groups: Vec<Group>,
    score: Box<Score>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl Experiment {
    /// `pad[k]` is the cutoff global mode `k` is embedded into before mixing.
    /// With `single_group` all factors are simulated jointly, which scorers
    /// coupling every mode require.
    pub fn build(
        input: &ProductState,
        pad: &[usize],
        mixer: &[Mixer],
        single_group: bool,
        score: Box<Score>,
    ) -> Result<Self> {
        let n = input.modes();
        if pad.len() != n {
            return Err(Error::shape("padding length differs from mode count"));
        }
        let factors = input.factors();
        let mut owner = vec![0; n];
        for (f, (ms, _)) in factors.iter().enumerate() {
            for &m in ms {
                owner[m] = f;
            }
        }
        let mut uf = UnionFind((0..factors.len()).collect());
        for op in mixer {
            let ms = op.modes();
            if let Some(&bad) = ms.iter().find(|&&m| m >= n) {
                return Err(Error::invalid(format!("mixer mode {bad} out of range")));
            }
            for w in ms.windows(2) {
                uf.union(owner[w[0]], owner[w[1]]);
            }
        }
        if single_group {
            for f in 1..factors.len() {
                uf.union(0, f);
            }
        }
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut root_slot = vec![usize::MAX; factors.len()];
        for f in 0..factors.len() {
            let r = uf.find(f);
            if root_slot[r] == usize::MAX {
                root_slot[r] = members.len();
                members.push(Vec::new());
            }
            members[root_slot[r]].push(f);
        }

        let mut groups = Vec::with_capacity(members.len());
        for fs in members {
            let modes: Vec<usize> = fs.iter().flat_map(|&f| factors[f].0.iter().copied()).collect();
            let ops: Vec<&Mixer> =
                mixer.iter().filter(|op| op.modes().iter().all(|m| modes.contains(m))).collect();
            groups.push(simulate_group(input, &fs, modes, pad, &ops, score.as_ref())?);
        }
        Ok(Experiment { modes: n, groups, score })
    }

    /// Exact expectation of the shot weight under the unnormalised outcome
    /// distribution of the inputs as given.
    pub fn exact(&self) -> C64 {
        self.groups.iter().map(|g| g.value).product()
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Per-group outcome indices for each shot.
    fn draws(&self, shots: u64, seed: Seed) -> Result<Vec<Vec<usize>>> {
        if shots == 0 {
            return Err(Error::invalid("at least one shot is required"));
        }
        Ok(self.groups.iter().enumerate().map(|(b, g)| g.table.draw(shots, seed, b as u64)).collect())
    }

    fn pattern(&self, g: &Group, index: usize) -> Vec<usize> {
        crate::tensor::decode(index, &g.dims)
    }

    pub fn estimate(&self, shots: u64, seed: Seed) -> Result<EstimatorResult> {
        let draws = self.draws(shots, seed)?;
        let per_shot: Vec<(C64, bool)> = (0..shots as usize)
            .into_par_iter()
            .map(|s| {
                let mut w = C64::new(1.0, 0.0);
                let mut discarded = false;
                for (g, idx) in self.groups.iter().zip(&draws) {
                    let (v, d) = (self.score)(&g.modes, &self.pattern(g, idx[s]));
                    w *= v;
                    discarded |= d;
                }
                (w, discarded)
            })
            .collect();
        let weights: Vec<C64> = per_shot.iter().map(|(w, _)| *w).collect();
        let discarded = per_shot.iter().filter(|(_, d)| *d).count() as u64;
        let (mean, stderr) = estimator_statistics(&weights);
        Ok(EstimatorResult { mean, stderr, shots, discarded, seed: seed.root })
    }

    /// Global photon patterns of the shots `estimate` would score.
    pub fn outcomes(&self, shots: u64, seed: Seed) -> Result<Vec<ShotOutcome>> {
        let draws = self.draws(shots, seed)?;
        Ok((0..shots as usize)
            .map(|s| {
                let mut counts = vec![0; self.modes];
                for (g, idx) in self.groups.iter().zip(&draws) {
                    for (m, c) in g.modes.iter().zip(self.pattern(g, idx[s])) {
                        counts[*m] = c;
                    }
                }
                ShotOutcome { shot_index: s as u64, pattern: PhotonPattern::new(counts) }
            })
            .collect())
    }

    /// Normalised joint distribution over global patterns, for small
    /// experiments only (testing and inspection).
    pub fn distribution(&self) -> Result<Vec<(PhotonPattern, f64)>> {
        let total: usize = self.groups.iter().map(|g| g.probs.len()).product();
        if total > MAX_GROUP_DIM {
            return Err(Error::TooLarge { dim: total, limit: MAX_GROUP_DIM });
        }
        let mut out = vec![(vec![0; self.modes], 1.0)];
        for g in &self.groups {
            let norm: f64 = g.probs.iter().sum();
            let mut next = Vec::with_capacity(out.len() * g.probs.len());
            for (counts, p) in &out {
                for (i, q) in g.probs.iter().enumerate() {
                    let mut c: Vec<usize> = counts.clone();
                    for (m, k) in g.modes.iter().zip(self.pattern(g, i)) {
                        c[*m] = k;
                    }
                    next.push((c, p * q / norm));
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(|(c, p)| (PhotonPattern::new(c), p)).collect())
    }
}

fn simulate_group(
    input: &ProductState,
    factor_ids: &[usize],
    modes: Vec<usize>,
    pad: &[usize],
    ops: &[&Mixer],
    score: &Score,
) -> Result<Group> {
    let factors = input.factors();
    let padded = CutoffSpec::new(modes.iter().map(|&m| pad[m]).collect())?;
    let cutoffs = input.per_mode_max();
    for &m in &modes {
        if pad[m] < cutoffs[m] {
            return Err(Error::invalid(format!("padding {} below the cutoff of mode {m}", pad[m])));
        }
    }
    if padded.dim() > MAX_GROUP_DIM {
        return Err(Error::TooLarge { dim: padded.dim(), limit: MAX_GROUP_DIM });
    }
    let local = |g: usize| modes.iter().position(|&m| m == g).expect("mixer mode in group");
    let local_ops: Vec<LocalOp> = ops
        .iter()
        .map(|op| match op {
            Mixer::Gate(g) => local_op(&g.remapped(local), &padded),
            Mixer::Dense { modes: ms, matrix } => {
                let lm: Vec<usize> = ms.iter().map(|&m| local(m)).collect();
                let dim: usize = lm.iter().map(|&k| padded.max(k) + 1).product();
                if matrix.nrows() != dim || matrix.ncols() != dim {
                    return Err(Error::shape(format!("dense mixer is {}x{}, local space {dim}", matrix.nrows(), matrix.ncols())));
                }
                Ok(LocalOp::dense(lm, matrix.clone()))
            }
        })
        .collect::<Result<_>>()?;

    // every combination of ensemble components, in lexicographic order
    let counts: Vec<usize> = factor_ids.iter().map(|&f| factors[f].1.len()).collect();
    let n_combos: usize = counts.iter().product();
    let combo = |mut c: usize| -> Vec<usize> {
        let mut idx = vec![0; counts.len()];
        for k in (0..counts.len()).rev() {
            idx[k] = c % counts[k];
            c /= counts[k];
        }
        idx
    };
    let propagate = |c: usize| -> Result<(f64, FockState)> {
        let idx = combo(c);
        let mut weight = 1.0;
        let mut state: Option<FockState> = None;
        for (&f, &i) in factor_ids.iter().zip(&idx) {
            let (w, s) = &factors[f].1.components()[i];
            weight *= w;
            state = Some(match state {
                None => s.clone(),
                Some(acc) => tensor(&acc, s),
            });
        }
        let mut state = state.expect("group has a factor").embed(&padded)?;
        for op in &local_ops {
            state = op.apply(&state)?;
        }
        Ok((weight, state))
    };

    let mut probs: Vec<f64> = Vec::new();
    let mut dims = padded.dims();
    for start in (0..n_combos).step_by(COMBO_CHUNK) {
        let end = (start + COMBO_CHUNK).min(n_combos);
        let results: Vec<Result<(f64, FockState)>> = (start..end).into_par_iter().map(propagate).collect();
        for r in results {
            let (w, s) = r?;
            if probs.is_empty() {
                probs = vec![0.0; s.amplitudes().len()];
                dims = s.dims();
            }
            for (p, a) in probs.iter_mut().zip(s.amplitudes()) {
                *p += w * a.norm_sqr();
            }
        }
    }

    let mut value = C64::new(0.0, 0.0);
    let mut pattern = vec![0; dims.len()];
    for (i, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        crate::tensor::decode_into(i, &dims, &mut pattern);
        let (w, _) = score(&modes, &pattern);
        value += w * p;
    }
    let table = CumulativeTable::new(&probs)?;
    Ok(Group { modes, dims, probs, table, value })
}
