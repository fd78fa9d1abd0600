//! Counter-based shot sampling. Every draw is a pure function of
//! `(root seed, stream id, shot index)`, so the outcome sequence does not
//! depend on how shots are split across threads.

use std::io::Write;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fock::{FockState, PhotonPattern};
use crate::{Error, Result, C64};

/// Probabilities below this are treated as exactly zero.
pub const PROB_FLOOR: f64 = 1e-300;

const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Seed {
    pub root: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(root: u64) -> Self {
        Seed { root }
    }

    /// Independent child seed, e.g. one per run or per protocol term.
    pub fn derive(self, label: u64) -> Seed {
        let mut s = self.root ^ label.wrapping_mul(0xD6E8_FEB8_6659_FD93);
        splitmix64(&mut s);
        Seed { root: splitmix64(&mut s) }
    }

    fn generator(self, stream: u64, first_shot: u64) -> ChaCha8Rng {
        let mut s = self.root;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        // each shot consumes one 64-bit output, i.e. two 32-bit words
        rng.set_word_pos(u128::from(first_shot) * 2);
        rng
    }

    /// The uniform in `[0, 1)` assigned to `(stream, shot)`.
    pub fn uniform(self, stream: u64, shot: u64) -> f64 {
        to_unit(self.generator(stream, shot).next_u64())
    }

    /// Uniforms for shots `first..first + count` on one stream.
    pub fn uniforms(self, stream: u64, first: u64, count: usize) -> Vec<f64> {
        let mut rng = self.generator(stream, first);
        (0..count).map(|_| to_unit(rng.next_u64())).collect()
    }
}

fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF table over a finite outcome set.
#[derive(Clone, Debug)]
pub struct CumulativeTable {
    cdf: Vec<f64>,
}

impl CumulativeTable {
    /// Builds from non-negative (not necessarily normalised) weights.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("probability weights must be finite and non-negative"));
        }
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if w >= PROB_FLOOR {
                acc += w;
                last_positive = Some(i);
            }
            cdf.push(acc);
        }
        let Some(last) = last_positive else {
            return Err(Error::ZeroNorm);
        };
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        for c in &mut cdf[last..] {
            *c = 1.0;
        }
        Ok(CumulativeTable { cdf })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    /// Outcome for a uniform `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u)
    }

    /// Outcome indices for `shots` draws on `stream`.
    pub fn draw(&self, shots: u64, seed: Seed, stream: u64) -> Vec<usize> {
        let n_chunks = (shots as usize).div_ceil(CHUNK);
        let chunks: Vec<Vec<usize>> = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let first = (c * CHUNK) as u64;
                let count = CHUNK.min(shots as usize - c * CHUNK);
                seed.uniforms(stream, first, count).into_iter().map(|u| self.sample(u)).collect()
            })
            .collect();
        chunks.concat()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShotOutcome {
    pub shot_index: u64,
    pub pattern: PhotonPattern,
}

/// Born-rule distribution over the truncated basis, renormalised.
pub fn probability_vector(state: &FockState) -> Result<Vec<f64>> {
    let mut p: Vec<f64> = state
        .amplitudes()
        .iter()
        .map(|a| {
            let q = a.norm_sqr();
            if q < PROB_FLOOR {
                0.0
            } else {
                q
            }
        })
        .collect();
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    for x in &mut p {
        *x /= total;
    }
    Ok(p)
}

pub fn sample_patterns(state: &FockState, shots: u64, seed: Seed) -> Result<Vec<ShotOutcome>> {
    if shots == 0 {
        return Err(Error::invalid("at least one shot is required"));
    }
    let table = CumulativeTable::new(&probability_vector(state)?)?;
    Ok(table
        .draw(shots, seed, 0)
        .into_iter()
        .enumerate()
        .map(|(i, k)| ShotOutcome { shot_index: i as u64, pattern: state.pattern_of(k) })
        .collect())
}

/// Sample mean and standard error of the mean. The error combines the real
/// and imaginary sample variances (`n - 1` denominator) and is `None` for a
/// single sample.
pub fn estimator_statistics(weights: &[C64]) -> (C64, Option<f64>) {
    let n = weights.len();
    if n == 0 {
        return (C64::new(f64::NAN, f64::NAN), None);
    }
    let mean = weights.iter().sum::<C64>() / n as f64;
    if n == 1 {
        return (mean, None);
    }
    let ss: f64 = weights.iter().map(|w| (w - mean).norm_sqr()).sum();
    (mean, Some((ss / (n - 1) as f64 / n as f64).sqrt()))
}

/// Writes `shot_index,n0,n1,...` rows with a header.
pub fn write_shots_csv<W: Write>(out: W, outcomes: &[ShotOutcome]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let modes = outcomes.first().map_or(0, |o| o.pattern.counts().len());
    let mut header = vec!["shot_index".to_string()];
    header.extend((0..modes).map(|k| format!("n{k}")));
    w.write_record(&header)?;
    for o in outcomes {
        let mut row = vec![o.shot_index.to_string()];
        row.extend(o.pattern.counts().iter().map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniforms_are_addressable_by_shot() {
        let seed = Seed::new(42);
        let run = seed.uniforms(3, 0, 100);
        for (i, u) in run.iter().enumerate() {
            assert_eq!(*u, seed.uniform(3, i as u64));
            assert!((0.0..1.0).contains(u));
        }
        assert_ne!(seed.uniform(3, 0), seed.uniform(4, 0));
        assert_ne!(seed.uniform(3, 0), Seed::new(43).uniform(3, 0));
    }

    #[test]
    fn draws_do_not_depend_on_thread_count() {
        let table = CumulativeTable::new(&[0.1, 0.0, 0.4, 0.5]).unwrap();
        let a = table.draw(20_000, Seed::new(9), 0);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| table.draw(20_000, Seed::new(9), 0));
        assert_eq!(a, b);
        assert!(!a.contains(&1));
    }

    #[test]
    fn table_handles_edges() {
        let t = CumulativeTable::new(&[0.0, 2.0, 0.0]).unwrap();
        assert_eq!(t.sample(0.0), 1);
        assert_eq!(t.sample(0.999_999_999), 1);
        assert!(CumulativeTable::new(&[0.0, 0.0]).is_err());
        assert!(CumulativeTable::new(&[1.0, -0.1]).is_err());
    }

    #[test]
    fn statistics() {
        let (m, e) = estimator_statistics(&[C64::new(0.5, 0.0); 10]);
        assert_eq!(m, C64::new(0.5, 0.0));
        assert_eq!(e, Some(0.0));
        assert_eq!(estimator_statistics(&[C64::new(1.0, 0.0)]).1, None);
        let pm: Vec<C64> = (0..1000).map(|i| C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
        let (m, e) = estimator_statistics(&pm);
        assert_eq!(m.re, 0.0);
        assert!((e.unwrap() - 1.0 / 1000f64.sqrt()).abs() < 1e-3);
    }

    #[test]
    fn derived_seeds_differ() {
        let s = Seed::new(1);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(5), s.derive(5));
    }
}
