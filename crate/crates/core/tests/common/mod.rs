#![allow(dead_code)]

use cvswap::fock::{CutoffSpec, Ensemble, FockState, MixedEnsemble};
use cvswap::C64;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn random_state(rng: &mut ChaCha8Rng, cutoff: &[usize]) -> FockState {
    let cutoff = CutoffSpec::new(cutoff.to_vec()).unwrap();
    let amps = gaussian_vector(rng, cutoff.dim());
    FockState::new(cutoff, amps).unwrap()
}

pub fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| 0.1 + rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    let mut w: Vec<f64> = w.into_iter().map(|x| x / total).collect();
    // keep the sum within the ensemble tolerance
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    w
}

pub fn random_mixture(rng: &mut ChaCha8Rng, cutoff: &[usize], rank: usize) -> MixedEnsemble {
    let w = random_weights(rng, rank);
    Ensemble::new(w.into_iter().map(|p| (p, random_state(rng, cutoff))).collect()).unwrap()
}

pub fn density(e: &MixedEnsemble) -> DMatrix<C64> {
    let dim = e.first().amplitudes().len();
    let mut rho = DMatrix::zeros(dim, dim);
    for (w, s) in e.iter() {
        let v = DMatrix::from_column_slice(dim, 1, s.amplitudes());
        rho += &v * v.adjoint() * C64::new(w, 0.0);
    }
    rho
}

pub fn max_dev(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}
