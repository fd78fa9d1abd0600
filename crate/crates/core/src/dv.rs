//! Qudit SWAP eigenbases and the destructive DV SWAP test.
//!
//! Clock and shift conventions: `Z(z)|i> = w^{zi}|i>` and `X(x)|i> = |i+x>`
//! with `w = e^{2 pi i / d}`, so `|Phi_{z,x}> = sum_i w^{zi} |i+x, i> / sqrt d`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::estimators::{EstimatorResult, Experiment, Mixer};
use crate::fock::{AsEnsemble, CutoffSpec, Ensemble, EnsembleMember, FockState, MixedEnsemble, ProductState};
use crate::sampling::Seed;
use crate::{Error, Result, C64};

/// Normalised pure state of a register of qudits.
#[derive(Clone, Debug, PartialEq)]
pub struct DVState {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

impl DVState {
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return Err(Error::invalid("qudit dimensions must be at least 2"));
        }
        let dim: usize = dims.iter().product();
        if amplitudes.len() != dim {
            return Err(Error::shape(format!("{} amplitudes for dimension {dim}", amplitudes.len())));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("qudit state has squared norm {norm}")));
        }
        Ok(DVState { dims, amplitudes })
    }

    pub fn basis(dims: Vec<usize>, labels: &[usize]) -> Result<Self> {
        if labels.len() != dims.len() || labels.iter().zip(&dims).any(|(l, d)| l >= d) {
            return Err(Error::invalid(format!("labels {labels:?} do not fit dimensions {dims:?}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dims.iter().product()];
        amps[crate::tensor::encode(labels, &crate::tensor::strides(&dims))] = C64::new(1.0, 0.0);
        DVState::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &DVState) -> DVState {
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        DVState { dims: [self.dims.clone(), other.dims.clone()].concat(), amplitudes }
    }

    pub fn inner(&self, other: &DVState) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::shape("qudit registers differ"));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// The same amplitudes viewed as a Fock state with cutoff `d - 1` per mode.
    pub fn to_fock(&self) -> FockState {
        let cutoff = CutoffSpec::new(self.dims.iter().map(|d| d - 1).collect()).expect("non-empty dims");
        FockState::new(cutoff, self.amplitudes.clone()).expect("matching dimension")
    }
}

impl EnsembleMember for DVState {
    fn same_shape(&self, other: &Self) -> bool {
        self.dims == other.dims
    }
}

/// Per-pair Bell-measurement labels `(i_k, j_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BellOutcome {
    pub labels: Vec<(usize, usize)>,
}

fn omega(d: usize, k: usize) -> C64 {
    C64::from_polar(1.0, TAU * (k % d) as f64 / d as f64)
}

fn bell_vector(z: usize, x: usize, d: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); d * d];
    let s = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        v[((i + x) % d) * d + i] = omega(d, z * i) * s;
    }
    v
}

pub fn qudit_bell_state(z: usize, x: usize, d: usize) -> Result<DVState> {
    if d < 2 || z >= d || x >= d {
        return Err(Error::invalid(format!("Bell labels ({z}, {x}) outside Z_{d}")));
    }
    DVState::new(vec![d, d], bell_vector(z, x, d))
}

/// Which SWAP eigenbasis a qudit pair is measured in.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DvBasis {
    #[default]
    V,
    W,
}

/// Columns `V|i>|j>`: `|ii>`, and `(|ij> +- |ji>)/sqrt 2` with the minus
/// sign for `i > j`.
pub fn v_unitary(d: usize) -> Result<DMatrix<C64>> {
    if d < 2 {
        return Err(Error::invalid("qudit dimension must be at least 2"));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let col = i * d + j;
            if i == j {
                v[(col, col)] = C64::new(1.0, 0.0);
            } else {
                v[(i * d + j, col)] = C64::new(h, 0.0);
                v[(j * d + i, col)] = C64::new(if i < j { h } else { -h }, 0.0);
            }
        }
    }
    Ok(v)
}

/// The SWAP eigenbasis built from qudit Bell states: `Phi_{z,0}`, then for
/// even `d` the `Phi_{2z,d/2}`, then all `Omega+_{z,x}`, all `Omega-_{z,x}`,
/// and for even `d` the `Phi_{2z+1,d/2}`.
pub fn w_unitary(d: usize) -> Result<DMatrix<C64>> {
    if d < 2 {
        return Err(Error::invalid("qudit dimension must be at least 2"));
    }
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d * d);
    let even = d % 2 == 0;
    let x_max = if even { d / 2 - 1 } else { (d - 1) / 2 };
    for z in 0..d {
        cols.push(bell_vector(z, 0, d));
    }
    if even {
        for z in 0..d / 2 {
            cols.push(bell_vector(2 * z, d / 2, d));
        }
    }
    for sign in [1.0, -1.0] {
        for z in 0..d {
            for x in 1..=x_max {
                let a = bell_vector(z, x, d);
                let b = bell_vector(z, d - x, d);
                let ph = omega(d, d * d - (x * z) % d) * sign;
                cols.push(a.iter().zip(&b).map(|(p, q)| (p + ph * q) * std::f64::consts::FRAC_1_SQRT_2).collect());
            }
        }
    }
    if even {
        for z in 0..d / 2 {
            cols.push(bell_vector(2 * z + 1, d / 2, d));
        }
    }
    debug_assert_eq!(cols.len(), d * d);
    Ok(DMatrix::from_fn(d * d, d * d, |r, c| cols[c][r]))
}

/// SWAP eigenvalue of each column of the chosen basis.
pub fn basis_eigenvalues(basis: DvBasis, d: usize) -> Vec<i8> {
    match basis {
        DvBasis::V => (0..d * d).map(|c| if c / d > c % d { -1 } else { 1 }).collect(),
        DvBasis::W => {
            let even = d % 2 == 0;
            let x_max = if even { d / 2 - 1 } else { (d - 1) / 2 };
            let plus = d + if even { d / 2 } else { 0 } + d * x_max;
            (0..d * d).map(|c| if c < plus { 1 } else { -1 }).collect()
        }
    }
}

pub fn basis_matrix(basis: DvBasis, d: usize) -> Result<DMatrix<C64>> {
    match basis {
        DvBasis::V => v_unitary(d),
        DvBasis::W => w_unitary(d),
    }
}

/// The two-qubit Bell circuit `C = CNOT_{BA} H_B`: column `2i + j` is the
/// Bell state with shift `i` and phase `j`, whose SWAP eigenvalue is
/// `(-1)^{ij}`.
pub fn qubit_bell_matrix() -> DMatrix<C64> {
    let cols: Vec<Vec<C64>> = (0..4).map(|c| bell_vector(c % 2, c / 2, 2)).collect();
    DMatrix::from_fn(4, 4, |r, c| cols[c][r])
}

/// Checks that every column of `m` is a SWAP eigenvector (tolerance `tol`)
/// and returns the eigenvalue of each column.
pub fn swap_eigenvalues_of(m: &DMatrix<C64>, d: usize, tol: f64) -> Result<Vec<i8>> {
    if m.nrows() != d * d {
        return Err(Error::shape("basis matrix does not act on two qudits"));
    }
    let mut out = Vec::with_capacity(m.ncols());
    for c in 0..m.ncols() {
        let col = m.column(c);
        let swapped: Vec<C64> = (0..d * d).map(|r| col[(r % d) * d + r / d]).collect();
        let plus = swapped.iter().zip(col.iter()).all(|(s, v)| (s - v).norm() <= tol);
        let minus = swapped.iter().zip(col.iter()).all(|(s, v)| (s + v).norm() <= tol);
        out.push(match (plus, minus) {
            (true, _) => 1,
            (_, true) => -1,
            _ => return Err(Error::invalid(format!("column {c} is not a SWAP eigenvector"))),
        });
    }
    Ok(out)
}

/// Compiled destructive SWAP test between two `K`-qudit preparations.
pub struct DvSwapTest {
    experiment: Experiment,
    pairs: usize,
}

impl DvSwapTest {
    pub fn new<A, B>(a: &A, b: &B, basis: DvBasis) -> Result<Self>
    where
        A: AsEnsemble<DVState> + ?Sized,
        B: AsEnsemble<DVState> + ?Sized,
    {
        let (ea, eb) = (a.as_ensemble(), b.as_ensemble());
        let dims = ea.first().dims().to_vec();
        if eb.first().dims() != dims.as_slice() {
            return Err(Error::shape(format!("registers {dims:?} and {:?} differ", eb.first().dims())));
        }
        let k = dims.len();
        let to_fock = |e: &Ensemble<DVState>| -> Result<MixedEnsemble> {
            Ensemble::new(e.iter().map(|(w, s)| (w, s.to_fock())).collect())
        };
        let input = ProductState::from_factors(vec![to_fock(&ea)?, to_fock(&eb)?])?;
        let mut mixer = Vec::with_capacity(k);
        let mut eigen = Vec::with_capacity(k);
        for (p, &d) in dims.iter().enumerate() {
            mixer.push(Mixer::Dense { modes: vec![p, k + p], matrix: basis_matrix(basis, d)?.adjoint() });
            eigen.push(basis_eigenvalues(basis, d));
        }
        let score = move |modes: &[usize], counts: &[usize]| -> (C64, bool) {
            let mut w = 1.0;
            for (p, lam) in eigen.iter().enumerate() {
                if let Some(ia) = modes.iter().position(|&m| m == p) {
                    let ib = modes.iter().position(|&m| m == k + p).expect("pair in group");
                    let d = dims[p];
                    w *= f64::from(lam[counts[ia] * d + counts[ib]]);
                }
            }
            (C64::new(w, 0.0), false)
        };
        let pad = input.per_mode_max();
        Ok(DvSwapTest { experiment: Experiment::build(&input, &pad, &mixer, false, Box::new(score))?, pairs: k })
    }

    /// Probability-weighted eigenvalue sum, equal to `tr(rho sigma)`.
    pub fn experiment(&self) -> &Experiment {
        &self.experiment
    }

    pub fn exact(&self) -> f64 {
        self.experiment.exact().re
    }

    pub fn estimate(&self, shots: u64, seed: u64) -> Result<EstimatorResult> {
        self.experiment.estimate(shots, Seed::new(seed))
    }

    pub fn outcomes(&self, shots: u64, seed: u64) -> Result<Vec<BellOutcome>> {
        let k = self.pairs;
        Ok(self
            .experiment
            .outcomes(shots, Seed::new(seed))?
            .into_iter()
            .map(|o| BellOutcome { labels: (0..k).map(|p| (o.pattern.counts()[p], o.pattern.counts()[k + p])).collect() })
            .collect())
    }
}

pub fn dv_swap_estimate<A, B>(a: &A, b: &B, basis: DvBasis, shots: u64, seed: u64) -> Result<EstimatorResult>
where
    A: AsEnsemble<DVState> + ?Sized,
    B: AsEnsemble<DVState> + ?Sized,
{
    DvSwapTest::new(a, b, basis)?.estimate(shots, seed)
}
