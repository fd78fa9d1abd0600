use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::cutoff::CutoffSpec;
use super::state::FockState;
use crate::tensor::{self, Block};
use crate::{Error, Result, C64};

/// One linear-optical or Gaussian gate.
///
/// Conventions: `D(a) = exp(a a^+ - h.c.)`, `S(z) = exp((conj(z) a^2 - h.c.)/2)`,
/// `BS(theta, phi) = exp(theta (e^{i phi} a_i^+ a_j - h.c.))`,
/// phase rotation `exp(-i phi n)`, two-mode squeezing
/// `exp(r (a_i a_j - a_i^+ a_j^+))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateSpec {
    Displacement { alpha: C64, mode: usize },
    Squeeze { z: C64, mode: usize },
    Beamsplitter { theta: f64, phi: f64, modes: [usize; 2] },
    PhaseRotation { phi: f64, mode: usize },
    TwoModeSqueeze { r: f64, modes: [usize; 2] },
    ModeSwap { modes: [usize; 2] },
}

impl GateSpec {
    pub fn displacement(alpha: C64, mode: usize) -> Self {
        GateSpec::Displacement { alpha, mode }
    }

    pub fn squeeze(z: C64, mode: usize) -> Self {
        GateSpec::Squeeze { z, mode }
    }

    /// Beamsplitter with `theta < 0` folded into `phi + pi`, and `phi`
    /// reduced into `[0, 2 pi)`.
    pub fn beamsplitter(theta: f64, phi: f64, i: usize, j: usize) -> Self {
        GateSpec::Beamsplitter { theta, phi, modes: [i, j] }.canonical()
    }

    pub fn phase(phi: f64, mode: usize) -> Self {
        GateSpec::PhaseRotation { phi, mode }.canonical()
    }

    pub fn two_mode_squeeze(r: f64, i: usize, j: usize) -> Self {
        GateSpec::TwoModeSqueeze { r, modes: [i, j] }
    }

    pub fn mode_swap(i: usize, j: usize) -> Self {
        GateSpec::ModeSwap { modes: [i, j] }
    }

    pub fn modes(&self) -> Vec<usize> {
        match self {
            GateSpec::Displacement { mode, .. } | GateSpec::Squeeze { mode, .. } | GateSpec::PhaseRotation { mode, .. } => {
                vec![*mode]
            }
            GateSpec::Beamsplitter { modes, .. } | GateSpec::TwoModeSqueeze { modes, .. } | GateSpec::ModeSwap { modes } => {
                modes.to_vec()
            }
        }
    }

    /// The same gate with every mode index sent through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut g = self.clone();
        match &mut g {
            GateSpec::Displacement { mode, .. } | GateSpec::Squeeze { mode, .. } | GateSpec::PhaseRotation { mode, .. } => {
                *mode = map(*mode)
            }
            GateSpec::Beamsplitter { modes, .. } | GateSpec::TwoModeSqueeze { modes, .. } | GateSpec::ModeSwap { modes } => {
                *modes = [map(modes[0]), map(modes[1])]
            }
        }
        g
    }

    pub fn is_number_conserving(&self) -> bool {
        matches!(self, GateSpec::Beamsplitter { .. } | GateSpec::PhaseRotation { .. } | GateSpec::ModeSwap { .. })
    }

    /// Brings angles into the canonical ranges without changing the operator.
    pub fn canonical(&self) -> Self {
        match self.clone() {
            GateSpec::Beamsplitter { theta, phi, modes } => {
                let (theta, phi) = if theta < 0.0 { (-theta, phi + PI) } else { (theta, phi) };
                GateSpec::Beamsplitter { theta, phi: wrap_angle(phi), modes }
            }
            GateSpec::PhaseRotation { phi, mode } => GateSpec::PhaseRotation { phi: wrap_angle(phi), mode },
            g => g,
        }
    }

    pub fn inverse(&self) -> Self {
        match self.clone() {
            GateSpec::Displacement { alpha, mode } => GateSpec::Displacement { alpha: -alpha, mode },
            GateSpec::Squeeze { z, mode } => GateSpec::Squeeze { z: -z, mode },
            GateSpec::Beamsplitter { theta, phi, modes } => {
                GateSpec::Beamsplitter { theta, phi: wrap_angle(phi + PI), modes }
            }
            GateSpec::PhaseRotation { phi, mode } => GateSpec::PhaseRotation { phi: wrap_angle(-phi), mode },
            GateSpec::TwoModeSqueeze { r, modes } => GateSpec::TwoModeSqueeze { r: -r, modes },
            g @ GateSpec::ModeSwap { .. } => g,
        }
    }

    pub fn validate(&self, n_modes: usize) -> Result<()> {
        let modes = self.modes();
        if let Some(m) = modes.iter().find(|&&m| m >= n_modes) {
            return Err(Error::invalid(format!("gate mode {m} out of range for {n_modes} modes")));
        }
        if modes.len() == 2 && modes[0] == modes[1] {
            return Err(Error::invalid("two-mode gate on a single mode"));
        }
        let finite = match self {
            GateSpec::Displacement { alpha: c, .. } | GateSpec::Squeeze { z: c, .. } => c.re.is_finite() && c.im.is_finite(),
            GateSpec::Beamsplitter { theta, phi, .. } => theta.is_finite() && phi.is_finite(),
            GateSpec::PhaseRotation { phi, .. } => phi.is_finite(),
            GateSpec::TwoModeSqueeze { r, .. } => r.is_finite(),
            GateSpec::ModeSwap { .. } => true,
        };
        if !finite {
            return Err(Error::invalid("non-finite gate parameter"));
        }
        match self {
            GateSpec::Beamsplitter { theta, phi, .. } => {
                if !(0.0..=PI).contains(theta) || !(0.0..TAU).contains(phi) {
                    return Err(Error::invalid(format!(
                        "beamsplitter angles theta={theta}, phi={phi} outside [0, pi] x [0, 2 pi)"
                    )));
                }
            }
            GateSpec::PhaseRotation { phi, .. } => {
                if !(0.0..TAU).contains(phi) {
                    return Err(Error::invalid(format!("phase {phi} outside [0, 2 pi)")));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn wrap_angle(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Generalised Laguerre polynomials `L_j^{(k)}(x)` for `j = 0..=jmax`.
fn laguerre_column(jmax: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(jmax + 1);
    out.push(1.0);
    if jmax >= 1 {
        out.push(1.0 + kf - x);
    }
    for j in 1..jmax {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * out[j] - (jf + kf) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// `<m|D(alpha)|n>` from the associated-Laguerre closed form, evaluated in
/// log space for the factorial and power prefactors.
pub(crate) fn displacement_matrix(alpha: C64, n_max: usize) -> DMatrix<C64> {
    let dim = n_max + 1;
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let lf = ln_factorials(n_max);
    let ln_abs = alpha.norm().ln();
    let unit = alpha / alpha.norm();
    let mut d = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let lag = laguerre_column(n_max - k, k, x);
        let up = unit.powu(k as u32);
        let down = (-unit.conj()).powu(k as u32);
        for (j, l) in lag.iter().enumerate() {
            let mag = (0.5 * (lf[j] - lf[j + k]) + k as f64 * ln_abs - 0.5 * x).exp() * l;
            // row j + k, column j (lower triangle) and its mirror
            d[(j + k, j)] = up * mag;
            if k > 0 {
                d[(j, j + k)] = down * mag;
            }
        }
    }
    d
}

/// `<m|S(z)|n>` by the two-term Fock recurrence; coefficients are bounded by
/// one so the recursion does not amplify rounding.
pub(crate) fn squeeze_matrix(z: C64, n_max: usize) -> DMatrix<C64> {
    let dim = n_max + 1;
    let r = z.norm();
    let theta = z.arg();
    let sech = 1.0 / r.cosh();
    let tanh = r.tanh();
    let down = -C64::from_polar(tanh, theta);
    let right = C64::from_polar(tanh, -theta);
    let sq: Vec<f64> = (0..dim).map(|k| (k as f64).sqrt()).collect();
    let mut s = DMatrix::zeros(dim, dim);
    s[(0, 0)] = C64::new(sech.sqrt(), 0.0);
    for m in (2..dim).step_by(2) {
        s[(m, 0)] = s[(m - 2, 0)] * down * (sq[m - 1] / sq[m]);
    }
    for m in 0..dim {
        for n in 1..dim {
            if (m + n) % 2 != 0 {
                continue;
            }
            let mut v = C64::new(0.0, 0.0);
            if n >= 2 {
                v += s[(m, n - 2)] * right * (sq[n - 1] / sq[n]);
            }
            if m >= 1 {
                v += s[(m - 1, n - 1)] * (sech * sq[m] / sq[n]);
            }
            s[(m, n)] = v;
        }
    }
    s
}

pub(crate) fn phase_matrix(phi: f64, n_max: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n_max + 1,
        (0..=n_max).map(|n| C64::from_polar(1.0, -phi * n as f64)),
    ))
}

/// Blocks `B_T[p][n] = <p, T-p| BS |n, T-n>` for `T = 0..=t_max`, built
/// column by column from the transformed creation operators
/// `BS a_i^+ BS^+ = c a_i^+ - e^{-i phi} s a_j^+` and
/// `BS a_j^+ BS^+ = e^{i phi} s a_i^+ + c a_j^+`.
pub(crate) fn beamsplitter_number_blocks(theta: f64, phi: f64, t_max: usize) -> Vec<DMatrix<C64>> {
    let (s, c) = theta.sin_cos();
    let e = C64::from_polar(1.0, phi);
    let ebar = e.conj();
    let sq: Vec<f64> = (0..=t_max + 1).map(|k| (k as f64).sqrt()).collect();
    let mut blocks: Vec<DMatrix<C64>> = Vec::with_capacity(t_max + 1);
    blocks.push(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
    for t in 1..=t_max {
        let prev = &blocks[t - 1];
        let mut b = DMatrix::zeros(t + 1, t + 1);
        for p in 0..=t {
            let below = if p >= 1 { prev[(p - 1, 0)] } else { C64::new(0.0, 0.0) };
            let here = if p < t { prev[(p, 0)] } else { C64::new(0.0, 0.0) };
            b[(p, 0)] = (e * s * sq[p] * below + c * sq[t - p] * here) / sq[t];
        }
        for n in 1..=t {
            for p in 0..=t {
                let below = if p >= 1 { prev[(p - 1, n - 1)] } else { C64::new(0.0, 0.0) };
                let here = if p < t { prev[(p, n - 1)] } else { C64::new(0.0, 0.0) };
                b[(p, n)] = (c * sq[p] * below - ebar * s * sq[t - p] * here) / sq[n];
            }
        }
        blocks.push(b);
    }
    blocks
}

fn beamsplitter_blocks(theta: f64, phi: f64, ni: usize, nj: usize) -> Vec<Block> {
    let full = beamsplitter_number_blocks(theta, phi, ni + nj);
    full.into_iter()
        .enumerate()
        .map(|(t, b)| {
            let ps: Vec<usize> = (t.saturating_sub(nj)..=t.min(ni)).collect();
            let basis = ps.iter().map(|&p| p * (nj + 1) + (t - p)).collect();
            let matrix = DMatrix::from_fn(ps.len(), ps.len(), |r, c| b[(ps[r], ps[c])]);
            Block { basis, matrix }
        })
        .collect()
}

/// Two-mode squeezing blocks by photon-number difference, from the
/// disentangled form `exp(-t a^+ b^+) cosh(r)^{-(n_a + n_b + 1)} exp(t a b)`,
/// `t = tanh r`.
fn two_mode_squeeze_blocks(r: f64, ni: usize, nj: usize) -> Vec<Block> {
    let t = r.tanh();
    let lf = ln_factorials(ni.max(nj));
    let ln_t = t.abs().ln();
    let ln_cosh = r.cosh().ln();
    let t_neg = t < 0.0;
    let element = |np: usize, mp: usize, n: usize, m: usize| -> f64 {
        if t == 0.0 {
            return if np == n && mp == m { 1.0 } else { 0.0 };
        }
        let mut acc = 0.0;
        for j in 0..=n.min(m) {
            let (n0, m0) = (n - j, m - j);
            if np < n0 {
                continue;
            }
            let i = np - n0;
            let ln_mag = (j + i) as f64 * ln_t - lf[j] - lf[i]
                + 0.5 * (lf[n] + lf[m] + lf[np] + lf[mp])
                - lf[n0]
                - lf[m0]
                - (n0 + m0 + 1) as f64 * ln_cosh;
            let mut sign = if i % 2 == 1 { -1.0 } else { 1.0 };
            if t_neg && (i + j) % 2 == 1 {
                sign = -sign;
            }
            acc += sign * ln_mag.exp();
        }
        acc
    };
    let mut blocks = Vec::new();
    for d in -(nj as i64)..=(ni as i64) {
        let pairs: Vec<(usize, usize)> = (0..=ni)
            .filter_map(|n| {
                let m = n as i64 - d;
                (m >= 0 && m as usize <= nj).then_some((n, m as usize))
            })
            .collect();
        let basis = pairs.iter().map(|&(n, m)| n * (nj + 1) + m).collect();
        let matrix = DMatrix::from_fn(pairs.len(), pairs.len(), |a, b| {
            let (np, mp) = pairs[a];
            let (n, m) = pairs[b];
            C64::new(element(np, mp, n, m), 0.0)
        });
        blocks.push(Block { basis, matrix });
    }
    blocks
}

/// A gate resolved against a concrete cutoff.
pub(crate) enum LocalOp {
    Blocks { modes: Vec<usize>, blocks: Vec<Block> },
    /// Diagonal single-mode action: amplitude with `n` photons on `mode`
    /// is multiplied by `factors[n]`.
    Diagonal { mode: usize, factors: Vec<C64> },
    Swap { modes: [usize; 2] },
}

impl LocalOp {
    pub fn dense(modes: Vec<usize>, matrix: DMatrix<C64>) -> Self {
        LocalOp::Blocks { modes, blocks: vec![Block::dense(matrix)] }
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        match self {
            LocalOp::Blocks { modes, blocks } => {
                let amps = tensor::apply_blocks(state.amplitudes(), &state.dims(), modes, blocks);
                FockState::new(state.cutoff().clone(), amps)
            }
            LocalOp::Diagonal { mode, factors } => {
                let dims = state.dims();
                let stride: usize = dims[mode + 1..].iter().product();
                let d = dims[*mode];
                let amps = state.amplitudes().iter().enumerate().map(|(i, a)| a * factors[(i / stride) % d]).collect();
                FockState::new(state.cutoff().clone(), amps)
            }
            LocalOp::Swap { modes: [i, j] } => {
                let mut perm: Vec<usize> = (0..state.modes()).collect();
                perm.swap(*i, *j);
                state.permute_modes(&perm)
            }
        }
    }
}

pub(crate) fn local_op(g: &GateSpec, cutoff: &CutoffSpec) -> Result<LocalOp> {
    g.validate(cutoff.modes())?;
    let op = match *g {
        GateSpec::Displacement { alpha, mode } => {
            LocalOp::dense(vec![mode], displacement_matrix(alpha, cutoff.max(mode)))
        }
        GateSpec::Squeeze { z, mode } => LocalOp::dense(vec![mode], squeeze_matrix(z, cutoff.max(mode))),
        GateSpec::PhaseRotation { phi, mode } => {
            LocalOp::Diagonal { mode, factors: phase_matrix(phi, cutoff.max(mode)).diagonal().iter().copied().collect() }
        }
        GateSpec::Beamsplitter { theta, phi, modes: [i, j] } => LocalOp::Blocks {
            modes: vec![i, j],
            blocks: beamsplitter_blocks(theta, phi, cutoff.max(i), cutoff.max(j)),
        },
        GateSpec::TwoModeSqueeze { r, modes: [i, j] } => LocalOp::Blocks {
            modes: vec![i, j],
            blocks: two_mode_squeeze_blocks(r, cutoff.max(i), cutoff.max(j)),
        },
        GateSpec::ModeSwap { modes } => LocalOp::Swap { modes },
    };
    Ok(op)
}

/// Truncated Fock matrix of `g` on its own modes, in the row-major local
/// basis over `g.modes()`. For `ModeSwap` the columns index the input basis
/// `(n_i, n_j)` and the rows the output basis with the two cutoffs exchanged.
pub fn gate_matrix(g: &GateSpec, cutoff: &CutoffSpec) -> Result<DMatrix<C64>> {
    match local_op(g, cutoff)? {
        LocalOp::Blocks { blocks, modes } => {
            let dim: usize = modes.iter().map(|&m| cutoff.max(m) + 1).product();
            let mut out = DMatrix::zeros(dim, dim);
            for b in &blocks {
                for (r, &lr) in b.basis.iter().enumerate() {
                    for (c, &lc) in b.basis.iter().enumerate() {
                        out[(lr, lc)] = b.matrix[(r, c)];
                    }
                }
            }
            Ok(out)
        }
        LocalOp::Diagonal { factors, .. } => Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(factors))),
        LocalOp::Swap { modes: [i, j] } => {
            let (di, dj) = (cutoff.max(i) + 1, cutoff.max(j) + 1);
            let mut out = DMatrix::zeros(di * dj, di * dj);
            for a in 0..di {
                for b in 0..dj {
                    out[(b * di + a, a * dj + b)] = C64::new(1.0, 0.0);
                }
            }
            Ok(out)
        }
    }
}

pub fn apply_gate(state: &FockState, g: &GateSpec) -> Result<FockState> {
    local_op(g, state.cutoff())?.apply(state)
}

pub fn apply_circuit(state: &FockState, gates: &[GateSpec]) -> Result<FockState> {
    gates.iter().try_fold(state.clone(), |s, g| apply_gate(&s, g))
}
