use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::Serialize;

use super::gates::GateSpec;
use crate::{Error, Result, C64};

/// Angles below this are treated as the identity and not emitted.
const TRIVIAL_ANGLE: f64 = 1e-15;

/// Action of a passive gate on the creation operators of `l` modes:
/// `U a_k^+ U^+ = sum_j u[j][k] a_j^+`.
pub fn single_particle_matrix(g: &GateSpec, l: usize) -> Result<DMatrix<C64>> {
    g.validate(l)?;
    let mut u = DMatrix::identity(l, l);
    match *g {
        GateSpec::Beamsplitter { theta, phi, modes: [i, j] } => {
            let (s, c) = theta.sin_cos();
            u[(i, i)] = C64::new(c, 0.0);
            u[(j, j)] = C64::new(c, 0.0);
            u[(i, j)] = C64::from_polar(s, phi);
            u[(j, i)] = -C64::from_polar(s, -phi);
        }
        GateSpec::PhaseRotation { phi, mode } => u[(mode, mode)] = C64::from_polar(1.0, -phi),
        GateSpec::ModeSwap { modes: [i, j] } => u.swap_columns(i, j),
        _ => return Err(Error::invalid(format!("{g:?} is not a passive linear-optical gate"))),
    }
    Ok(u)
}

/// Single-particle matrix of a circuit; the first gate acts first.
pub fn compose_single_particle(gates: &[GateSpec], l: usize) -> Result<DMatrix<C64>> {
    gates.iter().try_fold(DMatrix::identity(l, l), |acc, g| Ok(single_particle_matrix(g, l)? * acc))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeshStats {
    pub beamsplitters: usize,
    pub phases: usize,
    pub depth: usize,
}

impl MeshStats {
    /// Counts gates and the circuit depth under greedy as-soon-as-possible
    /// layering.
    pub fn of(gates: &[GateSpec], l: usize) -> Self {
        let mut layer = vec![0usize; l];
        let mut stats = MeshStats { beamsplitters: 0, phases: 0, depth: 0 };
        for g in gates {
            match g {
                GateSpec::Beamsplitter { .. } => stats.beamsplitters += 1,
                GateSpec::PhaseRotation { .. } => stats.phases += 1,
                _ => {}
            }
            let ms = g.modes();
            let at = ms.iter().map(|&m| layer[m]).max().unwrap_or(0) + 1;
            for m in ms {
                layer[m] = at;
            }
        }
        stats.depth = layer.into_iter().max().unwrap_or(0);
        stats
    }
}

/// Nearest-neighbour rectangular mesh of beamsplitters and phase rotations
/// whose composed single-particle action is `u`.
pub fn rectangular_decompose(u: &DMatrix<C64>) -> Result<Vec<GateSpec>> {
    let l = u.nrows();
    if l == 0 || u.ncols() != l {
        return Err(Error::shape("rectangular decomposition needs a square matrix"));
    }
    let defect = (u.adjoint() * u - DMatrix::<C64>::identity(l, l)).iter().map(|x| x.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }

    let mut v = u.clone();
    // (first mode of the pair, 2x2 unitary) in the order they were applied
    let mut right: Vec<(usize, [[C64; 2]; 2])> = Vec::new();
    let mut left: Vec<(usize, [[C64; 2]; 2])> = Vec::new();
    for (k, i) in (0..l.saturating_sub(1)).rev().enumerate() {
        if k % 2 == 0 {
            for j in (0..l - 1 - i).rev() {
                let (a, b) = (v[(i + j + 1, j)], v[(i + j + 1, j + 1)]);
                let x = nulling(b, -a);
                mul_right(&mut v, j, &x);
                right.push((j, x));
            }
        } else {
            for j in 0..l - 1 - i {
                let (a, b) = (v[(i + j, j)], v[(i + j + 1, j)]);
                let y = transpose(nulling(a.conj(), b.conj()));
                mul_left(&mut v, i + j, &y);
                left.push((i + j, y));
            }
        }
    }

    let mut gates = Vec::new();
    for (m, x) in &right {
        push_two_mode(&mut gates, *m, &adjoint(x));
    }
    for k in 0..l {
        push_phase(&mut gates, k, v[(k, k)]);
    }
    for (m, y) in left.iter().rev() {
        push_two_mode(&mut gates, *m, &adjoint(y));
    }
    Ok(gates)
}

/// Unitary whose first column is `(p, q)` normalised and whose second column
/// is orthogonal to it. Used to zero one entry of a row or column pair.
fn nulling(p: C64, q: C64) -> [[C64; 2]; 2] {
    let n = (p.norm_sqr() + q.norm_sqr()).sqrt();
    if n == 0.0 {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        return [[one, zero], [zero, one]];
    }
    let (p, q) = (p / n, q / n);
    [[p, -q.conj()], [q, p.conj()]]
}

fn transpose(m: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

fn adjoint(m: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

fn mul_right(v: &mut DMatrix<C64>, j: usize, x: &[[C64; 2]; 2]) {
    for r in 0..v.nrows() {
        let (a, b) = (v[(r, j)], v[(r, j + 1)]);
        v[(r, j)] = a * x[0][0] + b * x[1][0];
        v[(r, j + 1)] = a * x[0][1] + b * x[1][1];
    }
}

fn mul_left(v: &mut DMatrix<C64>, i: usize, y: &[[C64; 2]; 2]) {
    for c in 0..v.ncols() {
        let (a, b) = (v[(i, c)], v[(i + 1, c)]);
        v[(i, c)] = y[0][0] * a + y[0][1] * b;
        v[(i + 1, c)] = y[1][0] * a + y[1][1] * b;
    }
}

/// Phase gate whose single-particle factor is `d` (assumed unimodular).
fn push_phase(gates: &mut Vec<GateSpec>, mode: usize, d: C64) {
    let phi = (-d.arg()).rem_euclid(TAU);
    if phi.min(TAU - phi) > TRIVIAL_ANGLE {
        gates.push(GateSpec::phase(phi, mode));
    }
}

/// Emits `G = diag(a, b) BS(theta, 0) diag(g, 1)` on modes `(m, m + 1)`.
fn push_two_mode(gates: &mut Vec<GateSpec>, m: usize, gm: &[[C64; 2]; 2]) {
    let theta = gm[1][0].norm().atan2(gm[0][0].norm());
    let (s, c) = theta.sin_cos();
    let one = C64::new(1.0, 0.0);
    let (a, b, g) = if s <= TRIVIAL_ANGLE {
        (gm[0][0], gm[1][1], one)
    } else if c <= TRIVIAL_ANGLE {
        (gm[0][1], -gm[1][0], one)
    } else {
        let a = gm[0][1] / s;
        (a, gm[1][1] / c, gm[0][0] / (a * c))
    };
    push_phase(gates, m, g);
    if theta > TRIVIAL_ANGLE {
        gates.push(GateSpec::beamsplitter(theta, 0.0, m, m + 1));
    }
    push_phase(gates, m, a);
    push_phase(gates, m + 1, b);
}
