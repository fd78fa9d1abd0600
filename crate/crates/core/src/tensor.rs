//! Dense row-major tensor helpers shared by the Fock and qudit simulators.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::C64;

/// Dense amplitude count above which block application is parallelised.
const PAR_THRESHOLD: usize = 1 << 15;

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

pub(crate) fn decode_into(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

pub(crate) fn decode(index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    decode_into(index, dims, &mut out);
    out
}

pub(crate) fn encode(pattern: &[usize], strides: &[usize]) -> usize {
    pattern.iter().zip(strides).map(|(n, s)| n * s).sum()
}

/// Flat offsets of every basis index whose coordinates on `modes` are zero.
pub(crate) fn base_offsets(dims: &[usize], modes: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offsets = vec![0usize];
    for k in 0..dims.len() {
        if modes.contains(&k) {
            continue;
        }
        let mut next = Vec::with_capacity(offsets.len() * dims[k]);
        for &o in &offsets {
            for n in 0..dims[k] {
                next.push(o + n * st[k]);
            }
        }
        offsets = next;
    }
    offsets
}

/// Flat offsets of the local product basis over `modes`, row-major in the
/// order the modes are listed.
pub(crate) fn local_offsets(dims: &[usize], modes: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offsets = vec![0usize];
    for &k in modes {
        let mut next = Vec::with_capacity(offsets.len() * dims[k]);
        for &o in &offsets {
            for n in 0..dims[k] {
                next.push(o + n * st[k]);
            }
        }
        offsets = next;
    }
    offsets
}

/// A square matrix acting on a subset of local basis indices.
#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub basis: Vec<usize>,
    pub matrix: DMatrix<C64>,
}

impl Block {
    pub fn dense(matrix: DMatrix<C64>) -> Self {
        Block { basis: (0..matrix.nrows()).collect(), matrix }
    }
}

/// Applies a block-structured local operator on `modes`. The blocks must
/// partition the local basis; indices outside every block are zeroed.
pub(crate) fn apply_blocks(amps: &[C64], dims: &[usize], modes: &[usize], blocks: &[Block]) -> Vec<C64> {
    let bases = base_offsets(dims, modes);
    let local = local_offsets(dims, modes);
    let width = blocks.iter().map(|b| b.basis.len()).max().unwrap_or(0);
    // writes the image of the slice at `base` into `out`, indexed by local offset
    let apply_one = |base: usize, gathered: &mut Vec<C64>, out: &mut dyn FnMut(usize, C64)| {
        for block in blocks {
            gathered.clear();
            gathered.extend(block.basis.iter().map(|&l| amps[base + local[l]]));
            if gathered.iter().all(|a| a.re == 0.0 && a.im == 0.0) {
                continue;
            }
            let m = &block.matrix;
            for (r, &lr) in block.basis.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, g) in gathered.iter().enumerate() {
                    acc += m[(r, c)] * g;
                }
                out(lr, acc);
            }
        }
    };
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    if amps.len() >= PAR_THRESHOLD && rayon::current_num_threads() > 1 {
        let results: Vec<Vec<C64>> = bases
            .par_iter()
            .map_init(
                || Vec::with_capacity(width),
                |gathered, &b| {
                    let mut vals = vec![C64::new(0.0, 0.0); local.len()];
                    apply_one(b, gathered, &mut |l, v| vals[l] = v);
                    vals
                },
            )
            .collect();
        for (base, vals) in bases.iter().zip(results) {
            for (l, v) in local.iter().zip(vals) {
                out[base + l] = v;
            }
        }
    } else {
        let mut gathered = Vec::with_capacity(width);
        for &b in &bases {
            apply_one(b, &mut gathered, &mut |l, v| out[b + local[l]] = v);
        }
    }
    out
}

/// Reorders axes: output axis `k` is input axis `perm[k]`.
pub(crate) fn permute_axes(amps: &[C64], dims: &[usize], perm: &[usize]) -> (Vec<C64>, Vec<usize>) {
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let old_strides = strides(dims);
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    let mut pattern = vec![0usize; dims.len()];
    for (i, slot) in out.iter_mut().enumerate() {
        decode_into(i, &new_dims, &mut pattern);
        let src: usize = pattern.iter().zip(perm).map(|(n, &p)| n * old_strides[p]).sum();
        *slot = amps[src];
    }
    (out, new_dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_are_row_major() {
        assert_eq!(strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(decode(23, &[2, 3, 4]), vec![1, 2, 3]);
        assert_eq!(encode(&[1, 2, 3], &strides(&[2, 3, 4])), 23);
    }

    #[test]
    fn base_and_local_offsets_cover_the_space() {
        let dims = [2, 3, 4];
        let bases = base_offsets(&dims, &[1]);
        let local = local_offsets(&dims, &[1]);
        let mut all: Vec<usize> = bases.iter().flat_map(|b| local.iter().map(move |l| b + l)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..24).collect::<Vec<_>>());
    }

    #[test]
    fn permute_axes_swaps_coordinates() {
        let dims = [2, 3];
        let amps: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 0.0)).collect();
        let (out, nd) = permute_axes(&amps, &dims, &[1, 0]);
        assert_eq!(nd, vec![3, 2]);
        // out[(b, a)] == in[(a, b)]
        assert_eq!(out[2 * 2 + 1].re, amps[3 + 2].re);
    }
}
