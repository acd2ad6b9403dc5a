//! In-place gate kernels over amplitude vectors of `n` qubits.
//!
//! Qubit position `p` (0 = most significant) maps to bit `n - 1 - p` of the
//! basis index. Every kernel takes a [`Cond`] restricting it to basis states
//! whose control bits hold a given value; the condition must not involve the
//! kernel's own targets.

use crate::linalg::{ComplexMatrix, C64};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cond {
    pub mask: usize,
    pub value: usize,
}

impl Cond {
    pub const ALWAYS: Cond = Cond { mask: 0, value: 0 };

    #[inline]
    pub fn holds(&self, idx: usize) -> bool {
        idx & self.mask == self.value
    }

    /// Adds the requirement that the qubits at `positions` hold `value`
    /// (first position most significant).
    pub fn and(&self, n: usize, positions: &[usize], value: usize) -> Cond {
        let mut out = *self;
        let k = positions.len();
        for (i, &p) in positions.iter().enumerate() {
            let bit = 1usize << (n - 1 - p);
            out.mask |= bit;
            if (value >> (k - 1 - i)) & 1 == 1 {
                out.value |= bit;
            } else {
                out.value &= !bit;
            }
        }
        out
    }
}

#[inline]
pub fn bit_of(n: usize, pos: usize) -> usize {
    1usize << (n - 1 - pos)
}

/// Full-index offsets for each local value of the targets.
pub fn local_offsets(n: usize, positions: &[usize]) -> Vec<usize> {
    let k = positions.len();
    (0..1usize << k)
        .map(|local| {
            positions
                .iter()
                .enumerate()
                .filter(|(i, _)| (local >> (k - 1 - i)) & 1 == 1)
                .map(|(_, &p)| bit_of(n, p))
                .sum()
        })
        .collect()
}

/// Local value of the targets inside a full index.
#[inline]
pub fn extract(n: usize, positions: &[usize], idx: usize) -> usize {
    let mut v = 0;
    for &p in positions {
        v = (v << 1) | ((idx >> (n - 1 - p)) & 1);
    }
    v
}

fn target_mask(n: usize, positions: &[usize]) -> usize {
    positions.iter().map(|&p| bit_of(n, p)).sum()
}

fn bases(n: usize, positions: &[usize], cond: Cond) -> impl Iterator<Item = usize> {
    let tmask = target_mask(n, positions);
    debug_assert_eq!(tmask & cond.mask, 0, "condition overlaps targets");
    (0..1usize << n).filter(move |b| b & tmask == 0 && cond.holds(*b))
}

pub fn apply_matrix(v: &mut [C64], n: usize, positions: &[usize], u: &ComplexMatrix, cond: Cond) {
    let offs = local_offsets(n, positions);
    let d = offs.len();
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for base in bases(n, positions, cond) {
        for (l, o) in offs.iter().enumerate() {
            buf[l] = v[base + o];
        }
        for r in 0..d {
            let row = &u.data()[r * d..(r + 1) * d];
            v[base + offs[r]] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

/// Applies a permutation of local basis states: local `l` moves to `perm[l]`.
pub fn apply_permutation(v: &mut [C64], n: usize, positions: &[usize], perm: &[usize], cond: Cond) {
    let offs = local_offsets(n, positions);
    let mut buf = vec![C64::new(0.0, 0.0); offs.len()];
    for base in bases(n, positions, cond) {
        for (l, o) in offs.iter().enumerate() {
            buf[l] = v[base + o];
        }
        for (l, &target) in perm.iter().enumerate() {
            v[base + offs[target]] = buf[l];
        }
    }
}

/// Multiplies by -1 every basis state whose local target value is marked.
pub fn apply_phase_flip(v: &mut [C64], n: usize, positions: &[usize], marked: &[bool], cond: Cond) {
    for (idx, amp) in v.iter_mut().enumerate() {
        if cond.holds(idx) && marked[extract(n, positions, idx)] {
            *amp = -*amp;
        }
    }
}

/// `2|u><u| - I` on the targets, `u` the uniform superposition.
pub fn apply_diffusion(v: &mut [C64], n: usize, positions: &[usize], cond: Cond) {
    let offs = local_offsets(n, positions);
    let d = offs.len() as f64;
    for base in bases(n, positions, cond) {
        let mean: C64 = offs.iter().map(|o| v[base + o]).sum::<C64>() / d;
        for o in &offs {
            v[base + o] = mean * 2.0 - v[base + o];
        }
    }
}

/// Zeroes every amplitude whose targets do not hold `value`; returns the
/// kept squared norm.
pub fn project(v: &mut [C64], n: usize, positions: &[usize], value: usize) -> f64 {
    let mut kept = 0.0;
    for (idx, amp) in v.iter_mut().enumerate() {
        if extract(n, positions, idx) == value {
            kept += amp.norm_sqr();
        } else {
            *amp = C64::new(0.0, 0.0);
        }
    }
    kept
}

/// Squared norm of the component where the targets hold each value.
pub fn distribution(v: &[C64], n: usize, positions: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1usize << positions.len()];
    for (idx, amp) in v.iter().enumerate() {
        out[extract(n, positions, idx)] += amp.norm_sqr();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn offsets_respect_significance() {
        // Three qubits, targets (2, 0): local bit 1 is qubit 2, local bit 0 is qubit 0.
        assert_eq!(local_offsets(3, &[2, 0]), vec![0, 4, 1, 5]);
        assert_eq!(extract(3, &[2, 0], 0b001), 0b10);
    }

    #[test]
    fn cnot_by_permutation() {
        // |10> -> |11>
        let mut v = vec![ZERO, ZERO, ONE, ZERO];
        apply_permutation(&mut v, 2, &[0, 1], &[0, 1, 3, 2], Cond::ALWAYS);
        assert_eq!(v[3], ONE);
    }

    #[test]
    fn conditioned_matrix_only_touches_branch() {
        let x = ComplexMatrix::from_rows(vec![vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        let mut v = vec![ONE, ZERO, ONE, ZERO];
        let cond = Cond::ALWAYS.and(2, &[0], 1);
        apply_matrix(&mut v, 2, &[1], &x, cond);
        assert_eq!(v, vec![ONE, ZERO, ZERO, ONE]);
    }

    #[test]
    fn projection_returns_kept_weight() {
        let h = C64::new(0.5, 0.0);
        let mut v = vec![h, h, h, h];
        let kept = project(&mut v, 2, &[0], 1);
        assert!((kept - 0.5).abs() < 1e-15);
        assert_eq!(v, vec![ZERO, ZERO, h, h]);
    }
}
