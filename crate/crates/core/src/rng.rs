//! Seeded randomness: Haar-distributed unitaries, random states and
//! per-purpose seed derivation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::layout::RegisterLayout;
use crate::linalg::{inner, ComplexMatrix, C64};
use crate::state::DensityState;

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a tag into a seed (SplitMix64 finalizer), so independent purposes
/// draw from unrelated streams.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random unitary: Gram-Schmidt QR of a complex Gaussian matrix, with
/// the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        for q in &cols {
            let p = inner(q, &v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= p * y;
            }
        }
        let nrm = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if nrm < 1e-8 {
            continue;
        }
        // Dividing by the norm gives a positive R diagonal, which is the
        // phase convention that makes Q Haar distributed.
        v.iter_mut().for_each(|x| *x /= nrm);
        cols.push(v);
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            m.set(r, c, *z);
        }
    }
    m
}

/// Uniformly random pure state (normalized complex Gaussian vector).
pub fn random_pure(dim: usize, rng: &mut impl Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        let nrm = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if nrm > 1e-12 {
            return v.into_iter().map(|x| x / nrm).collect();
        }
    }
}

/// Random full-rank mixed state `G G† / tr(G G†)` for Gaussian `G`.
pub fn random_density(layout: RegisterLayout, rng: &mut impl Rng) -> Result<DensityState> {
    let dim = layout.dim();
    let g = ComplexMatrix::from_vec(dim, dim, (0..dim * dim).map(|_| gaussian_complex(rng)).collect())?;
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    let mut m = m.scale_real(1.0 / tr);
    // Exact Hermitian symmetrization against round-off.
    for i in 0..dim {
        for j in i..dim {
            let z = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    DensityState::new(layout, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_is_unitary_and_reproducible() {
        let u = haar_unitary(8, &mut seeded(3));
        assert!(u.unitary_deviation() < 1e-12);
        assert_eq!(u, haar_unitary(8, &mut seeded(3)));
        assert_ne!(u, haar_unitary(8, &mut seeded(4)));
    }

    #[test]
    fn random_density_is_valid() {
        let l = RegisterLayout::new([("q", 3)]).unwrap();
        let s = random_density(l, &mut seeded(1)).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-12);
        assert!(s.min_eigenvalue().unwrap() > 0.0);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(7, 9), derive_seed(7, 9));
    }
}
