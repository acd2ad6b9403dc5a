//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! A Hermitian `H = A + iB` is embedded as the real symmetric
//! `[[A, -B], [B, A]]`, whose spectrum is the spectrum of `H` with every
//! eigenvalue doubled. Complex eigenvectors are recovered from the real ones
//! as `u + iv`, with a pivoted Gram-Schmidt pass inside each degenerate
//! cluster to pick an orthonormal set.

use crate::error::{Error, Result};
use crate::linalg::{inner, ComplexMatrix, C64, ZERO};

/// Input Hermiticity tolerance (max abs deviation of `M - M†`).
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;
/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// (scaled by `max(1, ||M||_F)`).
pub const SWEEP_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Descending.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector of `values[i]`.
    pub vectors: Option<ComplexMatrix>,
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m, false)?.values)
}

pub fn hermitian_eigen(m: &ComplexMatrix, want_vectors: bool) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: want_vectors.then(|| ComplexMatrix::zeros(0, 0)),
        });
    }

    // Real embedding, symmetrized so round-off in the input does not leak in.
    let dim = 2 * n;
    let mut a = vec![0.0; dim * dim];
    for i in 0..n {
        for j in 0..n {
            let z = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
            a[i * dim + j] = z.re;
            a[(i + n) * dim + (j + n)] = z.re;
            a[i * dim + (j + n)] = -z.im;
            a[(i + n) * dim + j] = z.im;
        }
    }
    let mut v = if want_vectors {
        let mut v = vec![0.0; dim * dim];
        for i in 0..dim {
            v[i * dim + i] = 1.0;
        }
        Some(v)
    } else {
        None
    };

    jacobi_sweeps(&mut a, v.as_deref_mut(), dim)?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| a[y * dim + y].total_cmp(&a[x * dim + x]));
    let doubled: Vec<f64> = order.iter().map(|&i| a[i * dim + i]).collect();
    let values: Vec<f64> = doubled.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();

    let vectors = v.map(|v| recover_complex_vectors(&v, &order, &doubled, n));
    Ok(Eigen { values, vectors })
}

fn jacobi_sweeps(a: &mut [f64], mut v: Option<&mut [f64]>, n: usize) -> Result<()> {
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = SWEEP_TOL * fro.max(1.0);
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() < tol {
            return Ok(());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Err(Error::NoConvergence(MAX_SWEEPS))
}

fn recover_complex_vectors(v: &[f64], order: &[usize], doubled: &[f64], n: usize) -> ComplexMatrix {
    let dim = 2 * n;
    let scale = doubled.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let cluster_tol = 1e-9 * scale;
    let mut out = ComplexMatrix::zeros(n, n);
    let mut accepted: Vec<Vec<C64>> = Vec::with_capacity(n);

    let mut start = 0;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (doubled[end - 1] - doubled[end]).abs() <= cluster_tol {
            end += 1;
        }
        let want = (end - start) / 2;
        let mut cands: Vec<Vec<C64>> = order[start..end]
            .iter()
            .map(|&col| (0..n).map(|i| C64::new(v[i * dim + col], v[(i + n) * dim + col])).collect())
            .collect();
        for _ in 0..want {
            // Orthogonalize every candidate against the accepted set, pick the largest.
            let mut best = 0;
            let mut best_norm = -1.0;
            for (ci, cand) in cands.iter_mut().enumerate() {
                for acc in &accepted {
                    let proj = inner(acc, cand);
                    for (x, a) in cand.iter_mut().zip(acc) {
                        *x -= proj * a;
                    }
                }
                let nrm = cand.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
                if nrm > best_norm {
                    best_norm = nrm;
                    best = ci;
                }
            }
            let mut chosen = cands.swap_remove(best);
            let nrm = best_norm.max(1e-300);
            for x in chosen.iter_mut() {
                *x /= nrm;
            }
            accepted.push(chosen);
        }
        start = end;
    }
    // Clusters of odd size cannot happen for an exact embedding; pad defensively with
    // completion vectors if round-off split one.
    while accepted.len() < n {
        let mut e = vec![ZERO; n];
        e[accepted.len() % n] = C64::new(1.0, 0.0);
        for acc in &accepted {
            let proj = inner(acc, &e);
            for (x, a) in e.iter_mut().zip(acc) {
                *x -= proj * a;
            }
        }
        let nrm = e.iter().map(C64::norm_sqr).sum::<f64>().sqrt().max(1e-300);
        e.iter_mut().for_each(|x| *x /= nrm);
        accepted.push(e);
    }
    for (c, vec) in accepted.iter().take(n).enumerate() {
        for (r, z) in vec.iter().enumerate() {
            out.set(r, c, *z);
        }
    }
    out
}

/// Sum of absolute eigenvalues (the trace norm) of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|x| x.abs()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn reconstruct(e: &Eigen) -> ComplexMatrix {
        let q = e.vectors.as_ref().unwrap();
        let l = ComplexMatrix::diag(&e.values);
        &(q * &l) * &q.adjoint()
    }

    #[test]
    fn identity_eigenvalues() {
        let vals = hermitian_eigenvalues(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(vals.len(), 4);
        for v in vals {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_sorted_descending() {
        let vals = hermitian_eigenvalues(&ComplexMatrix::diag(&[-1.0, 3.0])).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_x_by_characteristic_polynomial() {
        // det(X - lI) = l^2 - 1, so the roots are +1 and -1.
        let x = ComplexMatrix::from_rows(vec![vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        let vals = hermitian_eigenvalues(&x).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn pauli_y_complex_entries() {
        let y = ComplexMatrix::from_rows(vec![
            vec![ZERO, C64::new(0.0, -1.0)],
            vec![C64::new(0.0, 1.0), ZERO],
        ])
        .unwrap();
        let e = hermitian_eigen(&y, true).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-13);
        assert!(reconstruct(&e).max_abs_diff(&y) < 1e-9);
    }

    #[test]
    fn degenerate_reconstruction() {
        // 2|u><u| - I on 4 dims: eigenvalues 1, -1, -1, -1.
        let u = vec![C64::new(0.5, 0.0); 4];
        let m = &ComplexMatrix::outer(&u).scale_real(2.0) - &ComplexMatrix::identity(4);
        let e = hermitian_eigen(&m, true).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!(e.values[1..].iter().all(|v| (v + 1.0).abs() < 1e-12));
        assert!(reconstruct(&e).max_abs_diff(&m) < 1e-9);
        let q = e.vectors.unwrap();
        assert!(q.unitary_deviation() < 1e-9);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(vec![vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian(_))));
    }
}
