//! Classical-quantum states: a visible classical record paired with a
//! subnormalized quantum block per record value, each block stored in
//! factored form `Σ v v†`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigen, hermitian_eigenvalues, trace_norm};
use crate::error::{Error, Result};
use crate::layout::RegisterLayout;
use crate::linalg::{inner, norm_sqr, ComplexMatrix, C64, ZERO};
use crate::state::DensityState;

/// Labelled classical values visible in a view, in the order they were drawn.
pub type Record = Vec<(String, usize)>;

/// Columns with squared norm at or below this are dropped.
pub const COLUMN_DROP_TOL: f64 = 1e-30;
/// Blocks up to this dimension are compared densely.
const DENSE_BLOCK_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqState {
    layout: RegisterLayout,
    blocks: BTreeMap<Record, Vec<Vec<C64>>>,
}

impl CqState {
    pub fn empty(layout: RegisterLayout) -> Self {
        Self {
            layout,
            blocks: BTreeMap::new(),
        }
    }

    /// Single-record state from a density matrix, factored by its eigenvectors.
    pub fn from_density(s: &DensityState) -> Result<Self> {
        let eig = hermitian_eigen(s.matrix(), true)?;
        let vectors = eig.vectors.expect("eigenvectors requested");
        let mut cols = Vec::new();
        for (i, lambda) in eig.values.iter().enumerate() {
            if *lambda > 1e-15 {
                cols.push(vectors.column(i).into_iter().map(|z| z * lambda.sqrt()).collect());
            }
        }
        let mut out = Self::empty(s.layout().clone());
        out.blocks.insert(Vec::new(), cols);
        Ok(out)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.blocks.keys()
    }

    pub fn columns(&self, record: &Record) -> &[Vec<C64>] {
        self.blocks.get(record).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Adds `v v†` to the block of `record`.
    pub fn push_column(&mut self, record: Record, v: Vec<C64>) -> Result<()> {
        if v.len() != self.layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "column of length {} for a {}-dimensional view",
                v.len(),
                self.layout.dim()
            )));
        }
        if norm_sqr(&v) > COLUMN_DROP_TOL {
            self.blocks.entry(record).or_default().push(v);
        }
        Ok(())
    }

    pub fn probability(&self, record: &Record) -> f64 {
        self.columns(record).iter().map(|v| norm_sqr(v)).sum()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.keys().map(|r| self.probability(r)).sum()
    }

    /// The subnormalized block of one record as a dense matrix.
    pub fn block(&self, record: &Record) -> ComplexMatrix {
        dense(self.layout.dim(), self.columns(record))
    }

    /// Forgets the classical record.
    pub fn to_density(&self) -> DensityState {
        let dim = self.layout.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for cols in self.blocks.values() {
            accumulate(&mut m, cols, 1.0);
        }
        DensityState::from_parts_unchecked(self.layout.clone(), m)
    }

    /// Trace distance between two views: half the trace norm of the
    /// block-diagonal difference, summed over the union of records.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch(format!(
                "views over {:?} and {:?}",
                self.layout.group_names(),
                other.layout.group_names()
            )));
        }
        let records: BTreeSet<&Record> = self.blocks.keys().chain(other.blocks.keys()).collect();
        let mut total = 0.0;
        for r in records {
            total += block_trace_norm(self.layout.dim(), self.columns(r), other.columns(r))?;
        }
        Ok((0.5 * total).clamp(0.0, 1.0))
    }
}

fn dense(dim: usize, cols: &[Vec<C64>]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    accumulate(&mut m, cols, 1.0);
    m
}

fn accumulate(m: &mut ComplexMatrix, cols: &[Vec<C64>], sign: f64) {
    let dim = m.rows();
    let data = m.data_mut();
    for v in cols {
        for (i, a) in v.iter().enumerate() {
            if *a == ZERO {
                continue;
            }
            let row = &mut data[i * dim..(i + 1) * dim];
            for (j, b) in v.iter().enumerate() {
                row[j] += a * b.conj() * sign;
            }
        }
    }
}

/// `‖Σ a a† − Σ b b†‖_1`. Small or wide blocks are densified; otherwise the
/// difference is `Q R D R† Q†` with `W = [A B] = Q R` and `D = diag(I, −I)`,
/// whose nonzero spectrum is that of `R D R†`.
fn block_trace_norm(dim: usize, a: &[Vec<C64>], b: &[Vec<C64>]) -> Result<f64> {
    if a.is_empty() && b.is_empty() {
        return Ok(0.0);
    }
    let width = a.len() + b.len();
    if dim <= DENSE_BLOCK_DIM || width >= dim {
        let mut m = dense(dim, a);
        accumulate(&mut m, b, -1.0);
        return trace_norm(&m);
    }
    // Modified Gram-Schmidt with reorthogonalization; R is rank × width.
    let mut q: Vec<Vec<C64>> = Vec::new();
    let mut r_cols: Vec<Vec<C64>> = Vec::with_capacity(width);
    for w in a.iter().chain(b) {
        let mut v = w.clone();
        let mut coeffs = vec![ZERO; q.len()];
        for _ in 0..2 {
            for (k, qk) in q.iter().enumerate() {
                let p = inner(qk, &v);
                coeffs[k] += p;
                for (x, y) in v.iter_mut().zip(qk) {
                    *x -= p * y;
                }
            }
        }
        let nrm = norm_sqr(&v).sqrt();
        let scale = norm_sqr(w).sqrt().max(1e-300);
        if nrm > 1e-12 * scale {
            v.iter_mut().for_each(|x| *x /= nrm);
            q.push(v);
            coeffs.push(C64::new(nrm, 0.0));
        }
        r_cols.push(coeffs);
    }
    let rank = q.len();
    let mut m = ComplexMatrix::zeros(rank, rank);
    for (c, col) in r_cols.iter().enumerate() {
        let sign = if c < a.len() { 1.0 } else { -1.0 };
        for i in 0..col.len() {
            for j in 0..col.len() {
                let z = m.get(i, j) + col[i] * col[j].conj() * sign;
                m.set(i, j, z);
            }
        }
    }
    Ok(hermitian_eigenvalues(&m)?.iter().map(|l| l.abs()).sum())
}
