//! Density states over labeled register layouts, with tensor products,
//! partial traces and trace distance.

use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigen, hermitian_eigenvalues};
use crate::error::{Error, Result};
use crate::kernel::{bit_of, extract};
use crate::layout::{RegisterLayout, DEFAULT_QUBIT_CAP};
use crate::linalg::{norm_sqr, ComplexMatrix, C64, ONE};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues down to this are clamped to zero.
pub const PSD_TOL: f64 = 1e-9;
/// Above this dimension the PSD check is skipped on construction.
const PSD_CHECK_MAX_DIM: usize = 256;

/// Positive semidefinite, unit-trace matrix over a register layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDensityState")]
pub struct DensityState {
    layout: RegisterLayout,
    matrix: ComplexMatrix,
}

#[derive(Deserialize)]
struct RawDensityState {
    layout: RegisterLayout,
    matrix: ComplexMatrix,
}

impl TryFrom<RawDensityState> for DensityState {
    type Error = Error;
    fn try_from(raw: RawDensityState) -> Result<Self> {
        DensityState::new(raw.layout, raw.matrix)
    }
}

impl DensityState {
    /// Validates every invariant, clamping tiny negative eigenvalues.
    pub fn new(layout: RegisterLayout, matrix: ComplexMatrix) -> Result<Self> {
        let dim = layout.dim();
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "layout of dimension {dim} with a {}x{} matrix",
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let state = Self { layout, matrix };
        if dim <= PSD_CHECK_MAX_DIM {
            return state.clamp_psd();
        }
        Ok(state)
    }

    /// Builds without validation. Callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(layout: RegisterLayout, matrix: ComplexMatrix) -> Self {
        Self { layout, matrix }
    }

    pub fn from_pure(layout: RegisterLayout, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let nrm = norm_sqr(amplitudes);
        if nrm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let scaled: Vec<C64> = amplitudes.iter().map(|a| a / nrm.sqrt()).collect();
        Ok(Self {
            layout,
            matrix: ComplexMatrix::outer(&scaled),
        })
    }

    /// Computational basis projector `|index><index|`.
    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::IndexOutOfRange(format!("basis index {index} >= {dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m.set(index, index, ONE);
        Ok(Self { layout, matrix: m })
    }

    pub fn zero(layout: RegisterLayout) -> Self {
        Self::basis(layout, 0).expect("index 0 always exists")
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let dim = layout.dim();
        Self {
            layout,
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn relabel(mut self, layout: RegisterLayout) -> Result<Self> {
        if layout.dim() != self.dim() {
            return Err(Error::DimensionMismatch("relabel changes the dimension".into()));
        }
        self.layout = layout;
        Ok(self)
    }

    /// Clamps eigenvalues in `[-PSD_TOL, 0)` to zero and renormalizes;
    /// anything more negative is an error.
    pub fn clamp_psd(self) -> Result<Self> {
        let eig = hermitian_eigen(&self.matrix, false)?;
        let min = eig.values.last().copied().unwrap_or(0.0);
        if min >= 0.0 {
            return Ok(self);
        }
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        let eig = hermitian_eigen(&self.matrix, true)?;
        let q = eig.vectors.expect("vectors requested");
        let clamped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        let lam = ComplexMatrix::diag(&clamped.iter().map(|v| v / total).collect::<Vec<_>>());
        let matrix = &(&q * &lam) * &q.adjoint();
        Ok(Self {
            layout: self.layout,
            matrix,
        })
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.matrix)?.last().copied().unwrap_or(0.0))
    }

    /// `self ⊗ other`; the result layout lists `self`'s groups first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_with_cap(other, DEFAULT_QUBIT_CAP)
    }

    pub fn tensor_with_cap(&self, other: &Self, cap: usize) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        layout.check_cap(cap)?;
        Ok(Self {
            layout,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    /// Traces out the named groups.
    pub fn partial_trace(&self, discard: &[String]) -> Result<Self> {
        let keep_layout = self.layout.without(discard)?;
        if discard.is_empty() {
            return Ok(self.clone());
        }
        let n = self.layout.total_qubits();
        let mut keep_pos = Vec::new();
        let mut disc_pos = Vec::new();
        for g in self.layout.groups() {
            let pos = self.layout.positions(&g.name)?;
            if discard.contains(&g.name) {
                disc_pos.extend(pos);
            } else {
                keep_pos.extend(pos);
            }
        }
        let keep_off = offsets(n, &keep_pos);
        let disc_off = offsets(n, &disc_pos);
        let dk = keep_off.len();
        let mut out = ComplexMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for d in &disc_off {
                    acc += self.matrix.get(keep_off[i] + d, keep_off[j] + d);
                }
                out.set(i, j, acc);
            }
        }
        Ok(Self {
            layout: keep_layout,
            matrix: out,
        })
    }

    /// Keeps only the named groups.
    pub fn reduce_to(&self, keep: &[String]) -> Result<Self> {
        let discard: Vec<String> = self
            .layout
            .group_names()
            .into_iter()
            .filter(|g| !keep.contains(g))
            .collect();
        for k in keep {
            self.layout.group(k)?;
        }
        self.partial_trace(&discard)
    }

    /// Reorders groups; `order` must list every group exactly once.
    pub fn reorder(&self, order: &[String]) -> Result<Self> {
        let mut names = self.layout.group_names();
        let mut sorted = order.to_vec();
        names.sort();
        sorted.sort();
        if names != sorted {
            return Err(Error::LayoutMismatch(format!(
                "reorder needs every group exactly once, got {order:?}"
            )));
        }
        let n = self.layout.total_qubits();
        let mut new_layout = RegisterLayout::empty();
        let mut old_positions = Vec::new();
        for name in order {
            let g = self.layout.group(name)?;
            new_layout.push(name.clone(), g.qubits)?;
            old_positions.extend(self.layout.positions(name)?);
        }
        // New index i maps to old index with bits placed at old_positions.
        let map = offsets(n, &old_positions);
        let dim = self.dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                out.set(i, j, self.matrix.get(map[i], map[j]));
            }
        }
        Ok(Self {
            layout: new_layout,
            matrix: out,
        })
    }

    /// Convex combination of states sharing one layout.
    pub fn mixture(parts: &[(f64, &DensityState)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::MalformedDistribution("empty mixture".into()))?
            .1;
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::MalformedDistribution(format!("weights sum to {total}")));
        }
        let dim = first.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (w, s) in parts {
            if s.layout != first.layout {
                return Err(Error::LayoutMismatch("mixture of different layouts".into()));
            }
            m = &m + &s.matrix.scale_real(*w);
        }
        Ok(Self {
            layout: first.layout.clone(),
            matrix: m,
        })
    }

    /// Max abs entry difference, for exact-equality style comparisons.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// Probability of each value of a group when measured in the standard basis.
    pub fn group_distribution(&self, group: &str) -> Result<Vec<f64>> {
        let n = self.layout.total_qubits();
        let pos = self.layout.positions(group)?;
        let mut out = vec![0.0; 1usize << pos.len()];
        for i in 0..self.dim() {
            out[extract(n, &pos, i)] += self.matrix.get(i, i).re;
        }
        Ok(out)
    }
}

/// Full-index offsets of every value of the given positions (first most significant).
pub(crate) fn offsets(n: usize, positions: &[usize]) -> Vec<usize> {
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

/// `(1/2) Σ |λ_i(a - b)|`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityState, b: &DensityState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    let diff = &a.matrix - &b.matrix;
    let vals = hermitian_eigenvalues(&diff)?;
    let d = 0.5 * vals.iter().map(|v| v.abs()).sum::<f64>();
    Ok(d.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn one_qubit(name: &str) -> RegisterLayout {
        RegisterLayout::new([(name, 1)]).unwrap()
    }

    fn plus(name: &str) -> DensityState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityState::from_pure(one_qubit(name), &[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = DensityState::basis(one_qubit("a"), 0).unwrap();
        let b = DensityState::basis(one_qubit("b"), 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.dim(), 4);
        assert_eq!(ab.matrix().get(1, 1), ONE);
        assert_eq!(ab.layout().group_names(), vec!["a", "b"]);
    }

    #[test]
    fn tensor_dimension_law() {
        let a = DensityState::maximally_mixed(one_qubit("a"));
        let b = DensityState::maximally_mixed(RegisterLayout::new([("b", 2)]).unwrap());
        assert_eq!(a.tensor(&b).unwrap().dim(), 8);
    }

    #[test]
    fn tensor_respects_cap() {
        let a = DensityState::zero(RegisterLayout::new([("a", 2)]).unwrap());
        let b = DensityState::zero(RegisterLayout::new([("b", 2)]).unwrap());
        assert!(matches!(
            a.tensor_with_cap(&b, 3),
            Err(Error::DimensionCapExceeded { .. })
        ));
    }

    #[test]
    fn bell_partial_trace_by_index_summation() {
        // Oracle: rho_A[i][j] = sum_k rho[(i,k)][(j,k)] written out by hand for the
        // Bell projector, whose only nonzero entries are (0,0),(0,3),(3,0),(3,3) = 1/2.
        let layout = RegisterLayout::new([("a", 1), ("b", 1)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DensityState::from_pure(layout, &[C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)]).unwrap();
        let mut oracle = [[0.0f64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    oracle[i][j] += bell.matrix().get(2 * i + k, 2 * j + k).re;
                }
            }
        }
        let reduced = bell.partial_trace(&["b".into()]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((reduced.matrix().get(i, j).re - oracle[i][j]).abs() < 1e-15);
            }
        }
        assert!((oracle[0][0] - 0.5).abs() < 1e-15 && oracle[0][1].abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_and_empty_discard() {
        let a = plus("a");
        let b = DensityState::maximally_mixed(one_qubit("b"));
        let ab = a.tensor(&b).unwrap();
        assert!(ab.partial_trace(&["b".into()]).unwrap().max_abs_diff(&a) < 1e-15);
        assert_eq!(ab.partial_trace(&[]).unwrap(), ab);
        assert!(matches!(ab.partial_trace(&["zz".into()]), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = DensityState::basis(one_qubit("q"), 0).unwrap();
        let z1 = DensityState::basis(one_qubit("q"), 1).unwrap();
        assert_eq!(trace_distance(&z0, &z0).unwrap(), 0.0);
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-12);
        // Oracle: the difference [[-1/2, -1/2], [-1/2, 1/2]] has eigenvalues ±1/√2
        // (trace 0, determinant -1/2), so the distance is 1/√2.
        let d = trace_distance(&plus("q"), &z0).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn trace_distance_dimension_mismatch() {
        let a = DensityState::zero(one_qubit("a"));
        let b = DensityState::zero(RegisterLayout::new([("a", 2)]).unwrap());
        assert!(matches!(trace_distance(&a, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn reorder_swaps_groups() {
        let a = DensityState::basis(one_qubit("a"), 1).unwrap();
        let b = DensityState::basis(RegisterLayout::new([("b", 2)]).unwrap(), 2).unwrap();
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        let re = ab.reorder(&["b".into(), "a".into()]).unwrap();
        assert_eq!(re, ba);
    }

    #[test]
    fn invalid_states_rejected() {
        let l = one_qubit("q");
        let not_unit = ComplexMatrix::identity(2);
        assert!(DensityState::new(l.clone(), not_unit).is_err());
        let negative = ComplexMatrix::diag(&[1.5, -0.5]);
        assert!(DensityState::new(l.clone(), negative).is_err());
        // Tiny negative eigenvalues get clamped.
        let tiny = ComplexMatrix::diag(&[1.0 + 1e-11, -1e-11]);
        let s = DensityState::new(l, tiny).unwrap();
        assert!(s.min_eigenvalue().unwrap() >= 0.0);
    }
}
