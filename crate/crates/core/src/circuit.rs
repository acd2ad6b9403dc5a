//! Gates and circuits over register layouts, applied exactly to amplitude
//! vectors and density states.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernel::{self, Cond};
use crate::layout::{QubitAddr, RegisterLayout};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};
use crate::relation::BitString;
use crate::state::DensityState;

/// Unitarity tolerance for raw matrices (max abs entry of `U†U - I`).
pub const UNITARY_TOL: f64 = 1e-9;
/// Post-selection below this probability is reported as impossible.
pub const POST_SELECT_MIN_PROB: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Hadamard(QubitAddr),
    PauliX(QubitAddr),
    Cnot {
        control: QubitAddr,
        target: QubitAddr,
    },
    /// Swaps `a[i]` with `b[i]` for every `i` when `control` is 1.
    ControlledSwap {
        control: QubitAddr,
        a: Vec<QubitAddr>,
        b: Vec<QubitAddr>,
    },
    /// `2|u><u| - I` with `u` the uniform superposition over the targets.
    GroverDiffusion(Vec<QubitAddr>),
    /// Multiplies by -1 every basis state whose target bits are listed.
    PhaseOracle {
        targets: Vec<QubitAddr>,
        accepted: Vec<BitString>,
    },
    RawUnitary {
        targets: Vec<QubitAddr>,
        matrix: ComplexMatrix,
    },
    /// Applies `branches[v]` when the control qubits hold `v`; values past
    /// the end of the list act as identity.
    Select {
        control: Vec<QubitAddr>,
        branches: Vec<Vec<Gate>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum GateKind {
    Hadamard,
    PauliX,
    #[serde(rename = "CNOT")]
    Cnot,
    ControlledSwap,
    GroverDiffusion,
    PhaseOracle,
    RawUnitary,
    Select,
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    kind: GateKind,
    targets: Vec<QubitAddr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payload: Option<Value>,
}

impl Gate {
    fn kind(&self) -> GateKind {
        match self {
            Gate::Hadamard(_) => GateKind::Hadamard,
            Gate::PauliX(_) => GateKind::PauliX,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::ControlledSwap { .. } => GateKind::ControlledSwap,
            Gate::GroverDiffusion(_) => GateKind::GroverDiffusion,
            Gate::PhaseOracle { .. } => GateKind::PhaseOracle,
            Gate::RawUnitary { .. } => GateKind::RawUnitary,
            Gate::Select { .. } => GateKind::Select,
        }
    }

    /// Addresses in schema order: single target, `[control, target]`,
    /// `[control, a.., b..]`, the target list, or the select controls.
    pub fn targets(&self) -> Vec<QubitAddr> {
        match self {
            Gate::Hadamard(q) | Gate::PauliX(q) => vec![q.clone()],
            Gate::Cnot { control, target } => vec![control.clone(), target.clone()],
            Gate::ControlledSwap { control, a, b } => {
                let mut v = vec![control.clone()];
                v.extend(a.iter().cloned());
                v.extend(b.iter().cloned());
                v
            }
            Gate::GroverDiffusion(t) => t.clone(),
            Gate::PhaseOracle { targets, .. } | Gate::RawUnitary { targets, .. } => targets.clone(),
            Gate::Select { control, .. } => control.clone(),
        }
    }

    /// Every address the gate touches, including those inside select branches.
    pub fn touched(&self) -> BTreeSet<QubitAddr> {
        let mut out: BTreeSet<QubitAddr> = self.targets().into_iter().collect();
        if let Gate::Select { branches, .. } = self {
            for g in branches.iter().flatten() {
                out.extend(g.touched());
            }
        }
        out
    }

    /// Checks arity, distinctness, payload sizes and unitarity.
    pub fn validate(&self) -> Result<()> {
        let targets = self.targets();
        let distinct: BTreeSet<&QubitAddr> = targets.iter().collect();
        if distinct.len() != targets.len() {
            return Err(Error::InvalidGate(format!("{:?} repeats a target", self.kind())));
        }
        match self {
            Gate::ControlledSwap { a, b, .. } if a.len() != b.len() => {
                return Err(Error::InvalidGate("controlled-swap lists differ in length".into()))
            }
            Gate::GroverDiffusion(t) if t.is_empty() => {
                return Err(Error::InvalidGate("diffusion needs targets".into()))
            }
            Gate::PhaseOracle { targets, accepted } => {
                if let Some(bad) = accepted.iter().find(|s| s.len() != targets.len()) {
                    return Err(Error::InvalidGate(format!(
                        "phase oracle entry `{bad}` does not match {} targets",
                        targets.len()
                    )));
                }
            }
            Gate::RawUnitary { targets, matrix } => {
                let dim = 1usize << targets.len();
                if matrix.rows() != dim || matrix.cols() != dim {
                    return Err(Error::InvalidGate(format!(
                        "{}x{} matrix on {} targets",
                        matrix.rows(),
                        matrix.cols(),
                        targets.len()
                    )));
                }
                let dev = matrix.unitary_deviation();
                if dev > UNITARY_TOL {
                    return Err(Error::NotUnitary(dev));
                }
            }
            Gate::Select { control, branches } => {
                if branches.len() > 1usize << control.len() {
                    return Err(Error::InvalidGate("select has more branches than control values".into()));
                }
                for g in branches.iter().flatten() {
                    g.validate()?;
                    if g.touched().iter().any(|q| control.contains(q)) {
                        return Err(Error::InvalidGate("select branch acts on its own control".into()));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::RawUnitary { targets, matrix } => Gate::RawUnitary {
                targets: targets.clone(),
                matrix: matrix.adjoint(),
            },
            Gate::Select { control, branches } => Gate::Select {
                control: control.clone(),
                branches: branches.iter().map(|b| inverse_gates(b)).collect(),
            },
            other => other.clone(),
        }
    }

    /// Rewrites every address through `f`.
    pub fn map_addrs(&self, f: &dyn Fn(&QubitAddr) -> QubitAddr) -> Gate {
        let m = |v: &Vec<QubitAddr>| v.iter().map(f).collect::<Vec<_>>();
        match self {
            Gate::Hadamard(q) => Gate::Hadamard(f(q)),
            Gate::PauliX(q) => Gate::PauliX(f(q)),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(control),
                target: f(target),
            },
            Gate::ControlledSwap { control, a, b } => Gate::ControlledSwap {
                control: f(control),
                a: m(a),
                b: m(b),
            },
            Gate::GroverDiffusion(t) => Gate::GroverDiffusion(m(t)),
            Gate::PhaseOracle { targets, accepted } => Gate::PhaseOracle {
                targets: m(targets),
                accepted: accepted.clone(),
            },
            Gate::RawUnitary { targets, matrix } => Gate::RawUnitary {
                targets: m(targets),
                matrix: matrix.clone(),
            },
            Gate::Select { control, branches } => Gate::Select {
                control: m(control),
                branches: branches
                    .iter()
                    .map(|b| b.iter().map(|g| g.map_addrs(f)).collect())
                    .collect(),
            },
        }
    }

    /// Renames groups through `f`, keeping offsets.
    pub fn rename_groups(&self, f: &dyn Fn(&str) -> String) -> Gate {
        self.map_addrs(&|q| QubitAddr::new(f(&q.group), q.offset))
    }

    /// Applies the gate to an amplitude vector over `layout`.
    pub fn apply_vec(&self, v: &mut [C64], layout: &RegisterLayout, cond: Cond) -> Result<()> {
        let n = layout.total_qubits();
        let pos = |q: &QubitAddr| layout.position(q);
        let poss = |qs: &[QubitAddr]| qs.iter().map(|q| layout.position(q)).collect::<Result<Vec<_>>>();
        match self {
            Gate::Hadamard(q) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let m = ComplexMatrix::from_vec(
                    2,
                    2,
                    vec![C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)],
                )?;
                kernel::apply_matrix(v, n, &[pos(q)?], &m, cond);
            }
            Gate::PauliX(q) => kernel::apply_permutation(v, n, &[pos(q)?], &[1, 0], cond),
            Gate::Cnot { control, target } => {
                let c = cond.and(n, &[pos(control)?], 1);
                kernel::apply_permutation(v, n, &[pos(target)?], &[1, 0], c);
            }
            Gate::ControlledSwap { control, a, b } => {
                let c = cond.and(n, &[pos(control)?], 1);
                for (x, y) in a.iter().zip(b) {
                    kernel::apply_permutation(v, n, &[pos(x)?, pos(y)?], &[0, 2, 1, 3], c);
                }
            }
            Gate::GroverDiffusion(t) => kernel::apply_diffusion(v, n, &poss(t)?, cond),
            Gate::PhaseOracle { targets, accepted } => {
                let p = poss(targets)?;
                let mut marked = vec![false; 1 << p.len()];
                for s in accepted {
                    marked[s.value()] = true;
                }
                kernel::apply_phase_flip(v, n, &p, &marked, cond);
            }
            Gate::RawUnitary { targets, matrix } => kernel::apply_matrix(v, n, &poss(targets)?, matrix, cond),
            Gate::Select { control, branches } => {
                let p = poss(control)?;
                for (value, branch) in branches.iter().enumerate() {
                    let c = cond.and(n, &p, value);
                    for g in branch {
                        g.apply_vec(v, layout, c)?;
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn inverse_gates(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let payload = match self {
            Gate::PhaseOracle { accepted, .. } => Some(serde_json::to_value(accepted)),
            Gate::RawUnitary { matrix, .. } => Some(serde_json::to_value(matrix)),
            Gate::Select { branches, .. } => Some(serde_json::to_value(branches)),
            _ => None,
        }
        .transpose()
        .map_err(serde::ser::Error::custom)?;
        GateJson {
            kind: self.kind(),
            targets: self.targets(),
            payload,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GateJson::deserialize(d)?;
        gate_from_json(raw).map_err(serde::de::Error::custom)
    }
}

fn gate_from_json(raw: GateJson) -> Result<Gate> {
    let t = raw.targets;
    let need = |k: usize| -> Result<()> {
        if t.len() != k {
            return Err(Error::InvalidGate(format!("{:?} takes {k} targets, got {}", raw.kind, t.len())));
        }
        Ok(())
    };
    let payload = |what: &str| -> Result<Value> {
        raw.payload
            .clone()
            .ok_or_else(|| Error::InvalidGate(format!("{:?} needs a {what} payload", raw.kind)))
    };
    let parse = |e: serde_json::Error| Error::Parse(e.to_string());
    let gate = match raw.kind {
        GateKind::Hadamard => {
            need(1)?;
            Gate::Hadamard(t[0].clone())
        }
        GateKind::PauliX => {
            need(1)?;
            Gate::PauliX(t[0].clone())
        }
        GateKind::Cnot => {
            need(2)?;
            Gate::Cnot {
                control: t[0].clone(),
                target: t[1].clone(),
            }
        }
        GateKind::ControlledSwap => {
            if t.len() % 2 != 1 {
                return Err(Error::InvalidGate("controlled-swap takes a control and two equal lists".into()));
            }
            let half = (t.len() - 1) / 2;
            Gate::ControlledSwap {
                control: t[0].clone(),
                a: t[1..1 + half].to_vec(),
                b: t[1 + half..].to_vec(),
            }
        }
        GateKind::GroverDiffusion => Gate::GroverDiffusion(t),
        GateKind::PhaseOracle => Gate::PhaseOracle {
            targets: t,
            accepted: serde_json::from_value(payload("truth table")?).map_err(parse)?,
        },
        GateKind::RawUnitary => Gate::RawUnitary {
            targets: t,
            matrix: serde_json::from_value(payload("matrix")?).map_err(parse)?,
        },
        GateKind::Select => Gate::Select {
            control: t,
            branches: serde_json::from_value(payload("branch list")?).map_err(parse)?,
        },
    };
    gate.validate()?;
    Ok(gate)
}

/// An ordered gate list over a layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct Circuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

#[derive(Deserialize)]
struct RawCircuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

impl TryFrom<RawCircuit> for Circuit {
    type Error = Error;
    fn try_from(raw: RawCircuit) -> Result<Self> {
        Circuit::new(raw.layout, raw.gates)
    }
}

impl Circuit {
    pub fn new(layout: RegisterLayout, gates: Vec<Gate>) -> Result<Self> {
        for g in &gates {
            g.validate()?;
            check_addresses(g, &layout)?;
        }
        Ok(Self { layout, gates })
    }

    pub fn empty(layout: RegisterLayout) -> Self {
        Self { layout, gates: vec![] }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate()?;
        check_addresses(&g, &self.layout)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn inverse(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            gates: inverse_gates(&self.gates),
        }
    }

    /// `U ρ U†`, lifted by identity on qubits outside the circuit layout.
    pub fn apply(&self, s: &DensityState) -> Result<DensityState> {
        if !s.layout().has_sublayout(&self.layout) {
            return Err(Error::LayoutMismatch(format!(
                "circuit over {:?} does not fit state over {:?}",
                self.layout.group_names(),
                s.layout().group_names()
            )));
        }
        let matrix = conjugate(s.matrix(), s.layout(), &self.gates)?;
        Ok(DensityState::from_parts_unchecked(s.layout().clone(), matrix))
    }

    /// Applies to an amplitude vector over a layout containing this one.
    pub fn apply_vec(&self, v: &mut [C64], layout: &RegisterLayout) -> Result<()> {
        if !layout.has_sublayout(&self.layout) {
            return Err(Error::LayoutMismatch("circuit does not fit the vector layout".into()));
        }
        for g in &self.gates {
            g.apply_vec(v, layout, Cond::ALWAYS)?;
        }
        Ok(())
    }

    /// Dense unitary of the circuit on its own layout.
    pub fn unitary(&self) -> Result<ComplexMatrix> {
        let dim = self.layout.dim();
        let mut u = ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut v = vec![ZERO; dim];
            v[c] = ONE;
            self.apply_vec(&mut v, &self.layout.clone())?;
            for (r, z) in v.into_iter().enumerate() {
                u.set(r, c, z);
            }
        }
        Ok(u)
    }
}

fn check_addresses(g: &Gate, layout: &RegisterLayout) -> Result<()> {
    for q in g.touched() {
        layout.position(&q)?;
    }
    Ok(())
}

/// `U M U†` for the gate sequence's unitary `U`.
pub fn conjugate(m: &ComplexMatrix, layout: &RegisterLayout, gates: &[Gate]) -> Result<ComplexMatrix> {
    let dim = m.rows();
    let apply_cols = |src: &ComplexMatrix| -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(dim, dim);
        for c in 0..dim {
            let mut col = src.column(c);
            for g in gates {
                g.apply_vec(&mut col, layout, Cond::ALWAYS)?;
            }
            for (r, z) in col.into_iter().enumerate() {
                out.set(r, c, z);
            }
        }
        Ok(out)
    };
    // U M U† = (U (U M)†)† since M is Hermitian up to round-off.
    let um = apply_cols(m)?;
    Ok(apply_cols(&um.adjoint())?.adjoint())
}

/// Gates writing `out ^= predicate(inputs)` as `H`, a phase oracle on
/// `inputs ++ [out]` marking `out = 1` with the predicate true, then `H`.
pub fn predicate_write(inputs: &[QubitAddr], out: &QubitAddr, predicate: impl Fn(usize) -> bool) -> Vec<Gate> {
    let n = inputs.len();
    let accepted = (0..1usize << n)
        .filter(|&v| predicate(v))
        .map(|v| BitString::from_value((v << 1) | 1, n + 1))
        .collect();
    let mut targets = inputs.to_vec();
    targets.push(out.clone());
    vec![
        Gate::Hadamard(out.clone()),
        Gate::PhaseOracle { targets, accepted },
        Gate::Hadamard(out.clone()),
    ]
}

/// X gates writing the bits of `value` into the addresses (first most significant).
pub fn write_value(addrs: &[QubitAddr], value: usize) -> Vec<Gate> {
    let n = addrs.len();
    addrs
        .iter()
        .enumerate()
        .filter(|(i, _)| (value >> (n - 1 - i)) & 1 == 1)
        .map(|(_, q)| Gate::PauliX(q.clone()))
        .collect()
}

/// `Ry(angle)`: `|0>` goes to `cos(angle/2)|0> + sin(angle/2)|1>`.
pub fn ry(q: &QubitAddr, angle: f64) -> Gate {
    let (s, c) = (angle / 2.0).sin_cos();
    let m = ComplexMatrix::from_vec(
        2,
        2,
        vec![C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0)],
    )
    .expect("2x2 rotation");
    Gate::RawUnitary {
        targets: vec![q.clone()],
        matrix: m,
    }
}

/// A real orthogonal matrix whose first column is `sqrt(probs)`: the
/// Householder reflection taking `|0>` to that vector.
pub fn preparation_unitary(probs: &[f64]) -> Result<ComplexMatrix> {
    let dim = probs.len();
    let total: f64 = probs.iter().sum();
    if dim == 0 || !dim.is_power_of_two() || (total - 1.0).abs() > 1e-12 || probs.iter().any(|p| *p < 0.0) {
        return Err(Error::MalformedDistribution(format!(
            "cannot prepare {dim} amplitudes summing to {total}"
        )));
    }
    let psi: Vec<f64> = probs.iter().map(|p| p.sqrt()).collect();
    let mut u: Vec<f64> = psi.iter().map(|x| -x).collect();
    u[0] += 1.0;
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let mut m = ComplexMatrix::identity(dim);
    if uu > 1e-24 {
        for r in 0..dim {
            for c in 0..dim {
                let z = if r == c { 1.0 } else { 0.0 } - 2.0 * u[r] * u[c] / uu;
                m.set(r, c, C64::new(z, 0.0));
            }
        }
    }
    Ok(m)
}

/// Standard-basis measurement of one group: outcome, probability and the
/// renormalized post-measurement state, omitting zero-probability outcomes.
pub fn measure_distribution(s: &DensityState, group: &str) -> Result<Vec<(BitString, f64, DensityState)>> {
    let width = s.layout().group(group)?.qubits;
    let probs = s.group_distribution(group)?;
    let mut out = Vec::new();
    for (v, p) in probs.iter().enumerate() {
        if *p <= POST_SELECT_MIN_PROB {
            continue;
        }
        let value = BitString::from_value(v, width);
        let (_, post) = post_select(s, group, &value)?;
        out.push((value, *p, post));
    }
    Ok(out)
}

/// `(tr(Π s Π), Π s Π / tr(Π s Π))` for the projector onto `group = value`.
pub fn post_select(s: &DensityState, group: &str, value: &BitString) -> Result<(f64, DensityState)> {
    let layout = s.layout();
    let positions = layout.positions(group)?;
    if value.len() != positions.len() {
        return Err(Error::DimensionMismatch(format!(
            "value `{value}` for a {}-qubit group",
            positions.len()
        )));
    }
    let n = layout.total_qubits();
    let target = value.value();
    let keep: Vec<bool> = (0..s.dim())
        .map(|i| kernel::extract(n, &positions, i) == target)
        .collect();
    let prob: f64 = (0..s.dim()).filter(|&i| keep[i]).map(|i| s.matrix().get(i, i).re).sum();
    if prob < POST_SELECT_MIN_PROB {
        return Err(Error::ZeroProbabilityBranch(prob));
    }
    let dim = s.dim();
    let mut m = ComplexMatrix::zeros(dim, dim);
    for i in (0..dim).filter(|&i| keep[i]) {
        for j in (0..dim).filter(|&j| keep[j]) {
            m.set(i, j, s.matrix().get(i, j) / prob);
        }
    }
    Ok((prob, DensityState::from_parts_unchecked(layout.clone(), m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::trace_distance;

    fn q(g: &str, o: usize) -> QubitAddr {
        QubitAddr::new(g, o)
    }

    fn two() -> RegisterLayout {
        RegisterLayout::new([("a", 1), ("b", 1)]).unwrap()
    }

    fn bell() -> DensityState {
        let c = Circuit::new(two(), vec![Gate::Hadamard(q("a", 0)), Gate::Cnot { control: q("a", 0), target: q("b", 0) }]).unwrap();
        c.apply(&DensityState::zero(two())).unwrap()
    }

    #[test]
    fn empty_circuit_and_involution() {
        let s = DensityState::zero(two());
        assert_eq!(Circuit::empty(two()).apply(&s).unwrap(), s);
        let hh = Circuit::new(two(), vec![Gate::Hadamard(q("a", 0)), Gate::Hadamard(q("a", 0))]).unwrap();
        assert!(hh.apply(&s).unwrap().max_abs_diff(&s) < 1e-15);
    }

    #[test]
    fn cnot_truth_table() {
        let s = DensityState::basis(two(), 0b10).unwrap();
        let c = Circuit::new(two(), vec![Gate::Cnot { control: q("a", 0), target: q("b", 0) }]).unwrap();
        assert_eq!(c.apply(&s).unwrap(), DensityState::basis(two(), 0b11).unwrap());
    }

    #[test]
    fn bell_measurement_by_projector_arithmetic() {
        // Oracle: Π0 = |0><0| ⊗ I; Π0 ρ Π0 keeps the (00,00) entry 1/2 only.
        let b = bell();
        let outcomes = measure_distribution(&b, "a").unwrap();
        assert_eq!(outcomes.len(), 2);
        for (v, p, post) in &outcomes {
            assert!((p - 0.5).abs() < 1e-12);
            let idx = if v.as_str() == "0" { 0 } else { 3 };
            assert!(post.max_abs_diff(&DensityState::basis(two(), idx).unwrap()) < 1e-12);
        }
        let (p, post) = post_select(&b, "a", &BitString::new("0").unwrap()).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(post.max_abs_diff(&DensityState::basis(two(), 0).unwrap()) < 1e-12);
    }

    #[test]
    fn post_select_impossible_branch() {
        let one = RegisterLayout::new([("a", 1)]).unwrap();
        let s = DensityState::basis(one, 1).unwrap();
        assert!(matches!(
            post_select(&s, "a", &BitString::new("0").unwrap()),
            Err(Error::ZeroProbabilityBranch(_))
        ));
    }

    #[test]
    fn diffusion_fixes_uniform_state() {
        let l = RegisterLayout::new([("i", 3)]).unwrap();
        let addrs = l.addrs("i").unwrap();
        let mut prep: Vec<Gate> = addrs.iter().cloned().map(Gate::Hadamard).collect();
        let uni = Circuit::new(l.clone(), prep.clone()).unwrap().apply(&DensityState::zero(l.clone())).unwrap();
        prep.push(Gate::GroverDiffusion(addrs));
        let after = Circuit::new(l.clone(), prep).unwrap().apply(&DensityState::zero(l)).unwrap();
        assert!(trace_distance(&uni, &after).unwrap() < 1e-9);
    }

    #[test]
    fn empty_phase_oracle_is_identity() {
        let g = Gate::PhaseOracle { targets: vec![q("a", 0), q("b", 0)], accepted: vec![] };
        let u = Circuit::new(two(), vec![g]).unwrap().unitary().unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn predicate_write_is_controlled_not() {
        let gates = predicate_write(&[q("a", 0)], &q("b", 0), |v| v == 1);
        let u = Circuit::new(two(), gates).unwrap().unitary().unwrap();
        let cnot = Circuit::new(two(), vec![Gate::Cnot { control: q("a", 0), target: q("b", 0) }]).unwrap().unitary().unwrap();
        assert!(u.max_abs_diff(&cnot) < 1e-12);
    }

    #[test]
    fn select_applies_branch_by_value() {
        let sel = Gate::Select { control: vec![q("a", 0)], branches: vec![vec![], vec![Gate::PauliX(q("b", 0))]] };
        let c = Circuit::new(two(), vec![sel.clone()]).unwrap();
        assert_eq!(c.apply(&DensityState::basis(two(), 0b10).unwrap()).unwrap(), DensityState::basis(two(), 0b11).unwrap());
        let bad = Gate::Select { control: vec![q("a", 0)], branches: vec![vec![Gate::PauliX(q("a", 0))]] };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn raw_unitary_checked_and_inverted() {
        let not_unitary = ComplexMatrix::diag(&[1.0, 2.0]);
        assert!(matches!(
            Gate::RawUnitary { targets: vec![q("a", 0)], matrix: not_unitary }.validate(),
            Err(Error::NotUnitary(_))
        ));
        let u = preparation_unitary(&[0.25, 0.75]).unwrap();
        assert!(u.unitary_deviation() < 1e-12);
        assert!((u.get(1, 0).re - 0.75f64.sqrt()).abs() < 1e-12);
        let g = Gate::RawUnitary { targets: vec![q("a", 0)], matrix: u };
        let c = Circuit::new(two(), vec![g.clone(), g.inverse()]).unwrap();
        assert!(c.unitary().unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn json_schema_round_trip() {
        let c = Circuit::new(
            two(),
            vec![
                Gate::Hadamard(q("a", 0)),
                Gate::PhaseOracle { targets: vec![q("a", 0)], accepted: vec![BitString::new("1").unwrap()] },
                Gate::Select { control: vec![q("a", 0)], branches: vec![vec![], vec![Gate::PauliX(q("b", 0))]] },
                Gate::RawUnitary { targets: vec![q("b", 0)], matrix: ComplexMatrix::identity(2) },
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"kind\":\"PhaseOracle\""));
        assert!(s.contains("\"payload\":[\"1\"]"));
        let back: Circuit = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"layout":[{"name":"a","qubits":1}],"gates":[{"kind":"CNOT","targets":[{"group":"a","offset":0}]}]}"#;
        assert!(serde_json::from_str::<Circuit>(bad).is_err());
    }
}
