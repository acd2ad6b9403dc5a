//! Quantum interactive proofs: protocol descriptions, exact execution,
//! verifier views, witness-indistinguishability error and scripted
//! adversaries.
//!
//! Execution keeps a list of classical branches, each holding the record of
//! labelled classical values drawn so far and an unnormalized amplitude
//! vector whose squared norm is the branch probability. Gates act on every
//! branch; samples and measurements split branches; `Branch` ops condition
//! on recorded values.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::circuit::{inverse_gates, Gate};
use crate::cq::{CqState, Record};
use crate::error::{Error, Result};
use crate::kernel::{self, Cond};
use crate::layout::{QubitAddr, RegisterLayout, DEFAULT_QUBIT_CAP};
use crate::linalg::{norm_sqr, C64, ONE, ZERO};
use crate::relation::{BitString, TruthTableRelation};
use crate::rng::{derive_seed, haar_unitary, seeded};
use crate::state::DensityState;

/// Branches lighter than this are dropped when a sample or measurement splits.
pub const BRANCH_DROP_TOL: f64 = 1e-30;
/// Tolerance on outcome probabilities summing to one.
pub const DISTRIBUTION_TOL: f64 = 1e-9;
/// Final states are densified only up to this many qubits.
pub const FINAL_STATE_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub value: usize,
    pub prob: f64,
    /// `(group, mask)`: the group is XOR-ed with `mask` in this outcome.
    #[serde(default)]
    pub writes: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op")]
pub enum Op {
    Gate(Gate),
    /// Draws a labelled classical value.
    Sample {
        label: String,
        visible: bool,
        outcomes: Vec<Outcome>,
    },
    /// Runs the ops of the case matching the most recent value recorded
    /// under `label`; unmatched values do nothing.
    Branch {
        label: String,
        cases: Vec<(usize, Vec<Op>)>,
    },
    /// Standard-basis measurement of a group, recorded under `label`.
    Measure {
        group: String,
        label: String,
        visible: bool,
    },
}

pub fn gate_ops(gates: impl IntoIterator<Item = Gate>) -> Vec<Op> {
    gates.into_iter().map(Op::Gate).collect()
}

impl Op {
    /// A sample with uniform outcomes `0..count`, each writing its value
    /// into `group` when given.
    pub fn uniform(label: &str, visible: bool, count: usize, group: Option<&str>) -> Op {
        Op::Sample {
            label: label.into(),
            visible,
            outcomes: (0..count)
                .map(|v| Outcome {
                    value: v,
                    prob: 1.0 / count as f64,
                    writes: group.map(|g| vec![(g.to_string(), v)]).unwrap_or_default(),
                })
                .collect(),
        }
    }

    /// Register groups the op may act on.
    pub fn groups(&self, out: &mut BTreeSet<String>) {
        match self {
            Op::Gate(g) => out.extend(g.touched().into_iter().map(|q| q.group)),
            Op::Sample { outcomes, .. } => {
                for o in outcomes {
                    out.extend(o.writes.iter().map(|(g, _)| g.clone()));
                }
            }
            Op::Branch { cases, .. } => {
                for op in cases.iter().flat_map(|(_, ops)| ops) {
                    op.groups(out);
                }
            }
            Op::Measure { group, .. } => {
                out.insert(group.clone());
            }
        }
    }

    /// Renames groups and record labels.
    pub fn rename(&self, groups: &dyn Fn(&str) -> String, labels: &dyn Fn(&str) -> String) -> Op {
        match self {
            Op::Gate(g) => Op::Gate(g.rename_groups(groups)),
            Op::Sample {
                label,
                visible,
                outcomes,
            } => Op::Sample {
                label: labels(label),
                visible: *visible,
                outcomes: outcomes
                    .iter()
                    .map(|o| Outcome {
                        value: o.value,
                        prob: o.prob,
                        writes: o.writes.iter().map(|(g, m)| (groups(g), *m)).collect(),
                    })
                    .collect(),
            },
            Op::Branch { label, cases } => Op::Branch {
                label: labels(label),
                cases: cases
                    .iter()
                    .map(|(v, ops)| (*v, rename_ops(ops, groups, labels)))
                    .collect(),
            },
            Op::Measure {
                group,
                label,
                visible,
            } => Op::Measure {
                group: groups(group),
                label: labels(label),
                visible: *visible,
            },
        }
    }
}

pub fn rename_ops(ops: &[Op], groups: &dyn Fn(&str) -> String, labels: &dyn Fn(&str) -> String) -> Vec<Op> {
    ops.iter().map(|op| op.rename(groups, labels)).collect()
}

/// Prefixes every group and label.
pub fn prefix_ops(ops: &[Op], prefix: &str) -> Vec<Op> {
    rename_ops(ops, &|g| format!("{prefix}{g}"), &|l| format!("{prefix}{l}"))
}

/// Inverse of a coherent op list; samples and measurements are irreversible.
pub fn inverse_ops(ops: &[Op]) -> Result<Vec<Op>> {
    let mut out = Vec::with_capacity(ops.len());
    for op in ops.iter().rev() {
        out.push(match op {
            Op::Gate(g) => Op::Gate(g.inverse()),
            Op::Branch { label, cases } => Op::Branch {
                label: label.clone(),
                cases: cases
                    .iter()
                    .map(|(v, ops)| Ok((*v, inverse_ops(ops)?)))
                    .collect::<Result<_>>()?,
            },
            Op::Sample { label, .. } | Op::Measure { label, .. } => {
                return Err(Error::Unsupported(format!("cannot invert the draw of `{label}`")))
            }
        });
    }
    Ok(out)
}

/// Gates only, for ops known to be coherent.
pub fn ops_as_gates(ops: &[Op]) -> Option<Vec<Gate>> {
    ops.iter()
        .map(|op| match op {
            Op::Gate(g) => Some(g.clone()),
            _ => None,
        })
        .collect()
}

pub fn inverse_gate_ops(gates: &[Gate]) -> Vec<Op> {
    gate_ops(inverse_gates(gates))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub label: String,
    pub value: usize,
    pub visible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub record: Vec<Entry>,
    pub amps: Vec<C64>,
}

impl BranchState {
    pub fn probability(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    pub fn visible_record(&self) -> Record {
        self.record
            .iter()
            .filter(|e| e.visible)
            .map(|e| (e.label.clone(), e.value))
            .collect()
    }

    pub fn lookup(&self, label: &str) -> Option<usize> {
        self.record.iter().rev().find(|e| e.label == label).map(|e| e.value)
    }
}

/// The branch list of a running execution.
#[derive(Debug, Clone)]
pub struct Machine {
    layout: RegisterLayout,
    branches: Vec<BranchState>,
}

impl Machine {
    /// All-zero state on the layout, after a cap check.
    pub fn new(layout: RegisterLayout, cap: usize) -> Result<Self> {
        layout.check_cap(cap)?;
        let mut amps = vec![ZERO; layout.dim()];
        amps[0] = ONE;
        Ok(Self {
            layout,
            branches: vec![BranchState { record: vec![], amps }],
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn branches(&self) -> &[BranchState] {
        &self.branches
    }

    pub fn apply(&mut self, ops: &[Op]) -> Result<()> {
        let mut next = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            next.extend(run_ops(&self.layout, b.clone(), ops)?);
        }
        self.branches = next;
        Ok(())
    }

    /// Probability that the qubit reads 1.
    pub fn probability_one(&self, q: &QubitAddr) -> Result<f64> {
        let pos = self.layout.position(q)?;
        let n = self.layout.total_qubits();
        Ok(self
            .branches
            .iter()
            .map(|b| kernel::distribution(&b.amps, n, &[pos])[1])
            .sum())
    }

    /// Probability of each recorded value of `label` (absent counts as none).
    pub fn label_distribution(&self, label: &str) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for b in &self.branches {
            if let Some(v) = b.lookup(label) {
                *out.entry(v).or_insert(0.0) += b.probability();
            }
        }
        out
    }

    /// Classical-quantum state of the listed groups with the visible record;
    /// everything else is traced out.
    pub fn view(&self, keep: &[String]) -> Result<CqState> {
        let kept_layout = self.layout.restrict(keep)?;
        let n = self.layout.total_qubits();
        let mut kept_pos = Vec::new();
        for g in kept_layout.group_names() {
            kept_pos.extend(self.layout.positions(&g)?);
        }
        let kept_set: BTreeSet<usize> = kept_pos.iter().copied().collect();
        let disc_pos: Vec<usize> = (0..n).filter(|p| !kept_set.contains(p)).collect();
        let kd = 1usize << kept_pos.len();
        let dd = 1usize << disc_pos.len();
        let mut out = CqState::empty(kept_layout);
        for b in &self.branches {
            let mut cols = vec![ZERO; kd * dd];
            for (idx, a) in b.amps.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                let k = kernel::extract(n, &kept_pos, idx);
                let d = kernel::extract(n, &disc_pos, idx);
                cols[d * kd + k] = *a;
            }
            let record = b.visible_record();
            for col in cols.chunks(kd) {
                out.push_column(record.clone(), col.to_vec())?;
            }
        }
        Ok(out)
    }

    /// The classical mixture over branches as a density state.
    pub fn density(&self) -> Result<DensityState> {
        let mut cq = CqState::empty(self.layout.clone());
        for b in &self.branches {
            cq.push_column(vec![], b.amps.clone())?;
        }
        Ok(cq.to_density())
    }
}

fn run_ops(layout: &RegisterLayout, b: BranchState, ops: &[Op]) -> Result<Vec<BranchState>> {
    let mut current = vec![b];
    for op in ops {
        let mut next = Vec::with_capacity(current.len());
        for b in current {
            next.extend(run_op(layout, b, op)?);
        }
        current = next;
    }
    Ok(current)
}

fn run_op(layout: &RegisterLayout, mut b: BranchState, op: &Op) -> Result<Vec<BranchState>> {
    let n = layout.total_qubits();
    match op {
        Op::Gate(g) => {
            g.apply_vec(&mut b.amps, layout, Cond::ALWAYS)?;
            Ok(vec![b])
        }
        Op::Sample {
            label,
            visible,
            outcomes,
        } => {
            check_distribution(label, outcomes)?;
            let mut out = Vec::with_capacity(outcomes.len());
            for o in outcomes.iter().filter(|o| o.prob > 0.0) {
                let mut nb = b.clone();
                let s = o.prob.sqrt();
                nb.amps.iter_mut().for_each(|z| *z *= s);
                for (group, mask) in &o.writes {
                    let pos = layout.positions(group)?;
                    if *mask >> pos.len() != 0 {
                        return Err(Error::Misconfigured(format!(
                            "sample `{label}` writes {mask} into {}-qubit group `{group}`",
                            pos.len()
                        )));
                    }
                    for (i, p) in pos.iter().enumerate() {
                        if (mask >> (pos.len() - 1 - i)) & 1 == 1 {
                            kernel::apply_permutation(&mut nb.amps, n, &[*p], &[1, 0], Cond::ALWAYS);
                        }
                    }
                }
                nb.record.push(Entry {
                    label: label.clone(),
                    value: o.value,
                    visible: *visible,
                });
                out.push(nb);
            }
            Ok(out)
        }
        Op::Branch { label, cases } => {
            let value = b
                .lookup(label)
                .ok_or_else(|| Error::Misconfigured(format!("branch on unrecorded label `{label}`")))?;
            match cases.iter().find(|(v, _)| *v == value) {
                Some((_, ops)) => run_ops(layout, b, ops),
                None => Ok(vec![b]),
            }
        }
        Op::Measure {
            group,
            label,
            visible,
        } => {
            let pos = layout.positions(group)?;
            let mut out = Vec::new();
            for value in 0..1usize << pos.len() {
                let mut nb = b.clone();
                let p = kernel::project(&mut nb.amps, n, &pos, value);
                if p <= BRANCH_DROP_TOL {
                    continue;
                }
                nb.record.push(Entry {
                    label: label.clone(),
                    value,
                    visible: *visible,
                });
                out.push(nb);
            }
            Ok(out)
        }
    }
}

fn check_distribution(label: &str, outcomes: &[Outcome]) -> Result<()> {
    let total: f64 = outcomes.iter().map(|o| o.prob).sum();
    let values: BTreeSet<usize> = outcomes.iter().map(|o| o.value).collect();
    if outcomes.iter().any(|o| !(o.prob >= 0.0) || !o.prob.is_finite())
        || (total - 1.0).abs() > DISTRIBUTION_TOL
        || values.len() != outcomes.len()
    {
        return Err(Error::MalformedDistribution(format!(
            "sample `{label}` has probabilities summing to {total}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    pub eps_c: f64,
    pub eps_s: f64,
    pub eps_wi: f64,
}

impl ErrorProfile {
    pub fn new(eps_c: f64, eps_s: f64, eps_wi: f64) -> Self {
        Self { eps_c, eps_s, eps_wi }.clamped()
    }

    pub fn clamped(self) -> Self {
        let c = |x: f64| if x.is_nan() { 1.0 } else { x.clamp(0.0, 1.0) };
        Self {
            eps_c: c(self.eps_c),
            eps_s: c(self.eps_s),
            eps_wi: c(self.eps_wi),
        }
    }
}

/// Marks the verifier's messages as uniformly random bits written into a
/// message group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicCoin {
    pub group: String,
    pub bits: usize,
}

fn default_cap() -> usize {
    DEFAULT_QUBIT_CAP
}

/// A protocol instantiated on one instance `x`.
///
/// The order of operations is `V_0, P_1, V_1, …, P_k, V_k` on the global
/// layout `V ++ M ++ P`, starting from all zeros. With an odd message count
/// `V_0` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub name: String,
    pub relation: TruthTableRelation,
    pub instance: BitString,
    pub message_count: usize,
    pub verifier: RegisterLayout,
    pub message: RegisterLayout,
    pub prover: RegisterLayout,
    pub accept: QubitAddr,
    /// `V_0 … V_k`.
    pub verifier_steps: Vec<Vec<Op>>,
    /// Honest prover steps `P_1 … P_k` per witness.
    pub honest: BTreeMap<BitString, Vec<Vec<Op>>>,
    /// Groups of `V ∪ M` hidden from the view after round `j` (index `j-1`).
    #[serde(default)]
    pub view_exclusions: Vec<Vec<String>>,
    #[serde(default)]
    pub public_coin: Option<PublicCoin>,
    pub declared: ErrorProfile,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

/// A cheating prover: one op list per round on `M ∪ P′`, with its own
/// private register `P′`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adversary {
    pub private: RegisterLayout,
    pub rounds: Vec<Vec<Op>>,
}

impl Adversary {
    /// Identity strategy with no private memory.
    pub fn idle(rounds: usize) -> Self {
        Self {
            private: RegisterLayout::empty(),
            rounds: vec![vec![]; rounds],
        }
    }

    /// The honest prover of `p` for witness `w`, as an adversary.
    pub fn honest(p: &ProtocolSpec, w: &BitString) -> Result<Self> {
        Ok(Self {
            private: p.prover.clone(),
            rounds: p.honest_steps(w)?.clone(),
        })
    }

    pub fn prefixed(&self, prefix: &str) -> Self {
        Self {
            private: self.private.prefixed(prefix),
            rounds: self.rounds.iter().map(|ops| prefix_ops(ops, prefix)).collect(),
        }
    }
}

/// Outcome of a run: acceptance, views after every prover step and, for
/// small layouts, the final global state.
#[derive(Debug, Clone)]
pub struct Execution {
    pub accept_probability: f64,
    /// Index `j` is the view after `P_j`; index 0 is the view before `P_1`.
    pub views: Vec<CqState>,
    pub final_state: Option<DensityState>,
    /// Per final branch: full record, probability and accepting mass.
    pub outcomes: Vec<BranchOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchOutcome {
    pub record: Vec<Entry>,
    pub probability: f64,
    pub accept: f64,
}

impl Execution {
    /// `P[accept | label = v]` for every recorded value `v` of `label`.
    pub fn conditional_acceptance(&self, label: &str) -> BTreeMap<usize, f64> {
        let mut mass: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for o in &self.outcomes {
            if let Some(e) = o.record.iter().rev().find(|e| e.label == label) {
                let slot = mass.entry(e.value).or_insert((0.0, 0.0));
                slot.0 += o.probability;
                slot.1 += o.accept;
            }
        }
        mass.into_iter()
            .filter(|(_, (p, _))| *p > 0.0)
            .map(|(v, (p, a))| (v, (a / p).clamp(0.0, 1.0)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best: f64,
    pub best_restart: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl ProtocolSpec {
    pub fn rounds(&self) -> usize {
        self.verifier_steps.len().saturating_sub(1)
    }

    pub fn global_layout(&self) -> Result<RegisterLayout> {
        self.verifier.concat(&self.message)?.concat(&self.prover)
    }

    pub fn qubits(&self) -> usize {
        self.verifier.total_qubits() + self.message.total_qubits() + self.prover.total_qubits()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.rounds();
        if k == 0 || (self.message_count != 2 * k && self.message_count + 1 != 2 * k) {
            return Err(Error::Misconfigured(format!(
                "{} verifier steps do not fit {} messages",
                self.verifier_steps.len(),
                self.message_count
            )));
        }
        if self.message_count % 2 == 1 && !self.verifier_steps[0].is_empty() {
            return Err(Error::Misconfigured("odd message count with a nonempty opening step".into()));
        }
        self.relation.check_instance(&self.instance)?;
        let global = self.global_layout()?;
        global.check_cap(self.cap)?;
        if !self.verifier.contains(&self.accept.group) {
            return Err(Error::Misconfigured(format!("accept qubit `{}` is not a verifier qubit", self.accept.group)));
        }
        global.position(&self.accept)?;
        let vm: BTreeSet<String> = self.verifier.group_names().into_iter().chain(self.message.group_names()).collect();
        let mp: BTreeSet<String> = self.message.group_names().into_iter().chain(self.prover.group_names()).collect();
        for step in &self.verifier_steps {
            check_groups(step, &vm, "verifier")?;
        }
        for (w, steps) in &self.honest {
            self.relation.check_witness(w)?;
            if steps.len() != k {
                return Err(Error::Misconfigured(format!("honest prover for {w} has {} steps", steps.len())));
            }
            for step in steps {
                check_groups(step, &mp, "prover")?;
            }
        }
        if self.view_exclusions.len() > k {
            return Err(Error::Misconfigured("more view exclusions than rounds".into()));
        }
        for g in self.view_exclusions.iter().flatten() {
            if !vm.contains(g) {
                return Err(Error::UnknownGroup(g.clone()));
            }
        }
        Ok(())
    }

    /// Turns an odd message count into the next even one; the opening
    /// verifier step is an empty dummy message.
    pub fn pad_to_even(mut self) -> Self {
        if self.message_count % 2 == 1 {
            self.message_count += 1;
        }
        self
    }

    pub fn honest_steps(&self, w: &BitString) -> Result<&Vec<Vec<Op>>> {
        self.relation.check_witness(w)?;
        self.honest.get(w).ok_or_else(|| {
            Error::InvalidWitness(format!("no honest prover for witness {w} on instance {}", self.instance))
        })
    }

    /// Groups visible to the verifier after round `j` (0 means before `P_1`).
    pub fn view_groups(&self, j: usize) -> Vec<String> {
        let hidden: &[String] = match j {
            0 => &[],
            _ => self.view_exclusions.get(j - 1).map(Vec::as_slice).unwrap_or(&[]),
        };
        self.verifier
            .group_names()
            .into_iter()
            .chain(self.message.group_names())
            .filter(|g| !hidden.contains(g))
            .collect()
    }

    fn run(&self, prover: &RegisterLayout, steps: &[Vec<Op>]) -> Result<Execution> {
        self.validate()?;
        let k = self.rounds();
        if steps.len() != k {
            return Err(Error::Misconfigured(format!("prover has {} steps, protocol has {k} rounds", steps.len())));
        }
        let layout = self.verifier.concat(&self.message)?.concat(prover)?;
        let mut machine = Machine::new(layout, self.cap)?;
        machine.apply(&self.verifier_steps[0])?;
        let mut views = vec![machine.view(&self.view_groups(0))?];
        for j in 1..=k {
            machine.apply(&steps[j - 1])?;
            views.push(machine.view(&self.view_groups(j))?);
            machine.apply(&self.verifier_steps[j])?;
        }
        let final_state = if machine.layout().total_qubits() <= FINAL_STATE_MAX_QUBITS {
            Some(machine.density()?)
        } else {
            None
        };
        let pos = machine.layout().position(&self.accept)?;
        let n = machine.layout().total_qubits();
        let outcomes = machine
            .branches()
            .iter()
            .map(|b| BranchOutcome {
                record: b.record.clone(),
                probability: b.probability(),
                accept: kernel::distribution(&b.amps, n, &[pos])[1],
            })
            .collect();
        Ok(Execution {
            accept_probability: machine.probability_one(&self.accept)?.clamp(0.0, 1.0),
            views,
            final_state,
            outcomes,
        })
    }

    /// Runs the honest prover holding `w`.
    pub fn execute(&self, w: &BitString) -> Result<Execution> {
        self.run(&self.prover, self.honest_steps(w)?)
    }

    pub fn accept_probability(&self, w: &BitString) -> Result<f64> {
        Ok(self.execute(w)?.accept_probability)
    }

    pub fn view(&self, w: &BitString, j: usize) -> Result<CqState> {
        if j > self.rounds() {
            return Err(Error::IndexOutOfRange(format!("round {j} of {}", self.rounds())));
        }
        Ok(self.execute(w)?.views.swap_remove(j))
    }

    fn check_valid(&self, w: &BitString) -> Result<()> {
        if !self.relation.holds(&self.instance, w) {
            return Err(Error::InvalidWitness(format!("({}, {w}) is not in the relation", self.instance)));
        }
        Ok(())
    }

    /// Largest view distance over rounds `1..=k` between the two witnesses.
    pub fn wi_error(&self, w0: &BitString, w1: &BitString) -> Result<f64> {
        self.check_valid(w0)?;
        self.check_valid(w1)?;
        let a = self.execute(w0)?;
        let b = self.execute(w1)?;
        let mut worst: f64 = 0.0;
        for j in 1..=self.rounds() {
            worst = worst.max(a.views[j].trace_distance(&b.views[j])?);
        }
        Ok(worst)
    }

    /// WI error maximized over all pairs of valid witnesses (0 if fewer than two).
    pub fn wi_error_all_pairs(&self) -> Result<f64> {
        let ws = self.relation.witnesses(&self.instance);
        let execs = ws.iter().map(|w| self.execute(w)).collect::<Result<Vec<_>>>()?;
        let mut worst: f64 = 0.0;
        for (i, a) in execs.iter().enumerate() {
            for b in &execs[i + 1..] {
                for j in 1..=self.rounds() {
                    worst = worst.max(a.views[j].trace_distance(&b.views[j])?);
                }
            }
        }
        Ok(worst)
    }

    /// The view under the lexicographically first valid witness.
    pub fn unbounded_wi_simulator(&self, j: usize) -> Result<CqState> {
        let w = self
            .relation
            .witnesses(&self.instance)
            .into_iter()
            .next()
            .ok_or_else(|| Error::NoWitnessExists(self.instance.to_string()))?;
        self.view(&w, j)
    }

    /// Largest distance between a real view and the simulator's, over valid
    /// witnesses and rounds `1..=k`.
    pub fn simulator_gap(&self) -> Result<f64> {
        let ws = self.relation.witnesses(&self.instance);
        let canonical = ws.first().ok_or_else(|| Error::NoWitnessExists(self.instance.to_string()))?;
        let sim = self.execute(canonical)?;
        let mut worst: f64 = 0.0;
        for w in &ws[1..] {
            let e = self.execute(w)?;
            for j in 1..=self.rounds() {
                worst = worst.max(e.views[j].trace_distance(&sim.views[j])?);
            }
        }
        Ok(worst)
    }

    /// Exact acceptance against a scripted prover.
    pub fn adversary_acceptance(&self, adv: &Adversary) -> Result<f64> {
        let allowed: BTreeSet<String> = self.message.group_names().into_iter().chain(adv.private.group_names()).collect();
        for step in &adv.rounds {
            check_groups(step, &allowed, "adversary")?;
        }
        Ok(self.run(&adv.private, &adv.rounds)?.accept_probability)
    }

    /// Best acceptance over seeded Haar-random strategies: one random
    /// unitary per round on `M ∪ P′`. A heuristic lower bound on soundness.
    pub fn random_search(&self, private_qubits: usize, restarts: usize, seed: u64) -> Result<SearchResult> {
        let mut private = RegisterLayout::empty();
        if private_qubits > 0 {
            private.push("adv", private_qubits)?;
        }
        let mut targets = Vec::new();
        for g in self.message.group_names() {
            targets.extend(self.message.addrs(&g)?);
        }
        targets.extend(private.addrs("adv").unwrap_or_default());
        let mut best = (f64::NEG_INFINITY, 0);
        for r in 0..restarts {
            let mut rng = seeded(derive_seed(seed, r as u64));
            let rounds = (0..self.rounds())
                .map(|_| {
                    if targets.is_empty() {
                        vec![]
                    } else {
                        vec![Op::Gate(Gate::RawUnitary {
                            targets: targets.clone(),
                            matrix: haar_unitary(1 << targets.len(), &mut rng),
                        })]
                    }
                })
                .collect();
            let v = self.adversary_acceptance(&Adversary {
                private: private.clone(),
                rounds,
            })?;
            if v > best.0 {
                best = (v, r);
            }
        }
        Ok(SearchResult {
            best: best.0.max(0.0),
            best_restart: best.1,
            restarts,
            seed,
        })
    }
}

fn check_groups(ops: &[Op], allowed: &BTreeSet<String>, who: &str) -> Result<()> {
    let mut used = BTreeSet::new();
    for op in ops {
        op.groups(&mut used);
    }
    if let Some(g) = used.iter().find(|g| !allowed.contains(*g)) {
        return Err(Error::Misconfigured(format!("{who} step acts on `{g}`")));
    }
    Ok(())
}
