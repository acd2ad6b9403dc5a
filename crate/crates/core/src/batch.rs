//! Batch proofs, the witness-indistinguishability game over them, sparse
//! advice, and the compiler from a batch proof to a single-instance
//! protocol with a non-uniform honest prover.
//!
//! A row strategy is a triple `(x, w⁰, w¹)` with both pairs in the base
//! relation. A column strategy is a `t`-tuple of rows. The payoff of row `r`
//! against column `c` at round `j` averages, over the planted coordinate
//! `i*`, the trace distance between the batch verifier's round-`j` views
//! when bit `b_{i*}` is forced to 0 and to 1; coordinate `i*` holds row `r`
//! and coordinate `i ≠ i*` holds `c_i`, each using witness `w^{b_i}` with
//! the other bits uniform. The game entry is the largest payoff over rounds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures::{self, FixtureParams};
use crate::game::{solve_game, sparse_support, GameSolution, ZeroSumGame};
use crate::layout::{QubitAddr, DEFAULT_QUBIT_CAP};
use crate::linalg::ComplexMatrix;
use crate::qds::BitChannel;
use crate::qip::{ErrorProfile, Op, ProtocolSpec};
use crate::relation::{BitString, TruthTableRelation};
use crate::state::{trace_distance, DensityState};

/// Largest batch size enumerated exactly for payoffs.
pub const PAYOFF_MAX_T: usize = 10;
/// Largest batch size enumerated exactly for product strategies.
pub const PRODUCT_MAX_T: usize = 6;
/// All `t`-tuples of rows are used as columns up to this many tuples.
pub const ALL_TUPLES_MAX: usize = 1296;

pub const ACCEPT_GROUP: &str = "cacc";
const ISTAR: &str = "istar";
const ENTRY: &str = "entry";
const DUMMY: &str = "dummy";
const XVEC: &str = "xvec";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BatchKind {
    Sketch,
    Checking,
    Blind,
}

impl BatchKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sketch-batch" | "sketch" => Ok(Self::Sketch),
            "checking-batch" | "checking" => Ok(Self::Checking),
            "blind-batch" | "blind" => Ok(Self::Blind),
            other => Err(Error::UnknownFixture(other.to_string())),
        }
    }
}

/// A batch protocol family: one protocol per instance vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchProofSpec {
    pub kind: BatchKind,
    pub base: TruthTableRelation,
    pub t: usize,
    pub rho: f64,
    pub message_count: usize,
    pub cap: usize,
    batch: TruthTableRelation,
}

/// Facts recorded with every batch report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressionCheck {
    pub message_qubits: usize,
    pub rounds: usize,
    pub budget: f64,
    pub holds: bool,
}

impl BatchProofSpec {
    pub fn new(kind: BatchKind, base: TruthTableRelation, t: usize, rho: f64, message_count: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::Misconfigured("a batch needs at least one instance".into()));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Misconfigured(format!("compression parameter {rho} is outside (0, 1)")));
        }
        let batch = base.batch(t)?;
        Ok(Self {
            kind,
            base,
            t,
            rho,
            message_count,
            cap: DEFAULT_QUBIT_CAP,
            batch,
        })
    }

    pub fn batch_relation(&self) -> &TruthTableRelation {
        &self.batch
    }

    /// Witness bits revealed by the sketch fixture: `⌈ρt⌉`.
    pub fn sketch_bits(&self) -> usize {
        (self.rho * self.t as f64 - 1e-12).ceil().max(1.0) as usize
    }

    pub fn protocol(&self, xvec: &BitString) -> Result<ProtocolSpec> {
        let p = FixtureParams {
            relation: self.batch.clone(),
            instance: xvec.clone(),
            message_count: self.message_count,
            cap: self.cap,
            ..FixtureParams::default()
        };
        match self.kind {
            BatchKind::Sketch => fixtures::sketch_batch(&p, self.sketch_bits()),
            BatchKind::Checking => fixtures::checking_batch(&p),
            BatchKind::Blind => fixtures::blind_batch(&p),
        }
    }

    /// `q_M · k ≤ ρ t` with `q_M` the message qubits and `k` the rounds.
    pub fn compression(&self) -> Result<CompressionCheck> {
        let p = self.protocol(&BitString::zeros(self.batch.instance_bits()))?;
        let message_qubits = p.message.total_qubits();
        let rounds = p.rounds();
        let budget = self.rho * self.t as f64;
        Ok(CompressionCheck {
            message_qubits,
            rounds,
            budget,
            holds: (message_qubits * rounds) as f64 <= budget + 1e-12,
        })
    }
}

/// `(x, w⁰, w¹)` with both pairs in the base relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Row {
    pub x: BitString,
    pub w0: BitString,
    pub w1: BitString,
}

impl Row {
    pub fn label(&self) -> String {
        format!("{}:{}:{}", self.x, self.w0, self.w1)
    }

    fn witness(&self, b: usize) -> &BitString {
        if b == 0 {
            &self.w0
        } else {
            &self.w1
        }
    }
}

pub fn rows(base: &TruthTableRelation) -> Vec<Row> {
    base.witness_pairs().into_iter().map(|(x, w0, w1)| Row { x, w0, w1 }).collect()
}

/// Round views of the batch protocols, computed once per (instances, witnesses).
pub struct ViewCache<'a> {
    bp: &'a BatchProofSpec,
    protocols: BTreeMap<BitString, ProtocolSpec>,
    views: BTreeMap<(BitString, BitString), Vec<DensityState>>,
    rounds: usize,
}

impl<'a> ViewCache<'a> {
    pub fn new(bp: &'a BatchProofSpec) -> Result<Self> {
        let rounds = bp.protocol(&BitString::zeros(bp.batch.instance_bits()))?.rounds();
        Ok(Self {
            bp,
            protocols: BTreeMap::new(),
            views: BTreeMap::new(),
            rounds,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    fn protocol(&mut self, xvec: &BitString) -> Result<&ProtocolSpec> {
        if !self.protocols.contains_key(xvec) {
            let p = self.bp.protocol(xvec)?;
            self.protocols.insert(xvec.clone(), p);
        }
        Ok(&self.protocols[xvec])
    }

    /// Views after rounds `1..=k` as densities. Batch protocols that reveal
    /// classical records to the verifier are not supported.
    pub fn views(&mut self, xvec: &BitString, wvec: &BitString) -> Result<&[DensityState]> {
        let key = (xvec.clone(), wvec.clone());
        if !self.views.contains_key(&key) {
            let exec = self.protocol(xvec)?.execute(wvec)?;
            let mut out = Vec::with_capacity(self.rounds);
            for v in &exec.views[1..] {
                if v.records().any(|r| !r.is_empty()) {
                    return Err(Error::Unsupported("batch views with visible classical records".into()));
                }
                out.push(v.to_density());
            }
            self.views.insert(key.clone(), out);
        }
        Ok(&self.views[&key])
    }

    /// The channel `b ↦ view_j` for coordinates holding the given rows.
    pub fn channel(&mut self, coords: &[&Row], j: usize) -> Result<BitChannel> {
        let t = coords.len();
        let xvec = BitString::concat(&coords.iter().map(|r| r.x.clone()).collect::<Vec<_>>());
        let mut table = Vec::with_capacity(1 << t);
        let mut t_prime = 0;
        for b in 0..1usize << t {
            let wvec = witness_vector(coords, b);
            let v = self.views(&xvec, &wvec)?[j - 1].clone();
            t_prime = v.layout().total_qubits();
            table.push(v);
        }
        BitChannel::from_table(t, t_prime, table)
    }

    /// Payoff of row `r` against the column `c` at round `j`.
    pub fn payoff(&mut self, r: &Row, c: &[&Row], j: usize) -> Result<f64> {
        let t = self.bp.t;
        if c.len() != t {
            return Err(Error::DimensionMismatch(format!("column of {} rows for a batch of {t}", c.len())));
        }
        if t > PAYOFF_MAX_T {
            return Err(Error::EnumerationInfeasible(format!("batch of {t} exceeds {PAYOFF_MAX_T}")));
        }
        if j == 0 || j > self.rounds {
            return Err(Error::IndexOutOfRange(format!("round {j} of {}", self.rounds)));
        }
        let mut total = 0.0;
        for istar in 0..t {
            let coords: Vec<&Row> = (0..t).map(|i| if i == istar { r } else { c[i] }).collect();
            let xvec = BitString::concat(&coords.iter().map(|r| r.x.clone()).collect::<Vec<_>>());
            let mut cond: [Option<ComplexMatrix>; 2] = [None, None];
            for b in 0..1usize << t {
                let beta = bit(t, b, istar);
                let wvec = witness_vector(&coords, b);
                let m = self.views(&xvec, &wvec)?[j - 1].matrix().scale_real(2.0 / (1 << t) as f64);
                cond[beta] = Some(match cond[beta].take() {
                    Some(acc) => &acc + &m,
                    None => m,
                });
            }
            let layout = self.views(&xvec, &witness_vector(&coords, 0))?[j - 1].layout().clone();
            let [c0, c1] = cond.map(|m| m.expect("both bit values occur"));
            total += trace_distance(&DensityState::new(layout.clone(), c0)?, &DensityState::new(layout, c1)?)?;
        }
        Ok(total / t as f64)
    }

    /// Largest payoff over rounds.
    pub fn entry(&mut self, r: &Row, c: &[&Row]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 1..=self.rounds {
            worst = worst.max(self.payoff(r, c, j)?);
        }
        Ok(worst)
    }
}

/// Bit `i` (0-based, most significant first) of a `t`-bit value.
fn bit(t: usize, b: usize, i: usize) -> usize {
    (b >> (t - 1 - i)) & 1
}

fn witness_vector(coords: &[&Row], b: usize) -> BitString {
    let t = coords.len();
    BitString::concat(&(0..t).map(|i| coords[i].witness(bit(t, b, i)).clone()).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnSet {
    /// Every `t`-tuple of rows.
    AllTuples,
    /// Only the tuples repeating one row, used when all tuples are too many.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchGame {
    pub rows: Vec<Row>,
    /// Row indices per coordinate.
    pub columns: Vec<Vec<usize>>,
    pub column_set: ColumnSet,
    pub game: ZeroSumGame,
    pub compression: CompressionCheck,
}

fn tuples(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..t {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i);
                    v
                })
            })
            .collect();
    }
    out
}

pub fn build_game(bp: &BatchProofSpec) -> Result<BatchGame> {
    let rows = rows(&bp.base);
    if rows.is_empty() {
        return Err(Error::NoWitnessExists("every instance of the base relation".into()));
    }
    let all = rows.len().checked_pow(bp.t as u32).filter(|&n| n <= ALL_TUPLES_MAX);
    let (columns, column_set) = match all {
        Some(_) => (tuples(rows.len(), bp.t), ColumnSet::AllTuples),
        None => ((0..rows.len()).map(|i| vec![i; bp.t]).collect(), ColumnSet::Diagonal),
    };
    let mut cache = ViewCache::new(bp)?;
    let mut payoff = Vec::with_capacity(rows.len());
    for r in &rows {
        let mut line = Vec::with_capacity(columns.len());
        for c in &columns {
            let coords: Vec<&Row> = c.iter().map(|&i| &rows[i]).collect();
            line.push(cache.entry(r, &coords)?);
        }
        payoff.push(line);
    }
    let col_labels = columns
        .iter()
        .map(|c| c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    let game = ZeroSumGame::new(rows.iter().map(Row::label).collect(), col_labels, payoff)?;
    Ok(BatchGame {
        rows,
        columns,
        column_set,
        game,
        compression: bp.compression()?,
    })
}

/// Expected payoff when the row is drawn from `sigma` and every coordinate
/// of the column independently from `sigma`.
pub fn product_strategy_value(bp: &BatchProofSpec, sigma: &[f64]) -> Result<f64> {
    if bp.t > PRODUCT_MAX_T {
        return Err(Error::EnumerationInfeasible(format!("batch of {} exceeds {PRODUCT_MAX_T}", bp.t)));
    }
    let rows = rows(&bp.base);
    let total: f64 = sigma.iter().sum();
    if sigma.len() != rows.len() || (total - 1.0).abs() > 1e-9 || sigma.iter().any(|p| *p < 0.0) {
        return Err(Error::MalformedDistribution(format!(
            "{} weights summing to {total} for {} rows",
            sigma.len(),
            rows.len()
        )));
    }
    let support: Vec<usize> = (0..rows.len()).filter(|&i| sigma[i] > 0.0).collect();
    let mut cache = ViewCache::new(bp)?;
    let mut value = 0.0;
    for &r in &support {
        for c in tuples(support.len(), bp.t) {
            let idx: Vec<usize> = c.iter().map(|&k| support[k]).collect();
            let weight = sigma[r] * idx.iter().map(|&i| sigma[i]).product::<f64>();
            let coords: Vec<&Row> = idx.iter().map(|&i| &rows[i]).collect();
            value += weight * cache.entry(&rows[r], &coords)?;
        }
    }
    Ok(value)
}

/// The channel of a batch filled with one row at every coordinate, at round `j`.
pub fn induced_channel(bp: &BatchProofSpec, row: &Row, j: usize) -> Result<BitChannel> {
    let mut cache = ViewCache::new(bp)?;
    let coords = vec![row; bp.t];
    cache.channel(&coords, j)
}

/// Sparse advice: column strategies as explicit row triples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdviceMultiset {
    pub t: usize,
    pub entries: Vec<Vec<Row>>,
    pub epsilon: f64,
    pub c0: f64,
    pub seed: u64,
    pub attempt: usize,
    pub value: f64,
    pub margins: Vec<f64>,
}

pub fn advice(bg: &BatchGame, solution: &GameSolution, epsilon: f64, c0: f64, seed: u64) -> Result<AdviceMultiset> {
    let s = sparse_support(&bg.game, solution, epsilon, c0, seed)?;
    Ok(AdviceMultiset {
        t: bg.columns.first().map_or(0, Vec::len),
        entries: s
            .columns
            .iter()
            .map(|&c| bg.columns[c].iter().map(|&i| bg.rows[i].clone()).collect())
            .collect(),
        epsilon,
        c0,
        seed,
        attempt: s.attempt,
        value: s.value,
        margins: s.margins,
    })
}

/// Solves the game and draws advice in one step.
pub fn solve_and_advise(bp: &BatchProofSpec, epsilon: f64, c0: f64, seed: u64) -> Result<(BatchGame, GameSolution, AdviceMultiset)> {
    let bg = build_game(bp)?;
    let sol = solve_game(&bg.game)?;
    let adv = advice(&bg, &sol, epsilon, c0, seed)?;
    Ok((bg, sol, adv))
}

/// Average payoff of each row against the advice entries.
pub fn advice_payoffs(bp: &BatchProofSpec, advice: &AdviceMultiset) -> Result<Vec<(Row, f64)>> {
    let mut cache = ViewCache::new(bp)?;
    let n = advice.entries.len() as f64;
    rows(&bp.base)
        .into_iter()
        .map(|r| {
            let mut total = 0.0;
            for e in &advice.entries {
                let coords: Vec<&Row> = e.iter().collect();
                total += cache.entry(&r, &coords)?;
            }
            Ok((r, total / n))
        })
        .collect()
}

fn check_advice(bp: &BatchProofSpec, advice: &AdviceMultiset) -> Result<()> {
    if advice.entries.is_empty() {
        return Err(Error::AdviceRelationMismatch("advice is empty".into()));
    }
    for (k, e) in advice.entries.iter().enumerate() {
        if e.len() != bp.t {
            return Err(Error::AdviceRelationMismatch(format!("entry {k} has {} coordinates, batch has {}", e.len(), bp.t)));
        }
        for r in e {
            if !bp.base.holds(&r.x, &r.w0) || !bp.base.holds(&r.x, &r.w1) {
                return Err(Error::AdviceRelationMismatch(format!("entry {k} holds invalid row {}", r.label())));
            }
        }
    }
    Ok(())
}

/// Nested branch over `(i*, entry, dummy bits)` with a leaf per choice.
fn planted(
    t: usize,
    entries: usize,
    mut leaf: impl FnMut(usize, usize, usize) -> Result<Vec<Op>>,
) -> Result<Op> {
    let mut by_istar = Vec::with_capacity(t);
    for i in 0..t {
        let mut by_entry = Vec::with_capacity(entries);
        for e in 0..entries {
            let cases = (0..1usize << (t - 1)).map(|d| Ok((d, leaf(i, e, d)?))).collect::<Result<_>>()?;
            by_entry.push((e, vec![Op::Branch { label: DUMMY.into(), cases }]));
        }
        by_istar.push((i, vec![Op::Branch { label: ENTRY.into(), cases: by_entry }]));
    }
    Ok(Op::Branch { label: ISTAR.into(), cases: by_istar })
}

/// Coordinates of the planted batch: row `(x, w)` at `i*` and the advice
/// entry elsewhere, with dummy bit `i` taken from `d` in coordinate order.
fn planted_batch(x: &BitString, w: &BitString, entry: &[Row], istar: usize, d: usize) -> (BitString, BitString) {
    let t = entry.len();
    let mut xs = Vec::with_capacity(t);
    let mut ws = Vec::with_capacity(t);
    let mut k = 0;
    for (i, r) in entry.iter().enumerate() {
        if i == istar {
            xs.push(x.clone());
            ws.push(w.clone());
        } else {
            let b = (d >> (t - 2 - k)) & 1;
            k += 1;
            xs.push(r.x.clone());
            ws.push(r.witness(b).clone());
        }
    }
    (BitString::concat(&xs), BitString::concat(&ws))
}

/// The single-instance protocol for `x`: the prover plants `(x, w)` at a
/// uniform index of a batch filled from a uniform advice entry, announces
/// the instance vector and the index, and runs the batch prover; the
/// verifier checks `x` sits at the announced index and runs the batch
/// verifier for the announced vector.
pub fn compile(bp: &BatchProofSpec, advice: &AdviceMultiset, x: &BitString) -> Result<ProtocolSpec> {
    check_advice(bp, advice)?;
    bp.base.check_instance(x)?;
    if bp.message_count.is_multiple_of(2) {
        return Err(Error::Unsupported(format!(
            "compiling needs an odd batch message count, got {}",
            bp.message_count
        )));
    }
    let t = bp.t;
    let n = bp.base.instance_bits();
    let xbits = bp.batch.instance_bits();
    let template = bp.protocol(&BitString::zeros(xbits))?;
    if !template.verifier_steps[0].is_empty() {
        return Err(Error::Unsupported("batch verifier speaks before the prover".into()));
    }
    let k = template.rounds();
    let mut protocols = BTreeMap::new();
    for xv in BitString::all(xbits) {
        protocols.insert(xv.value(), bp.protocol(&xv)?);
    }

    let mut verifier = template.verifier.clone();
    verifier.push(ACCEPT_GROUP, 1)?;
    let cacc = QubitAddr::new(ACCEPT_GROUP, 0);
    let mut verifier_steps = vec![vec![]];
    for j in 1..k {
        verifier_steps.push(vec![Op::Branch {
            label: XVEC.into(),
            cases: protocols.iter().map(|(v, p)| (*v, p.verifier_steps[j].clone())).collect(),
        }]);
    }
    let final_cases = (0..t)
        .map(|i| {
            let cases = protocols
                .iter()
                .filter(|(_, p)| p.instance.as_str()[i * n..(i + 1) * n] == *x.as_str())
                .map(|(v, p)| {
                    let mut ops = p.verifier_steps[k].clone();
                    ops.push(Op::Gate(crate::circuit::Gate::Cnot {
                        control: p.accept.clone(),
                        target: cacc.clone(),
                    }));
                    (*v, ops)
                })
                .collect();
            (i, vec![Op::Branch { label: XVEC.into(), cases }])
        })
        .collect();
    verifier_steps.push(vec![Op::Branch { label: ISTAR.into(), cases: final_cases }]);

    let entries = advice.entries.len();
    let mut honest = BTreeMap::new();
    let base_witnesses: Vec<BitString> = if bp.base.witness_bits() <= fixtures::FULL_HONEST_TABLE_BITS {
        BitString::all(bp.base.witness_bits()).collect()
    } else {
        bp.base.witnesses(x)
    };
    for w in base_witnesses {
        let mut steps = Vec::with_capacity(k);
        for j in 0..k {
            let tree = planted(t, entries, |i, e, d| {
                let (xv, wv) = planted_batch(x, &w, &advice.entries[e], i, d);
                let p = &protocols[&xv.value()];
                let mut ops = Vec::new();
                if j == 0 {
                    ops.push(Op::Sample {
                        label: XVEC.into(),
                        visible: true,
                        outcomes: vec![crate::qip::Outcome { value: xv.value(), prob: 1.0, writes: vec![] }],
                    });
                }
                ops.extend(p.honest_steps(&wv)?[j].iter().cloned());
                Ok(ops)
            })?;
            let mut step = Vec::new();
            if j == 0 {
                step.push(Op::uniform(ISTAR, true, t, None));
                step.push(Op::uniform(ENTRY, false, entries, None));
                step.push(Op::uniform(DUMMY, false, 1 << (t - 1), None));
            }
            step.push(tree);
            steps.push(step);
        }
        honest.insert(w, steps);
    }

    let out = ProtocolSpec {
        name: format!("compiled({})", template.name),
        relation: bp.base.clone(),
        instance: x.clone(),
        message_count: bp.message_count,
        verifier,
        message: template.message.clone(),
        prover: template.prover.clone(),
        accept: cacc,
        verifier_steps,
        honest,
        view_exclusions: template.view_exclusions.clone(),
        public_coin: None,
        declared: ErrorProfile::new(
            template.declared.eps_c,
            template.declared.eps_s,
            advice.value + advice.epsilon,
        ),
        cap: bp.cap,
    };
    out.validate()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::default_batch_relation;
    use crate::qds::{analyze, Evaluation};

    fn bs(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    fn spec(kind: BatchKind, t: usize) -> BatchProofSpec {
        BatchProofSpec::new(kind, default_batch_relation(), t, 0.25, 1).unwrap()
    }

    #[test]
    fn six_rows() {
        assert_eq!(rows(&default_batch_relation()).len(), 6);
    }

    #[test]
    fn blind_and_equal_witness_payoffs_vanish() {
        let bp = spec(BatchKind::Blind, 2);
        let rs = rows(&bp.base);
        let mut cache = ViewCache::new(&bp).unwrap();
        assert_eq!(cache.payoff(&rs[1], &[&rs[0], &rs[1]], 1).unwrap(), 0.0);
        let sk = spec(BatchKind::Checking, 2);
        let mut cache = ViewCache::new(&sk).unwrap();
        let same = rs.iter().find(|r| r.w0 == r.w1).unwrap();
        assert!(cache.payoff(same, &[&rs[1], &rs[2]], 1).unwrap().abs() < 1e-12);
    }

    #[test]
    fn reveal_all_payoff_is_one() {
        let bp = spec(BatchKind::Checking, 2);
        let rs = rows(&bp.base);
        let differ = rs.iter().find(|r| r.w0 != r.w1).unwrap();
        let mut cache = ViewCache::new(&bp).unwrap();
        assert!((cache.payoff(differ, &[&rs[0], &rs[5]], 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_value_bounded_by_channel_stability() {
        let bp = spec(BatchKind::Sketch, 4);
        let rs = rows(&bp.base);
        for (i, r) in rs.iter().enumerate() {
            let mut sigma = vec![0.0; rs.len()];
            sigma[i] = 1.0;
            let v = product_strategy_value(&bp, &sigma).unwrap();
            let report = analyze(&induced_channel(&bp, r, 1).unwrap(), Evaluation::Exact).unwrap();
            assert!((v - report.gap).abs() < 1e-12);
            assert!(v <= 2.0 * report.delta + 1e-9);
        }
    }

    #[test]
    fn compiled_blind_is_complete_and_hiding() {
        let bp = spec(BatchKind::Blind, 2);
        let (_, _, adv) = solve_and_advise(&bp, 0.5, 8.0, 1).unwrap();
        let c = compile(&bp, &adv, &bs("00")).unwrap();
        assert!((c.accept_probability(&bs("10")).unwrap() - 1.0).abs() < 1e-12);
        assert!(c.wi_error_all_pairs().unwrap() < 1e-12);
    }

    #[test]
    fn invalid_advice_rejected() {
        let bp = spec(BatchKind::Blind, 2);
        let bad = AdviceMultiset {
            t: 2,
            entries: vec![vec![
                Row { x: bs("11"), w0: bs("00"), w1: bs("00") },
                Row { x: bs("00"), w0: bs("00"), w1: bs("00") },
            ]],
            epsilon: 0.5,
            c0: 8.0,
            seed: 0,
            attempt: 1,
            value: 0.0,
            margins: vec![],
        };
        assert!(matches!(compile(&bp, &bad, &bs("00")), Err(Error::AdviceRelationMismatch(_))));
    }
}
