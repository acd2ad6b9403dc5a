//! Distributed Grover search over `k` instances and the counter attack
//! against it.
//!
//! Registers, most significant first: the communicated index `C`, the
//! witness `W`, the verifier index `I` and, for the attacker, a private
//! counter `K`. One iteration is: the prover writes `w_i` into `W`
//! controlled on `C = i`; the verifier checks `C = I` (CNOT `I → C`,
//! reject unless `C = 0`, CNOT again) and applies the phase oracle on
//! `(I, W)`; the prover uncomputes `W` (the attacker also stamps the
//! iteration number into `K` when `C` holds the bad index and `K = 0`);
//! the verifier rejects unless `W = 0`, checks `C = I` again and applies
//! the diffusion to `I`. After `T` iterations the verifier measures `I`.
//!
//! Rejections are projective, so the unnormalized pure state stays exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{bits_for, DEFAULT_QUBIT_CAP};
use crate::linalg::C64;
use crate::relation::{BitString, TruthTableRelation};

/// Weight below which a counter branch is treated as empty.
const BRANCH_TOL: f64 = 1e-14;

/// Two-bit instances with one-bit witnesses: `f(0) = 01`, `f(1) = 00`.
pub fn default_relation() -> TruthTableRelation {
    let rows = ["01", "00"].iter().map(|s| BitString::new(*s).expect("literal")).collect();
    TruthTableRelation::new(2, 1, rows).expect("literal relation")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroverConfig {
    pub k: usize,
    pub iterations: usize,
    /// Verifier branch: 0 searches for a rejected witness, 1 for `j`.
    pub b: usize,
    pub j: usize,
    pub bad_set: Vec<usize>,
    pub relation: TruthTableRelation,
    pub good_instance: BitString,
    pub bad_instance: BitString,
    /// Written by the honest prover for a bad instance.
    pub garbage_witness: BitString,
    pub cap: usize,
}

impl GroverConfig {
    pub fn new(k: usize, iterations: usize, b: usize, j: usize, bad_set: Vec<usize>) -> Self {
        Self {
            k,
            iterations,
            b,
            j,
            bad_set,
            relation: default_relation(),
            good_instance: BitString::new("00").expect("literal"),
            bad_instance: BitString::new("11").expect("literal"),
            garbage_witness: BitString::new("1").expect("literal"),
            cap: DEFAULT_QUBIT_CAP,
        }
    }

    /// `⌊π/4 · √k⌋`.
    pub fn default_iterations(k: usize) -> usize {
        (std::f64::consts::FRAC_PI_4 * (k as f64).sqrt()).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_power_of_two() || self.k < 2 || self.k > 64 {
            return Err(Error::Misconfigured(format!("k = {} must be a power of two in 2..=64", self.k)));
        }
        if self.b > 1 {
            return Err(Error::Misconfigured(format!("branch bit {}", self.b)));
        }
        if self.j >= self.k {
            return Err(Error::IndexOutOfRange(format!("marked index {} of {}", self.j, self.k)));
        }
        if let Some(i) = self.bad_set.iter().find(|&&i| i >= self.k) {
            return Err(Error::IndexOutOfRange(format!("bad index {i} of {}", self.k)));
        }
        self.relation.check_instance(&self.good_instance)?;
        self.relation.check_instance(&self.bad_instance)?;
        self.relation.check_witness(&self.garbage_witness)?;
        if !self.relation.is_yes(&self.good_instance) {
            return Err(Error::Misconfigured(format!("good instance {} has no witness", self.good_instance)));
        }
        if self.relation.is_yes(&self.bad_instance) {
            return Err(Error::Misconfigured(format!("bad instance {} has a witness", self.bad_instance)));
        }
        Ok(())
    }

    fn instance(&self, i: usize) -> &BitString {
        if self.bad_set.contains(&i) {
            &self.bad_instance
        } else {
            &self.good_instance
        }
    }

    /// The witness the prover writes for index `i`.
    fn witness(&self, i: usize) -> usize {
        if self.bad_set.contains(&i) {
            self.garbage_witness.value()
        } else {
            self.relation.witnesses(&self.good_instance)[0].value()
        }
    }

    fn rejects(&self, i: usize, w: usize) -> bool {
        let wb = BitString::from_value(w, self.relation.witness_bits());
        !self.relation.holds(self.instance(i), &wb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProverKind {
    Honest,
    Attacker,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubroutineOutcome {
    pub k: usize,
    pub iterations: usize,
    pub b: usize,
    pub j: usize,
    pub prover: ProverKind,
    pub qubits: usize,
    /// Probability of each verdict: `reject-index`, `reject-witness`,
    /// `reject-final` and `accept`.
    pub verdicts: BTreeMap<String, f64>,
    /// Probability of measuring each verifier index (after surviving the checks).
    pub index_distribution: Vec<f64>,
    /// Distinct counter values carrying weight at the end (1 for the honest prover).
    pub branch_count: usize,
}

struct Dims {
    ib: usize,
    wb: usize,
    kb: usize,
}

impl Dims {
    fn index(&self, c: usize, w: usize, i: usize, kk: usize) -> usize {
        (((c << self.wb) | w) << self.ib | i) << self.kb | kk
    }

    fn split(&self, idx: usize) -> (usize, usize, usize, usize) {
        let kk = idx & ((1 << self.kb) - 1);
        let i = (idx >> self.kb) & ((1 << self.ib) - 1);
        let w = (idx >> (self.kb + self.ib)) & ((1 << self.wb) - 1);
        let c = idx >> (self.kb + self.ib + self.wb);
        (c, w, i, kk)
    }

    fn qubits(&self) -> usize {
        2 * self.ib + self.wb + self.kb
    }
}

struct Sim<'a> {
    cfg: &'a GroverConfig,
    d: Dims,
    v: Vec<C64>,
}

impl Sim<'_> {
    fn permute(&mut self, f: impl Fn(usize, usize, usize, usize) -> (usize, usize, usize, usize)) {
        let mut out = vec![C64::new(0.0, 0.0); self.v.len()];
        for (idx, a) in self.v.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            let (c, w, i, kk) = self.d.split(idx);
            let (c2, w2, i2, k2) = f(c, w, i, kk);
            out[self.d.index(c2, w2, i2, k2)] += a;
        }
        self.v = out;
    }

    /// Zeroes amplitudes failing `keep`; returns the removed weight.
    fn project(&mut self, keep: impl Fn(usize, usize, usize, usize) -> bool) -> f64 {
        let mut removed = 0.0;
        for idx in 0..self.v.len() {
            let (c, w, i, kk) = self.d.split(idx);
            if !keep(c, w, i, kk) {
                removed += self.v[idx].norm_sqr();
                self.v[idx] = C64::new(0.0, 0.0);
            }
        }
        removed
    }

    fn write_witness(&mut self) {
        let cfg = self.cfg;
        self.permute(|c, w, i, kk| (c, w ^ cfg.witness(c), i, kk));
    }

    fn index_check(&mut self) -> f64 {
        self.permute(|c, w, i, kk| (c ^ i, w, i, kk));
        let removed = self.project(|c, _, _, _| c == 0);
        self.permute(|c, w, i, kk| (c ^ i, w, i, kk));
        removed
    }

    fn oracle(&mut self) {
        let cfg = self.cfg;
        for idx in 0..self.v.len() {
            let (_, w, i, _) = self.d.split(idx);
            let marked = if cfg.b == 0 { cfg.rejects(i, w) } else { i == cfg.j };
            if marked {
                self.v[idx] = -self.v[idx];
            }
        }
    }

    fn diffusion(&mut self) {
        let n = 1usize << self.d.ib;
        let mut idx_groups: BTreeMap<(usize, usize, usize), C64> = BTreeMap::new();
        for idx in 0..self.v.len() {
            let (c, w, _, kk) = self.d.split(idx);
            *idx_groups.entry((c, w, kk)).or_insert(C64::new(0.0, 0.0)) += self.v[idx];
        }
        for idx in 0..self.v.len() {
            let (c, w, _, kk) = self.d.split(idx);
            let mean = idx_groups[&(c, w, kk)] / n as f64;
            self.v[idx] = mean * 2.0 - self.v[idx];
        }
    }

    fn stamp(&mut self, bad: usize, round: usize) {
        self.permute(|c, w, i, kk| {
            if c == bad && kk == 0 {
                (c, w, i, round)
            } else if c == bad && kk == round {
                (c, w, i, 0)
            } else {
                (c, w, i, kk)
            }
        });
    }
}

/// Exact run of the subroutine against the chosen prover.
pub fn run_subroutine(cfg: &GroverConfig, prover: ProverKind) -> Result<SubroutineOutcome> {
    cfg.validate()?;
    let bad = match (prover, cfg.bad_set.as_slice()) {
        (ProverKind::Attacker, [one]) => Some(*one),
        (ProverKind::Attacker, []) => None,
        (ProverKind::Attacker, many) => {
            return Err(Error::Misconfigured(format!(
                "the attack targets a single bad index, got {}",
                many.len()
            )))
        }
        (ProverKind::Honest, _) => None,
    };
    let ib = cfg.k.trailing_zeros() as usize;
    let kb = match prover {
        ProverKind::Attacker => bits_for(cfg.iterations + 1),
        ProverKind::Honest => 0,
    };
    let d = Dims { ib, wb: cfg.relation.witness_bits(), kb };
    let qubits = d.qubits();
    if qubits > cfg.cap {
        return Err(Error::DimensionCapExceeded { qubits, cap: cfg.cap });
    }
    let mut sim = Sim { cfg, v: vec![C64::new(0.0, 0.0); 1 << qubits], d };
    let amp = C64::new(1.0 / (cfg.k as f64).sqrt(), 0.0);
    for i in 0..cfg.k {
        let idx = sim.d.index(i, 0, i, 0);
        sim.v[idx] = amp;
    }
    let mut reject_index = 0.0;
    let mut reject_witness = 0.0;
    for round in 1..=cfg.iterations {
        sim.write_witness();
        reject_index += sim.index_check();
        sim.oracle();
        sim.write_witness();
        if let Some(b) = bad {
            sim.stamp(b, round);
        }
        reject_witness += sim.project(|_, w, _, _| w == 0);
        sim.permute(|c, w, i, kk| (c ^ i, w, i, kk));
        reject_index += sim.project(|c, _, _, _| c == 0);
        sim.diffusion();
        sim.permute(|c, w, i, kk| (c ^ i, w, i, kk));
    }
    let mut index_distribution = vec![0.0; cfg.k];
    let mut counters: BTreeMap<usize, f64> = BTreeMap::new();
    for (idx, a) in sim.v.iter().enumerate() {
        let (_, _, i, kk) = sim.d.split(idx);
        index_distribution[i] += a.norm_sqr();
        *counters.entry(kk).or_insert(0.0) += a.norm_sqr();
    }
    let accept: f64 = (0..cfg.k)
        .filter(|&i| if cfg.b == 0 { !cfg.rejects(i, cfg.witness(i)) } else { i == cfg.j })
        .map(|i| index_distribution[i])
        .sum();
    let survived: f64 = index_distribution.iter().sum();
    let verdicts = BTreeMap::from([
        ("reject-index".to_string(), reject_index),
        ("reject-witness".to_string(), reject_witness),
        ("reject-final".to_string(), (survived - accept).max(0.0)),
        ("accept".to_string(), accept),
    ]);
    Ok(SubroutineOutcome {
        k: cfg.k,
        iterations: cfg.iterations,
        b: cfg.b,
        j: cfg.j,
        prover,
        qubits,
        verdicts,
        index_distribution,
        branch_count: counters.values().filter(|w| **w > BRANCH_TOL).count(),
    })
}

/// Runs with `T = 0, 1, 2, 4, …` up to `cap_iterations`, one after another.
pub fn exponential_schedule(cap_iterations: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut t = 1;
    while t <= cap_iterations {
        out.push(t);
        t *= 2;
    }
    if *out.last().expect("nonempty") != cap_iterations {
        out.push(cap_iterations);
    }
    out
}

pub fn run_schedule(cfg: &GroverConfig, prover: ProverKind, schedule: &[usize]) -> Result<Vec<SubroutineOutcome>> {
    schedule
        .iter()
        .map(|&t| run_subroutine(&GroverConfig { iterations: t, ..cfg.clone() }, prover))
        .collect()
}

/// `sin²((2T + 1) · arcsin(1/√k))`: the marked-index probability after `T`
/// iterations with one marked index.
pub fn closed_form_success(k: usize, iterations: usize) -> f64 {
    let theta = (1.0 / (k as f64).sqrt()).asin();
    ((2 * iterations + 1) as f64 * theta).sin().powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub k: usize,
    pub iterations: usize,
    pub catch_b0_attack: f64,
    pub catch_b0_honest_bad: f64,
    pub find_j_attack: f64,
    pub find_j_honest: f64,
}

impl CurvePoint {
    pub const CSV_HEADER: &'static str = "k,T,catch_b0_attack,catch_b0_honest_bad,find_j_attack,find_j_honest";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.12},{:.12},{:.12},{:.12}",
            self.k, self.iterations, self.catch_b0_attack, self.catch_b0_honest_bad, self.find_j_attack, self.find_j_honest
        )
    }
}

/// Exact attack measurements with one bad instance at index 0 and
/// `T = ⌊π/4 · √k⌋`. The b = 1 numbers average over the marked index `j`.
pub fn soundness_break_curve(ks: &[usize], cap: usize) -> Result<Vec<CurvePoint>> {
    ks.iter()
        .map(|&k| {
            let t = GroverConfig::default_iterations(k);
            let base = GroverConfig { cap, ..GroverConfig::new(k, t, 0, 0, vec![0]) };
            let catch = |p| run_subroutine(&base, p).map(|o| o.index_distribution[0]);
            let find = |p| -> Result<f64> {
                let mut total = 0.0;
                for j in 0..k {
                    let cfg = GroverConfig { b: 1, j, ..base.clone() };
                    total += run_subroutine(&cfg, p)?.verdicts["accept"];
                }
                Ok(total / k as f64)
            };
            Ok(CurvePoint {
                k,
                iterations: t,
                catch_b0_attack: catch(ProverKind::Attacker)?,
                catch_b0_honest_bad: catch(ProverKind::Honest)?,
                find_j_attack: find(ProverKind::Attacker)?,
                find_j_honest: find(ProverKind::Honest)?,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_iteration_finds_the_mark_among_four() {
        let o = run_subroutine(&GroverConfig::new(4, 1, 1, 2, vec![]), ProverKind::Honest).unwrap();
        assert!((o.index_distribution[2] - 1.0).abs() < 1e-12);
        assert!((o.verdicts["accept"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn honest_amplitude_follows_recursion() {
        for t in 0..=4 {
            let o = run_subroutine(&GroverConfig::new(16, t, 1, 5, vec![]), ProverKind::Honest).unwrap();
            assert!((o.index_distribution[5] - closed_form_success(16, t)).abs() < 1e-9);
            assert_eq!(o.verdicts["reject-index"], 0.0);
            assert_eq!(o.verdicts["reject-witness"], 0.0);
        }
    }

    #[test]
    fn no_bad_instances_accepts() {
        for prover in [ProverKind::Honest, ProverKind::Attacker] {
            let o = run_subroutine(&GroverConfig::new(8, 2, 0, 0, vec![]), prover).unwrap();
            assert!((o.verdicts["accept"] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn attack_hides_the_bad_index() {
        let cfg = GroverConfig::new(4, 1, 0, 0, vec![3]);
        let honest = run_subroutine(&cfg, ProverKind::Honest).unwrap();
        let attack = run_subroutine(&cfg, ProverKind::Attacker).unwrap();
        assert!(attack.index_distribution[3] < honest.index_distribution[3], "{:?} {:?}", attack, honest);
        assert!(attack.branch_count <= cfg.iterations + 1);
    }

    #[test]
    fn attack_needs_one_bad_index() {
        let cfg = GroverConfig::new(4, 1, 0, 0, vec![1, 2]);
        assert!(matches!(run_subroutine(&cfg, ProverKind::Attacker), Err(Error::Misconfigured(_))));
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = GroverConfig::new(64, 6, 0, 0, vec![0]);
        assert!(matches!(run_subroutine(&cfg, ProverKind::Attacker), Err(Error::DimensionCapExceeded { .. })));
    }

    #[test]
    fn schedule_doubles() {
        assert_eq!(exponential_schedule(4), vec![0, 1, 2, 4]);
        assert_eq!(exponential_schedule(3), vec![0, 1, 2, 3]);
    }
}

#[cfg(test)]
mod curve_tests {
    use super::*;

    #[test]
    fn curve_fits_the_cap_and_catch_probability_falls() {
        let pts = soundness_break_curve(&[4, 8, 16, 32], 14).unwrap();
        for p in &pts {
            println!("{}", p.csv_row());
            assert!((p.catch_b0_honest_bad - closed_form_success(p.k, p.iterations)).abs() < 1e-9);
            assert!((p.find_j_honest - closed_form_success(p.k, p.iterations)).abs() < 1e-9);
        }
        for w in pts.windows(2) {
            assert!(w[1].catch_b0_attack <= w[0].catch_b0_attack + 1e-12);
        }
    }
}
