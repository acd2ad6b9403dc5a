//! Named toy relations and protocols used by tests, examples and the CLI.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{predicate_write, ry, write_value, Gate};
use crate::error::{Error, Result};
use crate::layout::{QubitAddr, RegisterLayout, DEFAULT_QUBIT_CAP};
use crate::qip::{gate_ops, ErrorProfile, Op, ProtocolSpec};
use crate::relation::{BitString, TruthTableRelation};

/// Honest provers are tabulated for every witness up to this length, and
/// for valid witnesses only beyond it.
pub const FULL_HONEST_TABLE_BITS: usize = 8;

/// Two-bit relation with `f(00) = f(10) = 01`, `f(01) = 10`, `f(11) = 11`:
/// instance `01` has two witnesses and `00` has none.
pub fn default_relation() -> TruthTableRelation {
    table(&["01", "10", "01", "11"])
}

/// Two-bit relation with `f(00) = f(10) = 00`, `f(01) = 01`, `f(11) = 10`,
/// giving six (instance, witness, witness) rows; `11` has no witness.
pub fn default_batch_relation() -> TruthTableRelation {
    table(&["00", "01", "00", "10"])
}

fn table(images: &[&str]) -> TruthTableRelation {
    let rows = images.iter().map(|s| BitString::new(*s).expect("literal bit string")).collect();
    TruthTableRelation::new(2, 2, rows).expect("literal relation")
}

/// Parameters shared by the protocol fixtures; unused ones are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    pub relation: TruthTableRelation,
    pub instance: BitString,
    pub message_count: usize,
    /// Acceptance bias of `noisy-reveal`.
    pub epsilon: f64,
    /// Rotation angle of `partial-reveal`.
    pub theta: f64,
    pub cap: usize,
}

impl Default for FixtureParams {
    fn default() -> Self {
        Self {
            relation: default_relation(),
            instance: BitString::new("01").expect("literal"),
            message_count: 3,
            epsilon: 0.25,
            theta: std::f64::consts::FRAC_PI_8,
            cap: DEFAULT_QUBIT_CAP,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub params: &'static str,
    pub description: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "reveal",
            kind: "protocol",
            params: "x, m",
            description: "prover sends w in the computational basis; verifier checks f(w) = x",
        },
        CatalogEntry {
            name: "blind",
            kind: "protocol",
            params: "x, m",
            description: "prover sends |0>; verifier accepts iff x has a witness",
        },
        CatalogEntry {
            name: "noisy-reveal",
            kind: "protocol",
            params: "x, m, epsilon",
            description: "reveal, but a biased verifier ancilla also accepts with probability epsilon",
        },
        CatalogEntry {
            name: "partial-reveal",
            kind: "protocol",
            params: "x, m, theta",
            description: "prover rotates message qubit i by Ry(2 theta) when w_i = 1; verifier accepts iff x has a witness",
        },
        CatalogEntry {
            name: "sketch-batch",
            kind: "batch",
            params: "t, rho",
            description: "batch prover sends the first ceil(rho t) witness bits; verifier accepts unconditionally",
        },
        CatalogEntry {
            name: "checking-batch",
            kind: "batch",
            params: "t",
            description: "batch prover sends every witness; verifier checks all coordinates",
        },
        CatalogEntry {
            name: "blind-batch",
            kind: "batch",
            params: "t",
            description: "batch prover sends nothing; verifier accepts iff every coordinate has a witness",
        },
    ]
}

/// Builds a protocol fixture by name.
pub fn build_protocol(name: &str, p: &FixtureParams) -> Result<ProtocolSpec> {
    match name {
        "reveal" => reveal(p),
        "blind" => blind(p),
        "noisy-reveal" => noisy_reveal(p),
        "partial-reveal" => partial_reveal(p),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

fn rounds_for(m: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::Misconfigured("a protocol needs at least one message".into()));
    }
    Ok(m.div_ceil(2))
}

fn witness_table(p: &FixtureParams) -> Vec<BitString> {
    let wl = p.relation.witness_bits();
    if wl <= FULL_HONEST_TABLE_BITS {
        BitString::all(wl).collect()
    } else {
        p.relation.witnesses(&p.instance)
    }
}

/// Common skeleton: verifier `{A}` plus extras, message `M` of `width`
/// qubits, no prover memory, and the prover's first step from `first`.
fn skeleton(
    name: String,
    p: &FixtureParams,
    extra_verifier: &[(&str, usize)],
    width: usize,
    first: impl Fn(&BitString) -> Vec<Gate>,
    check: Vec<Op>,
    declared: ErrorProfile,
) -> Result<ProtocolSpec> {
    p.relation.check_instance(&p.instance)?;
    let k = rounds_for(p.message_count)?;
    let mut verifier = RegisterLayout::new([("A", 1)])?;
    for (g, n) in extra_verifier {
        verifier.push(*g, *n)?;
    }
    let mut verifier_steps = vec![vec![]; k + 1];
    verifier_steps[k] = check;
    let honest: BTreeMap<BitString, Vec<Vec<Op>>> = witness_table(p)
        .into_iter()
        .map(|w| {
            let mut steps = vec![vec![]; k];
            steps[0] = gate_ops(first(&w));
            (w, steps)
        })
        .collect();
    let spec = ProtocolSpec {
        name,
        relation: p.relation.clone(),
        instance: p.instance.clone(),
        message_count: p.message_count,
        verifier,
        message: RegisterLayout::new([("M", width)])?,
        prover: RegisterLayout::empty(),
        accept: QubitAddr::new("A", 0),
        verifier_steps,
        honest,
        view_exclusions: vec![],
        public_coin: None,
        declared,
        cap: p.cap,
    };
    spec.validate()?;
    Ok(spec)
}

fn message_addrs(width: usize) -> Vec<QubitAddr> {
    (0..width).map(|i| QubitAddr::new("M", i)).collect()
}

fn valid_check(p: &FixtureParams) -> impl Fn(usize) -> bool + '_ {
    move |v| p.relation.holds(&p.instance, &BitString::from_value(v, p.relation.witness_bits()))
}

pub fn reveal(p: &FixtureParams) -> Result<ProtocolSpec> {
    let wl = p.relation.witness_bits();
    let check = gate_ops(predicate_write(&message_addrs(wl), &QubitAddr::new("A", 0), valid_check(p)));
    skeleton(
        format!("reveal(m={})", p.message_count),
        p,
        &[],
        wl,
        |w| write_value(&message_addrs(wl), w.value()),
        check,
        ErrorProfile::new(0.0, 0.0, 1.0),
    )
}

/// Verifier step writing `A = 1` iff the instance has a witness.
fn oracle_accept(p: &FixtureParams) -> Vec<Op> {
    if p.relation.is_yes(&p.instance) {
        vec![Op::Gate(Gate::PauliX(QubitAddr::new("A", 0)))]
    } else {
        vec![]
    }
}

pub fn blind(p: &FixtureParams) -> Result<ProtocolSpec> {
    skeleton(
        format!("blind(m={})", p.message_count),
        p,
        &[],
        1,
        |_| vec![],
        oracle_accept(p),
        ErrorProfile::new(0.0, 0.0, 0.0),
    )
}

pub fn noisy_reveal(p: &FixtureParams) -> Result<ProtocolSpec> {
    if !(0.0..=1.0).contains(&p.epsilon) {
        return Err(Error::Misconfigured(format!("noise {} is not a probability", p.epsilon)));
    }
    let wl = p.relation.witness_bits();
    let noise = QubitAddr::new("N", 0);
    let mut inputs = message_addrs(wl);
    inputs.push(noise.clone());
    let valid = valid_check(p);
    let mut check = vec![ry(&noise, 2.0 * p.epsilon.sqrt().asin())];
    check.extend(predicate_write(&inputs, &QubitAddr::new("A", 0), |v| v & 1 == 1 || valid(v >> 1)));
    skeleton(
        format!("noisy-reveal(m={},eps={})", p.message_count, p.epsilon),
        p,
        &[("N", 1)],
        wl,
        |w| write_value(&message_addrs(wl), w.value()),
        gate_ops(check),
        ErrorProfile::new(0.0, p.epsilon, 1.0),
    )
}

/// Trace distance between the partial-reveal messages of witnesses that
/// differ in `d` bits: the messages are pure with overlap `cos^d θ`.
pub fn partial_reveal_distance(theta: f64, d: usize) -> f64 {
    (1.0 - theta.cos().powi(2 * d as i32)).max(0.0).sqrt()
}

pub fn partial_reveal(p: &FixtureParams) -> Result<ProtocolSpec> {
    let wl = p.relation.witness_bits();
    let theta = p.theta;
    skeleton(
        format!("partial-reveal(m={},theta={})", p.message_count, theta),
        p,
        &[],
        wl,
        |w| {
            (0..wl)
                .filter(|&i| w.bit(i))
                .map(|i| ry(&QubitAddr::new("M", i), 2.0 * theta))
                .collect()
        },
        oracle_accept(p),
        ErrorProfile::new(0.0, 0.0, partial_reveal_distance(theta, wl)),
    )
}

/// Batch fixture: the prover sends the first `bits` bits of the batch
/// witness and the verifier accepts unconditionally.
pub fn sketch_batch(p: &FixtureParams, bits: usize) -> Result<ProtocolSpec> {
    let wl = p.relation.witness_bits();
    if bits == 0 || bits > wl {
        return Err(Error::Misconfigured(format!("sketch of {bits} bits from a {wl}-bit witness")));
    }
    skeleton(
        format!("sketch-batch(m={},bits={bits})", p.message_count),
        p,
        &[],
        bits,
        |w| write_value(&message_addrs(bits), w.prefix(bits).value()),
        vec![Op::Gate(Gate::PauliX(QubitAddr::new("A", 0)))],
        ErrorProfile::new(0.0, 1.0, 1.0),
    )
}

/// Batch fixture: the prover sends the whole batch witness and the verifier
/// checks every coordinate.
pub fn checking_batch(p: &FixtureParams) -> Result<ProtocolSpec> {
    let mut spec = reveal(p)?;
    spec.name = format!("checking-batch(m={})", p.message_count);
    Ok(spec)
}

/// Batch fixture: the prover sends nothing and the verifier accepts iff
/// every coordinate has a witness.
pub fn blind_batch(p: &FixtureParams) -> Result<ProtocolSpec> {
    let mut spec = blind(p)?;
    spec.name = format!("blind-batch(m={})", p.message_count);
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    fn params(x: &str, m: usize) -> FixtureParams {
        FixtureParams {
            instance: bs(x),
            message_count: m,
            ..FixtureParams::default()
        }
    }

    #[test]
    fn reveal_is_complete_sound_and_revealing() {
        for m in [1, 3, 4] {
            let p = reveal(&params("01", m)).unwrap();
            assert_eq!(p.accept_probability(&bs("00")).unwrap(), 1.0);
            assert_eq!(p.accept_probability(&bs("01")).unwrap(), 0.0);
            assert!((p.wi_error(&bs("00"), &bs("10")).unwrap() - 1.0).abs() < 1e-12);
            assert_eq!(p.wi_error(&bs("00"), &bs("00")).unwrap(), 0.0);
            assert!(matches!(p.wi_error(&bs("00"), &bs("11")), Err(Error::InvalidWitness(_))));
        }
    }

    #[test]
    fn reveal_exhaustive_on_small_relations() {
        // Perfect completeness and soundness for every table with n, m <= 2.
        for code in 0..256usize {
            let images: Vec<BitString> = (0..4).map(|w| BitString::from_value((code >> (2 * w)) & 3, 2)).collect();
            let rel = TruthTableRelation::new(2, 2, images).unwrap();
            for x in BitString::all(2) {
                let p = reveal(&FixtureParams { relation: rel.clone(), instance: x.clone(), message_count: 1, ..FixtureParams::default() }).unwrap();
                for w in BitString::all(2) {
                    let expect = if rel.holds(&x, &w) { 1.0 } else { 0.0 };
                    assert!((p.accept_probability(&w).unwrap() - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn blind_hides_everything() {
        let p = blind(&params("01", 4)).unwrap();
        assert_eq!(p.wi_error(&bs("00"), &bs("10")).unwrap(), 0.0);
        assert!((p.accept_probability(&bs("00")).unwrap() - 1.0).abs() < 1e-12);
        let no = blind(&params("00", 3)).unwrap();
        assert_eq!(no.accept_probability(&bs("00")).unwrap(), 0.0);
        assert!(matches!(no.unbounded_wi_simulator(1), Err(Error::NoWitnessExists(_))));
    }

    #[test]
    fn noisy_reveal_accepts_wrong_witness_with_bias() {
        let p = noisy_reveal(&FixtureParams { epsilon: 0.3, ..params("01", 3) }).unwrap();
        assert!((p.accept_probability(&bs("01")).unwrap() - 0.3).abs() < 1e-12);
        assert!((p.accept_probability(&bs("10")).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_reveal_matches_overlap_formula() {
        let theta = 0.4;
        let p = partial_reveal(&FixtureParams { theta, ..params("01", 3) }).unwrap();
        let measured = p.wi_error(&bs("00"), &bs("10")).unwrap();
        assert!((measured - theta.sin().abs()).abs() < 1e-9);
        assert!((measured - partial_reveal_distance(theta, 1)).abs() < 1e-12);
    }

    #[test]
    fn simulator_uses_first_witness() {
        let p = reveal(&params("01", 3)).unwrap();
        let sim = p.unbounded_wi_simulator(1).unwrap();
        assert_eq!(sim.trace_distance(&p.view(&bs("00"), 1).unwrap()).unwrap(), 0.0);
        assert!((sim.trace_distance(&p.view(&bs("10"), 1).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!(p.simulator_gap().unwrap() <= p.wi_error_all_pairs().unwrap() + 1e-9);
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(matches!(build_protocol("nope", &FixtureParams::default()), Err(Error::UnknownFixture(_))));
    }
}
