//! Three-message private-coin to one-bit public-coin transform.
//!
//! The prover runs the honest interaction up to the verifier's first step
//! and sends the verifier's register; the verifier answers with one uniform
//! bit `b`. For `b = 0` it rewinds its first step and checks for all zeros,
//! for `b = 1` the prover finishes its second step and the verifier runs its
//! final step.
//!
//! The verifier's first step must be coherent for the rewind to exist, so
//! its classical coins are purified: each coin group `G` is prepared in the
//! superposition of its outcomes and copied into a purifier group
//! `G.coin`, and every branch on that coin becomes a select on `G`.

use std::collections::BTreeMap;

use crate::circuit::{predicate_write, preparation_unitary, Gate};
use crate::error::{Error, Result};
use crate::layout::{QubitAddr, RegisterLayout};
use crate::qip::{gate_ops, inverse_ops, ops_as_gates, Op, ProtocolSpec, PublicCoin};

use super::claimed_public_coin;

pub const COIN_GROUP: &str = "pc.b";
pub const ACCEPT_GROUP: &str = "pc.acc";

/// A purified coin: its register and the register value of each outcome.
struct Coin {
    group: String,
    masks: BTreeMap<usize, usize>,
}

struct Purifier<'a> {
    layout: &'a RegisterLayout,
    coins: BTreeMap<String, Coin>,
}

impl Purifier<'_> {
    fn addrs(&self, group: &str) -> Result<Vec<QubitAddr>> {
        self.layout.addrs(group)
    }

    /// Rewrites branches on purified coins as selects on their registers.
    fn ops(&self, ops: &[Op]) -> Result<Vec<Op>> {
        ops.iter().map(|op| self.op(op)).collect()
    }

    fn op(&self, op: &Op) -> Result<Op> {
        match op {
            Op::Branch { label, cases } => match self.coins.get(label) {
                Some(coin) => {
                    let width = coin.masks.values().max().map_or(0, |m| m + 1);
                    let mut branches = vec![vec![]; width];
                    for (value, case) in cases {
                        let Some(mask) = coin.masks.get(value) else { continue };
                        branches[*mask] = ops_as_gates(&self.ops(case)?).ok_or_else(|| {
                            Error::Unsupported(format!("branch on coin `{label}` draws inside a case"))
                        })?;
                    }
                    Ok(Op::Gate(Gate::Select {
                        control: self.addrs(&coin.group)?,
                        branches,
                    }))
                }
                None => Ok(Op::Branch {
                    label: label.clone(),
                    cases: cases
                        .iter()
                        .map(|(v, c)| Ok((*v, self.ops(c)?)))
                        .collect::<Result<_>>()?,
                }),
            },
            other => Ok(other.clone()),
        }
    }
}

/// Purifies the coins of the verifier's first step, returning the coherent
/// step, the purifier layout and the coin table.
fn purify_first_step<'a>(
    p: &ProtocolSpec,
    layout: &'a RegisterLayout,
    step: &[Op],
) -> Result<(Vec<Op>, RegisterLayout, Purifier<'a>)> {
    let mut purifiers = RegisterLayout::empty();
    let mut pur = Purifier {
        layout,
        coins: BTreeMap::new(),
    };
    let mut out = Vec::new();
    for op in step {
        match op {
            Op::Sample { label, outcomes, .. } => {
                let group = match outcomes.first().map(|o| o.writes.as_slice()) {
                    Some([(g, _)]) => g.clone(),
                    _ => {
                        return Err(Error::Unsupported(format!(
                            "coin `{label}` must write exactly one register"
                        )))
                    }
                };
                let width = p.verifier.concat(&p.message)?.group(&group)?.qubits;
                let mut probs = vec![0.0; 1 << width];
                let mut masks = BTreeMap::new();
                for o in outcomes {
                    match o.writes.as_slice() {
                        [(g, mask)] if *g == group && probs[*mask] == 0.0 => {
                            probs[*mask] = o.prob;
                            masks.insert(o.value, *mask);
                        }
                        _ => {
                            return Err(Error::Unsupported(format!(
                                "coin `{label}` outcomes must write distinct values into `{group}`"
                            )))
                        }
                    }
                }
                let coin_group = format!("{group}.coin");
                purifiers.push(coin_group.clone(), width)?;
                out.push(Op::Gate(Gate::RawUnitary {
                    targets: layout.addrs(&group)?,
                    matrix: preparation_unitary(&probs)?,
                }));
                for i in 0..width {
                    out.push(Op::Gate(Gate::Cnot {
                        control: QubitAddr::new(group.clone(), i),
                        target: QubitAddr::new(coin_group.clone(), i),
                    }));
                }
                pur.coins.insert(label.clone(), Coin { group, masks });
            }
            Op::Measure { label, .. } => {
                return Err(Error::Unsupported(format!("first verifier step measures `{label}`")))
            }
            other => out.push(pur.op(other)?),
        }
    }
    if ops_as_gates(&out).is_none() {
        return Err(Error::Unsupported("first verifier step branches on a non-coin value".into()));
    }
    Ok((out, purifiers, pur))
}

pub fn to_public_coin(p: &ProtocolSpec) -> Result<ProtocolSpec> {
    if p.message_count != 3 {
        return Err(Error::WrongMessageCount {
            expected: 3,
            got: p.message_count,
        });
    }
    p.validate()?;

    // The coin table only needs the names; build the final layout after.
    let probe = p.verifier.concat(&p.message)?;
    let coin_names = {
        let (_, purifiers, _) = purify_first_step(p, &probe_with_purifiers(p, &probe)?, &p.verifier_steps[1])?;
        purifiers
    };
    let mut verifier = RegisterLayout::empty();
    verifier.push(ACCEPT_GROUP, 1)?;
    let mut message = p.verifier.concat(&coin_names)?;
    message.push(COIN_GROUP, 1)?;
    let message = message.concat(&p.message)?;
    let global = verifier.concat(&message)?.concat(&p.prover)?;
    global.check_cap(p.cap)?;

    let (u1, purifiers, pur) = purify_first_step(p, &global, &p.verifier_steps[1])?;
    let u1_inv = inverse_ops(&u1)?;
    let acc = QubitAddr::new(ACCEPT_GROUP, 0);

    let mut rewound: Vec<QubitAddr> = p.verifier.all_addrs();
    rewound.extend(purifiers.all_addrs());
    let mut b0 = u1_inv;
    b0.extend(gate_ops(predicate_write(&rewound, &acc, |v| v == 0)));
    let mut b1 = pur.ops(&p.verifier_steps[2])?;
    b1.push(Op::Gate(Gate::Cnot {
        control: p.accept.clone(),
        target: acc.clone(),
    }));
    let v1 = vec![Op::uniform(COIN_GROUP, true, 2, Some(COIN_GROUP))];
    let v2 = vec![Op::Branch {
        label: COIN_GROUP.into(),
        cases: vec![(0, b0), (1, b1)],
    }];

    let honest = p
        .honest
        .iter()
        .map(|(w, steps)| {
            let mut first = steps[0].clone();
            first.extend(u1.iter().cloned());
            let second = vec![Op::Branch {
                label: COIN_GROUP.into(),
                cases: vec![(1, pur.ops(&steps[1])?)],
            }];
            Ok((w.clone(), vec![first, second]))
        })
        .collect::<Result<_>>()?;

    let mut round1: Vec<String> = p.message.group_names();
    round1.extend(p.view_exclusions.first().cloned().unwrap_or_default());
    let mut view_exclusions = vec![round1];
    if let Some(r2) = p.view_exclusions.get(1) {
        view_exclusions.push(r2.clone());
    }
    let out = ProtocolSpec {
        name: format!("public-coin({})", p.name),
        relation: p.relation.clone(),
        instance: p.instance.clone(),
        message_count: 3,
        verifier,
        message,
        prover: p.prover.clone(),
        accept: acc,
        verifier_steps: vec![vec![], v1, v2],
        honest,
        view_exclusions,
        public_coin: Some(PublicCoin {
            group: COIN_GROUP.into(),
            bits: 1,
        }),
        declared: claimed_public_coin(p.declared),
        cap: p.cap,
    };
    out.validate()?;
    Ok(out)
}

/// The input's verifier and message layout extended by every purifier the
/// first step could need, used to discover the purifier names.
fn probe_with_purifiers(p: &ProtocolSpec, base: &RegisterLayout) -> Result<RegisterLayout> {
    let mut out = base.clone();
    for op in &p.verifier_steps[1] {
        if let Op::Sample { outcomes, .. } = op {
            if let Some([(g, _)]) = outcomes.first().map(|o| o.writes.as_slice()) {
                let name = format!("{g}.coin");
                if !out.contains(&name) {
                    out.push(name, base.group(g)?.qubits)?;
                }
            }
        }
    }
    Ok(out)
}

/// The groups the prover sends in its first message.
pub fn first_message_groups(p: &ProtocolSpec) -> Vec<String> {
    let hidden: &[String] = p.view_exclusions.first().map(Vec::as_slice).unwrap_or(&[]);
    p.message
        .group_names()
        .into_iter()
        .filter(|g| g != COIN_GROUP && !hidden.contains(g))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, FixtureParams};
    use crate::relation::BitString;
    use crate::transforms::compress_rounds;

    fn bs(s: &str) -> BitString {
        BitString::new(s).unwrap()
    }

    #[test]
    fn noisy_reveal_keeps_wi_and_rewinds() {
        let p = fixtures::noisy_reveal(&FixtureParams::default()).unwrap();
        let pc = to_public_coin(&p).unwrap();
        assert_eq!(pc.public_coin.as_ref().unwrap().bits, 1);
        let (w0, w1) = (bs("00"), bs("10"));
        assert!((pc.wi_error(&w0, &w1).unwrap() - p.wi_error(&w0, &w1).unwrap()).abs() < 1e-9);
        let e = pc.execute(&w0).unwrap();
        let cond = e.conditional_acceptance(COIN_GROUP);
        assert!((cond[&0] - 1.0).abs() < 1e-9);
        assert!((cond[&1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn compressed_blind_purifies_round_coin() {
        let c = compress_rounds(&fixtures::blind(&FixtureParams { message_count: 4, ..FixtureParams::default() }).unwrap()).unwrap();
        let pc = to_public_coin(&c).unwrap();
        assert_eq!(pc.qubits(), 13);
        assert!(pc.message.contains("R.coin"));
        let e = pc.execute(&bs("00")).unwrap();
        assert!((e.conditional_acceptance(COIN_GROUP)[&0] - 1.0).abs() < 1e-9);
        assert!((e.accept_probability - 1.0).abs() < 1e-9);
        assert_eq!(pc.wi_error(&bs("00"), &bs("10")).unwrap(), 0.0);
    }

    #[test]
    fn wrong_message_count() {
        let p = fixtures::blind(&FixtureParams { message_count: 4, ..FixtureParams::default() }).unwrap();
        assert!(matches!(to_public_coin(&p), Err(Error::WrongMessageCount { expected: 3, got: 4 })));
    }
}
