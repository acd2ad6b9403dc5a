//! Round compression of an even-message protocol to three messages.
//!
//! The prover sends snapshots of the honest interaction; the verifier checks
//! either one random transition (by a swap test through an EPR pair `X, Y`)
//! or the final acceptance. Slot `j` (groups `s{j}.*`) holds the state just
//! before the input verifier's step `j − 1`.

use crate::circuit::Gate;
use crate::error::{Error, Result};
use crate::layout::{bits_for, QubitAddr, RegisterLayout};
use crate::qip::{prefix_ops, Op, ProtocolSpec};

use super::claimed_compress;

fn slot(j: usize) -> String {
    format!("s{j}.")
}

fn has_draws(ops: &[Op]) -> bool {
    ops.iter().any(|op| !matches!(op, Op::Gate(_)))
}

fn addrs(layout: &RegisterLayout) -> Vec<QubitAddr> {
    layout.all_addrs()
}

pub fn compress_rounds(p: &ProtocolSpec) -> Result<ProtocolSpec> {
    let m = p.message_count;
    if m % 2 == 1 {
        return Err(Error::OddMessageCount(m));
    }
    if m < 4 {
        return Err(Error::Unsupported(format!("round compression needs at least 4 messages, got {m}")));
    }
    p.validate()?;
    let k = p.rounds();
    if let Some(j) = (0..k).find(|&j| has_draws(&p.verifier_steps[j])) {
        return Err(Error::Unsupported(format!(
            "verifier step {j} draws classical values; only the final step may"
        )));
    }
    let vm = p.verifier.concat(&p.message)?;
    let x = QubitAddr::new("X", 0);
    let y = QubitAddr::new("Y", 0);
    let a = QubitAddr::new("A", 0);
    let r_bits = bits_for(k);

    let mut verifier = p.verifier.prefixed(&slot(1));
    verifier.push("X", 1)?;
    verifier.push("A", 1)?;
    let mut message = p.message.prefixed(&slot(1));
    for j in 2..=k + 1 {
        message = message.concat(&vm.prefixed(&slot(j)))?;
    }
    if r_bits > 0 {
        message.push("R", r_bits)?;
    }
    message.push("Y", 1)?;
    let mut prover = RegisterLayout::empty();
    for j in 1..=k + 1 {
        prover = prover.concat(&p.prover.prefixed(&slot(j)))?;
    }
    verifier.concat(&message)?.concat(&prover)?.check_cap(p.cap)?;

    // Step 1: EPR pair, a uniform round r, and the input's step r − 1 on slot r.
    let mut v1 = vec![
        Op::Gate(Gate::Hadamard(x.clone())),
        Op::Gate(Gate::Cnot { control: x.clone(), target: y.clone() }),
        Op::Sample {
            label: "r".into(),
            visible: true,
            outcomes: (1..=k)
                .map(|r| crate::qip::Outcome {
                    value: r,
                    prob: 1.0 / k as f64,
                    writes: if r_bits > 0 { vec![("R".into(), r - 1)] } else { vec![] },
                })
                .collect(),
        },
    ];
    v1.push(Op::Branch {
        label: "r".into(),
        cases: (1..=k).map(|r| (r, prefix_ops(&p.verifier_steps[r - 1], &slot(r)))).collect(),
    });

    // Step 2: b = 0 swap-tests the transition r → r + 1; b = 1 finishes slot k + 1.
    let swap_test = Op::Branch {
        label: "r".into(),
        cases: (1..=k)
            .map(|r| {
                let gate = Gate::ControlledSwap {
                    control: x.clone(),
                    a: addrs(&vm.prefixed(&slot(r))),
                    b: addrs(&vm.prefixed(&slot(r + 1))),
                };
                (r, vec![Op::Gate(gate)])
            })
            .collect(),
    };
    let mut b0 = vec![swap_test];
    b0.extend(crate::qip::gate_ops([
        Gate::Cnot { control: x.clone(), target: y.clone() },
        Gate::Hadamard(x.clone()),
        Gate::PauliX(x.clone()),
        Gate::Cnot { control: x.clone(), target: a.clone() },
        Gate::PauliX(x.clone()),
    ]));
    let last = slot(k + 1);
    let mut b1 = prefix_ops(&p.verifier_steps[k], &last);
    b1.push(Op::Gate(Gate::Cnot {
        control: QubitAddr::new(format!("{last}{}", p.accept.group), p.accept.offset),
        target: a.clone(),
    }));
    let v2 = vec![
        Op::uniform("b", true, 2, None),
        Op::Branch { label: "b".into(), cases: vec![(0, b0), (1, b1)] },
    ];

    let honest = p
        .honest
        .iter()
        .map(|(w, steps)| {
            let mut p1 = Vec::new();
            for j in 2..=k + 1 {
                for i in 0..j - 1 {
                    p1.extend(prefix_ops(&p.verifier_steps[i], &slot(j)));
                    p1.extend(prefix_ops(&steps[i], &slot(j)));
                }
            }
            let p2 = vec![Op::Branch {
                label: "r".into(),
                cases: (1..=k)
                    .map(|r| {
                        let mut ops = prefix_ops(&steps[r - 1], &slot(r));
                        if p.prover.total_qubits() > 0 {
                            ops.push(Op::Gate(Gate::ControlledSwap {
                                control: y.clone(),
                                a: addrs(&p.prover.prefixed(&slot(r))),
                                b: addrs(&p.prover.prefixed(&slot(r + 1))),
                            }));
                        }
                        (r, ops)
                    })
                    .collect(),
            }];
            (w.clone(), vec![p1, p2])
        })
        .collect();

    let out = ProtocolSpec {
        name: format!("compress({})", p.name),
        relation: p.relation.clone(),
        instance: p.instance.clone(),
        message_count: 3,
        verifier,
        message,
        prover,
        accept: a,
        verifier_steps: vec![vec![], v1, v2],
        honest,
        view_exclusions: vec![],
        public_coin: None,
        declared: claimed_compress(p.declared, m),
        cap: p.cap,
    };
    out.validate()?;
    Ok(out)
}
