//! Sequential majority and parallel repetition.

use std::collections::BTreeMap;

use crate::circuit::predicate_write;
use crate::error::{Error, Result};
use crate::layout::{QubitAddr, RegisterLayout};
use crate::qip::{gate_ops, prefix_ops, Adversary, Op, ProtocolSpec};
use crate::relation::BitString;

use super::{claimed_parallel, claimed_sequential};

/// A protocol with every group and label prefixed.
struct Copy {
    verifier: RegisterLayout,
    message: RegisterLayout,
    prover: RegisterLayout,
    accept: QubitAddr,
    verifier_steps: Vec<Vec<Op>>,
    honest: BTreeMap<BitString, Vec<Vec<Op>>>,
    exclusions: Vec<Vec<String>>,
}

fn copy(p: &ProtocolSpec, prefix: &str) -> Copy {
    Copy {
        verifier: p.verifier.prefixed(prefix),
        message: p.message.prefixed(prefix),
        prover: p.prover.prefixed(prefix),
        accept: QubitAddr::new(format!("{prefix}{}", p.accept.group), p.accept.offset),
        verifier_steps: p.verifier_steps.iter().map(|s| prefix_ops(s, prefix)).collect(),
        honest: p
            .honest
            .iter()
            .map(|(w, steps)| (w.clone(), steps.iter().map(|s| prefix_ops(s, prefix)).collect()))
            .collect(),
        exclusions: p
            .view_exclusions
            .iter()
            .map(|gs| gs.iter().map(|g| format!("{prefix}{g}")).collect())
            .collect(),
    }
}

fn concat_layouts<'a>(layouts: impl Iterator<Item = &'a RegisterLayout>) -> Result<RegisterLayout> {
    let mut out = RegisterLayout::empty();
    for l in layouts {
        out = out.concat(l)?;
    }
    Ok(out)
}

/// Runs `r` copies one after another (each copy's final verifier step is
/// merged with the next copy's opening step) and accepts on a strict
/// majority. One repetition returns the input unchanged.
pub fn sequential_majority(p: &ProtocolSpec, r: usize) -> Result<ProtocolSpec> {
    if r.is_multiple_of(2) {
        return Err(Error::EvenRepetitions(r));
    }
    p.validate()?;
    if r == 1 {
        return Ok(p.clone());
    }
    let k = p.rounds();
    let copies: Vec<Copy> = (0..r).map(|c| copy(p, &format!("s{c}."))).collect();
    let mut verifier = concat_layouts(copies.iter().map(|c| &c.verifier))?;
    verifier.push("maj", 1)?;
    let message = concat_layouts(copies.iter().map(|c| &c.message))?;
    let prover = concat_layouts(copies.iter().map(|c| &c.prover))?;

    let mut verifier_steps = vec![copies[0].verifier_steps[0].clone()];
    for (c, cp) in copies.iter().enumerate() {
        for j in 1..=k {
            let mut step = cp.verifier_steps[j].clone();
            if j == k {
                if let Some(next) = copies.get(c + 1) {
                    step.extend(next.verifier_steps[0].iter().cloned());
                }
            }
            verifier_steps.push(step);
        }
    }
    let accepts: Vec<QubitAddr> = copies.iter().map(|c| c.accept.clone()).collect();
    let maj = QubitAddr::new("maj", 0);
    verifier_steps
        .last_mut()
        .expect("at least one step")
        .extend(gate_ops(predicate_write(&accepts, &maj, |v| v.count_ones() as usize > r / 2)));

    let honest = p
        .honest
        .keys()
        .map(|w| {
            let steps = copies.iter().flat_map(|c| c.honest[w].iter().cloned()).collect();
            (w.clone(), steps)
        })
        .collect();
    let view_exclusions = copies
        .iter()
        .flat_map(|c| (0..k).map(move |j| c.exclusions.get(j).cloned().unwrap_or_default()))
        .collect();
    let message_count = if p.message_count % 2 == 1 { 2 * r * k - 1 } else { 2 * r * k };
    let out = ProtocolSpec {
        name: format!("seq-majority[{r}]({})", p.name),
        relation: p.relation.clone(),
        instance: p.instance.clone(),
        message_count,
        verifier,
        message,
        prover,
        accept: maj,
        verifier_steps,
        honest,
        view_exclusions,
        public_coin: None,
        declared: claimed_sequential(p.declared, r),
        cap: p.cap,
    };
    out.validate()?;
    Ok(out)
}

/// `c` simultaneous copies of a 3-message protocol, accepting iff every
/// copy accepts. A single copy reuses the copy's own accept qubit.
pub fn parallel_repeat(p: &ProtocolSpec, c: usize) -> Result<ProtocolSpec> {
    if p.message_count != 3 {
        return Err(Error::WrongMessageCount {
            expected: 3,
            got: p.message_count,
        });
    }
    if c == 0 {
        return Err(Error::Misconfigured("parallel repetition needs at least one copy".into()));
    }
    p.validate()?;
    let k = p.rounds();
    let copies: Vec<Copy> = (0..c).map(|i| copy(p, &format!("p{i}."))).collect();
    let mut verifier = concat_layouts(copies.iter().map(|c| &c.verifier))?;
    let message = concat_layouts(copies.iter().map(|c| &c.message))?;
    let prover = concat_layouts(copies.iter().map(|c| &c.prover))?;
    verifier.concat(&message)?.concat(&prover)?.check_cap(p.cap)?;

    let mut verifier_steps: Vec<Vec<Op>> = (0..=k)
        .map(|j| copies.iter().flat_map(|cp| cp.verifier_steps[j].iter().cloned()).collect())
        .collect();
    let accept = if c == 1 {
        copies[0].accept.clone()
    } else {
        verifier.push("and", 1)?;
        let accepts: Vec<QubitAddr> = copies.iter().map(|cp| cp.accept.clone()).collect();
        let and = QubitAddr::new("and", 0);
        let all = (1usize << c) - 1;
        verifier_steps[k].extend(gate_ops(predicate_write(&accepts, &and, |v| v == all)));
        and
    };
    let honest = p
        .honest
        .keys()
        .map(|w| {
            let steps = (0..k)
                .map(|j| copies.iter().flat_map(|cp| cp.honest[w][j].iter().cloned()).collect())
                .collect();
            (w.clone(), steps)
        })
        .collect();
    let view_exclusions = (0..p.view_exclusions.len())
        .map(|j| copies.iter().flat_map(|cp| cp.exclusions[j].iter().cloned()).collect())
        .collect();
    let out = ProtocolSpec {
        name: format!("par-repeat[{c}]({})", p.name),
        relation: p.relation.clone(),
        instance: p.instance.clone(),
        message_count: 3,
        verifier,
        message,
        prover,
        accept,
        verifier_steps,
        honest,
        view_exclusions,
        public_coin: None,
        declared: claimed_parallel(p.declared, c),
        cap: p.cap,
    };
    out.validate()?;
    Ok(out)
}

/// The product of `c` independent copies of a single-copy adversary,
/// matching the naming of [`parallel_repeat`].
pub fn parallel_adversary(adv: &Adversary, c: usize) -> Result<Adversary> {
    let copies: Vec<Adversary> = (0..c).map(|i| adv.prefixed(&format!("p{i}."))).collect();
    let private = concat_layouts(copies.iter().map(|a| &a.private))?;
    let rounds = (0..adv.rounds.len())
        .map(|j| copies.iter().flat_map(|a| a.rounds[j].iter().cloned()).collect())
        .collect();
    Ok(Adversary { private, rounds })
}
