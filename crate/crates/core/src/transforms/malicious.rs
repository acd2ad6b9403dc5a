//! Simulating a scripted malicious verifier of a one-bit public-coin
//! protocol by guessing its coin.
//!
//! The simulator takes the honest-verifier simulation of the final view,
//! treats its coin as a guess, runs the malicious verifier's first step on
//! the simulated first message, and keeps the outcome only when the
//! verifier's choice matches the guess.

use serde::Serialize;

use crate::circuit::{measure_distribution, post_select, Circuit, Gate};
use crate::error::{Error, Result};
use crate::layout::{QubitAddr, RegisterLayout};
use crate::qip::{gate_ops, Machine, Op, ProtocolSpec};
use crate::relation::BitString;
use crate::state::{trace_distance, DensityState};

use super::public_coin::{first_message_groups, ACCEPT_GROUP, COIN_GROUP};

const GUESS_GROUP: &str = "hv.b";
const CHECK_GROUP: &str = "hv.x";

/// A verifier that prepares a private register `aux`, then acts with `v1`
/// on the coin, the first message and `aux` before sending the coin.
#[derive(Debug, Clone, PartialEq)]
pub struct MaliciousVerifier {
    pub name: String,
    pub aux: RegisterLayout,
    pub aux_prep: Vec<Gate>,
    pub v1: Vec<Gate>,
}

/// Real and simulated views of the malicious verifier after round `j`.
#[derive(Debug, Clone, Serialize)]
pub struct MaliciousViews {
    pub round: usize,
    #[serde(skip)]
    pub actual: DensityState,
    #[serde(skip)]
    pub simulated: DensityState,
    pub distance: f64,
    /// Probability that the verifier's coin matched the guess.
    pub guess_success: Option<f64>,
}

fn check_shape(p: &ProtocolSpec) -> Result<()> {
    if p.message_count != 3 {
        return Err(Error::WrongMessageCount {
            expected: 3,
            got: p.message_count,
        });
    }
    match &p.public_coin {
        Some(c) if c.group == COIN_GROUP && c.bits == 1 => Ok(()),
        _ => Err(Error::Unsupported("the simulator needs a one-bit public-coin protocol".into())),
    }
}

fn second_message_groups(p: &ProtocolSpec, msg1: &[String]) -> Vec<String> {
    p.message
        .group_names()
        .into_iter()
        .filter(|g| g != COIN_GROUP && !msg1.contains(g))
        .collect()
}

fn aux_state(v: &MaliciousVerifier) -> Result<DensityState> {
    Circuit::new(v.aux.clone(), v.aux_prep.clone())?.apply(&DensityState::zero(v.aux.clone()))
}

fn dephase(s: &DensityState, group: &str) -> Result<DensityState> {
    let parts = measure_distribution(s, group)?;
    let refs: Vec<(f64, &DensityState)> = parts.iter().map(|(_, p, st)| (*p, st)).collect();
    let total: f64 = refs.iter().map(|(p, _)| p).sum();
    let refs: Vec<(f64, &DensityState)> = refs.into_iter().map(|(p, st)| (p / total, st)).collect();
    DensityState::mixture(&refs)
}

fn rename(s: DensityState, from: &str, to: &str) -> Result<DensityState> {
    let layout = RegisterLayout::new(
        s.layout()
            .groups()
            .iter()
            .map(|g| (if g.name == from { to.to_string() } else { g.name.clone() }, g.qubits)),
    )?;
    s.relabel(layout)
}

/// The real interaction against the honest prover holding `w`.
fn actual_views(p: &ProtocolSpec, w: &BitString, v: &MaliciousVerifier, order: &[Vec<String>]) -> Result<Vec<DensityState>> {
    let layout = p.global_layout()?.concat(&v.aux)?;
    let mut machine = Machine::new(layout, p.cap + v.aux.total_qubits())?;
    let honest = p.honest_steps(w)?;
    machine.apply(&gate_ops(v.aux_prep.iter().cloned()))?;
    let mut views = vec![machine.view(&order[0])?.to_density().reorder(&order[0])?];
    machine.apply(&honest[0])?;
    views.push(machine.view(&order[1])?.to_density().reorder(&order[1])?);
    machine.apply(&gate_ops(v.v1.iter().cloned()))?;
    machine.apply(&[Op::Measure {
        group: COIN_GROUP.into(),
        label: COIN_GROUP.into(),
        visible: true,
    }])?;
    machine.apply(&honest[1])?;
    views.push(machine.view(&order[2])?.to_density().reorder(&order[2])?);
    Ok(views)
}

/// Real and simulated views for rounds 0, 1 and 2.
pub fn malicious_views(p: &ProtocolSpec, w: &BitString, v: &MaliciousVerifier) -> Result<Vec<MaliciousViews>> {
    check_shape(p)?;
    let msg1 = first_message_groups(p);
    let msg2 = second_message_groups(p, &msg1);
    let aux_names = v.aux.group_names();
    let order0 = aux_names.clone();
    let order1: Vec<String> = msg1.iter().chain(&aux_names).cloned().collect();
    let order2: Vec<String> = std::iter::once(COIN_GROUP.to_string())
        .chain(msg1.iter().cloned())
        .chain(msg2.iter().cloned())
        .chain(aux_names.iter().cloned())
        .collect();
    let orders = [order0, order1, order2];
    let actual = actual_views(p, w, v, &orders)?;

    let rho = aux_state(v)?;
    let cap = p.cap + v.aux.total_qubits() + 2;
    let sim1 = p.unbounded_wi_simulator(1)?.to_density().reduce_to(&msg1)?.reorder(&msg1)?;
    let sim1 = sim1.tensor_with_cap(&rho, cap)?.reorder(&orders[1])?;

    let guessed = rename(p.unbounded_wi_simulator(2)?.to_density(), COIN_GROUP, GUESS_GROUP)?;
    let guessed = if guessed.layout().contains(ACCEPT_GROUP) {
        guessed.partial_trace(&[ACCEPT_GROUP.to_string()])?
    } else {
        guessed
    };
    let fresh = DensityState::zero(RegisterLayout::new([(COIN_GROUP, 1), (CHECK_GROUP, 1)])?);
    let joint = guessed.tensor_with_cap(&rho, cap)?.tensor_with_cap(&fresh, cap)?;
    let joint = Circuit::new(joint.layout().clone(), v.v1.clone())?.apply(&joint)?;
    let joint = dephase(&joint, COIN_GROUP)?;
    let check = QubitAddr::new(CHECK_GROUP, 0);
    let compare = vec![
        Gate::Cnot { control: QubitAddr::new(GUESS_GROUP, 0), target: check.clone() },
        Gate::Cnot { control: QubitAddr::new(COIN_GROUP, 0), target: check },
    ];
    let joint = Circuit::new(joint.layout().clone(), compare)?.apply(&joint)?;
    let (success, kept) = post_select(&joint, CHECK_GROUP, &BitString::from_value(0, 1))?;
    let sim2 = kept
        .partial_trace(&[GUESS_GROUP.to_string(), CHECK_GROUP.to_string()])?
        .reorder(&orders[2])?;

    let simulated = [rho, sim1, sim2];
    actual
        .into_iter()
        .zip(simulated)
        .enumerate()
        .map(|(round, (actual, simulated))| {
            Ok(MaliciousViews {
                round,
                distance: trace_distance(&actual, &simulated)?,
                guess_success: (round == 2).then_some(success),
                actual,
                simulated,
            })
        })
        .collect()
}

/// Three fixed cheating verifiers: one that sends a uniform coin, one that
/// always sends 1, and one whose coin is entangled with its private register,
/// which it then correlates with the first message.
pub fn scripted_verifiers(p: &ProtocolSpec) -> Result<Vec<MaliciousVerifier>> {
    check_shape(p)?;
    let coin = QubitAddr::new(COIN_GROUP, 0);
    let aux = QubitAddr::new("aux", 0);
    let aux_layout = RegisterLayout::new([("aux", 1)])?;
    let msg1 = first_message_groups(p);
    let mut out = vec![
        MaliciousVerifier {
            name: "uniform-H".into(),
            aux: aux_layout.clone(),
            aux_prep: vec![],
            v1: vec![Gate::Hadamard(coin.clone())],
        },
        MaliciousVerifier {
            name: "bit-flip".into(),
            aux: aux_layout.clone(),
            aux_prep: vec![],
            v1: vec![Gate::PauliX(coin.clone())],
        },
    ];
    let mut v1 = vec![Gate::Cnot { control: aux.clone(), target: coin }];
    if let Some(last) = msg1.last() {
        v1.push(Gate::Cnot { control: QubitAddr::new(last.clone(), 0), target: aux.clone() });
    }
    out.push(MaliciousVerifier {
        name: "entangling".into(),
        aux: aux_layout,
        aux_prep: vec![Gate::Hadamard(aux)],
        v1,
    });
    Ok(out)
}
