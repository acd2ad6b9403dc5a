//! Protocol-to-protocol compilers: sequential majority, round compression,
//! parallel repetition, the public-coin transform, their composition, and
//! the malicious-verifier simulator for one-bit public-coin protocols.
//!
//! Every compiler returns a new [`ProtocolSpec`] whose `declared` profile is
//! the claimed output profile computed from the input's declared profile.

use serde::Serialize;

use crate::qip::{ErrorProfile, ProtocolSpec};

pub mod compress;
pub mod malicious;
pub mod pipeline;
pub mod public_coin;
pub mod repetition;

pub use compress::compress_rounds;
pub use malicious::{malicious_views, scripted_verifiers, MaliciousVerifier, MaliciousViews};
pub use pipeline::{claimed_chain, default_copies, majority_repetitions, pipeline, PipelineOutcome};
pub use public_coin::to_public_coin;
pub use repetition::{parallel_adversary, parallel_repeat, sequential_majority};

/// One compiler stage with its claimed arithmetic and structural facts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformReport {
    pub stage: String,
    pub input_profile: ErrorProfile,
    pub claimed_output_profile: ErrorProfile,
    pub message_count_out: usize,
    pub public_coin: bool,
    pub classical_bits: usize,
    pub qubits: usize,
}

impl TransformReport {
    pub fn new(stage: &str, input: ErrorProfile, out: &ProtocolSpec) -> Self {
        Self {
            stage: stage.to_string(),
            input_profile: input,
            claimed_output_profile: out.declared,
            message_count_out: out.message_count,
            public_coin: out.public_coin.is_some(),
            classical_bits: out.public_coin.as_ref().map_or(0, |c| c.bits),
            qubits: out.qubits(),
        }
    }
}

/// Probability that a strict majority of `r` independent trials succeed
/// when each succeeds with probability `q`.
pub fn majority_tail(q: f64, r: usize) -> f64 {
    let mut total = 0.0;
    for i in (r / 2 + 1)..=r {
        total += binomial(r, i) * q.powi(i as i32) * (1.0 - q).powi((r - i) as i32);
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Majority of `r` sequential runs: the vote fails when a majority of runs
/// reject an honest prover, and is fooled when a majority accept a cheater.
pub fn claimed_sequential(p: ErrorProfile, r: usize) -> ErrorProfile {
    ErrorProfile::new(majority_tail(p.eps_c, r), majority_tail(p.eps_s, r), r as f64 * p.eps_wi)
}

/// Round compression of an `m`-message protocol.
pub fn claimed_compress(p: ErrorProfile, m: usize) -> ErrorProfile {
    let denom = 32.0 * ((m + 1) as f64).powi(2);
    ErrorProfile::new(p.eps_c / 2.0, 1.0 - (1.0 - p.eps_s).powi(2) / denom, m as f64 * p.eps_wi)
}

/// `c` parallel copies: completeness `(1 − ε_C/2)^c`, soundness `ε_S^c`.
pub fn claimed_parallel(p: ErrorProfile, c: usize) -> ErrorProfile {
    ErrorProfile::new(
        1.0 - (1.0 - p.eps_c / 2.0).powi(c as i32),
        p.eps_s.powi(c as i32),
        c as f64 * p.eps_wi,
    )
}

/// One-bit public-coin transform.
pub fn claimed_public_coin(p: ErrorProfile) -> ErrorProfile {
    ErrorProfile::new(p.eps_c / 2.0, 0.5 + p.eps_s.sqrt() / 2.0, p.eps_wi)
}
