//! The full compiler: sequential majority, padding to an even message
//! count, round compression, parallel repetition and the public-coin
//! transform, applied in that order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qip::{ErrorProfile, ProtocolSpec};

use super::{
    claimed_compress, claimed_parallel, claimed_public_coin, claimed_sequential, compress_rounds, parallel_repeat,
    sequential_majority, to_public_coin, TransformReport,
};

/// Smallest odd integer at least `p²`.
pub fn majority_repetitions(p: usize) -> usize {
    let sq = p * p;
    if sq % 2 == 1 {
        sq
    } else {
        sq + 1
    }
}

/// Message count after `r` sequential copies of an `m`-message protocol.
fn sequential_message_count(m: usize, r: usize) -> usize {
    if r == 1 {
        return m;
    }
    let k = m / 2;
    if m % 2 == 1 {
        2 * r * k - 1
    } else {
        2 * r * k
    }
}

/// Default number of parallel copies: `p · 32 (m′ + 1)²` where `m′` is the
/// message count entering round compression after sequential repetition.
pub fn default_copies(m: usize, p: usize) -> usize {
    let m_seq = sequential_message_count(m, majority_repetitions(p));
    p * 32 * (m_seq + 1) * (m_seq + 1)
}

/// Claimed profile after each stage, without building any protocol.
pub fn claimed_chain(input: ErrorProfile, m: usize, p: usize, copies: Option<usize>) -> Vec<(String, ErrorProfile)> {
    let r = majority_repetitions(p);
    let c = copies.unwrap_or_else(|| default_copies(m, p));
    let seq = claimed_sequential(input, r);
    let m_seq = sequential_message_count(m, r);
    let m_pad = m_seq + m_seq % 2;
    let comp = claimed_compress(seq, m_pad);
    let par = claimed_parallel(comp, c);
    let pc = claimed_public_coin(par);
    vec![
        ("seq-majority".into(), seq),
        ("pad".into(), seq),
        ("compress".into(), comp),
        ("par-repeat".into(), par),
        ("public-coin".into(), pc),
    ]
}

type Stage<'a> = dyn Fn(&ProtocolSpec) -> Result<ProtocolSpec> + 'a;

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutcome {
    pub repetitions: usize,
    pub copies: usize,
    pub reports: Vec<TransformReport>,
    #[serde(skip)]
    pub protocol: ProtocolSpec,
}

/// Runs every stage; a stage that cannot be built (usually the qubit cap)
/// aborts with [`Error::InfeasibleStage`] naming the stages already done.
pub fn pipeline(p: &ProtocolSpec, target_p: usize, copies: Option<usize>) -> Result<PipelineOutcome> {
    if target_p == 0 {
        return Err(Error::Misconfigured("the pipeline parameter must be positive".into()));
    }
    let r = majority_repetitions(target_p);
    let c = copies.unwrap_or_else(|| default_copies(p.message_count, target_p));
    let mut reports: Vec<TransformReport> = Vec::new();
    let mut current = p.clone();
    let stages: [(&str, &Stage); 5] = [
        ("seq-majority", &|q| sequential_majority(q, r)),
        ("pad", &|q| Ok(q.clone().pad_to_even())),
        ("compress", &compress_rounds),
        ("par-repeat", &|q| parallel_repeat(q, c)),
        ("public-coin", &to_public_coin),
    ];
    for (stage, run) in stages {
        let next = run(&current).map_err(|e| Error::InfeasibleStage {
            stage: stage.to_string(),
            completed: reports.iter().map(|r| r.stage.clone()).collect(),
            source: Box::new(e),
        })?;
        reports.push(TransformReport::new(stage, current.declared, &next));
        current = next;
    }
    Ok(PipelineOutcome {
        repetitions: r,
        copies: c,
        reports,
        protocol: current,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, FixtureParams};
    use crate::relation::BitString;

    #[test]
    fn repetitions_are_odd_squares_or_next() {
        assert_eq!(majority_repetitions(1), 1);
        assert_eq!(majority_repetitions(2), 5);
        assert_eq!(majority_repetitions(3), 9);
    }

    #[test]
    fn blind_runs_end_to_end_with_one_copy() {
        let p = fixtures::blind(&FixtureParams::default()).unwrap();
        let out = pipeline(&p, 1, Some(1)).unwrap();
        assert_eq!(out.reports.len(), 5);
        assert_eq!(out.protocol.qubits(), 13);
        assert_eq!(out.protocol.message_count, 3);
        let last = out.reports.last().unwrap();
        assert!(last.public_coin);
        assert_eq!(last.classical_bits, 1);
        let chain = claimed_chain(p.declared, 3, 1, Some(1));
        for (report, (stage, profile)) in out.reports.iter().zip(&chain) {
            assert_eq!(&report.stage, stage);
            assert_eq!(&report.claimed_output_profile, profile);
        }
        assert!((out.protocol.accept_probability(&BitString::new("00").unwrap()).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn default_copies_exceed_the_cap() {
        let p = fixtures::blind(&FixtureParams::default()).unwrap();
        assert_eq!(default_copies(3, 1), 512);
        match pipeline(&p, 1, None) {
            Err(Error::InfeasibleStage { stage, completed, .. }) => {
                assert_eq!(stage, "par-repeat");
                assert_eq!(completed, vec!["seq-majority", "pad", "compress"]);
            }
            other => panic!("expected an infeasible stage, got {other:?}"),
        }
    }
}
