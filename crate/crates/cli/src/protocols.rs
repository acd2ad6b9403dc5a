//! `qip` and `transform` subcommands.

use std::collections::BTreeMap;

use clap::{Args, Subcommand};
use qiplab::fixtures::{build_protocol, default_relation, FixtureParams};
use qiplab::qip::{ProtocolSpec, SearchResult};
use qiplab::relation::BitString;
use qiplab::report::Comparison;
use qiplab::transforms::{
    compress_rounds, malicious_views, parallel_repeat, pipeline, scripted_verifiers, sequential_majority,
    to_public_coin, PipelineOutcome, TransformReport,
};
use serde::Serialize;
use serde_json::json;

use crate::context::{CliResult, Context, Failure, Output};

#[derive(Args, Serialize, Debug, Clone)]
pub struct FixtureArgs {
    /// Protocol fixture name (see `fixtures list`).
    #[arg(long)]
    pub fixture: String,
    /// Instance bit string.
    #[arg(long, default_value = "01")]
    pub x: String,
    /// Number of messages.
    #[arg(long, default_value_t = 3)]
    pub messages: usize,
    /// Acceptance bias of noisy-reveal.
    #[arg(long, default_value_t = 0.25)]
    pub epsilon: f64,
    /// Rotation angle of partial-reveal.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_8)]
    pub theta: f64,
}

impl FixtureArgs {
    fn build(&self, ctx: &Context) -> CliResult<ProtocolSpec> {
        let params = FixtureParams {
            relation: default_relation(),
            instance: bits(&self.x)?,
            message_count: self.messages,
            epsilon: self.epsilon,
            theta: self.theta,
            cap: ctx.cap(),
        };
        Ok(build_protocol(&self.fixture, &params)?)
    }
}

pub fn bits(s: &str) -> CliResult<BitString> {
    BitString::new(s).map_err(|e| Failure::Usage(e.to_string()))
}

#[derive(Subcommand, Debug)]
pub enum QipCommand {
    /// Run the honest prover and report the acceptance probability.
    Run {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long)]
        w: String,
    },
    /// Witness-indistinguishability error between two witnesses.
    Wi {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long)]
        w0: String,
        #[arg(long)]
        w1: String,
    },
    /// Seeded random search for a cheating prover.
    Adversary {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long, default_value_t = 1)]
        private_qubits: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
}

#[derive(Serialize)]
struct RunResult {
    protocol: String,
    qubits: usize,
    message_count: usize,
    accept_probability: f64,
    declared: qiplab::qip::ErrorProfile,
}

#[derive(Serialize)]
struct AdversaryResult {
    protocol: String,
    yes_instance: bool,
    search: SearchResult,
}

pub fn qip(cmd: &QipCommand, ctx: &Context) -> CliResult<Output> {
    let bound = ctx.tol("bound");
    match cmd {
        QipCommand::Run { fixture, w } => {
            let p = fixture.build(ctx)?;
            let w = bits(w)?;
            let accept = p.accept_probability(&w)?;
            let mut r = ctx.report("qip run", &json!({"fixture": fixture, "w": w.as_str()}))?.with_results(&RunResult {
                protocol: p.name.clone(),
                qubits: p.qubits(),
                message_count: p.message_count,
                accept_probability: accept,
                declared: p.declared,
            })?;
            if p.relation.holds(&p.instance, &w) {
                r.compare(Comparison::at_most("completeness error", p.declared.eps_c, 1.0 - accept, bound));
            }
            Ok(r.into())
        }
        QipCommand::Wi { fixture, w0, w1 } => {
            let p = fixture.build(ctx)?;
            let wi = p.wi_error(&bits(w0)?, &bits(w1)?)?;
            let mut r = ctx
                .report("qip wi", &json!({"fixture": fixture, "w0": w0, "w1": w1}))?
                .with_results(&json!({"protocol": p.name, "wi_error": wi}))?;
            r.compare(Comparison::at_most("wi error", p.declared.eps_wi, wi, bound));
            Ok(r.into())
        }
        QipCommand::Adversary { fixture, private_qubits, restarts } => {
            let seed = ctx.require_seed("the adversary search")?;
            let p = fixture.build(ctx)?;
            let search = p.random_search(*private_qubits, *restarts, seed)?;
            let yes = p.relation.is_yes(&p.instance);
            let soundness = p.declared.eps_s;
            let best = search.best;
            let mut r = ctx
                .report("qip adversary", &json!({"fixture": fixture, "private_qubits": private_qubits, "restarts": restarts}))?
                .with_results(&AdversaryResult { protocol: p.name.clone(), yes_instance: yes, search })?;
            if !yes {
                r.compare(Comparison::at_most("cheating acceptance", soundness, best, bound));
            }
            Ok(r.into())
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum TransformCommand {
    /// Round compression of an even-message protocol.
    Compress {
        #[command(flatten)]
        fixture: FixtureArgs,
    },
    /// One-bit public-coin transform of a 3-message protocol.
    Public {
        #[command(flatten)]
        fixture: FixtureArgs,
    },
    /// Parallel repetition of a 3-message protocol.
    ParRepeat {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long, default_value_t = 2)]
        copies: usize,
    },
    /// Sequential repetition with a majority vote.
    SeqMajority {
        #[command(flatten)]
        fixture: FixtureArgs,
        #[arg(long, default_value_t = 3)]
        reps: usize,
    },
    /// The full compiler chain.
    Pipeline {
        #[command(flatten)]
        fixture: FixtureArgs,
        /// Target parameter p.
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Override the default number of parallel copies.
        #[arg(long)]
        copies: Option<usize>,
    },
    /// Scripted malicious verifiers against the guess-and-post-select simulator.
    MaliciousSim {
        #[command(flatten)]
        fixture: FixtureArgs,
    },
}

#[derive(Serialize)]
struct Measured {
    qubits: usize,
    message_count: usize,
    acceptance: BTreeMap<String, f64>,
    wi_error: f64,
}

fn measure(p: &ProtocolSpec) -> CliResult<Measured> {
    let mut acceptance = BTreeMap::new();
    for w in p.relation.witnesses(&p.instance) {
        acceptance.insert(w.as_str().to_string(), p.accept_probability(&w)?);
    }
    Ok(Measured {
        qubits: p.qubits(),
        message_count: p.message_count,
        acceptance,
        wi_error: p.wi_error_all_pairs()?,
    })
}

#[derive(Serialize)]
struct TransformResult {
    transform: TransformReport,
    before: Measured,
    after: Measured,
}

fn compare_claims(r: &mut qiplab::report::Report, claimed: &qiplab::qip::ErrorProfile, after: &Measured, bound: f64) {
    r.compare(Comparison::at_most("wi error", claimed.eps_wi, after.wi_error, bound));
    if let Some(worst) = after.acceptance.values().cloned().reduce(f64::min) {
        r.compare(Comparison::at_most("completeness error", claimed.eps_c, 1.0 - worst, bound));
    }
}

fn transformed(
    ctx: &Context,
    command: &str,
    inputs: &impl Serialize,
    stage: &str,
    input: &ProtocolSpec,
    output: &ProtocolSpec,
) -> CliResult<qiplab::report::Report> {
    let result = TransformResult {
        transform: TransformReport::new(stage, input.declared, output),
        before: measure(input)?,
        after: measure(output)?,
    };
    let mut r = ctx.report(command, inputs)?;
    compare_claims(&mut r, &result.transform.claimed_output_profile, &result.after, ctx.tol("bound"));
    Ok(r.with_results(&result)?)
}

#[derive(Serialize)]
struct PipelineResult {
    pipeline: PipelineOutcome,
    after: Measured,
}

#[derive(Serialize)]
struct MaliciousRow {
    verifier: String,
    witness: String,
    round: usize,
    distance: f64,
    guess_success: Option<f64>,
}

pub fn transform(cmd: &TransformCommand, ctx: &Context) -> CliResult<Output> {
    let bound = ctx.tol("bound");
    let exact = ctx.tol("exact");
    let r = match cmd {
        TransformCommand::Compress { fixture } => {
            let p = fixture.build(ctx)?;
            let c = compress_rounds(&p)?;
            let mut r = transformed(ctx, "transform compress", fixture, "compress", &p, &c)?;
            let before = p.wi_error_all_pairs()?;
            let after = c.wi_error_all_pairs()?;
            r.compare(Comparison::at_most("wi error vs measured input", (p.message_count / 2) as f64 * before, after, bound));
            r.compare(Comparison::equal("messages", 3.0, c.message_count as f64, 0.0));
            r
        }
        TransformCommand::Public { fixture } => {
            let p = fixture.build(ctx)?;
            let pc = to_public_coin(&p)?;
            let mut r = transformed(ctx, "transform public", fixture, "public-coin", &p, &pc)?;
            let bits = pc.public_coin.as_ref().map_or(0, |c| c.bits);
            r.compare(Comparison::equal("public coin bits", 1.0, bits as f64, 0.0));
            r.compare(Comparison::equal("wi error vs measured input", p.wi_error_all_pairs()?, pc.wi_error_all_pairs()?, exact));
            r
        }
        TransformCommand::ParRepeat { fixture, copies } => {
            let p = fixture.build(ctx)?;
            let out = parallel_repeat(&p, *copies)?;
            transformed(ctx, "transform par-repeat", &json!({"fixture": fixture, "copies": copies}), "par-repeat", &p, &out)?
        }
        TransformCommand::SeqMajority { fixture, reps } => {
            let p = fixture.build(ctx)?;
            let out = sequential_majority(&p, *reps)?;
            transformed(ctx, "transform seq-majority", &json!({"fixture": fixture, "reps": reps}), "seq-majority", &p, &out)?
        }
        TransformCommand::Pipeline { fixture, p: target, copies } => {
            let p = fixture.build(ctx)?;
            let out = pipeline(&p, *target, *copies)?;
            let after = measure(&out.protocol)?;
            let claimed = out.reports.last().expect("five stages").claimed_output_profile;
            let mut r = ctx.report("transform pipeline", &json!({"fixture": fixture, "p": target, "copies": copies}))?;
            compare_claims(&mut r, &claimed, &after, bound);
            r.with_results(&PipelineResult { pipeline: out, after })?
        }
        TransformCommand::MaliciousSim { fixture } => {
            let p = fixture.build(ctx)?;
            let pc = if p.public_coin.is_some() { p } else { to_public_coin(&p)? };
            let honest = pc.wi_error_all_pairs()?;
            let mut rows = Vec::new();
            let mut r = ctx.report("transform malicious-sim", fixture)?;
            for v in scripted_verifiers(&pc)? {
                let mut worst: f64 = 0.0;
                for w in pc.relation.witnesses(&pc.instance) {
                    for mv in malicious_views(&pc, &w, &v)? {
                        worst = worst.max(mv.distance);
                        rows.push(MaliciousRow {
                            verifier: v.name.clone(),
                            witness: w.as_str().to_string(),
                            round: mv.round,
                            distance: mv.distance,
                            guess_success: mv.guess_success,
                        });
                    }
                }
                r.compare(Comparison::at_most(&format!("{} distance", v.name), honest, worst, bound));
            }
            r.with_results(&json!({"honest_wi_error": honest, "views": rows}))?
        }
    };
    Ok(r.into())
}
