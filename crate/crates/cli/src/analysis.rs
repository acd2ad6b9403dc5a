//! `qds`, `batch` and `grover` subcommands.

use std::path::PathBuf;

use clap::{Args, Subcommand};
use qiplab::batch::{
    advice_payoffs, build_game, compile, induced_channel, product_strategy_value, rows, solve_and_advise,
    AdviceMultiset, BatchKind, BatchProofSpec,
};
use qiplab::fixtures::default_batch_relation;
use qiplab::game::{solve_game, DEFAULT_SUPPORT_CONSTANT};
use qiplab::grover::{
    closed_form_success, run_subroutine, soundness_break_curve, CurvePoint, GroverConfig, ProverKind,
};
use qiplab::qds::{analyze, ChannelSpec, Evaluation};
use qiplab::relation::BitString;
use qiplab::report::Comparison;
use serde::Serialize;
use serde_json::json;

use crate::context::{CliResult, Context, Failure, Output};
use crate::protocols::bits;

#[derive(Subcommand, Debug)]
pub enum QdsCommand {
    /// Per-bit distinguishability, its maximum and the compression gap.
    Check(QdsArgs),
}

#[derive(Args, Serialize, Debug)]
pub struct QdsArgs {
    /// first-bits, identity, constant or random.
    #[arg(long, conflicts_with = "channel")]
    pub family: Option<String>,
    /// JSON channel description.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub tprime: usize,
    /// Estimate by sampling this many inputs instead of enumerating.
    #[arg(long)]
    pub samples: Option<usize>,
}

fn channel_spec(a: &QdsArgs, ctx: &Context) -> CliResult<ChannelSpec> {
    if let Some(path) = &a.channel {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())));
    }
    let (t, t_prime) = (a.t, a.tprime);
    match a.family.as_deref() {
        Some("first-bits") => Ok(ChannelSpec::FirstBits { t, t_prime }),
        Some("identity") => Ok(ChannelSpec::Identity { t }),
        Some("constant") => Ok(ChannelSpec::Constant { t, t_prime }),
        Some("random") => Ok(ChannelSpec::Random { t, t_prime, seed: ctx.require_seed("a random channel")? }),
        Some(other) => Err(Failure::Usage(format!("unknown channel family `{other}`"))),
        None => Err(Failure::Usage("pass --family or --channel".into())),
    }
}

pub fn qds(cmd: &QdsCommand, ctx: &Context) -> CliResult<Output> {
    let QdsCommand::Check(a) = cmd;
    let spec = channel_spec(a, ctx)?;
    let mode = match a.samples {
        Some(samples) => Evaluation::MonteCarlo { samples, seed: ctx.require_seed("Monte Carlo estimation")? },
        None => Evaluation::Exact,
    };
    let q = analyze(&spec.build()?, mode)?;
    let exact = ctx.tol("qds-weight");
    let mut r = ctx.report("qds check", &json!({"args": a, "channel": spec, "evaluation": mode}))?;
    if !q.approximate {
        r.compare(Comparison::at_most("compression gap vs twice delta", 2.0 * q.delta, q.gap, exact));
    }
    if let ChannelSpec::FirstBits { t, t_prime } = spec {
        r.compare(Comparison::equal("delta", t_prime as f64 / (2 * t) as f64, q.delta, exact));
        r.compare(Comparison::equal("gap", t_prime as f64 / t as f64, q.gap, exact));
    }
    Ok(r.with_results(&q)?.into())
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct BatchArgs {
    /// sketch, checking or blind.
    #[arg(long, default_value = "sketch")]
    pub kind: String,
    #[arg(long, default_value_t = 4)]
    pub t: usize,
    #[arg(long, default_value_t = 0.25)]
    pub rho: f64,
    #[arg(long, default_value_t = 1)]
    pub messages: usize,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct AdviceArgs {
    /// Slack of the sparse support; defaults to the square root of rho.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SUPPORT_CONSTANT)]
    pub c0: f64,
    /// Read a previously drawn advice multiset instead of sampling one.
    #[arg(long)]
    pub advice: Option<PathBuf>,
}

impl BatchArgs {
    fn spec(&self, ctx: &Context) -> CliResult<BatchProofSpec> {
        let kind = BatchKind::parse(&self.kind).map_err(|e| Failure::Usage(e.to_string()))?;
        let mut bp = BatchProofSpec::new(kind, default_batch_relation(), self.t, self.rho, self.messages)?;
        bp.cap = ctx.cap();
        Ok(bp)
    }
}

fn obtain_advice(bp: &BatchProofSpec, a: &AdviceArgs, ctx: &Context) -> CliResult<AdviceMultiset> {
    if let Some(path) = &a.advice {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        return serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())));
    }
    let seed = ctx.require_seed("drawing advice")?;
    let eps = a.epsilon.unwrap_or(bp.rho.sqrt());
    Ok(solve_and_advise(bp, eps, a.c0, seed)?.2)
}

fn advice_bound(bp: &BatchProofSpec, adv: &AdviceMultiset) -> CliResult<f64> {
    Ok(advice_payoffs(bp, adv)?.into_iter().map(|(_, p)| p).fold(0.0, f64::max))
}

#[derive(Subcommand, Debug)]
pub enum BatchCommand {
    /// Build and solve the zero-sum game.
    Game {
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Draw the advice multiset from the optimal column strategy.
    Advice {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        advice: AdviceArgs,
    },
    /// Compile the batch proof with advice into a protocol for one instance.
    Compile {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        advice: AdviceArgs,
        #[arg(long, default_value = "01")]
        x: String,
    },
    /// Row payoffs against the advice and point-mass product strategies.
    Eval {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        advice: AdviceArgs,
    },
}

#[derive(Serialize)]
struct GameSummary {
    rows: Vec<String>,
    columns: usize,
    column_set: qiplab::batch::ColumnSet,
    compression: qiplab::batch::CompressionCheck,
    value: f64,
    duality_gap: f64,
    row_strategy: Vec<f64>,
    column_support: usize,
}

#[derive(Serialize)]
struct CompileResult {
    protocol: String,
    qubits: usize,
    batch_completeness: f64,
    acceptance: std::collections::BTreeMap<String, f64>,
    wi_error: f64,
    advice_bound: f64,
}

#[derive(Serialize)]
struct RowValue {
    row: String,
    advice_payoff: f64,
    product_value: f64,
    twice_delta: f64,
}

pub fn batch(cmd: &BatchCommand, ctx: &Context) -> CliResult<Output> {
    let bound = ctx.tol("bound");
    let r = match cmd {
        BatchCommand::Game { batch } => {
            let bp = batch.spec(ctx)?;
            let bg = build_game(&bp)?;
            let sol = solve_game(&bg.game)?;
            let mut r = ctx.report("batch game", batch)?;
            r.compare(Comparison::at_most("duality gap", 0.0, sol.duality_gap, ctx.tol("duality-gap")));
            r.with_results(&GameSummary {
                rows: bg.rows.iter().map(|x| x.label()).collect(),
                columns: bg.columns.len(),
                column_set: bg.column_set,
                compression: bg.compression.clone(),
                value: sol.value,
                duality_gap: sol.duality_gap,
                row_strategy: sol.row_strategy.clone(),
                column_support: sol.col_strategy.iter().filter(|p| **p > 0.0).count(),
            })?
        }
        BatchCommand::Advice { batch, advice } => {
            let bp = batch.spec(ctx)?;
            let adv = obtain_advice(&bp, advice, ctx)?;
            let worst = advice_bound(&bp, &adv)?;
            let mut r = ctx.report("batch advice", &json!({"batch": batch, "advice": advice}))?;
            r.compare(Comparison::at_most("max row payoff", adv.value + adv.epsilon, worst, ctx.tol("exact")));
            r.with_results(&adv)?
        }
        BatchCommand::Compile { batch, advice, x } => {
            let bp = batch.spec(ctx)?;
            let adv = obtain_advice(&bp, advice, ctx)?;
            let x = bits(x)?;
            let c = compile(&bp, &adv, &x)?;
            let zeros = BitString::zeros(bp.t * bp.base.instance_bits());
            let batch_completeness = bp.protocol(&zeros)?.accept_probability(&zeros)?;
            let mut acceptance = std::collections::BTreeMap::new();
            for w in bp.base.witnesses(&x) {
                acceptance.insert(w.as_str().to_string(), c.accept_probability(&w)?);
            }
            let res = CompileResult {
                protocol: c.name.clone(),
                qubits: c.qubits(),
                batch_completeness,
                wi_error: c.wi_error_all_pairs()?,
                advice_bound: advice_bound(&bp, &adv)?,
                acceptance,
            };
            let mut r = ctx.report("batch compile", &json!({"batch": batch, "advice": advice, "x": x.as_str()}))?;
            for (w, a) in &res.acceptance {
                r.compare(Comparison::equal(&format!("completeness {w}"), batch_completeness, *a, ctx.tol("exact")));
            }
            r.compare(Comparison::at_most("wi error", res.advice_bound, res.wi_error, bound));
            r.with_results(&res)?
        }
        BatchCommand::Eval { batch, advice } => {
            let bp = batch.spec(ctx)?;
            let adv = obtain_advice(&bp, advice, ctx)?;
            let payoffs = advice_payoffs(&bp, &adv)?;
            let rs = rows(&bp.base);
            let mut out = Vec::new();
            let mut r = ctx.report("batch eval", &json!({"batch": batch, "advice": advice}))?;
            for (i, row) in rs.iter().enumerate() {
                let mut sigma = vec![0.0; rs.len()];
                sigma[i] = 1.0;
                let product_value = product_strategy_value(&bp, &sigma)?;
                let q = analyze(&induced_channel(&bp, row, 1)?, Evaluation::Exact)?;
                let advice_payoff = payoffs.iter().find(|(p, _)| p == row).map_or(f64::NAN, |(_, v)| *v);
                r.compare(Comparison::at_most(&format!("product value {}", row.label()), 2.0 * q.delta, product_value, ctx.tol("exact")));
                out.push(RowValue { row: row.label(), advice_payoff, product_value, twice_delta: 2.0 * q.delta });
            }
            r.with_results(&out)?
        }
    };
    Ok(r.into())
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct GroverArgs {
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Iterations; defaults to floor(pi/4 * sqrt(k)).
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub b: usize,
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    /// Comma-separated indices holding a no-instance.
    #[arg(long, value_delimiter = ',')]
    pub bad: Vec<usize>,
}

impl GroverArgs {
    fn config(&self, ctx: &Context) -> GroverConfig {
        let t = self.iterations.unwrap_or_else(|| GroverConfig::default_iterations(self.k));
        GroverConfig { cap: ctx.cap(), ..GroverConfig::new(self.k, t, self.b, self.j, self.bad.clone()) }
    }
}

#[derive(Subcommand, Debug)]
pub enum GroverCommand {
    /// Honest prover.
    Run(GroverArgs),
    /// Counter attack on a single bad index.
    Attack(GroverArgs),
    /// Attack measurements over several k.
    Curve {
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        k: Vec<usize>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

pub fn grover(cmd: &GroverCommand, ctx: &Context) -> CliResult<Output> {
    let exact = ctx.tol("exact");
    match cmd {
        GroverCommand::Run(a) | GroverCommand::Attack(a) => {
            let (name, prover) = match cmd {
                GroverCommand::Run(_) => ("grover run", ProverKind::Honest),
                _ => ("grover attack", ProverKind::Attacker),
            };
            let cfg = a.config(ctx);
            let o = run_subroutine(&cfg, prover)?;
            let mut r = ctx.report(name, a)?;
            if prover == ProverKind::Honest && cfg.b == 1 {
                r.compare(Comparison::equal("marked index", closed_form_success(cfg.k, cfg.iterations), o.index_distribution[cfg.j], exact));
            }
            if cfg.b == 0 && cfg.bad_set.is_empty() {
                r.compare(Comparison::equal("acceptance", 1.0, o.verdicts["accept"], exact));
            }
            Ok(r.with_results(&o)?.into())
        }
        GroverCommand::Curve { k, .. } => {
            let cap = ctx.cap.unwrap_or(qiplab::layout::DEFAULT_QUBIT_CAP);
            let pts = soundness_break_curve(k, cap)?;
            let mut csv = String::from(CurvePoint::CSV_HEADER);
            csv.push('\n');
            let mut r = ctx.report("grover curve", &json!({"k": k}))?;
            for p in &pts {
                csv.push_str(&p.csv_row());
                csv.push('\n');
                r.compare(Comparison::equal(&format!("honest k={}", p.k), closed_form_success(p.k, p.iterations), p.find_j_honest, exact));
            }
            Ok(Output { report: r.with_results(&pts)?, csv: Some(csv) })
        }
    }
}
