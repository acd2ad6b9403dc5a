//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails
//! unless the failing set is exactly the documented known-red set.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use qiplab::batch::{
    advice, advice_payoffs, build_game, compile, induced_channel, product_strategy_value, rows, BatchKind,
    BatchProofSpec, ColumnSet,
};
use qiplab::fixtures::{self, default_batch_relation, FixtureParams};
use qiplab::game::{solve_game, sparse_support, ZeroSumGame, DEFAULT_SUPPORT_CONSTANT};
use qiplab::grover::{closed_form_success, log_log_slope, run_subroutine, soundness_break_curve, GroverConfig, ProverKind};
use qiplab::layout::RegisterLayout;
use qiplab::qds::{analyze, BitChannel, Evaluation};
use qiplab::qip::Adversary;
use qiplab::relation::BitString;
use qiplab::report::{Comparison, Report, Tolerances};
use qiplab::rng::{derive_seed, haar_unitary, random_density, seeded};
use qiplab::state::{trace_distance, DensityState};
use qiplab::transforms::{
    compress_rounds, majority_tail, malicious_views, parallel_adversary, parallel_repeat, scripted_verifiers,
    sequential_majority, to_public_coin,
};
use qiplab::Result;
use rand::Rng;

/// Criteria expected to fail; see the project notes for the analysis.
const KNOWN_RED: &[usize] = &[10];

type Criterion = (usize, &'static str, Duration, fn() -> Result<Verdict>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { pass, detail: detail.into() })
}

fn bs(s: &str) -> BitString {
    BitString::new(s).unwrap()
}

fn conjugate(s: &DensityState, u: &qiplab::linalg::ComplexMatrix) -> Result<DensityState> {
    let m = u.matmul(s.matrix())?.matmul(&u.adjoint())?;
    DensityState::new(s.layout().clone(), m)
}

fn trace_distance_axioms() -> Result<Verdict> {
    let tol = 1e-9;
    let mut rng = seeded(2024);
    let mut worst: f64 = 0.0;
    let cases = 500;
    for _ in 0..cases {
        let (qa, qb) = (rng.random_range(1..=2usize), rng.random_range(1..=2usize));
        let ab = RegisterLayout::new([("a", qa), ("b", qb)])?;
        let (rho, sigma, tau) =
            (random_density(ab.clone(), &mut rng)?, random_density(ab.clone(), &mut rng)?, random_density(ab.clone(), &mut rng)?);
        let d_rs = trace_distance(&rho, &sigma)?;
        worst = worst.max((d_rs - trace_distance(&sigma, &rho)?).abs());
        worst = worst.max(d_rs - trace_distance(&rho, &tau)? - trace_distance(&tau, &sigma)?);
        let u = haar_unitary(ab.dim(), &mut rng);
        worst = worst.max((trace_distance(&conjugate(&rho, &u)?, &conjugate(&sigma, &u)?)? - d_rs).abs());
        let keep = ["a".to_string()];
        worst = worst.max(trace_distance(&rho.reduce_to(&keep)?, &sigma.reduce_to(&keep)?)? - d_rs);

        let la = RegisterLayout::new([("a", qa)])?;
        let lb = RegisterLayout::new([("b", qb)])?;
        let (r1, s1) = (random_density(la.clone(), &mut rng)?, random_density(la, &mut rng)?);
        let (r2, s2) = (random_density(lb.clone(), &mut rng)?, random_density(lb, &mut rng)?);
        let joint = trace_distance(&r1.tensor(&r2)?, &s1.tensor(&s2)?)?;
        worst = worst.max(joint - trace_distance(&r1, &s1)? - trace_distance(&r2, &s2)?);
    }
    verdict(worst <= tol, format!("{cases} cases, worst violation {worst:.2e}"))
}

fn qds_exact_values() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for t in [2, 4, 8] {
        for tp in [1, 2] {
            let r = analyze(&BitChannel::first_bits(t, tp)?, Evaluation::Exact)?;
            worst = worst.max((r.delta - tp as f64 / (2 * t) as f64).abs());
            worst = worst.max((r.gap - tp as f64 / t as f64).abs());
        }
    }
    let mut violations = 0;
    for i in 0..100u64 {
        let t = 1 + (i % 10) as usize;
        let tp = 1 + (i % 2) as usize;
        let r = analyze(&BitChannel::random(t, tp, derive_seed(5, i))?, Evaluation::Exact)?;
        if r.chain_margin < -1e-12 {
            violations += 1;
        }
    }
    verdict(
        worst <= 1e-12 && violations == 0,
        format!("first-bits worst deviation {worst:.2e}; chain violations {violations}/100"),
    )
}

fn round_compression() -> Result<Verdict> {
    let four = FixtureParams { message_count: 4, cap: 16, ..FixtureParams::default() };
    let (w0, w1) = (bs("00"), bs("10"));
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, p) in [
        ("noisy-reveal", fixtures::noisy_reveal(&FixtureParams { epsilon: 0.2, ..four.clone() })?),
        ("partial-reveal", fixtures::partial_reveal(&FixtureParams { theta: 0.3, ..four.clone() })?),
    ] {
        let c = compress_rounds(&p)?;
        ok &= c.message_count == 3;
        let eps_c = [&w0, &w1].iter().map(|w| 1.0 - p.accept_probability(w).unwrap()).fold(0.0, f64::max);
        for w in [&w0, &w1] {
            let e = c.execute(w)?;
            ok &= (e.conditional_acceptance("b")[&0] - 1.0).abs() <= 1e-9;
            ok &= e.accept_probability >= 1.0 - eps_c / 2.0 - 1e-9;
        }
        let (before, after) = (p.wi_error(&w0, &w1)?, c.wi_error(&w0, &w1)?);
        ok &= after <= 2.0 * before + 1e-6;
        notes.push(format!("{name}: wi {before:.4} -> {after:.4}"));
    }
    verdict(ok, notes.join("; "))
}

fn public_coin() -> Result<Verdict> {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, p) in [
        ("blind", fixtures::blind(&FixtureParams::default())?),
        ("noisy-reveal", fixtures::noisy_reveal(&FixtureParams::default())?),
    ] {
        let pc = to_public_coin(&p)?;
        let coin = pc.public_coin.clone().expect("public coin");
        ok &= coin.bits == 1 && pc.message.group(&coin.group)?.qubits == 1;
        let (w0, w1) = (bs("00"), bs("10"));
        let drift = (pc.wi_error(&w0, &w1)? - p.wi_error(&w0, &w1)?).abs();
        for w in [&w0, &w1] {
            let cond = pc.execute(w)?.conditional_acceptance(&coin.group);
            ok &= (cond[&0] - 1.0).abs() <= 1e-9;
        }
        ok &= drift <= 1e-9;
        notes.push(format!("{name}: wi drift {drift:.1e}"));
    }
    verdict(ok, notes.join("; "))
}

fn repetition() -> Result<Verdict> {
    let no = FixtureParams { instance: bs("00"), epsilon: 0.3, ..FixtureParams::default() };
    let p = fixtures::noisy_reveal(&no)?;
    let cheat = bs("01");
    let adv = Adversary::honest(&p, &cheat)?;
    let a = p.adversary_acceptance(&adv)?;
    let both = parallel_repeat(&p, 2)?.adversary_acceptance(&parallel_adversary(&adv, 2)?)?;
    let short = fixtures::noisy_reveal(&FixtureParams { message_count: 1, ..no })?;
    let q = short.accept_probability(&cheat)?;
    let maj = sequential_majority(&short, 3)?.accept_probability(&cheat)?;
    let (d_par, d_seq) = ((both - a * a).abs(), (maj - majority_tail(q, 3)).abs());
    verdict(
        d_par <= 1e-9 && d_seq <= 1e-9,
        format!("parallel {both:.6} vs a^2 {:.6}; majority {maj:.6} vs binomial {:.6}", a * a, majority_tail(q, 3)),
    )
}

fn malicious_simulator() -> Result<Verdict> {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut post_selected = 0;
    for p in [
        fixtures::blind(&FixtureParams::default())?,
        fixtures::partial_reveal(&FixtureParams { theta: 0.4, ..FixtureParams::default() })?,
    ] {
        let pc = to_public_coin(&p)?;
        let honest = pc.wi_error_all_pairs()?;
        let verifiers = scripted_verifiers(&pc)?;
        ok &= verifiers.len() == 3;
        for v in &verifiers {
            for w in &pc.relation.witnesses(&pc.instance) {
                for view in malicious_views(&pc, w, v)? {
                    ok &= view.distance <= honest + 1e-6;
                    worst = worst.max(view.distance - honest);
                    post_selected += usize::from(view.guess_success.is_some());
                }
            }
        }
    }
    ok &= post_selected > 0;
    verdict(ok, format!("worst excess over honest wi {worst:.2e}; {post_selected} post-selected views"))
}

fn random_games() -> Result<Vec<ZeroSumGame>> {
    let mut rng = seeded(7);
    let mut games = vec![ZeroSumGame::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]])?];
    for _ in 0..5 {
        let a: Vec<Vec<f64>> = (0..6).map(|_| (0..20).map(|_| rng.random::<f64>()).collect()).collect();
        games.push(ZeroSumGame::from_matrix(a)?);
    }
    Ok(games)
}

fn game_stack() -> Result<Verdict> {
    let mut worst_gap: f64 = 0.0;
    for g in random_games()? {
        worst_gap = worst_gap.max(solve_game(&g)?.duality_gap);
    }
    let mut worst_margin = f64::INFINITY;
    for (kind, t) in [(BatchKind::Sketch, 4), (BatchKind::Checking, 2), (BatchKind::Blind, 2)] {
        let bp = BatchProofSpec::new(kind, default_batch_relation(), t, 0.25, 1)?;
        let bg = build_game(&bp)?;
        if bg.column_set != ColumnSet::AllTuples {
            return verdict(false, format!("{kind:?} game is not exhaustive"));
        }
        let sol = solve_game(&bg.game)?;
        let s = sparse_support(&bg.game, &sol, bp.rho.sqrt(), DEFAULT_SUPPORT_CONSTANT, 3)?;
        worst_margin = worst_margin.min(s.margins.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    verdict(
        worst_gap < 1e-7 && worst_margin >= 0.0,
        format!("worst duality gap {worst_gap:.1e}; smallest support margin {worst_margin:.4}"),
    )
}

fn batch_compiler() -> Result<Verdict> {
    let bp = BatchProofSpec::new(BatchKind::Sketch, default_batch_relation(), 4, 0.25, 1)?;
    let bg = build_game(&bp)?;
    let sol = solve_game(&bg.game)?;
    let adv = advice(&bg, &sol, bp.rho.sqrt(), DEFAULT_SUPPORT_CONSTANT, 11)?;
    let bound = advice_payoffs(&bp, &adv)?.into_iter().map(|(_, p)| p).fold(0.0, f64::max);
    let zeros = BitString::zeros(bp.t * bp.base.instance_bits());
    let batch_completeness = bp.protocol(&zeros)?.accept_probability(&zeros)?;
    let mut ok = true;
    let mut worst_wi: f64 = 0.0;
    for x in BitString::all(bp.base.instance_bits()).filter(|x| bp.base.is_yes(x)) {
        let c = compile(&bp, &adv, &x)?;
        for w in bp.base.witnesses(&x) {
            ok &= (c.accept_probability(&w)? - batch_completeness).abs() <= 1e-12;
        }
        let wi = c.wi_error_all_pairs()?;
        worst_wi = worst_wi.max(wi);
        ok &= wi <= bound + 1e-6;
    }
    let rs = rows(&bp.base);
    let mut chain_ok = true;
    for (i, r) in rs.iter().enumerate() {
        let mut sigma = vec![0.0; rs.len()];
        sigma[i] = 1.0;
        let v = product_strategy_value(&bp, &sigma)?;
        let q = analyze(&induced_channel(&bp, r, 1)?, Evaluation::Exact)?;
        chain_ok &= v <= 2.0 * q.delta + 1e-9;
    }
    verdict(
        ok && chain_ok,
        format!("compiled wi {worst_wi:.4} <= advice bound {bound:.4}; point-mass chain holds: {chain_ok}"),
    )
}

fn grover_baseline() -> Result<Verdict> {
    let four = run_subroutine(&GroverConfig::new(4, 1, 1, 2, vec![]), ProverKind::Honest)?.index_distribution[2];
    let sixteen = run_subroutine(&GroverConfig::new(16, 3, 1, 9, vec![]), ProverKind::Honest)?.index_distribution[9];
    let oracle = closed_form_success(16, 3);
    let clean = run_subroutine(&GroverConfig::new(16, 3, 0, 0, vec![]), ProverKind::Honest)?.verdicts["accept"];
    verdict(
        (four - 1.0).abs() <= 1e-9 && (sixteen - oracle).abs() <= 1e-4 && (sixteen - 0.96132).abs() <= 1e-4 && (clean - 1.0).abs() <= 1e-9,
        format!("k=4: {four:.9}; k=16: {sixteen:.6} (oracle {oracle:.6}); clean b=0 acceptance {clean:.9}"),
    )
}

fn grover_attack() -> Result<Verdict> {
    let pts = soundness_break_curve(&[4, 8, 16, 32], 14)?;
    let monotone = pts.windows(2).all(|w| w[1].catch_b0_attack <= w[0].catch_b0_attack + 1e-12);
    let slope = log_log_slope(&pts.iter().map(|p| (p.k as f64, p.catch_b0_attack)).collect::<Vec<_>>());
    let mut close = true;
    let mut notes = Vec::new();
    for p in &pts {
        let drop = p.find_j_honest - p.find_j_attack;
        let limit = 1.0 / (p.k as f64).sqrt();
        close &= drop.abs() <= limit;
        notes.push(format!("k={} catch {:.4} b1-drop {:.4}/{:.4}", p.k, p.catch_b0_attack, drop, limit));
    }
    verdict(
        monotone && (-0.8..=-0.2).contains(&slope) && close,
        format!("monotone {monotone}; slope {slope:.3}; {}", notes.join(", ")),
    )
}

fn reports_once() -> Result<Vec<String>> {
    let tol = Tolerances::default();
    let mut out = Vec::new();
    let q = analyze(&BitChannel::random(6, 2, 99)?, Evaluation::MonteCarlo { samples: 200, seed: 4 })?;
    out.push(Report::new("qds", serde_json::json!({"t": 6}), Some(99), &tol).with_results(&q)?.to_json());
    let bp = BatchProofSpec::new(BatchKind::Sketch, default_batch_relation(), 4, 0.25, 1)?;
    let bg = build_game(&bp)?;
    let sol = solve_game(&bg.game)?;
    let adv = advice(&bg, &sol, 0.5, DEFAULT_SUPPORT_CONSTANT, 17)?;
    out.push(Report::new("advice", serde_json::json!({"t": 4}), Some(17), &tol).with_results(&adv)?.to_json());
    let pts = soundness_break_curve(&[4, 8], 14)?;
    let mut r = Report::new("grover", serde_json::json!({"k": [4, 8]}), None, &tol).with_results(&pts)?;
    r.compare(Comparison::equal("k=4 honest", closed_form_success(4, 1), pts[0].find_j_honest, 1e-9));
    out.push(r.to_json());
    let search = fixtures::reveal(&FixtureParams::default())?.random_search(1, 3, 8)?;
    out.push(format!("{:?} {}", search.best, search.best_restart));
    Ok(out)
}

fn determinism() -> Result<Verdict> {
    let (a, b) = (reports_once()?, reports_once()?);
    verdict(a == b, format!("{} reports compared byte for byte", a.len()))
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        (1, "trace-distance axioms", Duration::from_secs(30), trace_distance_axioms),
        (2, "qds exact values and chain", Duration::from_secs(120), qds_exact_values),
        (3, "round compression", Duration::from_secs(60), round_compression),
        (4, "public-coin transform", Duration::from_secs(60), public_coin),
        (5, "repetition", Duration::from_secs(60), repetition),
        (6, "malicious-verifier simulator", Duration::from_secs(60), malicious_simulator),
        (7, "zero-sum game stack", Duration::from_secs(120), game_stack),
        (8, "batch compiler", Duration::from_secs(300), batch_compiler),
        (9, "grover honest baseline", Duration::from_secs(60), grover_baseline),
        (10, "grover attack reproduction", Duration::from_secs(600), grover_attack),
        (11, "determinism", Duration::from_secs(300), determinism),
    ];
    let mut failed = BTreeSet::new();
    let _ = writeln!(std::io::stdout().lock());
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| Verdict { pass: false, detail: format!("error: {e}") });
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= budget;
        if !pass {
            failed.insert(id);
        }
        // Written to the raw handle so the lines survive the harness's capture.
        let _ = writeln!(
            std::io::stdout().lock(),
            "{} [{id:>2}] {name}: {} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64()
        );
    }
    let expected: BTreeSet<usize> = KNOWN_RED.iter().copied().collect();
    assert_eq!(failed, expected, "failing criteria differ from the known-red set");
}
