//! Distributional stability of classical-to-quantum channels.
//!
//! A channel maps `t` input bits to a state on `t′` qubits. For a uniform
//! input, `γ_j` is the average over `β` of the trace distance between the
//! output with bit `j` forced to `β` and the unconditioned output; `δ` is
//! the mean of the `γ_j`, and the compression gap is the mean distance
//! between forcing bit `j` to 0 and forcing it to 1. Bit 1 is the most
//! significant bit of the input value.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::RegisterLayout;
use crate::linalg::{ComplexMatrix, C64};
use crate::relation::BitString;
use crate::rng::{derive_seed, random_pure, seeded};
use crate::state::{trace_distance, DensityState};

/// Largest input width enumerated exactly.
pub const EXACT_MAX_BITS: usize = 12;
/// Tolerance on the total weight of an input distribution.
pub const WEIGHT_TOL: f64 = 1e-12;

pub type ChannelFn = Arc<dyn Fn(usize) -> Result<DensityState> + Send + Sync>;

#[derive(Clone)]
enum Source {
    Table(Vec<DensityState>),
    Func(ChannelFn),
}

#[derive(Clone)]
pub struct BitChannel {
    t: usize,
    t_prime: usize,
    source: Source,
}

impl std::fmt::Debug for BitChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BitChannel").field("t", &self.t).field("t_prime", &self.t_prime).finish()
    }
}

pub fn output_layout(t_prime: usize) -> Result<RegisterLayout> {
    RegisterLayout::new([("out", t_prime)])
}

impl BitChannel {
    /// A channel given by one output state per input value.
    pub fn from_table(t: usize, t_prime: usize, table: Vec<DensityState>) -> Result<Self> {
        if table.len() != 1usize << t {
            return Err(Error::DimensionMismatch(format!("{} outputs for {t} input bits", table.len())));
        }
        if let Some(bad) = table.iter().find(|s| s.layout().total_qubits() != t_prime) {
            return Err(Error::DimensionMismatch(format!(
                "output on {} qubits, expected {t_prime}",
                bad.layout().total_qubits()
            )));
        }
        let layout = output_layout(t_prime)?;
        let table = table.into_iter().map(|s| s.relabel(layout.clone())).collect::<Result<_>>()?;
        Ok(Self { t, t_prime, source: Source::Table(table) })
    }

    /// A channel evaluated on demand.
    pub fn from_fn(t: usize, t_prime: usize, f: ChannelFn) -> Self {
        Self { t, t_prime, source: Source::Func(f) }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn t_prime(&self) -> usize {
        self.t_prime
    }

    pub fn eval(&self, b: usize) -> Result<DensityState> {
        if b >> self.t != 0 {
            return Err(Error::IndexOutOfRange(format!("input {b} for {} bits", self.t)));
        }
        let s = match &self.source {
            Source::Table(table) => table[b].clone(),
            Source::Func(f) => f(b)?,
        };
        if s.layout().total_qubits() != self.t_prime {
            return Err(Error::DimensionMismatch(format!(
                "output on {} qubits, expected {}",
                s.layout().total_qubits(),
                self.t_prime
            )));
        }
        s.relabel(output_layout(self.t_prime)?)
    }

    /// The output is the basis state of the first `t′` input bits.
    pub fn first_bits(t: usize, t_prime: usize) -> Result<Self> {
        if t_prime > t {
            return Err(Error::Misconfigured(format!("first {t_prime} of {t} bits")));
        }
        let layout = output_layout(t_prime)?;
        let table = (0..1usize << t)
            .map(|b| DensityState::basis(layout.clone(), b >> (t - t_prime)))
            .collect::<Result<_>>()?;
        Self::from_table(t, t_prime, table)
    }

    pub fn identity(t: usize) -> Result<Self> {
        Self::first_bits(t, t)
    }

    pub fn constant(t: usize, state: DensityState) -> Result<Self> {
        let t_prime = state.layout().total_qubits();
        Self::from_table(t, t_prime, vec![state; 1usize << t])
    }

    /// Each input gets its own seeded Haar-random pure state.
    pub fn random(t: usize, t_prime: usize, seed: u64) -> Result<Self> {
        let layout = output_layout(t_prime)?;
        let table = (0..1usize << t)
            .map(|b| {
                let mut rng = seeded(derive_seed(seed, b as u64));
                DensityState::from_pure(layout.clone(), &random_pure(layout.dim(), &mut rng))
            })
            .collect::<Result<_>>()?;
        Self::from_table(t, t_prime, table)
    }
}

fn bit(t: usize, b: usize, j: usize) -> usize {
    (b >> (t - j)) & 1
}

fn force(t: usize, b: usize, j: usize, beta: usize) -> usize {
    let mask = 1usize << (t - j);
    if beta == 1 {
        b | mask
    } else {
        b & !mask
    }
}

/// `Σ d(b) f(b)` for a distribution over input values.
pub fn mixture(f: &BitChannel, d: &[(usize, f64)]) -> Result<DensityState> {
    let total: f64 = d.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > WEIGHT_TOL || d.iter().any(|(_, w)| !(*w >= 0.0)) {
        return Err(Error::MalformedDistribution(format!("input weights sum to {total}")));
    }
    let layout = output_layout(f.t_prime)?;
    let mut m = ComplexMatrix::zeros(layout.dim(), layout.dim());
    for (b, w) in d {
        m = &m + &f.eval(*b)?.matrix().scale_real(*w);
    }
    DensityState::new(layout, m)
}

/// How inputs are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Evaluation {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QdsReport {
    pub t: usize,
    pub t_prime: usize,
    pub gammas: Vec<f64>,
    pub delta: f64,
    pub gap: f64,
    /// `2δ − gap`; nonnegative when the chain inequality holds.
    pub chain_margin: f64,
    pub approximate: bool,
}

struct Mixtures {
    full: DensityState,
    /// `cond[j - 1][β]`
    cond: Vec<[DensityState; 2]>,
}

fn mixtures(f: &BitChannel, mode: Evaluation) -> Result<Mixtures> {
    let t = f.t;
    let inputs: Vec<usize> = match mode {
        Evaluation::Exact => {
            if t > EXACT_MAX_BITS {
                return Err(Error::EnumerationInfeasible(format!(
                    "{t} input bits exceeds the exact limit of {EXACT_MAX_BITS}; request Monte Carlo"
                )));
            }
            (0..1usize << t).collect()
        }
        Evaluation::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Misconfigured("Monte Carlo needs at least one sample".into()));
            }
            use rand::Rng;
            let mut rng = seeded(seed);
            (0..samples).map(|_| rng.random_range(0..1usize << t)).collect()
        }
    };
    let mut cache: BTreeMap<usize, ComplexMatrix> = BTreeMap::new();
    let mut get = |b: usize| -> Result<ComplexMatrix> {
        if let Some(m) = cache.get(&b) {
            return Ok(m.clone());
        }
        let m = f.eval(b)?.matrix().clone();
        cache.insert(b, m.clone());
        Ok(m)
    };
    let layout = output_layout(f.t_prime)?;
    let dim = layout.dim();
    let w = 1.0 / inputs.len() as f64;
    let zero = || ComplexMatrix::zeros(dim, dim);
    let mut full = zero();
    let mut cond: Vec<[ComplexMatrix; 2]> = (0..t).map(|_| [zero(), zero()]).collect();
    for &b in &inputs {
        let fb = get(b)?.scale_real(w);
        full = &full + &fb;
        for j in 1..=t {
            let own = bit(t, b, j);
            cond[j - 1][own] = &cond[j - 1][own] + &fb;
            let flipped = get(force(t, b, j, 1 - own))?.scale_real(w);
            cond[j - 1][1 - own] = &cond[j - 1][1 - own] + &flipped;
        }
    }
    let state = |m: ComplexMatrix| DensityState::new(layout.clone(), m);
    Ok(Mixtures {
        full: state(full)?,
        cond: cond
            .into_iter()
            .map(|[a, b]| Ok([state(a)?, state(b)?]))
            .collect::<Result<_>>()?,
    })
}

/// Per-coordinate `γ_j`, `δ` and the compression gap in one pass.
pub fn analyze(f: &BitChannel, mode: Evaluation) -> Result<QdsReport> {
    if f.t == 0 {
        return Err(Error::Misconfigured("a channel needs at least one input bit".into()));
    }
    let mx = mixtures(f, mode)?;
    let mut gammas = Vec::with_capacity(f.t);
    let mut gap = 0.0;
    for [c0, c1] in &mx.cond {
        gammas.push((trace_distance(c0, &mx.full)? + trace_distance(c1, &mx.full)?) / 2.0);
        gap += trace_distance(c0, c1)?;
    }
    let t = f.t as f64;
    let delta = gammas.iter().sum::<f64>() / t;
    let gap = gap / t;
    Ok(QdsReport {
        t: f.t,
        t_prime: f.t_prime,
        gammas,
        delta,
        gap,
        chain_margin: 2.0 * delta - gap,
        approximate: matches!(mode, Evaluation::MonteCarlo { .. }),
    })
}

pub fn gamma(f: &BitChannel, j: usize, mode: Evaluation) -> Result<f64> {
    if j == 0 || j > f.t {
        return Err(Error::IndexOutOfRange(format!("coordinate {j} of {}", f.t)));
    }
    Ok(analyze(f, mode)?.gammas[j - 1])
}

pub fn qds_delta(f: &BitChannel, mode: Evaluation) -> Result<f64> {
    Ok(analyze(f, mode)?.delta)
}

pub fn compression_gap(f: &BitChannel, mode: Evaluation) -> Result<f64> {
    Ok(analyze(f, mode)?.gap)
}

/// A pure output state in a channel table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    /// A computational basis state given as a bit string.
    Basis(String),
    /// Amplitudes as `[re, im]` pairs; normalized on load.
    Pure(Vec<[f64; 2]>),
}

/// Channel description as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelSpec {
    FirstBits { t: usize, t_prime: usize },
    Identity { t: usize },
    Constant { t: usize, t_prime: usize },
    Random { t: usize, t_prime: usize, seed: u64 },
    Table { t: usize, t_prime: usize, outputs: BTreeMap<String, StateRef> },
}

fn load_state(layout: &RegisterLayout, s: &StateRef) -> Result<DensityState> {
    match s {
        StateRef::Basis(bits) => {
            let b = BitString::new(bits)?;
            if b.len() != layout.total_qubits() {
                return Err(Error::DimensionMismatch(format!("basis state `{bits}` on {} qubits", layout.total_qubits())));
            }
            DensityState::basis(layout.clone(), b.value())
        }
        StateRef::Pure(amps) => {
            let v: Vec<C64> = amps.iter().map(|[re, im]| C64::new(*re, *im)).collect();
            let norm = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidState("zero amplitude vector".into()));
            }
            DensityState::from_pure(layout.clone(), &v.iter().map(|a| a / norm).collect::<Vec<_>>())
        }
    }
}

impl ChannelSpec {
    pub fn build(&self) -> Result<BitChannel> {
        match self {
            ChannelSpec::FirstBits { t, t_prime } => BitChannel::first_bits(*t, *t_prime),
            ChannelSpec::Identity { t } => BitChannel::identity(*t),
            ChannelSpec::Constant { t, t_prime } => BitChannel::constant(*t, DensityState::zero(output_layout(*t_prime)?)),
            ChannelSpec::Random { t, t_prime, seed } => BitChannel::random(*t, *t_prime, *seed),
            ChannelSpec::Table { t, t_prime, outputs } => {
                let layout = output_layout(*t_prime)?;
                let mut table = Vec::with_capacity(1 << t);
                for b in 0..1usize << t {
                    let key = BitString::from_value(b, *t).to_string();
                    let s = outputs
                        .get(&key)
                        .ok_or_else(|| Error::Misconfigured(format!("no output for input `{key}`")))?;
                    table.push(load_state(&layout, s)?);
                }
                BitChannel::from_table(*t, *t_prime, table)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: Evaluation = Evaluation::Exact;

    #[test]
    fn first_bit_of_four() {
        let f = BitChannel::first_bits(4, 1).unwrap();
        let r = analyze(&f, E).unwrap();
        assert!((r.gammas[0] - 0.5).abs() < 1e-12);
        for g in &r.gammas[1..] {
            assert!(g.abs() < 1e-12);
        }
        assert!((r.delta - 0.125).abs() < 1e-12);
        assert!((r.gap - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identity_on_two_bits() {
        let r = analyze(&BitChannel::identity(2).unwrap(), E).unwrap();
        assert!((r.gammas[0] - 0.5).abs() < 1e-12 && (r.gammas[1] - 0.5).abs() < 1e-12);
        assert!((r.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_channel_is_stable() {
        let f = BitChannel::constant(3, DensityState::maximally_mixed(output_layout(1).unwrap())).unwrap();
        let r = analyze(&f, E).unwrap();
        assert_eq!(r.delta, 0.0);
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn mixture_examples() {
        let id = BitChannel::identity(1).unwrap();
        let m = mixture(&id, &[(0, 0.5), (1, 0.5)]).unwrap();
        assert!(m.max_abs_diff(&DensityState::maximally_mixed(output_layout(1).unwrap())) < 1e-15);
        assert!(matches!(mixture(&id, &[(0, 0.5)]), Err(Error::MalformedDistribution(_))));
    }

    #[test]
    fn exact_limit_enforced() {
        let f = BitChannel::from_fn(13, 1, Arc::new(|_| Ok(DensityState::zero(output_layout(1)?))));
        assert!(matches!(analyze(&f, E), Err(Error::EnumerationInfeasible(_))));
        let r = analyze(&f, Evaluation::MonteCarlo { samples: 64, seed: 1 }).unwrap();
        assert!(r.approximate);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn table_spec_round_trip() {
        let json = r#"{"kind":"table","t":1,"t_prime":1,"outputs":{"0":"0","1":[[0.0,0.0],[1.0,0.0]]}}"#;
        let spec: ChannelSpec = serde_json::from_str(json).unwrap();
        let r = analyze(&spec.build().unwrap(), E).unwrap();
        assert!((r.gap - 1.0).abs() < 1e-12);
    }
}
