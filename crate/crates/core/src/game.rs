//! Finite zero-sum games. The row player maximizes the payoff and the
//! column player minimizes it.
//!
//! The exact solver is a dense tableau simplex with Bland's rule on the
//! column player's program `max Σy s.t. (A + s)y ≤ 1, y ≥ 0`, where the
//! shift `s` makes every entry positive. Multiplicative weights gives an
//! independent approximate route.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed excursion of payoff entries outside `[0, 1]`.
pub const PAYOFF_RANGE_TOL: f64 = 1e-9;
/// Pivot threshold for the simplex.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumGame {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub payoff: Vec<Vec<f64>>,
}

impl ZeroSumGame {
    pub fn new(rows: Vec<String>, cols: Vec<String>, payoff: Vec<Vec<f64>>) -> Result<Self> {
        let g = Self { rows, cols, payoff };
        g.validate()?;
        Ok(g)
    }

    /// A game with generated labels `r{i}` and `c{j}`.
    pub fn from_matrix(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let rows = (0..payoff.len()).map(|i| format!("r{i}")).collect();
        let cols = (0..payoff.first().map_or(0, Vec::len)).map(|j| format!("c{j}")).collect();
        Self::new(rows, cols, payoff)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() || self.cols.is_empty() {
            return Err(Error::Misconfigured("a game needs at least one row and one column".into()));
        }
        if self.payoff.len() != self.rows.len() || self.payoff.iter().any(|r| r.len() != self.cols.len()) {
            return Err(Error::DimensionMismatch(format!(
                "payoff matrix is not {}×{}",
                self.rows.len(),
                self.cols.len()
            )));
        }
        for (i, row) in self.payoff.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() || *v < -PAYOFF_RANGE_TOL || *v > 1.0 + PAYOFF_RANGE_TOL {
                    return Err(Error::Misconfigured(format!("payoff ({i}, {j}) = {v} is outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    /// Expected payoff of each pure row against a column strategy.
    pub fn row_payoffs(&self, col_strategy: &[f64]) -> Vec<f64> {
        self.payoff
            .iter()
            .map(|row| row.iter().zip(col_strategy).map(|(a, y)| a * y).sum())
            .collect()
    }

    /// Expected payoff of each pure column against a row strategy.
    pub fn col_payoffs(&self, row_strategy: &[f64]) -> Vec<f64> {
        (0..self.cols.len())
            .map(|j| self.payoff.iter().zip(row_strategy).map(|(row, x)| row[j] * x).sum())
            .collect()
    }

    /// Best row reply to `col_strategy` minus worst column reply to
    /// `row_strategy`; zero exactly at an equilibrium.
    pub fn duality_gap(&self, row_strategy: &[f64], col_strategy: &[f64]) -> f64 {
        let upper = self.row_payoffs(col_strategy).into_iter().fold(f64::NEG_INFINITY, f64::max);
        let lower = self.col_payoffs(row_strategy).into_iter().fold(f64::INFINITY, f64::min);
        upper - lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Simplex,
    MultiplicativeWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub duality_gap: f64,
    pub method: SolveMethod,
    pub iterations: usize,
}

/// Maximizes `Σ y` subject to `a y ≤ 1`, `y ≥ 0` for a positive matrix `a`.
/// Returns the primal optimum, the dual optimum and the pivot count.
fn simplex_unit(a: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let m = a.len();
    let n = a[0].len();
    let width = n + m + 1;
    // Rows 0..m are constraints, row m is the objective (reduced costs).
    let mut t = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        t[i][..n].copy_from_slice(&a[i]);
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    for j in 0..n {
        t[m][j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let max_pivots = 50 * (n + m) + 1000;
    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + m).find(|&j| t[m][j] < -PIVOT_TOL) else { break };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][enter] > PIVOT_TOL {
                let ratio = t[i][width - 1] / t[i][enter];
                let better = match leave {
                    None => true,
                    Some((l, r)) => ratio < r - PIVOT_TOL || (ratio <= r + PIVOT_TOL && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((row, _)) = leave else {
            return Err(Error::Misconfigured("game program is unbounded".into()));
        };
        let p = t[row][enter];
        t[row].iter_mut().for_each(|v| *v /= p);
        let pivot_row = t[row].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != row && r[enter] != 0.0 {
                let f = r[enter];
                r.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            }
        }
        basis[row] = enter;
        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::NoConvergence(pivots));
        }
    }
    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i][width - 1];
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[m][n + i].max(0.0)).collect();
    Ok((y, x, pivots))
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// Exact minimax solution by linear programming.
pub fn solve_game(g: &ZeroSumGame) -> Result<GameSolution> {
    g.validate()?;
    let min = g.payoff.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let a: Vec<Vec<f64>> = g.payoff.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
    let (y, x, pivots) = simplex_unit(&a)?;
    let col_strategy = normalize(&y);
    let row_strategy = normalize(&x);
    let value = 1.0 / y.iter().sum::<f64>() - shift;
    Ok(GameSolution {
        value,
        duality_gap: g.duality_gap(&row_strategy, &col_strategy),
        row_strategy,
        col_strategy,
        method: SolveMethod::Simplex,
        iterations: pivots,
    })
}

/// Both players run multiplicative weights against each other's current
/// mixed strategy; returns the time-averaged strategies. Stops once the
/// duality gap of the averages falls below `target_gap`.
pub fn solve_mwu(g: &ZeroSumGame, max_iterations: usize, target_gap: f64) -> Result<GameSolution> {
    g.validate()?;
    let (m, n) = (g.rows.len(), g.cols.len());
    let eta = (((m.max(n)) as f64).ln().max(1.0) / max_iterations.max(1) as f64).sqrt();
    let mut row_w = vec![0.0f64; m];
    let mut col_w = vec![0.0f64; n];
    let mut row_avg = vec![0.0; m];
    let mut col_avg = vec![0.0; n];
    let softmax = |w: &[f64], sign: f64| {
        let top = w.iter().map(|v| sign * v).fold(f64::NEG_INFINITY, f64::max);
        normalize(&w.iter().map(|v| (sign * v - top).exp()).collect::<Vec<_>>())
    };
    let mut iterations = 0;
    let mut gap = f64::INFINITY;
    for it in 1..=max_iterations {
        let x = softmax(&row_w, eta);
        let y = softmax(&col_w, -eta);
        for (a, v) in row_avg.iter_mut().zip(&x) {
            *a += (v - *a) / it as f64;
        }
        for (a, v) in col_avg.iter_mut().zip(&y) {
            *a += (v - *a) / it as f64;
        }
        for (w, p) in row_w.iter_mut().zip(g.row_payoffs(&y)) {
            *w += p;
        }
        for (w, p) in col_w.iter_mut().zip(g.col_payoffs(&x)) {
            *w += p;
        }
        iterations = it;
        if it % 100 == 0 || it == max_iterations {
            gap = g.duality_gap(&row_avg, &col_avg);
            if gap < target_gap {
                break;
            }
        }
    }
    let lower = g.col_payoffs(&row_avg).into_iter().fold(f64::INFINITY, f64::min);
    Ok(GameSolution {
        value: lower + gap / 2.0,
        row_strategy: row_avg,
        col_strategy: col_avg,
        duality_gap: gap,
        method: SolveMethod::MultiplicativeWeights,
        iterations,
    })
}

/// Default constant in the advice size `⌈c₀ ln|R| / ε²⌉`.
pub const DEFAULT_SUPPORT_CONSTANT: f64 = 8.0;
/// Redraws allowed before sparse sampling gives up.
pub const SUPPORT_ATTEMPTS: usize = 20;

/// Number of i.i.d. column draws for `rows` row strategies and slack `epsilon`.
/// A single row needs a single draw.
pub fn support_size(rows: usize, epsilon: f64, c0: f64) -> usize {
    ((c0 * (rows as f64).ln() / (epsilon * epsilon)).ceil() as usize).max(1)
}

/// A multiset of columns whose uniform mixture loses at most `epsilon`
/// against every pure row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSupport {
    pub columns: Vec<usize>,
    pub epsilon: f64,
    pub c0: f64,
    pub seed: u64,
    /// 1-based index of the draw that passed.
    pub attempt: usize,
    pub value: f64,
    /// `value + ε − E_{c←S}[p(r, c)]` for every row; all nonnegative.
    pub margins: Vec<f64>,
}

/// Draws the support from the solver's column strategy, redrawing with a
/// derived seed until every row is within `value + epsilon`.
pub fn sparse_support(
    g: &ZeroSumGame,
    solution: &GameSolution,
    epsilon: f64,
    c0: f64,
    seed: u64,
) -> Result<SparseSupport> {
    use rand::distr::{weighted::WeightedIndex, Distribution};
    if !(epsilon > 0.0) {
        return Err(Error::Misconfigured(format!("slack {epsilon} must be positive")));
    }
    let size = support_size(g.rows.len(), epsilon, c0);
    let weights: Vec<f64> = solution.col_strategy.iter().map(|w| w.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::MalformedDistribution(format!("column strategy: {e}")))?;
    let mut failing = Vec::new();
    for attempt in 1..=SUPPORT_ATTEMPTS {
        let mut rng = crate::rng::seeded(crate::rng::derive_seed(seed, attempt as u64));
        let columns: Vec<usize> = (0..size).map(|_| dist.sample(&mut rng)).collect();
        let mut mix = vec![0.0; g.cols.len()];
        for &c in &columns {
            mix[c] += 1.0 / size as f64;
        }
        let margins: Vec<f64> = g
            .row_payoffs(&mix)
            .into_iter()
            .map(|p| solution.value + epsilon - p)
            .collect();
        failing = (0..margins.len()).filter(|&r| margins[r] < 0.0).collect();
        if failing.is_empty() {
            return Ok(SparseSupport {
                columns,
                epsilon,
                c0,
                seed,
                attempt,
                value: solution.value,
                margins,
            });
        }
    }
    Err(Error::SamplingExhausted {
        attempts: SUPPORT_ATTEMPTS,
        rows: failing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn matching_pennies() {
        let g = ZeroSumGame::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = solve_game(&g).unwrap();
        assert!((s.value - 0.5).abs() < 1e-12);
        assert!(s.duality_gap < 1e-12);
        let w = solve_mwu(&g, 100_000, 1e-7).unwrap();
        assert!((w.value - 0.5).abs() < 1e-6);
    }

    #[test]
    fn constant_and_single_row() {
        let c = ZeroSumGame::from_matrix(vec![vec![0.3; 4]; 3]).unwrap();
        assert!((solve_game(&c).unwrap().value - 0.3).abs() < 1e-12);
        let r = ZeroSumGame::from_matrix(vec![vec![0.7, 0.2, 0.9]]).unwrap();
        let s = solve_game(&r).unwrap();
        assert!((s.value - 0.2).abs() < 1e-12);
        assert!((s.col_strategy[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_games_agree_across_methods() {
        let mut rng = seeded(7);
        for _ in 0..5 {
            let a: Vec<Vec<f64>> = (0..6).map(|_| (0..20).map(|_| rng.random::<f64>()).collect()).collect();
            let g = ZeroSumGame::from_matrix(a).unwrap();
            let s = solve_game(&g).unwrap();
            assert!(s.duality_gap < 1e-7, "gap {}", s.duality_gap);
            // The averaged strategies bracket the value within their gap.
            let w = solve_mwu(&g, 20_000, 1e-4).unwrap();
            assert!(w.duality_gap < 0.05);
            assert!((w.value - s.value).abs() <= w.duality_gap / 2.0 + 1e-12);
        }
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(ZeroSumGame::from_matrix(vec![vec![1.5]]).is_err());
        assert!(ZeroSumGame::from_matrix(vec![vec![0.1, 0.2], vec![0.3]]).is_err());
    }

    #[test]
    fn support_size_arithmetic() {
        assert_eq!(support_size(4, 0.25, 8.0), 178);
        assert_eq!(support_size(6, 0.5, 8.0), 58);
        assert_eq!(support_size(1, 0.5, 8.0), 1);
    }

    #[test]
    fn dominant_column_support() {
        let g = ZeroSumGame::from_matrix(vec![vec![0.9, 0.1, 0.5], vec![0.8, 0.2, 0.6]]).unwrap();
        let s = solve_game(&g).unwrap();
        let sup = sparse_support(&g, &s, 0.1, DEFAULT_SUPPORT_CONSTANT, 3).unwrap();
        assert!(sup.columns.iter().all(|&c| c == 1));
        assert!(sup.margins.iter().all(|m| *m >= 0.0));
        assert!((sup.margins[1] - 0.1).abs() < 1e-12);
    }
}
