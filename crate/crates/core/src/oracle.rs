//! Brute-force ground truth for small games.
//!
//! The enumerations walk players in index order and test a player as soon as
//! it and all of its neighbors have a strategy, so whole subtrees are pruned
//! early. Every node of that search counts against the budget; exceeding it
//! is an error rather than a truncated answer. Results come back in
//! lexicographic order of per-player candidate indices.

use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::constraints::{better, Ovd, OvdValue, Sense};
use crate::exact::{kuniform_probs, to_f64, ExactGame};
use crate::game::{
    is_eps_ne, is_eps_wsne, payoff_vector, GameError, MixedStrategy, PolymatrixGame,
    StrategyProfile, SUPPORT_THRESHOLD, TOL,
};
use crate::kuniform::{count_k_uniform, enumerate_k_uniform, KUniformError, KUniformStrategy};

/// Default cap on explored search nodes.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("search needs more than {budget} nodes")]
    BudgetExceeded { budget: u64 },
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("grid step must be 1/q for a positive integer q, got {0}")]
    BadStep(f64),
    #[error("at least one trial is needed")]
    NoTrials,
    #[error(transparent)]
    KUniform(#[from] KUniformError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A profile found by an enumeration, with its verifier data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleHit {
    /// Index of each player's strategy in its candidate list. For pure
    /// enumeration this is the action profile.
    pub choice: Vec<usize>,
    pub profile: StrategyProfile,
    pub max_regret: f64,
    pub max_support_regret: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KUniformHit {
    pub strategies: Vec<KUniformStrategy>,
    pub profile: StrategyProfile,
    pub max_regret: f64,
    /// Objective on the whole player set, when one was requested.
    #[serde(skip)]
    pub value: Option<OvdValue>,
    #[serde(rename = "value")]
    pub value_f64: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Ne,
    Wsne,
}

/// All pure profiles that are eps-WSNE (for pure profiles this equals eps-NE).
pub fn enumerate_pure_ne(
    game: &PolymatrixGame,
    eps: f64,
    budget: u64,
) -> Result<Vec<OracleHit>, OracleError> {
    let cands: Vec<Vec<MixedStrategy>> = game
        .actions()
        .iter()
        .map(|&m| (0..m).map(|a| MixedStrategy::pure(m, a)).collect())
        .collect();
    run_mixed(game, &cands, Mode::Wsne, eps, budget)
}

/// All profiles whose strategies have probabilities in `{0, step, 2 step, .., 1}`
/// and that are eps-WSNE.
pub fn grid_search_wsne(
    game: &PolymatrixGame,
    eps: f64,
    step: f64,
    budget: u64,
) -> Result<Vec<OracleHit>, OracleError> {
    let q = grid_denominator(step)?;
    let mut cands = Vec::with_capacity(game.num_players());
    for &m in game.actions() {
        if count_k_uniform(m, q) > budget as u128 {
            return Err(OracleError::BudgetExceeded { budget });
        }
        cands.push(grid_points(m, q));
    }
    run_mixed(game, &cands, Mode::Wsne, eps, budget)
}

fn grid_denominator(step: f64) -> Result<usize, OracleError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(OracleError::BadStep(step));
    }
    let q = (1.0 / step).round();
    if (q * step - 1.0).abs() > 1e-9 {
        return Err(OracleError::BadStep(step));
    }
    Ok(q as usize)
}

/// Count vectors summing to `q`, in descending lexicographic order, so that
/// `q = 1` lists the pure strategies by action index.
fn grid_points(m: usize, q: usize) -> Vec<MixedStrategy> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, q: usize, out: &mut Vec<MixedStrategy>) {
        if cur.len() + 1 == m {
            cur.push(left);
            let probs = cur.iter().map(|&c| c as f64 / q as f64).collect();
            out.push(MixedStrategy::new(probs).expect("grid point sums to 1"));
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(m, left - c, cur, q, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, q, &mut Vec::with_capacity(m), q, &mut out);
    out
}

fn run_mixed(
    game: &PolymatrixGame,
    cands: &[Vec<MixedStrategy>],
    mode: Mode,
    eps: f64,
    budget: u64,
) -> Result<Vec<OracleHit>, OracleError> {
    let choices = search(game, cands, mode, eps, budget)?;
    choices
        .into_iter()
        .map(|choice| {
            let profile = StrategyProfile::new(
                choice.iter().enumerate().map(|(i, &c)| cands[i][c].clone()).collect(),
            );
            let check = is_eps_wsne(game, &profile, eps)?;
            debug_assert!(check.holds);
            Ok(OracleHit {
                choice,
                max_regret: check.report.max_regret(),
                max_support_regret: check.report.max_support_regret(),
                profile,
            })
        })
        .collect()
}

/// All k-uniform profiles that are eps-NE. With `objective`, each hit
/// carries the exact objective value over all players.
pub fn enumerate_k_uniform_ne(
    game: &PolymatrixGame,
    k: usize,
    eps: f64,
    budget: u64,
    objective: Option<&dyn Ovd>,
) -> Result<Vec<KUniformHit>, OracleError> {
    let mut strategies = Vec::with_capacity(game.num_players());
    for &m in game.actions() {
        if count_k_uniform(m, k) > budget as u128 {
            return Err(OracleError::BudgetExceeded { budget });
        }
        strategies.push(enumerate_k_uniform(m, k)?);
    }
    let cands: Vec<Vec<MixedStrategy>> = strategies
        .iter()
        .map(|list| list.iter().map(KUniformStrategy::to_mixed).collect())
        .collect();
    let choices = search(game, &cands, Mode::Ne, eps, budget)?;
    let exact = objective.map(|_| ExactGame::from_f64(game));
    let region = vec![true; game.num_players()];
    choices
        .into_iter()
        .map(|choice| {
            let picked: Vec<KUniformStrategy> = choice
                .iter()
                .enumerate()
                .map(|(i, &c)| strategies[i][c].clone())
                .collect();
            let profile = StrategyProfile::new(picked.iter().map(KUniformStrategy::to_mixed).collect());
            let check = is_eps_ne(game, &profile, eps)?;
            debug_assert!(check.holds);
            let value = match (objective, &exact) {
                (Some(ovd), Some(ex)) => {
                    let probs: Vec<_> = picked.iter().map(kuniform_probs).collect();
                    Some(ovd.evaluate(ex, &probs, &region))
                }
                _ => None,
            };
            Ok(KUniformHit {
                value_f64: value.as_ref().and_then(|v| v.as_ref().map(to_f64)),
                value,
                strategies: picked,
                profile,
                max_regret: check.report.max_regret(),
            })
        })
        .collect()
}

/// The hit with the preferred objective value; ties go to the earliest hit.
pub fn best_hit(hits: &[KUniformHit], sense: Sense) -> Option<&KUniformHit> {
    hits.iter().fold(None, |best: Option<&KUniformHit>, h| match best {
        None => Some(h),
        Some(b) => {
            let hv = h.value.clone().flatten();
            let bv = b.value.clone().flatten();
            if better(sense, &hv, &bv).is_gt() {
                Some(h)
            } else {
                Some(b)
            }
        }
    })
}

struct Search<'a> {
    game: &'a PolymatrixGame,
    cands: &'a [Vec<MixedStrategy>],
    /// Players whose neighborhood is complete once player `t` is assigned.
    check_at: Vec<Vec<usize>>,
    mode: Mode,
    eps: f64,
    budget: u64,
    explored: AtomicU64,
}

impl Search<'_> {
    fn happy(&self, i: usize, choice: &[usize]) -> bool {
        let mut u = vec![0.0; self.game.num_actions(i)];
        for (j, a) in self.game.incident(i) {
            a.mul_vec_add(self.cands[j][choice[j]].probs(), &mut u);
        }
        let s = &self.cands[i][choice[i]];
        let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        match self.mode {
            Mode::Ne => best - s.dot(&u) <= self.eps + TOL,
            Mode::Wsne => s
                .probs()
                .iter()
                .zip(&u)
                .all(|(&p, &x)| p <= SUPPORT_THRESHOLD || best - x <= self.eps + TOL),
        }
    }

    fn tick(&self) -> Result<(), OracleError> {
        if self.explored.fetch_add(1, AtomicOrdering::Relaxed) >= self.budget {
            return Err(OracleError::BudgetExceeded { budget: self.budget });
        }
        Ok(())
    }

    fn dfs(&self, choice: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) -> Result<(), OracleError> {
        let t = choice.len();
        if t == self.cands.len() {
            out.push(choice.clone());
            return Ok(());
        }
        for c in 0..self.cands[t].len() {
            self.tick()?;
            choice.push(c);
            if self.check_at[t].iter().all(|&i| self.happy(i, choice)) {
                self.dfs(choice, out)?;
            }
            choice.pop();
        }
        Ok(())
    }
}

fn search(
    game: &PolymatrixGame,
    cands: &[Vec<MixedStrategy>],
    mode: Mode,
    eps: f64,
    budget: u64,
) -> Result<Vec<Vec<usize>>, OracleError> {
    if eps < 0.0 || eps.is_nan() {
        return Err(OracleError::NegativeEpsilon(eps));
    }
    let n = game.num_players();
    if n == 0 {
        return Ok(vec![Vec::new()]);
    }
    let mut check_at = vec![Vec::new(); n];
    for i in 0..n {
        let last = game.neighbors(i).fold(i, usize::max);
        check_at[last].push(i);
    }
    let s = Search {
        game,
        cands,
        check_at,
        mode,
        eps,
        budget,
        explored: AtomicU64::new(0),
    };
    // The total node count does not depend on scheduling, so the budget
    // outcome is deterministic.
    let parts: Vec<Result<Vec<Vec<usize>>, OracleError>> = (0..cands[0].len())
        .into_par_iter()
        .map(|c| {
            s.tick()?;
            let mut out = Vec::new();
            let mut choice = vec![c];
            if s.check_at[0].iter().all(|&i| s.happy(i, &choice)) {
                s.dfs(&mut choice, &mut out)?;
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    Ok(all)
}

/// Empirical payoff deviation of k-uniform profiles sampled from a mixed
/// profile. This does not certify any bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingReport {
    pub certifying: bool,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Per trial, the largest `|p_i(sampled)[a] - p_i(original)[a]|`.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub median_deviation: f64,
    pub fraction_within: f64,
}

/// Draws `k` pure strategies per player from `profile` in each trial. Trial
/// `t` uses stream `t` of a ChaCha generator seeded with `seed`, so results do
/// not depend on thread count.
pub fn sampling_check(
    game: &PolymatrixGame,
    profile: &StrategyProfile,
    k: usize,
    trials: usize,
    seed: u64,
    threshold: f64,
) -> Result<SamplingReport, OracleError> {
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    if k == 0 {
        return Err(KUniformError::ZeroK.into());
    }
    game.check_profile(profile)?;
    let n = game.num_players();
    let original: Vec<Vec<f64>> = (0..n)
        .map(|i| payoff_vector(game, profile, i))
        .collect::<Result<_, _>>()?;
    let dists: Vec<WeightedIndex<f64>> = profile
        .strategies()
        .iter()
        .map(|s| WeightedIndex::new(s.probs()).expect("valid distribution"))
        .collect();
    let deviations: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let sampled = StrategyProfile::new(
                dists
                    .iter()
                    .zip(profile.strategies())
                    .map(|(d, s)| {
                        let mut counts = vec![0usize; s.len()];
                        for _ in 0..k {
                            counts[d.sample(&mut rng)] += 1;
                        }
                        let probs = counts.iter().map(|&c| c as f64 / k as f64).collect();
                        MixedStrategy::new(probs).expect("empirical distribution")
                    })
                    .collect(),
            );
            (0..n)
                .map(|i| {
                    let p = payoff_vector(game, &sampled, i).expect("shape checked");
                    p.iter()
                        .zip(&original[i])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let mut sorted = deviations.clone();
    sorted.sort_by(f64::total_cmp);
    let median_deviation = if trials % 2 == 1 {
        sorted[trials / 2]
    } else {
        (sorted[trials / 2 - 1] + sorted[trials / 2]) / 2.0
    };
    let within = deviations.iter().filter(|&&d| d <= threshold).count();
    Ok(SamplingReport {
        certifying: false,
        k,
        trials,
        seed,
        threshold,
        max_deviation: sorted[trials - 1],
        median_deviation,
        fraction_within: within as f64 / trials as f64,
        deviations,
    })
}
