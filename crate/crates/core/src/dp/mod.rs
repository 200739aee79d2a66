//! Witness dynamic program over a nice tree decomposition.
//!
//! Phase 1 computes, bottom-up, a table of witnesses per node: k-uniform
//! strategies for the bag players plus rounded payoff vectors summarising
//! what the bag players receive from already forgotten neighbors. A player
//! is forgotten only if it is eps-happy against the rounded data. Phase 2
//! follows provenance pointers from the root to read off a full profile,
//! which is a 1.5-eps Nash equilibrium. If the root table is empty the game
//! has no k-uniform eps/4 equilibrium.
//!
//! With an [`Ovd`] objective every witness also carries an exact objective
//! value; among witnesses with the same key only the best value is kept.

mod grid;
mod solver;

pub use grid::RoundedPayoffGrid;
pub use solver::{happiness_test, phase1, phase2, Phase1, Provenance, Witness};

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::{Ovd, OvdValue};
use crate::exact::to_f64;
use crate::game::{normalize, AffineMap, GameError, Player, PolymatrixGame, StrategyProfile};
use crate::kuniform::{KUniformError, KUniformStrategy};
use crate::treedec::{
    small_exact_treewidth, to_nice, validate, TreeDecError, TreeDecomposition, EXACT_WIDTH_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DpError {
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("game is not normalized: player {player} has payoff range [{min}, {max}]")]
    NotNormalized { player: Player, min: f64, max: f64 },
    #[error("decomposition does not fit the game: {}", .0.join("; "))]
    Decomposition(Vec<String>),
    #[error(transparent)]
    TreeDec(#[from] TreeDecError),
    #[error("player {player} has {count} k-uniform strategies, limit is {limit}")]
    TooManyCandidates {
        player: Player,
        count: u128,
        limit: usize,
    },
    #[error("node {node} would hold {count} witnesses, limit is {limit}")]
    WitnessLimit {
        node: usize,
        count: usize,
        limit: usize,
    },
    #[error("support filter: {0}")]
    BadFilter(String),
    #[error("constrained solve needs an objective")]
    NoConstraint,
    #[error(transparent)]
    KUniform(#[from] KUniformError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Restricts one player's k-uniform strategies to supports inside `allowed`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SupportFilter {
    pub player: Player,
    pub allowed: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub eps: f64,
    /// Samples per strategy; `None` uses [`crate::k_bound`].
    pub k: Option<usize>,
    pub tol: f64,
    pub constraint: Option<Arc<dyn Ovd>>,
    pub support_filter: Option<SupportFilter>,
    /// Carry unrounded payoffs next to the rounded ones and record the
    /// largest rounding error per node.
    pub track_rounding: bool,
    pub max_candidates: usize,
    pub max_witnesses: usize,
}

impl SolverConfig {
    pub fn new(eps: f64) -> Self {
        Self {
            eps,
            k: None,
            tol: crate::TOL,
            constraint: None,
            support_filter: None,
            track_rounding: false,
            max_candidates: 100_000,
            max_witnesses: 20_000_000,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_constraint(mut self, ovd: impl Ovd + 'static) -> Self {
        self.constraint = Some(Arc::new(ovd));
        self
    }

    pub fn with_support_filter(mut self, player: Player, allowed: Vec<usize>) -> Self {
        self.support_filter = Some(SupportFilter { player, allowed });
        self
    }

    pub fn with_rounding_ledger(mut self) -> Self {
        self.track_rounding = true;
        self
    }

    pub(crate) fn resolve_k(&self, game: &PolymatrixGame) -> Result<usize, DpError> {
        match self.k {
            Some(0) => Err(DpError::ZeroK),
            Some(k) => Ok(k),
            None => {
                let n = game.num_players().max(1);
                let m = game.max_actions().max(1);
                Ok(crate::k_bound(n, m, self.eps)? as usize)
            }
        }
    }
}

/// Per-node statistics of a phase-1 run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeStats {
    pub node: usize,
    pub kind: &'static str,
    pub bag_size: usize,
    pub witnesses: usize,
    pub forgets_below: usize,
    /// Largest `|rounded - unrounded|` over the node's witnesses, when tracked.
    pub max_rounding_error: Option<f64>,
    /// `forgets_below * eps / (4n)`.
    pub rounding_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub eps: f64,
    pub k: usize,
    pub width: usize,
    pub nice_nodes: usize,
    pub candidates_per_player: Vec<usize>,
    pub total_witnesses: usize,
    pub max_witnesses: usize,
    /// `log10` of the capacity bound `m^(k w) (2n/eps)^(m w)` on witnesses
    /// per node; compare with `max_witnesses`.
    pub candidate_bound_log10: f64,
    pub nodes: Vec<NodeStats>,
}

/// A profile read off the root table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub strategies: Vec<KUniformStrategy>,
    pub profile: StrategyProfile,
    /// Objective value in constrained mode (exact, normalized game).
    #[serde(skip)]
    pub value: Option<OvdValue>,
}

impl Solution {
    pub fn value_f64(&self) -> Option<f64> {
        self.value.as_ref().and_then(|v| v.as_ref().map(to_f64))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    /// `None` means the root table is empty: no k-uniform eps/4 equilibrium.
    pub solution: Option<Solution>,
    pub diagnostics: Diagnostics,
    /// Affine maps applied by normalization.
    pub maps: Vec<AffineMap>,
    #[serde(skip)]
    pub runtime_ms: f64,
}

/// Exact minimum-width decomposition of the game's interaction graph.
pub fn auto_decomposition(game: &PolymatrixGame) -> Result<TreeDecomposition, DpError> {
    let (_, d) = small_exact_treewidth(&game.interaction_graph(), EXACT_WIDTH_LIMIT)?;
    Ok(d)
}

pub(crate) fn check_normalized(game: &PolymatrixGame, tol: f64) -> Result<(), DpError> {
    for i in 0..game.num_players() {
        let (max, min) = game.payoff_range(i);
        if min < -tol || max > 1.0 + tol {
            return Err(DpError::NotNormalized { player: i, min, max });
        }
    }
    Ok(())
}

/// Normalizes `game`, converts `decomposition` to nice form and runs both
/// phases. The returned profile is for the original game.
pub fn solve(
    game: &PolymatrixGame,
    decomposition: &TreeDecomposition,
    cfg: &SolverConfig,
) -> Result<SolveResult, DpError> {
    let started = Instant::now();
    if let Err(v) = validate(decomposition, &game.interaction_graph()) {
        return Err(DpError::Decomposition(v.iter().map(ToString::to_string).collect()));
    }
    let (normalized, maps) = normalize(game);
    let nice = to_nice(decomposition)?;
    let p1 = phase1(&normalized, &nice, cfg)?;
    let solution = phase2(&p1, &nice);
    let diagnostics = p1.diagnostics(&normalized, &nice, cfg);
    Ok(SolveResult {
        solution,
        diagnostics,
        maps,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// [`solve`] with the objective in `cfg.constraint`; the returned profile
/// maximizes (or minimizes) the objective over every k-uniform eps/4
/// equilibrium, evaluated on the normalized game.
pub fn solve_constrained(
    game: &PolymatrixGame,
    decomposition: &TreeDecomposition,
    cfg: &SolverConfig,
) -> Result<SolveResult, DpError> {
    if cfg.constraint.is_none() {
        return Err(DpError::NoConstraint);
    }
    solve(game, decomposition, cfg)
}

pub(crate) use check_normalized as ensure_normalized;
