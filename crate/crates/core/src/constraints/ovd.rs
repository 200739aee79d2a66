//! One-variable-decomposable objectives.
//!
//! An objective assigns a value `g(R, s)` to every region `R` of players
//! whose strategies are final. Growing the region by one player is handled by
//! `add`, combining two disjoint regions with no edges between them by
//! `merge`. Both see only the current values plus the data in [`AddContext`],
//! which the solver can supply from a witness.

use std::cmp::Ordering;
use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::exact::{dot, rat_int, ExactGame, Rational};
use crate::game::{Player, PolymatrixGame};
use crate::generate::random_exact_profile;

/// `None` is the value of a region that does not yet determine the objective
/// (for example a minimum over an empty set).
pub type OvdValue = Option<Rational>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Payoffs on the edge between the added player and a neighbor outside the
/// region.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierTerm {
    pub neighbor: Player,
    /// `t . A_vj s_j`
    pub to_player: Rational,
    /// `s_j . A_jv t`
    pub to_neighbor: Rational,
}

/// What `add` may look at when player `player` joins the region with strategy
/// `strategy`.
#[derive(Debug, Clone)]
pub struct AddContext<'a> {
    pub player: Player,
    pub strategy: &'a [Rational],
    /// `t . (sum of A_vj s_j over neighbors already in the region)`; only
    /// supplied when [`Ovd::needs_incoming`] is true.
    pub incoming_payoff: Option<Rational>,
    pub frontier: &'a [FrontierTerm],
}

pub trait Ovd: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn sense(&self) -> Sense;
    /// Whether `add` needs the exact payoff the player receives from inside
    /// the region.
    fn needs_incoming(&self) -> bool {
        false
    }
    fn empty(&self) -> OvdValue;
    fn add(&self, ctx: &AddContext<'_>, x: &OvdValue) -> OvdValue;
    fn merge(&self, a: &OvdValue, b: &OvdValue) -> OvdValue;
    /// Direct evaluation of `g` on the players marked in `region`.
    fn evaluate(&self, game: &ExactGame, profile: &[Vec<Rational>], region: &[bool]) -> OvdValue;
}

/// Orders values so that `Greater` means "preferred under `sense`"; an
/// undetermined value is never preferred.
pub fn better(sense: Sense, a: &OvdValue, b: &OvdValue) -> Ordering {
    match (a, b) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => match sense {
            Sense::Maximize => x.cmp(y),
            Sense::Minimize => y.cmp(x),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OvdKind {
    /// Sum of expected payoffs.
    Welfare,
    /// Smallest expected payoff.
    MinPayoff,
    /// Largest probability the target player puts on one action.
    MaxProbability { target: Player },
    /// Sum of support sizes.
    TotalSupport,
    /// Smallest support size.
    MinSupport,
    /// Support size of the target player.
    PlayerSupport { target: Player },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OvdConstraint {
    pub kind: OvdKind,
    pub sense: Sense,
}

pub fn ovd_welfare() -> OvdConstraint {
    OvdConstraint { kind: OvdKind::Welfare, sense: Sense::Maximize }
}

pub fn ovd_min_payoff() -> OvdConstraint {
    OvdConstraint { kind: OvdKind::MinPayoff, sense: Sense::Maximize }
}

pub fn ovd_max_prob(target: Player) -> OvdConstraint {
    OvdConstraint { kind: OvdKind::MaxProbability { target }, sense: Sense::Minimize }
}

pub fn ovd_total_support() -> OvdConstraint {
    OvdConstraint { kind: OvdKind::TotalSupport, sense: Sense::Maximize }
}

pub fn ovd_min_support() -> OvdConstraint {
    OvdConstraint { kind: OvdKind::MinSupport, sense: Sense::Maximize }
}

pub fn ovd_player_support(target: Player) -> OvdConstraint {
    OvdConstraint { kind: OvdKind::PlayerSupport { target }, sense: Sense::Maximize }
}

impl OvdConstraint {
    pub fn with_sense(self, sense: Sense) -> Self {
        Self { sense, ..self }
    }
}

fn support_size(s: &[Rational]) -> Rational {
    rat_int(s.iter().filter(|p| !p.is_zero()).count() as i64)
}

fn max_prob(s: &[Rational]) -> Rational {
    s.iter().max().cloned().unwrap_or_else(Rational::zero)
}

fn min_opt(a: &OvdValue, b: &OvdValue) -> OvdValue {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y).clone()),
        (x, None) => x.clone(),
        (None, y) => y.clone(),
    }
}

fn sum_opt(a: &OvdValue, b: &OvdValue) -> OvdValue {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        (x, None) => x.clone(),
        (None, y) => y.clone(),
    }
}

impl Ovd for OvdConstraint {
    fn name(&self) -> String {
        let sense = match self.sense {
            Sense::Maximize => "max",
            Sense::Minimize => "min",
        };
        let kind = match self.kind {
            OvdKind::Welfare => "welfare".to_string(),
            OvdKind::MinPayoff => "min-payoff".to_string(),
            OvdKind::MaxProbability { target } => format!("max-probability[{target}]"),
            OvdKind::TotalSupport => "total-support".to_string(),
            OvdKind::MinSupport => "min-support".to_string(),
            OvdKind::PlayerSupport { target } => format!("support[{target}]"),
        };
        format!("{sense} {kind}")
    }

    fn sense(&self) -> Sense {
        self.sense
    }

    fn needs_incoming(&self) -> bool {
        self.kind == OvdKind::MinPayoff
    }

    fn empty(&self) -> OvdValue {
        match self.kind {
            OvdKind::Welfare | OvdKind::TotalSupport => Some(Rational::zero()),
            _ => None,
        }
    }

    fn add(&self, ctx: &AddContext<'_>, x: &OvdValue) -> OvdValue {
        match self.kind {
            OvdKind::Welfare => {
                let delta = ctx
                    .frontier
                    .iter()
                    .fold(Rational::zero(), |acc, f| acc + &f.to_player + &f.to_neighbor);
                sum_opt(x, &Some(delta))
            }
            OvdKind::MinPayoff => {
                let own = ctx
                    .frontier
                    .iter()
                    .fold(ctx.incoming_payoff.clone().unwrap_or_else(Rational::zero), |acc, f| {
                        acc + &f.to_player
                    });
                min_opt(x, &Some(own))
            }
            OvdKind::MaxProbability { target } => {
                if ctx.player == target {
                    Some(max_prob(ctx.strategy))
                } else {
                    x.clone()
                }
            }
            OvdKind::TotalSupport => sum_opt(x, &Some(support_size(ctx.strategy))),
            OvdKind::MinSupport => min_opt(x, &Some(support_size(ctx.strategy))),
            OvdKind::PlayerSupport { target } => {
                if ctx.player == target {
                    Some(support_size(ctx.strategy))
                } else {
                    x.clone()
                }
            }
        }
    }

    fn merge(&self, a: &OvdValue, b: &OvdValue) -> OvdValue {
        match self.kind {
            OvdKind::Welfare | OvdKind::TotalSupport => sum_opt(a, b),
            OvdKind::MinPayoff | OvdKind::MinSupport => min_opt(a, b),
            // the target lies in at most one of two disjoint regions
            OvdKind::MaxProbability { .. } | OvdKind::PlayerSupport { .. } => {
                a.clone().or_else(|| b.clone())
            }
        }
    }

    fn evaluate(&self, game: &ExactGame, profile: &[Vec<Rational>], region: &[bool]) -> OvdValue {
        let members = || (0..game.num_players()).filter(|&i| region[i]);
        match self.kind {
            OvdKind::Welfare => {
                let mut total = Rational::zero();
                for e in game.edges() {
                    if region[e.u] || region[e.v] {
                        total += game.pair_payoff(e.u, &profile[e.u], e.v, &profile[e.v]);
                        total += game.pair_payoff(e.v, &profile[e.v], e.u, &profile[e.u]);
                    }
                }
                Some(total)
            }
            OvdKind::MinPayoff => members().map(|i| game.expected_payoff(profile, i)).min(),
            OvdKind::MaxProbability { target } => {
                region.get(target).copied().unwrap_or(false).then(|| max_prob(&profile[target]))
            }
            OvdKind::TotalSupport => Some(
                members().fold(Rational::zero(), |acc, i| acc + support_size(&profile[i])),
            ),
            OvdKind::MinSupport => members().map(|i| support_size(&profile[i])).min(),
            OvdKind::PlayerSupport { target } => region
                .get(target)
                .copied()
                .unwrap_or(false)
                .then(|| support_size(&profile[target])),
        }
    }
}

/// Outcome of [`ovd_validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OvdReport {
    pub name: String,
    pub add_samples: usize,
    pub add_failures: usize,
    pub merge_samples: usize,
    pub merge_failures: usize,
    pub first_failure: Option<String>,
}

impl OvdReport {
    pub fn passed(&self) -> bool {
        self.add_failures == 0 && self.merge_failures == 0
    }
}

/// Builds the [`AddContext`] data for adding `v` to `region` under `profile`.
pub fn add_context_terms(
    game: &ExactGame,
    profile: &[Vec<Rational>],
    region: &[bool],
    v: Player,
    needs_incoming: bool,
) -> (Option<Rational>, Vec<FrontierTerm>) {
    let t = &profile[v];
    let frontier = game
        .neighbors(v)
        .filter(|&j| !region[j])
        .map(|j| FrontierTerm {
            neighbor: j,
            to_player: game.pair_payoff(v, t, j, &profile[j]),
            to_neighbor: game.pair_payoff(j, &profile[j], v, t),
        })
        .collect();
    let incoming = needs_incoming.then(|| dot(t, &game.payoff_vector_where(profile, v, |j| region[j])));
    (incoming, frontier)
}

/// Property test of the `add` and `merge` laws on random regions and exact
/// rational profiles of the given games. `samples` add checks and `samples`
/// merge checks are spread evenly over the games.
pub fn ovd_validate(
    ovd: &dyn Ovd,
    games: &[PolymatrixGame],
    samples: usize,
    seed: u64,
) -> OvdReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exact: Vec<ExactGame> = games
        .iter()
        .filter(|g| g.num_players() > 0)
        .map(ExactGame::from_f64)
        .collect();
    let mut report = OvdReport {
        name: ovd.name(),
        add_samples: 0,
        add_failures: 0,
        merge_samples: 0,
        merge_failures: 0,
        first_failure: None,
    };
    if exact.is_empty() {
        return report;
    }
    for s in 0..samples {
        let game = &exact[s % exact.len()];
        let n = game.num_players();
        let profile = random_exact_profile(&mut rng, game.actions());

        // add law
        let v = rng.gen_range(0..n);
        let mut region: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        region[v] = false;
        let before = ovd.evaluate(game, &profile, &region);
        let (incoming_payoff, frontier) =
            add_context_terms(game, &profile, &region, v, ovd.needs_incoming());
        let ctx = AddContext {
            player: v,
            strategy: &profile[v],
            incoming_payoff,
            frontier: &frontier,
        };
        let via_add = ovd.add(&ctx, &before);
        region[v] = true;
        let direct = ovd.evaluate(game, &profile, &region);
        report.add_samples += 1;
        if via_add != direct {
            report.add_failures += 1;
            report.first_failure.get_or_insert_with(|| {
                format!("add: player {v}, expected {direct:?}, got {via_add:?}")
            });
        }

        // merge law: two disjoint regions with no edge between them
        let first: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let blocked: Vec<bool> = (0..n)
            .map(|i| first[i] || game.neighbors(i).any(|j| first[j]))
            .collect();
        let second: Vec<bool> = (0..n).map(|i| !blocked[i] && rng.gen_bool(0.6)).collect();
        let union: Vec<bool> = (0..n).map(|i| first[i] || second[i]).collect();
        let merged = ovd.merge(
            &ovd.evaluate(game, &profile, &first),
            &ovd.evaluate(game, &profile, &second),
        );
        let direct = ovd.evaluate(game, &profile, &union);
        report.merge_samples += 1;
        if merged != direct {
            report.merge_failures += 1;
            report
                .first_failure
                .get_or_insert_with(|| format!("merge: expected {direct:?}, got {merged:?}"));
        }
    }
    report
}
