//! Polymatrix game model, payoff evaluation and equilibrium verification.
//!
//! Players are indexed `0..n`. Every undirected edge `(u, v)` carries two
//! payoff matrices: `payoffs_u` (shape `m(u) x m(v)`, payoffs to `u`) and
//! `payoffs_v` (shape `m(v) x m(u)`, payoffs to `v`). A player's payoff
//! vector is the sum over incident edges of `A_ij * s_j`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Player index.
pub type Player = usize;

/// Additive tolerance used by every equilibrium test.
pub const TOL: f64 = 1e-9;

/// A pure strategy counts as played when its probability exceeds this.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("player {0} has no pure strategies")]
    NoActions(Player),
    #[error("edge ({0},{1}) references a player outside 0..{2}")]
    PlayerOutOfRange(Player, Player, usize),
    #[error("self-loop on player {0}")]
    SelfLoop(Player),
    #[error("duplicate edge ({0},{1})")]
    DuplicateEdge(Player, Player),
    #[error("edge ({u},{v}): {which} has shape {got:?}, expected {expected:?}")]
    MatrixShape {
        u: Player,
        v: Player,
        which: &'static str,
        got: (usize, usize),
        expected: (usize, usize),
    },
    #[error("edge ({0},{1}) has a non-finite payoff")]
    NonFinite(Player, Player),
    #[error("player index {0} out of range (n = {1})")]
    NoSuchPlayer(Player, usize),
    #[error("profile has {got} strategies, game has {expected} players")]
    ProfileLength { got: usize, expected: usize },
    #[error("player {player}: strategy has {got} entries, expected {expected}")]
    StrategyLength {
        player: Player,
        got: usize,
        expected: usize,
    },
    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(f64),
    #[error("n field says {declared} players but actions lists {actual}")]
    PlayerCount { declared: usize, actual: usize },
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// `out += self * x`.
    pub fn mul_vec_add(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            let row = self.row(r);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *o += acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mul_vec_add(x, &mut out);
        out
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// One bimatrix game on an undirected edge, `u < v` after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGame {
    pub u: Player,
    pub v: Player,
    pub payoffs_u: Matrix,
    pub payoffs_v: Matrix,
}

impl EdgeGame {
    pub fn new(u: Player, v: Player, payoffs_u: Matrix, payoffs_v: Matrix) -> Self {
        Self {
            u,
            v,
            payoffs_u,
            payoffs_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Incidence {
    neighbor: Player,
    edge: usize,
    /// Whether this player is the `u` endpoint of the edge.
    is_u: bool,
}

/// An `n`-player polymatrix game with per-player action counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame {
    actions: Vec<usize>,
    edges: Vec<EdgeGame>,
    adjacency: Vec<Vec<Incidence>>,
}

impl PolymatrixGame {
    /// Builds and validates a game. Edges may be given in either orientation;
    /// they are stored with `u < v` and sorted.
    pub fn new(actions: Vec<usize>, edges: Vec<EdgeGame>) -> Result<Self, GameError> {
        let n = actions.len();
        if let Some(p) = actions.iter().position(|&m| m == 0) {
            return Err(GameError::NoActions(p));
        }
        let mut oriented = Vec::with_capacity(edges.len());
        for e in edges {
            if e.u >= n || e.v >= n {
                return Err(GameError::PlayerOutOfRange(e.u, e.v, n));
            }
            if e.u == e.v {
                return Err(GameError::SelfLoop(e.u));
            }
            let e = if e.u < e.v {
                e
            } else {
                EdgeGame::new(e.v, e.u, e.payoffs_v, e.payoffs_u)
            };
            let expect_u = (actions[e.u], actions[e.v]);
            let expect_v = (actions[e.v], actions[e.u]);
            for (which, m, expected) in [
                ("payoffs_u", &e.payoffs_u, expect_u),
                ("payoffs_v", &e.payoffs_v, expect_v),
            ] {
                if (m.rows, m.cols) != expected {
                    return Err(GameError::MatrixShape {
                        u: e.u,
                        v: e.v,
                        which,
                        got: (m.rows, m.cols),
                        expected,
                    });
                }
                if m.data.iter().any(|x| !x.is_finite()) {
                    return Err(GameError::NonFinite(e.u, e.v));
                }
            }
            oriented.push(e);
        }
        oriented.sort_by_key(|e| (e.u, e.v));
        for w in oriented.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(GameError::DuplicateEdge(w[0].u, w[0].v));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (idx, e) in oriented.iter().enumerate() {
            adjacency[e.u].push(Incidence {
                neighbor: e.v,
                edge: idx,
                is_u: true,
            });
            adjacency[e.v].push(Incidence {
                neighbor: e.u,
                edge: idx,
                is_u: false,
            });
        }
        for adj in &mut adjacency {
            adj.sort_by_key(|inc| inc.neighbor);
        }
        Ok(Self {
            actions,
            edges: oriented,
            adjacency,
        })
    }

    /// Game with no edges.
    pub fn edgeless(actions: Vec<usize>) -> Result<Self, GameError> {
        Self::new(actions, Vec::new())
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn num_actions(&self, i: Player) -> usize {
        self.actions[i]
    }

    pub fn max_actions(&self) -> usize {
        self.actions.iter().copied().max().unwrap_or(0)
    }

    pub fn edges(&self) -> &[EdgeGame] {
        &self.edges
    }

    /// Neighbors of `i` in ascending order.
    pub fn neighbors(&self, i: Player) -> impl Iterator<Item = Player> + '_ {
        self.adjacency[i].iter().map(|inc| inc.neighbor)
    }

    pub fn degree(&self, i: Player) -> usize {
        self.adjacency[i].len()
    }

    pub fn are_adjacent(&self, i: Player, j: Player) -> bool {
        self.matrix(i, j).is_some()
    }

    /// `A_ij`: payoffs to `i` from its edge with `j`, shape `m(i) x m(j)`.
    pub fn matrix(&self, i: Player, j: Player) -> Option<&Matrix> {
        let adj = self.adjacency.get(i)?;
        let pos = adj.binary_search_by_key(&j, |inc| inc.neighbor).ok()?;
        let inc = adj[pos];
        let e = &self.edges[inc.edge];
        Some(if inc.is_u { &e.payoffs_u } else { &e.payoffs_v })
    }

    /// Iterates `(j, A_ij)` over the neighbors of `i`.
    pub fn incident(&self, i: Player) -> impl Iterator<Item = (Player, &Matrix)> + '_ {
        self.adjacency[i].iter().map(move |inc| {
            let e = &self.edges[inc.edge];
            let m = if inc.is_u { &e.payoffs_u } else { &e.payoffs_v };
            (inc.neighbor, m)
        })
    }

    /// Undirected interaction graph as sorted adjacency lists.
    pub fn interaction_graph(&self) -> Vec<Vec<Player>> {
        (0..self.num_players())
            .map(|i| self.neighbors(i).collect())
            .collect()
    }

    /// Exact maximum and minimum of player `i`'s total payoff over pure profiles.
    pub fn payoff_range(&self, i: Player) -> (f64, f64) {
        let m = self.actions[i];
        let mut hi = vec![0.0; m];
        let mut lo = vec![0.0; m];
        for (_, a) in self.incident(i) {
            for r in 0..m {
                let row = a.row(r);
                hi[r] += row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                lo[r] += row.iter().copied().fold(f64::INFINITY, f64::min);
            }
        }
        let max = hi.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let min = lo.into_iter().fold(f64::INFINITY, f64::min);
        (max, min)
    }

    /// Whether every player's pure payoff range lies inside `[-tol, 1 + tol]`.
    pub fn is_normalized(&self, tol: f64) -> bool {
        (0..self.num_players()).all(|i| {
            let (hi, lo) = self.payoff_range(i);
            lo >= -tol && hi <= 1.0 + tol
        })
    }

    fn check_player(&self, i: Player) -> Result<(), GameError> {
        if i >= self.num_players() {
            return Err(GameError::NoSuchPlayer(i, self.num_players()));
        }
        Ok(())
    }

    /// Checks that `profile` has one valid strategy per player.
    pub fn check_profile(&self, profile: &StrategyProfile) -> Result<(), GameError> {
        if profile.len() != self.num_players() {
            return Err(GameError::ProfileLength {
                got: profile.len(),
                expected: self.num_players(),
            });
        }
        for (i, s) in profile.strategies().iter().enumerate() {
            if s.len() != self.actions[i] {
                return Err(GameError::StrategyLength {
                    player: i,
                    got: s.len(),
                    expected: self.actions[i],
                });
            }
        }
        Ok(())
    }
}

/// Probability distribution over one player's pure strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixedStrategy(Vec<f64>);

impl MixedStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self, GameError> {
        if probs.is_empty() {
            return Err(GameError::InvalidStrategy("empty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0) {
            return Err(GameError::InvalidStrategy(format!(
                "probability {p} outside [0,1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL * probs.len() as f64 {
            return Err(GameError::InvalidStrategy(format!(
                "probabilities sum to {sum}"
            )));
        }
        Ok(Self(probs))
    }

    pub fn pure(m: usize, action: usize) -> Self {
        let mut v = vec![0.0; m];
        v[action] = 1.0;
        Self(v)
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices with probability above [`SUPPORT_THRESHOLD`].
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > SUPPORT_THRESHOLD)
            .map(|(a, _)| a)
            .collect()
    }

    pub fn max_prob(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

impl TryFrom<Vec<f64>> for MixedStrategy {
    type Error = GameError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<MixedStrategy> for Vec<f64> {
    fn from(s: MixedStrategy) -> Self {
        s.0
    }
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<MixedStrategy>);

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Self {
        Self(strategies)
    }

    /// Profile of pure strategies, `actions[i]` for player `i`.
    pub fn pure(game: &PolymatrixGame, actions: &[usize]) -> Self {
        Self(
            actions
                .iter()
                .enumerate()
                .map(|(i, &a)| MixedStrategy::pure(game.num_actions(i), a))
                .collect(),
        )
    }

    pub fn uniform(game: &PolymatrixGame) -> Self {
        Self(game.actions().iter().map(|&m| MixedStrategy::uniform(m)).collect())
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.0
    }

    pub fn get(&self, i: Player) -> &MixedStrategy {
        &self.0[i]
    }

    pub fn set(&mut self, i: Player, s: MixedStrategy) {
        self.0[i] = s;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether every strategy is a point mass.
    pub fn is_pure(&self) -> bool {
        self.0.iter().all(|s| s.support().len() == 1)
    }
}

/// Regret data for one player.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerRegret {
    pub payoff_vector: Vec<f64>,
    pub expected_payoff: f64,
    pub best_response_payoff: f64,
    pub regret: f64,
    pub pure_regrets: Vec<f64>,
    pub support: Vec<usize>,
}

impl PlayerRegret {
    /// Largest regret among pure strategies in the support.
    pub fn support_regret(&self) -> f64 {
        self.support
            .iter()
            .map(|&a| self.pure_regrets[a])
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub players: Vec<PlayerRegret>,
}

impl RegretReport {
    pub fn max_regret(&self) -> f64 {
        self.players.iter().map(|p| p.regret).fold(0.0, f64::max)
    }

    /// Largest regret of any pure strategy played with positive probability.
    pub fn max_support_regret(&self) -> f64 {
        self.players
            .iter()
            .map(PlayerRegret::support_regret)
            .fold(0.0, f64::max)
    }

    pub fn welfare(&self) -> f64 {
        self.players.iter().map(|p| p.expected_payoff).sum()
    }

    pub fn min_payoff(&self) -> f64 {
        self.players
            .iter()
            .map(|p| p.expected_payoff)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of an equilibrium test together with the regret data behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumCheck {
    pub holds: bool,
    pub report: RegretReport,
}

/// `p_i(s) = sum_{j in N(i)} A_ij s_j`.
pub fn payoff_vector(
    game: &PolymatrixGame,
    profile: &StrategyProfile,
    i: Player,
) -> Result<Vec<f64>, GameError> {
    game.check_player(i)?;
    game.check_profile(profile)?;
    Ok(payoff_vector_unchecked(game, profile, i))
}

fn payoff_vector_unchecked(game: &PolymatrixGame, profile: &StrategyProfile, i: Player) -> Vec<f64> {
    let mut out = vec![0.0; game.num_actions(i)];
    for (j, a) in game.incident(i) {
        a.mul_vec_add(profile.get(j).probs(), &mut out);
    }
    out
}

pub fn regret_report(
    game: &PolymatrixGame,
    profile: &StrategyProfile,
) -> Result<RegretReport, GameError> {
    game.check_profile(profile)?;
    let players = (0..game.num_players())
        .map(|i| {
            let payoff_vector = payoff_vector_unchecked(game, profile, i);
            let s = profile.get(i);
            let expected_payoff = s.dot(&payoff_vector);
            let best_response_payoff = payoff_vector
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let pure_regrets = payoff_vector
                .iter()
                .map(|&x| best_response_payoff - x)
                .collect();
            PlayerRegret {
                regret: best_response_payoff - expected_payoff,
                support: s.support(),
                payoff_vector,
                expected_payoff,
                best_response_payoff,
                pure_regrets,
            }
        })
        .collect();
    Ok(RegretReport { players })
}

/// Every player's regret is at most `eps` (plus [`TOL`]).
pub fn is_eps_ne(
    game: &PolymatrixGame,
    profile: &StrategyProfile,
    eps: f64,
) -> Result<EquilibriumCheck, GameError> {
    if eps < 0.0 {
        return Err(GameError::NegativeEpsilon(eps));
    }
    let report = regret_report(game, profile)?;
    let holds = report.players.iter().all(|p| p.regret <= eps + TOL);
    Ok(EquilibriumCheck { holds, report })
}

/// Every pure strategy in every support has regret at most `eps` (plus [`TOL`]).
pub fn is_eps_wsne(
    game: &PolymatrixGame,
    profile: &StrategyProfile,
    eps: f64,
) -> Result<EquilibriumCheck, GameError> {
    if eps < 0.0 {
        return Err(GameError::NegativeEpsilon(eps));
    }
    let report = regret_report(game, profile)?;
    let holds = report
        .players
        .iter()
        .all(|p| p.support.iter().all(|&a| p.pure_regrets[a] <= eps + TOL));
    Ok(EquilibriumCheck { holds, report })
}

/// Affine map applied to one player's total payoff: `new = old * scale + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        scale: 1.0,
        shift: 0.0,
    };

    pub fn apply(&self, total: f64) -> f64 {
        total * self.scale + self.shift
    }
}

/// Maps every player's pure payoff range onto `[0, 1]`.
///
/// Player `i`'s incoming matrices are all scaled by `1 / (M_i - m_i)` and the
/// shift `-m_i / (M_i - m_i)` is split evenly over its `|N(i)|` matrices.
/// Players with a constant payoff keep scale 1 and are shifted to 0.
pub fn normalize(game: &PolymatrixGame) -> (PolymatrixGame, Vec<AffineMap>) {
    let maps: Vec<AffineMap> = (0..game.num_players())
        .map(|i| {
            let (hi, lo) = game.payoff_range(i);
            if game.degree(i) == 0 {
                AffineMap::IDENTITY
            } else if hi - lo > 0.0 {
                let scale = 1.0 / (hi - lo);
                AffineMap {
                    scale,
                    shift: -lo * scale,
                }
            } else {
                AffineMap {
                    scale: 1.0,
                    shift: -lo,
                }
            }
        })
        .collect();
    if maps.iter().all(|m| *m == AffineMap::IDENTITY) {
        return (game.clone(), maps);
    }
    let transform = |i: Player, m: &Matrix| {
        let map = maps[i];
        let share = map.shift / game.degree(i) as f64;
        if map.scale == 1.0 {
            m.map(|x| x + share)
        } else {
            m.map(|x| x * map.scale + share)
        }
    };
    let edges = game
        .edges
        .iter()
        .map(|e| EdgeGame::new(e.u, e.v, transform(e.u, &e.payoffs_u), transform(e.v, &e.payoffs_v)))
        .collect();
    let normalized =
        PolymatrixGame::new(game.actions.clone(), edges).expect("normalization preserves shape");
    (normalized, maps)
}

/// Restriction of `game` to `players`, keeping only edges inside the subset.
/// Returns the subgame and the map from new to original indices.
pub fn subgame(
    game: &PolymatrixGame,
    players: &[Player],
) -> Result<(PolymatrixGame, Vec<Player>), GameError> {
    let mut keep: Vec<Player> = players.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&p) = keep.iter().find(|&&p| p >= game.num_players()) {
        return Err(GameError::NoSuchPlayer(p, game.num_players()));
    }
    let mut index = vec![usize::MAX; game.num_players()];
    for (new, &old) in keep.iter().enumerate() {
        index[old] = new;
    }
    let actions = keep.iter().map(|&p| game.actions[p]).collect();
    let edges = game
        .edges
        .iter()
        .filter(|e| index[e.u] != usize::MAX && index[e.v] != usize::MAX)
        .map(|e| EdgeGame::new(index[e.u], index[e.v], e.payoffs_u.clone(), e.payoffs_v.clone()))
        .collect();
    Ok((PolymatrixGame::new(actions, edges)?, keep))
}

/// Max over players of the max per-action probability difference.
pub fn tv_distance(a: &StrategyProfile, b: &StrategyProfile) -> Result<f64, GameError> {
    if a.len() != b.len() {
        return Err(GameError::ProfileLength {
            got: b.len(),
            expected: a.len(),
        });
    }
    let mut d: f64 = 0.0;
    for (i, (s, t)) in a.strategies().iter().zip(b.strategies()).enumerate() {
        if s.len() != t.len() {
            return Err(GameError::StrategyLength {
                player: i,
                got: t.len(),
                expected: s.len(),
            });
        }
        for (x, y) in s.probs().iter().zip(t.probs()) {
            d = d.max((x - y).abs());
        }
    }
    Ok(d)
}

// --- JSON documents ---

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    u: Player,
    v: Player,
    payoffs_u: Vec<Vec<f64>>,
    payoffs_v: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct GameDoc {
    n: usize,
    actions: Vec<usize>,
    edges: Vec<EdgeDoc>,
}

impl TryFrom<GameDoc> for PolymatrixGame {
    type Error = GameError;

    fn try_from(doc: GameDoc) -> Result<Self, GameError> {
        if doc.n != doc.actions.len() {
            return Err(GameError::PlayerCount {
                declared: doc.n,
                actual: doc.actions.len(),
            });
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for e in doc.edges {
            let pu = Matrix::from_rows(&e.payoffs_u).ok_or(GameError::MatrixShape {
                u: e.u,
                v: e.v,
                which: "payoffs_u",
                got: (e.payoffs_u.len(), 0),
                expected: (0, 0),
            })?;
            let pv = Matrix::from_rows(&e.payoffs_v).ok_or(GameError::MatrixShape {
                u: e.u,
                v: e.v,
                which: "payoffs_v",
                got: (e.payoffs_v.len(), 0),
                expected: (0, 0),
            })?;
            // ragged or empty input falls through to the shape check in `new`
            edges.push(EdgeGame::new(e.u, e.v, pu, pv));
        }
        PolymatrixGame::new(doc.actions, edges)
    }
}

impl From<&PolymatrixGame> for GameDoc {
    fn from(g: &PolymatrixGame) -> Self {
        GameDoc {
            n: g.num_players(),
            actions: g.actions.clone(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    u: e.u,
                    v: e.v,
                    payoffs_u: e.payoffs_u.to_rows(),
                    payoffs_v: e.payoffs_v.to_rows(),
                })
                .collect(),
        }
    }
}

impl Serialize for PolymatrixGame {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GameDoc::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolymatrixGame {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = GameDoc::deserialize(deserializer)?;
        PolymatrixGame::try_from(doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn matching_pennies() -> PolymatrixGame {
        PolymatrixGame::new(
            vec![2, 2],
            vec![EdgeGame::new(
                0,
                1,
                m(&[&[1.0, 0.0], &[0.0, 1.0]]),
                m(&[&[0.0, 1.0], &[1.0, 0.0]]),
            )],
        )
        .unwrap()
    }

    #[test]
    fn edgeless_payoffs_are_zero() {
        let g = PolymatrixGame::edgeless(vec![3, 2]).unwrap();
        let p = StrategyProfile::uniform(&g);
        assert_eq!(payoff_vector(&g, &p, 0).unwrap(), vec![0.0; 3]);
        let r = regret_report(&g, &p).unwrap();
        assert_eq!(r.max_regret(), 0.0);
    }

    #[test]
    fn matching_pennies_pure_regret() {
        // row plays 0, column plays 0: row is happy, column regrets 1
        let g = matching_pennies();
        let p = StrategyProfile::pure(&g, &[0, 0]);
        let r = regret_report(&g, &p).unwrap();
        assert_eq!(r.players[0].regret, 0.0);
        assert_eq!(r.players[1].regret, 1.0);
        assert_eq!(r.players[1].pure_regrets, vec![1.0, 0.0]);
        assert!(!is_eps_ne(&g, &p, 0.5).unwrap().holds);
        assert!(is_eps_ne(&g, &p, 1.0).unwrap().holds);
    }

    #[test]
    fn rejects_bad_games() {
        let e = EdgeGame::new(0, 0, Matrix::zeros(1, 1), Matrix::zeros(1, 1));
        assert_eq!(PolymatrixGame::new(vec![1], vec![e]), Err(GameError::SelfLoop(0)));
        let e1 = EdgeGame::new(0, 1, Matrix::zeros(1, 2), Matrix::zeros(2, 1));
        let e2 = EdgeGame::new(1, 0, Matrix::zeros(2, 1), Matrix::zeros(1, 2));
        assert_eq!(
            PolymatrixGame::new(vec![1, 2], vec![e1.clone(), e2]),
            Err(GameError::DuplicateEdge(0, 1))
        );
        let bad = EdgeGame::new(0, 1, Matrix::zeros(2, 2), Matrix::zeros(2, 1));
        assert!(matches!(
            PolymatrixGame::new(vec![1, 2], vec![bad]),
            Err(GameError::MatrixShape { .. })
        ));
        assert_eq!(PolymatrixGame::new(vec![0], vec![]), Err(GameError::NoActions(0)));
    }

    #[test]
    fn reversed_edge_is_reoriented() {
        let e = EdgeGame::new(1, 0, m(&[&[5.0], &[6.0]]), m(&[&[7.0, 8.0]]));
        let g = PolymatrixGame::new(vec![1, 2], vec![e]).unwrap();
        assert_eq!(g.matrix(1, 0).unwrap().to_rows(), vec![vec![5.0], vec![6.0]]);
        assert_eq!(g.matrix(0, 1).unwrap().to_rows(), vec![vec![7.0, 8.0]]);
    }

    #[test]
    fn negative_eps_is_an_error() {
        let g = matching_pennies();
        let p = StrategyProfile::uniform(&g);
        assert_eq!(is_eps_ne(&g, &p, -0.1).unwrap_err(), GameError::NegativeEpsilon(-0.1));
        assert!(is_eps_wsne(&g, &p, -1.0).is_err());
    }

    #[test]
    fn normalize_two_point_range() {
        let e = EdgeGame::new(0, 1, m(&[&[2.0, 4.0]]), m(&[&[0.0], &[1.0]]));
        let g = PolymatrixGame::new(vec![1, 2], vec![e]).unwrap();
        let (n, maps) = normalize(&g);
        assert_eq!(maps[0], AffineMap { scale: 0.5, shift: -1.0 });
        assert_eq!(maps[1], AffineMap::IDENTITY);
        assert_eq!(n.matrix(0, 1).unwrap().to_rows(), vec![vec![0.0, 1.0]]);
    }

    #[test]
    fn normalize_is_identity_on_normalized_games() {
        let g = matching_pennies();
        let (n, maps) = normalize(&g);
        assert!(maps.iter().all(|m| *m == AffineMap::IDENTITY));
        assert_eq!(n, g);
    }

    #[test]
    fn constant_player_maps_to_zero() {
        // player 0's total is constant 1 although each matrix varies
        let g = PolymatrixGame::new(
            vec![2, 1, 1],
            vec![
                EdgeGame::new(0, 1, m(&[&[1.0], &[0.0]]), m(&[&[0.0, 0.0]])),
                EdgeGame::new(0, 2, m(&[&[0.0], &[1.0]]), m(&[&[0.0, 0.0]])),
            ],
        )
        .unwrap();
        let (n, maps) = normalize(&g);
        assert_eq!(maps[0], AffineMap { scale: 1.0, shift: -1.0 });
        let p = StrategyProfile::uniform(&n);
        assert_eq!(payoff_vector(&n, &p, 0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn tv_distance_examples() {
        let a = StrategyProfile::new(vec![
            MixedStrategy::new(vec![0.5, 0.5]).unwrap(),
            MixedStrategy::new(vec![1.0, 0.0]).unwrap(),
        ]);
        let b = StrategyProfile::new(vec![
            MixedStrategy::new(vec![0.25, 0.75]).unwrap(),
            MixedStrategy::new(vec![1.0, 0.0]).unwrap(),
        ]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(tv_distance(&a, &b).unwrap(), 0.25);
        let c = StrategyProfile::new(vec![MixedStrategy::uniform(2)]);
        assert!(tv_distance(&a, &c).is_err());
    }

    #[test]
    fn subgame_of_path_drops_edges() {
        let e = |u, v| EdgeGame::new(u, v, m(&[&[1.0]]), m(&[&[1.0]]));
        let g = PolymatrixGame::new(vec![1, 1, 1], vec![e(0, 1), e(1, 2)]).unwrap();
        let (all, map) = subgame(&g, &[0, 1, 2]).unwrap();
        assert_eq!(all, g);
        assert_eq!(map, vec![0, 1, 2]);
        let (ac, map) = subgame(&g, &[2, 0]).unwrap();
        assert_eq!(ac.num_players(), 2);
        assert!(ac.edges().is_empty());
        assert_eq!(map, vec![0, 2]);
        let (empty, _) = subgame(&g, &[]).unwrap();
        assert_eq!(empty.num_players(), 0);
    }

    #[test]
    fn invalid_strategies_rejected() {
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![-0.1, 1.1]).is_err());
        assert!(MixedStrategy::new(vec![]).is_err());
        assert!(MixedStrategy::new(vec![0.1, 0.2, 0.7]).is_ok());
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let e = EdgeGame::new(
            0,
            1,
            m(&[&[0.1, 1.0 / 3.0]]),
            m(&[&[std::f64::consts::PI], &[-2.5e-17]]),
        );
        let g = PolymatrixGame::new(vec![1, 2], vec![e]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: PolymatrixGame = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        let p = StrategyProfile::new(vec![
            MixedStrategy::pure(1, 0),
            MixedStrategy::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap(),
        ]);
        let text = serde_json::to_string(&p).unwrap();
        let back: StrategyProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn json_rejects_count_mismatch() {
        let text = r#"{"n": 3, "actions": [1, 1], "edges": []}"#;
        assert!(serde_json::from_str::<PolymatrixGame>(text).is_err());
    }
}
