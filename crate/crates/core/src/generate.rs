//! Random instances: interaction graphs, games and profiles.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::exact::{rat, ExactProfile};
use crate::game::{normalize, EdgeGame, Matrix, MixedStrategy, Player, PolymatrixGame, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Path,
    Star,
    Cycle,
    /// Uniform random labelled tree (random attachment).
    Tree,
    /// Erdős–Rényi graph with the given edge probability.
    Random(f64),
}

/// Edge list over `0..n` for the chosen topology.
pub fn topology_edges<R: Rng>(rng: &mut R, topology: Topology, n: usize) -> Vec<(Player, Player)> {
    match topology {
        Topology::Path => (1..n).map(|i| (i - 1, i)).collect(),
        Topology::Star => (1..n).map(|i| (0, i)).collect(),
        Topology::Cycle => {
            let mut e: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            if n >= 3 {
                e.push((0, n - 1));
            }
            e
        }
        Topology::Tree => {
            let mut order: Vec<Player> = (0..n).collect();
            order.shuffle(rng);
            (1..n)
                .map(|i| {
                    let p = order[rng.gen_range(0..i)];
                    (p.min(order[i]), p.max(order[i]))
                })
                .collect()
        }
        Topology::Random(p) => (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(p))
            .collect(),
    }
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            // sixteenths keep payoffs exact and make ties reasonably common
            m.set(r, c, rng.gen_range(0..=16) as f64 / 16.0);
        }
    }
    m
}

/// Game on the given edges with payoffs drawn from `{0, 1/16, ..., 1}`.
pub fn random_game<R: Rng>(rng: &mut R, actions: Vec<usize>, edges: &[(Player, Player)]) -> PolymatrixGame {
    let games = edges
        .iter()
        .map(|&(u, v)| {
            let a = random_matrix(rng, actions[u], actions[v]);
            let b = random_matrix(rng, actions[v], actions[u]);
            EdgeGame::new(u, v, a, b)
        })
        .collect();
    PolymatrixGame::new(actions, games).expect("generated game is well formed")
}

/// Random per-player action counts in `1..=max_actions`.
pub fn random_actions<R: Rng>(rng: &mut R, n: usize, max_actions: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(1..=max_actions)).collect()
}

/// Normalized random game on a random graph of the chosen topology.
pub fn random_normalized_game<R: Rng>(
    rng: &mut R,
    topology: Topology,
    n: usize,
    max_actions: usize,
) -> PolymatrixGame {
    let edges = topology_edges(rng, topology, n);
    let actions = random_actions(rng, n, max_actions);
    normalize(&random_game(rng, actions, &edges)).0
}

/// Random mixed strategy with small integer weights.
pub fn random_strategy<R: Rng>(rng: &mut R, m: usize) -> MixedStrategy {
    let w = random_weights(rng, m);
    let total: u64 = w.iter().sum();
    let mut probs: Vec<f64> = w.iter().map(|&x| x as f64 / total as f64).collect();
    // keep the sum within tolerance by absorbing the residue in the largest entry
    let residue = 1.0 - probs.iter().sum::<f64>();
    let top = (0..m).max_by(|&a, &b| probs[a].total_cmp(&probs[b])).unwrap_or(0);
    probs[top] += residue;
    MixedStrategy::new(probs).expect("weights form a distribution")
}

pub fn random_profile<R: Rng>(rng: &mut R, game: &PolymatrixGame) -> StrategyProfile {
    StrategyProfile::new(
        game.actions()
            .iter()
            .map(|&m| random_strategy(rng, m))
            .collect(),
    )
}

fn random_weights<R: Rng>(rng: &mut R, m: usize) -> Vec<u64> {
    loop {
        // zero weights are frequent so that supports vary
        let w: Vec<u64> = (0..m).map(|_| rng.gen_range(0..=4)).collect();
        if w.iter().any(|&x| x > 0) {
            return w;
        }
    }
}

/// Random exact profile with small integer weights.
pub fn random_exact_profile<R: Rng>(rng: &mut R, actions: &[usize]) -> ExactProfile {
    actions
        .iter()
        .map(|&m| {
            let w = random_weights(rng, m);
            let total: u64 = w.iter().sum();
            w.iter().map(|&x| rat(x as i64, total as i64)).collect()
        })
        .collect()
}
