//! Polymatrix games: equilibrium verification, hardness gadgets, brute-force
//! oracles and a tree-decomposition dynamic program that finds (constrained)
//! approximate Nash equilibria of bounded-treewidth games.

pub mod constraints;
pub mod dp;
pub mod exact;
pub mod game;
pub mod generate;
pub mod kuniform;
pub mod oracle;
pub mod reductions;
pub mod treedec;

pub use game::{
    is_eps_ne, is_eps_wsne, normalize, payoff_vector, regret_report, subgame, tv_distance,
    AffineMap, EdgeGame, EquilibriumCheck, GameError, Matrix, MixedStrategy, Player,
    PlayerRegret, PolymatrixGame, RegretReport, StrategyProfile, SUPPORT_THRESHOLD, TOL,
};
pub use kuniform::{
    count_k_uniform, enumerate_k_uniform, k_bound, k_bound_existence, KUniformError,
    KUniformStrategy,
};
