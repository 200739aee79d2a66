#![allow(dead_code)]

use polymatrix::dp::auto_decomposition;
use polymatrix::game::{EdgeGame, Matrix};
use polymatrix::generate::{random_normalized_game, Topology};
use polymatrix::treedec::TreeDecomposition;
use polymatrix::{normalize, PolymatrixGame};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub seed: u64,
    pub game: PolymatrixGame,
    /// The game the solver actually works on; objective values refer to it.
    pub normalized: PolymatrixGame,
    pub decomposition: TreeDecomposition,
    pub k: usize,
    pub eps: f64,
}

/// Random normalized games on paths, stars and trees with n <= 6, m <= 3,
/// k in {1, 2, 3} and eps in {0.4, 0.6, 0.8}.
pub fn corpus(count: u64) -> Vec<Instance> {
    const TOPOLOGIES: [Topology; 3] = [Topology::Path, Topology::Star, Topology::Tree];
    const EPS: [f64; 3] = [0.4, 0.6, 0.8];
    (0..count)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let topology = TOPOLOGIES[(seed % 3) as usize];
            let n = 2 + (seed % 5) as usize;
            let game = random_normalized_game(&mut rng, topology, n, 3);
            let decomposition = auto_decomposition(&game).expect("small game");
            Instance {
                seed,
                normalized: normalize(&game).0,
                game,
                decomposition,
                k: 1 + ((seed / 3) % 3) as usize,
                eps: EPS[((seed / 9) % 3) as usize],
            }
        })
        .collect()
}

pub fn matrix(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

pub fn edge(u: usize, v: usize, a: &[&[f64]], b: &[&[f64]]) -> EdgeGame {
    EdgeGame::new(u, v, matrix(a), matrix(b))
}

/// Path 0 - 1 - .. - (n-1) where every player's action 0 beats action 1 by
/// `margin` whatever the neighbors play.
pub fn dominant_chain(n: usize, margin: f64) -> PolymatrixGame {
    let row: &[&[f64]] = &[&[margin, margin], &[0.0, 0.0]];
    let edges = (1..n).map(|i| edge(i - 1, i, row, row)).collect();
    PolymatrixGame::new(vec![2; n], edges).unwrap()
}
