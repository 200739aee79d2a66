mod common;

use common::{dominant_chain, edge};
use polymatrix::generate::{random_game, random_normalized_game, random_profile, Topology};
use polymatrix::oracle::{
    enumerate_k_uniform_ne, enumerate_pure_ne, grid_search_wsne, sampling_check, OracleError,
    DEFAULT_BUDGET,
};
use polymatrix::reductions::{all_out_profile, build_gprime, cubic_yes_instance, pick_constants};
use polymatrix::exact::rat;
use polymatrix::{is_eps_ne, is_eps_wsne, normalize, PolymatrixGame, StrategyProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn pure_and_unit_grid_agree_on_random_games() {
    for seed in 0..30 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_normalized_game(&mut rng, Topology::Tree, 4, 3);
        for eps in [0.0, 0.1, 0.3] {
            let a = enumerate_pure_ne(&g, eps, DEFAULT_BUDGET).unwrap();
            let b = grid_search_wsne(&g, eps, 1.0, DEFAULT_BUDGET).unwrap();
            assert_eq!(a, b);
            assert!(a.iter().all(|h| is_eps_wsne(&g, &h.profile, eps).unwrap().holds));
        }
    }
}

#[test]
fn pure_enumeration_matches_brute_force() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let g = random_normalized_game(&mut rng, Topology::Random(0.5), 4, 3);
        let hits = enumerate_pure_ne(&g, 0.1, DEFAULT_BUDGET).unwrap();
        let actions = g.actions().to_vec();
        let total: usize = actions.iter().product();
        let mut expected = Vec::new();
        for idx in 0..total {
            let mut rest = idx;
            let mut pure = vec![0; actions.len()];
            // last player varies slowest so that `expected` is lexicographic
            for i in (0..actions.len()).rev() {
                let block: usize = actions[..i].iter().product();
                pure[i] = rest / block;
                rest %= block;
            }
            let p = StrategyProfile::pure(&g, &pure);
            if is_eps_ne(&g, &p, 0.1).unwrap().holds {
                expected.push(pure);
            }
        }
        expected.sort();
        let got: Vec<Vec<usize>> = hits.into_iter().map(|h| h.choice).collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn k_uniform_hits_are_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = normalize(&random_game(&mut rng, vec![2; 3], &[(0, 1), (1, 2)])).0;
    let hits = enumerate_k_uniform_ne(&g, 2, 0.2, DEFAULT_BUDGET, None).unwrap();
    for h in &hits {
        assert!(is_eps_ne(&g, &h.profile, 0.2).unwrap().holds);
        assert!(h.max_regret <= 0.2 + 1e-9);
    }
    let all = enumerate_k_uniform_ne(&g, 2, 1.0, DEFAULT_BUDGET, None).unwrap();
    assert_eq!(all.len(), 27);
}

#[test]
fn dominant_profiles_only_below_margin() {
    let g = dominant_chain(3, 0.5);
    let hits = enumerate_k_uniform_ne(&g, 2, 0.2, DEFAULT_BUDGET, None).unwrap();
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].profile, StrategyProfile::pure(&g, &[0, 0, 0]));
}

#[test]
fn all_out_survives_every_eps() {
    let f = cubic_yes_instance();
    let k = pick_constants(&rat(1, 2)).unwrap();
    let lg = build_gprime(&f, &k).unwrap();
    let out = all_out_profile(&lg).unwrap();
    for eps in [0.0, 0.25, 0.5] {
        let hits = enumerate_pure_ne(&lg.game, eps, DEFAULT_BUDGET).unwrap();
        assert!(hits.iter().any(|h| h.profile == out));
    }
}

#[test]
fn bad_inputs_are_errors() {
    let g = PolymatrixGame::edgeless(vec![2]).unwrap();
    assert!(matches!(grid_search_wsne(&g, 0.0, 0.3, DEFAULT_BUDGET), Err(OracleError::BadStep(_))));
    assert!(matches!(enumerate_pure_ne(&g, -0.1, DEFAULT_BUDGET), Err(OracleError::NegativeEpsilon(_))));
}

#[test]
fn sampling_concentrates_with_k() {
    let g = PolymatrixGame::new(
        vec![2, 2],
        vec![edge(0, 1, &[&[1.0, 0.0], &[0.0, 1.0]], &[&[0.0, 1.0], &[1.0, 0.0]])],
    )
    .unwrap();
    let u = StrategyProfile::uniform(&g);
    let big = sampling_check(&g, &u, 10_000, 100, 42, 0.05).unwrap();
    assert_eq!(big.fraction_within, 1.0);
    let k1 = sampling_check(&g, &u, 1, 100, 42, 0.05).unwrap();
    let k100 = sampling_check(&g, &u, 100, 100, 42, 0.05).unwrap();
    assert!(k100.median_deviation <= k1.median_deviation);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = random_profile(&mut rng, &g);
    assert_eq!(
        sampling_check(&g, &p, 50, 10, 1, 0.1).unwrap(),
        sampling_check(&g, &p, 50, 10, 1, 0.1).unwrap()
    );
}
