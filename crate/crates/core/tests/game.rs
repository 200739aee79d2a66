mod common;

use common::edge;
use polymatrix::generate::{random_game, random_normalized_game, random_profile, Topology};
use polymatrix::treedec::{
    parse_gr, parse_td, small_exact_treewidth, to_nice, validate, write_gr, write_td, Violation,
};
use polymatrix::{is_eps_ne, normalize, payoff_vector, regret_report, PolymatrixGame, StrategyProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sums over every opponent pure strategy weighted by its probability.
fn summed_payoffs(g: &PolymatrixGame, p: &StrategyProfile, i: usize) -> Vec<f64> {
    let mut out = vec![0.0; g.num_actions(i)];
    for j in g.neighbors(i) {
        let a = g.matrix(i, j).unwrap();
        for (l, o) in out.iter_mut().enumerate() {
            for b in 0..g.num_actions(j) {
                *o += a.get(l, b) * p.get(j).probs()[b];
            }
        }
    }
    out
}

#[test]
fn payoff_vectors_match_double_loop() {
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_game(&mut rng, vec![2, 3, 2], &[(0, 1), (1, 2)]);
        let p = if seed == 0 { StrategyProfile::uniform(&g) } else { random_profile(&mut rng, &g) };
        for i in 0..3 {
            let a = payoff_vector(&g, &p, i).unwrap();
            let b = summed_payoffs(&g, &p, i);
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }
}

#[test]
fn regret_threshold_is_tight_on_tree_games() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let g = random_normalized_game(&mut rng, Topology::Tree, 5, 3);
    let p = random_profile(&mut rng, &g);
    let worst = (0..5)
        .map(|i| {
            let u = summed_payoffs(&g, &p, i);
            let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            best - p.get(i).dot(&u)
        })
        .fold(0.0, f64::max);
    assert!(worst > 0.05);
    assert!(!is_eps_ne(&g, &p, 0.05).unwrap().holds);
    assert!(is_eps_ne(&g, &p, worst).unwrap().holds);
}

#[test]
fn two_point_range_normalizes_to_unit() {
    let g = PolymatrixGame::new(
        vec![2, 2],
        vec![edge(0, 1, &[&[2.0, 4.0], &[4.0, 2.0]], &[&[2.0, 2.0], &[4.0, 4.0]])],
    )
    .unwrap();
    let (ng, maps) = normalize(&g);
    assert_eq!((maps[0].scale, maps[0].shift), (0.5, -1.0));
    assert_eq!(ng.matrix(0, 1).unwrap().to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    let r = regret_report(&ng, &StrategyProfile::pure(&ng, &[0, 0])).unwrap();
    assert_eq!(r.players[0].regret, 1.0);
}

#[test]
fn game_json_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_normalized_game(&mut rng, Topology::Random(0.5), 5, 3);
    let text = serde_json::to_string(&g).unwrap();
    let back: PolymatrixGame = serde_json::from_str(&text).unwrap();
    assert_eq!(back, g);
}

#[test]
fn pace_files_round_trip_through_the_solver_pipeline() {
    let gr = "c star\np tw 4 3\n1 2\n1 3\n1 4\n";
    let graph = parse_gr(gr).unwrap();
    assert_eq!(parse_gr(&write_gr(&graph)).unwrap(), graph);
    let td = "s td 3 2 4\nb 1 1 2\nb 2 1 3\nb 3 1 4\n1 2\n1 3\n";
    let d = parse_td(td).unwrap();
    assert!(validate(&d, &graph).is_ok());
    assert_eq!(d.width(), 1);
    assert_eq!(parse_td(&write_td(&d, 4)).unwrap().bags(), d.bags());
    let (w, auto) = small_exact_treewidth(&graph, 16).unwrap();
    assert_eq!(w, 1);
    assert_eq!(to_nice(&auto).unwrap().width(), 1);

    let triangle = parse_gr("p tw 3 3\n1 2\n2 3\n1 3\n").unwrap();
    let path_td = parse_td("s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n").unwrap();
    let errs = validate(&path_td, &triangle).unwrap_err();
    assert!(errs.contains(&Violation::EdgeUncovered(0, 2)));
    assert!(errs.iter().any(|v| v.to_string() == "edge (0,2) uncovered"));
}
