use num_traits::Zero;
use polymatrix::constraints::{check, ConstraintCheck, Problem};
use polymatrix::exact::{rat, rat_int, Rational};
use polymatrix::generate::random_profile;
use polymatrix::oracle::{enumerate_pure_ne, DEFAULT_BUDGET};
use polymatrix::reductions::{
    all_out_profile, assignment_profile, assignment_profile_exact, build_g, build_gprime,
    build_gtilde, check_1in3, cubic_no_instance, cubic_yes_instance, pick_constants, Formula,
    GadgetKind, Label, Role,
};
use polymatrix::{is_eps_wsne, normalize, regret_report, subgame, tv_distance, StrategyProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn g_totals_are_bounded_on_random_profiles() {
    let f = cubic_yes_instance();
    let lg = build_g(&f).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let p = random_profile(&mut rng, &lg.game);
        let r = regret_report(&lg.game, &p).unwrap();
        for (i, pr) in r.players.iter().enumerate() {
            match lg.roles[i] {
                Role::Variable(_) => assert!(pr.expected_payoff <= 1e-12),
                Role::Clause(_) => {
                    assert!(pr.expected_payoff <= 1.0 + 1e-12);
                    if pr.expected_payoff >= 1.0 - 1e-12 {
                        let c = lg.formula.clauses()[i - f.n_vars()];
                        assert!(p.get(i).support().len() == 1);
                        assert!(c.iter().all(|&v| p.get(v).support().len() == 1));
                    }
                }
            }
        }
    }
}

#[test]
fn no_instance_never_reaches_full_welfare() {
    let f = cubic_no_instance();
    let lg = build_g(&f).unwrap();
    let m = f.clauses().len() as f64;
    let actions = lg.game.actions().to_vec();
    let total: usize = actions.iter().product();
    for mut idx in 0..total {
        let mut pure = Vec::with_capacity(actions.len());
        for &a in &actions {
            pure.push(idx % a);
            idx /= a;
        }
        let p = StrategyProfile::pure(&lg.game, &pure);
        assert!(regret_report(&lg.game, &p).unwrap().welfare() < m);
    }
}

#[test]
fn yes_instance_pure_equilibria_include_assignment() {
    let f = Formula::from_one_based(4, &[[1, 2, 3], [2, 3, 4]]).unwrap();
    let lg = build_g(&f).unwrap();
    let hits = enumerate_pure_ne(&lg.game, 0.0, DEFAULT_BUDGET).unwrap();
    for bits in 0u32..16 {
        let a: Vec<bool> = (0..4).map(|v| bits & (1 << v) != 0).collect();
        if f.is_one_in_three(&a) {
            let p = assignment_profile(&lg, &a, false).unwrap();
            assert!(hits.iter().any(|h| h.profile == p));
        }
    }
}

#[test]
fn clause_normalization_range() {
    let lg = build_g(&cubic_yes_instance()).unwrap();
    let clause = lg.clause_player(0);
    // enumerate the clause and its three variables
    let vars = lg.formula.clauses()[0];
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for s in 0..3 {
        for bits in 0..8u32 {
            let mut pure = vec![0; lg.game.num_players()];
            pure[clause] = s;
            for (t, &v) in vars.iter().enumerate() {
                pure[v] = ((bits >> t) & 1) as usize;
            }
            let p = StrategyProfile::pure(&lg.game, &pure);
            let x = regret_report(&lg.game, &p).unwrap().players[clause].expected_payoff;
            hi = hi.max(x);
            lo = lo.min(x);
        }
    }
    assert_eq!((hi, lo), (1.0, -2.0));
    assert_eq!(lg.game.payoff_range(clause), (hi, lo));
    let (_, maps) = normalize(&lg.game);
    assert_eq!(maps[clause].apply(hi), 1.0);
    assert_eq!(maps[clause].apply(lo), 0.0);
}

#[test]
fn clause_neighborhood_matches_gadget_table() {
    let f = Formula::from_one_based(3, &[[1, 2, 3]]).unwrap();
    let lg = build_g(&f).unwrap();
    let (sub, map) = subgame(&lg.game, &[3, 1]).unwrap();
    assert_eq!(map, vec![1, 3]);
    // variable x2 sits at position 1 of the clause
    assert_eq!(sub.matrix(1, 0).unwrap().to_rows(), vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![-1.0, 0.0]]);
    assert_eq!(sub.matrix(0, 1).unwrap().to_rows(), vec![vec![0.0, 0.0, 0.0], vec![0.0, -1.0, 0.0]]);
}

#[test]
fn gprime_assignment_wsne_boundary() {
    let f = cubic_yes_instance();
    let a = check_1in3(&f).unwrap().unwrap();
    let k = pick_constants(&rat(1, 2)).unwrap();
    assert_eq!((k.c.clone(), k.kappa.clone()), (rat(5, 8), rat(2, 9)));
    let lg = build_gprime(&f, &k).unwrap();
    let p = assignment_profile(&lg, &a, false).unwrap();
    assert!(is_eps_wsne(&lg.game, &p, 0.5).unwrap().holds);
    assert!(!is_eps_wsne(&lg.game, &p, 0.4).unwrap().holds);
    let exact = assignment_profile_exact(&lg, &a, false).unwrap();
    let clause = lg.clause_player(0);
    let regret = lg.exact.regret(&exact, clause);
    assert_eq!(regret, rat_int(1) - &k.kappa - rat_int(2) * &k.c * &k.kappa);
    let out = all_out_profile(&lg).unwrap();
    assert_eq!(tv_distance(&out, &p).unwrap(), 1.0);
}

#[test]
fn gtilde_duplicates_are_identical() {
    let f = cubic_yes_instance();
    let k = pick_constants(&rat(3, 10)).unwrap();
    let lg = build_gtilde(&f, &k).unwrap();
    assert_eq!(lg.kind, GadgetKind::Gtilde);
    for e in lg.game.edges() {
        // u is a variable (5 actions), v a clause (7 actions)
        let (vm, cm) = (&e.payoffs_u, &e.payoffs_v);
        for (orig, dup) in [(0, 3), (1, 4)] {
            assert_eq!(vm.row(orig), vm.row(dup));
        }
        for (orig, dup) in [(0, 4), (1, 5), (2, 6)] {
            assert_eq!(cm.row(orig), cm.row(dup));
        }
    }
    let out = all_out_profile(&lg).unwrap();
    assert!(is_eps_wsne(&lg.game, &out, 0.0).unwrap().holds);
    let nog = build_gtilde(&cubic_no_instance(), &k).unwrap();
    assert_eq!(nog.label, Label::No);
    assert!(is_eps_wsne(&nog.game, &all_out_profile(&nog).unwrap(), 0.0).unwrap().holds);
}

#[test]
fn table_checks_on_gadgets() {
    let f = cubic_yes_instance();
    let a = check_1in3(&f).unwrap().unwrap();
    let lg = build_g(&f).unwrap();
    let p = assignment_profile(&lg, &a, false).unwrap();
    let m = f.clauses().len() as f64;
    let p1 = check(&lg.game, std::slice::from_ref(&p), &ConstraintCheck::new(Problem::WelfareAtLeast(m)), 0.0).unwrap();
    assert!(p1.holds);
    assert_eq!(p1.value, m);
    let p5 = ConstraintCheck::new(Problem::FarApart(0.1));
    assert!(!check(&lg.game, &[p.clone(), p.clone()], &p5, 0.0).unwrap().holds);

    let k = pick_constants(&rat(1, 2)).unwrap();
    let lt = build_gtilde(&f, &k).unwrap();
    let split = assignment_profile(&lt, &a, true).unwrap();
    let p8 = ConstraintCheck::new(Problem::MinSupportAtLeast(2));
    assert!(check(&lt.game, std::slice::from_ref(&split), &p8, 0.5).unwrap().holds);
}

#[test]
fn exact_payoffs_of_gprime_assignment() {
    let f = cubic_yes_instance();
    let a = check_1in3(&f).unwrap().unwrap();
    for i in 1..10 {
        let eps = rat(i, 10);
        let k = pick_constants(&eps).unwrap();
        let lg = build_gprime(&f, &k).unwrap();
        let p = assignment_profile_exact(&lg, &a, false).unwrap();
        let want: Rational = rat_int(1) - &eps;
        for pl in 0..lg.exact.num_players() {
            assert_eq!(lg.exact.expected_payoff(&p, pl), want);
        }
        assert!(!lg.exact.max_support_regret(&p).is_zero());
    }
}
