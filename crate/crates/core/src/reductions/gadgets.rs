//! Gadget games built from monotone formulas.
//!
//! Players `0..n_vars` are variables, followed by one player per clause.
//! A clause player's first three strategies name its variables in ascending
//! order. Payoffs are built in exact arithmetic and converted to floats once.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::formula::{label, Formula, Label};
use super::ReductionError;
use crate::exact::{rat, rat_int, ExactEdge, ExactGame, ExactMatrix, ExactProfile, Rational};
use crate::game::{MixedStrategy, Player, PolymatrixGame, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GadgetKind {
    /// Exact-NE gadget: variables {True, False}, clauses one strategy per variable.
    G,
    /// Adds an Out strategy to every player.
    Gprime,
    /// Duplicates every non-Out strategy of [`GadgetKind::Gprime`].
    Gtilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    Variable(usize),
    Clause(usize),
}

/// `c` in `(max(1 - 3 eps / 2, 0), 1)` and `kappa = (1 - eps) / (1 + 2c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetConstants {
    pub eps: Rational,
    pub c: Rational,
    pub kappa: Rational,
}

impl GadgetConstants {
    pub fn new(eps: Rational, c: Rational) -> Result<Self, ReductionError> {
        let one = Rational::one();
        if eps <= Rational::zero() || eps >= one {
            return Err(ReductionError::BadEpsilon(eps.to_string()));
        }
        let lower = lower_bound(&eps);
        if c <= lower || c >= one {
            return Err(ReductionError::BadConstant(format!(
                "c = {c} outside ({lower}, 1)"
            )));
        }
        let kappa = (&one - &eps) / (&one + rat_int(2) * &c);
        Ok(Self { eps, c, kappa })
    }
}

fn lower_bound(eps: &Rational) -> Rational {
    let l = Rational::one() - rat(3, 2) * eps;
    if l > Rational::zero() {
        l
    } else {
        Rational::zero()
    }
}

/// Midpoint of the admissible interval for `c`.
pub fn pick_constants(eps: &Rational) -> Result<GadgetConstants, ReductionError> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(ReductionError::BadEpsilon(eps.to_string()));
    }
    let c = (lower_bound(eps) + Rational::one()) / rat_int(2);
    GadgetConstants::new(eps.clone(), c)
}

/// Exact value of a decimal literal such as `0.5`, `1e-1` or `3/8`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once('/') {
        let num: BigInt = a.trim().parse().ok()?;
        let den: BigInt = b.trim().parse().ok()?;
        return (!den.is_zero()).then(|| Rational::new(num, den));
    }
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(digits);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -value } else { value })
}

/// A gadget game with its provenance and ground-truth label.
#[derive(Debug, Clone, Serialize)]
pub struct LabeledGame {
    pub game: PolymatrixGame,
    #[serde(skip)]
    pub exact: ExactGame,
    pub kind: GadgetKind,
    pub roles: Vec<Role>,
    pub strategy_names: Vec<Vec<String>>,
    pub label: Label,
    #[serde(skip)]
    pub formula: Formula,
    #[serde(skip)]
    pub constants: Option<GadgetConstants>,
}

impl LabeledGame {
    pub fn n_vars(&self) -> usize {
        self.formula.n_vars()
    }

    pub fn clause_player(&self, j: usize) -> Player {
        self.formula.n_vars() + j
    }

    /// Index of the Out strategy of `player`, if the kind has one.
    pub fn out_action(&self, player: Player) -> Option<usize> {
        match (self.kind, self.roles[player]) {
            (GadgetKind::G, _) => None,
            (_, Role::Variable(_)) => Some(2),
            (_, Role::Clause(_)) => Some(3),
        }
    }
}

fn matrix(rows: Vec<Vec<Rational>>) -> ExactMatrix {
    ExactMatrix::from_rows(rows)
}

/// Payoff matrices for the edge between a clause and the variable at
/// position `pos` of that clause: `(clause x variable, variable x clause)`.
fn edge_matrices(kind: GadgetKind, pos: usize, k: Option<&GadgetConstants>) -> (ExactMatrix, ExactMatrix) {
    let zero = Rational::zero;
    match kind {
        GadgetKind::G => {
            let clause = (0..3)
                .map(|r| if r == pos { vec![rat_int(1), zero()] } else { vec![rat_int(-1), zero()] })
                .collect();
            let var = vec![
                vec![zero(), zero(), zero()],
                (0..3).map(|r| if r == pos { rat_int(-1) } else { zero() }).collect(),
            ];
            (matrix(clause), matrix(var))
        }
        GadgetKind::Gprime => {
            let k = k.expect("constants for Gprime");
            let ck = &k.c * &k.kappa;
            let third = rat(1, 3);
            let var_share = &third - &k.eps / rat_int(3);
            let mut clause: Vec<Vec<Rational>> = (0..3)
                .map(|r| {
                    let t = if r == pos { k.kappa.clone() } else { zero() };
                    vec![t, ck.clone(), zero()]
                })
                .collect();
            clause.push(vec![third.clone(), third.clone(), third.clone()]);
            let var = vec![
                (0..4)
                    .map(|r| if r == pos { var_share.clone() } else { zero() })
                    .collect(),
                (0..4)
                    .map(|r| if r < 3 && r != pos { var_share.clone() } else { zero() })
                    .collect(),
                vec![third.clone(); 4],
            ];
            (matrix(clause), matrix(var))
        }
        GadgetKind::Gtilde => {
            let (c, v) = edge_matrices(GadgetKind::Gprime, pos, k);
            const CLAUSE: [usize; 7] = [0, 1, 2, 3, 0, 1, 2];
            const VAR: [usize; 5] = [0, 1, 2, 0, 1];
            let dup = |m: &ExactMatrix, rows: &[usize], cols: &[usize]| {
                matrix(
                    rows.iter()
                        .map(|&r| cols.iter().map(|&c| m.get(r, c).clone()).collect())
                        .collect(),
                )
            };
            (dup(&c, &CLAUSE, &VAR), dup(&v, &VAR, &CLAUSE))
        }
    }
}

fn names(kind: GadgetKind, formula: &Formula) -> Vec<Vec<String>> {
    let var: Vec<&str> = match kind {
        GadgetKind::G => vec!["True", "False"],
        GadgetKind::Gprime => vec!["True", "False", "Out"],
        GadgetKind::Gtilde => vec!["True", "False", "Out", "True'", "False'"],
    };
    let mut out: Vec<Vec<String>> = (0..formula.n_vars())
        .map(|_| var.iter().map(|s| s.to_string()).collect())
        .collect();
    for c in formula.clauses() {
        let base: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
        let mut s = base.clone();
        if kind != GadgetKind::G {
            s.push("Out".to_string());
        }
        if kind == GadgetKind::Gtilde {
            s.extend(base.iter().map(|b| format!("{b}'")));
        }
        out.push(s);
    }
    out
}

fn build(
    formula: &Formula,
    kind: GadgetKind,
    constants: Option<&GadgetConstants>,
) -> Result<LabeledGame, ReductionError> {
    let (var_actions, clause_actions) = match kind {
        GadgetKind::G => (2, 3),
        GadgetKind::Gprime => (3, 4),
        GadgetKind::Gtilde => (5, 7),
    };
    let n = formula.n_vars();
    let mut actions = vec![var_actions; n];
    actions.extend(std::iter::repeat_n(clause_actions, formula.clauses().len()));
    let mut edges = Vec::new();
    for (j, c) in formula.clauses().iter().enumerate() {
        for (pos, &v) in c.iter().enumerate() {
            let (clause_m, var_m) = edge_matrices(kind, pos, constants);
            edges.push(ExactEdge {
                u: v,
                v: n + j,
                payoffs_u: var_m,
                payoffs_v: clause_m,
            });
        }
    }
    let exact = ExactGame::new(actions, edges)?;
    let game = exact.to_f64()?;
    let mut roles: Vec<Role> = (0..n).map(Role::Variable).collect();
    roles.extend((0..formula.clauses().len()).map(Role::Clause));
    Ok(LabeledGame {
        game,
        exact,
        kind,
        roles,
        strategy_names: names(kind, formula),
        label: label(formula),
        formula: formula.clone(),
        constants: constants.cloned(),
    })
}

/// Game whose exact equilibria with welfare equal to the clause count
/// correspond to 1-in-3 assignments. Not normalized.
pub fn build_g(formula: &Formula) -> Result<LabeledGame, ReductionError> {
    build(formula, GadgetKind::G, None)
}

pub fn build_gprime(formula: &Formula, constants: &GadgetConstants) -> Result<LabeledGame, ReductionError> {
    build(formula, GadgetKind::Gprime, Some(constants))
}

pub fn build_gtilde(formula: &Formula, constants: &GadgetConstants) -> Result<LabeledGame, ReductionError> {
    build(formula, GadgetKind::Gtilde, Some(constants))
}

/// Exact profile induced by a 1-in-3 assignment: variables play their truth
/// value, clauses play their true variable. With `split` (duplicated games
/// only) every player puts one half on the strategy and one half on its copy.
pub fn assignment_profile_exact(
    lg: &LabeledGame,
    assignment: &[bool],
    split: bool,
) -> Result<ExactProfile, ReductionError> {
    if !lg.formula.is_one_in_three(assignment) {
        return Err(ReductionError::NotOneInThree);
    }
    if split && lg.kind != GadgetKind::Gtilde {
        return Err(ReductionError::SplitNeedsDuplicates);
    }
    let actions = lg.exact.actions();
    let point = |player: Player, a: usize| -> Vec<Rational> {
        let mut v = vec![Rational::zero(); actions[player]];
        if split {
            let copy = match lg.roles[player] {
                Role::Variable(_) => a + 3,
                Role::Clause(_) => a + 4,
            };
            v[a] = rat(1, 2);
            v[copy] = rat(1, 2);
        } else {
            v[a] = Rational::one();
        }
        v
    };
    let mut out = Vec::with_capacity(actions.len());
    for (v, &truth) in assignment.iter().enumerate() {
        out.push(point(v, if truth { 0 } else { 1 }));
    }
    for (j, c) in lg.formula.clauses().iter().enumerate() {
        let pos = c.iter().position(|&v| assignment[v]).expect("one true variable");
        out.push(point(lg.clause_player(j), pos));
    }
    Ok(out)
}

pub fn assignment_profile(
    lg: &LabeledGame,
    assignment: &[bool],
    split: bool,
) -> Result<StrategyProfile, ReductionError> {
    Ok(exact_to_profile(&assignment_profile_exact(lg, assignment, split)?))
}

/// Every player plays Out.
pub fn all_out_profile_exact(lg: &LabeledGame) -> Result<ExactProfile, ReductionError> {
    (0..lg.roles.len())
        .map(|p| {
            let out = lg.out_action(p).ok_or(ReductionError::NoOutStrategy)?;
            Ok(crate::exact::pure(lg.exact.actions()[p], out))
        })
        .collect()
}

pub fn all_out_profile(lg: &LabeledGame) -> Result<StrategyProfile, ReductionError> {
    Ok(exact_to_profile(&all_out_profile_exact(lg)?))
}

fn exact_to_profile(p: &ExactProfile) -> StrategyProfile {
    StrategyProfile::new(
        p.iter()
            .map(|s| {
                MixedStrategy::new(s.iter().map(crate::exact::to_f64).collect())
                    .expect("exact distribution")
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reductions::formula::check_1in3;

    #[test]
    fn constants_from_midpoint() {
        let k = pick_constants(&rat(1, 2)).unwrap();
        assert_eq!(k.c, rat(5, 8));
        assert_eq!(k.kappa, rat(2, 9));
        let k = pick_constants(&rat(9, 10)).unwrap();
        assert_eq!(k.c, rat(1, 2));
        assert_eq!(k.kappa, rat(1, 20));
        assert!(pick_constants(&rat_int(1)).is_err());
        assert!(GadgetConstants::new(rat(1, 2), rat(1, 8)).is_err());
    }

    #[test]
    fn kappa_identity_and_range() {
        for i in 1..20 {
            let eps = rat(i, 20);
            let k = pick_constants(&eps).unwrap();
            assert_eq!(&k.kappa + rat_int(2) * &k.c * &k.kappa, Rational::one() - &eps);
            assert!(k.kappa > Rational::zero() && k.kappa < rat(1, 3));
        }
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_rational("0.5"), Some(rat(1, 2)));
        assert_eq!(parse_rational("1e-1"), Some(rat(1, 10)));
        assert_eq!(parse_rational(".25"), Some(rat(1, 4)));
        assert_eq!(parse_rational("3/8"), Some(rat(3, 8)));
        assert_eq!(parse_rational("-2"), Some(rat_int(-2)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn single_clause_g_payoffs() {
        let f = Formula::from_one_based(3, &[[1, 2, 3]]).unwrap();
        let lg = build_g(&f).unwrap();
        assert_eq!(lg.game.num_players(), 4);
        assert_eq!(lg.label, Label::Yes);
        let a = check_1in3(&f).unwrap().unwrap();
        let s = assignment_profile(&lg, &a, false).unwrap();
        let p = crate::payoff_vector(&lg.game, &s, 3).unwrap();
        assert_eq!(p, vec![1.0, -1.0, -1.0]);
        assert_eq!(s.get(3).probs(), &[1.0, 0.0, 0.0]);
        // clause 0 against variable x1: strategy "1" earns 1 when x1 is true
        let m = lg.game.matrix(3, 0).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![-1.0, 0.0]]);
        let m = lg.game.matrix(0, 3).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]]);
    }

    #[test]
    fn names_and_shapes() {
        let f = Formula::from_one_based(3, &[[1, 2, 3]]).unwrap();
        let k = pick_constants(&rat(1, 2)).unwrap();
        let lg = build_gtilde(&f, &k).unwrap();
        assert_eq!(lg.strategy_names[3], vec!["1", "2", "3", "Out", "1'", "2'", "3'"]);
        assert_eq!(lg.game.actions(), &[5, 5, 5, 7]);
        let lp = build_gprime(&f, &k).unwrap();
        assert_eq!(lp.game.actions(), &[3, 3, 3, 4]);
    }

    #[test]
    fn rejects_non_solutions() {
        let f = Formula::from_one_based(3, &[[1, 2, 3]]).unwrap();
        let lg = build_g(&f).unwrap();
        assert!(assignment_profile(&lg, &[true, true, false], false).is_err());
        assert!(assignment_profile(&lg, &[true, false, false], true).is_err());
        assert!(all_out_profile(&lg).is_err());
    }
}
