//! The nine constrained-equilibrium predicates.
//!
//! "Payoff" always means a player's expected payoff `s_i . p_i(s)`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::game::{
    is_eps_ne, is_eps_wsne, tv_distance, GameError, Player, PolymatrixGame, RegretReport,
    StrategyProfile,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("problem must be 1..=9, got {0}")]
    UnknownProblem(u64),
    #[error("problem {problem}: {msg}")]
    BadParameter { problem: u8, msg: String },
    #[error("problem {problem} needs {expected} profile(s), got {got}")]
    ProfileCount {
        problem: u8,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Ne,
    Wsne,
}

/// One row of the constraint table together with its parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Problem {
    /// Total expected payoff at least `u`, over an eps-NE.
    WelfareAtLeast(f64),
    /// Total expected payoff at most `u`.
    WelfareAtMost(f64),
    /// Some player's expected payoff at most `u`.
    MinPayoffAtMost(f64),
    /// Support of `player` inside `allowed`.
    SupportWithin { player: Player, allowed: Vec<usize> },
    /// Two equilibria at TV distance at least `d`.
    FarApart(f64),
    /// Largest probability of `player` at most `p`.
    MaxProbAtMost { player: Player, p: f64 },
    /// Sum of support sizes at least `k`.
    TotalSupportAtLeast(usize),
    /// Every support has size at least `k`.
    MinSupportAtLeast(usize),
    /// Support of `player` has size at least `k`.
    PlayerSupportAtLeast { player: Player, k: usize },
}

/// A constraint as read from `{"problem": 1-9, "param": ..., "player": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintCheck {
    pub problem: Problem,
}

#[derive(Deserialize)]
struct RawSpec {
    problem: u64,
    param: Value,
    #[serde(default)]
    player: Option<Player>,
}

impl ConstraintCheck {
    pub fn new(problem: Problem) -> Self {
        Self { problem }
    }

    pub fn id(&self) -> u8 {
        match self.problem {
            Problem::WelfareAtLeast(_) => 1,
            Problem::WelfareAtMost(_) => 2,
            Problem::MinPayoffAtMost(_) => 3,
            Problem::SupportWithin { .. } => 4,
            Problem::FarApart(_) => 5,
            Problem::MaxProbAtMost { .. } => 6,
            Problem::TotalSupportAtLeast(_) => 7,
            Problem::MinSupportAtLeast(_) => 8,
            Problem::PlayerSupportAtLeast { .. } => 9,
        }
    }

    pub fn equilibrium_kind(&self) -> EquilibriumKind {
        if self.id() == 1 {
            EquilibriumKind::Ne
        } else {
            EquilibriumKind::Wsne
        }
    }

    pub fn profiles_needed(&self) -> usize {
        if self.id() == 5 {
            2
        } else {
            1
        }
    }

    /// Parses the JSON constraint format. The target player defaults to 0.
    pub fn from_json(text: &str) -> Result<Self, ConstraintError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| ConstraintError::BadParameter {
            problem: 0,
            msg: e.to_string(),
        })?;
        let id = raw.problem;
        let bad = |msg: &str| ConstraintError::BadParameter {
            problem: id as u8,
            msg: msg.to_string(),
        };
        let num = || raw.param.as_f64().ok_or_else(|| bad("param must be a number"));
        let count = || {
            raw.param
                .as_u64()
                .map(|k| k as usize)
                .ok_or_else(|| bad("param must be a non-negative integer"))
        };
        let player = raw.player.unwrap_or(0);
        let problem = match id {
            1 => Problem::WelfareAtLeast(num()?),
            2 => Problem::WelfareAtMost(num()?),
            3 => Problem::MinPayoffAtMost(num()?),
            4 => {
                let allowed = serde_json::from_value::<Vec<usize>>(raw.param.clone())
                    .map_err(|_| bad("param must be an array of action indices"))?;
                Problem::SupportWithin { player, allowed }
            }
            5 => Problem::FarApart(num()?),
            6 => Problem::MaxProbAtMost { player, p: num()? },
            7 => Problem::TotalSupportAtLeast(count()?),
            8 => Problem::MinSupportAtLeast(count()?),
            9 => Problem::PlayerSupportAtLeast { player, k: count()? },
            other => return Err(ConstraintError::UnknownProblem(other)),
        };
        Ok(Self { problem })
    }

    /// Checks the parameter against its domain for `game`.
    pub fn check_domain(&self, game: &PolymatrixGame) -> Result<(), ConstraintError> {
        let n = game.num_players();
        let id = self.id();
        let fail = |msg: String| Err(ConstraintError::BadParameter { problem: id, msg });
        let target_ok = |p: Player| p < n;
        match &self.problem {
            Problem::WelfareAtLeast(u) if !(*u > 0.0 && *u <= n as f64) => {
                fail(format!("u = {u} outside (0, {n}]"))
            }
            Problem::WelfareAtMost(u) if !(*u >= 0.0 && *u < n as f64) => {
                fail(format!("u = {u} outside [0, {n})"))
            }
            Problem::MinPayoffAtMost(u) if !(*u >= 0.0 && *u < 1.0) => {
                fail(format!("u = {u} outside [0, 1)"))
            }
            Problem::FarApart(d) if !(*d > 0.0 && *d <= 1.0) => {
                fail(format!("d = {d} outside (0, 1]"))
            }
            Problem::MaxProbAtMost { p, .. } if !(*p > 0.0 && *p < 1.0) => {
                fail(format!("p = {p} outside (0, 1)"))
            }
            Problem::TotalSupportAtLeast(k) => {
                let total: usize = game.actions().iter().sum();
                if *k == 0 || *k > total {
                    fail(format!("k = {k} outside 1..={total}"))
                } else {
                    Ok(())
                }
            }
            Problem::MinSupportAtLeast(k) if *k == 0 || *k > n => {
                fail(format!("k = {k} outside 1..={n}"))
            }
            Problem::PlayerSupportAtLeast { player, k } => {
                if !target_ok(*player) {
                    fail(format!("player {player} out of range"))
                } else if *k == 0 || *k > n {
                    fail(format!("k = {k} outside 1..={n}"))
                } else {
                    Ok(())
                }
            }
            Problem::SupportWithin { player, allowed } => {
                if !target_ok(*player) {
                    fail(format!("player {player} out of range"))
                } else if let Some(a) = allowed.iter().find(|&&a| a >= game.num_actions(*player)) {
                    fail(format!("action {a} out of range"))
                } else {
                    Ok(())
                }
            }
            Problem::MaxProbAtMost { player, .. } if !target_ok(*player) => {
                fail(format!("player {player} out of range"))
            }
            _ => Ok(()),
        }
    }
}

/// Result of [`check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub problem: u8,
    pub holds: bool,
    pub equilibrium_holds: bool,
    pub predicate_holds: bool,
    /// The constrained quantity (welfare, distance, support size, ...).
    pub value: f64,
    pub explanation: String,
    pub reports: Vec<RegretReport>,
}

/// Verifies the equilibrium kind and the row predicate.
pub fn check(
    game: &PolymatrixGame,
    profiles: &[StrategyProfile],
    constraint: &ConstraintCheck,
    eps: f64,
) -> Result<CheckOutcome, ConstraintError> {
    let id = constraint.id();
    if profiles.len() != constraint.profiles_needed() {
        return Err(ConstraintError::ProfileCount {
            problem: id,
            expected: constraint.profiles_needed(),
            got: profiles.len(),
        });
    }
    constraint.check_domain(game)?;
    let mut equilibrium_holds = true;
    let mut reports = Vec::new();
    for p in profiles {
        let res = match constraint.equilibrium_kind() {
            EquilibriumKind::Ne => is_eps_ne(game, p, eps)?,
            EquilibriumKind::Wsne => is_eps_wsne(game, p, eps)?,
        };
        equilibrium_holds &= res.holds;
        reports.push(res.report);
    }
    let s = &profiles[0];
    let report = &reports[0];
    let supp = |i: Player| s.get(i).support().len();
    let (predicate_holds, value, what) = match &constraint.problem {
        Problem::WelfareAtLeast(u) => {
            let w = report.welfare();
            (w >= u - crate::TOL, w, format!("welfare {w} >= {u}"))
        }
        Problem::WelfareAtMost(u) => {
            let w = report.welfare();
            (w <= u + crate::TOL, w, format!("welfare {w} <= {u}"))
        }
        Problem::MinPayoffAtMost(u) => {
            let w = report.min_payoff();
            (w <= u + crate::TOL, w, format!("min payoff {w} <= {u}"))
        }
        Problem::SupportWithin { player, allowed } => {
            let sp = s.get(*player).support();
            let ok = sp.iter().all(|a| allowed.contains(a));
            (ok, sp.len() as f64, format!("support {sp:?} of player {player} within {allowed:?}"))
        }
        Problem::FarApart(d) => {
            let dist = tv_distance(&profiles[0], &profiles[1])?;
            (dist >= d - crate::TOL, dist, format!("distance {dist} >= {d}"))
        }
        Problem::MaxProbAtMost { player, p } => {
            let mp = s.get(*player).max_prob();
            (mp <= p + crate::TOL, mp, format!("max probability {mp} of player {player} <= {p}"))
        }
        Problem::TotalSupportAtLeast(k) => {
            let total: usize = (0..game.num_players()).map(supp).sum();
            (total >= *k, total as f64, format!("total support {total} >= {k}"))
        }
        Problem::MinSupportAtLeast(k) => {
            let least = (0..game.num_players()).map(supp).min().unwrap_or(0);
            (least >= *k, least as f64, format!("min support {least} >= {k}"))
        }
        Problem::PlayerSupportAtLeast { player, k } => {
            let size = supp(*player);
            (size >= *k, size as f64, format!("support size {size} of player {player} >= {k}"))
        }
    };
    let kind = match constraint.equilibrium_kind() {
        EquilibriumKind::Ne => "NE",
        EquilibriumKind::Wsne => "WSNE",
    };
    let explanation = format!(
        "{eps}-{kind}: {}; predicate {what}: {}",
        if equilibrium_holds { "yes" } else { "no" },
        if predicate_holds { "yes" } else { "no" }
    );
    Ok(CheckOutcome {
        problem: id,
        holds: equilibrium_holds && predicate_holds,
        equilibrium_holds,
        predicate_holds,
        value,
        explanation,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::MixedStrategy;

    fn edgeless() -> PolymatrixGame {
        PolymatrixGame::edgeless(vec![2, 3]).unwrap()
    }

    #[test]
    fn parses_all_rows() {
        for (text, id) in [
            (r#"{"problem":1,"param":1.5}"#, 1),
            (r#"{"problem":4,"param":[0,2],"player":1}"#, 4),
            (r#"{"problem":9,"param":2}"#, 9),
        ] {
            assert_eq!(ConstraintCheck::from_json(text).unwrap().id(), id);
        }
        assert!(matches!(
            ConstraintCheck::from_json(r#"{"problem":10,"param":1}"#),
            Err(ConstraintError::UnknownProblem(10))
        ));
        assert!(ConstraintCheck::from_json(r#"{"problem":7,"param":-1}"#).is_err());
    }

    #[test]
    fn identical_profiles_are_not_far_apart() {
        let g = edgeless();
        let p = StrategyProfile::uniform(&g);
        let c = ConstraintCheck::new(Problem::FarApart(0.1));
        let out = check(&g, &[p.clone(), p], &c, 0.0).unwrap();
        assert!(out.equilibrium_holds);
        assert!(!out.holds);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn profile_count_and_domain_errors() {
        let g = edgeless();
        let p = StrategyProfile::uniform(&g);
        let c = ConstraintCheck::new(Problem::FarApart(0.1));
        assert!(matches!(
            check(&g, &[p.clone()], &c, 0.0),
            Err(ConstraintError::ProfileCount { .. })
        ));
        let c = ConstraintCheck::new(Problem::MaxProbAtMost { player: 0, p: 1.0 });
        assert!(matches!(check(&g, &[p], &c, 0.0), Err(ConstraintError::BadParameter { .. })));
    }

    #[test]
    fn support_rows() {
        let g = edgeless();
        let p = StrategyProfile::new(vec![
            MixedStrategy::new(vec![0.5, 0.5]).unwrap(),
            MixedStrategy::new(vec![0.0, 0.5, 0.5]).unwrap(),
        ]);
        let run = |prob| check(&g, &[p.clone()], &ConstraintCheck::new(prob), 0.0).unwrap().holds;
        assert!(run(Problem::TotalSupportAtLeast(4)));
        assert!(!run(Problem::TotalSupportAtLeast(5)));
        assert!(run(Problem::MinSupportAtLeast(2)));
        assert!(run(Problem::PlayerSupportAtLeast { player: 1, k: 2 }));
        assert!(run(Problem::SupportWithin { player: 1, allowed: vec![1, 2] }));
        assert!(!run(Problem::SupportWithin { player: 1, allowed: vec![0, 1] }));
        assert!(run(Problem::MaxProbAtMost { player: 0, p: 0.5 }));
    }
}
