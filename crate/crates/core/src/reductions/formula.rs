//! Monotone 3-CNF formulas and exhaustive 1-in-3 satisfiability.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ReductionError;

/// Largest variable count accepted by [`check_1in3`].
pub const EXHAUSTIVE_LIMIT: usize = 26;

/// Monotone formula whose clauses each hold three distinct variables.
/// Variables are 0-based in memory and 1-based in text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formula {
    n_vars: usize,
    clauses: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Yes,
    No,
    Unknown,
}

impl Formula {
    /// Clause variables are stored in ascending order.
    pub fn new(n_vars: usize, clauses: Vec<[usize; 3]>) -> Result<Self, ReductionError> {
        let mut sorted = Vec::with_capacity(clauses.len());
        for (idx, mut c) in clauses.into_iter().enumerate() {
            if let Some(&v) = c.iter().find(|&&v| v >= n_vars) {
                return Err(ReductionError::VariableOutOfRange { clause: idx, var: v + 1, n_vars });
            }
            c.sort_unstable();
            if c[0] == c[1] || c[1] == c[2] {
                return Err(ReductionError::RepeatedVariable { clause: idx });
            }
            sorted.push(c);
        }
        Ok(Self {
            n_vars,
            clauses: sorted,
        })
    }

    /// Builds from 1-based clause triples.
    pub fn from_one_based(n_vars: usize, clauses: &[[usize; 3]]) -> Result<Self, ReductionError> {
        if clauses.iter().flatten().any(|&v| v == 0) {
            return Err(ReductionError::VariableOutOfRange { clause: 0, var: 0, n_vars });
        }
        Self::new(n_vars, clauses.iter().map(|c| c.map(|v| v - 1)).collect())
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[[usize; 3]] {
        &self.clauses
    }

    pub fn occurrences(&self, var: usize) -> usize {
        self.clauses.iter().filter(|c| c.contains(&var)).count()
    }

    /// Every variable occurs in exactly three clauses.
    pub fn is_cubic(&self) -> bool {
        (0..self.n_vars).all(|v| self.occurrences(v) == 3)
    }

    /// Whether the variable-clause incidence graph is connected.
    pub fn is_connected(&self) -> bool {
        let total = self.n_vars + self.clauses.len();
        if total == 0 {
            return true;
        }
        let mut parent: Vec<usize> = (0..total).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (j, c) in self.clauses.iter().enumerate() {
            for &v in c {
                let (a, b) = (find(&mut parent, v), find(&mut parent, self.n_vars + j));
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (0..total).all(|x| find(&mut parent, x) == root)
    }

    /// Exactly one true variable in every clause.
    pub fn is_one_in_three(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.n_vars
            && self
                .clauses
                .iter()
                .all(|c| c.iter().filter(|&&v| assignment[v]).count() == 1)
    }

    /// Parses `p m13sat <n_vars> <n_clauses>` followed by `v1 v2 v3 0` lines.
    /// Lines starting with `c` are comments.
    pub fn parse(text: &str) -> Result<Self, ReductionError> {
        let perr = |line: usize, msg: &str| ReductionError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            if toks.is_empty() || toks[0] == "c" {
                continue;
            }
            if header.is_none() {
                if toks.len() != 4 || toks[0] != "p" || toks[1] != "m13sat" {
                    return Err(perr(line, "expected header `p m13sat <n_vars> <n_clauses>`"));
                }
                let n = toks[2].parse().map_err(|_| perr(line, "bad variable count"))?;
                let m = toks[3].parse().map_err(|_| perr(line, "bad clause count"))?;
                header = Some((n, m));
                continue;
            }
            let (n, _) = header.expect("header parsed");
            let nums: Vec<i64> = toks
                .iter()
                .map(|t| t.parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| perr(line, "clause entries must be integers"))?;
            if nums.len() != 4 || nums[3] != 0 {
                return Err(perr(line, "expected a clause `<v1> <v2> <v3> 0`"));
            }
            let mut c = [0usize; 3];
            for (slot, &v) in c.iter_mut().zip(&nums[..3]) {
                if v < 0 {
                    return Err(perr(line, "negative literal in a monotone formula"));
                }
                if v == 0 || v as usize > n {
                    return Err(perr(line, &format!("variable {v} outside 1..={n}")));
                }
                *slot = v as usize - 1;
            }
            if c[0] == c[1] || c[0] == c[2] || c[1] == c[2] {
                return Err(perr(line, "repeated variable in clause"));
            }
            clauses.push(c);
        }
        let (n, m) = header.ok_or_else(|| perr(0, "missing header"))?;
        if clauses.len() != m {
            return Err(perr(0, &format!("header declares {m} clauses, found {}", clauses.len())));
        }
        Self::new(n, clauses)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("p m13sat {} {}\n", self.n_vars, self.clauses.len());
        for c in &self.clauses {
            let _ = writeln!(out, "{} {} {} 0", c[0] + 1, c[1] + 1, c[2] + 1);
        }
        out
    }
}

/// Exhaustive 1-in-3 search; returns the first satisfying assignment in
/// order of increasing bitmask (variable 0 is the lowest bit).
pub fn check_1in3(formula: &Formula) -> Result<Option<Vec<bool>>, ReductionError> {
    let n = formula.n_vars();
    if n > EXHAUSTIVE_LIMIT {
        return Err(ReductionError::TooLarge { n_vars: n, limit: EXHAUSTIVE_LIMIT });
    }
    let masks: Vec<u32> = formula
        .clauses()
        .iter()
        .map(|c| c.iter().fold(0u32, |acc, &v| acc | (1 << v)))
        .collect();
    (0u32..(1u32 << n))
        .find(|&a| masks.iter().all(|&c| (a & c).count_ones() == 1))
        .map(|a| Ok(Some((0..n).map(|v| a & (1 << v) != 0).collect())))
        .unwrap_or(Ok(None))
}

/// YES/NO when the formula is small enough to decide, else UNKNOWN.
pub fn label(formula: &Formula) -> Label {
    match check_1in3(formula) {
        Ok(Some(_)) => Label::Yes,
        Ok(None) => Label::No,
        Err(_) => Label::Unknown,
    }
}

/// A cubic formula with 6 variables and 6 clauses; `{x1, x2}` true is a
/// 1-in-3 assignment.
pub fn cubic_yes_instance() -> Formula {
    Formula::from_one_based(
        6,
        &[[1, 3, 4], [1, 5, 6], [1, 3, 6], [2, 3, 5], [2, 4, 6], [2, 4, 5]],
    )
    .expect("valid formula")
}

/// All four 3-subsets of 4 variables. Cubic, and not 1-in-3 satisfiable
/// because the clause count (4) is not a multiple of 3.
pub fn cubic_no_instance() -> Formula {
    Formula::from_one_based(4, &[[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]).expect("valid formula")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_clause_is_yes_with_first_variable() {
        let f = Formula::from_one_based(3, &[[1, 2, 3]]).unwrap();
        assert_eq!(check_1in3(&f).unwrap(), Some(vec![true, false, false]));
    }

    #[test]
    fn four_clause_gadget_is_no() {
        let f = cubic_no_instance();
        assert!(f.is_cubic());
        assert_eq!(check_1in3(&f).unwrap(), None);
        assert_eq!(label(&f), Label::No);
    }

    #[test]
    fn empty_formula_is_yes() {
        let f = Formula::new(2, vec![]).unwrap();
        assert_eq!(check_1in3(&f).unwrap(), Some(vec![false, false]));
    }

    #[test]
    fn cubic_yes_instance_is_cubic_and_satisfiable() {
        let f = cubic_yes_instance();
        assert!(f.is_cubic());
        assert!(f.is_connected());
        let a = vec![true, true, false, false, false, false];
        assert!(f.is_one_in_three(&a));
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let f = cubic_no_instance();
        assert_eq!(Formula::parse(&f.to_text()).unwrap(), f);
        let bad = "p m13sat 3 1\n1 -2 3 0\n";
        assert!(matches!(Formula::parse(bad), Err(ReductionError::Parse { line: 2, .. })));
        let rep = "c comment\np m13sat 3 1\n1 1 3 0\n";
        assert!(matches!(Formula::parse(rep), Err(ReductionError::Parse { line: 3, .. })));
        assert!(matches!(Formula::parse("p cnf 3 1\n"), Err(ReductionError::Parse { line: 1, .. })));
        assert!(Formula::parse("p m13sat 3 2\n1 2 3 0\n").is_err());
    }

    #[test]
    fn too_large_is_rejected() {
        let f = Formula::new(30, vec![]).unwrap();
        assert!(matches!(check_1in3(&f), Err(ReductionError::TooLarge { .. })));
        assert_eq!(label(&f), Label::Unknown);
    }
}
