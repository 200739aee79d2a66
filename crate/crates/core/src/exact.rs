//! Exact rational evaluation of polymatrix games.
//!
//! Every finite `f64` is a dyadic rational, so a float game converts to an
//! exact one without loss. Gadget games are built here first and converted to
//! floats at the end.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::game::{EdgeGame, GameError, Matrix, Player, PolymatrixGame, StrategyProfile};
use crate::kuniform::KUniformStrategy;

pub type Rational = BigRational;
/// One exact probability vector per player.
pub type ExactProfile = Vec<Vec<Rational>>;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Exact value of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite payoff")
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Exact probability vector of a k-uniform strategy.
pub fn kuniform_probs(s: &KUniformStrategy) -> Vec<Rational> {
    let k = s.k() as i64;
    s.counts().into_iter().map(|c| rat(c as i64, k)).collect()
}

/// Exact value of a float profile.
pub fn profile_from_f64(profile: &StrategyProfile) -> ExactProfile {
    profile
        .strategies()
        .iter()
        .map(|s| s.probs().iter().map(|&p| from_f64(p)).collect())
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn max_of(v: &[Rational]) -> Rational {
    v.iter().max().cloned().unwrap_or_else(Rational::zero)
}

/// Dense exact matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Rational>,
}

impl ExactMatrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_f64(m: &Matrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .flat_map(|r| m.row(r).iter().map(|&x| from_f64(x)).collect::<Vec<_>>())
                .collect(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    pub fn to_f64(&self) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(to_f64).collect())
            .collect();
        Matrix::from_rows(&rows).unwrap_or_else(|| Matrix::zeros(self.rows, self.cols))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactEdge {
    pub u: Player,
    pub v: Player,
    pub payoffs_u: ExactMatrix,
    pub payoffs_v: ExactMatrix,
}

/// A polymatrix game with exact rational payoffs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactGame {
    actions: Vec<usize>,
    edges: Vec<ExactEdge>,
    /// `(neighbor, edge index, is_u)` sorted by neighbor.
    adjacency: Vec<Vec<(Player, usize, bool)>>,
}

impl ExactGame {
    /// Builds an exact game; shapes are validated through the float conversion.
    pub fn new(actions: Vec<usize>, edges: Vec<ExactEdge>) -> Result<Self, GameError> {
        let g = Self::assemble(actions, edges);
        g.to_f64()?;
        Ok(g)
    }

    fn assemble(actions: Vec<usize>, mut edges: Vec<ExactEdge>) -> Self {
        for e in &mut edges {
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
                std::mem::swap(&mut e.payoffs_u, &mut e.payoffs_v);
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        let mut adjacency = vec![Vec::new(); actions.len()];
        for (idx, e) in edges.iter().enumerate() {
            if e.u < actions.len() && e.v < actions.len() {
                adjacency[e.u].push((e.v, idx, true));
                adjacency[e.v].push((e.u, idx, false));
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self {
            actions,
            edges,
            adjacency,
        }
    }

    pub fn from_f64(game: &PolymatrixGame) -> Self {
        let edges = game
            .edges()
            .iter()
            .map(|e| ExactEdge {
                u: e.u,
                v: e.v,
                payoffs_u: ExactMatrix::from_f64(&e.payoffs_u),
                payoffs_v: ExactMatrix::from_f64(&e.payoffs_v),
            })
            .collect();
        Self::assemble(game.actions().to_vec(), edges)
    }

    /// Converts to a float game (nearest double for every entry).
    pub fn to_f64(&self) -> Result<PolymatrixGame, GameError> {
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeGame::new(e.u, e.v, e.payoffs_u.to_f64(), e.payoffs_v.to_f64()))
            .collect();
        PolymatrixGame::new(self.actions.clone(), edges)
    }

    pub fn num_players(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    pub fn edges(&self) -> &[ExactEdge] {
        &self.edges
    }

    pub fn neighbors(&self, i: Player) -> impl Iterator<Item = Player> + '_ {
        self.adjacency[i].iter().map(|&(j, _, _)| j)
    }

    /// `A_ij` exactly, if `i` and `j` are adjacent.
    pub fn matrix(&self, i: Player, j: Player) -> Option<&ExactMatrix> {
        let adj = &self.adjacency[i];
        let pos = adj.binary_search_by_key(&j, |&(n, _, _)| n).ok()?;
        let (_, idx, is_u) = adj[pos];
        let e = &self.edges[idx];
        Some(if is_u { &e.payoffs_u } else { &e.payoffs_v })
    }

    /// Exact payoff vector of `i`, summing only over neighbors accepted by `filter`.
    pub fn payoff_vector_where(
        &self,
        profile: &[Vec<Rational>],
        i: Player,
        filter: impl Fn(Player) -> bool,
    ) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.actions[i]];
        for j in self.neighbors(i).filter(|&j| filter(j)) {
            let a = self.matrix(i, j).expect("neighbor has a matrix");
            for (o, v) in out.iter_mut().zip(a.mul_vec(&profile[j])) {
                *o += v;
            }
        }
        out
    }

    pub fn payoff_vector(&self, profile: &[Vec<Rational>], i: Player) -> Vec<Rational> {
        self.payoff_vector_where(profile, i, |_| true)
    }

    pub fn expected_payoff(&self, profile: &[Vec<Rational>], i: Player) -> Rational {
        dot(&profile[i], &self.payoff_vector(profile, i))
    }

    /// `s_i . A_ij s_j`, zero when `i` and `j` are not adjacent.
    pub fn pair_payoff(&self, i: Player, si: &[Rational], j: Player, sj: &[Rational]) -> Rational {
        match self.matrix(i, j) {
            Some(a) => dot(si, &a.mul_vec(sj)),
            None => Rational::zero(),
        }
    }

    pub fn regret(&self, profile: &[Vec<Rational>], i: Player) -> Rational {
        let p = self.payoff_vector(profile, i);
        max_of(&p) - dot(&profile[i], &p)
    }

    /// Largest regret of a pure strategy with positive probability.
    pub fn support_regret(&self, profile: &[Vec<Rational>], i: Player) -> Rational {
        let p = self.payoff_vector(profile, i);
        let best = max_of(&p);
        p.iter()
            .zip(&profile[i])
            .filter(|(_, prob)| !prob.is_zero())
            .map(|(x, _)| &best - x)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn max_regret(&self, profile: &[Vec<Rational>]) -> Rational {
        (0..self.num_players())
            .map(|i| self.regret(profile, i))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn max_support_regret(&self, profile: &[Vec<Rational>]) -> Rational {
        (0..self.num_players())
            .map(|i| self.support_regret(profile, i))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn welfare(&self, profile: &[Vec<Rational>]) -> Rational {
        (0..self.num_players()).fold(Rational::zero(), |acc, i| {
            acc + self.expected_payoff(profile, i)
        })
    }
}

/// Exact point mass on `action` out of `m`.
pub fn pure(m: usize, action: usize) -> Vec<Rational> {
    (0..m)
        .map(|a| if a == action { Rational::one() } else { Rational::zero() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_conversion_is_exact() {
        let x = 0.1f64;
        let r = from_f64(x);
        assert_eq!(to_f64(&r), x);
        assert_ne!(r, rat(1, 10));
    }

    #[test]
    fn exact_matching_pennies() {
        let g = ExactGame::new(
            vec![2, 2],
            vec![ExactEdge {
                u: 0,
                v: 1,
                payoffs_u: ExactMatrix::from_rows(vec![
                    vec![rat_int(1), rat_int(0)],
                    vec![rat_int(0), rat_int(1)],
                ]),
                payoffs_v: ExactMatrix::from_rows(vec![
                    vec![rat_int(0), rat_int(1)],
                    vec![rat_int(1), rat_int(0)],
                ]),
            }],
        )
        .unwrap();
        let half = vec![rat(1, 2), rat(1, 2)];
        let prof = vec![half.clone(), half];
        assert_eq!(g.max_regret(&prof), Rational::zero());
        assert_eq!(g.welfare(&prof), rat_int(1));
        let prof = vec![pure(2, 0), pure(2, 0)];
        assert_eq!(g.regret(&prof, 1), rat_int(1));
        assert_eq!(g.support_regret(&prof, 1), rat_int(1));
    }
}
