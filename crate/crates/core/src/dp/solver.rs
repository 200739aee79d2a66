use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{ensure_normalized, Diagnostics, DpError, NodeStats, RoundedPayoffGrid, Solution, SolverConfig};
use crate::constraints::{better, AddContext, FrontierTerm, Ovd, OvdValue};
use crate::exact::{dot, kuniform_probs, to_f64, ExactGame, Rational};
use crate::game::{Player, PolymatrixGame, StrategyProfile};
use crate::kuniform::{count_k_uniform, enumerate_k_uniform, KUniformStrategy};
use crate::treedec::{forget_counts, NiceKind, NiceTreeDecomposition};

/// Where a witness came from, as indices into the child tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    Start,
    Child(u32),
    Join(u32, u32),
}

/// One table entry. Vectors are laid out along the node's sorted bag.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    /// Index into each bag player's k-uniform strategy list.
    pub strategies: Vec<u32>,
    /// Grid indices of the rounded payoff vectors, concatenated per bag player.
    pub payoffs: Vec<i64>,
    /// Exact payoff vectors from forgotten neighbors, when the objective needs them.
    pub incoming: Vec<Rational>,
    /// Unrounded payoff vectors, when the rounding ledger is on.
    pub shadow: Vec<f64>,
    /// Objective value in constrained mode.
    pub value: Option<OvdValue>,
    pub provenance: Provenance,
}

impl Witness {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.strategies
            .cmp(&other.strategies)
            .then_with(|| self.payoffs.cmp(&other.payoffs))
            .then_with(|| self.incoming.cmp(&other.incoming))
    }
}

/// Whether a player playing `strategy` is eps-happy against the payoff
/// vector `rounded + sum of A_ij s_j` over the given bag neighbors.
pub fn happiness_test(
    game: &PolymatrixGame,
    player: Player,
    strategy: &[f64],
    rounded: &[f64],
    bag_neighbors: &[(Player, &[f64])],
    eps: f64,
    tol: f64,
) -> bool {
    let mut u = rounded.to_vec();
    for &(j, sj) in bag_neighbors {
        if let Some(a) = game.matrix(player, j) {
            a.mul_vec_add(sj, &mut u);
        }
    }
    is_happy(strategy, &u, eps, tol)
}

fn is_happy(strategy: &[f64], u: &[f64], eps: f64, tol: f64) -> bool {
    let best = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let got: f64 = strategy.iter().zip(u).map(|(p, x)| p * x).sum();
    got >= best - eps - tol
}

struct Candidate {
    strategy: KUniformStrategy,
    probs: Vec<f64>,
    exact: Vec<Rational>,
}

struct ExactTerms {
    /// `(i, j)` -> `ci . A_ij cj` at `ci * C_j + cj`.
    pair: HashMap<(Player, Player), Vec<Rational>>,
    /// `(i, j)` -> `A_ij cj` per candidate `cj` (only when incoming is tracked).
    vecs: HashMap<(Player, Player), Vec<Vec<Rational>>>,
}

struct Context<'a> {
    game: &'a PolymatrixGame,
    grid: RoundedPayoffGrid,
    eps: f64,
    tol: f64,
    cands: Vec<Vec<Candidate>>,
    /// `(i, j)` -> `A_ij cj` per candidate `cj` of `j`.
    terms: HashMap<(Player, Player), Vec<Vec<f64>>>,
    exact: Option<ExactTerms>,
    ovd: Option<Arc<dyn Ovd>>,
    incoming: bool,
    shadow: bool,
    max_witnesses: usize,
}

fn offsets(game: &PolymatrixGame, bag: &[Player]) -> Vec<usize> {
    let mut off = Vec::with_capacity(bag.len() + 1);
    let mut acc = 0;
    off.push(0);
    for &p in bag {
        acc += game.num_actions(p);
        off.push(acc);
    }
    off
}

impl<'a> Context<'a> {
    fn build(game: &'a PolymatrixGame, cfg: &SolverConfig) -> Result<Self, DpError> {
        let grid = RoundedPayoffGrid::new(cfg.eps, game.num_players())?;
        let k = cfg.resolve_k(game)?;
        if let Some(f) = &cfg.support_filter {
            if f.player >= game.num_players() {
                return Err(DpError::BadFilter(format!("player {} out of range", f.player)));
            }
            if let Some(a) = f.allowed.iter().find(|&&a| a >= game.num_actions(f.player)) {
                return Err(DpError::BadFilter(format!("action {a} out of range")));
            }
        }
        let ovd = cfg.constraint.clone();
        let incoming = ovd.as_ref().is_some_and(|o| o.needs_incoming());
        let mut cands = Vec::with_capacity(game.num_players());
        for (i, &m) in game.actions().iter().enumerate() {
            let count = count_k_uniform(m, k);
            if count > cfg.max_candidates as u128 {
                return Err(DpError::TooManyCandidates {
                    player: i,
                    count,
                    limit: cfg.max_candidates,
                });
            }
            let list: Vec<Candidate> = enumerate_k_uniform(m, k)?
                .into_iter()
                .filter(|s| match &cfg.support_filter {
                    Some(f) if f.player == i => s.multiset().iter().all(|a| f.allowed.contains(a)),
                    _ => true,
                })
                .map(|s| Candidate {
                    probs: s.probs(),
                    exact: if ovd.is_some() { kuniform_probs(&s) } else { Vec::new() },
                    strategy: s,
                })
                .collect();
            cands.push(list);
        }
        let mut terms = HashMap::new();
        for i in 0..game.num_players() {
            for (j, a) in game.incident(i) {
                let v: Vec<Vec<f64>> = cands[j].iter().map(|c| a.mul_vec(&c.probs)).collect();
                terms.insert((i, j), v);
            }
        }
        let exact = ovd.as_ref().map(|_| {
            let eg = ExactGame::from_f64(game);
            let mut pair = HashMap::new();
            let mut vecs = HashMap::new();
            for i in 0..game.num_players() {
                for j in game.neighbors(i) {
                    let a = eg.matrix(i, j).expect("adjacent");
                    let cols: Vec<Vec<Rational>> =
                        cands[j].iter().map(|c| a.mul_vec(&c.exact)).collect();
                    let mut table = Vec::with_capacity(cands[i].len() * cands[j].len());
                    for ci in &cands[i] {
                        for col in &cols {
                            table.push(dot(&ci.exact, col));
                        }
                    }
                    pair.insert((i, j), table);
                    if incoming {
                        vecs.insert((i, j), cols);
                    }
                }
            }
            ExactTerms { pair, vecs }
        });
        Ok(Self {
            game,
            grid,
            eps: cfg.eps,
            tol: cfg.tol,
            cands,
            terms,
            exact,
            ovd,
            incoming,
            shadow: cfg.track_rounding,
            max_witnesses: cfg.max_witnesses,
        })
    }

    fn limit(&self, node: usize, count: usize) -> Result<(), DpError> {
        if count > self.max_witnesses {
            return Err(DpError::WitnessLimit {
                node,
                count,
                limit: self.max_witnesses,
            });
        }
        Ok(())
    }

    fn zero_witness(&self, len: usize, strategies: Vec<u32>) -> Witness {
        Witness {
            strategies,
            payoffs: vec![0; len],
            incoming: if self.incoming { vec![Rational::zero(); len] } else { Vec::new() },
            shadow: if self.shadow { vec![0.0; len] } else { Vec::new() },
            value: self.ovd.as_ref().map(|o| o.empty()),
            provenance: Provenance::Start,
        }
    }

    fn start(&self, node: usize, bag: &[Player]) -> Result<Vec<Witness>, DpError> {
        let sizes: Vec<usize> = bag.iter().map(|&p| self.cands[p].len()).collect();
        let total = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).unwrap_or(usize::MAX);
        self.limit(node, total)?;
        let len = offsets(self.game, bag)[bag.len()];
        let mut out = Vec::with_capacity(total);
        if sizes.contains(&0) {
            return Ok(out);
        }
        let mut cur = vec![0u32; bag.len()];
        loop {
            out.push(self.zero_witness(len, cur.clone()));
            let Some(pos) = (0..bag.len()).rev().find(|&q| (cur[q] as usize) + 1 < sizes[q]) else {
                break;
            };
            cur[pos] += 1;
            for c in &mut cur[pos + 1..] {
                *c = 0;
            }
        }
        Ok(out)
    }

    fn introduce(
        &self,
        node: usize,
        p: Player,
        bag: &[Player],
        child: &[Witness],
    ) -> Result<Vec<Witness>, DpError> {
        self.limit(node, child.len().saturating_mul(self.cands[p].len()))?;
        let pos = bag.binary_search(&p).expect("introduced player in bag");
        let off = offsets(self.game, bag)[pos];
        let m = self.game.num_actions(p);
        let chunks: Vec<Vec<Witness>> = child
            .par_iter()
            .enumerate()
            .map(|(ci, w)| {
                (0..self.cands[p].len())
                    .map(|c| {
                        let mut strategies = w.strategies.clone();
                        strategies.insert(pos, c as u32);
                        let mut payoffs = w.payoffs.clone();
                        payoffs.splice(off..off, std::iter::repeat_n(0, m));
                        let mut incoming = w.incoming.clone();
                        if self.incoming {
                            incoming.splice(off..off, std::iter::repeat_n(Rational::zero(), m));
                        }
                        let mut shadow = w.shadow.clone();
                        if self.shadow {
                            shadow.splice(off..off, std::iter::repeat_n(0.0, m));
                        }
                        Witness {
                            strategies,
                            payoffs,
                            incoming,
                            shadow,
                            value: w.value.clone(),
                            provenance: Provenance::Child(ci as u32),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }

    fn forget(&self, p: Player, child_bag: &[Player], child: &[Witness]) -> Vec<Witness> {
        let pos = child_bag.binary_search(&p).expect("forgotten player in child bag");
        let off = offsets(self.game, child_bag);
        let m = self.game.num_actions(p);
        let spacing = self.grid.spacing();
        // bag neighbors of p: (position, player)
        let nbrs: Vec<(usize, Player)> = child_bag
            .iter()
            .enumerate()
            .filter(|&(_, &q)| q != p && self.game.are_adjacent(p, q))
            .map(|(qpos, &q)| (qpos, q))
            .collect();
        let chunks: Vec<Option<Witness>> = child
            .par_iter()
            .enumerate()
            .map(|(ci, w)| {
                let sp = w.strategies[pos] as usize;
                let cand = &self.cands[p][sp];
                let mut u: Vec<f64> = w.payoffs[off[pos]..off[pos] + m]
                    .iter()
                    .map(|&x| x as f64 * spacing)
                    .collect();
                for &(qpos, q) in &nbrs {
                    let t = &self.terms[&(p, q)][w.strategies[qpos] as usize];
                    for (ua, ta) in u.iter_mut().zip(t) {
                        *ua += ta;
                    }
                }
                if !is_happy(&cand.probs, &u, self.eps, self.tol) {
                    return None;
                }
                let mut payoffs = w.payoffs.clone();
                let mut incoming = w.incoming.clone();
                let mut shadow = w.shadow.clone();
                for &(qpos, q) in &nbrs {
                    let delta = &self.terms[&(q, p)][sp];
                    let range = off[qpos]..off[qpos + 1];
                    for (x, d) in payoffs[range.clone()].iter_mut().zip(delta) {
                        *x = self.grid.shift_index(*x, *d);
                    }
                    if self.shadow {
                        for (x, d) in shadow[range.clone()].iter_mut().zip(delta) {
                            *x += d;
                        }
                    }
                    if self.incoming {
                        let ex = &self.exact.as_ref().expect("exact terms").vecs[&(q, p)][sp];
                        for (x, d) in incoming[range].iter_mut().zip(ex) {
                            *x += d;
                        }
                    }
                }
                let value = match (&self.ovd, &w.value) {
                    (Some(ovd), Some(x)) => {
                        let ex = self.exact.as_ref().expect("exact terms");
                        let frontier: Vec<FrontierTerm> = nbrs
                            .iter()
                            .map(|&(qpos, q)| {
                                let sq = w.strategies[qpos] as usize;
                                let cq = self.cands[q].len();
                                let cp = self.cands[p].len();
                                FrontierTerm {
                                    neighbor: q,
                                    to_player: ex.pair[&(p, q)][sp * cq + sq].clone(),
                                    to_neighbor: ex.pair[&(q, p)][sq * cp + sp].clone(),
                                }
                            })
                            .collect();
                        let incoming_payoff = self
                            .incoming
                            .then(|| dot(&cand.exact, &w.incoming[off[pos]..off[pos] + m]));
                        let ctx = AddContext {
                            player: p,
                            strategy: &cand.exact,
                            incoming_payoff,
                            frontier: &frontier,
                        };
                        Some(ovd.add(&ctx, x))
                    }
                    _ => None,
                };
                let mut strategies = w.strategies.clone();
                strategies.remove(pos);
                payoffs.drain(off[pos]..off[pos] + m);
                if self.incoming {
                    incoming.drain(off[pos]..off[pos] + m);
                }
                if self.shadow {
                    shadow.drain(off[pos]..off[pos] + m);
                }
                Some(Witness {
                    strategies,
                    payoffs,
                    incoming,
                    shadow,
                    value,
                    provenance: Provenance::Child(ci as u32),
                })
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }

    fn join(&self, node: usize, left: &[Witness], right: &[Witness]) -> Result<Vec<Witness>, DpError> {
        let mut buckets: HashMap<&[u32], Vec<usize>> = HashMap::new();
        for (ri, w) in right.iter().enumerate() {
            buckets.entry(&w.strategies).or_default().push(ri);
        }
        let total: usize = left
            .iter()
            .map(|w| buckets.get(w.strategies.as_slice()).map_or(0, Vec::len))
            .sum();
        self.limit(node, total)?;
        let chunks: Vec<Vec<Witness>> = left
            .par_iter()
            .enumerate()
            .map(|(li, a)| {
                let Some(bucket) = buckets.get(a.strategies.as_slice()) else {
                    return Vec::new();
                };
                bucket
                    .iter()
                    .map(|&ri| {
                        let b = &right[ri];
                        Witness {
                            strategies: a.strategies.clone(),
                            payoffs: a.payoffs.iter().zip(&b.payoffs).map(|(x, y)| x + y).collect(),
                            incoming: a.incoming.iter().zip(&b.incoming).map(|(x, y)| x + y).collect(),
                            shadow: a.shadow.iter().zip(&b.shadow).map(|(x, y)| x + y).collect(),
                            value: match (&self.ovd, &a.value, &b.value) {
                                (Some(ovd), Some(x), Some(y)) => Some(ovd.merge(x, y)),
                                _ => None,
                            },
                            provenance: Provenance::Join(li as u32, ri as u32),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }

    /// Keeps one witness per key: the best objective value, then the
    /// smallest provenance.
    fn dedupe(&self, mut ws: Vec<Witness>) -> Vec<Witness> {
        let sense = self.ovd.as_ref().map(|o| o.sense());
        ws.par_sort_by(|a, b| {
            a.key_cmp(b)
                .then_with(|| match (sense, &a.value, &b.value) {
                    (Some(s), Some(x), Some(y)) => better(s, y, x),
                    _ => Ordering::Equal,
                })
                .then_with(|| a.provenance.cmp(&b.provenance))
        });
        ws.dedup_by(|later, kept| later.key_cmp(kept) == Ordering::Equal);
        ws
    }
}

/// Witness tables for every node of a nice decomposition.
pub struct Phase1 {
    pub tables: Vec<Vec<Witness>>,
    /// k-uniform strategies per player; witnesses index into these lists.
    pub candidates: Vec<Vec<KUniformStrategy>>,
    pub stats: Vec<NodeStats>,
    pub grid: RoundedPayoffGrid,
    pub k: usize,
}

/// Computes the witness table of every node bottom-up.
pub fn phase1(
    game: &PolymatrixGame,
    nice: &NiceTreeDecomposition,
    cfg: &SolverConfig,
) -> Result<Phase1, DpError> {
    ensure_normalized(game, cfg.tol)?;
    if let Err(v) = nice.validate(&game.interaction_graph()) {
        return Err(DpError::Decomposition(v));
    }
    let k = cfg.resolve_k(game)?;
    let ctx = Context::build(game, cfg)?;
    let f = forget_counts(nice);
    let n = game.num_players().max(1) as f64;
    let mut tables: Vec<Vec<Witness>> = Vec::with_capacity(nice.num_nodes());
    let mut stats = Vec::with_capacity(nice.num_nodes());
    for (idx, node) in nice.nodes().iter().enumerate() {
        let raw = match node.kind {
            NiceKind::Start => ctx.start(idx, &node.bag)?,
            NiceKind::Introduce(p) => ctx.introduce(idx, p, &node.bag, &tables[node.children[0]])?,
            NiceKind::Forget(p) => {
                let c = node.children[0];
                ctx.forget(p, &nice.nodes()[c].bag, &tables[c])
            }
            NiceKind::Join => {
                ctx.join(idx, &tables[node.children[0]], &tables[node.children[1]])?
            }
        };
        let table = ctx.dedupe(raw);
        let max_rounding_error = cfg.track_rounding.then(|| {
            table
                .iter()
                .flat_map(|w| {
                    w.payoffs
                        .iter()
                        .zip(&w.shadow)
                        .map(|(&x, s)| (ctx.grid.value(x) - s).abs())
                })
                .fold(0.0, f64::max)
        });
        stats.push(NodeStats {
            node: idx,
            kind: node.kind.name(),
            bag_size: node.bag.len(),
            witnesses: table.len(),
            forgets_below: f[idx],
            max_rounding_error,
            rounding_bound: f[idx] as f64 * cfg.eps / (4.0 * n),
        });
        tables.push(table);
    }
    Ok(Phase1 {
        tables,
        candidates: ctx
            .cands
            .into_iter()
            .map(|l| l.into_iter().map(|c| c.strategy).collect())
            .collect(),
        stats,
        grid: ctx.grid,
        k,
    })
}

/// Reads a profile off the root table by following provenance pointers;
/// `None` if the root table is empty.
pub fn phase2(p1: &Phase1, nice: &NiceTreeDecomposition) -> Option<Solution> {
    let root = nice.root();
    let top = p1.tables[root].first()?;
    let n = p1.candidates.len();
    let mut chosen: Vec<Option<KUniformStrategy>> = vec![None; n];
    let mut stack = vec![(root, 0usize)];
    while let Some((node, wi)) = stack.pop() {
        let nn = &nice.nodes()[node];
        let w = &p1.tables[node][wi];
        match (nn.kind, w.provenance) {
            (NiceKind::Start, _) => {}
            (NiceKind::Forget(p), Provenance::Child(ci)) => {
                let c = nn.children[0];
                let cw = &p1.tables[c][ci as usize];
                let pos = nice.nodes()[c].bag.binary_search(&p).expect("forgotten player in child");
                chosen[p] = Some(p1.candidates[p][cw.strategies[pos] as usize].clone());
                stack.push((c, ci as usize));
            }
            (_, Provenance::Child(ci)) => stack.push((nn.children[0], ci as usize)),
            (_, Provenance::Join(a, b)) => {
                stack.push((nn.children[0], a as usize));
                stack.push((nn.children[1], b as usize));
            }
            (_, Provenance::Start) => unreachable!("only start nodes have start provenance"),
        }
    }
    let strategies: Vec<KUniformStrategy> = chosen
        .into_iter()
        .map(|s| s.expect("every player is forgotten exactly once"))
        .collect();
    let profile = StrategyProfile::new(strategies.iter().map(KUniformStrategy::to_mixed).collect());
    Some(Solution {
        strategies,
        profile,
        value: top.value.clone(),
    })
}

impl Phase1 {
    pub fn root_size(&self) -> usize {
        self.tables.last().map_or(0, Vec::len)
    }

    pub(crate) fn diagnostics(
        &self,
        game: &PolymatrixGame,
        nice: &NiceTreeDecomposition,
        cfg: &SolverConfig,
    ) -> Diagnostics {
        let w = nice.width() as f64;
        let m = game.max_actions().max(1) as f64;
        let n = game.num_players().max(1) as f64;
        Diagnostics {
            eps: cfg.eps,
            k: self.k,
            width: nice.width(),
            nice_nodes: nice.num_nodes(),
            candidates_per_player: self.candidates.iter().map(Vec::len).collect(),
            total_witnesses: self.tables.iter().map(Vec::len).sum(),
            max_witnesses: self.tables.iter().map(Vec::len).max().unwrap_or(0),
            candidate_bound_log10: self.k as f64 * w * m.log10() + m * w * (2.0 * n / cfg.eps).log10(),
            nodes: self.stats.clone(),
        }
    }

    /// Tables as JSON: `[{node, type, witnesses: [{strategies, payoffs, x}]}]`.
    pub fn export(&self, nice: &NiceTreeDecomposition) -> Value {
        let nodes: Vec<Value> = self
            .tables
            .iter()
            .enumerate()
            .map(|(idx, table)| {
                let bag = &nice.nodes()[idx].bag;
                let witnesses: Vec<Value> = table
                    .iter()
                    .map(|w| {
                        let strategies: Vec<&[usize]> = bag
                            .iter()
                            .zip(&w.strategies)
                            .map(|(&p, &s)| self.candidates[p][s as usize].multiset())
                            .collect();
                        let payoffs: Vec<f64> = w.payoffs.iter().map(|&x| self.grid.value(x)).collect();
                        let x = match &w.value {
                            Some(Some(v)) => json!({"exact": v.to_string(), "approx": to_f64(v)}),
                            _ => Value::Null,
                        };
                        json!({"strategies": strategies, "payoffs": payoffs, "x": x})
                    })
                    .collect();
                json!({
                    "node": idx,
                    "type": nice.nodes()[idx].kind.name(),
                    "bag": bag,
                    "witnesses": witnesses,
                })
            })
            .collect();
        Value::Array(nodes)
    }
}
