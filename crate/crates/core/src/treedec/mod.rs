//! Tree decompositions of interaction graphs: validation, nice-form
//! conversion, exact width search for small graphs and PACE text formats.

mod nice;
mod pace;
mod width;

pub use nice::{forget_counts, to_nice, NiceKind, NiceNode, NiceTreeDecomposition};
pub use pace::{parse_gr, parse_td, write_gr, write_td, PaceError};
pub use width::{decomposition_from_order, small_exact_treewidth, EXACT_WIDTH_LIMIT};

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::Player;

/// Undirected graph as adjacency lists over `0..n`.
pub type Graph = Vec<Vec<Player>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeDecError {
    #[error("invalid decomposition: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("graph has {n} vertices, exact search is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("decomposition has no bags")]
    Empty,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// One failed decomposition condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    NotATree,
    TreeEdgeOutOfRange(usize, usize),
    BagVertexOutOfRange { bag: usize, vertex: Player },
    VertexUncovered(Player),
    EdgeUncovered(Player, Player),
    Disconnected(Player),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotATree => write!(f, "bag graph is not a tree"),
            Violation::TreeEdgeOutOfRange(a, b) => write!(f, "tree edge ({a},{b}) out of range"),
            Violation::BagVertexOutOfRange { bag, vertex } => {
                write!(f, "bag {bag} contains unknown vertex {vertex}")
            }
            Violation::VertexUncovered(v) => write!(f, "vertex {v} uncovered"),
            Violation::EdgeUncovered(a, b) => write!(f, "edge ({a},{b}) uncovered"),
            Violation::Disconnected(v) => write!(f, "bags containing {v} are disconnected"),
        }
    }
}

/// Bags over players connected by an undirected tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    bags: Vec<Vec<Player>>,
    tree_edges: Vec<(usize, usize)>,
    root: Option<usize>,
}

impl TreeDecomposition {
    /// Bags are sorted and de-duplicated; structure is checked by [`validate`].
    pub fn new(bags: Vec<Vec<Player>>, tree_edges: Vec<(usize, usize)>) -> Self {
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        Self {
            bags,
            tree_edges,
            root: None,
        }
    }

    pub fn with_root(mut self, root: usize) -> Self {
        self.root = Some(root);
        self
    }

    pub fn bags(&self) -> &[Vec<Player>] {
        &self.bags
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.tree_edges
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.bags.len()
    }

    /// Largest bag size minus one (0 for decompositions of empty graphs).
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    pub(crate) fn tree_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.tree_edges {
            if a < adj.len() && b < adj.len() {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn is_tree(&self) -> bool {
        let n = self.bags.len();
        if n == 0 || self.tree_edges.len() != n - 1 {
            return false;
        }
        let adj = self.tree_adjacency();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }
}

/// Checks coverage, edge coverage and connectivity of `decomp` for `graph`.
pub fn validate(decomp: &TreeDecomposition, graph: &Graph) -> Result<(), Vec<Violation>> {
    let n = graph.len();
    let mut violations = Vec::new();
    let nb = decomp.bags.len();
    for &(a, b) in &decomp.tree_edges {
        if a >= nb || b >= nb {
            violations.push(Violation::TreeEdgeOutOfRange(a, b));
        }
    }
    if !decomp.is_tree() {
        violations.push(Violation::NotATree);
    }
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, bag) in decomp.bags.iter().enumerate() {
        for &v in bag {
            if v >= n {
                violations.push(Violation::BagVertexOutOfRange { bag: idx, vertex: v });
            } else {
                holders[v].push(idx);
            }
        }
    }
    for (v, h) in holders.iter().enumerate() {
        if h.is_empty() {
            violations.push(Violation::VertexUncovered(v));
        }
    }
    for (u, nbrs) in graph.iter().enumerate() {
        for &v in nbrs.iter().filter(|&&v| u < v && v < n) {
            let covered = decomp
                .bags
                .iter()
                .any(|b| b.binary_search(&u).is_ok() && b.binary_search(&v).is_ok());
            if !covered {
                violations.push(Violation::EdgeUncovered(u, v));
            }
        }
    }
    let adj = decomp.tree_adjacency();
    for (v, h) in holders.iter().enumerate() {
        if h.len() > 1 && !connected_within(&adj, h) {
            violations.push(Violation::Disconnected(v));
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Whether `nodes` (sorted) induce a connected subgraph of the tree.
fn connected_within(adj: &[Vec<usize>], nodes: &[usize]) -> bool {
    let inside = |x: usize| nodes.binary_search(&x).is_ok();
    let mut seen = vec![false; adj.len()];
    let mut stack = vec![nodes[0]];
    seen[nodes[0]] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if inside(y) && !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == nodes.len()
}

/// Builds adjacency lists from an edge list over `0..n`.
pub fn graph_from_edges(n: usize, edges: &[(Player, Player)]) -> Graph {
    let mut g = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u != v {
            g[u].push(v);
            g[v].push(u);
        }
    }
    for a in &mut g {
        a.sort_unstable();
        a.dedup();
    }
    g
}
