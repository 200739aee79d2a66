//! Exact treewidth by dynamic programming over elimination prefixes.

use super::{Graph, TreeDecError, TreeDecomposition};
use crate::game::Player;

/// Largest graph accepted by [`small_exact_treewidth`].
pub const EXACT_WIDTH_LIMIT: usize = 16;

/// Vertices outside `eliminated ∪ {v}` reachable from `v` through eliminated
/// vertices: the later neighbors of `v` in the filled graph.
fn q_set(adj: &[u32], eliminated: u32, v: usize) -> u32 {
    let mut seen = 1u32 << v;
    let mut stack = vec![v];
    let mut out = 0u32;
    while let Some(x) = stack.pop() {
        let mut nb = adj[x] & !seen;
        while nb != 0 {
            let y = nb.trailing_zeros() as usize;
            nb &= nb - 1;
            seen |= 1 << y;
            if eliminated & (1 << y) != 0 {
                stack.push(y);
            } else {
                out |= 1 << y;
            }
        }
    }
    out
}

/// Minimum-width decomposition of `graph` and its width.
///
/// Among optimal elimination orders the lexicographically smallest one is
/// used, so the output is deterministic.
pub fn small_exact_treewidth(
    graph: &Graph,
    limit: usize,
) -> Result<(usize, TreeDecomposition), TreeDecError> {
    let n = graph.len();
    let limit = limit.min(EXACT_WIDTH_LIMIT);
    if n > limit {
        return Err(TreeDecError::TooLarge { n, limit });
    }
    if n == 0 {
        return Ok((0, TreeDecomposition::new(vec![Vec::new()], Vec::new())));
    }
    let adj: Vec<u32> = graph
        .iter()
        .map(|nb| nb.iter().fold(0u32, |acc, &j| acc | (1 << j)))
        .collect();
    let full = (1u32 << n) - 1;
    // best[s] = least possible max |Q| over eliminations of the rest after s
    let mut best = vec![0u8; 1 << n];
    for s in (0..full).rev() {
        let mut value = u8::MAX;
        for v in (0..n).filter(|&v| s & (1 << v) == 0) {
            let q = q_set(&adj, s, v).count_ones() as u8;
            value = value.min(q.max(best[(s | (1 << v)) as usize]));
        }
        best[s as usize] = value;
    }
    let width = best[0] as usize;
    let mut order = Vec::with_capacity(n);
    let mut s = 0u32;
    while s != full {
        let v = (0..n)
            .find(|&v| {
                s & (1 << v) == 0
                    && (q_set(&adj, s, v).count_ones() as u8).max(best[(s | (1 << v)) as usize])
                        <= width as u8
            })
            .expect("an optimal continuation exists");
        order.push(v);
        s |= 1 << v;
    }
    Ok((width, decomposition_from_order(graph, &order)))
}

/// Decomposition induced by eliminating vertices in `order`.
///
/// Bag of `v` is `v` plus its later neighbors in the filled graph; its parent
/// is the bag of the earliest-eliminated of those. Components are chained
/// together through their last bags.
pub fn decomposition_from_order(graph: &Graph, order: &[Player]) -> TreeDecomposition {
    let n = graph.len();
    assert_eq!(order.len(), n, "order must list every vertex once");
    let mut position = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        position[v] = i;
    }
    // fill-in with sorted neighbor sets, works for any n
    let mut nbrs: Vec<Vec<Player>> = graph.to_vec();
    let mut bags = Vec::with_capacity(n);
    let mut edges = Vec::new();
    let mut roots = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        let later: Vec<Player> = nbrs[v]
            .iter()
            .copied()
            .filter(|&u| position[u] > i)
            .collect();
        for (a, &x) in later.iter().enumerate() {
            for &y in &later[a + 1..] {
                if !nbrs[x].contains(&y) {
                    nbrs[x].push(y);
                    nbrs[y].push(x);
                }
            }
        }
        let mut bag = later.clone();
        bag.push(v);
        bags.push(bag);
        match later.iter().min_by_key(|&&u| position[u]) {
            Some(&p) => edges.push((i, position[p])),
            None => roots.push(i),
        }
    }
    for w in roots.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDecomposition::new(bags, edges)
}
