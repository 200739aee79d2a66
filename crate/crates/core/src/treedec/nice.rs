use std::collections::VecDeque;

use serde::Serialize;

use super::{validate, Graph, TreeDecError, TreeDecomposition, Violation};
use crate::game::Player;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NiceKind {
    Start,
    Introduce(Player),
    Forget(Player),
    Join,
}

impl NiceKind {
    pub fn name(&self) -> &'static str {
        match self {
            NiceKind::Start => "start",
            NiceKind::Introduce(_) => "introduce",
            NiceKind::Forget(_) => "forget",
            NiceKind::Join => "join",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NiceNode {
    pub kind: NiceKind,
    /// Sorted players in the bag.
    pub bag: Vec<Player>,
    pub children: Vec<usize>,
}

/// Rooted binary decomposition whose nodes are stored children-first; the
/// last node is the root and has an empty bag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NiceTreeDecomposition {
    nodes: Vec<NiceNode>,
}

impl NiceTreeDecomposition {
    /// Checks the local node-type rules and returns the decomposition.
    pub fn new(nodes: Vec<NiceNode>) -> Result<Self, Vec<String>> {
        let nice = Self { nodes };
        let problems = nice.local_problems();
        if problems.is_empty() {
            Ok(nice)
        } else {
            Err(problems)
        }
    }

    pub fn nodes(&self) -> &[NiceNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn count(&self, pred: impl Fn(&NiceKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }

    fn local_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            out.push("no nodes".to_string());
            return out;
        }
        let mut parent_count = vec![0usize; self.nodes.len()];
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.bag.windows(2).any(|w| w[0] >= w[1]) {
                out.push(format!("node {idx}: bag not sorted"));
            }
            if node.children.iter().any(|&c| c >= idx) {
                out.push(format!("node {idx}: child stored after parent"));
                continue;
            }
            for &c in &node.children {
                parent_count[c] += 1;
            }
            let child = |i: usize| &self.nodes[node.children[i]].bag;
            let ok = match node.kind {
                NiceKind::Start => node.children.is_empty(),
                NiceKind::Join => node.children.len() == 2 && child(0) == &node.bag && child(1) == &node.bag,
                NiceKind::Introduce(p) => {
                    node.children.len() == 1 && {
                        let c = child(0);
                        node.bag.len() == c.len() + 1
                            && node.bag.binary_search(&p).is_ok()
                            && c.binary_search(&p).is_err()
                            && c.iter().all(|x| node.bag.binary_search(x).is_ok())
                    }
                }
                NiceKind::Forget(p) => {
                    node.children.len() == 1 && {
                        let c = child(0);
                        c.len() == node.bag.len() + 1
                            && c.binary_search(&p).is_ok()
                            && node.bag.binary_search(&p).is_err()
                            && node.bag.iter().all(|x| c.binary_search(x).is_ok())
                    }
                }
            };
            if !ok {
                out.push(format!("node {idx}: {} rule violated", node.kind.name()));
            }
        }
        let root = self.nodes.len() - 1;
        if !self.nodes[root].bag.is_empty() {
            out.push("root bag is not empty".to_string());
        }
        for (idx, &pc) in parent_count.iter().enumerate() {
            let expected = usize::from(idx != root);
            if pc != expected {
                out.push(format!("node {idx} has {pc} parents"));
            }
        }
        out
    }

    /// Full check: node-type rules plus the decomposition conditions for `graph`.
    pub fn validate(&self, graph: &Graph) -> Result<(), Vec<String>> {
        let mut problems = self.local_problems();
        if problems.is_empty() {
            if let Err(v) = validate(&self.as_tree_decomposition(), graph) {
                problems.extend(v.iter().map(ToString::to_string));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    /// The same bags viewed as a plain tree decomposition.
    pub fn as_tree_decomposition(&self) -> TreeDecomposition {
        let bags = self.nodes.iter().map(|n| n.bag.clone()).collect();
        let edges = self
            .nodes
            .iter()
            .enumerate()
            .flat_map(|(idx, n)| n.children.iter().map(move |&c| (c, idx)))
            .collect();
        TreeDecomposition::new(bags, edges).with_root(self.root())
    }
}

/// Number of Forget nodes in the subtree of each node, the node included.
pub fn forget_counts(nice: &NiceTreeDecomposition) -> Vec<usize> {
    let mut f = vec![0usize; nice.nodes.len()];
    for (idx, node) in nice.nodes.iter().enumerate() {
        let below: usize = node.children.iter().map(|&c| f[c]).sum();
        f[idx] = below + usize::from(matches!(node.kind, NiceKind::Forget(_)));
    }
    f
}

fn structural_violations(decomp: &TreeDecomposition) -> Vec<Violation> {
    // coverage of vertices that never appear is irrelevant here; only the
    // tree shape and per-vertex connectivity matter
    let n = decomp.bags().iter().flatten().max().map_or(0, |&m| m + 1);
    let graph: Graph = vec![Vec::new(); n];
    match validate(decomp, &graph) {
        Ok(()) => Vec::new(),
        Err(v) => v
            .into_iter()
            .filter(|x| !matches!(x, Violation::VertexUncovered(_)))
            .collect(),
    }
}

/// Converts a decomposition into nice form with the same width.
///
/// The root is the explicit root if one is set, else the node with the
/// lexicographically smallest bag. Each tree edge becomes a chain that first
/// forgets and then introduces players in ascending order; nodes with several
/// children get a left-deep chain of Joins; the root bag is emptied by a final
/// Forget chain.
pub fn to_nice(decomp: &TreeDecomposition) -> Result<NiceTreeDecomposition, TreeDecError> {
    if decomp.num_nodes() == 0 {
        return Err(TreeDecError::Empty);
    }
    let violations = structural_violations(decomp);
    if !violations.is_empty() {
        return Err(TreeDecError::Invalid(violations));
    }
    let bags = decomp.bags();
    let root = decomp.root().unwrap_or_else(|| {
        (0..bags.len())
            .min_by(|&a, &b| bags[a].cmp(&bags[b]).then(a.cmp(&b)))
            .expect("non-empty")
    });
    let adj = decomp.tree_adjacency();
    let mut order = Vec::with_capacity(bags.len());
    let mut parent = vec![usize::MAX; bags.len()];
    let mut queue = VecDeque::from([root]);
    parent[root] = root;
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for &y in &adj[x] {
            if parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }

    let mut nodes: Vec<NiceNode> = Vec::new();
    let push = |nodes: &mut Vec<NiceNode>, kind, bag, children| {
        nodes.push(NiceNode {
            kind,
            bag,
            children,
        });
        nodes.len() - 1
    };
    let mut top = vec![usize::MAX; bags.len()];
    for &t in order.iter().rev() {
        let target = &bags[t];
        let mut tops = Vec::new();
        for &c in adj[t].iter().filter(|&&c| c != t && parent[c] == t && c != root) {
            let mut cur = top[c];
            let mut bag = bags[c].clone();
            for &p in bags[c].iter().filter(|p| target.binary_search(p).is_err()) {
                bag.retain(|&x| x != p);
                cur = push(&mut nodes, NiceKind::Forget(p), bag.clone(), vec![cur]);
            }
            for &p in target.iter().filter(|p| bags[c].binary_search(p).is_err()) {
                let pos = bag.binary_search(&p).unwrap_err();
                bag.insert(pos, p);
                cur = push(&mut nodes, NiceKind::Introduce(p), bag.clone(), vec![cur]);
            }
            tops.push(cur);
        }
        top[t] = match tops.len() {
            0 => push(&mut nodes, NiceKind::Start, target.clone(), Vec::new()),
            _ => {
                let mut acc = tops[0];
                for &other in &tops[1..] {
                    acc = push(&mut nodes, NiceKind::Join, target.clone(), vec![acc, other]);
                }
                acc
            }
        };
    }
    let mut cur = top[root];
    let mut bag = bags[root].clone();
    for &p in &bags[root] {
        bag.retain(|&x| x != p);
        cur = push(&mut nodes, NiceKind::Forget(p), bag.clone(), vec![cur]);
    }
    debug_assert_eq!(cur, nodes.len() - 1);
    Ok(NiceTreeDecomposition { nodes })
}
