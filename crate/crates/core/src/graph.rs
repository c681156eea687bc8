//! Index-based directed-graph routines shared by the analyses.
//!
//! Graphs are adjacency lists over `0..n`.

use std::collections::VecDeque;

/// Nodes reachable from `start` by a path of at least one edge.
pub(crate) fn reachable_from(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue: VecDeque<usize> = adj[start].iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        if !seen[v] {
            seen[v] = true;
            queue.extend(adj[v].iter().copied());
        }
    }
    seen
}

/// `closure[a][b]` is true iff a non-empty path leads from `a` to `b`.
pub(crate) fn transitive_closure(adj: &[Vec<usize>]) -> Vec<Vec<bool>> {
    (0..adj.len()).map(|v| reachable_from(adj, v)).collect()
}

pub(crate) fn adjacency(
    n: usize,
    edges: impl IntoIterator<Item = (usize, usize)>,
) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for (a, b) in edges {
        if !adj[a].contains(&b) {
            adj[a].push(b);
        }
    }
    for succ in &mut adj {
        succ.sort_unstable();
    }
    adj
}

/// Returns one directed cycle as a node list (first node not repeated),
/// or `None` for a DAG. Deterministic: searches from the lowest index.
pub(crate) fn find_cycle(adj: &[Vec<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = adj.len();
    let mut mark = vec![Mark::New; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        // (node, next successor position)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Active;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            if let Some(&w) = adj[v].get(*pos) {
                *pos += 1;
                match mark[w] {
                    Mark::New => {
                        mark[w] = Mark::Active;
                        parent[w] = v;
                        stack.push((w, 0));
                    }
                    Mark::Active => {
                        let mut cycle = vec![v];
                        let mut u = v;
                        while u != w {
                            u = parent[u];
                            cycle.push(u);
                        }
                        cycle.reverse();
                        return Some(cycle);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[v] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

/// Weakly connected component label for every node in `nodes`; other
/// nodes get `usize::MAX`. Labels are assigned in increasing node order.
pub(crate) fn weak_components(adj: &[Vec<usize>], nodes: &[bool]) -> (usize, Vec<usize>) {
    let n = adj.len();
    let mut undirected = vec![Vec::new(); n];
    for (a, succ) in adj.iter().enumerate() {
        for &b in succ {
            undirected[a].push(b);
            undirected[b].push(a);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    for start in 0..n {
        if !nodes[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &undirected[v] {
                if nodes[w] && label[w] == usize::MAX {
                    label[w] = count;
                    queue.push_back(w);
                }
            }
        }
        count += 1;
    }
    (count, label)
}

/// Edges of the transitive reduction of a DAG: an edge `a -> b` is kept
/// unless `b` is also reachable from another direct successor of `a`.
pub(crate) fn transitive_reduction(adj: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let closure = transitive_closure(adj);
    let mut kept = Vec::new();
    for (a, succ) in adj.iter().enumerate() {
        for &b in succ {
            let implied = succ.iter().any(|&c| c != b && closure[c][b]);
            if !implied {
                kept.push((a, b));
            }
        }
    }
    kept
}

/// Depth-first enumeration of linear extensions of a DAG. At every step
/// the available nodes are tried in `rank` order, so the output is sorted
/// lexicographically by rank. Stops after `limit` extensions.
pub(crate) fn linear_extensions(
    adj: &[Vec<usize>],
    rank: &[usize],
    limit: usize,
) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut indegree = vec![0usize; n];
    for succ in adj {
        for &b in succ {
            indegree[b] += 1;
        }
    }
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&v| rank[v]);

    struct Search<'a> {
        adj: &'a [Vec<usize>],
        by_rank: Vec<usize>,
        indegree: Vec<usize>,
        placed: Vec<bool>,
        prefix: Vec<usize>,
        out: Vec<Vec<usize>>,
        limit: usize,
    }

    impl Search<'_> {
        fn run(&mut self) {
            if self.out.len() >= self.limit {
                return;
            }
            if self.prefix.len() == self.adj.len() {
                self.out.push(self.prefix.clone());
                return;
            }
            for i in 0..self.by_rank.len() {
                let v = self.by_rank[i];
                if self.placed[v] || self.indegree[v] != 0 {
                    continue;
                }
                self.placed[v] = true;
                self.prefix.push(v);
                for &w in &self.adj[v] {
                    self.indegree[w] -= 1;
                }
                self.run();
                for &w in &self.adj[v] {
                    self.indegree[w] += 1;
                }
                self.prefix.pop();
                self.placed[v] = false;
                if self.out.len() >= self.limit {
                    return;
                }
            }
        }
    }

    let mut search = Search {
        adj,
        by_rank,
        indegree,
        placed: vec![false; n],
        prefix: Vec::with_capacity(n),
        out: Vec::new(),
        limit,
    };
    if limit > 0 {
        search.run();
    }
    search.out
}

/// Exact number of linear extensions by dynamic programming over
/// down-closed node subsets. Requires `n <= 20`; 20! fits in a `u64`.
pub(crate) fn count_linear_extensions(adj: &[Vec<usize>]) -> u64 {
    let n = adj.len();
    assert!(n <= 20, "subset counting limited to 20 nodes");
    let mut pred_mask = vec![0u32; n];
    for (a, succ) in adj.iter().enumerate() {
        for &b in succ {
            pred_mask[b] |= 1 << a;
        }
    }
    let full = (1usize << n) - 1;
    let mut ways = vec![0u64; full + 1];
    ways[0] = 1;
    for mask in 0..=full {
        let w = ways[mask];
        if w == 0 {
            continue;
        }
        for (v, &preds) in pred_mask.iter().enumerate() {
            let bit = 1usize << v;
            if mask & bit == 0 && (preds as usize) & mask == preds as usize {
                ways[mask | bit] += w;
            }
        }
    }
    ways[full]
}

/// Lexicographically smallest topological order by `rank`, or `None` if cyclic.
pub(crate) fn topological_order(adj: &[Vec<usize>], rank: &[usize]) -> Option<Vec<usize>> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let n = adj.len();
    let mut indegree = vec![0usize; n];
    for succ in adj {
        for &b in succ {
            indegree[b] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, usize)>> = (0..n)
        .filter(|&v| indegree[v] == 0)
        .map(|v| Reverse((rank[v], v)))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, v))) = ready.pop() {
        order.push(v);
        for &w in &adj[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(Reverse((rank[w], w)));
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_rank(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn cycle_detection() {
        let adj = adjacency(3, [(0, 1), (1, 2)]);
        assert_eq!(find_cycle(&adj), None);
        let adj = adjacency(3, [(0, 1), (1, 2), (2, 1)]);
        assert_eq!(find_cycle(&adj), Some(vec![1, 2]));
        let adj = adjacency(1, [(0, 0)]);
        assert_eq!(find_cycle(&adj), Some(vec![0]));
    }

    #[test]
    fn reduction_drops_implied_edge() {
        let adj = adjacency(3, [(0, 1), (1, 2), (0, 2)]);
        assert_eq!(transitive_reduction(&adj), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn extensions_of_antichain_and_chain() {
        let adj = adjacency(3, []);
        let all = linear_extensions(&adj, &identity_rank(3), usize::MAX);
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[5], vec![2, 1, 0]);
        assert_eq!(count_linear_extensions(&adj), 6);

        let chain = adjacency(4, [(0, 1), (1, 2), (2, 3)]);
        assert_eq!(linear_extensions(&chain, &identity_rank(4), 10).len(), 1);
        assert_eq!(count_linear_extensions(&chain), 1);
        assert!(linear_extensions(&chain, &identity_rank(4), 0).is_empty());
    }

    #[test]
    fn twenty_node_antichain_count() {
        let adj = adjacency(20, []);
        assert_eq!(count_linear_extensions(&adj), 2_432_902_008_176_640_000);
    }

    #[test]
    fn components() {
        let adj = adjacency(5, [(0, 1), (3, 2)]);
        let (count, label) = weak_components(&adj, &[true, true, true, true, false]);
        assert_eq!(count, 2);
        assert_eq!(label, vec![0, 0, 1, 1, usize::MAX]);
    }
}
