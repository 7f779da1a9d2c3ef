//! Reverse Cuthill-McKee ordering.

use crate::linalg::SparseSymMatrix;

/// RCM permutation (`perm[new] = old`). Components are ordered by their
/// smallest node id; each starts from a pseudo-peripheral node found by
/// repeated BFS from its lowest-degree node. If the reordering would not
/// reduce the bandwidth the identity is returned.
pub fn rcm(k: &SparseSymMatrix) -> Vec<usize> {
    let adj = k.adjacency();
    let order = rcm_order(&adj);
    let permuted = k.permute(&order).expect("rcm produced a permutation");
    if permuted.bandwidth() <= k.bandwidth() {
        order
    } else {
        (0..k.n()).collect()
    }
}

/// Reverse Cuthill-McKee order of a graph given as adjacency lists,
/// without the bandwidth safeguard.
pub fn rcm_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let members = bfs_levels(adj, seed, &visited).concat();
        let mut start = *members
            .iter()
            .min_by_key(|&&m| (degree[m], m))
            .expect("nonempty component");
        let mut depth = bfs_levels(adj, start, &visited).len();
        // Pseudo-peripheral refinement: move to the lowest-degree node of
        // the last level while the eccentricity grows.
        loop {
            let levels = bfs_levels(adj, start, &visited);
            let last = levels.last().expect("at least one level");
            let cand = *last.iter().min_by_key(|&&m| (degree[m], m)).unwrap();
            let cand_depth = bfs_levels(adj, cand, &visited).len();
            if cand_depth > depth {
                start = cand;
                depth = cand_depth;
            } else {
                break;
            }
        }
        // Cuthill-McKee from `start`, neighbors by increasing degree.
        let mut component = Vec::with_capacity(members.len());
        let mut queue = std::collections::VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            component.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        out.extend(component.iter().rev());
    }
    out
}

/// BFS level structure rooted at `root`, skipping `blocked` nodes.
pub fn bfs_levels(adj: &[Vec<usize>], root: usize, blocked: &[bool]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; adj.len()];
    seen[root] = true;
    let mut levels = vec![vec![root]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().unwrap() {
            for &w in &adj[v] {
                if !seen[w] && !blocked[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        next.sort_unstable();
        levels.push(next);
    }
}
