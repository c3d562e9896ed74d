//! Reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

/// Returns `perm` with `perm[new] = old`. Ties break on degree, then index,
/// so the ordering is deterministic.
pub fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree: Vec<usize> = adjacency.iter().map(|a| a.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let root = peripheral(adjacency, &degree, seed);
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            next.dedup();
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Pseudo-peripheral node of the component holding `start` (repeated
/// breadth-first sweeps to the farthest low-degree node).
fn peripheral(adjacency: &[Vec<usize>], degree: &[usize], start: usize) -> usize {
    let mut root = start;
    let mut depth = 0;
    for _ in 0..8 {
        let levels = bfs_levels(adjacency, root);
        let max = *levels.iter().flatten().max().unwrap_or(&0);
        let far = levels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(max))
            .map(|(i, _)| i)
            .min_by_key(|&i| (degree[i], i))
            .unwrap_or(root);
        if max <= depth {
            break;
        }
        depth = max;
        root = far;
    }
    root
}

fn bfs_levels(adjacency: &[Vec<usize>], root: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adjacency.len()];
    level[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap_or(0);
        for &u in &adjacency[v] {
            if level[u].is_none() {
                level[u] = Some(lv + 1);
                queue.push_back(u);
            }
        }
    }
    level
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_covers_all_nodes_including_disconnected() {
        let adj = vec![vec![0, 1], vec![0, 1, 2], vec![1, 2], vec![3]];
        let mut p = reverse_cuthill_mckee(&adj);
        assert_eq!(p.len(), 4);
        p.sort_unstable();
        assert_eq!(p, vec![0, 1, 2, 3]);
    }

    #[test]
    fn path_graph_has_unit_bandwidth() {
        // a scrambled path 0-5-2-4-1-3
        let edges = [(0, 5), (5, 2), (2, 4), (4, 1), (1, 3)];
        let mut adj = vec![Vec::new(); 6];
        for (a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let p = reverse_cuthill_mckee(&adj);
        let mut pos = [0usize; 6];
        for (new, &old) in p.iter().enumerate() {
            pos[old] = new;
        }
        for (a, b) in edges {
            assert_eq!(pos[a].abs_diff(pos[b]), 1);
        }
    }
}
