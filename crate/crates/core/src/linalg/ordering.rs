//! Reverse Cuthill–McKee fill-reducing ordering.

use std::collections::VecDeque;

use super::CsrMatrix;

/// RCM permutation of a structurally symmetric matrix, `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n)
        .map(|i| a.row(i).0.iter().filter(|&&j| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut nbrs = Vec::new();
    loop {
        // start each component from a pseudo-peripheral node
        let Some(seed) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| degree[i]) else {
            break;
        };
        let start = pseudo_peripheral(a, seed, &degree, &visited);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(a.row(v).0.iter().copied().filter(|&j| !visited[j]));
            nbrs.sort_by_key(|&j| (degree[j], j));
            for &j in &nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, start: usize, blocked: &[bool]) -> (usize, Vec<usize>) {
    let n = a.nrows();
    let mut level = vec![usize::MAX; n];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last_level = Vec::new();
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        if level[v] > depth {
            depth = level[v];
            last_level.clear();
        }
        last_level.push(v);
        for &j in a.row(v).0 {
            if !blocked[j] && level[j] == usize::MAX {
                level[j] = level[v] + 1;
                queue.push_back(j);
            }
        }
    }
    (depth, last_level)
}

fn pseudo_peripheral(a: &CsrMatrix, seed: usize, degree: &[usize], blocked: &[bool]) -> usize {
    let mut node = seed;
    let (mut depth, mut last) = bfs_levels(a, node, blocked);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&j| degree[j]).unwrap();
        let (d, l) = bfs_levels(a, cand, blocked);
        if d <= depth {
            break;
        }
        node = cand;
        depth = d;
        last = l;
    }
    node
}
