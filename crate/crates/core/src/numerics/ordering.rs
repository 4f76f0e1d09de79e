use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;

/// Reverse Cuthill-McKee ordering of the symmetrised pattern of `a`.
///
/// Returns `perm` with `perm[new] = old`. Ties are broken by index, so the
/// ordering is deterministic.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in a.row_cols(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    while order.len() < n {
        // start each component from a pseudo-peripheral node
        let seed = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i))
            .expect("unvisited node");
        let start = farthest_from(seed, &adj, &degree, &visited);
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_unstable_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn farthest_from(seed: usize, adj: &[Vec<usize>], degree: &[usize], blocked: &[bool]) -> usize {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::new();
    dist[seed] = 0;
    queue.push_back(seed);
    let mut best = (0, degree[seed], seed);
    while let Some(v) = queue.pop_front() {
        let cand = (dist[v], usize::MAX - degree[v], usize::MAX - v);
        if cand > (best.0, usize::MAX - best.1, usize::MAX - best.2) {
            best = (dist[v], degree[v], v);
        }
        for &w in &adj[v] {
            if dist[w] == usize::MAX && !blocked[w] {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    best.2
}

/// Lower and upper bandwidth of `a` under `perm` (`perm[new] = old`).
pub(crate) fn bandwidths(a: &CsrMatrix, perm: &[usize]) -> (usize, usize) {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let (mut kl, mut ku) = (0, 0);
    for old_i in 0..a.dim() {
        let i = inv[old_i];
        for &old_j in a.row_cols(old_i) {
            let j = inv[old_j];
            if j < i {
                kl = kl.max(i - j);
            } else {
                ku = ku.max(j - i);
            }
        }
    }
    (kl, ku)
}
