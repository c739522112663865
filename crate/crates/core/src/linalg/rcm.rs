use std::collections::VecDeque;

use super::CsrMatrix;

/// Reverse Cuthill–McKee ordering of the symmetrised sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| degree[i]);
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = peripheral(seed, &adj);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| degree[w]);
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Pseudo-peripheral node of the component containing `seed`.
fn peripheral(seed: usize, adj: &[Vec<usize>]) -> usize {
    let mut start = seed;
    let mut ecc = 0;
    for _ in 0..8 {
        let (far, depth) = farthest(start, adj);
        if depth <= ecc {
            break;
        }
        ecc = depth;
        start = far;
    }
    start
}

fn farthest(start: usize, adj: &[Vec<usize>]) -> (usize, usize) {
    let mut dist = std::collections::HashMap::new();
    dist.insert(start, 0usize);
    let mut queue = VecDeque::from([start]);
    let mut last = (start, 0);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d > last.1 || (d == last.1 && adj[v].len() < adj[last.0].len()) {
            last = (v, d);
        }
        for &w in &adj[v] {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                e.insert(d + 1);
                queue.push_back(w);
            }
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_gets_unit_bandwidth() {
        // shuffled path 0-3-1-4-2
        let edges = [(0, 3), (3, 1), (1, 4), (4, 2)];
        let mut t: Vec<_> = (0..5).map(|i| (i, i, 1.0)).collect();
        for &(a, b) in &edges {
            t.push((a, b, 1.0));
            t.push((b, a, 1.0));
        }
        let a = CsrMatrix::from_triplets(5, 5, &t);
        let p = reverse_cuthill_mckee(&a);
        let mut inv = vec![0; 5];
        for (new, &old) in p.iter().enumerate() {
            inv[old] = new;
        }
        for &(x, y) in &edges {
            assert_eq!((inv[x] as i64 - inv[y] as i64).abs(), 1);
        }
    }
}
