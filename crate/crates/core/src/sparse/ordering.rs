//! Fill-reducing symmetric orderings.
//!
//! A permutation `perm` lists original indices in elimination order:
//! `perm[k]` is eliminated `k`-th.

use super::csr::SparseMatrix;
use std::collections::VecDeque;

/// Nested dissection for unknowns attached to a structured lattice.
///
/// `coords[i]` is the lattice position of unknown `i`, measured in units of
/// `cell / cells`-th of the square: coarse cell boundaries sit at multiples of
/// `cell`, and there are `cells` coarse cells per direction. Unknowns are
/// assumed to couple only when they lie in a common closed coarse cell, so
/// every coarse grid line is a separator.
pub fn nested_dissection(coords: &[(usize, usize)], cell: usize, cells: usize) -> Vec<usize> {
    let mut perm = Vec::with_capacity(coords.len());
    let all: Vec<usize> = (0..coords.len()).collect();
    dissect(coords, cell, (0, cells), (0, cells), all, &mut perm);
    perm
}

fn dissect(
    coords: &[(usize, usize)],
    cell: usize,
    xr: (usize, usize),
    yr: (usize, usize),
    mut dofs: Vec<usize>,
    perm: &mut Vec<usize>,
) {
    let (wx, wy) = (xr.1 - xr.0, yr.1 - yr.0);
    if dofs.is_empty() {
        return;
    }
    if wx <= 1 && wy <= 1 {
        dofs.sort_by_key(|&i| (coords[i].1, coords[i].0, i));
        perm.extend(dofs);
        return;
    }
    let split_x = wx >= wy;
    let (lo, hi) = if split_x { xr } else { yr };
    let mid = (lo + hi) / 2;
    let line = mid * cell;
    let key = |i: usize| if split_x { coords[i].0 } else { coords[i].1 };
    let (mut left, mut right, mut sep) = (Vec::new(), Vec::new(), Vec::new());
    for i in dofs {
        match key(i).cmp(&line) {
            std::cmp::Ordering::Less => left.push(i),
            std::cmp::Ordering::Greater => right.push(i),
            std::cmp::Ordering::Equal => sep.push(i),
        }
    }
    if split_x {
        dissect(coords, cell, (lo, mid), yr, left, perm);
        dissect(coords, cell, (mid, hi), yr, right, perm);
    } else {
        dissect(coords, cell, xr, (lo, mid), left, perm);
        dissect(coords, cell, xr, (mid, hi), right, perm);
    }
    sep.sort_by_key(|&i| (coords[i].1, coords[i].0, i));
    perm.extend(sep);
}

/// Reverse Cuthill–McKee ordering of the pattern of `A + Aᵀ`.
pub fn reverse_cuthill_mckee(a: &SparseMatrix) -> Vec<usize> {
    let adj = symmetric_adjacency(a);
    let n = adj.len();
    let degree: Vec<usize> = adj.iter().map(|v| v.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by_key(|&i| (degree[i], i));
    for s in starts {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Off-diagonal adjacency lists of the pattern of `A + Aᵀ`, sorted.
pub(crate) fn symmetric_adjacency(a: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = a.n_rows();
    let mut adj = vec![Vec::new(); n];
    for (r, c, _) in a.iter() {
        if r != c {
            adj[r].push(c);
            adj[c].push(r);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

pub(crate) fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true))
}
