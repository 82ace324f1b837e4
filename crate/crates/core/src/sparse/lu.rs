//! Multifrontal sparse LU with partial pivoting inside supernodes.
//!
//! The pattern of `A + Aᵀ` drives the symbolic phase (elimination tree and
//! fundamental supernodes). Each supernode owns a dense frontal matrix whose
//! fully-summed rows are factored with partial pivoting; its Schur complement
//! is passed to the parent by extend-add. Factorization and solves are
//! sequential and therefore bit-reproducible.

use super::csr::SparseMatrix;
use super::ordering::{is_permutation, reverse_cuthill_mckee, symmetric_adjacency};
use crate::error::{check_len, invalid, Error, Result};

const NONE: usize = usize::MAX;
/// A diagonal pivot is kept if it is at least this fraction of the column
/// maximum among fully-summed rows.
const PIVOT_THRESHOLD: f64 = 0.1;

/// Magnitudes of the pivots chosen during factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotStats {
    pub min_abs: f64,
    pub max_abs: f64,
}

/// LU factors of a square sparse matrix, reusable for many right-hand sides.
///
/// The handle is immutable after construction and can be shared between
/// threads solving for different right-hand sides.
#[derive(Debug, Clone)]
pub struct Factorization {
    n: usize,
    perm: Vec<usize>,
    supernodes: Vec<Supernode>,
    pivots: PivotStats,
}

#[derive(Debug, Clone)]
struct Supernode {
    first: usize,
    size: usize,
    /// Permuted indices of the off-supernode rows and columns of the front.
    bnd: Vec<usize>,
    /// Packed `L11 \ U11`, row-major `size × size`.
    lu: Vec<f64>,
    /// Factored row `k` is fully-summed row `row_perm[k]`.
    row_perm: Vec<usize>,
    /// `size × bnd.len()`, row-major.
    u12: Vec<f64>,
    /// `bnd.len() × size`, row-major.
    l21: Vec<f64>,
}

/// Factorizes `a` with a reverse Cuthill–McKee ordering.
pub fn factorize(a: &SparseMatrix) -> Result<Factorization> {
    Factorization::new(a, None)
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Elimination tree of the symmetrically permuted pattern.
fn etree(adj: &[Vec<usize>], perm: &[usize], iperm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for j in 0..n {
        for &o in &adj[perm[j]] {
            let mut i = iperm[o];
            if i >= j {
                continue;
            }
            while ancestor[i] != NONE && ancestor[i] != j {
                let next = ancestor[i];
                ancestor[i] = j;
                i = next;
            }
            if ancestor[i] == NONE {
                ancestor[i] = j;
                parent[i] = j;
            }
        }
    }
    parent
}

fn children_lists(parent: &[usize]) -> Vec<Vec<usize>> {
    let mut children = vec![Vec::new(); parent.len()];
    for (j, &p) in parent.iter().enumerate() {
        if p != NONE {
            children[p].push(j);
        }
    }
    children
}

fn postorder(parent: &[usize]) -> Vec<usize> {
    let children = children_lists(parent);
    let mut order = Vec::with_capacity(parent.len());
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for root in (0..parent.len()).filter(|&j| parent[j] == NONE) {
        stack.push((root, 0));
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if *next < children[node].len() {
                let c = children[node][*next];
                *next += 1;
                stack.push((c, 0));
            } else {
                order.push(node);
                stack.pop();
            }
        }
    }
    order
}

struct Symbolic {
    perm: Vec<usize>,
    iperm: Vec<usize>,
    /// `(first, size, bnd)` per supernode in elimination order.
    supernodes: Vec<(usize, usize, Vec<usize>)>,
    children: Vec<Vec<usize>>,
}

fn symbolic(a: &SparseMatrix, perm0: Vec<usize>) -> Symbolic {
    let n = a.n_rows();
    let adj = symmetric_adjacency(a);
    let parent0 = etree(&adj, &perm0, &inverse(&perm0));
    let perm: Vec<usize> = postorder(&parent0).into_iter().map(|k| perm0[k]).collect();
    let iperm = inverse(&perm);
    let parent = etree(&adj, &perm, &iperm);
    let col_children = children_lists(&parent);

    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut col_len = vec![0usize; n];
    let mut supernodes: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let mut sn_of_col = vec![0usize; n];
    for j in 0..n {
        let mut s: Vec<usize> = adj[perm[j]].iter().map(|&o| iperm[o]).filter(|&i| i > j).collect();
        for &c in &col_children[j] {
            let cs = std::mem::take(&mut pending[c]);
            s.extend(cs.into_iter().filter(|&i| i != j));
        }
        s.sort_unstable();
        s.dedup();
        col_len[j] = s.len();
        let extend = j > 0
            && parent[j - 1] == j
            && col_children[j].len() == 1
            && col_len[j - 1] == s.len() + 1
            && supernodes.last().is_some_and(|sn| sn.0 + sn.1 == j);
        if extend {
            let sn = supernodes.last_mut().unwrap();
            sn.1 += 1;
            sn.2 = s.clone();
        } else {
            supernodes.push((j, 1, s.clone()));
        }
        sn_of_col[j] = supernodes.len() - 1;
        if parent[j] != NONE {
            pending[j] = s;
        }
    }
    let mut children = vec![Vec::new(); supernodes.len()];
    for (k, sn) in supernodes.iter().enumerate() {
        let last = sn.0 + sn.1 - 1;
        if parent[last] != NONE {
            children[sn_of_col[parent[last]]].push(k);
        }
    }
    Symbolic { perm, iperm, supernodes, children }
}

impl Factorization {
    /// Factorizes `a` using the given elimination ordering, or a reverse
    /// Cuthill–McKee ordering when none is supplied.
    pub fn new(a: &SparseMatrix, ordering: Option<&[usize]>) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(invalid(format!("cannot factorize a {}x{} matrix", n, a.n_cols())));
        }
        let perm0 = match ordering {
            Some(p) if is_permutation(p, n) => p.to_vec(),
            Some(_) => return Err(invalid("ordering is not a permutation of the matrix indices")),
            None => reverse_cuthill_mckee(a),
        };
        let sym = symbolic(a, perm0);
        let at = a.transpose();
        let Symbolic { perm, iperm, supernodes: snodes, children } = sym;

        let mut pos = vec![NONE; n];
        let mut updates: Vec<Option<Vec<f64>>> = vec![None; snodes.len()];
        let mut out: Vec<Supernode> = Vec::with_capacity(snodes.len());
        let mut pivots = PivotStats { min_abs: f64::INFINITY, max_abs: 0.0 };

        for (s, (first, p, bnd)) in snodes.into_iter().enumerate() {
            let b = bnd.len();
            let m = p + b;
            let last = first + p - 1;
            for k in 0..p {
                pos[first + k] = k;
            }
            for (r, &i) in bnd.iter().enumerate() {
                pos[i] = p + r;
            }
            let mut f = vec![0.0; m * m];
            for k in 0..p {
                let (cols, vals) = a.row(perm[first + k]);
                for (&oc, &v) in cols.iter().zip(vals) {
                    let c = iperm[oc];
                    if c >= first {
                        f[k * m + pos[c]] += v;
                    }
                }
                let (rows, vals) = at.row(perm[first + k]);
                for (&or, &v) in rows.iter().zip(vals) {
                    let r = iperm[or];
                    if r > last {
                        f[pos[r] * m + k] += v;
                    }
                }
            }
            for &c in &children[s] {
                let upd = updates[c].take().expect("child update consumed once");
                let local: Vec<usize> = out[c].bnd.iter().map(|&i| pos[i]).collect();
                let bc = local.len();
                for (x, &lx) in local.iter().enumerate() {
                    let row = &mut f[lx * m..(lx + 1) * m];
                    for (y, &ly) in local.iter().enumerate() {
                        row[ly] += upd[x * bc + y];
                    }
                }
            }
            for k in 0..p {
                pos[first + k] = NONE;
            }
            for &i in &bnd {
                pos[i] = NONE;
            }

            let row_perm = factor_front(&mut f, m, p, first, &perm, &mut pivots)?;

            let mut lu = vec![0.0; p * p];
            let mut u12 = vec![0.0; p * b];
            let mut l21 = vec![0.0; b * p];
            for k in 0..p {
                lu[k * p..(k + 1) * p].copy_from_slice(&f[k * m..k * m + p]);
                u12[k * b..(k + 1) * b].copy_from_slice(&f[k * m + p..(k + 1) * m]);
            }
            for r in 0..b {
                l21[r * p..(r + 1) * p].copy_from_slice(&f[(p + r) * m..(p + r) * m + p]);
            }
            if b > 0 {
                let mut upd = vec![0.0; b * b];
                for r in 0..b {
                    upd[r * b..(r + 1) * b].copy_from_slice(&f[(p + r) * m + p..(p + r + 1) * m]);
                }
                updates[s] = Some(upd);
            }
            out.push(Supernode { first, size: p, bnd, lu, row_perm, u12, l21 });
        }
        if n == 0 {
            pivots = PivotStats { min_abs: 0.0, max_abs: 0.0 };
        }
        Ok(Self { n, perm, supernodes: out, pivots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pivot_stats(&self) -> PivotStats {
        self.pivots
    }

    /// Number of stored factor entries (both triangles).
    pub fn factor_nnz(&self) -> usize {
        self.supernodes.iter().map(|s| s.lu.len() + s.u12.len() + s.l21.len()).sum()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len())?;
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        let mut buf: Vec<f64> = Vec::new();
        for sn in &self.supernodes {
            let (f, p) = (sn.first, sn.size);
            buf.clear();
            buf.extend(sn.row_perm.iter().map(|&r| y[f + r]));
            for r in 1..p {
                let dot: f64 = sn.lu[r * p..r * p + r].iter().zip(&buf[..r]).map(|(l, x)| l * x).sum();
                buf[r] -= dot;
            }
            y[f..f + p].copy_from_slice(&buf);
            for (r, &i) in sn.bnd.iter().enumerate() {
                let dot: f64 = sn.l21[r * p..(r + 1) * p].iter().zip(&buf).map(|(l, x)| l * x).sum();
                y[i] -= dot;
            }
        }
        let mut xb: Vec<f64> = Vec::new();
        for sn in self.supernodes.iter().rev() {
            let (f, p, b) = (sn.first, sn.size, sn.bnd.len());
            xb.clear();
            xb.extend(sn.bnd.iter().map(|&i| y[i]));
            buf.clear();
            buf.extend_from_slice(&y[f..f + p]);
            if b > 0 {
                for k in 0..p {
                    let dot: f64 = sn.u12[k * b..(k + 1) * b].iter().zip(&xb).map(|(u, x)| u * x).sum();
                    buf[k] -= dot;
                }
            }
            for k in (0..p).rev() {
                let dot: f64 =
                    sn.lu[k * p + k + 1..(k + 1) * p].iter().zip(&buf[k + 1..]).map(|(u, x)| u * x).sum();
                buf[k] = (buf[k] - dot) / sn.lu[k * p + k];
            }
            y[f..f + p].copy_from_slice(&buf);
        }
        let mut x = vec![0.0; self.n];
        for (k, &o) in self.perm.iter().enumerate() {
            x[o] = y[k];
        }
        Ok(x)
    }
}

/// Eliminates the first `p` rows and columns of the dense `m × m` front `f`
/// in place, leaving `L11\U11`, `U12`, `L21` and the Schur complement.
fn factor_front(
    f: &mut [f64],
    m: usize,
    p: usize,
    first: usize,
    perm: &[usize],
    stats: &mut PivotStats,
) -> Result<Vec<usize>> {
    let mut row_perm: Vec<usize> = (0..p).collect();
    for k in 0..p {
        let mut best = k;
        let mut best_val = f[k * m + k].abs();
        let diag = best_val;
        for r in k + 1..p {
            let v = f[r * m + k].abs();
            if v > best_val {
                best = r;
                best_val = v;
            }
        }
        if !(best_val > 0.0) || !best_val.is_finite() {
            return Err(Error::Factorization(format!(
                "zero or non-finite pivot in column {} (original index {}); largest candidate {:e}",
                first + k,
                perm[first + k],
                best_val
            )));
        }
        if diag >= PIVOT_THRESHOLD * best_val {
            best = k;
        }
        if best != k {
            for c in 0..m {
                f.swap(k * m + c, best * m + c);
            }
            row_perm.swap(k, best);
        }
        let piv = f[k * m + k];
        stats.min_abs = stats.min_abs.min(piv.abs());
        stats.max_abs = stats.max_abs.max(piv.abs());
        let (top, rest) = f.split_at_mut((k + 1) * m);
        let urow = &top[k * m + k + 1..(k + 1) * m];
        for r in 0..p - k - 1 {
            let row = &mut rest[r * m..(r + 1) * m];
            let l = row[k] / piv;
            row[k] = l;
            if l != 0.0 {
                for (x, u) in row[k + 1..].iter_mut().zip(urow) {
                    *x -= l * u;
                }
            }
        }
    }
    let b = m - p;
    if b == 0 {
        return Ok(row_perm);
    }
    // L21 = F21 U11⁻¹, row by row.
    {
        let (top, bottom) = f.split_at_mut(p * m);
        for r in 0..b {
            let row = &mut bottom[r * m..r * m + p];
            for k in 0..p {
                let x = row[k] / top[k * m + k];
                row[k] = x;
                if x != 0.0 {
                    for (y, u) in row[k + 1..p].iter_mut().zip(&top[k * m + k + 1..k * m + p]) {
                        *y -= x * u;
                    }
                }
            }
        }
    }
    // F22 -= L21 U12.
    let ptr = f.as_mut_ptr();
    // SAFETY: the three operands are disjoint sub-blocks of `f`; L21 occupies
    // rows p..m, columns 0..p; U12 rows 0..p, columns p..m; F22 rows p..m,
    // columns p..m. All strides stay within the m×m allocation.
    unsafe {
        matrixmultiply::dgemm(
            b,
            p,
            b,
            -1.0,
            ptr.add(p * m),
            m as isize,
            1,
            ptr.add(p),
            m as isize,
            1,
            1.0,
            ptr.add(p * m + p),
            m as isize,
            1,
        );
    }
    Ok(row_perm)
}
