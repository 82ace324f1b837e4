use crate::error::{check_len, invalid, Result};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing inside each row; duplicates are
/// summed at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Coordinate-format accumulator used during assembly.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, entries: Vec::new() }
    }

    pub fn with_capacity(n_rows: usize, n_cols: usize, cap: usize) -> Self {
        Self { n_rows, n_cols, entries: Vec::with_capacity(cap) }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn build(self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, self.entries)
    }
}

impl SparseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, row_ptr: vec![0; n_rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    /// Builds a matrix from `(row, col, value)` entries, summing duplicates.
    /// Explicit zeros are kept so the sparsity pattern reflects element
    /// connectivity.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(entries.len() / 2);
        let mut values: Vec<f64> = Vec::with_capacity(entries.len() / 2);
        // Equal keys are contiguous; each group is summed in value order so
        // the result does not depend on the incoming triplet order.
        let mut start = 0;
        while start < entries.len() {
            let key = (entries[start].0, entries[start].1);
            let mut end = start + 1;
            while end < entries.len() && (entries[end].0, entries[end].1) == key {
                end += 1;
            }
            let group = &mut entries[start..end];
            group.sort_unstable_by(|a, b| a.2.total_cmp(&b.2));
            row_ptr[key.0 + 1] += 1;
            col_idx.push(key.1);
            values.push(group.iter().map(|e| e.2).sum());
            start = end;
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n_rows, n_cols, row_ptr, col_idx, values }
    }

    /// Builds a matrix from raw CSR arrays, validating the invariants.
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len(n_rows + 1, row_ptr.len())?;
        check_len(col_idx.len(), values.len())?;
        if row_ptr[0] != 0 || row_ptr[n_rows] != col_idx.len() {
            return Err(invalid("row offsets do not span the column index array"));
        }
        for r in 0..n_rows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(invalid(format!("row offsets decrease at row {r}")));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= n_cols) {
                return Err(invalid(format!("row {r} has unsorted or out-of-range columns")));
            }
        }
        Ok(Self { n_rows, n_cols, row_ptr, col_idx, values })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values stored in `row`.
    pub fn row(&self, row: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (cols, vals) = self.row(row);
        cols.binary_search(&col).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "operand length");
        assert_eq!(y.len(), self.n_rows, "output length");
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            *out = cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum();
        }
    }

    /// `y += s · A x`.
    pub fn mul_vec_add(&self, s: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "operand length");
        assert_eq!(y.len(), self.n_rows, "output length");
        for (r, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            let dot: f64 = cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum();
            *out += s * dot;
        }
    }

    /// `yᵀ A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        assert_eq!(y.len(), self.n_rows);
        (0..self.n_rows)
            .map(|r| {
                let (cols, vals) = self.row(r);
                y[r] * cols.iter().zip(vals).map(|(&c, v)| v * x[c]).sum::<f64>()
            })
            .sum()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for c in 0..self.n_cols {
            counts[c + 1] += counts[c];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (r, c, v) in self.iter() {
            let slot = next[c];
            col_idx[slot] = r;
            values[slot] = v;
            next[c] += 1;
        }
        Self { n_rows: self.n_cols, n_cols: self.n_rows, row_ptr, col_idx, values }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `Σ cᵢ Aᵢ` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> Result<Self> {
        let (n_rows, n_cols) = match terms.first() {
            Some((_, m)) => (m.n_rows, m.n_cols),
            None => return Err(invalid("empty linear combination")),
        };
        let mut entries = Vec::with_capacity(terms.iter().map(|(_, m)| m.nnz()).sum());
        for (s, m) in terms {
            if (m.n_rows, m.n_cols) != (n_rows, n_cols) {
                return Err(invalid(format!(
                    "shape {}x{} does not match {}x{}",
                    m.n_rows, m.n_cols, n_rows, n_cols
                )));
            }
            entries.extend(m.iter().map(|(r, c, v)| (r, c, s * v)));
        }
        Ok(Self::from_triplets(n_rows, n_cols, entries))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.n_rows != self.n_cols {
            return false;
        }
        let t = self.transpose();
        self.iter().all(|(r, c, v)| (v - t.get(r, c)).abs() <= tol)
            && t.iter().all(|(r, c, v)| (v - self.get(r, c)).abs() <= tol)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (r, c, v) in self.iter() {
            d[r][c] += v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn duplicates_are_summed_and_sorted() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 2, 4.0)]);
        assert_eq!(m.row_ptr(), &[0, 1, 3]);
        assert_eq!(m.col_idx(), &[1, 0, 2]);
        assert_eq!(m.values(), &[2.0, 3.0, 5.0]);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn from_csr_validates() {
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 1, 2], vec![0, 1], vec![1.0, 1.0]).is_ok());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, 2, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn linear_combination_and_products() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 2.0)]);
        let b = SparseMatrix::from_triplets(2, 2, vec![(0, 1, 3.0)]);
        let c = SparseMatrix::linear_combination(&[(2.0, &a), (-1.0, &b)]).unwrap();
        assert_eq!(c.to_dense(), vec![vec![2.0, -3.0], vec![0.0, 4.0]]);
        assert_eq!(c.mul_vec(&[1.0, 1.0]), vec![-1.0, 4.0]);
        assert_eq!(c.bilinear(&[1.0, 2.0], &[1.0, 1.0]), 7.0);
        let bad = SparseMatrix::zeros(3, 2);
        assert!(SparseMatrix::linear_combination(&[(1.0, &a), (1.0, &bad)]).is_err());
    }

    proptest! {
        #[test]
        fn transpose_is_an_involution(
            entries in proptest::collection::vec((0usize..7, 0usize..5, -10.0f64..10.0), 0..40)
        ) {
            let m = SparseMatrix::from_triplets(7, 5, entries);
            let t = m.transpose();
            prop_assert_eq!((t.n_rows(), t.n_cols()), (5, 7));
            for (r, c, v) in m.iter() {
                prop_assert_eq!(t.get(c, r), v);
            }
            prop_assert_eq!(t.transpose(), m);
        }
    }
}
