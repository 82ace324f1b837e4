use super::csr::SparseMatrix;
use crate::error::{invalid, Result};

/// Square grid of optional sparse blocks and its flattened matrix.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    blocks: Vec<Vec<Option<SparseMatrix>>>,
    row_offsets: Vec<usize>,
    col_offsets: Vec<usize>,
    matrix: SparseMatrix,
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len() + 1);
    out.push(0);
    for s in sizes {
        out.push(out.last().unwrap() + s);
    }
    out
}

/// Places the blocks of a rectangular grid into one matrix. Absent blocks are
/// zero; every block row and column must contain at least one block so that
/// its size is known.
pub fn block_compose(blocks: Vec<Vec<Option<SparseMatrix>>>) -> Result<BlockSystem> {
    let nr = blocks.len();
    let nc = blocks.first().map_or(0, |r| r.len());
    if nr == 0 || nc == 0 || blocks.iter().any(|r| r.len() != nc) {
        return Err(invalid("block grid must be non-empty and rectangular"));
    }
    let mut row_sizes = vec![None; nr];
    let mut col_sizes = vec![None; nc];
    for (i, row) in blocks.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            let Some(b) = b else { continue };
            for (slot, size, what) in
                [(&mut row_sizes[i], b.n_rows(), "row"), (&mut col_sizes[j], b.n_cols(), "column")]
            {
                match *slot {
                    None => *slot = Some(size),
                    Some(s) if s != size => {
                        return Err(invalid(format!(
                            "block ({i}, {j}) has {what} dimension {size}, expected {s}"
                        )))
                    }
                    _ => {}
                }
            }
        }
    }
    let row_sizes: Vec<usize> = row_sizes
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| invalid(format!("block row {i} is empty"))))
        .collect::<Result<_>>()?;
    let col_sizes: Vec<usize> = col_sizes
        .into_iter()
        .enumerate()
        .map(|(j, s)| s.ok_or_else(|| invalid(format!("block column {j} is empty"))))
        .collect::<Result<_>>()?;
    let row_offsets = offsets(&row_sizes);
    let col_offsets = offsets(&col_sizes);

    let n_rows = row_offsets[nr];
    let n_cols = col_offsets[nc];
    let mut row_ptr = vec![0usize; n_rows + 1];
    let nnz: usize = blocks.iter().flatten().flatten().map(|b| b.nnz()).sum();
    let mut col_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for (i, row) in blocks.iter().enumerate() {
        for r in 0..row_sizes[i] {
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    let (cols, vals) = b.row(r);
                    col_idx.extend(cols.iter().map(|c| c + col_offsets[j]));
                    values.extend_from_slice(vals);
                }
            }
            row_ptr[row_offsets[i] + r + 1] = col_idx.len();
        }
    }
    let matrix = SparseMatrix::from_csr(n_rows, n_cols, row_ptr, col_idx, values)?;
    Ok(BlockSystem { blocks, row_offsets, col_offsets, matrix })
}

impl BlockSystem {
    /// The flattened matrix.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SparseMatrix {
        self.matrix
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&SparseMatrix> {
        self.blocks[i][j].as_ref()
    }

    /// Offsets of the block rows; the last entry is the total row count.
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_offsets(&self) -> &[usize] {
        &self.col_offsets
    }

    /// Splits a flat vector into block-row segments.
    pub fn split<'a>(&self, x: &'a [f64]) -> Vec<&'a [f64]> {
        self.row_offsets.windows(2).map(|w| &x[w[0]..w[1]]).collect()
    }
}
