//! Strong Dirichlet conditions by symmetric elimination.

use crate::error::{check_len, invalid, Result};
use crate::sparse::{SparseMatrix, TripletBuilder};

/// Prescribed values for a set of global DOFs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DofConstraintSet {
    entries: Vec<(usize, f64)>,
}

impl DofConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set from `(dof, value)` pairs. Repeated DOFs must carry the
    /// same value.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (dof, value) in entries {
            match out.last() {
                Some(&(d, v)) if d == dof => {
                    if v != value {
                        return Err(invalid(format!("DOF {dof} constrained to both {v} and {value}")));
                    }
                }
                _ => out.push((dof, value)),
            }
        }
        Ok(Self { entries: out })
    }

    /// All listed DOFs set to zero.
    pub fn homogeneous(dofs: impl IntoIterator<Item = usize>) -> Self {
        let mut d: Vec<usize> = dofs.into_iter().collect();
        d.sort_unstable();
        d.dedup();
        Self { entries: d.into_iter().map(|k| (k, 0.0)).collect() }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same DOFs with new values, e.g. boundary data at a later time.
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        check_len(self.entries.len(), values.len())?;
        Ok(Self { entries: self.entries.iter().zip(values).map(|(&(d, _), &v)| (d, v)).collect() })
    }

    fn check_bounds(&self, n: usize) -> Result<()> {
        match self.entries.last() {
            Some(&(d, _)) if d >= n => Err(invalid(format!("constrained DOF {d} out of range for dimension {n}"))),
            _ => Ok(()),
        }
    }
}

/// Reusable elimination of a fixed DOF set from a square matrix.
///
/// The reduced matrix has identity rows and columns on constrained DOFs.
/// The removed columns are kept so boundary values can be lifted into any
/// right-hand side without reassembling.
#[derive(Debug, Clone)]
pub struct DirichletElimination {
    matrix: SparseMatrix,
    /// Columns of the original matrix at constrained DOFs, free rows only.
    coupling: SparseMatrix,
    constrained: Vec<usize>,
    is_constrained: Vec<bool>,
}

impl DirichletElimination {
    pub fn new(matrix: &SparseMatrix, dofs: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = matrix.n_rows();
        if matrix.n_cols() != n {
            return Err(invalid("Dirichlet elimination needs a square matrix"));
        }
        let mut constrained: Vec<usize> = dofs.into_iter().collect();
        constrained.sort_unstable();
        constrained.dedup();
        if constrained.last().is_some_and(|&d| d >= n) {
            return Err(invalid("constrained DOF out of range"));
        }
        let mut is_constrained = vec![false; n];
        let mut slot = vec![usize::MAX; n];
        for (k, &d) in constrained.iter().enumerate() {
            is_constrained[d] = true;
            slot[d] = k;
        }
        let mut reduced = TripletBuilder::with_capacity(n, n, matrix.nnz());
        let mut coupling = TripletBuilder::new(n, constrained.len());
        for (r, c, v) in matrix.iter() {
            match (is_constrained[r], is_constrained[c]) {
                (false, false) => reduced.add(r, c, v),
                (false, true) => coupling.add(r, slot[c], v),
                _ => {}
            }
        }
        for &d in &constrained {
            reduced.add(d, d, 1.0);
        }
        Ok(Self { matrix: reduced.build(), coupling: coupling.build(), constrained, is_constrained })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.is_constrained[dof]
    }

    /// Adjusts `rhs` in place for constrained values listed in the order of
    /// [`Self::constrained`].
    pub fn lift(&self, rhs: &mut [f64], values: &[f64]) -> Result<()> {
        check_len(self.matrix.n_rows(), rhs.len())?;
        check_len(self.constrained.len(), values.len())?;
        if values.iter().any(|&v| v != 0.0) {
            self.coupling.mul_vec_add(-1.0, values, rhs);
        }
        for (&d, &v) in self.constrained.iter().zip(values) {
            rhs[d] = v;
        }
        Ok(())
    }

    /// Lifts using a constraint set over the same DOFs.
    pub fn lift_with(&self, rhs: &mut [f64], constraints: &DofConstraintSet) -> Result<()> {
        if constraints.len() != self.constrained.len() || !constraints.dofs().eq(self.constrained.iter().copied()) {
            return Err(invalid("constraint set does not match the eliminated DOFs"));
        }
        self.lift(rhs, &constraints.values())
    }
}

/// Symmetric elimination of `constraints` from `matrix` and `rhs`.
pub fn apply_dirichlet(
    matrix: &SparseMatrix,
    rhs: &[f64],
    constraints: &DofConstraintSet,
) -> Result<(SparseMatrix, Vec<f64>)> {
    check_len(matrix.n_rows(), rhs.len())?;
    constraints.check_bounds(matrix.n_rows())?;
    if constraints.is_empty() {
        return Ok((matrix.clone(), rhs.to_vec()));
    }
    let elim = DirichletElimination::new(matrix, constraints.dofs())?;
    let mut b = rhs.to_vec();
    elim.lift_with(&mut b, constraints)?;
    Ok((elim.matrix, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.add(i, i, 2.0);
            if i > 0 {
                b.add(i, i - 1, -1.0);
                b.add(i - 1, i, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn empty_set_is_identity_operation() {
        let a = tridiag(4);
        let rhs = vec![1.0, 2.0, 3.0, 4.0];
        let (m, b) = apply_dirichlet(&a, &rhs, &DofConstraintSet::new()).unwrap();
        assert_eq!(m, a);
        assert_eq!(b, rhs);
    }

    #[test]
    fn elimination_is_symmetric_and_lifts() {
        let a = tridiag(4);
        let c = DofConstraintSet::from_pairs([(0, 1.0), (3, 2.0)]).unwrap();
        let (m, b) = apply_dirichlet(&a, &[0.0; 4], &c).unwrap();
        assert!(m.is_symmetric(0.0));
        assert_eq!(b, vec![1.0, 1.0, 2.0, 2.0]);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.get(1, 2), -1.0);
    }

    #[test]
    fn conflicting_duplicates_rejected() {
        assert!(DofConstraintSet::from_pairs([(1, 0.0), (1, 1.0)]).is_err());
        assert_eq!(DofConstraintSet::from_pairs([(1, 2.0), (1, 2.0)]).unwrap().len(), 1);
        let c = DofConstraintSet::from_pairs([(7, 0.0)]).unwrap();
        assert!(apply_dirichlet(&tridiag(3), &[0.0; 3], &c).is_err());
    }
}
