//! Dense exact linear algebra over the rationals.
//!
//! Just enough for the structural checks elsewhere in the crate: row
//! reduction, rank, and a kernel basis, all with a fixed deterministic
//! pivot rule (leftmost nonzero column, topmost usable row) so results
//! are reproducible bit for bit. The matrices that show up here are
//! small and extremely sparse, so a dense representation keeps the code
//! short without hurting.

use num_traits::{One, Zero};

use crate::number::Q;

/// A dense rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<Q>>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![vec![Q::zero(); cols]; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.data[i][i] = Q::one();
        }
        m
    }

    pub fn from_rows(data: Vec<Vec<Q>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        assert!(data.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<Q>]) -> Self {
        let rows = cols.first().map_or(0, Vec::len);
        let mut m = Matrix::zero(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "ragged columns");
            for (i, v) in col.iter().enumerate() {
                m.data[i][j] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &Q {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.data[i][j] = v;
    }

    /// Reduced row echelon form and the list of pivot columns.
    ///
    /// Pivots are chosen deterministically: columns are scanned left to
    /// right, and within a column the first not-yet-used row with a
    /// nonzero entry wins.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next_row = 0;
        for col in 0..m.cols {
            if next_row == m.rows {
                break;
            }
            let Some(pivot_row) = (next_row..m.rows).find(|&r| !m.data[r][col].is_zero()) else {
                continue;
            };
            m.data.swap(next_row, pivot_row);
            let inv = Q::one() / m.data[next_row][col].clone();
            for v in m.data[next_row].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            for r in 0..m.rows {
                if r == next_row || m.data[r][col].is_zero() {
                    continue;
                }
                let factor = m.data[r][col].clone();
                for c in col..m.cols {
                    let delta = &factor * &m.data[next_row][c];
                    m.data[r][c] -= delta;
                }
            }
            pivots.push(col);
            next_row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the null space, one vector per free column.
    ///
    /// The vector for free column `j` has a 1 in position `j`, the
    /// negated reduced entries in the pivot positions, and zeros
    /// elsewhere. Deterministic because [`Matrix::rref`] is.
    pub fn kernel_basis(&self) -> Vec<Vec<Q>> {
        let (reduced, pivots) = self.rref();
        let mut basis = Vec::new();
        let mut pivot_iter = pivots.iter().copied().peekable();
        let mut free_cols = Vec::new();
        for j in 0..self.cols {
            if pivot_iter.peek() == Some(&j) {
                pivot_iter.next();
            } else {
                free_cols.push(j);
            }
        }
        for &j in &free_cols {
            let mut v = vec![Q::zero(); self.cols];
            v[j] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -reduced.data[row][j].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn multiply(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Matrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    if other.data[k][j].is_zero() {
                        continue;
                    }
                    let delta = &self.data[i][k] * &other.data[k][j];
                    out.data[i][j] += delta;
                }
            }
        }
        out
    }

    /// Append the rows of `other` below `self`.
    pub fn stack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "column counts must agree");
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Append the columns of `other` to the right of `self`.
    pub fn augment(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "row counts must agree");
        let mut m = Matrix::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.data[i][j] = self.data[i][j].clone();
            }
            for j in 0..other.cols {
                m.data[i][self.cols + j] = other.data[i][j].clone();
            }
        }
        m
    }
}

/// Does `v` lie in the column span of `m`?
pub fn in_column_span(m: &Matrix, v: &[Q]) -> bool {
    assert_eq!(m.rows(), v.len());
    let augmented = m.augment(&Matrix::from_columns(&[v.to_vec()]));
    augmented.rank() == m.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::q;

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| q(v)).collect())
                .collect(),
        )
    }

    #[test]
    fn rref_of_identity_is_identity() {
        let id = Matrix::identity(3);
        let (r, pivots) = id.rref();
        assert_eq!(r, id);
        assert_eq!(pivots, vec![0, 1, 2]);
        assert!(id.kernel_basis().is_empty());
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let m = mat(&[&[1, 1], &[2, 2]]);
        assert_eq!(m.rank(), 1);
        let kernel = m.kernel_basis();
        assert_eq!(kernel, vec![vec![q(-1), q(1)]]);
        // The reported kernel vector spans the same line as (1, -1).
        assert!(in_column_span(
            &Matrix::from_columns(&[kernel[0].clone()]),
            &[q(1), q(-1)]
        ));
    }

    #[test]
    fn kernel_of_zero_matrix_is_everything() {
        let m = Matrix::zero(2, 3);
        let kernel = m.kernel_basis();
        assert_eq!(kernel.len(), 3);
        for (i, v) in kernel.iter().enumerate() {
            let mut expected = vec![q(0); 3];
            expected[i] = q(1);
            assert_eq!(v, &expected);
        }
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let m = mat(&[&[2, 4, 6, 1], &[1, 2, 3, 0], &[0, 0, 0, 1]]);
        for v in m.kernel_basis() {
            for i in 0..m.rows() {
                let dot: Q = (0..m.cols()).map(|j| m.entry(i, j) * &v[j]).sum();
                assert!(dot.is_zero());
            }
        }
        assert_eq!(m.rank() + m.kernel_basis().len(), m.cols());
    }

    #[test]
    fn rational_pivoting_stays_exact() {
        let m = mat(&[&[2, 1], &[1, 3]]);
        let (r, pivots) = m.rref();
        assert_eq!(r, Matrix::identity(2));
        assert_eq!(pivots, vec![0, 1]);
    }

    #[test]
    fn multiply_and_stack_shapes() {
        let a = mat(&[&[1, 2], &[3, 4]]);
        let b = mat(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.multiply(&b), mat(&[&[2, 1], &[4, 3]]));
        let stacked = a.stack(&b);
        assert_eq!(stacked.rows(), 4);
        assert_eq!(stacked.rank(), 2);
    }
}
