//! Compressed sparse row storage for layer weights.
//!
//! The networks built by this crate are block structured and overwhelmingly
//! zero, so weights are kept in CSR form. Exact zeros are never stored, which
//! makes `nnz` the structural nonzero count.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            row_ptr: vec![0; rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that end up zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, v) in &triplets {
            if r >= rows || c >= cols {
                return Err(Error::Shape(format!(
                    "entry ({r}, {c}) outside a {rows}x{cols} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::Shape(format!("non-finite entry at ({r}, {c})")));
            }
        }
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut i = 0;
        while i < triplets.len() {
            let (r, c, mut v) = triplets[i];
            i += 1;
            while i < triplets.len() && triplets[i].0 == r && triplets[i].1 == c {
                v += triplets[i].2;
                i += 1;
            }
            if v != 0.0 {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Builds a matrix from dense rows. `cols` is needed when there are no rows.
    pub fn from_dense(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Shape(format!("non-finite entry at ({r}, {c})")));
                }
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            rows: rows.len(),
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    /// `out = self * x + bias`.
    pub fn affine_into(&self, x: &[f64], bias: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.cols);
        out.clear();
        for (span, b) in self.row_ptr.windows(2).zip(bias) {
            let mut acc = 0.0;
            for k in span[0]..span[1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            out.push(acc + b);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows);
        self.affine_into(x, &vec![0.0; self.rows], &mut out);
        out
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let n = other.cols;
        let mut acc = vec![0.0; n];
        let mut touched = vec![false; n];
        let mut marks: Vec<usize> = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.rows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        marks.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            marks.sort_unstable();
            for &c in &marks {
                if acc[c] != 0.0 {
                    col_idx.push(c);
                    values.push(acc[c]);
                }
                acc[c] = 0.0;
                touched[c] = false;
            }
            marks.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            rows: self.rows,
            cols: n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(parts: &[&SparseMatrix]) -> Result<SparseMatrix> {
        let cols = parts.first().map_or(0, |m| m.cols);
        let mut out = SparseMatrix::zeros(0, cols);
        for m in parts {
            if m.cols != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: m.cols,
                });
            }
            let base = out.values.len();
            out.row_ptr.extend(m.row_ptr[1..].iter().map(|p| p + base));
            out.col_idx.extend_from_slice(&m.col_idx);
            out.values.extend_from_slice(&m.values);
            out.rows += m.rows;
        }
        Ok(out)
    }

    /// Block diagonal matrix `diag(parts[0], parts[1], ...)`.
    pub fn block_diag(parts: &[&SparseMatrix]) -> SparseMatrix {
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = SparseMatrix::zeros(0, cols);
        let mut col_off = 0;
        for m in parts {
            let base = out.values.len();
            out.row_ptr.extend(m.row_ptr[1..].iter().map(|p| p + base));
            out.col_idx.extend(m.col_idx.iter().map(|c| c + col_off));
            out.values.extend_from_slice(&m.values);
            out.rows += m.rows;
            col_off += m.cols;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(2, 3, vec![(0, 1, 1.0), (0, 1, -1.0), (1, 2, 2.0)])
            .unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 2), 2.0);
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn matmul_matches_dense() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, -1.0]], 2).unwrap();
        let b = SparseMatrix::from_dense(&[vec![3.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]], 3).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(
            c.to_dense(),
            vec![vec![5.0, 2.0, 1.0], vec![-1.0, -1.0, 0.0]]
        );
    }

    #[test]
    fn stacking() {
        let a = SparseMatrix::identity(2);
        let b = SparseMatrix::from_dense(&[vec![4.0]], 1).unwrap();
        let d = SparseMatrix::block_diag(&[&a, &b]);
        assert_eq!(d.rows(), 3);
        assert_eq!(d.cols(), 3);
        assert_eq!(d.get(2, 2), 4.0);
        let v = SparseMatrix::vstack(&[&a, &a]).unwrap();
        assert_eq!(v.rows(), 4);
        assert_eq!(v.get(3, 1), 1.0);
        assert!(SparseMatrix::vstack(&[&a, &b]).is_err());
    }

    #[test]
    fn empty_rows() {
        let m = SparseMatrix::from_dense(&[], 3).unwrap();
        assert_eq!(m.rows(), 0);
        assert_eq!(m.cols(), 3);
    }
}
