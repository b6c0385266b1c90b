//! Dense matrices over GF(q) with exact Gauss-Jordan elimination.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>, // row-major
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![FieldElement::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = FieldElement::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch { expected: cols, found: bad.len() });
        }
        let n = rows.len();
        Ok(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    /// Row i is `(1, a_i, a_i^2, ..., a_i^{n-1})` with n = `nodes.len()`.
    pub fn vandermonde(f: &FieldSpec, nodes: &[FieldElement]) -> Self {
        let n = nodes.len();
        let mut m = Self::zeros(n, n);
        for (i, &a) in nodes.iter().enumerate() {
            for j in 0..n {
                m[(i, j)] = f.pow(a, j as u32);
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

    pub fn row(&self, i: usize) -> &[FieldElement] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `out[j] = self[:, perm[j]]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.cols);
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, &src) in perm.iter().enumerate() {
                out[(i, j)] = self[(i, src)];
            }
        }
        out
    }

    pub fn mul(&self, f: &FieldSpec, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::LengthMismatch { expected: self.cols, found: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] = f.add(out[(i, j)], f.mul(a, rhs[(k, j)]));
                }
            }
        }
        Ok(out)
    }

    /// Rank by forward elimination.
    pub fn rank(&self, f: &FieldSpec) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            let inv = f.inv(m[(rank, col)]).expect("nonzero pivot");
            for r in rank + 1..m.rows {
                let factor = f.mul(m[(r, col)], inv);
                if !factor.is_zero() {
                    m.eliminate(f, r, rank, factor);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Inverse by Gauss-Jordan elimination; `None` if singular.
    pub fn inverse(&self, f: &FieldSpec) -> Option<Matrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let scale = f.inv(a[(col, col)]).expect("nonzero pivot");
            a.scale_row(f, col, scale);
            inv.scale_row(f, col, scale);
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if !factor.is_zero() {
                    a.eliminate(f, r, col, factor);
                    inv.eliminate(f, r, col, factor);
                }
            }
        }
        Some(inv)
    }

    /// Applies this matrix to a list of records: `out[i] = sum_j self[i][j] * records[j]`.
    pub fn apply_records(&self, f: &FieldSpec, records: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
        assert_eq!(records.len(), self.cols);
        let len = records.first().map_or(0, Vec::len);
        (0..self.rows)
            .map(|i| {
                let mut acc = vec![FieldElement::ZERO; len];
                for (j, rec) in records.iter().enumerate() {
                    f.axpy(&mut acc, self[(i, j)], rec);
                }
                acc
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, f: &FieldSpec, r: usize, c: FieldElement) {
        for j in 0..self.cols {
            self[(r, j)] = f.mul(c, self[(r, j)]);
        }
    }

    // row[target] -= factor * row[source]
    fn eliminate(&mut self, f: &FieldSpec, target: usize, source: usize, factor: FieldElement) {
        for j in 0..self.cols {
            let v = f.mul(factor, self[(source, j)]);
            self[(target, j)] = f.sub(self[(target, j)], v);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = FieldElement;

    fn index(&self, (i, j): (usize, usize)) -> &FieldElement {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut FieldElement {
        &mut self.data[i * self.cols + j]
    }
}
