use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix. Vertex and tuple features are matrices with
/// one row per vertex or tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

pub type FeatureMatrix = Matrix;

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::contract("ragged rows"));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &w) in out.iter_mut().zip(self.row(i)) {
                *o += xi * w;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::contract(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = other.vec_mul(self.row(i));
            out.row_mut(i).copy_from_slice(&row);
        }
        Ok(out)
    }

    /// Rows `start..end` as a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Matrix {
        Matrix {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    pub fn vstack(blocks: &[Matrix]) -> Result<Matrix> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::contract("vstack of matrices with different widths"));
        }
        Ok(Matrix {
            rows: blocks.iter().map(|b| b.rows).sum(),
            cols,
            data: blocks.iter().flat_map(|b| b.data.iter().copied()).collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `max |a - b|` over all entries.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::contract("shape mismatch"));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn row_bits(&self, i: usize) -> Vec<u64> {
        self.row(i).iter().map(|x| x.to_bits()).collect()
    }
}

/// `|a - b|_inf <= tol * max(|b|_inf, MIN_POSITIVE)`.
pub fn within_relative(a: &Matrix, b: &Matrix, tol: f64) -> Result<bool> {
    Ok(a.max_abs_diff(b)? <= tol * b.max_abs().max(f64::MIN_POSITIVE))
}

/// Dense row-major `i64` matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [i64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Exact product with overflow checking.
    pub fn checked_matmul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::contract("integer matrix shape mismatch"));
        }
        let overflow = || Error::contract("integer matrix product overflows i64");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a
                        .checked_mul(other.data[l * other.cols + j])
                        .ok_or_else(overflow)?;
                    let slot = &mut out.data[i * other.cols + j];
                    *slot = slot.checked_add(prod).ok_or_else(overflow)?;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.data, vec![2.0, 1.0, 4.0, 3.0]);
        assert_eq!(a.matmul(&Matrix::identity(2)).unwrap(), a);
        assert!(a.matmul(&Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn stacking() {
        let a = Matrix::from_fn(2, 3, |i, j| (i * 3 + j) as f64);
        let s = Matrix::vstack(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(s.rows, 4);
        assert_eq!(s.row_block(2, 4), a);
    }

    #[test]
    fn integer_product_detects_overflow() {
        let a = IntMatrix {
            rows: 1,
            cols: 1,
            data: vec![i64::MAX],
        };
        let two = IntMatrix {
            rows: 1,
            cols: 1,
            data: vec![2],
        };
        assert!(a.checked_matmul(&two).is_err());
        let one = IntMatrix {
            rows: 1,
            cols: 1,
            data: vec![1],
        };
        assert_eq!(a.checked_matmul(&one).unwrap().data, vec![i64::MAX]);
    }

    #[test]
    fn relative_tolerance() {
        let a = Matrix::from_rows(&[vec![1.0, -2.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0 + 1e-12, -2.0]]).unwrap();
        assert!(within_relative(&a, &b, 1e-10).unwrap());
        assert!(!within_relative(&a, &b, 1e-14).unwrap());
    }
}
