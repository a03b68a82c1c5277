//! Exact integer and rational matrices.
//!
//! All arithmetic is arbitrary precision: gluing-matrix products and
//! normal-form intermediates overflow fixed-width types, and the subgroup
//! indices computed downstream are load-bearing. No floating point anywhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Dense row-major matrix over the integers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        IntMatrix { rows, cols, data }
    }

    /// Builds from row slices of machine integers. Panics on ragged input.
    pub fn from_rows_i64(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| BigInt::from(rows[i][j]))
    }

    pub fn from_row_vecs(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.into_iter().flatten().collect();
        IntMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        Self::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = BigInt::zero();
            for k in 0..self.cols {
                acc += self.get(r, k) * other.get(k, c);
            }
            acc
        })
    }

    /// Matrix-vector product, the vector as a column.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = BigInt::zero();
                for k in 0..self.cols {
                    acc += self.get(r, k) * &v[k];
                }
                acc
            })
            .collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.data.clone();
        let at = |m: &Vec<BigInt>, r: usize, c: usize| m[r * n + c].clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if at(&m, k, k).is_zero() {
                match (k + 1..n).find(|&r| !at(&m, r, k).is_zero()) {
                    Some(r) => {
                        for c in 0..n {
                            m.swap(k * n + c, r * n + c);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (at(&m, k, k) * at(&m, i, j) - at(&m, i, k) * at(&m, k, j)) / &prev;
                    m[i * n + j] = v;
                }
                m[i * n + k] = BigInt::zero();
            }
            prev = at(&m, k, k);
        }
        sign * at(&m, n - 1, n - 1)
    }

    /// Exact inverse of a unimodular matrix; `None` when |det| != 1.
    pub fn inverse_unimodular(&self) -> Option<IntMatrix> {
        assert!(self.is_square());
        let d = self.det();
        if !d.abs().is_one() {
            return None;
        }
        let n = self.rows;
        // adjugate over the integers, divided by det = +-1
        let adj = Self::from_fn(n, n, |r, c| {
            // cofactor C_{c,r}
            let minor = self.minor(c, r);
            let cof = minor.det();
            if (c + r) % 2 == 0 {
                cof
            } else {
                -cof
            }
        });
        Some(Self::from_fn(n, n, |r, c| adj.get(r, c) / &d))
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> IntMatrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != skip_r).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != skip_c).collect();
        Self::from_fn(rows.len(), cols.len(), |r, c| {
            self.get(rows[r], cols[c]).clone()
        })
    }

    pub fn neg(&self) -> IntMatrix {
        Self::from_fn(self.rows, self.cols, |r, c| -self.get(r, c))
    }

    pub fn max_abs(&self) -> BigInt {
        self.data
            .iter()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(
                f,
                "  [{}]",
                self.row(r)
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            )?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = (0..self.rows)
            .map(|r| {
                format!(
                    "[{}]",
                    self.row(r)
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        write!(f, "[{}]", entries.join(","))
    }
}

/// Dense row-major matrix over the rationals; entries stay in lowest terms
/// with positive denominator (the `BigRational` canonical form).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> BigRational,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        RatMatrix { rows, cols, data }
    }

    pub fn from_int(m: &IntMatrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |r, c| {
            BigRational::from(m.get(r, c).clone())
        })
    }

    pub fn from_row_vecs(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.into_iter().flatten().collect();
        RatMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = BigRational::zero();
                for k in 0..self.cols {
                    acc += self.get(r, k) * &v[k];
                }
                acc
            })
            .collect()
    }

    /// Reduced row echelon form; returns the pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            for c in 0..self.cols {
                let a = self.get(row, c).clone();
                let b = self.get(p, c).clone();
                self.set(row, c, b);
                self.set(p, c, a);
            }
            let inv = self.get(row, col).clone();
            for c in col..self.cols {
                let v = self.get(row, c) / &inv;
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r != row && !self.get(r, col).is_zero() {
                    let factor = self.get(r, col).clone();
                    for c in col..self.cols {
                        let v = self.get(r, c) - &factor * self.get(row, c);
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }
}

/// Exact basis of the right null space { v : m v = 0 } over the rationals.
///
/// Returns one basis vector per free column of the reduced echelon form, so
/// the count equals `cols - rank`; empty exactly when the matrix is injective.
pub fn rat_kernel(m: &RatMatrix) -> Vec<Vec<BigRational>> {
    let mut e = m.clone();
    let pivots = e.rref();
    let pivot_of_col: Vec<Option<usize>> = {
        let mut v = vec![None; m.cols()];
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = Some(i);
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..m.cols() {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut vec = vec![BigRational::zero(); m.cols()];
        vec[free] = BigRational::one();
        for (&pc, r) in pivots.iter().zip(0..) {
            vec[pc] = -e.get(r, free).clone();
        }
        basis.push(vec);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rm(rows: &[Vec<i64>]) -> RatMatrix {
        RatMatrix::from_int(&IntMatrix::from_rows_i64(rows))
    }

    #[test]
    fn det_small() {
        let m = IntMatrix::from_rows_i64(&[vec![1, 1], vec![1, -1]]);
        assert_eq!(m.det(), BigInt::from(-2));
        let flip = IntMatrix::from_rows_i64(&[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]);
        assert_eq!(flip.det(), BigInt::from(-1));
        assert_eq!(IntMatrix::identity(3).det(), BigInt::one());
    }

    #[test]
    fn inverse_unimodular_roundtrip() {
        let m = IntMatrix::from_rows_i64(&[vec![1, 2, 0], vec![0, 1, 0], vec![0, 0, -1]]);
        let inv = m.inverse_unimodular().unwrap();
        assert_eq!(
            inv,
            IntMatrix::from_rows_i64(&[vec![1, -2, 0], vec![0, 1, 0], vec![0, 0, -1]])
        );
        assert_eq!(m.mul(&inv), IntMatrix::identity(3));
        let singular = IntMatrix::from_rows_i64(&[vec![2, 0], vec![0, 1]]);
        assert!(singular.inverse_unimodular().is_none());
    }

    #[test]
    fn kernel_identity_is_empty() {
        assert!(rat_kernel(&rm(&[vec![1, 0], vec![0, 1]])).is_empty());
    }

    #[test]
    fn kernel_zero_matrix_is_standard_basis() {
        let k = rat_kernel(&rm(&[vec![0, 0], vec![0, 0]]));
        assert_eq!(k.len(), 2);
        assert!(k[0][0].is_one() && k[0][1].is_zero());
        assert!(k[1][0].is_zero() && k[1][1].is_one());
    }

    #[test]
    fn kernel_of_rank_one() {
        let k = rat_kernel(&rm(&[vec![1, 1], vec![1, 1]]));
        assert_eq!(k.len(), 1);
        // spans (1, -1)
        assert_eq!(k[0][0], -k[0][1].clone());
        assert!(!k[0][0].is_zero());
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = rm(&[vec![2, 3, 5], vec![1, 0, -1]]);
        for v in rat_kernel(&m) {
            assert!(m.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
        assert_eq!(rat_kernel(&m).len(), 3 - m.rank());
    }
}
