//! Integer lattices in canonical Hermite normal form.
//!
//! A `Lattice` is a subgroup of Z^n stored as the unique row-style Hermite
//! normal form of its generators: pivot entries positive, entries above each
//! pivot reduced into `[0, pivot)`, zero rows dropped. Canonical form makes
//! lattice equality a plain comparison of basis matrices, which the
//! parallelism classes downstream rely on.

use crate::matrix::IntMatrix;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("ambient ranks differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("basis vector {0:?} of the claimed sublattice is not a member of the superlattice")]
    NotASubgroup(Vec<BigInt>),
}

/// Subgroup of Z^n with a canonical HNF row basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Lattice {
    ambient: usize,
    /// rank x ambient, canonical HNF, no zero rows.
    basis: IntMatrix,
}

/// Index of a sublattice in a superlattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LatticeIndex {
    Finite(BigUint),
    /// The ranks differ, so the quotient is infinite.
    Infinite,
}

impl LatticeIndex {
    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            LatticeIndex::Finite(n) => Some(n),
            LatticeIndex::Infinite => None,
        }
    }
}

/// Row-style Hermite normal form of an integer row span.
///
/// Idempotent; the zero matrix yields the rank-0 lattice.
pub fn hnf(generators: &IntMatrix) -> Lattice {
    let ambient = generators.cols();
    let mut rows = generators.row_vecs();
    let rank = hnf_in_place(&mut rows, ambient);
    rows.truncate(rank);
    Lattice {
        ambient,
        basis: if rank == 0 {
            IntMatrix::zero(0, ambient)
        } else {
            IntMatrix::from_row_vecs(rows)
        },
    }
}

/// Reduces `rows` to canonical HNF, returning the rank. Rows beyond the rank
/// are zero afterwards.
fn hnf_in_place(rows: &mut [Vec<BigInt>], ambient: usize) -> usize {
    let mut pivot_row = 0;
    for col in 0..ambient {
        // Euclidean elimination below the pivot position.
        loop {
            let mut best: Option<usize> = None;
            for r in pivot_row..rows.len() {
                if !rows[r][col].is_zero() {
                    best = match best {
                        Some(b) if rows[b][col].abs() <= rows[r][col].abs() => Some(b),
                        _ => Some(r),
                    };
                }
            }
            let Some(b) = best else { break };
            rows.swap(pivot_row, b);
            let mut others = false;
            for r in pivot_row + 1..rows.len() {
                if rows[r][col].is_zero() {
                    continue;
                }
                let q = rows[r][col].div_floor(&rows[pivot_row][col]);
                for c in 0..ambient {
                    let sub = &q * &rows[pivot_row][c];
                    rows[r][c] -= sub;
                }
                if !rows[r][col].is_zero() {
                    others = true;
                }
            }
            if !others {
                break;
            }
        }
        if pivot_row < rows.len() && !rows[pivot_row][col].is_zero() {
            if rows[pivot_row][col].is_negative() {
                for c in 0..ambient {
                    rows[pivot_row][c] = -rows[pivot_row][c].clone();
                }
            }
            // Reduce the entries above the pivot into [0, pivot).
            for r in 0..pivot_row {
                let q = rows[r][col].div_floor(&rows[pivot_row][col]);
                if q.is_zero() {
                    continue;
                }
                for c in 0..ambient {
                    let sub = &q * &rows[pivot_row][c];
                    rows[r][c] -= sub;
                }
            }
            pivot_row += 1;
        }
    }
    pivot_row
}

impl Lattice {
    pub fn zero(ambient: usize) -> Self {
        Lattice {
            ambient,
            basis: IntMatrix::zero(0, ambient),
        }
    }

    /// The full integer lattice Z^n.
    pub fn full(ambient: usize) -> Self {
        Lattice {
            ambient,
            basis: IntMatrix::identity(ambient),
        }
    }

    pub fn from_rows_i64(ambient: usize, rows: &[Vec<i64>]) -> Self {
        if rows.is_empty() {
            return Self::zero(ambient);
        }
        assert!(rows.iter().all(|r| r.len() == ambient));
        hnf(&IntMatrix::from_rows_i64(rows))
    }

    pub fn from_generators(ambient: usize, rows: Vec<Vec<BigInt>>) -> Self {
        if rows.is_empty() {
            return Self::zero(ambient);
        }
        assert!(rows.iter().all(|r| r.len() == ambient));
        hnf(&IntMatrix::from_row_vecs(rows))
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn basis_rows(&self) -> Vec<Vec<BigInt>> {
        self.basis.row_vecs()
    }

    /// Coordinates of `v` in the HNF basis, when `v` lies in the lattice.
    ///
    /// Solves the triangular system exactly by top-down back-substitution,
    /// so the same routine backs both membership and index computations.
    pub fn coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.ambient, "ambient mismatch");
        let mut rest = v.to_vec();
        let mut coords = Vec::with_capacity(self.rank());
        for r in 0..self.rank() {
            let pcol = self.pivot_col(r);
            let pivot = self.basis.get(r, pcol);
            let (q, rem) = rest[pcol].div_rem(pivot);
            if !rem.is_zero() {
                return None;
            }
            for c in 0..self.ambient {
                let sub = &q * self.basis.get(r, c);
                rest[c] -= sub;
            }
            coords.push(q);
        }
        if rest.iter().all(|x| x.is_zero()) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, sub: &Lattice) -> bool {
        sub.basis_rows().iter().all(|r| self.contains(r))
    }

    fn pivot_col(&self, row: usize) -> usize {
        (0..self.ambient)
            .find(|&c| !self.basis.get(row, c).is_zero())
            .expect("HNF row has a pivot")
    }

    /// Deterministic total order: by rank, then basis entries row-major.
    pub fn lex_cmp(&self, other: &Lattice) -> Ordering {
        self.rank().cmp(&other.rank()).then_with(|| {
            for r in 0..self.rank() {
                for c in 0..self.ambient.min(other.ambient) {
                    match self.basis.get(r, c).cmp(other.basis.get(r, c)) {
                        Ordering::Equal => continue,
                        ord => return ord,
                    }
                }
            }
            Ordering::Equal
        })
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice(rank {} in Z^{}) {}", self.rank(), self.ambient, self.basis)
    }
}

/// Right kernel { x in Z^n : m x = 0 } of an integer matrix.
///
/// Computed as the rows of HNF([m^T | I]) whose leading block vanished; the
/// result is saturated by construction.
pub fn kernel(m: &IntMatrix) -> Lattice {
    let t = m.transpose(); // n x r
    let n = t.rows();
    let r = t.cols();
    let mut rows: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row = t.row(i).to_vec();
            row.extend((0..n).map(|j| {
                if i == j {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            }));
            row
        })
        .collect();
    let rank = hnf_in_place(&mut rows, r + n);
    rows.truncate(rank);
    let kernel_rows: Vec<Vec<BigInt>> = rows
        .into_iter()
        .filter(|row| row[..r].iter().all(|x| x.is_zero()))
        .map(|row| row[r..].to_vec())
        .collect();
    Lattice::from_generators(n, kernel_rows)
}

/// The unique maximal subgroup of the same rank containing `l`.
///
/// Double annihilator: the integer kernel of the kernel of the basis is the
/// set of integer points in the rational row span.
pub fn saturate(l: &Lattice) -> Lattice {
    if l.rank() == 0 {
        return l.clone();
    }
    // kernel(basis) gives the annihilator { x : B x = 0 }; annihilating
    // once more recovers the integer points of the rational row span.
    let orth = kernel(l.basis());
    if orth.rank() == 0 {
        return Lattice::full(l.ambient_rank());
    }
    kernel(orth.basis())
}

pub fn is_saturated(l: &Lattice) -> bool {
    *l == saturate(l)
}

/// Exact intersection of two lattices with the same ambient rank.
pub fn intersect(a: &Lattice, b: &Lattice) -> Result<Lattice, LatticeError> {
    if a.ambient_rank() != b.ambient_rank() {
        return Err(LatticeError::AmbientMismatch(a.ambient_rank(), b.ambient_rank()));
    }
    let n = a.ambient_rank();
    let (ra, rb) = (a.rank(), b.rank());
    if ra == 0 || rb == 0 {
        return Ok(Lattice::zero(n));
    }
    // x A = y B gives intersection vectors; (x, -y) runs over the left kernel
    // of the stacked basis matrix.
    let mut stacked = a.basis_rows();
    stacked.extend(b.basis_rows());
    let stacked = IntMatrix::from_row_vecs(stacked); // (ra+rb) x n
    let left_kernel = kernel(&stacked.transpose());
    let gens: Vec<Vec<BigInt>> = left_kernel
        .basis_rows()
        .iter()
        .map(|k| {
            let mut v = vec![BigInt::zero(); n];
            for (i, coeff) in k[..ra].iter().enumerate() {
                for c in 0..n {
                    v[c] += coeff * a.basis().get(i, c);
                }
            }
            v
        })
        .collect();
    let result = Lattice::from_generators(n, gens);
    // Intersections of saturated lattices are saturated; anything else is a bug.
    if is_saturated(a) && is_saturated(b) {
        assert!(
            is_saturated(&result),
            "intersection of saturated lattices must be saturated"
        );
    }
    Ok(result)
}

/// Smallest subgroup containing both lattices: HNF of the stacked bases.
pub fn join(a: &Lattice, b: &Lattice) -> Result<Lattice, LatticeError> {
    if a.ambient_rank() != b.ambient_rank() {
        return Err(LatticeError::AmbientMismatch(a.ambient_rank(), b.ambient_rank()));
    }
    let mut rows = a.basis_rows();
    rows.extend(b.basis_rows());
    Ok(Lattice::from_generators(a.ambient_rank(), rows))
}

/// Subgroup index (sup : sub).
///
/// Requires `sub` to be contained in `sup` (membership-checked). Equal ranks
/// give the finite index |det| of the change-of-basis matrix; a rank drop
/// gives `Infinite` rather than an error, since callers legitimately probe
/// mixed-rank pairs.
pub fn index(sub: &Lattice, sup: &Lattice) -> Result<LatticeIndex, LatticeError> {
    if sub.ambient_rank() != sup.ambient_rank() {
        return Err(LatticeError::AmbientMismatch(
            sub.ambient_rank(),
            sup.ambient_rank(),
        ));
    }
    let mut coords = Vec::with_capacity(sub.rank());
    for row in sub.basis_rows() {
        match sup.coordinates(&row) {
            Some(c) => coords.push(c),
            None => return Err(LatticeError::NotASubgroup(row)),
        }
    }
    if sub.rank() < sup.rank() {
        return Ok(LatticeIndex::Infinite);
    }
    let m = IntMatrix::from_row_vecs(coords);
    Ok(LatticeIndex::Finite(
        m.det().abs().to_biguint().expect("abs is non-negative"),
    ))
}

/// Greatest common divisor of the absolute values of the entries; 0 only for
/// the zero vector.
pub fn content(v: &[BigInt]) -> BigUint {
    v.iter()
        .fold(BigInt::zero(), |acc, x| acc.gcd(x))
        .to_biguint()
        .expect("gcd is non-negative")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(ambient: usize, rows: &[Vec<i64>]) -> Lattice {
        Lattice::from_rows_i64(ambient, rows)
    }

    #[test]
    fn hnf_single_generator_is_canonical() {
        let l = lat(3, &[vec![0, 2, 0]]);
        assert_eq!(l.rank(), 1);
        assert_eq!(l.basis_rows(), vec![vec![0.into(), 2.into(), 0.into()]]);
    }

    #[test]
    fn hnf_reduces_to_det_two_basis() {
        // Hand column reduction: (2,1,0)-(0,1,0) = (2,0,0), so the canonical
        // basis is {(2,0,0),(0,1,0),(0,0,1)} with determinant 2.
        let l = lat(3, &[vec![2, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(l.rank(), 3);
        assert_eq!(
            l.basis_rows(),
            vec![
                vec![2.into(), 0.into(), 0.into()],
                vec![0.into(), 1.into(), 0.into()],
                vec![0.into(), 0.into(), 1.into()],
            ]
        );
        assert_eq!(l.basis().det(), BigInt::from(2));
    }

    #[test]
    fn hnf_identity_is_full_lattice() {
        let l = lat(3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(l, Lattice::full(3));
    }

    #[test]
    fn hnf_idempotent() {
        let l = lat(3, &[vec![3, 1, 4], vec![1, 5, 9], vec![2, 6, 5]]);
        assert_eq!(hnf(l.basis()), l);
    }

    #[test]
    fn saturate_divides_content() {
        let l = lat(3, &[vec![0, 2, 0]]);
        assert_eq!(saturate(&l), lat(3, &[vec![0, 1, 0]]));
    }

    #[test]
    fn saturate_fixed_point_on_saturated() {
        let l = lat(3, &[vec![1, 0, 0], vec![0, 1, 0]]);
        assert_eq!(saturate(&l), l);
        assert_eq!(saturate(&saturate(&l)), saturate(&l));
    }

    #[test]
    fn saturate_plane_sublattice() {
        let l = lat(3, &[vec![2, 0, 0], vec![0, 2, 0], vec![1, 1, 0]]);
        assert_eq!(saturate(&l), lat(3, &[vec![1, 0, 0], vec![0, 1, 0]]));
    }

    #[test]
    fn intersect_self() {
        let a = lat(3, &[vec![1, 2, 3], vec![0, 4, 5]]);
        assert_eq!(intersect(&a, &a).unwrap(), a);
    }

    #[test]
    fn intersect_planes() {
        let a = lat(3, &[vec![0, 1, 0], vec![0, 0, 1]]);
        let b = lat(3, &[vec![0, 1, 0], vec![1, 1, 0]]);
        assert_eq!(intersect(&a, &b).unwrap(), lat(3, &[vec![0, 1, 0]]));
        let c = lat(3, &[vec![2, 1, 0], vec![0, 0, -1]]);
        assert_eq!(intersect(&a, &c).unwrap(), lat(3, &[vec![0, 0, 1]]));
    }

    #[test]
    fn join_examples() {
        let a = lat(3, &[vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(join(&a, &a).unwrap(), a);
        let c = lat(3, &[vec![2, 1, 0], vec![0, 0, -1]]);
        let j = join(&a, &c).unwrap();
        assert_eq!(
            index(&j, &Lattice::full(3)).unwrap(),
            LatticeIndex::Finite(2u32.into())
        );
        let p = lat(2, &[vec![1, 1]]);
        let q = lat(2, &[vec![1, -1]]);
        let pq = join(&p, &q).unwrap();
        assert_eq!(pq, lat(2, &[vec![1, 1], vec![1, -1]]));
        assert_eq!(
            index(&pq, &Lattice::full(2)).unwrap(),
            LatticeIndex::Finite(2u32.into())
        );
    }

    #[test]
    fn index_examples() {
        let d = lat(3, &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 2]]);
        assert_eq!(
            index(&d, &Lattice::full(3)).unwrap(),
            LatticeIndex::Finite(2u32.into())
        );
        let s = lat(2, &[vec![1, 1], vec![1, -1]]);
        assert_eq!(
            index(&s, &Lattice::full(2)).unwrap(),
            LatticeIndex::Finite(2u32.into())
        );
        assert_eq!(index(&s, &s).unwrap(), LatticeIndex::Finite(1u32.into()));
    }

    #[test]
    fn index_rejects_non_subgroup() {
        let a = lat(2, &[vec![1, 1]]);
        let b = lat(2, &[vec![2, 0]]);
        assert!(matches!(
            index(&a, &b),
            Err(LatticeError::NotASubgroup(_))
        ));
    }

    #[test]
    fn index_infinite_on_rank_drop() {
        let a = lat(3, &[vec![0, 1, 0]]);
        assert_eq!(index(&a, &Lattice::full(3)).unwrap(), LatticeIndex::Infinite);
    }

    #[test]
    fn content_examples() {
        assert_eq!(content(&[0.into(), 1.into()]), BigUint::from(1u32));
        assert_eq!(content(&[2.into(), 4.into()]), BigUint::from(2u32));
        assert_eq!(content(&[0.into(), 0.into()]), BigUint::from(0u32));
    }

    #[test]
    fn kernel_is_saturated_annihilator() {
        let m = IntMatrix::from_rows_i64(&[vec![2, 4, 6]]);
        let k = kernel(&m);
        assert_eq!(k.rank(), 2);
        for row in k.basis_rows() {
            let s: BigInt = (0..3).map(|i| m.get(0, i) * &row[i]).sum();
            assert!(s.is_zero());
        }
        assert!(is_saturated(&k));
    }
}
