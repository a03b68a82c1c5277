//! Test-side oracles, independent of the library's lattice machinery.
//!
//! Membership here runs over i128 with naive Euclidean row elimination and
//! exact back-substitution, a deliberately different path from the
//! production canonical-HNF code it is used to check.

/// Row-echelon form by plain Euclidean elimination; rows remain a basis of
/// the integer row span (only invertible row operations are used).
pub fn echelon(mut rows: Vec<Vec<i128>>) -> Vec<Vec<i128>> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut top = 0;
    for col in 0..cols {
        loop {
            let mut best: Option<usize> = None;
            for r in top..rows.len() {
                if rows[r][col] != 0 {
                    best = match best {
                        Some(b) if rows[b][col].abs() <= rows[r][col].abs() => Some(b),
                        _ => Some(r),
                    };
                }
            }
            let Some(b) = best else { break };
            rows.swap(top, b);
            let mut more = false;
            for r in top + 1..rows.len() {
                if rows[r][col] != 0 {
                    let q = rows[r][col].div_euclid(rows[top][col]);
                    for c in 0..cols {
                        rows[r][c] -= q * rows[top][c];
                    }
                    if rows[r][col] != 0 {
                        more = true;
                    }
                }
            }
            if !more {
                break;
            }
        }
        if top < rows.len() && rows[top][col] != 0 {
            top += 1;
        }
    }
    rows.truncate(top);
    rows
}

/// Exact membership of `v` in the row span of an echelon basis: peel off
/// pivots top-down; every quotient must be an exact integer.
pub fn member(echelon_rows: &[Vec<i128>], v: &[i128]) -> bool {
    let mut rest = v.to_vec();
    for row in echelon_rows {
        let p = row.iter().position(|&x| x != 0).expect("echelon row");
        if rest[p] % row[p] != 0 {
            return false;
        }
        let q = rest[p] / row[p];
        for c in 0..rest.len() {
            rest[c] -= q * row[c];
        }
    }
    rest.iter().all(|&x| x == 0)
}

/// Membership of an integer point in the rational row span (the saturation
/// oracle: v lies in the saturation exactly when some positive multiple of
/// v lies in the lattice, i.e. v is in the span over the rationals). The
/// check is exact via cross-multiplied elimination, no fractions needed.
pub fn member_rational_span(echelon_rows: &[Vec<i128>], v: &[i128]) -> bool {
    let mut rest = v.to_vec();
    for row in echelon_rows {
        let p = row.iter().position(|&x| x != 0).expect("echelon row");
        if rest[p] != 0 {
            let (a, b) = (row[p], rest[p]);
            for c in 0..rest.len() {
                rest[c] = a * rest[c] - b * row[c];
            }
        }
    }
    rest.iter().all(|&x| x == 0)
}

/// All points of the cube [-bound, bound]^3 satisfying `pred`.
pub fn box_points(bound: i128, mut pred: impl FnMut(&[i128; 3]) -> bool) -> Vec<[i128; 3]> {
    let mut out = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            for z in -bound..=bound {
                let v = [x, y, z];
                if pred(&v) {
                    out.push(v);
                }
            }
        }
    }
    out
}

use gm_core::lattice::Lattice;
use gm_core::rng::Rng;
use num_bigint::BigInt;

pub fn lattice_to_i128_rows(l: &Lattice) -> Vec<Vec<i128>> {
    l.basis_rows()
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| i128::try_from(x.clone()).expect("oracle-sized entry"))
                .collect()
        })
        .collect()
}

pub fn i128_rows_to_lattice(ambient: usize, rows: &[[i128; 3]]) -> Lattice {
    Lattice::from_generators(
        ambient,
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
    )
}

/// Random lattice of rank at most 2 in Z^3 with generator entries in
/// [-bound, bound].
pub fn random_low_rank_lattice(rng: &mut Rng, bound: i64) -> (Lattice, Vec<Vec<i128>>) {
    let nrows = 1 + rng.below(2) as usize;
    let gens: Vec<Vec<i128>> = (0..nrows)
        .map(|_| (0..3).map(|_| rng.range_i64(-bound, bound) as i128).collect())
        .collect();
    let l = Lattice::from_generators(
        3,
        gens.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect(),
    );
    (l, gens)
}
