//! Exact matrix rank.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::scalars::{Field, Rational};

/// Rank by Gaussian elimination with exact field arithmetic.
pub fn gaussian_rank<S: Field>(mut rows: Vec<Vec<S>>) -> usize {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..n {
        let Some(p) = (rank..m).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = rows[rank][c].inv().expect("nonzero pivot");
        let pivot: Vec<S> = rows[rank].iter().map(|v| v.mul(&inv)).collect();
        for r in rank + 1..m {
            if rows[r][c].is_zero() {
                continue;
            }
            let f = rows[r][c].clone();
            for j in c..n {
                if !pivot[j].is_zero() {
                    rows[r][j] = rows[r][j].sub(&f.mul(&pivot[j]));
                }
            }
        }
        rows[rank] = pivot;
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank
}

/// Rank of a rational matrix by fraction-free (Bareiss) elimination on the
/// integer matrix obtained by clearing each row's denominators.
pub fn bareiss_rank_rational(rows: &[Vec<Rational>]) -> usize {
    let int_rows: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            row.iter().map(|v| v.numer() * (&lcm / v.denom())).collect()
        })
        .collect();
    bareiss_rank(int_rows)
}

/// Fraction-free elimination over Z. Every intermediate entry is a minor of
/// the input, so each division by the previous pivot is exact.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..n {
        let Some(p) = (rank..m).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        let pivot = a[rank][c].clone();
        for r in rank + 1..m {
            let f = a[r][c].clone();
            for j in c + 1..n {
                let num = &a[r][j] * &pivot - &f * &a[rank][j];
                debug_assert!((&num % &prev).is_zero(), "Bareiss division not exact");
                a[r][j] = num / &prev;
            }
            a[r][c] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
        if rank == m {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::CyclotomicField;

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect()
    }

    #[test]
    fn ranks_agree() {
        let cases: Vec<(Vec<Vec<Rational>>, usize)> = vec![
            (q(&[&[1, 2], &[2, 4]]), 1),
            (q(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]), 3),
            (q(&[&[0, 0], &[0, 0]]), 0),
            (q(&[&[0, 1, 2], &[0, 2, 4], &[1, 0, 0]]), 2),
            (q(&[&[2, 4, 6, 8], &[1, 3, 5, 7], &[3, 7, 11, 15]]), 2),
        ];
        for (m, r) in cases {
            assert_eq!(gaussian_rank(m.clone()), r);
            assert_eq!(bareiss_rank_rational(&m), r);
        }
    }

    #[test]
    fn rational_entries_cleared() {
        let half = Rational::new(1, 2).unwrap();
        let third = Rational::new(1, 3).unwrap();
        let m = vec![vec![half.clone(), third.clone()], vec![Rational::from(3), Rational::from(2)]];
        assert_eq!(bareiss_rank_rational(&m), 1);
    }

    #[test]
    fn cyclotomic_rank() {
        // [[1, ζ], [ζ², ζ³]] has rank 1 over Q(ζ_5).
        let f = CyclotomicField::new(5).unwrap();
        let m = vec![vec![f.one(), f.zeta_pow(1)], vec![f.zeta_pow(2), f.zeta_pow(3)]];
        assert_eq!(gaussian_rank(m), 1);
        let m = vec![vec![f.one(), f.zeta_pow(1)], vec![f.zeta_pow(1), f.one()]];
        assert_eq!(gaussian_rank(m), 2);
    }
}
