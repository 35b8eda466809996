//! Exact linear solving over rationals via fraction-free elimination.
//!
//! Rows are scaled to integers, reduced with Bareiss pivoting (intermediate
//! entries stay divisible by the previous pivot, keeping bit growth
//! polynomial), and back-substituted per right-hand-side column.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("matrix is singular")]
    Singular,
    #[error("matrix and right-hand sides have mismatched shapes")]
    ShapeMismatch,
}

/// Solve `a * x = rhs` for each right-hand-side column, exactly.
///
/// `a` is square, row-major; `rhs` holds one Vec per column. Returns the
/// solution columns in the same order.
pub fn solve_fraction_free(
    a: &[Vec<Rational>],
    rhs: &[Vec<Rational>],
) -> Result<Vec<Vec<Rational>>, LinAlgError> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) || rhs.iter().any(|col| col.len() != n) {
        return Err(LinAlgError::ShapeMismatch);
    }
    let k = rhs.len();
    if n == 0 {
        return Ok(vec![Vec::new(); k]);
    }

    // Integer augmented matrix: scale each row by the lcm of denominators.
    let width = n + k;
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut scale = BigInt::one();
        for v in a[i].iter().chain(rhs.iter().map(|col| &col[i])) {
            scale = scale.lcm(v.denom());
        }
        let mut row: Vec<BigInt> = Vec::with_capacity(width);
        for v in a[i].iter().chain(rhs.iter().map(|col| &col[i])) {
            row.push(v.numer() * (&scale / v.denom()));
        }
        m.push(row);
    }

    let mut prev = BigInt::one();
    for col in 0..n {
        // Pick the nonzero pivot with the fewest bits to slow coefficient
        // growth; any nonzero entry works for correctness.
        let pivot_row = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].magnitude().bits())
            .ok_or(LinAlgError::Singular)?;
        m.swap(col, pivot_row);
        let pivot = m[col][col].clone();
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r][col].clone();
            for c in 0..width {
                let val = &m[r][c] * &pivot - &factor * &m[col][c];
                let (q, rem) = val.div_rem(&prev);
                debug_assert!(rem.is_zero(), "fraction-free step produced a remainder");
                m[r][c] = q;
            }
        }
        prev = pivot;
    }

    let mut out = vec![Vec::with_capacity(n); k];
    for (j, col) in out.iter_mut().enumerate() {
        for i in 0..n {
            col.push(Rational::new(m[i][n + j].clone(), m[i][i].clone()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use num_traits::Signed;

    fn solve1(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Result<Vec<Rational>, LinAlgError> {
        solve_fraction_free(&a, &[b]).map(|mut cols| cols.pop().unwrap())
    }

    #[test]
    fn solves_two_by_two() {
        let a = vec![vec![rat(2, 1), rat(1, 1)], vec![rat(1, 1), rat(3, 1)]];
        let b = vec![rat(5, 1), rat(10, 1)];
        assert_eq!(solve1(a, b).unwrap(), vec![rat(1, 1), rat(3, 1)]);
    }

    #[test]
    fn handles_fractional_entries() {
        let a = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 4), rat(1, 1)]];
        let b = vec![rat(1, 1), rat(1, 1)];
        let x = solve1(a.clone(), b.clone()).unwrap();
        for i in 0..2 {
            let lhs = &a[i][0] * &x[0] + &a[i][1] * &x[1];
            assert_eq!(lhs, b[i]);
        }
    }

    #[test]
    fn needs_row_swap() {
        let a = vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]];
        let b = vec![rat(7, 1), rat(4, 1)];
        assert_eq!(solve1(a, b).unwrap(), vec![rat(4, 1), rat(7, 1)]);
    }

    #[test]
    fn detects_singular() {
        let a = vec![vec![rat(1, 1), rat(2, 1)], vec![rat(2, 1), rat(4, 1)]];
        let b = vec![rat(1, 1), rat(2, 1)];
        assert_eq!(solve1(a, b), Err(LinAlgError::Singular));
    }

    #[test]
    fn rejects_shape_mismatch() {
        let a = vec![vec![rat(1, 1)], vec![rat(1, 1)]];
        let b = vec![rat(1, 1), rat(1, 1)];
        assert_eq!(solve1(a, b), Err(LinAlgError::ShapeMismatch));
    }

    #[test]
    fn empty_system_is_fine() {
        let out = solve_fraction_free(&[], &[Vec::new(), Vec::new()]).unwrap();
        assert_eq!(out, vec![Vec::<Rational>::new(); 2]);
    }

    #[test]
    fn multiple_right_hand_sides() {
        let a = vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(-1, 1)]];
        let cols = solve_fraction_free(
            &a,
            &[vec![rat(2, 1), rat(0, 1)], vec![rat(4, 1), rat(2, 1)]],
        )
        .unwrap();
        assert_eq!(cols[0], vec![rat(1, 1), rat(1, 1)]);
        assert_eq!(cols[1], vec![rat(3, 1), rat(1, 1)]);
    }

    proptest::proptest! {
        // Random diagonally dominant systems are nonsingular; the exact
        // solution must satisfy every equation on the nose.
        #[test]
        fn random_dominant_systems_verify(
            seed_rows in proptest::collection::vec(
                proptest::collection::vec((-9i64..=9, 1i64..=9), 4),
                4,
            ),
            b_entries in proptest::collection::vec((-9i64..=9, 1i64..=9), 4),
        ) {
            let n = 4;
            let mut a: Vec<Vec<Rational>> = seed_rows
                .iter()
                .map(|row| row.iter().map(|(p, q)| rat(*p, *q)).collect())
                .collect();
            for i in 0..n {
                let off: Rational = (0..n)
                    .filter(|j| *j != i)
                    .map(|j| a[i][j].abs())
                    .sum();
                a[i][i] = off + rat(1, 1);
            }
            let b: Vec<Rational> = b_entries.iter().map(|(p, q)| rat(*p, *q)).collect();
            let x = solve1(a.clone(), b.clone()).unwrap();
            for i in 0..n {
                let lhs: Rational = (0..n).map(|j| &a[i][j] * &x[j]).sum();
                proptest::prop_assert_eq!(&lhs, &b[i]);
            }
        }
    }
}
