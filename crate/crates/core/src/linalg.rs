//! Exact dense linear algebra: RREF over any coefficient field and
//! fraction-free (Bareiss) elimination over the integers for rational input.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{Coefficient, Rational};

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<C: Coefficient>(m: &mut [Vec<C>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = m[r][j].times(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let v = m[i][j].minus(&f.times(&m[r][j]));
                    m[i][j] = v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<C: Coefficient>(m: &[Vec<C>]) -> usize {
    let mut work = m.to_vec();
    rref(&mut work).len()
}

/// Basis of `{v : M v = 0}` from RREF; one vector per free column.
pub fn nullspace<C: Coefficient>(m: &[Vec<C>], cols: usize) -> Vec<Vec<C>> {
    let mut work = m.to_vec();
    let pivots = rref(&mut work);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![C::zero(); cols];
            v[f] = C::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = work[row][f].negated();
            }
            v
        })
        .collect()
}

/// Clears denominators row by row.
pub fn integer_rows(m: &[Vec<Rational>]) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect()
}

/// Bareiss fraction-free forward elimination to row echelon form.
/// Every intermediate entry stays an integer. Returns the pivot columns.
pub fn bareiss(m: &mut [Vec<BigInt>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = (&m[r][c] * &m[i][j] - &m[i][c] * &m[r][j]) / &prev;
                m[i][j] = v;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_fraction_free(m: &[Vec<Rational>]) -> usize {
    let mut work = integer_rows(m);
    bareiss(&mut work).len()
}

/// Nullspace via Bareiss echelon form and rational back substitution.
pub fn nullspace_fraction_free(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut work = integer_rows(m);
    let pivots = bareiss(&mut work);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v: Vec<Rational> = vec![<Rational as Zero>::zero(); cols];
            v[f] = <Rational as One>::one();
            for (row, &pc) in pivots.iter().enumerate().rev() {
                let mut s = <Rational as Zero>::zero();
                for j in pc + 1..cols {
                    if !work[row][j].is_zero() && !Zero::is_zero(&v[j]) {
                        s += BigRational::from_integer(work[row][j].clone()) * &v[j];
                    }
                }
                v[pc] = -s / BigRational::from_integer(work[row][pc].clone());
            }
            v
        })
        .collect()
}
