//! Brute-force ground truth: kernels of operators on finite monomial slices,
//! span comparison and independence checks.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::exec;
use crate::linalg;
use crate::opalg::Operator;
use crate::poly::{Mono, Poly, QPoly};
use crate::scalar::{Coefficient, Rational};

/// Exponent vectors of total degree exactly `d` in `n` variables.
pub fn exponents_of_degree(n: usize, d: u32) -> Vec<Vec<i32>> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in exponents_of_degree(n - 1, d - first) {
            rest.insert(0, first as i32);
            out.push(rest);
        }
    }
    out
}

fn monomials<C: Coefficient>(vars: &[&str], exps: Vec<Vec<i32>>) -> Vec<Poly<C>> {
    exps.into_iter()
        .map(|e| {
            let pairs: Vec<(&str, i32)> = vars.iter().copied().zip(e).collect();
            Poly::monomial(C::one(), &pairs).with_vars(vars)
        })
        .collect()
}

/// All monomials of total degree `d`.
pub fn homogeneous_slice<C: Coefficient>(vars: &[&str], d: u32) -> Vec<Poly<C>> {
    monomials(vars, exponents_of_degree(vars.len(), d))
}

/// All monomials of total degree at most `d`.
pub fn degree_slice<C: Coefficient>(vars: &[&str], d: u32) -> Vec<Poly<C>> {
    (0..=d).flat_map(|k| homogeneous_slice(vars, k)).collect()
}

/// Monomials whose weighted degree `Σ w_i e_i` equals `d`.
pub fn weighted_slice<C: Coefficient>(vars: &[&str], weights: &[u32], d: u32) -> Vec<Poly<C>> {
    fn rec(weights: &[u32], d: u32) -> Vec<Vec<i32>> {
        match weights.split_first() {
            None => {
                if d == 0 {
                    vec![vec![]]
                } else {
                    vec![]
                }
            }
            Some((&w, rest)) => {
                let mut out = Vec::new();
                let top = if w == 0 { 0 } else { d / w };
                for k in (0..=top).rev() {
                    for mut tail in rec(rest, d - k * w) {
                        tail.insert(0, k as i32);
                        out.push(tail);
                    }
                }
                out
            }
        }
    }
    monomials(vars, rec(weights, d))
}

/// Bihomogeneous monomials: degree `l1` in `xs` and `l2` in `ys`.
pub fn bidegree_slice<C: Coefficient>(xs: &[&str], ys: &[&str], l1: u32, l2: u32) -> Vec<Poly<C>> {
    let mut vars: Vec<&str> = xs.to_vec();
    vars.extend_from_slice(ys);
    let mut out = Vec::new();
    for ex in exponents_of_degree(xs.len(), l1) {
        for ey in exponents_of_degree(ys.len(), l2) {
            let mut e = ex.clone();
            e.extend(ey);
            out.push(e);
        }
    }
    monomials(&vars, out)
}

/// Coefficient matrix with one row per polynomial, columns indexed by the union of monomials.
pub fn coefficient_rows<C: Coefficient>(polys: &[Poly<C>]) -> Vec<Vec<C>> {
    let aligned = Poly::align_all(polys);
    let mut index: BTreeMap<Mono, usize> = BTreeMap::new();
    for p in &aligned {
        for (m, _) in p.iter() {
            let next = index.len();
            index.entry(m.clone()).or_insert(next);
        }
    }
    aligned
        .iter()
        .map(|p| {
            let mut row = vec![C::zero(); index.len()];
            for (m, c) in p.iter() {
                row[index[m]] = c.clone();
            }
            row
        })
        .collect()
}

/// Dimension of the span of `polys` over the coefficient field.
pub fn span_rank<C: Coefficient>(polys: &[Poly<C>]) -> usize {
    if polys.is_empty() {
        return 0;
    }
    linalg::rank(&coefficient_rows(polys))
}

/// Same as [`span_rank`] over Q using fraction-free elimination.
pub fn span_rank_q(polys: &[QPoly]) -> usize {
    if polys.is_empty() {
        return 0;
    }
    linalg::rank_fraction_free(&coefficient_rows(polys))
}

pub fn is_independent_q(polys: &[QPoly]) -> bool {
    span_rank_q(polys) == polys.len()
}

pub fn in_span_q(basis: &[QPoly], p: &QPoly) -> bool {
    let mut all = basis.to_vec();
    all.push(p.clone());
    span_rank_q(&all) == span_rank_q(basis)
}

/// Equal spans: equal ranks and the joint rank does not grow.
pub fn same_span_q(a: &[QPoly], b: &[QPoly]) -> bool {
    let ra = span_rank_q(a);
    let rb = span_rank_q(b);
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    ra == rb && span_rank_q(&all) == ra
}

#[derive(Clone, Debug)]
pub struct Kernel<C: Coefficient = Rational> {
    pub dimension: usize,
    pub basis: Vec<Poly<C>>,
}

fn image_rows<C: Coefficient>(op: &Operator<C>, slice: &[Poly<C>]) -> Result<(Vec<Vec<C>>, usize)> {
    let images = exec::try_map(slice, |m| op.apply(m))?;
    // rows of the linear system are image monomials, columns are slice elements
    let cols = coefficient_rows(&images);
    let width = cols.first().map_or(0, Vec::len);
    let rows: Vec<Vec<C>> = (0..width)
        .map(|r| cols.iter().map(|c| c[r].clone()).collect())
        .collect();
    Ok((rows, slice.len()))
}

fn combine<C: Coefficient>(slice: &[Poly<C>], v: &[C]) -> Poly<C> {
    slice
        .iter()
        .zip(v)
        .filter(|(_, c)| !c.is_zero())
        .fold(Poly::zero(), |acc, (m, c)| acc + m.scale(c))
}

/// Exact kernel of `op` restricted to the span of `slice`, by fraction-free elimination.
pub fn kernel_oracle(op: &Operator, slice: &[QPoly]) -> Result<Kernel> {
    let (rows, n) = image_rows(op, slice)?;
    let null = if rows.is_empty() {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rational::from_integer(1.into())
                        } else {
                            Rational::from_integer(0.into())
                        }
                    })
                    .collect()
            })
            .collect()
    } else {
        linalg::nullspace_fraction_free(&rows, n)
    };
    let basis: Vec<QPoly> = null.iter().map(|v| combine(slice, v)).collect();
    Ok(Kernel {
        dimension: basis.len(),
        basis,
    })
}

/// Kernel over any coefficient field, by Gauss-Jordan elimination.
pub fn kernel_oracle_generic<C: Coefficient>(
    op: &Operator<C>,
    slice: &[Poly<C>],
) -> Result<Kernel<C>> {
    let (rows, n) = image_rows(op, slice)?;
    let null = if rows.is_empty() {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { C::one() } else { C::zero() })
                    .collect()
            })
            .collect()
    } else {
        linalg::nullspace(&rows, n)
    };
    let basis: Vec<Poly<C>> = null.iter().map(|v| combine(slice, v)).collect();
    Ok(Kernel {
        dimension: basis.len(),
        basis,
    })
}
