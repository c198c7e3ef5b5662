//! Sparse multivariate (Laurent) polynomials with exact coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Gaussian, Rational};

/// A variable name plus whether negative powers are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    pub name: String,
    pub laurent: bool,
}

impl Var {
    pub fn new(name: &str) -> Self {
        Var {
            name: name.to_string(),
            laurent: false,
        }
    }
    pub fn laurent(name: &str) -> Self {
        Var {
            name: name.to_string(),
            laurent: true,
        }
    }
}

/// Dense exponent vector aligned with the owning polynomial's variable list.
///
/// Ordered graded-lexicographically: total degree first, then the exponent of
/// the earliest variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mono(pub Vec<i32>);

impl Mono {
    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone)]
pub struct Poly<C: Coefficient = Rational> {
    vars: Arc<Vec<Var>>,
    terms: BTreeMap<Mono, C>,
}

pub type QPoly = Poly<Rational>;
pub type GPoly = Poly<Gaussian>;

fn merge_vars(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut out = a.to_vec();
    for v in b {
        match out.iter_mut().find(|w| w.name == v.name) {
            Some(w) => w.laurent |= v.laurent,
            None => out.push(v.clone()),
        }
    }
    out
}

impl<C: Coefficient> Poly<C> {
    pub fn zero() -> Self {
        Poly {
            vars: Arc::new(Vec::new()),
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(C::one())
    }

    pub fn constant(c: C) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert(Mono(Vec::new()), c);
        }
        p
    }

    pub fn from_i64(v: i64) -> Self {
        Self::constant(C::from_i64(v))
    }

    pub fn var(name: &str) -> Self {
        Self::monomial(C::one(), &[(name, 1)])
    }

    pub fn laurent_var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Mono(vec![1]), C::one());
        Poly {
            vars: Arc::new(vec![Var::laurent(name)]),
            terms,
        }
    }

    /// `c · Π name^exp`. Negative exponents mark the variable Laurent.
    pub fn monomial(c: C, exps: &[(&str, i32)]) -> Self {
        let mut vars: Vec<Var> = Vec::new();
        let mut e = Vec::new();
        for &(name, k) in exps {
            if let Some(i) = vars.iter().position(|v| v.name == name) {
                e[i] += k;
                vars[i].laurent |= e[i] < 0;
            } else {
                vars.push(Var {
                    name: name.to_string(),
                    laurent: k < 0,
                });
                e.push(k);
            }
        }
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(e), c);
        }
        Poly {
            vars: Arc::new(vars),
            terms,
        }
    }

    /// Builds from raw terms over a given variable list, dropping zeros and merging repeats.
    pub fn from_terms(
        vars: Vec<Var>,
        terms: impl IntoIterator<Item = (Vec<i32>, C)>,
    ) -> Result<Self> {
        let mut map: BTreeMap<Mono, C> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::InvalidArgument(
                    "exponent vector length mismatch".into(),
                ));
            }
            for (k, v) in e.iter().zip(vars.iter()) {
                if *k < 0 && !v.laurent {
                    return Err(Error::NegativeExponent {
                        var: v.name.clone(),
                    });
                }
            }
            accumulate(&mut map, Mono(e), c);
        }
        Ok(Poly {
            vars: Arc::new(vars),
            terms: map,
        })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn var_names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn is_laurent(&self, name: &str) -> bool {
        self.vars.iter().any(|v| v.name == name && v.laurent)
    }

    /// Terms in ascending graded-lex order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&Mono, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.0.iter().all(|&e| e == 0))
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> C {
        self.terms
            .iter()
            .find(|(m, _)| m.0.iter().all(|&e| e == 0))
            .map(|(_, c)| c.clone())
            .unwrap_or_else(C::zero)
    }

    /// Variables carrying a nonzero exponent in some term.
    pub fn support(&self) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(i, _)| self.terms.keys().any(|m| m.0[*i] != 0))
            .map(|(_, v)| v.name.clone())
            .collect()
    }

    pub fn depends_on(&self, name: &str) -> bool {
        match self.var_index(name) {
            Some(i) => self.terms.keys().any(|m| m.0[i] != 0),
            None => false,
        }
    }

    pub fn total_degree(&self) -> Option<i64> {
        self.terms.keys().map(Mono::degree).max()
    }

    pub fn degree_in(&self, name: &str) -> Option<i32> {
        let i = match self.var_index(name) {
            Some(i) => i,
            None => return (!self.is_zero()).then_some(0),
        };
        self.terms.keys().map(|m| m.0[i]).max()
    }

    pub fn min_degree_in(&self, name: &str) -> Option<i32> {
        let i = match self.var_index(name) {
            Some(i) => i,
            None => return (!self.is_zero()).then_some(0),
        };
        self.terms.keys().map(|m| m.0[i]).min()
    }

    /// Exponent of `name` in `mono`, which must belong to this polynomial.
    pub fn exponent(&self, mono: &Mono, name: &str) -> i32 {
        self.var_index(name).map(|i| mono.0[i]).unwrap_or(0)
    }

    /// Terms as (sorted (name, exponent) list, coefficient), descending graded-lex order.
    pub fn named_terms(&self) -> Vec<(Vec<(String, i32)>, C)> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let e = self
                    .vars
                    .iter()
                    .zip(m.0.iter())
                    .filter(|(_, &k)| k != 0)
                    .map(|(v, &k)| (v.name.clone(), k))
                    .collect();
                (e, c.clone())
            })
            .collect()
    }

    /// Extends and reorders the variable list so that `names` come first in that order.
    pub fn with_vars(&self, names: &[&str]) -> Self {
        let mut decl: Vec<Var> = names
            .iter()
            .map(|n| {
                self.vars
                    .iter()
                    .find(|v| v.name == *n)
                    .cloned()
                    .unwrap_or_else(|| Var::new(n))
            })
            .collect();
        for v in self.vars.iter() {
            if !names.contains(&v.name.as_str()) {
                decl.push(v.clone());
            }
        }
        self.realign(Arc::new(decl))
    }

    /// Marks `name` as a Laurent variable (adding it if absent).
    pub fn allow_laurent(&self, name: &str) -> Self {
        let mut vars = self.vars.as_ref().clone();
        match vars.iter_mut().find(|v| v.name == name) {
            Some(v) => v.laurent = true,
            None => vars.push(Var::laurent(name)),
        }
        let extra = vars.len() - self.vars.len();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = m.0.clone();
                e.extend(std::iter::repeat_n(0, extra));
                (Mono(e), c.clone())
            })
            .collect();
        Poly {
            vars: Arc::new(vars),
            terms,
        }
    }

    fn realign(&self, target: Arc<Vec<Var>>) -> Self {
        if Arc::ptr_eq(&self.vars, &target) || *self.vars == *target {
            return Poly {
                vars: target,
                terms: self.terms.clone(),
            };
        }
        let idx: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                target
                    .iter()
                    .position(|w| w.name == v.name)
                    .expect("target must contain all variables")
            })
            .collect();
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (k, &j) in m.0.iter().zip(idx.iter()) {
                e[j] = *k;
            }
            terms.insert(Mono(e), c.clone());
        }
        Poly {
            vars: target,
            terms,
        }
    }

    fn same_vars(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || *self.vars == *other.vars
    }

    /// Sum that reuses the storage of both operands.
    fn plus_owned(self, other: Self) -> Self {
        if self.vars.is_empty() && self.terms.is_empty() {
            return other;
        }
        if other.vars.is_empty() && other.terms.is_empty() {
            return self;
        }
        if !self.same_vars(&other) {
            return self.plus(&other);
        }
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (m, c) in small.terms {
            accumulate(&mut big.terms, m, c);
        }
        big
    }

    fn plus_ref_owned(mut self, other: &Self) -> Self {
        if !self.same_vars(other) {
            return self.plus(other);
        }
        for (m, c) in &other.terms {
            accumulate(&mut self.terms, m.clone(), c.clone());
        }
        self
    }

    fn minus_owned(self, mut other: Self) -> Self {
        for c in other.terms.values_mut() {
            *c = c.negated();
        }
        self.plus_owned(other)
    }

    fn minus_ref_owned(self, other: &Self) -> Self {
        self.minus_owned(other.clone())
    }

    fn times_owned(self, other: Self) -> Self {
        self.times(&other)
    }

    fn times_ref_owned(self, other: &Self) -> Self {
        self.times(other)
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if Arc::ptr_eq(&self.vars, &other.vars) || *self.vars == *other.vars {
            return (self.clone(), other.realign(self.vars.clone()));
        }
        let merged = Arc::new(merge_vars(&self.vars, &other.vars));
        (self.realign(merged.clone()), other.realign(merged))
    }

    /// Aligns a batch of polynomials to one shared variable list.
    pub fn align_all(polys: &[Self]) -> Vec<Self> {
        let mut vars: Vec<Var> = Vec::new();
        for p in polys {
            vars = merge_vars(&vars, &p.vars);
        }
        let shared = Arc::new(vars);
        polys.iter().map(|p| p.realign(shared.clone())).collect()
    }

    pub fn plus(&self, other: &Self) -> Self {
        if self.same_vars(other) {
            let mut a = self.clone();
            for (m, c) in &other.terms {
                accumulate(&mut a.terms, m.clone(), c.clone());
            }
            return a;
        }
        let (mut a, b) = self.aligned(other);
        for (m, c) in b.terms {
            accumulate(&mut a.terms, m, c);
        }
        a
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.plus(&other.negated())
    }

    pub fn negated(&self) -> Self {
        self.map_terms(|c| c.negated())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Poly {
                vars: self.vars.clone(),
                terms: BTreeMap::new(),
            };
        }
        self.map_terms(|x| x.times(c))
    }

    fn map_terms(&self, f: impl Fn(&C) -> C) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let v = f(c);
                (!v.is_zero()).then(|| (m.clone(), v))
            })
            .collect();
        Poly {
            vars: self.vars.clone(),
            terms,
        }
    }

    pub fn times(&self, other: &Self) -> Self {
        if !self.same_vars(other) {
            let (a, b) = self.aligned(other);
            return a.times(&b);
        }
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let e: Vec<i32> = ma.0.iter().zip(mb.0.iter()).map(|(x, y)| x + y).collect();
                accumulate(&mut terms, Mono(e), ca.times(cb));
            }
        }
        Poly {
            vars: self.vars.clone(),
            terms,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.times(self);
        }
        acc
    }

    /// `order`-th partial derivative; Laurent exponents follow the power rule.
    pub fn derivative(&self, name: &str, order: u32) -> Self {
        let i = match self.var_index(name) {
            Some(i) => i,
            None => {
                return if order == 0 {
                    self.clone()
                } else {
                    Poly {
                        vars: self.vars.clone(),
                        terms: BTreeMap::new(),
                    }
                };
            }
        };
        // shifting one exponent is injective, so no terms merge
        let terms = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let e = m.0[i] as i64;
                let factor: i64 = (0..order as i64).map(|j| e - j).product();
                if factor == 0 {
                    return None;
                }
                let mut n = m.0.clone();
                n[i] -= order as i32;
                Some((Mono(n), c.times(&C::from_i64(factor))))
            })
            .collect();
        Poly {
            vars: self.vars.clone(),
            terms,
        }
    }

    /// Zero-constant antiderivative in `name`, applied `order` times.
    pub fn integrate(&self, name: &str, order: u32) -> Result<Self> {
        if order == 0 {
            return Ok(self.clone());
        }
        let base = if self.var_index(name).is_some() {
            self.clone()
        } else {
            self.with_var(name)
        };
        let i = base.var_index(name).expect("variable present");
        let mut terms = BTreeMap::new();
        for (m, c) in &base.terms {
            let e = m.0[i] as i64;
            let mut denom: i64 = 1;
            for j in 1..=order as i64 {
                if e + j == 0 {
                    return Err(Error::NonIntegrable {
                        var: name.to_string(),
                    });
                }
                denom *= e + j;
            }
            let mut n = m.0.clone();
            n[i] += order as i32;
            accumulate(&mut terms, Mono(n), c.divide(&C::from_i64(denom)));
        }
        Ok(Poly {
            vars: base.vars.clone(),
            terms,
        })
    }

    fn with_var(&self, name: &str) -> Self {
        let mut vars = self.vars.as_ref().clone();
        vars.push(Var::new(name));
        self.realign(Arc::new(vars))
    }

    /// Replaces `name` by `value`. Negative powers of `name` are rejected.
    pub fn substitute(&self, name: &str, value: &Self) -> Result<Self> {
        let i = match self.var_index(name) {
            Some(i) => i,
            None => return Ok(self.clone()),
        };
        let mut powers: Vec<Self> = vec![Self::one()];
        let mut by_power: BTreeMap<i32, Vec<(Mono, C)>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e < 0 {
                return Err(Error::NegativeExponent {
                    var: name.to_string(),
                });
            }
            let mut rest = m.0.clone();
            rest[i] = 0;
            by_power.entry(e).or_default().push((Mono(rest), c.clone()));
        }
        let mut out = Poly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        for (e, list) in by_power {
            while powers.len() <= e as usize {
                let next = powers.last().expect("nonempty").times(value);
                powers.push(next);
            }
            let coeff = Poly {
                vars: self.vars.clone(),
                terms: list.into_iter().collect(),
            };
            out = out.plus(&coeff.times(&powers[e as usize]));
        }
        Ok(out)
    }

    /// Renames a variable; the target must not already occur with nonzero exponent.
    pub fn rename(&self, from: &str, to: &str) -> Self {
        let mut vars = self.vars.as_ref().clone();
        if let Some(v) = vars.iter_mut().find(|v| v.name == from) {
            if let Some(j) = self.var_index(to) {
                assert!(
                    !self.terms.keys().any(|m| m.0[j] != 0),
                    "rename target already in use"
                );
                let p = self
                    .substitute(from, &Self::var(to))
                    .expect("nonnegative exponents");
                return p;
            }
            v.name = to.to_string();
        }
        Poly {
            vars: Arc::new(vars),
            terms: self.terms.clone(),
        }
    }

    /// Coefficient of `name^k` as a polynomial in the remaining variables.
    pub fn coeff_of(&self, name: &str, k: i32) -> Self {
        let i = match self.var_index(name) {
            Some(i) => i,
            None => return if k == 0 { self.clone() } else { Self::zero() },
        };
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.0[i] == k)
            .map(|(m, c)| {
                let mut e = m.0.clone();
                e[i] = 0;
                (Mono(e), c.clone())
            })
            .collect();
        Poly {
            vars: self.vars.clone(),
            terms,
        }
    }

    /// Drops every term whose exponent in `name` exceeds `max`.
    pub fn truncate_in(&self, name: &str, max: i32) -> Self {
        let i = match self.var_index(name) {
            Some(i) => i,
            None => return self.clone(),
        };
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.0[i] <= max)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Poly {
            vars: self.vars.clone(),
            terms,
        }
    }

    /// Keeps only the terms of total degree `d`.
    pub fn homogeneous_part(&self, d: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.degree() == d)
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Poly {
            vars: self.vars.clone(),
            terms,
        }
    }

    pub fn map_coeffs<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Poly<D> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Poly {
            vars: self.vars.clone(),
            terms,
        }
    }

    /// Numeric evaluation; `value` maps a variable name to its complex value.
    pub fn eval_c64(&self, value: impl Fn(&str) -> Complex64) -> Complex64 {
        let vals: Vec<Complex64> = self.vars.iter().map(|v| value(&v.name)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_c64();
            for (x, &e) in vals.iter().zip(m.0.iter()) {
                if e != 0 {
                    t *= x.powi(e);
                }
            }
            acc += t;
        }
        acc
    }
}

impl QPoly {
    /// Embeds a rational polynomial into Q(i).
    pub fn to_gaussian(&self) -> GPoly {
        self.map_coeffs(|c| Gaussian::real(c.clone()))
    }
}

impl GPoly {
    pub fn re(&self) -> QPoly {
        self.map_coeffs(|c| c.re.clone())
    }
    pub fn im(&self) -> QPoly {
        self.map_coeffs(|c| c.im.clone())
    }
}

fn accumulate<C: Coefficient>(map: &mut BTreeMap<Mono, C>, m: Mono, c: C) {
    if c.is_zero() {
        return;
    }
    match map.entry(m) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let s = o.get().plus(&c);
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

impl<C: Coefficient> PartialEq for Poly<C> {
    fn eq(&self, other: &Self) -> bool {
        if self.terms.len() != other.terms.len() {
            return false;
        }
        let (a, b) = self.aligned(other);
        a.terms == b.terms
    }
}

impl<C: Coefficient> Eq for Poly<C> where C: Eq {}

impl<C: Coefficient> Default for Poly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coefficient> fmt::Display for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, c) in self.named_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = exps
                .iter()
                .map(|(n, k)| {
                    if *k == 1 {
                        n.clone()
                    } else {
                        format!("{n}^{k}")
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", c, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $inner:ident, $owned:ident, $mixed:ident) => {
        impl<C: Coefficient> $tr<&Poly<C>> for &Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: &Poly<C>) -> Poly<C> {
                Poly::$inner(self, rhs)
            }
        }
        impl<C: Coefficient> $tr<Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: Poly<C>) -> Poly<C> {
                Poly::$owned(self, rhs)
            }
        }
        impl<C: Coefficient> $tr<&Poly<C>> for Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: &Poly<C>) -> Poly<C> {
                Poly::$mixed(self, rhs)
            }
        }
        impl<C: Coefficient> $tr<Poly<C>> for &Poly<C> {
            type Output = Poly<C>;
            fn $m(self, rhs: Poly<C>) -> Poly<C> {
                Poly::$inner(self, &rhs)
            }
        }
    };
}

binop!(Add, add, plus, plus_owned, plus_ref_owned);
binop!(Sub, sub, minus, minus_owned, minus_ref_owned);
binop!(Mul, mul, times, times_owned, times_ref_owned);

impl<C: Coefficient> Neg for Poly<C> {
    type Output = Poly<C>;
    fn neg(mut self) -> Poly<C> {
        for c in self.terms.values_mut() {
            *c = c.negated();
        }
        self
    }
}

impl<C: Coefficient> Neg for &Poly<C> {
    type Output = Poly<C>;
    fn neg(self) -> Poly<C> {
        Poly::negated(self)
    }
}
