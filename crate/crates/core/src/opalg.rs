//! Linear operators on polynomials, right inverses and the perturbation series
//! `Σ (-T1⁻ T2)^i`.

use std::collections::BTreeSet;
use std::ops::{Add, Mul};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{rat, Coefficient, Rational};
use crate::trig::TrigPoly;

#[derive(Clone, Debug, PartialEq)]
pub enum Operator<C: Coefficient = Rational> {
    Derivative {
        var: String,
        order: u32,
    },
    Integrate {
        var: String,
        order: u32,
    },
    MulPoly(Poly<C>),
    Sum(Vec<Operator<C>>),
    /// Applied right to left: `Compose([A, B])(p) = A(B(p))`.
    Compose(Vec<Operator<C>>),
    Scale(C),
    /// Lazily evaluated `Σ_i (-T1⁻ T2)^i T1⁻`, a right inverse of `T1 + T2`.
    Series(Box<SeriesInverse<C>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesInverse<C: Coefficient = Rational> {
    pub t1_inv: Operator<C>,
    pub t2: Operator<C>,
    /// Safety bound; `None` derives one from the input degree.
    pub max_iterations: Option<usize>,
}

impl<C: Coefficient> Operator<C> {
    pub fn d(var: &str, order: u32) -> Self {
        Operator::Derivative {
            var: var.to_string(),
            order,
        }
    }

    pub fn integral(var: &str, order: u32) -> Self {
        Operator::Integrate {
            var: var.to_string(),
            order,
        }
    }

    pub fn mul(p: Poly<C>) -> Self {
        Operator::MulPoly(p)
    }

    pub fn scale(c: C) -> Self {
        Operator::Scale(c)
    }

    pub fn identity() -> Self {
        Operator::Scale(C::one())
    }

    pub fn zero() -> Self {
        Operator::Sum(Vec::new())
    }

    pub fn series(t1_inv: Self, t2: Self) -> Self {
        Operator::Series(Box::new(SeriesInverse {
            t1_inv,
            t2,
            max_iterations: None,
        }))
    }

    /// `Σ ∂²_{v}` over the given variables.
    pub fn laplacian(vars: &[&str]) -> Self {
        Operator::Sum(vars.iter().map(|v| Self::d(v, 2)).collect())
    }

    pub fn neg(self) -> Self {
        Operator::Compose(vec![Operator::Scale(C::one().negated()), self])
    }

    pub fn apply(&self, p: &Poly<C>) -> Result<Poly<C>> {
        match self {
            Operator::Derivative { var, order } => Ok(p.derivative(var, *order)),
            Operator::Integrate { var, order } => p.integrate(var, *order),
            Operator::MulPoly(q) => Ok(q * p),
            Operator::Scale(c) => Ok(p.scale(c)),
            Operator::Sum(list) => {
                let mut acc = Poly::zero();
                for op in list {
                    acc = acc + op.apply(p)?;
                }
                Ok(acc)
            }
            Operator::Compose(list) => {
                let mut acc = p.clone();
                for op in list.iter().rev() {
                    if acc.is_zero() {
                        break;
                    }
                    acc = op.apply(&acc)?;
                }
                Ok(acc)
            }
            Operator::Series(s) => s.apply(p),
        }
    }

    /// Applies to a trig-polynomial; the time variable of `u` may be differentiated
    /// but not integrated.
    pub fn apply_trig(&self, u: &TrigPoly<C>) -> Result<TrigPoly<C>> {
        match self {
            Operator::Derivative { var, order } => Ok(u.derivative(var, *order)),
            Operator::Integrate { var, order } if *var != u.time_var => Ok(TrigPoly {
                cos_part: u.cos_part.integrate(var, *order)?,
                sin_part: u.sin_part.integrate(var, *order)?,
                ..u.clone()
            }),
            Operator::MulPoly(q) => Ok(u.map_parts(|p| q * p)),
            Operator::Scale(c) => Ok(u.map_parts(|p| p.scale(c))),
            Operator::Sum(list) => {
                let mut acc = u.map_parts(|_| Poly::zero());
                for op in list {
                    acc = acc.plus(&op.apply_trig(u)?);
                }
                Ok(acc)
            }
            Operator::Compose(list) => {
                let mut acc = u.clone();
                for op in list.iter().rev() {
                    acc = op.apply_trig(&acc)?;
                }
                Ok(acc)
            }
            _ => Err(Error::InvalidArgument(
                "operator not supported on trig-polynomials".into(),
            )),
        }
    }

    /// Largest total derivative order along any summand.
    pub fn max_derivative_order(&self) -> u32 {
        match self {
            Operator::Derivative { order, .. } => *order,
            Operator::Sum(list) => list
                .iter()
                .map(Self::max_derivative_order)
                .max()
                .unwrap_or(0),
            Operator::Compose(list) => list.iter().map(Self::max_derivative_order).sum(),
            _ => 0,
        }
    }

    /// Every variable name the operator mentions.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Operator::Derivative { var, .. } | Operator::Integrate { var, .. } => {
                out.insert(var.clone());
            }
            Operator::MulPoly(p) => out.extend(p.support()),
            Operator::Scale(_) => {}
            Operator::Sum(list) | Operator::Compose(list) => {
                list.iter().for_each(|o| o.collect_vars(out))
            }
            Operator::Series(s) => {
                s.t1_inv.collect_vars(out);
                s.t2.collect_vars(out);
            }
        }
    }

    /// Flattens nested sums and compositions and drops identity scales.
    pub fn normalized(&self) -> Self {
        match self {
            Operator::Sum(list) => {
                let mut flat = Vec::new();
                for op in list {
                    match op.normalized() {
                        Operator::Sum(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                if flat.len() == 1 {
                    flat.pop().expect("one element")
                } else {
                    Operator::Sum(flat)
                }
            }
            Operator::Compose(list) => {
                let mut flat = Vec::new();
                for op in list {
                    match op.normalized() {
                        Operator::Compose(inner) => flat.extend(inner),
                        Operator::Scale(c) if c.is_one() => {}
                        other => flat.push(other),
                    }
                }
                match flat.len() {
                    0 => Operator::identity(),
                    1 => flat.pop().expect("one element"),
                    _ => Operator::Compose(flat),
                }
            }
            Operator::Series(s) => Operator::Series(Box::new(SeriesInverse {
                t1_inv: s.t1_inv.normalized(),
                t2: s.t2.normalized(),
                max_iterations: s.max_iterations,
            })),
            other => other.clone(),
        }
    }

    /// Maps every embedded coefficient into another field.
    pub fn map_coeffs<D: Coefficient>(&self, f: &impl Fn(&C) -> D) -> Operator<D> {
        match self {
            Operator::Derivative { var, order } => Operator::Derivative {
                var: var.clone(),
                order: *order,
            },
            Operator::Integrate { var, order } => Operator::Integrate {
                var: var.clone(),
                order: *order,
            },
            Operator::MulPoly(p) => Operator::MulPoly(p.map_coeffs(f)),
            Operator::Scale(c) => Operator::Scale(f(c)),
            Operator::Sum(l) => Operator::Sum(l.iter().map(|o| o.map_coeffs(f)).collect()),
            Operator::Compose(l) => Operator::Compose(l.iter().map(|o| o.map_coeffs(f)).collect()),
            Operator::Series(s) => Operator::Series(Box::new(SeriesInverse {
                t1_inv: s.t1_inv.map_coeffs(f),
                t2: s.t2.map_coeffs(f),
                max_iterations: s.max_iterations,
            })),
        }
    }
}

impl<C: Coefficient> Add for Operator<C> {
    type Output = Operator<C>;
    fn add(self, rhs: Self) -> Self {
        Operator::Sum(vec![self, rhs])
    }
}

/// `A * B` is the composition `A ∘ B`.
impl<C: Coefficient> Mul for Operator<C> {
    type Output = Operator<C>;
    fn mul(self, rhs: Self) -> Self {
        Operator::Compose(vec![self, rhs])
    }
}

fn default_bound<C: Coefficient>(p: &Poly<C>, t2: &Operator<C>) -> usize {
    let deg = p.total_degree().unwrap_or(0).max(0) as usize;
    2 + deg * (t2.max_derivative_order().max(1) as usize)
}

impl<C: Coefficient> SeriesInverse<C> {
    pub fn apply(&self, f: &Poly<C>) -> Result<Poly<C>> {
        let start = self.t1_inv.apply(f)?;
        let (sum, _) = geometric(&self.t1_inv, &self.t2, start, self.max_iterations)?;
        Ok(sum)
    }
}

/// Sums `Σ_i (-T1⁻ T2)^i (start)` until a term vanishes. Returns the sum and the number of nonzero terms.
fn geometric<C: Coefficient>(
    t1_inv: &Operator<C>,
    t2: &Operator<C>,
    start: Poly<C>,
    bound: Option<usize>,
) -> Result<(Poly<C>, usize)> {
    let limit = bound.unwrap_or_else(|| default_bound(&start, t2));
    let mut term = start;
    let mut sum = Poly::zero();
    let mut steps = 0;
    while !term.is_zero() {
        if steps >= limit {
            return Err(Error::SeriesDidNotNilpotate { iterations: limit });
        }
        sum = sum + &term;
        term = t1_inv.apply(&t2.apply(&term)?)?.negated();
        steps += 1;
    }
    Ok((sum, steps))
}

/// The data of the perturbation lemma: `T1` with right inverse `T1⁻`, and `T2`.
#[derive(Clone, Debug)]
pub struct SeriesSolverConfig<C: Coefficient = Rational> {
    pub t1: Operator<C>,
    pub t1_inv: Operator<C>,
    pub t2: Operator<C>,
    pub max_iterations: Option<usize>,
}

impl<C: Coefficient> SeriesSolverConfig<C> {
    /// Checks `T1 ∘ T1⁻ = 1` on a seeded random sample before accepting the configuration.
    pub fn new(
        t1: Operator<C>,
        t1_inv: Operator<C>,
        t2: Operator<C>,
        max_iterations: Option<usize>,
    ) -> Result<Self> {
        let cfg = SeriesSolverConfig {
            t1,
            t1_inv,
            t2,
            max_iterations,
        };
        let mut vars: Vec<String> = cfg.t1.variables().into_iter().collect();
        vars.extend(cfg.t2.variables());
        vars.sort();
        vars.dedup();
        for p in random_sample::<C>(&vars, 6, 3, 0x5eed) {
            let back = cfg.t1.apply(&cfg.t1_inv.apply(&p)?)?;
            if back != p {
                return Err(Error::RightInverse(format!("T1(T1⁻({p})) = {back}")));
            }
        }
        Ok(cfg)
    }

    /// `T1 + T2`.
    pub fn full_operator(&self) -> Operator<C> {
        self.t1.clone() + self.t2.clone()
    }

    /// `u = Σ (-T1⁻T2)^i (h g)` with `T1(h) = 0`; the result is checked to lie in the kernel of `T1 + T2`.
    pub fn solve(&self, h: &Poly<C>, g: &Poly<C>) -> Result<Poly<C>> {
        let th = self.t1.apply(h)?;
        if !th.is_zero() {
            return Err(Error::KernelPrecondition(format!("T1(h) = {th}")));
        }
        let (u, _) = geometric(&self.t1_inv, &self.t2, h * g, self.max_iterations)?;
        let r = self.full_operator().apply(&u)?;
        if !r.is_zero() {
            return Err(Error::Verification(format!("(T1+T2)(u) = {r}")));
        }
        Ok(u)
    }

    /// `Σ (-T1⁻T2)^i T1⁻ (f)`; checked to satisfy `(T1+T2)(r) = f`.
    pub fn right_inverse(&self, f: &Poly<C>) -> Result<Poly<C>> {
        let start = self.t1_inv.apply(f)?;
        let (r, _) = geometric(&self.t1_inv, &self.t2, start, self.max_iterations)?;
        let back = self.full_operator().apply(&r)?;
        if back != *f {
            return Err(Error::Verification(format!(
                "(T1+T2)(r) = {back}, expected {f}"
            )));
        }
        Ok(r)
    }

    /// The right inverse as an operator value.
    pub fn right_inverse_operator(&self) -> Operator<C> {
        Operator::Series(Box::new(SeriesInverse {
            t1_inv: self.t1_inv.clone(),
            t2: self.t2.clone(),
            max_iterations: self.max_iterations,
        }))
    }
}

/// Seeded random polynomials with small rational coefficients in the given variables.
pub fn random_sample<C: Coefficient>(
    vars: &[String],
    count: usize,
    max_deg: u32,
    seed: u64,
) -> Vec<Poly<C>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut p = Poly::zero();
            for _ in 0..4 {
                let exps: Vec<(&str, i32)> = vars
                    .iter()
                    .map(|v| (v.as_str(), rng.gen_range(0..=max_deg) as i32))
                    .collect();
                let c = rat(rng.gen_range(-9..=9), rng.gen_range(1..=5));
                p = p + Poly::monomial(C::from_rational(&c), &exps);
            }
            p
        })
        .collect()
}

/// One step of a flag operator: `coefficient · ∂_{var}^{order}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagTerm<C: Coefficient = Rational> {
    pub coefficient: Poly<C>,
    pub var: String,
    pub order: u32,
}

impl<C: Coefficient> FlagTerm<C> {
    pub fn new(coefficient: Poly<C>, var: &str, order: u32) -> Self {
        FlagTerm {
            coefficient,
            var: var.to_string(),
            order,
        }
    }

    pub fn operator(&self) -> Operator<C> {
        if self.coefficient.is_constant() {
            let c = self.coefficient.constant_term();
            if c.is_one() {
                return Operator::d(&self.var, self.order);
            }
            return Operator::Scale(c) * Operator::d(&self.var, self.order);
        }
        Operator::mul(self.coefficient.clone()) * Operator::d(&self.var, self.order)
    }
}

/// Checks that each coefficient only involves variables of earlier terms.
pub fn check_flag<C: Coefficient>(terms: &[FlagTerm<C>]) -> Result<()> {
    let first = terms
        .first()
        .ok_or_else(|| Error::NotFlagSystem("empty operator list".into()))?;
    if !first.coefficient.is_constant() || first.coefficient.is_zero() {
        return Err(Error::NotFlagSystem(
            "leading coefficient must be a nonzero constant".into(),
        ));
    }
    for (s, term) in terms.iter().enumerate() {
        let allowed: Vec<&str> = terms[..s].iter().map(|t| t.var.as_str()).collect();
        for v in term.coefficient.support() {
            if !allowed.contains(&v.as_str()) {
                return Err(Error::NotFlagSystem(format!(
                    "coefficient of ∂_{} depends on {v}, which is not an earlier variable",
                    term.var
                )));
            }
        }
        if terms[..s].iter().any(|t| t.var == term.var) {
            return Err(Error::NotFlagSystem(format!(
                "variable {} repeated",
                term.var
            )));
        }
    }
    Ok(())
}

/// `d_1 + … + d_k` for a flag list.
pub fn flag_operator<C: Coefficient>(terms: &[FlagTerm<C>]) -> Operator<C> {
    Operator::Sum(terms.iter().map(FlagTerm::operator).collect())
}

/// Right inverses `d_1⁻, …, d_k⁻` of the partial flag operators `d_s = Σ_{j<s} f_j ∂_j^{m_j}`.
pub fn nested_right_inverses<C: Coefficient>(terms: &[FlagTerm<C>]) -> Result<Vec<Operator<C>>> {
    check_flag(terms)?;
    let lead = terms[0].coefficient.constant_term();
    let mut first = Operator::integral(&terms[0].var, terms[0].order);
    if !lead.is_one() {
        first = first * Operator::Scale(lead.recip());
    }
    let mut out = vec![first];
    for term in &terms[1..] {
        let prev = out.last().expect("nonempty").clone();
        out.push(Operator::series(prev, term.operator()));
    }
    Ok(out)
}

/// Right inverse of the full flag operator.
pub fn nested_right_inverse<C: Coefficient>(terms: &[FlagTerm<C>]) -> Result<Operator<C>> {
    Ok(nested_right_inverses(terms)?.pop().expect("nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::QPoly;
    use crate::scalar::{int, rat};

    fn v(n: &str) -> QPoly {
        QPoly::var(n)
    }

    #[test]
    fn compose_and_sum() {
        let op: Operator = Operator::mul(v("x")) * Operator::d("y", 2);
        assert_eq!(op.apply(&v("y").pow(2)).unwrap(), v("x").scale(&int(2)));
        let lap: Operator = Operator::laplacian(&["x", "y"]);
        assert_eq!(
            lap.apply(&(v("x").pow(2) + v("y").pow(2))).unwrap(),
            QPoly::from_i64(4)
        );
    }

    #[test]
    fn tricomi_chain_on_square() {
        let op: Operator = Operator::d("x1", 2)
            + Operator::mul(v("x1")) * Operator::d("x2", 2)
            + Operator::mul(v("x2")) * Operator::d("x3", 2);
        assert_eq!(op.apply(&v("x3").pow(2)).unwrap(), v("x2").scale(&int(2)));
    }

    fn laplace_cfg() -> SeriesSolverConfig {
        SeriesSolverConfig::new(
            Operator::d("x", 2),
            Operator::integral("x", 2),
            Operator::d("y", 2),
            None,
        )
        .unwrap()
    }

    #[test]
    fn series_solve_examples() {
        let cfg = laplace_cfg();
        let u = cfg.solve(&v("x"), &v("y").pow(2)).unwrap();
        assert_eq!(u, v("x") * v("y").pow(2) - v("x").pow(3).scale(&rat(1, 3)));
        let u = cfg.solve(&QPoly::one(), &v("y").pow(4)).unwrap();
        let expect = v("y").pow(4) - (v("x") * v("y")).pow(2).scale(&int(6)) + v("x").pow(4);
        assert_eq!(u, expect);
    }

    #[test]
    fn series_solve_rejects_non_kernel_seed() {
        let cfg = laplace_cfg();
        assert!(matches!(
            cfg.solve(&v("x").pow(2), &QPoly::one()),
            Err(Error::KernelPrecondition(_))
        ));
    }

    #[test]
    fn empty_perturbation() {
        let cfg: SeriesSolverConfig = SeriesSolverConfig::new(
            Operator::d("x", 2),
            Operator::integral("x", 2),
            Operator::zero(),
            None,
        )
        .unwrap();
        assert_eq!(cfg.solve(&v("x"), &v("y")).unwrap(), v("x") * v("y"));
    }

    #[test]
    fn series_right_inverse_examples() {
        let cfg = laplace_cfg();
        assert!(cfg.right_inverse(&QPoly::zero()).unwrap().is_zero());
        assert_eq!(
            cfg.right_inverse(&QPoly::one()).unwrap(),
            v("x").pow(2).scale(&rat(1, 2))
        );
        let r = cfg.right_inverse(&v("y").pow(2)).unwrap();
        assert_eq!(
            r,
            (v("x") * v("y")).pow(2).scale(&rat(1, 2)) - v("x").pow(4).scale(&rat(1, 12))
        );
    }

    #[test]
    fn non_nilpotent_perturbation_is_reported() {
        let cfg: SeriesSolverConfig = SeriesSolverConfig::new(
            Operator::d("x", 1),
            Operator::integral("x", 1),
            Operator::mul(v("y")),
            Some(5),
        )
        .unwrap();
        assert!(matches!(
            cfg.right_inverse(&QPoly::one()),
            Err(Error::SeriesDidNotNilpotate { .. })
        ));
    }

    #[test]
    fn bad_right_inverse_rejected() {
        let r: Result<SeriesSolverConfig> = SeriesSolverConfig::new(
            Operator::d("x", 2),
            Operator::integral("x", 1),
            Operator::zero(),
            None,
        );
        assert!(matches!(r, Err(Error::RightInverse(_))));
    }

    #[test]
    fn nested_inverse_examples() {
        let single = nested_right_inverse(&[FlagTerm::new(QPoly::one(), "x", 3)]).unwrap();
        assert_eq!(single, Operator::integral("x", 3));
        let terms = [
            FlagTerm::new(QPoly::one(), "x", 2),
            FlagTerm::new(v("x"), "y", 2),
        ];
        let inv = nested_right_inverse(&terms).unwrap();
        assert!(inv.apply(&QPoly::zero()).unwrap().is_zero());
        let r = inv.apply(&QPoly::one()).unwrap();
        assert_eq!(r, v("x").pow(2).scale(&rat(1, 2)));
        let f = v("y").pow(3) + v("x") * v("y");
        let r = inv.apply(&f).unwrap();
        assert_eq!(flag_operator(&terms).apply(&r).unwrap(), f);
    }

    #[test]
    fn flag_condition_enforced() {
        let terms = [
            FlagTerm::new(QPoly::one(), "x", 2),
            FlagTerm::new(v("y"), "y", 2),
        ];
        assert!(matches!(
            nested_right_inverse(&terms),
            Err(Error::NotFlagSystem(_))
        ));
    }
}
