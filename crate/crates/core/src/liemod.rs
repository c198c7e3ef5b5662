//! Polynomial representations of so(n), sl(n) and G2 by linear vector fields,
//! their invariants, singular vectors and explicit module bases.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::family::{
    box_indices, compositions, coordinate_names, meta, mono_q, BasisElement, BasisFamily,
    IndexValue,
};
use crate::flagsolve::harmonic_degree_slice;
use crate::kernel::{bidegree_slice, degree_slice, span_rank_q};
use crate::linalg;
use crate::opalg::{random_sample, Operator};
use crate::poly::{Poly, QPoly};
use crate::scalar::{binomial, factorial, int, rat, Coefficient, Gaussian, QSqrt2, Rational};

pub type Matrix<C> = Vec<Vec<C>>;

fn zero_matrix<C: Coefficient>(n: usize) -> Matrix<C> {
    vec![vec![C::zero(); n]; n]
}

/// `E_{i,j}` with 1-based indices.
pub fn unit<C: Coefficient>(n: usize, i: usize, j: usize) -> Matrix<C> {
    let mut m = zero_matrix(n);
    m[i - 1][j - 1] = C::one();
    m
}

pub fn mat_add<C: Coefficient>(a: &Matrix<C>, b: &Matrix<C>) -> Matrix<C> {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.plus(y)).collect())
        .collect()
}

pub fn mat_scale<C: Coefficient>(a: &Matrix<C>, c: &C) -> Matrix<C> {
    a.iter()
        .map(|r| r.iter().map(|x| x.times(c)).collect())
        .collect()
}

pub fn mat_mul<C: Coefficient>(a: &Matrix<C>, b: &Matrix<C>) -> Matrix<C> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n).fold(C::zero(), |acc, k| {
                        if a[i][k].is_zero() || b[k][j].is_zero() {
                            acc
                        } else {
                            acc.plus(&a[i][k].times(&b[k][j]))
                        }
                    })
                })
                .collect()
        })
        .collect()
}

/// `AB − BA`.
pub fn commutator<C: Coefficient>(a: &Matrix<C>, b: &Matrix<C>) -> Matrix<C> {
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    ab.iter()
        .zip(&ba)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x.minus(y)).collect())
        .collect()
}

pub fn trace<C: Coefficient>(a: &Matrix<C>) -> C {
    (0..a.len()).fold(C::zero(), |acc, i| acc.plus(&a[i][i]))
}

/// Coordinates of `target` in the span of `basis`, if it lies there.
pub fn span_coordinates<C: Coefficient>(basis: &[Matrix<C>], target: &Matrix<C>) -> Option<Vec<C>> {
    let n = target.len();
    let k = basis.len();
    // one row per matrix entry, one column per basis element plus the target
    let rows: Vec<Vec<C>> = (0..n * n)
        .map(|e| {
            let (i, j) = (e / n, e % n);
            basis
                .iter()
                .map(|b| b[i][j].clone())
                .chain(std::iter::once(target[i][j].clone()))
                .collect()
        })
        .filter(|r: &Vec<C>| r.iter().any(|c| !c.is_zero()))
        .collect();
    if rows.is_empty() {
        return Some(vec![C::zero(); k]);
    }
    let null = linalg::nullspace(&rows, k + 1);
    let v = null.into_iter().find(|v| !v[k].is_zero())?;
    let s = v[k].negated().recip();
    Some(v[..k].iter().map(|c| c.times(&s)).collect())
}

/// The vector field `Σ M_ij x_i ∂_{x_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearField<C: Coefficient = Rational> {
    pub name: String,
    pub vars: Vec<String>,
    pub matrix: Matrix<C>,
}

impl<C: Coefficient> LinearField<C> {
    pub fn new(name: &str, vars: &[String], matrix: Matrix<C>) -> Self {
        LinearField {
            name: name.to_string(),
            vars: vars.to_vec(),
            matrix,
        }
    }

    /// `Σ_i M_ij x_i`, the coefficient of `∂_{x_j}`.
    fn column(&self, j: usize) -> Poly<C> {
        self.matrix
            .iter()
            .enumerate()
            .filter(|(_, r)| !r[j].is_zero())
            .fold(Poly::zero(), |acc, (i, r)| {
                acc + Poly::var(&self.vars[i]).scale(&r[j])
            })
    }

    pub fn apply(&self, p: &Poly<C>) -> Poly<C> {
        let mut out = Poly::zero();
        for (j, v) in self.vars.iter().enumerate() {
            let d = p.derivative(v, 1);
            if d.is_zero() {
                continue;
            }
            let c = self.column(j);
            if !c.is_zero() {
                out = out + c * d;
            }
        }
        out
    }

    pub fn to_operator(&self) -> Operator<C> {
        let parts = (0..self.vars.len())
            .map(|j| (j, self.column(j)))
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| Operator::mul(c) * Operator::d(&self.vars[j], 1))
            .collect();
        Operator::Sum(parts)
    }

    /// Field of the matrix commutator; equals the operator commutator.
    pub fn bracket(&self, other: &Self) -> Self {
        LinearField::new(
            &format!("[{},{}]", self.name, other.name),
            &self.vars,
            commutator(&self.matrix, &other.matrix),
        )
    }
}

/// A Lie algebra acting on polynomials, with a chosen Borel part.
#[derive(Clone, Debug)]
pub struct RepresentationAction<C: Coefficient = Rational> {
    pub name: String,
    pub vars: Vec<String>,
    /// Basis of the algebra.
    pub generators: Vec<LinearField<C>>,
    /// Positive root vectors.
    pub positive: Vec<LinearField<C>>,
    /// Cartan generators; eigenvalues against them are the weight coordinates.
    pub cartan: Vec<LinearField<C>>,
}

/// `c[a][b]` holds the coordinates of `[g_a, g_b]` in the generator basis.
pub type StructureConstants<C> = Vec<Vec<Vec<C>>>;

impl<C: Coefficient> RepresentationAction<C> {
    pub fn generator(&self, name: &str) -> Option<&LinearField<C>> {
        self.generators
            .iter()
            .chain(&self.positive)
            .chain(&self.cartan)
            .find(|g| g.name == name)
    }

    fn matrices(&self) -> Vec<Matrix<C>> {
        self.generators.iter().map(|g| g.matrix.clone()).collect()
    }

    /// Exact structure constants; fails if some bracket leaves the span.
    pub fn structure_constants(&self) -> Result<StructureConstants<C>> {
        let mats = self.matrices();
        let rows = crate::exec::try_map(&self.generators, |a| {
            self.generators
                .iter()
                .map(|b| {
                    span_coordinates(&mats, &commutator(&a.matrix, &b.matrix)).ok_or_else(|| {
                        Error::Verification(format!(
                            "[{}, {}] is outside the span of the {} generators",
                            a.name, b.name, self.name
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(rows)
    }

    /// Structure constants, confirmed at operator level on random polynomials.
    pub fn check_closure(&self, sample_size: usize, seed: u64) -> Result<StructureConstants<C>> {
        let consts = self.structure_constants()?;
        let sample: Vec<Poly<C>> = random_sample(&self.vars, sample_size, 3, seed);
        for (a, ga) in self.generators.iter().enumerate() {
            for (b, gb) in self.generators.iter().enumerate() {
                for f in &sample {
                    let lhs = ga.apply(&gb.apply(f)) - gb.apply(&ga.apply(f));
                    let rhs = consts[a][b]
                        .iter()
                        .zip(&self.generators)
                        .filter(|(c, _)| !c.is_zero())
                        .fold(Poly::zero(), |acc, (c, g)| acc + g.apply(f).scale(c));
                    if lhs != rhs {
                        return Err(Error::Verification(format!(
                            "[{}, {}] disagrees with its structure constants on {f}",
                            ga.name, gb.name
                        )));
                    }
                }
            }
        }
        Ok(consts)
    }

    /// Positive and Cartan fields lie in the span of the generators.
    pub fn check_borel(&self) -> Result<()> {
        let mats = self.matrices();
        for g in self.positive.iter().chain(&self.cartan) {
            if span_coordinates(&mats, &g.matrix).is_none() {
                return Err(Error::Verification(format!(
                    "{} is not in {}",
                    g.name, self.name
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let names = |v: &[LinearField<C>]| v.iter().map(|g| g.name.clone()).collect::<Vec<_>>();
        json!({
            "algebra": self.name,
            "vars": self.vars,
            "generators": names(&self.generators),
            "positive": names(&self.positive),
            "cartan": names(&self.cartan),
        })
    }
}

/// Weight of `f` if every positive generator kills it and every Cartan
/// generator acts on it by a scalar.
pub fn verify_singular<C: Coefficient>(
    action: &RepresentationAction<C>,
    f: &Poly<C>,
) -> Result<Vec<C>> {
    if f.is_zero() {
        return Err(Error::InvalidArgument(
            "a singular vector must be nonzero".into(),
        ));
    }
    for e in &action.positive {
        let r = e.apply(f);
        if !r.is_zero() {
            return Err(Error::NotSingular {
                generator: e.name.clone(),
                residual: r.to_string(),
            });
        }
    }
    let sorted = |p: &Poly<C>| -> Vec<(Vec<(String, i32)>, C)> {
        p.named_terms()
            .into_iter()
            .map(|(mut m, c)| {
                m.sort();
                (m, c)
            })
            .collect()
    };
    let terms = sorted(f);
    let (lead_mono, lead_coeff) = terms.last().expect("nonzero");
    let mut weight = Vec::with_capacity(action.cartan.len());
    for h in &action.cartan {
        let r = h.apply(f);
        let lambda = sorted(&r)
            .into_iter()
            .find(|(m, _)| m == lead_mono)
            .map_or(C::zero(), |(_, c)| c.times(&lead_coeff.recip()));
        if !(r.clone() - f.scale(&lambda)).is_zero() {
            return Err(Error::NotSingular {
                generator: h.name.clone(),
                residual: format!("{r} is not a multiple of {f}"),
            });
        }
        weight.push(lambda);
    }
    Ok(weight)
}

// ---------- so(n)

fn basis_vec(n: usize, entries: &[(usize, Gaussian)]) -> Vec<Gaussian> {
    let mut v = vec![Gaussian::zero(); n];
    for (i, c) in entries {
        v[i - 1] = v[i - 1].plus(c);
    }
    v
}

fn outer(a: &[Gaussian], b: &[Gaussian]) -> Matrix<Gaussian> {
    a.iter()
        .map(|x| b.iter().map(|y| x.times(y)).collect())
        .collect()
}

/// `x_i ∂_{x_j} − x_j ∂_{x_i}` for `i < j`, with Cartan and positive root
/// vectors written in the complex coordinates `z_j = x_{2j−1} + √−1 x_{2j}`,
/// `w_j = x_{2j−1} − √−1 x_{2j}` (and `x_n` for odd `n`).
pub fn so_action(n: usize) -> Result<RepresentationAction<Gaussian>> {
    if n < 3 {
        return Err(Error::InvalidArgument("so(n) needs n >= 3".into()));
    }
    let vars = coordinate_names(n);
    let one = Gaussian::one();
    let i = Gaussian::i();
    let half = Gaussian::real(rat(1, 2));
    let mut generators = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            let m = mat_add(&unit(n, a, b), &mat_scale(&unit(n, b, a), &one.negated()));
            generators.push(LinearField::new(&format!("L{a},{b}"), &vars, m));
        }
    }
    let z = |j: usize| basis_vec(n, &[(2 * j - 1, one.clone()), (2 * j, i.clone())]);
    let w = |j: usize| basis_vec(n, &[(2 * j - 1, one.clone()), (2 * j, i.negated())]);
    let dz = |j: usize| {
        basis_vec(
            n,
            &[(2 * j - 1, half.clone()), (2 * j, half.times(&i).negated())],
        )
    };
    let dw = |j: usize| basis_vec(n, &[(2 * j - 1, half.clone()), (2 * j, half.times(&i))]);
    let last = |c: Gaussian| basis_vec(n, &[(n, c)]);
    let rank = n / 2;
    let minus =
        |a: Matrix<Gaussian>, b: Matrix<Gaussian>| mat_add(&a, &mat_scale(&b, &one.negated()));
    let cartan = (1..=rank)
        .map(|j| {
            LinearField::new(
                &format!("H{j}"),
                &vars,
                minus(outer(&z(j), &dz(j)), outer(&w(j), &dw(j))),
            )
        })
        .collect();
    let mut positive = Vec::new();
    for j in 1..=rank {
        for l in j + 1..=rank {
            positive.push(LinearField::new(
                &format!("E(e{j}-e{l})"),
                &vars,
                minus(outer(&z(j), &dz(l)), outer(&w(l), &dw(j))),
            ));
            positive.push(LinearField::new(
                &format!("E(e{j}+e{l})"),
                &vars,
                minus(outer(&z(j), &dw(l)), outer(&z(l), &dw(j))),
            ));
        }
        if n % 2 == 1 {
            let two = Gaussian::from_i64(2);
            positive.push(LinearField::new(
                &format!("E(e{j})"),
                &vars,
                minus(outer(&z(j), &last(one.clone())), outer(&last(two), &dw(j))),
            ));
        }
    }
    Ok(RepresentationAction {
        name: format!("so({n})"),
        vars,
        generators,
        positive,
        cartan,
    })
}

/// `(x_1 + √−1 x_2)^k`, the highest vector of the degree-`k` harmonics.
pub fn so_highest_vector(n: usize, k: u32) -> Poly<Gaussian> {
    let vars = coordinate_names(n);
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    (Poly::var("x1") + Poly::var("x2").scale(&Gaussian::i()))
        .pow(k)
        .with_vars(&names)
}

/// Degree-`k` harmonic polynomials in `n ≥ 3` variables.
pub fn harmonic_module_basis(n: usize, k: u32) -> Result<BasisFamily> {
    if n < 3 {
        return Err(Error::InvalidArgument(
            "so(n) harmonic modules need n >= 3".into(),
        ));
    }
    let mut fam = harmonic_degree_slice(n, k)?;
    fam.name = format!("so({n}) harmonic module, degree {k}");
    Ok(fam)
}

// ---------- sl(n)

pub fn sl_vars(n: usize) -> (Vec<String>, Vec<String>) {
    (
        (1..=n).map(|i| format!("x{i}")).collect(),
        (1..=n).map(|i| format!("y{i}")).collect(),
    )
}

fn sl_field(n: usize, vars: &[String], i: usize, j: usize, name: &str) -> LinearField<Rational> {
    let mut m = zero_matrix::<Rational>(2 * n);
    m[i - 1][j - 1] = m[i - 1][j - 1].plus(&int(1));
    m[n + j - 1][n + i - 1] = m[n + j - 1][n + i - 1].minus(&int(1));
    LinearField::new(name, vars, m)
}

/// `E_{i,j} ↦ x_i ∂_{x_j} − y_j ∂_{y_i}` on `x_1..x_n, y_1..y_n`.
pub fn sl_action(n: usize) -> Result<RepresentationAction<Rational>> {
    if n < 2 {
        return Err(Error::InvalidArgument("sl(n) needs n >= 2".into()));
    }
    let (xs, ys) = sl_vars(n);
    let vars: Vec<String> = xs.into_iter().chain(ys).collect();
    let mut generators = Vec::new();
    let mut positive = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j {
                let f = sl_field(n, &vars, i, j, &format!("E{i},{j}"));
                if i < j {
                    positive.push(f.clone());
                }
                generators.push(f);
            }
        }
    }
    let mut cartan = Vec::new();
    for i in 1..n {
        let a = sl_field(n, &vars, i, i, "");
        let b = sl_field(n, &vars, i + 1, i + 1, "");
        let h = LinearField::new(
            &format!("H{i}"),
            &vars,
            mat_add(&a.matrix, &mat_scale(&b.matrix, &int(-1))),
        );
        cartan.push(h.clone());
        generators.push(h);
    }
    Ok(RepresentationAction {
        name: format!("sl({n})"),
        vars,
        generators,
        positive,
        cartan,
    })
}

/// `ζ = Σ x_i y_i`.
pub fn zeta(n: usize) -> QPoly {
    let (xs, ys) = sl_vars(n);
    xs.iter().zip(&ys).fold(QPoly::zero(), |acc, (x, y)| {
        acc + QPoly::var(x) * QPoly::var(y)
    })
}

/// `Σ ∂_{x_i} ∂_{y_i}`.
pub fn sl_laplacian<C: Coefficient>(n: usize) -> Operator<C> {
    let (xs, ys) = sl_vars(n);
    Operator::Sum(
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| Operator::d(x, 1) * Operator::d(y, 1))
            .collect(),
    )
}

/// `x_1^{ℓ1} y_n^{ℓ2}`.
pub fn sl_highest_vector(n: usize, l1: u32, l2: u32) -> QPoly {
    let (xs, ys) = sl_vars(n);
    let vars: Vec<String> = xs.into_iter().chain(ys).collect();
    let mut e = vec![0u32; 2 * n];
    e[0] += l1;
    e[2 * n - 1] += l2;
    mono_q(&vars, &e)
}

/// Which of `x_1`, `y_1` carries the free leading exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlBranch {
    X,
    Y,
}

/// Element of the bidegree-`(ℓ1, ℓ2)` module from its leading monomial
/// `x_1^{lead} Π x_r^{m_r} y_r^{l_r}` (or with `y_1^{lead}`).
pub fn sl_element(n: usize, branch: SlBranch, lead: u32, ms: &[u32], ls: &[u32]) -> QPoly {
    let (xs, ys) = sl_vars(n);
    let vars: Vec<String> = xs.into_iter().chain(ys).collect();
    let caps: Vec<u32> = ms.iter().zip(ls).map(|(&a, &b)| a.min(b)).collect();
    let lead_fact = Rational::from_integer(factorial(lead));
    let mut out = QPoly::zero();
    for is in box_indices(&caps) {
        let j: u32 = is.iter().sum();
        let mut c = lead_fact.clone() / Rational::from_integer(factorial(lead + j));
        if j % 2 == 1 {
            c = -c;
        }
        for ((&i, &m), &l) in is.iter().zip(ms).zip(ls) {
            c *= binomial(m as i64, i as i64)
                * binomial(l as i64, i as i64)
                * Rational::from_integer(factorial(i));
        }
        let mut e = vec![0u32; 2 * n];
        match branch {
            SlBranch::X => {
                e[0] = lead + j;
                e[n] = j;
            }
            SlBranch::Y => {
                e[0] = j;
                e[n] = lead + j;
            }
        }
        for r in 0..n - 1 {
            e[r + 1] = ms[r] - is[r];
            e[n + r + 1] = ls[r] - is[r];
        }
        out = out + mono_q(&vars, &e).scale(&c);
    }
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    out.with_vars(&names)
}

/// Basis of the irreducible module of bidegree `(ℓ1, ℓ2)`, the kernel of `Σ ∂_{x_i}∂_{y_i}`.
pub fn sl_module_basis(n: usize, l1: u32, l2: u32) -> Result<BasisFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument("sl(n) modules need n >= 2".into()));
    }
    let mut idx: Vec<(SlBranch, u32, Vec<u32>, Vec<u32>)> = Vec::new();
    for m in 0..=l1 {
        for ms in compositions(n - 1, l1 - m) {
            for ls in compositions(n - 1, l2) {
                idx.push((SlBranch::X, m, ms.clone(), ls));
            }
        }
    }
    for m in 1..=l2 {
        for ms in compositions(n - 1, l1) {
            for ls in compositions(n - 1, l2 - m) {
                idx.push((SlBranch::Y, m, ms.clone(), ls));
            }
        }
    }
    BasisFamily::build(
        &format!("sl({n}) module ({l1},{l2})"),
        sl_laplacian(n),
        format!("bidegree ({l1},{l2})"),
        &idx,
        |(b, m, ms, ls)| {
            let branch = match b {
                SlBranch::X => "x1",
                SlBranch::Y => "y1",
            };
            Ok(BasisElement {
                index: meta([
                    ("branch", branch.into()),
                    ("lead", (*m).into()),
                    ("m", ms.as_slice().into()),
                    ("l", ls.as_slice().into()),
                ]),
                solution: sl_element(n, *b, *m, ms, ls),
            })
        },
    )
}

/// `i(n + ℓ1 + ℓ2 − i − 1)`, where `(ℓ1, ℓ2)` is the bidegree of `ζ^i g`.
pub fn zeta_eigenvalue(n: usize, l1: u32, l2: u32, i: u32) -> i64 {
    i as i64 * (n as i64 + l1 as i64 + l2 as i64 - i as i64 - 1)
}

/// Checks `Δ(ζ^i g) = i(n+ℓ1+ℓ2−i−1) ζ^{i−1} g` for `g` annihilated by `Δ`,
/// with `(ℓ1, ℓ2)` the bidegree of `ζ^i g`.
pub fn check_zeta_power(n: usize, g: &QPoly, i: u32) -> Result<()> {
    let lap: Operator = sl_laplacian(n);
    if !lap.apply(g)?.is_zero() {
        return Err(Error::InvalidArgument(
            "g must be annihilated by the Laplacian".into(),
        ));
    }
    let (l1, l2) =
        bidegree(n, g).ok_or_else(|| Error::InvalidArgument("g must be bihomogeneous".into()))?;
    let z = zeta(n);
    let lhs = lap.apply(&(z.pow(i) * g))?;
    let rhs = if i == 0 {
        QPoly::zero()
    } else {
        (z.pow(i - 1) * g).scale(&int(zeta_eigenvalue(n, l1 + i, l2 + i, i)))
    };
    if lhs != rhs {
        return Err(Error::Verification(format!(
            "Δ(ζ^{i} g) = {lhs}, expected {rhs}"
        )));
    }
    Ok(())
}

/// Bidegree in `(x, y)` of a nonzero bihomogeneous polynomial.
pub fn bidegree(n: usize, p: &QPoly) -> Option<(u32, u32)> {
    let (xs, ys) = sl_vars(n);
    let mut found = None;
    for (powers, _) in p.named_terms() {
        let dx: i32 = powers
            .iter()
            .filter(|(v, _)| xs.contains(v))
            .map(|(_, e)| e)
            .sum();
        let dy: i32 = powers
            .iter()
            .filter(|(v, _)| ys.contains(v))
            .map(|(_, e)| e)
            .sum();
        let d = (dx as u32, dy as u32);
        match found {
            None => found = Some(d),
            Some(f) if f != d => return None,
            _ => {}
        }
    }
    found
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Decomposition {
    pub module_dim: usize,
    pub zeta_part_dim: usize,
    pub slice_dim: usize,
    pub union_rank: usize,
}

impl Decomposition {
    pub fn is_direct_sum(&self) -> bool {
        self.union_rank == self.module_dim + self.zeta_part_dim && self.union_rank == self.slice_dim
    }
}

/// Ranks behind `A_{ℓ1,ℓ2} = V_{ℓ1,ℓ2} ⊕ ζ A_{ℓ1−1,ℓ2−1}`.
pub fn sl_decomposition(n: usize, l1: u32, l2: u32) -> Result<Decomposition> {
    let (xs, ys) = sl_vars(n);
    let xr: Vec<&str> = xs.iter().map(String::as_str).collect();
    let yr: Vec<&str> = ys.iter().map(String::as_str).collect();
    let v = sl_module_basis(n, l1, l2)?.solutions();
    let z = zeta(n);
    let zpart: Vec<QPoly> = if l1 == 0 || l2 == 0 {
        Vec::new()
    } else {
        bidegree_slice::<Rational>(&xr, &yr, l1 - 1, l2 - 1)
            .into_iter()
            .map(|m| &z * &m)
            .collect()
    };
    let slice = bidegree_slice::<Rational>(&xr, &yr, l1, l2);
    let union: Vec<QPoly> = v.iter().chain(&zpart).cloned().collect();
    Ok(Decomposition {
        module_dim: span_rank_q(&v),
        zeta_part_dim: span_rank_q(&zpart),
        slice_dim: slice.len(),
        union_rank: span_rank_q(&union),
    })
}

// ---------- G2

/// `h₁, h₂, E₁..E₆, F₁..F₆` as 7×7 matrices over ℚ(√2).
#[derive(Clone, Debug, PartialEq)]
pub struct G2Structure {
    pub h: [Matrix<QSqrt2>; 2],
    pub e: [Matrix<QSqrt2>; 6],
    pub f: [Matrix<QSqrt2>; 6],
}

fn combo(terms: &[(QSqrt2, usize, usize)]) -> Matrix<QSqrt2> {
    terms.iter().fold(zero_matrix(7), |acc, (c, i, j)| {
        mat_add(&acc, &mat_scale(&unit(7, *i, *j), c))
    })
}

pub fn g2_structure() -> G2Structure {
    let r = QSqrt2::sqrt2();
    let mr = r.negated();
    let p = QSqrt2::int(1);
    let m = QSqrt2::int(-1);
    let t = QSqrt2::int(2);
    let h1 = combo(&[
        (t.negated(), 2, 2),
        (p.clone(), 3, 3),
        (p.clone(), 4, 4),
        (t.clone(), 5, 5),
        (m.clone(), 6, 6),
        (m.clone(), 7, 7),
    ]);
    let h2 = combo(&[
        (p.clone(), 2, 2),
        (m.clone(), 3, 3),
        (m.clone(), 5, 5),
        (p.clone(), 6, 6),
    ]);
    let e1 = combo(&[
        (r.clone(), 1, 2),
        (mr.clone(), 5, 1),
        (m.clone(), 3, 7),
        (p.clone(), 4, 6),
    ]);
    let e2 = combo(&[(p.clone(), 2, 3), (m.clone(), 6, 5)]);
    let e3 = combo(&[
        (r.clone(), 1, 3),
        (mr.clone(), 6, 1),
        (p.clone(), 2, 7),
        (m.clone(), 4, 5),
    ]);
    let e4 = combo(&[
        (r.clone(), 1, 7),
        (mr.clone(), 4, 1),
        (p.clone(), 6, 2),
        (m.clone(), 5, 3),
    ]);
    let e5 = combo(&[(p.clone(), 4, 2), (m.clone(), 5, 7)]);
    let e6 = combo(&[(p.clone(), 4, 3), (m.clone(), 6, 7)]);
    let f1 = combo(&[
        (r.clone(), 2, 1),
        (mr.clone(), 1, 5),
        (m.clone(), 7, 3),
        (p.clone(), 6, 4),
    ]);
    let f2 = combo(&[(p.clone(), 3, 2), (m.clone(), 5, 6)]);
    let f3 = combo(&[
        (r.clone(), 3, 1),
        (mr.clone(), 1, 6),
        (p.clone(), 7, 2),
        (m.clone(), 5, 4),
    ]);
    let f4 = combo(&[
        (r.clone(), 7, 1),
        (mr.clone(), 1, 4),
        (p.clone(), 2, 6),
        (m.clone(), 3, 5),
    ]);
    let f5 = combo(&[(p.clone(), 2, 4), (m.clone(), 7, 5)]);
    let f6 = combo(&[(p, 3, 4), (m, 7, 6)]);
    G2Structure {
        h: [h1, h2],
        e: [e1, e2, e3, e4, e5, e6],
        f: [f1, f2, f3, f4, f5, f6],
    }
}

impl G2Structure {
    /// The defining bracket relations of the positive part, each as `(label, holds)`.
    pub fn relations(&self) -> Vec<(String, bool)> {
        let e = &self.e;
        let half = QSqrt2::from_rational(&rat(1, 2));
        let third = QSqrt2::from_rational(&rat(1, 3));
        vec![
            ("[E1,E2] = E3".into(), commutator(&e[0], &e[1]) == e[2]),
            (
                "[E1,E3] = 2E4".into(),
                mat_scale(&commutator(&e[0], &e[2]), &half) == e[3],
            ),
            (
                "[E1,E4] = 3E5".into(),
                mat_scale(&commutator(&e[0], &e[3]), &third) == e[4],
            ),
            ("[E5,E2] = E6".into(), commutator(&e[4], &e[1]) == e[5]),
        ]
    }

    pub fn all(&self) -> Vec<(String, Matrix<QSqrt2>)> {
        let mut out = vec![
            ("h1".to_string(), self.h[0].clone()),
            ("h2".to_string(), self.h[1].clone()),
        ];
        out.extend(
            self.e
                .iter()
                .enumerate()
                .map(|(i, m)| (format!("E{}", i + 1), m.clone())),
        );
        out.extend(
            self.f
                .iter()
                .enumerate()
                .map(|(i, m)| (format!("F{}", i + 1), m.clone())),
        );
        out
    }

    pub fn is_traceless(&self) -> bool {
        self.all().iter().all(|(_, m)| trace(m).is_zero())
    }
}

/// `E_{i,j} ↦ x_i ∂_{x_j}` restricted to G2.
pub fn g2_action() -> RepresentationAction<QSqrt2> {
    let s = g2_structure();
    let vars = coordinate_names(7);
    let generators: Vec<LinearField<QSqrt2>> = s
        .all()
        .into_iter()
        .map(|(n, m)| LinearField::new(&n, &vars, m))
        .collect();
    let positive = generators[2..8].to_vec();
    let cartan = generators[..2].to_vec();
    RepresentationAction {
        name: "G2".into(),
        vars,
        generators,
        positive,
        cartan,
    }
}

/// `η = x_1² + 2x_2x_5 + 2x_3x_6 + 2x_4x_7`.
pub fn eta<C: Coefficient>() -> Poly<C> {
    let v = |i: usize| Poly::<C>::var(&format!("x{i}"));
    let two = C::from_i64(2);
    v(1) * v(1) + (v(2) * v(5) + v(3) * v(6) + v(4) * v(7)).scale(&two)
}

/// The two candidate leading terms of the second-order invariant operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G2LaplacianReading {
    /// `∂²_{x1} + 2∂_{x2}∂_{x5} + 2∂_{x3}∂_{x6} + 2∂_{x4}∂_{x7}`, dual to `η`.
    FirstSquare,
    /// `∂²_{x2} + 2∂_{x2}∂_{x5} + 2∂_{x3}∂_{x6} + 2∂_{x4}∂_{x7}`.
    SecondSquare,
}

impl fmt::Display for G2LaplacianReading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            G2LaplacianReading::FirstSquare => "d1^2 + 2 d2 d5 + 2 d3 d6 + 2 d4 d7",
            G2LaplacianReading::SecondSquare => "d2^2 + 2 d2 d5 + 2 d3 d6 + 2 d4 d7",
        })
    }
}

pub fn g2_laplacian<C: Coefficient>(reading: G2LaplacianReading) -> Operator<C> {
    let lead = match reading {
        G2LaplacianReading::FirstSquare => "x1",
        G2LaplacianReading::SecondSquare => "x2",
    };
    let two = C::from_i64(2);
    let cross =
        |a: &str, b: &str| Operator::scale(two.clone()) * Operator::d(a, 1) * Operator::d(b, 1);
    Operator::Sum(vec![
        Operator::d(lead, 2),
        cross("x2", "x5"),
        cross("x3", "x6"),
        cross("x4", "x7"),
    ])
}

/// Whether `Δ′` commutes with every G2 generator on polynomials of degree ≤ `degree`.
/// Degree 2 already decides it: the commutator is a constant-coefficient second-order operator.
pub fn g2_laplacian_commutes(reading: G2LaplacianReading, degree: u32) -> Result<Option<String>> {
    let action = g2_action();
    let lap = g2_laplacian::<QSqrt2>(reading);
    let names: Vec<&str> = action.vars.iter().map(String::as_str).collect();
    let monos = degree_slice::<QSqrt2>(&names, degree);
    for g in &action.generators {
        for m in &monos {
            if lap.apply(&g.apply(m))? != g.apply(&lap.apply(m)?) {
                return Ok(Some(format!("{} on {m}", g.name)));
            }
        }
    }
    Ok(None)
}

/// The reading of `Δ′` that commutes with G2, found by checking both.
pub fn selected_g2_reading() -> Result<G2LaplacianReading> {
    static CHOICE: OnceLock<std::result::Result<G2LaplacianReading, String>> = OnceLock::new();
    CHOICE
        .get_or_init(|| {
            let mut ok = Vec::new();
            for r in [
                G2LaplacianReading::FirstSquare,
                G2LaplacianReading::SecondSquare,
            ] {
                match g2_laplacian_commutes(r, 2) {
                    Ok(None) => ok.push(r),
                    Ok(Some(_)) => {}
                    Err(e) => return Err(e.to_string()),
                }
            }
            match ok.as_slice() {
                [r] => Ok(*r),
                _ => Err(format!(
                    "{} readings of the G2 Laplacian commute with the action",
                    ok.len()
                )),
            }
        })
        .clone()
        .map_err(Error::Verification)
}

/// `x_4^k`.
pub fn g2_highest_vector(k: u32) -> QPoly {
    let mut e = vec![0; 7];
    e[3] = k;
    mono_q(&coordinate_names(7), &e)
}

/// Element with leading monomial `x_1^ε Π_{s=2}^{7} x_s^{m_s}`.
pub fn g2_element(epsilon: u32, ms: &[u32]) -> QPoly {
    let vars = coordinate_names(7);
    let caps: Vec<u32> = (0..3).map(|s| ms[s].min(ms[s + 3])).collect();
    let mut out = QPoly::zero();
    for is in box_indices(&caps) {
        let j: u32 = is.iter().sum();
        let mut c = Rational::from_integer(factorial(j) * num_bigint::BigInt::from(2).pow(j))
            / (Rational::from_integer(factorial(2 * j)) * int(1 + 2 * (epsilon * j) as i64));
        if j % 2 == 1 {
            c = -c;
        }
        for s in 0..3 {
            c *= binomial(ms[s] as i64, is[s] as i64)
                * binomial(ms[s + 3] as i64, is[s] as i64)
                * Rational::from_integer(factorial(is[s]));
        }
        let mut e = vec![0u32; 7];
        e[0] = epsilon + 2 * j;
        for s in 0..3 {
            e[s + 1] = ms[s] - is[s];
            e[s + 4] = ms[s + 3] - is[s];
        }
        out = out + mono_q(&vars, &e).scale(&c);
    }
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    out.with_vars(&names)
}

/// Basis of the irreducible G2 module generated by `x_4^k`.
pub fn g2_module_basis(k: u32) -> Result<BasisFamily> {
    let reading = selected_g2_reading()?;
    let mut idx = Vec::new();
    for eps in 0..=1u32.min(k) {
        for ms in compositions(6, k - eps) {
            idx.push((eps, ms));
        }
    }
    BasisFamily::build(
        &format!("G2 module, degree {k}"),
        g2_laplacian(reading),
        format!("total degree {k}"),
        &idx,
        |(eps, ms)| {
            Ok(BasisElement {
                index: meta([
                    ("epsilon", IndexValue::Int(*eps as i64)),
                    ("m", ms.as_slice().into()),
                ]),
                solution: g2_element(*eps, ms),
            })
        },
    )
}

// ---------- identity suite

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CommutationReport {
    pub checks: Vec<IdentityCheck>,
    pub g2_reading: G2LaplacianReading,
    /// Outcome of the commutation test for each candidate reading.
    pub g2_readings: Vec<(G2LaplacianReading, bool)>,
}

impl CommutationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn run_check<T: Sync>(
    name: &str,
    cases: &[T],
    f: impl Fn(&T) -> Result<Option<String>> + Sync + Send,
) -> Result<IdentityCheck> {
    let found = crate::exec::try_map(cases, f)?;
    let counterexample = found.into_iter().flatten().next();
    Ok(IdentityCheck {
        name: name.to_string(),
        cases: cases.len(),
        passed: counterexample.is_none(),
        counterexample,
    })
}

/// Operator identities of the three representations, checked on every monomial
/// of total degree ≤ `degree`.
pub fn commutation_checks(degree: u32) -> Result<CommutationReport> {
    let mut checks = Vec::new();

    for n in 3..=4 {
        let action = so_action(n)?;
        let names: Vec<&str> = action.vars.iter().map(String::as_str).collect();
        let lap: Operator<Gaussian> = Operator::laplacian(&names);
        let monos = degree_slice::<Gaussian>(&names, degree);
        checks.push(run_check(
            &format!("so({n}): generators commute with the Laplacian"),
            &monos,
            |m| {
                for g in &action.generators {
                    if lap.apply(&g.apply(m))? != g.apply(&lap.apply(m)?) {
                        return Ok(Some(format!("{} on {m}", g.name)));
                    }
                }
                Ok(None)
            },
        )?);
        let q: Poly<Gaussian> = names
            .iter()
            .fold(Poly::zero(), |acc, v| acc + Poly::var(v) * Poly::var(v));
        checks.push(run_check(
            &format!("so({n}): root vectors and Cartan preserve the quadratic form"),
            &[()],
            |_| {
                Ok(action
                    .positive
                    .iter()
                    .chain(&action.cartan)
                    .find(|g| !g.apply(&q).is_zero())
                    .map(|g| g.name.clone()))
            },
        )?);
    }

    for n in 2..=3 {
        let action = sl_action(n)?;
        let names: Vec<&str> = action.vars.iter().map(String::as_str).collect();
        let lap: Operator = sl_laplacian(n);
        let monos = degree_slice::<Rational>(&names, degree);
        checks.push(run_check(
            &format!("sl({n}): generators commute with the Laplacian"),
            &monos,
            |m| {
                for g in &action.generators {
                    if lap.apply(&g.apply(m))? != g.apply(&lap.apply(m)?) {
                        return Ok(Some(format!("{} on {m}", g.name)));
                    }
                }
                Ok(None)
            },
        )?);
        let z = zeta(n);
        checks.push(run_check(
            &format!("sl({n}): generators kill zeta"),
            &[()],
            |_| {
                Ok(action
                    .generators
                    .iter()
                    .find(|g| !g.apply(&z).is_zero())
                    .map(|g| g.name.clone()))
            },
        )?);
        // Δ ζ f = n f + ζ Δ f + Σ (x_i ∂_{x_i} + y_i ∂_{y_i}) f
        checks.push(run_check(
            &format!("sl({n}): Laplacian of zeta times f"),
            &monos,
            |m| {
                let lhs = lap.apply(&(&z * m))?;
                let euler = m.scale(&int(m.total_degree().unwrap_or(0)));
                let rhs = m.scale(&int(n as i64)) + &z * &lap.apply(m)? + euler;
                Ok((lhs != rhs).then(|| m.to_string()))
            },
        )?);
    }

    let g2 = g2_structure();
    checks.push(IdentityCheck {
        name: "G2: bracket relations of E1..E6".into(),
        cases: 4,
        passed: g2.relations().iter().all(|r| r.1),
        counterexample: g2.relations().into_iter().find(|r| !r.1).map(|r| r.0),
    });
    checks.push(IdentityCheck {
        name: "G2: generators are traceless".into(),
        cases: 14,
        passed: g2.is_traceless(),
        counterexample: None,
    });
    let action = g2_action();
    let closure = action.structure_constants();
    checks.push(IdentityCheck {
        name: "G2: brackets close on the 14 generators".into(),
        cases: 196,
        passed: closure.is_ok(),
        counterexample: closure.err().map(|e| e.to_string()),
    });
    let h = eta::<QSqrt2>();
    checks.push(run_check("G2: generators kill eta", &[()], |_| {
        Ok(action
            .generators
            .iter()
            .find(|g| !g.apply(&h).is_zero())
            .map(|g| g.name.clone()))
    })?);

    let mut readings = Vec::new();
    for r in [
        G2LaplacianReading::FirstSquare,
        G2LaplacianReading::SecondSquare,
    ] {
        readings.push((r, g2_laplacian_commutes(r, 2)?.is_none()));
    }
    let reading = selected_g2_reading()?;
    let lap = g2_laplacian::<QSqrt2>(reading);
    let names: Vec<&str> = action.vars.iter().map(String::as_str).collect();
    let monos = degree_slice::<QSqrt2>(&names, degree);
    checks.push(run_check(
        "G2: generators commute with the invariant Laplacian",
        &monos,
        |m| {
            for g in &action.generators {
                if lap.apply(&g.apply(m))? != g.apply(&lap.apply(m)?) {
                    return Ok(Some(format!("{} on {m}", g.name)));
                }
            }
            Ok(None)
        },
    )?);
    // Δ′ η f = η Δ′ f + 14 f + 4 Σ x_i ∂_{x_i} f
    checks.push(run_check("G2: Laplacian of eta times f", &monos, |m| {
        let lhs = lap.apply(&(&h * m))?;
        let d = m.total_degree().unwrap_or(0);
        let rhs = &h * &lap.apply(m)? + m.scale(&QSqrt2::int(14 + 4 * d));
        Ok((lhs != rhs).then(|| m.to_string()))
    })?);

    Ok(CommutationReport {
        checks,
        g2_reading: reading,
        g2_readings: readings,
    })
}
