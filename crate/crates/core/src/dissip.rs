//! Wave equations with dissipation, the anisymmetric Laplace family with its
//! Euler-Poisson-Darboux reduction, and a Klein-Gordon type equation solved
//! over the Gaussian rationals.

use crate::error::{Error, Result};
use crate::exec;
use crate::family::{box_indices, coordinate_names, meta, BasisElement, BasisFamily};
use crate::opalg::{Operator, SeriesSolverConfig};
use crate::poly::{GPoly, Poly, QPoly};
use crate::scalar::{
    binomial, factorial, int, multinomial, rational_pow, Coefficient, Gaussian, Rational,
};
use crate::trig::TrigPoly;

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn fact<C: Coefficient>(n: u32) -> C {
    C::from_rational(&Rational::from_integer(factorial(n)))
}

/// Closed form of `(d⁻)^i(1)` for `d = a∂_t + ∂_t²`.
pub fn xi_dissipation<C: Coefficient>(a: &C, i: u32) -> Result<Poly<C>> {
    if a.is_zero() {
        return Err(Error::DegenerateDissipation);
    }
    let term = |c: C, k: u32| Poly::monomial(c, &[("t", k as i32)]);
    let inv = |e: u32| rational_pow(a, -(e as i64));
    Ok(match i {
        0 => Poly::one(),
        1 => term(inv(1), 1),
        2 => term(inv(2).divide(&C::from_i64(2)), 2) - term(inv(3), 1),
        _ => {
            let mut u =
                term(inv(i).divide(&fact(i)), i) - term(inv(i + 1).divide(&fact(i - 2)), i - 1);
            for r in 2..i {
                let prod: i64 = (1..r).map(|s| (i + s) as i64).product();
                let mut c = C::from_i64(prod)
                    .divide(&fact::<C>(i - r - 1).times(&fact(r)))
                    .times(&inv(r + i));
                if r % 2 == 1 {
                    c = c.negated();
                }
                u = u + term(c, i - r);
            }
            u
        }
    })
}

/// `a∂_t + ∂_t²`.
pub fn dissipation_operator<C: Coefficient>(a: &C) -> Operator<C> {
    Operator::Scale(a.clone()) * Operator::d("t", 1) + Operator::d("t", 2)
}

/// Right inverse `∫_t Σ_r a^{-r-1}(-∂_t)^r` of [`dissipation_operator`].
pub fn dissipation_right_inverse<C: Coefficient>(a: &C) -> Result<Operator<C>> {
    if a.is_zero() {
        return Err(Error::DegenerateDissipation);
    }
    Ok(Operator::integral("t", 1)
        * Operator::series(Operator::Scale(a.recip()), Operator::d("t", 1)))
}

fn space_laplacian(vars: &[String]) -> Operator {
    Operator::laplacian(&names(vars))
}

/// `∂_t² + ∂_t - Σ ∂_{x_i}²`.
pub fn dissipative_wave_operator(n: usize) -> Operator {
    dissipation_operator(&int(1)) + space_laplacian(&coordinate_names(n)).neg()
}

/// Basis of polynomial solutions of `u_tt + u_t - Δu = 0`, indexed by `ℓ_i <= caps[i]`.
pub fn dissipative_wave_basis(n: usize, caps: &[u32]) -> Result<BasisFamily> {
    if n == 0 || caps.len() != n {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and {n} degree caps"
        )));
    }
    let vars = coordinate_names(n);
    let mut all = vec!["t".to_string()];
    all.extend(vars.iter().cloned());
    let top: u32 = caps.iter().map(|c| c / 2).sum();
    let xis: Vec<QPoly> = (0..=top)
        .map(|r| xi_dissipation(&int(1), r))
        .collect::<Result<_>>()?;
    let indices = box_indices(caps);
    let truncation = format!("l_i <= {caps:?}");
    BasisFamily::build(
        "dissipative",
        dissipative_wave_operator(n),
        truncation,
        &indices,
        |l| {
            let half: Vec<u32> = l.iter().map(|v| v / 2).collect();
            let mut u = QPoly::zero();
            for r in box_indices(&half) {
                let total: u32 = r.iter().sum();
                let mut c = Rational::from_integer(multinomial(&r));
                let mut exps = Vec::new();
                for (i, (&li, &ri)) in l.iter().zip(&r).enumerate() {
                    c *= Rational::from_integer(factorial(2 * ri))
                        * binomial(li as i64, 2 * ri as i64);
                    exps.push((vars[i].as_str(), (li - 2 * ri) as i32));
                }
                u = u + xis[total as usize].times(&QPoly::monomial(c, &exps));
            }
            Ok(BasisElement {
                index: meta([("l", l.as_slice().into())]),
                solution: u.with_vars(&names(&all)),
            })
        },
    )
}

/// How `t u_tt + λ u_t - ε t Δu = 0` decomposes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaKind {
    /// `λ` is not a negative integer.
    Generic,
    /// `λ = -2k`.
    NegativeEven(u32),
    /// `λ = -2k - 1`.
    NegativeOdd(u32),
}

impl LambdaKind {
    pub fn classify(lambda: &Rational) -> Result<Self> {
        if lambda.is_zero() {
            return Err(Error::UsePlainWave);
        }
        if !lambda.is_integer() || *lambda > int(0) {
            return Ok(LambdaKind::Generic);
        }
        let m: i64 = (-lambda.to_integer())
            .try_into()
            .map_err(|_| Error::InvalidArgument("λ out of range".into()))?;
        Ok(if m % 2 == 0 {
            LambdaKind::NegativeEven((m / 2) as u32)
        } else {
            LambdaKind::NegativeOdd((m / 2) as u32)
        })
    }
}

/// `φ_i = t^{2i} / (i! 2^i Π_{r<i}(λ + 2r + 1))`.
pub fn phi(lambda: &Rational, i: u32) -> Result<QPoly> {
    let mut den = Rational::from_integer(factorial(i)) * int(1 << i.min(62));
    for r in 0..i {
        let f = lambda + int(2 * r as i64 + 1);
        if f.is_zero() {
            return Err(Error::InvalidArgument(format!(
                "φ_{i} undefined for λ = {lambda}"
            )));
        }
        den *= f;
    }
    Ok(QPoly::monomial(den.recip(), &[("t", 2 * i as i32)]))
}

/// `ψ_i = t^{2i+1-λ} / (2^i i! Π_{r=1..i}(2r + 1 - λ))` for negative integer `λ`.
pub fn psi(lambda: &Rational, i: u32) -> Result<QPoly> {
    if !lambda.is_integer() || *lambda >= int(0) {
        return Err(Error::InvalidArgument(
            "ψ needs a negative integer λ".into(),
        ));
    }
    let mut den = Rational::from_integer(factorial(i)) * int(1 << i.min(62));
    for r in 1..=i {
        den *= int(2 * r as i64 + 1) - lambda;
    }
    let e = int(2 * i as i64 + 1) - lambda;
    let e: i32 = e
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidArgument("λ out of range".into()))?;
    Ok(QPoly::monomial(den.recip(), &[("t", e)]))
}

/// `t∂_t² + λ∂_t - εtΣ∂_{x_i}²`.
pub fn anisymmetric_operator(n: usize, lambda: &Rational, epsilon: i64) -> Operator {
    let vars = coordinate_names(n);
    Operator::Sum(vec![
        Operator::mul(QPoly::var("t")) * Operator::d("t", 2),
        Operator::Scale(lambda.clone()) * Operator::d("t", 1),
        Operator::mul(QPoly::monomial(int(-epsilon), &[("t", 1)])) * space_laplacian(&vars),
    ])
}

/// `Σ_r ε^r w_r(t) Δ^r(v)`, stopping once `Δ^r v` vanishes or `r` exceeds `max_r`.
fn weighted_laplacian_series(
    v: &QPoly,
    lap: &Operator,
    epsilon: i64,
    max_r: Option<u32>,
    weight: impl Fn(u32) -> Result<QPoly>,
) -> Result<QPoly> {
    let mut u = QPoly::zero();
    let mut cur = v.clone();
    let mut r = 0;
    while !cur.is_zero() && max_r.is_none_or(|m| r <= m) {
        let e = if r % 2 == 1 { int(epsilon) } else { int(1) };
        u = u + weight(r)?.times(&cur).scale(&e);
        cur = lap.apply(&cur)?;
        r += 1;
    }
    Ok(u)
}

/// Element of the kernel of `Δ^{i}` built from `ℓ_1 < 2i` and `ℓ_2..ℓ_n`:
/// `Σ_r (-1)^r C(i+r-1, r) x_1^{ℓ_1+2r}/(ℓ_1+2r)! Δ'^r(x_2^{ℓ_2}⋯)`, with `Δ'` the Laplacian without `x_1`.
pub fn polyharmonic_element(i: u32, l: &[u32], vars: &[String]) -> Result<QPoly> {
    let rest = QPoly::monomial(
        int(1),
        &vars[1..]
            .iter()
            .map(String::as_str)
            .zip(l[1..].iter().map(|&e| e as i32))
            .collect::<Vec<_>>(),
    );
    let lap2 = space_laplacian(&vars[1..]);
    let mut v = QPoly::zero();
    let mut cur = rest;
    let mut r = 0u32;
    while !cur.is_zero() {
        let e = l[0] + 2 * r;
        let mut c = binomial((i + r) as i64 - 1, r as i64) / Rational::from_integer(factorial(e));
        if r % 2 == 1 {
            c = -c;
        }
        v = v + QPoly::monomial(c, &[(vars[0].as_str(), e as i32)]).times(&cur);
        cur = lap2.apply(&cur)?;
        r += 1;
    }
    Ok(v)
}

#[derive(Clone, Debug)]
enum AnisymIndex {
    Phi(Vec<u32>),
    Psi(Vec<u32>),
}

/// Basis of polynomial solutions of `t u_tt + λ u_t - ε t Δu = 0` in `t, x1..xn`.
///
/// For `λ = -2k-1` the φ-branch runs over the kernel of `Δ^{k+1}` (so `ℓ_1 <= 2k+1`);
/// otherwise `ℓ_i <= caps[i]`.
pub fn anisymmetric_basis(
    n: usize,
    lambda: &Rational,
    epsilon: i64,
    caps: &[u32],
) -> Result<BasisFamily> {
    let kind = LambdaKind::classify(lambda)?;
    if epsilon != 1 && epsilon != -1 {
        return Err(Error::InvalidArgument("ε must be 1 or -1".into()));
    }
    if n == 0 || caps.len() != n {
        return Err(Error::InvalidArgument(format!(
            "need n >= 1 and {n} degree caps"
        )));
    }
    let vars = coordinate_names(n);
    let mut all = vec!["t".to_string()];
    all.extend(vars.iter().cloned());
    let mut indices: Vec<AnisymIndex> = Vec::new();
    match kind {
        LambdaKind::Generic | LambdaKind::NegativeEven(_) => {
            indices.extend(box_indices(caps).into_iter().map(AnisymIndex::Phi));
        }
        LambdaKind::NegativeOdd(k) => {
            let mut c = caps.to_vec();
            c[0] = 2 * k + 1;
            indices.extend(box_indices(&c).into_iter().map(AnisymIndex::Phi));
        }
    }
    if kind != LambdaKind::Generic {
        indices.extend(box_indices(caps).into_iter().map(AnisymIndex::Psi));
    }
    let lap = space_laplacian(&vars);
    let op = anisymmetric_operator(n, lambda, epsilon);
    let truncation = format!("l_i <= {caps:?}");
    BasisFamily::build("anisymmetric", op, truncation, &indices, |idx| {
        let (branch, l, u) = match (idx, kind) {
            (AnisymIndex::Phi(l), LambdaKind::NegativeOdd(k)) => {
                let v = polyharmonic_element(k + 1, l, &vars)?;
                (
                    ("phi"),
                    l,
                    weighted_laplacian_series(&v, &lap, epsilon, Some(k), |r| phi(lambda, r))?,
                )
            }
            (AnisymIndex::Phi(l), _) => {
                let v = crate::family::mono_q(&vars, l);
                (
                    "phi",
                    l,
                    weighted_laplacian_series(&v, &lap, epsilon, None, |r| phi(lambda, r))?,
                )
            }
            (AnisymIndex::Psi(l), _) => {
                let v = crate::family::mono_q(&vars, l);
                (
                    "psi",
                    l,
                    weighted_laplacian_series(&v, &lap, epsilon, None, |r| psi(lambda, r))?,
                )
            }
        };
        Ok(BasisElement {
            index: meta([("branch", branch.into()), ("l", l.as_slice().into())]),
            solution: u.with_vars(&names(&all)),
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EpdBranch {
    /// `u = t^{m+1} v`, with `v` solving the reduced equation for `λ = 2(m+1)`.
    RaisedPower,
    /// `u = t^{-m} v`, with `λ = -2m`.
    LoweredPower,
}

/// `t²∂_t² - t²Δ - m(m+1)` over the spatial variables `vars`.
pub fn epd_operator(vars: &[String], m: i64) -> Operator {
    let t2 = QPoly::monomial(int(1), &[("t", 2)]);
    Operator::Sum(vec![
        Operator::mul(t2.clone()) * Operator::d("t", 2),
        Operator::mul(t2.negated()) * space_laplacian(vars),
        Operator::Scale(int(-m * (m + 1))),
    ])
}

/// Lifts a solution of the reduced equation to a solution of the Euler-Poisson-Darboux
/// equation `t²u_tt - t²Δu - m(m+1)u = 0`.
pub fn epd_transform(v: &QPoly, m: i64, branch: EpdBranch) -> Result<QPoly> {
    if m == 0 || m == -1 {
        return Err(Error::InvalidArgument("m must differ from 0 and -1".into()));
    }
    let vars: Vec<String> = v.support().into_iter().filter(|s| s != "t").collect();
    let (lambda, power) = match branch {
        EpdBranch::RaisedPower => (2 * (m + 1), m + 1),
        EpdBranch::LoweredPower => (-2 * m, -m),
    };
    let reduced = Operator::Sum(vec![
        Operator::mul(QPoly::var("t")) * Operator::d("t", 2),
        Operator::Scale(int(lambda)) * Operator::d("t", 1),
        Operator::mul(QPoly::var("t").negated()) * space_laplacian(&vars),
    ]);
    let r = reduced.apply(v)?;
    if !r.is_zero() {
        return Err(Error::NotReducedSolution(format!("residual {r}")));
    }
    let u = QPoly::monomial(int(1), &[("t", power as i32)]).times(v);
    let r = epd_operator(&vars, m).apply(&u)?;
    if !r.is_zero() {
        return Err(Error::Verification(format!("EPD residual {r}")));
    }
    Ok(u)
}

/// `u_tt - u_xx - x u_yy - y u_zz + a² u` on trig-polynomials.
pub fn klein_gordon_operator(a: &Rational) -> Operator {
    Operator::Sum(vec![
        Operator::d("t", 2),
        Operator::d("x", 2).neg(),
        (Operator::mul(QPoly::var("x")) * Operator::d("y", 2)).neg(),
        (Operator::mul(QPoly::var("y")) * Operator::d("z", 2)).neg(),
        Operator::Scale(a * a),
    ])
}

/// The complex solution `v` of `v_tt + 2ai v_t - v_xx - x v_yy - y v_zz = 0` seeded by `x^{m1} y^{m2} z^{m3}`.
pub fn klein_gordon_complex(
    a: &Rational,
    monomial: [u32; 3],
    max_iterations: Option<usize>,
) -> Result<GPoly> {
    if a.is_zero() {
        return Err(Error::DegenerateFrequency);
    }
    let b = Gaussian::new(int(0), a * int(2));
    let t1 = dissipation_operator(&b);
    let t1_inv = dissipation_right_inverse(&b)?;
    let lap = klein_gordon_operator(&int(0)).map_coeffs(&|c: &Rational| Gaussian::real(c.clone()));
    // drop the time part: T2 = -(∂x² + x∂y² + y∂z²)
    let Operator::Sum(parts) = lap else {
        unreachable!()
    };
    let t2 = Operator::Sum(parts[1..4].to_vec());
    let cfg = SeriesSolverConfig::new(t1, t1_inv, t2, max_iterations)?;
    let g = GPoly::monomial(
        Gaussian::real(int(1)),
        &[
            ("x", monomial[0] as i32),
            ("y", monomial[1] as i32),
            ("z", monomial[2] as i32),
        ],
    );
    cfg.solve(&GPoly::one(), &g)
}

/// The two real solutions `Re(e^{iat} v)` and `Im(e^{iat} v)`, checked in the trig-polynomial ring.
pub fn klein_gordon_solutions(
    a: &Rational,
    monomial: [u32; 3],
    max_iterations: Option<usize>,
) -> Result<(TrigPoly, TrigPoly)> {
    let v = klein_gordon_complex(a, monomial, max_iterations)?;
    let (v0, v1) = (v.re(), v.im());
    let first = TrigPoly::new(v0.clone(), v1.negated(), a.clone(), "t");
    let second = TrigPoly::new(v1, v0, a.clone(), "t");
    let op = klein_gordon_operator(a);
    let checks = exec::try_map(&[&first, &second], |u| op.apply_trig(u))?;
    for r in checks {
        if !r.is_zero() {
            return Err(Error::Verification(format!(
                "Klein-Gordon residual {:?}",
                r
            )));
        }
    }
    Ok((first, second))
}

/// Real and imaginary parts of `ξ_{2ai, i}`.
pub fn zeta(a: &Rational, i: u32) -> Result<(QPoly, QPoly)> {
    let x = xi_dissipation(&Gaussian::new(int(0), a * int(2)), i)?;
    Ok((x.re(), x.im()))
}
