//! Solution families for flag equations: constant-coefficient sums of
//! powers of partial derivatives, harmonic polynomials, general flag systems,
//! the Riemannian wave equation and two perturbation variants.

use crate::error::{Error, Result};
use crate::family::{box_indices, compositions, coordinate_names, meta, BasisElement, BasisFamily};
use crate::opalg::{nested_right_inverses, random_sample, FlagTerm, Operator, SeriesSolverConfig};
use crate::poly::QPoly;
use crate::scalar::{binomial, int, multinomial, Rational};

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn caps_label(caps: &[u32]) -> String {
    let parts: Vec<String> = caps.iter().map(u32::to_string).collect();
    format!("l_i <= ({})", parts.join(","))
}

/// `Σ_i ∂_{x_i}^{m_i}` in variables `x1..xn`.
pub fn constant_coefficient_operator(orders: &[u32]) -> Operator {
    let vars = coordinate_names(orders.len());
    Operator::Sum(
        vars.iter()
            .zip(orders)
            .map(|(v, &m)| Operator::d(v, m))
            .collect(),
    )
}

/// Basis of polynomial solutions of `Σ ∂_{x_i}^{m_i} u = 0`.
///
/// `caps[i]` bounds `ℓ_{i+2}`; `ℓ_1` runs over `0..m_1`.
pub fn constant_coefficient_basis(orders: &[u32], caps: &[u32]) -> Result<BasisFamily> {
    let n = orders.len();
    if n < 2 || orders.contains(&0) {
        return Err(Error::InvalidArgument(
            "need at least two positive orders".into(),
        ));
    }
    if caps.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} degree caps, got {}",
            n - 1,
            caps.len()
        )));
    }
    let vars = coordinate_names(n);
    let mut indices = Vec::new();
    for l1 in 0..orders[0] {
        for rest in box_indices(caps) {
            let mut l = vec![l1];
            l.extend(rest);
            indices.push(l);
        }
    }
    let op = constant_coefficient_operator(orders);
    BasisFamily::build(
        "constant",
        op,
        format!("l_1 < {}, {}", orders[0], caps_label(caps)),
        &indices,
        |l| {
            let solution = constant_coefficient_element(orders, l, &vars)?;
            Ok(BasisElement {
                index: meta([("l", l.as_slice().into())]),
                solution,
            })
        },
    )
}

fn constant_coefficient_element(orders: &[u32], l: &[u32], vars: &[String]) -> Result<QPoly> {
    let all = names(vars);
    let ks: Vec<u32> = (1..orders.len()).map(|i| l[i] / orders[i]).collect();
    let mut u = QPoly::zero();
    for k in box_indices(&ks) {
        let total: u32 = k.iter().sum();
        let sign = if total.is_multiple_of(2) { int(1) } else { int(-1) };
        let c = sign * Rational::from_integer(multinomial(&k));
        let mut term =
            QPoly::monomial(c, &[(all[0], l[0] as i32)]).integrate(all[0], total * orders[0])?;
        for (j, &kj) in k.iter().enumerate() {
            let i = j + 1;
            term = term.times(
                &QPoly::monomial(int(1), &[(all[i], l[i] as i32)])
                    .derivative(all[i], kj * orders[i]),
            );
        }
        u = u + term;
    }
    Ok(u.with_vars(&all))
}

/// Basis of harmonic polynomials in `x1..xn`, indexed by `ε ∈ {0,1}` and `ℓ_2..ℓ_n`.
pub fn harmonic_basis(n: usize, caps: &[u32]) -> Result<BasisFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument("harmonic basis needs n >= 2".into()));
    }
    if caps.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} degree caps, got {}",
            n - 1,
            caps.len()
        )));
    }
    let indices: Vec<(u32, Vec<u32>)> = (0..2)
        .flat_map(|e| box_indices(caps).into_iter().map(move |l| (e, l)))
        .collect();
    harmonic_family(n, &indices, caps_label(caps))
}

/// Harmonic elements of total degree exactly `k`, that is `ε + Σ ℓ_i = k`.
pub fn harmonic_degree_slice(n: usize, k: u32) -> Result<BasisFamily> {
    if n < 2 {
        return Err(Error::InvalidArgument("harmonic basis needs n >= 2".into()));
    }
    let mut indices = Vec::new();
    for e in 0..2u32.min(k + 1) {
        for l in compositions(n - 1, k - e) {
            indices.push((e, l));
        }
    }
    harmonic_family(n, &indices, format!("total degree {k}"))
}

fn harmonic_family(
    n: usize,
    indices: &[(u32, Vec<u32>)],
    truncation: String,
) -> Result<BasisFamily> {
    let vars = coordinate_names(n);
    let op = Operator::laplacian(&names(&vars));
    BasisFamily::build("harmonic", op, truncation, indices, |(e, l)| {
        let solution = harmonic_element(*e, l, &vars);
        Ok(BasisElement {
            index: meta([("epsilon", (*e).into()), ("l", l.as_slice().into())]),
            solution,
        })
    })
}

fn harmonic_element(eps: u32, l: &[u32], vars: &[String]) -> QPoly {
    let all = names(vars);
    let half: Vec<u32> = l.iter().map(|&v| v / 2).collect();
    let mut u = QPoly::zero();
    for r in box_indices(&half) {
        let total: u32 = r.iter().sum();
        let doubled: Vec<u32> = r.iter().map(|&v| 2 * v).collect();
        let mut c = Rational::from_integer(multinomial(&r));
        for (&li, &ri) in l.iter().zip(&r) {
            c *= binomial(li as i64, 2 * ri as i64);
        }
        c /= int(1 + 2 * (eps * total) as i64) * Rational::from_integer(multinomial(&doubled));
        if total % 2 == 1 {
            c = -c;
        }
        let mut exps = vec![(all[0], (eps + 2 * total) as i32)];
        for (i, (&li, &ri)) in l.iter().zip(&r).enumerate() {
            exps.push((all[i + 1], (li - 2 * ri) as i32));
        }
        u = u + QPoly::monomial(c, &exps);
    }
    u.with_vars(&all)
}

/// `(∂_{x_1}^{m_1} + f_1 ∂_{x_2}^{m_2} + … + f_{n-1} ∂_{x_n}^{m_n}) u = 0` with `f_i` in the first `i` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagEquationSpec {
    pub vars: Vec<String>,
    pub orders: Vec<u32>,
    pub coefficients: Vec<QPoly>,
}

impl FlagEquationSpec {
    pub fn new(vars: Vec<String>, orders: Vec<u32>, coefficients: Vec<QPoly>) -> Result<Self> {
        let spec = FlagEquationSpec {
            vars,
            orders,
            coefficients,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Uses variables `x1..xn`.
    pub fn standard(orders: Vec<u32>, coefficients: Vec<QPoly>) -> Result<Self> {
        Self::new(coordinate_names(orders.len()), orders, coefficients)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.orders.len();
        if n < 2 {
            return Err(Error::NotFlagSystem("need at least two variables".into()));
        }
        if self.vars.len() != n || self.coefficients.len() != n - 1 {
            return Err(Error::NotFlagSystem(format!(
                "{} orders need {} variables and {} coefficients",
                n,
                n,
                n - 1
            )));
        }
        if self.orders.contains(&0) {
            return Err(Error::NotFlagSystem("orders must be positive".into()));
        }
        crate::opalg::check_flag(&self.terms())
    }

    pub fn terms(&self) -> Vec<FlagTerm> {
        let mut out = vec![FlagTerm::new(QPoly::one(), &self.vars[0], self.orders[0])];
        for (i, f) in self.coefficients.iter().enumerate() {
            out.push(FlagTerm::new(
                f.clone(),
                &self.vars[i + 1],
                self.orders[i + 1],
            ));
        }
        out
    }

    pub fn operator(&self) -> Operator {
        crate::opalg::flag_operator(&self.terms())
    }
}

/// `σ_{r+1,ℓ}(h) = Σ_i (-d_r⁻ f_r)^i(h) ∂_{x_{r+1}}^{i m_{r+1}}(x_{r+1}^ℓ)`, with `r` zero-based here.
fn sigma(
    spec: &FlagEquationSpec,
    inverses: &[Operator],
    r: usize,
    ell: u32,
    h: &QPoly,
) -> Result<QPoly> {
    let var = spec.vars[r + 1].as_str();
    let m = spec.orders[r + 1];
    let f = &spec.coefficients[r];
    let step = Operator::Compose(vec![inverses[r].clone(), Operator::mul(f.clone())]).neg();
    let mut out = QPoly::zero();
    let mut coeff = h.clone();
    let mut i = 0;
    loop {
        if i * m > ell {
            break;
        }
        let power = QPoly::monomial(int(1), &[(var, ell as i32)]).derivative(var, i * m);
        out = out + coeff.times(&power);
        coeff = step.apply(&coeff)?;
        if coeff.is_zero() {
            break;
        }
        i += 1;
    }
    Ok(out)
}

/// Basis elements `σ_{n,ℓ_n} … σ_{2,ℓ_2}(x_1^{ℓ_1})` of a flag equation.
pub fn flag_basis(spec: &FlagEquationSpec, caps: &[u32]) -> Result<BasisFamily> {
    spec.validate()?;
    let n = spec.orders.len();
    if caps.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "expected {} degree caps, got {}",
            n - 1,
            caps.len()
        )));
    }
    let inverses = nested_right_inverses(&spec.terms())?;
    let mut indices = Vec::new();
    for l1 in 0..spec.orders[0] {
        for rest in box_indices(caps) {
            let mut l = vec![l1];
            l.extend(rest);
            indices.push(l);
        }
    }
    BasisFamily::build(
        "flag",
        spec.operator(),
        format!("l_1 < {}, {}", spec.orders[0], caps_label(caps)),
        &indices,
        |l| {
            let solution = flag_element(spec, &inverses, l)?;
            Ok(BasisElement {
                index: meta([("l", l.as_slice().into())]),
                solution,
            })
        },
    )
}

/// A single element for the index `ℓ = (ℓ_1..ℓ_n)`.
pub fn flag_element(spec: &FlagEquationSpec, inverses: &[Operator], l: &[u32]) -> Result<QPoly> {
    let mut h = QPoly::monomial(int(1), &[(spec.vars[0].as_str(), l[0] as i32)]);
    for r in 0..spec.orders.len() - 1 {
        h = sigma(spec, inverses, r, l[r + 1], &h)?;
    }
    Ok(h.with_vars(&names(&spec.vars)))
}

/// Coordinates for the Riemannian wave equation: `z0, z1, x2..xn`.
pub fn riemannian_vars(n: usize) -> Vec<String> {
    let mut v = vec!["z0".to_string(), "z1".to_string()];
    v.extend((2..=n).map(|i| format!("x{i}")));
    v
}

/// `2∂_{z0}∂_{z1} + Σ_{i,j≥2} g_{ij}(z1) ∂_{x_i}∂_{x_j}`; `g[i-2][j-2]` holds `g_{ij}`.
pub fn riemannian_operator(g: &[Vec<QPoly>]) -> Operator {
    let n = g.len() + 1;
    let vars = riemannian_vars(n);
    let mut parts = vec![Operator::Scale(int(2)) * Operator::d("z0", 1) * Operator::d("z1", 1)];
    parts.extend(riemannian_perturbation(g, &vars));
    Operator::Sum(parts)
}

fn riemannian_perturbation(g: &[Vec<QPoly>], vars: &[String]) -> Vec<Operator> {
    let mut parts = Vec::new();
    for (i, row) in g.iter().enumerate() {
        for (j, gij) in row.iter().enumerate() {
            if gij.is_zero() {
                continue;
            }
            let xi = &vars[i + 2];
            let xj = &vars[j + 2];
            let dd = if xi == xj {
                Operator::d(xi, 2)
            } else {
                Operator::d(xi, 1) * Operator::d(xj, 1)
            };
            parts.push(Operator::mul(gij.clone()) * dd);
        }
    }
    parts
}

/// `Σ_m (-½ ∫_{z0}∫_{z1} Σ g_{ij}(z1) ∂_i∂_j)^m (f0 g0 + f1 g1)`.
pub fn riemannian_wave_solution(
    g: &[Vec<QPoly>],
    f0: &QPoly,
    f1: &QPoly,
    g0: &QPoly,
    g1: &QPoly,
) -> Result<QPoly> {
    let n = g.len() + 1;
    if g.iter().any(|row| row.len() != g.len()) {
        return Err(Error::InvalidArgument("metric block must be square".into()));
    }
    let vars = riemannian_vars(n);
    for row in g {
        for gij in row {
            if gij.support().iter().any(|v| v != "z1") {
                return Err(Error::NotFlagCompatible(format!(
                    "metric entry {gij} must depend on z1 only"
                )));
            }
        }
    }
    if f0.support().iter().any(|v| v != "z0") || f1.support().iter().any(|v| v != "z1") {
        return Err(Error::InvalidArgument(
            "f0 must be a polynomial in z0 and f1 in z1".into(),
        ));
    }
    for gk in [g0, g1] {
        if gk.support().iter().any(|v| !vars[2..].contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "{gk} must only involve x2..x{n}"
            )));
        }
    }
    let t1 = Operator::Scale(int(2)) * Operator::d("z0", 1) * Operator::d("z1", 1);
    let t1_inv = Operator::Scale(Rational::new(1.into(), 2.into()))
        * Operator::integral("z0", 1)
        * Operator::integral("z1", 1);
    let t2 = Operator::Sum(riemannian_perturbation(g, &vars));
    let cfg = SeriesSolverConfig::new(t1, t1_inv, t2, None)?;
    let u = cfg.solve(f0, g0)? + cfg.solve(f1, g1)?;
    Ok(u.with_vars(&names(&vars)))
}

/// Rewrites `z0 = x1 + t`, `z1 = x1 - t`.
///
/// Since `∂_t² - ∂_{x1}² = -4∂_{z0}∂_{z1}`, the result solves
/// `u_tt - u_{x1x1} - 2 Σ g_{ij}(x1 - t) u_{x_i x_j} = 0`; see [`riemannian_time_operator`].
pub fn riemannian_to_time(u: &QPoly) -> Result<QPoly> {
    let x1 = QPoly::var("x1");
    let t = QPoly::var("t");
    u.substitute("z0", &(&x1 + &t))?
        .substitute("z1", &(&x1 - &t))
}

/// `∂_t² - ∂_{x1}² - 2 Σ g_{ij}(x1 - t) ∂_i∂_j`, the image of [`riemannian_operator`] under the change of variables.
pub fn riemannian_time_operator(g: &[Vec<QPoly>]) -> Result<Operator> {
    let n = g.len() + 1;
    let vars = riemannian_vars(n);
    let shift = QPoly::var("x1") - QPoly::var("t");
    let mut parts = vec![Operator::d("t", 2), Operator::d("x1", 2).neg()];
    for op in riemannian_perturbation(g, &vars) {
        let Operator::Compose(mut f) = op else {
            unreachable!("perturbation terms are compositions")
        };
        if let Operator::MulPoly(c) = &f[0] {
            f[0] = Operator::MulPoly(c.substitute("z1", &shift)?.scale(&int(-2)));
        }
        parts.push(Operator::Compose(f));
    }
    Ok(Operator::Sum(parts))
}

fn commute_on_sample(a: &Operator, b: &Operator, sample: &[QPoly]) -> Result<bool> {
    for p in sample {
        if a.apply(&b.apply(p)?)? != b.apply(&a.apply(p)?)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solution of `(T0^m - Σ_r T0^{m-r} T_r) u = 0` from the multinomial expansion
/// `Σ C(|i|; i) (T0⁻)^{Σ s i_s}(h) Π T_r^{i_r}(g)`.
///
/// `h` must satisfy `T0^m(h) = 0` and the operators are checked to commute on a seeded sample.
pub fn power_perturbation_solve(
    t0: &Operator,
    t0_inv: &Operator,
    perturbations: &[Operator],
    h: &QPoly,
    g: &QPoly,
) -> Result<QPoly> {
    let m = perturbations.len();
    if m == 0 {
        return Err(Error::InvalidArgument(
            "need at least one perturbation".into(),
        ));
    }
    let mut vars: Vec<String> = t0.variables().into_iter().collect();
    for p in perturbations {
        vars.extend(p.variables());
    }
    vars.extend(h.support());
    vars.extend(g.support());
    vars.sort();
    vars.dedup();
    let sample: Vec<QPoly> = random_sample(&vars, 5, 3, 0x7e57);
    for (i, ti) in perturbations.iter().enumerate() {
        if !commute_on_sample(t0, ti, &sample)? {
            return Err(Error::PerturbationHypotheses(format!(
                "T0 and T{} do not commute",
                i + 1
            )));
        }
        for (j, tj) in perturbations.iter().enumerate().skip(i + 1) {
            if !commute_on_sample(ti, tj, &sample)? {
                return Err(Error::PerturbationHypotheses(format!(
                    "T{} and T{} do not commute",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let t0m = Operator::Compose(vec![t0.clone(); m]);
    let r = t0m.apply(h)?;
    if !r.is_zero() {
        return Err(Error::KernelPrecondition(format!("T0^{m}(h) = {r}")));
    }

    let deg = g.total_degree().unwrap_or(0).max(0) as usize;
    let order = perturbations
        .iter()
        .map(Operator::max_derivative_order)
        .max()
        .unwrap_or(1)
        .max(1) as usize;
    let limit = 2 + deg * order;
    let mut u = QPoly::zero();
    let mut level = 0usize;
    loop {
        if level > limit {
            return Err(Error::SeriesDidNotNilpotate { iterations: limit });
        }
        let mut any = false;
        for idx in compositions(m, level as u32) {
            let mut pg = g.clone();
            for (r, &ir) in idx.iter().enumerate().rev() {
                for _ in 0..ir {
                    pg = perturbations[r].apply(&pg)?;
                }
            }
            if pg.is_zero() {
                continue;
            }
            any = true;
            let weight: u32 = idx
                .iter()
                .enumerate()
                .map(|(s, &i)| (s as u32 + 1) * i)
                .sum();
            let mut ph = h.clone();
            for _ in 0..weight {
                ph = t0_inv.apply(&ph)?;
            }
            let c = Rational::from_integer(multinomial(&idx));
            u = u + ph.times(&pg).scale(&c);
        }
        if !any {
            break;
        }
        level += 1;
    }

    let mut parts = vec![t0m];
    for (i, ti) in perturbations.iter().enumerate() {
        let mut factors = vec![Operator::Scale(int(-1))];
        factors.extend(std::iter::repeat_n(t0.clone(), m - i - 1));
        factors.push(ti.clone());
        parts.push(Operator::Compose(factors));
    }
    let residual = Operator::Sum(parts).apply(&u)?;
    if !residual.is_zero() {
        return Err(Error::Verification(format!(
            "power perturbation residual {residual}"
        )));
    }
    Ok(u)
}

/// Solution `Σ_{s=0}^{i} σ_s · d2^s(ψ)` of `(d1 - h d2) u = 0`, where `σ_0 = f`,
/// `d1(σ_0) = 0` and `d1(σ_s) = h σ_{s-1}`; `ψ` must satisfy `d2^{i+1}(ψ) = 0`.
pub fn twisted_flag_solve(
    d1: &Operator,
    h: &QPoly,
    d2: &Operator,
    f: &QPoly,
    sigmas: &[QPoly],
    psi: &QPoly,
) -> Result<QPoly> {
    let v1 = d1.apply(f)?;
    if !v1.is_zero() {
        return Err(Error::SigmaChain(format!("d1(f) = {v1}")));
    }
    let mut prev = f.clone();
    for (s, sig) in sigmas.iter().enumerate() {
        let lhs = d1.apply(sig)?;
        let rhs = h.times(&prev);
        if lhs != rhs {
            return Err(Error::SigmaChain(format!(
                "d1(σ_{}) = {lhs}, expected {rhs}",
                s + 1
            )));
        }
        prev = sig.clone();
    }
    let mut powers = vec![psi.clone()];
    for _ in 0..=sigmas.len() {
        let next = d2.apply(powers.last().expect("nonempty"))?;
        powers.push(next);
    }
    if !powers[sigmas.len() + 1].is_zero() {
        return Err(Error::InvalidArgument(format!(
            "d2^{}(ψ) must vanish",
            sigmas.len() + 1
        )));
    }
    let mut u = f.times(&powers[0]);
    for (s, sig) in sigmas.iter().enumerate() {
        u = u + sig.times(&powers[s + 1]);
    }
    let full = d1.clone() + (Operator::mul(h.clone()) * d2.clone()).neg();
    let r = full.apply(&u)?;
    if !r.is_zero() {
        return Err(Error::Verification(format!("(d1 - h d2)(u) = {r}")));
    }
    Ok(u)
}
