//! Initial-value problems with finite trigonometric data: constant-coefficient
//! flag evolutions in `x1` and wave equations `u_tt = d(u)` on trees.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::RwLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec;
use crate::poly::QPoly;
use crate::scalar::rat_to_f64;
use crate::treetricomi::{xi_splitting, Tree};

/// Relative change below which a Y-series is considered converged.
pub const Y_TOLERANCE: f64 = 1e-12;
const Y_DOUBLINGS: u32 = 10;
/// Default initial truncation for Y-series.
pub const Y_DEFAULT_CAP: usize = 32;
/// Step of the finite-difference residual stencils.
pub const FD_STEP: f64 = 1e-3;
/// Tolerance of the adaptive quadrature for the velocity terms.
pub const QUADRATURE_TOL: f64 = 1e-10;
const TAYLOR_MAX_TERMS: usize = 160;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `E_0..=E_len` where `Σ_W E_W z^W = 1/(1 − Σ_s y_s z^s)`; `E_W` is the
/// multinomial sum over all `i` with `Σ s·i_s = W`.
pub fn weight_sums(args: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for w in 1..=len {
        let mut acc = Complex64::new(0.0, 0.0);
        for (s, y) in args
            .iter()
            .enumerate()
            .map(|(i, y)| (i + 1, y))
            .take_while(|(s, _)| *s <= w)
        {
            acc += y * e[w - s];
        }
        e.push(acc);
    }
    e
}

/// `Σ_{W ≥ 0, W+offset ≥ 0} E_W(λ) x^{W+offset} / (W+offset)!`.
///
/// With `offset = r ≥ 0` this is `x^r Y_r(λ_1 x, …, λ_m x^m)`, and lowering the
/// offset by `s` takes the `s`-th derivative in `x`.
pub fn shifted_series(
    lambda: &[Complex64],
    offset: i64,
    x: f64,
    truncation: usize,
) -> Result<Complex64> {
    if truncation == 0 {
        return Err(Error::InvalidArgument(
            "truncation must be at least 1".into(),
        ));
    }
    if x == 0.0 {
        return Ok(if offset > 0 {
            Complex64::new(0.0, 0.0)
        } else {
            weight_sums(lambda, (-offset) as usize)[(-offset) as usize]
        });
    }
    let mu: Vec<Complex64> = lambda
        .iter()
        .enumerate()
        .map(|(i, l)| l * x.powi(i as i32 + 1))
        .collect();
    let x_off = x.powi(offset as i32);
    // h[W] = E_W x^W / W!
    let mut h = vec![Complex64::new(1.0, 0.0)];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut next = 0usize;
    let mut cap = truncation;
    let mut prev: Option<Complex64> = None;
    for _ in 0..=Y_DOUBLINGS {
        while next <= cap {
            let w = next;
            if w > 0 {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut ratio = 1.0;
                for s in 1..=mu.len().min(w) {
                    ratio /= (w + 1 - s) as f64;
                    acc += mu[s - 1] * h[w - s] * ratio;
                }
                h.push(acc);
            }
            let top = w as i64 + offset;
            if top >= 0 {
                let mut ratio = 1.0;
                if offset >= 0 {
                    for j in 1..=offset {
                        ratio /= (w as i64 + j) as f64;
                    }
                } else {
                    for j in 0..(-offset) {
                        ratio *= (w as i64 - j) as f64;
                    }
                }
                sum += h[w] * ratio * x_off;
            }
            next += 1;
        }
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            return Err(Error::YSeriesNotConverging(format!(
                "partial sums overflow at cap {cap}"
            )));
        }
        if let Some(p) = prev {
            if (sum - p).norm() <= Y_TOLERANCE * sum.norm() {
                return Ok(sum);
            }
        }
        prev = Some(sum);
        cap *= 2;
    }
    Err(Error::YSeriesNotConverging(format!(
        "relative change above {Y_TOLERANCE} after {Y_DOUBLINGS} doublings"
    )))
}

/// `Y_r(y_1, …, y_m) = Σ_i (|i| choose i) Π y_s^{i_s} / (r + Σ s·i_s)!`.
pub fn y_function(r: u32, args: &[Complex64], truncation: usize) -> Result<Complex64> {
    shifted_series(args, r as i64, 1.0, truncation)
}

/// `y^{(m)} = b_1 y^{(m−1)} + ⋯ + b_m y` with `y^{(r)}(0) = c_r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeProblem {
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl OdeProblem {
    pub fn new(b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let p = OdeProblem { b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.is_empty() {
            return Err(Error::InvalidArgument(
                "ODE order must be at least 1".into(),
            ));
        }
        if self.c.len() != self.b.len() {
            return Err(Error::InvalidArgument(format!(
                "{} initial values for an order {} equation",
                self.c.len(),
                self.b.len()
            )));
        }
        if self.b.iter().chain(&self.c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("ODE data must be finite".into()));
        }
        Ok(())
    }

    fn lambda(&self) -> Vec<Complex64> {
        self.b.iter().map(|&b| Complex64::new(b, 0.0)).collect()
    }

    /// Weights `a_r` of the fundamental solutions.
    pub fn weights(&self) -> Vec<f64> {
        let amps = triangular_amplitudes(
            &self.lambda(),
            &self
                .c
                .iter()
                .map(|&c| Complex64::new(c, 0.0))
                .collect::<Vec<_>>(),
        );
        amps.into_iter().map(|a| a.re).collect()
    }
}

/// Fundamental solution `φ_r(x) = x^r Y_r(b_1 x, …, b_m x^m)`.
pub fn fundamental_solution(b: &[f64], r: u32, x: f64) -> Result<f64> {
    let lambda: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(shifted_series(&lambda, r as i64, x, Y_DEFAULT_CAP)?.re)
}

pub fn ode_solve(p: &OdeProblem, t: f64) -> Result<f64> {
    ode_derivative(p, 0, t)
}

/// `y^{(s)}(t)`.
pub fn ode_derivative(p: &OdeProblem, s: u32, t: f64) -> Result<f64> {
    p.validate()?;
    let lambda = p.lambda();
    let mut y = 0.0;
    for (r, a) in p.weights().into_iter().enumerate() {
        y += a * shifted_series(&lambda, r as i64 - s as i64, t, Y_DEFAULT_CAP)?.re;
    }
    Ok(y)
}

/// Solves `Σ_{r ≤ s} β_r E_{s−r}(λ) = target_s` for `β`.
fn triangular_amplitudes(lambda: &[Complex64], targets: &[Complex64]) -> Vec<Complex64> {
    let e = weight_sums(lambda, targets.len());
    let mut beta: Vec<Complex64> = Vec::with_capacity(targets.len());
    for (s, t) in targets.iter().enumerate() {
        let corr: Complex64 = beta.iter().enumerate().map(|(r, b)| b * e[s - r]).sum();
        beta.push(t - corr);
    }
    beta
}

/// One term `cos·cos(2π k†·x) + sin·sin(2π k†·x)` of trigonometric data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigMode {
    pub k: Vec<i64>,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Finite trigonometric polynomial on the box `|x_j| ≤ a_j`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrigData {
    pub modes: Vec<TrigMode>,
}

/// `2π Σ k_j x_j / a_j`.
pub fn phase(k: &[i64], half_widths: &[f64], x: &[f64]) -> f64 {
    2.0 * PI
        * k.iter()
            .zip(half_widths)
            .zip(x)
            .map(|((&k, a), x)| k as f64 * x / a)
            .sum::<f64>()
}

fn is_representative(k: &[i64]) -> bool {
    k.iter().find(|&&v| v != 0).is_none_or(|&v| v > 0)
}

impl TrigData {
    pub fn zero() -> Self {
        TrigData::default()
    }

    pub fn single(k: Vec<i64>, cos: f64, sin: f64) -> Self {
        TrigData {
            modes: vec![TrigMode { k, cos, sin }],
        }
    }

    /// Modes folded onto representatives whose first nonzero entry is
    /// positive, duplicates summed. The sine part of the zero mode is dropped.
    pub fn canonical(&self, dim: usize) -> Result<BTreeMap<Vec<i64>, (f64, f64)>> {
        let mut out: BTreeMap<Vec<i64>, (f64, f64)> = BTreeMap::new();
        for m in &self.modes {
            if m.k.len() != dim {
                return Err(Error::NonFiniteData(format!(
                    "mode {:?} needs {dim} entries",
                    m.k
                )));
            }
            if !m.cos.is_finite() || !m.sin.is_finite() {
                return Err(Error::NonFiniteData(format!(
                    "mode {:?} has a non-finite coefficient",
                    m.k
                )));
            }
            let (k, c, s) = if is_representative(&m.k) {
                (m.k.clone(), m.cos, m.sin)
            } else {
                (m.k.iter().map(|v| -v).collect(), m.cos, -m.sin)
            };
            let s = if k.iter().all(|&v| v == 0) { 0.0 } else { s };
            let e = out.entry(k).or_insert((0.0, 0.0));
            e.0 += c;
            e.1 += s;
        }
        Ok(out)
    }

    pub fn eval(&self, half_widths: &[f64], x: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let th = phase(&m.k, half_widths, x);
                m.cos * th.cos() + m.sin * th.sin()
            })
            .sum()
    }
}

/// Data file layout: `{"halfWidths": [...], "modes": [...]}` for the first
/// condition only, or `{"halfWidths": [...], "conditions": [[...], ...]}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IvpData {
    pub half_widths: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<TrigMode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Vec<Vec<TrigMode>>>,
}

impl IvpData {
    /// The first `count` conditions, missing ones zero.
    pub fn conditions(&self, count: usize) -> Result<Vec<TrigData>> {
        let given: Vec<Vec<TrigMode>> = match (&self.modes, &self.conditions) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument(
                    "give either modes or conditions, not both".into(),
                ))
            }
            (Some(m), None) => vec![m.clone()],
            (None, Some(c)) => c.clone(),
            (None, None) => Vec::new(),
        };
        if given.len() > count {
            return Err(Error::InvalidArgument(format!(
                "{} conditions supplied but the problem takes {count}",
                given.len()
            )));
        }
        let mut out: Vec<TrigData> = given.into_iter().map(|modes| TrigData { modes }).collect();
        out.resize(count, TrigData::zero());
        Ok(out)
    }
}

fn check_half_widths(a: &[f64]) -> Result<()> {
    if a.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::InvalidArgument(
            "half-widths must be positive and finite".into(),
        ));
    }
    Ok(())
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Result of evaluating a solver on a set of points.
#[derive(Clone, Debug, PartialEq)]
pub struct IvpReport {
    pub values: Vec<f64>,
    /// Largest deviation of the initial traces from the data.
    pub initial_error: f64,
    /// Largest relative finite-difference residual, when requested.
    pub residual: Option<f64>,
}

/// Tolerance on initial traces.
pub const INITIAL_TOL: f64 = 1e-9;

/// `∂_{x1}^m u = Σ_i ∂_{x1}^{m−i} f_i(∂_{x2}, …, ∂_{xn}) u` with `f_i` polynomials
/// in the symbols `D2..Dn`.
#[derive(Clone, Debug)]
pub struct FlagIvpProblem {
    pub coefficients: Vec<QPoly>,
    /// `a_2..a_n`.
    pub half_widths: Vec<f64>,
    /// `g_0..g_{m−1}`.
    pub data: Vec<TrigData>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlagModeSolution {
    pub k: Vec<i64>,
    /// `f_p(2π√−1 k†)`.
    pub symbols: Vec<Complex64>,
    /// Weight of `x1^r Y_r(x1 λ_1, …)` in the complex mode amplitude.
    pub amplitudes: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlagIvpSolution {
    pub order: usize,
    pub half_widths: Vec<f64>,
    pub modes: Vec<FlagModeSolution>,
}

pub fn flag_ivp_solve(p: &FlagIvpProblem) -> Result<FlagIvpSolution> {
    let m = p.coefficients.len();
    if m == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if p.data.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} initial conditions for order {m}",
            p.data.len()
        )));
    }
    check_half_widths(&p.half_widths)?;
    let dim = p.half_widths.len();
    let allowed: Vec<String> = (2..=dim + 1).map(|j| format!("D{j}")).collect();
    for f in &p.coefficients {
        if let Some(v) = f.support().into_iter().find(|v| !allowed.contains(v)) {
            return Err(Error::InvalidArgument(format!(
                "coefficient uses {v}; expected symbols D2..D{}",
                dim + 1
            )));
        }
    }
    let canon: Vec<BTreeMap<Vec<i64>, (f64, f64)>> = p
        .data
        .iter()
        .map(|g| g.canonical(dim))
        .collect::<Result<_>>()?;
    let mut keys: Vec<Vec<i64>> = canon.iter().flat_map(|c| c.keys().cloned()).collect();
    keys.sort();
    keys.dedup();
    let modes = exec::map(&keys, |k| {
        let symbols: Vec<Complex64> = p
            .coefficients
            .iter()
            .map(|f| {
                f.eval_c64(|name| {
                    let j: usize = name[1..].parse().expect("checked symbol name");
                    Complex64::new(0.0, 2.0 * PI * k[j - 2] as f64 / p.half_widths[j - 2])
                })
            })
            .collect();
        let targets: Vec<Complex64> = canon
            .iter()
            .map(|c| {
                c.get(k)
                    .map_or(Complex64::new(0.0, 0.0), |&(b, s)| Complex64::new(b, -s))
            })
            .collect();
        let amplitudes = triangular_amplitudes(&symbols, &targets);
        FlagModeSolution {
            k: k.clone(),
            symbols,
            amplitudes,
        }
    });
    Ok(FlagIvpSolution {
        order: m,
        half_widths: p.half_widths.clone(),
        modes,
    })
}

impl FlagModeSolution {
    /// Complex amplitude `V^{(s)}(x1)` of the mode.
    pub fn profile(&self, s: u32, x1: f64) -> Result<Complex64> {
        let mut v = Complex64::new(0.0, 0.0);
        for (r, b) in self.amplitudes.iter().enumerate() {
            if *b != Complex64::new(0.0, 0.0) {
                v += b * shifted_series(&self.symbols, r as i64 - s as i64, x1, Y_DEFAULT_CAP)?;
            }
        }
        Ok(v)
    }
}

impl FlagIvpSolution {
    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.half_widths.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "points need {} coordinates",
                self.half_widths.len() + 1
            )));
        }
        Ok(())
    }

    /// `∂_{x1}^s u` at `x = (x1, …, xn)`.
    pub fn derivative(&self, s: u32, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let mut u = 0.0;
        for m in &self.modes {
            let th = phase(&m.k, &self.half_widths, &x[1..]);
            u += (m.profile(s, x[0])? * Complex64::from_polar(1.0, th)).re;
        }
        Ok(u)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.derivative(0, x)
    }

    pub fn eval_many(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        exec::try_map(points, |x| self.eval(x))
    }

    /// Largest `|∂^s u(0, x') − g_s(x')|` over the points' `x'` parts.
    pub fn initial_error(&self, data: &[TrigData], points: &[Vec<f64>]) -> Result<f64> {
        let errs = exec::try_map(points, |x| {
            self.check_point(x)?;
            let mut at0 = x.clone();
            at0[0] = 0.0;
            let mut worst: f64 = 0.0;
            for (s, g) in data.iter().enumerate() {
                let d = self.derivative(s as u32, &at0)? - g.eval(&self.half_widths, &x[1..]);
                worst = worst.max(d.abs());
            }
            Ok::<f64, Error>(worst)
        })?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }

    /// Largest residual, relative to the largest term on the point set, with
    /// `x1`-derivatives from 5-point stencils.
    pub fn residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        if self.order > 4 {
            return Err(Error::InvalidArgument(
                "finite-difference residual supports orders up to 4".into(),
            ));
        }
        let m = self.order;
        let rel = exec::try_map(points, |x| {
            self.check_point(x)?;
            let mut res = 0.0;
            let mut scale = 0.0;
            for mode in &self.modes {
                let rot = Complex64::from_polar(1.0, phase(&mode.k, &self.half_widths, &x[1..]));
                let samples: Vec<Complex64> = (-2..=2)
                    .map(|j| mode.profile(0, x[0] + j as f64 * FD_STEP))
                    .collect::<Result<_>>()?;
                let d: Vec<Complex64> = (0..=m).map(|o| stencil(&samples, o, FD_STEP)).collect();
                let mut r = d[m];
                scale += d[m].norm();
                for (i, l) in mode.symbols.iter().enumerate() {
                    r -= l * d[m - 1 - i];
                    scale += (l * d[m - 1 - i]).norm();
                }
                res += (r * rot).re;
            }
            Ok::<(f64, f64), Error>((res.abs(), scale))
        })?;
        Ok(relative_max(&rel))
    }

    pub fn report(
        &self,
        data: &[TrigData],
        points: &[Vec<f64>],
        with_residual: bool,
    ) -> Result<IvpReport> {
        let values = self.eval_many(points)?;
        let initial_error = self.initial_error(data, points)?;
        if initial_error > INITIAL_TOL {
            return Err(Error::Verification(format!(
                "initial traces off by {initial_error:e}"
            )));
        }
        let residual = if with_residual {
            Some(self.residual(points)?)
        } else {
            None
        };
        Ok(IvpReport {
            values,
            initial_error,
            residual,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order,
            "halfWidths": self.half_widths,
            "modes": self.modes.iter().map(|m| json!({
                "k": m.k,
                "symbols": m.symbols.iter().copied().map(complex_json).collect::<Vec<_>>(),
                "amplitudes": m.amplitudes.iter().copied().map(complex_json).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Largest residual over the largest scale seen on the point set.
fn relative_max(pairs: &[(f64, f64)]) -> f64 {
    let res = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let scale = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    if scale > 0.0 {
        res / scale
    } else {
        res
    }
}

/// Central 5-point derivative of order `o ≤ 4` from samples at `x + jh`, `j = −2..=2`.
fn stencil(f: &[Complex64], o: usize, h: f64) -> Complex64 {
    match o {
        0 => f[2],
        1 => (-f[4] + f[3] * 8.0 - f[1] * 8.0 + f[0]) / (12.0 * h),
        2 => (-f[4] + f[3] * 16.0 - f[2] * 30.0 + f[1] * 16.0 - f[0]) / (12.0 * h * h),
        3 => (f[4] - f[3] * 2.0 + f[1] * 2.0 - f[0]) / (2.0 * h * h * h),
        4 => (f[4] - f[3] * 4.0 + f[2] * 6.0 - f[1] * 4.0 + f[0]) / (h * h * h * h),
        _ => unreachable!("stencil order"),
    }
}

/// Sparse complex polynomial with exponent vectors of a fixed length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NumPoly {
    pub terms: BTreeMap<Vec<u32>, Complex64>,
}

impl NumPoly {
    fn add(&mut self, e: Vec<u32>, c: Complex64) {
        let slot = self.terms.entry(e).or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
    }

    pub fn eval(&self, point: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(point)
                    .map(|(&k, x)| x.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// `Σ |c| Π |x_j|^{e_j}`, an upper bound for `|P(x)|` that does not vanish at roots.
    pub fn majorant(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c.norm()
                    * e.iter()
                        .zip(point)
                        .map(|(&k, x)| x.abs().powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// `(∂_j + √−1 κ)² P`.
    fn shifted_square(&self, j: usize, kappa: f64) -> NumPoly {
        let mut out = NumPoly::default();
        for (e, c) in &self.terms {
            let k = e[j];
            out.add(e.clone(), c * (-kappa * kappa));
            if k >= 1 {
                let mut f = e.clone();
                f[j] -= 1;
                out.add(f, c * I * (2.0 * kappa * k as f64));
            }
            if k >= 2 {
                let mut f = e.clone();
                f[j] -= 2;
                out.add(f, c * (k * (k - 1)) as f64);
            }
        }
        out
    }

    fn times_var(mut self, i: usize) -> NumPoly {
        self.terms = self
            .terms
            .into_iter()
            .map(|(mut e, c)| {
                e[i] += 1;
                (e, c)
            })
            .collect();
        self
    }

    fn plus(mut self, other: NumPoly) -> NumPoly {
        for (e, c) in other.terms {
            self.add(e, c);
        }
        self
    }
}

/// Evaluation scheme for the tree wave solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeWaveMethod {
    /// Mode functions built from `cosh` of the factorized symbol; matches the
    /// data at `t = 0` but only solves the equation to first order in `t`.
    Splitting,
    /// `Σ t^{2i}/(2i)! d^i g_0 + t^{2i+1}/(2i+1)! d^i g_1`, summed until converged.
    Taylor,
}

impl std::str::FromStr for TreeWaveMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "splitting" => Ok(TreeWaveMethod::Splitting),
            "taylor" => Ok(TreeWaveMethod::Taylor),
            _ => Err(Error::InvalidArgument(format!(
                "unknown method {s}; use splitting or taylor"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TreeWaveProblem {
    pub tree: Tree,
    /// `a_1..a_n`.
    pub half_widths: Vec<f64>,
    pub position: TrigData,
    pub velocity: TrigData,
    pub method: TreeWaveMethod,
}

#[derive(Debug)]
pub struct TreeWaveMode {
    pub k: Vec<i64>,
    /// `b_0 − √−1 c_0`.
    pub position: Complex64,
    /// `b_1 − √−1 c_1`.
    pub velocity: Complex64,
    /// `Σ ξ_i(t, 2π√−1 k†)` in `(t, x1..xn)`.
    pub symbol: NumPoly,
    symbol_t: NumPoly,
    kappa: Vec<f64>,
    /// `d^i(e^{iθ}) = P_i e^{iθ}`, extended on demand.
    powers: RwLock<Vec<NumPoly>>,
}

#[derive(Debug)]
pub struct TreeWaveSolution {
    pub tree: Tree,
    pub half_widths: Vec<f64>,
    pub method: TreeWaveMethod,
    pub modes: Vec<TreeWaveMode>,
}

pub fn tree_wave_solve(p: &TreeWaveProblem) -> Result<TreeWaveSolution> {
    p.tree.validate()?;
    let n = p.tree.nodes;
    if p.half_widths.len() != n {
        return Err(Error::InvalidArgument(format!("{n} half-widths required")));
    }
    check_half_widths(&p.half_widths)?;
    let g0 = p.position.canonical(n)?;
    let g1 = p.velocity.canonical(n)?;
    let mut keys: Vec<Vec<i64>> = g0.keys().chain(g1.keys()).cloned().collect();
    keys.sort();
    keys.dedup();
    let split = xi_splitting(&p.tree)?;
    let total = split.total();
    let total_t = total.derivative("t", 1);
    let modes = exec::map(&keys, |k| {
        let kappa: Vec<f64> = k
            .iter()
            .zip(&p.half_widths)
            .map(|(&k, a)| 2.0 * PI * k as f64 / a)
            .collect();
        let amp = |g: &BTreeMap<Vec<i64>, (f64, f64)>| {
            g.get(k)
                .map_or(Complex64::new(0.0, 0.0), |&(b, c)| Complex64::new(b, -c))
        };
        let mut p0 = NumPoly::default();
        p0.add(vec![0; n], Complex64::new(1.0, 0.0));
        TreeWaveMode {
            k: k.clone(),
            position: amp(&g0),
            velocity: amp(&g1),
            symbol: numeric_symbol(&total, &kappa),
            symbol_t: numeric_symbol(&total_t, &kappa),
            kappa,
            powers: RwLock::new(vec![p0]),
        }
    });
    Ok(TreeWaveSolution {
        tree: p.tree.clone(),
        half_widths: p.half_widths.clone(),
        method: p.method,
        modes,
    })
}

/// Substitutes `D_j = √−1 κ_j` into a polynomial in `t`, `x_j`, `D_j`; the
/// result has exponent vectors `(t, x1..xn)`.
fn numeric_symbol(total: &QPoly, kappa: &[f64]) -> NumPoly {
    let n = kappa.len();
    let mut out = NumPoly::default();
    for (powers, c) in total.named_terms() {
        let mut e = vec![0u32; n + 1];
        let mut coef = Complex64::new(rat_to_f64(&c), 0.0);
        for (name, k) in powers {
            if name == "t" {
                e[0] = k as u32;
                continue;
            }
            let j: usize = name[1..].parse().expect("generated variable names");
            if name.starts_with('D') {
                coef *= (I * kappa[j - 1]).powi(k);
            } else {
                e[j] = k as u32;
            }
        }
        out.add(e, coef);
    }
    out
}

impl TreeWaveMode {
    fn rotation(&self, x: &[f64]) -> Complex64 {
        let th: f64 = self.kappa.iter().zip(x).map(|(k, x)| k * x).sum();
        Complex64::from_polar(1.0, th)
    }

    fn symbol_at(&self, t: f64, x: &[f64]) -> Complex64 {
        let mut pt = Vec::with_capacity(x.len() + 1);
        pt.push(t);
        pt.extend_from_slice(x);
        self.symbol.eval(&pt)
    }

    /// `e^{iθ} cosh(S)`: real part is `φ_k`, imaginary part is `ψ_k`.
    pub fn splitting_profile(&self, t: f64, x: &[f64]) -> Complex64 {
        self.rotation(x) * self.symbol_at(t, x).cosh()
    }

    /// `∫_0^t e^{iθ} cosh(S(s)) ds` by adaptive Simpson quadrature.
    pub fn splitting_integral(&self, t: f64, x: &[f64]) -> Complex64 {
        adaptive_simpson(&|s| self.splitting_profile(s, x), 0.0, t, QUADRATURE_TOL)
    }

    fn power(&self, i: usize) -> Option<NumPoly> {
        if let Some(p) = self.powers.read().expect("cache lock").get(i) {
            return Some(p.clone());
        }
        None
    }

    fn extend_powers(&self, tree: &Tree, len: usize) {
        let mut cache = self.powers.write().expect("cache lock");
        while cache.len() < len {
            let prev = cache.last().expect("seeded with P_0");
            let mut next = prev.shifted_square(0, self.kappa[0]);
            for &(i, j) in &tree.edges {
                next = next.plus(
                    prev.shifted_square(j - 1, self.kappa[j - 1])
                        .times_var(i - 1),
                );
            }
            cache.push(next);
        }
    }

    fn taylor_value(&self, tree: &Tree, t: f64, x: &[f64]) -> Result<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        if self.position == zero && self.velocity == zero {
            return Ok(zero);
        }
        let mut sum = zero;
        let mut even = 1.0; // t^{2i}/(2i)!
        let mut odd = t; // t^{2i+1}/(2i+1)!
        let mut small = 0;
        let mut total = 0.0;
        for i in 0..TAYLOR_MAX_TERMS {
            let p = match self.power(i) {
                Some(p) => p,
                None => {
                    self.extend_powers(tree, (2 * i).max(8));
                    self.power(i).expect("extended")
                }
            };
            let weight = self.position * even + self.velocity * odd;
            sum += p.eval(x) * weight;
            if !(sum.re.is_finite() && sum.im.is_finite()) {
                break;
            }
            // Judge convergence on the majorant: p can vanish at x for a few i.
            let bound = p.majorant(x) * weight.norm();
            total += bound;
            small = if bound <= 1e-17 * total.max(1e-300) {
                small + 1
            } else {
                0
            };
            if small >= 2 {
                return Ok(sum * self.rotation(x));
            }
            let a = (2 * i + 1) as f64;
            let b = (2 * i + 2) as f64;
            let c = (2 * i + 3) as f64;
            even *= t * t / (a * b);
            odd *= t * t / (b * c);
        }
        Err(Error::Verification(format!(
            "Taylor series in t did not converge for mode {:?} at t = {t}",
            self.k
        )))
    }

    /// Complex mode value whose real part is the mode's contribution to `u`.
    fn value(&self, tree: &Tree, method: TreeWaveMethod, t: f64, x: &[f64]) -> Result<Complex64> {
        match method {
            TreeWaveMethod::Taylor => self.taylor_value(tree, t, x),
            TreeWaveMethod::Splitting => {
                let mut v = self.position * self.splitting_profile(t, x);
                if self.velocity != Complex64::new(0.0, 0.0) {
                    v += self.velocity * self.splitting_integral(t, x);
                }
                Ok(v)
            }
        }
    }

    /// `∂_t` of the complex mode value at `t = 0`.
    fn velocity_at_zero(&self, method: TreeWaveMethod, x: &[f64]) -> Complex64 {
        let rot = self.rotation(x);
        match method {
            TreeWaveMethod::Taylor => self.velocity * rot,
            TreeWaveMethod::Splitting => {
                let mut pt = vec![0.0];
                pt.extend_from_slice(x);
                let s = self.symbol.eval(&pt);
                let st = self.symbol_t.eval(&pt);
                self.position * rot * s.sinh() * st + self.velocity * rot * s.cosh()
            }
        }
    }
}

fn simpson(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    fa: Complex64,
    b: f64,
    fb: Complex64,
) -> (f64, Complex64, Complex64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (fa + fm * 4.0 + fb) * ((b - a) / 6.0))
}

/// Adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    if a == b {
        return Complex64::new(0.0, 0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    simpson_step(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    fa: Complex64,
    b: f64,
    fb: Complex64,
    m: f64,
    fm: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
}

impl TreeWaveSolution {
    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.tree.nodes {
            return Err(Error::InvalidArgument(format!(
                "points need {} coordinates",
                self.tree.nodes
            )));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let mut u = 0.0;
        for m in &self.modes {
            u += m.value(&self.tree, self.method, t, x)?.re;
        }
        Ok(u)
    }

    pub fn eval_many(&self, t: f64, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        exec::try_map(points, |x| self.eval(t, x))
    }

    /// `∂_t u(0, x)`.
    pub fn velocity_at_zero(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self
            .modes
            .iter()
            .map(|m| m.velocity_at_zero(self.method, x).re)
            .sum())
    }

    pub fn initial_error(
        &self,
        position: &TrigData,
        velocity: &TrigData,
        points: &[Vec<f64>],
    ) -> Result<f64> {
        let errs = exec::try_map(points, |x| {
            let e0 = (self.eval(0.0, x)? - position.eval(&self.half_widths, x)).abs();
            let e1 = (self.velocity_at_zero(x)? - velocity.eval(&self.half_widths, x)).abs();
            Ok::<f64, Error>(e0.max(e1))
        })?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }

    /// Largest relative residual of `u_tt − d(u)` with 5-point second
    /// differences in every variable.
    pub fn residual(&self, t: f64, points: &[Vec<f64>]) -> Result<f64> {
        let rel = exec::try_map(points, |x| {
            let h = FD_STEP;
            let along = |var: Option<usize>| -> Result<f64> {
                let mut f = Vec::with_capacity(5);
                for j in -2..=2 {
                    let step = j as f64 * h;
                    let v = match var {
                        None => self.eval(t + step, x)?,
                        Some(i) => {
                            let mut y = x.clone();
                            y[i] += step;
                            self.eval(t, &y)?
                        }
                    };
                    f.push(Complex64::new(v, 0.0));
                }
                Ok(stencil(&f, 2, h).re)
            };
            let utt = along(None)?;
            let mut du = along(Some(0))?;
            let mut scale = utt.abs() + du.abs();
            for &(i, j) in &self.tree.edges {
                let term = x[i - 1] * along(Some(j - 1))?;
                du += term;
                scale += term.abs();
            }
            let r = (utt - du).abs();
            Ok::<(f64, f64), Error>((r, scale))
        })?;
        Ok(relative_max(&rel))
    }

    pub fn report(
        &self,
        position: &TrigData,
        velocity: &TrigData,
        t: f64,
        points: &[Vec<f64>],
        with_residual: bool,
    ) -> Result<IvpReport> {
        let values = self.eval_many(t, points)?;
        let initial_error = self.initial_error(position, velocity, points)?;
        if initial_error > INITIAL_TOL {
            return Err(Error::Verification(format!(
                "initial traces off by {initial_error:e}"
            )));
        }
        let residual = if with_residual {
            Some(self.residual(t, points)?)
        } else {
            None
        };
        Ok(IvpReport {
            values,
            initial_error,
            residual,
        })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tree": self.tree.to_json(),
            "halfWidths": self.half_widths,
            "method": self.method,
            "modes": self.modes.iter().map(|m| json!({
                "k": m.k,
                "position": complex_json(m.position),
                "velocity": complex_json(m.velocity),
                "symbolTerms": m.symbol.terms.len(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Tensor grid, last coordinate varying fastest. A count of 1 takes the lower end.
pub fn grid(ranges: &[(f64, f64)], counts: &[usize]) -> Result<Vec<Vec<f64>>> {
    if ranges.len() != counts.len() {
        return Err(Error::InvalidArgument(format!(
            "{} ranges but {} counts",
            ranges.len(),
            counts.len()
        )));
    }
    if counts.contains(&0) {
        return Err(Error::InvalidArgument(
            "grid counts must be positive".into(),
        ));
    }
    let mut out = vec![Vec::new()];
    for (&(lo, hi), &c) in ranges.iter().zip(counts) {
        let axis: Vec<f64> = (0..c)
            .map(|i| {
                if c == 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (c - 1) as f64
                }
            })
            .collect();
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    Ok(out)
}
