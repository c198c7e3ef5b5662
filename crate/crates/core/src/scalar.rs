//! Exact coefficient fields: rationals, Gaussian rationals and Q(sqrt 2).

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always in lowest terms.
pub type Rational = BigRational;

/// Field operations shared by every coefficient type a [`crate::Poly`] can carry.
///
/// Methods take references so big-number coefficients are not cloned on every step.
pub trait Coefficient:
    Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, rhs: &Self) -> Self;
    fn minus(&self, rhs: &Self) -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    /// Multiplicative inverse. Panics on zero, callers check first.
    fn recip(&self) -> Self;
    fn from_rational(q: &Rational) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
    fn divide(&self, rhs: &Self) -> Self {
        self.times(&rhs.recip())
    }
    fn from_i64(v: i64) -> Self {
        Self::from_rational(&rat(v, 1))
    }
    /// Real and imaginary parts when the value lies in Q(i).
    fn re_im(&self) -> Option<(Rational, Rational)>;
    fn from_re_im(re: Rational, im: Rational) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
}

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // huge operands: shift both down to a comparable scale first
            let shift = q.denom().bits().max(q.numer().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Formats as `p/q`, denominator always present.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `p/q`, `p`, or a decimal literal like `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = w.abs() * &scale + f;
        let n = if neg { -mag } else { mag };
        return Ok(BigRational::new(n, scale));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

impl Coefficient for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    // Integer operands skip the gcd normalisation, which dominates exact workloads.
    fn plus(&self, rhs: &Self) -> Self {
        if self.is_integer() && rhs.is_integer() {
            return BigRational::from_integer(self.numer() + rhs.numer());
        }
        self + rhs
    }
    fn minus(&self, rhs: &Self) -> Self {
        if self.is_integer() && rhs.is_integer() {
            return BigRational::from_integer(self.numer() - rhs.numer());
        }
        self - rhs
    }
    fn times(&self, rhs: &Self) -> Self {
        if self.is_integer() && rhs.is_integer() {
            return BigRational::from_integer(self.numer() * rhs.numer());
        }
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn recip(&self) -> Self {
        BigRational::recip(self)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn re_im(&self) -> Option<(Rational, Rational)> {
        Some((self.clone(), Zero::zero()))
    }
    fn from_re_im(re: Rational, im: Rational) -> Option<Self> {
        Zero::is_zero(&im).then_some(re)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(self), 0.0)
    }
}

/// Element `re + im·i` of Q(i).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gaussian {
    pub re: Rational,
    pub im: Rational,
}

impl Gaussian {
    pub fn new(re: Rational, im: Rational) -> Self {
        Gaussian { re, im }
    }
    pub fn real(re: Rational) -> Self {
        Gaussian {
            re,
            im: Zero::zero(),
        }
    }
    pub fn i() -> Self {
        Gaussian {
            re: Zero::zero(),
            im: One::one(),
        }
    }
    pub fn conj(&self) -> Self {
        Gaussian {
            re: self.re.clone(),
            im: -&self.im,
        }
    }
    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.im) {
            write!(f, "{}", self.re)
        } else if Zero::is_zero(&self.re) {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "({} - {}i)", self.re, -&self.im)
        } else {
            write!(f, "({} + {}i)", self.re, self.im)
        }
    }
}

impl Coefficient for Gaussian {
    fn zero() -> Self {
        Gaussian {
            re: Zero::zero(),
            im: Zero::zero(),
        }
    }
    fn one() -> Self {
        Gaussian::real(One::one())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn plus(&self, rhs: &Self) -> Self {
        Gaussian {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
    fn minus(&self, rhs: &Self) -> Self {
        Gaussian {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
    fn times(&self, rhs: &Self) -> Self {
        Gaussian {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
    fn negated(&self) -> Self {
        Gaussian {
            re: -&self.re,
            im: -&self.im,
        }
    }
    fn recip(&self) -> Self {
        let n = self.norm_sqr();
        Gaussian {
            re: &self.re / &n,
            im: -&self.im / &n,
        }
    }
    fn from_rational(q: &Rational) -> Self {
        Gaussian::real(q.clone())
    }
    fn re_im(&self) -> Option<(Rational, Rational)> {
        Some((self.re.clone(), self.im.clone()))
    }
    fn from_re_im(re: Rational, im: Rational) -> Option<Self> {
        Some(Gaussian { re, im })
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

/// Element `a + b·sqrt(2)` of Q(sqrt 2).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub a: Rational,
    pub b: Rational,
}

impl QSqrt2 {
    pub fn new(a: Rational, b: Rational) -> Self {
        QSqrt2 { a, b }
    }
    pub fn sqrt2() -> Self {
        QSqrt2 {
            a: Zero::zero(),
            b: One::one(),
        }
    }
    pub fn int(v: i64) -> Self {
        QSqrt2 {
            a: int(v),
            b: Zero::zero(),
        }
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.b) {
            write!(f, "{}", self.a)
        } else if Zero::is_zero(&self.a) {
            write!(f, "{}√2", self.b)
        } else {
            write!(f, "({} + {}√2)", self.a, self.b)
        }
    }
}

impl Coefficient for QSqrt2 {
    fn zero() -> Self {
        QSqrt2 {
            a: Zero::zero(),
            b: Zero::zero(),
        }
    }
    fn one() -> Self {
        QSqrt2 {
            a: One::one(),
            b: Zero::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn plus(&self, rhs: &Self) -> Self {
        QSqrt2 {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        }
    }
    fn minus(&self, rhs: &Self) -> Self {
        QSqrt2 {
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        }
    }
    fn times(&self, rhs: &Self) -> Self {
        QSqrt2 {
            a: &self.a * &rhs.a + int(2) * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
    fn negated(&self) -> Self {
        QSqrt2 {
            a: -&self.a,
            b: -&self.b,
        }
    }
    fn recip(&self) -> Self {
        // (a - b√2) / (a² - 2b²)
        let n = &self.a * &self.a - int(2) * &self.b * &self.b;
        QSqrt2 {
            a: &self.a / &n,
            b: -&self.b / &n,
        }
    }
    fn from_rational(q: &Rational) -> Self {
        QSqrt2 {
            a: q.clone(),
            b: Zero::zero(),
        }
    }
    fn re_im(&self) -> Option<(Rational, Rational)> {
        Zero::is_zero(&self.b).then(|| (self.a.clone(), Zero::zero()))
    }
    fn from_re_im(re: Rational, im: Rational) -> Option<Self> {
        Zero::is_zero(&im).then(|| QSqrt2::from_rational(&re))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            rat_to_f64(&self.a) + std::f64::consts::SQRT_2 * rat_to_f64(&self.b),
            0.0,
        )
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Binomial coefficient C(n, k) for possibly negative upper index, zero for k < 0.
pub fn binomial(n: i64, k: i64) -> Rational {
    if k < 0 {
        return Zero::zero();
    }
    // acc stays integral: after step j it is C(n, j + 1)
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    BigRational::from_integer(acc)
}

/// Multinomial coefficient (Σ parts)! / Π parts!.
pub fn multinomial(parts: &[u32]) -> BigInt {
    let total: u32 = parts.iter().sum();
    let mut acc = factorial(total);
    for &p in parts {
        acc /= factorial(p);
    }
    acc
}

pub fn rational_pow<C: Coefficient>(c: &C, e: i64) -> C {
    let base = if e < 0 { c.recip() } else { c.clone() };
    let mut acc = C::one();
    for _ in 0..e.unsigned_abs() {
        acc = acc.times(&base);
    }
    acc
}
