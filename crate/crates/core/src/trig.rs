//! Trig-polynomials `P·cos(a t) + Q·sin(a t)`.

use crate::poly::Poly;
use crate::scalar::{Coefficient, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<C: Coefficient = Rational> {
    pub cos_part: Poly<C>,
    pub sin_part: Poly<C>,
    pub frequency: Rational,
    pub time_var: String,
}

impl<C: Coefficient> TrigPoly<C> {
    pub fn new(cos_part: Poly<C>, sin_part: Poly<C>, frequency: Rational, time_var: &str) -> Self {
        TrigPoly {
            cos_part,
            sin_part,
            frequency,
            time_var: time_var.to_string(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.cos_part.is_zero() && self.sin_part.is_zero()
    }

    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.frequency, other.frequency, "frequency mismatch");
        TrigPoly {
            cos_part: &self.cos_part + &other.cos_part,
            sin_part: &self.sin_part + &other.sin_part,
            frequency: self.frequency.clone(),
            time_var: self.time_var.clone(),
        }
    }

    pub fn map_parts(&self, f: impl Fn(&Poly<C>) -> Poly<C>) -> Self {
        TrigPoly {
            cos_part: f(&self.cos_part),
            sin_part: f(&self.sin_part),
            frequency: self.frequency.clone(),
            time_var: self.time_var.clone(),
        }
    }

    /// d/dt, with d/dt cos(at) = -a sin(at).
    pub fn time_derivative(&self) -> Self {
        let a = C::from_rational(&self.frequency);
        let t = &self.time_var;
        TrigPoly {
            cos_part: self.cos_part.derivative(t, 1) + self.sin_part.scale(&a),
            sin_part: self.sin_part.derivative(t, 1) - self.cos_part.scale(&a),
            frequency: self.frequency.clone(),
            time_var: t.clone(),
        }
    }

    /// Derivative of any order in any variable.
    pub fn derivative(&self, var: &str, order: u32) -> Self {
        if var == self.time_var {
            let mut out = self.clone();
            for _ in 0..order {
                out = out.time_derivative();
            }
            out
        } else {
            self.map_parts(|p| p.derivative(var, order))
        }
    }

    pub fn eval(&self, t: f64, value: impl Fn(&str) -> f64) -> f64 {
        let a = crate::scalar::rat_to_f64(&self.frequency);
        let tv = self.time_var.clone();
        let f = |name: &str| {
            let v = if name == tv { t } else { value(name) };
            num_complex::Complex64::new(v, 0.0)
        };
        self.cos_part.eval_c64(f).re * (a * t).cos() + self.sin_part.eval_c64(f).re * (a * t).sin()
    }
}
