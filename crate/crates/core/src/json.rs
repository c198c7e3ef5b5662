//! JSON wire forms for polynomials and operators, plus a small infix parser.
//!
//! Polynomial: `{"vars": [..], "laurent": [..], "terms": [{"exp": {"x": 2}, "re": "p/q", "im": "r/s"}, ..]}`
//! with terms in descending graded-lex order. A bare term list or an infix
//! string such as `"x^2*y - 1/3*x^3"` is also accepted on input.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::opalg::{Operator, SeriesInverse};
use crate::poly::{Poly, Var};
use crate::scalar::{format_rational, parse_rational, Coefficient, Rational};

pub fn poly_to_json<C: Coefficient>(p: &Poly<C>) -> Result<Value> {
    let mut terms = Vec::with_capacity(p.len());
    for (exps, c) in p.named_terms() {
        let (re, im) = c.re_im().ok_or_else(|| {
            Error::InvalidArgument(format!("coefficient {c} has no Q(i) representation"))
        })?;
        let mut e = Map::new();
        for (n, k) in exps {
            e.insert(n, json!(k));
        }
        terms.push(json!({"exp": e, "re": format_rational(&re), "im": format_rational(&im)}));
    }
    let mut obj = Map::new();
    obj.insert("vars".into(), json!(p.var_names()));
    let laurent: Vec<&str> = p
        .vars()
        .iter()
        .filter(|v| v.laurent)
        .map(|v| v.name.as_str())
        .collect();
    if !laurent.is_empty() {
        obj.insert("laurent".into(), json!(laurent));
    }
    obj.insert("terms".into(), Value::Array(terms));
    Ok(Value::Object(obj))
}

fn as_rational(v: Option<&Value>, what: &str) -> Result<Rational> {
    match v {
        None | Some(Value::Null) => Ok(Rational::from_integer(0.into())),
        Some(Value::String(s)) => parse_rational(s),
        Some(Value::Number(n)) => parse_rational(&n.to_string()),
        Some(_) => Err(Error::Parse(format!("{what} must be a string \"p/q\""))),
    }
}

fn term_list<C: Coefficient>(vars: Vec<Var>, list: &[Value]) -> Result<Poly<C>> {
    let mut vars = vars;
    let mut raw: Vec<(Vec<(String, i32)>, C)> = Vec::new();
    for (i, t) in list.iter().enumerate() {
        let obj = t
            .as_object()
            .ok_or_else(|| Error::Parse(format!("term {i} is not an object")))?;
        let mut exps = Vec::new();
        if let Some(e) = obj.get("exp") {
            let e = e
                .as_object()
                .ok_or_else(|| Error::Parse(format!("term {i}: exp must be an object")))?;
            for (name, k) in e {
                let k = k
                    .as_i64()
                    .and_then(|k| i32::try_from(k).ok())
                    .ok_or_else(|| {
                        Error::Parse(format!("term {i}: exponent of {name} must be an integer"))
                    })?;
                if !vars.iter().any(|v| v.name == *name) {
                    vars.push(Var::new(name));
                }
                exps.push((name.clone(), k));
            }
        }
        let re = as_rational(obj.get("re"), "re")?;
        let im = as_rational(obj.get("im"), "im")?;
        let c = C::from_re_im(re, im).ok_or_else(|| {
            Error::Parse(format!(
                "term {i}: imaginary part not allowed for this coefficient field"
            ))
        })?;
        raw.push((exps, c));
    }
    let n = vars.len();
    let terms: Vec<(Vec<i32>, C)> = raw
        .into_iter()
        .map(|(exps, c)| {
            let mut e = vec![0; n];
            for (name, k) in exps {
                let j = vars
                    .iter()
                    .position(|v| v.name == name)
                    .expect("registered above");
                e[j] = k;
            }
            (e, c)
        })
        .collect();
    Poly::from_terms(vars, terms)
}

pub fn poly_from_json<C: Coefficient>(v: &Value) -> Result<Poly<C>> {
    match v {
        Value::String(s) => parse_poly(s),
        Value::Number(n) => Ok(Poly::constant(C::from_rational(&parse_rational(
            &n.to_string(),
        )?))),
        Value::Array(list) => term_list(Vec::new(), list),
        Value::Object(obj) => {
            let laurent: Vec<String> = match obj.get("laurent") {
                Some(l) => serde_json::from_value(l.clone())
                    .map_err(|e| Error::Parse(format!("laurent: {e}")))?,
                None => Vec::new(),
            };
            let mut vars: Vec<Var> = match obj.get("vars") {
                Some(l) => {
                    let names: Vec<String> = serde_json::from_value(l.clone())
                        .map_err(|e| Error::Parse(format!("vars: {e}")))?;
                    names.iter().map(|n| Var::new(n)).collect()
                }
                None => Vec::new(),
            };
            for name in &laurent {
                match vars.iter_mut().find(|v| v.name == *name) {
                    Some(v) => v.laurent = true,
                    None => vars.push(Var::laurent(name)),
                }
            }
            let terms = obj
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("missing terms".into()))?;
            term_list(vars, terms)
        }
        _ => Err(Error::Parse(
            "polynomial must be an object, a term list or a string".into(),
        )),
    }
}

impl<C: Coefficient> Serialize for Poly<C> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        poly_to_json(self)
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de, C: Coefficient> Deserialize<'de> for Poly<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        poly_from_json(&v).map_err(D::Error::custom)
    }
}

fn coeff_json<C: Coefficient>(c: &C) -> Result<Value> {
    let (re, im) = c
        .re_im()
        .ok_or_else(|| Error::InvalidArgument(format!("coefficient {c} not in Q(i)")))?;
    Ok(json!({"re": format_rational(&re), "im": format_rational(&im)}))
}

pub fn operator_to_json<C: Coefficient>(op: &Operator<C>) -> Result<Value> {
    Ok(match op {
        Operator::Derivative { var, order } => {
            json!({"op": "derivative", "var": var, "order": order})
        }
        Operator::Integrate { var, order } => {
            json!({"op": "integrate", "var": var, "order": order})
        }
        Operator::MulPoly(p) => json!({"op": "mulpoly", "poly": poly_to_json(p)?}),
        Operator::Scale(c) => {
            let mut v = coeff_json(c)?;
            v["op"] = json!("scale");
            v
        }
        Operator::Sum(l) => {
            json!({"op": "sum", "terms": l.iter().map(operator_to_json).collect::<Result<Vec<_>>>()?})
        }
        Operator::Compose(l) => {
            json!({"op": "compose", "factors": l.iter().map(operator_to_json).collect::<Result<Vec<_>>>()?})
        }
        Operator::Series(s) => json!({
            "op": "series",
            "rightInverse": operator_to_json(&s.t1_inv)?,
            "perturbation": operator_to_json(&s.t2)?,
            "maxIterations": s.max_iterations,
        }),
    })
}

pub fn operator_from_json<C: Coefficient>(v: &Value) -> Result<Operator<C>> {
    let tag = v
        .get("op")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("operator without \"op\" tag".into()))?;
    let var = || {
        v.get("var")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Error::Parse(format!("{tag}: missing var")))
    };
    let order = || {
        v.get("order")
            .and_then(Value::as_u64)
            .and_then(|k| u32::try_from(k).ok())
            .ok_or_else(|| Error::Parse(format!("{tag}: missing order")))
    };
    let list = |key: &str| -> Result<Vec<Operator<C>>> {
        v.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse(format!("{tag}: missing {key}")))?
            .iter()
            .map(operator_from_json)
            .collect()
    };
    Ok(match tag {
        "derivative" => Operator::Derivative {
            var: var()?,
            order: order()?,
        },
        "integrate" => Operator::Integrate {
            var: var()?,
            order: order()?,
        },
        "mulpoly" => Operator::MulPoly(poly_from_json(
            v.get("poly")
                .ok_or_else(|| Error::Parse("mulpoly: missing poly".into()))?,
        )?),
        "scale" => {
            let c = C::from_re_im(
                as_rational(v.get("re"), "re")?,
                as_rational(v.get("im"), "im")?,
            )
            .ok_or_else(|| Error::Parse("scale: imaginary part not allowed".into()))?;
            Operator::Scale(c)
        }
        "sum" => Operator::Sum(list("terms")?),
        "compose" => Operator::Compose(list("factors")?),
        "series" => {
            let get = |k: &str| {
                v.get(k)
                    .ok_or_else(|| Error::Parse(format!("series: missing {k}")))
            };
            Operator::Series(Box::new(SeriesInverse {
                t1_inv: operator_from_json(get("rightInverse")?)?,
                t2: operator_from_json(get("perturbation")?)?,
                max_iterations: v
                    .get("maxIterations")
                    .and_then(Value::as_u64)
                    .map(|k| k as usize),
            }))
        }
        other => return Err(Error::Parse(format!("unknown operator tag {other:?}"))),
    })
}

impl<C: Coefficient> Serialize for Operator<C> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        operator_to_json(self)
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de, C: Coefficient> Deserialize<'de> for Operator<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        operator_from_json(&v).map_err(D::Error::custom)
    }
}

/// Parses infix text with `+ - * / ^` and parentheses over rational constants.
pub fn parse_poly<C: Coefficient>(text: &str) -> Result<Poly<C>> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let out = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(Error::Parse(format!(
            "unexpected trailing input in {text:?}"
        )));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(parse_rational(&s)?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!(
                "unexpected character {c:?} in {text:?}"
            )));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr<C: Coefficient>(&mut self) -> Result<Poly<C>> {
        let mut acc = if self.eat('-') {
            self.term::<C>()?.negated()
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term<C: Coefficient>(&mut self) -> Result<Poly<C>> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = acc * self.power()?;
            } else if self.eat('/') {
                let d = self.power::<C>()?;
                if !d.is_constant() || d.is_zero() {
                    return Err(Error::Parse("division only by nonzero constants".into()));
                }
                acc = acc.scale(&d.constant_term().recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn exponent(&mut self) -> Result<i32> {
        let neg = self.eat('-');
        let paren = !neg && self.eat('(');
        let neg = neg || (paren && self.eat('-'));
        let k = match self.tokens.get(self.pos) {
            Some(Tok::Num(q)) if q.is_integer() => {
                self.pos += 1;
                i32::try_from(q.to_integer())
                    .map_err(|_| Error::Parse("exponent too large".into()))?
            }
            _ => return Err(Error::Parse("exponent must be an integer".into())),
        };
        if paren && !self.eat(')') {
            return Err(Error::Parse("missing ')' after exponent".into()));
        }
        Ok(if neg { -k } else { k })
    }

    fn power<C: Coefficient>(&mut self) -> Result<Poly<C>> {
        let (base, ident) = self.atom::<C>()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let k = self.exponent()?;
        if k >= 0 {
            return Ok(base.pow(k as u32));
        }
        match ident {
            Some(name) => Ok(Poly::monomial(C::one(), &[(name.as_str(), k)])),
            None if base.is_constant() && !base.is_zero() => Ok(Poly::constant(
                crate::scalar::rational_pow(&base.constant_term(), k as i64),
            )),
            None => Err(Error::Parse(
                "negative powers only of variables or constants".into(),
            )),
        }
    }

    fn atom<C: Coefficient>(&mut self) -> Result<(Poly<C>, Option<String>)> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok((Poly::constant(C::from_rational(&q)), None))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok((Poly::var(&name), Some(name)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok((inner, None))
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                let (p, _) = self.atom::<C>()?;
                Ok((p.negated(), None))
            }
            _ => Err(Error::Parse("expected a number, variable or '('".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::QPoly;
    use crate::scalar::{int, rat, Gaussian};

    #[test]
    fn parse_basic() {
        let p: QPoly = parse_poly("x^2*y - 1/3*x^3 + 2").unwrap();
        let x = QPoly::var("x");
        let y = QPoly::var("y");
        assert_eq!(
            p,
            x.pow(2) * y - x.pow(3).scale(&rat(1, 3)) + QPoly::from_i64(2)
        );
        let q: QPoly = parse_poly("(x+1)^2").unwrap();
        assert_eq!(q, (QPoly::var("x") + QPoly::one()).pow(2));
        let l: QPoly = parse_poly("t^-2 + t^(-1)").unwrap();
        assert!(l.is_laurent("t"));
        assert_eq!(l.min_degree_in("t"), Some(-2));
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let p: QPoly = parse_poly("y^3 + x^2 + y^2 - 5/7*x*y")
            .unwrap()
            .with_vars(&["x", "y"]);
        let s = serde_json::to_string(&p).unwrap();
        let back: QPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        assert_eq!(back, p);
    }

    #[test]
    fn gaussian_and_laurent_roundtrip() {
        let p =
            crate::poly::GPoly::monomial(Gaussian::new(int(1), rat(-2, 3)), &[("t", -1), ("x", 2)]);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"laurent\":[\"t\"]"));
        let back: crate::poly::GPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn rational_field_rejects_imaginary() {
        let v = json!([{"exp": {"x": 1}, "re": "1/1", "im": "1/2"}]);
        assert!(poly_from_json::<Rational>(&v).is_err());
    }

    #[test]
    fn operator_roundtrip() {
        let op: Operator = Operator::mul(QPoly::var("x")) * Operator::d("y", 2)
            + Operator::series(Operator::integral("x", 2), Operator::d("y", 2));
        let v = operator_to_json(&op).unwrap();
        let back: Operator = operator_from_json(&v).unwrap();
        assert_eq!(back, op);
        assert_eq!(v["terms"][0]["op"], "compose");
    }
}
