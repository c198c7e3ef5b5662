//! Indexed families of solutions together with the operator they solve.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec;
use crate::json::{operator_to_json, poly_to_json};
use crate::kernel;
use crate::opalg::Operator;
use crate::poly::{Poly, QPoly};
use crate::scalar::{Coefficient, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IndexValue {
    Int(i64),
    List(Vec<i64>),
    Text(String),
}

impl From<i64> for IndexValue {
    fn from(v: i64) -> Self {
        IndexValue::Int(v)
    }
}

impl From<u32> for IndexValue {
    fn from(v: u32) -> Self {
        IndexValue::Int(v as i64)
    }
}

impl From<&[u32]> for IndexValue {
    fn from(v: &[u32]) -> Self {
        IndexValue::List(v.iter().map(|&x| x as i64).collect())
    }
}

impl From<&str> for IndexValue {
    fn from(v: &str) -> Self {
        IndexValue::Text(v.to_string())
    }
}

pub type IndexMeta = BTreeMap<String, IndexValue>;

/// Builds an [`IndexMeta`] from key/value pairs.
pub fn meta<const N: usize>(pairs: [(&str, IndexValue); N]) -> IndexMeta {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[derive(Clone, Debug)]
pub struct BasisElement<C: Coefficient = Rational> {
    pub index: IndexMeta,
    pub solution: Poly<C>,
}

#[derive(Clone, Debug)]
pub struct BasisFamily<C: Coefficient = Rational> {
    pub name: String,
    pub elements: Vec<BasisElement<C>>,
    pub annihilator: Operator<C>,
    pub truncation: String,
}

impl<C: Coefficient> BasisFamily<C> {
    /// Generates one element per index in parallel, then checks annihilation.
    pub fn build<I, F>(
        name: &str,
        annihilator: Operator<C>,
        truncation: String,
        indices: &[I],
        make: F,
    ) -> Result<Self>
    where
        I: Sync,
        F: Fn(&I) -> Result<BasisElement<C>> + Sync + Send,
    {
        let elements = exec::try_map(indices, make)?;
        let fam = BasisFamily {
            name: name.to_string(),
            elements,
            annihilator,
            truncation,
        };
        fam.check_annihilation()?;
        Ok(fam)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn solutions(&self) -> Vec<Poly<C>> {
        self.elements.iter().map(|e| e.solution.clone()).collect()
    }

    /// Residual of the annihilator on every element.
    pub fn residuals(&self) -> Result<Vec<Poly<C>>> {
        exec::try_map(&self.elements, |e| self.annihilator.apply(&e.solution))
    }

    pub fn check_annihilation(&self) -> Result<()> {
        for (e, r) in self.elements.iter().zip(self.residuals()?) {
            if !r.is_zero() {
                return Err(Error::Verification(format!(
                    "{} element {:?} is not annihilated: residual {r}",
                    self.name, e.index
                )));
            }
        }
        Ok(())
    }

    /// Elements whose solution has total degree at most `d`.
    pub fn up_to_degree(&self, d: i64) -> Vec<Poly<C>> {
        self.elements
            .iter()
            .filter(|e| e.solution.total_degree().is_some_and(|k| k <= d))
            .map(|e| e.solution.clone())
            .collect()
    }

    /// JSON document with per-element index metadata.
    pub fn to_json(&self, verified: bool) -> Result<Value> {
        let elements = self
            .elements
            .iter()
            .map(|e| Ok(json!({"index": e.index, "solution": poly_to_json(&e.solution)?})))
            .collect::<Result<Vec<_>>>()?;
        Ok(json!({
            "family": self.name,
            "annihilator": operator_to_json(&self.annihilator)?,
            "truncation": self.truncation,
            "size": self.elements.len(),
            "elements": elements,
            "verified": verified,
        }))
    }
}

impl BasisFamily<Rational> {
    pub fn is_independent(&self) -> bool {
        kernel::is_independent_q(&self.solutions())
    }
}

/// Names `x1..xn`.
pub fn coordinate_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// All tuples `(l_1..l_k)` with `l_i <= caps[i]`, lexicographic.
pub fn box_indices(caps: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &c in caps {
        let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
        for prefix in &out {
            for v in 0..=c {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All tuples of length `k` with entries summing to exactly `total`.
pub fn compositions(k: usize, total: u32) -> Vec<Vec<u32>> {
    crate::kernel::exponents_of_degree(k, total)
        .into_iter()
        .map(|e| e.into_iter().map(|v| v as u32).collect())
        .collect()
}

pub(crate) fn mono_q(vars: &[String], exps: &[u32]) -> QPoly {
    let pairs: Vec<(&str, i32)> = vars
        .iter()
        .map(String::as_str)
        .zip(exps.iter().map(|&e| e as i32))
        .collect();
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    QPoly::monomial(<Rational as Coefficient>::one(), &pairs).with_vars(&names)
}
