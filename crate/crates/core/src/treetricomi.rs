//! Trees, their generalized Tricomi operators `∂_{x1}² + Σ_{(i,j)} x_i ∂_{x_j}²`,
//! and the factorization of `e^{t d}` into per-node exponentials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec;
use crate::json::poly_to_json;
use crate::kernel::degree_slice;
use crate::opalg::Operator;
use crate::poly::{GPoly, QPoly};
use crate::scalar::{factorial, int, Gaussian, Rational};

/// Rooted tree on nodes `1..=nodes`; every edge `(i, j)` has `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn x_var(i: usize) -> String {
    format!("x{i}")
}

/// Formal symbol standing for `∂_{x_i}`.
pub fn d_var(i: usize) -> String {
    format!("D{i}")
}

impl Tree {
    pub fn new(nodes: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let t = Tree { nodes, edges };
        t.validate()?;
        Ok(t)
    }

    pub fn chain(n: usize) -> Self {
        Tree {
            nodes: n,
            edges: (1..n).map(|i| (i, i + 1)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::NotATree("a tree needs at least one node".into()));
        }
        let mut parent = vec![None; self.nodes + 1];
        for &(i, j) in &self.edges {
            if i == 0 || j == 0 || i > self.nodes || j > self.nodes {
                return Err(Error::NotATree(format!(
                    "edge ({i},{j}) refers to a node outside 1..{}",
                    self.nodes
                )));
            }
            if i >= j {
                return Err(Error::NotATree(format!(
                    "edge ({i},{j}) must point from a smaller to a larger node"
                )));
            }
            if parent[j].replace(i).is_some() {
                return Err(Error::NotATree(format!(
                    "node {j} has more than one parent"
                )));
            }
        }
        if let Some(j) = (2..=self.nodes).find(|&j| parent[j].is_none()) {
            return Err(Error::NotATree(format!(
                "node {j} has no parent, so it cannot reach node 1"
            )));
        }
        Ok(())
    }

    pub fn parent(&self, j: usize) -> Option<usize> {
        self.edges.iter().find(|e| e.1 == j).map(|e| e.0)
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        let mut c: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| e.0 == i)
            .map(|e| e.1)
            .collect();
        c.sort_unstable();
        c
    }

    /// Nodes without children.
    pub fn tips(&self) -> Vec<usize> {
        (1..=self.nodes)
            .filter(|&i| self.children(i).is_empty())
            .collect()
    }

    pub fn x_vars(&self) -> Vec<String> {
        (1..=self.nodes).map(x_var).collect()
    }

    /// All rooted trees on `n` labelled nodes with increasing edges: one parent choice per node.
    pub fn all_with_nodes(n: usize) -> Vec<Tree> {
        let mut out = vec![Vec::new()];
        for j in 2..=n {
            let mut next = Vec::new();
            for edges in &out {
                for i in 1..j {
                    let mut e: Vec<(usize, usize)> = edges.clone();
                    e.push((i, j));
                    next.push(e);
                }
            }
            out = next;
        }
        out.into_iter()
            .map(|edges| Tree { nodes: n, edges })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({"nodes": self.nodes, "edges": self.edges.iter().map(|&(i, j)| [i, j]).collect::<Vec<_>>()})
    }
}

/// `∂_{x1}² + Σ_{(i,j)∈E} x_i ∂_{x_j}²`.
pub fn tricomi_operator(tree: &Tree) -> Result<Operator> {
    tree.validate()?;
    let mut parts = vec![Operator::d("x1", 2)];
    for &(i, j) in &tree.edges {
        parts.push(Operator::mul(QPoly::var(&x_var(i))) * Operator::d(&x_var(j), 2));
    }
    Ok(Operator::Sum(parts))
}

/// Per-node exponents of the factorization, as polynomials in `t`, `x_i` and the symbols `D_i`.
#[derive(Clone, Debug)]
pub struct XiSplitting {
    pub tree: Tree,
    /// `ξ̃_i`, indexed from node 1.
    pub partial: Vec<QPoly>,
    /// `ξ_1 = ξ̃_1`, `ξ_i = x_{p(i)} ξ̃_i`.
    pub exponents: Vec<QPoly>,
}

/// Builds `ξ̃_i(t) = ∫_0^t (D_i + Σ_{children s} ξ̃_s(y))² dy`, with `ξ̃ = t D_i²` at tips.
pub fn xi_splitting(tree: &Tree) -> Result<XiSplitting> {
    tree.validate()?;
    let n = tree.nodes;
    let mut partial = vec![QPoly::zero(); n + 1];
    // children have larger labels, so a reverse sweep sees them first
    for i in (1..=n).rev() {
        let children = tree.children(i);
        let d = QPoly::var(&d_var(i));
        partial[i] = if children.is_empty() {
            QPoly::monomial(int(1), &[("t", 1), (d_var(i).as_str(), 2)])
        } else {
            let mut inner = d;
            for s in children {
                inner = inner + partial[s].rename("t", "y");
            }
            inner.times(&inner).integrate("y", 1)?.rename("y", "t")
        };
    }
    let partial: Vec<QPoly> = partial.into_iter().skip(1).collect();
    let exponents = partial
        .iter()
        .enumerate()
        .map(|(k, p)| match tree.parent(k + 1) {
            None => p.clone(),
            Some(q) => QPoly::var(&x_var(q)).times(p),
        })
        .collect();
    Ok(XiSplitting {
        tree: tree.clone(),
        partial,
        exponents,
    })
}

impl XiSplitting {
    pub fn total(&self) -> QPoly {
        self.exponents.iter().fold(QPoly::zero(), |acc, e| acc + e)
    }

    /// `Σ ξ_i` with `D_j → √-1·K_j`, where `K_j` stands for `2π k_j / a_j`.
    pub fn symbol(&self) -> Result<GPoly> {
        let mut s = self.total().to_gaussian();
        for j in 1..=self.tree.nodes {
            let k = GPoly::monomial(Gaussian::i(), &[(format!("K{j}").as_str(), 1)]);
            s = s.substitute(&d_var(j), &k)?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Result<Value> {
        let xi: Vec<Value> = self
            .exponents
            .iter()
            .map(poly_to_json)
            .collect::<Result<_>>()?;
        let partial: Vec<Value> = self
            .partial
            .iter()
            .map(poly_to_json)
            .collect::<Result<_>>()?;
        Ok(json!({"tree": self.tree.to_json(), "xiTilde": partial, "xi": xi}))
    }
}

/// Applies a polynomial in `D_j` (with coefficients in `t`, `x`) as a differential operator.
pub fn apply_symbolic(op: &QPoly, p: &QPoly) -> QPoly {
    let mut out = QPoly::zero();
    for (exps, c) in op.named_terms() {
        let mut mult = Vec::new();
        let mut image = p.clone();
        for (name, e) in &exps {
            if let Some(j) = name.strip_prefix('D') {
                image = image.derivative(&format!("x{j}"), *e as u32);
            } else {
                mult.push((name.as_str(), *e));
            }
        }
        if !image.is_zero() {
            out = out + QPoly::monomial(c, &mult).times(&image);
        }
    }
    out
}

fn exp_truncated(op: &QPoly, p: &QPoly, t_cap: i32) -> QPoly {
    let mut sum = p.clone();
    let mut term = p.clone();
    let mut k = 1i64;
    loop {
        term = apply_symbolic(op, &term)
            .truncate_in("t", t_cap)
            .scale(&Rational::new(1.into(), k.into()));
        if term.is_zero() {
            return sum;
        }
        sum = sum + &term;
        k += 1;
    }
}

/// Outcome of comparing `e^{t d}` with the ordered product of `e^{ξ_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingReport {
    pub monomials_checked: usize,
    pub t_power_cap: u32,
}

/// Expands both sides as power series in `t` up to `t_cap` on every monomial of degree `<= degree_cap`.
pub fn check_splitting(tree: &Tree, degree_cap: u32, t_cap: u32) -> Result<SplittingReport> {
    let split = xi_splitting(tree)?;
    let vars = tree.x_vars();
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let slice: Vec<QPoly> = degree_slice(&names, degree_cap);
    if let Some((monomial, t_power)) = splitting_mismatch(tree, &split.exponents, &slice, t_cap)? {
        return Err(Error::SplittingMismatch { monomial, t_power });
    }
    Ok(SplittingReport {
        monomials_checked: slice.len(),
        t_power_cap: t_cap,
    })
}

/// First monomial on which `e^{t d}` and `Π e^{exponents[i]}` (applied last to first)
/// differ below `t^{t_cap+1}`, with the lowest differing power of `t`.
pub fn splitting_mismatch(
    tree: &Tree,
    exponents: &[QPoly],
    monomials: &[QPoly],
    t_cap: u32,
) -> Result<Option<(String, u32)>> {
    let op = tricomi_operator(tree)?;
    let results = exec::try_map(monomials, |m| -> Result<Option<(String, u32)>> {
        let mut left = QPoly::zero();
        let mut power = m.clone();
        for k in 0..=t_cap {
            let c = Rational::from_integer(factorial(k)).recip();
            left = left + QPoly::monomial(c, &[("t", k as i32)]).times(&power);
            power = op.apply(&power)?;
        }
        let mut right = m.clone();
        for xi in exponents {
            right = exp_truncated(xi, &right, t_cap as i32);
        }
        let diff = left - right;
        if diff.is_zero() {
            return Ok(None);
        }
        let lowest = diff.min_degree_in("t").unwrap_or(0).max(0) as u32;
        Ok(Some((m.to_string(), lowest)))
    })?;
    Ok(results.into_iter().flatten().next())
}

/// `Σ ξ_i(t, 2πk_1/a_1·√-1, …)` at the point `x`.
pub fn evaluate_symbol(
    split: &XiSplitting,
    mode: &[i64],
    half_widths: &[f64],
    t: f64,
    x: &[f64],
) -> Result<Complex64> {
    let n = split.tree.nodes;
    if mode.len() != n || half_widths.len() != n || x.len() != n {
        return Err(Error::InvalidArgument(format!(
            "mode, half-widths and point need {n} entries"
        )));
    }
    if half_widths.iter().any(|&a| a <= 0.0 || !a.is_finite()) {
        return Err(Error::InvalidArgument(
            "half-widths must be positive".into(),
        ));
    }
    let total = split.total();
    Ok(total.eval_c64(|name| {
        if name == "t" {
            return Complex64::new(t, 0.0);
        }
        let (kind, idx) = name.split_at(1);
        let j: usize = idx.parse().expect("generated variable names");
        match kind {
            "D" => Complex64::new(
                0.0,
                2.0 * std::f64::consts::PI * mode[j - 1] as f64 / half_widths[j - 1],
            ),
            _ => Complex64::new(x[j - 1], 0.0),
        }
    }))
}
