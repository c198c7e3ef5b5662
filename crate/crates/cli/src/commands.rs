use std::path::Path;

use flagpde::dissip::{anisymmetric_basis, dissipative_wave_basis, klein_gordon_solutions};
use flagpde::family::BasisFamily;
use flagpde::flagsolve::{constant_coefficient_basis, flag_basis, harmonic_basis, FlagEquationSpec};
use flagpde::ivp::{
    flag_ivp_solve, grid, ode_derivative, ode_solve, tree_wave_solve, FlagIvpProblem, IvpData,
    OdeProblem, TreeWaveMethod, TreeWaveProblem,
};
use flagpde::json::poly_to_json;
use flagpde::liemod::{
    commutation_checks, g2_action, g2_highest_vector, g2_module_basis, g2_structure,
    harmonic_module_basis, sl_action, sl_highest_vector, sl_module_basis, so_action,
    so_highest_vector, verify_singular, RepresentationAction,
};
use flagpde::treetricomi::{check_splitting, xi_splitting, Tree};
use flagpde::{Coefficient, Poly, QPoly, QSqrt2};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::input::{grid_counts, list, rational, Inputs};
use crate::report::{Check, CliResult, Failure, Outcome};

/// Finite-difference residual bound for solvers that claim to satisfy the equation.
pub const RESIDUAL_TOL: f64 = 1e-5;
/// Bound on `y^{(r)}(0) − c_r`.
pub const ODE_INITIAL_TOL: f64 = 1e-10;

fn family_outcome(fam: &BasisFamily) -> CliResult<Outcome> {
    let check = Check::pass("annihilation", format!("{} elements map to zero", fam.len()));
    Ok(Outcome::new(fam.to_json(true)?, vec![check]))
}

fn uniform(n: usize, cap: u32) -> Vec<u32> {
    vec![cap; n]
}

pub fn basis_constant(orders: &str, cap: u32) -> CliResult<Outcome> {
    let orders: Vec<u32> = list(orders, "orders")?;
    let caps = uniform(orders.len().saturating_sub(1), cap);
    family_outcome(&constant_coefficient_basis(&orders, &caps)?)
}

pub fn basis_harmonic(n: usize, cap: u32) -> CliResult<Outcome> {
    family_outcome(&harmonic_basis(n, &uniform(n.saturating_sub(1), cap))?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlagSpecFile {
    #[serde(default)]
    vars: Option<Vec<String>>,
    orders: Vec<u32>,
    coefficients: Vec<QPoly>,
}

pub fn basis_flag(inputs: &mut Inputs, spec: &Path, cap: u32) -> CliResult<Outcome> {
    let f: FlagSpecFile = inputs.json(spec)?;
    let n = f.orders.len();
    let spec = match f.vars {
        Some(vars) => FlagEquationSpec::new(vars, f.orders, f.coefficients)?,
        None => FlagEquationSpec::standard(f.orders, f.coefficients)?,
    };
    family_outcome(&flag_basis(&spec, &uniform(n.saturating_sub(1), cap))?)
}

pub fn basis_dissipative(n: usize, cap: u32) -> CliResult<Outcome> {
    family_outcome(&dissipative_wave_basis(n, &uniform(n, cap))?)
}

pub fn basis_anisym(n: usize, lambda: &str, epsilon: i64, cap: u32) -> CliResult<Outcome> {
    let lambda = rational(lambda, "lambda")?;
    family_outcome(&anisymmetric_basis(n, &lambda, epsilon, &uniform(n, cap))?)
}

pub fn klein_gordon(a: &str, monomial: &str, max_iterations: Option<usize>) -> CliResult<Outcome> {
    let a = rational(a, "a")?;
    let m: Vec<u32> = list(monomial, "monomial")?;
    let m: [u32; 3] = m
        .try_into()
        .map_err(|_| Failure::input("monomial needs three exponents for x, y, z"))?;
    let (first, second) = klein_gordon_solutions(&a, m, max_iterations)?;
    let part = |u: &flagpde::TrigPoly| -> CliResult<Value> {
        Ok(json!({"cos": poly_to_json(&u.cos_part)?, "sin": poly_to_json(&u.sin_part)?}))
    };
    let result = json!({
        "frequency": a.to_string(),
        "monomial": m,
        "solutions": [part(&first)?, part(&second)?],
    });
    let check = Check::pass("klein-gordon residual", "both real solutions are annihilated exactly");
    Ok(Outcome::new(result, vec![check]))
}

#[derive(Deserialize)]
struct TreeFile {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

/// Loads a tree; an invalid tree is reported at the first edge that breaks it.
pub fn load_tree(inputs: &mut Inputs, path: &Path) -> CliResult<Tree> {
    let f: TreeFile = inputs.json(path)?;
    let tree = Tree {
        nodes: f.nodes,
        edges: f.edges,
    };
    if let Err(e) = tree.validate() {
        let pointer = if tree.nodes == 0 {
            "/nodes".to_string()
        } else {
            (1..=tree.edges.len())
                .find(|&k| {
                    Tree {
                        nodes: tree.nodes,
                        edges: tree.edges[..k].to_vec(),
                    }
                    .validate()
                    .is_err_and(|e2| !e2.to_string().contains("has no parent"))
                })
                .map_or("/edges".to_string(), |k| format!("/edges/{}", k - 1))
        };
        return Err(Failure::at(format!("{}: {e}", path.display()), pointer));
    }
    Ok(tree)
}

pub fn tree_validate(inputs: &mut Inputs, path: &Path) -> CliResult<Outcome> {
    let tree = load_tree(inputs, path)?;
    let result = json!({"tree": tree.to_json(), "tips": tree.tips()});
    Ok(Outcome::new(result, vec![Check::pass("tree", "valid rooted tree")]))
}

pub fn tree_xi(inputs: &mut Inputs, path: &Path) -> CliResult<Outcome> {
    let tree = load_tree(inputs, path)?;
    let split = xi_splitting(&tree)?;
    let report = check_splitting(&tree, 2, 2)?;
    let check = Check::pass(
        "splitting",
        format!("{} monomials agree through t^2", report.monomials_checked),
    );
    Ok(Outcome::new(split.to_json()?, vec![check]))
}

pub fn tree_check_splitting(inputs: &mut Inputs, path: &Path, degree: u32, t_power: u32) -> CliResult<Outcome> {
    let tree = load_tree(inputs, path)?;
    let report = check_splitting(&tree, degree, t_power)?;
    let result = json!({
        "tree": tree.to_json(),
        "degreeCap": degree,
        "tPowerCap": report.t_power_cap,
        "monomialsChecked": report.monomials_checked,
    });
    let check = Check::pass("splitting", format!("{} monomials agree", report.monomials_checked));
    Ok(Outcome::new(result, vec![check]))
}

fn csv_table(header: &[String], points: &[Vec<f64>], values: &[f64]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for (p, v) in points.iter().zip(values) {
        for c in p {
            out.push_str(&format!("{c},"));
        }
        out.push_str(&format!("{v}\n"));
    }
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlagIvpEquation {
    coefficients: Vec<QPoly>,
}

pub fn ivp_flag(inputs: &mut Inputs, equation: &Path, data: &Path, grid_spec: &str, x1: f64, residual: bool) -> CliResult<Outcome> {
    let eq: FlagIvpEquation = inputs.json(equation)?;
    let data: IvpData = inputs.json(data)?;
    let order = eq.coefficients.len();
    let conditions = data.conditions(order)?;
    let problem = FlagIvpProblem {
        coefficients: eq.coefficients,
        half_widths: data.half_widths.clone(),
        data: conditions.clone(),
    };
    let sol = flag_ivp_solve(&problem)?;
    let counts = grid_counts(grid_spec)?;
    let mut ranges = vec![(0.0, x1)];
    ranges.extend(data.half_widths.iter().map(|&a| (-a, a)));
    if counts.len() != ranges.len() {
        return Err(Failure::input(format!("grid needs {} counts", ranges.len())));
    }
    let points = grid(&ranges, &counts)?;
    let rep = sol.report(&conditions, &points, residual)?;
    let mut checks = vec![Check::bound("initial traces", rep.initial_error, flagpde::ivp::INITIAL_TOL)];
    if let Some(r) = rep.residual {
        checks.push(Check::bound("residual", r, RESIDUAL_TOL));
    }
    let header: Vec<String> = (1..=ranges.len()).map(|i| format!("x{i}")).chain(["u".to_string()]).collect();
    let mut out = Outcome::new(
        json!({"solution": sol.to_json(), "points": points, "values": rep.values}),
        checks,
    );
    out.csv = Some(csv_table(&header, &points, &rep.values));
    Ok(out)
}

pub fn ivp_tree_wave(
    inputs: &mut Inputs,
    tree: &Path,
    data: &Path,
    t: f64,
    grid_spec: &str,
    method: TreeWaveMethod,
) -> CliResult<Outcome> {
    let tree = load_tree(inputs, tree)?;
    let data: IvpData = inputs.json(data)?;
    let cond = data.conditions(2)?;
    let problem = TreeWaveProblem {
        tree,
        half_widths: data.half_widths.clone(),
        position: cond[0].clone(),
        velocity: cond[1].clone(),
        method,
    };
    let sol = tree_wave_solve(&problem)?;
    let counts = grid_counts(grid_spec)?;
    let ranges: Vec<(f64, f64)> = data.half_widths.iter().map(|&a| (-a, a)).collect();
    if counts.len() != ranges.len() {
        return Err(Failure::input(format!("grid needs {} counts", ranges.len())));
    }
    let points = grid(&ranges, &counts)?;
    let rep = sol.report(&problem.position, &problem.velocity, t, &points, true)?;
    let residual = rep.residual.unwrap_or(f64::NAN);
    let mut checks = vec![Check::bound("initial traces", rep.initial_error, flagpde::ivp::INITIAL_TOL)];
    checks.push(match method {
        TreeWaveMethod::Taylor => Check::bound("residual", residual, RESIDUAL_TOL),
        TreeWaveMethod::Splitting => Check::info(
            "residual",
            residual,
            "splitting solution is exact at t = 0 only; residual not enforced",
        ),
    });
    let header: Vec<String> = (1..=ranges.len()).map(|i| format!("x{i}")).chain(["u".to_string()]).collect();
    let mut out = Outcome::new(
        json!({"t": t, "solution": sol.to_json(), "points": points, "values": rep.values, "residual": residual}),
        checks,
    );
    out.csv = Some(csv_table(&header, &points, &rep.values));
    Ok(out)
}

fn singular_outcome<C: Coefficient>(
    fam: &BasisFamily,
    action: &RepresentationAction<C>,
    highest: &Poly<C>,
) -> CliResult<Outcome> {
    let weight = verify_singular(action, highest)?;
    let mut out = family_outcome(fam)?;
    out.checks.push(Check::pass(
        "singular vector",
        format!("{} is killed by the {} positive generators", highest, action.positive.len()),
    ));
    let weight: Vec<String> = weight.iter().map(|c| c.to_string()).collect();
    out.extra.insert("annihilated".into(), Value::Bool(true));
    out.extra.insert("singularWeight".into(), json!(weight));
    if let Value::Object(m) = &mut out.result {
        m.insert("highestVector".into(), Value::String(highest.to_string()));
        m.insert("singularWeight".into(), json!(weight));
    }
    Ok(out)
}

pub fn lie_harmonic(n: usize, k: u32) -> CliResult<Outcome> {
    let fam = harmonic_module_basis(n, k)?;
    singular_outcome(&fam, &so_action(n)?, &so_highest_vector(n, k))
}

pub fn lie_sl(n: usize, l1: u32, l2: u32) -> CliResult<Outcome> {
    let fam = sl_module_basis(n, l1, l2)?;
    singular_outcome(&fam, &sl_action(n)?, &sl_highest_vector(n, l1, l2))
}

pub fn lie_g2(k: u32) -> CliResult<Outcome> {
    let fam = g2_module_basis(k)?;
    let highest = g2_highest_vector(k).map_coeffs(QSqrt2::from_rational);
    singular_outcome(&fam, &g2_action(), &highest)
}

pub fn lie_check(degree: u32, seed: u64) -> CliResult<Outcome> {
    let structure = g2_structure();
    let mut checks: Vec<Check> = structure
        .relations()
        .into_iter()
        .map(|(name, ok)| Check {
            name,
            passed: ok,
            value: None,
            tolerance: None,
            detail: None,
        })
        .collect();
    checks.push(Check {
        name: "G2 generators traceless".into(),
        passed: structure.is_traceless(),
        value: None,
        tolerance: None,
        detail: None,
    });
    let closure = |name: &str, r: flagpde::Result<usize>| match r {
        Ok(dim) => Check::pass(name, format!("{dim} generators close on random samples")),
        Err(e) => Check {
            name: name.to_string(),
            passed: false,
            value: None,
            tolerance: None,
            detail: Some(e.to_string()),
        },
    };
    checks.push(closure("sl(3) closure", sl_action(3)?.check_closure(4, seed).map(|c| c.len())));
    checks.push(closure("so(4) closure", so_action(4)?.check_closure(4, seed).map(|c| c.len())));
    let report = commutation_checks(degree)?;
    for c in &report.checks {
        checks.push(Check {
            name: c.name.clone(),
            passed: c.passed,
            value: None,
            tolerance: None,
            detail: c.counterexample.clone(),
        });
    }
    let result = serde_json::to_value(&report).map_err(|e| Failure::input(e.to_string()))?;
    Ok(Outcome::new(result, checks))
}

pub fn ode(b: &str, c: &str, t_end: f64, steps: usize) -> CliResult<Outcome> {
    let problem = OdeProblem::new(list(b, "b")?, list(c, "c")?)?;
    if steps == 0 || !t_end.is_finite() {
        return Err(Failure::input("need at least one step and a finite end time"));
    }
    let times: Vec<f64> = (0..=steps).map(|i| t_end * i as f64 / steps as f64).collect();
    let values = times
        .iter()
        .map(|&t| ode_solve(&problem, t))
        .collect::<flagpde::Result<Vec<f64>>>()?;
    let mut worst: f64 = 0.0;
    for (r, want) in problem.c.iter().enumerate() {
        worst = worst.max((ode_derivative(&problem, r as u32, 0.0)? - want).abs());
    }
    let points: Vec<Vec<f64>> = times.iter().map(|&t| vec![t]).collect();
    let mut out = Outcome::new(
        json!({"b": problem.b, "c": problem.c, "weights": problem.weights(), "t": times, "y": values}),
        vec![Check::bound("initial values", worst, ODE_INITIAL_TOL)],
    );
    out.csv = Some(csv_table(&["t".to_string(), "y".to_string()], &points, &values));
    Ok(out)
}
