//! Independent oracles shared by the acceptance gate and the topic test files.
//! Every check returns a short detail string on success and a reason on failure.
#![allow(dead_code)]

use std::f64::consts::PI;

use flagpde::dissip::{anisymmetric_basis, dissipation_operator, dissipative_wave_basis, klein_gordon_complex, klein_gordon_operator, klein_gordon_solutions, xi_dissipation, zeta};
use flagpde::family::{coordinate_names, IndexValue};
use flagpde::flagsolve::{constant_coefficient_basis, constant_coefficient_operator, flag_basis, harmonic_basis, FlagEquationSpec};
use flagpde::ivp::{flag_ivp_solve, grid, ode_derivative, ode_solve, tree_wave_solve, FlagIvpProblem, OdeProblem, TreeWaveMethod, TreeWaveProblem, TrigData, TrigMode};
use flagpde::json::parse_poly;
use flagpde::kernel::{bidegree_slice, homogeneous_slice, kernel_oracle, kernel_oracle_generic, span_rank, span_rank_q, weighted_slice};
use flagpde::liemod::{
    commutation_checks, g2_laplacian, g2_module_basis, g2_structure, harmonic_module_basis, selected_g2_reading, sl_decomposition, sl_laplacian, sl_module_basis, zeta as sl_zeta, G2LaplacianReading,
};
use flagpde::scalar::{factorial, int, rat};
use flagpde::treetricomi::{check_splitting, splitting_mismatch, xi_splitting, Tree};
use flagpde::{Coefficient, GPoly, Gaussian, Operator, Poly, QPoly, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn p(s: &str) -> QPoly {
    parse_poly(s).unwrap()
}

pub fn gp(s: &str) -> GPoly {
    parse_poly(s).unwrap()
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn err<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{ctx}: {e}")
}

/// Weighted degree of `p` when every term has the same one.
pub fn weighted_degree(p: &QPoly, weights: &[(&str, u32)]) -> Option<u32> {
    let mut found = None;
    for (powers, _) in p.named_terms() {
        let d: i64 = powers.iter().map(|(v, e)| *e as i64 * weights.iter().find(|w| w.0 == v).map_or(1, |w| w.1 as i64)).sum();
        match found {
            None => found = Some(d),
            Some(f) if f != d => return None,
            _ => {}
        }
    }
    found.map(|d| d as u32)
}

/// Rank equality plus two-way membership over any field.
fn same_span<C: Coefficient>(a: &[Poly<C>], b: &[Poly<C>]) -> bool {
    let ra = span_rank(a);
    let rb = span_rank(b);
    let both: Vec<Poly<C>> = a.iter().chain(b).cloned().collect();
    ra == rb && span_rank(&both) == ra
}

/// Family span equals the brute-force kernel on the slice.
pub fn compare_with_kernel(label: &str, family: &[QPoly], op: &Operator, slice: &[QPoly]) -> Result<usize, String> {
    let k = kernel_oracle(op, slice).map_err(err(label))?;
    let rank = span_rank_q(family);
    if rank != family.len() {
        return Err(format!("{label}: family elements are dependent ({rank} of {})", family.len()));
    }
    if rank != k.dimension {
        return Err(format!("{label}: family rank {rank}, kernel dimension {}", k.dimension));
    }
    if !same_span(family, &k.basis) {
        return Err(format!("{label}: spans differ"));
    }
    Ok(k.dimension)
}

fn index_list(e: &flagpde::family::BasisElement, key: &str) -> Vec<i64> {
    match e.index.get(key) {
        Some(IndexValue::List(v)) => v.clone(),
        other => panic!("index {key} missing: {other:?}"),
    }
}

// ---------- annihilation

pub const LAMBDAS: [(i64, i64); 5] = [(1, 1), (2, 1), (-2, 1), (-3, 1), (-5, 1)];

fn x_laplacian(n: usize) -> Operator {
    Operator::Sum((1..=n).map(|i| Operator::d(&format!("x{i}"), 2)).collect())
}

/// Every generated element is killed exactly by an annihilator rebuilt here from its definition.
pub fn annihilation_suite(max_n: usize, cap: u32) -> Check {
    let mut total = 0usize;
    let mut clock = std::time::Instant::now();
    let mut count = |fam: flagpde::Result<flagpde::family::BasisFamily>, op: Operator, label: String| -> Result<(), String> {
        let fam = fam.map_err(err(&label))?;
        let residuals = flagpde::exec::try_map(&fam.elements, |e| op.apply(&e.solution)).map_err(err(&label))?;
        if let Some((e, r)) = fam.elements.iter().zip(&residuals).find(|(_, r)| !r.is_zero()) {
            return Err(format!("{label}: {:?} leaves {r}", e.index));
        }
        if std::env::var_os("FLAGPDE_TRACE").is_some() {
            eprintln!("{label}: {} elements, {:.2}s", fam.len(), clock.elapsed().as_secs_f64());
            clock = std::time::Instant::now();
        }
        total += fam.len();
        Ok(())
    };
    let d = |v: &str, k: u32| Operator::d(v, k);
    let x = |i: usize| format!("x{i}");
    for n in 2..=max_n {
        let caps = vec![cap; n - 1];
        count(harmonic_basis(n, &caps), x_laplacian(n), format!("harmonic n={n}"))?;
        for orders in [vec![2; n], (1..=n as u32).collect::<Vec<_>>(), vec![3; n]] {
            let op = Operator::Sum(orders.iter().enumerate().map(|(i, &m)| d(&x(i + 1), m)).collect());
            count(constant_coefficient_basis(&orders, &caps), op, format!("constant {orders:?}"))?;
        }
        // ∂_1² + x_1∂_2² + … + x_{n−1}∂_n²
        let coeffs: Vec<QPoly> = (1..n).map(|i| QPoly::var(&x(i))).collect();
        let op = (1..n).fold(d("x1", 2), |acc, i| acc + Operator::mul(QPoly::var(&x(i))) * d(&x(i + 1), 2));
        let spec = FlagEquationSpec::standard(vec![2; n], coeffs).map_err(err("flag spec"))?;
        count(flag_basis(&spec, &caps), op, format!("flag n={n}"))?;
        if n <= 3 {
            let coeffs: Vec<QPoly> = (1..n).map(|i| p(&format!("x{i} + 1"))).collect();
            let op = (1..n).fold(d("x1", 1), |acc, i| acc + Operator::mul(p(&format!("x{i} + 1"))) * d(&x(i + 1), 1));
            let spec = FlagEquationSpec::standard(vec![1; n], coeffs).map_err(err("flag spec"))?;
            count(flag_basis(&spec, &caps), op, format!("first-order flag n={n}"))?;
        }
    }
    for n in 1..=max_n {
        let caps = vec![cap; n];
        let op = d("t", 2) + d("t", 1) + x_laplacian(n).neg();
        count(dissipative_wave_basis(n, &caps), op, format!("dissipative n={n}"))?;
        for (a, b) in LAMBDAS {
            for eps in [1, -1] {
                let lambda = rat(a, b);
                let op = Operator::mul(p("t")) * d("t", 2) + Operator::scale(lambda.clone()) * d("t", 1) + Operator::scale(int(-eps)) * Operator::mul(p("t")) * x_laplacian(n);
                count(anisymmetric_basis(n, &lambda, eps, &caps), op, format!("anisymmetric n={n} λ={a} ε={eps}"))?;
            }
        }
    }
    for n in 3..=max_n.max(3) {
        for k in 0..=cap {
            count(harmonic_module_basis(n, k), x_laplacian(n), format!("so({n}) module k={k}"))?;
        }
    }
    for n in 2..=max_n.max(2) {
        let op = Operator::Sum((1..=n).map(|i| d(&format!("x{i}"), 1) * d(&format!("y{i}"), 1)).collect());
        for l1 in 0..=cap {
            for l2 in 0..=cap - l1 {
                count(sl_module_basis(n, l1, l2), op.clone(), format!("sl({n}) module ({l1},{l2})"))?;
            }
        }
    }
    let two = Operator::scale(int(2));
    let g2_op = d("x1", 2) + two.clone() * d("x2", 1) * d("x5", 1) + two.clone() * d("x3", 1) * d("x6", 1) + two * d("x4", 1) * d("x7", 1);
    for k in 0..=cap {
        count(g2_module_basis(k), g2_op.clone(), format!("G2 module k={k}"))?;
    }
    // dissipation chain and Klein-Gordon pairs
    for a in [int(1), rat(1, 2)] {
        let d = dissipation_operator(&a);
        for i in 1..=cap {
            let lhs = d.apply(&xi_dissipation(&a, i).unwrap()).unwrap();
            if lhs != xi_dissipation(&a, i - 1).unwrap() {
                return Err(format!("dissipation chain a={a} i={i}"));
            }
        }
        let op = klein_gordon_operator(&a);
        for m in flagpde::family::box_indices(&[2, 2, 2]) {
            let (u, w) = klein_gordon_solutions(&a, [m[0], m[1], m[2]], None).map_err(err("klein-gordon"))?;
            for s in [u, w] {
                if !op.apply_trig(&s).map_err(err("klein-gordon"))?.is_zero() {
                    return Err(format!("klein-gordon a={a} monomial {m:?}"));
                }
                total += 1;
            }
        }
    }
    Ok(format!("{total} elements"))
}

// ---------- completeness

fn homogeneous_members(fam: &[QPoly], weights: &[(&str, u32)], d: u32) -> Vec<QPoly> {
    fam.iter().filter(|s| weighted_degree(s, weights) == Some(d)).cloned().collect()
}

pub fn harmonic_complete(n: usize, k: u32) -> Result<usize, String> {
    let vars = coordinate_names(n);
    let fam = harmonic_basis(n, &vec![k; n - 1]).map_err(err("harmonic"))?.solutions();
    let fam = homogeneous_members(&fam, &[], k);
    compare_with_kernel(&format!("harmonic n={n} k={k}"), &fam, &Operator::laplacian(&refs(&vars)), &homogeneous_slice(&refs(&vars), k))
}

/// `Σ ∂_i^{m_i}` is homogeneous for the weights `L/m_i`.
pub fn constant_complete(orders: &[u32], dmax: u32) -> Result<usize, String> {
    let n = orders.len();
    let l = orders.iter().fold(1u32, |acc, &m| num_integer::lcm(acc, m));
    let w: Vec<u32> = orders.iter().map(|m| l / m).collect();
    let vars = coordinate_names(n);
    let caps: Vec<u32> = w[1..].iter().map(|wi| dmax / wi).collect();
    let fam = constant_coefficient_basis(orders, &caps).map_err(err("constant"))?;
    let op = constant_coefficient_operator(orders);
    let mut dims = 0;
    for d in 0..=dmax {
        let members: Vec<QPoly> = fam
            .elements
            .iter()
            .filter(|e| index_list(e, "l").iter().zip(&w).map(|(li, wi)| *li as u32 * wi).sum::<u32>() == d)
            .map(|e| e.solution.clone())
            .collect();
        dims += compare_with_kernel(&format!("constant {orders:?} weight {d}"), &members, &op, &weighted_slice(&refs(&vars), &w, d))?;
    }
    Ok(dims)
}

/// A flag system homogeneous for `weights`; elements graded by their index.
pub fn flag_complete(spec: &FlagEquationSpec, weights: &[u32], dmax: u32) -> Result<usize, String> {
    let caps: Vec<u32> = weights[1..].iter().map(|wi| dmax / wi).collect();
    let fam = flag_basis(spec, &caps).map_err(err("flag"))?;
    let op = spec.operator();
    let vars = refs(&spec.vars);
    let mut dims = 0;
    for d in 0..=dmax {
        let members: Vec<QPoly> = fam
            .elements
            .iter()
            .filter(|e| index_list(e, "l").iter().zip(weights).map(|(li, wi)| *li as u32 * wi).sum::<u32>() == d)
            .map(|e| e.solution.clone())
            .collect();
        dims += compare_with_kernel(&format!("flag weight {d}"), &members, &op, &weighted_slice(&vars, weights, d))?;
    }
    Ok(dims)
}

pub fn flag_cases() -> Vec<(FlagEquationSpec, Vec<u32>, u32)> {
    let xy = |s: &[&str]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>();
    vec![
        (FlagEquationSpec::new(xy(&["x", "y"]), vec![2, 2], vec![p("x")]).unwrap(), vec![2, 3], 15),
        (FlagEquationSpec::standard(vec![1, 2], vec![p("x1^2")]).unwrap(), vec![2, 3], 15),
        (FlagEquationSpec::standard(vec![2, 1], vec![p("x1")]).unwrap(), vec![1, 3], 10),
        (FlagEquationSpec::standard(vec![2, 2, 2], vec![p("x1"), p("x2")]).unwrap(), vec![4, 6, 7], 20),
    ]
}

/// `u_tt + u_t − Δu`: filtered by `2·deg_t + deg_x`.
pub fn dissipative_complete(n: usize, dmax: u32) -> Result<usize, String> {
    let mut vars = vec!["t".to_string()];
    vars.extend(coordinate_names(n));
    let mut w = vec![2];
    w.extend(vec![1; n]);
    let slice: Vec<QPoly> = (0..=dmax).flat_map(|d| weighted_slice(&refs(&vars), &w, d)).collect();
    let fam = dissipative_wave_basis(n, &vec![dmax; n]).map_err(err("dissipative"))?;
    let members: Vec<QPoly> =
        fam.elements.iter().filter(|e| index_list(e, "l").iter().sum::<i64>() <= dmax as i64).map(|e| e.solution.clone()).collect();
    compare_with_kernel(&format!("dissipative n={n} ≤{dmax}"), &members, &fam.annihilator, &slice)
}

/// `t u_tt + λ u_t − ε t Δu` lowers total degree by one.
pub fn anisymmetric_complete(n: usize, lambda: (i64, i64), eps: i64, d: u32) -> Result<usize, String> {
    let mut vars = vec!["t".to_string()];
    vars.extend(coordinate_names(n));
    let fam = anisymmetric_basis(n, &rat(lambda.0, lambda.1), eps, &vec![d; n]).map_err(err("anisymmetric"))?;
    let members = homogeneous_members(&fam.solutions(), &[], d);
    compare_with_kernel(&format!("anisymmetric n={n} λ={lambda:?} ε={eps} d={d}"), &members, &fam.annihilator, &homogeneous_slice(&refs(&vars), d))
}

pub fn sl_complete(n: usize, l1: u32, l2: u32) -> Result<usize, String> {
    let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let ys: Vec<String> = (1..=n).map(|i| format!("y{i}")).collect();
    let fam = sl_module_basis(n, l1, l2).map_err(err("sl"))?.solutions();
    compare_with_kernel(&format!("sl({n}) ({l1},{l2})"), &fam, &sl_laplacian(n), &bidegree_slice(&refs(&xs), &refs(&ys), l1, l2))
}

pub fn so_module_complete(n: usize, k: u32) -> Result<usize, String> {
    let vars = coordinate_names(n);
    let fam = harmonic_module_basis(n, k).map_err(err("so"))?.solutions();
    compare_with_kernel(&format!("so({n}) k={k}"), &fam, &Operator::laplacian(&refs(&vars)), &homogeneous_slice(&refs(&vars), k))
}

pub fn g2_complete(k: u32) -> Result<usize, String> {
    let vars = coordinate_names(7);
    let fam = g2_module_basis(k).map_err(err("G2"))?.solutions();
    let op: Operator = g2_laplacian(selected_g2_reading().map_err(err("G2 reading"))?);
    compare_with_kernel(&format!("G2 k={k}"), &fam, &op, &homogeneous_slice(&refs(&vars), k))
}

/// `v_tt + 2a√−1 v_t − v_xx − x v_yy − y v_zz`, filtered by `8·deg_t + 4·deg_x + 6·deg_y + 7·deg_z`.
pub fn klein_gordon_complete(a: &Rational, wmax: u32) -> Result<usize, String> {
    let vars = ["t", "x", "y", "z"];
    let w = [8, 4, 6, 7];
    let slice: Vec<GPoly> = (0..=wmax).flat_map(|d| weighted_slice::<Gaussian>(&vars, &w, d)).collect();
    let b = Gaussian::new(int(0), a * int(2));
    let op = dissipation_operator(&b) + (Operator::d("x", 2) + Operator::mul(gp("x")) * Operator::d("y", 2) + Operator::mul(gp("y")) * Operator::d("z", 2)).neg();
    let k = kernel_oracle_generic(&op, &slice).map_err(err("klein-gordon kernel"))?;
    let mut fam = Vec::new();
    for m in flagpde::family::box_indices(&[wmax / 4, wmax / 6, wmax / 7]) {
        if 4 * m[0] + 6 * m[1] + 7 * m[2] <= wmax {
            fam.push(klein_gordon_complex(a, [m[0], m[1], m[2]], None).map_err(err("klein-gordon"))?);
        }
    }
    if span_rank(&fam) != fam.len() || fam.len() != k.dimension || !same_span(&fam, &k.basis) {
        return Err(format!("klein-gordon a={a} weight ≤{wmax}: family {} vs kernel {}", fam.len(), k.dimension));
    }
    Ok(k.dimension)
}

/// All completeness cases with `n ≤ 3` and total degree `≤ 5`.
pub fn completeness_suite() -> Check {
    let mut cases = 0usize;
    let mut dims = 0usize;
    let mut tally = |r: Result<usize, String>| -> Result<(), String> {
        dims += r?;
        cases += 1;
        Ok(())
    };
    for n in 2..=3 {
        for k in 0..=5 {
            tally(harmonic_complete(n, k))?;
        }
    }
    for orders in [vec![1, 1], vec![2, 2], vec![3, 3], vec![2, 3], vec![2, 2, 2], vec![1, 2, 3], vec![3, 3, 3]] {
        let l = orders.iter().fold(1u32, |acc, &m| num_integer::lcm(acc, m));
        let wmin = orders.iter().map(|m| l / m).min().unwrap();
        tally(constant_complete(&orders, 5 * wmin))?;
    }
    for (spec, w, dmax) in flag_cases() {
        tally(flag_complete(&spec, &w, dmax))?;
    }
    for n in 1..=3 {
        tally(dissipative_complete(n, 5))?;
        for lambda in LAMBDAS {
            for eps in [1, -1] {
                for d in 0..=5 {
                    tally(anisymmetric_complete(n, lambda, eps, d))?;
                }
            }
        }
    }
    for n in 2..=3 {
        for l1 in 0..=5 {
            for l2 in 0..=5 - l1 {
                tally(sl_complete(n, l1, l2))?;
            }
        }
    }
    for k in 0..=5 {
        tally(so_module_complete(3, k))?;
    }
    for k in 0..=3 {
        tally(g2_complete(k))?;
    }
    for a in [int(1), rat(1, 2)] {
        tally(klein_gordon_complete(&a, 20))?;
    }
    Ok(format!("{cases} slices, total kernel dimension {dims}"))
}

// ---------- golden formulas, typed by hand

/// `ξ_{a,0..2}` as closed forms in `a`.
pub fn xi_low_golden<C: Coefficient>(a: &C, i: u32) -> Poly<C> {
    let t = |c: C, k: i32| Poly::monomial(c, &[("t", k)]);
    match i {
        0 => Poly::one(),
        1 => t(a.recip(), 1),
        2 => t(a.times(a).times(&C::from_i64(2)).recip(), 2) - t(a.times(a).times(a).recip(), 1),
        _ => unreachable!(),
    }
}

pub fn xi_low_suite() -> Check {
    let reals = [int(1), rat(1, 2), int(-3), rat(2, 5)];
    for a in &reals {
        for i in 0..=2 {
            if xi_dissipation(a, i).unwrap() != xi_low_golden(a, i) {
                return Err(format!("ξ a={a} i={i}"));
            }
        }
    }
    let g = Gaussian::new(int(1), int(2));
    for i in 0..=2 {
        if xi_dissipation(&g, i).unwrap() != xi_low_golden(&g, i) {
            return Err(format!("ξ a=1+2i i={i}"));
        }
    }
    Ok("i ≤ 2, five values of a".into())
}

/// Chain `1 − 2 − 3` exponents with the `t^7` coefficient fixed to `1/63`.
pub fn chain3_exponents_golden() -> [QPoly; 3] {
    [
        p("t*D1^2 + t^2*D1*D2^2 + t^3/3*(D2^4 + 2*D1*D2*D3^2) + t^4/6*(3*D2^3*D3^2 + D1*D3^4) + t^5/3*D2^2*D3^4 + t^6/9*D2*D3^6 + t^7/63*D3^8"),
        p("x1*(t*D2^2 + t^2*D2*D3^2 + t^3*D3^4/3)"),
        p("t*x2*D3^2"),
    ]
}

/// The same with `t^7/21` in the last exponent, a wrong value kept as a negative probe.
pub fn chain3_exponents_wrong() -> [QPoly; 3] {
    let [a, b, c] = chain3_exponents_golden();
    [a + p("(1/21 - 1/63)*t^7*D3^8"), b, c]
}

pub fn chain3_exponent_suite() -> Check {
    let s = xi_splitting(&Tree::chain(3)).map_err(err("splitting"))?;
    let golden = chain3_exponents_golden();
    for (i, (got, want)) in s.exponents.iter().zip(&golden).enumerate() {
        if got != want {
            return Err(format!("exponent {}: {got} vs {want}", i + 1));
        }
    }
    // t^7/21 breaks the factorization
    let wrong = chain3_exponents_wrong();
    let probe = [p("x3^8")];
    match splitting_mismatch(&Tree::chain(3), &wrong, &probe, 7).map_err(err("probe"))? {
        Some((_, 7)) => {}
        other => return Err(format!("t^7/21 should fail at t^7 on x3^8, got {other:?}")),
    }
    if splitting_mismatch(&Tree::chain(3), &golden, &probe, 7).map_err(err("probe"))?.is_some() {
        return Err("golden exponents fail on x3^8".into());
    }
    Ok("three exponents exact; t^7 coefficient is 1/63 (1/21 breaks the factorization at t^7)".into())
}

/// Per-exponent symbols with `D_j → √−1·K_j`, `K_j = 2πk_j`.
pub fn chain3_symbols_golden() -> [GPoly; 3] {
    let z = |re: &str, im: &str| gp(re) + gp(im).scale(&Gaussian::i());
    [
        z(
            "-t*(K1^2 - t^2/3*(K2^4 + 2*K1*K2*K3^2) + t^4/3*K2^2*K3^4 - t^6/63*K3^8)",
            "-t^2*(K1*K2^2 - t^2/6*(3*K2^3*K3^2 + K1*K3^4) + t^4/9*K2*K3^6)",
        ),
        z("-t*x1*(K2^2 - t^2/3*K3^4)", "-t^2*x1*K2*K3^2"),
        z("-t*x2*K3^2", "0"),
    ]
}

pub fn chain3_symbol_suite() -> Check {
    let s = xi_splitting(&Tree::chain(3)).map_err(err("splitting"))?;
    for (i, (e, want)) in s.exponents.iter().zip(chain3_symbols_golden()).enumerate() {
        let mut g = e.to_gaussian();
        for j in 1..=3 {
            let k = GPoly::monomial(Gaussian::i(), &[(format!("K{j}").as_str(), 1)]);
            g = g.substitute(&format!("D{j}"), &k).map_err(err("substitute"))?;
        }
        if g != want {
            return Err(format!("symbol {}: {g} vs {want}", i + 1));
        }
    }
    Ok("three evaluated exponents exact".into())
}

/// Leading branch of the nested series for `∂_x^{m1} + x^{n1}∂_y^{m2} + y^{n2}∂_z^{m3}`,
/// valid when `ℓ3 < m3`.
pub fn example_flag_closed_form(m: [u32; 3], n1: u32, l: [u32; 3]) -> QPoly {
    let mut out = QPoly::zero();
    let mut i = 0u32;
    while i * m[1] <= l[1] {
        let mut c = int(if i.is_multiple_of(2) { 1 } else { -1 });
        for s in 0..i * m[1] {
            c *= int((l[1] - s) as i64);
        }
        for r in 0..i {
            for s in 1..=m[0] {
                c /= int((s + n1 + l[0] + r * (m[0] + n1)) as i64);
            }
        }
        out = out + QPoly::monomial(c, &[("x", (l[0] + i * (m[0] + n1)) as i32), ("y", (l[1] - i * m[1]) as i32), ("z", l[2] as i32)]);
        i += 1;
    }
    out
}

pub fn example_flag_suite() -> Check {
    let cases: [([u32; 3], u32, u32, [u32; 3]); 3] = [([2, 2, 2], 1, 1, [1, 4, 1]), ([3, 2, 2], 2, 1, [2, 5, 1]), ([2, 1, 3], 1, 2, [0, 4, 2])];
    for (m, n1, n2, l) in cases {
        let vars: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let spec = FlagEquationSpec::new(vars, m.to_vec(), vec![p(&format!("x^{n1}")), p(&format!("y^{n2}"))]).map_err(err("spec"))?;
        let caps = [l[1], l[2]];
        let fam = flag_basis(&spec, &caps).map_err(err("flag"))?;
        let want = [l[0] as i64, l[1] as i64, l[2] as i64];
        let got = fam.elements.iter().find(|e| index_list(e, "l") == want).ok_or("index missing")?;
        let closed = example_flag_closed_form(m, n1, l);
        let names: Vec<&str> = got.solution.var_names();
        if got.solution != closed.with_vars(&names) {
            return Err(format!("m={m:?} l={l:?}: {} vs {closed}", got.solution));
        }
    }
    Ok("three index tuples".into())
}

fn fact(n: i64) -> Rational {
    Rational::from_integer(factorial(n as u32))
}

fn prod(range: std::ops::RangeInclusive<i64>, shift: i64) -> Rational {
    range.fold(int(1), |acc, s| acc * int(shift + s))
}

fn tpow(c: Rational, k: i64) -> QPoly {
    QPoly::monomial(c, &[("t", k as i32)])
}

fn sign(k: i64) -> Rational {
    int(if k % 2 == 0 { 1 } else { -1 })
}

fn pow2a(a: &Rational, e: i64) -> Rational {
    let two_a = a * int(2);
    (0..e).fold(int(1), |acc, _| acc * &two_a)
}

/// Real and imaginary parts of `ξ_{2a√−1, j}` from the even/odd closed forms.
pub fn zeta_golden(a: &Rational, j: i64) -> (QPoly, QPoly) {
    let i = j / 2;
    if j % 2 == 0 {
        let mut re = tpow(fact(2 * i).recip() / pow2a(a, 2 * i), 2 * i);
        for r in 1..i {
            re = re + tpow(sign(r) * prod(1..=2 * r - 1, 2 * i) / (fact(2 * r) * fact(2 * (i - r) - 1) * pow2a(a, 2 * (i + r))), 2 * (i - r));
        }
        let mut im = QPoly::zero();
        if i >= 1 {
            im = tpow((fact(2 * i - 2) * pow2a(a, 2 * i + 1)).recip(), 2 * i - 1);
            for r in 1..i {
                im = im + tpow(sign(r) * prod(1..=2 * r, 2 * i) / (fact(2 * r + 1) * fact(2 * (i - r - 1)) * pow2a(a, 2 * i + 2 * r + 1)), 2 * i - 2 * r - 1);
            }
        }
        (re.scale(&sign(i)), im.scale(&sign(i)))
    } else {
        let mut re = QPoly::zero();
        if i >= 1 {
            re = tpow((fact(2 * i - 1) * pow2a(a, 2 * (i + 1))).recip(), 2 * i);
            for r in 1..i {
                re = re + tpow(sign(r) * prod(1..=2 * r, 2 * i + 1) / (fact(2 * r + 1) * fact(2 * i - 2 * r - 1) * pow2a(a, 2 * (i + r + 1))), 2 * (i - r));
            }
        }
        let mut im = tpow((fact(2 * i + 1) * pow2a(a, 2 * i + 1)).recip(), 2 * i + 1);
        for r in 1..=i {
            im = im + tpow(sign(r) * prod(1..=2 * r - 1, 2 * i + 1) / (fact(2 * r) * fact(2 * i - 2 * r) * pow2a(a, 2 * i + 2 * r + 1)), 2 * i - 2 * r + 1);
        }
        (re.scale(&sign(i)), im.scale(&sign(i + 1)))
    }
}

pub fn zeta_suite() -> Check {
    for a in [int(1), rat(1, 2), int(3)] {
        for j in 0..=9 {
            let got = zeta(&a, j as u32).map_err(err("zeta"))?;
            let want = zeta_golden(&a, j);
            if got.0 != want.0 || got.1 != want.1 {
                return Err(format!("ζ_{j} a={a}: ({}, {}) vs ({}, {})", got.0, got.1, want.0, want.1));
            }
        }
    }
    Ok("indices 0..9 (i ≤ 4), three values of a".into())
}

// ---------- recursion and splitting

pub fn xi_recursion_suite(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reals = Vec::new();
    while reals.len() < 3 {
        let num = rng.gen_range(-9i64..=9);
        if num != 0 {
            reals.push(rat(num, rng.gen_range(1i64..=7)));
        }
    }
    for a in &reals {
        let d = dissipation_operator(a);
        for i in 1..=10 {
            if d.apply(&xi_dissipation(a, i).unwrap()).unwrap() != xi_dissipation(a, i - 1).unwrap() {
                return Err(format!("a={a} i={i}"));
            }
        }
    }
    let gauss = [Gaussian::new(rat(rng.gen_range(1i64..=5), 3), int(rng.gen_range(1i64..=4))), Gaussian::new(int(0), rat(rng.gen_range(1i64..=5), 2))];
    for a in &gauss {
        let d = dissipation_operator(a);
        for i in 1..=10 {
            if d.apply(&xi_dissipation(a, i).unwrap()).unwrap() != xi_dissipation(a, i - 1).unwrap() {
                return Err(format!("a={a:?} i={i}"));
            }
        }
    }
    Ok(format!("i ≤ 10 for a ∈ {{{}}} and two Gaussian values", reals.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")))
}

pub fn splitting_suite(max_nodes: usize, degree_cap: u32, t_cap: u32) -> Check {
    let mut trees = 0;
    let mut monomials = 0;
    for n in 1..=max_nodes {
        for tree in Tree::all_with_nodes(n) {
            let r = check_splitting(&tree, degree_cap, t_cap).map_err(|e| format!("{:?}: {e}", tree.edges))?;
            trees += 1;
            monomials += r.monomials_checked;
        }
    }
    Ok(format!("{trees} trees, {monomials} monomials"))
}

// ---------- numerics

pub fn dalembert_suite() -> Check {
    // u_{x1x1} = u_{x2x2}, u(0,x2) = cos(2πx2), u_{x1}(0,x2) = 0
    let p = FlagIvpProblem {
        coefficients: vec![QPoly::zero(), p("D2^2")],
        half_widths: vec![1.0],
        data: vec![TrigData::single(vec![1], 1.0, 0.0), TrigData::zero()],
    };
    let sol = flag_ivp_solve(&p).map_err(err("flag ivp"))?;
    let pts = grid(&[(0.0, 1.0), (-1.0, 1.0)], &[5, 5]).unwrap();
    let mut worst = 0.0f64;
    for x in &pts {
        let want = 0.5 * ((2.0 * PI * (x[1] + x[0])).cos() + (2.0 * PI * (x[1] - x[0])).cos());
        worst = worst.max((sol.eval(x).map_err(err("eval"))? - want).abs());
    }
    // a shifted, scaled mode with nonzero velocity: u = sin(κ(x2 − x1)), κ = 2π·3/2
    let kappa = 2.0 * PI * 3.0 / 2.0;
    let q = FlagIvpProblem {
        coefficients: vec![QPoly::zero(), parse_poly("D2^2").unwrap()],
        half_widths: vec![2.0],
        data: vec![TrigData::single(vec![3], 0.0, 1.0), TrigData::single(vec![3], -kappa, 0.0)],
    };
    let sol = flag_ivp_solve(&q).map_err(err("flag ivp"))?;
    for x in grid(&[(0.0, 0.8), (-2.0, 2.0)], &[5, 5]).unwrap() {
        let want = (kappa * (x[1] - x[0])).sin();
        worst = worst.max((sol.eval(&x).map_err(err("eval"))? - want).abs());
    }
    if worst < 1e-9 {
        Ok(format!("max error {worst:.2e} on two 5×5 grids"))
    } else {
        Err(format!("max error {worst:.2e}"))
    }
}

pub fn chain3_phi(k: [f64; 3], t: f64, x: [f64; 3]) -> f64 {
    let [k1, k2, k3] = k;
    let p2 = PI * PI;
    let a = -4.0 * p2 * t
        * (k1 * k1 - 4.0 * p2 * t * t / 3.0 * (k2.powi(4) + 2.0 * k1 * k2 * k3 * k3) + 16.0 * p2 * p2 * t.powi(4) / 3.0 * k2 * k2 * k3.powi(4)
            - 64.0 * p2 * p2 * p2 * t.powi(6) / 63.0 * k3.powi(8))
        - 4.0 * p2 * t * x[0] * (k2 * k2 - 4.0 * p2 * t * t / 3.0 * k3.powi(4))
        - 4.0 * p2 * k3 * k3 * t * x[1];
    let b = -8.0 * PI * p2 * t * t * (k1 * k2 * k2 - 2.0 * p2 * t * t / 3.0 * (3.0 * k2.powi(3) * k3 * k3 + k1 * k3.powi(4)) + 16.0 * p2 * p2 * t.powi(4) / 9.0 * k2 * k3.powi(6))
        - 8.0 * PI * p2 * k2 * k3 * k3 * t * t * x[0];
    let th = 2.0 * PI * (k1 * x[0] + k2 * x[1] + k3 * x[2]);
    0.5 * (-a).exp() * (th - b).cos() + 0.5 * a.exp() * (th + b).cos()
}

pub fn tree_wave_suite() -> Check {
    let p = TreeWaveProblem {
        tree: Tree::chain(3),
        half_widths: vec![1.0, 2.0, 1.5],
        position: TrigData { modes: vec![TrigMode { k: vec![1, 1, 0], cos: 0.7, sin: -0.2 }, TrigMode { k: vec![0, 0, 1], cos: 0.0, sin: 1.0 }] },
        velocity: TrigData::single(vec![-1, 2, 1], 0.3, 0.4),
        method: TreeWaveMethod::Splitting,
    };
    let pts = grid(&[(-1.0, 1.0), (-2.0, 2.0), (-1.5, 1.5)], &[3, 4, 3]).unwrap();
    let mut trace = 0.0f64;
    for method in [TreeWaveMethod::Splitting, TreeWaveMethod::Taylor] {
        let sol = tree_wave_solve(&TreeWaveProblem { method, ..p.clone() }).map_err(err("tree wave"))?;
        trace = trace.max(sol.initial_error(&p.position, &p.velocity, &pts).map_err(err("traces"))?);
    }
    let one = TreeWaveProblem { tree: Tree::chain(3), half_widths: vec![1.0; 3], position: TrigData::single(vec![1, 1, 1], 1.0, 0.0), velocity: TrigData::zero(), method: TreeWaveMethod::Splitting };
    let sol = tree_wave_solve(&one).map_err(err("tree wave"))?;
    let mut closed = 0.0f64;
    for x in grid(&[(-1.0, 1.0); 3], &[3, 3, 3]).unwrap() {
        let got = sol.eval(0.1, &x).map_err(err("eval"))?;
        closed = closed.max((got - chain3_phi([1.0; 3], 0.1, [x[0], x[1], x[2]])).abs());
    }
    if trace < 1e-9 && closed < 1e-9 {
        Ok(format!("trace error {trace:.2e}, closed-form error {closed:.2e}"))
    } else {
        Err(format!("trace error {trace:.2e}, closed-form error {closed:.2e}"))
    }
}

/// Classical fourth-order Runge-Kutta for `y^{(m)} = Σ b_i y^{(m−i)}`, with step halving
/// until two runs agree.
pub fn rk4_oracle(b: &[f64], c: &[f64], t_end: f64) -> Vec<f64> {
    let m = b.len();
    let rhs = |y: &[f64]| -> Vec<f64> {
        let mut d: Vec<f64> = y[1..].to_vec();
        d.push((0..m).map(|i| b[i] * y[m - 1 - i]).sum());
        d
    };
    let run = |steps: usize| -> Vec<f64> {
        let h = t_end / steps as f64;
        let mut y = c.to_vec();
        for _ in 0..steps {
            let k1 = rhs(&y);
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
            let k2 = rhs(&y2);
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
            let k3 = rhs(&y3);
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
            let k4 = rhs(&y4);
            for j in 0..m {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        y
    };
    let mut steps = 64;
    let mut prev = run(steps);
    loop {
        steps *= 2;
        let next = run(steps);
        let diff = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff < 1e-13 || steps > 1 << 16 {
            return next;
        }
        prev = next;
    }
}

pub fn ode_suite(seed: u64) -> Check {
    let ts: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
    let mut worst = 0.0f64;
    let exp = OdeProblem::new(vec![1.0], vec![1.0]).unwrap();
    let cos = OdeProblem::new(vec![0.0, -1.0], vec![1.0, 0.0]).unwrap();
    let sin = OdeProblem::new(vec![0.0, -1.0], vec![0.0, 1.0]).unwrap();
    for &t in &ts {
        worst = worst.max((ode_solve(&exp, t).unwrap() - t.exp()).abs());
        worst = worst.max((ode_solve(&cos, t).unwrap() - t.cos()).abs());
        worst = worst.max((ode_solve(&sin, t).unwrap() - t.sin()).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut init = 0.0f64;
    let mut traj = 0.0f64;
    for _ in 0..5 {
        let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let prob = OdeProblem::new(b.clone(), c.clone()).unwrap();
        for (r, cr) in c.iter().enumerate() {
            init = init.max((ode_derivative(&prob, r as u32, 0.0).unwrap() - cr).abs());
        }
        for t in [0.5, 1.0, 2.0] {
            let want = rk4_oracle(&b, &c, t);
            traj = traj.max((ode_solve(&prob, t).unwrap() - want[0]).abs());
        }
    }
    if worst < 1e-10 && init < 1e-10 && traj < 1e-10 {
        Ok(format!("closed forms {worst:.1e}, initial values {init:.1e}, vs integrator {traj:.1e}"))
    } else {
        Err(format!("closed forms {worst:.1e}, initial values {init:.1e}, vs integrator {traj:.1e}"))
    }
}

// ---------- Lie structure

pub fn lie_suite(degree: u32) -> Check {
    let s = g2_structure();
    if let Some((label, _)) = s.relations().into_iter().find(|r| !r.1) {
        return Err(label);
    }
    if !s.is_traceless() {
        return Err("G2 generators are not traceless".into());
    }
    let rep = commutation_checks(degree).map_err(err("identities"))?;
    if let Some(c) = rep.checks.iter().find(|c| !c.passed) {
        return Err(format!("{}: {:?}", c.name, c.counterexample));
    }
    if rep.g2_reading != G2LaplacianReading::FirstSquare {
        return Err(format!("unexpected Laplacian reading {:?}", rep.g2_reading));
    }
    // Δ(ζ) = n
    for n in 2..=4 {
        let lap: Operator = sl_laplacian(n);
        if lap.apply(&sl_zeta(n)).unwrap() != QPoly::from_i64(n as i64) {
            return Err(format!("Laplacian of zeta for n={n}"));
        }
    }
    for (l1, l2) in [(1, 1), (2, 1)] {
        let d = sl_decomposition(2, l1, l2).map_err(err("decomposition"))?;
        if !d.is_direct_sum() {
            return Err(format!("decomposition ({l1},{l2}): {d:?}"));
        }
    }
    let cases: usize = rep.checks.iter().map(|c| c.cases).sum();
    Ok(format!("{} identities over {cases} cases, reading {}", rep.checks.len(), rep.g2_reading))
}
