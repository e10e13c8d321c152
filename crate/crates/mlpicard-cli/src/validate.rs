//! Named property suites behind `mlpicard validate`.
//!
//! Every check is a pure function of the seed, so the emitted table is
//! byte-identical across reruns; wall-clock noise never enters the file.

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use mlpicard::cost::{fe_bound, fe_model, rn_bound, rn_model};
use mlpicard::oracle::{picard_oracle, GridSpec};
use mlpicard::problems::{linear_baseline, manufactured};
use mlpicard::quadrature::{gauss_legendre, legendre_roots, nested_measure};
use mlpicard::randomness::gaussian_vector;
use mlpicard::seminorm::{estimate_seminorm, Probe, SeminormSpec};
use mlpicard::num_bigint::BigUint;
use mlpicard::StreamKey;

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        pass,
        detail,
    }
}

fn factorial(m: u32) -> f64 {
    (1..=m).map(|v| v as f64).product::<f64>().max(1.0)
}

fn quadrature_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    let mut worst_rel: f64 = 0.0;
    for q in 1..=16u32 {
        for (a, b) in [(0.0, 1.0), (0.3, 2.7)] {
            let rule = gauss_legendre(q, a, b).unwrap();
            for k in 0..(2 * q) {
                let numeric = rule.integrate(|t| t.powi(k as i32));
                let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0);
                worst_rel = worst_rel.max(((numeric - exact) / exact).abs());
            }
        }
    }
    checks.push(check(
        "quadrature/monomial-exactness",
        worst_rel <= 1e-12,
        format!("max relative error {worst_rel:.3e} over Q<=16, degree<2Q"),
    ));

    let mut worst_nested: f64 = 0.0;
    for horizon in [1.0, 2.5] {
        for q in 1..=8u32 {
            for n in 0..=4u32.min(2 * q - 1) {
                let measure = nested_measure(n, q, horizon).unwrap();
                for k in 0..(2 * q - n) {
                    let lhs =
                        measure.integrate(|t| (horizon - t).powi(k as i32) / factorial(k));
                    let rhs = horizon.powi((n + k) as i32) / factorial(n + k);
                    worst_nested = worst_nested.max(((lhs - rhs) / rhs).abs());
                }
            }
        }
    }
    checks.push(check(
        "quadrature/nested-moment-identity",
        worst_nested <= 1e-10,
        format!("max relative defect {worst_nested:.3e} over Q<=8, n<=4"),
    ));

    let mut worst_affine: f64 = 0.0;
    for q in [1u32, 2, 4, 8, 16] {
        let unit = gauss_legendre(q, 0.0, 1.0).unwrap();
        let (a, b) = (0.4, 3.1);
        let mapped = gauss_legendre(q, a, b).unwrap();
        for i in 0..q as usize {
            let x = a + (b - a) * unit.nodes()[i];
            let w = (b - a) * unit.weights()[i];
            worst_affine = worst_affine
                .max((mapped.nodes()[i] - x).abs())
                .max((mapped.weights()[i] - w).abs());
        }
    }
    checks.push(check(
        "quadrature/affine-covariance",
        worst_affine <= 1e-13,
        format!("max node/weight deviation {worst_affine:.3e}"),
    ));

    let mut monotone = true;
    for q in [1u32, 2, 3, 5] {
        for cut in [0.1, 0.5, 0.9, 1.3, 1.7] {
            let psi = |r: f64| if r <= cut { 1.0 } else { 0.0 };
            let mut prev = f64::INFINITY;
            for s in [0.0, 0.25, 0.5, 1.0, 1.5, 1.9] {
                let val = gauss_legendre(q, s, 2.0).unwrap().integrate(psi);
                monotone &= val <= prev + 1e-12;
                prev = val;
            }
        }
    }
    checks.push(check(
        "quadrature/interval-monotonicity",
        monotone,
        "nonincreasing step functions across nested intervals".into(),
    ));

    let mut worst_residual: f64 = 0.0;
    for n in 1..=64u32 {
        for &root in &legendre_roots(n).unwrap() {
            // P_n at its computed roots via the recurrence.
            let mut p_prev = 1.0;
            let mut p = root;
            for k in 2..=n {
                let kf = k as f64;
                let next = ((2.0 * kf - 1.0) * root * p - (kf - 1.0) * p_prev) / kf;
                p_prev = p;
                p = next;
            }
            if n == 1 {
                p = root;
            }
            worst_residual = worst_residual.max(p.abs());
        }
    }
    checks.push(check(
        "quadrature/legendre-root-residual",
        worst_residual <= 1e-13,
        format!("max |P_n(root)| = {worst_residual:.3e} for n<=64"),
    ));

    checks
}

fn cost_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    let anchors_hold = [1u64, 10, 100]
        .iter()
        .all(|&d| rn_model(1, 1, 1, d) == BigUint::from(2 * d))
        && fe_model(1, 1, 1) == BigUint::from(2u32);
    checks.push(check(
        "cost/unit-anchors",
        anchors_hold,
        "rn(1,1,1,d) = 2d and fe(1,1,1) = 2".into(),
    ));

    let mut bounds_hold = true;
    for n in 1..=6u32 {
        for d in [1u64, 10, 100] {
            bounds_hold &= rn_model(n, n, n, d) <= rn_bound(n, d);
        }
        bounds_hold &= fe_model(n, n, n) <= fe_bound(n);
    }
    checks.push(check(
        "cost/diagonal-bounds",
        bounds_hold,
        "rn <= 8dN^2N and fe <= 8N^2N for N in [1,6], d in {1,10,100}".into(),
    ));

    let mut increasing = true;
    let mut prev = BigUint::from(0u32);
    for n in 1..=8u32 {
        let value = rn_model(n, n, n, 1);
        increasing &= value > prev;
        prev = value;
    }
    checks.push(check(
        "cost/diagonal-monotonicity",
        increasing,
        "rn(N,N,N,1) strictly increasing for N <= 8".into(),
    ));

    checks
}

fn seminorm_suite(seed: u64) -> Vec<Check> {
    let mut checks = Vec::new();
    let key = StreamKey::root(seed);
    let probes = vec![
        Probe { s: 0.25, u: 0.25, z: vec![0.0] },
        Probe { s: 0.5, u: 0.3, z: vec![0.5] },
        Probe { s: 1.0, u: 0.7, z: vec![-0.5] },
    ];
    let spec = |depth: u32, inner: u32| SeminormSpec {
        depth,
        order: 4,
        horizon: 1.0,
        probes: probes.clone(),
        inner_samples: inner,
    };

    let ones = |_: f64, _: &[f64], _: &StreamKey| 1.0;
    let mut worst_const: f64 = 0.0;
    for depth in 0..=3u32 {
        let got = estimate_seminorm(&ones, &spec(depth, 8), &key).unwrap();
        let want = 1.0 / factorial(depth);
        worst_const = worst_const.max(((got - want) / want).abs());
    }
    checks.push(check(
        "seminorm/constants",
        worst_const <= 1e-12,
        format!("max relative defect {worst_const:.3e} vs T^k/k!"),
    ));

    let noisy = |s: f64, x: &[f64], k: &StreamKey| s + x[0] + gaussian_vector(k, 0, 1)[0];
    let scaled = |s: f64, x: &[f64], k: &StreamKey| -4.0 * noisy(s, x, k);
    let base = estimate_seminorm(&noisy, &spec(1, 64), &key).unwrap();
    let four = estimate_seminorm(&scaled, &spec(1, 64), &key).unwrap();
    checks.push(check(
        "seminorm/absolute-homogeneity",
        four == 4.0 * base,
        format!("|-4 V| = {four:.6e}, 4|V| = {:.6e}", 4.0 * base),
    ));

    let other = |s: f64, x: &[f64], k: &StreamKey| (s + x[0]).cos() + gaussian_vector(k, 1, 1)[0];
    let summed = |s: f64, x: &[f64], k: &StreamKey| noisy(s, x, k) + other(s, x, k);
    let eu = estimate_seminorm(&noisy, &spec(2, 64), &key).unwrap();
    let ev = estimate_seminorm(&other, &spec(2, 64), &key).unwrap();
    let es = estimate_seminorm(&summed, &spec(2, 64), &key).unwrap();
    checks.push(check(
        "seminorm/subadditivity",
        es <= eu + ev + 1e-12,
        format!("|U+V| = {es:.6e} <= {:.6e}", eu + ev),
    ));

    let estimate_for = |m: u32| {
        let field = move |_: f64, _: &[f64], k: &StreamKey| {
            (0..m)
                .map(|c| gaussian_vector(&k.fork(&[c as i64]), 0, 1)[0])
                .sum::<f64>()
                / m as f64
        };
        estimate_seminorm(&field, &spec(1, 256), &key).unwrap()
    };
    let reference = estimate_for(1);
    let mut scaling_ok = true;
    let mut detail = format!("m=1: {reference:.4e}");
    for m in [4u32, 16] {
        let got = estimate_for(m);
        let ratio = got / (reference / (m as f64).sqrt());
        scaling_ok &= (0.7..=1.4).contains(&ratio);
        write!(detail, "; m={m}: ratio {ratio:.3}").expect("write to string");
    }
    checks.push(check("seminorm/mc-scaling", scaling_ok, detail));

    checks
}

fn oracle_suite() -> Vec<Check> {
    let mut checks = Vec::new();
    let spec = GridSpec {
        time_points: 24,
        space_points: 129,
        space_radius: 8.0,
        hermite_order: 16,
        quad_order: 4,
    };

    let quadratic = linear_baseline("quadratic", 1).unwrap();
    let sol = picard_oracle(&quadratic.problem, 1, &spec).unwrap();
    let got = sol.grid.evaluate(0.0, 0.0);
    checks.push(check(
        "oracle/heat-moment",
        (got - 1.0).abs() <= 1e-9,
        format!("u_1(0,0) = {got:.12} (target 1, the horizon)"),
    ));

    let exp_ode = linear_baseline("exp-ode", 1).unwrap();
    let truth = exp_ode.solution.as_ref().unwrap()(0.0, &[0.0]);
    let sol = picard_oracle(&exp_ode.problem, 12, &spec).unwrap();
    let got = sol.grid.evaluate(0.0, 0.0);
    checks.push(check(
        "oracle/exponential-fixed-point",
        ((got - truth) / truth).abs() <= 1e-7,
        format!("u_12(0,0) = {got:.10} vs closed form {truth:.10}"),
    ));

    let named = manufactured(1, 1.0);
    let sol = picard_oracle(&named.problem, 8, &spec).unwrap();
    let mut contracting = true;
    for k in 2..sol.sup_differences.len() {
        contracting &= sol.sup_differences[k] < sol.sup_differences[k - 1];
    }
    checks.push(check(
        "oracle/picard-contraction",
        contracting,
        format!(
            "sup-differences {:?}",
            sol.sup_differences
                .iter()
                .map(|d| format!("{d:.2e}"))
                .collect::<Vec<_>>()
        ),
    ));

    let mut worst_linear: f64 = 0.0;
    let sol = picard_oracle(&quadratic.problem, 2, &spec).unwrap();
    let solution = quadratic.solution.as_ref().unwrap();
    for (t, x) in [(0.0, 0.0), (0.25, 0.8), (0.7, -1.3)] {
        let got = sol.grid.evaluate(t, x);
        let want = solution(t, &[x]);
        worst_linear = worst_linear.max((got - want).abs() / want.abs().max(1.0));
    }
    checks.push(check(
        "oracle/closed-form-agreement",
        worst_linear <= 1e-6,
        format!("max relative gap {worst_linear:.3e} on the f=0 baseline"),
    ));

    checks
}

pub fn run_suite(suite: &str, seed: u64, out: Option<&Path>) -> ExitCode {
    let suites: Vec<(&str, Vec<Check>)> = match suite {
        "quadrature" => vec![("quadrature", quadrature_suite())],
        "cost" => vec![("cost", cost_suite())],
        "seminorm" => vec![("seminorm", seminorm_suite(seed))],
        "oracle" => vec![("oracle", oracle_suite())],
        "all" => vec![
            ("quadrature", quadrature_suite()),
            ("cost", cost_suite()),
            ("seminorm", seminorm_suite(seed)),
            ("oracle", oracle_suite()),
        ],
        other => {
            eprintln!("error: unknown suite {other:?} (expected quadrature, cost, seminorm, oracle, all)");
            return ExitCode::from(2);
        }
    };

    let mut table = String::new();
    let mut passed = 0usize;
    let mut total = 0usize;
    for (name, checks) in &suites {
        for c in checks {
            total += 1;
            if c.pass {
                passed += 1;
            }
            writeln!(
                table,
                "{} {name}/{}: {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name.split('/').next_back().unwrap_or(&c.name),
                c.detail
            )
            .expect("write to string");
        }
    }
    writeln!(table, "{passed}/{total} checks passed (seed {seed})").expect("write to string");

    print!("{table}");
    if let Some(path) = out {
        if let Err(err) = std::fs::write(path, &table) {
            eprintln!("error: {err}");
            return ExitCode::FAILURE;
        }
    }
    if passed == total {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
