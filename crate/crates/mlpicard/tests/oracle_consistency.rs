//! Grid-oracle convergence checks at full resolution.

use mlpicard::oracle::{picard_oracle, GridSpec};
use mlpicard::problems::{linear_baseline, manufactured};

fn full_spec() -> GridSpec {
    GridSpec {
        time_points: 64,
        space_points: 512,
        space_radius: 8.0,
        hermite_order: 64,
        quad_order: 4,
    }
}

fn light_spec() -> GridSpec {
    GridSpec {
        time_points: 32,
        space_points: 129,
        space_radius: 8.0,
        hermite_order: 16,
        quad_order: 4,
    }
}

#[test]
fn manufactured_iterates_reach_the_exact_solution() {
    let named = manufactured(1, 1.0);
    let truth = named.solution.as_ref().unwrap()(0.0, &[0.0]);
    let sol = picard_oracle(&named.problem, 7, &full_spec()).unwrap();
    let at_origin = sol.grid.evaluate(0.0, 0.0);
    // Picard truncation dominates the grid error here: depth 6 sits near
    // 2.5e-4 and depth 7 crosses the 1e-4 line.
    assert!(
        (at_origin - truth).abs() <= 1e-4,
        "u_7(0,0) = {at_origin}, truth {truth}"
    );
    let sol6 = picard_oracle(&named.problem, 6, &full_spec()).unwrap();
    assert!((sol6.grid.evaluate(0.0, 0.0) - truth).abs() <= 5e-4);
}

#[test]
fn doubling_resolution_barely_moves_registered_problems() {
    // Grid and Hermite errors are far below the 1e-4 budget, so the
    // doubled run must agree tightly.
    let cases: Vec<(mlpicard::problems::NamedProblem, GridSpec, u32)> = vec![
        (manufactured(1, 1.0), light_spec(), 6),
        (linear_baseline("quadratic", 1).unwrap(), light_spec(), 2),
        (linear_baseline("constant", 1).unwrap(), light_spec(), 2),
        (linear_baseline("exp-ode", 1).unwrap(), light_spec(), 8),
    ];
    for (named, spec, iterations) in cases {
        let base = picard_oracle(&named.problem, iterations, &spec).unwrap();
        let fine = picard_oracle(&named.problem, iterations, &spec.doubled()).unwrap();
        let delta = (base.grid.evaluate(0.0, 0.0) - fine.grid.evaluate(0.0, 0.0)).abs();
        assert!(
            delta <= 1e-4,
            "{}: doubling moved u_K(0,0) by {delta:e}",
            named.name
        );
    }
}

#[test]
fn closed_forms_match_oracle_on_linear_problems() {
    for name in ["quadratic", "constant", "exp-ode"] {
        let named = linear_baseline(name, 1).unwrap();
        let solution = named.solution.clone().unwrap();
        let iterations = if name == "exp-ode" { 12 } else { 2 };
        let sol = picard_oracle(&named.problem, iterations, &light_spec()).unwrap();
        for (t, x) in [(0.0, 0.0), (0.25, 0.8), (0.7, -1.3)] {
            let got = sol.grid.evaluate(t, x);
            let want = solution(t, &[x]);
            assert!(
                (got - want).abs() <= 1e-6 * want.abs().max(1.0),
                "{name} at ({t},{x}): {got} vs {want}"
            );
        }
    }
}
