//! Registered benchmark problems.
//!
//! Each entry pairs a [`Problem`] with an optional closed-form solution
//! and a provenance note. Problems with a closed form are checked at test
//! time by a finite-difference residual of the governing equation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mlp::{Nonlinearity, Problem, Terminal};

/// Closed-form solution `u(t, x)`.
pub type Solution = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// A named benchmark instance.
#[derive(Clone)]
pub struct NamedProblem {
    pub name: String,
    pub problem: Problem,
    pub solution: Option<Solution>,
    pub note: String,
}

impl std::fmt::Debug for NamedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NamedProblem")
            .field("name", &self.name)
            .field("has_solution", &self.solution.is_some())
            .field("note", &self.note)
            .finish()
    }
}

/// The Allen-Cahn equation `du/dt = 1/2 lap u + u - u^3` with initial
/// condition `(1 + max_i x_i^2)^-1`, restated backward in time on
/// `[0, 1]` so the initial condition becomes the terminal one. Evaluating
/// at reversed time 0 gives the forward solution at time 1.
///
/// The cubic nonlinearity is not globally Lipschitz; its argument is
/// clipped to `[-2, 2]`, which leaves the solution range untouched (the
/// terminal condition maps into `(0, 1]`) and makes the declared constant
/// `L = 11 = sup |1 - 3u^2|` valid everywhere.
pub fn allen_cahn(dim: usize) -> NamedProblem {
    let terminal: Terminal = Arc::new(|x: &[f64]| {
        let max_sq = x.iter().map(|v| v * v).fold(0.0, f64::max);
        1.0 / (1.0 + max_sq)
    });
    let nonlinearity: Nonlinearity = Arc::new(|_, _, u, _| {
        let c = u.clamp(-2.0, 2.0);
        c - c * c * c
    });
    NamedProblem {
        name: format!("allen-cahn-d{dim}"),
        problem: Problem::heat_forward(1.0, dim, terminal, nonlinearity, 11.0),
        solution: None,
        note: "double-well reaction, time-reversed initial value problem".into(),
    }
}

/// Manufactured family with exact solution `v(t,x) = sin(t + b S / sqrt d)`
/// where `S = sum_i x_i`. The nonlinearity `sin(u) - sin(v) + h` with the
/// source `h = -dv/dt - lap v / 2` keeps the equation exactly satisfied
/// and is globally 1-Lipschitz in `u`.
pub fn manufactured(dim: usize, beta: f64) -> NamedProblem {
    let horizon = 1.0;
    let scale = beta / (dim as f64).sqrt();
    let phase = move |t: f64, x: &[f64]| t + scale * x.iter().sum::<f64>();
    let v = move |t: f64, x: &[f64]| phase(t, x).sin();

    let terminal: Terminal = Arc::new(move |x: &[f64]| v(horizon, x));
    let nonlinearity: Nonlinearity = Arc::new(move |t, x, u, _| {
        let p = phase(t, x);
        // h = -cos(p) + (beta^2 / 2) sin(p): time derivative cos(p),
        // Laplacian -beta^2 sin(p).
        let h = -p.cos() + 0.5 * beta * beta * p.sin();
        u.sin() - p.sin().sin() + h
    });
    let solution: Solution = Arc::new(move |t, x| v(t, x));
    NamedProblem {
        name: format!("manufactured-d{dim}"),
        problem: Problem::heat(horizon, dim, terminal, nonlinearity, 1.0),
        solution: Some(solution),
        note: format!("manufactured sinusoid, beta = {beta}"),
    }
}

/// Linear baselines with closed forms: `f == 0` heat moments and the
/// space-constant exponential case.
pub fn linear_baseline(name: &str, dim: usize) -> Result<NamedProblem> {
    let horizon = 1.0;
    match name {
        "quadratic" => {
            let terminal: Terminal =
                Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum());
            let d = dim as f64;
            let solution: Solution = Arc::new(move |t, x: &[f64]| {
                x.iter().map(|v| v * v).sum::<f64>() + d * (horizon - t)
            });
            Ok(NamedProblem {
                name: format!("quadratic-d{dim}"),
                problem: Problem::heat(
                    horizon,
                    dim,
                    terminal,
                    Arc::new(|_, _, _, _| 0.0),
                    0.0,
                ),
                solution: Some(solution),
                note: "second Gaussian moment, f == 0".into(),
            })
        }
        "constant" => {
            let c = 2.5;
            let terminal: Terminal = Arc::new(move |_: &[f64]| c);
            let solution: Solution = Arc::new(move |_, _| c);
            Ok(NamedProblem {
                name: format!("constant-d{dim}"),
                problem: Problem::heat(
                    horizon,
                    dim,
                    terminal,
                    Arc::new(|_, _, _, _| 0.0),
                    0.0,
                ),
                solution: Some(solution),
                note: "constant terminal condition, f == 0".into(),
            })
        }
        "exp-ode" => {
            let lambda = 0.5;
            let terminal: Terminal = Arc::new(|_: &[f64]| 1.0);
            let nonlinearity: Nonlinearity = Arc::new(move |_, _, u, _| lambda * u);
            let solution: Solution =
                Arc::new(move |t, _| (lambda * (horizon - t)).exp());
            Ok(NamedProblem {
                name: format!("exp-ode-d{dim}"),
                problem: Problem::heat(horizon, dim, terminal, nonlinearity, lambda),
                solution: Some(solution),
                note: "space-constant exponential, f = lambda u".into(),
            })
        }
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

/// All registered problems at the given dimension.
pub fn registry(dim: usize) -> Vec<NamedProblem> {
    vec![
        allen_cahn(dim),
        manufactured(dim, 1.0),
        linear_baseline("quadratic", dim).unwrap(),
        linear_baseline("constant", dim).unwrap(),
        linear_baseline("exp-ode", dim).unwrap(),
    ]
}

/// Look up a problem by base name ("allen-cahn", "manufactured",
/// "quadratic", "constant", "exp-ode") at dimension parsed from the
/// caller, or by the full `name-d<dim>` form.
pub fn by_name(base: &str, dim: usize) -> Result<NamedProblem> {
    match base {
        "allen-cahn" => Ok(allen_cahn(dim)),
        "manufactured" => Ok(manufactured(dim, 1.0)),
        "quadratic" | "constant" | "exp-ode" => linear_baseline(base, dim),
        other => Err(Error::UnknownProblem(other.to_string())),
    }
}

/// Look up by the fully qualified `name-d<dim>` string.
pub fn named(full: &str) -> Result<NamedProblem> {
    if let Some(pos) = full.rfind("-d") {
        let (base, rest) = full.split_at(pos);
        if let Ok(dim) = rest[2..].parse::<usize>() {
            if dim >= 1 {
                return by_name(base, dim);
            }
        }
    }
    Err(Error::UnknownProblem(full.to_string()))
}

/// Central finite-difference residual of the governing equation at one
/// probe, using the closed-form solution. Fourth-order stencils keep the
/// truncation and rounding error near 1e-10 for smooth solutions.
pub fn pde_residual(named: &NamedProblem, t: f64, x: &[f64]) -> Result<f64> {
    let solution = named
        .solution
        .clone()
        .ok_or_else(|| Error::NoClosedForm(named.name.clone()))?;
    let u = |t: f64, x: &[f64]| solution(t, x);
    let ht = 1e-2_f64.min(named.problem.horizon() / 8.0);
    let hx = 1e-2;

    // Five-point first derivative in time.
    let t0 = t.max(2.0 * ht);
    let dt = (u(t0 - 2.0 * ht, x) - 8.0 * u(t0 - ht, x) + 8.0 * u(t0 + ht, x)
        - u(t0 + 2.0 * ht, x))
        / (12.0 * ht);

    // Five-point second derivatives in each coordinate.
    let mut lap = 0.0;
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let xi = x[i];
        let mut at = |v: f64| {
            probe[i] = v;
            let val = u(t0, &probe);
            probe[i] = xi;
            val
        };
        lap += (-at(xi - 2.0 * hx) + 16.0 * at(xi - hx) - 30.0 * at(xi)
            + 16.0 * at(xi + hx)
            - at(xi + 2.0 * hx))
            / (12.0 * hx * hx);
    }

    let value = u(t0, x);
    let f_val = named.problem.nonlinearity_value(t0, x, value, &[]);
    Ok(dt + 0.5 * lap + f_val)
}
