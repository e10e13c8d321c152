//! Deterministic reference solvers.
//!
//! The grid oracle realizes the Picard fixed-point map directly for
//! one-dimensional heat-mode problems: Gaussian expectations become
//! Gauss-Hermite sums, the time integral becomes the same Gauss-Legendre
//! rule the stochastic evaluators use, and iterates live on a uniform
//! space-time grid with cubic interpolation in both axes and constant
//! extrapolation beyond the space grid. No Monte Carlo noise enters, so
//! the oracle serves as ground truth for the solver's expectation at
//! matched depth.

use crate::error::{Error, Result};
use crate::mlp::Problem;
use crate::quadrature::gauss_legendre;

const HERMITE_MAX_ORDER: u32 = 128;
const HERMITE_TOL: f64 = 1e-13;
const HERMITE_MAX_ITER: usize = 100;

/// Nodes and weights for the weight function `exp(-x^2)` on the real
/// line: `integral h(x) exp(-x^2) dx ~= sum w_i h(x_i)`.
#[derive(Debug, Clone)]
pub struct HermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl HermiteRule {
    pub fn new(order: u32) -> Result<Self> {
        if order == 0 || order > HERMITE_MAX_ORDER {
            return Err(Error::InvalidOrder {
                got: order,
                max: HERMITE_MAX_ORDER,
            });
        }
        let n = order as usize;
        let half = (n + 1) / 2;
        let mut upper = vec![0.0; half];
        let mut upper_w = vec![0.0; half];
        let mut z = 0.0f64;
        for i in 0..half {
            // Standard seeds for the descending positive roots.
            z = match i {
                0 => {
                    let m2 = 2.0 * n as f64 + 1.0;
                    m2.sqrt() - 1.85575 * m2.powf(-1.0 / 6.0)
                }
                1 => z - 1.14 * (n as f64).powf(0.426) / z,
                2 => 1.86 * z - 0.86 * upper[0],
                3 => 1.91 * z - 0.91 * upper[1],
                _ => 2.0 * z - upper[i - 2],
            };
            for _ in 0..HERMITE_MAX_ITER {
                let (p, d) = normalized_hermite(n, z);
                let step = p / d;
                z -= step;
                if step.abs() <= HERMITE_TOL * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, dp) = normalized_hermite(n, z);
            upper[i] = z;
            upper_w[i] = 2.0 / (dp * dp);
        }
        // Mirror the positive roots; odd orders carry an exact zero root.
        let paired = if n % 2 == 1 { half - 1 } else { half };
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..paired {
            nodes.push(-upper[i]);
            weights.push(upper_w[i]);
        }
        if n % 2 == 1 {
            nodes.push(0.0);
            weights.push(upper_w[half - 1]);
        }
        for i in (0..paired).rev() {
            nodes.push(upper[i]);
            weights.push(upper_w[i]);
        }
        Ok(HermiteRule { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[h(Z)]` for standard normal `Z`.
    pub fn expectation<F: FnMut(f64) -> f64>(&self, mut h: F) -> f64 {
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let sqrt2 = std::f64::consts::SQRT_2;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * h(sqrt2 * x))
            .sum::<f64>()
            * inv_sqrt_pi
    }
}

/// Orthonormal Hermite value and derivative at `x` (weight `exp(-x^2)`).
fn normalized_hermite(n: usize, x: f64) -> (f64, f64) {
    let pi_quarter = std::f64::consts::PI.powf(-0.25);
    let mut p_prev = 0.0;
    let mut p = pi_quarter;
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * p - (kf / (kf + 1.0)).sqrt() * p_prev;
        p_prev = p;
        p = next;
    }
    let dp = (2.0 * n as f64).sqrt() * p_prev;
    (p, dp)
}

/// Resolution of the grid oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub time_points: usize,
    pub space_points: usize,
    pub space_radius: f64,
    pub hermite_order: u32,
    pub quad_order: u32,
}

impl GridSpec {
    pub fn doubled(&self) -> GridSpec {
        GridSpec {
            time_points: self.time_points * 2,
            space_points: self.space_points * 2,
            space_radius: self.space_radius,
            hermite_order: (self.hermite_order * 2).min(HERMITE_MAX_ORDER),
            quad_order: self.quad_order,
        }
    }
}

/// A function tabulated on a uniform space-time grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    times: Vec<f64>,
    xs: Vec<f64>,
    /// Row-major `[time][space]`.
    values: Vec<f64>,
}

impl GridFunction {
    fn zeros(spec: &GridSpec, horizon: f64) -> Self {
        let nt = spec.time_points;
        let nx = spec.space_points;
        let times = (0..nt)
            .map(|i| horizon * i as f64 / (nt - 1) as f64)
            .collect();
        let xs = (0..nx)
            .map(|i| -spec.space_radius + 2.0 * spec.space_radius * i as f64 / (nx - 1) as f64)
            .collect();
        GridFunction {
            times,
            xs,
            values: vec![0.0; nt * nx],
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Cubic interpolation in both axes; constant extrapolation outside
    /// the space grid, clamped in time.
    pub fn evaluate(&self, t: f64, x: f64) -> f64 {
        let nt = self.times.len();
        let nx = self.xs.len();
        let (tb, tw) = stencil(&self.times, t);
        let (xb, xw) = stencil(&self.xs, x);
        let mut acc = 0.0;
        for (i, &wt) in tw.iter().enumerate() {
            if wt == 0.0 {
                continue;
            }
            let row = (tb + i).min(nt - 1) * nx;
            let mut inner = 0.0;
            for (j, &wx) in xw.iter().enumerate() {
                inner += wx * self.values[row + (xb + j).min(nx - 1)];
            }
            acc += wt * inner;
        }
        acc
    }

    fn max_abs_difference(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Four-point Lagrange stencil base and weights on a uniform grid;
/// degenerates to the boundary value outside the grid.
fn stencil(grid: &[f64], point: f64) -> (usize, [f64; 4]) {
    let n = grid.len();
    let h = grid[1] - grid[0];
    if point <= grid[0] {
        return (0, [1.0, 0.0, 0.0, 0.0]);
    }
    if point >= grid[n - 1] {
        return (n - 4, [0.0, 0.0, 0.0, 1.0]);
    }
    let cell = (((point - grid[0]) / h) as usize).min(n - 2);
    let base = cell.saturating_sub(1).min(n - 4);
    let u = (point - grid[base]) / h;
    // Lagrange basis at offsets 0, 1, 2, 3.
    let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    (base, [l0, l1, l2, l3])
}

/// Result of the grid oracle: the final iterate, per-iteration sup
/// differences, and any domain-coverage warnings.
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub grid: GridFunction,
    /// `sup |u_k - u_(k-1)|` for `k = 1..=K`.
    pub sup_differences: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Iterate the discrete Picard map `K` times for a one-dimensional
/// heat-mode problem, starting from the zero function.
pub fn picard_oracle(
    problem: &Problem,
    iterations: u32,
    spec: &GridSpec,
) -> Result<PicardSolution> {
    if problem.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            what: "grid oracle",
            expected: 1,
            got: problem.dim(),
        });
    }
    if problem.has_coefficients() {
        return Err(Error::InvalidConfig(
            "grid oracle requires heat-mode coefficients".into(),
        ));
    }
    assert!(spec.time_points >= 4 && spec.space_points >= 4);
    let horizon = problem.horizon();
    let hermite = HermiteRule::new(spec.hermite_order)?;

    let mut warnings = Vec::new();
    let reach = (2.0 * horizon).sqrt() * hermite.nodes().last().copied().unwrap_or(0.0);
    if reach > spec.space_radius {
        warnings.push(format!(
            "hermite stencil reaches |x| = {reach:.2} beyond the grid radius {}; \
             constant extrapolation applies there",
            spec.space_radius
        ));
    }

    let mut current = GridFunction::zeros(spec, horizon);
    let mut sup_differences = Vec::with_capacity(iterations as usize);
    let times = current.times.clone();
    let xs = current.xs.clone();

    for _ in 0..iterations {
        let mut next = current.clone();
        for (it, &s) in times.iter().enumerate() {
            let g_scale = (horizon - s).sqrt();
            let rule = gauss_legendre(spec.quad_order, s, horizon)?;
            let node_scales: Vec<f64> =
                rule.nodes().iter().map(|&t| (t - s).sqrt()).collect();
            for (ix, &x) in xs.iter().enumerate() {
                let mut value =
                    hermite.expectation(|z| problem.terminal_value(&[x + g_scale * z]));
                for ((&node, &weight), &scale) in rule
                    .nodes()
                    .iter()
                    .zip(rule.weights())
                    .zip(&node_scales)
                {
                    value += weight
                        * hermite.expectation(|z| {
                            let y = x + scale * z;
                            let u = current.evaluate(node, y);
                            problem.nonlinearity_value(node, &[y], u, &[])
                        });
                }
                next.values[it * xs.len() + ix] = value;
            }
        }
        sup_differences.push(next.max_abs_difference(&current));
        current = next;
    }

    Ok(PicardSolution {
        grid: current,
        sup_differences,
        warnings,
    })
}

/// Closed-form solution of a registered problem.
pub fn closed_form(name: &str, t: f64, x: &[f64]) -> Result<f64> {
    let named = crate::problems::named(name)?;
    match named.solution {
        Some(solution) => Ok(solution(t, x)),
        None => Err(Error::NoClosedForm(name.to_string())),
    }
}
