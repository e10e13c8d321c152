//! Full-history recursive multilevel Picard evaluators.
//!
//! The depth-`n` approximation of the solution value at `(t, x)` is the
//! Monte Carlo realization of the telescoped Picard iteration: a terminal
//! average over `M^n` Brownian endpoints plus, for every level `l < n`, a
//! Gauss-Legendre sum over nodes `s` in `[t, T]` of nonlinearity
//! differences between fresh depth-`l` and depth-`(l-1)` evaluations,
//! averaged over `M^(n-l)` samples. All nodes of one sample share one
//! Brownian path; the two sub-evaluations at a node use distinct forked
//! streams, so every branch of the tree is independent by construction
//! and the whole value is a pure function of `(problem, params, point,
//! key)`.
//!
//! The heat-mode evaluator assumes zero drift and identity diffusion and
//! produces scalar values. The general-mode evaluator runs the same
//! recursion on top of the [`crate::sde`] discretizers, carries the
//! gradient weight, and subtracts `g(x)` from terminal samples as a
//! zero-expectation control variate.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ledger::CostLedger;
use crate::quadrature::gauss_legendre;
use crate::randomness::{brownian_increment, StreamKey};
use crate::sde::{steps_for_level, CoefficientSet, PathWalker};

/// Pointwise nonlinearity `f(t, x, u, z)`; the gradient slice `z` is
/// empty in heat mode.
pub type Nonlinearity = Arc<dyn Fn(f64, &[f64], f64, &[f64]) -> f64 + Send + Sync>;
/// Terminal condition `g(x)`.
pub type Terminal = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One semilinear terminal value problem.
#[derive(Clone)]
pub struct Problem {
    horizon: f64,
    dim: usize,
    terminal: Terminal,
    nonlinearity: Nonlinearity,
    lipschitz: f64,
    coefficients: Option<CoefficientSet>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("horizon", &self.horizon)
            .field("dim", &self.dim)
            .field("lipschitz", &self.lipschitz)
            .field("coefficients", &self.coefficients.is_some())
            .finish()
    }
}

impl Problem {
    /// Heat-mode problem: zero drift, identity diffusion, gradient-free
    /// nonlinearity.
    pub fn heat(
        horizon: f64,
        dim: usize,
        terminal: Terminal,
        nonlinearity: Nonlinearity,
        lipschitz: f64,
    ) -> Self {
        assert!(horizon > 0.0 && dim >= 1);
        Problem {
            horizon,
            dim,
            terminal,
            nonlinearity,
            lipschitz,
            coefficients: None,
        }
    }

    /// Heat-mode problem stated forward in time: `du/dt = 1/2 lap u + f(u)`
    /// with an initial condition. The reversal `t -> T - t` turns the
    /// initial condition into the terminal condition, so an evaluation at
    /// reversed time `t` approximates the forward solution at `T - t`.
    pub fn heat_forward(
        horizon: f64,
        dim: usize,
        initial: Terminal,
        nonlinearity: Nonlinearity,
        lipschitz: f64,
    ) -> Self {
        let inner = nonlinearity;
        let reversed: Nonlinearity =
            Arc::new(move |t, x, u, z| inner(horizon - t, x, u, z));
        Problem::heat(horizon, dim, initial, reversed, lipschitz)
    }

    /// Attach drift/diffusion coefficients; the general evaluator then
    /// uses Euler-Maruyama discretizers instead of exact sampling.
    pub fn with_coefficients(mut self, coefficients: CoefficientSet) -> Self {
        self.coefficients = Some(coefficients);
        self
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn has_coefficients(&self) -> bool {
        self.coefficients.is_some()
    }

    pub fn terminal_value(&self, x: &[f64]) -> f64 {
        (self.terminal)(x)
    }

    pub fn nonlinearity_value(&self, t: f64, x: &[f64], u: f64, z: &[f64]) -> f64 {
        (self.nonlinearity)(t, x, u, z)
    }

    /// Spot-check the declared Lipschitz constant on random value pairs.
    /// Returns the largest observed ratio violation, if any.
    pub fn lipschitz_spot_check(&self, key: &StreamKey, probes: usize) -> Option<f64> {
        let mut worst: Option<f64> = None;
        for p in 0..probes {
            let k = key.fork(&[p as i64]);
            let draw = crate::randomness::gaussian_vector(&k, 0, self.dim + 3);
            let x: Vec<f64> = draw[..self.dim].to_vec();
            let t = self.horizon * crate::stats::normal_cdf(draw[self.dim]);
            let u1 = 2.0 * draw[self.dim + 1];
            let u2 = 2.0 * draw[self.dim + 2];
            if u1 == u2 {
                continue;
            }
            let z = vec![0.0; 0];
            let df = (self.nonlinearity_value(t, &x, u1, &z)
                - self.nonlinearity_value(t, &x, u2, &z))
            .abs();
            let bound = self.lipschitz * (u1 - u2).abs();
            if df > bound * (1.0 + 1e-9) {
                let ratio = df / (u1 - u2).abs();
                worst = Some(worst.map_or(ratio, |w: f64| w.max(ratio)));
            }
        }
        worst
    }
}

/// Guard caps shared by both modes.
pub const MAX_DEPTH: u32 = 10;
pub const MAX_WORK: u128 = 100_000_000;

/// Parameters of the heat-mode scheme: iteration depth `n`, Monte Carlo
/// base `M`, quadrature order `Q`. The analyzed regime keeps
/// `n <= 2Q - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeatParams {
    pub depth: u32,
    pub samples: u32,
    pub order: u32,
}

impl HeatParams {
    pub fn new(depth: u32, samples: u32, order: u32) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::ResourceLimit {
                what: "iteration depth",
                needed: depth as u128,
                cap: MAX_DEPTH as u128,
            });
        }
        if samples == 0 || order == 0 || order > crate::quadrature::MAX_ORDER {
            return Err(Error::InvalidOrder {
                got: order.min(samples),
                max: crate::quadrature::MAX_ORDER,
            });
        }
        let work = (samples as u128).pow(depth);
        if work > MAX_WORK {
            return Err(Error::ResourceLimit {
                what: "sample count M^n",
                needed: work,
                cap: MAX_WORK,
            });
        }
        Ok(HeatParams {
            depth,
            samples,
            order,
        })
    }
}

/// Parameters of the general scheme: depth `k` and accuracy base `rho`.
/// Level `l` draws `floor(rho^(k-l))` samples against a Gauss-Legendre
/// rule with `floor(rho)` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralParams {
    pub depth: u32,
    pub rho: f64,
}

impl GeneralParams {
    pub fn new(depth: u32, rho: f64) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::ResourceLimit {
                what: "iteration depth",
                needed: depth as u128,
                cap: MAX_DEPTH as u128,
            });
        }
        if !(rho >= 1.0) || rho.floor() > crate::quadrature::MAX_ORDER as f64 {
            return Err(Error::InvalidOrder {
                got: rho.floor().max(0.0) as u32,
                max: crate::quadrature::MAX_ORDER,
            });
        }
        let work = rho.powi(depth as i32);
        if work > MAX_WORK as f64 {
            return Err(Error::ResourceLimit {
                what: "sample count rho^k",
                needed: work as u128,
                cap: MAX_WORK,
            });
        }
        Ok(GeneralParams { depth, rho })
    }

    pub fn nodes(&self) -> u32 {
        self.rho.floor() as u32
    }

    pub fn samples_at(&self, level_gap: u32) -> u64 {
        (self.rho.powi(level_gap as i32).floor() as u64).max(1)
    }
}

/// Scheme selector for estimation and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalMode {
    Heat(HeatParams),
    General(GeneralParams),
}

/// Result of one evaluation: the approximation value (plus the gradient
/// part in general mode) and the realized cost ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub ledger: CostLedger,
    pub wall: Duration,
}

/// Heat-mode evaluation of the depth-`n` approximation at `(t, x)`.
pub fn mlp_evaluate(
    problem: &Problem,
    params: &HeatParams,
    t: f64,
    x: &[f64],
    key: &StreamKey,
) -> Result<EvalReport> {
    if problem.has_coefficients() {
        return Err(Error::InvalidConfig(
            "heat-mode evaluation requires unit coefficients".into(),
        ));
    }
    if !(0.0..=problem.horizon).contains(&t) {
        return Err(Error::InvalidInterval {
            from: t,
            to: problem.horizon,
        });
    }
    if x.len() != problem.dim {
        return Err(Error::UnsupportedDimension {
            what: "evaluation point",
            expected: problem.dim,
            got: x.len(),
        });
    }
    let start = Instant::now();
    let mut ledger = CostLedger::new();
    let value = eval_heat(problem, params, params.depth, t, x, key, &mut ledger)?;
    Ok(EvalReport {
        value,
        gradient: Vec::new(),
        ledger,
        wall: start.elapsed(),
    })
}

fn eval_heat(
    problem: &Problem,
    params: &HeatParams,
    depth: u32,
    t: f64,
    x: &[f64],
    key: &StreamKey,
    ledger: &mut CostLedger,
) -> Result<f64> {
    if depth == 0 {
        return Ok(0.0);
    }
    let horizon = problem.horizon;
    let dim = problem.dim;

    // Degenerate start: every endpoint equals x and the quadrature rule
    // on [T, T] is empty, so the value collapses to g(x).
    if t == horizon {
        ledger.add_g_eval();
        return Ok(problem.terminal_value(x));
    }

    let m = params.samples as u64;
    let m_pow = m.pow(depth);
    let mut terminal_sum = 0.0;
    let mut endpoint = vec![0.0; dim];
    for i in 1..=m_pow {
        let g_key = key.fork(&[0, -(i as i64)]);
        let inc = brownian_increment(&g_key, 0, t, horizon, dim)?;
        ledger.add_normals(dim as u64);
        for (e, (&xv, &dz)) in endpoint.iter_mut().zip(x.iter().zip(&inc.delta)) {
            *e = xv + dz;
        }
        ledger.add_g_eval();
        terminal_sum += problem.terminal_value(&endpoint);
    }
    let mut value = terminal_sum / m_pow as f64;

    let rule = gauss_legendre(params.order, t, horizon)?;
    let empty_grad: [f64; 0] = [];
    let mut y = vec![0.0; dim];
    for level in 0..depth {
        let samples = m.pow(depth - level);
        let inv_samples = 1.0 / samples as f64;
        for i in 1..=samples {
            let path_key = key.fork(&[level as i64, i as i64]);
            let mut prev = t;
            let mut acc = vec![0.0; dim];
            for (j, (&node, &weight)) in
                rule.nodes().iter().zip(rule.weights()).enumerate()
            {
                let inc = brownian_increment(&path_key, j as u64, prev, node, dim)?;
                ledger.add_normals(dim as u64);
                for (a, dz) in acc.iter_mut().zip(&inc.delta) {
                    *a += dz;
                }
                prev = node;
                for (yv, (&xv, &av)) in y.iter_mut().zip(x.iter().zip(&acc)) {
                    *yv = xv + av;
                }

                let high_key = key.fork(&[level as i64, i as i64, j as i64]);
                let high = eval_heat(problem, params, level, node, &y, &high_key, ledger)?;
                ledger.add_f_eval();
                let mut term = problem.nonlinearity_value(node, &y, high, &empty_grad);
                if level >= 1 {
                    let low_key = key.fork(&[-(level as i64), i as i64, j as i64]);
                    let low =
                        eval_heat(problem, params, level - 1, node, &y, &low_key, ledger)?;
                    ledger.add_f_eval();
                    term -= problem.nonlinearity_value(node, &y, low, &empty_grad);
                }
                value += weight * inv_samples * term;
            }
        }
    }
    Ok(value)
}

/// General-mode evaluation: value and gradient part at `(s, x)`.
pub fn mlp_evaluate_general(
    problem: &Problem,
    params: &GeneralParams,
    s: f64,
    x: &[f64],
    key: &StreamKey,
) -> Result<EvalReport> {
    if !(0.0..=problem.horizon).contains(&s) {
        return Err(Error::InvalidInterval {
            from: s,
            to: problem.horizon,
        });
    }
    if x.len() != problem.dim {
        return Err(Error::UnsupportedDimension {
            what: "evaluation point",
            expected: problem.dim,
            got: x.len(),
        });
    }
    let start = Instant::now();
    let mut ledger = CostLedger::new();
    let (value, gradient) =
        eval_general(problem, params, params.depth, s, x, key, &mut ledger)?;
    Ok(EvalReport {
        value,
        gradient,
        ledger,
        wall: start.elapsed(),
    })
}

fn make_walker(problem: &Problem, key: StreamKey, start: f64, origin: Vec<f64>, level_gap: u32, rho: f64) -> PathWalker {
    match &problem.coefficients {
        None => PathWalker::exact(key, start, origin),
        Some(coeffs) => PathWalker::euler(
            coeffs.clone(),
            key,
            start,
            origin,
            steps_for_level(level_gap, rho),
        ),
    }
}

fn eval_general(
    problem: &Problem,
    params: &GeneralParams,
    depth: u32,
    s: f64,
    x: &[f64],
    key: &StreamKey,
    ledger: &mut CostLedger,
) -> Result<(f64, Vec<f64>)> {
    let dim = problem.dim;
    if depth == 0 {
        return Ok((0.0, vec![0.0; dim]));
    }
    let horizon = problem.horizon;
    if s == horizon {
        ledger.add_g_eval();
        return Ok((problem.terminal_value(x), vec![0.0; dim]));
    }

    ledger.add_g_eval();
    let g_origin = problem.terminal_value(x);
    let mut value = g_origin;
    let mut gradient = vec![0.0; dim];

    // Terminal term with the zero-expectation control variate g(x).
    let m_g = params.samples_at(depth);
    let inv_m_g = 1.0 / m_g as f64;
    for i in 1..=m_g {
        let g_key = key.fork(&[0, -(i as i64)]);
        let mut walker = make_walker(problem, g_key, s, x.to_vec(), depth, params.rho);
        let sample = walker.advance_to(horizon, ledger)?;
        ledger.add_g_eval();
        let diff = problem.terminal_value(&sample.state) - g_origin;
        value += inv_m_g * diff * sample.weight[0];
        for (gv, &w) in gradient.iter_mut().zip(&sample.weight[1..]) {
            *gv += inv_m_g * diff * w;
        }
    }

    let rule = gauss_legendre(params.nodes(), s, horizon)?;
    for level in 0..depth {
        let gap = depth - level;
        let samples = params.samples_at(gap);
        let inv_samples = 1.0 / samples as f64;
        for i in 1..=samples {
            let path_key = key.fork(&[level as i64, i as i64]);
            let mut walker = make_walker(problem, path_key, s, x.to_vec(), gap, params.rho);
            for (j, (&node, &weight)) in
                rule.nodes().iter().zip(rule.weights()).enumerate()
            {
                let sample = walker.advance_to(node, ledger)?;

                let high_key = key.fork(&[level as i64, i as i64, j as i64]);
                let (u_high, z_high) = eval_general(
                    problem, params, level, node, &sample.state, &high_key, ledger,
                )?;
                ledger.add_f_eval();
                let mut term =
                    problem.nonlinearity_value(node, &sample.state, u_high, &z_high);
                if level >= 1 {
                    let low_key = key.fork(&[-(level as i64), i as i64, j as i64]);
                    let (u_low, z_low) = eval_general(
                        problem,
                        params,
                        level - 1,
                        node,
                        &sample.state,
                        &low_key,
                        ledger,
                    )?;
                    ledger.add_f_eval();
                    term -= problem.nonlinearity_value(node, &sample.state, u_low, &z_low);
                }
                let scale = weight * inv_samples * term;
                value += scale * sample.weight[0];
                for (gv, &w) in gradient.iter_mut().zip(&sample.weight[1..]) {
                    *gv += scale * w;
                }
            }
        }
    }
    Ok((value, gradient))
}

/// Repetition-averaged estimate.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub mean: f64,
    pub std: f64,
    pub mean_gradient: Vec<f64>,
    pub values: Vec<f64>,
    pub ledger: CostLedger,
    pub wall: Duration,
}

/// Evaluate `reps` independent forks of the root key and aggregate.
///
/// Repetitions may run on the thread pool; values are collected in
/// repetition order and reduced sequentially, so the result is bitwise
/// identical whatever the schedule.
pub fn mlp_estimate(
    problem: &Problem,
    mode: &EvalMode,
    t: f64,
    x: &[f64],
    root: &StreamKey,
    reps: u32,
    parallel: bool,
) -> Result<Estimate> {
    assert!(reps >= 1);
    let start = Instant::now();
    let run_one = |r: u32| -> Result<EvalReport> {
        let key = root.fork(&[r as i64]);
        match mode {
            EvalMode::Heat(params) => mlp_evaluate(problem, params, t, x, &key),
            EvalMode::General(params) => mlp_evaluate_general(problem, params, t, x, &key),
        }
    };
    let reports: Vec<EvalReport> = if parallel {
        (0..reps)
            .into_par_iter()
            .map(run_one)
            .collect::<Result<Vec<_>>>()?
    } else {
        (0..reps).map(run_one).collect::<Result<Vec<_>>>()?
    };

    let values: Vec<f64> = reports.iter().map(|r| r.value).collect();
    let (mean, std) = crate::stats::mean_and_std(&values);
    let grad_len = reports[0].gradient.len();
    let mut mean_gradient = vec![0.0; grad_len];
    let mut ledger = CostLedger::new();
    for report in &reports {
        for (acc, &g) in mean_gradient.iter_mut().zip(&report.gradient) {
            *acc += g / reps as f64;
        }
        ledger.merge(&report.ledger);
    }
    Ok(Estimate {
        mean,
        std,
        mean_gradient,
        values,
        ledger,
        wall: start.elapsed(),
    })
}
