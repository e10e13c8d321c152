//! State and weight processes for the general evaluation scheme.
//!
//! For a start `(s, x)` and a target `t`, a sampler produces the state
//! `X(s,x,t)` together with the `(1+d)`-dimensional weight
//!
//! ```text
//! I(s,x,t) = (1, sigma(s,x)^T / (t - s) * integral_s^t [sigma(r,X_r)^-1 D_r]^T dW_r),
//! ```
//!
//! whose spatial part turns terminal samples into gradient estimates
//! without differentiating the integrand. `D` is the derivative of the
//! flow with respect to the start point, driven by the linearized
//! equation. Two discretizations are provided: exact sampling when the
//! drift vanishes and the diffusion is the identity, and Euler-Maruyama
//! on the coupled `(X, D)` system otherwise. The convention `0/0 = 0`
//! applies to the weight at `t == s`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ledger::CostLedger;
use crate::randomness::{brownian_increment, StreamKey};

pub type VectorField = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixField = Arc<dyn Fn(f64, &[f64]) -> DMatrix<f64> + Send + Sync>;
/// Per diffusion column `j`, the spatial Jacobian of `sigma_j`.
pub type ColumnJacobians = Arc<dyn Fn(f64, &[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

/// Drift, diffusion and their spatial Jacobians. The coefficient
/// callbacks must be reentrant: samplers may run on any thread.
#[derive(Clone)]
pub struct CoefficientSet {
    pub drift: VectorField,
    pub diffusion: MatrixField,
    pub drift_jacobian: MatrixField,
    pub diffusion_jacobians: ColumnJacobians,
}

impl std::fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("CoefficientSet {..}")
    }
}

/// One sampled `(state, weight)` pair. The weight's first component is
/// exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub state: Vec<f64>,
    pub weight: Vec<f64>,
    pub steps_used: u32,
}

/// Walks one Brownian path forward through increasing target times,
/// reporting state and weight at each stop. Used directly by the
/// evaluators so that all quadrature nodes of one sample share a path.
pub enum PathWalker {
    Exact(ExactWalker),
    Euler(EulerWalker),
}

impl PathWalker {
    pub fn exact(key: StreamKey, start: f64, origin: Vec<f64>) -> Self {
        PathWalker::Exact(ExactWalker::new(key, start, origin))
    }

    pub fn euler(
        coeffs: CoefficientSet,
        key: StreamKey,
        start: f64,
        origin: Vec<f64>,
        substeps: u32,
    ) -> Self {
        PathWalker::Euler(EulerWalker::new(coeffs, key, start, origin, substeps))
    }

    /// Advance the path to `t` (not before the current time) and return
    /// the sample there.
    pub fn advance_to(&mut self, t: f64, ledger: &mut CostLedger) -> Result<PathSample> {
        match self {
            PathWalker::Exact(w) => w.advance_to(t, ledger),
            PathWalker::Euler(w) => w.advance_to(t, ledger),
        }
    }
}

/// Exact path for zero drift and identity diffusion: the state is
/// `x + (W_t - W_s)` and the weight's spatial part is `(W_t - W_s)/(t-s)`.
pub struct ExactWalker {
    key: StreamKey,
    counter: u64,
    start: f64,
    time: f64,
    origin: Vec<f64>,
    displacement: Vec<f64>,
}

impl ExactWalker {
    fn new(key: StreamKey, start: f64, origin: Vec<f64>) -> Self {
        let dim = origin.len();
        ExactWalker {
            key,
            counter: 0,
            start,
            time: start,
            origin,
            displacement: vec![0.0; dim],
        }
    }

    fn advance_to(&mut self, t: f64, ledger: &mut CostLedger) -> Result<PathSample> {
        if t < self.time {
            return Err(Error::InvalidInterval {
                from: self.time,
                to: t,
            });
        }
        let dim = self.origin.len();
        if t > self.time {
            let inc = brownian_increment(&self.key, self.counter, self.time, t, dim)?;
            self.counter += 1;
            ledger.add_normals(dim as u64);
            for (acc, dz) in self.displacement.iter_mut().zip(&inc.delta) {
                *acc += dz;
            }
            self.time = t;
        }
        let state: Vec<f64> = self
            .origin
            .iter()
            .zip(&self.displacement)
            .map(|(&x, &w)| x + w)
            .collect();
        let span = self.time - self.start;
        let mut weight = Vec::with_capacity(dim + 1);
        weight.push(1.0);
        if span > 0.0 {
            weight.extend(self.displacement.iter().map(|&w| w / span));
        } else {
            weight.extend(std::iter::repeat(0.0).take(dim));
        }
        Ok(PathSample {
            state,
            weight,
            steps_used: self.counter as u32,
        })
    }
}

/// Euler-Maruyama on the coupled state/derivative system, accumulating
/// the weight's stochastic integral with left-point evaluation.
pub struct EulerWalker {
    coeffs: CoefficientSet,
    key: StreamKey,
    counter: u64,
    substeps: u32,
    start: f64,
    time: f64,
    sigma_start_t: DMatrix<f64>,
    state: DVector<f64>,
    derivative: DMatrix<f64>,
    integral: DVector<f64>,
    steps_done: u32,
}

impl EulerWalker {
    fn new(
        coeffs: CoefficientSet,
        key: StreamKey,
        start: f64,
        origin: Vec<f64>,
        substeps: u32,
    ) -> Self {
        let dim = origin.len();
        let sigma_start_t = (coeffs.diffusion)(start, &origin).transpose();
        EulerWalker {
            coeffs,
            key,
            counter: 0,
            substeps: substeps.max(1),
            start,
            time: start,
            sigma_start_t,
            state: DVector::from_vec(origin),
            derivative: DMatrix::identity(dim, dim),
            integral: DVector::zeros(dim),
            steps_done: 0,
        }
    }

    fn advance_to(&mut self, t: f64, ledger: &mut CostLedger) -> Result<PathSample> {
        if t < self.time {
            return Err(Error::InvalidInterval {
                from: self.time,
                to: t,
            });
        }
        let dim = self.state.len();
        if t > self.time {
            let h = (t - self.time) / self.substeps as f64;
            for step in 0..self.substeps {
                let r = self.time + step as f64 * h;
                let x_slice: Vec<f64> = self.state.iter().copied().collect();
                let sigma = (self.coeffs.diffusion)(r, &x_slice);
                let inv_d = solve_left(&sigma, &self.derivative, self.steps_done as usize)?;

                let inc = brownian_increment(&self.key, self.counter, r, r + h, dim)?;
                self.counter += 1;
                ledger.add_normals(dim as u64);
                let dw = DVector::from_vec(inc.delta);

                // Weight integrand at the left point: [sigma^-1 D]^T dW.
                self.integral += inv_d.transpose() * &dw;

                let mu = DVector::from_vec((self.coeffs.drift)(r, &x_slice));
                let dmu = (self.coeffs.drift_jacobian)(r, &x_slice);
                let dsigmas = (self.coeffs.diffusion_jacobians)(r, &x_slice);

                let mut d_next = &self.derivative + (&dmu * &self.derivative) * h;
                for (j, dsj) in dsigmas.iter().enumerate() {
                    d_next += (dsj * &self.derivative) * dw[j];
                }
                self.state += mu * h + &sigma * &dw;
                self.derivative = d_next;
                self.steps_done += 1;
            }
            self.time = t;
        }
        let span = self.time - self.start;
        let mut weight = Vec::with_capacity(dim + 1);
        weight.push(1.0);
        if span > 0.0 {
            let spatial = (&self.sigma_start_t * &self.integral) / span;
            weight.extend(spatial.iter().copied());
        } else {
            weight.extend(std::iter::repeat(0.0).take(dim));
        }
        Ok(PathSample {
            state: self.state.iter().copied().collect(),
            weight,
            steps_used: self.steps_done,
        })
    }
}

/// `sigma^-1 M` via LU, with a crude condition estimate from the pivot
/// magnitudes for the error report.
fn solve_left(sigma: &DMatrix<f64>, m: &DMatrix<f64>, step: usize) -> Result<DMatrix<f64>> {
    let lu = sigma.clone().lu();
    let u = lu.u();
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for i in 0..u.nrows() {
        let p = u[(i, i)].abs();
        max_pivot = max_pivot.max(p);
        min_pivot = min_pivot.min(p);
    }
    let cond = if min_pivot > 0.0 {
        max_pivot / min_pivot
    } else {
        f64::INFINITY
    };
    match lu.solve(m) {
        Some(solution) if cond.is_finite() && cond < 1e14 => Ok(solution),
        _ => Err(Error::SingularDiffusion { step, cond }),
    }
}

/// Single-target exact sample: state `x + (W_t - W_s)` and weight
/// `(1, (W_t - W_s)/(t - s))`.
pub fn exact_brownian_sample(
    key: &StreamKey,
    counter: u64,
    s: f64,
    x: &[f64],
    t: f64,
    ledger: &mut CostLedger,
) -> Result<PathSample> {
    if t < s {
        return Err(Error::InvalidInterval { from: s, to: t });
    }
    let dim = x.len();
    if t == s {
        let mut weight = vec![0.0; dim + 1];
        weight[0] = 1.0;
        return Ok(PathSample {
            state: x.to_vec(),
            weight,
            steps_used: 0,
        });
    }
    let inc = brownian_increment(key, counter, s, t, dim)?;
    ledger.add_normals(dim as u64);
    let span = t - s;
    let state: Vec<f64> = x.iter().zip(&inc.delta).map(|(&a, &d)| a + d).collect();
    let mut weight = Vec::with_capacity(dim + 1);
    weight.push(1.0);
    weight.extend(inc.delta.iter().map(|&d| d / span));
    Ok(PathSample {
        state,
        weight,
        steps_used: 1,
    })
}

/// Single-target Euler sample of the coupled `(X, D)` system.
pub fn euler_sample(
    coeffs: &CoefficientSet,
    key: &StreamKey,
    s: f64,
    x: &[f64],
    t: f64,
    steps: u32,
    ledger: &mut CostLedger,
) -> Result<PathSample> {
    if t < s {
        return Err(Error::InvalidInterval { from: s, to: t });
    }
    let mut walker = EulerWalker::new(coeffs.clone(), key.clone(), s, x.to_vec(), steps);
    walker.advance_to(t, ledger)
}

/// Step-count policy for a discretizer at accuracy level `level` with
/// base `rho`: `max(1, floor(rho^(level/2)))`.
pub fn steps_for_level(level: u32, rho: f64) -> u32 {
    let raw = rho.powf(level as f64 / 2.0).floor();
    if raw.is_finite() && raw >= 1.0 {
        (raw as u64).min(u32::MAX as u64) as u32
    } else {
        1
    }
}

/// Coefficients of the driftless unit-diffusion equation; Euler with these
/// agrees with exact sampling.
pub fn unit_coefficients(dim: usize) -> CoefficientSet {
    CoefficientSet {
        drift: Arc::new(move |_, _| vec![0.0; dim]),
        diffusion: Arc::new(move |_, _| DMatrix::identity(dim, dim)),
        drift_jacobian: Arc::new(move |_, _| DMatrix::zeros(dim, dim)),
        diffusion_jacobians: Arc::new(move |_, _| vec![DMatrix::zeros(dim, dim); dim]),
    }
}
