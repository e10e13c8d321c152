//! Multilevel Picard approximation of semilinear parabolic PDEs.
//!
//! The solver evaluates `u(t, x)` at a single space-time point for terminal
//! value problems of the form
//!
//! ```text
//! du/dt + 1/2 tr(sigma sigma* Hess u) + <mu, grad u> + f(t, x, u, sigma* grad u) = 0,
//! u(T, x) = g(x),
//! ```
//!
//! by a full-history recursive multilevel Picard iteration: the Picard
//! fixed-point map is telescoped over levels, expectations become Monte
//! Carlo averages whose sample counts shrink with the level, and the time
//! integral becomes a Gauss-Legendre sum. The cost of one evaluation grows
//! polynomially in the dimension, which is the point of the method.
//!
//! The crate is organised around that pipeline:
//!
//! * [`quadrature`] - Gauss-Legendre rules and the nested composition
//!   measures used by the error analysis.
//! * [`randomness`] - splittable, counter-based Gaussian streams indexed by
//!   hierarchical keys, so every branch of the recursion gets an
//!   independent, reproducible Brownian motion.
//! * [`sde`] - state and Bismut-Elworthy-Li weight processes: exact
//!   Brownian sampling for unit diffusion, Euler-Maruyama with the
//!   derivative process for general coefficients.
//! * [`mlp`] - the evaluators themselves, plus repetition-averaged
//!   estimates with cost ledgers.
//! * [`cost`] - exact recursions counting normal variates and function
//!   evaluations, with their closed-form bounds.
//! * [`seminorm`] - Monte Carlo estimators of the weighted sup-RMS
//!   semi-norms used to validate convergence claims.
//! * [`oracle`] - deterministic grid-based Picard iteration and closed
//!   forms, the ground truth at desk scale.
//! * [`problems`] - registered benchmark instances (Allen-Cahn, linear
//!   baselines, a manufactured family with known solution).
//!
//! A narrative guide with runnable examples lives in the `book/` directory
//! of the repository; its code blocks are compiled as doc-tests via the
//! [`guide`] module.

pub mod cost;
pub mod error;
pub mod guide;
pub mod ledger;
pub mod mlp;
pub mod oracle;
pub mod problems;
pub mod quadrature;
pub mod randomness;
pub mod sde;
pub mod seminorm;
pub mod stats;

pub use error::{Error, Result};
pub use num_bigint;
pub use ledger::CostLedger;
pub use mlp::{EvalMode, EvalReport, GeneralParams, HeatParams, Problem};
pub use quadrature::{NestedMeasure, QuadratureRule};
pub use randomness::StreamKey;
