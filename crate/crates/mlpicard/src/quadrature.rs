//! Gauss-Legendre quadrature and nested composition measures.
//!
//! A rule of order `Q` on `[a, b]` integrates every polynomial of degree
//! `< 2Q` exactly. Composing rules recursively (each atom of a depth-`n-1`
//! measure spawns a fresh rule on the interval from that atom to the
//! horizon) yields the discrete measures that weight the solver's error
//! analysis; their moments satisfy
//! `sum mass * (T-t)^k / k! = T^(n+k) / (n+k)!` for `k < 2Q - n`.

use crate::error::{Error, Result};

/// Largest supported rule order.
pub const MAX_ORDER: u32 = 64;

/// Hard cap on the number of atoms a nested measure may enumerate.
pub const MAX_ATOMS: usize = 10_000_000;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// A Gauss-Legendre rule on a closed interval.
///
/// The degenerate interval `a == b` yields the empty rule: zero nodes,
/// zero weights, and every discrete integral over it is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    interval_start: f64,
    interval_end: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: u32,
}

impl QuadratureRule {
    pub fn interval_start(&self) -> f64 {
        self.interval_start
    }

    pub fn interval_end(&self) -> f64 {
        self.interval_end
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Discrete integral `sum_i w_i f(x_i)`; zero for the empty rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Evaluate the Legendre polynomial `P_n` and its derivative at `x` by the
/// three-term recurrence.
fn legendre_value_and_derivative(n: u32, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1), stable away from +-1.
    let dp = (n as f64) * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Roots of the degree-`n` Legendre polynomial, strictly increasing in
/// `(-1, 1)`.
///
/// Newton iteration seeded at the Chebyshev angles
/// `cos(pi (i - 1/4) / (n + 1/2))` converges to full precision in a
/// handful of steps for every `n <= 64`.
pub fn legendre_roots(n: u32) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::InvalidOrder {
            got: n,
            max: MAX_ORDER,
        });
    }
    let mut roots = vec![0.0; n as usize];
    let half = (n as usize + 1) / 2;
    for i in 0..half {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITER {
            let (p, dp) = legendre_value_and_derivative(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() <= NEWTON_TOL {
                break;
            }
        }
        // The seed enumerates roots from the largest down; store symmetric pair.
        roots[n as usize - 1 - i] = x;
        roots[i] = -x;
    }
    if n % 2 == 1 {
        roots[n as usize / 2] = 0.0;
    }
    Ok(roots)
}

/// The `Q`-point Gauss-Legendre rule on `[a, b]`.
///
/// Weights come from the closed form `2 / ((1 - x^2) P_Q'(x)^2)` on
/// `[-1, 1]`, then both nodes and weights are mapped affinely onto the
/// target interval. `a == b` returns the empty rule.
pub fn gauss_legendre(order: u32, a: f64, b: f64) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidOrder {
            got: order,
            max: MAX_ORDER,
        });
    }
    if b < a {
        return Err(Error::InvalidInterval { from: a, to: b });
    }
    if a == b {
        return Ok(QuadratureRule {
            interval_start: a,
            interval_end: b,
            nodes: Vec::new(),
            weights: Vec::new(),
            order,
        });
    }
    let roots = legendre_roots(order)?;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = Vec::with_capacity(order as usize);
    let mut weights = Vec::with_capacity(order as usize);
    for &r in &roots {
        let (_, dp) = legendre_value_and_derivative(order, r);
        let w = 2.0 / ((1.0 - r * r) * dp * dp);
        nodes.push(mid + half * r);
        weights.push(half * w);
    }
    Ok(QuadratureRule {
        interval_start: a,
        interval_end: b,
        nodes,
        weights,
        order,
    })
}

/// The discrete measure on `[0, T]` obtained by `depth`-fold composition
/// of `order`-point Gauss-Legendre rules.
///
/// Depth 0 is the unit mass at `t = 0`. Depth `n` replaces every atom
/// `(s, m)` of depth `n-1` by the atoms `(x_j, m w_j)` of the rule on
/// `[s, T]`. Atoms at bitwise-identical times are merged; times are never
/// rounded.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedMeasure {
    atoms: Vec<(f64, f64)>,
    depth: u32,
    order: u32,
    horizon: f64,
}

impl NestedMeasure {
    /// `(time, mass)` pairs, strictly increasing in time.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, m)| m).sum()
    }

    /// `sum_atoms mass * f(t)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.atoms.iter().map(|&(t, m)| m * f(t)).sum()
    }
}

/// Maximum composition depth; atom counts grow as `order^depth`.
pub const MAX_DEPTH: u32 = 8;

/// Build the nested measure of the given depth, order and horizon.
pub fn nested_measure(depth: u32, order: u32, horizon: f64) -> Result<NestedMeasure> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidOrder {
            got: order,
            max: MAX_ORDER,
        });
    }
    if depth > MAX_DEPTH {
        return Err(Error::InvalidOrder {
            got: depth,
            max: MAX_DEPTH,
        });
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidInterval {
            from: 0.0,
            to: horizon,
        });
    }
    let predicted = (order as u128).pow(depth);
    if predicted > MAX_ATOMS as u128 {
        return Err(Error::ResourceLimit {
            what: "nested measure atom count",
            needed: predicted,
            cap: MAX_ATOMS as u128,
        });
    }

    let mut atoms: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(atoms.len() * order as usize);
        for &(s, mass) in &atoms {
            let rule = gauss_legendre(order, s, horizon)?;
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                next.push((x, mass * w));
            }
        }
        next.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Merge atoms landing on the exact same float.
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(next.len());
        for (t, m) in next {
            match merged.last_mut() {
                Some(last) if last.0 == t => last.1 += m,
                _ => merged.push((t, m)),
            }
        }
        atoms = merged;
    }
    Ok(NestedMeasure {
        atoms,
        depth,
        order,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent root finder: bisection on an explicitly coded
    /// polynomial, used to freeze expected node values.
    fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn roots_order_one_is_origin() {
        assert_eq!(legendre_roots(1).unwrap(), vec![0.0]);
    }

    #[test]
    fn roots_order_two_match_bisection_oracle() {
        // P_2(x) = (3x^2 - 1) / 2
        let oracle = bisect(|x| 0.5 * (3.0 * x * x - 1.0), 0.0, 1.0);
        assert_relative_eq!(oracle, 0.5773502691896258, max_relative = 1e-14);
        let roots = legendre_roots(2).unwrap();
        assert_relative_eq!(roots[0], -0.5773502691896258, max_relative = 1e-14);
        assert_relative_eq!(roots[1], 0.5773502691896258, max_relative = 1e-14);
    }

    #[test]
    fn roots_order_three_match_bisection_oracle() {
        // P_3(x) = (5x^3 - 3x) / 2
        let oracle = bisect(|x| 0.5 * (5.0 * x * x * x - 3.0 * x), 0.5, 1.0);
        assert_relative_eq!(oracle, 0.7745966692414834, max_relative = 1e-14);
        let roots = legendre_roots(3).unwrap();
        assert_relative_eq!(roots[0], -0.7745966692414834, max_relative = 1e-14);
        assert_eq!(roots[1], 0.0);
        assert_relative_eq!(roots[2], 0.7745966692414834, max_relative = 1e-14);
    }

    #[test]
    fn roots_are_increasing_symmetric_and_small_residual() {
        for n in 1..=64 {
            let roots = legendre_roots(n).unwrap();
            assert_eq!(roots.len(), n as usize);
            for w in roots.windows(2) {
                assert!(w[0] < w[1], "n={n}: roots not strictly increasing");
            }
            for i in 0..roots.len() {
                let mirror = roots[roots.len() - 1 - i];
                assert!(
                    (roots[i] + mirror).abs() <= 1e-15,
                    "n={n}: asymmetric roots"
                );
                let (p, _) = legendre_value_and_derivative(n, roots[i]);
                assert!(p.abs() <= 1e-13, "n={n}: residual {p:e}");
            }
        }
    }

    #[test]
    fn invalid_orders_are_rejected() {
        assert!(matches!(
            legendre_roots(0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            legendre_roots(65),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            gauss_legendre(0, 0.0, 1.0),
            Err(Error::InvalidOrder { .. })
        ));
    }

    #[test]
    fn one_point_rule_is_midpoint() {
        // Moment equations on [0,1]: w = 1 (integral of 1), w x = 1/2.
        let rule = gauss_legendre(1, 0.0, 1.0).unwrap();
        assert_eq!(rule.nodes(), &[0.5]);
        assert_eq!(rule.weights(), &[1.0]);
    }

    #[test]
    fn two_point_rule_matches_moment_equations() {
        // Symmetric two-point rule on [0,1] exact through degree 3 forces
        // nodes 1/2 -+ 1/(2 sqrt 3) and equal weights 1/2.
        let offset = 0.5 / 3.0f64.sqrt();
        let rule = gauss_legendre(2, 0.0, 1.0).unwrap();
        assert_relative_eq!(rule.nodes()[0], 0.5 - offset, max_relative = 1e-14);
        assert_relative_eq!(rule.nodes()[1], 0.5 + offset, max_relative = 1e-14);
        assert_relative_eq!(rule.weights()[0], 0.5, max_relative = 1e-14);
        assert_relative_eq!(rule.weights()[1], 0.5, max_relative = 1e-14);
    }

    #[test]
    fn degenerate_interval_gives_empty_rule() {
        let rule = gauss_legendre(3, 0.7, 0.7).unwrap();
        assert!(rule.is_empty());
        assert_eq!(rule.integrate(|t| t * t + 1.0), 0.0);
    }

    #[test]
    fn rule_invariants_hold() {
        for q in [1u32, 2, 3, 5, 8, 13, 32, 64] {
            for (a, b) in [(0.0, 1.0), (0.3, 2.7), (-1.5, 4.25)] {
                let rule = gauss_legendre(q, a, b).unwrap();
                assert_eq!(rule.nodes().len(), q as usize);
                for w in rule.nodes().windows(2) {
                    assert!(w[0] < w[1]);
                }
                assert!(rule.nodes().iter().all(|&x| x > a && x < b));
                assert!(rule.weights().iter().all(|&w| w > 0.0));
                let total: f64 = rule.weights().iter().sum();
                assert_relative_eq!(total, b - a, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn integrates_cubic_with_two_points() {
        let rule = gauss_legendre(2, 0.0, 1.0).unwrap();
        assert_relative_eq!(rule.integrate(|t| t * t * t), 0.25, max_relative = 1e-14);
    }

    #[test]
    fn one_point_rule_integrates_constants_to_interval_length() {
        let rule = gauss_legendre(1, 0.0, 2.0).unwrap();
        assert_relative_eq!(rule.integrate(|_| 1.0), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn monomial_exactness_through_degree_2q_minus_1() {
        for q in 1..=32u32 {
            for (a, b) in [(0.0, 1.0), (0.3, 2.7)] {
                let rule = gauss_legendre(q, a, b).unwrap();
                for k in 0..(2 * q) {
                    let numeric = rule.integrate(|t| t.powi(k as i32));
                    let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0);
                    assert_relative_eq!(numeric, exact, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn affine_covariance_of_scaled_rules() {
        for q in [1u32, 2, 4, 7, 16] {
            let unit = gauss_legendre(q, 0.0, 1.0).unwrap();
            let (a, b) = (0.4, 3.1);
            let mapped = gauss_legendre(q, a, b).unwrap();
            for i in 0..q as usize {
                let x = a + (b - a) * unit.nodes()[i];
                let w = (b - a) * unit.weights()[i];
                assert_relative_eq!(mapped.nodes()[i], x, max_relative = 1e-14);
                assert_relative_eq!(mapped.weights()[i], w, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn interval_monotonicity_for_nonincreasing_functions() {
        // For nonincreasing psi >= 0 and t <= s, the rule on [s,T] never
        // exceeds the rule on [t,T].
        let horizon = 2.0;
        for q in [1u32, 2, 3, 5] {
            for c in [0.1, 0.5, 0.9, 1.3, 1.7, 1.95] {
                let psi = |r: f64| if r <= c { 1.0 } else { 0.0 };
                let mut prev = f64::INFINITY;
                for s in [0.0, 0.25, 0.5, 1.0, 1.5, 1.9] {
                    let rule = gauss_legendre(q, s, horizon).unwrap();
                    let val = rule.integrate(psi);
                    assert!(
                        val <= prev + 1e-12,
                        "q={q} c={c} s={s}: {val} > {prev}"
                    );
                    prev = val;
                }
            }
        }
    }

    #[test]
    fn nested_depth_zero_is_unit_mass_at_origin() {
        let m = nested_measure(0, 4, 2.0).unwrap();
        assert_eq!(m.atoms(), &[(0.0, 1.0)]);
    }

    #[test]
    fn nested_depth_one_order_one_is_midpoint_atom() {
        let m = nested_measure(1, 1, 1.0).unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_relative_eq!(m.atoms()[0].0, 0.5, max_relative = 1e-15);
        assert_relative_eq!(m.atoms()[0].1, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn nested_mass_is_horizon_power_over_factorial() {
        let m = nested_measure(2, 2, 1.0).unwrap();
        assert_relative_eq!(m.total_mass(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn nested_moment_identity() {
        // sum mass (T-t)^k / k! = T^(n+k) / (n+k)! for k < 2Q - n.
        let factorial = |m: u32| (1..=m).map(|v| v as f64).product::<f64>().max(1.0);
        for horizon in [1.0, 2.5] {
            for q in 1..=8u32 {
                for n in 0..=4u32.min(2 * q - 1) {
                    let measure = nested_measure(n, q, horizon).unwrap();
                    for k in 0..(2 * q - n) {
                        let lhs = measure
                            .integrate(|t| (horizon - t).powi(k as i32) / factorial(k));
                        let rhs = horizon.powi((n + k) as i32) / factorial(n + k);
                        assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn nested_guards_reject_blowup() {
        assert!(matches!(
            nested_measure(9, 2, 1.0),
            Err(Error::InvalidOrder { .. })
        ));
        assert!(matches!(
            nested_measure(8, 64, 1.0),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
