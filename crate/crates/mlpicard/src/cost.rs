//! Exact cost models for one evaluation of the multilevel scheme.
//!
//! `rn_model` counts scalar standard normal realizations and `fe_model`
//! counts terminal-plus-nonlinearity evaluations, by taking the scheme's
//! cost recursions with equality. The actual evaluators may consume
//! strictly less (degenerate intervals short-circuit), so the models are
//! certified upper envelopes for the realized ledger. Values blow past 64
//! bits quickly, hence exact big integers.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Normal-variate count: `rn(0) = 0` and
/// `rn(n) = d M^n + sum_{l<n} Q M^(n-l) (d + rn(l) + [l>=1] rn(l-1))`.
pub fn rn_model(n: u32, m: u32, q: u32, dim: u64) -> BigUint {
    let m_big = BigUint::from(m);
    let q_big = BigUint::from(q);
    let d_big = BigUint::from(dim);
    let mut table: Vec<BigUint> = Vec::with_capacity(n as usize + 1);
    table.push(BigUint::zero());
    for level in 1..=n {
        let mut total = &d_big * m_big.pow(level);
        for l in 0..level {
            let mut inner = d_big.clone() + &table[l as usize];
            if l >= 1 {
                inner += &table[l as usize - 1];
            }
            total += &q_big * m_big.pow(level - l) * inner;
        }
        table.push(total);
    }
    table.pop().unwrap()
}

/// Function-evaluation count: `fe(0) = 0` and
/// `fe(n) = M^n + sum_{l<n} Q M^(n-l) (1 + fe(l) + [l>=1] (1 + fe(l-1)))`.
pub fn fe_model(n: u32, m: u32, q: u32) -> BigUint {
    let m_big = BigUint::from(m);
    let q_big = BigUint::from(q);
    let mut table: Vec<BigUint> = Vec::with_capacity(n as usize + 1);
    table.push(BigUint::zero());
    for level in 1..=n {
        let mut total = m_big.pow(level);
        for l in 0..level {
            let mut inner = BigUint::one() + &table[l as usize];
            if l >= 1 {
                inner += BigUint::one() + &table[l as usize - 1];
            }
            total += &q_big * m_big.pow(level - l) * inner;
        }
        table.push(total);
    }
    table.pop().unwrap()
}

/// `8 d N^(2N)`, the closed-form bound on `rn_model(N, N, N, d)`.
pub fn rn_bound(n: u32, dim: u64) -> BigUint {
    BigUint::from(8u32) * BigUint::from(dim) * BigUint::from(n).pow(2 * n)
}

/// `8 N^(2N)`, the closed-form bound on `fe_model(N, N, N)`.
pub fn fe_bound(n: u32) -> BigUint {
    BigUint::from(8u32) * BigUint::from(n).pow(2 * n)
}

/// One row of the diagonal complexity table.
#[derive(Debug, Clone)]
pub struct CostRow {
    pub n: u32,
    pub rn: BigUint,
    pub fe: BigUint,
    pub rn_bound: BigUint,
    pub fe_bound: BigUint,
    /// `[(1 + 2L) e^T / N^(2 alpha)]^N` -- the shape of the predicted
    /// error with symbolic constants dropped; a model, not a measurement.
    pub model_error: f64,
}

/// Diagonal rows `N = 1..=n_max` with the error-shape column evaluated at
/// the supplied Lipschitz constant, horizon, and smoothness exponent.
pub fn complexity_table(n_max: u32, dim: u64, lipschitz: f64, horizon: f64, alpha: f64) -> Vec<CostRow> {
    assert!(n_max <= 8, "diagonal table capped at N = 8");
    (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            let base = (1.0 + 2.0 * lipschitz) * horizon.exp() / nf.powf(2.0 * alpha);
            CostRow {
                n,
                rn: rn_model(n, n, n, dim),
                fe: fe_model(n, n, n),
                rn_bound: rn_bound(n, dim),
                fe_bound: fe_bound(n),
                model_error: base.powi(n as i32),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_depth_costs_nothing() {
        assert_eq!(rn_model(0, 5, 3, 7), BigUint::zero());
        assert_eq!(fe_model(0, 5, 3), BigUint::zero());
    }

    #[test]
    fn unit_parameters_give_two_d_and_two() {
        // rn(1,1,1) = d * 1 + 1 * 1 * (d + 0) = 2d; fe analogously = 2.
        for d in [1u64, 10, 100] {
            assert_eq!(rn_model(1, 1, 1, d), BigUint::from(2 * d));
        }
        assert_eq!(fe_model(1, 1, 1), BigUint::from(2u32));
    }

    #[test]
    fn diagonal_bounds_hold_exactly() {
        for n in 1..=6u32 {
            for d in [1u64, 10, 100] {
                assert!(
                    rn_model(n, n, n, d) <= rn_bound(n, d),
                    "rn bound fails at N={n}, d={d}"
                );
            }
            assert!(fe_model(n, n, n) <= fe_bound(n), "fe bound fails at N={n}");
        }
    }

    #[test]
    fn rn_is_strictly_increasing_on_the_diagonal() {
        let mut prev = BigUint::zero();
        for n in 1..=8u32 {
            let value = rn_model(n, n, n, 1);
            assert!(value > prev);
            prev = value;
        }
    }

    #[test]
    fn table_row_values() {
        let rows = complexity_table(2, 100, 0.0, 1.0, 0.25);
        assert_eq!(rows[0].rn, BigUint::from(200u32));
        // 8 d N^(2N) at N=2, d=1 is 8 * 16 = 128.
        assert_eq!(fe_bound(2), BigUint::from(128u32));
        assert_eq!(rows[1].rn_bound, BigUint::from(8u32 * 100 * 16));
    }

    #[test]
    fn hand_unrolled_small_cases() {
        // rn(2,2,2,1): 1*4 + l=0: 2*4*(1) + l=1: 2*2*(1 + rn(1,2,2,1)).
        // rn(1,2,2,1) = 2 + 2*2*1 = 6, so total = 4 + 8 + 2*2*7 = 40.
        assert_eq!(rn_model(2, 2, 2, 1), BigUint::from(40u32));
        // fe(2,3,3): 9 + l=0: 3*9*(1+0) + l=1: 3*3*(1 + fe(1,3,3) + 1).
        // fe(1,3,3) = 3 + 3*3*1 = 12, so total = 9 + 27 + 9*14 = 162.
        assert_eq!(fe_model(2, 3, 3), BigUint::from(162u32));
    }
}
