//! Monte Carlo estimators of the weighted sup-RMS semi-norms.
//!
//! The semi-norm of a random field `V` sums, over the atoms `(t, mass)`
//! of a nested quadrature measure, the supremum over `s in [t, T]`,
//! `u in [0, s]` and shift `z` of the root mean square of
//! `V(s, z + W_u)`. The supremum is uncomputable, so the estimator
//! restricts it to a finite, caller-declared probe set and is therefore
//! a lower bound. Inner sampling reuses the same Brownian draws for
//! every field compared under one key (common random numbers), which
//! makes homogeneity and pointwise-dominance comparisons hold sample by
//! sample instead of only in expectation.

use crate::error::{Error, Result};
use crate::ledger::CostLedger;
use crate::mlp::Problem;
use crate::oracle::HermiteRule;
use crate::problems::NamedProblem;
use crate::quadrature::{gauss_legendre, nested_measure};
use crate::randomness::{brownian_increment, StreamKey};

/// A random field evaluated at `(s, x)` under a stream key.
pub type RandomField<'a> = &'a (dyn Fn(f64, &[f64], &StreamKey) -> f64 + Sync);

/// One probe of the restricted supremum: evaluation time `s`, Brownian
/// time `u <= s`, and spatial shift `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub s: f64,
    pub u: f64,
    pub z: Vec<f64>,
}

/// Estimator configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormSpec {
    pub depth: u32,
    pub order: u32,
    pub horizon: f64,
    pub probes: Vec<Probe>,
    pub inner_samples: u32,
}

impl SeminormSpec {
    fn validate(&self) -> Result<()> {
        if self.probes.is_empty() || self.inner_samples == 0 {
            return Err(Error::InvalidConfig(
                "seminorm spec needs probes and inner samples".into(),
            ));
        }
        for p in &self.probes {
            if !(0.0 <= p.u && p.u <= p.s && p.s <= self.horizon) {
                return Err(Error::InvalidInterval { from: p.u, to: p.s });
            }
        }
        Ok(())
    }
}

/// Lower-bound estimate of the semi-norm of `field`.
///
/// For probe `j` and inner sample `m`, the Brownian shift and the key
/// handed to the field depend only on `(key, j, m)` -- not on the field --
/// so compared fields see identical randomness.
pub fn estimate_seminorm(
    field: RandomField<'_>,
    spec: &SeminormSpec,
    key: &StreamKey,
) -> Result<f64> {
    spec.validate()?;
    let measure = nested_measure(spec.depth, spec.order, spec.horizon)?;
    let rms = probe_rms(field, spec, key)?;
    let mut total = 0.0;
    for &(t, mass) in measure.atoms() {
        let mut best = 0.0f64;
        for (probe, &value) in spec.probes.iter().zip(&rms) {
            if probe.s >= t {
                best = best.max(value);
            }
        }
        total += mass * best;
    }
    Ok(total)
}

fn probe_rms(field: RandomField<'_>, spec: &SeminormSpec, key: &StreamKey) -> Result<Vec<f64>> {
    Ok(probe_reports(field, spec, key)?
        .into_iter()
        .map(|r| r.rms)
        .collect())
}

/// Per-probe root mean square with a delta-method CLT band, plus the
/// measure mass of the atoms the probe covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeReport {
    pub rms: f64,
    /// One standard error of the RMS estimator.
    pub band: f64,
}

/// The per-probe RMS values behind [`estimate_seminorm`], with bands.
pub fn probe_reports(
    field: RandomField<'_>,
    spec: &SeminormSpec,
    key: &StreamKey,
) -> Result<Vec<ProbeReport>> {
    spec.validate()?;
    let m = spec.inner_samples as f64;
    let mut out = Vec::with_capacity(spec.probes.len());
    for (j, probe) in spec.probes.iter().enumerate() {
        let dim = probe.z.len();
        let mut sum_sq = 0.0;
        let mut sum_quartic = 0.0;
        for sample in 0..spec.inner_samples {
            let base = key.fork(&[j as i64, sample as i64]);
            let shift = brownian_increment(&base, 0, 0.0, probe.u, dim)?;
            let point: Vec<f64> = probe
                .z
                .iter()
                .zip(&shift.delta)
                .map(|(&z, &w)| z + w)
                .collect();
            let value = field(probe.s, &point, &base.fork(&[1]));
            sum_sq += value * value;
            sum_quartic += value * value * value * value;
        }
        let mean_sq = sum_sq / m;
        let rms = mean_sq.sqrt();
        let var_sq = (sum_quartic / m - mean_sq * mean_sq).max(0.0);
        let band = if rms > 0.0 {
            (var_sq / m).sqrt() / (2.0 * rms)
        } else {
            0.0
        };
        out.push(ProbeReport { rms, band });
    }
    Ok(out)
}

/// Monte Carlo estimate of the Gauss-Legendre defect of the composed
/// nonlinearity along the exact solution: the conditional expectation of
/// `sum_s q(s) F(s, .) - integral_t^T F(s, .) ds` given the Brownian
/// state at time `u`, measured in root mean square over that state.
///
/// The inner conditional expectation is a Gauss-Hermite sum and the
/// reference integral a 32-point rule, so for integrands polynomial in
/// time below the exactness degree the defect vanishes to rounding.
/// One-dimensional problems only.
pub fn quadrature_defect(
    named: &NamedProblem,
    order: u32,
    probe: &Probe,
    inner_samples: u32,
    key: &StreamKey,
) -> Result<f64> {
    let problem: &Problem = &named.problem;
    if problem.dim() != 1 {
        return Err(Error::UnsupportedDimension {
            what: "quadrature defect",
            expected: 1,
            got: problem.dim(),
        });
    }
    let solution = named
        .solution
        .clone()
        .ok_or_else(|| Error::NoClosedForm(named.name.clone()))?;
    if probe.z.len() != 1 || !(0.0 <= probe.u && probe.u <= probe.s) {
        return Err(Error::InvalidConfig("defect probe must be 1-d with u <= s".into()));
    }
    let horizon = problem.horizon();
    let t = probe.s;
    let rule = gauss_legendre(order, t, horizon)?;
    let reference = gauss_legendre(32, t, horizon)?;
    let hermite = HermiteRule::new(32)?;

    let composed = |s: f64, y: f64| {
        let u_val = solution(s, &[y]);
        problem.nonlinearity_value(s, &[y], u_val, &[])
    };

    let mut sum_sq = 0.0;
    for m in 0..inner_samples {
        let base = key.fork(&[m as i64]);
        let shift = brownian_increment(&base, 0, 0.0, probe.u, 1)?;
        let anchor = probe.z[0] + shift.delta[0];
        let conditional = |s: f64| {
            let spread = (s - t).sqrt();
            hermite.expectation(|xi| composed(s, anchor + spread * xi))
        };
        let discrete = rule.integrate(conditional);
        let exact = reference.integrate(conditional);
        let defect = discrete - exact;
        sum_sq += defect * defect;
    }
    Ok((sum_sq / inner_samples as f64).sqrt())
}

/// Realized draw count of one semi-norm estimate, for reporting.
pub fn estimate_cost(spec: &SeminormSpec) -> CostLedger {
    let mut ledger = CostLedger::new();
    for probe in &spec.probes {
        ledger.add_normals(probe.z.len() as u64 * spec.inner_samples as u64);
    }
    ledger
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::manufactured;
    use crate::randomness::gaussian_vector;
    use approx::assert_relative_eq;

    fn spec_1d(depth: u32, order: u32, inner: u32) -> SeminormSpec {
        SeminormSpec {
            depth,
            order,
            horizon: 1.0,
            probes: vec![
                Probe { s: 0.25, u: 0.25, z: vec![0.0] },
                Probe { s: 0.5, u: 0.3, z: vec![0.5] },
                Probe { s: 1.0, u: 0.7, z: vec![-0.5] },
            ],
            inner_samples: inner,
        }
    }

    #[test]
    fn constant_field_gives_mass_of_measure() {
        let factorial = |m: u32| (1..=m).map(|v| v as f64).product::<f64>().max(1.0);
        let field = |_: f64, _: &[f64], _: &StreamKey| 1.0;
        for depth in 0..=3u32 {
            let spec = spec_1d(depth, 4, 8);
            let got = estimate_seminorm(&field, &spec, &StreamKey::root(1)).unwrap();
            let want = 1.0f64.powi(depth as i32) / factorial(depth);
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_field_gives_zero() {
        let field = |_: f64, _: &[f64], _: &StreamKey| 0.0;
        let spec = spec_1d(2, 3, 16);
        assert_eq!(
            estimate_seminorm(&field, &spec, &StreamKey::root(2)).unwrap(),
            0.0
        );
    }

    #[test]
    fn coordinate_field_rms_is_sqrt_time() {
        // V(s, z) = z with probe z = 0, u = s: RMS of W_s is sqrt(s).
        let s = 0.49;
        let spec = SeminormSpec {
            depth: 0,
            order: 2,
            horizon: 1.0,
            probes: vec![Probe { s, u: s, z: vec![0.0] }],
            inner_samples: 4000,
        };
        let field = |_: f64, x: &[f64], _: &StreamKey| x[0];
        let got = estimate_seminorm(&field, &spec, &StreamKey::root(3)).unwrap();
        assert!(
            (got - s.sqrt()).abs() <= 0.05 * s.sqrt(),
            "rms {got}, want {}",
            s.sqrt()
        );
    }

    #[test]
    fn homogeneity_is_exact_for_power_of_two_scalars() {
        let field = |s: f64, x: &[f64], key: &StreamKey| {
            s + x[0] + gaussian_vector(key, 0, 1)[0]
        };
        let scaled = |s: f64, x: &[f64], key: &StreamKey| -4.0 * field(s, x, key);
        let spec = spec_1d(1, 3, 64);
        let key = StreamKey::root(4);
        let base = estimate_seminorm(&field, &spec, &key).unwrap();
        let four = estimate_seminorm(&scaled, &spec, &key).unwrap();
        assert_eq!(four, 4.0 * base);
    }

    #[test]
    fn subadditivity_holds_with_common_randomness() {
        let u_field = |s: f64, x: &[f64], key: &StreamKey| {
            s * x[0] + gaussian_vector(key, 0, 2)[0]
        };
        let v_field = |s: f64, x: &[f64], key: &StreamKey| {
            (s + x[0]).cos() + gaussian_vector(key, 0, 2)[1]
        };
        let sum_field =
            |s: f64, x: &[f64], key: &StreamKey| u_field(s, x, key) + v_field(s, x, key);
        let spec = spec_1d(2, 3, 128);
        let key = StreamKey::root(5);
        let eu = estimate_seminorm(&u_field, &spec, &key).unwrap();
        let ev = estimate_seminorm(&v_field, &spec, &key).unwrap();
        let es = estimate_seminorm(&sum_field, &spec, &key).unwrap();
        assert!(es <= eu + ev + 1e-12, "{es} > {eu} + {ev}");
    }

    #[test]
    fn monotone_dominance_transfers_to_estimates() {
        let small = |_: f64, _: &[f64], key: &StreamKey| {
            0.5 * gaussian_vector(key, 0, 1)[0]
        };
        let large = |_: f64, _: &[f64], key: &StreamKey| {
            gaussian_vector(key, 0, 1)[0].abs() + 0.1
        };
        let spec = spec_1d(1, 2, 64);
        let key = StreamKey::root(6);
        let es = estimate_seminorm(&small, &spec, &key).unwrap();
        let el = estimate_seminorm(&large, &spec, &key).unwrap();
        assert!(es <= el + 1e-12);
    }

    #[test]
    fn lipschitz_transport_through_the_nonlinearity() {
        let named = manufactured(1, 1.0);
        let problem = named.problem.clone();
        let lipschitz = problem.lipschitz();
        let u_field = |_s: f64, x: &[f64], key: &StreamKey| {
            x[0].sin() + gaussian_vector(key, 0, 2)[0] * 0.3
        };
        let v_field = |s: f64, x: &[f64], key: &StreamKey| {
            x[0].sin() + s + 0.2 * gaussian_vector(key, 0, 2)[1]
        };
        let p1 = problem.clone();
        let fu = move |s: f64, x: &[f64], key: &StreamKey| {
            p1.nonlinearity_value(s, x, u_field(s, x, key), &[])
                - p1.nonlinearity_value(s, x, v_field(s, x, key), &[])
        };
        let diff = move |s: f64, x: &[f64], key: &StreamKey| {
            u_field(s, x, key) - v_field(s, x, key)
        };
        let spec = spec_1d(1, 3, 128);
        let key = StreamKey::root(7);
        let transported = estimate_seminorm(&fu, &spec, &key).unwrap();
        let direct = estimate_seminorm(&diff, &spec, &key).unwrap();
        assert!(
            transported <= lipschitz * direct + 1e-12,
            "{transported} > {lipschitz} * {direct}"
        );
    }

    #[test]
    fn centered_mean_scales_as_inverse_sqrt_samples() {
        let spec = spec_1d(1, 2, 256);
        let key = StreamKey::root(8);
        let estimate_for = |m: u32| {
            let field = move |_: f64, _: &[f64], key: &StreamKey| {
                (0..m)
                    .map(|c| gaussian_vector(&key.fork(&[c as i64]), 0, 1)[0])
                    .sum::<f64>()
                    / m as f64
            };
            estimate_seminorm(&field, &spec, &key).unwrap()
        };
        let base = estimate_for(1);
        for m in [4u32, 16] {
            let got = estimate_for(m);
            let predicted = base / (m as f64).sqrt();
            let ratio = got / predicted;
            assert!(
                (0.7..=1.4).contains(&ratio),
                "m={m}: ratio {ratio} (got {got}, predicted {predicted})"
            );
        }
    }

    #[test]
    fn defect_vanishes_for_zero_nonlinearity() {
        let named = crate::problems::linear_baseline("quadratic", 1).unwrap();
        let probe = Probe { s: 0.2, u: 0.1, z: vec![0.3] };
        let got = quadrature_defect(&named, 3, &probe, 50, &StreamKey::root(9)).unwrap();
        assert_eq!(got, 0.0);
    }

    #[test]
    fn defect_vanishes_for_time_constant_integrand() {
        // Constant-in-time composed nonlinearity integrates exactly at
        // any order, leaving only rounding.
        let base = manufactured(1, 1.0);
        let constant = NamedProblem {
            name: "const-integrand-d1".into(),
            problem: Problem::heat(
                1.0,
                1,
                std::sync::Arc::new(|_: &[f64]| 0.0),
                std::sync::Arc::new(|_, _, _, _| 0.75),
                0.0,
            ),
            solution: Some(std::sync::Arc::new(|_, _| 0.0)),
            note: String::new(),
        };
        let _ = base;
        let probe = Probe { s: 0.3, u: 0.2, z: vec![0.0] };
        let got =
            quadrature_defect(&constant, 2, &probe, 50, &StreamKey::root(10)).unwrap();
        assert!(got <= 1e-13, "defect {got}");
    }

    #[test]
    fn defect_decreases_when_order_doubles() {
        let named = manufactured(1, 1.0);
        let probe = Probe { s: 0.1, u: 0.05, z: vec![0.2] };
        let key = StreamKey::root(11);
        let coarse = quadrature_defect(&named, 1, &probe, 2000, &key).unwrap();
        let fine = quadrature_defect(&named, 2, &probe, 2000, &key).unwrap();
        let finest = quadrature_defect(&named, 4, &probe, 2000, &key).unwrap();
        assert!(
            fine < coarse && finest < fine,
            "defects not decreasing: {coarse} {fine} {finest}"
        );
    }

    #[test]
    fn spec_validation() {
        let field = |_: f64, _: &[f64], _: &StreamKey| 0.0;
        let empty = SeminormSpec {
            depth: 1,
            order: 2,
            horizon: 1.0,
            probes: vec![],
            inner_samples: 8,
        };
        assert!(estimate_seminorm(&field, &empty, &StreamKey::root(1)).is_err());
        let bad = SeminormSpec {
            depth: 1,
            order: 2,
            horizon: 1.0,
            probes: vec![Probe { s: 0.2, u: 0.5, z: vec![0.0] }],
            inner_samples: 8,
        };
        assert!(estimate_seminorm(&field, &bad, &StreamKey::root(1)).is_err());
    }
}
