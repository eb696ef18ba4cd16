//! Count discretization and the exact Skellam log-likelihood of an intensity
//! model.

use crate::intensity::{self, intensity_step_raw, ModelSpec, ParamSet};
use crate::skellam::skellam_log_pmf_rates;
use crate::{Error, Result};

/// Rounds each return to its nearest jump count (`round(x / delta)`, ties
/// away from zero) and reports the worst absolute rounding residual so
/// callers can judge how well `delta` discretizes the data.
pub fn returns_to_counts(returns: &[f64], delta: f64) -> Result<(Vec<i64>, f64)> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let mut counts = Vec::with_capacity(returns.len());
    let mut worst = 0.0f64;
    for (i, &x) in returns.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::Domain(format!(
                "returns must be finite; offending index {i}"
            )));
        }
        let m = (x / delta).round();
        worst = worst.max((x - delta * m).abs());
        counts.push(m as i64);
    }
    Ok((counts, worst))
}

/// Log-likelihood of the count series under the model, conditioning on the
/// initial intensity pair.
///
/// The filter runs on the discretized returns `delta * counts[i]`; each
/// observation contributes the Skellam log-pmf at per-interval rates
/// `lambda(t_{i-1}) * dt`. `-inf` is a legitimate value (an impossible
/// observation), never an error.
pub fn log_likelihood(
    spec: &ModelSpec,
    p: &ParamSet,
    counts: &[i64],
    lambda0: (f64, f64),
) -> Result<f64> {
    spec.validate()?;
    p.validate(spec)?;
    intensity::validate_lambda0(lambda0)?;
    Ok(log_likelihood_raw(spec, p, counts, lambda0))
}

/// Validation-free fused filter + likelihood loop; the optimizer's hot path.
pub(crate) fn log_likelihood_raw(
    spec: &ModelSpec,
    p: &ParamSet,
    counts: &[i64],
    lambda0: (f64, f64),
) -> f64 {
    let d = spec.delta;
    let d2 = d * d;
    let dt = spec.dt;
    let (mut lp, mut lm) = lambda0;
    let mut ll = 0.0f64;
    for &m in counts {
        let term = skellam_log_pmf_rates(m, lp * dt, lm * dt);
        if term == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        ll += term;
        let h = d2 * (lp + lm) * dt;
        let eps = d * m as f64 - d * (lp - lm) * dt;
        let next = intensity_step_raw(spec, p, (lp, lm), eps, h.max(f64::MIN_POSITIVE));
        lp = next.0;
        lm = next.1;
    }
    ll
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::Variant;
    use crate::skellam::{skellam_log_pmf, SkellamParams};

    fn constant_spec() -> (ModelSpec, ParamSet) {
        let spec = ModelSpec::new(Variant::Basic, true, 0.005, 1.0).unwrap();
        let p = ParamSet {
            omega_plus: 4.0,
            omega_minus: 3.0,
            beta_plus: 0.0,
            beta_minus: 0.0,
            alpha_plus: 0.0,
            alpha_minus: 0.0,
            gamma_plus: 0.0,
            gamma_minus: 0.0,
        };
        (spec, p)
    }

    #[test]
    fn counts_round_to_nearest() {
        let (c, err) = returns_to_counts(&[0.01, 0.0, 0.0124], 0.005).unwrap();
        assert_eq!(c, vec![2, 0, 2]);
        assert!((err - 0.0024).abs() < 1e-15);
    }

    #[test]
    fn counts_ties_away_from_zero() {
        let (c, _) = returns_to_counts(&[0.0025, -0.0025, 0.0075], 0.005).unwrap();
        assert_eq!(c, vec![1, -1, 2]);
    }

    #[test]
    fn counts_residual_below_half_delta() {
        let xs: Vec<f64> = (0..500).map(|i| (i as f64 - 250.0) * 1.37e-4).collect();
        let (_, err) = returns_to_counts(&xs, 0.005).unwrap();
        assert!(err <= 0.0025 + 1e-15);
    }

    #[test]
    fn counts_reject_bad_input() {
        assert!(returns_to_counts(&[0.0], 0.0).is_err());
        assert!(returns_to_counts(&[f64::NAN], 0.005).is_err());
    }

    #[test]
    fn single_observation_is_plain_pmf() {
        let (spec, p) = constant_spec();
        let want = skellam_log_pmf(3, &SkellamParams::new(4.0, 3.0).unwrap());
        let got = log_likelihood(&spec, &p, &[3], (4.0, 3.0)).unwrap();
        assert_eq!(got, want);
    }

    #[test]
    fn zero_down_rate_makes_negative_count_impossible() {
        let (spec, p) = constant_spec();
        // First observation sees the (positive, zero) initial pair.
        let got = log_likelihood(&spec, &p, &[-1, 0, 1], (5.0, 0.0)).unwrap();
        assert_eq!(got, f64::NEG_INFINITY);
    }

    #[test]
    fn counts_and_exact_multiple_returns_agree() {
        let spec = ModelSpec::new(Variant::Basic, true, 0.005, 1.0).unwrap();
        let p = ParamSet {
            omega_plus: 0.014,
            omega_minus: 0.011,
            beta_plus: 0.94,
            beta_minus: 0.94,
            alpha_plus: 1000.0,
            alpha_minus: 900.0,
            gamma_plus: 0.0,
            gamma_minus: 0.0,
        };
        let counts: Vec<i64> = vec![2, -1, 0, 3, -2, 1, 0, 0, -1, 2];
        let returns: Vec<f64> = counts.iter().map(|&m| 0.005 * m as f64).collect();
        let (rounded, err) = returns_to_counts(&returns, 0.005).unwrap();
        assert_eq!(rounded, counts);
        assert!(err < 1e-15);
        let a = log_likelihood(&spec, &p, &counts, (4.0, 4.0)).unwrap();
        let b = log_likelihood(&spec, &p, &rounded, (4.0, 4.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn each_observation_lowers_the_total() {
        let spec = ModelSpec::new(Variant::Basic, true, 0.005, 1.0).unwrap();
        let p = ParamSet {
            omega_plus: 0.014,
            omega_minus: 0.011,
            beta_plus: 0.94,
            beta_minus: 0.94,
            alpha_plus: 1000.0,
            alpha_minus: 900.0,
            gamma_plus: 0.0,
            gamma_minus: 0.0,
        };
        let counts: Vec<i64> = vec![1, -2, 0, 4, -1, 0, 2, -3, 0, 1, 5, -4];
        let mut prev = 0.0;
        for n in 1..=counts.len() {
            let ll = log_likelihood(&spec, &p, &counts[..n], (4.0, 4.0)).unwrap();
            assert!(ll <= prev + 1e-12, "ll {ll} after {n} obs, prev {prev}");
            prev = ll;
        }
    }

    /// Composes the per-step convolution oracle with an independently coded
    /// filter trace over a ten-observation fixture.
    #[test]
    fn matches_convolution_oracle_along_filter() {
        use statrs::function::gamma::ln_gamma;

        let spec = ModelSpec::new(Variant::Basic, true, 0.005, 1.0).unwrap();
        let p = ParamSet {
            omega_plus: 0.3,
            omega_minus: 0.2,
            beta_plus: 0.85,
            beta_minus: 0.85,
            alpha_plus: 800.0,
            alpha_minus: 700.0,
            gamma_plus: 0.0,
            gamma_minus: 0.0,
        };
        let counts: Vec<i64> = vec![2, -1, 0, 3, -2, 1, 0, -1, 1, 0];

        // Oracle: per-step Poisson convolution, filter recomputed longhand.
        let pois = |k: i64, l: f64| -> f64 {
            (k as f64 * l.ln() - l - ln_gamma(k as f64 + 1.0)).exp()
        };
        let mut lp = 3.0f64;
        let mut lm = 2.5f64;
        let mut oracle = 0.0f64;
        for &m in &counts {
            let mut prob = 0.0;
            for k in 0..=300i64 {
                if k + m < 0 {
                    continue;
                }
                prob += pois(k + m, lp) * pois(k, lm);
            }
            oracle += prob.ln();
            let eps = 0.005 * m as f64 - 0.005 * (lp - lm);
            let new_lp = 0.3 + 0.85 * lp + 800.0 * eps * eps;
            let new_lm = 0.2 + 0.85 * lm + 700.0 * eps * eps;
            lp = new_lp;
            lm = new_lm;
        }

        let got = log_likelihood(&spec, &p, &counts, (3.0, 2.5)).unwrap();
        assert!((got - oracle).abs() <= 1e-8, "got {got}, oracle {oracle}");
    }
}
