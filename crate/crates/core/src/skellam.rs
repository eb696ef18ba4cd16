//! Skellam distribution and the modified Bessel function of the first kind,
//! evaluated in the log domain.
//!
//! The pmf of the net count `m = N+ - N-` with independent Poisson components
//! of rates `lambda_plus`, `lambda_minus` is
//!
//! ```text
//! f(m) = exp(-l+ - l-) * (l+/l-)^(m/2) * I_|m|(2 sqrt(l+ l-))
//! ```
//!
//! Everything here works with per-interval rates; time-step scaling is the
//! caller's business.

use rand::Rng;
use statrs::function::gamma::ln_gamma;
use std::sync::OnceLock;

use crate::{Error, Result};

/// Rates below this are treated as exactly zero when selecting the pmf
/// branch, avoiding `ln` of a denormal-scale intensity.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Series terms this many natural-log units below the running total are
/// dropped.
const TERM_CUTOFF_LOG: f64 = 40.0;

const LN_FACT_TABLE_LEN: usize = 8192;

fn ln_fact_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..LN_FACT_TABLE_LEN)
            .map(|k| ln_gamma(k as f64 + 1.0))
            .collect()
    })
}

/// ln(k!)
#[inline]
fn ln_factorial(k: usize) -> f64 {
    let table = ln_fact_table();
    if k < table.len() {
        table[k]
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Up/down Poisson rates for one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkellamParams {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl SkellamParams {
    /// Rates must be finite and non-negative; zero is allowed.
    pub fn new(lambda_plus: f64, lambda_minus: f64) -> Result<Self> {
        if !lambda_plus.is_finite() || !lambda_minus.is_finite() {
            return Err(Error::Domain(format!(
                "skellam rates must be finite, got ({lambda_plus}, {lambda_minus})"
            )));
        }
        if lambda_plus < 0.0 || lambda_minus < 0.0 {
            return Err(Error::Domain(format!(
                "skellam rates must be non-negative, got ({lambda_plus}, {lambda_minus})"
            )));
        }
        Ok(Self {
            lambda_plus,
            lambda_minus,
        })
    }
}

/// ln I_order(x) for integer order >= 0 and x >= 0.
///
/// Returns exactly `-inf` when `I_order(x) = 0`, i.e. `x = 0` with
/// `order >= 1`.
pub fn log_bessel_i(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!(
            "bessel argument must be finite, got {x}"
        )));
    }
    if x < 0.0 {
        return Err(Error::Domain(format!(
            "bessel argument must be non-negative, got {x}"
        )));
    }
    Ok(log_bessel_i_raw(order, x))
}

/// Power-series evaluation of ln I_nu(x), carried relative to the largest
/// term so neither the terms nor the sum can overflow. Equivalent to a
/// running log-sum-exp with the max factored out; works up to x ~ 1e4 and
/// beyond where I_nu(x) itself leaves double range.
pub(crate) fn log_bessel_i_raw(order: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let nu = order as f64;
    let half = 0.5 * x;
    let q = half * half;

    // Index of the largest series term t_k = q^k (x/2)^nu / (k! (k+nu)!),
    // from t_{k+1}/t_k = q / ((k+1)(k+nu+1)) crossing 1.
    let k_peak_f = 0.5 * (-(nu + 2.0) + (nu * nu + x * x).sqrt());
    let k_peak = if k_peak_f > 0.0 { k_peak_f.floor() as usize } else { 0 };

    let ord = order as usize;
    let ln_peak =
        (2.0 * k_peak as f64 + nu) * half.ln() - ln_factorial(k_peak) - ln_factorial(k_peak + ord);

    let cutoff = (-TERM_CUTOFF_LOG).exp();
    let mut sum = 1.0_f64;

    // Upward from the peak.
    let mut term = 1.0_f64;
    let mut k = k_peak;
    loop {
        let next = term * q / (((k + 1) as f64) * ((k + 1 + ord) as f64));
        if next < sum * cutoff {
            break;
        }
        sum += next;
        term = next;
        k += 1;
    }

    // Downward from the peak.
    term = 1.0;
    k = k_peak;
    while k > 0 {
        let prev = term * (k as f64) * ((k + ord) as f64) / q;
        if prev < sum * cutoff {
            break;
        }
        sum += prev;
        term = prev;
        k -= 1;
    }

    ln_peak + sum.ln()
}

/// ln P(N = k) for N ~ Poisson(lambda), lambda > 0.
#[inline]
pub(crate) fn poisson_log_pmf(k: u64, lambda: f64) -> f64 {
    k as f64 * lambda.ln() - lambda - ln_factorial(k as usize)
}

/// ln f(m | p), fully in the log domain; `-inf` is a legitimate value for
/// observations the parameters make impossible.
pub fn skellam_log_pmf(m: i64, p: &SkellamParams) -> f64 {
    skellam_log_pmf_rates(m, p.lambda_plus, p.lambda_minus)
}

#[inline]
pub(crate) fn skellam_log_pmf_rates(m: i64, lambda_plus: f64, lambda_minus: f64) -> f64 {
    let zero_plus = lambda_plus < LAMBDA_FLOOR;
    let zero_minus = lambda_minus < LAMBDA_FLOOR;
    match (zero_plus, zero_minus) {
        (true, true) => {
            if m == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
        (false, true) => {
            if m >= 0 {
                poisson_log_pmf(m as u64, lambda_plus)
            } else {
                f64::NEG_INFINITY
            }
        }
        (true, false) => {
            if m <= 0 {
                poisson_log_pmf(m.unsigned_abs(), lambda_minus)
            } else {
                f64::NEG_INFINITY
            }
        }
        (false, false) => {
            let x = 2.0 * (lambda_plus * lambda_minus).sqrt();
            let order = m.unsigned_abs().min(u32::MAX as u64) as u32;
            -(lambda_plus + lambda_minus)
                + 0.5 * (m as f64) * (lambda_plus.ln() - lambda_minus.ln())
                + log_bessel_i_raw(order, x)
        }
    }
}

/// Exact Poisson draw by sequential CDF inversion; intended for small means.
fn poisson_inversion<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut cdf = p;
    // The residual mass beyond the cap is far below 2^-64.
    let cap = (lambda + 40.0 * lambda.sqrt() + 50.0) as u64;
    while u > cdf && k < cap {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

/// Exact Poisson draw for any non-negative rate. Inversion below 30; larger
/// rates are split into independent sub-Poisson draws of mean < 30 and
/// summed, which is again exact.
pub(crate) fn poisson_sample<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> u64 {
    if lambda < LAMBDA_FLOOR {
        return 0;
    }
    if lambda < 30.0 {
        return poisson_inversion(rng, lambda);
    }
    let chunks = (lambda / 29.0).ceil() as u64;
    let sub = lambda / chunks as f64;
    (0..chunks).map(|_| poisson_inversion(rng, sub)).sum()
}

/// Draws `N+ - N-` with independent Poisson components.
pub fn skellam_sample<R: Rng + ?Sized>(rng: &mut R, p: &SkellamParams) -> i64 {
    let up = poisson_sample(rng, p.lambda_plus);
    let down = poisson_sample(rng, p.lambda_minus);
    up as i64 - down as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    /// Brute-force Skellam pmf as a truncated Poisson convolution:
    /// P(m) = sum_k Pois(k + m; l+) Pois(k; l-), k = 0..=truncation.
    pub(crate) fn convolution_pmf(m: i64, lp: f64, lm: f64, truncation: u64) -> f64 {
        let mut total = 0.0;
        for k in 0..=truncation {
            let k_plus = k as i64 + m;
            if k_plus < 0 {
                continue;
            }
            let lt = poisson_log_pmf(k_plus as u64, lp.max(1e-300))
                + poisson_log_pmf(k, lm.max(1e-300));
            total += lt.exp();
        }
        total
    }

    #[test]
    fn bessel_order_zero_at_zero() {
        assert_eq!(log_bessel_i(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bessel_positive_order_at_zero() {
        assert_eq!(log_bessel_i(1, 0.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_bessel_i(7, 0.0).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn bessel_rejects_bad_input() {
        assert!(log_bessel_i(0, -1.0).is_err());
        assert!(log_bessel_i(0, f64::NAN).is_err());
        assert!(log_bessel_i(0, f64::INFINITY).is_err());
    }

    /// Exact-rational series oracle: for x = 2 the term at index k is
    /// 1/(k! (k+order)!), so the partial sum is an exact BigRational.
    #[test]
    fn bessel_matches_rational_series_oracle() {
        use num_bigint::BigInt;
        use num_rational::BigRational;
        use num_traits::{One, ToPrimitive, Zero};

        let order = 1usize;
        let mut sum = BigRational::zero();
        let mut k_fact = BigInt::one();
        // (k + order)! built up from order! by one factor per step.
        let mut k_ord_fact: BigInt = (1..=order as u64).map(BigInt::from).product::<BigInt>().max(BigInt::one());
        for k in 0..60usize {
            if k > 0 {
                k_fact *= BigInt::from(k as u64);
                k_ord_fact *= BigInt::from((k + order) as u64);
            }
            sum += BigRational::new(BigInt::one(), &k_fact * &k_ord_fact);
        }
        let expected = sum.to_f64().unwrap().ln();
        let got = log_bessel_i(order as u32, 2.0).unwrap();
        assert!(
            (got - expected).abs() < 1e-13,
            "got {got}, oracle {expected}"
        );
    }

    #[test]
    fn bessel_large_argument_finite() {
        // I_0(1e4) ~ exp(1e4)/sqrt(2 pi 1e4); the log must come out near 1e4.
        let v = log_bessel_i(0, 1e4).unwrap();
        assert!(v > 9.0e3 && v < 1.0e4, "ln I_0(1e4) = {v}");
        let v500 = log_bessel_i(500, 1e4).unwrap();
        assert!(v500.is_finite() && v500 < v);
    }

    #[test]
    fn pmf_empty_process() {
        let p = SkellamParams::new(0.0, 0.0).unwrap();
        assert_eq!(skellam_log_pmf(0, &p), 0.0);
        assert_eq!(skellam_log_pmf(1, &p), f64::NEG_INFINITY);
        assert_eq!(skellam_log_pmf(-3, &p), f64::NEG_INFINITY);
    }

    #[test]
    fn pmf_poisson_branches() {
        let p = SkellamParams::new(3.0, 0.0).unwrap();
        assert_eq!(skellam_log_pmf(-1, &p), f64::NEG_INFINITY);
        let expect = 2.0 * 3.0_f64.ln() - 3.0 - 2.0_f64.ln();
        assert!((skellam_log_pmf(2, &p) - expect).abs() < 1e-14);

        let q = SkellamParams::new(0.0, 3.0).unwrap();
        assert_eq!(skellam_log_pmf(1, &q), f64::NEG_INFINITY);
        assert!((skellam_log_pmf(-2, &q) - expect).abs() < 1e-14);
    }

    #[test]
    fn pmf_matches_convolution_oracle_spot() {
        let p = SkellamParams::new(3.0, 2.0).unwrap();
        let oracle = convolution_pmf(2, 3.0, 2.0, 200).ln();
        let got = skellam_log_pmf(2, &p);
        assert!((got - oracle).abs() < 1e-12, "got {got}, oracle {oracle}");
    }

    #[test]
    fn pmf_symmetric_rates_even_in_m() {
        let p = SkellamParams::new(4.2, 4.2).unwrap();
        for m in 0..20i64 {
            assert_eq!(skellam_log_pmf(m, &p), skellam_log_pmf(-m, &p));
        }
    }

    #[test]
    fn params_reject_invalid() {
        assert!(SkellamParams::new(-1.0, 0.0).is_err());
        assert!(SkellamParams::new(1.0, f64::NAN).is_err());
        assert!(SkellamParams::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn normalization_and_moments() {
        // Sum over a wide window must reach 1, with mean l+ - l- and
        // variance l+ + l-.
        for &(lp, lm) in &[(0.1, 0.1), (1.0, 2.0), (5.0, 3.0), (20.0, 30.0), (30.0, 0.5)] {
            let p = SkellamParams::new(lp, lm).unwrap();
            let total = lp + lm;
            let half_width = (total.ceil() + 40.0 * (total + 1.0).sqrt()) as i64;
            let mut mass = 0.0;
            let mut mean = 0.0;
            let mut second = 0.0;
            for m in -half_width..=half_width {
                let w = skellam_log_pmf(m, &p).exp();
                mass += w;
                mean += w * m as f64;
                second += w * (m as f64) * (m as f64);
            }
            assert!((mass - 1.0).abs() <= 1e-8, "mass {mass} at ({lp},{lm})");
            assert!((mean - (lp - lm)).abs() <= 1e-6, "mean {mean} at ({lp},{lm})");
            let var = second - mean * mean;
            assert!((var - total).abs() <= 1e-6, "var {var} at ({lp},{lm})");
        }
    }

    #[test]
    fn sample_degenerate_is_zero() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let p = SkellamParams::new(0.0, 0.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(skellam_sample(&mut rng, &p), 0);
        }
    }

    #[test]
    fn sample_mean_symmetric() {
        let mut rng = ChaCha12Rng::seed_from_u64(20260809);
        let p = SkellamParams::new(5.0, 5.0).unwrap();
        let n = 1_000_000usize;
        let mut sum = 0i64;
        for _ in 0..n {
            sum += skellam_sample(&mut rng, &p);
        }
        let mean = sum as f64 / n as f64;
        let tol = 4.0 * (10.0 / n as f64).sqrt();
        assert!(mean.abs() <= tol, "mean {mean} vs tol {tol}");
    }

    #[test]
    fn sample_large_rate_uses_chunks() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let p = SkellamParams::new(250.0, 50.0).unwrap();
        let n = 200_000usize;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let d = skellam_sample(&mut rng, &p) as f64;
            sum += d;
            sq += d * d;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!((mean - 200.0).abs() < 4.0 * (300.0f64 / n as f64).sqrt());
        assert!((var / 300.0 - 1.0).abs() < 0.05, "var {var}");
    }

    /// Chi-square goodness of fit of sampling against the analytic pmf.
    #[test]
    fn sample_matches_pmf_chi_square() {
        let mut rng = ChaCha12Rng::seed_from_u64(31337);
        let p = SkellamParams::new(3.0, 2.0).unwrap();
        let n = 1_000_000usize;

        let lo = -20i64;
        let hi = 25i64;
        let mut observed = vec![0u64; (hi - lo + 1) as usize];
        for _ in 0..n {
            let m = skellam_sample(&mut rng, &p).clamp(lo, hi);
            observed[(m - lo) as usize] += 1;
        }

        // Pool cells so every expected count is >= 5.
        let probs: Vec<f64> = (lo..=hi)
            .map(|m| {
                if m == lo {
                    // lower tail mass
                    (-200..=lo).map(|k| skellam_log_pmf(k, &p).exp()).sum()
                } else if m == hi {
                    (hi..=200).map(|k| skellam_log_pmf(k, &p).exp()).sum()
                } else {
                    skellam_log_pmf(m, &p).exp()
                }
            })
            .collect();

        let mut chi2 = 0.0;
        let mut df = 0usize;
        let mut pooled_obs = 0.0;
        let mut pooled_exp = 0.0;
        for (o, pr) in observed.iter().zip(probs.iter()) {
            pooled_obs += *o as f64;
            pooled_exp += pr * n as f64;
            if pooled_exp >= 5.0 {
                let d = pooled_obs - pooled_exp;
                chi2 += d * d / pooled_exp;
                df += 1;
                pooled_obs = 0.0;
                pooled_exp = 0.0;
            }
        }
        if pooled_exp > 0.0 {
            let d = pooled_obs - pooled_exp;
            chi2 += d * d / pooled_exp;
            df += 1;
        }
        let df = (df - 1) as f64;

        // Wilson-Hilferty 99.9% quantile of chi-square(df).
        let z = 3.090_232_306_167_813;
        let q = df * (1.0 - 2.0 / (9.0 * df) + z * (2.0 / (9.0 * df)).sqrt()).powi(3);
        assert!(chi2 < q, "chi2 {chi2} exceeds q0.999 {q} (df {df})");
    }

    proptest! {
        /// Swap symmetry holds bit-for-bit: f(m | a, b) = f(-m | b, a).
        #[test]
        fn prop_swap_symmetry(
            m in -60i64..60,
            a in 0.0f64..50.0,
            b in 0.0f64..50.0,
        ) {
            let p = SkellamParams::new(a, b).unwrap();
            let q = SkellamParams::new(b, a).unwrap();
            let left = skellam_log_pmf(m, &p);
            let right = skellam_log_pmf(-m, &q);
            prop_assert!(left == right || (left.is_nan() && right.is_nan()));
        }

        /// For a fixed order, ln I_order is nondecreasing in x.
        #[test]
        fn prop_bessel_monotone_in_x(
            order in 0u32..60,
            x in 0.0f64..500.0,
            bump in 1e-6f64..10.0,
        ) {
            let lo = log_bessel_i(order, x).unwrap();
            let hi = log_bessel_i(order, x + bump).unwrap();
            prop_assert!(hi >= lo - 1e-12, "order {} x {} lo {} hi {}", order, x, lo, hi);
        }
    }
}
