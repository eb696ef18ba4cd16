//! Gaussian ARMA(1,1)-GJR-GARCH reference model.
//!
//! Mean equation `x_i = c + ar1 x_{i-1} + e_i + ma1 e_{i-1}`, variance
//! `s2_i = omega + beta s2_{i-1} + (alpha + gamma_lev I_{i-1}) e_{i-1}^2`
//! with `I = 1` on negative residuals. Pre-sample values are `x_0 = 0`,
//! `e_0 = 0`, `s2_0 = sigma0_sq`, so the first filtered variance is
//! `omega + beta sigma0_sq`. This model exists as a comparison benchmark for
//! inferred conditional moments, not as production GARCH tooling.

use serde::{Deserialize, Serialize};

use crate::optim::{self, SimplexOptions, PENALTY};
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GjrGarchParams {
    pub c: f64,
    pub ar1: f64,
    pub ma1: f64,
    pub omega: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gamma_lev: f64,
}

impl GjrGarchParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c", self.c),
            ("ar1", self.ar1),
            ("ma1", self.ma1),
            ("omega", self.omega),
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("gamma_lev", self.gamma_lev),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if self.omega <= 0.0 {
            return Err(Error::Domain("omega must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Domain(format!(
                "beta must lie in [0, 1), got {}",
                self.beta
            )));
        }
        if self.alpha < 0.0 {
            return Err(Error::Domain("alpha must be non-negative".into()));
        }
        if self.alpha + self.gamma_lev < 0.0 {
            return Err(Error::Domain("alpha + gamma_lev must be non-negative".into()));
        }
        Ok(())
    }

    /// `alpha + gamma_lev/2 + beta`; stationary fits keep this below 1.
    pub fn persistence(&self) -> f64 {
        self.alpha + 0.5 * self.gamma_lev + self.beta
    }
}

/// Runs the ARMA residual and GJR variance recursions over a return series.
/// Returns the residual series and conditional-variance series, both the
/// length of the input.
pub fn gjr_variance_filter(
    p: &GjrGarchParams,
    returns: &[f64],
    sigma0_sq: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    p.validate()?;
    if !(sigma0_sq.is_finite() && sigma0_sq > 0.0) {
        return Err(Error::Domain(format!(
            "sigma0_sq must be positive, got {sigma0_sq}"
        )));
    }
    if let Some(bad) = returns.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "returns must be finite; offending index {bad}"
        )));
    }
    Ok(gjr_variance_filter_raw(p, returns, sigma0_sq))
}

fn gjr_variance_filter_raw(
    p: &GjrGarchParams,
    returns: &[f64],
    sigma0_sq: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = returns.len();
    let mut eps = Vec::with_capacity(n);
    let mut var = Vec::with_capacity(n);
    let mut prev_x = 0.0;
    let mut prev_eps = 0.0;
    let mut prev_var = sigma0_sq;
    for &x in returns {
        let ind = if prev_eps < 0.0 { 1.0 } else { 0.0 };
        let s2 = (p.omega
            + p.beta * prev_var
            + (p.alpha + p.gamma_lev * ind) * prev_eps * prev_eps)
            .max(1e-300);
        let e = x - p.c - p.ar1 * prev_x - p.ma1 * prev_eps;
        eps.push(e);
        var.push(s2);
        prev_x = x;
        prev_eps = e;
        prev_var = s2;
    }
    (eps, var)
}

/// One-step conditional means `c + ar1 x_{i-1} + ma1 e_{i-1}` along the
/// filtered path.
pub fn conditional_mean_series(p: &GjrGarchParams, returns: &[f64]) -> Result<Vec<f64>> {
    let (eps, _) = gjr_variance_filter(p, returns, 1e-4)?;
    let mut out = Vec::with_capacity(returns.len());
    let mut prev_x = 0.0;
    let mut prev_eps = 0.0;
    for i in 0..returns.len() {
        out.push(p.c + p.ar1 * prev_x + p.ma1 * prev_eps);
        prev_x = returns[i];
        prev_eps = eps[i];
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GjrGarchFit {
    pub params: GjrGarchParams,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the fitted persistence sits below 1.
    pub stationary: bool,
    pub sigma0_sq: f64,
}

fn gaussian_loglik(p: &GjrGarchParams, returns: &[f64], sigma0_sq: f64) -> f64 {
    let (eps, var) = gjr_variance_filter_raw(p, returns, sigma0_sq);
    let mut ll = 0.0;
    for (e, s2) in eps.iter().zip(&var) {
        ll += -0.5 * (LN_2PI + s2.ln() + e * e / s2);
    }
    ll
}

/// Gaussian MLE of the reference model via the same simplex machinery the
/// intensity fits use. The variance recursion starts at the sample variance.
pub fn fit_gjr_garch_gaussian(returns: &[f64]) -> Result<GjrGarchFit> {
    if returns.len() < 100 {
        return Err(Error::Domain(format!(
            "need at least 100 observations to fit, got {}",
            returns.len()
        )));
    }
    if let Some(bad) = returns.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "returns must be finite; offending index {bad}"
        )));
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sigma0_sq = var.max(1e-12);

    // Coordinates: c, ar1, ma1, ln omega, logit beta, slog alpha, slog(a+g).
    // Fitting alpha and alpha+gamma_lev keeps both non-negative without a
    // joint constraint.
    let pack = |p: &GjrGarchParams| -> Vec<f64> {
        vec![
            p.c,
            p.ar1,
            p.ma1,
            p.omega.ln(),
            (p.beta / (1.0 - p.beta)).ln(),
            (p.alpha + 1e-12).ln(),
            (p.alpha + p.gamma_lev + 1e-12).ln(),
        ]
    };
    let unpack = |v: &[f64]| -> GjrGarchParams {
        let alpha = (v[5].exp() - 1e-12).max(0.0);
        let alpha_plus_gamma = (v[6].exp() - 1e-12).max(0.0);
        GjrGarchParams {
            c: v[0],
            ar1: v[1],
            ma1: v[2],
            omega: v[3].exp(),
            beta: 1.0 / (1.0 + (-v[4]).exp()),
            alpha,
            gamma_lev: alpha_plus_gamma - alpha,
        }
    };

    let start = GjrGarchParams {
        c: mean,
        ar1: 0.0,
        ma1: 0.0,
        omega: (sigma0_sq * 0.05).max(1e-12),
        beta: 0.9,
        alpha: 0.03,
        gamma_lev: 0.05,
    };

    let objective = |v: &[f64]| -> f64 {
        let p = unpack(v);
        if p.validate().is_err() || p.ar1.abs() >= 1.0 || p.ma1.abs() >= 1.0 {
            return PENALTY;
        }
        let ll = gaussian_loglik(&p, returns, sigma0_sq);
        if ll.is_finite() {
            -ll
        } else {
            PENALTY
        }
    };

    let out = optim::minimize(objective, &pack(&start), &SimplexOptions::default());
    if out.fx >= PENALTY {
        return Err(Error::Estimation("no admissible baseline fit found".into()));
    }
    let params = unpack(&out.x);
    let loglik = gaussian_loglik(&params, returns, sigma0_sq);
    Ok(GjrGarchFit {
        params,
        loglik,
        iterations: out.evals,
        converged: out.converged,
        stationary: params.persistence() < 1.0,
        sigma0_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn reference_params() -> GjrGarchParams {
        GjrGarchParams {
            c: 2.42e-4,
            ar1: -0.0183,
            ma1: 0.0142,
            omega: 8.82e-7,
            beta: 0.9412,
            alpha: 0.0014,
            gamma_lev: 0.0963,
        }
    }

    fn simulate_gjr(p: &GjrGarchParams, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut normal = move || {
            let u1: f64 = rng.random::<f64>().max(1e-12);
            let u2: f64 = rng.random();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let mut xs = Vec::with_capacity(n);
        let mut prev_x = 0.0;
        let mut prev_eps = 0.0;
        let mut prev_var = p.omega / (1.0 - p.persistence()).max(1e-6);
        for _ in 0..n {
            let ind = if prev_eps < 0.0 { 1.0 } else { 0.0 };
            let s2 = p.omega
                + p.beta * prev_var
                + (p.alpha + p.gamma_lev * ind) * prev_eps * prev_eps;
            let e = s2.sqrt() * normal();
            let x = p.c + p.ar1 * prev_x + e + p.ma1 * prev_eps;
            xs.push(x);
            prev_x = x;
            prev_eps = e;
            prev_var = s2;
        }
        xs
    }

    #[test]
    fn geometric_recursion_without_shock_terms() {
        let p = GjrGarchParams {
            c: 0.0,
            ar1: 0.0,
            ma1: 0.0,
            omega: 0.5,
            beta: 0.8,
            alpha: 0.0,
            gamma_lev: 0.0,
        };
        let s0 = 2.0;
        let returns = vec![0.0; 6];
        let (_, var) = gjr_variance_filter(&p, &returns, s0).unwrap();
        for (i, v) in var.iter().enumerate() {
            let k = (i + 1) as i32;
            let want = 0.5 * (1.0 - 0.8f64.powi(k)) / (1.0 - 0.8) + 0.8f64.powi(k) * s0;
            assert!((v - want).abs() < 1e-12, "step {i}: {v} vs {want}");
        }
    }

    /// Five-step trace with the reference parameters against longhand
    /// recomputation.
    #[test]
    fn five_step_hand_trace() {
        let p = reference_params();
        let xs = [0.004, -0.007, 0.002, 0.011, -0.003];
        let s0 = 1.2e-4;
        let (eps, var) = gjr_variance_filter(&p, &xs, s0).unwrap();

        let mut prev_x = 0.0;
        let mut prev_e = 0.0;
        let mut prev_v = s0;
        for i in 0..5 {
            let ind = if prev_e < 0.0 { 1.0 } else { 0.0 };
            let v = p.omega + p.beta * prev_v + (p.alpha + p.gamma_lev * ind) * prev_e * prev_e;
            let e = xs[i] - p.c - p.ar1 * prev_x - p.ma1 * prev_e;
            assert!((var[i] - v).abs() <= 1e-18 + 1e-12 * v, "var step {i}");
            assert!((eps[i] - e).abs() <= 1e-15, "eps step {i}");
            prev_x = xs[i];
            prev_e = e;
            prev_v = v;
        }
    }

    #[test]
    fn zero_gamma_reduces_to_plain_garch() {
        let p = GjrGarchParams {
            gamma_lev: 0.0,
            ..reference_params()
        };
        let xs = [0.004, -0.007, 0.002, 0.011, -0.003, 0.001];
        let (eps_a, var_a) = gjr_variance_filter(&p, &xs, 1e-4).unwrap();
        // Plain GARCH recomputation: indicator multiplies zero.
        let mut prev_e = 0.0;
        let mut prev_v = 1e-4;
        let mut prev_x = 0.0;
        for i in 0..xs.len() {
            let v = p.omega + p.beta * prev_v + p.alpha * prev_e * prev_e;
            let e = xs[i] - p.c - p.ar1 * prev_x - p.ma1 * prev_e;
            assert_eq!(var_a[i], v.max(1e-300));
            assert_eq!(eps_a[i], e);
            prev_e = e;
            prev_v = v;
            prev_x = xs[i];
        }
    }

    #[test]
    fn filter_deterministic_and_loglik_recomputable() {
        let p = reference_params();
        let xs = simulate_gjr(&p, 300, 8);
        let a = gjr_variance_filter(&p, &xs, 1e-4).unwrap();
        let b = gjr_variance_filter(&p, &xs, 1e-4).unwrap();
        assert_eq!(a, b);

        let fit_input = simulate_gjr(&p, 500, 9);
        let fit = fit_gjr_garch_gaussian(&fit_input).unwrap();
        let again = gaussian_loglik(&fit.params, &fit_input, fit.sigma0_sq);
        assert_eq!(fit.loglik, again);
    }

    #[test]
    fn recovery_on_simulated_data() {
        let truth = reference_params();
        let xs = simulate_gjr(&truth, 5000, 4242);
        let fit = fit_gjr_garch_gaussian(&xs).unwrap();
        assert!(fit.stationary);
        assert!(
            (fit.params.beta - truth.beta).abs() / truth.beta < 0.15,
            "beta {} vs {}",
            fit.params.beta,
            truth.beta
        );
        let eff = fit.params.alpha + 0.5 * fit.params.gamma_lev;
        let eff_truth = truth.alpha + 0.5 * truth.gamma_lev;
        assert!(
            (eff - eff_truth).abs() / eff_truth < 0.15,
            "alpha + gamma/2 {eff} vs {eff_truth}"
        );
    }

    #[test]
    fn constant_variance_data_yields_flat_fit() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let sigma = 0.01f64;
        let xs: Vec<f64> = (0..4000)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect();
        let fit = fit_gjr_garch_gaussian(&xs).unwrap();
        let eff = fit.params.alpha + 0.5 * fit.params.gamma_lev;
        assert!(eff < 0.03, "shock load {eff}");
        let implied = fit.params.omega / (1.0 - fit.params.persistence());
        assert!(
            (implied / (sigma * sigma) - 1.0).abs() < 0.10,
            "implied variance {implied}"
        );
    }
}
