//! Path and ensemble simulation of the intensity model.
//!
//! Per step, the up and down jump counts are independent Poisson draws at
//! rates `lambda_pm(t_{i-1}) * dt`; the return is `delta` times the net
//! count; the intensities then advance by the model recursion using the
//! realized shock. Prices follow `S_i = S_0 exp(delta * C_i)` with `C_i` the
//! cumulative net count, so the price path and the count path are two views
//! of the same integers.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::diagnostics::{conditional_correlation, modified_ljung_box, CorrSpec};
use crate::intensity::{
    self, intensity_step_raw, IntensityPath, ModelSpec, ParamSet, Variant,
};
use crate::skellam::poisson_sample;
use crate::{derive_seed, Error, Result};

/// A simulated latent/observed path plus the implied price series
/// (`prices.len() == n + 1`, `prices[0] == s0`).
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub path: IntensityPath,
    pub prices: Vec<f64>,
}

pub fn simulate_path(
    spec: &ModelSpec,
    p: &ParamSet,
    n: usize,
    lambda0: (f64, f64),
    s0: f64,
    seed: u64,
) -> Result<SimulatedPath> {
    spec.validate()?;
    p.validate(spec)?;
    intensity::validate_lambda0(lambda0)?;
    if n == 0 {
        return Err(Error::Domain("path length must be at least 1".into()));
    }
    if !(s0.is_finite() && s0 > 0.0) {
        return Err(Error::Domain(format!("s0 must be positive, got {s0}")));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let d = spec.delta;
    let d2 = d * d;
    let dt = spec.dt;

    let mut path = IntensityPath {
        lambda_plus: Vec::with_capacity(n + 1),
        lambda_minus: Vec::with_capacity(n + 1),
        eps: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        counts: Vec::with_capacity(n),
        returns: Vec::with_capacity(n),
    };
    let mut prices = Vec::with_capacity(n + 1);
    prices.push(s0);

    let (mut lp, mut lm) = lambda0;
    path.lambda_plus.push(lp);
    path.lambda_minus.push(lm);
    let mut cum: i64 = 0;

    for _ in 0..n {
        let up = poisson_sample(&mut rng, lp * dt);
        let down = poisson_sample(&mut rng, lm * dt);
        let m = up as i64 - down as i64;
        let x = d * m as f64;
        let h = d2 * (lp + lm) * dt;
        let eps = x - d * (lp - lm) * dt;

        cum += m;
        prices.push(s0 * (d * cum as f64).exp());
        path.counts.push(m);
        path.returns.push(x);
        path.h.push(h);
        path.eps.push(eps);

        let next = intensity_step_raw(spec, p, (lp, lm), eps, h.max(f64::MIN_POSITIVE));
        lp = next.0;
        lm = next.1;
        path.lambda_plus.push(lp);
        path.lambda_minus.push(lm);
    }

    Ok(SimulatedPath { path, prices })
}

/// Lean variant for refitting loops: only the count series is produced.
pub(crate) fn simulate_counts(
    spec: &ModelSpec,
    p: &ParamSet,
    n: usize,
    lambda0: (f64, f64),
    seed: u64,
) -> Vec<i64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let d = spec.delta;
    let d2 = d * d;
    let dt = spec.dt;
    let (mut lp, mut lm) = lambda0;
    let mut counts = Vec::with_capacity(n);
    for _ in 0..n {
        let up = poisson_sample(&mut rng, lp * dt);
        let down = poisson_sample(&mut rng, lm * dt);
        let m = up as i64 - down as i64;
        counts.push(m);
        let h = d2 * (lp + lm) * dt;
        let eps = d * m as f64 - d * (lp - lm) * dt;
        let next = intensity_step_raw(spec, p, (lp, lm), eps, h.max(f64::MIN_POSITIVE));
        lp = next.0;
        lm = next.1;
    }
    counts
}

/// A per-path statistic aggregated across an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StatRequest {
    CondCorr { spec: CorrSpec, lag: usize },
    LjungBox { spec: CorrSpec, max_lag: usize },
}

impl StatRequest {
    pub fn label(&self) -> String {
        match self {
            StatRequest::CondCorr { spec, lag } => format!("{} lag {lag}", spec.label()),
            StatRequest::LjungBox { spec, max_lag } => format!("Q_{max_lag} of {}", spec.label()),
        }
    }
}

/// Cross-path mean and standard deviation of one statistic. Paths on which
/// the statistic is unavailable are dropped and counted out of
/// `paths_used`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatSummary {
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    pub paths_used: usize,
    /// Per-path values in path order, for paired comparisons.
    pub values: Vec<Option<f64>>,
}

/// Simulates `n_paths` independent paths (counter-derived seeds) and
/// aggregates the requested statistics. Deterministic for a fixed master
/// seed regardless of scheduling.
pub fn simulate_ensemble(
    spec: &ModelSpec,
    p: &ParamSet,
    n: usize,
    n_paths: usize,
    lambda0: (f64, f64),
    seed: u64,
    requests: &[StatRequest],
) -> Result<Vec<StatSummary>> {
    if n_paths < 2 {
        return Err(Error::Domain("an ensemble needs at least 2 paths".into()));
    }
    spec.validate()?;
    p.validate(spec)?;
    intensity::validate_lambda0(lambda0)?;

    let per_path: Vec<Vec<Option<f64>>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let path_seed = derive_seed(seed, i as u64);
            let sim = simulate_path(spec, p, n, lambda0, 1.0, path_seed)
                .expect("inputs validated above");
            let x = &sim.path.returns;
            requests
                .iter()
                .map(|req| match req {
                    StatRequest::CondCorr { spec, lag } => conditional_correlation(x, *lag, spec)
                        .ok()
                        .and_then(|cc| cc.corr),
                    StatRequest::LjungBox { spec, max_lag } => {
                        modified_ljung_box(x, *max_lag, spec).ok()
                    }
                })
                .collect()
        })
        .collect();

    Ok(requests
        .iter()
        .enumerate()
        .map(|(j, req)| {
            let values: Vec<Option<f64>> = per_path.iter().map(|row| row[j]).collect();
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            let k = present.len();
            let mean = present.iter().sum::<f64>() / k.max(1) as f64;
            let sd = if k > 1 {
                (present.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64)
                    .sqrt()
            } else {
                f64::NAN
            };
            StatSummary {
                label: req.label(),
                mean,
                sd,
                paths_used: k,
                values,
            }
        })
        .collect())
}

/// The built-in GJR ensemble preset: the asymmetric parameter pair used for
/// the replication experiment, jump size 0.005, unit step, intensities
/// started at 5.
pub fn replication_preset() -> (ModelSpec, ParamSet, (f64, f64)) {
    let spec = ModelSpec {
        variant: Variant::Gjr,
        beta_equal: false,
        delta: 0.005,
        dt: 1.0,
    };
    let p = ParamSet {
        omega_plus: 0.0210,
        omega_minus: 0.0167,
        beta_plus: 0.9369,
        beta_minus: 0.9425,
        alpha_plus: 86.99,
        alpha_minus: 38.23,
        gamma_plus: 1899.0,
        gamma_minus: 1702.0,
    };
    (spec, p, (5.0, 5.0))
}

/// The lag set the replication table reports.
pub const REPLICATION_LAGS: [usize; 6] = [1, 2, 3, 5, 10, 20];

/// Statistics for the replication run: the six standard correlation rows at
/// the reference lags, then Q_20 for the two volatility rows.
pub fn replication_requests() -> Vec<StatRequest> {
    let mut reqs = Vec::new();
    for spec in CorrSpec::STANDARD_ROWS {
        for lag in REPLICATION_LAGS {
            reqs.push(StatRequest::CondCorr { spec, lag });
        }
    }
    reqs.push(StatRequest::LjungBox {
        spec: CorrSpec::VOLATILITY_GIVEN_POS,
        max_lag: 20,
    });
    reqs.push(StatRequest::LjungBox {
        spec: CorrSpec::VOLATILITY_GIVEN_NEG,
        max_lag: 20,
    });
    reqs
}
