//! Maximum-likelihood fitting with constrained parameter transforms,
//! parametric-bootstrap standard errors, and the up/down shock-coefficient
//! equality test.
//!
//! The optimizer works in an unconstrained space: omegas through logs,
//! betas through logits, alphas through a shifted log that lets them reach
//! zero, gammas through the shifted log when the variant requires them
//! non-negative (GJR) and the identity otherwise. Equality constraints and
//! frozen coordinates shrink the space rather than penalize it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::intensity::{
    default_lambda0, normalize_params, ModelSpec, NormalizedParams, ParamSet, Variant,
};
use crate::likelihood::{log_likelihood, log_likelihood_raw, returns_to_counts};
use crate::optim::{self, SimplexOptions, PENALTY};
use crate::simulate::simulate_counts;
use crate::{derive_seed, Error, Result};

/// Lets alpha-style coordinates reach zero through the log transform.
const SHIFTED_LOG_FLOOR: f64 = 1e-12;

/// Optional estimation-time restrictions on top of a `ModelSpec`.
///
/// `beta_equal` lives on the spec; the equality flags here implement the
/// further-pooled model variants, and the freeze fields pin coordinates
/// (e.g. a constant model freezes beta and alpha at zero).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub alpha_equal: bool,
    pub gamma_equal: bool,
    pub freeze_beta: Option<f64>,
    pub freeze_alpha: Option<f64>,
    pub freeze_gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    OmegaPlus,
    OmegaMinus,
    BetaShared,
    BetaPlus,
    BetaMinus,
    AlphaShared,
    AlphaPlus,
    AlphaMinus,
    GammaShared,
    GammaPlus,
    GammaMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scale {
    Log,
    Logit,
    ShiftedLog,
    Identity,
}

/// Maps the free coordinates of a constrained model onto a flat vector.
#[derive(Debug, Clone)]
pub(crate) struct ParamLayout {
    constraints: Constraints,
    coords: Vec<(Field, Scale)>,
}

impl ParamLayout {
    pub(crate) fn new(spec: &ModelSpec, constraints: &Constraints) -> ParamLayout {
        let mut coords = vec![
            (Field::OmegaPlus, Scale::Log),
            (Field::OmegaMinus, Scale::Log),
        ];
        if constraints.freeze_beta.is_none() {
            if spec.beta_equal {
                coords.push((Field::BetaShared, Scale::Logit));
            } else {
                coords.push((Field::BetaPlus, Scale::Logit));
                coords.push((Field::BetaMinus, Scale::Logit));
            }
        }
        if constraints.freeze_alpha.is_none() {
            if constraints.alpha_equal {
                coords.push((Field::AlphaShared, Scale::ShiftedLog));
            } else {
                coords.push((Field::AlphaPlus, Scale::ShiftedLog));
                coords.push((Field::AlphaMinus, Scale::ShiftedLog));
            }
        }
        if spec.variant.uses_gamma() && constraints.freeze_gamma.is_none() {
            let scale = if spec.variant.gamma_nonnegative() {
                Scale::ShiftedLog
            } else {
                Scale::Identity
            };
            if constraints.gamma_equal {
                coords.push((Field::GammaShared, scale));
            } else {
                coords.push((Field::GammaPlus, scale));
                coords.push((Field::GammaMinus, scale));
            }
        }
        ParamLayout {
            constraints: *constraints,
            coords,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.coords.len()
    }

    pub(crate) fn names(&self) -> Vec<&'static str> {
        self.coords
            .iter()
            .map(|(f, _)| match f {
                Field::OmegaPlus => "omega_plus",
                Field::OmegaMinus => "omega_minus",
                Field::BetaShared => "beta",
                Field::BetaPlus => "beta_plus",
                Field::BetaMinus => "beta_minus",
                Field::AlphaShared => "alpha",
                Field::AlphaPlus => "alpha_plus",
                Field::AlphaMinus => "alpha_minus",
                Field::GammaShared => "gamma",
                Field::GammaPlus => "gamma_plus",
                Field::GammaMinus => "gamma_minus",
            })
            .collect()
    }

    fn read(&self, p: &ParamSet, field: Field) -> Result<f64> {
        let same = |a: f64, b: f64, what: &str| {
            if a == b {
                Ok(a)
            } else {
                Err(Error::Domain(format!(
                    "{what} constrained equal but differ: {a} vs {b}"
                )))
            }
        };
        match field {
            Field::OmegaPlus => Ok(p.omega_plus),
            Field::OmegaMinus => Ok(p.omega_minus),
            Field::BetaShared => same(p.beta_plus, p.beta_minus, "betas"),
            Field::BetaPlus => Ok(p.beta_plus),
            Field::BetaMinus => Ok(p.beta_minus),
            Field::AlphaShared => same(p.alpha_plus, p.alpha_minus, "alphas"),
            Field::AlphaPlus => Ok(p.alpha_plus),
            Field::AlphaMinus => Ok(p.alpha_minus),
            Field::GammaShared => same(p.gamma_plus, p.gamma_minus, "gammas"),
            Field::GammaPlus => Ok(p.gamma_plus),
            Field::GammaMinus => Ok(p.gamma_minus),
        }
    }

    fn forward(v: f64, scale: Scale) -> Result<f64> {
        match scale {
            Scale::Log => {
                if v > 0.0 {
                    Ok(v.ln())
                } else {
                    Err(Error::Domain(format!("log-scale coordinate needs v > 0, got {v}")))
                }
            }
            Scale::Logit => {
                if v > 0.0 && v < 1.0 {
                    Ok((v / (1.0 - v)).ln())
                } else {
                    Err(Error::Domain(format!(
                        "logit-scale coordinate needs v in (0, 1), got {v}"
                    )))
                }
            }
            Scale::ShiftedLog => {
                if v >= 0.0 {
                    Ok((v + SHIFTED_LOG_FLOOR).ln())
                } else {
                    Err(Error::Domain(format!(
                        "shifted-log coordinate needs v >= 0, got {v}"
                    )))
                }
            }
            Scale::Identity => Ok(v),
        }
    }

    fn backward(v: f64, scale: Scale) -> f64 {
        match scale {
            Scale::Log => v.exp(),
            Scale::Logit => 1.0 / (1.0 + (-v).exp()),
            Scale::ShiftedLog => (v.exp() - SHIFTED_LOG_FLOOR).max(0.0),
            Scale::Identity => v,
        }
    }

    pub(crate) fn pack(&self, p: &ParamSet) -> Result<Vec<f64>> {
        self.coords
            .iter()
            .map(|&(f, s)| Self::forward(self.read(p, f)?, s))
            .collect()
    }

    pub(crate) fn unpack(&self, v: &[f64]) -> ParamSet {
        debug_assert_eq!(v.len(), self.coords.len());
        let mut p = ParamSet {
            omega_plus: f64::NAN,
            omega_minus: f64::NAN,
            beta_plus: self.constraints.freeze_beta.unwrap_or(f64::NAN),
            beta_minus: self.constraints.freeze_beta.unwrap_or(f64::NAN),
            alpha_plus: self.constraints.freeze_alpha.unwrap_or(f64::NAN),
            alpha_minus: self.constraints.freeze_alpha.unwrap_or(f64::NAN),
            gamma_plus: self.constraints.freeze_gamma.unwrap_or(0.0),
            gamma_minus: self.constraints.freeze_gamma.unwrap_or(0.0),
        };
        for (&(field, scale), &x) in self.coords.iter().zip(v) {
            let val = Self::backward(x, scale);
            match field {
                Field::OmegaPlus => p.omega_plus = val,
                Field::OmegaMinus => p.omega_minus = val,
                Field::BetaShared => {
                    p.beta_plus = val;
                    p.beta_minus = val;
                }
                Field::BetaPlus => p.beta_plus = val,
                Field::BetaMinus => p.beta_minus = val,
                Field::AlphaShared => {
                    p.alpha_plus = val;
                    p.alpha_minus = val;
                }
                Field::AlphaPlus => p.alpha_plus = val,
                Field::AlphaMinus => p.alpha_minus = val,
                Field::GammaShared => {
                    p.gamma_plus = val;
                    p.gamma_minus = val;
                }
                Field::GammaPlus => p.gamma_plus = val,
                Field::GammaMinus => p.gamma_minus = val,
            }
        }
        p
    }

    /// Natural-scale values of the free coordinates, for reporting.
    pub(crate) fn natural_values(&self, p: &ParamSet) -> Result<Vec<f64>> {
        self.coords.iter().map(|&(f, _)| self.read(p, f)).collect()
    }

    fn is_unbounded(&self, i: usize) -> bool {
        self.coords[i].1 == Scale::Identity
    }
}

/// Maps a parameter set onto the unconstrained optimizer space for the
/// spec's default constraint set. Errors on boundary-violating input
/// (e.g. beta exactly zero, which only a frozen fit can express).
pub fn transform_params(p: &ParamSet, spec: &ModelSpec) -> Result<Vec<f64>> {
    ParamLayout::new(spec, &Constraints::default()).pack(p)
}

/// Inverse of [`transform_params`].
pub fn untransform_params(v: &[f64], spec: &ModelSpec) -> Result<ParamSet> {
    let layout = ParamLayout::new(spec, &Constraints::default());
    if v.len() != layout.dim() {
        return Err(Error::Domain(format!(
            "expected {} coordinates, got {}",
            layout.dim(),
            v.len()
        )));
    }
    Ok(layout.unpack(v))
}

/// How the filter's initial intensity pair is chosen during estimation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaInit {
    /// Stationary mean implied by the candidate parameters, falling back to
    /// `omega / (1 - beta)` when no closed form exists.
    Stationary,
    Fixed(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Multi-start count; the first start is the deterministic default, the
    /// rest are seeded perturbations of it.
    pub n_starts: usize,
    /// Iteration cap per simplex run.
    pub max_iters: usize,
    /// Restart rounds per start.
    pub max_restarts: usize,
    /// Simplex objective-spread tolerance.
    pub spread_tol: f64,
    pub seed: u64,
    pub constraints: Constraints,
    pub lambda_init: LambdaInit,
    /// Overrides the built-in starting parameters.
    pub start: Option<ParamSet>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_starts: 3,
            max_iters: 2000,
            max_restarts: 10,
            spread_tol: 1e-8,
            seed: 0,
            constraints: Constraints::default(),
            lambda_init: LambdaInit::Stationary,
            start: None,
        }
    }
}

impl FitConfig {
    /// Lighter settings for replicate refits inside bootstrap loops; the
    /// warm start carries most of the work.
    fn replicate(&self, start: ParamSet) -> FitConfig {
        FitConfig {
            n_starts: 1,
            max_iters: 1200,
            max_restarts: 6,
            start: Some(start),
            ..*self
        }
    }
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub constraints: Constraints,
    pub params: ParamSet,
    pub loglik: f64,
    /// Objective evaluations spent across all starts and restarts.
    pub iterations: usize,
    pub converged: bool,
    pub start_points_used: usize,
    /// Per-free-coordinate bootstrap standard errors, when computed.
    pub se: Option<Vec<(String, f64)>>,
    pub normalized: NormalizedParams,
    /// Initial intensity pair the reported log-likelihood conditions on.
    pub lambda0: (f64, f64),
    pub n_obs: usize,
    pub seed: u64,
}

fn resolve_lambda0(spec: &ModelSpec, p: &ParamSet, init: LambdaInit) -> (f64, f64) {
    match init {
        LambdaInit::Fixed(a, b) => (a, b),
        LambdaInit::Stationary => default_lambda0(spec, p),
    }
}

/// Built-in starting point: persistence 0.9, normalized shock coefficients
/// near the usual daily-equity range, omegas chosen so the implied
/// long-run variance matches the sample variance of the discretized
/// returns.
fn default_start(spec: &ModelSpec, counts: &[i64], constraints: &Constraints) -> ParamSet {
    let d = spec.delta;
    let d2 = d * d;
    let n = counts.len().max(1) as f64;
    let mean = counts.iter().map(|&m| m as f64).sum::<f64>() / n * d;
    let var = counts
        .iter()
        .map(|&m| {
            let x = m as f64 * d - mean;
            x * x
        })
        .sum::<f64>()
        / n;
    let var = var.max(1e-12);

    let beta = constraints.freeze_beta.unwrap_or(0.9);
    let (alpha_star, gamma_star) = match spec.variant {
        Variant::Gjr => (0.01, 0.04),
        _ => (0.03, 0.0),
    };
    let alpha = constraints.freeze_alpha.unwrap_or(alpha_star / d2);
    let gamma_default = if spec.variant.uses_gamma() && spec.variant.gamma_nonnegative() {
        gamma_star / d2
    } else {
        0.0
    };
    let gamma = constraints.freeze_gamma.unwrap_or(gamma_default);

    // Shock load on the stationarity margin; GJR's indicator bites half the
    // time. Standardized-shock variants contribute alpha directly.
    let (load, alpha_eff) = match spec.variant {
        Variant::HestonNandi | Variant::VGarch => {
            let lam_dir = (var / (2.0 * d2)).max(1e-8);
            let a = 0.3 * lam_dir * (1.0 - beta);
            (0.6, a)
        }
        Variant::Gjr => (
            2.0 * (alpha * d2 + 0.5 * gamma * d2),
            alpha,
        ),
        _ => (2.0 * alpha * d2, alpha),
    };
    let margin_left = (1.0 - beta - load).max(0.02);
    let omega_each = (var * margin_left / (2.0 * d2)).max(1e-10);

    ParamSet {
        omega_plus: omega_each,
        omega_minus: omega_each,
        beta_plus: beta,
        beta_minus: beta,
        alpha_plus: alpha_eff,
        alpha_minus: alpha_eff,
        gamma_plus: gamma,
        gamma_minus: gamma,
    }
}

/// Fits the model to a return series by maximizing the exact Skellam
/// log-likelihood with a restarted simplex search over the transformed
/// parameter space.
pub fn fit_mle(spec: &ModelSpec, returns: &[f64], config: &FitConfig) -> Result<FitResult> {
    spec.validate()?;
    if returns.len() < 100 {
        return Err(Error::Domain(format!(
            "need at least 100 observations to fit, got {}",
            returns.len()
        )));
    }
    let (counts, _) = returns_to_counts(returns, spec.delta)?;
    fit_mle_counts(spec, &counts, config)
}

pub(crate) fn fit_mle_counts(
    spec: &ModelSpec,
    counts: &[i64],
    config: &FitConfig,
) -> Result<FitResult> {
    use rand::Rng;
    use rand::SeedableRng;

    let layout = ParamLayout::new(spec, &config.constraints);
    let start = match config.start {
        Some(p) => p,
        None => default_start(spec, counts, &config.constraints),
    };
    start.validate(spec).map_err(|e| {
        Error::Estimation(format!("starting parameters are invalid: {e}"))
    })?;
    let v0 = layout.pack(&start)?;

    let objective = |v: &[f64]| -> f64 {
        let p = layout.unpack(v);
        if p.validate(spec).is_err() {
            return PENALTY;
        }
        let lambda0 = resolve_lambda0(spec, &p, config.lambda_init);
        if !(lambda0.0.is_finite() && lambda0.1.is_finite())
            || lambda0.0 < 0.0
            || lambda0.1 < 0.0
        {
            return PENALTY;
        }
        let ll = log_likelihood_raw(spec, &p, counts, lambda0);
        if ll.is_finite() {
            -ll
        } else {
            PENALTY
        }
    };

    let opts = SimplexOptions {
        max_iters: config.max_iters,
        spread_tol: config.spread_tol,
        max_restarts: config.max_restarts,
        init_step: 0.25,
    };

    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(derive_seed(config.seed, 0xF17));
    let mut best: Option<optim::SimplexOutcome> = None;
    let mut total_evals = 0usize;
    let n_starts = config.n_starts.max(1);
    for s in 0..n_starts {
        let x0: Vec<f64> = if s == 0 {
            v0.clone()
        } else {
            v0.iter()
                .enumerate()
                .map(|(i, &v)| {
                    let u1: f64 = rng.random::<f64>().max(1e-12);
                    let u2: f64 = rng.random();
                    let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                    let step = if layout.is_unbounded(i) {
                        0.35 * v.abs().max(1.0)
                    } else {
                        0.35
                    };
                    v + step * z
                })
                .collect()
        };
        let out = optim::minimize(objective, &x0, &opts);
        total_evals += out.evals;
        let better = match &best {
            None => true,
            Some(b) => out.fx < b.fx,
        };
        if better {
            best = Some(out);
        }
    }
    let best = best.expect("at least one start");
    if best.fx >= PENALTY {
        return Err(Error::Estimation(
            "no admissible parameter point found".into(),
        ));
    }

    let params = layout.unpack(&best.x);
    let lambda0 = resolve_lambda0(spec, &params, config.lambda_init);
    let loglik = log_likelihood(spec, &params, counts, lambda0)?;

    Ok(FitResult {
        spec: *spec,
        constraints: config.constraints,
        params,
        loglik,
        iterations: total_evals,
        converged: best.converged,
        start_points_used: n_starts,
        se: None,
        normalized: normalize_params(&params, spec.delta),
        lambda0,
        n_obs: counts.len(),
        seed: config.seed,
    })
}

/// Per-replicate outcome of a parametric bootstrap.
#[derive(Debug, Clone)]
pub struct BootstrapSummary {
    /// (coordinate name, standard deviation of the replicate estimates).
    pub se: Vec<(String, f64)>,
    pub n_used: usize,
    pub n_dropped: usize,
    /// Natural-scale replicate estimates, row per converged replicate.
    pub estimates: Vec<Vec<f64>>,
}

/// Parametric bootstrap: simulate `b` series of the fitted length from the
/// fitted parameters, refit each (warm-started), and report per-coordinate
/// standard deviations. Deterministic under a fixed seed; replicates run
/// concurrently with counter-derived sub-seeds.
pub fn bootstrap_se(fit: &FitResult, b: usize, seed: u64) -> Result<BootstrapSummary> {
    if b < 50 {
        return Err(Error::Config(format!(
            "bootstrap needs at least 50 replicates, got {b}"
        )));
    }
    bootstrap_se_impl(fit, b, |i| derive_seed(seed, i as u64))
}

pub(crate) fn bootstrap_se_impl(
    fit: &FitResult,
    b: usize,
    seed_of: impl Fn(usize) -> u64 + Sync,
) -> Result<BootstrapSummary> {
    let layout = ParamLayout::new(&fit.spec, &fit.constraints);
    let refit_config = FitConfig {
        seed: fit.seed,
        constraints: fit.constraints,
        lambda_init: LambdaInit::Stationary,
        ..FitConfig::default()
    }
    .replicate(fit.params);

    let rows: Vec<Option<Vec<f64>>> = (0..b)
        .into_par_iter()
        .map(|i| {
            let counts = simulate_counts(
                &fit.spec,
                &fit.params,
                fit.n_obs,
                fit.lambda0,
                seed_of(i),
            );
            match fit_mle_counts(&fit.spec, &counts, &refit_config) {
                Ok(r) if r.converged => layout.natural_values(&r.params).ok(),
                _ => None,
            }
        })
        .collect();

    let estimates: Vec<Vec<f64>> = rows.iter().flatten().cloned().collect();
    let n_used = estimates.len();
    let n_dropped = b - n_used;
    if n_dropped * 5 > b {
        return Err(Error::Estimation(format!(
            "{n_dropped} of {b} bootstrap replicates failed to converge"
        )));
    }

    let dim = layout.dim();
    let names = layout.names();
    let mut se = Vec::with_capacity(dim);
    for j in 0..dim {
        let mean = estimates.iter().map(|r| r[j]).sum::<f64>() / n_used as f64;
        let var = estimates
            .iter()
            .map(|r| (r[j] - mean) * (r[j] - mean))
            .sum::<f64>()
            / (n_used as f64 - 1.0);
        se.push((names[j].to_string(), var.sqrt()));
    }

    Ok(BootstrapSummary {
        se,
        n_used,
        n_dropped,
        estimates,
    })
}

/// Bootstrap test of the hypothesis that the up and down shock coefficients
/// coincide.
#[derive(Debug, Clone)]
pub struct AlphaEqualityTest {
    /// Observed `alpha_plus - alpha_minus`.
    pub t_observed: f64,
    /// Two-sided bootstrap p-value.
    pub p_value: f64,
    pub n_used: usize,
    pub n_dropped: usize,
    pub free_fit: FitResult,
    pub null_fit: FitResult,
}

/// Fits the unconstrained model, refits under `alpha_plus = alpha_minus`,
/// simulates `b` series from the null fit, refits the unconstrained model
/// on each, and compares the observed coefficient difference against the
/// replicated null distribution. The null fit's own difference is exactly
/// zero, so the replicated statistics need no further recentering.
pub fn test_alpha_equality(
    spec: &ModelSpec,
    returns: &[f64],
    b: usize,
    seed: u64,
    config: &FitConfig,
) -> Result<AlphaEqualityTest> {
    if config.constraints.alpha_equal || config.constraints.freeze_alpha.is_some() {
        return Err(Error::Config(
            "equality test needs the alphas free in the base model".into(),
        ));
    }
    if b < 1 {
        return Err(Error::Config("need at least one bootstrap replicate".into()));
    }

    let free_fit = fit_mle(spec, returns, config)?;
    let t_observed = free_fit.params.alpha_plus - free_fit.params.alpha_minus;

    let pooled = 0.5 * (free_fit.params.alpha_plus + free_fit.params.alpha_minus);
    let null_start = ParamSet {
        alpha_plus: pooled,
        alpha_minus: pooled,
        ..free_fit.params
    };
    let null_config = FitConfig {
        constraints: Constraints {
            alpha_equal: true,
            ..config.constraints
        },
        start: Some(null_start),
        n_starts: 1,
        ..*config
    };
    let (counts, _) = returns_to_counts(returns, spec.delta)?;
    let null_fit = fit_mle_counts(spec, &counts, &null_config)?;

    let refit_config = FitConfig {
        seed: config.seed,
        constraints: config.constraints,
        lambda_init: LambdaInit::Stationary,
        ..FitConfig::default()
    }
    .replicate(null_fit.params);

    let draws: Vec<Option<f64>> = (0..b)
        .into_par_iter()
        .map(|i| {
            let counts = simulate_counts(
                &null_fit.spec,
                &null_fit.params,
                null_fit.n_obs,
                null_fit.lambda0,
                derive_seed(seed, i as u64),
            );
            match fit_mle_counts(spec, &counts, &refit_config) {
                Ok(r) if r.converged => Some(r.params.alpha_plus - r.params.alpha_minus),
                _ => None,
            }
        })
        .collect();

    let t_null: Vec<f64> = draws.iter().flatten().copied().collect();
    let n_used = t_null.len();
    let n_dropped = b - n_used;
    if n_dropped * 5 > b {
        return Err(Error::Estimation(format!(
            "{n_dropped} of {b} null replicates failed to converge"
        )));
    }

    let exceed = t_null.iter().filter(|t| t.abs() >= t_observed.abs()).count();
    let p_value = (1 + exceed) as f64 / (n_used + 1) as f64;

    Ok(AlphaEqualityTest {
        t_observed,
        p_value,
        n_used,
        n_dropped,
        free_fit,
        null_fit,
    })
}

/// The four-model comparison ladder: a shared-coefficient basic model, its
/// GJR extension, the per-direction basic model, and the per-direction GJR
/// model. Each richer model is warm-started from the point where the poorer
/// one embeds into it, so the likelihood ordering holds by construction up
/// to optimizer tolerance.
#[derive(Debug, Clone)]
pub struct CatalogFits {
    pub model_i: FitResult,
    pub model_ii: FitResult,
    pub model_iii: FitResult,
    pub model_iv: FitResult,
}

impl CatalogFits {
    pub fn rows(&self) -> [(&'static str, &FitResult); 4] {
        [
            ("model_i", &self.model_i),
            ("model_ii", &self.model_ii),
            ("model_iii", &self.model_iii),
            ("model_iv", &self.model_iv),
        ]
    }
}

pub fn fit_model_catalog(
    returns: &[f64],
    delta: f64,
    dt: f64,
    seed: u64,
    n_starts: usize,
) -> Result<CatalogFits> {
    let basic_shared = ModelSpec::new(Variant::Basic, true, delta, dt)?;
    let gjr_shared = ModelSpec::new(Variant::Gjr, true, delta, dt)?;
    let basic_free = ModelSpec::new(Variant::Basic, false, delta, dt)?;
    let gjr_free = ModelSpec::new(Variant::Gjr, false, delta, dt)?;

    let pooled = Constraints {
        alpha_equal: true,
        gamma_equal: true,
        ..Default::default()
    };
    let alpha_pooled = Constraints {
        alpha_equal: true,
        ..Default::default()
    };

    let base = FitConfig {
        n_starts,
        seed,
        ..FitConfig::default()
    };

    let model_i = fit_mle(
        &basic_shared,
        returns,
        &FitConfig {
            constraints: alpha_pooled,
            ..base
        },
    )?;

    // Model II starts where Model I embeds (gamma at zero) and from a
    // leverage-splitting point that keeps the average shock load.
    let p1 = model_i.params;
    let ii_embed = ParamSet {
        gamma_plus: 0.0,
        gamma_minus: 0.0,
        ..p1
    };
    let ii_split = ParamSet {
        alpha_plus: 0.5 * p1.alpha_plus,
        alpha_minus: 0.5 * p1.alpha_minus,
        gamma_plus: p1.alpha_plus,
        gamma_minus: p1.alpha_minus,
        ..p1
    };
    let model_ii = best_of_starts(
        &gjr_shared,
        returns,
        &FitConfig {
            constraints: pooled,
            ..base
        },
        &[ii_embed, ii_split],
    )?;

    let model_iii = fit_mle(
        &basic_free,
        returns,
        &FitConfig {
            start: Some(p1),
            ..base
        },
    )?;

    let p2 = model_ii.params;
    let p3 = model_iii.params;
    let iv_from_ii = p2;
    let iv_from_iii = ParamSet {
        gamma_plus: 0.0,
        gamma_minus: 0.0,
        ..p3
    };
    let iv_split = ParamSet {
        alpha_plus: 0.5 * p3.alpha_plus,
        alpha_minus: 0.5 * p3.alpha_minus,
        gamma_plus: p3.alpha_plus,
        gamma_minus: p3.alpha_minus,
        ..p3
    };
    let model_iv = best_of_starts(
        &gjr_free,
        returns,
        &base,
        &[iv_from_ii, iv_from_iii, iv_split],
    )?;

    Ok(CatalogFits {
        model_i,
        model_ii,
        model_iii,
        model_iv,
    })
}

fn best_of_starts(
    spec: &ModelSpec,
    returns: &[f64],
    config: &FitConfig,
    starts: &[ParamSet],
) -> Result<FitResult> {
    let mut best: Option<FitResult> = None;
    let mut evals = 0usize;
    for (i, start) in starts.iter().enumerate() {
        let fit = fit_mle(
            spec,
            returns,
            &FitConfig {
                start: Some(*start),
                seed: derive_seed(config.seed, i as u64),
                ..*config
            },
        )?;
        evals += fit.iterations;
        let better = match &best {
            None => true,
            Some(b) => fit.loglik > b.loglik,
        };
        if better {
            best = Some(fit);
        }
    }
    let mut best = best.ok_or_else(|| Error::Estimation("no starting points supplied".into()))?;
    best.iterations = evals;
    Ok(best)
}
