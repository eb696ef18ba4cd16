//! GARCH-type intensity recursions, return decomposition, intensity
//! filtering, and unconditional-moment formulas.
//!
//! Timing convention: the pair `lambda(t_i)` is updated with the shock
//! `eps(t_i)` realized over the step ending at `t_i`, and governs the return
//! over the step ending at `t_{i+1}`. This is the only reading under which
//! the conditional-variance recursion
//! `h(t_i) = d^2 (w+ + w-) + b h(t_{i-1}) + d^2 (a+ + a-) eps^2(t_{i-1})`
//! comes out of the catalog.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Hard lower bound applied to every intensity after an update.
pub const INTENSITY_FLOOR: f64 = 1e-12;

/// The intensity-recursion family. Each row updates
/// `lambda(t_i) = omega + beta * lambda(t_{i-1}) + <shock term>(eps(t_i))`,
/// per direction, with `z(t_i) = eps(t_i)/sqrt(h(t_i))` and the indicator
/// `I(t_i) = 1` iff `eps(t_i) < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// shock term `alpha * eps^2`
    Basic,
    /// shock term `alpha * (eps - gamma)^2`
    Asymmetric,
    /// shock term `alpha * (eps - gamma * sqrt(h))^2`
    NonlinearAsymmetric,
    /// shock term `(alpha + gamma * I) * eps^2`
    Gjr,
    /// shock term `alpha * (eps + gamma * |eps|)^2`
    NewsImpact,
    /// shock term `alpha * eps^2 + gamma * eps`
    QGarch,
    /// shock term `alpha * (z - gamma * sqrt(h))^2`
    HestonNandi,
    /// shock term `alpha * (z - gamma)^2`
    VGarch,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::Basic,
        Variant::Asymmetric,
        Variant::NonlinearAsymmetric,
        Variant::Gjr,
        Variant::NewsImpact,
        Variant::QGarch,
        Variant::HestonNandi,
        Variant::VGarch,
    ];

    /// Whether the variant has a gamma parameter at all.
    pub fn uses_gamma(&self) -> bool {
        !matches!(self, Variant::Basic)
    }

    /// GJR keeps its gamma non-negative so the shock coefficient
    /// `alpha + gamma * I` cannot go negative.
    pub fn gamma_nonnegative(&self) -> bool {
        matches!(self, Variant::Gjr)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::Asymmetric => "asymmetric",
            Variant::NonlinearAsymmetric => "nonlinear-asymmetric",
            Variant::Gjr => "gjr",
            Variant::NewsImpact => "news-impact",
            Variant::QGarch => "qgarch",
            Variant::HestonNandi => "heston-nandi",
            Variant::VGarch => "vgarch",
        }
    }

    pub fn parse(s: &str) -> Result<Variant> {
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown variant '{s}'; expected one of: {}",
                    Variant::ALL.map(|v| v.name()).join(", ")
                ))
            })
    }
}

/// Model selection plus the two measurement constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub variant: Variant,
    /// Impose `beta_plus = beta_minus`.
    pub beta_equal: bool,
    /// Jump size in log-return units.
    pub delta: f64,
    /// Time step; rates are per `dt`. Defaults to one trading day.
    pub dt: f64,
}

impl ModelSpec {
    pub fn new(variant: Variant, beta_equal: bool, delta: f64, dt: f64) -> Result<Self> {
        let spec = ModelSpec {
            variant,
            beta_equal,
            delta,
            dt,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!(
                "dt must be positive and finite, got {}",
                self.dt
            )));
        }
        Ok(())
    }
}

/// Per-direction recursion coefficients. Gamma fields are ignored by the
/// basic variant and stay at zero there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    #[serde(default)]
    pub gamma_plus: f64,
    #[serde(default)]
    pub gamma_minus: f64,
}

impl ParamSet {
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let fields = [
            ("omega_plus", self.omega_plus),
            ("omega_minus", self.omega_minus),
            ("beta_plus", self.beta_plus),
            ("beta_minus", self.beta_minus),
            ("alpha_plus", self.alpha_plus),
            ("alpha_minus", self.alpha_minus),
            ("gamma_plus", self.gamma_plus),
            ("gamma_minus", self.gamma_minus),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        if self.omega_plus <= 0.0 || self.omega_minus <= 0.0 {
            return Err(Error::Domain("omega must be positive".into()));
        }
        for (name, b) in [("beta_plus", self.beta_plus), ("beta_minus", self.beta_minus)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1), got {b}")));
            }
        }
        if self.alpha_plus < 0.0 || self.alpha_minus < 0.0 {
            return Err(Error::Domain("alpha must be non-negative".into()));
        }
        if spec.beta_equal && self.beta_plus != self.beta_minus {
            return Err(Error::Domain(format!(
                "beta_equal requires beta_plus == beta_minus, got {} and {}",
                self.beta_plus, self.beta_minus
            )));
        }
        if spec.variant == Variant::Gjr
            && (self.alpha_plus + self.gamma_plus < 0.0
                || self.alpha_minus + self.gamma_minus < 0.0)
        {
            return Err(Error::Domain(
                "GJR requires alpha + gamma >= 0 in each direction".into(),
            ));
        }
        Ok(())
    }
}

/// One step of the selected recursion. `h_now` is the one-step conditional
/// variance of the return whose shock is `eps_now`; it standardizes the
/// shock where the variant calls for `z` or `sqrt(h)`.
pub fn intensity_step(
    spec: &ModelSpec,
    p: &ParamSet,
    prev_lambda: (f64, f64),
    eps_now: f64,
    h_now: f64,
) -> Result<(f64, f64)> {
    if !prev_lambda.0.is_finite()
        || !prev_lambda.1.is_finite()
        || prev_lambda.0 <= 0.0
        || prev_lambda.1 <= 0.0
    {
        return Err(Error::Domain(format!(
            "previous intensities must be positive and finite, got {prev_lambda:?}"
        )));
    }
    if !eps_now.is_finite() {
        return Err(Error::Domain(format!("shock must be finite, got {eps_now}")));
    }
    if !(h_now.is_finite() && h_now > 0.0) {
        return Err(Error::Domain(format!(
            "conditional variance must be positive and finite, got {h_now}"
        )));
    }
    Ok(intensity_step_raw(spec, p, prev_lambda, eps_now, h_now))
}

#[inline]
pub(crate) fn intensity_step_raw(
    spec: &ModelSpec,
    p: &ParamSet,
    (lp, lm): (f64, f64),
    eps: f64,
    h: f64,
) -> (f64, f64) {
    let eps2 = eps * eps;
    let (shock_plus, shock_minus) = match spec.variant {
        Variant::Basic => (p.alpha_plus * eps2, p.alpha_minus * eps2),
        Variant::Asymmetric => {
            let dp = eps - p.gamma_plus;
            let dm = eps - p.gamma_minus;
            (p.alpha_plus * dp * dp, p.alpha_minus * dm * dm)
        }
        Variant::NonlinearAsymmetric => {
            let s = h.sqrt();
            let dp = eps - p.gamma_plus * s;
            let dm = eps - p.gamma_minus * s;
            (p.alpha_plus * dp * dp, p.alpha_minus * dm * dm)
        }
        Variant::Gjr => {
            let ind = if eps < 0.0 { 1.0 } else { 0.0 };
            (
                (p.alpha_plus + p.gamma_plus * ind) * eps2,
                (p.alpha_minus + p.gamma_minus * ind) * eps2,
            )
        }
        Variant::NewsImpact => {
            let a = eps.abs();
            let dp = eps + p.gamma_plus * a;
            let dm = eps + p.gamma_minus * a;
            (p.alpha_plus * dp * dp, p.alpha_minus * dm * dm)
        }
        Variant::QGarch => (
            p.alpha_plus * eps2 + p.gamma_plus * eps,
            p.alpha_minus * eps2 + p.gamma_minus * eps,
        ),
        Variant::HestonNandi => {
            let s = h.sqrt();
            let z = eps / s;
            let dp = z - p.gamma_plus * s;
            let dm = z - p.gamma_minus * s;
            (p.alpha_plus * dp * dp, p.alpha_minus * dm * dm)
        }
        Variant::VGarch => {
            let z = eps / h.sqrt();
            let dp = z - p.gamma_plus;
            let dm = z - p.gamma_minus;
            (p.alpha_plus * dp * dp, p.alpha_minus * dm * dm)
        }
    };
    (
        (p.omega_plus + p.beta_plus * lp + shock_plus).max(INTENSITY_FLOOR),
        (p.omega_minus + p.beta_minus * lm + shock_minus).max(INTENSITY_FLOOR),
    )
}

/// Aligned latent-state series produced by filtering or simulation.
///
/// `lambda_plus`/`lambda_minus` have length `n + 1` with entry `0` holding
/// the initial pair; `returns`, `counts`, `eps` and `h` have length `n`,
/// entry `i` belonging to the step from `t_i` to `t_{i+1}`. In particular
/// `h[i] = delta^2 (lambda_plus[i] + lambda_minus[i]) * dt` is the
/// conditional variance of `returns[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityPath {
    pub lambda_plus: Vec<f64>,
    pub lambda_minus: Vec<f64>,
    pub eps: Vec<f64>,
    pub h: Vec<f64>,
    pub counts: Vec<i64>,
    pub returns: Vec<f64>,
}

impl IntensityPath {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Reconstructs the latent intensity path implied by a return series.
///
/// Deterministic: identical inputs give bit-identical output. `lambda0` may
/// contain zeros (the recursion immediately lifts them to the floor); all
/// later intensities are strictly positive.
pub fn filter(
    spec: &ModelSpec,
    p: &ParamSet,
    returns: &[f64],
    lambda0: (f64, f64),
) -> Result<IntensityPath> {
    spec.validate()?;
    p.validate(spec)?;
    validate_lambda0(lambda0)?;
    if let Some(bad) = returns.iter().position(|x| !x.is_finite()) {
        return Err(Error::Domain(format!(
            "returns must be finite; offending index {bad}"
        )));
    }

    let n = returns.len();
    let d = spec.delta;
    let d2 = d * d;
    let dt = spec.dt;

    let mut out = IntensityPath {
        lambda_plus: Vec::with_capacity(n + 1),
        lambda_minus: Vec::with_capacity(n + 1),
        eps: Vec::with_capacity(n),
        h: Vec::with_capacity(n),
        counts: Vec::with_capacity(n),
        returns: returns.to_vec(),
    };
    let (mut lp, mut lm) = lambda0;
    out.lambda_plus.push(lp);
    out.lambda_minus.push(lm);

    for &x in returns {
        let h = d2 * (lp + lm) * dt;
        let eps = x - d * (lp - lm) * dt;
        out.h.push(h);
        out.eps.push(eps);
        out.counts.push((x / d).round() as i64);
        let next = intensity_step_raw(spec, p, (lp, lm), eps, h.max(f64::MIN_POSITIVE));
        lp = next.0;
        lm = next.1;
        out.lambda_plus.push(lp);
        out.lambda_minus.push(lm);
    }
    Ok(out)
}

pub(crate) fn validate_lambda0(lambda0: (f64, f64)) -> Result<()> {
    if !lambda0.0.is_finite() || !lambda0.1.is_finite() || lambda0.0 < 0.0 || lambda0.1 < 0.0 {
        return Err(Error::Domain(format!(
            "initial intensities must be finite and non-negative, got {lambda0:?}"
        )));
    }
    Ok(())
}

/// One-step moments of the return given the previous intensity pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnDecomposition {
    /// Drift term `{(e^d - 1) l+ + (e^-d - 1) l-} dt`.
    pub drift: f64,
    /// Ito-style correction `{(e^d - 1 - d) l+ + (e^-d - 1 + d) l-} dt`.
    pub ito_correction: f64,
    /// `d (l+ - l-) dt`; equals `drift - ito_correction`.
    pub cond_mean: f64,
    /// `d^2 (l+ + l-) dt`.
    pub cond_var: f64,
}

pub fn decompose_return(lambda_prev: (f64, f64), delta: f64, dt: f64) -> ReturnDecomposition {
    let (lp, lm) = lambda_prev;
    let up = delta.exp_m1();
    let down = (-delta).exp_m1();
    ReturnDecomposition {
        drift: (up * lp + down * lm) * dt,
        ito_correction: ((up - delta) * lp + (down + delta) * lm) * dt,
        cond_mean: delta * (lp - lm) * dt,
        cond_var: delta * delta * (lp + lm) * dt,
    }
}

/// Unconditional one-step return variance for the basic variant under the
/// shared-beta constraint:
/// `d^2 (w+ + w-) / (1 - b - d^2 (a+ + a-) dt)`.
pub fn unconditional_variance(spec: &ModelSpec, p: &ParamSet) -> Result<f64> {
    spec.validate()?;
    p.validate(spec)?;
    if spec.variant != Variant::Basic {
        return Err(Error::Config(
            "unconditional variance is available only for the basic variant".into(),
        ));
    }
    if !spec.beta_equal || p.beta_plus != p.beta_minus {
        return Err(Error::Config(
            "unconditional variance requires the shared-beta constraint".into(),
        ));
    }
    let d2 = spec.delta * spec.delta;
    let denom = 1.0 - p.beta_plus - d2 * (p.alpha_plus + p.alpha_minus) * spec.dt;
    if denom <= 0.0 {
        return Err(Error::Domain(format!(
            "process is not weakly stationary (denominator {denom})"
        )));
    }
    Ok(d2 * (p.omega_plus + p.omega_minus) / denom)
}

/// Jump-size-invariant reparameterization `w* = w d^2`, `a* = a d^2`,
/// `g* = g d^2`; betas are already scale-free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedParams {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// `a+* + a-* + beta`; the process is weakly stationary below 1. With
    /// unequal betas the larger one is used, giving a conservative margin.
    pub stationarity_margin: f64,
}

pub fn normalize_params(p: &ParamSet, delta: f64) -> NormalizedParams {
    let d2 = delta * delta;
    NormalizedParams {
        omega_plus: p.omega_plus * d2,
        omega_minus: p.omega_minus * d2,
        beta_plus: p.beta_plus,
        beta_minus: p.beta_minus,
        alpha_plus: p.alpha_plus * d2,
        alpha_minus: p.alpha_minus * d2,
        gamma_plus: p.gamma_plus * d2,
        gamma_minus: p.gamma_minus * d2,
        stationarity_margin: p.alpha_plus * d2 + p.alpha_minus * d2 + p.beta_plus.max(p.beta_minus),
    }
}

/// Stationary mean of the intensity pair, where a closed form (or a mild
/// approximation) exists.
///
/// For the basic variant this solves the linear fixed point exactly. For GJR
/// the indicator is taken to strike half the time, a symmetric-shock
/// approximation used only for initialization. Other variants return `None`.
pub fn stationary_lambda(spec: &ModelSpec, p: &ParamSet) -> Option<(f64, f64)> {
    let d2 = spec.delta * spec.delta;
    let dt = spec.dt;
    let (ap_eff, am_eff) = match spec.variant {
        Variant::Basic => (p.alpha_plus, p.alpha_minus),
        Variant::Gjr => (
            p.alpha_plus + 0.5 * p.gamma_plus,
            p.alpha_minus + 0.5 * p.gamma_minus,
        ),
        _ => return None,
    };
    // E[lambda_pm] = (omega_pm + a_eff_pm * d^2 * s * dt) / (1 - beta_pm),
    // with s = E[lambda_plus + lambda_minus] solving a scalar equation.
    let denom_p = 1.0 - p.beta_plus;
    let denom_m = 1.0 - p.beta_minus;
    if denom_p <= 0.0 || denom_m <= 0.0 {
        return None;
    }
    let a = p.omega_plus / denom_p + p.omega_minus / denom_m;
    let b = d2 * dt * (ap_eff / denom_p + am_eff / denom_m);
    if b >= 1.0 {
        return None;
    }
    let s = a / (1.0 - b);
    let lp = (p.omega_plus + ap_eff * d2 * s * dt) / denom_p;
    let lm = (p.omega_minus + am_eff * d2 * s * dt) / denom_m;
    if lp.is_finite() && lm.is_finite() && lp > 0.0 && lm > 0.0 {
        Some((lp, lm))
    } else {
        None
    }
}

/// Default filtering initializer: the stationary mean when it exists, else
/// `omega / (1 - beta)` per direction.
pub fn default_lambda0(spec: &ModelSpec, p: &ParamSet) -> (f64, f64) {
    stationary_lambda(spec, p).unwrap_or((
        (p.omega_plus / (1.0 - p.beta_plus)).max(INTENSITY_FLOOR),
        (p.omega_minus / (1.0 - p.beta_minus)).max(INTENSITY_FLOOR),
    ))
}
