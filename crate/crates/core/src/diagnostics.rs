//! Sign-conditional correlations, correlogram tables, the modified
//! Ljung-Box statistic, and inferred conditional moments.
//!
//! A conditional correlation pairs the current value with a lagged one,
//! keeps only pairs whose members satisfy sign conditions (strict: zeros
//! match neither `Pos` nor `Neg`), applies per-side transforms, and takes
//! the Pearson correlation over the surviving pairs. Means and variances
//! come from the conditioned subsample, not the full series.

use serde::{Deserialize, Serialize};

use crate::estimate::FitResult;
use crate::intensity::filter;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignCondition {
    Pos,
    Neg,
    Any,
}

impl SignCondition {
    #[inline]
    fn admits(&self, v: f64) -> bool {
        match self {
            SignCondition::Pos => v > 0.0,
            SignCondition::Neg => v < 0.0,
            SignCondition::Any => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Id,
    Neg,
    Abs,
}

impl Transform {
    #[inline]
    fn apply(&self, v: f64) -> f64 {
        match self {
            Transform::Id => v,
            Transform::Neg => -v,
            Transform::Abs => v.abs(),
        }
    }
}

/// One conditional-correlation recipe: conditions select the pairs,
/// transforms are applied before correlating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrSpec {
    pub cond_current: SignCondition,
    pub cond_past: SignCondition,
    pub transform_current: Transform,
    pub transform_past: Transform,
}

impl CorrSpec {
    pub const fn new(
        cond_current: SignCondition,
        cond_past: SignCondition,
        transform_current: Transform,
        transform_past: Transform,
    ) -> Self {
        Self {
            cond_current,
            cond_past,
            transform_current,
            transform_past,
        }
    }

    /// corr(x_t, |x_{t-l}|) given x_t > 0
    pub const VOLATILITY_GIVEN_POS: CorrSpec = CorrSpec::new(
        SignCondition::Pos,
        SignCondition::Any,
        Transform::Id,
        Transform::Abs,
    );
    /// corr(-x_t, |x_{t-l}|) given x_t < 0
    pub const VOLATILITY_GIVEN_NEG: CorrSpec = CorrSpec::new(
        SignCondition::Neg,
        SignCondition::Any,
        Transform::Neg,
        Transform::Abs,
    );
    /// corr(x_t, x_{t-l}) given x_t > 0, x_{t-l} > 0
    pub const UP_UP: CorrSpec = CorrSpec::new(
        SignCondition::Pos,
        SignCondition::Pos,
        Transform::Id,
        Transform::Id,
    );
    /// corr(x_t, -x_{t-l}) given x_t > 0, x_{t-l} < 0
    pub const UP_DOWN: CorrSpec = CorrSpec::new(
        SignCondition::Pos,
        SignCondition::Neg,
        Transform::Id,
        Transform::Neg,
    );
    /// corr(-x_t, -x_{t-l}) given x_t < 0, x_{t-l} < 0
    pub const DOWN_DOWN: CorrSpec = CorrSpec::new(
        SignCondition::Neg,
        SignCondition::Neg,
        Transform::Neg,
        Transform::Neg,
    );
    /// corr(-x_t, x_{t-l}) given x_t < 0, x_{t-l} > 0
    pub const DOWN_UP: CorrSpec = CorrSpec::new(
        SignCondition::Neg,
        SignCondition::Pos,
        Transform::Neg,
        Transform::Id,
    );

    /// The six rows reported by the standard diagnostic table.
    pub const STANDARD_ROWS: [CorrSpec; 6] = [
        CorrSpec::VOLATILITY_GIVEN_POS,
        CorrSpec::VOLATILITY_GIVEN_NEG,
        CorrSpec::UP_UP,
        CorrSpec::UP_DOWN,
        CorrSpec::DOWN_DOWN,
        CorrSpec::DOWN_UP,
    ];

    pub fn label(&self) -> String {
        let side = |t: Transform, name: &str| match t {
            Transform::Id => name.to_string(),
            Transform::Neg => format!("-{name}"),
            Transform::Abs => format!("|{name}|"),
        };
        let cond = |c: SignCondition, name: &str| match c {
            SignCondition::Pos => Some(format!("{name}>0")),
            SignCondition::Neg => Some(format!("{name}<0")),
            SignCondition::Any => None,
        };
        let conds: Vec<String> = [cond(self.cond_current, "x_t"), cond(self.cond_past, "x_t-l")]
            .into_iter()
            .flatten()
            .collect();
        let head = format!(
            "corr({}, {}",
            side(self.transform_current, "x_t"),
            side(self.transform_past, "x_t-l")
        );
        if conds.is_empty() {
            format!("{head})")
        } else {
            format!("{head} | {})", conds.join(", "))
        }
    }

    /// Filesystem-friendly identifier.
    pub fn slug(&self) -> String {
        let c = |s: SignCondition| match s {
            SignCondition::Pos => "pos",
            SignCondition::Neg => "neg",
            SignCondition::Any => "any",
        };
        let t = |s: Transform| match s {
            Transform::Id => "id",
            Transform::Neg => "neg",
            Transform::Abs => "abs",
        };
        format!(
            "cur_{}_{}_past_{}_{}",
            c(self.cond_current),
            t(self.transform_current),
            c(self.cond_past),
            t(self.transform_past)
        )
    }
}

/// Correlation over the conditioned pairs, plus how many pairs qualified.
/// `corr` is absent when fewer than three pairs qualify or a conditioned
/// side is degenerate (zero variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondCorr {
    pub corr: Option<f64>,
    pub n: usize,
}

pub fn conditional_correlation(x: &[f64], lag: usize, spec: &CorrSpec) -> Result<CondCorr> {
    if lag == 0 {
        return Err(Error::Domain("lag must be at least 1".into()));
    }
    if x.len() <= lag + 2 {
        return Err(Error::Domain(format!(
            "series of length {} is too short for lag {lag}",
            x.len()
        )));
    }
    let mut u = Vec::new();
    let mut v = Vec::new();
    for t in lag..x.len() {
        let cur = x[t];
        let past = x[t - lag];
        if spec.cond_current.admits(cur) && spec.cond_past.admits(past) {
            u.push(spec.transform_current.apply(cur));
            v.push(spec.transform_past.apply(past));
        }
    }
    Ok(pearson(&u, &v))
}

fn pearson(u: &[f64], v: &[f64]) -> CondCorr {
    let n = u.len();
    if n < 3 {
        return CondCorr { corr: None, n };
    }
    let nf = n as f64;
    let mu: f64 = u.iter().sum::<f64>() / nf;
    let mv: f64 = v.iter().sum::<f64>() / nf;
    let mut suu = 0.0;
    let mut svv = 0.0;
    let mut suv = 0.0;
    for (a, b) in u.iter().zip(v) {
        let da = a - mu;
        let db = b - mv;
        suu += da * da;
        svv += db * db;
        suv += da * db;
    }
    if suu <= 0.0 || svv <= 0.0 {
        return CondCorr { corr: None, n };
    }
    CondCorr {
        corr: Some(suv / (suu * svv).sqrt()),
        n,
    }
}

/// One correlogram entry; `band` is the usual `1.96/sqrt(n)` approximation
/// with `n` the conditioned pair count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelogramRow {
    pub lag: usize,
    pub corr: Option<f64>,
    pub n: usize,
    pub band: f64,
}

pub fn correlogram_table(
    x: &[f64],
    max_lag: usize,
    spec: &CorrSpec,
) -> Result<Vec<CorrelogramRow>> {
    if max_lag == 0 {
        return Err(Error::Domain("max_lag must be at least 1".into()));
    }
    (1..=max_lag)
        .map(|lag| {
            let cc = conditional_correlation(x, lag, spec)?;
            Ok(CorrelogramRow {
                lag,
                corr: cc.corr,
                n: cc.n,
                band: if cc.n > 0 {
                    1.96 / (cc.n as f64).sqrt()
                } else {
                    f64::NAN
                },
            })
        })
        .collect()
}

/// Portmanteau statistic `Q_N = Tbar (Tbar + 2) sum_l corr_l^2 / (T_l - l)`
/// with `T_l` the qualifying pair count at lag `l` and `Tbar` their mean.
///
/// Errors when any `T_l <= l`. A lag whose correlation is degenerate (absent)
/// contributes zero.
pub fn modified_ljung_box(x: &[f64], max_lag: usize, spec: &CorrSpec) -> Result<f64> {
    if max_lag == 0 {
        return Err(Error::Domain("max_lag must be at least 1".into()));
    }
    let mut counts = Vec::with_capacity(max_lag);
    let mut terms = Vec::with_capacity(max_lag);
    for lag in 1..=max_lag {
        let cc = conditional_correlation(x, lag, spec)?;
        if cc.n <= lag {
            return Err(Error::Domain(format!(
                "lag {lag} has only {} qualifying pairs",
                cc.n
            )));
        }
        counts.push(cc.n as f64);
        let c = cc.corr.unwrap_or(0.0);
        terms.push(c * c / (cc.n as f64 - lag as f64));
    }
    let t_bar = counts.iter().sum::<f64>() / counts.len() as f64;
    Ok(t_bar * (t_bar + 2.0) * terms.iter().sum::<f64>())
}

/// One-step conditional moments of the return at each date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondMoments {
    pub cond_mean: f64,
    pub cond_var: f64,
}

/// Runs the fitted filter over a return series and emits
/// `E[X(t_i) | F(t_{i-1})]` and `Var[X(t_i) | F(t_{i-1})]` per step.
pub fn inferred_moments(fit: &FitResult, returns: &[f64]) -> Result<Vec<CondMoments>> {
    let path = filter(&fit.spec, &fit.params, returns, fit.lambda0)?;
    let d = fit.spec.delta;
    let dt = fit.spec.dt;
    Ok((0..path.len())
        .map(|i| CondMoments {
            cond_mean: d * (path.lambda_plus[i] - path.lambda_minus[i]) * dt,
            cond_var: path.h[i],
        })
        .collect())
}

/// Lag-1 autoregressive coefficient (autocovariance ratio) of a series;
/// used to contrast the persistence of inferred conditional means.
pub fn ar1_coefficient(x: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut c0 = 0.0;
    let mut c1 = 0.0;
    for i in 0..n {
        let d = x[i] - mean;
        c0 += d * d;
        if i > 0 {
            c1 += d * (x[i - 1] - mean);
        }
    }
    if c0 <= 0.0 {
        None
    } else {
        Some(c1 / c0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn standard_normals(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u1: f64 = rng.random::<f64>().max(1e-12);
                let u2: f64 = rng.random();
                (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
            })
            .collect()
    }

    /// Naive oracle: explicit pair collection and textbook two-pass formula.
    fn oracle_corr(x: &[f64], lag: usize, spec: &CorrSpec) -> (Option<f64>, usize) {
        let mut pairs = Vec::new();
        for t in lag..x.len() {
            let ok_cur = match spec.cond_current {
                SignCondition::Pos => x[t] > 0.0,
                SignCondition::Neg => x[t] < 0.0,
                SignCondition::Any => true,
            };
            let ok_past = match spec.cond_past {
                SignCondition::Pos => x[t - lag] > 0.0,
                SignCondition::Neg => x[t - lag] < 0.0,
                SignCondition::Any => true,
            };
            if ok_cur && ok_past {
                pairs.push((
                    spec.transform_current.apply(x[t]),
                    spec.transform_past.apply(x[t - lag]),
                ));
            }
        }
        let n = pairs.len();
        if n < 3 {
            return (None, n);
        }
        let mu = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
        let mv = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
        let suu: f64 = pairs.iter().map(|p| (p.0 - mu) * (p.0 - mu)).sum();
        let svv: f64 = pairs.iter().map(|p| (p.1 - mv) * (p.1 - mv)).sum();
        let suv: f64 = pairs.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
        if suu <= 0.0 || svv <= 0.0 {
            (None, n)
        } else {
            (Some(suv / (suu * svv).sqrt()), n)
        }
    }

    #[test]
    fn alternating_series_has_degenerate_subsamples() {
        let x: Vec<f64> = (0..40)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let cc = conditional_correlation(&x, 1, &CorrSpec::UP_DOWN).unwrap();
        assert_eq!(cc.corr, None);
        assert!(cc.n > 3);
    }

    #[test]
    fn twelve_point_hand_series_matches_oracle() {
        let x = [
            0.8, -0.3, 0.1, -1.2, 0.5, 0.9, -0.4, 0.2, -0.6, 1.1, -0.2, 0.7,
        ];
        for spec in CorrSpec::STANDARD_ROWS {
            for lag in 1..=3 {
                let got = conditional_correlation(&x, lag, &spec).unwrap();
                let (want, n) = oracle_corr(&x, lag, &spec);
                assert_eq!(got.n, n, "{spec:?} lag {lag}");
                match (got.corr, want) {
                    (Some(a), Some(b)) => {
                        assert!((a - b).abs() < 1e-14, "{spec:?} lag {lag}: {a} vs {b}")
                    }
                    (a, b) => assert_eq!(a, b, "{spec:?} lag {lag}"),
                }
            }
        }
    }

    #[test]
    fn unconditional_equals_pairwise_autocorrelation() {
        let x = standard_normals(500, 3);
        let spec = CorrSpec::new(
            SignCondition::Any,
            SignCondition::Any,
            Transform::Id,
            Transform::Id,
        );
        for lag in 1..=5 {
            let got = conditional_correlation(&x, lag, &spec)
                .unwrap()
                .corr
                .unwrap();
            let (want, _) = oracle_corr(&x, lag, &spec);
            assert!((got - want.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn iid_normal_within_bands() {
        let x = standard_normals(5000, 11);
        let specs = [
            CorrSpec::new(
                SignCondition::Pos,
                SignCondition::Pos,
                Transform::Id,
                Transform::Id,
            ),
            CorrSpec::new(
                SignCondition::Pos,
                SignCondition::Neg,
                Transform::Id,
                Transform::Id,
            ),
            CorrSpec::new(
                SignCondition::Neg,
                SignCondition::Neg,
                Transform::Id,
                Transform::Id,
            ),
            CorrSpec::new(
                SignCondition::Neg,
                SignCondition::Pos,
                Transform::Id,
                Transform::Id,
            ),
        ];
        for spec in specs {
            for lag in [1usize, 2, 5] {
                let cc = conditional_correlation(&x, lag, &spec).unwrap();
                let band = 3.0 * 1.96 / (cc.n as f64).sqrt();
                let c = cc.corr.unwrap();
                assert!(c.abs() < band, "{spec:?} lag {lag}: {c} vs band {band}");
            }
        }
    }

    #[test]
    fn correlogram_shape_and_bands() {
        let x = standard_normals(2000, 17);
        let rows = correlogram_table(&x, 20, &CorrSpec::VOLATILITY_GIVEN_POS).unwrap();
        assert_eq!(rows.len(), 20);
        for row in &rows {
            assert_eq!(row.band, 1.96 / (row.n as f64).sqrt());
            assert!(row.lag >= 1 && row.lag <= 20);
        }
        // Roughly 95% of iid entries sit inside the band; allow slack.
        let inside = rows
            .iter()
            .filter(|r| r.corr.map(|c| c.abs() <= r.band).unwrap_or(false))
            .count();
        assert!(inside >= 17, "only {inside}/20 inside the band");
    }

    #[test]
    fn ljung_box_zero_correlation_series() {
        // Choose the last point so the lag-1 conditioned covariance vanishes.
        let mut x = vec![1.0, 2.0, 1.0, 2.0, 3.0, 0.0];
        let spec = CorrSpec::new(
            SignCondition::Any,
            SignCondition::Any,
            Transform::Id,
            Transform::Id,
        );
        // Lag-1 pairs (u = x_t, v = x_{t-1}); covariance is linear in the
        // unknown last u, so solve sum_i u_i (v_i - mean(v)) = 0 for it.
        let u = [2.0, 1.0, 2.0, 3.0];
        let v = [1.0, 2.0, 1.0, 2.0, 3.0];
        let mv = v.iter().sum::<f64>() / 5.0;
        let dv_last = 3.0 - mv;
        let partial: f64 = u.iter().zip(&v[..4]).map(|(a, b)| a * (b - mv)).sum::<f64>();
        let c = -partial / dv_last;
        x[5] = c;
        let q = modified_ljung_box(&x, 1, &spec).unwrap();
        assert!(q.abs() < 1e-20, "q = {q}");
    }

    #[test]
    fn ljung_box_grows_on_persistent_series() {
        // Strongly autocorrelated series: every added lag contributes.
        let x: Vec<f64> = (0..400).map(|i| ((i as f64) * 0.02).sin() + 2.0).collect();
        let spec = CorrSpec::new(
            SignCondition::Any,
            SignCondition::Any,
            Transform::Id,
            Transform::Id,
        );
        let mut prev = 0.0;
        for max_lag in 1..=10 {
            let q = modified_ljung_box(&x, max_lag, &spec).unwrap();
            assert!(q >= prev, "q {q} at {max_lag} below {prev}");
            prev = q;
        }
    }

    #[test]
    fn ljung_box_rejects_thin_lags() {
        let x = [1.0, -1.0, 2.0, -2.0, 1.5, -0.5, 0.7, -0.9];
        // Conditioning on both sides positive leaves almost no pairs.
        let spec = CorrSpec::UP_UP;
        assert!(modified_ljung_box(&x, 4, &spec).is_err());
    }

    #[test]
    fn short_series_rejected() {
        let x = [0.1, 0.2, 0.3];
        assert!(conditional_correlation(&x, 1, &CorrSpec::UP_UP).is_err());
        assert!(conditional_correlation(&x, 0, &CorrSpec::UP_UP).is_err());
    }

    #[test]
    fn ar1_of_persistent_vs_noise() {
        let x: Vec<f64> = (0..600).map(|i| ((i as f64) * 0.01).sin()).collect();
        assert!(ar1_coefficient(&x).unwrap() > 0.9);
        let noise = standard_normals(600, 23);
        assert!(ar1_coefficient(&noise).unwrap().abs() < 0.15);
    }

    proptest! {
        /// abs-transform equivalence: with the current side conditioned
        /// positive, id and abs transforms agree exactly.
        #[test]
        fn prop_abs_equivalence(seed in 0u64..500) {
            let x = standard_normals(200, seed);
            let with_id = CorrSpec::new(
                SignCondition::Pos, SignCondition::Any, Transform::Id, Transform::Abs);
            let with_abs = CorrSpec::new(
                SignCondition::Pos, SignCondition::Any, Transform::Abs, Transform::Abs);
            for lag in 1..=3usize {
                let a = conditional_correlation(&x, lag, &with_id).unwrap();
                let b = conditional_correlation(&x, lag, &with_abs).unwrap();
                prop_assert_eq!(a, b);
            }
        }

        /// Negating the current side flips the correlation sign exactly.
        #[test]
        fn prop_neg_antisymmetry(seed in 0u64..500) {
            let x = standard_normals(200, seed.wrapping_add(1000));
            let plain = CorrSpec::new(
                SignCondition::Neg, SignCondition::Any, Transform::Id, Transform::Abs);
            let negated = CorrSpec::new(
                SignCondition::Neg, SignCondition::Any, Transform::Neg, Transform::Abs);
            for lag in 1..=3usize {
                let a = conditional_correlation(&x, lag, &plain).unwrap();
                let b = conditional_correlation(&x, lag, &negated).unwrap();
                prop_assert_eq!(a.n, b.n);
                match (a.corr, b.corr) {
                    (Some(ca), Some(cb)) => prop_assert_eq!(ca, -cb),
                    (ca, cb) => prop_assert_eq!(ca, cb),
                }
            }
        }
    }
}
