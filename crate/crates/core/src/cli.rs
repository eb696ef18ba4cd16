//! Command-line driver: data ingestion, subcommand dispatch, and report
//! emission.
//!
//! Subcommands: `estimate` (fit a model, optionally with bootstrap standard
//! errors and the shock-equality test), `simulate` (path or ensemble
//! generation), `diagnose` (correlograms, Ljung-Box and inferred moments
//! from a saved fit), `compare` (the four-model likelihood ladder plus the
//! Gaussian benchmark), and `replicate-table9` (the built-in GJR ensemble
//! preset). Randomized commands accept `--seed` and are bit-reproducible
//! under it.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baseline::{fit_gjr_garch_gaussian, GjrGarchParams};
use crate::diagnostics::{correlogram_table, inferred_moments, modified_ljung_box, CorrSpec};
use crate::estimate::{
    bootstrap_se, fit_mle, fit_model_catalog, test_alpha_equality, Constraints, FitConfig,
    FitResult, LambdaInit,
};
use crate::intensity::{default_lambda0, ModelSpec, ParamSet, Variant};
use crate::io::{
    format_correlogram, format_ensemble, format_moments, format_series, load_fit, load_series,
    save_fit, series_stats, write_atomic, InputColumn,
};
use crate::simulate::{
    replication_preset, replication_requests, simulate_ensemble, simulate_path,
};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "garch-intensity",
    version,
    about = "Skellam-return asset model with GARCH-type jump intensities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit an intensity model to a return or price series by maximum
    /// likelihood.
    Estimate(EstimateArgs),
    /// Simulate a single path (series file) or an ensemble (statistic
    /// table) from explicit parameters or a saved fit.
    Simulate(SimulateArgs),
    /// Correlogram tables, Ljung-Box statistics and inferred conditional
    /// moments from a saved fit.
    Diagnose(DiagnoseArgs),
    /// Fit the four-model comparison ladder plus the Gaussian
    /// ARMA(1,1)-GJR-GARCH benchmark.
    Compare(CompareArgs),
    /// Run the built-in 100x5000 GJR ensemble preset and report
    /// conditional-correlation statistics.
    #[command(name = "replicate-table9")]
    ReplicateTable9(ReplicateArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Input series file (delimited text with a one-line header).
    #[arg(long)]
    input: PathBuf,
    /// Which column carries the data: a price level or a log-return.
    #[arg(long, default_value = "return")]
    column: String,
}

impl InputArgs {
    fn load(&self) -> Result<crate::io::ReturnSeries> {
        let column = InputColumn::parse(&self.column)?;
        load_series(&self.input, column)
    }
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Intensity recursion: basic, asymmetric, nonlinear-asymmetric, gjr,
    /// news-impact, qgarch, heston-nandi, vgarch.
    #[arg(long, default_value = "basic")]
    variant: String,
    /// Impose a shared persistence coefficient on both directions.
    #[arg(long, default_value_t = false)]
    beta_equal: bool,
    /// Jump size in log-return units.
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
    /// Time step (rates are per dt).
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
}

impl ModelArgs {
    fn spec(&self) -> Result<ModelSpec> {
        ModelSpec::new(Variant::parse(&self.variant)?, self.beta_equal, self.delta, self.dt)
    }
}

#[derive(Args, Debug, Clone)]
struct OptimArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multi-start count for the simplex search.
    #[arg(long, default_value_t = 3)]
    n_starts: usize,
    /// Iteration cap per simplex run.
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    /// Restart rounds per start.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Simplex objective-spread tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Fixed initial intensity pair "a,b" (default: stationary mean).
    #[arg(long)]
    lambda0: Option<String>,
}

impl OptimArgs {
    fn fit_config(&self, constraints: Constraints) -> Result<FitConfig> {
        Ok(FitConfig {
            n_starts: self.n_starts,
            max_iters: self.max_iters,
            max_restarts: self.restarts,
            spread_tol: self.tol,
            seed: self.seed,
            constraints,
            lambda_init: match &self.lambda0 {
                Some(s) => {
                    let (a, b) = parse_pair(s)?;
                    LambdaInit::Fixed(a, b)
                }
                None => LambdaInit::Stationary,
            },
            start: None,
        })
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    optim: OptimArgs,
    /// Bootstrap replicate count for standard errors (0 = off).
    #[arg(long, default_value_t = 0)]
    bootstrap: usize,
    /// Replicates for the shock-coefficient equality test (0 = off).
    #[arg(long, default_value_t = 0)]
    alpha_test: usize,
    /// Write the fit document here (TOML).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Take spec and parameters from a saved fit document instead of flags.
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long)]
    omega_plus: Option<f64>,
    #[arg(long)]
    omega_minus: Option<f64>,
    #[arg(long)]
    beta_plus: Option<f64>,
    #[arg(long)]
    beta_minus: Option<f64>,
    #[arg(long)]
    alpha_plus: Option<f64>,
    #[arg(long)]
    alpha_minus: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    gamma_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma_minus: f64,
    /// Steps per path.
    #[arg(long, default_value_t = 5000)]
    steps: usize,
    /// Number of independent paths; above 1 an ensemble statistic table is
    /// emitted instead of a series.
    #[arg(long, default_value_t = 1)]
    paths: usize,
    /// Initial intensity pair "a,b" (default: stationary mean).
    #[arg(long)]
    lambda0: Option<String>,
    /// Initial price level for the emitted price column.
    #[arg(long, default_value_t = 1.0)]
    s0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum lag for ensemble Ljung-Box statistics.
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    /// Output file (series for one path, statistic table for an ensemble).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Saved fit document to diagnose with.
    #[arg(long)]
    fit: PathBuf,
    #[arg(long, default_value_t = 20)]
    max_lag: usize,
    /// Directory the report files are written into.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Jump size in log-return units.
    #[arg(long, default_value_t = 0.005)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    n_starts: usize,
    /// Write the comparison document here (TOML).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReplicateArgs {
    #[arg(long, default_value_t = 100)]
    paths: usize,
    #[arg(long, default_value_t = 5000)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the statistic table here (TSV).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Config(format!("expected 'a,b', got '{s}'")));
    }
    let a: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad number '{}'", parts[0])))?;
    let b: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad number '{}'", parts[1])))?;
    Ok((a, b))
}

/// Runs the tool on an argument vector and returns the process exit status.
/// Artifacts are written as a side effect; human-readable summaries go to
/// stdout, errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Domain(_) => 2,
                Error::Parse { .. } => 3,
                Error::Estimation(_) => 4,
                Error::Io(_) => 5,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Compare(args) => cmd_compare(args),
        Command::ReplicateTable9(args) => cmd_replicate(args),
    }
}

fn print_series_stats(returns: &[f64]) {
    let s = series_stats(returns);
    println!(
        "series: n={} mean(ann)={:.4} std(ann)={:.4} skewness={:.4} kurtosis={:.4}",
        s.n, s.mean_annualized, s.std_annualized, s.skewness, s.kurtosis
    );
}

fn print_fit(fit: &FitResult) {
    println!(
        "fit: variant={} beta_equal={} delta={} dt={}",
        fit.spec.variant.name(),
        fit.spec.beta_equal,
        fit.spec.delta,
        fit.spec.dt
    );
    println!(
        "loglik={:.4} (-loglik={:.4}) converged={} evals={} starts={}",
        fit.loglik, -fit.loglik, fit.converged, fit.iterations, fit.start_points_used
    );
    let se: BTreeMap<&str, f64> = fit
        .se
        .as_deref()
        .map(|v| v.iter().map(|(k, s)| (k.as_str(), *s)).collect())
        .unwrap_or_default();
    let p = &fit.params;
    let rows = [
        ("omega_plus", p.omega_plus),
        ("omega_minus", p.omega_minus),
        ("beta_plus", p.beta_plus),
        ("beta_minus", p.beta_minus),
        ("alpha_plus", p.alpha_plus),
        ("alpha_minus", p.alpha_minus),
        ("gamma_plus", p.gamma_plus),
        ("gamma_minus", p.gamma_minus),
    ];
    println!("params:");
    for (name, v) in rows {
        if name.starts_with("gamma") && !fit.spec.variant.uses_gamma() {
            continue;
        }
        match se.get(name).or_else(|| {
            // Shared coordinates report under the pooled name.
            let pooled = name.trim_end_matches("_plus").trim_end_matches("_minus");
            se.get(pooled)
        }) {
            Some(s) => println!("  {name:<12} {v:>14.6e}  (se {s:.3e})"),
            None => println!("  {name:<12} {v:>14.6e}"),
        }
    }
    let n = &fit.normalized;
    println!("normalized:");
    println!("  omega_plus*  {:>14.6e}", n.omega_plus);
    println!("  omega_minus* {:>14.6e}", n.omega_minus);
    println!("  alpha_plus*  {:>14.6e}", n.alpha_plus);
    println!("  alpha_minus* {:>14.6e}", n.alpha_minus);
    if fit.spec.variant.uses_gamma() {
        println!("  gamma_plus*  {:>14.6e}", n.gamma_plus);
        println!("  gamma_minus* {:>14.6e}", n.gamma_minus);
    }
    println!("  stationarity margin {:.6}", n.stationarity_margin);
    println!(
        "lambda0: ({:.6}, {:.6})  n_obs={}",
        fit.lambda0.0, fit.lambda0.1, fit.n_obs
    );
}

fn cmd_estimate(args: EstimateArgs) -> Result<()> {
    let series = args.input.load()?;
    print_series_stats(&series.returns);
    let spec = args.model.spec()?;
    let config = args.optim.fit_config(Constraints::default())?;
    let mut fit = fit_mle(&spec, &series.returns, &config)?;

    if args.bootstrap > 0 {
        let boot = bootstrap_se(&fit, args.bootstrap, args.optim.seed)?;
        println!(
            "bootstrap: B={} used={} dropped={}",
            args.bootstrap, boot.n_used, boot.n_dropped
        );
        fit.se = Some(boot.se);
    }
    print_fit(&fit);

    if args.alpha_test > 0 {
        let test = test_alpha_equality(
            &spec,
            &series.returns,
            args.alpha_test,
            args.optim.seed,
            &config,
        )?;
        println!(
            "alpha equality test: t={:.6e} p={:.4} (B={}, dropped={})",
            test.t_observed, test.p_value, args.alpha_test, test.n_dropped
        );
    }

    if let Some(out) = &args.out {
        save_fit(out, &fit)?;
        println!("fit written to {}", out.display());
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let (spec, params) = match &args.fit {
        Some(path) => {
            let fit = load_fit(path)?;
            (fit.spec, fit.params)
        }
        None => {
            let spec = args.model.spec()?;
            let require = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| {
                    Error::Config(format!("--{name} is required without --fit"))
                })
            };
            let params = ParamSet {
                omega_plus: require(args.omega_plus, "omega-plus")?,
                omega_minus: require(args.omega_minus, "omega-minus")?,
                beta_plus: require(args.beta_plus, "beta-plus")?,
                beta_minus: require(args.beta_minus, "beta-minus")?,
                alpha_plus: require(args.alpha_plus, "alpha-plus")?,
                alpha_minus: require(args.alpha_minus, "alpha-minus")?,
                gamma_plus: args.gamma_plus,
                gamma_minus: args.gamma_minus,
            };
            params.validate(&spec)?;
            (spec, params)
        }
    };
    let lambda0 = match &args.lambda0 {
        Some(s) => parse_pair(s)?,
        None => default_lambda0(&spec, &params),
    };

    if args.paths <= 1 {
        let sim = simulate_path(&spec, &params, args.steps, lambda0, args.s0, args.seed)?;
        write_atomic(&args.out, &format_series(&sim.path.returns, Some(&sim.prices)))?;
        println!(
            "wrote {} steps to {} (seed {})",
            args.steps,
            args.out.display(),
            args.seed
        );
    } else {
        let mut requests = Vec::new();
        for spec in CorrSpec::STANDARD_ROWS {
            for lag in crate::simulate::REPLICATION_LAGS {
                requests.push(crate::simulate::StatRequest::CondCorr { spec, lag });
            }
        }
        requests.push(crate::simulate::StatRequest::LjungBox {
            spec: CorrSpec::VOLATILITY_GIVEN_POS,
            max_lag: args.max_lag,
        });
        requests.push(crate::simulate::StatRequest::LjungBox {
            spec: CorrSpec::VOLATILITY_GIVEN_NEG,
            max_lag: args.max_lag,
        });
        let stats = simulate_ensemble(
            &spec,
            &params,
            args.steps,
            args.paths,
            lambda0,
            args.seed,
            &requests,
        )?;
        write_atomic(&args.out, &format_ensemble(&stats))?;
        println!(
            "wrote {} ensemble statistics ({} paths x {} steps) to {}",
            stats.len(),
            args.paths,
            args.steps,
            args.out.display()
        );
    }
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<()> {
    let series = args.input.load()?;
    let fit = load_fit(&args.fit)?;
    std::fs::create_dir_all(&args.out)?;

    println!("statistic\tq_{}\tfile", args.max_lag);
    for spec in CorrSpec::STANDARD_ROWS {
        let rows = correlogram_table(&series.returns, args.max_lag, &spec)?;
        let file = args.out.join(format!("correlogram_{}.tsv", spec.slug()));
        write_atomic(&file, &format_correlogram(&rows))?;
        let q = modified_ljung_box(&series.returns, args.max_lag, &spec);
        let q_text = match q {
            Ok(v) => format!("{v:.1}"),
            Err(_) => "nan".to_string(),
        };
        println!("{}\t{}\t{}", spec.label(), q_text, file.display());
    }

    let moments = inferred_moments(&fit, &series.returns)?;
    let file = args.out.join("inferred_moments.tsv");
    write_atomic(&file, &format_moments(&moments))?;
    println!("inferred moments written to {}", file.display());
    Ok(())
}

/// Persistent form of the four-model comparison.
#[derive(Debug, Serialize, Deserialize)]
pub struct CompareDocument {
    pub delta: f64,
    pub dt: f64,
    pub models: BTreeMap<String, CompareEntry>,
    pub baseline: BaselineEntry,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CompareEntry {
    pub minus_loglik: f64,
    pub converged: bool,
    pub params: ParamSet,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub minus_loglik: f64,
    pub converged: bool,
    pub stationary: bool,
    pub params: GjrGarchParams,
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let series = args.input.load()?;
    print_series_stats(&series.returns);

    let catalog = fit_model_catalog(&series.returns, args.delta, args.dt, args.seed, args.n_starts)?;
    println!("model\t-loglik\tconverged");
    let mut models = BTreeMap::new();
    for (name, fit) in catalog.rows() {
        println!("{name}\t{:.2}\t{}", -fit.loglik, fit.converged);
        models.insert(
            name.to_string(),
            CompareEntry {
                minus_loglik: -fit.loglik,
                converged: fit.converged,
                params: fit.params,
            },
        );
    }

    let bench = fit_gjr_garch_gaussian(&series.returns)?;
    println!(
        "baseline-gjr-garch\t{:.2}\t{} (gaussian; not comparable to count likelihoods)",
        -bench.loglik, bench.converged
    );

    if let Some(out) = &args.out {
        let doc = CompareDocument {
            delta: args.delta,
            dt: args.dt,
            models,
            baseline: BaselineEntry {
                minus_loglik: -bench.loglik,
                converged: bench.converged,
                stationary: bench.stationary,
                params: bench.params,
            },
        };
        let text = toml::to_string_pretty(&doc)
            .map_err(|e| Error::Config(format!("cannot serialize comparison: {e}")))?;
        write_atomic(out, &text)?;
        println!("comparison written to {}", out.display());
    }
    Ok(())
}

fn cmd_replicate(args: ReplicateArgs) -> Result<()> {
    let (spec, params, lambda0) = replication_preset();
    let requests = replication_requests();
    let stats = simulate_ensemble(
        &spec,
        &params,
        args.steps,
        args.paths,
        lambda0,
        args.seed,
        &requests,
    )?;
    println!(
        "ensemble: {} paths x {} steps, seed {}",
        args.paths, args.steps, args.seed
    );
    println!("statistic\tmean\tsd");
    for s in &stats {
        println!("{}\t{:.3}\t({:.3})", s.label, s.mean, s.sd);
    }
    if let Some(out) = &args.out {
        write_atomic(out, &format_ensemble(&stats))?;
        println!("table written to {}", out.display());
    }
    Ok(())
}

/// Entry point used by the binary: forwards the process arguments.
pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pair("5,5").unwrap(), (5.0, 5.0));
        assert_eq!(parse_pair(" 2.5 , 3 ").unwrap(), (2.5, 3.0));
        assert!(parse_pair("5").is_err());
        assert!(parse_pair("a,b").is_err());
    }

    #[test]
    fn bad_flags_exit_two() {
        assert_eq!(run(["garch-intensity", "estimate"]), 2);
        assert_eq!(run(["garch-intensity", "no-such-command"]), 2);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["garch-intensity", "--help"]), 0);
    }
}
