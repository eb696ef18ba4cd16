//! File ingestion and report formats.
//!
//! Input series are delimiter-separated text (tab, comma or semicolon,
//! detected from the one-line header) with an optional ISO-8601 `date`
//! column and either a `price` or a `return` column. Fit results persist as
//! a TOML document; diagnostic tables are tab-separated with fixed headers.
//! All writes go through a write-then-rename so readers never observe a
//! half-written file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::CorrelogramRow;
use crate::estimate::{Constraints, FitResult};
use crate::intensity::{normalize_params, ModelSpec, NormalizedParams, ParamSet};
use crate::simulate::StatSummary;
use crate::{Error, Result};

/// An ordered return series with optional per-observation dates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub returns: Vec<f64>,
    pub dates: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputColumn {
    Price,
    Return,
}

impl InputColumn {
    pub fn parse(s: &str) -> Result<InputColumn> {
        match s {
            "price" => Ok(InputColumn::Price),
            "return" => Ok(InputColumn::Return),
            other => Err(Error::Config(format!(
                "column must be 'price' or 'return', got '{other}'"
            ))),
        }
    }

    fn header_name(&self) -> &'static str {
        match self {
            InputColumn::Price => "price",
            InputColumn::Return => "return",
        }
    }
}

fn detect_delimiter(header: &str) -> char {
    if header.contains('\t') {
        '\t'
    } else if header.contains(',') {
        ','
    } else {
        ';'
    }
}

fn looks_like_iso_date(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() >= 10
        && b[..4].iter().all(u8::is_ascii_digit)
        && b[4] == b'-'
        && b[5].is_ascii_digit()
        && b[6].is_ascii_digit()
        && b[7] == b'-'
        && b[8].is_ascii_digit()
        && b[9].is_ascii_digit()
}

pub fn load_series(path: &Path, column: InputColumn) -> Result<ReturnSeries> {
    let text = fs::read_to_string(path)?;
    parse_series(&text, column)
}

/// Parses a delimited series. Line numbers in errors are 1-based and count
/// the header.
pub fn parse_series(text: &str, column: InputColumn) -> Result<ReturnSeries> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header line".into(),
    })?;
    let delim = detect_delimiter(header);
    let names: Vec<String> = header
        .split(delim)
        .map(|s| s.trim().to_ascii_lowercase())
        .collect();
    let want = column.header_name();
    let value_idx = names.iter().position(|n| n == want).ok_or(Error::Parse {
        line: 1,
        msg: format!("no '{want}' column in header '{header}'"),
    })?;
    let date_idx = names.iter().position(|n| n == "date");

    let mut values = Vec::new();
    let mut dates = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: "blank line".into(),
            });
        }
        let fields: Vec<&str> = line.split(delim).collect();
        if fields.len() != names.len() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {} fields, found {}", names.len(), fields.len()),
            });
        }
        let cell = fields[value_idx].trim();
        let v: f64 = cell.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("cannot parse '{cell}' as a number"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("non-finite value '{cell}'"),
            });
        }
        if let Some(di) = date_idx {
            let d = fields[di].trim();
            if !looks_like_iso_date(d) {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("'{d}' is not an ISO-8601 date"),
                });
            }
            dates.push(d.to_string());
        }
        values.push(v);
    }

    match column {
        InputColumn::Return => {
            if values.is_empty() {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty series".into(),
                });
            }
            Ok(ReturnSeries {
                returns: values,
                dates: date_idx.map(|_| dates),
            })
        }
        InputColumn::Price => {
            if values.len() < 2 {
                return Err(Error::Parse {
                    line: 1,
                    msg: "need at least two prices to form returns".into(),
                });
            }
            if let Some(bad) = values.iter().position(|&p| p <= 0.0) {
                return Err(Error::Parse {
                    line: bad + 2,
                    msg: "prices must be positive".into(),
                });
            }
            let returns = values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
            // A return belongs to the later date.
            Ok(ReturnSeries {
                returns,
                dates: date_idx.map(|_| dates.split_off(1)),
            })
        }
    }
}

/// Annualized summary statistics (mean by 252, standard deviation by
/// sqrt(252); skewness and kurtosis are the raw moment ratios).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStats {
    pub n: usize,
    pub mean_annualized: f64,
    pub std_annualized: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

pub fn series_stats(returns: &[f64]) -> SeriesStats {
    let n = returns.len();
    let nf = n as f64;
    let mean = returns.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &x in returns {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let var_sample = if n > 1 { m2 / (nf - 1.0) } else { 0.0 };
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    SeriesStats {
        n,
        mean_annualized: mean * 252.0,
        std_annualized: var_sample.sqrt() * 252.0f64.sqrt(),
        skewness: if m2 > 0.0 { m3 / m2.powf(1.5) } else { f64::NAN },
        kurtosis: if m2 > 0.0 { m4 / (m2 * m2) } else { f64::NAN },
    }
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Formats a simulated path as an ingestible series file
/// (`step,return[,price]`).
pub fn format_series(returns: &[f64], prices: Option<&[f64]>) -> String {
    let mut out = String::new();
    match prices {
        Some(prices) => {
            out.push_str("step,return,price\n");
            for (i, &x) in returns.iter().enumerate() {
                let _ = writeln!(out, "{},{:.17e},{:.17e}", i + 1, x, prices[i + 1]);
            }
        }
        None => {
            out.push_str("step,return\n");
            for (i, &x) in returns.iter().enumerate() {
                let _ = writeln!(out, "{},{:.17e}", i + 1, x);
            }
        }
    }
    out
}

/// Persistent form of a fit: everything `diagnose` needs to run without
/// refitting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDocument {
    pub tool_version: String,
    pub spec: ModelSpec,
    #[serde(default)]
    pub constraints: Constraints,
    pub params: ParamSet,
    pub normalized: NormalizedParams,
    pub lambda0: (f64, f64),
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub start_points_used: usize,
    pub n_obs: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<BTreeMap<String, f64>>,
}

impl FitDocument {
    pub fn from_fit(fit: &FitResult) -> FitDocument {
        FitDocument {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            spec: fit.spec,
            constraints: fit.constraints,
            params: fit.params,
            normalized: fit.normalized,
            lambda0: fit.lambda0,
            loglik: fit.loglik,
            iterations: fit.iterations,
            converged: fit.converged,
            start_points_used: fit.start_points_used,
            n_obs: fit.n_obs,
            seed: fit.seed,
            se: fit
                .se
                .as_ref()
                .map(|v| v.iter().cloned().collect::<BTreeMap<_, _>>()),
        }
    }

    pub fn to_fit(&self) -> FitResult {
        FitResult {
            spec: self.spec,
            constraints: self.constraints,
            params: self.params,
            loglik: self.loglik,
            iterations: self.iterations,
            converged: self.converged,
            start_points_used: self.start_points_used,
            se: self
                .se
                .as_ref()
                .map(|m| m.iter().map(|(k, v)| (k.clone(), *v)).collect()),
            normalized: normalize_params(&self.params, self.spec.delta),
            lambda0: self.lambda0,
            n_obs: self.n_obs,
            seed: self.seed,
        }
    }
}

pub fn save_fit(path: &Path, fit: &FitResult) -> Result<()> {
    let doc = FitDocument::from_fit(fit);
    let text = toml::to_string_pretty(&doc)
        .map_err(|e| Error::Config(format!("cannot serialize fit: {e}")))?;
    write_atomic(path, &text)
}

pub fn load_fit(path: &Path) -> Result<FitResult> {
    let text = fs::read_to_string(path)?;
    let doc: FitDocument = toml::from_str(&text).map_err(|e| Error::Parse {
        line: 1,
        msg: format!("bad fit document: {e}"),
    })?;
    doc.spec.validate()?;
    doc.params.validate(&doc.spec)?;
    Ok(doc.to_fit())
}

pub const CORRELOGRAM_HEADER: &str = "lag\tstatistic\tn\tband";

pub fn format_correlogram(rows: &[CorrelogramRow]) -> String {
    let mut out = String::from(CORRELOGRAM_HEADER);
    out.push('\n');
    for r in rows {
        let stat = match r.corr {
            Some(c) => format!("{c:.17e}"),
            None => "nan".to_string(),
        };
        let _ = writeln!(out, "{}\t{}\t{}\t{:.17e}", r.lag, stat, r.n, r.band);
    }
    out
}

pub fn parse_correlogram(text: &str) -> Result<Vec<CorrelogramRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    if header != CORRELOGRAM_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header '{header}'"),
        });
    }
    let mut rows = Vec::new();
    for (i, raw) in lines {
        let line_no = i + 1;
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("cannot parse '{s}'"),
            })
        };
        let corr_field = fields[1];
        rows.push(CorrelogramRow {
            lag: fields[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad lag '{}'", fields[0]),
            })?,
            corr: if corr_field == "nan" {
                None
            } else {
                Some(parse_f(corr_field)?)
            },
            n: fields[2].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad count '{}'", fields[2]),
            })?,
            band: parse_f(fields[3])?,
        });
    }
    Ok(rows)
}

pub const ENSEMBLE_HEADER: &str = "statistic\tmean\tsd\tpaths";

pub fn format_ensemble(stats: &[StatSummary]) -> String {
    let mut out = String::from(ENSEMBLE_HEADER);
    out.push('\n');
    for s in stats {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{}",
            s.label, s.mean, s.sd, s.paths_used
        );
    }
    out
}

pub const MOMENTS_HEADER: &str = "index\tcond_mean\tcond_var";

pub fn format_moments(moments: &[crate::diagnostics::CondMoments]) -> String {
    let mut out = String::from(MOMENTS_HEADER);
    out.push('\n');
    for (i, m) in moments.iter().enumerate() {
        let _ = writeln!(out, "{}\t{:.17e}\t{:.17e}", i + 1, m.cond_mean, m.cond_var);
    }
    out
}
