//! Asset-return modeling with per-direction Poisson jump intensities.
//!
//! Log-returns are counted in units of a fixed jump size `delta`; the net
//! jump count over one step follows a Skellam law whose up/down rates evolve
//! by GARCH-type recursions. The crate provides:
//!
//! - numerically stable Skellam pmf evaluation and sampling ([`skellam`]),
//! - the intensity-recursion catalog, filtering and moment formulas
//!   ([`intensity`]),
//! - exact count-based log-likelihood ([`likelihood`]),
//! - maximum-likelihood fitting, parametric-bootstrap standard errors and
//!   an equality test for the up/down shock coefficients ([`estimate`]),
//! - path and ensemble simulation ([`simulate`]),
//! - sign-conditional correlograms, a modified Ljung-Box statistic and
//!   inferred conditional moments ([`diagnostics`]),
//! - a Gaussian ARMA(1,1)-GJR-GARCH reference model ([`baseline`]),
//! - file ingestion/report formats ([`io`]) and the command-line driver
//!   ([`cli`]).

pub mod baseline;
pub mod cli;
pub mod diagnostics;
pub mod estimate;
pub mod intensity;
pub mod io;
pub mod likelihood;
pub(crate) mod optim;
pub mod simulate;
pub mod skellam;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument is outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Bad configuration (flags, model/constraint combinations, settings).
    #[error("config error: {0}")]
    Config(String),
    /// Input data could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Estimation could not produce a usable result.
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Derives a child seed from a master seed and a stream index.
///
/// Replicates, simulation paths and multi-start perturbations each consume a
/// counter-derived seed, so results do not depend on scheduling order.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    // splitmix64 finalizer applied twice; any fixed bijective mixer works.
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(stream.wrapping_add(0x51_7C_C1_B7_27_22_0A_95)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_distinct_streams() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        let c = derive_seed(43, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(42, 0));
    }
}
