use std::path::PathBuf;

use thiserror::Error;

/// Errors raised while loading or validating a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("mode ({i},{j}) with u = {u} is not guided (beta^2 below the cladding line)")]
    NotGuided { i: u32, j: u32, u: f64 },
    #[error("fiber guides no modes at V = {0}")]
    NoModes(f64),
    #[error("beat length undefined for a single-mode fiber; supply an explicit step count")]
    SingleModeBeat,
    #[error("launch has {given} fractions but the fiber guides {modes} modes")]
    LaunchMismatch { given: usize, modes: usize },
    #[error("negative discriminant {0} in the steady-state population quadratic")]
    Discriminant(f64),
    #[error("steady-state oracle did not converge after {iterations} iterations (residual {residual:e})")]
    OracleDiverged { iterations: usize, residual: f64 },
    #[error("non-finite state at z = {z} m")]
    NonFinite { z: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
