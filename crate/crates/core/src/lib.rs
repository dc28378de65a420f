//! Coupled-mode simulation of rare-earth-doped fiber amplifiers and the
//! equivalent short-fiber acceleration.
//!
//! The numerical core is generic over the scalar type; the aliases below
//! fix it to `f64`, which is what the command-line tool uses.

pub mod bessel;
pub mod cmt;
pub mod config;
pub mod constants;
pub mod diagnostics;
pub mod equivalent;
pub mod error;
pub mod gain;
pub mod modes;
pub mod ode;
pub mod presets;
pub mod quadrature;
pub mod report;
pub mod scalar;
pub mod simulate;

pub use error::{ConfigError, Error, Result};
pub use scalar::Scalar;

pub type Fiber = config::FiberSpec<f64>;
pub type Config = config::SimConfig<f64>;
pub type Mode = modes::GuidedMode<f64>;
pub type Modes = modes::ModeFamily<f64>;
pub type Rule = quadrature::CrossSectionRule<f64>;
pub type Trace = simulate::PowerTrace<f64>;
pub type State = cmt::StateVector<f64>;
