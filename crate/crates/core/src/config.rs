//! Fiber, dopant, numerics and launch parameters.
//!
//! Every physical quantity is SI. The configuration file is JSON with four
//! top-level objects (`fiber`, `dopant`, `numerics`, `launch`); see
//! `configs/tm_nufern.json` and `configs/yb_nufern.json` for the two
//! reference fibers.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::ConfigError;
use crate::scalar::Scalar;

/// Tolerance on `sum(launch fractions) == 1`.
pub const LAUNCH_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct FiberSpec<T> {
    /// Core radius (m).
    pub r_core: T,
    /// Cladding radius (m).
    pub r_clad: T,
    pub n_core: T,
    pub numerical_aperture: T,
    /// Signal vacuum wavelength (m).
    pub lambda_s: T,
    /// Pump vacuum wavelength (m).
    pub lambda_p: T,
    /// Physical fiber length (m).
    pub length: T,
    /// Radius of the doped region (m). Defaults to the core radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doped_radius: Option<T>,
}

impl<T: Scalar> FiberSpec<T> {
    /// Cladding index, always derived from `n_core` and the numerical aperture.
    pub fn n_clad(&self) -> T {
        (self.n_core * self.n_core - self.numerical_aperture * self.numerical_aperture).sqrt()
    }

    /// Refractive index at radius `r`.
    #[inline]
    pub fn index_at(&self, r: T) -> T {
        if r < self.r_core {
            self.n_core
        } else {
            self.n_clad()
        }
    }

    pub fn doped_radius(&self) -> T {
        self.doped_radius.unwrap_or(self.r_core)
    }

    /// Area of the full cross-section out to the cladding radius.
    pub fn cross_section_area(&self) -> T {
        T::PI() * self.r_clad * self.r_clad
    }

    pub fn k_s(&self) -> T {
        T::TAU() / self.lambda_s
    }

    pub fn k_p(&self) -> T {
        T::TAU() / self.lambda_p
    }

    pub fn omega_s(&self) -> T {
        T::lit(SPEED_OF_LIGHT) * self.k_s()
    }

    pub fn omega_p(&self) -> T {
        T::lit(SPEED_OF_LIGHT) * self.k_p()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let zero = T::zero();
        let positive = [
            ("fiber.r_core", self.r_core),
            ("fiber.r_clad", self.r_clad),
            ("fiber.n_core", self.n_core),
            ("fiber.lambda_s", self.lambda_s),
            ("fiber.lambda_p", self.lambda_p),
            ("fiber.length", self.length),
        ];
        for (name, v) in positive {
            if !(v > zero) || !v.is_finite() {
                return invalid(format!("{name} must be finite and > 0 (got {v})"));
            }
        }
        if self.r_core >= self.r_clad {
            return invalid(format!(
                "0 < r_core < r_clad violated (r_core = {}, r_clad = {})",
                self.r_core, self.r_clad
            ));
        }
        let na = self.numerical_aperture;
        if !(na > zero && na < self.n_core) {
            return invalid(format!("0 < NA < n_core violated (NA = {na}, n_core = {})", self.n_core));
        }
        if self.lambda_p >= self.lambda_s {
            return invalid(format!(
                "lambda_p < lambda_s violated (lambda_p = {}, lambda_s = {})",
                self.lambda_p, self.lambda_s
            ));
        }
        if let Some(rd) = self.doped_radius {
            if !(rd > zero && rd <= self.r_clad) {
                return invalid(format!("0 < doped_radius <= r_clad violated (doped_radius = {rd})"));
            }
        }
        Ok(())
    }
}

/// Wave numbers `(k_s, k_p)` in rad/m.
pub fn derive_wave_numbers<T: Scalar>(fiber: &FiberSpec<T>) -> (T, T) {
    (fiber.k_s(), fiber.k_p())
}

/// Thulium four-manifold rate-equation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct TmDopantSpec<T> {
    pub sigma_abs_p: T,
    pub sigma_ems_p: T,
    pub sigma_abs_s: T,
    pub sigma_ems_s: T,
    pub tau_10: T,
    pub tau_20: T,
    pub tau_21: T,
    pub tau_30: T,
    pub tau_31: T,
    pub tau_32: T,
    /// Non-radiative decay rate out of manifold 1 (Hz).
    pub gamma_1: T,
    pub gamma_2: T,
    pub gamma_3: T,
    /// Dopant concentration (ions/m^3).
    pub n_total: T,
    /// Cross-relaxation rate constant (m^3/s).
    pub kappa_r: T,
}

impl<T: Scalar> TmDopantSpec<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("sigma_abs_p", self.sigma_abs_p),
            ("sigma_ems_p", self.sigma_ems_p),
            ("sigma_abs_s", self.sigma_abs_s),
            ("sigma_ems_s", self.sigma_ems_s),
            ("gamma_1", self.gamma_1),
            ("gamma_2", self.gamma_2),
            ("gamma_3", self.gamma_3),
            ("kappa_r", self.kappa_r),
        ];
        for (name, v) in fields {
            nonnegative(name, v)?;
        }
        // Lifetimes enter as rates 1/tau; they must be strictly positive.
        let lifetimes = [
            ("tau_10", self.tau_10),
            ("tau_20", self.tau_20),
            ("tau_21", self.tau_21),
            ("tau_30", self.tau_30),
            ("tau_31", self.tau_31),
            ("tau_32", self.tau_32),
        ];
        for (name, v) in lifetimes {
            if !(v > T::zero()) || !v.is_finite() {
                return invalid(format!("dopant.{name} must be > 0 (got {v})"));
            }
        }
        if !(self.n_total > T::zero()) {
            return invalid(format!("dopant.n_total must be > 0 (got {})", self.n_total));
        }
        Ok(())
    }
}

/// Ytterbium two-level parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct YbDopantSpec<T> {
    pub sigma_abs_p: T,
    pub sigma_ems_p: T,
    pub sigma_abs_s: T,
    pub sigma_ems_s: T,
    /// Upper-level radiative lifetime (s).
    pub tau: T,
    pub n_total: T,
}

impl<T: Scalar> YbDopantSpec<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("sigma_abs_p", self.sigma_abs_p),
            ("sigma_ems_p", self.sigma_ems_p),
            ("sigma_abs_s", self.sigma_abs_s),
            ("sigma_ems_s", self.sigma_ems_s),
        ] {
            nonnegative(name, v)?;
        }
        if !(self.tau > T::zero()) {
            return invalid(format!("dopant.tau must be > 0 (got {})", self.tau));
        }
        if !(self.n_total > T::zero()) {
            return invalid(format!("dopant.n_total must be > 0 (got {})", self.n_total));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", tag = "kind")]
pub enum DopantSpec<T> {
    Tm(TmDopantSpec<T>),
    Yb(YbDopantSpec<T>),
}

impl<T: Scalar> DopantSpec<T> {
    pub fn n_total(&self) -> T {
        match self {
            DopantSpec::Tm(d) => d.n_total,
            DopantSpec::Yb(d) => d.n_total,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DopantSpec::Tm(_) => "Tm",
            DopantSpec::Yb(_) => "Yb",
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            DopantSpec::Tm(d) => d.validate(),
            DopantSpec::Yb(d) => d.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SolverKind {
    /// Classical fourth-order Runge-Kutta.
    #[default]
    #[serde(rename = "rk4")]
    Rk4,
    /// Seven-stage Dormand-Prince 5(4), run with a fixed step.
    #[serde(rename = "dopri")]
    DormandPrince,
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(SolverKind::Rk4),
            "dopri" | "dormand-prince" => Ok(SolverKind::DormandPrince),
            other => Err(format!("unknown solver '{other}' (expected rk4 or dopri)")),
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolverKind::Rk4 => "rk4",
            SolverKind::DormandPrince => "dopri",
        })
    }
}

fn default_steps_per_beat() -> u32 {
    50
}
fn default_radial_order() -> usize {
    24
}
fn default_angular_points() -> usize {
    64
}
fn default_single_mode_steps() -> f64 {
    1e4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct NumericsSpec<T> {
    #[serde(default = "default_steps_per_beat")]
    pub steps_per_beat: u32,
    /// Gauss points per radial panel.
    #[serde(default = "default_radial_order")]
    pub radial_quad_order: usize,
    /// Equispaced angular points on [0, 2pi).
    #[serde(default = "default_angular_points")]
    pub angular_quad_points: usize,
    #[serde(default)]
    pub solver: SolverKind,
    /// Equivalent short-fiber length (m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_tilde: Option<T>,
    /// Record every k-th step; `None` picks roughly 2000 samples per run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_stride: Option<usize>,
    /// Step density used when only one mode is guided (no beat length).
    #[serde(default = "default_single_mode_steps")]
    pub single_mode_steps_per_meter: f64,
}

impl<T: Scalar> Default for NumericsSpec<T> {
    fn default() -> Self {
        Self {
            steps_per_beat: default_steps_per_beat(),
            radial_quad_order: default_radial_order(),
            angular_quad_points: default_angular_points(),
            solver: SolverKind::Rk4,
            l_tilde: None,
            output_stride: None,
            single_mode_steps_per_meter: default_single_mode_steps(),
        }
    }
}

impl<T: Scalar> NumericsSpec<T> {
    pub fn validate(&self, fiber_length: T) -> Result<(), ConfigError> {
        if self.steps_per_beat < 1 {
            return invalid("numerics.steps_per_beat must be >= 1".into());
        }
        if self.radial_quad_order < 4 || self.angular_quad_points < 4 {
            return invalid(format!(
                "quadrature orders must be >= 4 (radial {}, angular {})",
                self.radial_quad_order, self.angular_quad_points
            ));
        }
        if let Some(lt) = self.l_tilde {
            if !(lt > T::zero() && lt <= fiber_length) {
                return invalid(format!("0 < l_tilde <= L violated (l_tilde = {lt}, L = {fiber_length})"));
            }
        }
        if self.output_stride == Some(0) {
            return invalid("numerics.output_stride must be >= 1".into());
        }
        if !(self.single_mode_steps_per_meter > 0.0) {
            return invalid("numerics.single_mode_steps_per_meter must be > 0".into());
        }
        Ok(())
    }
}

/// Launch powers at z = 0 and the per-mode split of the signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct LaunchSpec<T> {
    /// Pump power P_p0 (W).
    pub pump_power: T,
    /// Signal power P_s0 (W).
    pub signal_power: T,
    /// Fraction of the signal power in each guided mode (mode order as solved).
    pub fractions: Vec<T>,
}

impl<T: Scalar> LaunchSpec<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        nonnegative("launch.pump_power", self.pump_power)?;
        nonnegative("launch.signal_power", self.signal_power)?;
        validate_fractions(&self.fractions)
    }
}

/// Checks that launch fractions are nonnegative and sum to one.
pub fn validate_fractions<T: Scalar>(fractions: &[T]) -> Result<(), ConfigError> {
    if fractions.is_empty() {
        return invalid("launch.fractions must not be empty".into());
    }
    if let Some(f) = fractions.iter().find(|f| !(**f >= T::zero())) {
        return invalid(format!("launch fractions must be nonnegative (got {f})"));
    }
    let sum: T = fractions.iter().copied().sum();
    if (sum - T::one()).abs() > T::lit(LAUNCH_SUM_TOL).max(T::epsilon() * T::lit(8.0)) {
        return invalid(format!("launch fractions must sum to 1 (sum = {sum})"));
    }
    Ok(())
}

/// A complete simulation configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
pub struct SimConfig<T> {
    pub fiber: FiberSpec<T>,
    pub dopant: DopantSpec<T>,
    #[serde(default)]
    pub numerics: NumericsSpec<T>,
    pub launch: LaunchSpec<T>,
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.fiber.validate()?;
        self.dopant.validate()?;
        self.numerics.validate(self.fiber.length)?;
        self.launch.validate()
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form; stamped into output headers.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Reads, parses and validates a configuration file.
pub fn load_config<T: Scalar>(path: impl AsRef<Path>) -> Result<SimConfig<T>, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: SimConfig<T> = SimConfig::from_json_str(&text).map_err(|source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    config.validate()?;
    Ok(config)
}

fn nonnegative<T: Scalar>(name: &str, v: T) -> Result<(), ConfigError> {
    if !(v >= T::zero()) || !v.is_finite() {
        return invalid(format!("{name} must be finite and >= 0 (got {v})"));
    }
    Ok(())
}

fn invalid<R>(msg: String) -> Result<R, ConfigError> {
    Err(ConfigError::Invalid(msg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fiber() -> FiberSpec<f64> {
        FiberSpec {
            r_core: 1.25e-5,
            r_clad: 2e-4,
            n_core: 1.450971,
            numerical_aperture: 0.06,
            lambda_s: 1064e-9,
            lambda_p: 976e-9,
            length: 10.0,
            doped_radius: None,
        }
    }

    #[test]
    fn cladding_index_from_numerical_aperture() {
        let f = fiber();
        // sqrt(1.450971^2 - 0.06^2), evaluated independently.
        assert!((f.n_clad() - 1.449729920654533).abs() < 1e-12);
        assert_eq!(format!("{:.6}", f.n_clad()), "1.449730");
        let lhs = f.n_clad().powi(2) + f.numerical_aperture.powi(2);
        assert!((lhs - f.n_core.powi(2)).abs() / f.n_core.powi(2) < 1e-12);
    }

    #[test]
    fn wave_numbers() {
        let mut f = fiber();
        f.lambda_s = 2110e-9;
        f.lambda_p = 976e-9;
        let (ks, kp) = derive_wave_numbers(&f);
        // 2pi/lambda evaluated independently.
        assert!((ks - 2_977_812.941_791_27).abs() / ks < 1e-12);
        assert!((kp - 6_437_689.863_913_51).abs() / kp < 1e-12);
        f.lambda_s = std::f64::consts::TAU;
        f.lambda_p = 1.0;
        assert_eq!(f.k_s(), 1.0);
        assert!((f.omega_s() - SPEED_OF_LIGHT).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut f = fiber();
        f.r_core = 3e-4;
        let err = f.validate().unwrap_err().to_string();
        assert!(err.contains("r_core < r_clad"), "{err}");
        let mut f = fiber();
        f.numerical_aperture = 2.0;
        assert!(f.validate().unwrap_err().to_string().contains("NA < n_core"));
        let mut f = fiber();
        f.lambda_p = 1.2e-6;
        assert!(f.validate().unwrap_err().to_string().contains("lambda_p < lambda_s"));
    }

    #[test]
    fn launch_fractions_must_sum_to_one() {
        assert!(validate_fractions(&[0.5, 0.4]).is_err());
        assert!(validate_fractions(&[1.2, -0.2]).is_err());
        assert!(validate_fractions(&[0.3, 0.7]).is_ok());
        assert!(validate_fractions::<f64>(&[]).is_err());
    }

    #[test]
    fn solver_names() {
        assert_eq!("rk4".parse::<SolverKind>().unwrap(), SolverKind::Rk4);
        assert_eq!("dopri".parse::<SolverKind>().unwrap(), SolverKind::DormandPrince);
        assert!("euler".parse::<SolverKind>().is_err());
        assert_eq!(SolverKind::DormandPrince.to_string(), "dopri");
    }
}
