//! CODATA 2018 physical constants.

use crate::scalar::Scalar;

/// Fixed physical constants (SI). Not configurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    /// Speed of light in vacuum (m/s).
    pub c: T,
    /// Vacuum magnetic permeability (H/m).
    pub mu0: T,
    /// Reduced Planck constant (J s).
    pub hbar: T,
}

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

impl<T: Scalar> PhysicalConstants<T> {
    pub fn codata() -> Self {
        Self {
            c: T::lit(SPEED_OF_LIGHT),
            mu0: T::lit(VACUUM_PERMEABILITY),
            hbar: T::lit(REDUCED_PLANCK),
        }
    }

    /// Vacuum impedance `mu0 * c`; irradiance is `n |U|^2 / (mu0 c)`.
    pub fn impedance(&self) -> T {
        self.mu0 * self.c
    }
}

impl<T: Scalar> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata()
    }
}
