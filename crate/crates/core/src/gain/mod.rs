//! Steady-state dopant populations and the active gains they produce.
//!
//! Each dopant exposes a closed-form steady state used on the hot path and
//! an independent damped-Newton solve of the rate equations (the oracle)
//! used to validate it.

mod oracle;
mod tm;
mod yb;

pub use oracle::{compare_with_oracle, random_irradiance_pairs, tm_oracle, yb_oracle, OracleComparison};
pub use tm::{tm_gain, tm_steady_state, TmAtPump, TmCoefficients, TmModel, TmPopulations};
pub use yb::{yb_gain, yb_steady_state, YbAtPump, YbModel, YbPopulations};

use crate::config::{DopantSpec, FiberSpec};
use crate::constants::PhysicalConstants;
use crate::scalar::Scalar;

/// Photon flux `nu = I / (hbar omega)` (photons / m^2 / s).
pub fn photon_flux<T: Scalar>(irradiance: T, omega: T) -> T {
    irradiance / (PhysicalConstants::<T>::codata().hbar * omega)
}

/// Local signal and pump gains (1/m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Gains<T> {
    pub signal: T,
    pub pump: T,
}

/// A dopant whose gains depend on local signal and pump irradiance.
///
/// The pump is a plane wave, so its irradiance is uniform over a
/// cross-section; `at_pump` folds every pump-only quantity once per
/// position so the per-node work only depends on the signal irradiance.
pub trait GainMedium<T: Scalar>: Send + Sync {
    type Local: LocalGain<T>;

    fn at_pump(&self, pump_irradiance: T) -> Self::Local;

    fn gains_at(&self, signal_irradiance: T, pump_irradiance: T) -> Gains<T> {
        self.at_pump(pump_irradiance).gains(signal_irradiance)
    }
}

pub trait LocalGain<T: Copy>: Copy + Send + Sync {
    fn gains(&self, signal_irradiance: T) -> Gains<T>;

    /// Appends the gains at each of `signal_irradiance` to `signal` and `pump`.
    fn gains_batch(&self, signal_irradiance: &[T], signal: &mut Vec<T>, pump: &mut Vec<T>) {
        for i in signal_irradiance {
            let g = self.gains(*i);
            signal.push(g.signal);
            pump.push(g.pump);
        }
    }
}

/// Spatially constant gains, independent of irradiance. Used for
/// undoped fibers and analytic checks of the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct UniformGain<T> {
    pub signal: T,
    pub pump: T,
}

impl<T: Scalar> GainMedium<T> for UniformGain<T> {
    type Local = UniformGain<T>;

    fn at_pump(&self, _pump_irradiance: T) -> Self::Local {
        *self
    }
}

impl<T: Scalar> LocalGain<T> for UniformGain<T> {
    #[inline]
    fn gains(&self, _signal_irradiance: T) -> Gains<T> {
        Gains { signal: self.signal, pump: self.pump }
    }
}

/// Gain model for one of the supported dopants.
#[derive(Debug, Clone, PartialEq)]
pub enum DopantModel<T> {
    Tm(TmModel<T>),
    Yb(YbModel<T>),
}

impl<T: Scalar> DopantModel<T> {
    pub fn new(dopant: &DopantSpec<T>, fiber: &FiberSpec<T>) -> Self {
        match dopant {
            DopantSpec::Tm(d) => DopantModel::Tm(TmModel::new(d.clone(), fiber.omega_s(), fiber.omega_p())),
            DopantSpec::Yb(d) => DopantModel::Yb(YbModel::new(d.clone(), fiber.omega_s(), fiber.omega_p())),
        }
    }

    pub fn n_total(&self) -> T {
        match self {
            DopantModel::Tm(m) => m.spec.n_total,
            DopantModel::Yb(m) => m.spec.n_total,
        }
    }
}

/// Pump-folded state of a [`DopantModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DopantLocal<T> {
    Tm(TmAtPump<T>),
    Yb(YbAtPump<T>),
}

impl<T: Scalar> LocalGain<T> for DopantLocal<T> {
    #[inline]
    fn gains(&self, signal_irradiance: T) -> Gains<T> {
        match self {
            DopantLocal::Tm(l) => l.gains(signal_irradiance),
            DopantLocal::Yb(l) => l.gains(signal_irradiance),
        }
    }

    fn gains_batch(&self, signal_irradiance: &[T], signal: &mut Vec<T>, pump: &mut Vec<T>) {
        match self {
            DopantLocal::Tm(l) => l.gains_batch(signal_irradiance, signal, pump),
            DopantLocal::Yb(l) => l.gains_batch(signal_irradiance, signal, pump),
        }
    }
}

impl<T: Scalar> GainMedium<T> for DopantModel<T> {
    type Local = DopantLocal<T>;

    fn at_pump(&self, pump_irradiance: T) -> DopantLocal<T> {
        match self {
            DopantModel::Tm(m) => DopantLocal::Tm(m.at_pump_irradiance(pump_irradiance)),
            DopantModel::Yb(m) => DopantLocal::Yb(m.at_pump_irradiance(pump_irradiance)),
        }
    }
}
