//! Two-level ytterbium model.

use crate::config::YbDopantSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{photon_flux, GainMedium, Gains, LocalGain};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct YbPopulations<T> {
    pub n_ground: T,
    pub n_excited: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YbModel<T> {
    pub spec: YbDopantSpec<T>,
    pub omega_s: T,
    pub omega_p: T,
}

impl<T: Scalar> YbModel<T> {
    pub fn new(spec: YbDopantSpec<T>, omega_s: T, omega_p: T) -> Self {
        YbModel { spec, omega_s, omega_p }
    }

    pub fn at_pump_irradiance(&self, i_p: T) -> YbAtPump<T> {
        let d = &self.spec;
        let nu_p = photon_flux(i_p, self.omega_p);
        YbAtPump {
            signal_flux_per_irradiance: photon_flux(T::one(), self.omega_s),
            sigma_abs_s: d.sigma_abs_s,
            sigma_ems_s: d.sigma_ems_s,
            sigma_abs_p: d.sigma_abs_p,
            sigma_ems_p: d.sigma_ems_p,
            n_total: d.n_total,
            psi_abs_p: d.sigma_abs_p * nu_p,
            rest: d.sigma_ems_p * nu_p + T::one() / d.tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YbAtPump<T> {
    signal_flux_per_irradiance: T,
    sigma_abs_s: T,
    sigma_ems_s: T,
    sigma_abs_p: T,
    sigma_ems_p: T,
    n_total: T,
    psi_abs_p: T,
    /// Pump-stimulated emission plus spontaneous decay.
    rest: T,
}

impl<T: Scalar> YbAtPump<T> {
    #[inline]
    pub fn populations(&self, i_s: T) -> YbPopulations<T> {
        let nu_s = i_s * self.signal_flux_per_irradiance;
        let psi_abs_s = self.sigma_abs_s * nu_s;
        let up = psi_abs_s + self.psi_abs_p;
        let all = up + self.sigma_ems_s * nu_s + self.rest;
        let n_excited = self.n_total * (up / all);
        YbPopulations { n_ground: self.n_total - n_excited, n_excited }
    }
}

impl<T: Scalar> LocalGain<T> for YbAtPump<T> {
    #[inline]
    fn gains(&self, i_s: T) -> Gains<T> {
        let p = self.populations(i_s);
        Gains {
            signal: self.sigma_ems_s * p.n_excited - self.sigma_abs_s * p.n_ground,
            pump: self.sigma_ems_p * p.n_excited - self.sigma_abs_p * p.n_ground,
        }
    }
}

impl<T: Scalar> GainMedium<T> for YbModel<T> {
    type Local = YbAtPump<T>;

    fn at_pump(&self, pump_irradiance: T) -> YbAtPump<T> {
        self.at_pump_irradiance(pump_irradiance)
    }
}

pub fn yb_steady_state<T: Scalar>(i_s: T, i_p: T, model: &YbModel<T>) -> Result<YbPopulations<T>> {
    if i_s < T::zero() || i_p < T::zero() {
        return Err(Error::InvalidArgument("irradiances must be nonnegative".into()));
    }
    Ok(model.at_pump_irradiance(i_p).populations(i_s))
}

pub fn yb_gain<T: Scalar>(p: &YbPopulations<T>, dopant: &YbDopantSpec<T>) -> Gains<T> {
    Gains {
        signal: dopant.sigma_ems_s * p.n_excited - dopant.sigma_abs_s * p.n_ground,
        pump: dopant.sigma_ems_p * p.n_excited - dopant.sigma_abs_p * p.n_ground,
    }
}
