//! Four-manifold thulium model with cross-relaxation.

use crate::config::TmDopantSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{photon_flux, GainMedium, Gains, LocalGain};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TmPopulations<T> {
    pub n0: T,
    pub n1: T,
    pub n2: T,
    pub n3: T,
}

impl<T: Scalar> TmPopulations<T> {
    pub fn total(&self) -> T {
        self.n0 + self.n1 + self.n2 + self.n3
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.n0, self.n1, self.n2, self.n3]
    }
}

/// Intermediate rate quantities of the steady-state solution.
///
/// `gamma_3` and `gamma_4` carry a `1/psi_abs_p` factor and are infinite
/// without pump; the populations only ever need `gamma_1 * gamma_3` and
/// `gamma_1 * gamma_4`, which stay finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmCoefficients<T> {
    pub nu_s: T,
    pub nu_p: T,
    pub psi_abs_s: T,
    pub psi_ems_s: T,
    pub psi_abs_p: T,
    pub psi_ems_p: T,
    pub delta_1: T,
    pub delta_2: T,
    pub delta_3: T,
    pub gamma_0: T,
    pub gamma_1: T,
    pub gamma_2: T,
    pub gamma_3: T,
    pub gamma_4: T,
}

/// Thulium dopant together with the signal and pump angular frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TmModel<T> {
    pub spec: TmDopantSpec<T>,
    pub omega_s: T,
    pub omega_p: T,
}

impl<T: Scalar> TmModel<T> {
    pub fn new(spec: TmDopantSpec<T>, omega_s: T, omega_p: T) -> Self {
        TmModel { spec, omega_s, omega_p }
    }

    /// Total decay rates out of manifolds 1, 2, 3.
    pub fn decay_rates(&self) -> (T, T, T) {
        let d = &self.spec;
        let one = T::one();
        let delta_1 = one / d.tau_10 + d.gamma_1;
        let delta_2 = one / d.tau_21 + one / d.tau_20 + d.gamma_2;
        let delta_3 = one / d.tau_30 + one / d.tau_31 + one / d.tau_32 + d.gamma_3;
        (delta_1, delta_2, delta_3)
    }

    pub fn coefficients(&self, i_s: T, i_p: T) -> TmCoefficients<T> {
        let d = &self.spec;
        let nu_s = photon_flux(i_s, self.omega_s);
        let nu_p = photon_flux(i_p, self.omega_p);
        let psi_abs_s = d.sigma_abs_s * nu_s;
        let psi_ems_s = d.sigma_ems_s * nu_s;
        let psi_abs_p = d.sigma_abs_p * nu_p;
        let psi_ems_p = d.sigma_ems_p * nu_p;
        let (delta_1, delta_2, delta_3) = self.decay_rates();
        let gamma_0 = T::one() / (psi_ems_p + delta_3);
        let gamma_1 = psi_abs_p * gamma_0;
        let gamma_2 = (T::one() / d.tau_32 + d.gamma_3) / delta_2;
        let d1 = psi_ems_s + delta_1;
        let gamma_3 = (T::one() / d.tau_31 + gamma_2 * (T::one() / d.tau_21 + d.gamma_2) + psi_abs_s / gamma_1) / d1;
        let gamma_4 = (T::lit(2.0) * psi_abs_p + psi_abs_s) / (psi_abs_p * d1);
        TmCoefficients {
            nu_s,
            nu_p,
            psi_abs_s,
            psi_ems_s,
            psi_abs_p,
            psi_ems_p,
            delta_1,
            delta_2,
            delta_3,
            gamma_0,
            gamma_1,
            gamma_2,
            gamma_3,
            gamma_4,
        }
    }

    /// Every pump-only quantity of the steady state, evaluated once.
    pub fn at_pump_irradiance(&self, i_p: T) -> TmAtPump<T> {
        let d = &self.spec;
        let one = T::one();
        let (delta_1, delta_2, delta_3) = self.decay_rates();
        let nu_p = photon_flux(i_p, self.omega_p);
        let psi_abs_p = d.sigma_abs_p * nu_p;
        let psi_ems_p = d.sigma_ems_p * nu_p;
        let gamma_0 = one / (psi_ems_p + delta_3);
        let gamma_1 = psi_abs_p * gamma_0;
        let gamma_2 = (one / d.tau_32 + d.gamma_3) / delta_2;
        TmAtPump {
            signal_flux_per_irradiance: photon_flux(one, self.omega_s),
            sigma_abs_s: d.sigma_abs_s,
            sigma_ems_s: d.sigma_ems_s,
            sigma_abs_p: d.sigma_abs_p,
            sigma_ems_p: d.sigma_ems_p,
            delta_1,
            n_total: d.n_total,
            kappa: d.kappa_r,
            two_psi_abs_p: T::lit(2.0) * psi_abs_p,
            gamma_0,
            gamma_1,
            gamma_2,
            g13_pump: gamma_1 * (one / d.tau_31 + gamma_2 * (one / d.tau_21 + d.gamma_2)),
            b_pump: one + gamma_1 * (one + gamma_2) - gamma_0 * d.kappa_r * d.n_total,
        }
    }
}

/// Tm steady state at a fixed pump irradiance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmAtPump<T> {
    signal_flux_per_irradiance: T,
    sigma_abs_s: T,
    sigma_ems_s: T,
    sigma_abs_p: T,
    sigma_ems_p: T,
    delta_1: T,
    n_total: T,
    kappa: T,
    two_psi_abs_p: T,
    gamma_0: T,
    gamma_1: T,
    gamma_2: T,
    g13_pump: T,
    b_pump: T,
}

impl<T: Scalar> TmAtPump<T> {
    /// Populations and the discriminant of the `N0` quadratic.
    #[inline(always)]
    fn solve(&self, i_s: T) -> (TmPopulations<T>, T) {
        let nu_s = i_s * self.signal_flux_per_irradiance;
        let psi_abs_s = self.sigma_abs_s * nu_s;
        let inv_d1 = T::one() / (self.sigma_ems_s * nu_s + self.delta_1);
        // gamma_1 gamma_3 and gamma_1 gamma_4
        let c13 = (self.g13_pump + psi_abs_s) * inv_d1;
        let c14 = self.gamma_0 * (self.two_psi_abs_p + psi_abs_s) * inv_d1;
        let nt = self.n_total;
        let a = self.kappa * (self.gamma_0 + c14);
        let b = self.b_pump + c13;
        let disc = b * b + T::lit(4.0) * a * nt;
        let root = disc.max(T::zero()).sqrt();
        // Pick the cancellation-free form of the positive root.
        let n0 = if b >= T::zero() {
            T::lit(2.0) * nt / (b + root)
        } else {
            (root - b) / (T::lit(2.0) * a)
        };
        let s = n0 / (T::one() + self.gamma_0 * self.kappa * n0);
        let n3 = self.gamma_1 * s;
        let pops = TmPopulations {
            n0,
            n1: (c13 + c14 * self.kappa * n0) * s,
            n2: self.gamma_2 * n3,
            n3,
        };
        (pops, disc)
    }

    pub fn populations(&self, i_s: T) -> Result<TmPopulations<T>> {
        let (pops, disc) = self.solve(i_s);
        if disc < T::zero() || !disc.is_finite() {
            return Err(Error::Discriminant(disc.as_f64()));
        }
        Ok(pops)
    }
}

impl<T: Scalar> LocalGain<T> for TmAtPump<T> {
    #[inline]
    fn gains(&self, i_s: T) -> Gains<T> {
        let (p, _) = self.solve(i_s);
        Gains {
            signal: self.sigma_ems_s * p.n1 - self.sigma_abs_s * p.n0,
            pump: self.sigma_ems_p * p.n3 - self.sigma_abs_p * p.n0,
        }
    }
}

impl<T: Scalar> GainMedium<T> for TmModel<T> {
    type Local = TmAtPump<T>;

    fn at_pump(&self, pump_irradiance: T) -> TmAtPump<T> {
        self.at_pump_irradiance(pump_irradiance)
    }
}

/// Closed-form steady-state populations.
pub fn tm_steady_state<T: Scalar>(i_s: T, i_p: T, model: &TmModel<T>) -> Result<TmPopulations<T>> {
    if i_s < T::zero() || i_p < T::zero() {
        return Err(Error::InvalidArgument("irradiances must be nonnegative".into()));
    }
    model.at_pump_irradiance(i_p).populations(i_s)
}

/// Signal and pump gains of the given populations.
pub fn tm_gain<T: Scalar>(p: &TmPopulations<T>, dopant: &TmDopantSpec<T>) -> Gains<T> {
    Gains {
        signal: dopant.sigma_ems_s * p.n1 - dopant.sigma_abs_s * p.n0,
        pump: dopant.sigma_ems_p * p.n3 - dopant.sigma_abs_p * p.n0,
    }
}
