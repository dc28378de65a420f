//! A posteriori checks of how far a run is from an autonomous system in the
//! mode powers.
//!
//! Dropping the cross terms from the signal irradiance gives `I_inc`, which
//! depends on the powers only. The gains recomputed from `I_inc` give
//! `kappa` and `gamma_p`. The remainders
//!
//! ```text
//! rho_l     = 2 sum_{m != l} Re(K_lm conj(a_l) a_m)
//! eta_l     = 2 Re(K_ll - kappa_ll) P_l
//! eta_pump  = (<g_p> - <gamma_p>) P_pump
//! ```
//!
//! are what separates the power equations from
//! `dP_l/dz = 2 Re(kappa_ll) P_l`, `dP_pump/dz = <gamma_p> P_pump`.

use crate::cmt::{CmtSystem, StateVector};
use crate::error::{Error, Result};
use crate::gain::GainMedium;
use crate::scalar::Scalar;
use crate::simulate::PowerTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomySample<T> {
    pub z: T,
    /// `||I_s - I_inc|| / ||I_s||` in L2 over the cross-section.
    pub irradiance_gap: T,
    /// Autonomous rates `2 Re(K_ll) P_l` (W/m).
    pub autonomous: Vec<T>,
    pub rho: Vec<T>,
    pub eta: Vec<T>,
    /// `<g_p> P_pump` (W/m).
    pub pump_autonomous: T,
    pub eta_pump: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutonomyReport<T> {
    pub mode_names: Vec<String>,
    pub samples: Vec<AutonomySample<T>>,
    pub max_irradiance_gap: T,
    /// Largest `|rho_l|` over the run, relative to the largest `|2 Re(K_ll) P_l|`.
    pub rho_relative: T,
    /// Largest `|eta_l|`, same scale as `rho_relative`.
    pub eta_relative: T,
    /// Largest `|eta_pump|` relative to the largest `|<g_p> P_pump|`.
    pub eta_pump_relative: T,
}

fn states<T: Scalar>(trace: &PowerTrace<T>) -> Result<&[Vec<num_complex::Complex<T>>]> {
    trace
        .states
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("trace was recorded without states".into()))
}

fn l2_norm<T: Scalar, G: GainMedium<T>>(system: &CmtSystem<T, G>, values: &[T]) -> T {
    let sq: Vec<T> = values.iter().map(|v| *v * *v).collect();
    system.integrate_nodes(&sq).sqrt()
}

/// Evaluates the autonomy remainders at every stored sample of `trace`.
pub fn autonomy_diagnostics<T: Scalar, G: GainMedium<T>>(
    system: &CmtSystem<T, G>,
    trace: &PowerTrace<T>,
) -> Result<AutonomyReport<T>> {
    let states = states(trace)?;
    let m = system.mode_count();
    let area = system.cladding_area();
    let mut samples = Vec::with_capacity(states.len());
    for (z, y) in trace.z.iter().zip(states) {
        let state = StateVector::from_flat(*z, y);
        let powers = state.mode_powers();
        let irr = system.node_irradiance(*z, &state.amplitudes);
        let inc = system.incoherent_irradiance(&powers);
        let gap: Vec<T> = irr.iter().zip(&inc).map(|(a, b)| *a - *b).collect();
        let norm = l2_norm(system, &irr);
        let irradiance_gap = if norm > T::zero() { l2_norm(system, &gap) / norm } else { T::zero() };

        let k = system.coupling_from_irradiance(state.pump_irradiance, &irr);
        let kappa = system.coupling_from_irradiance(state.pump_irradiance, &inc);
        let two = T::lit(2.0);
        let autonomous = (0..m).map(|l| two * k.get(l, l).re * powers[l]).collect();
        let eta = (0..m).map(|l| two * (k.get(l, l).re - kappa.get(l, l).re) * powers[l]).collect();
        let rho = system.exchange_terms(*z, &state.amplitudes, &k);
        let pump = state.pump_irradiance * area;
        samples.push(AutonomySample {
            z: *z,
            irradiance_gap,
            autonomous,
            rho,
            eta,
            pump_autonomous: k.mean_gp * pump,
            eta_pump: (k.mean_gp - kappa.mean_gp) * pump,
        });
    }
    let max_of = |f: &dyn Fn(&AutonomySample<T>) -> T| samples.iter().map(f).fold(T::zero(), T::max);
    let abs_max = |v: &[T]| v.iter().map(|x| x.abs()).fold(T::zero(), T::max);
    let scale = max_of(&|s| abs_max(&s.autonomous));
    let pump_scale = max_of(&|s| s.pump_autonomous.abs());
    let ratio = |a: T, b: T| if b > T::zero() { a / b } else { T::zero() };
    Ok(AutonomyReport {
        mode_names: trace.mode_names.clone(),
        max_irradiance_gap: max_of(&|s| s.irradiance_gap),
        rho_relative: ratio(max_of(&|s| abs_max(&s.rho)), scale),
        eta_relative: ratio(max_of(&|s| abs_max(&s.eta)), scale),
        eta_pump_relative: ratio(max_of(&|s| s.eta_pump.abs()), pump_scale),
        samples,
    })
}

/// Largest gap between a central difference of each recorded mode power and
/// `2 Re(K_ll) P_l + rho_l` at interior samples, relative to the largest
/// `|dP_l/dz|`. Needs uniformly spaced samples with states.
pub fn power_equation_residual<T: Scalar, G: GainMedium<T>>(
    system: &CmtSystem<T, G>,
    trace: &PowerTrace<T>,
) -> Result<T> {
    let states = states(trace)?;
    let n = trace.len();
    if n < 3 {
        return Err(Error::InvalidArgument("need at least three samples".into()));
    }
    let m = system.mode_count();
    let mut worst = T::zero();
    let mut scale = T::zero();
    for k in 1..n - 1 {
        let state = StateVector::from_flat(trace.z[k], &states[k]);
        let powers = state.mode_powers();
        let kmat = system.coupling_matrix(&state);
        let rho = system.exchange_terms(state.z, &state.amplitudes, &kmat);
        let h = trace.z[k + 1] - trace.z[k - 1];
        for l in 0..m {
            let fd = (trace.modes[l][k + 1] - trace.modes[l][k - 1]) / h;
            let rate = T::lit(2.0) * kmat.get(l, l).re * powers[l] + rho[l];
            worst = worst.max((fd - rate).abs());
            scale = scale.max(rate.abs());
        }
    }
    Ok(if scale > T::zero() { worst / scale } else { worst })
}
