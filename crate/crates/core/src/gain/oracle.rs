//! Direct damped-Newton solves of the steady-state rate equations.
//!
//! Independent of the closed forms: the unknowns are the raw level
//! populations and the residuals are the rate equations with the time
//! derivatives dropped. Always solved in `f64`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{photon_flux, TmModel, TmPopulations, YbModel, YbPopulations};

const MAX_ITERATIONS: usize = 200;
const RESIDUAL_TOL: f64 = 1e-12;

/// Newton with step halving while the residual norm grows. Unknowns and
/// residuals are expected to be scaled to order one.
fn damped_newton(
    mut x: DVector<f64>,
    system: impl Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
) -> Result<DVector<f64>> {
    let (mut f, mut jac) = system(&x);
    let mut norm = f.amax();
    for _ in 0..MAX_ITERATIONS {
        if norm < 1e-3 * RESIDUAL_TOL {
            return Ok(x);
        }
        let step = match jac.clone().lu().solve(&(-&f)) {
            Some(s) => s,
            None => break,
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = &x + &step * lambda;
            let (ft, jt) = system(&trial);
            let nt = ft.amax();
            if nt.is_finite() && nt <= norm {
                x = trial;
                f = ft;
                jac = jt;
                norm = nt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || step.amax() < 4.0 * f64::EPSILON {
            break;
        }
    }
    if norm < RESIDUAL_TOL {
        Ok(x)
    } else {
        Err(Error::OracleDiverged { iterations: MAX_ITERATIONS, residual: norm })
    }
}

/// Thulium populations from the four steady-state rate equations,
/// starting from all ions in the ground state.
pub fn tm_oracle<T: Scalar>(i_s: T, i_p: T, model: &TmModel<T>) -> Result<TmPopulations<T>> {
    let d = &model.spec;
    let g = |v: T| v.as_f64();
    let nu_s = photon_flux(i_s.as_f64(), model.omega_s.as_f64());
    let nu_p = photon_flux(i_p.as_f64(), model.omega_p.as_f64());
    let psi_as = g(d.sigma_abs_s) * nu_s;
    let psi_es = g(d.sigma_ems_s) * nu_s;
    let psi_ap = g(d.sigma_abs_p) * nu_p;
    let psi_ep = g(d.sigma_ems_p) * nu_p;
    let r32 = 1.0 / g(d.tau_32) + g(d.gamma_3);
    let r31 = 1.0 / g(d.tau_31);
    let r21 = 1.0 / g(d.tau_21) + g(d.gamma_2);
    let out3 = psi_ep + 1.0 / g(d.tau_32) + r31 + 1.0 / g(d.tau_30) + g(d.gamma_3);
    let out2 = r21 + 1.0 / g(d.tau_20);
    let out1 = 1.0 / g(d.tau_10) + g(d.gamma_1) + psi_es;
    let nt = g(d.n_total);
    let kn = g(d.kappa_r) * nt;
    let scale = [psi_as, psi_ap, out3, out2, out1, kn].into_iter().fold(1.0, f64::max);

    // x = N / N_total, ordered (N0, N1, N2, N3).
    let system = |x: &DVector<f64>| {
        let (x0, x1, x2, x3) = (x[0], x[1], x[2], x[3]);
        let f = DVector::from_vec(vec![
            (psi_ap * x0 - (out3 + kn * x0) * x3) / scale,
            (r32 * x3 - out2 * x2) / scale,
            (psi_as * x0 + r21 * x2 + (r31 + 2.0 * kn * x0) * x3 - out1 * x1) / scale,
            x0 + x1 + x2 + x3 - 1.0,
        ]);
        #[rustfmt::skip]
        let mut j = DMatrix::from_row_slice(4, 4, &[
            psi_ap - kn * x3, 0.0, 0.0, -(out3 + kn * x0),
            0.0, 0.0, -out2, r32,
            psi_as + 2.0 * kn * x3, -out1, r21, r31 + 2.0 * kn * x0,
            0.0, 0.0, 0.0, 0.0,
        ]) / scale;
        j.row_mut(3).fill(1.0);
        (f, j)
    };
    let x = damped_newton(DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]), system)?;
    Ok(TmPopulations {
        n0: T::lit(x[0] * nt),
        n1: T::lit(x[1] * nt),
        n2: T::lit(x[2] * nt),
        n3: T::lit(x[3] * nt),
    })
}

/// Ytterbium populations from the two-level steady-state system.
pub fn yb_oracle<T: Scalar>(i_s: T, i_p: T, model: &YbModel<T>) -> Result<YbPopulations<T>> {
    let d = &model.spec;
    let nu_s = photon_flux(i_s.as_f64(), model.omega_s.as_f64());
    let nu_p = photon_flux(i_p.as_f64(), model.omega_p.as_f64());
    let up = d.sigma_abs_s.as_f64() * nu_s + d.sigma_abs_p.as_f64() * nu_p;
    let down = d.sigma_ems_s.as_f64() * nu_s + d.sigma_ems_p.as_f64() * nu_p + 1.0 / d.tau.as_f64();
    let scale = up.max(down).max(1.0);
    let nt = d.n_total.as_f64();
    // x = (N_ground, N_excited) / N_total
    let system = |x: &DVector<f64>| {
        let f = DVector::from_vec(vec![(up * x[0] - down * x[1]) / scale, x[0] + x[1] - 1.0]);
        let j = DMatrix::from_row_slice(2, 2, &[up / scale, -down / scale, 1.0, 1.0]);
        (f, j)
    };
    let x = damped_newton(DVector::from_vec(vec![1.0, 0.0]), system)?;
    Ok(YbPopulations { n_ground: T::lit(x[0] * nt), n_excited: T::lit(x[1] * nt) })
}

/// Closed-form and oracle populations at one irradiance pair.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub signal_irradiance: f64,
    pub pump_irradiance: f64,
    pub closed_form: Vec<f64>,
    pub oracle: Vec<f64>,
    /// Largest population difference relative to `N_total`.
    pub residual: f64,
}

/// Evaluates both solution paths of `model` at `(i_s, i_p)`.
pub fn compare_with_oracle<T: Scalar>(model: &super::DopantModel<T>, i_s: T, i_p: T) -> Result<OracleComparison> {
    let (closed_form, oracle): (Vec<f64>, Vec<f64>) = match model {
        super::DopantModel::Tm(m) => (
            super::tm_steady_state(i_s, i_p, m)?.as_array().iter().map(|v| v.as_f64()).collect(),
            tm_oracle(i_s, i_p, m)?.as_array().iter().map(|v| v.as_f64()).collect(),
        ),
        super::DopantModel::Yb(m) => {
            let c = super::yb_steady_state(i_s, i_p, m)?;
            let o = yb_oracle(i_s, i_p, m)?;
            (
                vec![c.n_ground.as_f64(), c.n_excited.as_f64()],
                vec![o.n_ground.as_f64(), o.n_excited.as_f64()],
            )
        }
    };
    let nt = model.n_total().as_f64();
    let residual = closed_form.iter().zip(&oracle).map(|(a, b)| (a - b).abs() / nt).fold(0.0, f64::max);
    Ok(OracleComparison {
        signal_irradiance: i_s.as_f64(),
        pump_irradiance: i_p.as_f64(),
        closed_form,
        oracle,
        residual,
    })
}

/// Irradiance pairs drawn log-uniformly from `[1e-2, 1e14]` W/m^2.
pub fn random_irradiance_pairs(samples: usize, seed: u64) -> Vec<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| (10f64.powf(rng.random_range(-2.0..14.0)), 10f64.powf(rng.random_range(-2.0..14.0))))
        .collect()
}
