//! The two reference fibers: a thulium-doped and an ytterbium-doped
//! large-mode-area fiber from the same manufacturer, 10 m long.
//!
//! `configs/tm_nufern.json` and `configs/yb_nufern.json` hold the same
//! values; a test keeps them in sync.

use crate::config::{DopantSpec, FiberSpec, LaunchSpec, NumericsSpec, SimConfig, TmDopantSpec, YbDopantSpec};
use crate::scalar::Scalar;

fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

pub fn tm_dopant<T: Scalar>() -> TmDopantSpec<T> {
    TmDopantSpec {
        sigma_abs_p: lit(4.4686e-25),
        sigma_ems_p: lit(0.0),
        sigma_abs_s: lit(1.7423e-27),
        sigma_ems_s: lit(1.17397e-25),
        tau_10: lit(6.2232e-3),
        tau_20: lit(5.5179e-3),
        tau_21: lit(2.5707e-1),
        tau_30: lit(1.3949e-3),
        tau_31: lit(1.7033e-2),
        tau_32: lit(6.8446e-2),
        gamma_1: lit(2.59288e3),
        gamma_2: lit(2.92755e7),
        gamma_3: lit(8.05943e4),
        n_total: lit(3e26),
        kappa_r: lit(1.17e-21),
    }
}

pub fn yb_dopant<T: Scalar>() -> YbDopantSpec<T> {
    YbDopantSpec {
        sigma_abs_p: lit(1.429e-24),
        sigma_ems_p: lit(1.776e-24),
        sigma_abs_s: lit(6e-27),
        sigma_ems_s: lit(3.58e-25),
        tau: lit(8e-4),
        n_total: lit(3e26),
    }
}

pub fn tm_fiber<T: Scalar>() -> FiberSpec<T> {
    FiberSpec {
        r_core: lit(1.25e-5),
        r_clad: lit(2e-4),
        n_core: lit(1.439994),
        numerical_aperture: lit(0.1),
        lambda_s: lit(2110e-9),
        lambda_p: lit(793e-9),
        length: lit(10.0),
        doped_radius: None,
    }
}

pub fn yb_fiber<T: Scalar>() -> FiberSpec<T> {
    FiberSpec {
        r_core: lit(1.25e-5),
        r_clad: lit(2e-4),
        n_core: lit(1.450971),
        numerical_aperture: lit(0.06),
        lambda_s: lit(1064e-9),
        lambda_p: lit(976e-9),
        length: lit(10.0),
        doped_radius: None,
    }
}

/// Thulium fiber, 1100 W pump, 30 W signal all in LP01.
pub fn tm_nufern<T: Scalar>() -> SimConfig<T> {
    SimConfig {
        fiber: tm_fiber(),
        dopant: DopantSpec::Tm(tm_dopant()),
        numerics: NumericsSpec::default(),
        launch: LaunchSpec { pump_power: lit(1100.0), signal_power: lit(30.0), fractions: vec![lit(1.0), lit(0.0)] },
    }
}

/// Ytterbium fiber, 1000 W pump, 25 W signal all in LP01.
pub fn yb_nufern<T: Scalar>() -> SimConfig<T> {
    SimConfig {
        fiber: yb_fiber(),
        dopant: DopantSpec::Yb(yb_dopant()),
        numerics: NumericsSpec::default(),
        launch: LaunchSpec {
            pump_power: lit(1000.0),
            signal_power: lit(25.0),
            fractions: vec![lit(1.0), lit(0.0), lit(0.0), lit(0.0)],
        },
    }
}
