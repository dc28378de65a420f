//! Guided LP modes of a weakly guiding step-index fiber.
//!
//! For azimuthal order `i` the transverse parameter `u` solves
//!
//! ```text
//! u J_{i-1}(u) K_i(w) + w J_i(u) K_{i-1}(w) = 0,   w = sqrt(V^2 - u^2),
//! ```
//!
//! which is the core/cladding matching condition written in product form so
//! it has no poles on `(0, V)`. The profile is
//! `K_i(w) J_i(u r / r_core) cos(i theta)` in the core and
//! `J_i(u) K_i(w r / r_core) cos(i theta)` in the cladding.

use crate::bessel::{bessel_j, bessel_k};
use crate::config::FiberSpec;
use crate::error::{Error, Result};
use crate::quadrature::{mode_norm, CrossSectionRule};
use crate::scalar::Scalar;

/// Uniform scan points per azimuthal order used to bracket roots.
pub const ROOT_SCAN_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct GuidedMode<T> {
    /// Azimuthal order.
    pub i: u32,
    /// Radial index, starting at 1 (LP01 is `i = 0, j = 1`).
    pub j: u32,
    /// Core transverse parameter (root of the characteristic equation).
    pub u: T,
    /// Cladding decay parameter `sqrt(V^2 - u^2)`.
    pub w: T,
    /// Propagation constant (rad/m).
    pub beta: T,
    /// `K_i(G r_core)`, multiplies the core profile.
    pub core_scale: T,
    /// `J_i(R r_core)`, multiplies the cladding profile.
    pub clad_scale: T,
    /// Multiplier applied so that the power norm is one.
    pub amplitude: T,
    /// `Phi = int n |phi|^2 / (mu0 c) dA` at the current amplitude.
    pub norm: T,
    /// `int |phi|^2 dA` at the current amplitude.
    pub l2_norm_sq: T,
    pub r_core: T,
}

impl<T: Scalar> GuidedMode<T> {
    /// Radial factor of the profile.
    #[inline]
    pub fn radial(&self, r: T) -> T {
        let i = self.i as i32;
        let rho = r / self.r_core;
        let v = if r < self.r_core {
            self.core_scale * bessel_j(i, self.u * rho)
        } else {
            self.clad_scale * bessel_k(i, self.w * rho)
        };
        self.amplitude * v
    }

    #[inline]
    pub fn angular(&self, theta: T) -> T {
        (T::from_u32(self.i).unwrap() * theta).cos()
    }

    pub fn eval(&self, r: T, theta: T) -> T {
        self.radial(r) * self.angular(theta)
    }

    pub fn eval_xy(&self, x: T, y: T) -> T {
        self.eval(x.hypot(y), y.atan2(x))
    }

    pub fn name(&self) -> String {
        format!("LP{}{}", self.i, self.j)
    }

    /// Rescales the profile so that `Phi = 1` on `rule`.
    pub fn normalize(&mut self, rule: &CrossSectionRule<T>, fiber: &FiberSpec<T>) {
        self.amplitude = T::one();
        let phi = mode_norm(self, rule, fiber);
        self.amplitude = T::one() / phi.sqrt();
        self.norm = mode_norm(self, rule, fiber);
        self.l2_norm_sq = rule.integrate(|r, t| {
            let v = self.eval(r, t);
            v * v
        });
    }
}

/// Normalized frequency `V = k_s r_core NA`.
pub fn normalized_frequency<T: Scalar>(fiber: &FiberSpec<T>) -> T {
    fiber.k_s() * fiber.r_core * fiber.numerical_aperture
}

/// Left-hand side of the characteristic equation at `u` for order `i`.
pub fn characteristic_function<T: Scalar>(i: u32, u: T, v: T) -> T {
    let w = (v * v - u * u).sqrt();
    let i = i as i32;
    u * bessel_j(i - 1, u) * bessel_k(i, w) + w * bessel_j(i, u) * bessel_k(i - 1, w)
}

/// All roots of the characteristic equation in `(0, V)`, ascending.
///
/// Brackets come from a uniform scan with [`ROOT_SCAN_POINTS`] points plus
/// a last one ending just short of `V`; each bracket is bisected to a width below `1e-12 V`.
pub fn characteristic_roots<T: Scalar>(i: u32, v: T) -> Vec<T> {
    if !(v > T::zero()) {
        return Vec::new();
    }
    let n = ROOT_SCAN_POINTS;
    let du = v / T::from_usize_lossy(n + 1);
    let tol = T::lit(1e-12) * v;
    let mut roots = Vec::new();
    let mut a = du;
    let mut fa = characteristic_function(i, a, v);
    for k in 2..=n {
        let b = du * T::from_usize_lossy(k);
        let fb = characteristic_function(i, b, v);
        if fa == T::zero() {
            roots.push(a);
        } else if fa * fb < T::zero() {
            roots.push(bisect(i, v, a, b, fa, tol));
        }
        a = b;
        fa = fb;
    }
    // At small V the fundamental root sits within du of V.
    let b = v * (T::one() - T::lit(1e-12));
    let fb = characteristic_function(i, b, v);
    if fa * fb < T::zero() {
        roots.push(bisect(i, v, a, b, fa, tol));
    }
    roots
}

fn bisect<T: Scalar>(i: u32, v: T, mut a: T, mut b: T, mut fa: T, tol: T) -> T {
    while b - a > tol {
        let mid = (a + b) * T::lit(0.5);
        if mid <= a || mid >= b {
            break;
        }
        let fm = characteristic_function(i, mid, v);
        if fm == T::zero() {
            return mid;
        }
        if fa * fm < T::zero() {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    (a + b) * T::lit(0.5)
}

/// Builds the (unnormalized) LP mode for root `u` of order `i`.
pub fn build_mode<T: Scalar>(i: u32, j: u32, u: T, fiber: &FiberSpec<T>) -> Result<GuidedMode<T>> {
    let k = fiber.k_s();
    let v = normalized_frequency(fiber);
    let nk_core = fiber.n_core * k;
    let nk_clad = fiber.n_clad() * k;
    let radial_wavenumber = u / fiber.r_core;
    let beta_sq = nk_core * nk_core - radial_wavenumber * radial_wavenumber;
    let decay_sq = beta_sq - nk_clad * nk_clad;
    if !(u > T::zero() && u < v && decay_sq > T::zero()) {
        return Err(Error::NotGuided { i, j, u: u.as_f64() });
    }
    let beta = beta_sq.sqrt();
    let w = (v * v - u * u).sqrt();
    let ii = i as i32;
    Ok(GuidedMode {
        i,
        j,
        u,
        w,
        beta,
        core_scale: bessel_k(ii, w),
        clad_scale: bessel_j(ii, u),
        amplitude: T::one(),
        norm: T::nan(),
        l2_norm_sq: T::nan(),
        r_core: fiber.r_core,
    })
}

/// Mode beat length `2 pi / max |beta_l - beta_m|`.
pub fn beat_length<T: Scalar>(modes: &[GuidedMode<T>]) -> Result<T> {
    if modes.len() < 2 {
        return Err(Error::SingleModeBeat);
    }
    let max = modes.iter().map(|m| m.beta).fold(T::neg_infinity(), T::max);
    let min = modes.iter().map(|m| m.beta).fold(T::infinity(), T::min);
    Ok(T::TAU() / (max - min))
}

/// Every guided mode at the signal wavelength, power-normalized.
#[derive(Debug, Clone)]
pub struct ModeFamily<T> {
    /// LP01 first, then by descending propagation constant.
    pub modes: Vec<GuidedMode<T>>,
    pub v: T,
}

impl<T: Scalar> ModeFamily<T> {
    /// Finds the unnormalized mode set (no quadrature needed).
    pub fn census(fiber: &FiberSpec<T>) -> Result<Self> {
        let v = normalized_frequency(fiber);
        let mut modes = Vec::new();
        for i in 0.. {
            let roots = characteristic_roots(i, v);
            if roots.is_empty() {
                break;
            }
            // Higher radial orders have smaller beta, i.e. larger u.
            for (jdx, u) in roots.into_iter().enumerate() {
                modes.push(build_mode(i, jdx as u32 + 1, u, fiber)?);
            }
        }
        if modes.is_empty() {
            return Err(Error::NoModes(v.as_f64()));
        }
        modes.sort_by(|a, b| b.beta.partial_cmp(&a.beta).unwrap());
        Ok(Self { modes, v })
    }

    /// Mode census followed by power normalization on `rule`.
    pub fn solve(fiber: &FiberSpec<T>, rule: &CrossSectionRule<T>) -> Result<Self> {
        let mut family = Self::census(fiber)?;
        for m in &mut family.modes {
            m.normalize(rule, fiber);
        }
        Ok(family)
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.modes.iter().map(GuidedMode::name).collect()
    }

    pub fn beat_length(&self) -> Result<T> {
        beat_length(&self.modes)
    }

    /// Step count for `length` at `steps_per_beat`: `ceil(length * spb / beat)`.
    pub fn step_count(&self, length: T, steps_per_beat: u32) -> Result<usize> {
        let beat = self.beat_length()?;
        let steps = (length * T::from_u32(steps_per_beat).unwrap() / beat).ceil();
        Ok(steps.to_usize().unwrap_or(usize::MAX).max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_rule;

    fn tm_fiber() -> FiberSpec<f64> {
        FiberSpec {
            r_core: 1.25e-5,
            r_clad: 2e-4,
            n_core: 1.439994,
            numerical_aperture: 0.1,
            lambda_s: 2110e-9,
            lambda_p: 793e-9,
            length: 10.0,
            doped_radius: None,
        }
    }

    fn yb_fiber() -> FiberSpec<f64> {
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

    /// Counts sign changes of the characteristic function on a fine grid.
    fn brute_force_root_count(i: u32, v: f64, points: usize) -> usize {
        let mut count = 0;
        let mut prev = characteristic_function(i, v / (points + 1) as f64, v);
        for k in 2..=points {
            let cur = characteristic_function(i, v * k as f64 / (points + 1) as f64, v);
            if prev * cur < 0.0 {
                count += 1;
            }
            prev = cur;
        }
        count
    }

    #[test]
    fn normalized_frequencies() {
        assert!((normalized_frequency(&tm_fiber()) - 3.7222661772390917).abs() < 1e-12);
        assert!((normalized_frequency(&yb_fiber()) - 4.4289370116397455).abs() < 1e-12);
        let mut f = tm_fiber();
        f.numerical_aperture = 0.0;
        assert_eq!(normalized_frequency(&f), 0.0);
        assert!(characteristic_roots(0, 0.0).is_empty());
    }

    #[test]
    fn root_counts_match_brute_force_scan() {
        let v = normalized_frequency(&tm_fiber());
        assert_eq!(brute_force_root_count(0, v, 10_000), 1);
        assert_eq!(characteristic_roots(0, v).len(), 1);
        assert_eq!(characteristic_roots(1, v).len(), 1);
        assert!(characteristic_roots(2, v).is_empty());
        let v = normalized_frequency(&yb_fiber());
        for i in 0..4 {
            assert_eq!(characteristic_roots(i, v).len(), brute_force_root_count(i, v, 10_000), "i = {i}");
        }
    }

    #[test]
    fn roots_match_independent_solver() {
        // Brent's method in scipy on the same equation.
        let v = normalized_frequency(&tm_fiber());
        assert!((characteristic_roots(0, v)[0] - 1.8755301456055264).abs() < 1e-10);
        assert!((characteristic_roots(1, v)[0] - 2.9331472769731186).abs() < 1e-10);
        let v = normalized_frequency(&yb_fiber());
        assert!((characteristic_roots(0, v)[1] - 4.23747564944862).abs() < 1e-10);
        assert!((characteristic_roots(2, v)[0] - 4.044052810540341).abs() < 1e-10);
    }

    #[test]
    fn census_names_and_order() {
        let tm = ModeFamily::census(&tm_fiber()).unwrap();
        assert_eq!(tm.names(), ["LP01", "LP11"]);
        let yb = ModeFamily::census(&yb_fiber()).unwrap();
        assert_eq!(yb.names(), ["LP01", "LP11", "LP21", "LP02"]);
    }

    #[test]
    fn guided_modes_satisfy_invariants() {
        for fiber in [tm_fiber(), yb_fiber()] {
            let fam = ModeFamily::census(&fiber).unwrap();
            let k = fiber.k_s();
            for m in &fam.modes {
                assert!(m.beta > fiber.n_clad() * k && m.beta < fiber.n_core * k);
                assert!(m.u > 0.0 && m.u < fam.v && m.w > 0.0);
                assert!(characteristic_function(m.i, m.u, fam.v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn profile_is_continuous_at_interface() {
        let fam = ModeFamily::census(&yb_fiber()).unwrap();
        for m in &fam.modes {
            let rc = m.r_core;
            let scale = m.radial(0.5 * rc).abs().max(m.radial(0.0).abs());
            for eps in [1e-9, 1e-12] {
                let jump = (m.radial(rc * (1.0 - eps)) - m.radial(rc * (1.0 + eps))).abs();
                assert!(jump < 1e3 * eps * scale, "{} jump {jump:e}", m.name());
            }
        }
        let lp01 = &fam.modes[0];
        assert_eq!(lp01.eval(3e-6, 0.3), lp01.eval(3e-6, 2.1));
        assert!(lp01.eval(0.0, 0.0) > lp01.eval(1e-6, 0.0));
    }

    #[test]
    fn beat_lengths() {
        let mut a = build_mode(0, 1, 1.0, &tm_fiber()).unwrap();
        let mut b = a.clone();
        a.beta = 10.0 + std::f64::consts::TAU;
        b.beta = 10.0;
        assert!((beat_length(&[a.clone(), b]).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(beat_length(&[a]), Err(Error::SingleModeBeat)));

        let tm = ModeFamily::census(&tm_fiber()).unwrap();
        let beat = tm.beat_length().unwrap();
        assert!((beat - 1.654e-3).abs() < 1e-6, "beat {beat}");
        assert_eq!(tm.step_count(10.0, 50).unwrap(), 302_340);
        let yb = ModeFamily::census(&yb_fiber()).unwrap();
        assert_eq!(yb.step_count(10.0, 50).unwrap(), 421_014);
    }

    #[test]
    fn non_guided_root_is_rejected() {
        let v = normalized_frequency(&tm_fiber());
        assert!(matches!(build_mode(0, 1, v * 1.01, &tm_fiber()), Err(Error::NotGuided { .. })));
    }

    #[test]
    fn normalization_gives_unit_power_norm() {
        let fiber = yb_fiber();
        let rule = build_rule(&fiber, 24, 64);
        let fam = ModeFamily::solve(&fiber, &rule).unwrap();
        for m in &fam.modes {
            assert!((m.norm - 1.0).abs() < 1e-10);
            assert!(m.l2_norm_sq > 0.0);
        }
    }
}
