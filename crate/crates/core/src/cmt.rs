//! Coupled-mode right-hand side: coupling coefficients, mean pump gain and
//! the amplitude equations
//!
//! ```text
//! dI_p/dz = <g_p> I_p
//! dA_l/dz = sum_m exp(i (beta_m - beta_l) z) K_lm A_m
//! K_lm    = k_s / (2 beta_l |phi_l|^2) int g_s n phi_m phi_l dA
//! ```
//!
//! The gains vanish outside the doped region, so the cross-section
//! integrals only visit doped nodes. Every mode is a `cos(i theta)`
//! profile, so integrands are even in `theta` and the periodic trapezoid
//! is folded onto `[0, pi]`.

use num_complex::Complex;

use crate::config::FiberSpec;
use crate::constants::PhysicalConstants;
use crate::gain::{GainMedium, LocalGain};
use crate::modes::GuidedMode;
use crate::quadrature::{mode_overlap, CrossSectionRule};
use crate::scalar::Scalar;

/// Pump irradiance and modal amplitudes at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    pub z: T,
    /// W/m^2.
    pub pump_irradiance: T,
    /// sqrt(W) for power-normalized modes.
    pub amplitudes: Vec<Complex<T>>,
}

impl<T: Scalar> StateVector<T> {
    /// Packs into the integrator layout `[I_p, A_1, ..., A_M]`.
    pub fn to_flat(&self) -> Vec<Complex<T>> {
        let mut y = Vec::with_capacity(self.amplitudes.len() + 1);
        y.push(Complex::new(self.pump_irradiance, T::zero()));
        y.extend_from_slice(&self.amplitudes);
        y
    }

    pub fn from_flat(z: T, y: &[Complex<T>]) -> Self {
        StateVector { z, pump_irradiance: y[0].re, amplitudes: y[1..].to_vec() }
    }

    pub fn mode_powers(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `K` in row-major order plus the cross-section mean of the pump gain.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T> {
    pub m: usize,
    pub k: Vec<Complex<T>>,
    /// 1/m.
    pub mean_gp: T,
}

impl<T: Scalar> CouplingMatrix<T> {
    pub fn get(&self, l: usize, m: usize) -> Complex<T> {
        self.k[l * self.m + m]
    }
}

/// Node tables and mode data needed to evaluate the right-hand side.
#[derive(Debug, Clone)]
pub struct CmtSystem<T, G> {
    pub medium: G,
    m: usize,
    betas: Vec<T>,
    /// `beta_l - beta_0`; the common phase `beta_0 z` cancels everywhere.
    delta_beta: Vec<T>,
    prefactor: Vec<T>,
    /// Folded nodes, doped ones first: `phi[l][q]`.
    phi: Vec<Vec<T>>,
    radius: Vec<T>,
    weight: Vec<T>,
    weight_n: Vec<T>,
    irradiance_scale: Vec<T>,
    n_doped: usize,
    gram: Vec<T>,
    clad_area: T,
}

/// Dot product with four independent partial sums.
#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::zero(); 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: T = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| *x * *y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl<T: Scalar, G: GainMedium<T>> CmtSystem<T, G> {
    pub fn new(fiber: &FiberSpec<T>, modes: &[GuidedMode<T>], rule: &CrossSectionRule<T>, medium: G) -> Self {
        let m = modes.len();
        assert!(m >= 1, "at least one guided mode");
        let z0 = PhysicalConstants::<T>::codata().impedance();
        let k_s = fiber.k_s();
        let beta0 = modes[0].beta;
        let n_ang = rule.angular_points;
        let dtheta = rule.dtheta();
        let r_doped = fiber.doped_radius();

        let mut phi = vec![Vec::new(); m];
        let (mut radius, mut weight, mut weight_n, mut irradiance_scale) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut n_doped = 0;
        let mut radial: Vec<_> = rule.radial.clone();
        // Stable: doped nodes first, ascending radius within each group.
        radial.sort_by_key(|rn| rn.r >= r_doped);
        for rn in &radial {
            let n = fiber.index_at(rn.r);
            let radial_vals: Vec<T> = modes.iter().map(|md| md.radial(rn.r)).collect();
            for k in 0..=n_ang / 2 {
                let fold = if k == 0 || 2 * k == n_ang { T::one() } else { T::lit(2.0) };
                let theta = dtheta * T::from_usize_lossy(k);
                let w = rn.weight * dtheta * fold;
                for ((md, rv), col) in modes.iter().zip(&radial_vals).zip(phi.iter_mut()) {
                    col.push(*rv * md.angular(theta));
                }
                radius.push(rn.r);
                weight.push(w);
                weight_n.push(w * n);
                irradiance_scale.push(n / z0);
                if rn.r < r_doped {
                    n_doped += 1;
                }
            }
        }

        let mut gram = vec![T::zero(); m * m];
        for l in 0..m {
            for j in l..m {
                let v = mode_overlap(&modes[l], &modes[j], rule, fiber);
                gram[l * m + j] = v;
                gram[j * m + l] = v;
            }
        }

        CmtSystem {
            medium,
            m,
            betas: modes.iter().map(|md| md.beta).collect(),
            delta_beta: modes.iter().map(|md| md.beta - beta0).collect(),
            prefactor: modes.iter().map(|md| k_s / (T::lit(2.0) * md.beta * md.l2_norm_sq)).collect(),
            phi,
            radius,
            weight,
            weight_n,
            irradiance_scale,
            n_doped,
            gram,
            clad_area: fiber.cross_section_area(),
        }
    }

    pub fn mode_count(&self) -> usize {
        self.m
    }

    /// Length of the flat state `[I_p, A_1..A_M]`.
    pub fn dim(&self) -> usize {
        self.m + 1
    }

    pub fn betas(&self) -> &[T] {
        &self.betas
    }

    pub fn doped_node_count(&self) -> usize {
        self.n_doped
    }

    pub fn cladding_area(&self) -> T {
        self.clad_area
    }

    /// `A_l exp(i (beta_l - beta_0) z)`.
    fn phased(&self, z: T, amplitudes: &[Complex<T>]) -> Vec<Complex<T>> {
        amplitudes
            .iter()
            .zip(&self.delta_beta)
            .map(|(a, db)| *a * Complex::from_polar(T::one(), *db * z))
            .collect()
    }

    /// Real and imaginary parts of `sum_l b_l phi_l` at the first `nq` nodes.
    fn fields(&self, b: &[Complex<T>], nq: usize) -> (Vec<T>, Vec<T>) {
        let first = &self.phi[0][..nq];
        let mut re: Vec<T> = first.iter().map(|p| b[0].re * *p).collect();
        let mut im: Vec<T> = first.iter().map(|p| b[0].im * *p).collect();
        for (bl, col) in b.iter().zip(&self.phi).skip(1) {
            for ((r, i), p) in re.iter_mut().zip(im.iter_mut()).zip(&col[..nq]) {
                *r += bl.re * *p;
                *i += bl.im * *p;
            }
        }
        (re, im)
    }

    /// Right-hand side on the flat state layout.
    pub fn rhs(&self, z: T, y: &[Complex<T>], dy: &mut [Complex<T>]) {
        let nq = self.n_doped;
        let ip = y[0].re;
        let local = self.medium.at_pump(ip);
        let b = self.phased(z, &y[1..]);
        let (mut re, mut im) = self.fields(&b, nq);
        let irr: Vec<T> = re
            .iter()
            .zip(&im)
            .zip(&self.irradiance_scale[..nq])
            .map(|((r, i), c)| *c * (*r * *r + *i * *i))
            .collect();
        let mut gs = Vec::with_capacity(nq);
        let mut gp = Vec::with_capacity(nq);
        local.gains_batch(&irr, &mut gs, &mut gp);
        let gp_sum = dot(&gp, &self.weight[..nq]);
        dy[0] = Complex::new(gp_sum / self.clad_area * ip, T::zero());
        for (((r, i), g), w) in re.iter_mut().zip(im.iter_mut()).zip(&gs).zip(&self.weight_n[..nq]) {
            let s = *g * *w;
            *r *= s;
            *i *= s;
        }
        for (l, col) in self.phi.iter().enumerate() {
            let acc = Complex::new(dot(&re, &col[..nq]), dot(&im, &col[..nq]));
            let back = Complex::from_polar(T::one(), -self.delta_beta[l] * z);
            dy[l + 1] = back * acc * self.prefactor[l];
        }
    }

    /// Signal irradiance at every folded node for the state at `z`.
    pub fn node_irradiance(&self, z: T, amplitudes: &[Complex<T>]) -> Vec<T> {
        let b = self.phased(z, amplitudes);
        let (re, im) = self.fields(&b, self.radius.len());
        (0..self.radius.len()).map(|q| self.irradiance_scale[q] * (re[q] * re[q] + im[q] * im[q])).collect()
    }

    /// Irradiance `n / (mu0 c) sum_m P_m phi_m^2` with every cross term
    /// dropped, at every folded node.
    pub fn incoherent_irradiance(&self, powers: &[T]) -> Vec<T> {
        (0..self.radius.len())
            .map(|q| {
                let s: T = self.phi.iter().zip(powers).map(|(col, pw)| *pw * col[q] * col[q]).sum();
                self.irradiance_scale[q] * s
            })
            .collect()
    }

    /// `int f dA` for values given at the folded nodes.
    pub fn integrate_nodes(&self, values: &[T]) -> T {
        values.iter().zip(&self.weight).map(|(v, w)| *v * *w).sum()
    }

    /// Coupling matrix for a pump irradiance and a signal irradiance given
    /// at the folded nodes.
    pub fn coupling_from_irradiance(&self, pump_irradiance: T, irradiance: &[T]) -> CouplingMatrix<T> {
        let m = self.m;
        let local = self.medium.at_pump(pump_irradiance);
        let mut k = vec![Complex::new(T::zero(), T::zero()); m * m];
        let mut gp_sum = T::zero();
        for q in 0..self.n_doped {
            let g = local.gains(irradiance[q]);
            let s = self.weight_n[q] * g.signal;
            for l in 0..m {
                for j in 0..m {
                    k[l * m + j].re += s * self.phi[l][q] * self.phi[j][q];
                }
            }
            gp_sum += self.weight[q] * g.pump;
        }
        for l in 0..m {
            for j in 0..m {
                k[l * m + j] = k[l * m + j] * self.prefactor[l];
            }
        }
        CouplingMatrix { m, k, mean_gp: gp_sum / self.clad_area }
    }

    pub fn coupling_matrix(&self, state: &StateVector<T>) -> CouplingMatrix<T> {
        let irr = self.node_irradiance(state.z, &state.amplitudes);
        self.coupling_from_irradiance(state.pump_irradiance, &irr)
    }

    /// Total signal power `int I_s dA`, cross terms included.
    pub fn signal_power(&self, z: T, amplitudes: &[Complex<T>]) -> T {
        let b = self.phased(z, amplitudes);
        let m = self.m;
        let mut p = T::zero();
        for l in 0..m {
            for j in 0..m {
                p += (b[l].conj() * b[j]).re * self.gram[l * m + j];
            }
        }
        p
    }

    /// Power overlap matrix `int n phi_l phi_m / (mu0 c) dA`.
    pub fn gram(&self) -> &[T] {
        &self.gram
    }

    /// Exchange term of the per-mode power equation,
    /// `rho_l = 2 sum_{m != l} Re(K_lm conj(a_l) a_m)` with `a = phased`.
    pub fn exchange_terms(&self, z: T, amplitudes: &[Complex<T>], k: &CouplingMatrix<T>) -> Vec<T> {
        let a = self.phased(z, amplitudes);
        let m = self.m;
        (0..m)
            .map(|l| {
                let mut s = T::zero();
                for j in (0..m).filter(|&j| j != l) {
                    s += (k.get(l, j) * a[l].conj() * a[j]).re;
                }
                T::lit(2.0) * s
            })
            .collect()
    }
}
