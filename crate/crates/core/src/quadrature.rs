//! Tensor-product quadrature over the fiber cross-section.
//!
//! Radially the disk is split into panels at the core radius (and the doped
//! radius when it differs), with the cladding annulus further divided into
//! geometrically growing panels so the exponentially decaying cladding
//! field is resolved. Each panel carries a Gauss-Legendre rule with the
//! Jacobian `r` folded into the weights. Angularly the rule is the periodic
//! trapezoid on `[0, 2pi)`. No node sits on a panel edge, so the index jump
//! at `r = r_core` is never straddled.

use num_complex::Complex;

use crate::config::FiberSpec;
use crate::constants::PhysicalConstants;
use crate::modes::GuidedMode;
use crate::scalar::Scalar;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed in `f64` by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode<T> {
    pub r: T,
    pub theta: T,
    /// Area weight (m^2).
    pub weight: T,
}

/// Radial node with its `r dr` weight (angular factor not included).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialNode<T> {
    pub r: T,
    pub weight: T,
}

#[derive(Debug, Clone)]
pub struct CrossSectionRule<T> {
    pub nodes: Vec<QuadNode<T>>,
    pub radial: Vec<RadialNode<T>>,
    pub panel_edges: Vec<T>,
    pub radial_order: usize,
    pub angular_points: usize,
    pub r_core: T,
    pub r_clad: T,
}

/// Builds the cross-section rule for `fiber`.
pub fn build_rule<T: Scalar>(fiber: &FiberSpec<T>, radial_order: usize, angular_points: usize) -> CrossSectionRule<T> {
    let edges = panel_edges(fiber);
    let gl = gauss_legendre(radial_order);
    let mut radial = Vec::with_capacity(gl.len() * (edges.len() - 1));
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        for &(x, w) in &gl {
            let r = mid + half * T::lit(x);
            radial.push(RadialNode { r, weight: half * T::lit(w) * r });
        }
    }
    let dtheta = T::TAU() / T::from_usize_lossy(angular_points);
    let mut nodes = Vec::with_capacity(radial.len() * angular_points);
    for rn in &radial {
        for k in 0..angular_points {
            nodes.push(QuadNode {
                r: rn.r,
                theta: dtheta * T::from_usize_lossy(k),
                weight: rn.weight * dtheta,
            });
        }
    }
    CrossSectionRule {
        nodes,
        radial,
        panel_edges: edges,
        radial_order,
        angular_points,
        r_core: fiber.r_core,
        r_clad: fiber.r_clad,
    }
}

fn panel_edges<T: Scalar>(fiber: &FiberSpec<T>) -> Vec<T> {
    let mut edges = vec![T::zero(), fiber.r_core];
    let rd = fiber.doped_radius();
    let rel = T::lit(1e-12) * fiber.r_clad;
    if (rd - fiber.r_core).abs() > rel && rd < fiber.r_clad - rel {
        edges.push(rd);
    }
    let mut r = fiber.r_core * T::lit(2.0);
    // Last panel absorbs a short remainder rather than becoming a sliver.
    while r * T::lit(1.5) < fiber.r_clad {
        edges.push(r);
        r = r * T::lit(2.0);
    }
    edges.push(fiber.r_clad);
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= rel);
    edges
}

impl<T: Scalar> CrossSectionRule<T> {
    pub fn integrate(&self, f: impl Fn(T, T) -> T) -> T {
        self.nodes.iter().map(|q| q.weight * f(q.r, q.theta)).sum()
    }

    pub fn total_weight(&self) -> T {
        self.nodes.iter().map(|q| q.weight).sum()
    }

    /// Angular step of the trapezoid rule.
    pub fn dtheta(&self) -> T {
        T::TAU() / T::from_usize_lossy(self.angular_points)
    }

    /// A rule with `factor` times more radial points per panel.
    pub fn refined(&self, fiber: &FiberSpec<T>, factor: usize) -> Self {
        build_rule(fiber, self.radial_order * factor, self.angular_points * factor)
    }
}

/// Power-normalization integral `Phi = int n |phi|^2 / (mu0 c) dA`.
pub fn mode_norm<T: Scalar>(mode: &GuidedMode<T>, rule: &CrossSectionRule<T>, fiber: &FiberSpec<T>) -> T {
    let z0 = PhysicalConstants::<T>::codata().impedance();
    rule.integrate(|r, theta| {
        let v = mode.eval(r, theta);
        fiber.index_at(r) * v * v
    }) / z0
}

/// Power-weighted overlap `int n phi_a phi_b / (mu0 c) dA`.
pub fn mode_overlap<T: Scalar>(
    a: &GuidedMode<T>,
    b: &GuidedMode<T>,
    rule: &CrossSectionRule<T>,
    fiber: &FiberSpec<T>,
) -> T {
    let z0 = PhysicalConstants::<T>::codata().impedance();
    rule.integrate(|r, theta| fiber.index_at(r) * a.eval(r, theta) * b.eval(r, theta)) / z0
}

/// Signal irradiance `I_s = n / (mu0 c) |sum_m A_m e^{i beta_m z} phi_m|^2` at
/// the transverse point `(x, y)`.
pub fn signal_irradiance<T: Scalar>(
    x: T,
    y: T,
    z: T,
    amplitudes: &[Complex<T>],
    modes: &[GuidedMode<T>],
    fiber: &FiberSpec<T>,
) -> T {
    assert_eq!(amplitudes.len(), modes.len(), "one amplitude per mode");
    let r = x.hypot(y);
    let theta = y.atan2(x);
    signal_irradiance_polar(r, theta, z, amplitudes, modes, fiber)
}

pub(crate) fn signal_irradiance_polar<T: Scalar>(
    r: T,
    theta: T,
    z: T,
    amplitudes: &[Complex<T>],
    modes: &[GuidedMode<T>],
    fiber: &FiberSpec<T>,
) -> T {
    let z0 = PhysicalConstants::<T>::codata().impedance();
    // A global phase e^{i beta_0 z} drops out of |.|^2; keep only beat phases.
    let beta_ref = modes.first().map(|m| m.beta).unwrap_or_else(T::zero);
    let mut field = Complex::new(T::zero(), T::zero());
    for (a, m) in amplitudes.iter().zip(modes) {
        let phase = Complex::from_polar(T::one(), (m.beta - beta_ref) * z);
        field += *a * phase * m.eval(r, theta);
    }
    fiber.index_at(r) * field.norm_sqr() / z0
}
