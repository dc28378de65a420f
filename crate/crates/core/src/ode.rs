//! Fixed-step explicit Runge-Kutta steppers on complex state vectors.

use num_complex::Complex;

use crate::config::SolverKind;
use crate::scalar::Scalar;

/// A first-order system `y' = f(z, y)`.
pub trait OdeSystem<T: Scalar> {
    fn eval(&self, z: T, y: &[Complex<T>], dy: &mut [Complex<T>]);
}

impl<T: Scalar, F: Fn(T, &[Complex<T>], &mut [Complex<T>])> OdeSystem<T> for F {
    fn eval(&self, z: T, y: &[Complex<T>], dy: &mut [Complex<T>]) {
        self(z, y, dy)
    }
}

fn axpy<T: Scalar>(out: &mut [Complex<T>], y: &[Complex<T>], h: T, terms: &[(T, &[Complex<T>])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = Complex::new(T::zero(), T::zero());
        for (c, k) in terms {
            s += k[i] * *c;
        }
        *o = y[i] + s * h;
    }
}

/// Stepper with its stage buffers. `derivative()` returns `f(z, y)` at the
/// start of the last step taken.
pub struct Stepper<T> {
    kind: SolverKind,
    k: Vec<Vec<Complex<T>>>,
    tmp: Vec<Complex<T>>,
    /// Dormand-Prince: last stage of the previous step is `f` at its end.
    fsal_valid: bool,
    last_error: T,
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl<T: Scalar> Stepper<T> {
    pub fn new(kind: SolverKind, dim: usize) -> Self {
        let stages = match kind {
            SolverKind::Rk4 => 4,
            SolverKind::DormandPrince => 7,
        };
        Stepper {
            kind,
            k: vec![vec![Complex::new(T::zero(), T::zero()); dim]; stages],
            tmp: vec![Complex::new(T::zero(), T::zero()); dim],
            fsal_valid: false,
            last_error: T::zero(),
        }
    }

    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    /// `f(z, y)` at the start of the most recent step.
    pub fn derivative(&self) -> &[Complex<T>] {
        &self.k[0]
    }

    /// Max-norm of the embedded error estimate of the last step
    /// (Dormand-Prince only; zero for RK4).
    pub fn last_error(&self) -> T {
        self.last_error
    }

    /// Evaluates `f(z, y)` into the first stage without stepping; used to
    /// read the derivative at the final point.
    pub fn prime(&mut self, f: &impl OdeSystem<T>, z: T, y: &[Complex<T>]) -> &[Complex<T>] {
        f.eval(z, y, &mut self.k[0]);
        self.fsal_valid = false;
        &self.k[0]
    }

    /// Advances `y` from `z` to `z + h` in place.
    pub fn step(&mut self, f: &impl OdeSystem<T>, z: T, h: T, y: &mut [Complex<T>]) {
        match self.kind {
            SolverKind::Rk4 => self.rk4(f, z, h, y),
            SolverKind::DormandPrince => self.dopri(f, z, h, y),
        }
    }

    fn rk4(&mut self, f: &impl OdeSystem<T>, z: T, h: T, y: &mut [Complex<T>]) {
        let half = T::lit(0.5);
        let (k1, rest) = self.k.split_at_mut(1);
        let (k2, rest) = rest.split_at_mut(1);
        let (k3, k4) = rest.split_at_mut(1);
        let (k1, k2, k3, k4) = (&mut k1[0], &mut k2[0], &mut k3[0], &mut k4[0]);
        f.eval(z, y, k1);
        axpy(&mut self.tmp, y, h, &[(half, k1)]);
        f.eval(z + half * h, &self.tmp, k2);
        axpy(&mut self.tmp, y, h, &[(half, k2)]);
        f.eval(z + half * h, &self.tmp, k3);
        axpy(&mut self.tmp, y, h, &[(T::one(), k3)]);
        f.eval(z + h, &self.tmp, k4);
        let sixth = h / T::lit(6.0);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * sixth;
        }
    }

    fn dopri(&mut self, f: &impl OdeSystem<T>, z: T, h: T, y: &mut [Complex<T>]) {
        let c = |x: f64| T::lit(x);
        if self.fsal_valid {
            let last = self.k.pop().expect("seven stages");
            self.k.insert(0, last);
        } else {
            f.eval(z, y, &mut self.k[0]);
        }
        let k = &mut self.k;
        let tmp = &mut self.tmp;
        macro_rules! stage {
            ($idx:expr, $cz:expr, [$(($a:expr, $j:expr)),*]) => {{
                {
                    let terms: Vec<(T, &[Complex<T>])> = vec![$((c($a), &k[$j][..])),*];
                    axpy(tmp, y, h, &terms);
                }
                f.eval(z + c($cz) * h, tmp, &mut k[$idx]);
            }};
        }
        stage!(1, 0.2, [(A21, 0)]);
        stage!(2, 0.3, [(A31, 0), (A32, 1)]);
        stage!(3, 0.8, [(A41, 0), (A42, 1), (A43, 2)]);
        stage!(4, 8.0 / 9.0, [(A51, 0), (A52, 1), (A53, 2), (A54, 3)]);
        stage!(5, 1.0, [(A61, 0), (A62, 1), (A63, 2), (A64, 3), (A65, 4)]);
        // Fifth-order solution; its derivative is the seventh stage.
        {
            let terms: Vec<(T, &[Complex<T>])> =
                vec![(c(B1), &k[0][..]), (c(B3), &k[2][..]), (c(B4), &k[3][..]), (c(B5), &k[4][..]), (c(B6), &k[5][..])];
            axpy(tmp, y, h, &terms);
        }
        f.eval(z + h, tmp, &mut k[6]);
        let mut err = T::zero();
        for i in 0..y.len() {
            let e = (k[0][i] * c(E1) + k[2][i] * c(E3) + k[3][i] * c(E4) + k[4][i] * c(E5) + k[5][i] * c(E6) + k[6][i] * c(E7)) * h;
            err = err.max(e.norm());
        }
        self.last_error = err;
        y.copy_from_slice(tmp);
        self.fsal_valid = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(z: f64, y: &[Complex<f64>], dy: &mut [Complex<f64>]) {
        // y0' = -0.5 y0, y1' = i 3 y1 + z
        dy[0] = y[0] * -0.5;
        dy[1] = y[1] * Complex::new(0.0, 3.0) + Complex::new(z, 0.0);
    }

    fn exact(z: f64) -> [Complex<f64>; 2] {
        let i3 = Complex::new(0.0, 3.0);
        // y1 = (1 - 1/9) e^{3iz} + 1/9 + i z / 3
        let y1 = Complex::new(1.0 - 1.0 / 9.0, 0.0) * (i3 * z).exp() + Complex::new(1.0 / 9.0, z / 3.0);
        [Complex::new((-0.5 * z).exp(), 0.0), y1]
    }

    fn run(kind: SolverKind, n: usize) -> f64 {
        let mut s = Stepper::new(kind, 2);
        let mut y = vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)];
        let h = 1.0 / n as f64;
        for k in 0..n {
            s.step(&decay, k as f64 * h, h, &mut y);
        }
        let e = exact(1.0);
        (y[0] - e[0]).norm().max((y[1] - e[1]).norm())
    }

    #[test]
    fn rk4_is_fourth_order() {
        let ratio = run(SolverKind::Rk4, 50) / run(SolverKind::Rk4, 100);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn dormand_prince_is_fifth_order() {
        let ratio = run(SolverKind::DormandPrince, 25) / run(SolverKind::DormandPrince, 50);
        assert!((ratio - 32.0).abs() < 3.0, "ratio {ratio}");
        let e = run(SolverKind::DormandPrince, 100);
        assert!(e < 5e-11, "error {e:e}");
    }

    #[test]
    fn exponential_decay_to_1e10() {
        let f = |_: f64, y: &[Complex<f64>], dy: &mut [Complex<f64>]| dy[0] = y[0] * -0.5;
        for kind in [SolverKind::Rk4, SolverKind::DormandPrince] {
            let mut s = Stepper::new(kind, 1);
            let mut y = vec![Complex::new(2.0, 0.0)];
            let n = 200;
            for k in 0..n {
                s.step(&f, k as f64 / n as f64, 1.0 / n as f64, &mut y);
            }
            let want = 2.0 * (-0.5f64).exp();
            assert!(((y[0].re - want) / want).abs() < 1e-10);
        }
    }
}
