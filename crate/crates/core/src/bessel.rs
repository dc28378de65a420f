//! Bessel functions of the first kind `J_n` and modified Bessel functions of
//! the second kind `K_n` for integer order.
//!
//! `J_n` uses the ascending series for small arguments and Miller's backward
//! recurrence (normalized by `J_0 + 2 sum J_2k = 1`) otherwise. `K_n` uses
//! the trapezoidal rule on `K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt`,
//! which converges geometrically because the integrand is analytic in the
//! strip `|Im t| < pi/2`.

use crate::scalar::Scalar;

/// Bessel function of the first kind, integer order.
pub fn bessel_j<T: Scalar>(n: i32, x: T) -> T {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x < T::zero() {
        let v = bessel_j(n, -x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    if x < T::lit(2.0) {
        j_series(n as u32, x)
    } else {
        j_miller(n as u32, x)
    }
}

fn j_series<T: Scalar>(n: u32, x: T) -> T {
    let half = x * T::lit(0.5);
    let mut term = T::one();
    for k in 1..=n {
        term *= half / T::from_u32(k).unwrap();
    }
    let q = -half * half;
    let mut sum = term;
    let nn = T::from_u32(n).unwrap();
    let mut k = T::zero();
    loop {
        k += T::one();
        term *= q / (k * (k + nn));
        sum += term;
        if term.abs() <= T::epsilon() * T::lit(0.01) * sum.abs() {
            break;
        }
    }
    sum
}

fn j_miller<T: Scalar>(n: u32, x: T) -> T {
    let xf = x.as_f64();
    let top = (n as f64).max(xf.ceil());
    let mut m = (top + 25.0 + (40.0 * top).sqrt()) as u32;
    m += m % 2;
    let big = T::lit(1e10);
    let small = T::lit(1e-10);
    let two_over_x = T::lit(2.0) / x;

    let mut j_next = T::zero();
    let mut j_cur = T::lit(1e-30);
    let mut sum = T::zero();
    let mut result = T::zero();
    for k in (1..=m).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let j_prev = T::from_u32(k).unwrap() * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > big {
            j_cur *= small;
            j_next *= small;
            sum *= small;
            result *= small;
        }
        let order = k - 1;
        if order == n {
            result = j_cur;
        }
        if order == 0 {
            sum += j_cur;
        } else if order % 2 == 0 {
            sum += T::lit(2.0) * j_cur;
        }
    }
    result / sum
}

/// Modified Bessel function of the second kind, integer order, `x > 0`.
///
/// Returns `+inf` at `x = 0` and NaN for negative arguments.
pub fn bessel_k<T: Scalar>(n: i32, x: T) -> T {
    if x < T::zero() || x.is_nan() {
        return T::nan();
    }
    if x == T::zero() {
        return T::infinity();
    }
    let n = T::from_i32(n.abs()).unwrap();
    // The peak narrows like 1/sqrt(x); keep several nodes across it.
    let h = T::lit(0.1).min(T::lit(0.4) / x.sqrt());
    let tol = T::epsilon() * T::lit(1e-2);
    // Past this point the log-integrand is decreasing in t.
    let t_peak = (n / x).asinh();
    let mut sum = T::lit(0.5);
    let mut k = 1u32;
    loop {
        let t = h * T::from_u32(k).unwrap();
        let decay = -x * (t.cosh() - T::one());
        let term = T::lit(0.5) * ((decay + n * t).exp() + (decay - n * t).exp());
        sum += term;
        if t > t_peak && term <= tol * sum {
            break;
        }
        k += 1;
    }
    h * sum * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from mpmath at 30 digits.
    const J_REF: &[(i32, f64, f64)] = &[
        (0, 0.5, 0.93846980724081290423),
        (0, 1.8755301456055264, 0.29604559370499157114),
        (1, 2.9331472769731186, 0.36358817976914216361),
        (0, 7.3, 0.28821694763501439904),
        (1, 10.0, 0.04347274616886143667),
        (2, 4.044, 0.35300965947815528566),
        (3, 0.25, 0.00032425125267590813096),
        (5, 12.5, 0.034737699762239727682),
        (-1, 1.3, -0.52202324741466040583),
        (0, 25.0, 0.096266783275958116174),
        (4, 3.0, 0.13203418392461221033),
        (2, 0.01, 0.000012499895833658854145),
        (1, 19.7, 0.015100612097754802601),
    ];

    const K_REF: &[(i32, f64, f64)] = &[
        (0, 0.5, 0.92441907122766586178),
        (1, 0.5, 1.6564411200033008937),
        (0, 3.2, 0.027594997675100604695),
        (1, 3.2, 0.031642895211398764239),
        (2, 2.8, 0.080329043123550290314),
        (0, 51.0, 1.2422301193312980718e-23),
        (1, 51.0, 1.2543502824615666684e-23),
        (3, 0.05, 63980.006239507651875),
        (2, 80.0, 2.5886411706935010655e-36),
        (0, 0.001, 7.0236888005623813228),
        (1, 15.0, 1.014172936976209181e-7),
        (5, 6.0, 0.008023718980129033413),
        (0, 2.0, 0.11389387274953343565),
    ];

    #[test]
    fn bessel_j_matches_reference() {
        for &(n, x, want) in J_REF {
            let got = bessel_j(n, x);
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-12, "J_{n}({x}) = {got}, want {want}, rel {rel:e}");
        }
    }

    #[test]
    fn bessel_k_matches_reference() {
        for &(n, x, want) in K_REF {
            let got = bessel_k(n, x);
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-12, "K_{n}({x}) = {got}, want {want}, rel {rel:e}");
        }
    }

    #[test]
    fn special_arguments() {
        assert_eq!(bessel_j(0, 0.0), 1.0);
        assert_eq!(bessel_j(3, 0.0), 0.0);
        assert!(bessel_k(0, 0.0_f64).is_infinite());
        assert!(bessel_k(1, -1.0_f64).is_nan());
        assert_eq!(bessel_k(-2, 1.7), bessel_k(2, 1.7));
        assert!((bessel_j(2, -1.5_f64) - bessel_j(2, 1.5)).abs() < 1e-16);
        assert!((bessel_j(1, -1.5_f64) + bessel_j(1, 1.5)).abs() < 1e-16);
    }

    #[test]
    fn recurrences_hold() {
        // J_{n-1} + J_{n+1} = (2n/x) J_n and K_{n+1} - K_{n-1} = (2n/x) K_n
        for &x in &[0.3, 1.9, 2.1, 5.5, 17.0] {
            for n in 1..5 {
                let lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
                let rhs = 2.0 * n as f64 / x * bessel_j(n, x);
                assert!((lhs - rhs).abs() < 1e-13, "J recurrence n={n} x={x}");
                let lhs = bessel_k(n + 1, x) - bessel_k(n - 1, x);
                let rhs = 2.0 * n as f64 / x * bessel_k(n, x);
                assert!(((lhs - rhs) / rhs).abs() < 1e-12, "K recurrence n={n} x={x}");
            }
        }
    }

    #[test]
    fn single_precision_is_usable() {
        let j = bessel_j(0, 1.8755301_f32);
        assert!((j - 0.296_045_6).abs() < 1e-6);
        let k = bessel_k(1, 3.2_f32);
        assert!(((k - 0.031_642_895) / 0.031_642_895).abs() < 1e-5);
    }
}
