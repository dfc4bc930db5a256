//! Jacobi elliptic functions and complete elliptic integrals through the
//! arithmetic-geometric mean. Parameter convention: `m = k²`.

use num_complex::Complex;

use crate::real::Real;

const MAX_ITER: usize = 64;

fn tol<T: Real>() -> T {
    T::epsilon() * T::lit(4.0)
}

pub fn agm<T: Real>(mut a: T, mut b: T) -> T {
    for _ in 0..MAX_ITER {
        if (a - b).abs() <= tol::<T>() * a.abs() {
            break;
        }
        let an = (a + b) / T::lit(2.0);
        b = (a * b).sqrt();
        a = an;
    }
    a
}

/// Complete elliptic integral of the first kind `K(m)`.
pub fn complete_k<T: Real>(m: T) -> T {
    T::FRAC_PI_2() / agm(T::one(), (T::one() - m).sqrt())
}

/// Parameter `m` whose period ratio `K(1 − m) / K(m)` equals `ratio`,
/// found by bisection in `log m` with AGM evaluations.
pub fn parameter_from_ratio<T: Real>(ratio: T) -> T {
    assert!(ratio > T::zero() && ratio.is_finite());
    let f = |m: T| complete_k(T::one() - m) / complete_k(m);
    // f decreases from +inf (m -> 0) to 0 (m -> 1)
    let (mut lo, mut hi) = (T::lit(-700.0).max(T::min_positive_value().ln()), T::zero());
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        let m = mid.exp();
        if m >= T::one() || f(m) < ratio {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= tol::<T>() {
            break;
        }
    }
    ((lo + hi) / T::lit(2.0)).exp()
}

/// `(sn, cn, dn)(u | m)` for real `u`, by descending Landen transformation.
pub fn sncndn<T: Real>(u: T, m: T) -> (T, T, T) {
    let one = T::one();
    if m <= T::epsilon() {
        return (u.sin(), u.cos(), one);
    }
    if m >= one - T::epsilon() {
        let s = one / u.cosh();
        return (u.tanh(), s, s);
    }
    let mut a = [T::zero(); MAX_ITER + 1];
    let mut c = [T::zero(); MAX_ITER + 1];
    a[0] = one;
    let mut b = (one - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < MAX_ITER && c[n].abs() > tol::<T>() {
        a[n + 1] = (a[n] + b) / T::lit(2.0);
        c[n + 1] = (a[n] - b) / T::lit(2.0);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = T::lit(2.0).powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        phi = (phi + (c[j] / a[j] * phi.sin()).asin()) / T::lit(2.0);
    }
    let (s, co) = phi.sin_cos();
    // dn > 0 on the real line
    (s, co, (one - m * s * s).sqrt())
}

/// `(sn, cn, dn)(x + iy | m)` via the addition theorem with the complementary
/// parameter on the imaginary axis.
pub fn sncndn_complex<T: Real>(u: Complex<T>, m: T) -> (Complex<T>, Complex<T>, Complex<T>) {
    let (s, c, d) = sncndn(u.re, m);
    let (s1, c1, d1) = sncndn(u.im, T::one() - m);
    let den = c1 * c1 + m * s * s * s1 * s1;
    let sn = Complex::new(s * d1, c * d * s1 * c1) / den;
    let cn = Complex::new(c * c1, -(s * d * s1 * d1)) / den;
    let dn = Complex::new(d * c1 * d1, -(m * s * c * s1)) / den;
    (sn, cn, dn)
}
