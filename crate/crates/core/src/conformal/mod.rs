//! Uniformizing maps `(Ω; a, b) → (H; 0, ∞)` for rectangles and discs.
//!
//! A handle first sends the domain to the upper half-plane (Jacobi `sn` for a
//! rectangle, the Cayley map for a disc), then applies a real Möbius map
//! taking the images of `a`, `b` to `0`, `∞`, scaled so that the centre of the
//! domain lands on the unit circle.

pub mod jacobi;

use num_complex::Complex;
use thiserror::Error;

use crate::domain::{DiscreteDomain, Shape};
use crate::real::Real;

#[derive(Debug, Error, PartialEq)]
pub enum ConformalError {
    #[error("z = 1 is the pole of the disc-to-half-plane map")]
    Pole,
    #[error("marked points are too close to normalize")]
    DegenerateMarks,
    #[error("point is {distance} from the boundary, closer than {required}")]
    TooCloseToBoundary { distance: f64, required: f64 },
    #[error("point lies outside the domain")]
    Outside,
    #[error("domain shape has no built-in uniformizer")]
    UnsupportedShape,
}

/// `Φ(z) = i (1 + z) / (1 − z)`, the unit disc onto the upper half-plane.
pub fn mobius_disc_to_halfplane<T: Real>(z: Complex<T>) -> Result<Complex<T>, ConformalError> {
    let one = Complex::new(T::one(), T::zero());
    if (one - z).norm() <= T::epsilon() {
        return Err(ConformalError::Pole);
    }
    Ok(Complex::<T>::i() * (one + z) / (one - z))
}

/// Inverse of [`mobius_disc_to_halfplane`].
pub fn mobius_halfplane_to_disc<T: Real>(w: Complex<T>) -> Complex<T> {
    (w - Complex::<T>::i()) / (w + Complex::<T>::i())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Base<T> {
    /// `[x0, x0 + width] × [y0, y0 + height]`
    Rectangle { x0: T, y0: T, width: T, height: T, m: T, k: T },
    Disc { cx: T, cy: T, radius: T },
}

impl<T: Real> Base<T> {
    /// Map to the half-plane and its derivative.
    fn eval(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        match *self {
            Base::Rectangle { x0, y0, width, m, k, .. } => {
                let scale = T::lit(2.0) * k / width;
                let u = (z - Complex::new(x0, y0)) * scale - Complex::new(k, T::zero());
                let (sn, cn, dn) = jacobi::sncndn_complex(u, m);
                (sn, cn * dn * scale)
            }
            Base::Disc { cx, cy, radius } => {
                let one = Complex::new(T::one(), T::zero());
                let zeta = (z - Complex::new(cx, cy)) / radius;
                let w = Complex::<T>::i() * (one + zeta) / (one - zeta);
                let dw = Complex::<T>::i() * T::lit(2.0) / ((one - zeta) * (one - zeta)) / radius;
                (w, dw)
            }
        }
    }

    fn distance_to_boundary(&self, z: Complex<T>) -> T {
        match *self {
            Base::Rectangle { x0, y0, width, height, .. } => {
                let dx = (z.re - x0).min(x0 + width - z.re);
                let dy = (z.im - y0).min(y0 + height - z.im);
                dx.min(dy)
            }
            Base::Disc { cx, cy, radius } => radius - (z - Complex::new(cx, cy)).norm(),
        }
    }

    fn center(&self) -> Complex<T> {
        match *self {
            Base::Rectangle { x0, y0, width, height, .. } => {
                Complex::new(x0 + width / T::lit(2.0), y0 + height / T::lit(2.0))
            }
            Base::Disc { cx, cy, .. } => Complex::new(cx, cy),
        }
    }

    /// Nearest point of the boundary.
    fn project(&self, z: Complex<T>) -> Complex<T> {
        match *self {
            Base::Rectangle { x0, y0, width, height, .. } => {
                let x = z.re.max(x0).min(x0 + width);
                let y = z.im.max(y0).min(y0 + height);
                let d = [x - x0, x0 + width - x, y - y0, y0 + height - y];
                let i = (0..4).min_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap()).unwrap();
                match i {
                    0 => Complex::new(x0, y),
                    1 => Complex::new(x0 + width, y),
                    2 => Complex::new(x, y0),
                    _ => Complex::new(x, y0 + height),
                }
            }
            Base::Disc { cx, cy, radius } => {
                let c = Complex::new(cx, cy);
                let v = z - c;
                c + v * (radius / v.norm())
            }
        }
    }
}

/// Conformal map of a rectangle or disc onto `H` with `a ↦ 0`, `b ↦ ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformizerHandle<T> {
    base: Base<T>,
    mesh: T,
    a: Complex<T>,
    b: Complex<T>,
    // real Möbius (p ζ + q) / (r ζ + s) with ps − qr > 0
    mob: [T; 4],
}

impl<T: Real> UniformizerHandle<T> {
    fn finish(base: Base<T>, mesh: T, a: Complex<T>, b: Complex<T>) -> Result<Self, ConformalError> {
        let a = base.project(a);
        let b = base.project(b);
        if (a - b).norm() < mesh {
            return Err(ConformalError::DegenerateMarks);
        }
        let za = base.eval(a).0.re;
        let zb = base.eval(b).0;
        let mut mob = if zb.norm() > T::lit(1e12) || !zb.re.is_finite() {
            [T::one(), -za, T::zero(), T::one()]
        } else {
            let zb = zb.re;
            if (za - zb).abs() <= T::epsilon() {
                return Err(ConformalError::DegenerateMarks);
            }
            let sign = if za > zb { T::one() } else { -T::one() };
            [sign, -sign * za, T::one(), -zb]
        };
        let mut h = UniformizerHandle { base, mesh, a, b, mob };
        let c = h.eval_unchecked(base.center()).0.norm();
        mob[0] /= c;
        mob[1] /= c;
        h.mob = mob;
        Ok(h)
    }

    /// Rectangle `[x0, x0+width] × [y0, y0+height]`; `a`, `b` are projected onto
    /// the boundary.
    pub fn rectangle(
        x0: T,
        y0: T,
        width: T,
        height: T,
        a: Complex<T>,
        b: Complex<T>,
        mesh: T,
    ) -> Result<Self, ConformalError> {
        let m = jacobi::parameter_from_ratio(T::lit(2.0) * height / width);
        let k = jacobi::complete_k(m);
        Self::finish(Base::Rectangle { x0, y0, width, height, m, k }, mesh, a, b)
    }

    /// Disc of the given centre and radius; `a`, `b` are projected radially.
    pub fn disc(center: Complex<T>, radius: T, a: Complex<T>, b: Complex<T>, mesh: T) -> Result<Self, ConformalError> {
        Self::finish(Base::Disc { cx: center.re, cy: center.im, radius }, mesh, a, b)
    }

    pub fn a(&self) -> Complex<T> {
        self.a
    }

    pub fn b(&self) -> Complex<T> {
        self.b
    }

    pub fn mesh(&self) -> T {
        self.mesh
    }

    pub fn center(&self) -> Complex<T> {
        self.base.center()
    }

    /// Signed distance to the continuum boundary (negative outside).
    pub fn distance_to_boundary(&self, z: Complex<T>) -> T {
        self.base.distance_to_boundary(z)
    }

    fn eval_unchecked(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let (zeta, dzeta) = self.base.eval(z);
        let [p, q, r, s] = self.mob;
        let den = zeta * r + s;
        let w = (zeta * p + q) / den;
        let dw = dzeta * (p * s - q * r) / (den * den);
        (w, dw)
    }

    /// `w(z)` for `z` in the closed domain.
    pub fn eval(&self, z: Complex<T>) -> Result<Complex<T>, ConformalError> {
        if self.distance_to_boundary(z) < -T::lit(1e-9) * (T::one() + z.norm()) {
            return Err(ConformalError::Outside);
        }
        Ok(self.eval_unchecked(z).0)
    }

    /// `w′(z)` in closed form, for `z` at least `2δ` inside.
    pub fn derivative(&self, z: Complex<T>) -> Result<Complex<T>, ConformalError> {
        let d = self.distance_to_boundary(z);
        let required = T::lit(2.0) * self.mesh;
        if d < required {
            return Err(ConformalError::TooCloseToBoundary {
                distance: d.to_f64_lossy(),
                required: required.to_f64_lossy(),
            });
        }
        Ok(self.eval_unchecked(z).1)
    }

    /// `(w(z), w′(z))` without precondition checks.
    pub fn eval_with_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        self.eval_unchecked(z)
    }
}

impl UniformizerHandle<f64> {
    /// Handle for the continuum shape of a discrete domain, with the marks at
    /// the hull corners where interfaces start and end.
    ///
    /// A rectangle is uniformized as its polygonal hull exactly. A disc of
    /// radius `R` is replaced by the disc of radius `R + δ/√2`, which contains
    /// the hull.
    pub fn for_domain(domain: &DiscreteDomain) -> Result<Self, ConformalError> {
        let delta = domain.mesh();
        let corner = |p: (f64, f64)| {
            let (x, y) = domain.to_physical(p);
            Complex::new(x, y)
        };
        let a = corner(domain.start_corner());
        let b = corner(domain.end_corner());
        match domain.shape() {
            Shape::Rectangle { .. } => {
                let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
                for v in 0..domain.len() {
                    let (x, y) = domain.site_position(v);
                    lo = (lo.0.min(x), lo.1.min(y));
                    hi = (hi.0.max(x), hi.1.max(y));
                }
                let h = delta / 2.0;
                Self::rectangle(lo.0 - h, lo.1 - h, hi.0 - lo.0 + delta, hi.1 - lo.1 + delta, a, b, delta)
            }
            Shape::Disc { radius } => {
                let (cx, cy) = domain.origin();
                let r = (radius / delta + 1e-9).floor() * delta + delta * std::f64::consts::FRAC_1_SQRT_2;
                Self::disc(Complex::new(cx, cy), r, a, b, delta)
            }
            Shape::Custom => Err(ConformalError::UnsupportedShape),
        }
    }
}
