//! Chordal Loewner evolution `∂t g_t(z) = 2 / (g_t(z) − W_t)` in the upper
//! half-plane: forward integration, curve tracing from a driving function,
//! the zipper inversion from a curve, and half-plane capacity.

use std::fmt::Write as _;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::real::Real;

/// `|g − W|` below which a point counts as swallowed.
pub const SWALLOW_FLOOR: f64 = 1e-8;
/// Forward steps are `STEP_FACTOR · |g − W|²`.
pub const STEP_FACTOR: f64 = 3e-5;

#[derive(Debug, Error, PartialEq)]
pub enum LoewnerError {
    #[error("point swallowed near t = {time}")]
    Swallowed { time: f64 },
    #[error("curve point {index} maps to Im <= 0")]
    InvalidPoint { index: usize },
    #[error("invalid driving function: {0}")]
    InvalidDrive(String),
    #[error("prefix {0} exceeds the curve length")]
    PrefixTooLong(usize),
}

/// Driving function sampled at strictly increasing capacity times, linear in
/// between, `W(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingFunction<T> {
    times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> DrivingFunction<T> {
    /// Validates the samples; repeated times keep their last value.
    pub fn new(times: Vec<T>, values: Vec<T>) -> Result<Self, LoewnerError> {
        if times.len() != values.len() || times.is_empty() {
            return Err(LoewnerError::InvalidDrive("times and values must be nonempty and equal length".into()));
        }
        if times[0] != T::zero() || values[0] != T::zero() {
            return Err(LoewnerError::InvalidDrive("must start at (0, 0)".into()));
        }
        let mut t = Vec::with_capacity(times.len());
        let mut v: Vec<T> = Vec::with_capacity(times.len());
        for (ti, vi) in times.into_iter().zip(values) {
            if !ti.is_finite() || !vi.is_finite() {
                return Err(LoewnerError::InvalidDrive("non-finite sample".into()));
            }
            match t.last() {
                Some(&last) if ti < last => {
                    return Err(LoewnerError::InvalidDrive("times decrease".into()));
                }
                Some(&last) if ti == last => {
                    if t.len() > 1 {
                        *v.last_mut().unwrap() = vi;
                    }
                }
                _ => {
                    t.push(ti);
                    v.push(vi);
                }
            }
        }
        Ok(DrivingFunction { times: t, values: v })
    }

    /// Constant `W ≡ 0` up to `horizon`.
    pub fn zero(horizon: T) -> Self {
        DrivingFunction { times: vec![T::zero(), horizon], values: vec![T::zero(); 2] }
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> T {
        *self.times.last().unwrap()
    }

    /// Linear interpolation; constant beyond the horizon.
    pub fn value_at(&self, t: T) -> T {
        let n = self.times.len();
        if t <= T::zero() || n == 1 {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let i = self.times.partition_point(|x| *x <= t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let (w0, w1) = (self.values[i - 1], self.values[i]);
        w0 + (w1 - w0) * (t - t0) / (t1 - t0)
    }

    /// Same function cut at `t_max` (with an interpolated endpoint).
    pub fn truncated(&self, t_max: T) -> Self {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (t, w) in self.times.iter().zip(&self.values) {
            if *t < t_max {
                times.push(*t);
                values.push(*w);
            }
        }
        if t_max > T::zero() && t_max <= self.horizon() {
            times.push(t_max);
            values.push(self.value_at(t_max));
        }
        DrivingFunction { times, values }
    }

    /// CSV, header `t,w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,w\n");
        for (t, w) in self.times.iter().zip(&self.values) {
            let _ = writeln!(out, "{t},{w}");
        }
        out
    }
}

/// Curve in the closed upper half-plane starting at `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveInH<T> {
    points: Vec<Complex<T>>,
}

impl<T: Real> CurveInH<T> {
    pub fn new(points: Vec<Complex<T>>) -> Result<Self, LoewnerError> {
        if points.is_empty() || points[0].norm() > T::lit(1e-12) {
            return Err(LoewnerError::InvalidDrive("curve must start at 0".into()));
        }
        if let Some(i) = points.iter().position(|p| p.im < T::zero() || !(p.re.is_finite() && p.im.is_finite())) {
            return Err(LoewnerError::InvalidPoint { index: i });
        }
        Ok(CurveInH { points })
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV, header `re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.re, p.im);
        }
        out
    }
}

/// Square root with nonnegative imaginary part; on the real axis the sign
/// follows `orient` so that the map is asymptotic to the identity.
#[inline]
fn sqrt_upper<T: Real>(z: Complex<T>, orient: T) -> Complex<T> {
    let (a, b) = (z.re, z.im);
    let half = T::lit(0.5);
    let r = (a * a + b * b).sqrt();
    if b == T::zero() {
        return if a >= T::zero() {
            let s = a.sqrt();
            Complex::new(if orient < T::zero() { -s } else { s }, T::zero())
        } else {
            Complex::new(T::zero(), (-a).sqrt())
        };
    }
    // algebraic root with Im > 0: (sign(b) re, im)
    let (re, im) = if a >= T::zero() {
        let re = ((r + a) * half).sqrt();
        (re, b.abs() * half / re)
    } else {
        let im = ((r - a) * half).sqrt();
        (b.abs() * half / im, im)
    };
    if b > T::zero() {
        Complex::new(re, im)
    } else {
        Complex::new(-re, im)
    }
}

/// Vertical slit map removing `[x, x + iy]`: `x + √((z − x)² + y²)`.
#[inline]
pub fn slit_map<T: Real>(z: Complex<T>, x: T, y: T) -> Complex<T> {
    let d = z - x;
    Complex::new(x, T::zero()) + sqrt_upper(d * d + y * y, d.re)
}

/// Inverse of [`slit_map`].
#[inline]
pub fn slit_map_inverse<T: Real>(w: Complex<T>, x: T, y: T) -> Complex<T> {
    let d = w - x;
    Complex::new(x, T::zero()) + sqrt_upper(d * d - y * y, d.re)
}

/// `(g_t(z), g_t′(z))` by adaptive explicit midpoint integration of the
/// Loewner equation and its variational equation.
pub fn forward_map_with_derivative<T: Real>(
    drive: &DrivingFunction<T>,
    z: Complex<T>,
    t_end: T,
) -> Result<(Complex<T>, Complex<T>), LoewnerError> {
    forward_flow(drive, z, &[t_end]).map(|v| v[0])
}

/// `(g_t(z), g_t′(z))`.
pub type FlowPoint<T> = (Complex<T>, Complex<T>);

/// `(g_t(z), g_t′(z))` at each of the nondecreasing `times`, from a single
/// integration.
pub fn forward_flow<T: Real>(
    drive: &DrivingFunction<T>,
    z: Complex<T>,
    times: &[T],
) -> Result<Vec<FlowPoint<T>>, LoewnerError> {
    let two = T::lit(2.0);
    let floor = T::lit(SWALLOW_FLOOR);
    let factor = T::lit(STEP_FACTOR);
    let mut t = T::zero();
    let mut g = z;
    let mut dg = Complex::new(T::one(), T::zero());
    let mut out = Vec::with_capacity(times.len());
    if z.im <= T::zero() {
        return Err(LoewnerError::Swallowed { time: 0.0 });
    }
    for &t_end in times {
        while t < t_end {
            let d = g - drive.value_at(t);
            let r2 = d.norm_sqr();
            if r2.sqrt() < floor {
                return Err(LoewnerError::Swallowed { time: t.to_f64_lossy() });
            }
            let h = (t_end - t).min(factor * r2);
            let half = h / two;
            let gm = g + d.inv() * (two * half);
            let dgm = dg - dg * (two * half) / (d * d);
            let dm = gm - drive.value_at(t + half);
            if dm.norm() < floor {
                return Err(LoewnerError::Swallowed { time: (t + half).to_f64_lossy() });
            }
            g += dm.inv() * (two * h);
            dg -= dgm * (two * h) / (dm * dm);
            t += h;
        }
        out.push((g, dg));
    }
    Ok(out)
}

/// `g_{t_end}(z)`.
pub fn forward_map<T: Real>(drive: &DrivingFunction<T>, z: Complex<T>, t_end: T) -> Result<Complex<T>, LoewnerError> {
    forward_map_with_derivative(drive, z, t_end).map(|(g, _)| g)
}

/// Tips `γ(t_k)` at `t_k = k T / n`, `k = 0..=n`, by backward composition of
/// vertical slit maps with the drive frozen at each interval's midpoint.
pub fn trace_curve<T: Real>(drive: &DrivingFunction<T>, n_points: usize) -> CurveInH<T> {
    let n = n_points.max(1);
    let horizon = drive.horizon();
    let dt = horizon / T::from_usize(n).unwrap();
    let half_height = T::lit(2.0) * dt.sqrt();
    let u: Vec<T> = (0..n)
        .map(|j| drive.value_at((T::from_usize(j).unwrap() + T::lit(0.5)) * dt))
        .collect();
    let mut points = Vec::with_capacity(n + 1);
    points.push(Complex::new(T::zero(), T::zero()));
    for k in 1..=n {
        let mut z = Complex::new(u[k - 1], T::zero());
        for j in (0..k).rev() {
            z = slit_map_inverse(z, u[j], half_height);
        }
        points.push(z);
    }
    CurveInH { points }
}

/// Drive of a curve by the zipper: each point, mapped down by the maps built
/// so far to `x + iy`, contributes capacity `y²/4` and drive value `x`.
pub fn zipper_extract<T: Real>(curve: &CurveInH<T>) -> Result<DrivingFunction<T>, LoewnerError> {
    zipper_extract_capped(curve, T::infinity())
}

/// Zipper stopped once the capacity reaches `t_cap`.
pub fn zipper_extract_capped<T: Real>(curve: &CurveInH<T>, t_cap: T) -> Result<DrivingFunction<T>, LoewnerError> {
    zipper_extract_lenient(curve, t_cap, 0).map(|(d, _)| d)
}

/// Zipper that drops up to `max_hidden` points whose image lands on or below
/// the real axis (points hidden behind the slit approximation of an earlier
/// near-contact of the curve with itself). Returns the drive and the number of
/// dropped points.
pub fn zipper_extract_lenient<T: Real>(
    curve: &CurveInH<T>,
    t_cap: T,
    max_hidden: usize,
) -> Result<(DrivingFunction<T>, usize), LoewnerError> {
    let pts = curve.points();
    let mut slits: Vec<(T, T)> = Vec::with_capacity(pts.len());
    let mut times = vec![T::zero()];
    let mut values = vec![T::zero()];
    let mut t = T::zero();
    let mut hidden = 0;
    let tiny = T::epsilon() * T::lit(16.0);
    for (k, p) in pts.iter().enumerate().skip(1) {
        let mut z = *p;
        for &(x, y) in &slits {
            z = slit_map(z, x, y);
        }
        if z.im <= tiny * (T::one() + z.norm()) {
            hidden += 1;
            if hidden > max_hidden {
                return Err(LoewnerError::InvalidPoint { index: k });
            }
            continue;
        }
        slits.push((z.re, z.im));
        t += z.im * z.im / T::lit(4.0);
        times.push(t);
        values.push(z.re);
        if t >= t_cap {
            break;
        }
    }
    Ok((DrivingFunction::new(times, values)?, hidden))
}

/// Half-plane capacity of the first `prefix_len` points (`0` for an empty
/// prefix).
pub fn hcap_of_curve<T: Real>(curve: &CurveInH<T>, prefix_len: usize) -> Result<T, LoewnerError> {
    if prefix_len > curve.len() {
        return Err(LoewnerError::PrefixTooLong(prefix_len));
    }
    if prefix_len <= 1 {
        return Ok(T::zero());
    }
    let prefix = CurveInH { points: curve.points()[..prefix_len].to_vec() };
    Ok(zipper_extract(&prefix)?.horizon())
}

/// `√κ B_t` on a uniform grid of `n_steps` steps over `[0, t_end]`.
pub fn sample_sle_drive<T: Real, R: Rng + ?Sized>(kappa: T, t_end: T, n_steps: usize, rng: &mut R) -> DrivingFunction<T> {
    let n = n_steps.max(1);
    let dt = t_end / T::from_usize(n).unwrap();
    let sd = (kappa * dt).sqrt();
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    times.push(T::zero());
    values.push(T::zero());
    let mut w = T::zero();
    for k in 1..=n {
        let xi: f64 = rng.sample(StandardNormal);
        w += sd * T::lit(xi);
        times.push(dt * T::from_usize(k).unwrap());
        values.push(w);
    }
    DrivingFunction { times, values }
}

/// Discrete Fréchet distance between two polylines.
pub fn curve_distance<T: Real>(c1: &[(T, T)], c2: &[(T, T)]) -> T {
    assert!(!c1.is_empty() && !c2.is_empty(), "curves must be nonempty");
    let dist = |i: usize, j: usize| (c1[i].0 - c2[j].0).hypot(c1[i].1 - c2[j].1);
    let m = c2.len();
    let mut prev = vec![T::zero(); m];
    let mut cur = vec![T::zero(); m];
    for i in 0..c1.len() {
        for j in 0..m {
            let d = dist(i, j);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn c(x: f64, y: f64) -> Complex<f64> {
        Complex::new(x, y)
    }

    #[test]
    fn forward_closed_forms() {
        let w0 = DrivingFunction::zero(2.0);
        let g = forward_map(&w0, c(0.0, 3.0), 1.0).unwrap();
        assert!((g - c(0.0, 5f64.sqrt())).norm() < 1e-8);
        assert_eq!(forward_map(&w0, c(0.3, 0.7), 0.0).unwrap(), c(0.3, 0.7));
        assert!(matches!(forward_map(&w0, c(0.0, 1.0), 1.0), Err(LoewnerError::Swallowed { time }) if (time - 0.25).abs() < 1e-6));
    }

    #[test]
    fn forward_derivative_closed_form() {
        let w0 = DrivingFunction::zero(1.0);
        let z = c(0.4, 1.3);
        let (g, dg) = forward_map_with_derivative(&w0, z, 0.3).unwrap();
        let exact = (z * z + 1.2).sqrt();
        assert!((g - exact).norm() < 1e-8);
        assert!((dg - z / exact).norm() < 1e-8);
    }

    #[test]
    fn flow_agrees_with_single_maps() {
        let mut rng = stream(8, 0);
        let drive = sample_sle_drive(3.0f64, 0.5, 200, &mut rng);
        let z = c(0.2, 1.5);
        let times = [0.0, 0.1, 0.1, 0.35, 0.5];
        let flow = forward_flow(&drive, z, &times).unwrap();
        assert_eq!(flow[0], (z, c(1.0, 0.0)));
        assert_eq!(flow[1], flow[2]);
        for (&t, &(g, dg)) in times.iter().zip(&flow) {
            let (g1, dg1) = forward_map_with_derivative(&drive, z, t).unwrap();
            // step sequences differ, and midpoint steps across drive kinks are first order
            assert!((g - g1).norm() < 1e-6 && (dg - dg1).norm() < 1e-6, "{t} {}", (g - g1).norm());
        }
    }

    #[test]
    fn hydrodynamic_normalization() {
        let w0 = DrivingFunction::zero(1.0);
        // |g_t(z) − (z + 2t/z)| ≤ C/|z|² with C frozen from the closed form
        // √(z² + 4t) = z + 2t/z − 2t²/z³ + ...
        for &(x, y, t) in &[(10.0, 3.0, 1.0), (-20.0, 5.0, 0.5), (0.0, 12.0, 0.8), (30.0, 0.5, 1.0)] {
            let z = c(x, y);
            let g = forward_map(&w0, z, t).unwrap();
            assert!((g - (z + 2.0 * t / z)).norm() <= 1.0 / z.norm_sqr());
        }
    }

    #[test]
    fn slit_maps_invert() {
        for &(x, y) in &[(0.0, 1.0), (0.5, 0.2), (-1.0, 3.0)] {
            for &z in &[c(0.1, 0.1), c(-3.0, 0.5), c(2.0, 4.0), c(x, y * 1.5)] {
                let w = slit_map(z, x, y);
                assert!(w.im >= 0.0);
                assert!((slit_map_inverse(w, x, y) - z).norm() < 1e-12);
            }
            assert!((slit_map(c(x, y), x, y) - c(x, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn trace_constant_drive_is_vertical() {
        let w = DrivingFunction::zero(1.0);
        let curve = trace_curve(&w, 50);
        for (k, p) in curve.points().iter().enumerate() {
            let t = k as f64 / 50.0;
            assert!((p - c(0.0, 2.0 * t.sqrt())).norm() < 1e-12);
        }
        let shifted = DrivingFunction::new(vec![0.0, 1e-12, 1.0], vec![0.0, 0.7, 0.7]).unwrap();
        let curve = trace_curve(&shifted, 10);
        let tip = curve.points()[10];
        assert!((tip - c(0.7, 2.0)).norm() < 1e-9);
    }

    #[test]
    fn zipper_vertical_segment() {
        let h = 1.7;
        let pts: Vec<_> = (0..=20).map(|k| c(0.0, h * k as f64 / 20.0)).collect();
        let d = zipper_extract(&CurveInH::new(pts.clone()).unwrap()).unwrap();
        assert!(d.values().iter().all(|w| w.abs() < 1e-12));
        assert!((d.horizon() - h * h / 4.0).abs() < 1e-10);
        let one = zipper_extract(&CurveInH::new(vec![c(0.0, 0.0), c(0.3, 0.8)]).unwrap()).unwrap();
        assert_eq!(one.times(), &[0.0, 0.8 * 0.8 / 4.0]);
        assert_eq!(one.values(), &[0.0, 0.3]);
        let curve = CurveInH::new(pts).unwrap();
        assert_eq!(hcap_of_curve(&curve, 0).unwrap(), 0.0);
        assert!((hcap_of_curve(&curve, 21).unwrap() - h * h / 4.0).abs() < 1e-10);
    }

    #[test]
    fn roundtrip_improves_with_refinement() {
        let mut rng = stream(3, 0);
        let fine = sample_sle_drive(3.0f64, 1.0, 4096, &mut rng);
        let err = |n: usize| {
            let curve = trace_curve(&fine, n);
            let d = zipper_extract(&curve).unwrap();
            d.times()
                .iter()
                .zip(d.values())
                .map(|(t, w)| (fine.value_at(*t) - w).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(64), err(256));
        assert!(e2 < e1, "{e1} {e2}");
        let curve = trace_curve(&fine, 256);
        let caps: Vec<f64> = (0..=256).step_by(32).map(|k| hcap_of_curve(&curve, k + 1).unwrap()).collect();
        for (i, cap) in caps.iter().enumerate() {
            assert!((cap - i as f64 / 8.0).abs() < 0.02, "{i} {cap}");
        }
    }

    #[test]
    fn sle_drive_basics() {
        let mut rng = stream(1, 0);
        let zero = sample_sle_drive(0.0f64, 1.0, 100, &mut rng);
        assert!(zero.values().iter().all(|w| *w == 0.0));
        let n = 10_000;
        let finals: Vec<f64> = (0..n).map(|_| sample_sle_drive(3.0f64, 1.0, 16, &mut rng)).map(|d| {
            assert_eq!(d.values()[0], 0.0);
            d.horizon();
            *d.values().last().unwrap()
        }).collect();
        let mean = finals.iter().sum::<f64>() / n as f64;
        let var = finals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // Var of the sample variance for a Gaussian: 2σ⁴/(n−1)
        let se = (2.0 * 9.0 / (n - 1) as f64).sqrt();
        assert!((var - 3.0).abs() < 3.0 * se, "{var}");
    }

    #[test]
    fn distance_examples() {
        let a = [(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)];
        assert_eq!(curve_distance(&a, &a), 0.0);
        let b = [(0.0f64, 0.3f64), (1.0, 0.3)];
        assert!((curve_distance(&[(0.0, 0.0), (1.0, 0.0)], &b) - 0.3).abs() < 1e-15);
        let poly: Vec<(f64, f64)> = (0..=20).map(|k| (k as f64 * 0.1, (k as f64 * 0.3).sin())).collect();
        let every_second: Vec<_> = poly.iter().step_by(2).copied().collect();
        let max_seg = poly.windows(2).map(|w| (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1)).fold(0.0, f64::max);
        assert!(curve_distance(&poly, &every_second) <= max_seg);
    }

    #[test]
    fn csv_headers() {
        let d = DrivingFunction::new(vec![0.0, 0.5], vec![0.0, 1.0]).unwrap();
        assert_eq!(d.to_csv(), "t,w\n0,0\n0.5,1\n");
        let c = CurveInH::new(vec![c(0.0, 0.0), c(0.5, 1.0)]).unwrap();
        assert_eq!(c.to_csv(), "re,im\n0,0\n0.5,1\n");
    }

    #[test]
    fn invalid_drives_rejected() {
        assert!(DrivingFunction::new(vec![0.0, 1.0, 0.5], vec![0.0, 0.0, 0.0]).is_err());
        assert!(DrivingFunction::new(vec![0.1], vec![0.0]).is_err());
        assert!(DrivingFunction::new(vec![0.0, 1.0], vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn single_precision_pipeline() {
        let d = DrivingFunction::<f32>::zero(1.0);
        let curve = trace_curve(&d, 16);
        let back = zipper_extract(&curve).unwrap();
        assert!((back.horizon() - 1.0).abs() < 1e-5);
    }

    fn random_curve(seed: u64, n: usize) -> Vec<Complex<f64>> {
        let mut rng = stream(seed, 9);
        let d = sample_sle_drive(2.0f64, 0.5, n, &mut rng);
        trace_curve(&d, n).points().to_vec()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn scaling_and_translation_covariance(seed in any::<u64>(), lambda in 0.2f64..5.0, shift in -3.0f64..3.0) {
            let pts = random_curve(seed, 40);
            let base = zipper_extract(&CurveInH::new(pts.clone()).unwrap()).unwrap();
            let scaled = zipper_extract(&CurveInH::new(pts.iter().map(|p| p * lambda).collect()).unwrap()).unwrap();
            for k in 0..base.len() {
                prop_assert!((scaled.times()[k] - lambda * lambda * base.times()[k]).abs() < 1e-9 * (1.0 + scaled.times()[k]));
                prop_assert!((scaled.values()[k] - lambda * base.values()[k]).abs() < 1e-9 * (1.0 + lambda));
            }
            // a shifted curve no longer starts at 0: drop the first point and compare
            let shifted: Vec<_> = pts.iter().map(|p| p + shift).collect();
            let mut slits = vec![];
            let mut ts = vec![0.0];
            let mut ws = vec![shift];
            let mut t = 0.0;
            for p in &shifted[1..] {
                let mut z = *p;
                for &(x, y) in &slits { z = slit_map(z, x, y); }
                slits.push((z.re, z.im));
                t += z.im * z.im / 4.0;
                ts.push(t);
                ws.push(z.re);
            }
            for k in 0..base.len() {
                prop_assert!((ts[k] - base.times()[k]).abs() < 1e-9);
                prop_assert!((ws[k] - shift - base.values()[k]).abs() < 1e-9);
            }
        }

        #[test]
        fn capacity_monotone(seed in any::<u64>()) {
            let curve = CurveInH::new(random_curve(seed, 30)).unwrap();
            let mut last = 0.0;
            for k in 0..=curve.len() {
                let cap = hcap_of_curve(&curve, k).unwrap();
                prop_assert!(cap >= last);
                last = cap;
            }
        }

        #[test]
        fn frechet_triangle_inequality(pts in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30), s1 in 1usize..10, s2 in 1usize..10) {
            let a = &pts[..pts.len() / 3 + 1];
            let b = &pts[s1.min(pts.len() - 1)..];
            let c = &pts[..(pts.len() - s2.min(pts.len() - 1))];
            let ab = curve_distance(a, b);
            let bc = curve_distance(b, c);
            let ac = curve_distance(a, c);
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((curve_distance(a, b) - curve_distance(b, a)).abs() < 1e-15);
        }
    }
}
