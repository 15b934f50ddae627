//! Adaptive Gauss-Kronrod quadrature, the periodic trapezoid rule and
//! Richardson extrapolation.
//!
//! The integrators are generic over [`QuadValue`] so the same rule handles
//! scalar and vector integrands (the surface force is a `Vec3`).

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    /// Norm used for error control.
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Vec3 {
    fn zero() -> Self {
        Vec3::ZERO
    }
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
}

/// Integral together with its estimated absolute error.
#[derive(Debug, Clone, Copy)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn target(&self, scale: f64) -> f64 {
        self.abs.max(self.rel * scale)
    }
}

// 15-point Kronrod abscissae on [0, 1]; the odd entries are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
}

fn gk15<T: QuadValue, F: FnMut(f64) -> T>(f: &mut F, a: f64, b: f64) -> Panel<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + pair * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    Panel { a, b, value, error }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration over a finite interval.
///
/// Bisects the panel with the largest error until the summed error estimate
/// meets `tol` or `max_panels` is reached.
pub fn integrate<T, F>(mut f: F, a: f64, b: f64, tol: Tolerance, max_panels: usize) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration limits must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate { value: T::zero(), error: 0.0, evaluations: 0 });
    }
    let mut panels = vec![gk15(&mut f, a, b)];
    let mut evaluations = 15;
    loop {
        let value = panels.iter().fold(T::zero(), |acc, p| acc + p.value);
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= tol.target(value.magnitude()) {
            return Ok(Estimate { value, error, evaluations });
        }
        if panels.len() >= max_panels {
            return Err(Error::Quadrature {
                what: format!("Gauss-Kronrod on [{a:e}, {b:e}] after {max_panels} panels"),
                estimate: error,
                requested: tol.target(value.magnitude()),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature {
                what: format!("panel [{:e}, {:e}] cannot be bisected further", p.a, p.b),
                estimate: error,
                requested: tol.target(value.magnitude()),
            });
        }
        panels.push(gk15(&mut f, p.a, mid));
        panels.push(gk15(&mut f, mid, p.b));
        evaluations += 30;
    }
}

/// Integrates over the whole real line through `x = scale * tan(u)`.
///
/// Suitable for integrands with algebraic tails; `scale` should be the
/// width of the central feature.
pub fn integrate_real_line<T, F>(mut f: F, scale: f64, tol: Tolerance, max_panels: usize) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("tangent scale must be positive, got {scale}")));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    integrate(
        |u: f64| {
            let c = u.cos();
            f(scale * u.tan()) * (scale / (c * c))
        },
        -half_pi,
        half_pi,
        tol,
        max_panels,
    )
}

/// Integrates over `[a, +inf)` through `x = a + scale * tan(u)`, `u` in `[0, pi/2)`.
pub fn integrate_half_line<T, F>(mut f: F, a: f64, scale: f64, tol: Tolerance, max_panels: usize) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> T,
{
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("tangent scale must be positive, got {scale}")));
    }
    integrate(
        |u: f64| {
            let c = u.cos();
            f(a + scale * u.tan()) * (scale / (c * c))
        },
        0.0,
        std::f64::consts::FRAC_PI_2,
        tol,
        max_panels,
    )
}

/// Trapezoid rule for a `period`-periodic integrand, doubling the point count
/// from `initial_points` until successive sums agree to `tol`.
pub fn integrate_periodic<T, F>(
    mut f: F,
    period: f64,
    initial_points: usize,
    max_points: usize,
    tol: Tolerance,
) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: FnMut(f64) -> Result<T>,
{
    if initial_points == 0 {
        return Err(Error::Domain("periodic rule needs at least one point".into()));
    }
    let mut n = initial_points;
    let mut sum = T::zero();
    for k in 0..n {
        sum = sum + f(period * k as f64 / n as f64)?;
    }
    let mut value = sum * (period / n as f64);
    let mut evaluations = n;
    loop {
        if 2 * n > max_points {
            return Err(Error::Quadrature {
                what: format!("periodic trapezoid rule exceeded {max_points} points"),
                estimate: f64::NAN,
                requested: tol.target(value.magnitude()),
            });
        }
        // New nodes are the midpoints of the current ones.
        for k in 0..n {
            sum = sum + f(period * (k as f64 + 0.5) / n as f64)?;
        }
        evaluations += n;
        n *= 2;
        let refined = sum * (period / n as f64);
        let error = (refined - value).magnitude();
        value = refined;
        if error <= tol.target(value.magnitude()) {
            return Ok(Estimate { value, error, evaluations });
        }
    }
}

/// One Richardson step: combines estimates at step `h` and `h / ratio` whose
/// leading error term is `O(h^order)`.
pub fn richardson<T: QuadValue>(coarse: T, fine: T, ratio: f64, order: i32) -> T {
    let factor = ratio.powi(order);
    (fine * factor - coarse) * (1.0 / (factor - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TIGHT: Tolerance = Tolerance::new(0.0, 1e-13);

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, TIGHT, 4).unwrap();
        assert!((r.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn lorentzian_over_real_line() {
        let r = integrate_real_line(|x: f64| 1.0 / (1.0 + x * x), 1.0, TIGHT, 100).unwrap();
        assert!((r.value - PI).abs() < 1e-12);
    }

    #[test]
    fn half_line_tail() {
        // int_1^inf dx / x^2 = 1
        let r = integrate_half_line(|x: f64| 1.0 / (x * x), 1.0, 1.0, TIGHT, 100).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_rule_converges_spectrally() {
        // int_0^{2pi} dphi / (2 + cos phi) = 2 pi / sqrt(3)
        let r = integrate_periodic(|p: f64| Ok(1.0 / (2.0 + p.cos())), 2.0 * PI, 8, 1 << 12, TIGHT).unwrap();
        assert!((r.value - 2.0 * PI / 3f64.sqrt()).abs() < 1e-13);
        assert!(r.evaluations <= 64);
    }

    #[test]
    fn refusal_reports_estimate() {
        let err = integrate(|x: f64| 1.0 / x.abs().sqrt(), -1.0, 1.0, Tolerance::new(0.0, 1e-15), 3).unwrap_err();
        match err {
            Error::Quadrature { estimate, .. } => assert!(estimate > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn richardson_removes_quadratic_term() {
        let f = |h: f64| 2.0 + 5.0 * h * h;
        let x = richardson(f(0.1), f(0.05), 2.0, 2);
        assert!((x - 2.0).abs() < 1e-14);
    }
}
