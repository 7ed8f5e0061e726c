//! Line and circle quadrature in the complex plane.
//!
//! Lines are parameterized as t(u) = u + i(eta + s(u) u) with a slope s(u)
//! that may differ on the two half-lines; a zero slope gives the plain
//! horizontal contour Im t = eta.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Number of Gauss-Legendre nodes per panel.
pub const GL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on [-1, 1] via Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

pub(crate) fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// A shifted integration line with truncation window and tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    pub eta: f64,
    pub window: f64,
    pub rel_tol: f64,
    pub max_refinements: usize,
    /// Slope of the left half-line (u < 0); Im t = eta + slope_left * u.
    pub slope_left: f64,
    /// Slope of the right half-line (u > 0).
    pub slope_right: f64,
    /// Absolute tolerance floor, for integrals whose value may vanish.
    pub abs_tol: f64,
    /// Largest window the automatic expansion may reach.
    pub max_window: f64,
}

impl ContourSpec {
    pub fn new(eta: f64, window: f64) -> Self {
        ContourSpec {
            eta,
            window,
            rel_tol: 1e-12,
            max_refinements: 4000,
            slope_left: 0.0,
            slope_right: 0.0,
            abs_tol: 1e-300,
            max_window: 1e4,
        }
    }

    pub fn with_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_slopes(mut self, left: f64, right: f64) -> Self {
        self.slope_left = left;
        self.slope_right = right;
        self
    }

    pub fn with_max_refinements(mut self, n: usize) -> Self {
        self.max_refinements = n;
        self
    }

    pub fn with_max_window(mut self, w: f64) -> Self {
        self.max_window = w;
        self
    }

    /// Point on the contour and the derivative dt/du.
    #[inline]
    pub fn point(&self, u: f64) -> (Complex64, Complex64) {
        let s = if u < 0.0 { self.slope_left } else { self.slope_right };
        (Complex64::new(u, self.eta + s * u), Complex64::new(1.0, s))
    }

    fn validate(&self) -> Result<()> {
        if !(self.window > 0.0) || !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::ConfigInvalid(format!(
                "window {} and rel_tol {} must be positive (rel_tol < 1)",
                self.window, self.rel_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub err_est: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    /// integral of |f dt|, sets the rounding floor of the panel
    mag: f64,
}

fn gl_panel<F: Fn(Complex64) -> Complex64 + ?Sized>(
    f: &F,
    c: &ContourSpec,
    a: f64,
    b: f64,
) -> (Complex64, f64) {
    let (x, w) = gl16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let (t, dt) = c.point(mid + half * xi);
        let v = f(t) * dt * *wi;
        acc += v;
        mag += v.norm();
    }
    (acc * half, mag * half)
}

fn refine_panel<F: Fn(Complex64) -> Complex64 + ?Sized>(
    f: &F,
    c: &ContourSpec,
    a: f64,
    b: f64,
    whole: Complex64,
) -> (Panel, Panel) {
    let m = 0.5 * (a + b);
    let (l, ml) = gl_panel(f, c, a, m);
    let (r, mr) = gl_panel(f, c, m, b);
    let err = (l + r - whole).norm();
    (
        Panel { a, b: m, value: l, err: 0.5 * err, mag: ml },
        Panel { a: m, b, value: r, err: 0.5 * err, mag: mr },
    )
}

/// Initial panel breakpoints: geometric near the origin, width capped at `hmax`.
fn breakpoints(lo: f64, hi: f64, h0: f64, hmax: f64) -> Vec<f64> {
    let mut right = vec![0.0];
    let mut u = 0.0;
    while u < hi {
        let h = (0.5 * u).max(h0).min(hmax);
        u = (u + h).min(hi);
        right.push(u);
    }
    let mut left = Vec::new();
    let mut u = 0.0;
    while u > lo {
        let h = (0.5 * u.abs()).max(h0).min(hmax);
        u = (u - h).max(lo);
        left.push(u);
    }
    left.reverse();
    left.extend(right);
    left
}

/// Magnitude samples at the two window edges, used for tail estimation.
fn tail_bound<F: Fn(Complex64) -> Complex64 + ?Sized>(
    f: &F,
    c: &ContourSpec,
    t: f64,
) -> (f64, bool, usize) {
    let d = (0.05 * t).max(0.25);
    let mut total = 0.0;
    let mut decaying = true;
    for sgn in [-1.0, 1.0] {
        let (z1, dz) = c.point(sgn * t);
        let (z0, _) = c.point(sgn * (t - d));
        let f1 = (f(z1) * dz).norm();
        let f0 = (f(z0) * dz).norm();
        if !f1.is_finite() || !f0.is_finite() {
            decaying = false;
            continue;
        }
        if f1 == 0.0 {
            continue;
        }
        if f1 >= f0 {
            decaying = false;
            total += f1 * t;
        } else {
            let rate = (f0 / f1).ln() / d;
            total += f1 / rate;
        }
    }
    (total, decaying, 4)
}

/// Adaptive composite Gauss-Legendre integration along a shifted line.
///
/// Panels are bisected in order of their error estimate until the summed
/// estimate falls below `rel_tol * |value|` (or `abs_tol`). The window is
/// enlarged until the estimated tail is below a tenth of the tolerance.
pub fn integrate_line<F>(f: &F, c: &ContourSpec) -> Result<QuadResult>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    c.validate()?;
    let mut spec = c.clone();
    let mut evaluations = 0usize;
    let mut last_tail = f64::INFINITY;
    loop {
        let (tail, decaying, ev) = tail_bound(f, &spec, spec.window);
        evaluations += ev;
        let res = integrate_window(f, &spec, &mut evaluations)?;
        let tol = (spec.rel_tol * res.value.norm()).max(spec.abs_tol);
        if decaying && tail < 0.1 * tol {
            return Ok(QuadResult {
                value: res.value,
                err_est: res.err_est + tail,
                evaluations,
            });
        }
        if !(tail < last_tail) && !decaying {
            return Err(Error::NoDecay);
        }
        if spec.window >= spec.max_window {
            return Err(if decaying { Error::NonConvergent(format!("tail {tail:e} at window {}", spec.window)) } else { Error::NoDecay });
        }
        last_tail = tail;
        spec.window = (spec.window * 1.5).min(spec.max_window);
    }
}

fn integrate_window<F>(f: &F, c: &ContourSpec, evaluations: &mut usize) -> Result<QuadResult>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let t = c.window;
    let h0 = c.eta.abs().max(0.05).min(0.5);
    let pts = breakpoints(-t, t, h0, 1.0);
    let mut panels: Vec<Panel> = Vec::with_capacity(pts.len() * 2);
    for w in pts.windows(2) {
        let (whole, _) = gl_panel(f, c, w[0], w[1]);
        let (l, r) = refine_panel(f, c, w[0], w[1], whole);
        *evaluations += 3 * GL_ORDER;
        panels.push(l);
        panels.push(r);
    }
    let mut refinements = 0usize;
    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        let floor: f64 = panels.iter().map(|p| 64.0 * f64::EPSILON * p.mag).sum();
        let tol = (c.rel_tol * value.norm()).max(c.abs_tol);
        if err <= tol.max(floor) {
            return Ok(QuadResult { value, err_est: err.max(floor), evaluations: *evaluations });
        }
        // bisect every panel whose error exceeds both its share of the
        // tolerance and its own rounding floor
        let share = tol / panels.len() as f64;
        let mut next = Vec::with_capacity(panels.len() + 16);
        let mut split_any = false;
        for p in panels {
            if p.err > share && p.err > 64.0 * f64::EPSILON * p.mag {
                if refinements >= c.max_refinements {
                    return Err(Error::BudgetExceeded(*evaluations));
                }
                let (l, r) = refine_panel(f, c, p.a, p.b, p.value);
                *evaluations += 2 * GL_ORDER;
                refinements += 1;
                split_any = true;
                next.push(l);
                next.push(r);
            } else {
                next.push(p);
            }
        }
        panels = next;
        if !split_any {
            let value: Complex64 = panels.iter().map(|p| p.value).sum();
            let err: f64 = panels.iter().map(|p| p.err).sum();
            return Ok(QuadResult { value, err_est: err.max(floor), evaluations: *evaluations });
        }
    }
}

/// (1 / 2 pi i) times the integral of f around a circle, by the trapezoid rule.
///
/// The node count is doubled from 32 until two successive values agree.
pub fn contour_residue<F>(f: &F, center: Complex64, radius: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    contour_residue_tol(f, center, radius, 1e-13)
}

pub fn contour_residue_tol<F>(f: &F, center: Complex64, radius: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let trap = |n: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let e = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            acc += f(center + radius * e) * e;
        }
        acc * radius / n as f64
    };
    let mut n = 32;
    let mut prev = trap(n);
    while n < 4096 {
        n *= 2;
        let cur = trap(n);
        if (cur - prev).norm() <= tol * cur.norm().max(1e-300) || (cur - prev).norm() < 1e-300 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::NonConvergent(format!("circle quadrature at {center} radius {radius}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gl_weights_sum_to_two() {
        for n in [1, 2, 5, 16, 31] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            // exact for x^(2n-2)
            let m = 2 * n - 2;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(m as i32)).sum();
            assert!((q - 2.0 / (m as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate_line(&|t: Complex64| (-t * t).exp(), &ContourSpec::new(0.0, 4.0)).unwrap();
        assert!((r.value - c(PI.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn gaussian_shift_independence() {
        let f = |t: Complex64| (-t * t + c(0.0, 0.7) * t).exp();
        let a = integrate_line(&f, &ContourSpec::new(0.3, 6.0)).unwrap();
        let b = integrate_line(&f, &ContourSpec::new(-0.4, 6.0)).unwrap();
        assert!((a.value - b.value).norm() < 1e-12);
        assert!((a.value - PI.sqrt() * (-0.49f64 / 4.0).exp()).norm() < 1e-12);
    }

    #[test]
    fn wrong_side_of_pole_differs_by_residue() {
        // f(t) = e^{-t^2} / t, residue 1 at t = 0
        let f = |t: Complex64| (-t * t).exp() / t;
        let up = integrate_line(&f, &ContourSpec::new(0.2, 6.0)).unwrap();
        let dn = integrate_line(&f, &ContourSpec::new(-0.2, 6.0)).unwrap();
        assert!((dn.value - up.value - c(0.0, 2.0 * PI)).norm() < 1e-11);
    }

    #[test]
    fn window_grows_until_tail_small() {
        let f = |t: Complex64| (-(t * t).sqrt() * 0.2).exp() / (1.0 + t * t);
        let r = integrate_line(&f, &ContourSpec::new(0.0, 2.0).with_tol(1e-10)).unwrap();
        let wide = integrate_line(&f, &ContourSpec::new(0.0, 400.0).with_tol(1e-12)).unwrap();
        assert!((r.value - wide.value).norm() < 1e-8);
    }

    #[test]
    fn no_decay_is_reported() {
        let f = |_t: Complex64| c(1.0, 0.0);
        assert_eq!(integrate_line(&f, &ContourSpec::new(0.0, 2.0)).unwrap_err(), Error::NoDecay);
    }

    #[test]
    fn simple_pole_residue() {
        let r = contour_residue(&|z: Complex64| 1.0 / z, c(0.0, 0.0), 0.1).unwrap();
        assert!((r - 1.0).norm() < 1e-13);
        let r = contour_residue(&|z: Complex64| z.exp() / (z - 0.3), c(0.3, 0.0), 0.05).unwrap();
        assert!((r - 0.3f64.exp()).norm() < 1e-13);
    }

    #[test]
    fn sloped_line_matches_flat() {
        let f = |t: Complex64| (-t * t).exp();
        let r = integrate_line(&f, &ContourSpec::new(0.1, 5.0).with_slopes(0.2, -0.2)).unwrap();
        assert!((r.value - PI.sqrt()).norm() < 1e-11);
    }
}
