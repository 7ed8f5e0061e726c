//! Precomputed quadrature rules for the g_b integral.
//!
//! For fixed b the integral
//!   Phi(alpha) = int_{Im t = eta} e^{t alpha} / (4 t sinh(bt/2) sinh(t/2b)) dt
//! is a linear functional of e^{t alpha}, so a composite Gauss rule can be
//! built once and reused: Phi(alpha) ~ sum_j c_j e^{t_j alpha}. Rules are
//! tiered by the largest |Im alpha| they resolve.

use num_complex::Complex64;

use super::kernel::kernel_split;
use crate::modulus::Modulus;
use crate::quadrature::gl16;

/// Oscillation bounds |Im alpha| of the cached tiers.
pub const TIERS: [f64; 4] = [2.0, 8.0, 32.0, 128.0];
/// Cached rules: every tier on the main line and on an alternative line.
pub const N_RULES: usize = 2 * TIERS.len();
/// Below this value of Im alpha the integral is taken on the lower line.
pub const LOWER_SWITCH: f64 = 8.0;

#[derive(Debug, Clone)]
pub struct FastRule {
    pub eta: f64,
    pub ymax: f64,
    nodes: Vec<Complex64>,
    coef: Vec<Complex64>,
    /// Largest discrepancy against a refined rule at the probe points.
    pub calib_err: f64,
}

impl FastRule {
    pub(crate) fn build_indexed(m: &Modulus, idx: usize) -> FastRule {
        let tier = idx % TIERS.len();
        let alt = idx >= TIERS.len();
        FastRule::build(m, TIERS[tier], alt)
    }

    /// Rule resolving |Im alpha| <= ymax on the line Im t = eta, where eta is
    /// a quarter of the strip width (0.8 of that for the alternative line).
    pub fn build(m: &Modulus, ymax: f64, alt: bool) -> FastRule {
        let eta = m.strip_width() / 4.0 * if alt { 0.8 } else { 1.0 };
        let mut rule = Self::assemble(m, ymax, eta, 1.0);
        let fine = Self::assemble(m, ymax, eta, 0.5);
        let w = m.strip_width();
        let mut err: f64 = 0.0;
        for re in [-0.5 * w, 0.0, 0.5 * w] {
            for im in [0.0, 0.5 * ymax, ymax, -LOWER_SWITCH.min(ymax)] {
                let a = Complex64::new(re, im);
                let (v1, _) = rule.eval(a);
                let (v2, _) = fine.eval(a);
                err = err.max((v1 - v2).norm());
            }
        }
        rule.calib_err = err;
        rule
    }

    fn assemble(m: &Modulus, ymax: f64, eta: f64, scale: f64) -> FastRule {
        let b = m.b;
        let binv = 1.0 / b;
        let qh = m.qq() * 0.5;
        let w = m.strip_width();
        let rate = 0.5 * (b.re + binv.re) - 0.5 * w;
        let window = (40.0 + eta * LOWER_SWITCH) / rate / scale.sqrt();
        let hmax = 2.0f64.min(6.0 / ymax) * scale;
        let h0 = eta * scale;
        let (gx, gw) = gl16();
        let mut nodes = Vec::new();
        let mut coef = Vec::new();
        let mut push_panel = |a: f64, c: f64| {
            let half = 0.5 * (c - a);
            let mid = 0.5 * (c + a);
            for (x, wt) in gx.iter().zip(gw) {
                let t = Complex64::new(mid + half * x, eta);
                let (p, s) = kernel_split(t, b, binv, qh);
                nodes.push(t);
                coef.push(p * (t * s).exp() * (wt * half));
            }
        };
        let mut u = 0.0;
        while u < window {
            let h = (0.5 * u).max(h0).min(hmax);
            push_panel(u, u + h);
            u += h;
        }
        let mut u = 0.0;
        while u > -window {
            let h = (0.5 * u.abs()).max(h0).min(hmax);
            push_panel(u - h, u);
            u -= h;
        }
        FastRule { eta, ymax, nodes, coef, calib_err: 0.0 }
    }

    /// Phi(alpha) on this rule's line and an absolute rounding bound.
    pub fn eval(&self, alpha: Complex64) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for (t, c) in self.nodes.iter().zip(&self.coef) {
            let term = c * (t * alpha).exp();
            acc += term;
            mag += term.norm();
        }
        (acc, mag * f64::EPSILON * 10.0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Index of the smallest cached tier resolving |Im alpha| = y, if any.
pub fn tier_for(y: f64) -> Option<usize> {
    TIERS.iter().position(|&t| y <= t)
}
