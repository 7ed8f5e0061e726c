//! The integrand of the g_b integral and a few complex helpers.

use num_complex::Complex64;

/// e^z - 1 without cancellation for small |z|.
pub fn cexpm1(z: Complex64) -> Complex64 {
    if z.norm() > 0.5 {
        return z.exp() - 1.0;
    }
    let (s, c) = z.im.sin_cos();
    let em1 = z.re.exp_m1();
    let half = (0.5 * z.im).sin();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// e^{t alpha} / (4 t sinh(b t / 2) sinh(t / (2b))), evaluated without overflow.
#[inline]
pub fn log_gb_kernel(t: Complex64, alpha: Complex64, b: Complex64, binv: Complex64, q_half: Complex64) -> Complex64 {
    if t.re >= 0.0 {
        let d = t * (-cexpm1(-b * t)) * (-cexpm1(-binv * t));
        (t * (alpha - q_half)).exp() / d
    } else {
        let d = t * (-cexpm1(b * t)) * (-cexpm1(binv * t));
        (t * (alpha + q_half)).exp() / d
    }
}

/// The t-independent factor 1 / (4 t sinh sinh), split as magnitude-safe pieces:
/// returns (prefactor, linear exponent) with kernel = prefactor * e^{t (alpha + shift)}.
#[inline]
pub fn kernel_split(t: Complex64, b: Complex64, binv: Complex64, q_half: Complex64) -> (Complex64, Complex64) {
    if t.re >= 0.0 {
        (1.0 / (t * cexpm1(-b * t) * cexpm1(-binv * t)), -q_half)
    } else {
        (1.0 / (t * cexpm1(b * t) * cexpm1(binv * t)), q_half)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_small_and_large() {
        for z in [
            Complex64::new(1e-9, 2e-9),
            Complex64::new(-0.3, 0.2),
            Complex64::new(0.1, -0.45),
            Complex64::new(2.0, 1.0),
        ] {
            let r = cexpm1(z);
            let mut series = Complex64::new(0.0, 0.0);
            let mut term = Complex64::new(1.0, 0.0);
            for k in 1..40 {
                term *= z / k as f64;
                series += term;
            }
            assert!((r - series).norm() <= 1e-15 * series.norm().max(1e-300) * 4.0, "{z}");
        }
    }

    #[test]
    fn kernel_matches_sinh_form() {
        let b = Complex64::new(0.7, 0.0);
        let binv = 1.0 / b;
        let qh = (b + binv) * 0.5;
        let a = Complex64::new(0.1, 0.3);
        for t in [Complex64::new(1.3, 0.2), Complex64::new(-2.1, 0.2), Complex64::new(0.01, 0.2)] {
            let direct = (t * a).exp() / (4.0 * t * (b * t * 0.5).sinh() * (t * binv * 0.5).sinh());
            let k = log_gb_kernel(t, a, b, binv, qh);
            assert!((k - direct).norm() < 1e-13 * direct.norm());
            let (p, s) = kernel_split(t, b, binv, qh);
            assert!((p * (t * (a + s)).exp() - direct).norm() < 1e-13 * direct.norm());
        }
    }
}
