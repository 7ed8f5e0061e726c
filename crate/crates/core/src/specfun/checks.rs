//! Residuals of the functional equations of G_b and w_b at a single point.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use super::{wb, Gb, PoleZeroLattice};
use crate::error::{Error, Result};
use crate::modulus::Modulus;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative residuals |lhs - rhs| / max(|lhs|, |rhs|) of the G_b and w_b identities at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// G_b(x + b) = (1 - e^{2 pi i b x}) G_b(x)
    pub shift_b: f64,
    /// G_b(x + 1/b) = (1 - e^{2 pi i x / b}) G_b(x)
    pub shift_binv: f64,
    /// G_b(x) G_b(Q - x) = e^{i pi x (x - Q)}
    pub reflection: f64,
    /// conj G_b(x) = e^{i pi x* (Q - x*)} G_b(x*), real b only (0 otherwise)
    pub conjugation: f64,
    /// G_b = G_{1/b}
    pub duality: f64,
    /// G_b(x) G_b(-x) = -e^{i pi x^2} / (4 sin(pi b x) sin(pi x / b))
    pub gxx: f64,
    /// w_b(x + ib) = 2 sin(pi b (Q/2 - ix)) w_b(x), and the same with b -> 1/b
    pub w_shift: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [self.shift_b, self.shift_binv, self.reflection, self.conjugation, self.duality, self.gxx, self.w_shift]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// All identity residuals at x. AtPole if any argument used lies within `margin` of a pole or
/// zero of G_b.
pub fn identity_residuals(x: Complex64, margin: f64, m: &Modulus) -> Result<IdentityResiduals> {
    let q = m.qq();
    let b = m.b;
    let poles = PoleZeroLattice::gb_poles(m);
    let zeros = PoleZeroLattice::gb_zeros(m);
    for z in [x, x + b, x + 1.0 / b, q - x, -x] {
        if poles.nearest(z).2 < margin || zeros.nearest(z).2 < margin {
            return Err(Error::AtPole(format!("identity battery near {z}")));
        }
    }
    let g = |z| Gb(z, m).map(|v| v.value);
    let gx = g(x)?;
    let shift_b = rel(g(x + b)?, (1.0 - (2.0 * PI * I * b * x).exp()) * gx);
    let shift_binv = rel(g(x + 1.0 / b)?, (1.0 - (2.0 * PI * I * x / b).exp()) * gx);
    let reflection = rel(gx * g(q - x)?, (I * PI * x * (x - q)).exp());
    let conjugation = if m.is_real() {
        let xb = x.conj();
        rel(gx.conj(), (I * PI * xb * (q - xb)).exp() * g(xb)?)
    } else {
        0.0
    };
    let duality = rel(gx, Gb(x, &m.dual())?.value);
    let gxx = rel(gx * g(-x)?, -(I * PI * x * x).exp() / (4.0 * (PI * b * x).sin() * (PI * x / b).sin()));
    let w = |z| wb(z, m).map(|v| v.value);
    let wx = w(x)?;
    let w_shift = rel(w(x + I * b)?, 2.0 * wx * (PI * b * (q * 0.5 - I * x)).sin())
        .max(rel(w(x + I / b)?, 2.0 * wx * (PI / b * (q * 0.5 - I * x)).sin()));
    Ok(IdentityResiduals { shift_b, shift_binv, reflection, conjugation, duality, gxx, w_shift })
}

/// Seeded sample of `n` points with Re in [-1, 3], Im in [-2, 2], each at least `margin` away
/// from every pole and zero the battery touches.
pub fn battery_points(n: usize, seed: u64, margin: f64, m: &Modulus) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = Complex64::new(rng.gen_range(-1.0..3.0), rng.gen_range(-2.0..2.0));
        let q = m.qq();
        let poles = PoleZeroLattice::gb_poles(m);
        let zeros = PoleZeroLattice::gb_zeros(m);
        let ok = [x, x + m.b, x + 1.0 / m.b, q - x, -x]
            .iter()
            .all(|&z| poles.nearest(z).2 >= margin && zeros.nearest(z).2 >= margin);
        if ok {
            out.push(x);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_holds_on_a_small_sample() {
        let m = Modulus::real(0.7).unwrap();
        for x in battery_points(8, 3, 0.05, &m) {
            let r = identity_residuals(x, 0.05, &m).unwrap();
            assert!(r.max() < 1e-9, "{x}: {r:?}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = Modulus::real(0.6).unwrap();
        assert_eq!(battery_points(5, 11, 0.05, &m), battery_points(5, 11, 0.05, &m));
    }

    #[test]
    fn pole_is_refused() {
        let m = Modulus::real(0.7).unwrap();
        assert!(matches!(identity_residuals(Complex64::new(0.0, 0.0), 0.05, &m), Err(Error::AtPole(_))));
    }
}
