use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::specfun::rule::{FastRule, N_RULES};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The deformation parameter b together with its derived constants.
///
/// Cloning is cheap; clones share the lazily built quadrature rules used by
/// the fast G_b path.
#[derive(Clone)]
pub struct Modulus {
    pub b: Complex64,
    pub q_sum: Complex64,
    pub q: Complex64,
    /// e^{-i pi / b^2}, the convention used inside residue and R-operator formulas.
    pub qtilde: Complex64,
    /// e^{+i pi / b^2}, the dual deformation parameter of the modular double.
    pub qtilde_dual: Complex64,
    pub zeta: Complex64,
    rules: Arc<[OnceLock<FastRule>; N_RULES]>,
}

impl std::fmt::Debug for Modulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Modulus").field("b", &self.b).finish()
    }
}

impl PartialEq for Modulus {
    fn eq(&self, other: &Self) -> bool {
        self.b == other.b
    }
}

impl Modulus {
    pub fn new(b: Complex64) -> Result<Self> {
        if !(b.re > 0.0) || !b.is_finite() {
            return Err(Error::ConfigInvalid(format!("need Re b > 0, got {b}")));
        }
        let b2 = b * b;
        let q_sum = b + 1.0 / b;
        Ok(Modulus {
            b,
            q_sum,
            q: (I * PI * b2).exp(),
            qtilde: (-I * PI / b2).exp(),
            qtilde_dual: (I * PI / b2).exp(),
            zeta: (I * PI / 4.0 + I * PI * (b2 + 1.0 / b2) / 12.0).exp(),
            rules: Arc::new(Default::default()),
        })
    }

    pub fn real(b: f64) -> Result<Self> {
        Self::new(Complex64::new(b, 0.0))
    }

    /// b = e^{i theta}.
    pub fn phase(theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(1.0, theta))
    }

    /// The modulus with b replaced by 1/b.
    pub fn dual(&self) -> Self {
        Modulus::new(1.0 / self.b).expect("Re(1/b) > 0 whenever Re b > 0")
    }

    /// Q = b + 1/b.
    pub fn qq(&self) -> Complex64 {
        self.q_sum
    }

    pub fn is_real(&self) -> bool {
        self.b.im == 0.0
    }

    /// Real part of b for real moduli; panics are avoided by returning Re b.
    pub fn b_re(&self) -> f64 {
        self.b.re
    }

    /// min(Re b, Re 1/b), the width of the central strip of G_b.
    pub fn strip_width(&self) -> f64 {
        self.b.re.min((1.0 / self.b).re)
    }

    /// q-number [x]_q = sin(pi b^2 x) / sin(pi b^2).
    pub fn qnum(&self, x: Complex64) -> Complex64 {
        let b2 = self.b * self.b;
        (PI * b2 * x).sin() / (PI * b2).sin()
    }

    pub(crate) fn rule(&self, idx: usize) -> &FastRule {
        self.rules[idx].get_or_init(|| FastRule::build_indexed(self, idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_for_real_b() {
        let m = Modulus::real(0.7).unwrap();
        assert!((m.qq().re - (0.7 + 1.0 / 0.7)).abs() < 1e-15);
        assert!(m.qq().im == 0.0);
        assert!((m.zeta.norm() - 1.0).abs() < 1e-15);
        assert!((m.q.norm() - 1.0).abs() < 1e-15);
        assert!((m.qtilde * m.qtilde_dual - 1.0).norm() < 1e-14);
    }

    #[test]
    fn q_at_least_two() {
        for b in [0.3, 0.6, 1.0, 1.7] {
            let m = Modulus::real(b).unwrap();
            assert!(m.qq().re >= 2.0 - 1e-15);
        }
        assert!((Modulus::real(1.0).unwrap().qq().re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_left_half_plane() {
        assert!(Modulus::real(-0.5).is_err());
        assert!(Modulus::new(Complex64::new(0.0, 1.0)).is_err());
    }
}
