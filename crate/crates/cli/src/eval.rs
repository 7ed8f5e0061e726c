//! Single evaluations for the `eval` subcommand.

use num_complex::Complex64;

use mdlab::identities::{bbinom, rho};
use mdlab::kernels::*;
use mdlab::opsim::grid::Grid;
use mdlab::specfun::{gb, wb, FunctionValue, Gb};
use mdlab::{Error, Modulus, Result};

/// Parses "re", "re,im" or "re+imi" / "re-imi".
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let t = s.trim().replace(' ', "");
    if let Some((a, b)) = t.split_once(',') {
        let re = a.parse::<f64>().map_err(|e| e.to_string())?;
        let im = b.parse::<f64>().map_err(|e| e.to_string())?;
        return Ok(Complex64::new(re, im));
    }
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let cut = (1..bytes.len()).rev().find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        return match cut {
            Some(i) => {
                let re = body[..i].parse::<f64>().map_err(|e| e.to_string())?;
                let im = match &body[i..] {
                    "+" => 1.0,
                    "-" => -1.0,
                    x => x.parse::<f64>().map_err(|e| e.to_string())?,
                };
                Ok(Complex64::new(re, im))
            }
            None => {
                let im = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    x => x.parse::<f64>().map_err(|e| e.to_string())?,
                };
                Ok(Complex64::new(0.0, im))
            }
        };
    }
    t.parse::<f64>().map(|v| Complex64::new(v, 0.0)).map_err(|e| e.to_string())
}

/// A computed value with its error estimate (0 when none is available).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: Complex64,
    pub err_est: f64,
}

impl From<FunctionValue> for Evaluated {
    fn from(v: FunctionValue) -> Self {
        Evaluated { value: v.value, err_est: v.err_est }
    }
}

impl Evaluated {
    fn exact(value: Complex64) -> Self {
        Evaluated { value, err_est: 0.0 }
    }
}

pub fn eval_gb_big(x: Complex64, m: &Modulus) -> Result<Evaluated> {
    Gb(x, m).map(Into::into)
}

pub fn eval_gb_small(x: Complex64, m: &Modulus) -> Result<Evaluated> {
    gb(x, m).map(Into::into)
}

pub fn eval_wb(x: Complex64, m: &Modulus) -> Result<Evaluated> {
    wb(x, m).map(Into::into)
}

pub fn eval_rho(t: Complex64, m: &Modulus) -> Result<Evaluated> {
    rho(t, m).map(Evaluated::exact)
}

pub fn eval_bbinom(t: Complex64, tau: Complex64, m: &Modulus) -> Result<Evaluated> {
    bbinom(t, tau, m).map(Evaluated::exact)
}

pub fn eval_omega(s3: f64, s2: f64, s1: f64, conv: HConvention, m: &Modulus) -> Evaluated {
    Evaluated::exact(omega_with(s3, s2, s1, conv, m))
}

/// Position or momentum Clebsch-Gordan kernel; the labels follow the evaluator convention
/// (formula parameter s3).
pub enum CgcArgs {
    Position { x3: Complex64, x2: Complex64, x1: Complex64, epsilon: f64 },
    Momentum { k2: Complex64, k1: Complex64, contour: CgcContour },
}

pub fn eval_cgc(args: &CgcArgs, s3: f64, s2: f64, s1: f64, m: &Modulus) -> Result<Evaluated> {
    match *args {
        CgcArgs::Position { x3, x2, x1, epsilon } => cgc_position(x3, x2, x1, s3, s2, s1, epsilon, m).map(Evaluated::exact),
        CgcArgs::Momentum { k2, k1, contour } => cgc_momentum_reduced(k2, k1, s3, s2, s1, contour, m).map(Evaluated::exact),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Position,
    Momentum,
}

/// The R kernel sampled on the n x n grid of `Grid::new(n, length)`:
/// momentum mode tabulates K(k2, k1; tau) at fixed tau, position mode K(x2, x1; x2', x1') at
/// fixed primed points.
pub fn rkernel_table(mode: KernelMode, n: usize, length: f64, sp: SpinPair, fixed: (f64, f64), eta: f64, m: &Modulus) -> Result<KernelSample> {
    let g = Grid::new(n, length)?;
    let (axes, nodes): ([&str; 2], &[f64]) = match mode {
        KernelMode::Momentum => (["k2", "k1"], &g.k),
        KernelMode::Position => (["x2", "x1"], &g.x),
    };
    let mut out = KernelSample::new(&axes, eta, 0.0);
    for &a in nodes {
        for &b in nodes {
            let v = match mode {
                KernelMode::Momentum => r_kernel_momentum_reduced(a, b, fixed.0, sp, eta, m)?,
                KernelMode::Position => r_kernel_position(a, b, fixed.0, fixed.1, sp, eta, m)?,
            };
            out.push(vec![a, b], v)?;
        }
    }
    if out.is_empty() {
        return Err(Error::ConfigInvalid("empty table".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("0.5,-0.25").unwrap(), Complex64::new(0.5, -0.25));
        assert_eq!(parse_complex("0.5-0.25i").unwrap(), Complex64::new(0.5, -0.25));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), Complex64::new(1e-3, 0.2));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("2.5i").unwrap(), Complex64::new(0.0, 2.5));
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn wb_is_unimodular() {
        let m = Modulus::real(0.7).unwrap();
        let v = eval_wb(Complex64::new(0.5, 0.0), &m).unwrap();
        assert!((v.value.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_momentum_table() {
        let m = Modulus::real(0.7).unwrap();
        let t = rkernel_table(KernelMode::Momentum, 4, 4.0, SpinPair::new(0.5, 0.3), (0.3, 0.0), 1e-7, &m).unwrap();
        assert_eq!(t.len(), 16);
    }
}
