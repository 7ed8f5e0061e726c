//! Integral kernels: the R-operator in position and momentum space, the
//! Clebsch-Gordan kernel and its Fourier transform, the braiding phase,
//! the orthogonality relation and the Haar functionals on kernel families.

pub mod cgc;
pub mod ortho;
pub mod rkernel;

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::modulus::Modulus;

pub use cgc::*;
pub use ortho::*;
pub use rkernel::*;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which constant enters h_s = s^2 + c.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HConvention {
    /// h_s = s^2 - Q^2/4, the braiding convention.
    Minus,
    /// h_s = s^2 + Q^2/4, the convention printed next to the Clebsch-Gordan kernel.
    Plus,
}

pub fn h_s(s: f64, conv: HConvention, m: &Modulus) -> Complex64 {
    let q = m.qq();
    match conv {
        HConvention::Minus => s * s - q * q / 4.0,
        HConvention::Plus => s * s + q * q / 4.0,
    }
}

/// Casimir parameters of the two tensor factors P_{s2} (x) P_{s1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinPair {
    pub s2: f64,
    pub s1: f64,
}

impl SpinPair {
    pub fn new(s2: f64, s1: f64) -> Self {
        SpinPair { s2, s1 }
    }

    pub fn h2(&self, m: &Modulus) -> Complex64 {
        h_s(self.s2, HConvention::Minus, m)
    }

    pub fn h1(&self, m: &Modulus) -> Complex64 {
        h_s(self.s1, HConvention::Minus, m)
    }
}

/// Omega(s3|s2,s1) = e^{-pi i (h3 - h2 - h1)} with h_s = s^2 - Q^2/4.
pub fn omega(s3: f64, s2: f64, s1: f64, m: &Modulus) -> Complex64 {
    omega_with(s3, s2, s1, HConvention::Minus, m)
}

pub fn omega_with(s3: f64, s2: f64, s1: f64, conv: HConvention, m: &Modulus) -> Complex64 {
    let h = |s| h_s(s, conv, m);
    (-PI * I * (h(s3) - h(s2) - h(s1))).exp()
}

/// A sampled kernel: coordinates per point, values, and the regularization used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSample {
    pub axes: Vec<String>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Complex64>,
    pub eta: f64,
    pub epsilon: f64,
}

impl KernelSample {
    pub fn new(axes: &[&str], eta: f64, epsilon: f64) -> Self {
        KernelSample { axes: axes.iter().map(|s| s.to_string()).collect(), points: vec![], values: vec![], eta, epsilon }
    }

    pub fn push(&mut self, point: Vec<f64>, value: Complex64) -> Result<()> {
        if point.len() != self.axes.len() {
            return Err(Error::ConfigInvalid(format!("point has {} coordinates, expected {}", point.len(), self.axes.len())));
        }
        self.points.push(point);
        self.values.push(value);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV with columns: coordinates, re, im, eta, epsilon.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let io = |e: csv::Error| Error::ConfigInvalid(format!("csv: {e}"));
        let mut wr = csv::Writer::from_writer(w);
        let mut header = self.axes.clone();
        header.extend(["re", "im", "eta", "epsilon"].map(String::from));
        wr.write_record(&header).map_err(io)?;
        for (p, v) in self.points.iter().zip(&self.values) {
            let mut row: Vec<String> = p.iter().map(|x| format!("{x:.17e}")).collect();
            row.extend([v.re, v.im, self.eta, self.epsilon].map(|x| format!("{x:.17e}")));
            wr.write_record(&row).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::ConfigInvalid(format!("csv: {e}")))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_special_values() {
        let m = Modulus::real(0.7).unwrap();
        let q = m.qq();
        let w = omega(0.4, 0.4, 0.0, &m);
        assert!((w - (-PI * I * q * q / 4.0).exp()).norm() < 1e-14);
        for (a, b, c) in [(0.3, 0.5, 0.2), (1.2, -0.4, 2.0)] {
            assert!((omega(a, b, c, &m).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn h_is_even() {
        let m = Modulus::real(0.8).unwrap();
        for conv in [HConvention::Minus, HConvention::Plus] {
            assert_eq!(h_s(0.3, conv, &m), h_s(-0.3, conv, &m));
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let mut s = KernelSample::new(&["k2", "k1"], 1e-8, 0.0);
        s.push(vec![0.5, -0.25], Complex64::new(1.0, -2.0)).unwrap();
        assert!(s.push(vec![0.0], Complex64::new(0.0, 0.0)).is_err());
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "k2,k1,re,im,eta,epsilon");
        assert!(lines.next().unwrap().starts_with("5.00000000000000000e-1,"));
    }
}
