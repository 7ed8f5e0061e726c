use std::collections::BTreeMap;
use std::path::PathBuf;

use mdlab::{Error, Modulus, Result};
use serde::Serialize;

pub const SUITES: [&str; 8] = ["specfun", "identities", "kernels", "lattice", "verma", "braiding", "haar", "all"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite: String,
    pub b: f64,
    /// When set, b = e^{i theta} and `b` is ignored.
    pub theta: Option<f64>,
    /// Lattice size and box length; suites fall back to their own defaults.
    pub grid: Option<usize>,
    pub length: Option<f64>,
    /// Per-check tolerance overrides, keyed by check name.
    pub tols: BTreeMap<String, f64>,
    /// Term count for product-form evaluations.
    pub budget: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { suite: "all".into(), b: 0.7, theta: None, grid: None, length: None, tols: BTreeMap::new(), budget: 200, out: None, seed: 1 }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(Error::ConfigInvalid(format!("unknown suite {}", self.suite)));
        }
        if let Some((k, v)) = self.tols.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::ConfigInvalid(format!("tolerance {k} = {v} is not positive")));
        }
        if let Some(n) = self.grid {
            if n < 4 || !n.is_power_of_two() {
                return Err(Error::ConfigInvalid(format!("grid size {n} is not a power of two >= 4")));
            }
        }
        if matches!(self.length, Some(l) if !(l > 0.0)) {
            return Err(Error::ConfigInvalid("box length must be positive".into()));
        }
        if self.budget == 0 {
            return Err(Error::ConfigInvalid("budget must be positive".into()));
        }
        self.modulus().map(|_| ())
    }

    pub fn modulus(&self) -> Result<Modulus> {
        match self.theta {
            Some(t) => Modulus::phase(t),
            None => Modulus::real(self.b),
        }
    }

    pub fn tol(&self, name: &str, default: f64) -> f64 {
        self.tols.get(name).copied().unwrap_or(default)
    }
}

/// Parses KEY=VAL.
pub fn parse_tol(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got {s}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_values() {
        let mut c = SuiteConfig::default();
        assert!(c.validate().is_ok());
        c.tols.insert("x".into(), 0.0);
        assert!(c.validate().is_err());
        let c = SuiteConfig { grid: Some(48), ..SuiteConfig::default() };
        assert!(c.validate().is_err());
        let c = SuiteConfig { suite: "nope".into(), ..SuiteConfig::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn tol_pairs() {
        assert_eq!(parse_tol("qexp=1e-4").unwrap(), ("qexp".to_string(), 1e-4));
        assert!(parse_tol("qexp").is_err());
    }
}
