use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub paper_ref: String,
    /// `None` (serialized as null) when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn new(name: &str, paper_ref: &str, residual: mdlab::Result<f64>, tol: f64) -> Self {
        match residual {
            Ok(r) if r.is_finite() => Check { name: name.into(), paper_ref: paper_ref.into(), residual: Some(r), tol, pass: r <= tol, error: None },
            Ok(r) => Check { name: name.into(), paper_ref: paper_ref.into(), residual: None, tol, pass: false, error: Some(format!("non-finite residual {r}")) },
            Err(e) => Check { name: name.into(), paper_ref: paper_ref.into(), residual: None, tol, pass: false, error: Some(e.to_string()) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub params: serde_json::Value,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    pub fn new(suite: &str, params: serde_json::Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        let failed = checks.len() - passed;
        Report { suite: suite.into(), params, checks, summary: Summary { passed, failed } }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_within_tolerance() {
        assert!(Check::new("a", "r", Ok(1e-9), 1e-9).pass);
        assert!(!Check::new("a", "r", Ok(2e-9), 1e-9).pass);
        let c = Check::new("a", "r", Err(mdlab::Error::NoDecay), 1.0);
        assert!(!c.pass && c.residual.is_none() && c.error.is_some());
        assert!(!Check::new("a", "r", Ok(f64::NAN), 1.0).pass);
    }

    #[test]
    fn schema() {
        let r = Report::new("x", serde_json::json!({}), vec![Check::new("a", "r", Ok(0.5), 1.0), Check::new("b", "r", Ok(2.0), 1.0)]);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["summary"]["passed"], 1);
        assert_eq!(v["summary"]["failed"], 1);
        for k in ["name", "paper_ref", "residual", "tol", "pass"] {
            assert!(v["checks"][0].get(k).is_some(), "{k}");
        }
        assert!(v["checks"][0].get("error").is_none());
    }
}
