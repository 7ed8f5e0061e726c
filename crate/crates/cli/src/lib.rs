//! Verification suites and evaluation helpers behind the `mdlab` binary.

pub mod config;
pub mod eval;
pub mod report;
pub mod suites;

pub use config::SuiteConfig;
pub use report::{Check, Report};
pub use suites::run_suite;
