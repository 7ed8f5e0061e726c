use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use mdlab::kernels::{CgcContour, HConvention, SpinPair};
use mdlab::{Error, Modulus};
use mdlab_cli::config::{parse_tol, SuiteConfig};
use mdlab_cli::eval::*;
use mdlab_cli::run_suite;

#[derive(Parser)]
#[command(name = "mdlab", version, about = "Numerical checks for the modular double of U_q(sl(2,R))")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Real modulus b.
    #[arg(long, default_value_t = 0.7)]
    b: f64,
    /// Use b = e^{i theta} instead of --b.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Lattice size (power of two).
    #[arg(long)]
    grid: Option<usize>,
    /// Lattice box length.
    #[arg(long)]
    length: Option<f64>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Term budget for product-form evaluations.
    #[arg(long, default_value_t = 200)]
    budget: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite and print a JSON report.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Tolerance override, NAME=VALUE; may be repeated.
        #[arg(long = "tol", value_parser = parse_tol)]
        tols: Vec<(String, f64)>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a single function.
    Eval {
        #[arg(value_enum)]
        func: Func,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        x: Option<Complex64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        t: Option<Complex64>,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        tau: Option<Complex64>,
        #[arg(long, allow_hyphen_values = true)]
        s3: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        s2: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        s1: Option<f64>,
        /// Kernel representation for cgc and rkernel.
        #[arg(long, value_enum, default_value_t = Mode::Momentum)]
        mode: Mode,
        /// Kernel arguments: x3,x2,x1 (cgc position), k2,k1 (cgc momentum), or the fixed
        /// tau (rkernel momentum) / x2',x1' (rkernel position).
        #[arg(long, value_delimiter = ';', value_parser = parse_complex, allow_hyphen_values = true)]
        at: Vec<Complex64>,
        /// Regularization of the R kernel.
        #[arg(long, default_value_t = 1e-7)]
        eta: f64,
        /// Use the s^2 + Q^2/4 weights in omega.
        #[arg(long)]
        plus_h: bool,
        /// Write the rkernel table as CSV (to --out or stdout).
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy)]
enum Func {
    #[value(name = "Gb")]
    GbBig,
    #[value(name = "gb")]
    GbSmall,
    Wb,
    Rho,
    Bbinom,
    Omega,
    Cgc,
    Rkernel,
}

#[derive(ValueEnum, Clone, Copy, PartialEq)]
enum Mode {
    Position,
    Momentum,
}

fn config_err(msg: &str) -> Error {
    Error::ConfigInvalid(msg.to_string())
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| config_err(&format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn modulus(c: &Common) -> Result<Modulus, Error> {
    match c.theta {
        Some(t) => Modulus::phase(t),
        None => Modulus::real(c.b),
    }
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T, Error> {
    v.ok_or_else(|| config_err(&format!("--{name} is required")))
}

fn real_at(at: &[Complex64], n: usize, what: &str) -> Result<Vec<f64>, Error> {
    if at.len() != n || at.iter().any(|z| z.im != 0.0) {
        return Err(config_err(&format!("--at expects {n} real values ({what})")));
    }
    Ok(at.iter().map(|z| z.re).collect())
}

fn print_value(w: &mut dyn Write, v: Evaluated) -> io::Result<()> {
    writeln!(w, "value = {:.16e} {:+.16e}i", v.value.re, v.value.im)?;
    writeln!(w, "err_est = {:.3e}", v.err_est)
}

#[allow(clippy::too_many_arguments)]
fn eval(
    func: Func,
    x: Option<Complex64>,
    t: Option<Complex64>,
    tau: Option<Complex64>,
    spins: (Option<f64>, Option<f64>, Option<f64>),
    mode: Mode,
    at: &[Complex64],
    eta: f64,
    plus_h: bool,
    csv: bool,
    c: &Common,
) -> Result<(), Error> {
    let m = modulus(c)?;
    let mut w = sink(&c.out)?;
    let io_err = |e: io::Error| config_err(&e.to_string());
    let v = match func {
        Func::GbBig => eval_gb_big(need(x, "x")?, &m)?,
        Func::GbSmall => eval_gb_small(need(x, "x")?, &m)?,
        Func::Wb => eval_wb(need(x, "x")?, &m)?,
        Func::Rho => eval_rho(need(t, "t")?, &m)?,
        Func::Bbinom => eval_bbinom(need(t, "t")?, need(tau, "tau")?, &m)?,
        Func::Omega => {
            let conv = if plus_h { HConvention::Plus } else { HConvention::Minus };
            eval_omega(need(spins.0, "s3")?, need(spins.1, "s2")?, need(spins.2, "s1")?, conv, &m)
        }
        Func::Cgc => {
            let args = match mode {
                Mode::Position if at.len() == 3 => CgcArgs::Position { x3: at[0], x2: at[1], x1: at[2], epsilon: 1e-3 },
                Mode::Momentum if at.len() == 2 => CgcArgs::Momentum { k2: at[0], k1: at[1], contour: CgcContour::Separating },
                _ => return Err(config_err("--at expects x3;x2;x1 (position) or k2;k1 (momentum)")),
            };
            eval_cgc(&args, need(spins.0, "s3")?, need(spins.1, "s2")?, need(spins.2, "s1")?, &m)?
        }
        Func::Rkernel => {
            if !csv {
                return Err(config_err("rkernel produces a table; pass --csv"));
            }
            let sp = SpinPair::new(need(spins.1, "s2")?, need(spins.2, "s1")?);
            let (km, fixed) = match mode {
                Mode::Momentum => (KernelMode::Momentum, (real_at(at, 1, "tau")?[0], 0.0)),
                Mode::Position => {
                    let p = real_at(at, 2, "x2', x1'")?;
                    (KernelMode::Position, (p[0], p[1]))
                }
            };
            let table = rkernel_table(km, c.grid.unwrap_or(16), c.length.unwrap_or(8.0), sp, fixed, eta, &m)?;
            table.write_csv(&mut w)?;
            return w.flush().map_err(io_err);
        }
    };
    print_value(&mut w, v).and_then(|_| w.flush()).map_err(io_err)
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::ConfigInvalid(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("MDLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore failure: the pool may already be set up
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Verify { suite, tols, common } => {
            let cfg = SuiteConfig {
                suite,
                b: common.b,
                theta: common.theta,
                grid: common.grid,
                length: common.length,
                tols: tols.into_iter().collect::<BTreeMap<_, _>>(),
                budget: common.budget,
                out: common.out.clone(),
                seed: common.seed,
            };
            let report = match run_suite(&cfg) {
                Ok(r) => r,
                Err(e) => return exit_for(&e),
            };
            let written = sink(&cfg.out).and_then(|mut w| writeln!(w, "{}", report.to_json()).and_then(|_| w.flush()).map_err(|e| config_err(&e.to_string())));
            if let Err(e) = written {
                return exit_for(&e);
            }
            eprintln!("{}: {} passed, {} failed", report.suite, report.summary.passed, report.summary.failed);
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Cmd::Eval { func, x, t, tau, s3, s2, s1, mode, at, eta, plus_h, csv, common } => {
            match eval(func, x, t, tau, (s3, s2, s1), mode, &at, eta, plus_h, csv, &common) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => exit_for(&e),
            }
        }
    }
}
