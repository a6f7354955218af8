// SPDX-License-Identifier: MIT OR Apache-2.0

//! `qexp`: evaluate `F_N`, run the verification suites and write residual
//! reports.
//!
//! Exit codes: 0 success, 1 a residual above its threshold, 2 bad arguments,
//! 3 numerical failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qexp_core::QexpError;

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Arg(String),
    Numerical(String),
    Io(String),
}

impl From<QexpError> for CliError {
    fn from(e: QexpError) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Arg(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Arg(m) => write!(f, "argument error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

/// What a subcommand hands back to `main`.
pub enum Status {
    Ok,
    Violation(Vec<String>),
}

#[derive(Parser, Debug)]
#[command(
    name = "qexp",
    version,
    about = "Quantum exponential F_N at even roots of unity: evaluation and verification"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// key=value configuration file; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Even N; gauss also accepts a range such as 2..64
    #[arg(long = "N", global = true)]
    n: Option<String>,
    #[arg(long = "M", global = true)]
    m: Option<usize>,
    /// Grid refinement: h = ℏ/kappa
    #[arg(long, global = true)]
    kappa: Option<usize>,
    /// Packet width in units of the base grid step
    #[arg(long, global = true)]
    width: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    center: Option<f64>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    max_levels: Option<u32>,
    /// Report format: json or csv
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write the report here
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate F_N, f_o or F_N'(0)
    Eval {
        #[command(subcommand)]
        what: EvalCmd,
    },
    /// Quadratic Gauss sums, optionally with the contour check
    Gauss {
        #[arg(long = "contour-R")]
        contour_r: Option<f64>,
    },
    /// Run a verification suite and write a residual report
    Verify {
        target: VerifyTarget,
        /// Number of grids in the h-sweep (h, h/2, ...)
        #[arg(long = "sweep-h", default_value_t = 1)]
        sweep_h: usize,
    },
    /// Probe operator properties on the lattice
    Probe {
        #[command(subcommand)]
        what: ProbeCmd,
    },
    /// Fit a scalar solution to F_N(γ·)
    Fit {
        #[command(subcommand)]
        what: FitCmd,
    },
}

#[derive(Subcommand, Debug)]
enum EvalCmd {
    /// F_N(q^k e^x), or F_N(0) with --zero
    Fn {
        #[arg(long)]
        k: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<f64>,
        #[arg(long)]
        zero: bool,
    },
    /// f_o(re + i im)
    Fo {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, allow_hyphen_values = true)]
        im: f64,
    },
    /// Closed-form derivative at zero along Γ_k
    Dfn0 {
        #[arg(long)]
        k: i64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum VerifyTarget {
    ExpIdentity,
    Conj,
    Commutation,
    WeakLimit,
    ClosureForms,
    Overlaps,
}

#[derive(Subcommand, Debug)]
enum ProbeCmd {
    /// Commutator defect of Q = μS + RS over a μ grid or at one μ
    Normality {
        /// Grid kind; only rays+midsector is defined
        #[arg(long = "mu-grid", default_value = "rays+midsector")]
        mu_grid: String,
        /// Moduli for the grid, comma separated
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<f64>>,
        /// A single μ such as 0+0i or 1.5-2i
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum FitCmd {
    /// Recover γ from samples
    Gamma {
        /// CSV rows k,x,re,im
        #[arg(long = "from-samples")]
        from_samples: Option<PathBuf>,
        /// Round trip against a known member, e.g. gamma=k:2,x:0.3
        #[arg(long = "self-test")]
        self_test: Option<String>,
    },
}

fn overrides(c: &Common, gauss: bool) -> Result<Overrides, CliError> {
    let n = match (&c.n, gauss) {
        (Some(s), false) => Some(
            s.trim()
                .parse()
                .map_err(|_| CliError::Arg(format!("--N expects an integer, got '{s}'")))?,
        ),
        _ => None,
    };
    Ok(Overrides {
        n,
        m: c.m,
        kappa: c.kappa,
        width: c.width,
        center: c.center,
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        max_levels: c.max_levels,
        format: c.format.clone(),
        out: c.out.clone(),
        seed: c.seed,
    })
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("QEXP_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Arg(format!("QEXP_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CliError::Arg("QEXP_THREADS must be positive".into()));
        }
        // a second initialisation only happens in tests; ignore it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status, CliError> {
    init_threads()?;
    let file = match &cli.common.config {
        Some(p) => config::read_config_file(p)?,
        None => Default::default(),
    };
    // gauss reads --N itself since it may be a range
    let gauss = matches!(cli.cmd, Cmd::Gauss { .. });
    let flags = overrides(&cli.common, gauss)?;
    let cfg = RunConfig::resolve(&file, &flags)?;
    match cli.cmd {
        Cmd::Eval { what } => match what {
            EvalCmd::Fn { k, x, zero } => commands::eval_fn(&cfg, k, x, zero),
            EvalCmd::Fo { re, im } => commands::eval_fo(&cfg, re, im),
            EvalCmd::Dfn0 { k } => commands::eval_dfn0(&cfg, k),
        },
        Cmd::Gauss { contour_r } => {
            let n = match &cli.common.n {
                Some(s) => s.clone(),
                None => cfg.n.to_string(),
            };
            commands::gauss(&cfg, &n, contour_r)
        }
        Cmd::Verify { target, sweep_h } => commands::verify(&cfg, target, sweep_h),
        Cmd::Probe {
            what: ProbeCmd::Normality { mu_grid, moduli, mu },
        } => commands::probe_normality(&cfg, &mu_grid, moduli, mu.as_deref()),
        Cmd::Fit {
            what: FitCmd::Gamma {
                from_samples,
                self_test,
            },
        } => commands::fit_gamma(&cfg, from_samples.as_deref(), self_test.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation(keys)) => {
            eprintln!("threshold violated: {}", keys.join(", "));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("qexp: {e}");
            ExitCode::from(match e {
                // an unwritable --out path is a bad argument
                CliError::Arg(_) | CliError::Io(_) => 2,
                CliError::Numerical(_) => 3,
            })
        }
    }
}
