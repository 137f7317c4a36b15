use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mirror_spectra_cli::commands::{cmd_orbit, cmd_selfdual, cmd_spectrum, emit, header, ParityArg};
use mirror_spectra_cli::config::{Failure, Format, JobConfig, QUICK_BITS, QUICK_TOL, SEED};
use mirror_spectra_cli::output::{fmt_residual, Document};
use mirror_spectra_cli::verify::run_suite;

/// Spectra of the quantized mirror curve of local P1xP1.
#[derive(Parser, Debug)]
#[command(name = "mirror-spectra", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Coupling angle θ in [π/8, π/2); defaults to π/4.
    #[arg(long, global = true, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Working precision in bits.
    #[arg(long, global = true, env = "MIRROR_SPECTRA_PRECISION", default_value_t = 192)]
    precision_bits: u32,
    /// Target accuracy of roots and series.
    #[arg(long, global = true, default_value_t = 1e-40)]
    tol: f64,
    /// Significant digits of printed values.
    #[arg(long, global = true, default_value_t = 18)]
    digits: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; orbit plots go next to it with an .svg extension.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// 64-bit precision and tol 1e-10.
    #[arg(long, global = true)]
    quick: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues on one sheet.
    Spectrum {
        #[arg(long, default_value_t = 1)]
        sheet: u32,
        #[arg(long, value_enum, default_value_t = ParityArg::Both)]
        parity: ParityArg,
        /// Orbit samples scanned for quantized points.
        #[arg(long, default_value_t = 64)]
        npoints: usize,
        /// Add Wronskian, G, difference-equation and pole residuals.
        #[arg(long)]
        verify: bool,
    },
    /// ε_k(σ) over σ in [0, sin θ], as CSV and an SVG plot.
    Orbit {
        /// One or more sheets, e.g. --sheet 1,2,3.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        sheet: Vec<u32>,
        #[arg(long, default_value_t = 128)]
        npoints: usize,
        /// Plot log(1 + |ε|) radially.
        #[arg(long)]
        log_scale: bool,
    },
    /// Level n of the self-dual problem ħ = 2π.
    Selfdual {
        #[arg(long, default_value_t = 0)]
        n: u32,
    },
    /// Run the invariant suites and print a pass/fail table.
    Verify {
        /// Detune the eigenvalues so that pole cancellation must fail.
        #[arg(long)]
        fault: bool,
    },
}

impl Common {
    fn job(&self) -> JobConfig {
        let (precision_bits, tol) = if self.quick { (QUICK_BITS, QUICK_TOL) } else { (self.precision_bits, self.tol) };
        JobConfig { theta: self.theta, precision_bits, tol, digits: self.digits, format: self.format, out: self.out.clone() }
    }
}

fn cmd_verify(cfg: &JobConfig, fault: bool) -> Result<(), Failure> {
    let ctx = cfg.context()?;
    let coupling = cfg.modular(&ctx)?;
    let results = run_suite(&ctx, &coupling.0, fault);
    let mut doc = Document::new(&["check", "residual", "bound", "status"]);
    header(&mut doc, cfg, &ctx, "verify", Some(&coupling));
    doc.meta("seed", format!("{SEED:#x}"));
    if fault {
        doc.meta("fault", "eps detuned");
    }
    for r in &results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        doc.push(vec![r.name.to_string(), r.residual_text(), fmt_residual(r.bound), status.to_string()]);
    }
    emit(&doc, cfg)?;
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = cli.common.job();
    let result = match cli.command {
        Command::Spectrum { sheet, parity, npoints, verify } => cmd_spectrum(&cfg, sheet, parity, npoints, verify),
        Command::Orbit { sheet, npoints, log_scale } => cmd_orbit(&cfg, &sheet, npoints, log_scale),
        Command::Selfdual { n } => cmd_selfdual(&cfg, n),
        Command::Verify { fault } => cmd_verify(&cfg, fault),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mirror-spectra: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
