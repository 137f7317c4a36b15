use std::io::Write as _;
use std::path::Path;

use mirror_spectra::eigenfunction::{pole_cancellation_check, psi_residual, EigenfunctionParams};
use mirror_spectra::selfdual::quantize_selfdual;
use mirror_spectra::spectral::{quantize, trace_orbit, Parity, SpectralPoint};
use mirror_spectra::{ModularParam, PrecCtx};
use rug::{Complex, Float};

use crate::config::{Failure, Format, JobConfig};
use crate::output::{fmt_complex_parts, fmt_float, fmt_residual, Document};
use crate::plot::{log_radial, render, Series};

/// Sample points of the difference-equation residual reported by --verify.
const PSI_SAMPLES: [f64; 3] = [0.15, 0.55, 1.1];
/// Significant digits of endpoint labels on orbit plots.
const LABEL_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
    Both,
}

impl ParityArg {
    fn parities(self) -> Vec<Parity> {
        match self {
            ParityArg::Even => vec![Parity::Even],
            ParityArg::Odd => vec![Parity::Odd],
            ParityArg::Both => vec![Parity::Even, Parity::Odd],
        }
    }
}

/// Header shared by all outputs.
pub fn header(doc: &mut Document, cfg: &JobConfig, ctx: &PrecCtx, command: &str, mp: Option<&(ModularParam, bool)>) {
    doc.meta("tool", format!("mirror-spectra {}", env!("CARGO_PKG_VERSION")));
    doc.meta("command", command);
    match mp {
        Some((mp, supported)) => {
            doc.meta("theta", fmt_float(mp.theta(), cfg.digits.max(20)));
            if !supported {
                doc.meta("theta_flag", "outside [pi/8, pi/2)");
            }
        }
        None => doc.meta("theta", "ignored (b = 1)"),
    }
    doc.meta("precision_bits", ctx.bits().to_string());
    doc.meta("tol", format!("{:e}", ctx.tol()));
    doc.meta("digits", cfg.digits.to_string());
}

/// Writes `doc` to --out or stdout in the configured format.
pub fn emit(doc: &Document, cfg: &JobConfig) -> Result<(), Failure> {
    let text = match cfg.format {
        Format::Csv => doc.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&doc.to_json()).expect("string map serializes");
            s.push('\n');
            s
        }
    };
    match &cfg.out {
        Some(path) => write_file(path, &text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| Failure::Io { path: "<stdout>".into(), source })
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|source| Failure::Io { path: path.display().to_string(), source })
}

fn warn_digits(cfg: &JobConfig) {
    if cfg.digits > cfg.reliable_digits() {
        eprintln!(
            "warning: printing {} digits but tol = {:e} supports about {}",
            cfg.digits,
            cfg.tol,
            cfg.reliable_digits()
        );
    }
}

fn complex_label(z: &Complex, digits: usize, floor: f64) -> String {
    let (re, im) = fmt_complex_parts(z, digits, floor);
    match (re.as_str(), im.as_str()) {
        (_, "0") => re,
        ("0", _) => format!("{im}i"),
        _ if im.starts_with('-') => format!("{re}{im}i"),
        _ => format!("{re}+{im}i"),
    }
}

/// Eigenvalues on one sheet, optionally with their residuals.
pub fn cmd_spectrum(cfg: &JobConfig, sheet: u32, parity: ParityArg, npoints: usize, verify: bool) -> Result<(), Failure> {
    let ctx = cfg.context()?;
    let coupling = cfg.modular(&ctx)?;
    let mp = &coupling.0;
    if sheet == 0 {
        return Err(Failure::Config("sheets are numbered from 1".into()));
    }
    if npoints < 8 {
        return Err(Failure::Config("--npoints must be at least 8".into()));
    }
    warn_digits(cfg);
    let mut cols = vec!["sheet", "parity", "sigma", "re_eps", "im_eps"];
    if verify {
        cols.extend(["wronskian", "g_component", "psi_residual", "pole"]);
    }
    let mut doc = Document::new(&cols);
    header(&mut doc, cfg, &ctx, "spectrum", Some(&coupling));
    doc.meta("npoints", npoints.to_string());

    let orbit = trace_orbit(sheet, npoints, mp, &ctx)?;
    let bound = ctx.tol().sqrt();
    let mut failed = Vec::new();
    for par in parity.parities() {
        for pt in quantize(&orbit, par, mp, &ctx)? {
            let (re, im) = fmt_complex_parts(&pt.eps, cfg.digits, ctx.tol());
            let mut row = vec![sheet.to_string(), par.name().to_string(), fmt_float(&pt.sigma, cfg.digits), re, im];
            if verify {
                let r = residuals(&pt, mp, &ctx)?;
                if r.iter().any(|v| !(*v <= bound)) {
                    failed.push(format!("{} state at sigma = {}", par.name(), fmt_float(&pt.sigma, 10)));
                }
                row.extend(r.iter().map(|v| fmt_residual(*v)));
            }
            doc.push(row);
        }
    }
    emit(&doc, cfg)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("residuals above {bound:e} for {}", failed.join("; "))))
    }
}

/// |W|/scale, the quantized component of G, max difference-equation
/// residual of ψ, and the normalized numerator at the poles.
fn residuals(pt: &SpectralPoint, mp: &ModularParam, ctx: &PrecCtx) -> Result<[f64; 4], Failure> {
    let check = pt.check(mp, ctx)?;
    let params = EigenfunctionParams::new(pt, mp, ctx)?;
    let mut psi = 0f64;
    for x in PSI_SAMPLES {
        let (r1, r2) = psi_residual(&ctx.real(x), &params, ctx)?;
        psi = psi.max(r1.to_f64()).max(r2.to_f64());
    }
    let pole = pole_cancellation_check(&params, ctx)?.max();
    Ok([check.wronskian, check.g_component, psi, pole])
}

/// Orbits of the given sheets as CSV, plus an SVG plot next to --out.
pub fn cmd_orbit(cfg: &JobConfig, sheets: &[u32], npoints: usize, log_scale: bool) -> Result<(), Failure> {
    let ctx = cfg.context()?;
    let coupling = cfg.modular(&ctx)?;
    let mp = &coupling.0;
    if sheets.is_empty() || sheets.contains(&0) {
        return Err(Failure::Config("sheets are numbered from 1".into()));
    }
    if npoints < 2 {
        return Err(Failure::Config("--npoints must be at least 2".into()));
    }
    warn_digits(cfg);
    let mut doc = Document::new(&["sheet", "sigma", "re_eps", "im_eps"]);
    header(&mut doc, cfg, &ctx, "orbit", Some(&coupling));
    doc.meta("npoints", npoints.to_string());
    let mut series = Vec::new();
    for &k in sheets {
        let orbit = trace_orbit(k, npoints, mp, &ctx)?;
        let mut points = Vec::with_capacity(orbit.samples.len());
        for (sigma, eps) in &orbit.samples {
            let (re, im) = fmt_complex_parts(eps, cfg.digits, ctx.tol());
            doc.push(vec![k.to_string(), fmt_float(sigma, cfg.digits), re, im]);
            let z = (eps.real().to_f64(), eps.imag().to_f64());
            points.push(if log_scale { log_radial(z) } else { z });
        }
        series.push(Series {
            name: format!("sheet {k}"),
            points,
            start_label: complex_label(orbit.start(), LABEL_DIGITS, ctx.tol().sqrt()),
            end_label: complex_label(orbit.end(), LABEL_DIGITS, ctx.tol().sqrt()),
        });
    }
    emit(&doc, cfg)?;
    if let Some(out) = &cfg.out {
        let names: Vec<String> = sheets.iter().map(u32::to_string).collect();
        let noun = if sheets.len() == 1 { "sheet" } else { "sheets" };
        let title = format!("orbit of eps(sigma), {noun} {}", names.join(", "));
        let (xl, yl) = if log_scale {
            ("log(1+|eps|) cos arg eps", "log(1+|eps|) sin arg eps")
        } else {
            ("Re eps", "Im eps")
        };
        write_file(&out.with_extension("svg"), &render(&title, xl, yl, &series))?;
    }
    Ok(())
}

/// Self-dual level n with its period integrals.
pub fn cmd_selfdual(cfg: &JobConfig, n: u32) -> Result<(), Failure> {
    let ctx = cfg.context()?;
    if cfg.theta.is_some() {
        eprintln!("warning: --theta is ignored by selfdual");
    }
    warn_digits(cfg);
    let spec = quantize_selfdual(n, &ctx)?;
    let mut doc = Document::new(&[
        "n",
        "eps",
        "log_eps",
        "alpha",
        "beta",
        "lambda",
        "A",
        "A_tilde",
        "B",
        "B_tilde",
        "level_residual",
        "cycle_residual",
    ]);
    header(&mut doc, cfg, &ctx, "selfdual", None);
    let d = cfg.digits;
    let level = spec.level_residual().to_f64().abs();
    let cycle = spec.cycle_residual().to_f64().abs();
    let row: Vec<String> = [&spec.eps, &spec.log_eps(), &spec.alpha, &spec.beta, &spec.lambda, &spec.a, &spec.a_tilde]
        .into_iter()
        .chain([&spec.b, &spec.b_tilde])
        .map(|x: &Float| fmt_float(x, d))
        .collect();
    let mut full = vec![n.to_string()];
    full.extend(row);
    full.extend([fmt_residual(level), fmt_residual(cycle)]);
    doc.push(full);
    emit(&doc, cfg)?;
    let bound = ctx.tol().sqrt();
    if level > bound || cycle > bound {
        return Err(Failure::Check(format!("quantization residual {level:e}/{cycle:e} above {bound:e}")));
    }
    Ok(())
}
