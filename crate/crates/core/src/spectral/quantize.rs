use rug::{Complex, Float};

use super::orbit::Orbit;
use super::seed::Endpoint;
use super::{newton_at, Parity, SpectralPoint};
use crate::chi::{g_eval_series, ChiSeries};
use crate::error::Result;
use crate::precision::{cabs, ModularParam, PrecCtx};

const MAX_REFINE: usize = 200;

/// An end of the σ domain that is never part of the spectrum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcludedEndpoint {
    pub sheet: u32,
    pub endpoint: Endpoint,
    pub reason: &'static str,
}

/// At σ = 0 and σ = sin θ, s lies in ±q^Z and the candidate eigenfunction
/// has a pole that the numerator cannot cancel; on even sheets at σ = 0 it
/// is a double pole.
pub fn excluded_endpoints(sheet: u32) -> Vec<ExcludedEndpoint> {
    let zero = if sheet % 2 == 0 { "excluded (double pole)" } else { "excluded (s in +-q^Z)" };
    vec![
        ExcludedEndpoint { sheet, endpoint: Endpoint::Zero, reason: zero },
        ExcludedEndpoint { sheet, endpoint: Endpoint::SinTheta, reason: "excluded (s in +-q^Z)" },
    ]
}

/// Interior points of the orbit where G(s, ε) = -ξ conj G(s, ε), i.e.
/// Re G = 0 for even and Im G = 0 for odd parity.
pub fn quantize(orbit: &Orbit, parity: Parity, mp: &ModularParam, ctx: &PrecCtx) -> Result<Vec<SpectralPoint>> {
    let p = ctx.bits();
    let n = orbit.samples.len();
    let probe = Float::with_val(p, &orbit.step / 64u32);

    // Endpoints are replaced by probes just inside the domain.
    let mut nodes: Vec<(Float, Complex)> = Vec::with_capacity(n);
    let first = Float::with_val(p, &orbit.samples[0].0 + &probe);
    let e_first = interpolate(&orbit.samples[0], &orbit.samples[1], &first);
    nodes.push((first.clone(), solve_at(&first, &e_first, mp, ctx)?));
    nodes.extend(orbit.samples[1..n - 1].iter().cloned());
    let last = Float::with_val(p, &orbit.samples[n - 1].0 - &probe);
    let e_last = interpolate(&orbit.samples[n - 2], &orbit.samples[n - 1], &last);
    nodes.push((last.clone(), solve_at(&last, &e_last, mp, ctx)?));

    let mut g = Vec::with_capacity(nodes.len());
    for (sigma, eps) in &nodes {
        g.push(component(sigma, eps, parity, mp, ctx)?);
    }

    let mut out: Vec<SpectralPoint> = Vec::new();
    for i in 0..nodes.len() - 1 {
        let root = if g[i].is_zero() {
            Some(nodes[i].clone())
        } else if g[i + 1].is_zero() {
            None
        } else if g[i].is_sign_negative() != g[i + 1].is_sign_negative() {
            Some(refine(&nodes[i], &g[i], &nodes[i + 1], &g[i + 1], parity, mp, ctx)?)
        } else {
            None
        };
        if let Some((sigma, eps)) = root {
            let dup = out.iter().any(|pt| Float::with_val(p, &pt.sigma - &sigma).abs() < 1e-20);
            if !dup {
                out.push(SpectralPoint { sheet: orbit.sheet, sigma, eps, parity: Some(parity) });
            }
        }
    }
    Ok(out)
}

fn interpolate(a: &(Float, Complex), b: &(Float, Complex), x: &Float) -> Complex {
    let p = x.prec();
    let w = Float::with_val(p, x - &a.0) / Float::with_val(p, &b.0 - &a.0);
    let d = Complex::with_val(p, &b.1 - &a.1);
    Complex::with_val(p, &a.1 + d * w)
}

fn solve_at(sigma: &Float, guess: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<Complex> {
    Ok(newton_at(&mp.s_of_sigma(sigma), guess, mp, ctx, sigma.to_f64())?.eps)
}

/// Re or Im of G/|G| at (e^{2πbσ}, ε).
fn component(sigma: &Float, eps: &Complex, parity: Parity, mp: &ModularParam, ctx: &PrecCtx) -> Result<Float> {
    let mut series = ChiSeries::new(eps, mp.q(), ctx)?;
    let g = g_eval_series(&mut series, &mp.s_of_sigma(sigma), ctx)?.value;
    let unit = Complex::with_val(ctx.bits(), &g / cabs(&g));
    Ok(match parity {
        Parity::Even => unit.real().clone(),
        Parity::Odd => unit.imag().clone(),
    })
}

/// Illinois iteration on σ for a bracketed sign change, re-solving ε at
/// every trial σ.
fn refine(
    a: &(Float, Complex),
    ga: &Float,
    b: &(Float, Complex),
    gb: &Float,
    parity: Parity,
    mp: &ModularParam,
    ctx: &PrecCtx,
) -> Result<(Float, Complex)> {
    let p = ctx.bits();
    let tiny = ctx.eps() << 16u32;
    let (mut a, mut ga) = (a.clone(), ga.clone());
    let (mut b, mut gb) = (b.clone(), gb.clone());
    let mut side = 0i32;
    for _ in 0..MAX_REFINE {
        let num = Float::with_val(p, &gb * Float::with_val(p, &b.0 - &a.0));
        let c = Float::with_val(p, &b.0 - num / Float::with_val(p, &gb - &ga));
        let guess = interpolate(&a, &b, &c);
        let ec = solve_at(&c, &guess, mp, ctx)?;
        let gc = component(&c, &ec, parity, mp, ctx)?;
        let width = Float::with_val(p, &b.0 - &a.0).abs();
        if gc.is_zero() || width < tiny {
            return Ok((c, ec));
        }
        let step = Float::with_val(p, &c - &b.0).abs().min(&Float::with_val(p, &c - &a.0).abs()).clone();
        if gc.is_sign_negative() == gb.is_sign_negative() {
            b = (c, ec);
            gb = gc;
            if side == 1 {
                ga /= 2u32;
            }
            side = 1;
        } else {
            a = (c, ec);
            ga = gc;
            if side == -1 {
                gb /= 2u32;
            }
            side = -1;
        }
        if step < tiny {
            let pick = if ga.clone().abs() < gb.clone().abs() { a } else { b };
            return Ok(pick);
        }
    }
    let pick = if ga.abs() < gb.abs() { a } else { b };
    Ok(pick)
}
