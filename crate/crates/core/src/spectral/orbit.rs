use rug::{Complex, Float};

use super::seed::{sheet_seed, Endpoint};
use super::{newton_at, solve_eps, NEWTON_MAX_ITER};
use crate::error::{Error, Result};
use crate::precision::{cabs, ModularParam, PrecCtx};

/// Newton steps above which a continuation step is retried at half size.
const MAX_STEP_ITERATIONS: usize = 5;
/// Smallest step, as a fraction of the grid spacing.
const MIN_STEP: f64 = 1.0 / (1u64 << 24) as f64;

/// ε_k(σ) sampled on a uniform grid of [0, sin θ].
#[derive(Clone, Debug)]
pub struct Orbit {
    pub sheet: u32,
    pub samples: Vec<(Float, Complex)>,
    pub step: Float,
}

impl Orbit {
    pub fn start(&self) -> &Complex {
        &self.samples[0].1
    }

    pub fn end(&self) -> &Complex {
        &self.samples[self.samples.len() - 1].1
    }

    /// Largest |ε_{i+1} - ε_i| between neighbouring samples.
    pub fn max_jump(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| cabs(&Complex::with_val(w[0].1.prec().0, &w[1].1 - &w[0].1)).to_f64())
            .fold(0.0, f64::max)
    }
}

/// Continues sheet k from σ = 0 to σ = sin θ.
pub fn trace_orbit(k: u32, npoints: usize, mp: &ModularParam, ctx: &PrecCtx) -> Result<Orbit> {
    trace_orbit_from(k, Endpoint::Zero, npoints, mp, ctx)
}

/// Continues sheet k across [0, sin θ] starting from either end. Samples
/// are always returned in increasing σ.
pub fn trace_orbit_from(k: u32, start: Endpoint, npoints: usize, mp: &ModularParam, ctx: &PrecCtx) -> Result<Orbit> {
    if npoints < 16 {
        return Err(Error::InvalidArgument(format!("npoints = {npoints} < 16")));
    }
    let p = ctx.bits();
    let st = Float::with_val(p, mp.sin_theta());
    let h = Float::with_val(p, &st / (npoints as u32 - 1));
    let (origin, dir) = match start {
        Endpoint::Zero => (Float::new(p), 1i32),
        Endpoint::SinTheta => (st.clone(), -1i32),
    };
    let sigma_at = |t: f64| -> Float {
        if t == (npoints - 1) as f64 {
            return match start {
                Endpoint::Zero => st.clone(),
                Endpoint::SinTheta => Float::new(p),
            };
        }
        Float::with_val(p, &origin + Float::with_val(p, &h * t) * dir)
    };

    let seed = sheet_seed(k, start, mp, ctx)?;
    let eps0 = solve_eps(&origin, &seed, mp, ctx)
        .map_err(|_| Error::ContinuationFailed { sheet: k, sigma: origin.to_f64() })?;
    let mut samples = vec![(origin.clone(), eps0.clone())];
    let mut hist: Vec<(Float, Complex)> = vec![(origin.clone(), eps0)];
    let last_t = (npoints - 1) as f64;
    let mut t = 0.0f64;
    let mut dt = 1.0f64;
    while t < last_t {
        let grid = t.floor() + 1.0;
        let t_next = (t + dt).min(grid);
        let sigma = sigma_at(t_next);
        let guess = extrapolate(&hist, &sigma);
        let s = mp.s_of_sigma(&sigma);
        // sheets may meet at the far end, where the root is double and
        // Newton only converges linearly
        let budget = if t_next == last_t { NEWTON_MAX_ITER } else { MAX_STEP_ITERATIONS };
        let accepted = match newton_at(&s, &guess, mp, ctx, sigma.to_f64()) {
            Ok(rep) if rep.iterations <= budget && no_jump(&rep.eps, &guess, &hist) => Some(rep.eps),
            _ => None,
        };
        match accepted {
            Some(eps) => {
                t = t_next;
                if hist.len() == 3 {
                    hist.remove(0);
                }
                hist.push((sigma.clone(), eps.clone()));
                if t == grid {
                    samples.push((sigma, eps));
                }
                dt = (dt * 2.0).min(1.0);
            }
            None => {
                dt /= 2.0;
                if dt < MIN_STEP {
                    return Err(Error::ContinuationFailed { sheet: k, sigma: sigma_at(t).to_f64() });
                }
            }
        }
    }
    if dir < 0 {
        samples.reverse();
    }
    Ok(Orbit { sheet: k, samples, step: h })
}

/// Lagrange extrapolation through the stored points.
fn extrapolate(hist: &[(Float, Complex)], x: &Float) -> Complex {
    let p = x.prec();
    let mut out = Complex::new(p);
    for (i, (xi, yi)) in hist.iter().enumerate() {
        let mut w = Float::with_val(p, 1);
        for (j, (xj, _)) in hist.iter().enumerate() {
            if i != j {
                w *= Float::with_val(p, x - xj) / Float::with_val(p, xi - xj);
            }
        }
        out += Complex::with_val(p, yi * &w);
    }
    out
}

/// The Newton correction must be small against the predicted move, else the
/// solve has likely landed on a neighbouring sheet.
fn no_jump(eps: &Complex, guess: &Complex, hist: &[(Float, Complex)]) -> bool {
    let p = eps.prec().0;
    let last = &hist[hist.len() - 1].1;
    let corr = cabs(&Complex::with_val(p, eps - guess));
    let moved = cabs(&Complex::with_val(p, guess - last));
    let slack = (cabs(last) + 1u32) * 1e-6;
    corr <= moved / 2u32 + slack
}
