//! The ħ = 2π case, where both difference equations collapse to
//! ψ(x - i) + ψ(x + i) = (ε - 2cosh 2πx) ψ(x).
//!
//! Eigenvalues come from the periods of θ_λ = (x + λ/sin 2πx) dy on the
//! curve cos 2πx + cos 2πy = ε/2; eigenfunctions from the Bloch–Jost
//! function built on it (see [`path`]).

mod path;

use rug::Float;

pub use path::{axis_point, cycle_integrals, harper_residual, phi_eval, psi_selfdual, segment, CurvePoint};

use crate::error::{Error, Result};
use crate::precision::PrecCtx;
use crate::quadrature::GaussLegendre;

/// Geometric scan range for the level function.
pub const SCAN_LO: f64 = 4.01;
pub const SCAN_HI: f64 = 1e6;
const SCAN_POINTS: usize = 64;
const MAX_ROOT_ITER: usize = 200;

/// Positive α, β with ε = 4cosh²(πα) and sinh(πβ) = cosh(πα).
pub fn alpha_beta(eps: &Float, ctx: &PrecCtx) -> Result<(Float, Float)> {
    if *eps <= 4 {
        return Err(Error::InvalidArgument(format!("self-dual energies lie above 4, got {}", eps.to_f64())));
    }
    let p = ctx.bits();
    let h = Float::with_val(p, eps.sqrt_ref()) / 2u32;
    let pi = ctx.pi();
    let alpha = Float::with_val(p, h.acosh_ref()) / &pi;
    let beta = h.asinh() / pi;
    Ok((alpha, beta))
}

/// r(t), s(t) and their derivatives along the cycle paths:
/// cosh 2πr = 1 - cos πt + cosh 2πα, sinh πs = sinh πα sin πt.
#[derive(Clone, Debug)]
pub struct PathFuncs {
    pub r: Float,
    pub s: Float,
    pub rprime: Float,
    pub sprime: Float,
}

/// Quantities of ε shared by the path functions.
#[derive(Clone, Debug)]
pub(crate) struct Curve {
    pub eps: Float,
    pub alpha: Float,
    pub beta: Float,
    pub sinh_pa: Float,
    pub cosh_2pa: Float,
    pub pi: Float,
}

impl Curve {
    pub fn new(eps: &Float, ctx: &PrecCtx) -> Result<Self> {
        let (alpha, beta) = alpha_beta(eps, ctx)?;
        let pi = ctx.pi();
        let pa = Float::with_val(ctx.bits(), &pi * &alpha);
        let sinh_pa = Float::with_val(ctx.bits(), pa.sinh_ref());
        let cosh_2pa = Float::with_val(ctx.bits(), &pa * 2u32).cosh();
        Ok(Curve { eps: eps.clone(), alpha, beta, sinh_pa, cosh_2pa, pi })
    }

    /// s with sinh πs = sinh πα · v.
    pub fn s_of(&self, v: &Float) -> Float {
        Float::with_val(v.prec(), &self.sinh_pa * v).asinh() / &self.pi
    }

    /// r with cosh 2πr = 1 - c + cosh 2πα.
    pub fn r_of(&self, c: &Float) -> Float {
        let arg = Float::with_val(c.prec(), 1 - Float::with_val(c.prec(), c - &self.cosh_2pa));
        arg.acosh() / Float::with_val(c.prec(), &self.pi * 2u32)
    }

    pub fn funcs(&self, t: &Float) -> PathFuncs {
        let p = t.prec();
        let pt = Float::with_val(p, &self.pi * t);
        let (sin, cos) = pt.sin_cos(Float::new(p));
        let s = self.s_of(&sin);
        let r = self.r_of(&cos);
        let ps = Float::with_val(p, &self.pi * &s);
        let sprime = Float::with_val(p, &self.sinh_pa * &cos) / ps.cosh();
        let two_pr = Float::with_val(p, &self.pi * &r) * 2u32;
        let rprime = sin / (two_pr.sinh() * 2u32);
        PathFuncs { r, s, rprime, sprime }
    }

    /// The ξ-cycle integrand, λ/(2cosh πs(t) cosh πs(t+½)) - s(t+½)s'(t),
    /// returned as its λ-coefficient and constant parts.
    pub fn xi_parts(&self, t: &Float) -> (Float, Float) {
        let p = t.prec();
        let pt = Float::with_val(p, &self.pi * t);
        let (sin, cos) = pt.sin_cos(Float::new(p));
        let s0 = self.s_of(&sin);
        let s1 = self.s_of(&cos);
        let c0 = Float::with_val(p, &self.pi * &s0).cosh();
        let c1 = Float::with_val(p, &self.pi * &s1).cosh();
        let a = Float::with_val(p, &c0 * &c1) * 2u32;
        let sprime = Float::with_val(p, &self.sinh_pa * &cos) / c0;
        (a.recip(), -(s1 * sprime))
    }
}

pub fn path_funcs(eps: &Float, t: &Float, ctx: &PrecCtx) -> Result<PathFuncs> {
    Ok(Curve::new(eps, ctx)?.funcs(t))
}

/// The four positive periods A, Ã, B, B̃ of θ_λ.
#[derive(Clone, Debug)]
pub struct Periods {
    pub a: Float,
    pub a_tilde: Float,
    pub b: Float,
    pub b_tilde: Float,
}

impl Periods {
    /// λ = B̃/B, the only value making the ζ-cycle integral vanish.
    pub fn lambda(&self) -> Float {
        Float::with_val(self.b.prec(), &self.b_tilde / &self.b)
    }

    /// Aλ - Ã at λ = B̃/B.
    pub fn level(&self) -> Float {
        Float::with_val(self.a.prec(), &self.a * self.lambda()) - &self.a_tilde
    }

    /// AB̃ - BÃ.
    pub fn abba(&self) -> Float {
        let p = self.a.prec();
        Float::with_val(p, &self.a * &self.b_tilde) - Float::with_val(p, &self.b * &self.a_tilde)
    }
}

/// A = 4∫₀^½ s'(t)/sinh 2πs(t+½) dt, Ã = 4∫₀^½ s(t+½)s'(t) dt,
/// B = ∫₀¹ dt/sinh 2πr(t), B̃ = ∫₀¹ r(t) dt.
pub fn period_integrals(eps: &Float, ctx: &PrecCtx) -> Result<Periods> {
    period_integrals_with(eps, &GaussLegendre::new(ctx), ctx)
}

pub(crate) fn period_integrals_with(eps: &Float, gl: &GaussLegendre, ctx: &PrecCtx) -> Result<Periods> {
    let curve = Curve::new(eps, ctx)?;
    let p = ctx.bits();
    let tol = ctx.real(ctx.tol() / 100.0);
    let zero = Float::new(p);
    let half = ctx.real(0.5);
    let one = ctx.real(1.0);
    // the A integrand s'(t)/sinh 2πs(t+½) reduces to 1/(2cosh πs(t) cosh πs(t+½))
    let a = gl.integrate_real(&mut |t: &Float| Ok(curve.xi_parts(t).0), &zero, &half, &tol)? * 4u32;
    let a_tilde = -gl.integrate_real(&mut |t: &Float| Ok(curve.xi_parts(t).1), &zero, &half, &tol)? * 4u32;
    let b = gl.integrate_real(
        &mut |t: &Float| {
            let r = curve.funcs(t).r;
            Ok((r * Float::with_val(p, &curve.pi * 2u32)).sinh().recip())
        },
        &zero,
        &one,
        &tol,
    )?;
    let b_tilde = gl.integrate_real(&mut |t: &Float| Ok(curve.funcs(t).r), &zero, &one, &tol)?;
    Ok(Periods { a, a_tilde, b, b_tilde })
}

/// Aλ - Ã with λ = B̃/B; equals n + 1 at the n-th level.
pub fn level_function(eps: &Float, ctx: &PrecCtx) -> Result<Float> {
    Ok(period_integrals(eps, ctx)?.level())
}

/// The level function on the geometric scan grid, at reduced precision.
pub fn level_scan(ctx: &PrecCtx) -> Result<Vec<(f64, f64)>> {
    let coarse = ctx.coarse();
    let gl = GaussLegendre::new(&coarse);
    let ratio = (SCAN_HI / SCAN_LO).ln() / (SCAN_POINTS - 1) as f64;
    (0..SCAN_POINTS)
        .map(|j| {
            let eps = SCAN_LO * (ratio * j as f64).exp();
            let lv = period_integrals_with(&coarse.real(eps), &gl, &coarse)?.level();
            Ok((eps, lv.to_f64()))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SelfDualSpectrum {
    pub n: u32,
    pub eps: Float,
    pub alpha: Float,
    pub beta: Float,
    pub lambda: Float,
    pub a: Float,
    pub a_tilde: Float,
    pub b: Float,
    pub b_tilde: Float,
}

impl SelfDualSpectrum {
    /// The record at a given ε, quantized or not.
    pub fn at(n: u32, eps: &Float, ctx: &PrecCtx) -> Result<Self> {
        let per = period_integrals(eps, ctx)?;
        let (alpha, beta) = alpha_beta(eps, ctx)?;
        Ok(SelfDualSpectrum {
            n,
            eps: eps.clone(),
            alpha,
            beta,
            lambda: per.lambda(),
            a: per.a,
            a_tilde: per.a_tilde,
            b: per.b,
            b_tilde: per.b_tilde,
        })
    }

    pub fn log_eps(&self) -> Float {
        Float::with_val(self.eps.prec(), self.eps.ln_ref())
    }

    /// Aλ - Ã - (n + 1).
    pub fn level_residual(&self) -> Float {
        let p = self.eps.prec();
        Float::with_val(p, &self.a * &self.lambda) - &self.a_tilde - (self.n + 1)
    }

    /// B̃ - λB.
    pub fn cycle_residual(&self) -> Float {
        let p = self.eps.prec();
        Float::with_val(p, &self.b_tilde - Float::with_val(p, &self.lambda * &self.b))
    }

    pub fn abba(&self) -> Float {
        let p = self.eps.prec();
        Float::with_val(p, &self.a * &self.b_tilde) - Float::with_val(p, &self.b * &self.a_tilde)
    }
}

/// Solves Aλ - Ã = n + 1 for ε > 4: the first sign change on the scan grid
/// is refined by Illinois iteration in log ε at full precision.
pub fn quantize_selfdual(n: u32, ctx: &PrecCtx) -> Result<SelfDualSpectrum> {
    let target = (n + 1) as f64;
    let scan = level_scan(ctx)?;
    let bracket = scan.windows(2).find(|w| (w[0].1 - target) * (w[1].1 - target) <= 0.0);
    let Some(w) = bracket else {
        return Err(Error::Bracketing { level: n, lo: SCAN_LO, hi: SCAN_HI });
    };
    let p = ctx.bits();
    let gl = GaussLegendre::new(ctx);
    let f = |x: &Float| -> Result<Float> {
        let eps = Float::with_val(p, x.exp_ref());
        Ok(period_integrals_with(&eps, &gl, ctx)?.level() - (n + 1))
    };
    let mut a = ctx.real(w[0].0.ln());
    let mut b = ctx.real(w[1].0.ln());
    let mut fa = f(&a)?;
    let mut fb = f(&b)?;
    let stop = ctx.real(ctx.eps()) << 8u32;
    let mut side = 0i32;
    for _ in 0..MAX_ROOT_ITER {
        let num = Float::with_val(p, &fb * Float::with_val(p, &b - &a));
        let c = Float::with_val(p, &b - num / Float::with_val(p, &fb - &fa));
        let fc = f(&c)?;
        if fc.is_zero() || Float::with_val(p, &b - &a).abs() < stop {
            return SelfDualSpectrum::at(n, &Float::with_val(p, c.exp_ref()), ctx);
        }
        if fc.is_sign_negative() == fb.is_sign_negative() {
            b = c;
            fb = fc;
            if side == 1 {
                fa /= 2u32;
            }
            side = 1;
        } else {
            a = std::mem::replace(&mut b, c);
            fa = std::mem::replace(&mut fb, fc);
            side = -1;
        }
        if fb.clone().abs() < ctx.tol() * 1e-3 {
            return SelfDualSpectrum::at(n, &Float::with_val(p, b.exp_ref()), ctx);
        }
    }
    Err(Error::Bracketing { level: n, lo: w[0].0, hi: w[1].0 })
}
