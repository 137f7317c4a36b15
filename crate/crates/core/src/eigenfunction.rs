//! The eigenfunction at a quantized point,
//!
//! ψ(x) = b⁻¹ e^{πiσ² - ξπi/4} e^{2πηx + iπx²}
//!        (χ̌(u) χ̄(ū) + ξ χ(u) χ̌̄(ū)) / (θ₁(su) θ₁(u/s)),
//!
//! with u = e^{2πbx}, ū = e^{2πx/b}, η = (b + b⁻¹)/2. Barred factors are χ
//! and χ̌ taken at (ū, conj ε, q̄). ψ solves
//! ψ(x + ib) + ψ(x - ib) = (ε - 2cosh 2πbx) ψ(x) and the same equation with
//! b → b⁻¹, ε → conj ε.

use rug::{Complex, Float};

use crate::chi::{ChiSeries, SeriesValue};
use crate::error::{Error, Result};
use crate::precision::{cabs, theta1, ModularParam, PrecCtx};
use crate::spectral::{theta_zero_distance, Parity, SpectralPoint, WronskianFactorization};

/// Distance (in the θ₁ exponent) below which ψ is evaluated as a limit.
const NEAR_ZERO: f64 = 1e-9;
/// Offsets of the symmetric Richardson limit.
const LIMIT_STEP: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EigenfunctionParams {
    pub point: SpectralPoint,
    pub parity: Parity,
    pub eta: Complex,
    pub rho: Complex,
    pub mp: ModularParam,
}

impl EigenfunctionParams {
    pub fn new(point: &SpectralPoint, mp: &ModularParam, ctx: &PrecCtx) -> Result<Self> {
        let parity = point
            .parity
            .ok_or_else(|| Error::InvalidArgument("the spectral point carries no parity".into()))?;
        let p = ctx.bits();
        let eta = Complex::with_val(p, mp.b() + Complex::with_val(p, mp.b().recip_ref())) / 2u32;
        let sigma = Complex::with_val(p, &point.sigma);
        let fact = WronskianFactorization::new(&sigma, &point.eps, mp, ctx)?;
        Ok(EigenfunctionParams { point: point.clone(), parity, eta, rho: fact.rho, mp: mp.clone() })
    }

    /// The same state with another η (used to show that only one η works).
    pub fn with_eta(mut self, eta: Complex) -> Self {
        self.eta = eta;
        self
    }

    /// The same state with ε shifted; no longer an eigenvalue.
    pub fn detuned(mut self, delta: &Complex) -> Self {
        self.point.eps += delta;
        self
    }
}

struct Kernels {
    chi: ChiSeries,
    chibar: ChiSeries,
}

impl Kernels {
    fn new(p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<Self> {
        let eps_bar = Complex::with_val(ctx.bits(), p.point.eps.conj_ref());
        Ok(Kernels {
            chi: ChiSeries::new(&p.point.eps, p.mp.q(), ctx)?,
            chibar: ChiSeries::new(&eps_bar, p.mp.qbar(), ctx)?,
        })
    }

    /// χ̌(u)χ̄(ū) + ξχ(u)χ̌̄(ū) and the size of its two terms.
    fn numerator(&mut self, u: &Complex, ubar: &Complex, xi: i32) -> Result<(Complex, Float)> {
        let p = u.prec().0;
        let a: SeriesValue = self.chi.eval_check(u)?;
        let b = self.chibar.eval(ubar)?;
        let c = self.chi.eval(u)?;
        let d = self.chibar.eval_check(ubar)?;
        let t1 = Complex::with_val(p, &a.value * &b.value);
        let t2 = Complex::with_val(p, &c.value * &d.value) * xi;
        let scale = cabs(&t1) + cabs(&t2);
        Ok((t1 + t2, scale))
    }
}

/// ψ(x) for complex x.
pub fn psi_eval(x: &Complex, p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<Complex> {
    let mut k = Kernels::new(p, ctx)?;
    psi_with(&mut k, x, p, ctx)
}

fn psi_with(k: &mut Kernels, x: &Complex, p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<Complex> {
    let prec = ctx.bits();
    let two_pi_b = Complex::with_val(prec, p.mp.b() * (ctx.pi() * 2u32));
    let sigma = &p.point.sigma;
    let w1 = Complex::with_val(prec, &two_pi_b * Complex::with_val(prec, x + sigma));
    let w2 = Complex::with_val(prec, &two_pi_b * Complex::with_val(prec, x - sigma));
    let dist = theta_zero_distance(&w1, p.mp.log_q()).min(theta_zero_distance(&w2, p.mp.log_q()));
    if dist < NEAR_ZERO {
        return psi_limit(k, x, p, ctx);
    }
    psi_direct(k, x, p, ctx)
}

fn psi_direct(k: &mut Kernels, x: &Complex, p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<Complex> {
    let prec = ctx.bits();
    let pi = ctx.pi();
    let b = p.mp.b();
    let two_pi_b = Complex::with_val(prec, b * (pi.clone() * 2u32));
    let two_pi_binv = Complex::with_val(prec, b.recip_ref()) * (pi.clone() * 2u32);
    let sigma = &p.point.sigma;
    let u = Complex::with_val(prec, &two_pi_b * x).exp();
    let ubar = Complex::with_val(prec, &two_pi_binv * x).exp();
    let xi = p.parity.xi();
    let (num, _) = k.numerator(&u, &ubar, xi)?;
    let w1 = Complex::with_val(prec, &two_pi_b * Complex::with_val(prec, x + sigma));
    let w2 = Complex::with_val(prec, &two_pi_b * Complex::with_val(prec, x - sigma));
    let den = theta1(&w1, p.mp.log_q(), ctx)? * theta1(&w2, p.mp.log_q(), ctx)?;
    if den.is_zero() {
        return Err(Error::Pole { what: "theta denominator", magnitude: 0.0 });
    }
    // b⁻¹ e^{πiσ² - ξπi/4 + 2πηx + iπx²}
    let sig2 = Float::with_val(prec, sigma.square_ref());
    let quarter = Float::with_val(prec, &pi / 4u32) * xi;
    let mut phase = Complex::with_val(prec, (0, Float::with_val(prec, &pi * &sig2) - quarter));
    phase += Complex::with_val(prec, &p.eta * x) * (pi.clone() * 2u32);
    phase += Complex::with_val(prec, x.square_ref()) * Complex::with_val(prec, (0, pi));
    let pref = phase.exp() / b;
    Ok(pref * num / den)
}

/// ψ at a removable zero of the denominator: symmetric offsets ±h, h/2,
/// h/4 combined by Richardson extrapolation (error O(h⁶)).
fn psi_limit(k: &mut Kernels, x: &Complex, p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<Complex> {
    let prec = ctx.bits();
    let two_pi_b = Complex::with_val(prec, p.mp.b() * (ctx.pi() * 2u32));
    let two_pi_binv = Complex::with_val(prec, p.mp.b().recip_ref()) * (ctx.pi() * 2u32);
    let u = Complex::with_val(prec, &two_pi_b * x).exp();
    let ubar = Complex::with_val(prec, &two_pi_binv * x).exp();
    let (num, scale) = k.numerator(&u, &ubar, p.parity.xi())?;
    let rel = Float::with_val(prec, cabs(&num) / &scale).to_f64();
    if rel > ctx.tol().sqrt() {
        return Err(Error::Pole { what: "theta denominator (numerator does not cancel)", magnitude: rel });
    }
    let mut avg = Vec::with_capacity(3);
    for j in 0..3 {
        let h = Float::with_val(prec, LIMIT_STEP) >> j;
        let xp = Complex::with_val(prec, x + &h);
        let xm = Complex::with_val(prec, x - &h);
        let s = psi_direct(k, &xp, p, ctx)? + psi_direct(k, &xm, p, ctx)?;
        avg.push(s / 2u32);
    }
    // even in h: A(h) = ψ + c₂h² + c₄h⁴ + …
    let r1 = (Complex::with_val(prec, &avg[1] * 4u32) - &avg[0]) / 3u32;
    let r2 = (Complex::with_val(prec, &avg[2] * 4u32) - &avg[1]) / 3u32;
    Ok((r2 * 16u32 - r1) / 15u32)
}

/// Relative residuals of the two difference equations at real x.
pub fn psi_residual(x: &Float, p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<(Float, Float)> {
    let prec = ctx.bits();
    let mut k = Kernels::new(p, ctx)?;
    let b = p.mp.b().clone();
    let binv = Complex::with_val(prec, b.recip_ref());
    let eps_bar = Complex::with_val(prec, p.point.eps.conj_ref());
    let x = Complex::with_val(prec, x);
    let psi0 = psi_with(&mut k, &x, p, ctx)?;
    let mut out = Vec::with_capacity(2);
    for (shift, eps) in [(&b, &p.point.eps), (&binv, &eps_bar)] {
        let ishift = Complex::with_val(prec, shift.mul_i_ref(false));
        let up = psi_with(&mut k, &Complex::with_val(prec, &x + &ishift), p, ctx)?;
        let dn = psi_with(&mut k, &Complex::with_val(prec, &x - &ishift), p, ctx)?;
        let arg = Complex::with_val(prec, shift * &x) * (ctx.pi() * 2u32);
        let pot = Complex::with_val(prec, eps - arg.cosh() * 2u32);
        let rhs = pot * &psi0;
        let scale = cabs(&up) + cabs(&dn) + cabs(&rhs);
        let r = cabs(&(up + dn - rhs));
        out.push(if scale.is_zero() { r } else { r / scale });
    }
    let r2 = out.pop().unwrap();
    let r1 = out.pop().unwrap();
    Ok((r1, r2))
}

/// Normalized numerator at the three points where the denominator of ψ
/// vanishes in the fundamental strip.
#[derive(Clone, Debug)]
pub struct PoleReport {
    pub at_s: f64,
    pub at_q2s: f64,
    pub at_sinv: f64,
}

impl PoleReport {
    pub fn max(&self) -> f64 {
        self.at_s.max(self.at_q2s).max(self.at_sinv)
    }
}

/// Checks χ̌(u)χ̄(ū) + ξχ(u)χ̌̄(ū) = 0 at u = s, q²s, s⁻¹ (ū = s̄, s̄, s̄⁻¹).
pub fn pole_cancellation_check(p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<PoleReport> {
    let prec = ctx.bits();
    let mut k = Kernels::new(p, ctx)?;
    let s = p.mp.s_of_sigma(&Float::with_val(prec, &p.point.sigma));
    let dual = p.mp.dual();
    let sbar = dual.s_of_sigma(&Float::with_val(prec, &p.point.sigma));
    let q2s = Complex::with_val(prec, p.mp.q().square_ref()) * &s;
    let sinv = Complex::with_val(prec, s.recip_ref());
    let sbar_inv = Complex::with_val(prec, sbar.recip_ref());
    let xi = p.parity.xi();
    let mut norm = |u: &Complex, ub: &Complex| -> Result<f64> {
        let (n, scale) = k.numerator(u, ub, xi)?;
        Ok((cabs(&n) / scale).to_f64())
    };
    Ok(PoleReport { at_s: norm(&s, &sbar)?, at_q2s: norm(&q2s, &sbar)?, at_sinv: norm(&sinv, &sbar_inv)? })
}

/// ψ₊(x + ib) / (-e^{-2πbx} ψ₊(x)) for the leading component
/// ψ₊(x) = e^{iπx² + 2πηx} χ_{q⁻¹}(u) χ̄(ū); tends to 1 as x → -∞ exactly
/// when 2πiηb - iπb² = iπ.
pub fn asymptotic_shift_ratio(x: &Float, p: &EigenfunctionParams, ctx: &PrecCtx) -> Result<Complex> {
    let prec = ctx.bits();
    let pi = ctx.pi();
    let b = p.mp.b();
    let two_pi_b = Complex::with_val(prec, b * (pi.clone() * 2u32));
    let two_pi_binv = Complex::with_val(prec, b.recip_ref()) * (pi.clone() * 2u32);
    let mut k = Kernels::new(p, ctx)?;
    let mut component = |x: &Complex| -> Result<Complex> {
        let u = Complex::with_val(prec, &two_pi_b * x).exp();
        let ubar = Complex::with_val(prec, &two_pi_binv * x).exp();
        let w = k.chi.wronskian(&u)?;
        let dual = k.chi.eval_check(&u)?.value / w.value;
        let bar = k.chibar.eval(&ubar)?.value;
        let mut phase = Complex::with_val(prec, x.square_ref()) * Complex::with_val(prec, (0, pi.clone()));
        phase += Complex::with_val(prec, &p.eta * x) * (pi.clone() * 2u32);
        Ok(phase.exp() * dual * bar)
    };
    let x0 = Complex::with_val(prec, x);
    let x1 = Complex::with_val(prec, &x0 + Complex::with_val(prec, b.mul_i_ref(false)));
    let a = component(&x1)?;
    let base = component(&x0)?;
    let fac = -Complex::with_val(prec, -(Complex::with_val(prec, &two_pi_b * &x0))).exp();
    Ok(a / (fac * base))
}
