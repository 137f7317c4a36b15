//! Spectral problem at complex coupling.
//!
//! The Wronskian W(u, ε) = χ(u/q²)χ̌(u) - χ̌(u/q²)χ(u) factorizes as
//! ϱ(ε) θ₁(su) θ₁(u/s). Writing s = e^{2πbσ}, the equation W(s, ε) = 0
//! defines a multivalued ε(σ) whose branches ε_k are the sheets. Eigenvalues
//! are the points of real σ ∈ (0, sin θ) where G = χ/χ̌ at u = s is purely
//! imaginary (even states) or real (odd states).

mod orbit;
mod quantize;
mod seed;

pub use orbit::{trace_orbit, trace_orbit_from, Orbit};
pub use quantize::{excluded_endpoints, quantize, ExcludedEndpoint};
pub use seed::{printed_seed, sheet_seed, Endpoint, SeedSeries};

use rug::{Complex, Float};

use crate::chi::{g_eval_series, ChiPolySeq, ChiSeries, GValue, SeriesValue};
use crate::error::{Error, Result};
use crate::precision::{cabs, theta1, ModularParam, PrecCtx};

/// Newton iteration budget for one root.
pub const NEWTON_MAX_ITER: usize = 60;

/// W(u, ε), ∂W/∂ε and the size of the two products it is the difference of.
pub fn wronskian_eval(u: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<SeriesValue> {
    ChiSeries::new(eps, mp.q(), ctx)?.wronskian(u)
}

/// Coefficient of u⁻¹ in the Laurent expansion of W(u, ε) at nome q:
/// Σ_m (χ_m/(q⁻²;q⁻²)_m)² (q^{-2m} - q^{2m+2}).
pub fn wronskian_residue(eps: &Complex, q: &Complex, ctx: &PrecCtx) -> Result<Complex> {
    if cabs(q) >= 1 {
        return Err(Error::Divergent);
    }
    let p = ctx.bits();
    let tiny = ctx.eps();
    let q2 = Complex::with_val(p, q.square_ref());
    let qi2 = Complex::with_val(p, q2.recip_ref());
    let mut order = 32;
    loop {
        let seq = ChiPolySeq::with_q(eps, q, order, ctx)?;
        let mut sum = Complex::new(p);
        let mut poch = Complex::with_val(p, 1);
        let mut qi2m = Complex::with_val(p, 1);
        let mut q2m = Complex::with_val(p, &q2);
        let mut small = 0;
        for (m, chi) in seq.values().iter().enumerate() {
            if m > 0 {
                qi2m *= &qi2;
                q2m *= &q2;
                poch *= Complex::with_val(p, 1 - &qi2m);
            }
            let c = Complex::with_val(p, chi / &poch).square();
            let t = c * Complex::with_val(p, &qi2m - &q2m);
            sum += &t;
            if cabs(&t) <= Float::with_val(p, &tiny * cabs(&sum)) {
                small += 1;
                if small >= 3 {
                    return Ok(sum);
                }
            } else {
                small = 0;
            }
        }
        if order >= ctx.max_terms() {
            return Err(Error::RaiseTerms { terms: order });
        }
        order = (2 * order).min(ctx.max_terms());
    }
}

/// Course of a Newton solve: the root and |W|/scale before each step.
#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub eps: Complex,
    pub iterations: usize,
    pub residuals: Vec<f64>,
}

/// Solves W(e^{2πbσ}, ε) = 0 for ε starting from `eps0`.
pub fn solve_eps(sigma: &Float, eps0: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<Complex> {
    Ok(solve_eps_report(sigma, eps0, mp, ctx)?.eps)
}

pub fn solve_eps_report(sigma: &Float, eps0: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<NewtonReport> {
    let s = mp.s_of_sigma(&Float::with_val(ctx.bits(), sigma));
    newton_at(&s, eps0, mp, ctx, sigma.to_f64())
}

/// Damped Newton in ε at fixed u = s. `sigma` only labels errors.
pub(crate) fn newton_at(s: &Complex, eps0: &Complex, mp: &ModularParam, ctx: &PrecCtx, sigma: f64) -> Result<NewtonReport> {
    let p = ctx.bits();
    let noise = ctx.eps() << 8u32;
    let step_tol = ctx.eps() << 12u32;
    let mut eps = Complex::with_val(p, eps0);
    let mut w = wronskian_eval(s, &eps, mp, ctx)?;
    let mut residuals = Vec::new();
    for it in 0..NEWTON_MAX_ITER {
        let rel = Float::with_val(p, cabs(&w.value) / &w.scale);
        residuals.push(rel.to_f64());
        let emag = cabs(&eps).max(&Float::with_val(p, 1)).clone();
        if w.deriv.is_zero() || Float::with_val(p, cabs(&w.deriv) * &emag) < Float::with_val(p, &w.scale * &noise) {
            if rel <= noise {
                return Ok(NewtonReport { eps, iterations: it, residuals });
            }
            return Err(Error::NearBranchPoint { sigma });
        }
        let delta = Complex::with_val(p, &w.value / &w.deriv);
        let dmag = cabs(&delta);
        if rel <= noise || dmag <= Float::with_val(p, &step_tol * &emag) {
            eps -= delta;
            return Ok(NewtonReport { eps, iterations: it + 1, residuals });
        }
        let mut lambda = Float::with_val(p, 1);
        let mut accepted = None;
        for _ in 0..30 {
            let cand = Complex::with_val(p, &eps - Complex::with_val(p, &delta * &lambda));
            let wc = wronskian_eval(s, &cand, mp, ctx)?;
            let rc = Float::with_val(p, cabs(&wc.value) / &wc.scale);
            if rc < rel {
                accepted = Some((cand, wc));
                break;
            }
            lambda /= 2u32;
        }
        match accepted {
            Some((cand, wc)) => {
                eps = cand;
                w = wc;
            }
            None => return Err(Error::NewtonFailed { sigma, iterations: it + 1 }),
        }
    }
    Err(Error::NewtonFailed { sigma, iterations: NEWTON_MAX_ITER })
}

/// Parity ξ of an eigenstate under x → -x.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn xi(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" | "+1" | "1" => Ok(Parity::Even),
            "odd" | "-1" => Ok(Parity::Odd),
            _ => Err(Error::InvalidArgument(format!("unknown parity '{s}'"))),
        }
    }
}

/// A point (σ, ε) on sheet k; `parity` is set when the point is quantized.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPoint {
    pub sheet: u32,
    pub sigma: Float,
    pub eps: Complex,
    pub parity: Option<Parity>,
}

/// Residuals of a spectral point: |W|/scale at (s, ε) and the component of
/// G/|G| that quantization sets to zero.
#[derive(Clone, Debug)]
pub struct PointCheck {
    pub wronskian: f64,
    pub g_component: f64,
    pub g: Complex,
}

impl SpectralPoint {
    pub fn s(&self, mp: &ModularParam) -> Complex {
        mp.s_of_sigma(&self.sigma)
    }

    pub fn check(&self, mp: &ModularParam, ctx: &PrecCtx) -> Result<PointCheck> {
        let s = self.s(mp);
        let mut series = ChiSeries::new(&self.eps, mp.q(), ctx)?;
        let w = series.wronskian(&s)?;
        let GValue { value: g, .. } = g_eval_series(&mut series, &s, ctx)?;
        let unit = Complex::with_val(ctx.bits(), &g / cabs(&g));
        let g_component = match self.parity {
            Some(Parity::Even) => unit.real().to_f64().abs(),
            Some(Parity::Odd) => unit.imag().to_f64().abs(),
            None => 0.0,
        };
        Ok(PointCheck { wronskian: (cabs(&w.value) / w.scale).to_f64(), g_component, g })
    }
}

/// Distance of s = e^{2πbσ} from the set ±q^Z, measured in the exponent
/// -2ibσ = n b² + m (n, m integers).
pub fn simplicity_distance(sigma: &Float, mp: &ModularParam) -> f64 {
    let p = sigma.prec();
    let z = Complex::with_val(p, mp.b() * sigma).mul_i(true) * 2u32;
    let b2 = Complex::with_val(p, mp.b().square_ref());
    let n = Float::with_val(p, z.imag() / b2.imag()).round();
    let m = Float::with_val(p, z.real() - Float::with_val(p, &n * b2.real())).round();
    let r = z - b2 * n - m;
    cabs(&r).to_f64()
}

/// Distance of the exponent w from the zero set {2n log q + 2πik} of θ₁.
pub fn theta_zero_distance(w: &Complex, log_q: &Complex) -> f64 {
    let p = w.prec().0;
    let two_lq = Complex::with_val(p, log_q * 2u32);
    let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
    let n = Float::with_val(p, w.real() / two_lq.real()).round();
    let k = Float::with_val(p, w.imag() - Float::with_val(p, &n * two_lq.imag()));
    let k = (k / &two_pi).round();
    let r = Complex::with_val(p, w - two_lq * n) - Complex::with_val(p, (0, two_pi * k));
    cabs(&r).to_f64()
}

/// W(u) = ϱ θ₁(su) θ₁(u/s) at a root (σ, ε).
#[derive(Clone, Debug, PartialEq)]
pub struct WronskianFactorization {
    pub sigma: Complex,
    pub s: Complex,
    pub rho: Complex,
    pub eps: Complex,
}

/// ϱ from three test points and the relative spread between them.
#[derive(Clone, Debug)]
pub struct RhoEstimate {
    pub rho: Complex,
    pub spread: f64,
}

/// Test points x₀ of u₀ = e^{2πbx₀}.
pub const RHO_TEST_POINTS: [f64; 3] = [0.1, 0.23, 0.37];

impl WronskianFactorization {
    pub fn new(sigma: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<Self> {
        let p = ctx.bits();
        let two_pi = ctx.pi() * 2u32;
        let s = (Complex::with_val(p, mp.b() * sigma) * two_pi).exp();
        let w = wronskian_eval(&s, eps, mp, ctx)?;
        let rel = (cabs(&w.value) / &w.scale).to_f64();
        if rel > crate::chi::zero_floor(ctx) {
            return Err(Error::InvalidArgument(format!("W(s, eps) = {rel:e} relative: not a root")));
        }
        let est = rho_for(sigma, eps, mp, ctx)?;
        if est.rho.is_zero() {
            return Err(Error::Pole { what: "rho", magnitude: 0.0 });
        }
        Ok(WronskianFactorization { sigma: sigma.clone(), s, rho: est.rho, eps: eps.clone() })
    }
}

/// Re-derives ϱ for a factorization, with the spread over the test points.
pub fn rho_extract(fact: &WronskianFactorization, mp: &ModularParam, ctx: &PrecCtx) -> Result<RhoEstimate> {
    rho_for(&fact.sigma, &fact.eps, mp, ctx)
}

fn rho_for(sigma: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<RhoEstimate> {
    let p = ctx.bits();
    let two_pi_b = Complex::with_val(p, mp.b() * (ctx.pi() * 2u32));
    let mut series = ChiSeries::new(eps, mp.q(), ctx)?;
    let mut vals = Vec::new();
    for x0 in RHO_TEST_POINTS {
        let x0 = ctx.real(x0);
        let w0 = Complex::with_val(p, &two_pi_b * &x0);
        let w1 = Complex::with_val(p, &two_pi_b * Complex::with_val(p, sigma + &x0));
        let w2 = Complex::with_val(p, &two_pi_b * Complex::with_val(p, &x0 - sigma));
        if theta_zero_distance(&w1, mp.log_q()) < 1e-3 || theta_zero_distance(&w2, mp.log_q()) < 1e-3 {
            return Err(Error::ThetaZero);
        }
        let u0 = w0.exp();
        let w = series.wronskian(&u0)?;
        let den = theta1(&w1, mp.log_q(), ctx)? * theta1(&w2, mp.log_q(), ctx)?;
        vals.push(w.value / den);
    }
    let r0 = vals[0].clone();
    let m = cabs(&r0);
    let spread = vals[1..]
        .iter()
        .map(|v| (cabs(&Complex::with_val(p, v - &r0)) / &m).to_f64())
        .fold(0.0, f64::max);
    if spread > 1e3 * ctx.tol() {
        return Err(Error::RhoSpread { spread });
    }
    Ok(RhoEstimate { rho: r0, spread })
}
