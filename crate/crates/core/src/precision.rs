//! Working precision, the coupling data b, q, q̄, q-Pochhammer symbols and θ₁.

use rug::float::Constant;
use rug::ops::NegAssign;
use rug::{Assign, Complex, Float};

use crate::error::{Error, Result};

pub const DEFAULT_BITS: u32 = 192;
pub const DEFAULT_TOL: f64 = 1e-40;
pub const DEFAULT_MAX_TERMS: usize = 4096;

/// Precision and tolerance policy shared by every computation.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecCtx {
    bits: u32,
    tol: f64,
    max_terms: usize,
}

/// Builds a context, rejecting tolerances the precision cannot reach.
pub fn make_context(bits: u32, tol: f64) -> Result<PrecCtx> {
    PrecCtx::new(bits, tol)
}

impl PrecCtx {
    pub fn new(bits: u32, tol: f64) -> Result<Self> {
        if bits < 64 {
            return Err(Error::InvalidContext(format!(
                "precision_bits = {bits} is below the minimum of 64"
            )));
        }
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidContext(format!("tol = {tol} must be positive")));
        }
        let floor = 2f64.powi(16 - bits as i32);
        if tol < floor {
            return Err(Error::InvalidContext(format!(
                "tol = {tol:e} is unreachable at {bits} bits (minimum {floor:e})"
            )));
        }
        Ok(PrecCtx { bits, tol, max_terms: DEFAULT_MAX_TERMS })
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Result<Self> {
        if max_terms < 16 {
            return Err(Error::InvalidContext(format!("max_terms = {max_terms} is below 16")));
        }
        self.max_terms = max_terms;
        Ok(self)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// Twice the bits and half the tolerance.
    pub fn refined(&self) -> PrecCtx {
        PrecCtx { bits: 2 * self.bits, tol: self.tol / 2.0, max_terms: self.max_terms }
    }

    /// A cheaper context for scans and seeds.
    pub fn coarse(&self) -> PrecCtx {
        let bits = 64.max(self.bits / 2);
        let tol = self.tol.max(2f64.powi(24 - bits as i32));
        PrecCtx { bits, tol, max_terms: self.max_terms }
    }

    /// Relative rounding level with a few guard bits; series are summed to
    /// this level, well below `tol`.
    pub fn eps(&self) -> Float {
        Float::with_val(self.bits, 1) >> (self.bits as i32 - 4)
    }

    pub fn real<T>(&self, v: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits, v)
    }

    pub fn complex<T>(&self, v: T) -> Complex
    where
        Complex: Assign<T>,
    {
        Complex::with_val(self.bits, v)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, Constant::Pi)
    }
}

impl Default for PrecCtx {
    fn default() -> Self {
        PrecCtx { bits: DEFAULT_BITS, tol: DEFAULT_TOL, max_terms: DEFAULT_MAX_TERMS }
    }
}

/// Coupling data b = e^{iθ}, q = e^{iπb²}, q̄ = e^{-iπ/b²}.
///
/// `log_q` and `log_qbar` are the exponents iπb² and -iπb⁻²; θ₁ and all
/// half-integer powers are taken through them.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularParam {
    theta: Float,
    b: Complex,
    q: Complex,
    qbar: Complex,
    log_q: Complex,
    log_qbar: Complex,
}

impl ModularParam {
    pub fn new(theta: f64, ctx: &PrecCtx) -> Result<Self> {
        Self::from_theta(&ctx.real(theta), ctx)
    }

    pub fn from_theta(theta: &Float, ctx: &PrecCtx) -> Result<Self> {
        let half_pi = ctx.pi() / 2u32;
        if theta.is_sign_negative() || *theta >= half_pi || theta.is_zero() {
            return Err(Error::InvalidCoupling(theta.to_f64()));
        }
        let p = ctx.bits();
        let b = Complex::with_val(p, (theta.clone().cos(), theta.clone().sin()));
        let ipi = Complex::with_val(p, (0, ctx.pi()));
        let log_q = Complex::with_val(p, &ipi * b.clone().square());
        let log_qbar = Complex::with_val(p, -(ipi / b.clone().square()));
        let q = log_q.clone().exp();
        let qbar = log_qbar.clone().exp();
        if cabs(&q) >= 1 || cabs(&qbar) >= 1 {
            return Err(Error::InvalidCoupling(theta.to_f64()));
        }
        Ok(ModularParam { theta: theta.clone(), b, q, qbar, log_q, log_qbar })
    }

    /// θ = π/4, the coupling of the reference tables.
    pub fn quarter_pi(ctx: &PrecCtx) -> Self {
        Self::from_theta(&(ctx.pi() / 4u32), ctx).expect("pi/4 is admissible")
    }

    /// The conjugate problem: b → b⁻¹ with q and q̄ exchanged.
    pub fn dual(&self) -> Self {
        let b = self.b.clone().recip();
        ModularParam {
            theta: -self.theta.clone(),
            b,
            q: self.qbar.clone(),
            qbar: self.q.clone(),
            log_q: self.log_qbar.clone(),
            log_qbar: self.log_q.clone(),
        }
    }

    /// The same coupling recomputed at the precision of `ctx`.
    pub fn at_precision(&self, ctx: &PrecCtx) -> Result<Self> {
        let theta = Float::with_val(ctx.bits(), &self.theta);
        if theta.is_sign_negative() {
            Ok(Self::from_theta(&(-theta), ctx)?.dual())
        } else {
            Self::from_theta(&theta, ctx)
        }
    }

    pub fn theta(&self) -> &Float {
        &self.theta
    }
    pub fn b(&self) -> &Complex {
        &self.b
    }
    pub fn q(&self) -> &Complex {
        &self.q
    }
    pub fn qbar(&self) -> &Complex {
        &self.qbar
    }
    pub fn log_q(&self) -> &Complex {
        &self.log_q
    }
    pub fn log_qbar(&self) -> &Complex {
        &self.log_qbar
    }

    /// sin θ, the right end of the principal σ domain.
    pub fn sin_theta(&self) -> Float {
        self.b.imag().clone().abs()
    }

    /// s = e^{2πbσ}.
    pub fn s_of_sigma(&self, sigma: &Float) -> Complex {
        let p = sigma.prec();
        let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
        (Complex::with_val(p, &self.b * sigma) * two_pi).exp()
    }

    /// Whether θ lies in [π/8, π/2), where the series converge quickly.
    pub fn in_supported_range(&self) -> bool {
        let p = self.theta.prec();
        let lo = Float::with_val(p, Constant::Pi) / 8u32;
        self.theta >= lo
    }
}

/// Length of a q-Pochhammer product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PochLen {
    Finite(usize),
    Infinite,
}

/// (x; q)_n = ∏_{i<n} (1 - x qⁱ).
pub fn pochhammer_q(x: &Complex, q: &Complex, n: PochLen, ctx: &PrecCtx) -> Result<Complex> {
    let p = ctx.bits();
    let mut prod = Complex::with_val(p, 1);
    let mut xq = Complex::with_val(p, x);
    match n {
        PochLen::Finite(n) => {
            for _ in 0..n {
                prod *= Complex::with_val(p, 1 - &xq);
                xq *= q;
            }
        }
        PochLen::Infinite => {
            if cabs(q) >= 1 {
                return Err(Error::Divergent);
            }
            let eps = ctx.eps();
            let mut small = 0;
            let mut i = 0;
            loop {
                if i >= ctx.max_terms() {
                    return Err(Error::RaiseTerms { terms: i });
                }
                prod *= Complex::with_val(p, 1 - &xq);
                if cabs(&xq) < eps {
                    small += 1;
                    if small >= 3 {
                        break;
                    }
                } else {
                    small = 0;
                }
                xq *= q;
                i += 1;
            }
        }
    }
    Ok(prod)
}

/// θ₁(u, q) = (1/i) Σ_{n∈Z} (-1)ⁿ q^{(n+1/2)²} u^{n+1/2} with u = e^{w},
/// q = e^{log_q}; u^{n+1/2} is read as e^{w(n+1/2)}.
pub fn theta1(w: &Complex, log_q: &Complex, ctx: &PrecCtx) -> Result<Complex> {
    if !log_q.real().is_sign_negative() || log_q.real().is_zero() {
        return Err(Error::Divergent);
    }
    let p = ctx.bits();
    let eps = ctx.eps();
    let mut sum = Complex::new(p);
    let mut small = 0;
    for n in 0..ctx.max_terms() {
        // terms n and -n-1 combine into 2 q^{h²} sinh(h w)
        let h = n as f64 + 0.5;
        let mut t = Complex::with_val(p, log_q * (h * h)).exp();
        t *= Complex::with_val(p, w * h).sinh();
        t *= 2u32;
        if n % 2 == 1 {
            t.neg_assign();
        }
        sum += &t;
        if cabs(&t) <= eps.clone() * cabs(&sum) {
            small += 1;
            if small >= 3 {
                return Ok(sum.mul_i(true));
            }
        } else {
            small = 0;
        }
    }
    Err(Error::RaiseTerms { terms: ctx.max_terms() })
}

/// |z| at the precision of z.
pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}
