//! Matrix form of the χ equation.
//!
//! With L(u) = ((1 - εu + u², -q²u²), (1, 0)) the column (f(u/q²), f(u))
//! is carried to (f(u), f(q²u)) by L(u)⁻¹, and the ordered products
//! M_n(u) = L(u) L(q²u) ⋯ L(q^{2(n-1)}u) converge to
//! M_∞(u) = ((χ(u/q²), 0), (χ(u), 0)). This gives χ without the series,
//! which is what the chi tests compare against.
//!
//! The ratio R(u) = f(u/q²)/f(u) obeys R(q²u) = q²u²/((1 - εu + u²) - R(u)).
//! Iterated from a generic start it tends to 0; started exactly on
//! R_χ(u) = χ(u/q²)/χ(u) it tends to 1.

use rug::{Complex, Float};

use crate::chi::ChiSeries;
use crate::error::{Error, Result};
use crate::precision::{cabs, ModularParam, PrecCtx};

/// A 2×2 complex matrix ((a, b), (c, d)).
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
}

impl TransferMatrix {
    pub fn identity(prec: u32) -> Self {
        TransferMatrix {
            a: Complex::with_val(prec, 1),
            b: Complex::new(prec),
            c: Complex::new(prec),
            d: Complex::with_val(prec, 1),
        }
    }

    pub fn mul(&self, o: &TransferMatrix) -> TransferMatrix {
        let p = self.a.prec().0;
        let m = |x: &Complex, y: &Complex, z: &Complex, w: &Complex| {
            Complex::with_val(p, x * y) + Complex::with_val(p, z * w)
        };
        TransferMatrix {
            a: m(&self.a, &o.a, &self.b, &o.c),
            b: m(&self.a, &o.b, &self.b, &o.d),
            c: m(&self.c, &o.a, &self.d, &o.c),
            d: m(&self.c, &o.b, &self.d, &o.d),
        }
    }

    pub fn det(&self) -> Complex {
        let p = self.a.prec().0;
        Complex::with_val(p, &self.a * &self.d) - Complex::with_val(p, &self.b * &self.c)
    }

    /// Largest entry modulus.
    pub fn norm(&self) -> Float {
        let mut n = cabs(&self.a);
        for e in [&self.b, &self.c, &self.d] {
            n.max_mut(&cabs(e));
        }
        n
    }
}

/// L(u) = ((1 - εu + u², -q²u²), (1, 0)).
pub fn l_eval(u: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> TransferMatrix {
    let p = ctx.bits();
    let u2 = Complex::with_val(p, u.square_ref());
    let a = Complex::with_val(p, 1 - Complex::with_val(p, eps * u)) + &u2;
    let b = -(u2 * mp.q().clone().square());
    TransferMatrix { a, b, c: Complex::with_val(p, 1), d: Complex::new(p) }
}

/// M_n(u) = L(u) L(q²u) ⋯ L(q^{2(n-1)}u).
pub fn m_n_eval(u: &Complex, n: usize, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<TransferMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("M_n needs n >= 1".into()));
    }
    let p = ctx.bits();
    let q2 = Complex::with_val(p, mp.q().square_ref());
    let mut v = Complex::with_val(p, u);
    let mut m = l_eval(&v, eps, mp, ctx);
    for _ in 1..n {
        v *= &q2;
        m = m.mul(&l_eval(&v, eps, mp, ctx));
    }
    Ok(m)
}

/// (χ(u), χ(u/q²)) from the limit of M_n(u).
pub fn chi_via_minf(u: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<(Complex, Complex)> {
    if cabs(mp.q()) >= 1 {
        return Err(Error::Divergent);
    }
    let p = ctx.bits();
    let q2 = Complex::with_val(p, mp.q().square_ref());
    let tiny = ctx.eps();
    let mut v = Complex::with_val(p, u);
    let mut m = l_eval(&v, eps, mp, ctx);
    let mut quiet = 0;
    for _ in 0..ctx.max_terms() {
        v *= &q2;
        let next = m.mul(&l_eval(&v, eps, mp, ctx));
        let scale = next.norm();
        let da = cabs(&Complex::with_val(p, &next.a - &m.a));
        let dc = cabs(&Complex::with_val(p, &next.c - &m.c));
        let off = cabs(&next.b).max(&cabs(&next.d)).clone();
        let bound = Float::with_val(p, &scale * &tiny);
        m = next;
        if da <= bound && dc <= bound && off <= bound {
            quiet += 1;
            if quiet >= 3 {
                return Ok((m.c, m.a));
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::RaisePrecision { order: ctx.max_terms() })
}

/// R(z), R(q²z), …, R(q^{2·steps}z) from R(z) = r0.
pub fn r_orbit(
    z: &Complex,
    r0: &Complex,
    steps: usize,
    eps: &Complex,
    mp: &ModularParam,
    ctx: &PrecCtx,
) -> Result<Vec<Complex>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be >= 1".into()));
    }
    let p = ctx.bits();
    let chi_z = ChiSeries::new(eps, mp.q(), ctx)?.eval(z)?;
    if Float::with_val(p, cabs(&chi_z.value) / &chi_z.scale) < ctx.eps() {
        return Err(Error::Pole { what: "chi at the trajectory start", magnitude: 0.0 });
    }
    let q2 = Complex::with_val(p, mp.q().square_ref());
    let mut u = Complex::with_val(p, z);
    let mut out = vec![Complex::with_val(p, r0)];
    for step in 1..=steps {
        let r = out.last().unwrap();
        let u2 = Complex::with_val(p, u.square_ref());
        let den = Complex::with_val(p, 1 - Complex::with_val(p, eps * &u)) + &u2 - r;
        if den.is_zero() {
            return Err(Error::TrajectoryBlowup { step });
        }
        let next = Complex::with_val(p, &q2 * u2) / den;
        if !next.real().is_finite() || !next.imag().is_finite() {
            return Err(Error::TrajectoryBlowup { step });
        }
        out.push(next);
        u *= &q2;
    }
    Ok(out)
}

/// R_χ(z) = χ(z/q²)/χ(z).
pub fn r_chi(z: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<Complex> {
    let p = ctx.bits();
    let mut s = ChiSeries::new(eps, mp.q(), ctx)?;
    let zq = Complex::with_val(p, z / mp.q().clone().square());
    let num = s.eval(&zq)?.value;
    Ok(num / s.eval(z)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RLimit {
    ToZero,
    ToOne,
    Undecided,
}

/// Limit of an R trajectory, and whether the start lay within 10·tol of
/// the exceptional value R_χ(z).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RClass {
    pub limit: RLimit,
    pub critical: bool,
}

pub const R_MARGIN: f64 = 1e-6;

/// Classifies the trajectory from R(z) = r0 after `steps` steps.
///
/// Critical starts drift off the exceptional trajectory after a few steps
/// (deviations grow like |q²u|⁻² per step), so for them the limit is read
/// from the closest approach to 1 rather than the last value.
pub fn classify_r_orbit(
    z: &Complex,
    r0: &Complex,
    steps: usize,
    eps: &Complex,
    mp: &ModularParam,
    ctx: &PrecCtx,
) -> Result<RClass> {
    let p = ctx.bits();
    let rc = r_chi(z, eps, mp, ctx)?;
    let dist = cabs(&Complex::with_val(p, r0 - &rc));
    let critical = dist <= 10.0 * ctx.tol() * cabs(&rc).to_f64().max(1.0);
    let seq = match r_orbit(z, r0, steps, eps, mp, ctx) {
        Ok(s) => s,
        Err(Error::TrajectoryBlowup { .. }) if critical => {
            return Ok(RClass { limit: RLimit::Undecided, critical })
        }
        Err(e) => return Err(e),
    };
    let near_one = |r: &Complex| cabs(&Complex::with_val(p, r - 1u32)) < R_MARGIN;
    let limit = if critical {
        if seq.iter().any(near_one) {
            RLimit::ToOne
        } else {
            RLimit::Undecided
        }
    } else {
        let last = seq.last().unwrap();
        if cabs(last) < R_MARGIN {
            RLimit::ToZero
        } else if near_one(last) {
            RLimit::ToOne
        } else {
            RLimit::Undecided
        }
    };
    Ok(RClass { limit, critical })
}
