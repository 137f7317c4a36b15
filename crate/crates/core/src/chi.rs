//! The regular solution χ_q(u, ε) of
//! `f(u/q²) + q²u² f(q²u) = (1 - εu + u²) f(u)`, normalised by f(0) = 1,
//! together with χ̌(u) = u⁻¹χ(u⁻¹), the dual solution χ_{q⁻¹} and G = χ/χ̌.
//!
//! χ is summed as Σ χ_n(ε)/(q⁻²;q⁻²)_n uⁿ, with the polynomials χ_n from
//! the three-term recursion `χ_{n+1} = εχ_n + (qⁿ - q⁻ⁿ)² χ_{n-1}`.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::{cabs, pochhammer_q, ModularParam, PochLen, PrecCtx};

/// χ_0(ε), …, χ_N(ε) and their ε-derivatives.
#[derive(Clone, Debug)]
pub struct ChiPolySeq {
    eps: Complex,
    q: Complex,
    values: Vec<Complex>,
    dvalues: Vec<Complex>,
}

impl ChiPolySeq {
    /// Builds the sequence for an arbitrary nome (also |q| > 1).
    pub fn with_q(eps: &Complex, q: &Complex, order: usize, ctx: &PrecCtx) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument(format!("order {order} < 2")));
        }
        let p = ctx.bits();
        let mut values = vec![Complex::with_val(p, 1), Complex::with_val(p, eps)];
        let mut dvalues = vec![Complex::new(p), Complex::with_val(p, 1)];
        let qinv = Complex::with_val(p, q.recip_ref());
        let mut qn = Complex::with_val(p, q);
        let mut qin = qinv.clone();
        for n in 1..order {
            let a = Complex::with_val(p, &qn - &qin).square();
            let v = Complex::with_val(p, eps * &values[n]) + Complex::with_val(p, &a * &values[n - 1]);
            let dv = Complex::with_val(p, &values[n] + Complex::with_val(p, eps * &dvalues[n]))
                + Complex::with_val(p, &a * &dvalues[n - 1]);
            if !finite(&v) || !finite(&dv) {
                return Err(Error::RaisePrecision { order: n + 1 });
            }
            values.push(v);
            dvalues.push(dv);
            qn *= q;
            qin *= &qinv;
        }
        Ok(ChiPolySeq { eps: eps.clone(), q: q.clone(), values, dvalues })
    }

    pub fn eps(&self) -> &Complex {
        &self.eps
    }
    pub fn q(&self) -> &Complex {
        &self.q
    }
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }
    pub fn values(&self) -> &[Complex] {
        &self.values
    }
    pub fn dvalues(&self) -> &[Complex] {
        &self.dvalues
    }
}

pub fn chi_poly_seq(eps: &Complex, mp: &ModularParam, order: usize, ctx: &PrecCtx) -> Result<ChiPolySeq> {
    ChiPolySeq::with_q(eps, mp.q(), order, ctx)
}

/// A series value with its ε-derivative and the largest term magnitude
/// met while summing (the scale against which cancellation is judged).
#[derive(Clone, Debug)]
pub struct SeriesValue {
    pub value: Complex,
    pub deriv: Complex,
    pub scale: Float,
}

/// Coefficients c_n = χ_n/(q⁻²;q⁻²)_n for fixed (ε, q), extended on demand
/// so that many arguments can share one recursion.
#[derive(Clone, Debug)]
pub struct ChiSeries {
    prec: u32,
    eps: Complex,
    q: Complex,
    qinv: Complex,
    qinv2: Complex,
    qn: Complex,
    qin: Complex,
    qin2: Complex,
    poch: Complex,
    chi: [Complex; 2],
    dchi: [Complex; 2],
    coef: Vec<Complex>,
    dcoef: Vec<Complex>,
    eps_rel: Float,
    max_terms: usize,
}

impl ChiSeries {
    pub fn new(eps: &Complex, q: &Complex, ctx: &PrecCtx) -> Result<Self> {
        if cabs(q) >= 1 {
            return Err(Error::Divergent);
        }
        let p = ctx.bits();
        let qinv = Complex::with_val(p, q.recip_ref());
        let qinv2 = Complex::with_val(p, qinv.square_ref());
        Ok(ChiSeries {
            prec: p,
            eps: Complex::with_val(p, eps),
            q: Complex::with_val(p, q),
            qn: Complex::with_val(p, q),
            qin: qinv.clone(),
            qin2: qinv2.clone(),
            qinv,
            qinv2,
            poch: Complex::with_val(p, 1),
            chi: [Complex::with_val(p, 1), Complex::with_val(p, eps)],
            dchi: [Complex::new(p), Complex::with_val(p, 1)],
            coef: vec![Complex::with_val(p, 1)],
            dcoef: vec![Complex::new(p)],
            eps_rel: ctx.eps(),
            max_terms: ctx.max_terms(),
        })
    }

    pub fn eps(&self) -> &Complex {
        &self.eps
    }

    pub fn q(&self) -> &Complex {
        &self.q
    }

    /// Appends c_n for the next n; the state holds χ_{n-1}, χ_n.
    fn extend(&mut self) -> Result<()> {
        let p = self.prec;
        let n = self.coef.len();
        if n > 1 {
            // advance χ to index n using the coefficient of step n - 1
            let a = Complex::with_val(p, &self.qn - &self.qin).square();
            let v = Complex::with_val(p, &self.eps * &self.chi[1]) + Complex::with_val(p, &a * &self.chi[0]);
            let dv = Complex::with_val(p, &self.chi[1] + Complex::with_val(p, &self.eps * &self.dchi[1]))
                + Complex::with_val(p, &a * &self.dchi[0]);
            self.chi.swap(0, 1);
            self.chi[1] = v;
            self.dchi.swap(0, 1);
            self.dchi[1] = dv;
            self.qn *= &self.q;
            self.qin *= &self.qinv;
        }
        // (q⁻²;q⁻²)_n = (q⁻²;q⁻²)_{n-1} (1 - q^{-2n})
        self.poch *= Complex::with_val(p, 1 - &self.qin2);
        self.qin2 *= &self.qinv2;
        let c = Complex::with_val(p, &self.chi[1] / &self.poch);
        let dc = Complex::with_val(p, &self.dchi[1] / &self.poch);
        if !finite(&c) || !finite(&dc) {
            return Err(Error::RaisePrecision { order: n });
        }
        self.coef.push(c);
        self.dcoef.push(dc);
        Ok(())
    }

    /// χ(u) and ∂χ/∂ε.
    pub fn eval(&mut self, u: &Complex) -> Result<SeriesValue> {
        let p = self.prec;
        let mut sum = Complex::with_val(p, 1);
        let mut dsum = Complex::new(p);
        let mut scale = Float::with_val(p, 1);
        let mut dscale = Float::new(p);
        if u.is_zero() {
            return Ok(SeriesValue { value: sum, deriv: dsum, scale });
        }
        let mut un = Complex::with_val(p, 1);
        let mut small = 0;
        let mut n = 1;
        loop {
            if n >= self.max_terms {
                return Err(Error::RaiseTerms { terms: n });
            }
            if n >= self.coef.len() {
                self.extend()?;
            }
            un *= u;
            let t = Complex::with_val(p, &self.coef[n] * &un);
            let dt = Complex::with_val(p, &self.dcoef[n] * &un);
            sum += &t;
            dsum += &dt;
            let ta = cabs(&t);
            let dta = cabs(&dt);
            if !ta.is_finite() {
                return Err(Error::RaisePrecision { order: n });
            }
            if ta > scale {
                scale.clone_from(&ta);
            }
            if dta > dscale {
                dscale.clone_from(&dta);
            }
            if n >= 2 && ta <= Float::with_val(p, &scale * &self.eps_rel) && dta <= Float::with_val(p, &dscale * &self.eps_rel) {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            n += 1;
        }
        Ok(SeriesValue { value: sum, deriv: dsum, scale })
    }

    /// χ̌(u) = u⁻¹χ(u⁻¹) and its ε-derivative.
    pub fn eval_check(&mut self, u: &Complex) -> Result<SeriesValue> {
        if u.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let inv = Complex::with_val(self.prec, u.recip_ref());
        let mut v = self.eval(&inv)?;
        v.value *= &inv;
        v.deriv *= &inv;
        v.scale *= cabs(&inv);
        Ok(v)
    }

    /// The Wronskian [χ, χ̌](u) = χ(u/q²)χ̌(u) - χ̌(u/q²)χ(u).
    pub fn wronskian(&mut self, u: &Complex) -> Result<SeriesValue> {
        if u.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let p = self.prec;
        let uq = Complex::with_val(p, u * &self.qinv2);
        let a = self.eval(&uq)?;
        let b = self.eval_check(u)?;
        let c = self.eval_check(&uq)?;
        let d = self.eval(u)?;
        let ab = Complex::with_val(p, &a.value * &b.value);
        let cd = Complex::with_val(p, &c.value * &d.value);
        // magnitudes the computation passes through, so |W|/scale is a
        // rounding-relative residual even where a factor vanishes
        let scale = Float::with_val(p, &a.scale * &b.scale) + Float::with_val(p, &c.scale * &d.scale);
        let value = ab - cd;
        let deriv = Complex::with_val(p, &a.deriv * &b.value) + Complex::with_val(p, &a.value * &b.deriv)
            - Complex::with_val(p, &c.deriv * &d.value)
            - Complex::with_val(p, &c.value * &d.deriv);
        Ok(SeriesValue { value, deriv, scale })
    }
}

fn finite(z: &Complex) -> bool {
    z.real().is_finite() && z.imag().is_finite()
}

/// χ_q(u, ε) and ∂χ/∂ε.
pub fn chi_eval(u: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<(Complex, Complex)> {
    chi_eval_q(u, eps, mp.q(), ctx)
}

/// χ for an explicit nome, e.g. q̄ for the conjugate factors.
pub fn chi_eval_q(u: &Complex, eps: &Complex, q: &Complex, ctx: &PrecCtx) -> Result<(Complex, Complex)> {
    let v = ChiSeries::new(eps, q, ctx)?.eval(u)?;
    Ok((v.value, v.deriv))
}

/// χ̌(u) = u⁻¹χ(u⁻¹).
pub fn chi_check_eval(u: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<Complex> {
    Ok(ChiSeries::new(eps, mp.q(), ctx)?.eval_check(u)?.value)
}

/// Zero floor for denominators, relative to their local scale.
pub fn zero_floor(ctx: &PrecCtx) -> f64 {
    1e3 * ctx.tol()
}

/// The dual solution χ_{q⁻¹}(u) = χ̌(u)/[χ, χ̌](u).
pub fn chi_dual_eval(u: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<Complex> {
    chi_dual_eval_with_floor(u, eps, mp, ctx, zero_floor(ctx))
}

pub fn chi_dual_eval_with_floor(
    u: &Complex,
    eps: &Complex,
    mp: &ModularParam,
    ctx: &PrecCtx,
    floor: f64,
) -> Result<Complex> {
    let mut series = ChiSeries::new(eps, mp.q(), ctx)?;
    let w = series.wronskian(u)?;
    let rel = Float::with_val(ctx.bits(), cabs(&w.value) / &w.scale);
    if w.value.is_zero() || rel < floor {
        return Err(Error::Pole { what: "Wronskian", magnitude: rel.to_f64() });
    }
    let check = series.eval_check(u)?;
    Ok(check.value / w.value)
}

/// G = χ/χ̌ with a flag raised when |χ̌| sits below the zero floor.
#[derive(Clone, Debug)]
pub struct GValue {
    pub value: Complex,
    pub near_zero: bool,
}

pub fn g_eval(u: &Complex, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<GValue> {
    let mut series = ChiSeries::new(eps, mp.q(), ctx)?;
    g_eval_series(&mut series, u, ctx)
}

pub(crate) fn g_eval_series(series: &mut ChiSeries, u: &Complex, ctx: &PrecCtx) -> Result<GValue> {
    let num = series.eval(u)?;
    let den = series.eval_check(u)?;
    if den.value.is_zero() {
        return Err(Error::Pole { what: "chi-check", magnitude: 0.0 });
    }
    let rel = Float::with_val(ctx.bits(), cabs(&den.value) / &den.scale);
    Ok(GValue { value: num.value / den.value, near_zero: rel < zero_floor(ctx) })
}

/// Residual of χ_m χ_n = Σ_k c_k χ_{m+n-2k} and the size |χ_m χ_n|.
#[derive(Clone, Debug)]
pub struct MultResidual {
    pub residual: Float,
    pub scale: Float,
}

pub fn chi_mult_check(m: usize, n: usize, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<MultResidual> {
    if m > 12 || n > 12 {
        return Err(Error::InvalidArgument(format!("(m, n) = ({m}, {n}) exceeds 12")));
    }
    let (res, peak) = mult_terms(m, n, eps, mp, ctx)?;
    // The right-hand side cancels down from terms far larger than χ_m χ_n;
    // redo the sum with enough extra bits to cover that cancellation.
    let lost = if res.scale.is_zero() { 0 } else { (peak / &res.scale).log2().to_f64().ceil().max(0.0) as u32 };
    if lost == 0 {
        return Ok(res);
    }
    let fine = PrecCtx::new(ctx.bits() + lost + 32, ctx.tol())?;
    let mp_fine = mp.at_precision(&fine)?;
    let eps_fine = Complex::with_val(fine.bits(), eps);
    let (res, _) = mult_terms(m, n, &eps_fine, &mp_fine, &fine)?;
    Ok(MultResidual {
        residual: Float::with_val(ctx.bits(), &res.residual),
        scale: Float::with_val(ctx.bits(), &res.scale),
    })
}

fn mult_terms(m: usize, n: usize, eps: &Complex, mp: &ModularParam, ctx: &PrecCtx) -> Result<(MultResidual, Float)> {
    let p = ctx.bits();
    let seq = chi_poly_seq(eps, mp, (m + n).max(2), ctx)?;
    let chi = seq.values();
    let q2 = Complex::with_val(p, mp.q().square_ref());
    let qm2 = Complex::with_val(p, q2.recip_ref());
    let pow = |k: i64| -> Complex {
        let base = if k >= 0 { &q2 } else { &qm2 };
        let mut r = Complex::with_val(p, 1);
        for _ in 0..k.unsigned_abs() {
            r *= base;
        }
        r
    };
    let lhs = Complex::with_val(p, &chi[m] * &chi[n]);
    let mut rhs = Complex::new(p);
    let mut peak = Float::new(p);
    for k in 0..=m.min(n) {
        let kk = PochLen::Finite(k);
        let mut c = pochhammer_q(&pow(m as i64), &qm2, kk, ctx)?;
        c *= pochhammer_q(&pow(n as i64), &qm2, kk, ctx)?;
        c *= pochhammer_q(&pow(k as i64 - m as i64 - n as i64), &q2, kk, ctx)?;
        c /= pochhammer_q(&q2, &q2, kk, ctx)?;
        let t = c * &chi[m + n - 2 * k];
        peak.max_mut(&cabs(&t));
        rhs += t;
    }
    let scale = cabs(&lhs);
    Ok((MultResidual { residual: cabs(&(lhs - rhs)), scale }, peak))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (PrecCtx, ModularParam) {
        let c = PrecCtx::default();
        let mp = ModularParam::quarter_pi(&c);
        (c, mp)
    }

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        let d = Complex::with_val(a.prec().0, a - b);
        cabs(&d) <= tol
    }

    #[test]
    fn low_order_polynomials() {
        let (c, mp) = setup();
        let eps = c.complex((1.3, -0.7));
        let seq = chi_poly_seq(&eps, &mp, 6, &c).unwrap();
        assert_eq!(seq.values()[0], 1);
        assert_eq!(seq.values()[1], eps);
        assert_eq!(seq.dvalues()[0], 0);
        let q = mp.q();
        let a1 = Complex::with_val(192, q - Complex::with_val(192, q.recip_ref())).square();
        let q2 = Complex::with_val(192, q.square_ref());
        let a2 = Complex::with_val(192, &q2 - Complex::with_val(192, q2.recip_ref())).square();
        let chi2 = Complex::with_val(192, eps.square_ref()) + &a1;
        assert!(close(&seq.values()[2], &chi2, 1e-50));
        let chi3 = Complex::with_val(192, eps.square_ref()) + &a2 + &a1;
        let chi3 = chi3 * &eps;
        let rel = cabs(&Complex::with_val(192, &seq.values()[3] - &chi3)) / cabs(&chi3);
        assert!(rel < 1e-50);
    }

    #[test]
    fn recursion_is_exact_and_symmetric_in_q() {
        let (c, mp) = setup();
        let eps = c.complex((0.4, 2.1));
        let seq = chi_poly_seq(&eps, &mp, 20, &c).unwrap();
        let qi = Complex::with_val(192, mp.q().recip_ref());
        let inv = ChiPolySeq::with_q(&eps, &qi, 20, &c).unwrap();
        for n in 0..=20 {
            let d = Complex::with_val(192, &seq.values()[n] - &inv.values()[n]);
            let rel = cabs(&d) / cabs(&seq.values()[n]).max(&Float::with_val(192, 1));
            assert!(rel < 1e-50, "n = {n}");
        }
        assert_eq!(seq.order(), 20);
    }

    #[test]
    fn growth_law() {
        let (c, mp) = setup();
        let eps = c.complex((2.0, 1.0));
        let seq = chi_poly_seq(&eps, &mp, 60, &c).unwrap();
        let lq = cabs(mp.q()).ln().to_f64();
        let vals: Vec<f64> = (1..=60)
            .map(|n| cabs(&seq.values()[n]).ln().to_f64() + (n * n) as f64 / 2.0 * lq)
            .collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo < 20.0, "spread {}", hi - lo);
    }

    #[test]
    fn value_at_origin() {
        let (c, mp) = setup();
        let (v, d) = chi_eval(&c.complex(0), &c.complex(3), &mp, &c).unwrap();
        assert_eq!(v, 1);
        assert_eq!(d, 0);
        assert_eq!(chi_check_eval(&c.complex(0), &c.complex(3), &mp, &c), Err(Error::ZeroArgument));
    }

    #[test]
    fn check_at_fixed_point() {
        let (c, mp) = setup();
        let eps = c.complex((0.5, 0.5));
        let one = c.complex(1);
        let (v, _) = chi_eval(&one, &eps, &mp, &c).unwrap();
        assert!(close(&chi_check_eval(&one, &eps, &mp, &c).unwrap(), &v, 1e-50));
    }

    #[test]
    fn functional_equation() {
        let (c, mp) = setup();
        let eps = c.complex((2.5, -1.0));
        let u = c.complex((0.3, 0.8));
        let q2 = Complex::with_val(192, mp.q().square_ref());
        let mut s = ChiSeries::new(&eps, mp.q(), &c).unwrap();
        let a = s.eval(&Complex::with_val(192, &u / &q2)).unwrap().value;
        let b = s.eval(&Complex::with_val(192, &u * &q2)).unwrap().value;
        let f = s.eval(&u).unwrap().value;
        let u2 = Complex::with_val(192, u.square_ref());
        let coef = Complex::with_val(192, 1 - Complex::with_val(192, &eps * &u)) + &u2;
        let r = a + q2 * u2 * b - coef * f;
        assert!(cabs(&r) < 1e-39);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (c, mp) = setup();
        let eps = c.complex((1.0, 0.5));
        let u = c.complex((1.7, -0.4));
        let h = Float::with_val(192, 1e-10);
        let ep = Complex::with_val(192, &eps + &h);
        let em = Complex::with_val(192, &eps - &h);
        let (_, d) = chi_eval(&u, &eps, &mp, &c).unwrap();
        let (vp, _) = chi_eval(&u, &ep, &mp, &c).unwrap();
        let (vm, _) = chi_eval(&u, &em, &mp, &c).unwrap();
        let fd = (vp - vm) / (2 * h);
        let rel = cabs(&Complex::with_val(192, &fd - &d)) / cabs(&d);
        assert!(rel < 1e-8);
    }

    #[test]
    fn g_antisymmetry_and_fixed_point() {
        let (c, mp) = setup();
        let eps = c.complex((3.0, 1.0));
        let u = c.complex((0.6, 0.9));
        let ui = Complex::with_val(192, u.recip_ref());
        let g = g_eval(&u, &eps, &mp, &c).unwrap().value;
        let gi = g_eval(&ui, &eps, &mp, &c).unwrap().value;
        assert!(close(&(g * gi), &c.complex(1), 1e-45));
        let g1 = g_eval(&c.complex(1), &eps, &mp, &c).unwrap().value;
        assert!(close(&g1.square(), &c.complex(1), 1e-45));
    }

    #[test]
    fn multiplication_rule_small() {
        let (c, mp) = setup();
        let eps = c.complex((0.7, -1.9));
        for (m, n) in [(0, 5), (1, 1), (7, 9), (12, 12)] {
            let r = chi_mult_check(m, n, &eps, &mp, &c).unwrap();
            assert!(r.residual <= 10.0 * c.tol() * r.scale.to_f64().max(1.0), "({m}, {n})");
        }
        assert!(chi_mult_check(13, 1, &eps, &mp, &c).is_err());
    }

    #[test]
    fn crochet_identity() {
        let (c, mp) = setup();
        let eps = c.complex((1.5, 0.25));
        let u = c.complex((0.45, -0.3));
        let q2 = Complex::with_val(192, mp.q().square_ref());
        let q2u = Complex::with_val(192, &q2 * &u);
        let (a, _) = chi_eval(&u, &eps, &mp, &c).unwrap();
        let (b, _) = chi_eval(&q2u, &eps, &mp, &c).unwrap();
        let da = chi_dual_eval(&u, &eps, &mp, &c).unwrap();
        let db = chi_dual_eval(&q2u, &eps, &mp, &c).unwrap();
        let u2 = Complex::with_val(192, u.square_ref());
        let r = a * db - q2 * u2 * da * b;
        assert!(close(&r, &c.complex(1), 1e-38));
    }
}
