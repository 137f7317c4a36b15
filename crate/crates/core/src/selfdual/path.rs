//! Path integrals of θ_λ on cos 2πx + cos 2πy = ε/2 starting from the
//! base point P₀ = (iα, 0), and the eigenfunction
//! φ(x) = sin(2π∫θ_λ) / sin 2πy.
//!
//! Points x = it on the imaginary axis are reached along the canonical
//! path: the ξ-arc (both coordinates imaginary) for |t| ≤ α, then y real
//! up to ½ at |t| = β, then y = ½ + iv. Other x are reached by straight
//! segments from there, continuing y onto the nearest branch.

use rug::{Complex, Float};

use super::{Curve, SelfDualSpectrum};
use crate::error::{Error, Result};
use crate::precision::{cabs, PrecCtx};
use crate::quadrature::GaussLegendre;

/// Distance to a removable point below which φ is taken as a limit.
const NEAR_BRANCH: f64 = 1e-9;
const LIMIT_STEP: f64 = 1e-8;
const MAX_TABLE: usize = 1 << 12;

/// A point of the curve together with ∫θ_λ along the path that reached it.
#[derive(Clone, Debug)]
pub struct CurvePoint {
    pub x: Complex,
    pub y: Complex,
    pub integral: Complex,
}

impl CurvePoint {
    /// The Bloch–Jost value e^{2πi∫θ_λ}.
    pub fn bloch_jost(&self) -> Complex {
        let p = self.integral.prec().0;
        let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
        (Complex::with_val(p, self.integral.mul_i_ref(false)) * two_pi).exp()
    }

    /// sin(2π∫θ_λ) / sin 2πy.
    pub fn phi(&self) -> Complex {
        let p = self.integral.prec().0;
        let two_pi = Float::with_val(p, rug::float::Constant::Pi) * 2u32;
        let num = Complex::with_val(p, &self.integral * &two_pi).sin();
        let den = Complex::with_val(p, &self.y * two_pi).sin();
        num / den
    }
}

struct Geometry<'a> {
    curve: Curve,
    lambda: &'a Float,
    gl: GaussLegendre,
    tol: Float,
    ctx: &'a PrecCtx,
}

impl<'a> Geometry<'a> {
    fn new(spec: &'a SelfDualSpectrum, ctx: &'a PrecCtx) -> Result<Self> {
        Ok(Geometry {
            curve: Curve::new(&spec.eps, ctx)?,
            lambda: &spec.lambda,
            gl: GaussLegendre::new(ctx),
            tol: ctx.real(ctx.tol() / 100.0),
            ctx,
        })
    }

    fn p(&self) -> u32 {
        self.ctx.bits()
    }

    fn two_pi(&self) -> Float {
        Float::with_val(self.p(), &self.curve.pi * 2u32)
    }

    /// ∫_0^u of the ξ-arc integrand.
    fn xi_integral(&self, u: &Float) -> Result<Float> {
        let zero = Float::new(self.p());
        let lam = self.lambda;
        self.gl.integrate_real(
            &mut |w: &Float| {
                let (a, c) = self.curve.xi_parts(w);
                Ok(a * lam + c)
            },
            &zero,
            u,
            &self.tol,
        )
    }

    /// ∫_0^y (τ - λ/sinh 2πτ) dy' with cosh 2πτ = ε/2 - cos 2πy', y ≤ ½.
    fn zeta_integral(&self, y: &Float) -> Result<Float> {
        let p = self.p();
        let half_eps = Float::with_val(p, &self.curve.eps / 2u32);
        let two_pi = self.two_pi();
        let zero = Float::new(p);
        self.gl.integrate_real(
            &mut |w: &Float| {
                let c = Float::with_val(p, &two_pi * w).cos();
                let tau = Float::with_val(p, &half_eps - c).acosh() / &two_pi;
                Ok(self.tau_term(&tau))
            },
            &zero,
            y,
            &self.tol,
        )
    }

    /// ∫_0^v (τ - λ/sinh 2πτ) dv' with cosh 2πτ = ε/2 + cosh 2πv'.
    fn tail_integral(&self, v: &Float) -> Result<Float> {
        let p = self.p();
        let half_eps = Float::with_val(p, &self.curve.eps / 2u32);
        let two_pi = self.two_pi();
        let zero = Float::new(p);
        self.gl.integrate_real(
            &mut |w: &Float| {
                let c = Float::with_val(p, &two_pi * w).cosh();
                let tau = Float::with_val(p, &half_eps + c).acosh() / &two_pi;
                Ok(self.tau_term(&tau))
            },
            &zero,
            v,
            &self.tol,
        )
    }

    fn tau_term(&self, tau: &Float) -> Float {
        let p = self.p();
        let sh = Float::with_val(p, tau * self.two_pi()).sinh();
        Float::with_val(p, tau - Float::with_val(p, self.lambda / sh))
    }

    /// The end of the canonical path over x = it.
    fn axis(&self, t: &Float) -> Result<CurvePoint> {
        let p = self.p();
        let c = &self.curve;
        let x = Complex::with_val(p, (0, t));
        let ta = Float::with_val(p, t.abs_ref());
        let two_pi = self.two_pi();
        let half_eps = Float::with_val(p, &c.eps / 2u32);
        if ta <= c.alpha {
            let ratio = (Float::with_val(p, &c.pi * t).sinh() / &c.sinh_pa).clamp(&-1, &1);
            let u = Float::with_val(p, ratio.acos_ref()) / &c.pi;
            let integral = Complex::with_val(p, self.xi_integral(&u)?);
            let sin = Float::with_val(p, &c.pi * &u).sin();
            let y = Complex::with_val(p, (0, c.s_of(&sin)));
            return Ok(CurvePoint { x, y, integral });
        }
        let cosh_t = Float::with_val(p, &two_pi * &ta).cosh();
        let (mag, y) = if ta <= c.beta {
            let cy = Float::with_val(p, &half_eps - &cosh_t).clamp(&-1, &1);
            let yt = cy.acos() / &two_pi;
            (Complex::with_val(p, (0, self.zeta_integral(&yt)?)), Complex::with_val(p, yt))
        } else {
            let half = Float::with_val(p, 0.5);
            let arg = Float::with_val(p, &cosh_t - &half_eps).max(&Float::with_val(p, 1));
            let v = arg.acosh() / &two_pi;
            let to_half = Complex::with_val(p, (0, self.zeta_integral(&half)?));
            let tail = self.tail_integral(&v)?;
            (to_half - tail, Complex::with_val(p, (half, v)))
        };
        let integral = if t.is_sign_positive() {
            mag
        } else {
            // past the whole ξ-arc to (-iα, 0), then the mirror image of the
            // positive branch: x → -x flips the sign of θ_λ
            let full = self.xi_integral(&Float::with_val(p, 1))?;
            Complex::with_val(p, full) - mag
        };
        Ok(CurvePoint { x, y, integral })
    }

    /// The y on the branch of cos 2πy = ε/2 - cos 2πx nearest to `yref`,
    /// with its distance and the distance to the runner-up.
    fn nearest(&self, x: &Complex, yref: &Complex) -> (Complex, Float, Float) {
        let p = self.p();
        let two_pi = self.two_pi();
        let c = Complex::with_val(p, &self.curve.eps / 2u32) - Complex::with_val(p, x * &two_pi).cos();
        let y0 = c.acos() / &two_pi;
        let mut best: Option<(Complex, Float)> = None;
        let mut second = Float::with_val(p, f64::INFINITY);
        for sign in [1i32, -1] {
            let base = Complex::with_val(p, &y0 * sign);
            let k = Float::with_val(p, Complex::with_val(p, yref - &base).real()).round().to_f64() as i64;
            for kk in k - 1..=k + 1 {
                let cand = Complex::with_val(p, &base + kk);
                let d = cabs(&Complex::with_val(p, &cand - yref));
                match &best {
                    Some((_, bd)) if d >= *bd => {
                        if d < second {
                            second = d;
                        }
                    }
                    _ => {
                        if let Some((_, bd)) = best.take() {
                            second = bd.min(&second).clone();
                        }
                        best = Some((cand, d));
                    }
                }
            }
        }
        let (y, d) = best.unwrap();
        (y, d, second)
    }

    /// Continues along the straight segment from `start` to `x1`.
    fn segment(&self, start: &CurvePoint, x1: &Complex) -> Result<CurvePoint> {
        let p = self.p();
        let dx = Complex::with_val(p, x1 - &start.x);
        if dx.is_zero() {
            return Ok(start.clone());
        }
        let table = self.branch_table(start, &dx)?;
        let n = table.len() - 1;
        let two_pi = self.two_pi();
        let lam = self.lambda;
        let mut f = |s: &Float| -> Result<Complex> {
            let x = Complex::with_val(p, &start.x + Complex::with_val(p, &dx * s));
            let j = Float::with_val(p, s * n as u32).round().to_f64().clamp(0.0, n as f64) as usize;
            let (y, _, _) = self.nearest(&x, &table[j]);
            let tx = Complex::with_val(p, &x * &two_pi);
            let num = Complex::with_val(p, &x * tx.sin()) + lam;
            let den = Complex::with_val(p, &y * &two_pi).sin();
            Ok(-(num / den) * &dx)
        };
        let zero = Float::new(p);
        let one = Float::with_val(p, 1);
        let delta = self.gl.integrate(&mut f, &zero, &one, &self.tol)?;
        Ok(CurvePoint {
            x: x1.clone(),
            y: table[n].clone(),
            integral: Complex::with_val(p, &start.integral + delta),
        })
    }

    /// y at equally spaced points of the segment, each step landing well
    /// inside the basin of the continued branch.
    fn branch_table(&self, start: &CurvePoint, dx: &Complex) -> Result<Vec<Complex>> {
        let p = self.p();
        let mut n = 64usize;
        'refine: while n <= MAX_TABLE {
            let mut table = Vec::with_capacity(n + 1);
            table.push(start.y.clone());
            for j in 1..=n {
                let x = Complex::with_val(p, &start.x + Complex::with_val(p, dx * j as u32) / n as u32);
                let (y, d1, d2) = self.nearest(&x, &table[j - 1]);
                if d1 * 4u32 >= d2 {
                    n *= 2;
                    continue 'refine;
                }
                table.push(y);
            }
            return Ok(table);
        }
        let end = Complex::with_val(p, &start.x + dx);
        Err(Error::PathFailed(format!("segment from {:.8} to {:.8} passes too close to a branch point", start.x, end)))
    }

    fn phi_axis(&self, t: &Float) -> Result<Complex> {
        let p = self.p();
        let c = &self.curve;
        let ta = Float::with_val(p, t.abs_ref());
        let d = Float::with_val(p, &ta - &c.alpha).abs().min(&Float::with_val(p, &ta - &c.beta).abs()).to_f64();
        if d >= NEAR_BRANCH {
            return Ok(self.axis(t)?.phi());
        }
        // removable: sin 2πy = 0 at t = ±α, ±β
        let mut avg = Vec::with_capacity(3);
        for j in 0..3 {
            let h = Float::with_val(p, LIMIT_STEP) >> j;
            let a = self.axis(&Float::with_val(p, t + &h))?.phi();
            let b = self.axis(&Float::with_val(p, t - &h))?.phi();
            avg.push((a + b) / 2u32);
        }
        let r1 = (Complex::with_val(p, &avg[1] * 4u32) - &avg[0]) / 3u32;
        let r2 = (Complex::with_val(p, &avg[2] * 4u32) - &avg[1]) / 3u32;
        Ok((r2 * 16u32 - r1) / 15u32)
    }

    /// The canonical point for x, reached by axis + horizontal (+ vertical)
    /// segments that stay clear of the branch points ±iα + Z, ±iβ + Z.
    fn reach(&self, x: &Complex) -> Result<CurvePoint> {
        let p = self.p();
        let c = &self.curve;
        let t = Float::with_val(p, x.imag());
        let a = Float::with_val(p, x.real());
        let gap = Float::with_val(p, &c.beta - &c.alpha).to_f64();
        let heights = [-c.beta.to_f64(), -c.alpha.to_f64(), c.alpha.to_f64(), c.beta.to_f64()];
        let tf = t.to_f64();
        let dist = heights.iter().map(|h| (tf - h).abs()).fold(f64::INFINITY, f64::min);
        if dist >= gap / 4.0 {
            let base = self.axis(&t)?;
            return self.segment(&base, x);
        }
        let af = a.to_f64();
        if (af - af.round()).abs() < gap / 4.0 {
            return Err(Error::PathFailed(format!("x = {af} + {tf}i lies next to a branch point")));
        }
        let (al, be) = (c.alpha.to_f64(), c.beta.to_f64());
        let safe = if tf.abs() < al {
            0.0
        } else if tf.abs() <= be {
            tf.signum() * (al + be) / 2.0
        } else {
            tf.signum() * (2.0 * be - al)
        };
        let t0 = Float::with_val(p, safe);
        let base = self.axis(&t0)?;
        let side = self.segment(&base, &Complex::with_val(p, (&a, &t0)))?;
        self.segment(&side, x)
    }
}

fn check_quantized(spec: &SelfDualSpectrum, ctx: &PrecCtx) -> Result<()> {
    let bound = ctx.tol().sqrt();
    let lv = spec.level_residual().to_f64().abs();
    let cy = spec.cycle_residual().to_f64().abs();
    if lv > bound || cy > bound {
        return Err(Error::Multivalued(format!(
            "not a quantized state: Aλ - Ã - (n+1) = {lv:.3e}, B̃ - λB = {cy:.3e}"
        )));
    }
    Ok(())
}

/// The curve point over x = it at the end of the canonical path.
pub fn axis_point(t: &Float, spec: &SelfDualSpectrum, ctx: &PrecCtx) -> Result<CurvePoint> {
    Geometry::new(spec, ctx)?.axis(t)
}

/// Continues a path from `start` along the segment to `x1`.
pub fn segment(start: &CurvePoint, x1: &Complex, spec: &SelfDualSpectrum, ctx: &PrecCtx) -> Result<CurvePoint> {
    Geometry::new(spec, ctx)?.segment(start, x1)
}

/// φ(x) at a quantized state.
pub fn phi_eval(x: &Complex, spec: &SelfDualSpectrum, ctx: &PrecCtx) -> Result<Complex> {
    check_quantized(spec, ctx)?;
    let g = Geometry::new(spec, ctx)?;
    if x.real().is_zero() {
        return g.phi_axis(&Float::with_val(ctx.bits(), x.imag()));
    }
    Ok(g.reach(x)?.phi())
}

/// ψ(x) = φ(ix) for real x. φ(-ix) is computed along its own path and
/// must agree with (-1)ⁿ φ(ix).
pub fn psi_selfdual(x: &Float, spec: &SelfDualSpectrum, ctx: &PrecCtx) -> Result<Complex> {
    check_quantized(spec, ctx)?;
    let g = Geometry::new(spec, ctx)?;
    let p = ctx.bits();
    let plus = g.phi_axis(x)?;
    let minus = g.phi_axis(&Float::with_val(p, -x))?;
    let sign = if spec.n % 2 == 0 { 1 } else { -1 };
    let defect = cabs(&Complex::with_val(p, &minus - Complex::with_val(p, &plus * sign)));
    let scale = cabs(&plus) + cabs(&minus);
    if defect > scale * 1e-20 && defect > 1e-30 {
        return Err(Error::Multivalued(format!(
            "φ(ix) and φ(-ix) disagree by {:.3e}",
            defect.to_f64()
        )));
    }
    Ok(plus)
}

/// Relative residual of φ(x - 1) + φ(x + 1) + (2cos 2πx - ε)φ(x) at x = it.
pub fn harper_residual(t: &Float, spec: &SelfDualSpectrum, ctx: &PrecCtx) -> Result<Float> {
    let p = ctx.bits();
    let x = Complex::with_val(p, (0, t));
    let mid = phi_eval(&x, spec, ctx)?;
    let up = phi_eval(&Complex::with_val(p, &x + 1u32), spec, ctx)?;
    let dn = phi_eval(&Complex::with_val(p, &x - 1u32), spec, ctx)?;
    let two_pi_t = Float::with_val(p, &ctx.pi() * t) * 2u32;
    let pot = two_pi_t.cosh() * 2u32 - &spec.eps;
    let rhs = Complex::with_val(p, &mid * pot);
    let scale = cabs(&up) + cabs(&dn) + cabs(&rhs);
    Ok(cabs(&(up + dn + rhs)) / scale)
}

/// ∫θ_λ over the closed ξ·ξ̌ cycle and over ζ·ζ̂, computed along the paths
/// themselves; n + 1 and 0 at a quantized state.
pub fn cycle_integrals(spec: &SelfDualSpectrum, ctx: &PrecCtx) -> Result<(Complex, Complex)> {
    let g = Geometry::new(spec, ctx)?;
    let p = ctx.bits();
    let lam = &spec.lambda;
    let zero = Float::new(p);
    let two = Float::with_val(p, 2);
    let xi = g.gl.integrate_real(
        &mut |w: &Float| {
            let (a, c) = g.curve.xi_parts(w);
            Ok(a * lam + c)
        },
        &zero,
        &two,
        &g.tol,
    )?;
    // ζ climbs y from 0 to ½ and ζ̂ from ½ to 1 on the mirrored branch
    let half = g.zeta_integral(&Float::with_val(p, 0.5))?;
    let zeta = Complex::with_val(p, (0, half * 2u32));
    Ok((Complex::with_val(p, xi), zeta))
}

#[cfg(test)]
mod tests {
    use std::sync::OnceLock;

    use super::*;
    use crate::selfdual::quantize_selfdual;

    fn ctx() -> PrecCtx {
        PrecCtx::new(128, 1e-30).unwrap()
    }

    fn ground() -> &'static SelfDualSpectrum {
        static G: OnceLock<SelfDualSpectrum> = OnceLock::new();
        G.get_or_init(|| quantize_selfdual(0, &ctx()).unwrap())
    }

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        cabs(&Complex::with_val(a.prec().0, a - b)) < tol
    }

    #[test]
    fn harper_equation_holds_on_the_axis() {
        let c = ctx();
        for t in [0.0, 0.3, -0.6, 1.1] {
            let r = harper_residual(&c.real(t), ground(), &c).unwrap();
            assert!(r < 1e-25, "t = {t}: {}", r.to_f64());
        }
    }

    #[test]
    fn homotopic_paths_agree() {
        let c = ctx();
        let g = Geometry::new(ground(), &c).unwrap();
        let target = Complex::with_val(128, (0.3, 0.2));
        let direct = g.segment(&g.axis(&c.real(0.2)).unwrap(), &target).unwrap();
        let a = g.axis(&c.real(-0.1)).unwrap();
        let b = g.segment(&a, &Complex::with_val(128, (0.3, -0.1))).unwrap();
        let around = g.segment(&b, &target).unwrap();
        assert!(close(&direct.y, &around.y, 1e-25));
        assert!(close(&direct.bloch_jost(), &around.bloch_jost(), 1e-25));
    }

    #[test]
    fn unit_shift_multiplies_by_exp_y() {
        let c = ctx();
        let g = Geometry::new(ground(), &c).unwrap();
        let start = g.axis(&c.real(0.25)).unwrap();
        let moved = g.segment(&start, &Complex::with_val(128, (1, 0.25))).unwrap();
        let two_pi_i = Complex::with_val(128, (0, c.pi() * 2u32));
        let factor = Complex::with_val(128, &start.y * &two_pi_i).exp();
        let expect = start.bloch_jost() * factor;
        assert!(close(&moved.bloch_jost(), &expect, 1e-25));
    }

    #[test]
    fn reflection_negates_segment_integrals() {
        let c = ctx();
        let g = Geometry::new(ground(), &c).unwrap();
        let p = g.axis(&c.real(0.2)).unwrap();
        let m = g.axis(&c.real(-0.2)).unwrap();
        assert!(close(&p.y, &m.y, 1e-28));
        let dp = g.segment(&p, &Complex::with_val(128, (0.4, 0.2))).unwrap();
        let dm = g.segment(&m, &Complex::with_val(128, (-0.4, -0.2))).unwrap();
        let ip = Complex::with_val(128, &dp.integral - &p.integral);
        let im = Complex::with_val(128, &dm.integral - &m.integral);
        assert!(close(&ip, &-im, 1e-25));
    }

    #[test]
    fn bloch_jost_is_one_over_the_top_branch_points() {
        let c = ctx();
        let g = Geometry::new(ground(), &c).unwrap();
        let one = Complex::with_val(128, 1);
        for b in [ground().beta.clone(), -ground().beta.clone()] {
            let f = g.axis(&b).unwrap().bloch_jost();
            assert!(close(&f.square(), &one, 1e-25));
        }
    }

    #[test]
    fn eigenfunction_is_regular_at_branch_heights() {
        let c = ctx();
        let sp = ground();
        for h in [&sp.alpha, &sp.beta] {
            let at = phi_eval(&Complex::with_val(128, (0, h)), sp, &c).unwrap();
            let off = phi_eval(&Complex::with_val(128, (0, Float::with_val(128, h + 1e-6))), sp, &c).unwrap();
            assert!(close(&at, &off, 1e-4 * cabs(&at).to_f64()));
        }
    }

    #[test]
    fn parity_of_levels() {
        let c = ctx();
        let x = c.real(0.37);
        let v = psi_selfdual(&x, ground(), &c).unwrap();
        let w = phi_eval(&Complex::with_val(128, (0, -0.37)), ground(), &c).unwrap();
        assert!(close(&v, &w, 1e-25));
    }

    #[test]
    fn unquantized_states_are_rejected() {
        let c = ctx();
        let eps = Float::with_val(128, &ground().eps * 1.001);
        let sp = SelfDualSpectrum::at(0, &eps, &c).unwrap();
        let r = phi_eval(&Complex::with_val(128, (0, 0.2)), &sp, &c);
        assert!(matches!(r, Err(Error::Multivalued(_))));
    }

    #[test]
    fn cycle_integrals_are_integers() {
        let c = ctx();
        let (xi, zeta) = cycle_integrals(ground(), &c).unwrap();
        assert!(close(&xi, &Complex::with_val(128, 1), 1e-25));
        assert!(cabs(&zeta) < 1e-25);
    }
}
