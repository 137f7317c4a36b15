//! Composite Gauss–Legendre quadrature at working precision.

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::{cabs, PrecCtx};

pub const GL_ORDER: usize = 32;
const MAX_DEPTH: u32 = 30;

/// Nodes and weights of the order-32 rule on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<Float>,
    weights: Vec<Float>,
    prec: u32,
}

impl GaussLegendre {
    pub fn new(ctx: &PrecCtx) -> Self {
        Self::with_order(GL_ORDER, ctx)
    }

    pub fn with_order(n: usize, ctx: &PrecCtx) -> Self {
        let p = ctx.bits() + 16;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let stop = Float::with_val(p, Float::i_exp(1, -(p as i32) + 8));
        for i in 0..n.div_ceil(2) {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = Float::with_val(p, guess);
            for _ in 0..100 {
                let (pn, d) = legendre(n, &x);
                let dx = pn / d;
                x -= &dx;
                if dx.abs() < stop {
                    break;
                }
            }
            let (_, dp) = legendre(n, &x);
            let one_m = Float::with_val(p, 1) - Float::with_val(p, x.square_ref());
            let w = Float::with_val(p, 2) / (one_m * dp.square());
            nodes.push(x.clone());
            weights.push(w.clone());
            if 2 * i + 1 != n {
                nodes.push(-x);
                weights.push(w);
            }
        }
        GaussLegendre { nodes, weights, prec: ctx.bits() }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// One application of the rule on [a, b].
    pub fn apply<F>(&self, f: &mut F, a: &Float, b: &Float) -> Result<Complex>
    where
        F: FnMut(&Float) -> Result<Complex>,
    {
        let p = self.prec;
        let half = Float::with_val(p, b - a) / 2u32;
        let mid = Float::with_val(p, a + b) / 2u32;
        let mut sum = Complex::new(p);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let t = Float::with_val(p, &mid + Float::with_val(p, &half * x));
            sum += f(&t)? * Float::with_val(p, w);
        }
        Ok(sum * half)
    }

    /// ∫_a^b f, bisecting dyadically until the two-level difference is
    /// below `abs_tol` scaled to the subinterval.
    pub fn integrate<F>(&self, f: &mut F, a: &Float, b: &Float, abs_tol: &Float) -> Result<Complex>
    where
        F: FnMut(&Float) -> Result<Complex>,
    {
        let whole = self.apply(f, a, b)?;
        let width = Float::with_val(self.prec, b - a).abs();
        self.refine(f, a, b, whole, abs_tol, &width, 0)
    }

    /// Real-valued convenience wrapper.
    pub fn integrate_real<F>(&self, f: &mut F, a: &Float, b: &Float, abs_tol: &Float) -> Result<Float>
    where
        F: FnMut(&Float) -> Result<Float>,
    {
        let p = self.prec;
        let mut g = |x: &Float| -> Result<Complex> { Ok(Complex::with_val(p, f(x)?)) };
        Ok(self.integrate(&mut g, a, b, abs_tol)?.into_real_imag().0)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine<F>(
        &self,
        f: &mut F,
        a: &Float,
        b: &Float,
        whole: Complex,
        abs_tol: &Float,
        total: &Float,
        depth: u32,
    ) -> Result<Complex>
    where
        F: FnMut(&Float) -> Result<Complex>,
    {
        let p = self.prec;
        let mid = Float::with_val(p, a + b) / 2u32;
        let left = self.apply(f, a, &mid)?;
        let right = self.apply(f, &mid, b)?;
        let split = Complex::with_val(p, &left + &right);
        let diff = cabs(&Complex::with_val(p, &split - &whole));
        let share = Float::with_val(p, b - a).abs() / total * abs_tol;
        if diff <= share {
            return Ok(split);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::Quadrature { a: a.to_f64(), b: b.to_f64() });
        }
        let l = self.refine(f, a, &mid, left, abs_tol, total, depth + 1)?;
        let r = self.refine(f, &mid, b, right, abs_tol, total, depth + 1)?;
        Ok(l + r)
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: &Float) -> (Float, Float) {
    let p = x.prec();
    let mut p0 = Float::with_val(p, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let a = Float::with_val(p, x * &p1) * (2 * k - 1) as u32;
        let b = Float::with_val(p, &p0 * (k - 1) as u32);
        let p2 = (a - b) / k as u32;
        p0 = p1;
        p1 = p2;
    }
    let num = (Float::with_val(p, x * &p1) - &p0) * n as u32;
    let den = Float::with_val(p, x.square_ref()) - 1u32;
    (p1, num / den)
}
