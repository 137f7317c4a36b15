//! Starting values for ε_k at the ends of the principal domain.
//!
//! At σ = 0 odd sheets solve χ(q⁻²) - q²χ(q²) = 0 and even sheets χ(1) = 0;
//! at σ = sin θ the roots of χ(-q⁻¹) ∓ qχ(-q) = 0. Their leading q-series
//! are tabulated below; other sheets fall back to the spiral ε ≈ e^{2πbσ}.

use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::precision::{ModularParam, PrecCtx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Zero,
    SinTheta,
}

/// sign · q^{shift} · Σ c_j q^{p_j}, truncated before q^{next}.
#[derive(Clone, Copy, Debug)]
pub struct SeedSeries {
    pub sign: i32,
    pub shift: i32,
    pub terms: &'static [(u32, i64)],
    pub next: u32,
}

const E1_0: SeedSeries = SeedSeries {
    sign: 1,
    shift: 0,
    terms: &[(0, 2), (2, -2), (4, -4), (6, -2), (8, 14), (10, 50), (12, 40), (14, -268), (16, -1136)],
    next: 18,
};

const E2_0: SeedSeries = SeedSeries {
    sign: 1,
    shift: -2,
    terms: &[(0, 1), (4, 1), (6, -1), (8, -1), (10, -1), (12, -2), (14, -1), (18, 1), (20, 6), (22, 11)],
    next: 24,
};

const E3_0: SeedSeries = SeedSeries {
    sign: 1,
    shift: -2,
    terms: &[(0, 1), (4, 3), (6, 3), (8, 1), (10, -15), (12, -52), (14, -43), (16, 264), (18, 1127)],
    next: 20,
};

const E4_0: SeedSeries = SeedSeries {
    sign: 1,
    shift: -4,
    terms: &[(0, 1), (8, 2), (14, 1), (18, -1), (20, -3), (22, -8), (24, -13)],
    next: 26,
};

const E6_0: SeedSeries = SeedSeries {
    sign: 1,
    shift: -6,
    terms: &[(0, 1), (12, 2), (22, 1), (24, 1), (26, 1), (32, 2), (34, 2)],
    next: 36,
};

const E1_S: SeedSeries = SeedSeries {
    sign: -1,
    shift: -1,
    terms: &[(0, 1), (1, -1), (2, 1), (4, -1), (6, -1), (7, 1), (8, -2), (9, 2), (10, -2), (11, 5), (12, -4)],
    next: 13,
};

const E2_S: SeedSeries = SeedSeries {
    sign: -1,
    shift: -1,
    terms: &[(0, 1), (1, 1), (2, 1), (4, -1), (6, -1), (7, -1), (8, -2), (9, -2), (10, -2), (11, -5), (12, -4)],
    next: 13,
};

/// The tabulated expansion for (k, endpoint), if there is one.
pub fn printed_seed(k: u32, endpoint: Endpoint) -> Option<SeedSeries> {
    match (k, endpoint) {
        (1, Endpoint::Zero) => Some(E1_0),
        (2, Endpoint::Zero) => Some(E2_0),
        (3, Endpoint::Zero) => Some(E3_0),
        (4, Endpoint::Zero) => Some(E4_0),
        (6, Endpoint::Zero) => Some(E6_0),
        (1, Endpoint::SinTheta) => Some(E1_S),
        (2, Endpoint::SinTheta) => Some(E2_S),
        _ => None,
    }
}

impl SeedSeries {
    pub fn eval(&self, q: &Complex) -> Complex {
        let p = q.prec().0;
        let mut sum = Complex::new(p);
        for &(pow, c) in self.terms {
            sum += Complex::with_val(p, qpow(q, pow as i32) * c);
        }
        sum * qpow(q, self.shift) * self.sign
    }

    /// Size of the first omitted term: max|c_j| · |q|^{next} · |q|^{shift}.
    /// The true remainder coefficient is not printed, so the largest printed
    /// one stands in for it.
    pub fn omitted_term(&self, q: &Complex) -> Float {
        let p = q.prec().0;
        let cmax = self.terms.iter().map(|t| t.1.unsigned_abs()).max().unwrap_or(1);
        let aq = Float::with_val(p, q.abs_ref());
        let mag = aq.pow(self.next as i32 + self.shift);
        mag * cmax
    }
}

fn qpow(q: &Complex, n: i32) -> Complex {
    let p = q.prec().0;
    let base = if n >= 0 { q.clone() } else { Complex::with_val(p, q.recip_ref()) };
    let mut r = Complex::with_val(p, 1);
    for _ in 0..n.unsigned_abs() {
        r *= &base;
    }
    r
}

/// Newton seed for ε_k at an endpoint.
pub fn sheet_seed(k: u32, endpoint: Endpoint, mp: &ModularParam, ctx: &PrecCtx) -> Result<Complex> {
    if k == 0 {
        return Err(Error::InvalidArgument("sheets are numbered from 1".into()));
    }
    if let Some(series) = printed_seed(k, endpoint) {
        return Ok(series.eval(&Complex::with_val(ctx.bits(), mp.q())));
    }
    Ok(spiral_seed(k, endpoint, mp, ctx))
}

/// e^{2πbσ'} with σ' = k sin θ - σ on even sheets and (k-1) sin θ + σ on
/// odd sheets, the point the spiral of sheet k passes at σ.
pub fn spiral_seed(k: u32, endpoint: Endpoint, mp: &ModularParam, ctx: &PrecCtx) -> Complex {
    let st = mp.sin_theta();
    let sigma = match endpoint {
        Endpoint::Zero => Float::new(ctx.bits()),
        Endpoint::SinTheta => st.clone(),
    };
    let eff = if k % 2 == 0 {
        Float::with_val(ctx.bits(), &st * k) - sigma
    } else {
        Float::with_val(ctx.bits(), &st * (k - 1)) + sigma
    };
    mp.s_of_sigma(&eff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::cabs;

    #[test]
    fn printed_seed_values() {
        let c = PrecCtx::default();
        let mp = ModularParam::quarter_pi(&c);
        let e10 = sheet_seed(1, Endpoint::Zero, &mp, &c).unwrap();
        assert!((e10.real().to_f64() - 1.9962511523).abs() < 1e-6);
        let e2s = sheet_seed(2, Endpoint::SinTheta, &mp, &c).unwrap();
        assert!((e2s.real().to_f64() + 24.1838).abs() < 1e-3);
        let e1s = sheet_seed(1, Endpoint::SinTheta, &mp, &c).unwrap();
        assert!((e1s.real().to_f64() + 22.1838).abs() < 1e-3);
        assert!(sheet_seed(0, Endpoint::Zero, &mp, &c).is_err());
    }

    #[test]
    fn spiral_matches_leading_orders() {
        let c = PrecCtx::default();
        let mp = ModularParam::quarter_pi(&c);
        for (k, e) in [(2, Endpoint::Zero), (3, Endpoint::Zero), (1, Endpoint::SinTheta), (4, Endpoint::Zero)] {
            let spiral = spiral_seed(k, e, &mp, &c);
            let printed = printed_seed(k, e).unwrap().eval(mp.q());
            let rel = cabs(&Complex::with_val(192, &spiral - &printed)) / cabs(&printed);
            assert!(rel < 0.6, "k = {k}: {}", rel.to_f64());
        }
    }
}
