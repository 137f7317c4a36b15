use mirror_spectra::chi::{chi_dual_eval, chi_eval};
use mirror_spectra::precision::{cabs, pochhammer_q, theta1, PochLen};
use mirror_spectra::spectral::wronskian_eval;
use mirror_spectra::transfer::chi_via_minf;
use mirror_spectra::{Error, ModularParam, PrecCtx};
use proptest::prelude::*;
use rug::ops::Pow;
use rug::{Complex, Float};

const BITS: u32 = 128;

fn ctx() -> PrecCtx {
    PrecCtx::new(BITS, 1e-25).unwrap()
}

fn c(re: f64, im: f64) -> Complex {
    Complex::with_val(BITS, (re, im))
}

fn rel(a: &Complex, b: &Complex) -> f64 {
    let scale = cabs(a).max(&cabs(b)).clone().max(&Float::with_val(BITS, 1e-300)).clone();
    (cabs(&Complex::with_val(BITS, a - b)) / scale).to_f64()
}

fn coupling() -> impl Strategy<Value = f64> {
    0.4f64..1.5
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..1.8, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| (r * a.cos(), r * a.sin()))
}

fn energy() -> impl Strategy<Value = (f64, f64)> {
    (-6.0f64..6.0, -6.0f64..6.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chi_solves_the_difference_equation(theta in coupling(), (x, y) in point(), (er, ei) in energy()) {
        let ctx = ctx();
        let mp = ModularParam::new(theta, &ctx).unwrap();
        let (u, eps) = (c(x, y), c(er, ei));
        let q2 = Complex::with_val(BITS, mp.q().square_ref());
        let f = |v: &Complex| chi_eval(v, &eps, &mp, &ctx).unwrap().0;
        let lo = f(&Complex::with_val(BITS, &u / &q2));
        let hi = f(&Complex::with_val(BITS, &q2 * &u));
        let u2 = Complex::with_val(BITS, u.square_ref());
        let lhs = lo + Complex::with_val(BITS, &q2 * &u2) * hi;
        let rhs = (Complex::with_val(BITS, 1 - Complex::with_val(BITS, &eps * &u)) + u2) * f(&u);
        prop_assert!(rel(&lhs, &rhs) < 1e-20);
    }

    #[test]
    fn series_and_transfer_product_agree(theta in coupling(), (x, y) in point(), (er, ei) in energy()) {
        let ctx = ctx();
        let mp = ModularParam::new(theta, &ctx).unwrap();
        let u = c(x / 2.0, y / 2.0);
        let eps = c(er, ei);
        let (a, _) = chi_eval(&u, &eps, &mp, &ctx).unwrap();
        let (b, _) = chi_via_minf(&u, &eps, &mp, &ctx).unwrap();
        prop_assert!(rel(&a, &b) < 1e-20);
    }

    #[test]
    fn chi_is_one_at_the_origin(theta in coupling(), (er, ei) in energy()) {
        let ctx = ctx();
        let mp = ModularParam::new(theta, &ctx).unwrap();
        let (v, _) = chi_eval(&c(0.0, 0.0), &c(er, ei), &mp, &ctx).unwrap();
        prop_assert!(rel(&v, &c(1.0, 0.0)) < 1e-30);
    }

    #[test]
    fn wronskian_shift(theta in coupling(), (x, y) in point(), (er, ei) in energy()) {
        let ctx = ctx();
        let mp = ModularParam::new(theta, &ctx).unwrap();
        let (u, eps) = (c(x, y), c(er, ei));
        let q2 = Complex::with_val(BITS, mp.q().square_ref());
        let w = wronskian_eval(&u, &eps, &mp, &ctx).unwrap();
        let ws = wronskian_eval(&Complex::with_val(BITS, &q2 * &u), &eps, &mp, &ctx).unwrap();
        let den = Complex::with_val(BITS, &q2 * Complex::with_val(BITS, u.square_ref()));
        let d = cabs(&Complex::with_val(BITS, &ws.value - Complex::with_val(BITS, &w.value / &den)));
        let scale = Float::with_val(BITS, &w.scale / cabs(&den)).max(&ws.scale).clone();
        prop_assert!((d / scale).to_f64() < 1e-20);
    }

    #[test]
    fn dual_chi_is_finite_or_a_pole(theta in coupling(), (x, y) in point(), (er, ei) in energy()) {
        let ctx = ctx();
        let mp = ModularParam::new(theta, &ctx).unwrap();
        match chi_dual_eval(&c(x, y), &c(er, ei), &mp, &ctx) {
            Ok(v) => prop_assert!(v.real().is_finite() && v.imag().is_finite()),
            Err(Error::Pole { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn theta_is_odd_and_quasi_periodic(theta in coupling(), x in -2.0f64..2.0, y in -3.0f64..3.0) {
        let ctx = ctx();
        let mp = ModularParam::new(theta, &ctx).unwrap();
        let lq = mp.log_q().clone();
        let w = c(x, y);
        let t = theta1(&w, &lq, &ctx).unwrap();
        let neg = theta1(&Complex::with_val(BITS, -&w), &lq, &ctx).unwrap();
        prop_assert!(rel(&neg, &Complex::with_val(BITS, -&t)) < 1e-30);
        let shifted = theta1(&Complex::with_val(BITS, &w + Complex::with_val(BITS, &lq * 2u32)), &lq, &ctx).unwrap();
        let qu = Complex::with_val(BITS, &lq + &w).exp();
        prop_assert!(rel(&shifted, &-Complex::with_val(BITS, &t / &qu)) < 1e-30);
    }

    #[test]
    fn pochhammer_recursion(theta in coupling(), (x, y) in point(), n in 1usize..30) {
        let ctx = ctx();
        let mp = ModularParam::new(theta, &ctx).unwrap();
        let (z, q) = (c(x, y), mp.q().clone());
        let a = pochhammer_q(&z, &q, PochLen::Finite(n), &ctx).unwrap();
        let b = pochhammer_q(&z, &q, PochLen::Finite(n - 1), &ctx).unwrap();
        let qn = Complex::with_val(BITS, (&q).pow((n - 1) as u32));
        let factor = Complex::with_val(BITS, 1 - Complex::with_val(BITS, &z * qn));
        prop_assert!(rel(&a, &(b * factor)) < 1e-30);
    }

    #[test]
    fn contexts_reject_unreachable_tolerances(bits in 64u32..512, tol_exp in 1i32..200) {
        let tol = 10f64.powi(-tol_exp);
        let ok = PrecCtx::new(bits, tol).is_ok();
        prop_assert_eq!(ok, tol >= 2f64.powi(16 - bits as i32));
    }
}
