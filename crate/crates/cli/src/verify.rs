//! Invariant suite behind `mirror-spectra verify`.

use mirror_spectra::chi::{chi_check_eval, chi_dual_eval, chi_eval, chi_mult_check};
use mirror_spectra::eigenfunction::{pole_cancellation_check, psi_eval, EigenfunctionParams};
use mirror_spectra::precision::{cabs, theta1};
use mirror_spectra::selfdual::{cycle_integrals, harper_residual, quantize_selfdual};
use mirror_spectra::spectral::{quantize, trace_orbit, wronskian_eval, wronskian_residue, Parity};
use mirror_spectra::transfer::{chi_via_minf, classify_r_orbit, r_chi, RLimit};
use mirror_spectra::{Error, ModularParam, PrecCtx};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float};

use crate::config::SEED;
use crate::output::fmt_residual;

const RANDOM_POINTS: usize = 12;
const GRID: usize = 6;
const MULT_MAX: usize = 8;
const TRAJECTORIES: usize = 10;
const TRAJECTORY_STEPS: usize = 40;
const TRAJECTORY_BITS: u32 = 192;
/// Decay factor required of |ψ| per unit step in x.
const DECAY: f64 = 0.05;
/// Relative ε shift applied by --fault.
const FAULT: f64 = 1e-3;

/// One line of the pass/fail table.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residual: f64,
    pub bound: f64,
    pub error: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.residual <= self.bound
    }

    pub fn residual_text(&self) -> String {
        match &self.error {
            Some(e) => format!("error: {e}"),
            None => fmt_residual(self.residual),
        }
    }
}

struct Suite<'a> {
    ctx: &'a PrecCtx,
    mp: &'a ModularParam,
    rng: ChaCha8Rng,
    out: Vec<CheckOutcome>,
}

fn rel(a: &Complex, b: &Complex, scale: &Float) -> f64 {
    let d = cabs(&Complex::with_val(a.prec().0, a - b));
    if scale.is_zero() {
        d.to_f64()
    } else {
        (d / scale).to_f64()
    }
}

impl Suite<'_> {
    fn run(&mut self, name: &'static str, bound: f64, f: impl FnOnce(&mut Self) -> Result<f64, Error>) {
        let (residual, error) = match f(self) {
            Ok(r) => (r, None),
            Err(e) => (f64::NAN, Some(e.to_string())),
        };
        self.out.push(CheckOutcome { name, residual, bound, error });
    }

    fn c(&self, re: f64, im: f64) -> Complex {
        Complex::with_val(self.ctx.bits(), (re, im))
    }

    fn random_u(&mut self) -> Complex {
        let r: f64 = self.rng.gen_range(0.2..2.0);
        let a: f64 = self.rng.gen_range(0.0..std::f64::consts::TAU);
        self.c(r * a.cos(), r * a.sin())
    }

    fn random_eps(&mut self) -> Complex {
        let (x, y) = (self.rng.gen_range(-5.0..5.0), self.rng.gen_range(-5.0..5.0));
        self.c(x, y)
    }

    /// max over random points of |f(u/q²) + q²u² f(q²u) - (1 - εu + u²) f(u)|
    /// relative to its terms, for f = χ, χ̌; with q → q⁻¹ for χ_{q⁻¹}.
    fn functional_equation(&mut self, which: u8) -> Result<f64, Error> {
        let p = self.ctx.bits();
        let q2 = Complex::with_val(p, self.mp.q().square_ref());
        let mut worst = 0f64;
        let mut done = 0;
        while done < RANDOM_POINTS {
            let (u, eps) = (self.random_u(), self.random_eps());
            let f = |v: &Complex| -> Result<Complex, Error> {
                match which {
                    0 => Ok(chi_eval(v, &eps, self.mp, self.ctx)?.0),
                    1 => chi_check_eval(v, &eps, self.mp, self.ctx),
                    _ => chi_dual_eval(v, &eps, self.mp, self.ctx),
                }
            };
            let (lo, hi) = match which {
                2 => (Complex::with_val(p, &q2 * &u), Complex::with_val(p, &u / &q2)),
                _ => (Complex::with_val(p, &u / &q2), Complex::with_val(p, &q2 * &u)),
            };
            let (a, b, mid) = match (f(&lo), f(&hi), f(&u)) {
                (Ok(a), Ok(b), Ok(m)) => (a, b, m),
                // a random point landed on a zero of the Wronskian
                (Err(Error::Pole { .. }), _, _) | (_, Err(Error::Pole { .. }), _) | (_, _, Err(Error::Pole { .. })) => {
                    continue
                }
                (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return Err(e),
            };
            let u2 = Complex::with_val(p, u.square_ref());
            let qq = if which == 2 { Complex::with_val(p, q2.recip_ref()) } else { q2.clone() };
            let t2 = Complex::with_val(p, &qq * &u2) * b;
            let coef = Complex::with_val(p, 1 - Complex::with_val(p, &eps * &u)) + &u2;
            let t3 = coef * mid;
            let scale = cabs(&a) + cabs(&t2) + cabs(&t3);
            let lhs = a + t2;
            worst = worst.max(rel(&lhs, &t3, &scale));
            done += 1;
        }
        Ok(worst)
    }

    fn oracle(&mut self) -> Result<f64, Error> {
        let eps = self.random_eps();
        let mut worst = 0f64;
        for i in 0..GRID {
            for j in 0..GRID {
                let x = -0.9 + 1.8 * i as f64 / (GRID - 1) as f64;
                let y = -0.9 + 1.8 * j as f64 / (GRID - 1) as f64;
                let u = self.c(x, y);
                let (m, _) = chi_via_minf(&u, &eps, self.mp, self.ctx)?;
                let (s, _) = chi_eval(&u, &eps, self.mp, self.ctx)?;
                let scale = cabs(&s).max(&Float::with_val(self.ctx.bits(), 1)).clone();
                worst = worst.max(rel(&m, &s, &scale));
            }
        }
        Ok(worst)
    }

    /// θ₁(q²u) = -θ₁(u)/(qu) and θ₁(1/u) = -θ₁(u).
    fn theta_identities(&mut self) -> Result<f64, Error> {
        let p = self.ctx.bits();
        let lq = self.mp.log_q().clone();
        let mut worst = 0f64;
        for _ in 0..RANDOM_POINTS {
            let (x, y) = (self.rng.gen_range(-2.0..2.0), self.rng.gen_range(-3.0..3.0));
            let w = self.c(x, y);
            let t = theta1(&w, &lq, self.ctx)?;
            let shifted = theta1(&Complex::with_val(p, &w + Complex::with_val(p, &lq * 2u32)), &lq, self.ctx)?;
            let qu = Complex::with_val(p, &lq + &w).exp();
            let rhs = -Complex::with_val(p, &t / &qu);
            worst = worst.max(rel(&shifted, &rhs, &cabs(&rhs)));
            let inv = theta1(&Complex::with_val(p, -&w), &lq, self.ctx)?;
            worst = worst.max(rel(&inv, &Complex::with_val(p, -&t), &cabs(&t)));
        }
        Ok(worst)
    }

    /// conj θ₁(u) = b e^{iπ/4 - iπx²} θ₁(u) at u = e^{2πbx}, x real.
    fn theta_modular(&mut self) -> Result<f64, Error> {
        let p = self.ctx.bits();
        let pi = self.ctx.pi();
        let mut worst = 0f64;
        for _ in 0..RANDOM_POINTS {
            let x = Float::with_val(p, self.rng.gen_range(-1.5..1.5));
            let w = Complex::with_val(p, self.mp.b() * Float::with_val(p, &pi * &x)) * 2u32;
            let t = theta1(&w, self.mp.log_q(), self.ctx)?;
            let arg = Float::with_val(p, &pi / 4u32) - Float::with_val(p, &pi * Float::with_val(p, x.square_ref()));
            let rhs = Complex::with_val(p, (0, arg)).exp() * self.mp.b() * &t;
            worst = worst.max(rel(&Complex::with_val(p, t.conj_ref()), &rhs, &cabs(&rhs)));
        }
        Ok(worst)
    }

    fn wronskian_shift(&mut self) -> Result<f64, Error> {
        let p = self.ctx.bits();
        let q2 = Complex::with_val(p, self.mp.q().square_ref());
        let mut worst = 0f64;
        for _ in 0..RANDOM_POINTS {
            let (u, eps) = (self.random_u(), self.random_eps());
            let w = wronskian_eval(&u, &eps, self.mp, self.ctx)?;
            let ws = wronskian_eval(&Complex::with_val(p, &q2 * &u), &eps, self.mp, self.ctx)?;
            let den = Complex::with_val(p, &q2 * Complex::with_val(p, u.square_ref()));
            let rhs = Complex::with_val(p, &w.value / &den);
            let scale = Float::with_val(p, &w.scale / cabs(&den)) + &ws.scale;
            worst = worst.max(rel(&ws.value, &rhs, &scale));
        }
        Ok(worst)
    }

    /// Largest shortfall of the residue below 1 - q² for real ε and real
    /// q = |q|; zero when the bound holds.
    fn residue_bound(&mut self) -> Result<f64, Error> {
        let p = self.ctx.bits();
        let q = Complex::with_val(p, cabs(self.mp.q()));
        let floor = Float::with_val(p, 1) - Float::with_val(p, q.real().square_ref());
        let mut worst = 0f64;
        for _ in 0..RANDOM_POINTS {
            let e = self.rng.gen_range(-6.0..6.0);
            let eps = self.c(e, 0.0);
            let r = wronskian_residue(&eps, &q, self.ctx)?;
            let short = Float::with_val(p, &floor - r.real()).to_f64().max(0.0);
            worst = worst.max(short).max(r.imag().to_f64().abs());
        }
        Ok(worst)
    }

    /// χ(u)χ_{q⁻¹}(q²u) - q²u² χ_{q⁻¹}(u)χ(q²u) = 1.
    fn crochet(&mut self) -> Result<f64, Error> {
        let p = self.ctx.bits();
        let q2 = Complex::with_val(p, self.mp.q().square_ref());
        let mut worst = 0f64;
        for _ in 0..RANDOM_POINTS {
            let (u, eps) = (self.random_u(), self.random_eps());
            let q2u = Complex::with_val(p, &q2 * &u);
            let (a, b, da, db) = match (
                chi_eval(&u, &eps, self.mp, self.ctx),
                chi_eval(&q2u, &eps, self.mp, self.ctx),
                chi_dual_eval(&u, &eps, self.mp, self.ctx),
                chi_dual_eval(&q2u, &eps, self.mp, self.ctx),
            ) {
                (Ok((a, _)), Ok((b, _)), Ok(da), Ok(db)) => (a, b, da, db),
                (_, _, Err(Error::Pole { .. }), _) | (_, _, _, Err(Error::Pole { .. })) => continue,
                (Err(e), ..) | (_, Err(e), ..) | (.., Err(e), _) | (.., Err(e)) => return Err(e),
            };
            let t1 = Complex::with_val(p, &a * &db);
            let t2 = Complex::with_val(p, &q2 * Complex::with_val(p, u.square_ref())) * da * b;
            let scale = cabs(&t1) + cabs(&t2);
            worst = worst.max(rel(&(t1 - t2), &self.c(1.0, 0.0), &scale));
        }
        Ok(worst)
    }

    fn multiplication(&mut self) -> Result<f64, Error> {
        let eps = self.random_eps();
        let mut worst = 0f64;
        for m in 0..=MULT_MAX {
            for n in 0..=MULT_MAX {
                let r = chi_mult_check(m, n, &eps, self.mp, self.ctx)?;
                let scale = r.scale.to_f64().max(1.0);
                worst = worst.max(r.residual.to_f64() / scale);
            }
        }
        Ok(worst)
    }

    /// Count of misclassified trajectories: generic starts must tend to 0,
    /// starts on R_χ(z) to 1.
    fn r_limits(&mut self) -> Result<f64, Error> {
        // rounding errors on the exceptional trajectory grow like |q²u|⁻²
        // per step, so it is followed at no less than TRAJECTORY_BITS
        let fine = if self.ctx.bits() >= TRAJECTORY_BITS {
            self.ctx.clone()
        } else {
            PrecCtx::new(TRAJECTORY_BITS, self.ctx.tol())?
        };
        let mp = self.mp.at_precision(&fine)?;
        let (ctx, mp) = (&fine, &mp);
        let p = ctx.bits();
        let mut wrong = 0;
        for _ in 0..TRAJECTORIES {
            let z = Complex::with_val(p, self.random_u()) / 2u32;
            let eps = Complex::with_val(p, self.random_eps());
            let rc = r_chi(&z, &eps, mp, ctx)?;
            let crit = classify_r_orbit(&z, &rc, TRAJECTORY_STEPS, &eps, mp, ctx)?;
            if crit.limit != RLimit::ToOne || !crit.critical {
                wrong += 1;
            }
            let (x, y) = (self.rng.gen_range(-0.5..0.5), self.rng.gen_range(-0.5..0.5));
            let kick = Complex::with_val(p, (x, y));
            let r0 = Complex::with_val(p, &rc + kick);
            let generic = classify_r_orbit(&z, &r0, TRAJECTORY_STEPS, &eps, mp, ctx)?;
            if generic.limit != RLimit::ToZero || generic.critical {
                wrong += 1;
            }
        }
        Ok(wrong as f64)
    }
}

/// Runs all checks. `fault` shifts the quantized ε of the eigenfunction
/// checks off the spectrum.
pub fn run_suite(ctx: &PrecCtx, mp: &ModularParam, fault: bool) -> Vec<CheckOutcome> {
    let tol = ctx.tol();
    let loose = tol.sqrt();
    let mut s = Suite { ctx, mp, rng: ChaCha8Rng::seed_from_u64(SEED), out: Vec::new() };
    s.run("chi functional equation", 10.0 * tol, |s| s.functional_equation(0));
    s.run("chi-check functional equation", 10.0 * tol, |s| s.functional_equation(1));
    s.run("dual functional equation", 10.0 * tol, |s| s.functional_equation(2));
    s.run("oracle equivalence", 10.0 * tol, Suite::oracle);
    s.run("theta identities", 10.0 * tol, Suite::theta_identities);
    s.run("theta modular relation", 10.0 * tol, Suite::theta_modular);
    s.run("wronskian shift relation", 10.0 * tol, Suite::wronskian_shift);
    s.run("wronskian residue bound", 0.0, Suite::residue_bound);
    s.run("crochet identity", 10.0 * tol, Suite::crochet);
    s.run("multiplication rule", 10.0 * tol, Suite::multiplication);
    s.run("R-trajectory limits", 0.0, Suite::r_limits);

    let states = eigenstates(ctx, mp, fault);
    let mut out = s.out;
    match states {
        Ok(states) => out.extend(eigenfunction_checks(&states, ctx, loose)),
        Err(e) => {
            for name in ["eigenfunction parity", "eigenfunction reality", "eigenfunction decay", "pole cancellation"] {
                out.push(CheckOutcome { name, residual: f64::NAN, bound: loose, error: Some(e.to_string()) });
            }
        }
    }
    out.extend(selfdual_checks(ctx, loose));
    out
}

/// The sheet-1 states of both parities.
fn eigenstates(ctx: &PrecCtx, mp: &ModularParam, fault: bool) -> Result<Vec<EigenfunctionParams>, Error> {
    let orbit = trace_orbit(1, 64, mp, ctx)?;
    let mut states = Vec::new();
    for par in [Parity::Even, Parity::Odd] {
        for pt in quantize(&orbit, par, mp, ctx)? {
            let st = EigenfunctionParams::new(&pt, mp, ctx)?;
            states.push(if fault {
                let delta = Complex::with_val(ctx.bits(), &pt.eps * FAULT);
                st.detuned(&delta)
            } else {
                st
            });
        }
    }
    Ok(states)
}

fn eigenfunction_checks(states: &[EigenfunctionParams], ctx: &PrecCtx, bound: f64) -> Vec<CheckOutcome> {
    let p = ctx.bits();
    let collect = |name: &'static str, bound: f64, f: &dyn Fn(&EigenfunctionParams) -> Result<f64, Error>| {
        let mut worst = 0f64;
        for st in states {
            match f(st) {
                Ok(r) => worst = worst.max(r),
                Err(e) => return CheckOutcome { name, residual: f64::NAN, bound, error: Some(e.to_string()) },
            }
        }
        CheckOutcome { name, residual: worst, bound, error: None }
    };
    let c = |x: f64| Complex::with_val(p, x);
    vec![
        collect("eigenfunction parity", bound, &|st| {
            let mut w = 0f64;
            for x in [0.2, 0.75, 1.4] {
                let a = psi_eval(&c(x), st, ctx)?;
                let b = psi_eval(&c(-x), st, ctx)?;
                w = w.max(rel(&Complex::with_val(p, &a * st.parity.xi()), &b, &cabs(&a)));
            }
            Ok(w)
        }),
        collect("eigenfunction reality", bound, &|st| {
            let mut w = 0f64;
            for x in [0.2, 0.75, 1.4] {
                let a = psi_eval(&c(x), st, ctx)?;
                w = w.max((Float::with_val(p, a.imag().abs_ref()) / cabs(&a)).to_f64());
            }
            Ok(w)
        }),
        collect("eigenfunction decay", DECAY, &|st| {
            let mags: Vec<f64> =
                [1.5, 2.5, 3.5].iter().map(|&x| psi_eval(&c(x), st, ctx).map(|v| cabs(&v).to_f64())).collect::<Result<_, _>>()?;
            Ok((mags[1] / mags[0]).max(mags[2] / mags[1]))
        }),
        collect("pole cancellation", bound, &|st| Ok(pole_cancellation_check(st, ctx)?.max())),
    ]
}

fn selfdual_checks(ctx: &PrecCtx, bound: f64) -> Vec<CheckOutcome> {
    let names = ["self-dual cycle integrality", "self-dual harper residual"];
    let run = || -> Result<(f64, f64), Error> {
        let spec = quantize_selfdual(0, ctx)?;
        let p = ctx.bits();
        let (xi, zeta) = cycle_integrals(&spec, ctx)?;
        let one = Complex::with_val(p, spec.n + 1);
        let cyc = rel(&xi, &one, &Float::with_val(p, 1)).max(cabs(&zeta).to_f64());
        let mut harper = 0f64;
        for t in [0.1, 0.3, 0.6] {
            harper = harper.max(harper_residual(&Float::with_val(p, t), &spec, ctx)?.to_f64());
        }
        Ok((cyc, harper))
    };
    match run() {
        Ok((c, h)) => vec![
            CheckOutcome { name: names[0], residual: c, bound, error: None },
            CheckOutcome { name: names[1], residual: h, bound, error: None },
        ],
        Err(e) => names
            .iter()
            .map(|&name| CheckOutcome { name, residual: f64::NAN, bound, error: Some(e.to_string()) })
            .collect(),
    }
}
