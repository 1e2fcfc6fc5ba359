//! Self-contained check suites: algebraic identities, kernel asymptotics, and output
//! determinism.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use qseries_core::asymptotics::chi;
use qseries_core::numeric::{LogForm, PrecisionContext};
use qseries_core::qkernel::{
    dedekind_eta_direct, euler_gamma, lemma2_qq_inf_asym, lemma3_qx_inf_asym, q_gamma, qpoch_infinite, QParam,
};
use qseries_core::series::{self, HypergeometricSpec};
use qseries_core::theta::{theta_product, theta_series, theta_transformed, ThetaIndex, ThetaPoint};

use crate::config::{study_plan, CheckConfig, RawConfig, StudyConfig};
use crate::emit::{write_csv, write_json};
use crate::error::{HarnessError, Result};
use crate::study::run_study;

/// Names accepted by the `suite` key.
pub const SUITES: &[&str] = &["identities", "kernel-asymptotics", "determinism"];

/// One named check with its measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Every check of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckLine>,
    pub passed: bool,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<CheckLine>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        SuiteReport {
            suite: suite.to_string(),
            checks,
            passed,
        }
    }
}

fn line(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckLine {
    CheckLine {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn rel(a: &Complex, b: &Complex) -> f64 {
    let prec = a.prec().0.max(b.prec().0);
    let d = Float::with_val(prec, Complex::with_val(prec, a - b).abs_ref());
    let m = Float::with_val(prec, b.abs_ref());
    if m.is_zero() {
        d.to_f64()
    } else {
        (d / m).to_f64()
    }
}

/// Largest relative deviation over a set of samples, or the first error.
struct Worst {
    value: f64,
    at: String,
    error: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            at: String::new(),
            error: None,
        }
    }

    fn record(&mut self, r: qseries_core::Result<f64>, at: impl FnOnce() -> String) {
        match r {
            Ok(x) if x.is_nan() => {
                self.error.get_or_insert_with(|| format!("NaN at {}", at()));
            }
            Ok(x) if x > self.value => {
                self.value = x;
                self.at = at();
            }
            Ok(_) => {}
            Err(e) => {
                self.error.get_or_insert_with(|| format!("{e} at {}", at()));
            }
        }
    }

    fn into_line(self, name: &str, tol: f64) -> CheckLine {
        match self.error {
            Some(e) => line(name, false, e),
            None => line(
                name,
                self.value <= tol,
                if self.at.is_empty() {
                    format!("max deviation {:.3e} (tolerance {tol:.1e})", self.value)
                } else {
                    format!("max deviation {:.3e} (tolerance {tol:.1e}) at {}", self.value, self.at)
                },
            ),
        }
    }
}

const THETA_INDICES: [ThetaIndex; 4] = [ThetaIndex::One, ThetaIndex::Two, ThetaIndex::Three, ThetaIndex::Four];

fn theta_product_check(rng: &mut ChaCha8Rng, ctx: &PrecisionContext) -> CheckLine {
    let tol = 8.0 * ctx.rel_tol();
    let mut worst = Worst::new();
    for index in THETA_INDICES {
        for tau in [0.5, 1.0, 3.0] {
            for _ in 0..16 {
                let v: f64 = rng.gen_range(-1.0..1.0);
                let r = ThetaPoint::new(index, v, tau).and_then(|p| {
                    let s = theta_series(&p, ctx)?;
                    let t = theta_product(&p, ctx)?;
                    // near a zero both sides sit below the absolute floor
                    let floor = Float::with_val(ctx.bits(), Float::i_exp(1, -(ctx.bits() as i32) + 8));
                    if Float::with_val(ctx.bits(), s.abs_ref()) < floor {
                        return Ok(
                            Float::with_val(ctx.bits(), Complex::with_val(ctx.bits(), &t - &s).abs_ref())
                                .to_f64()
                                .min(tol),
                        );
                    }
                    Ok(rel(&t, &s))
                });
                worst.record(r, || format!("theta{} v={v} tau={tau}", index.number()));
            }
        }
    }
    worst.into_line("theta triple product equals series", tol)
}

fn theta_modular_check(rng: &mut ChaCha8Rng, ctx: &PrecisionContext) -> CheckLine {
    let tol = 8.0 * ctx.rel_tol();
    let mut worst = Worst::new();
    for index in THETA_INDICES {
        for tau in [0.2, 0.5, 2.0] {
            for _ in 0..8 {
                let v: f64 = rng.gen_range(-1.0..1.0);
                let r = ThetaPoint::new(index, v, tau).and_then(|p| {
                    let wide = ctx.with_bits(ctx.bits() * 2)?;
                    let s = LogForm::from_complex(&theta_series(&p, &wide)?);
                    let t = theta_transformed(&p, ctx)?;
                    Ok(t.rel_diff_f64(&s))
                });
                worst.record(r, || format!("theta{} v={v} tau={tau}", index.number()));
            }
        }
    }
    worst.into_line("theta modular transform equals series", tol)
}

fn eta_check(ctx: &PrecisionContext) -> CheckLine {
    let tol = ctx.rel_tol();
    let mut worst = Worst::new();
    for t in [2u32, 5, 17] {
        let prec = ctx.bits();
        let r = (|| {
            let tf = Float::with_val(prec, t);
            let small = dedekind_eta_direct(&Float::with_val(prec, tf.recip_ref()), ctx)?;
            let large = dedekind_eta_direct(&tf, ctx)?;
            let rhs = large * tf.sqrt();
            Ok(((Float::with_val(prec, &small - &rhs)).abs() / small).to_f64())
        })();
        worst.record(r, || format!("t={t}"));
    }
    worst.into_line("eta(i/t) = sqrt(t) eta(i t)", tol)
}

/// A uniform draw from `[lo, hi)` on the lattice `2^-10 Z`.
///
/// Family parameters enter the `g`/`h` routes as shifted exponents such as
/// `alpha + 1`; on this lattice the shift is exact in double precision, so both
/// routes see the same number.
fn dyadic(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let k = rng.gen_range((lo * 1024.0) as i64..(hi * 1024.0) as i64);
    k as f64 / 1024.0
}

fn two_route_checks(rng: &mut ChaCha8Rng, ctx: &PrecisionContext) -> Vec<CheckLine> {
    let tol = 8.0 * ctx.rel_tol();
    let prec = ctx.bits();
    let names = [
        "Ramanujan A_q: defining series vs g",
        "Jackson J^(2): defining series vs g",
        "Ismail-Masson: defining series vs h",
        "Stieltjes-Wigert: defining series vs h",
        "q-Laguerre: defining series vs h",
        "confluent r-phi-s: defining series vs g",
    ];
    let mut worst: Vec<Worst> = names.iter().map(|_| Worst::new()).collect();
    for qv in [0.3, 0.6, 0.9] {
        let q = match QParam::from_nome_f64(qv) {
            Ok(q) => q,
            Err(e) => return vec![line("two-route equalities", false, e.to_string())],
        };
        for _ in 0..6 {
            let n: usize = rng.gen_range(0..=20);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let x: f64 = sign * rng.gen_range(0.1..3.0);
            let z = Complex::with_val(prec, (x, rng.gen_range(-1.0..1.0)));
            let xr = Complex::with_val(prec, x.abs());
            let nu = dyadic(rng, 0.0, 2.0);
            let alpha = dyadic(rng, -0.5, 2.0);
            let xi = Complex::with_val(prec, (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let at = |extra: String| move || format!("q={qv} n={n} {extra}");

            worst[0].record(
                series::ramanujan_aq_direct(&z, &q, ctx).and_then(|a| Ok(rel(&series::ramanujan_aq(&z, &q, ctx)?, &a))),
                at(format!("z={z:.6}")),
            );
            worst[1].record(
                series::jackson_qbessel2(&xr, nu, &q, ctx)
                    .and_then(|a| Ok(rel(&series::jackson_qbessel2_g(&xr, nu, &q, ctx)?, &a))),
                at(format!("x={x} nu={nu}")),
            );
            worst[2].record(
                series::ismail_masson(n, &xi, &q, ctx)
                    .and_then(|a| Ok(rel(&series::ismail_masson_h(n, &xi, &q, ctx)?, &a))),
                at(format!("xi={xi:.6}")),
            );
            worst[3].record(
                series::stieltjes_wigert(n, &z, &q, ctx)
                    .and_then(|a| Ok(rel(&series::stieltjes_wigert_h(n, &z, &q, ctx)?, &a))),
                at(format!("x={z:.6}")),
            );
            worst[4].record(
                series::q_laguerre(n, alpha, &z, &q, ctx)
                    .and_then(|a| Ok(rel(&series::q_laguerre_h(n, alpha, &z, &q, ctx)?, &a))),
                at(format!("x={z:.6} alpha={alpha}")),
            );
            let (r, s) = [(0usize, 1usize), (1, 2), (0, 2), (1, 1)][rng.gen_range(0..4)];
            let alphas: Vec<f64> = (0..r).map(|_| dyadic(rng, 0.3, 2.0)).collect();
            let betas: Vec<f64> = (0..s).map(|_| dyadic(rng, 0.3, 2.0)).collect();
            let desc = format!("alphas={alphas:?} betas={betas:?} z={z:.6}");
            worst[5].record(
                HypergeometricSpec::new(alphas, betas).and_then(|spec| {
                    let a = series::basic_hypergeometric(&spec, &z, &q, ctx)?;
                    Ok(rel(&series::basic_hypergeometric_g(&spec, &z, &q, ctx)?, &a))
                }),
                at(desc),
            );
        }
    }
    worst
        .into_iter()
        .zip(names)
        .map(|(w, name)| w.into_line(name, tol))
        .collect()
}

// The identities are stated with floors of halves; keep them in that form.
#[allow(clippy::manual_div_ceil, clippy::manual_is_multiple_of)]
fn chi_check() -> CheckLine {
    let bad = (0..=10_000u64).find(|&n| {
        let c = chi(n) as u64;
        c != (n + 1) / 2 - n / 2 || n / 2 != (n - c) / 2 || (n + 1) / 2 != (n + c) / 2 || (n * n - c) % 4 != 0
    });
    match bad {
        None => line("parity indicator identities for n <= 10000", true, "all hold exactly"),
        Some(n) => line(
            "parity indicator identities for n <= 10000",
            false,
            format!("fails at n = {n}"),
        ),
    }
}

/// Algebraic identities that must hold to working tolerance.
pub fn identities(cfg: &CheckConfig) -> SuiteReport {
    let ctx = &cfg.precision;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = vec![
        theta_product_check(&mut rng, ctx),
        theta_modular_check(&mut rng, ctx),
        eta_check(ctx),
    ];
    checks.extend(two_route_checks(&mut rng, ctx));
    checks.push(chi_check());
    SuiteReport::new("identities", checks)
}

fn lemma2_check(prec: u32) -> CheckLine {
    let mut detail = Vec::new();
    let mut ok = true;
    for lam in [5u32, 10, 20] {
        let lambda = Float::with_val(prec, lam);
        let r = (|| -> qseries_core::Result<(f64, f64)> {
            let q = QParam::new(lambda.clone())?;
            let ctx = PrecisionContext::new(prec, 1e-150, 4 * prec)?;
            let qq = qpoch_infinite(&Complex::with_val(prec, q.q(prec)), &q, &ctx)?;
            let main = lemma2_qq_inf_asym(&lambda, prec);
            let dev = LogForm::from_complex(&qq).ln_rel_diff(&main);
            let bound = (10f64).ln() - 4.0 * std::f64::consts::PI * lam as f64;
            Ok((dev, bound))
        })();
        match r {
            Ok((dev, bound)) => {
                ok &= dev <= bound;
                detail.push(format!("lambda={lam}: ln dev {dev:.2} vs ln bound {bound:.2}"));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("lambda={lam}: {e}"));
            }
        }
    }
    line("(q;q)_inf main term within 10 exp(-4 pi lambda)", ok, detail.join("; "))
}

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn lemma3_check(prec: u32) -> CheckLine {
    let mut detail = Vec::new();
    let mut ok = true;
    for x in [0.5, 2.0] {
        let r = [10u32, 20, 40, 80]
            .into_iter()
            .map(|lam| -> qseries_core::Result<f64> {
                let lambda = Float::with_val(prec, lam);
                let q = QParam::new(lambda.clone())?;
                let ctx = PrecisionContext::new(prec, 1e-60, 4 * prec)?;
                let xf = Float::with_val(prec, x);
                let exact = qpoch_infinite(&Complex::with_val(prec, q.pow(&xf, prec)), &q, &ctx)?;
                let main = lemma3_qx_inf_asym(&xf, &lambda, prec)?;
                Ok(LogForm::from_complex(&exact).rel_diff_f64(&main))
            })
            .collect::<qseries_core::Result<Vec<f64>>>();
        match r {
            Ok(devs) => {
                ok &= decreasing(&devs);
                detail.push(format!(
                    "x={x}: {:?}",
                    devs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()
                ));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("x={x}: {e}"));
            }
        }
    }
    line(
        "(q^x;q)_inf main term: deviation decreasing in lambda",
        ok,
        detail.join("; "),
    )
}

/// Largest fitted constant admitted in `|Gamma_q / Gamma - 1| <= C (1-q) ln^2(1-q)`.
pub const Q_GAMMA_CONSTANT_LIMIT: f64 = 100.0;

fn q_gamma_check(prec: u32) -> CheckLine {
    let mut detail = Vec::new();
    let mut ok = true;
    for x in [0.5, 1.5, 3.2] {
        let r = [10u32, 20, 40, 80]
            .into_iter()
            .map(|lam| -> qseries_core::Result<(f64, f64)> {
                let q = QParam::new(Float::with_val(prec, lam))?;
                let ctx = PrecisionContext::new(prec, 1e-60, 4 * prec)?;
                let xf = Float::with_val(prec, x);
                let gq = q_gamma(&Complex::with_val(prec, &xf), &q, &ctx)?;
                let g = euler_gamma(&xf, prec)?;
                let dev = rel(&gq, &Complex::with_val(prec, g));
                let omq = q.one_minus_q(prec).to_f64();
                Ok((dev, dev / (omq * omq.ln().powi(2))))
            })
            .collect::<qseries_core::Result<Vec<_>>>();
        match r {
            Ok(v) => {
                let devs: Vec<f64> = v.iter().map(|p| p.0).collect();
                let c = v.iter().map(|p| p.1).fold(0.0, f64::max);
                ok &= decreasing(&devs) && c < Q_GAMMA_CONSTANT_LIMIT;
                detail.push(format!(
                    "x={x}: fitted C {c:.3}, deviations {:?}",
                    devs.iter().map(|d| format!("{d:.3e}")).collect::<Vec<_>>()
                ));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("x={x}: {e}"));
            }
        }
    }
    line("Gamma_q -> Gamma at the (1-q) ln^2(1-q) rate", ok, detail.join("; "))
}

/// Asymptotics of the infinite products and of the q-Gamma function.
pub fn kernel_asymptotics(cfg: &CheckConfig) -> SuiteReport {
    // exp(-4 pi 20) is about 1e-109, so the products need well over 400 bits
    let prec = cfg.precision.bits().max(640);
    SuiteReport::new(
        "kernel-asymptotics",
        vec![
            lemma2_check(prec),
            lemma3_check(cfg.precision.bits()),
            q_gamma_check(cfg.precision.bits()),
        ],
    )
}

/// Serialise every study of a plan to CSV and JSON bytes.
pub fn plan_bytes(plan: &[StudyConfig]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for cfg in plan {
        let report = run_study(cfg)?;
        write_csv(&report.rows, &mut out)?;
        write_json(&report.rows, &report.summary, &mut out)?;
    }
    Ok(out)
}

/// Serial and parallel evaluation, two runs each, must produce identical bytes.
pub fn determinism(cfg: &CheckConfig) -> Result<SuiteReport> {
    let path = cfg
        .study_config
        .as_deref()
        .ok_or_else(|| HarnessError::config("the determinism suite needs study-config"))?;
    let plan = load_plan(path)?;
    let with_threads = |t: usize| -> Vec<StudyConfig> {
        plan.iter()
            .cloned()
            .map(|mut c| {
                c.threads = t;
                c
            })
            .collect()
    };
    let serial = with_threads(1);
    let parallel = with_threads(0);
    let runs = [
        plan_bytes(&serial)?,
        plan_bytes(&serial)?,
        plan_bytes(&parallel)?,
        plan_bytes(&parallel)?,
    ];
    let labels = ["serial run 2", "parallel run 1", "parallel run 2"];
    let checks = runs[1..]
        .iter()
        .zip(labels)
        .map(|(bytes, label)| {
            line(
                format!("{label} identical to serial run 1"),
                *bytes == runs[0],
                format!("{} bytes vs {} bytes", bytes.len(), runs[0].len()),
            )
        })
        .collect();
    Ok(SuiteReport::new("determinism", checks))
}

/// Load a study plan from a config file.
pub fn load_plan(path: &Path) -> Result<Vec<StudyConfig>> {
    study_plan(&RawConfig::load(path)?)
}

/// Run the configured suites in order.
pub fn run_checks(cfg: &CheckConfig) -> Result<Vec<SuiteReport>> {
    cfg.suites
        .iter()
        .map(|s| match s.as_str() {
            "identities" => Ok(identities(cfg)),
            "kernel-asymptotics" => Ok(kernel_asymptotics(cfg)),
            "determinism" => determinism(cfg),
            other => Err(HarnessError::config(format!("unknown suite '{other}'"))),
        })
        .collect()
}
