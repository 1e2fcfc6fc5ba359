//! Remainder-bound sweeps: the truncated-product remainders and the theta reductions of
//! the two master series, each compared against its stated upper bound.
//!
//! A violated bound is a report entry, never an error.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use qseries_core::qkernel::{lemma1_remainders, QParam};
use qseries_core::series::{lemma4_reduction, lemma5_reduction, Reduction, SeriesParams};

use crate::config::BoundsConfig;
use crate::error::Result;

/// One checked point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// 1 for the truncated product, 4 for `g`, 5 for `h`.
    pub lemma: u8,
    pub n: u64,
    /// The nome, or `exp(-pi / lambda_n)` for the reductions.
    pub q: f64,
    /// `|z|` for the reductions, `|a|` for the truncated product.
    pub abs_arg: f64,
    /// `v` with `z = exp(2 pi v)`; absent for the truncated product.
    pub v: Option<f64>,
    pub residual: f64,
    pub bound: f64,
    /// `(bound - residual) / bound`.
    pub margin: f64,
    pub holds: bool,
    /// Set when the point could not be evaluated.
    pub error: Option<String>,
}

/// Outcome per lemma.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub lemma: u8,
    pub points: usize,
    pub violations: usize,
    pub min_margin: f64,
    pub passed: bool,
}

/// Every check plus per-lemma summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
    pub summaries: Vec<LemmaSummary>,
    pub passed: bool,
}

fn failed_point(lemma: u8, n: u64, v: Option<f64>, err: impl ToString) -> BoundCheck {
    BoundCheck {
        lemma,
        n,
        q: f64::NAN,
        abs_arg: f64::NAN,
        v,
        residual: f64::NAN,
        bound: f64::NAN,
        margin: f64::NEG_INFINITY,
        holds: false,
        error: Some(err.to_string()),
    }
}

/// Seeded sweep of the truncated-product remainders `r1`, `r2` against `2|a|q^n/(1-q)`.
pub fn lemma1_sweep(cfg: &BoundsConfig) -> Vec<BoundCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ctx = &cfg.precision;
    (0..cfg.samples)
        .map(|_| {
            let qv: f64 = rng.gen_range(0.1..0.9);
            let r: f64 = rng.gen_range(0.05..3.0);
            let theta: f64 = rng.gen_range(-PI..PI);
            let extra: u64 = rng.gen_range(0..6);
            // smallest n with |a| q^n / (1 - q) < 1/2, then a random offset
            let mut n = 0u64;
            while r * qv.powi(n as i32) / (1.0 - qv) >= 0.45 {
                n += 1;
            }
            n += extra;
            let q = match QParam::from_nome_f64(qv) {
                Ok(q) => q,
                Err(e) => return failed_point(1, n, None, e),
            };
            let prec = ctx.bits();
            let a = Complex::with_val(prec, (r * theta.cos(), r * theta.sin()));
            match lemma1_remainders(&a, &q, n as usize, ctx) {
                Ok(rem) => {
                    let worst = Float::with_val(prec, rem.r1.abs_ref()).max(&Float::with_val(prec, rem.r2.abs_ref()));
                    let bound = rem.bound.to_f64();
                    let residual = worst.to_f64();
                    BoundCheck {
                        lemma: 1,
                        n,
                        q: qv,
                        abs_arg: r,
                        v: None,
                        residual,
                        bound,
                        margin: ((rem.bound.clone() - &worst) / &rem.bound).to_f64(),
                        holds: worst <= rem.bound,
                        error: None,
                    }
                }
                Err(e) => failed_point(1, n, None, e),
            }
        })
        .collect()
}

fn reduction_point(lemma: u8, n: u64, v: f64, qv: f64, abs_z: f64, red: Reduction) -> BoundCheck {
    let prec = red.bound.prec();
    BoundCheck {
        lemma,
        n,
        q: qv,
        abs_arg: abs_z,
        v: Some(v),
        residual: Float::with_val(prec, red.residual.abs_ref()).to_f64(),
        bound: red.bound.to_f64(),
        margin: red.margin(),
        holds: red.holds(),
        error: None,
    }
}

/// Default degree grids of the two theta reductions.
pub fn default_n_grid(lemma: u8) -> Vec<u64> {
    match lemma {
        4 => (6..=16).collect(),
        _ => (8..=24).collect(),
    }
}

/// Theta-reduction sweep of `g` (`lemma = 4`) or `h` (`lemma = 5`) at `z = exp(2 pi v)`,
/// `q = exp(-pi / lambda_n)`.
pub fn reduction_sweep(cfg: &BoundsConfig, lemma: u8) -> Result<Vec<BoundCheck>> {
    let ctx = &cfg.precision;
    let prec = ctx.bits() + 64;
    let p = SeriesParams::plain(cfg.ell)?;
    let grid = cfg.n_grid.clone().unwrap_or_else(|| default_n_grid(lemma));
    let mut out = Vec::new();
    for &n in &grid {
        let lambda = cfg.scale.value(n, prec)?;
        let q = QParam::new(lambda)?;
        let qv = q.q(64).to_f64();
        for &v in &cfg.v_grid {
            let pi = Float::with_val(prec, rug::float::Constant::Pi);
            let z = Complex::with_val(prec, (pi * v * 2u32).exp());
            let abs_z = (2.0 * PI * v).exp();
            let res = if lemma == 4 {
                lemma4_reduction(&p, &z, n as usize, &q, ctx)
            } else {
                lemma5_reduction(&p, &z, n as usize, &q, cfg.variant, ctx)
            };
            out.push(match res {
                Ok(red) => reduction_point(lemma, n, v, qv, abs_z, red),
                Err(e) => failed_point(lemma, n, Some(v), e),
            });
        }
    }
    Ok(out)
}

fn summarize(lemma: u8, checks: &[BoundCheck]) -> LemmaSummary {
    let mine: Vec<&BoundCheck> = checks.iter().filter(|c| c.lemma == lemma).collect();
    let violations = mine.iter().filter(|c| !c.holds).count();
    LemmaSummary {
        lemma,
        points: mine.len(),
        violations,
        min_margin: mine.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min),
        passed: !mine.is_empty() && violations == 0,
    }
}

/// Run every configured sweep.
pub fn run_bound_checks(cfg: &BoundsConfig) -> Result<BoundReport> {
    let mut checks = Vec::new();
    for &lemma in &cfg.lemmas {
        match lemma {
            1 => checks.extend(lemma1_sweep(cfg)),
            _ => checks.extend(reduction_sweep(cfg, lemma)?),
        }
    }
    let summaries: Vec<LemmaSummary> = cfg.lemmas.iter().map(|&l| summarize(l, &checks)).collect();
    let passed = summaries.iter().all(|s| s.passed);
    Ok(BoundReport {
        checks,
        summaries,
        passed,
    })
}
