//! Convergence studies: exact series values against their asymptotic approximants
//! along an admissible scale.
//!
//! Each `(n, v)` point is evaluated independently, so rows can be computed by a pool of
//! workers. The collected rows are ordered by `(n, v)` before anything is emitted; the
//! output therefore does not depend on scheduling.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use rug::{Complex, Float};
use serde::{Deserialize, Serialize};

use qseries_core::asymptotics::{self, AsymResult, BetaDenominator, Branch};
use qseries_core::numeric::{LogForm, NumericError};
use qseries_core::qkernel::QParam;
use qseries_core::series::{self, Evaluated, HypergeometricSpec, SeriesParams};

use crate::config::{Family, StudyConfig};
use crate::error::{HarnessError, Result};

/// A per-row annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    /// `|oscillatory_factor|` fell below the threshold; the row is excluded from fits.
    NearCosZero,
    /// The exact value needed more than the starting precision.
    PrecisionEscalated,
    /// The exact value could not be certified within the precision cap.
    PrecisionExhausted,
    /// The exact value failed for another numerical reason.
    EvaluationFailed,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::NearCosZero => "near-cos-zero",
            Flag::PrecisionEscalated => "precision-escalated",
            Flag::PrecisionExhausted => "precision-exhausted",
            Flag::EvaluationFailed => "evaluation-failed",
        }
    }
}

/// One `(n, v)` comparison.
///
/// Exact-value fields are absent when the exact value could not be computed; the
/// flags then say why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: u64,
    pub lambda_n: f64,
    pub v: f64,
    pub exact_log_mag: Option<f64>,
    pub exact_phase: Option<f64>,
    pub asym_log_mag: f64,
    pub asym_phase: f64,
    pub oscillatory_factor: f64,
    pub rel_error: Option<f64>,
    pub claimed_order_value: f64,
    pub bits_used: u32,
    pub wall_time_ms: f64,
    pub flags: Vec<Flag>,
}

impl StudyRow {
    pub fn has(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    /// Whether the row enters the decay fit.
    pub fn usable(&self) -> bool {
        !self.has(Flag::NearCosZero) && self.rel_error.is_some_and(|e| e > 0.0)
    }
}

/// The decay fit for one value of `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VFit {
    pub v: f64,
    /// Rows entering the fit.
    pub points: usize,
    /// Least-squares slope of `ln rel_error` against `lambda_n`.
    pub slope: Option<f64>,
    /// `slope / (pi / l)`.
    pub normalized_slope: Option<f64>,
    /// Slope of `ln rel_error` against `ln(lambda^-1 ln^2 lambda)` (confluent only).
    pub polynomial_slope: Option<f64>,
    /// Largest `rel_error / (lambda^-1 ln^2 lambda)` over the top half of the grid (confluent only).
    pub top_half_max_ratio: Option<f64>,
    /// Slope of `ln(rel_error / (lambda^-1 ln^2 lambda))` against `lambda` over the top half (confluent only).
    pub top_half_ratio_trend: Option<f64>,
    /// Largest `rel_error` among retained rows at the largest `n`.
    pub top_rel_error: Option<f64>,
    /// `None` when too few points survive to judge.
    pub passed: Option<bool>,
}

/// What a study was judged against, with the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub label: String,
    pub family: String,
    pub branch: String,
    pub variant: String,
    pub beta_denominator: String,
    pub ell: f64,
    pub rows: usize,
    /// Rows excluded for a small oscillatory factor.
    pub excluded_near_cos_zero: usize,
    /// Rows without a certified exact value.
    pub exhausted: usize,
    pub escalated: usize,
    pub criterion: String,
    pub fits: Vec<VFit>,
    pub passed: bool,
}

/// Rows plus summary of one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub summary: StudySummary,
}

/// Slope band for exponential decay, in units of `pi / l`.
pub fn slope_band(branch: Branch) -> (f64, f64) {
    match branch {
        Branch::Minus => (-1.25, -0.75),
        Branch::Plus => (-2.5, -1.5),
    }
}

/// Largest admissible fitted constant in `rel_error <= C lambda^-1 ln^2 lambda`.
pub const POLYNOMIAL_CONSTANT_LIMIT: f64 = 100.0;

fn ln_exp_arg(cfg: &StudyConfig, n: u64, v: f64, lambda: &Float, prec: u32) -> LogForm {
    // x = -/+ exp(2 pi v' + shift pi / lambda), with v' = -v only for the literal
    // q-Laguerre convention.
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let nf = Float::with_val(prec, n);
    let p = &cfg.params;
    let f = |x: f64| Float::with_val(prec, x);
    let shift = match cfg.family {
        Family::G => nf * 4u32 * p.ell,
        Family::H => nf * p.ell,
        Family::Ramanujan => nf * 4u32,
        Family::Jackson => nf * 4u32 + p.nu,
        Family::StieltjesWigert => nf,
        Family::QLaguerre => nf + p.alpha,
        Family::Confluent => (nf * 4u32 - 1u32) * cfg.ell_eff(),
        Family::IsmailMasson => f(0.0),
    };
    let mut two_pi_v = Float::with_val(prec, &pi * v) * 2u32;
    if cfg.family == Family::QLaguerre && asymptotics::laguerre_ln_z(1.0, cfg.variant) < 0.0 {
        two_pi_v = -two_pi_v;
    }
    let log = two_pi_v + Float::with_val(prec, &pi * shift) / lambda;
    let phase = match cfg.branch {
        Branch::Minus => pi,
        Branch::Plus => Float::new(prec),
    };
    LogForm::new(log, phase)
}

fn exact_value(
    cfg: &StudyConfig,
    n: u64,
    v: f64,
    q: &QParam,
    lambda: &Float,
) -> qseries_core::Result<Evaluated<LogForm>> {
    let ctx = &cfg.precision;
    let prec = ctx.bits() + 64;
    let p = &cfg.params;
    let arg = ln_exp_arg(cfg, n, v, lambda, prec);
    let mut mag = Float::with_val(prec, arg.log_mag().exp_ref());
    if cfg.branch == Branch::Minus {
        mag = -mag;
    }
    let x = Complex::with_val(prec, mag);
    let as_log = |e: Evaluated<Complex>| e.map(|c| LogForm::from_complex(&c));
    let deg = n as usize;
    Ok(match cfg.family {
        Family::G => {
            let sp = SeriesParams::new(p.alphas.clone(), p.betas.clone(), vec![], p.ell)?;
            as_log(series::g_eval_detailed(&sp, &x, q, ctx)?)
        }
        Family::H => {
            let sp = SeriesParams::new(p.alphas.clone(), p.betas.clone(), p.gammas.clone(), p.ell)?;
            as_log(series::h_eval_detailed(&sp, deg, &x, q, ctx)?)
        }
        Family::Ramanujan => as_log(series::ramanujan_aq_detailed(&x, q, ctx)?),
        Family::Jackson => {
            let half_ln = Float::with_val(prec, arg.log_mag() / 2u32);
            let phase = match cfg.branch {
                Branch::Minus => Float::with_val(prec, rug::float::Constant::Pi) * p.nu / 2u32,
                Branch::Plus => Float::new(prec),
            };
            let half_pow_nu = LogForm::new(half_ln * p.nu, phase);
            series::jackson_qbessel2_scaled_detailed(&x, &half_pow_nu, p.nu, q, ctx)?
        }
        Family::IsmailMasson => {
            let pi = Float::with_val(prec, rug::float::Constant::Pi);
            let re = Float::with_val(prec, &pi * v);
            let im = match cfg.branch {
                Branch::Minus => pi / 2u32,
                Branch::Plus => Float::new(prec),
            };
            let xi = Complex::with_val(prec, (re, im));
            as_log(series::ismail_masson_detailed(deg, &xi, q, ctx)?)
        }
        Family::StieltjesWigert => as_log(series::stieltjes_wigert_detailed(deg, &x, q, ctx)?),
        Family::QLaguerre => as_log(series::q_laguerre_detailed(deg, p.alpha, &x, q, ctx)?),
        Family::Confluent => {
            let spec = HypergeometricSpec::new(p.alphas.clone(), p.betas.clone())?;
            as_log(series::basic_hypergeometric_detailed(&spec, &x, q, ctx)?)
        }
    })
}

fn asym_value(cfg: &StudyConfig, n: u64, v: f64, lambda: &Float) -> qseries_core::Result<AsymResult> {
    let p = &cfg.params;
    let b = cfg.branch;
    match cfg.family {
        Family::G => asymptotics::g_asym(b, p.ell, v, n, lambda),
        Family::H => asymptotics::h_asym(b, p.ell, v, n, lambda, cfg.variant),
        Family::Ramanujan => asymptotics::aq_asym(b, v, n, lambda),
        Family::Jackson => asymptotics::jackson_asym(b, v, p.nu, n, lambda),
        Family::IsmailMasson => asymptotics::im_asym(b, v, n, lambda, cfg.variant),
        Family::StieltjesWigert => asymptotics::sw_asym(b, v, n, lambda, cfg.variant),
        Family::QLaguerre => asymptotics::laguerre_asym(b, p.alpha, v, n, lambda, cfg.variant),
        Family::Confluent => {
            let spec = HypergeometricSpec::new(p.alphas.clone(), p.betas.clone())?;
            asymptotics::confluent_asym(b, &spec, v, n, lambda, cfg.beta_denominator, cfg.variant)
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Evaluate one `(n, v)` point. Failures of the exact evaluation become flags;
/// failures of the approximant indicate a configuration error and propagate.
pub fn evaluate_row(cfg: &StudyConfig, n: u64, v: f64) -> Result<StudyRow> {
    let start = Instant::now();
    let prec = cfg.precision.bits() + 64;
    let lambda = cfg.scale.value(n, prec)?;
    let q = QParam::new(lambda.clone())?;
    let asym = asym_value(cfg, n, v, &lambda)?;
    let mut flags = Vec::new();
    if asym.near_cos_zero(cfg.cos_threshold) {
        flags.push(Flag::NearCosZero);
    }
    let (exact, bits_used) = match exact_value(cfg, n, v, &q, &lambda) {
        Ok(e) => {
            if e.escalated {
                flags.push(Flag::PrecisionEscalated);
            }
            (Some(e.value), e.bits_used)
        }
        Err(qseries_core::Error::Numeric(NumericError::PrecisionExhausted { .. })) => {
            flags.push(Flag::PrecisionExhausted);
            (None, cfg.precision.max_bits())
        }
        Err(qseries_core::Error::Numeric(_)) => {
            flags.push(Flag::EvaluationFailed);
            (None, cfg.precision.max_bits())
        }
        Err(e) => return Err(HarnessError::Numeric(e)),
    };
    let rel_error = exact.as_ref().and_then(|e| {
        let full = asym.full();
        if full.is_zero() {
            None
        } else {
            finite(e.rel_diff_f64(&full))
        }
    });
    flags.sort();
    let wall_time_ms = if cfg.timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(StudyRow {
        n,
        lambda_n: lambda.to_f64(),
        v,
        exact_log_mag: exact.as_ref().map(|e| e.log_mag_f64()),
        exact_phase: exact.as_ref().map(|e| e.phase_f64()),
        asym_log_mag: asym.main.log_mag_f64(),
        asym_phase: asym.main.phase_f64(),
        oscillatory_factor: asym.oscillatory_factor_f64(),
        rel_error,
        claimed_order_value: asym.claimed_error_order.to_f64(),
        bits_used,
        wall_time_ms,
        flags,
    })
}

/// Evaluate every grid point; rows come back ordered by `(n, v)`.
pub fn evaluate_rows(cfg: &StudyConfig) -> Result<Vec<StudyRow>> {
    let points: Vec<(u64, f64)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| cfg.v_grid.iter().map(move |&v| (n, v)))
        .collect();
    let mut rows = if cfg.threads == 1 {
        points
            .iter()
            .map(|&(n, v)| evaluate_row(cfg, n, v))
            .collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| HarnessError::config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            points
                .par_iter()
                .map(|&(n, v)| evaluate_row(cfg, n, v))
                .collect::<Result<Vec<_>>>()
        })?
    };
    rows.sort_by(|a, b| a.n.cmp(&b.n).then(a.v.total_cmp(&b.v)));
    Ok(rows)
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two distinct `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let k = x.len();
    if k < 2 || k != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / k as f64;
    let my = y.iter().sum::<f64>() / k as f64;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// `lambda^-1 ln^2 lambda`, the confluent error scale.
pub fn polynomial_rate(lambda: f64) -> f64 {
    lambda.ln().powi(2) / lambda
}

fn fit_for_v(cfg: &StudyConfig, rows: &[&StudyRow], v: f64) -> VFit {
    let usable: Vec<&&StudyRow> = rows.iter().filter(|r| r.usable()).collect();
    let lam: Vec<f64> = usable.iter().map(|r| r.lambda_n).collect();
    let ln_eps: Vec<f64> = usable.iter().map(|r| r.rel_error.unwrap_or(f64::NAN).ln()).collect();
    let top_n = cfg.n_grid.last().copied();
    let top_rel_error = rows
        .iter()
        .filter(|r| Some(r.n) == top_n && !r.has(Flag::NearCosZero))
        .map(|r| r.rel_error.unwrap_or(f64::INFINITY))
        .reduce(f64::max);
    let slope = ls_slope(&lam, &ln_eps);
    let unit = PI / cfg.ell_eff();
    let mut fit = VFit {
        v,
        points: usable.len(),
        slope,
        normalized_slope: slope.map(|s| s / unit),
        polynomial_slope: None,
        top_half_max_ratio: None,
        top_half_ratio_trend: None,
        top_rel_error,
        passed: None,
    };
    let top_ok = match (cfg.max_top_rel_error, top_rel_error) {
        (Some(limit), Some(e)) => e < limit,
        (Some(_), None) => true,
        (None, _) => true,
    };
    if cfg.family == Family::Confluent {
        let ln_rate: Vec<f64> = lam.iter().map(|&l| polynomial_rate(l).ln()).collect();
        fit.polynomial_slope = ls_slope(&ln_rate, &ln_eps);
        // top half of the full n grid
        let cut = cfg.n_grid[cfg.n_grid.len() / 2];
        let top: Vec<(f64, f64)> = usable
            .iter()
            .filter(|r| r.n >= cut)
            .map(|r| {
                (
                    r.lambda_n,
                    r.rel_error.unwrap_or(f64::NAN) / polynomial_rate(r.lambda_n),
                )
            })
            .collect();
        if top.len() >= 2 {
            let max_ratio = top.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            let trend = ls_slope(
                &top.iter().map(|t| t.0).collect::<Vec<_>>(),
                &top.iter().map(|t| t.1.ln()).collect::<Vec<_>>(),
            );
            fit.top_half_max_ratio = Some(max_ratio);
            fit.top_half_ratio_trend = trend;
            fit.passed = trend.map(|t| t <= 0.0 && max_ratio <= POLYNOMIAL_CONSTANT_LIMIT && top_ok);
        }
    } else if let Some(s) = fit.normalized_slope {
        let (lo, hi) = slope_band(cfg.branch);
        fit.passed = Some((lo..=hi).contains(&s) && top_ok);
    } else if !top_ok {
        fit.passed = Some(false);
    }
    fit
}

fn criterion_text(cfg: &StudyConfig) -> String {
    let mut text = if cfg.family == Family::Confluent {
        format!(
            "rel_error / (ln^2 lambda / lambda) non-increasing in trend and at most {POLYNOMIAL_CONSTANT_LIMIT} over the top half of the n grid"
        )
    } else {
        let (lo, hi) = slope_band(cfg.branch);
        format!(
            "slope of ln rel_error vs lambda within [{lo}, {hi}] * pi/{}",
            cfg.ell_eff()
        )
    };
    if let Some(limit) = cfg.max_top_rel_error {
        text.push_str(&format!("; rel_error < {limit:e} at the largest n"));
    }
    text
}

/// Summarise evaluated rows.
pub fn summarize(cfg: &StudyConfig, rows: &[StudyRow]) -> StudySummary {
    let fits: Vec<VFit> = cfg
        .v_grid
        .iter()
        .map(|&v| {
            let for_v: Vec<&StudyRow> = rows.iter().filter(|r| r.v == v).collect();
            fit_for_v(cfg, &for_v, v)
        })
        .collect();
    let judged: Vec<bool> = fits.iter().filter_map(|f| f.passed).collect();
    StudySummary {
        label: cfg.label.clone(),
        family: cfg.family.to_string(),
        branch: cfg.branch.to_string(),
        variant: cfg.variant.to_string(),
        beta_denominator: cfg.beta_denominator.to_string(),
        ell: cfg.ell_eff(),
        rows: rows.len(),
        excluded_near_cos_zero: rows.iter().filter(|r| r.has(Flag::NearCosZero)).count(),
        exhausted: rows
            .iter()
            .filter(|r| r.has(Flag::PrecisionExhausted) || r.has(Flag::EvaluationFailed))
            .count(),
        escalated: rows.iter().filter(|r| r.has(Flag::PrecisionEscalated)).count(),
        criterion: criterion_text(cfg),
        passed: !judged.is_empty() && judged.iter().all(|&p| p),
        fits,
    }
}

/// Run one study.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    let rows = evaluate_rows(cfg)?;
    let summary = summarize(cfg, &rows);
    Ok(StudyReport { rows, summary })
}

/// Terminal errors of the two oscillatory confluent denominators at one `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenominatorComparison {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub variant: String,
    pub v: f64,
    pub n: u64,
    pub gamma_rel_error: Option<f64>,
    pub plain_rel_error: Option<f64>,
    pub gamma_smaller: bool,
}

/// A whole plan: every study plus cross-study findings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub studies: Vec<StudyReport>,
    pub denominator_comparisons: Vec<DenominatorComparison>,
    /// Human-readable observations that are reported without failing the plan.
    pub findings: Vec<String>,
    pub exhausted_fraction: f64,
    pub passed: bool,
}

fn compare_denominators(plan: &[StudyConfig], reports: &[StudyReport]) -> Vec<DenominatorComparison> {
    let mut out = Vec::new();
    let pairs = plan.iter().zip(reports);
    let gammas: Vec<_> = pairs
        .clone()
        .filter(|(c, _)| {
            c.family == Family::Confluent && c.branch == Branch::Plus && c.beta_denominator == BetaDenominator::Gamma
        })
        .collect();
    for (gc, gr) in gammas {
        let partner = pairs.clone().find(|(c, _)| {
            c.family == Family::Confluent
                && c.branch == Branch::Plus
                && c.beta_denominator == BetaDenominator::Plain
                && c.params.alphas == gc.params.alphas
                && c.params.betas == gc.params.betas
                && c.variant == gc.variant
                && c.n_grid == gc.n_grid
        });
        let Some((_, pr)) = partner else { continue };
        let top = *gc.n_grid.last().expect("validated grid");
        for &v in &gc.v_grid {
            let pick = |r: &StudyReport| {
                r.rows
                    .iter()
                    .find(|row| row.n == top && row.v == v)
                    .and_then(|row| row.rel_error)
            };
            let (ge, pe) = (pick(gr), pick(pr));
            out.push(DenominatorComparison {
                alphas: gc.params.alphas.clone(),
                betas: gc.params.betas.clone(),
                variant: gc.variant.to_string(),
                v,
                n: top,
                gamma_rel_error: ge,
                plain_rel_error: pe,
                gamma_smaller: matches!((ge, pe), (Some(g), Some(p)) if g < p),
            });
        }
    }
    out
}

/// Run every study of a plan, then compare paired confluent denominators.
///
/// Studies that differ only in `beta-denominator` feed the comparison; the outcome is
/// reported as a finding and never fails the plan.
pub fn run_plan(plan: &[StudyConfig]) -> Result<PlanReport> {
    let studies = plan.iter().map(run_study).collect::<Result<Vec<_>>>()?;
    let denominator_comparisons = compare_denominators(plan, &studies);
    let mut findings = Vec::new();
    for c in &denominator_comparisons {
        if !c.gamma_smaller {
            findings.push(format!(
                "oscillatory confluent term (alphas {:?}, betas {:?}, {}) at v = {}, n = {}: the Gamma(beta) denominator does not give the smaller error (gamma {:?}, plain {:?})",
                c.alphas, c.betas, c.variant, c.v, c.n, c.gamma_rel_error, c.plain_rel_error
            ));
        }
    }
    let total: usize = studies.iter().map(|s| s.summary.rows).sum();
    let exhausted: usize = studies.iter().map(|s| s.summary.exhausted).sum();
    let exhausted_fraction = if total == 0 {
        0.0
    } else {
        exhausted as f64 / total as f64
    };
    let passed = studies.iter().all(|s| s.summary.passed);
    Ok(PlanReport {
        studies,
        denominator_comparisons,
        findings,
        exhausted_fraction,
        passed,
    })
}
