//! Human-readable one-line verdicts for reports.

use crate::bounds::BoundReport;
use crate::study::{PlanReport, StudySummary};
use crate::suites::SuiteReport;

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
}

fn opt_e(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.2e}")).unwrap_or_else(|| "-".into())
}

/// One line per study, followed by one indented line per `v`.
pub fn study_summary(s: &StudySummary) -> Vec<String> {
    let mut out = vec![format!(
        "{} {} [{} {} {}{}]: {} rows, {} near cos zero, {} exhausted, {} escalated; {}",
        verdict(s.passed),
        s.label,
        s.family,
        s.branch,
        s.variant,
        if s.family == "confluent" && s.branch == "plus" {
            format!(" {}", s.beta_denominator)
        } else {
            String::new()
        },
        s.rows,
        s.excluded_near_cos_zero,
        s.exhausted,
        s.escalated,
        s.criterion
    )];
    for f in &s.fits {
        let status = match f.passed {
            Some(p) => verdict(p),
            None => "SKIP",
        };
        let mut text = format!(
            "    v = {:>5}: {status} points {} normalized slope {} top-n error {}",
            f.v,
            f.points,
            opt(f.normalized_slope),
            opt_e(f.top_rel_error)
        );
        if f.polynomial_slope.is_some() || f.top_half_max_ratio.is_some() {
            text.push_str(&format!(
                " polynomial slope {} top-half max ratio {} ratio trend {}",
                opt(f.polynomial_slope),
                opt_e(f.top_half_max_ratio),
                opt_e(f.top_half_ratio_trend)
            ));
        }
        out.push(text);
    }
    out
}

pub fn plan(report: &PlanReport) -> Vec<String> {
    let mut out: Vec<String> = report.studies.iter().flat_map(|s| study_summary(&s.summary)).collect();
    for c in &report.denominator_comparisons {
        out.push(format!(
            "denominator comparison alphas {:?} betas {:?} ({}) v = {} n = {}: gamma {} plain {} -> {}",
            c.alphas,
            c.betas,
            c.variant,
            c.v,
            c.n,
            opt_e(c.gamma_rel_error),
            opt_e(c.plain_rel_error),
            if c.gamma_smaller {
                "gamma smaller"
            } else {
                "gamma not smaller"
            }
        ));
    }
    for f in &report.findings {
        out.push(format!("FINDING {f}"));
    }
    out.push(format!(
        "{} plan: {}/{} studies passed, {:.1}% rows exhausted",
        verdict(report.passed),
        report.studies.iter().filter(|s| s.summary.passed).count(),
        report.studies.len(),
        100.0 * report.exhausted_fraction
    ));
    out
}

pub fn bounds(report: &BoundReport) -> Vec<String> {
    let mut out: Vec<String> = report
        .summaries
        .iter()
        .map(|s| {
            format!(
                "{} lemma {}: {} points, {} violations, min margin {:.3e}",
                verdict(s.passed),
                s.lemma,
                s.points,
                s.violations,
                s.min_margin
            )
        })
        .collect();
    for c in report.checks.iter().filter(|c| !c.holds) {
        out.push(format!(
            "    violated: lemma {} n = {} v = {} |residual| {:.3e} bound {:.3e}{}",
            c.lemma,
            c.n,
            c.v.map(|v| v.to_string()).unwrap_or_else(|| "-".into()),
            c.residual,
            c.bound,
            c.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default()
        ));
    }
    out
}

pub fn suite(report: &SuiteReport) -> Vec<String> {
    let mut out = vec![format!("{} suite {}", verdict(report.passed), report.suite)];
    out.extend(
        report
            .checks
            .iter()
            .map(|c| format!("    {} {}: {}", verdict(c.passed), c.name, c.detail)),
    );
    out
}
