//! Acceptance run: one PASS/FAIL line per criterion, each driven by the committed
//! config under `configs/`, exactly as `qseries study|bounds|check --config` runs it.
//!
//! Tolerances and grids are pinned here and compared with the loaded configs first, so
//! that an edited config cannot silently relax a criterion. Runs with the formulas as
//! printed decide the verdict; the amended formulas are run alongside where they differ
//! and reported as notes only.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use qseries_core::asymptotics::Branch;
use qseries_core::FormulaVariant;
use qseries_harness::bounds::run_bound_checks;
use qseries_harness::config::{study_plan, BoundsConfig, CheckConfig, Family, RawConfig, StudyConfig};
use qseries_harness::render;
use qseries_harness::study::{run_plan, slope_band, PlanReport, POLYNOMIAL_CONSTANT_LIMIT};
use qseries_harness::suites::{run_checks, SuiteReport, Q_GAMMA_CONSTANT_LIMIT};

const BITS: u32 = 256;
const REL_TOL: f64 = 1e-60;
const BETA: f64 = 0.4;
const V_GRID: [f64; 3] = [-0.4, 0.1, 0.45];
const DECAY_N: [u64; 5] = [20, 30, 40, 60, 80];
const PARITY_N: [u64; 4] = [40, 41, 60, 61];
const CONFLUENT_N: [u64; 6] = [20, 40, 60, 80, 100, 120];
const TOP_REL_ERROR: f64 = 1e-3;
const MINUS_BAND: (f64, f64) = (-1.25, -0.75);
const PLUS_BAND: (f64, f64) = (-2.5, -1.5);

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn drift(msg: String) -> Self {
        Outcome {
            passed: false,
            summary: format!("config does not match the pinned criterion: {msg}"),
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Outcome {
            passed: false,
            summary: format!("run failed: {e}"),
            details: Vec::new(),
            notes: Vec::new(),
        }
    }
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn load(name: &str) -> RawConfig {
    RawConfig::load(&config_path(name)).unwrap_or_else(|e| panic!("loading {name}: {e}"))
}

fn with_variant(raw: &RawConfig, variant: FormulaVariant) -> RawConfig {
    let mut raw = raw.clone();
    let o = BTreeMap::from([("variant".to_string(), variant.to_string())]);
    raw.override_with(&o).expect("variant override");
    raw
}

fn pin<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what} is {got:?}, expected {want:?}"))
    }
}

fn pin_precision(bits: u32, rel_tol: f64) -> Result<(), String> {
    pin("precision-bits", bits, BITS)?;
    pin("rel-tol", rel_tol, REL_TOL)
}

fn pin_study(cfg: &StudyConfig, n_grid: &[u64]) -> Result<(), String> {
    let at = |what: &str| format!("{}: {what}", cfg.label);
    pin_precision(cfg.precision.bits(), cfg.precision.rel_tol()).map_err(|e| at(&e))?;
    pin(&at("scale-beta"), cfg.scale.beta(), BETA)?;
    pin(&at("v"), cfg.v_grid.as_slice(), V_GRID.as_slice())?;
    pin(&at("n"), cfg.n_grid.as_slice(), n_grid)
}

fn pin_bands() -> Result<(), String> {
    pin("minus slope band", slope_band(Branch::Minus), MINUS_BAND)?;
    pin("plus slope band", slope_band(Branch::Plus), PLUS_BAND)
}

fn studies_line(report: &PlanReport) -> String {
    let passed = report.studies.iter().filter(|s| s.summary.passed).count();
    format!("{passed}/{} studies pass", report.studies.len())
}

fn suites_outcome(reports: &[SuiteReport], what: &str) -> Outcome {
    let passed = !reports.is_empty() && reports.iter().all(|r| r.passed);
    let checks: usize = reports.iter().map(|r| r.checks.len()).sum();
    let ok: usize = reports
        .iter()
        .map(|r| r.checks.iter().filter(|c| c.passed).count())
        .sum();
    Outcome {
        passed,
        summary: format!("{what}: {ok}/{checks} checks pass"),
        details: reports.iter().flat_map(render::suite).collect(),
        notes: Vec::new(),
    }
}

fn run_suite_config(name: &str, what: &str, pinned: bool) -> Outcome {
    let raw = load(name);
    let path = config_path(name);
    let cfg = match CheckConfig::from_raw(&raw, path.parent()) {
        Ok(c) => c,
        Err(e) => return Outcome::error(e),
    };
    if pinned {
        if let Err(e) = pin_precision(cfg.precision.bits(), cfg.precision.rel_tol()) {
            return Outcome::drift(e);
        }
    }
    match run_checks(&cfg) {
        Ok(reports) => suites_outcome(&reports, what),
        Err(e) => Outcome::error(e),
    }
}

fn criterion_identities() -> Outcome {
    run_suite_config("c1-identities.conf", "identity suite", true)
}

fn criterion_bounds() -> Outcome {
    let raw = load("c2-bounds.conf");
    let cfg = match BoundsConfig::from_raw(&raw) {
        Ok(c) => c,
        Err(e) => return Outcome::error(e),
    };
    let pinned = (|| {
        pin_precision(cfg.precision.bits(), cfg.precision.rel_tol())?;
        pin("lemma", cfg.lemmas.as_slice(), [1u8, 4, 5].as_slice())?;
        pin("samples", cfg.samples, 100)?;
        pin("ell", cfg.ell, 1.0)?;
        pin("v", cfg.v_grid.as_slice(), [0.2, 0.3].as_slice())?;
        pin("n", cfg.n_grid.as_ref(), None)?;
        pin("variant", cfg.variant, FormulaVariant::AsPrinted)
    })();
    if let Err(e) = pinned {
        return Outcome::drift(e);
    }
    let report = match run_bound_checks(&cfg) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let points: usize = report.summaries.iter().map(|s| s.points).sum();
    let violations: usize = report.summaries.iter().map(|s| s.violations).sum();
    let mut notes = Vec::new();
    if let Ok(amended) = BoundsConfig::from_raw(&with_variant(&raw, FormulaVariant::Amended)) {
        match run_bound_checks(&amended) {
            Ok(r) => notes.extend(render::bounds(&r).into_iter().map(|l| format!("amended formulas: {l}"))),
            Err(e) => notes.push(format!("amended formulas: run failed: {e}")),
        }
    }
    Outcome {
        passed: report.passed,
        summary: format!("remainder bounds: {violations} violations over {points} points"),
        details: render::bounds(&report),
        notes,
    }
}

fn run_study_config(
    name: &str,
    what: &str,
    pins: impl Fn(&[StudyConfig]) -> Result<(), String>,
    amended_note: bool,
) -> Outcome {
    let raw = load(name);
    let plan = match study_plan(&raw) {
        Ok(p) => p,
        Err(e) => return Outcome::error(e),
    };
    if let Err(e) = pin_bands().and_then(|_| pins(&plan)) {
        return Outcome::drift(e);
    }
    let report = match run_plan(&plan) {
        Ok(r) => r,
        Err(e) => return Outcome::error(e),
    };
    let mut notes = Vec::new();
    if amended_note {
        let amended = study_plan(&with_variant(&raw, FormulaVariant::Amended)).and_then(|p| run_plan(&p));
        match amended {
            Ok(r) => {
                notes.push(format!("amended formulas: {}", studies_line(&r)));
                notes.extend(
                    r.studies
                        .iter()
                        .flat_map(|s| render::study_summary(&s.summary).into_iter().take(1))
                        .chain(r.denominator_comparisons.iter().map(|c| {
                            format!(
                                "denominator comparison alphas {:?} betas {:?} v = {}: gamma smaller = {}",
                                c.alphas, c.betas, c.v, c.gamma_smaller
                            )
                        }))
                        .map(|l| format!("amended formulas: {l}")),
                );
            }
            Err(e) => notes.push(format!("amended formulas: run failed: {e}")),
        }
    }
    Outcome {
        passed: report.passed,
        summary: format!("{what}: {}", studies_line(&report)),
        details: render::plan(&report),
        notes,
    }
}

fn criterion_decay() -> Outcome {
    run_study_config(
        "c3-theorem-decay.conf",
        "decay of g",
        |plan| {
            pin("studies", plan.len(), 6)?;
            for cfg in plan {
                pin(&format!("{}: family", cfg.label), cfg.family, Family::G)?;
                pin_study(cfg, &DECAY_N)?;
            }
            let mut ells: Vec<f64> = plan.iter().map(|c| c.params.ell).collect();
            ells.sort_by(f64::total_cmp);
            ells.dedup();
            pin("ell", ells.as_slice(), [0.5, 1.0, 1.5].as_slice())
        },
        false,
    )
}

fn criterion_corollaries() -> Outcome {
    run_study_config(
        "c4-corollaries.conf",
        "named families",
        |plan| {
            pin("studies", plan.len(), 14)?;
            for cfg in plan {
                pin_study(cfg, &PARITY_N)?;
                pin(
                    &format!("{}: max-top-rel-error", cfg.label),
                    cfg.max_top_rel_error,
                    Some(TOP_REL_ERROR),
                )?;
                pin(
                    &format!("{}: variant", cfg.label),
                    cfg.variant,
                    FormulaVariant::AsPrinted,
                )?;
            }
            for family in [
                Family::Ramanujan,
                Family::Jackson,
                Family::IsmailMasson,
                Family::StieltjesWigert,
                Family::QLaguerre,
            ] {
                if !plan.iter().any(|c| c.family == family) {
                    return Err(format!("family {family} missing"));
                }
            }
            Ok(())
        },
        true,
    )
}

fn criterion_confluent() -> Outcome {
    let mut out = run_study_config(
        "c5-confluent.conf",
        "confluent polynomial rate",
        |plan| {
            pin("polynomial constant limit", POLYNOMIAL_CONSTANT_LIMIT, 100.0)?;
            let mut shapes: Vec<(usize, usize)> = plan
                .iter()
                .map(|c| (c.params.alphas.len(), c.params.betas.len()))
                .collect();
            shapes.sort();
            shapes.dedup();
            pin("(r, s)", shapes.as_slice(), [(0, 1), (1, 2)].as_slice())?;
            for cfg in plan {
                pin(&format!("{}: family", cfg.label), cfg.family, Family::Confluent)?;
                pin(
                    &format!("{}: variant", cfg.label),
                    cfg.variant,
                    FormulaVariant::AsPrinted,
                )?;
                pin_study(cfg, &CONFLUENT_N)?;
            }
            Ok(())
        },
        true,
    );
    out.summary
        .push_str("; the Gamma(beta) comparison is reported, never failed");
    out
}

fn criterion_kernel() -> Outcome {
    let mut out = run_suite_config("c6-kernel.conf", "kernel asymptotics", true);
    if Q_GAMMA_CONSTANT_LIMIT != 100.0 {
        return Outcome::drift(format!("q-Gamma constant limit is {Q_GAMMA_CONSTANT_LIMIT}"));
    }
    out.summary
        .push_str(" ((q;q) at lambda 5, 10, 20; (q^x;q) at lambda 10, 20, 40, 80)");
    out
}

fn criterion_determinism() -> Outcome {
    let raw = load("c7-determinism.conf");
    if let Err(e) = pin(
        "study-config",
        raw.shared.get("study-config").map(String::as_str),
        Some("c3-theorem-decay.conf"),
    ) {
        return Outcome::drift(e);
    }
    run_suite_config("c7-determinism.conf", "serial vs parallel bytes", false)
}

fn main() -> ExitCode {
    let criteria: [(u8, fn() -> Outcome); 7] = [
        (1, criterion_identities),
        (2, criterion_bounds),
        (3, criterion_decay),
        (4, criterion_corollaries),
        (5, criterion_confluent),
        (6, criterion_kernel),
        (7, criterion_determinism),
    ];
    let mut verdicts = Vec::new();
    for (k, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        println!("--- criterion {k}");
        for line in &outcome.details {
            println!("{line}");
        }
        for line in &outcome.notes {
            println!("note: {line}");
        }
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        verdicts.push(format!("{verdict} criterion {k}: {} ({secs:.1} s)", outcome.summary));
        println!("{}", verdicts.last().expect("just pushed"));
    }
    println!("--- acceptance summary");
    for v in &verdicts {
        println!("{v}");
    }
    let failed = verdicts.iter().filter(|v| v.starts_with("FAIL")).count();
    println!("{} of {} criteria pass", verdicts.len() - failed, verdicts.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
