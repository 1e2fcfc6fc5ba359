//! The `qseries` command line: argument parsing, dispatch, output files and exit codes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use crate::config::{study_plan, BoundsConfig, CheckConfig, Format, RawConfig};
use crate::emit::{write_csv, write_json};
use crate::error::HarnessError;
use crate::study::{run_plan, PlanReport, StudyRow, StudySummary};
use crate::{bounds, exit, render, suites};

/// Convergence studies and bound checks for scaled q-series asymptotics
#[derive(Parser, Debug)]
#[command(name = "qseries", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare exact values with asymptotic approximants over n and v grids
    Study(Flags),
    /// Check computed remainders against their stated bounds
    Bounds(Flags),
    /// Run identity, kernel-asymptotics or determinism suites
    Check(Flags),
}

/// Flags mirror config-file keys; a flag overrides the file.
#[derive(Args, Debug, Default)]
struct Flags {
    /// Config file with one `key = value` per line
    #[arg(long)]
    config: Option<PathBuf>,
    /// g, h, ramanujan, jackson, ismail_masson, stieltjes_wigert, q_laguerre or confluent
    #[arg(long)]
    family: Option<String>,
    /// minus or plus
    #[arg(long)]
    branch: Option<String>,
    /// power-log (n^beta log^gamma n) or log-power (log^gamma n)
    #[arg(long)]
    scale_kind: Option<String>,
    #[arg(long)]
    scale_beta: Option<f64>,
    #[arg(long)]
    scale_gamma: Option<f64>,
    /// Grid value of v (repeatable)
    #[arg(long, allow_hyphen_values = true)]
    v: Vec<f64>,
    /// Grid value of n (repeatable)
    #[arg(long)]
    n: Vec<u64>,
    #[arg(long)]
    n_start: Option<u64>,
    #[arg(long)]
    n_stop: Option<u64>,
    #[arg(long)]
    n_step: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long)]
    ell: Option<f64>,
    /// Comma-separated numerator exponents
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    /// Comma-separated denominator exponents
    #[arg(long, allow_hyphen_values = true)]
    betas: Option<String>,
    /// Comma-separated finite-product exponents of h
    #[arg(long, allow_hyphen_values = true)]
    gammas: Option<String>,
    #[arg(long)]
    precision_bits: Option<u32>,
    #[arg(long)]
    max_bits: Option<u32>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// as-printed or amended
    #[arg(long)]
    variant: Option<String>,
    /// gamma or plain
    #[arg(long)]
    beta_denominator: Option<String>,
    #[arg(long)]
    cos_threshold: Option<f64>,
    /// Upper limit on the relative error of every retained row at the largest n
    #[arg(long)]
    max_top_rel_error: Option<f64>,
    /// Worker threads; 0 uses all cores, 1 runs serially
    #[arg(long)]
    threads: Option<usize>,
    /// Record wall-clock time per row (output is then no longer byte-stable)
    #[arg(long)]
    timing: bool,
    /// Lemma to sweep in `bounds` (repeatable: 1, 4, 5)
    #[arg(long)]
    lemma: Vec<u8>,
    #[arg(long)]
    samples: Option<usize>,
    /// Suite to run in `check` (repeatable)
    #[arg(long)]
    suite: Vec<String>,
    /// Study plan used by the determinism suite
    #[arg(long)]
    study_config: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output file; a directory when the plan holds several studies
    #[arg(long)]
    out: Option<PathBuf>,
}

fn join<T: ToString>(xs: &[T]) -> Option<String> {
    (!xs.is_empty()).then(|| xs.iter().map(T::to_string).collect::<Vec<_>>().join(", "))
}

impl Flags {
    fn overrides(&self) -> BTreeMap<String, String> {
        let s = |x: &Option<String>| x.clone();
        let d = |x: Option<f64>| x.map(|v| v.to_string());
        let pairs: Vec<(&str, Option<String>)> = vec![
            ("family", s(&self.family)),
            ("branch", s(&self.branch)),
            ("scale-kind", s(&self.scale_kind)),
            ("scale-beta", d(self.scale_beta)),
            ("scale-gamma", d(self.scale_gamma)),
            ("v", join(&self.v)),
            ("n", join(&self.n)),
            ("n-start", self.n_start.map(|x| x.to_string())),
            ("n-stop", self.n_stop.map(|x| x.to_string())),
            ("n-step", self.n_step.map(|x| x.to_string())),
            ("nu", d(self.nu)),
            ("alpha", d(self.alpha)),
            ("ell", d(self.ell)),
            ("alphas", s(&self.alphas)),
            ("betas", s(&self.betas)),
            ("gammas", s(&self.gammas)),
            ("precision-bits", self.precision_bits.map(|x| x.to_string())),
            ("max-bits", self.max_bits.map(|x| x.to_string())),
            ("rel-tol", d(self.rel_tol)),
            ("seed", self.seed.map(|x| x.to_string())),
            ("variant", s(&self.variant)),
            ("beta-denominator", s(&self.beta_denominator)),
            ("cos-threshold", d(self.cos_threshold)),
            ("max-top-rel-error", d(self.max_top_rel_error)),
            ("threads", self.threads.map(|x| x.to_string())),
            ("timing", self.timing.then(|| "true".to_string())),
            ("lemma", join(&self.lemma)),
            ("samples", self.samples.map(|x| x.to_string())),
            ("suite", join(&self.suite)),
            (
                "study-config",
                self.study_config.as_ref().map(|p| p.display().to_string()),
            ),
            ("format", s(&self.format)),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
            .collect()
    }

    fn raw(&self) -> Result<RawConfig, HarnessError> {
        let mut raw = match &self.config {
            Some(p) => RawConfig::load(p)?,
            None => RawConfig::default(),
        };
        // n-start/n-stop and n are mutually exclusive; a flag form replaces the file form
        let o = self.overrides();
        if o.contains_key("n") {
            remove_everywhere(&mut raw, &["n-start", "n-stop", "n-step"]);
        } else if o.contains_key("n-start") || o.contains_key("n-stop") {
            remove_everywhere(&mut raw, &["n"]);
        }
        raw.override_with(&o)?;
        Ok(raw)
    }

    fn base_dir(&self) -> Option<&Path> {
        self.config.as_deref().and_then(Path::parent)
    }
}

fn remove_everywhere(raw: &mut RawConfig, keys: &[&str]) {
    for k in keys {
        raw.shared.remove(*k);
        for (_, m) in &mut raw.sections {
            m.remove(*k);
        }
    }
}

enum Failure {
    Config(HarnessError),
    Other(anyhow::Error),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) => Failure::Config(e),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn output_format(raw: &RawConfig) -> Result<Format, HarnessError> {
    match raw.shared.get("format") {
        None => Ok(Format::Csv),
        Some(s) => s.parse().map_err(HarnessError::Config),
    }
}

fn write_study(
    rows: &[StudyRow],
    summary: &StudySummary,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), HarnessError> {
    match format {
        Format::Csv => write_csv(rows, out),
        Format::Json => write_json(rows, summary, out),
    }
}

fn emit_plan(report: &PlanReport, format: Format, out: Option<&Path>) -> anyhow::Result<()> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    match out {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            for s in &report.studies {
                write_study(&s.rows, &s.summary, format, &mut lock)?;
            }
        }
        Some(path) if report.studies.len() == 1 => {
            let s = &report.studies[0];
            let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            write_study(&s.rows, &s.summary, format, &mut f)?;
            f.flush()?;
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for s in &report.studies {
                let path = dir.join(format!("{}.{ext}", s.summary.label));
                let mut f =
                    BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
                write_study(&s.rows, &s.summary, format, &mut f)?;
                f.flush()?;
            }
            let path = dir.join("plan.json");
            let mut f = BufWriter::new(File::create(&path)?);
            serde_json::to_writer_pretty(&mut f, report)?;
            f.write_all(b"\n")?;
            f.flush()?;
        }
    }
    Ok(())
}

fn study(flags: &Flags) -> Result<u8, Failure> {
    let raw = flags.raw()?;
    let plan = study_plan(&raw)?;
    let format = output_format(&raw)?;
    let report = run_plan(&plan)?;
    emit_plan(&report, format, raw.shared.get("out").map(Path::new))?;
    for line in render::plan(&report) {
        eprintln!("{line}");
    }
    Ok(if report.exhausted_fraction > exit::EXHAUSTED_LIMIT {
        exit::PRECISION_EXHAUSTED
    } else if report.passed {
        exit::PASSED
    } else {
        exit::FAILED
    })
}

fn write_json_report<T: serde::Serialize>(value: &T, out: Option<&str>) -> anyhow::Result<()> {
    if let Some(path) = out {
        let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {path}"))?);
        serde_json::to_writer_pretty(&mut f, value)?;
        f.write_all(b"\n")?;
        f.flush()?;
    }
    Ok(())
}

fn bound_checks(flags: &Flags) -> Result<u8, Failure> {
    let raw = flags.raw()?;
    let cfg = BoundsConfig::from_raw(&raw)?;
    let report = bounds::run_bound_checks(&cfg)?;
    write_json_report(&report, raw.shared.get("out").map(String::as_str))?;
    for line in render::bounds(&report) {
        println!("{line}");
    }
    Ok(if report.passed { exit::PASSED } else { exit::FAILED })
}

fn check(flags: &Flags) -> Result<u8, Failure> {
    let raw = flags.raw()?;
    let cfg = CheckConfig::from_raw(&raw, flags.base_dir())?;
    let reports = suites::run_checks(&cfg)?;
    write_json_report(&reports, raw.shared.get("out").map(String::as_str))?;
    for r in &reports {
        for line in render::suite(r) {
            println!("{line}");
        }
    }
    Ok(if reports.iter().all(|r| r.passed) {
        exit::PASSED
    } else {
        exit::FAILED
    })
}

/// Parse `args` (program name first), run the subcommand and return the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::INVALID_CONFIG
            } else {
                exit::PASSED
            };
        }
    };
    let result = match &cli.command {
        Command::Study(f) => study(f),
        Command::Bounds(f) => bound_checks(f),
        Command::Check(f) => check(f),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            exit::INVALID_CONFIG
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            exit::FAILED
        }
    }
}
