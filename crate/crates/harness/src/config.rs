//! Flat key-value configuration shared by config files and command-line flags.
//!
//! A config file holds one `key = value` pair per line; `#` starts a comment. Keys
//! mirror the long command-line flags without the leading dashes. Repeating a key
//! appends to it, so `v = 0.1` followed by `v = 0.2` is the same as `v = 0.1, 0.2`.
//!
//! Two constructs turn one file into a plan of several studies:
//!
//! - a `[name]` header opens a section; keys above the first header are shared by every
//!   section, and a section's own keys override them;
//! - a comma list on a scalar key (`family`, `branch`, `ell`, `nu`, `alpha`, `variant`,
//!   `beta-denominator`) expands into the cartesian product of studies.
//!
//! Command-line flags override the file in every section. Both sources go through the
//! same validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qseries_core::asymptotics::{AdmissibleScale, BetaDenominator, Branch, ScaleKind};
use qseries_core::numeric::PrecisionContext;
use qseries_core::series::HypergeometricSpec;
use qseries_core::FormulaVariant;

use crate::error::{HarnessError, Result};

/// Keys whose comma lists expand into separate studies.
pub const EXPANDED_KEYS: &[&str] = &["family", "branch", "ell", "nu", "alpha", "variant", "beta-denominator"];

/// Every key the harness understands.
pub const KNOWN_KEYS: &[&str] = &[
    "family",
    "branch",
    "scale-kind",
    "scale-beta",
    "scale-gamma",
    "v",
    "v-bound",
    "n",
    "n-start",
    "n-stop",
    "n-step",
    "nu",
    "alpha",
    "ell",
    "alphas",
    "betas",
    "gammas",
    "precision-bits",
    "max-bits",
    "rel-tol",
    "seed",
    "format",
    "out",
    "variant",
    "beta-denominator",
    "cos-threshold",
    "threads",
    "timing",
    "max-top-rel-error",
    "lemma",
    "samples",
    "suite",
    "study-config",
];

/// The series a study compares against its asymptotic approximant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    G,
    H,
    Ramanujan,
    Jackson,
    IsmailMasson,
    StieltjesWigert,
    QLaguerre,
    Confluent,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::G,
        Family::H,
        Family::Ramanujan,
        Family::Jackson,
        Family::IsmailMasson,
        Family::StieltjesWigert,
        Family::QLaguerre,
        Family::Confluent,
    ];

    /// Whether the family is indexed by a polynomial degree `n` (the `h` descendants).
    pub fn has_degree(self) -> bool {
        matches!(
            self,
            Family::H | Family::IsmailMasson | Family::StieltjesWigert | Family::QLaguerre
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::G => "g",
            Family::H => "h",
            Family::Ramanujan => "ramanujan",
            Family::Jackson => "jackson",
            Family::IsmailMasson => "ismail_masson",
            Family::StieltjesWigert => "stieltjes_wigert",
            Family::QLaguerre => "q_laguerre",
            Family::Confluent => "confluent",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let norm = s.replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.to_string() == norm)
            .ok_or_else(|| format!("unknown family '{s}'"))
    }
}

/// Output encoding for study rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Family-specific parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParams {
    pub nu: f64,
    pub alpha: f64,
    pub ell: f64,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

/// One fully validated convergence study.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub label: String,
    pub family: Family,
    pub branch: Branch,
    pub scale: AdmissibleScale,
    pub v_grid: Vec<f64>,
    pub v_bound: f64,
    pub n_grid: Vec<u64>,
    pub params: FamilyParams,
    pub precision: PrecisionContext,
    pub seed: u64,
    pub variant: FormulaVariant,
    pub beta_denominator: BetaDenominator,
    pub cos_threshold: f64,
    /// Worker threads; 0 uses every available core, 1 runs serially.
    pub threads: usize,
    /// Record wall-clock time per row. Off by default because timings break
    /// byte-identical output.
    pub timing: bool,
    /// Upper limit on the relative error of every retained row at the largest `n`.
    pub max_top_rel_error: Option<f64>,
}

/// Settings for the remainder-bound sweeps.
#[derive(Debug, Clone)]
pub struct BoundsConfig {
    pub lemmas: Vec<u8>,
    pub samples: usize,
    pub seed: u64,
    pub ell: f64,
    pub v_grid: Vec<f64>,
    /// Explicit degree grid; when absent each lemma uses its default sweep.
    pub n_grid: Option<Vec<u64>>,
    pub scale: AdmissibleScale,
    pub variant: FormulaVariant,
    pub precision: PrecisionContext,
}

/// A check suite and its inputs.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub suites: Vec<String>,
    pub seed: u64,
    pub precision: PrecisionContext,
    /// Study plan used by the determinism suite, resolved against the config file's directory.
    pub study_config: Option<std::path::PathBuf>,
}

/// A parsed config: shared keys plus optional named sections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub shared: BTreeMap<String, String>,
    pub sections: Vec<(String, BTreeMap<String, String>)>,
}

fn insert(map: &mut BTreeMap<String, String>, key: &str, value: &str) -> Result<()> {
    if !KNOWN_KEYS.contains(&key) {
        return Err(HarnessError::config(format!("unknown key '{key}'")));
    }
    map.entry(key.to_string())
        .and_modify(|v| {
            if !value.is_empty() {
                if !v.is_empty() {
                    v.push_str(", ");
                }
                v.push_str(value);
            }
        })
        .or_insert_with(|| value.to_string());
    Ok(())
}

impl RawConfig {
    /// Parse config text.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| HarnessError::config(format!("line {}: unterminated section", lineno + 1)))?
                    .trim();
                if name.is_empty() {
                    return Err(HarnessError::config(format!("line {}: empty section name", lineno + 1)));
                }
                cfg.sections.push((name.to_string(), BTreeMap::new()));
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let target = match cfg.sections.last_mut() {
                Some((_, m)) => m,
                None => &mut cfg.shared,
            };
            insert(target, key.trim(), value.trim())
                .map_err(|e| HarnessError::config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    /// Read and parse a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply flag overrides: each override replaces the key in the shared block and in
    /// every section.
    pub fn override_with(&mut self, overrides: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in overrides {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(HarnessError::config(format!("unknown key '{k}'")));
            }
            self.shared.insert(k.clone(), v.clone());
            for (_, m) in &mut self.sections {
                m.insert(k.clone(), v.clone());
            }
        }
        Ok(())
    }

    /// One merged map per section (or the shared block alone), each labelled.
    pub fn merged(&self) -> Vec<(Option<String>, BTreeMap<String, String>)> {
        if self.sections.is_empty() {
            return vec![(None, self.shared.clone())];
        }
        self.sections
            .iter()
            .map(|(name, m)| {
                let mut merged = self.shared.clone();
                merged.extend(m.iter().map(|(k, v)| (k.clone(), v.clone())));
                (Some(name.clone()), merged)
            })
            .collect()
    }

    /// The merged maps with every expanded key split into individual studies.
    pub fn expanded(&self) -> Vec<(String, BTreeMap<String, String>)> {
        let mut out = Vec::new();
        for (name, map) in self.merged() {
            let base = name.clone().unwrap_or_else(|| {
                let families = map.get("family").map(|s| split_list(s)).unwrap_or_default();
                match families.as_slice() {
                    [single] => single.clone(),
                    _ => "study".to_string(),
                }
            });
            let mut partial: Vec<(Vec<String>, BTreeMap<String, String>)> = vec![(Vec::new(), map)];
            for key in EXPANDED_KEYS {
                let mut next = Vec::new();
                for (tags, m) in partial {
                    let values = m.get(*key).map(|s| split_list(s)).unwrap_or_default();
                    if values.len() <= 1 {
                        next.push((tags, m));
                        continue;
                    }
                    for value in values {
                        let mut m2 = m.clone();
                        m2.insert(key.to_string(), value.clone());
                        let mut t2 = tags.clone();
                        t2.push(format!("{key}={value}"));
                        next.push((t2, m2));
                    }
                }
                partial = next;
            }
            for (tags, m) in partial {
                let mut label = base.clone();
                for t in tags {
                    label.push('_');
                    label.push_str(&t);
                }
                out.push((label, m));
            }
        }
        out
    }
}

/// Split a comma list, dropping empty entries.
pub fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect()
}

fn parse_value<T: FromStr>(key: &str, s: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.trim()
        .parse::<T>()
        .map_err(|e| HarnessError::config(format!("{key}: cannot parse '{s}': {e}")))
}

fn get<T: FromStr>(m: &BTreeMap<String, String>, key: &str, default: T) -> Result<T>
where
    T::Err: fmt::Display,
{
    match m.get(key) {
        None => Ok(default),
        Some(s) => {
            let items = split_list(s);
            if items.len() > 1 {
                return Err(HarnessError::config(format!("{key} takes a single value, got '{s}'")));
            }
            match items.first() {
                None => Ok(default),
                Some(x) => parse_value(key, x),
            }
        }
    }
}

fn get_list<T: FromStr>(m: &BTreeMap<String, String>, key: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    m.get(key)
        .map(|s| split_list(s).iter().map(|x| parse_value(key, x)).collect())
        .unwrap_or_else(|| Ok(Vec::new()))
}

fn finite(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(HarnessError::config(format!("{key} must be finite, got {x}")))
    }
}

fn scale_from(m: &BTreeMap<String, String>) -> Result<AdmissibleScale> {
    let kind: ScaleKind = get(m, "scale-kind", ScaleKind::PowerLog)?;
    let beta: f64 = get(m, "scale-beta", 0.4)?;
    let gamma: f64 = get(m, "scale-gamma", if kind == ScaleKind::LogPower { 2.0 } else { 0.0 })?;
    AdmissibleScale::new(kind, beta, gamma).map_err(|e| HarnessError::config(e.to_string()))
}

/// Default working precision; escalation doubles from here.
pub const DEFAULT_BITS: u32 = 256;
/// Default precision cap.
pub const DEFAULT_MAX_BITS: u32 = 16384;
/// Default agreement tolerance between successive precision passes.
pub const DEFAULT_REL_TOL: f64 = 1e-60;

fn precision_from(m: &BTreeMap<String, String>) -> Result<PrecisionContext> {
    let bits: u32 = get(m, "precision-bits", DEFAULT_BITS)?;
    let max_bits: u32 = get(m, "max-bits", DEFAULT_MAX_BITS)?;
    let rel_tol: f64 = get(m, "rel-tol", DEFAULT_REL_TOL)?;
    PrecisionContext::new(bits.max(DEFAULT_BITS.min(max_bits)), rel_tol, max_bits)
        .map_err(|e| HarnessError::config(e.to_string()))
}

fn n_grid_from(m: &BTreeMap<String, String>) -> Result<Option<Vec<u64>>> {
    let explicit: Vec<u64> = get_list(m, "n")?;
    let start: Option<u64> = m.get("n-start").map(|s| parse_value("n-start", s)).transpose()?;
    let stop: Option<u64> = m.get("n-stop").map(|s| parse_value("n-stop", s)).transpose()?;
    let step: u64 = get(m, "n-step", 1)?;
    let ranged = match (start, stop) {
        (None, None) => None,
        (Some(a), Some(b)) => {
            if step == 0 {
                return Err(HarnessError::config("n-step must be positive"));
            }
            Some((a..=b).step_by(step as usize).collect::<Vec<_>>())
        }
        _ => return Err(HarnessError::config("n-start and n-stop must be given together")),
    };
    let grid = match (explicit.is_empty(), ranged) {
        (true, None) => return Ok(None),
        (true, Some(r)) => r,
        (false, None) => explicit,
        (false, Some(_)) => return Err(HarnessError::config("give either n or n-start/n-stop, not both")),
    };
    if grid.is_empty() {
        return Err(HarnessError::config("n grid is empty"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::config("n grid must be strictly increasing"));
    }
    Ok(Some(grid))
}

impl StudyConfig {
    /// Validate one expanded map.
    pub fn from_map(label: &str, m: &BTreeMap<String, String>) -> Result<Self> {
        if !m.contains_key("family") {
            return Err(HarnessError::config("family is required"));
        }
        let family: Family = get(m, "family", Family::G)?;
        let branch: Branch = get(m, "branch", Branch::Minus)?;
        let scale = scale_from(m)?;
        let v_bound = finite("v-bound", get(m, "v-bound", 1.0)?)?;
        let v_grid: Vec<f64> = get_list(m, "v")?;
        if v_grid.is_empty() {
            return Err(HarnessError::config("v grid is empty"));
        }
        for &v in &v_grid {
            if !(v.is_finite() && v.abs() <= v_bound) {
                return Err(HarnessError::config(format!(
                    "v = {v} lies outside [-{v_bound}, {v_bound}]"
                )));
            }
        }
        let n_grid = n_grid_from(m)?.ok_or_else(|| HarnessError::config("n grid is empty"))?;
        if n_grid[0] < 2 {
            return Err(HarnessError::config("n must be at least 2 for the scale to be defined"));
        }
        let params = FamilyParams {
            nu: finite("nu", get(m, "nu", 0.0)?)?,
            alpha: finite("alpha", get(m, "alpha", 0.0)?)?,
            ell: finite("ell", get(m, "ell", 1.0)?)?,
            alphas: get_list(m, "alphas")?,
            betas: get_list(m, "betas")?,
            gammas: get_list(m, "gammas")?,
        };
        match family {
            Family::G | Family::H if params.ell <= 0.0 => {
                return Err(HarnessError::config(format!(
                    "ell must be positive, got {}",
                    params.ell
                )));
            }
            Family::Jackson if params.nu <= -1.0 => {
                return Err(HarnessError::config(format!("nu must exceed -1, got {}", params.nu)));
            }
            Family::QLaguerre if params.alpha <= -1.0 => {
                return Err(HarnessError::config(format!(
                    "alpha must exceed -1, got {}",
                    params.alpha
                )));
            }
            Family::Confluent => {
                HypergeometricSpec::new(params.alphas.clone(), params.betas.clone())
                    .map_err(|e| HarnessError::config(e.to_string()))?;
            }
            _ => {}
        }
        if matches!(family, Family::G | Family::H) {
            qseries_core::series::SeriesParams::new(
                params.alphas.clone(),
                params.betas.clone(),
                params.gammas.clone(),
                params.ell,
            )
            .map_err(|e| HarnessError::config(e.to_string()))?;
        }
        let cos_threshold = finite("cos-threshold", get(m, "cos-threshold", 0.2)?)?;
        if !(0.0..1.0).contains(&cos_threshold) {
            return Err(HarnessError::config("cos-threshold must lie in [0, 1)"));
        }
        let max_top_rel_error: Option<f64> = m
            .get("max-top-rel-error")
            .map(|s| parse_value("max-top-rel-error", s))
            .transpose()?;
        Ok(StudyConfig {
            label: label.to_string(),
            family,
            branch,
            scale,
            v_grid,
            v_bound,
            n_grid,
            params,
            precision: precision_from(m)?,
            seed: get(m, "seed", 0)?,
            variant: get(m, "variant", FormulaVariant::AsPrinted)?,
            beta_denominator: get(m, "beta-denominator", BetaDenominator::Gamma)?,
            cos_threshold,
            threads: get(m, "threads", 0)?,
            timing: get(m, "timing", false)?,
            max_top_rel_error,
        })
    }

    /// The spacing that the decay criterion is normalised by: `l` for the master
    /// series and the confluent series, 1 for every named family.
    pub fn ell_eff(&self) -> f64 {
        match self.family {
            Family::G | Family::H => self.params.ell,
            Family::Confluent => {
                let r = self.params.alphas.len() as f64;
                let s = self.params.betas.len() as f64;
                (s + 1.0 - r) / 2.0
            }
            _ => 1.0,
        }
    }
}

/// Every study described by a config.
pub fn study_plan(raw: &RawConfig) -> Result<Vec<StudyConfig>> {
    let plan = raw
        .expanded()
        .iter()
        .map(|(label, m)| StudyConfig::from_map(label, m))
        .collect::<Result<Vec<_>>>()?;
    if plan.is_empty() {
        return Err(HarnessError::config("config describes no study"));
    }
    Ok(plan)
}

impl BoundsConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let m = &raw.shared;
        let lemmas: Vec<u8> = get_list(m, "lemma")?;
        let lemmas = if lemmas.is_empty() { vec![1, 4, 5] } else { lemmas };
        if let Some(bad) = lemmas.iter().find(|l| ![1, 4, 5].contains(*l)) {
            return Err(HarnessError::config(format!("lemma must be 1, 4 or 5, got {bad}")));
        }
        let v_grid: Vec<f64> = get_list(m, "v")?;
        let v_grid = if v_grid.is_empty() { vec![0.2, 0.3] } else { v_grid };
        let ell = finite("ell", get(m, "ell", 1.0)?)?;
        if ell <= 0.0 {
            return Err(HarnessError::config("ell must be positive"));
        }
        Ok(BoundsConfig {
            lemmas,
            samples: get(m, "samples", 100)?,
            seed: get(m, "seed", 0)?,
            ell,
            v_grid,
            n_grid: n_grid_from(m)?,
            scale: scale_from(m)?,
            variant: get(m, "variant", FormulaVariant::AsPrinted)?,
            precision: precision_from(m)?,
        })
    }
}

impl CheckConfig {
    /// `base_dir` resolves a relative `study-config` path.
    pub fn from_raw(raw: &RawConfig, base_dir: Option<&Path>) -> Result<Self> {
        let m = &raw.shared;
        let suites = m.get("suite").map(|s| split_list(s)).unwrap_or_default();
        if suites.is_empty() {
            return Err(HarnessError::config("suite is required"));
        }
        for s in &suites {
            if !crate::suites::SUITES.contains(&s.as_str()) {
                return Err(HarnessError::config(format!("unknown suite '{s}'")));
            }
        }
        let study_config = m.get("study-config").map(|p| match base_dir {
            Some(d) if Path::new(p).is_relative() => d.join(p),
            _ => Path::new(p).to_path_buf(),
        });
        if suites.iter().any(|s| s == "determinism") && study_config.is_none() {
            return Err(HarnessError::config("the determinism suite needs study-config"));
        }
        Ok(CheckConfig {
            suites,
            seed: get(m, "seed", 0)?,
            precision: precision_from(m)?,
            study_config,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_sections_and_repeats() {
        let raw = RawConfig::parse(
            "# header\nfamily = g  # trailing\nv = 0.1\nv = 0.2\nn = 20, 30\n[a]\nell = 0.5\n[b]\nell = 1.5, 1\n",
        )
        .unwrap();
        assert_eq!(raw.shared["v"], "0.1, 0.2");
        let plan = study_plan(&raw).unwrap();
        assert_eq!(plan.len(), 3);
        assert_eq!(plan[0].label, "a");
        assert_eq!(plan[1].label, "b_ell=1.5");
        assert_eq!(plan[2].params.ell, 1.0);
        assert_eq!(plan[0].v_grid, vec![0.1, 0.2]);
    }

    #[test]
    fn product_expansion() {
        let raw = RawConfig::parse("family = ramanujan, jackson\nbranch = minus, plus\nv = 0\nn = 4").unwrap();
        let plan = study_plan(&raw).unwrap();
        assert_eq!(plan.len(), 4);
        assert_eq!(plan[3].label, "study_family=jackson_branch=plus");
    }

    #[test]
    fn overrides_win() {
        let mut raw = RawConfig::parse("family = g\nv = 0.1\nn = 20\n[x]\nv = 0.3").unwrap();
        let mut o = BTreeMap::new();
        o.insert("v".to_string(), "0.4".to_string());
        raw.override_with(&o).unwrap();
        assert_eq!(study_plan(&raw).unwrap()[0].v_grid, vec![0.4]);
    }

    #[test]
    fn validation_errors() {
        for text in [
            "family = g\nn = 20",
            "family = g\nv =\nn = 20",
            "family = g\nv = 0.1\nn = 30, 20",
            "family = g\nv = 0.1\nn = 20, 20",
            "family = g\nv = 1.5\nn = 20",
            "family = g\nv = 0.1\nn = 20\nell = -1",
            "family = nope\nv = 0.1\nn = 20",
            "family = g\nv = 0.1\nn = 20\nscale-beta = 0.7",
            "family = jackson\nv = 0.1\nn = 20\nnu = -2",
            "family = g\nv = 0.1\nn = 1",
            "family = g\nv = 0.1\nn-start = 5",
        ] {
            let r = RawConfig::parse(text).and_then(|raw| study_plan(&raw));
            assert!(matches!(r, Err(HarnessError::Config(_))), "accepted: {text:?}");
        }
        assert!(RawConfig::parse("bogus = 1").is_err());
        assert!(RawConfig::parse("no equals sign").is_err());
    }

    #[test]
    fn n_range() {
        let raw = RawConfig::parse("family = confluent\nbetas = 1.5\nv = 0\nn-start = 20\nn-stop = 120\nn-step = 20")
            .unwrap();
        let plan = study_plan(&raw).unwrap();
        assert_eq!(plan[0].n_grid, vec![20, 40, 60, 80, 100, 120]);
        assert_eq!(plan[0].ell_eff(), 1.0);
    }
}
