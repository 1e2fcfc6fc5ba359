//! Admissible scales and the `q -> 1` main terms of the master series and named families.
//!
//! Every approximant is evaluated at `q = exp(-pi / lambda)` with `z = exp(2 pi v)` and is
//! returned as an [`AsymResult`]: an exponential main term in log form, a separate
//! oscillatory cosine (1 for the non-oscillatory branches), and the claimed order of the
//! relative error. Callers obtain `lambda` from an [`AdmissibleScale`] or supply it
//! directly.

use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::numeric::LogForm;
use crate::qkernel::ln_euler_gamma;
use crate::series::HypergeometricSpec;
use crate::{Error, FormulaVariant, Result};

/// The parity indicator: 1 for odd `n`, 0 for even `n`.
pub fn chi(n: u64) -> u8 {
    (n & 1) as u8
}

/// The two families of admissible scales.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScaleKind {
    /// `lambda_n = n^beta log^gamma n`.
    PowerLog,
    /// `lambda_n = log^gamma n`.
    LogPower,
}

impl fmt::Display for ScaleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PowerLog => "power-log",
            Self::LogPower => "log-power",
        })
    }
}

impl FromStr for ScaleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "power-log" | "power_log" => Ok(Self::PowerLog),
            "log-power" | "log_power" => Ok(Self::LogPower),
            other => Err(format!("unknown scale kind '{other}'")),
        }
    }
}

/// A sequence `lambda_n` with `lambda_n / log n -> inf` and `n / lambda_n^2 -> inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleScale {
    kind: ScaleKind,
    beta: f64,
    gamma: f64,
}

impl AdmissibleScale {
    /// `n^beta log^gamma n` with `0 < beta < 1/2`, `gamma >= 0`.
    pub fn power_log(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta.is_finite() && gamma.is_finite()) || beta <= 0.0 || beta >= 0.5 || gamma < 0.0 {
            return Err(Error::InvalidParameters(format!(
                "power-log scale needs 0 < beta < 1/2 and gamma >= 0, got beta = {beta}, gamma = {gamma}"
            )));
        }
        Ok(Self {
            kind: ScaleKind::PowerLog,
            beta,
            gamma,
        })
    }

    /// `log^gamma n` with `gamma > 1`.
    pub fn log_power(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0) {
            return Err(Error::InvalidParameters(format!(
                "log-power scale needs gamma > 1, got {gamma}"
            )));
        }
        Ok(Self {
            kind: ScaleKind::LogPower,
            beta: 0.0,
            gamma,
        })
    }

    pub fn new(kind: ScaleKind, beta: f64, gamma: f64) -> Result<Self> {
        match kind {
            ScaleKind::PowerLog => Self::power_log(beta, gamma),
            ScaleKind::LogPower => Self::log_power(gamma),
        }
    }

    pub fn kind(&self) -> ScaleKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `lambda_n` at `prec` bits; requires `n >= 2`.
    pub fn value(&self, n: u64, prec: u32) -> Result<Float> {
        if n < 2 {
            return Err(Error::InvalidParameters(format!(
                "scale index must be at least 2, got {n}"
            )));
        }
        let nf = Float::with_val(prec, n);
        let ln_n = Float::with_val(prec, nf.ln_ref());
        let log_part = Float::with_val(prec, (&ln_n).pow(self.gamma));
        Ok(match self.kind {
            ScaleKind::PowerLog => Float::with_val(prec, (&nf).pow(self.beta)) * log_part,
            ScaleKind::LogPower => log_part,
        })
    }

    /// `lambda_n` in double precision.
    pub fn value_f64(&self, n: u64) -> Result<f64> {
        Ok(self.value(n, 64)?.to_f64())
    }
}

/// Which sign of the scaled argument a formula describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The series at `-q^{-...} z`: a pure exponential main term.
    Minus,
    /// The series at `+q^{-...} z`: the main term carries a cosine.
    Plus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Minus => "minus",
            Self::Plus => "plus",
        })
    }
}

impl FromStr for Branch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "minus" | "minus-argument" | "minus_argument" => Ok(Self::Minus),
            "plus" | "plus-argument" | "plus_argument" => Ok(Self::Plus),
            other => Err(format!("unknown branch '{other}'")),
        }
    }
}

impl Branch {
    /// The sign applied to the scaled argument: `-1` for `Minus`, `+1` for `Plus`.
    pub fn sign(self) -> f64 {
        match self {
            Self::Minus => -1.0,
            Self::Plus => 1.0,
        }
    }
}

/// Denominator used in the oscillatory confluent main term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BetaDenominator {
    /// `prod Gamma(beta_j)`, matching the non-oscillatory branch.
    #[default]
    Gamma,
    /// `prod beta_j`.
    Plain,
}

impl fmt::Display for BetaDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gamma => "gamma",
            Self::Plain => "plain",
        })
    }
}

impl FromStr for BetaDenominator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gamma" => Ok(Self::Gamma),
            "plain" => Ok(Self::Plain),
            other => Err(format!("unknown beta denominator '{other}'")),
        }
    }
}

/// An asymptotic approximant: `series ~ main * oscillatory_factor * (1 + O(claimed_error_order))`.
#[derive(Debug, Clone)]
pub struct AsymResult {
    pub main: LogForm,
    /// The cosine of the oscillatory branch, or exactly 1, at working precision.
    pub oscillatory_factor: Float,
    pub claimed_error_order: LogForm,
    pub branch: Branch,
}

impl AsymResult {
    /// `main * oscillatory_factor` in log form.
    pub fn full(&self) -> LogForm {
        let prec = self.main.prec();
        self.main.mul_real(&Float::with_val(prec, &self.oscillatory_factor))
    }

    /// The oscillatory factor in double precision.
    pub fn oscillatory_factor_f64(&self) -> f64 {
        self.oscillatory_factor.to_f64()
    }

    /// Whether `|oscillatory_factor| < threshold`.
    pub fn near_cos_zero(&self, threshold: f64) -> bool {
        self.oscillatory_factor_f64().abs() < threshold
    }
}

struct Ctx {
    prec: u32,
    lam: Float,
    pi: Float,
}

impl Ctx {
    fn new(lambda: &Float) -> Result<Self> {
        if !(lambda.is_finite() && *lambda > 0) {
            return Err(Error::InvalidParameters(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let prec = lambda.prec();
        Ok(Self {
            prec,
            lam: Float::with_val(prec, lambda),
            pi: Float::with_val(prec, Constant::Pi),
        })
    }

    fn f(&self, x: f64) -> Float {
        Float::with_val(self.prec, x)
    }

    /// `pi lambda num / den`.
    fn pi_lam(&self, num: f64, den: f64) -> Float {
        Float::with_val(self.prec, &self.pi * &self.lam) * num / den
    }

    /// `pi num / (den lambda)`.
    fn pi_over_lam(&self, num: &Float, den: f64) -> Float {
        Float::with_val(self.prec, &self.pi / &self.lam) * num / den
    }

    /// `(pi lambda / l) (v + shift / lambda)^2`.
    fn square(&self, ell: f64, v: f64, shift: &Float) -> Float {
        let inner = self.f(v) + Float::with_val(self.prec, shift / &self.lam);
        self.pi_lam(1.0, ell) * inner.square()
    }

    /// `cos((pi lambda / l) (v + shift / lambda))`.
    fn cosine(&self, ell: f64, v: f64, shift: &Float) -> Float {
        let inner = self.f(v) + Float::with_val(self.prec, shift / &self.lam);
        (self.pi_lam(1.0, ell) * inner).cos()
    }

    fn ln_lam(&self) -> Float {
        Float::with_val(self.prec, self.lam.ln_ref())
    }

    /// `exp(-pi lambda num / den)`.
    fn exp_order(&self, num: f64, den: f64) -> LogForm {
        LogForm::new(-self.pi_lam(num, den), Float::new(self.prec))
    }

    fn real_log(&self, log_mag: Float) -> LogForm {
        LogForm::new(log_mag, Float::new(self.prec))
    }
}

fn check_ell(ell: f64) -> Result<()> {
    if ell.is_finite() && ell > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("ell must be positive, got {ell}")))
    }
}

fn ln2(prec: u32) -> Float {
    Float::with_val(prec, Constant::Log2)
}

/// Master series `g` at `-/+ q^{-4 n l} z`:
///
/// - minus: `exp{(pi lambda/l)(v + 2nl/lambda)^2} sqrt(lambda/l)`, error `e^{-pi lambda/l}`;
/// - plus: `exp{... - pi lambda/(4l)} 2 sqrt(lambda/l) cos(pi lambda v/l)`, error `e^{-2 pi lambda/l}`.
pub fn g_asym(branch: Branch, ell: f64, v: f64, n: u64, lambda: &Float) -> Result<AsymResult> {
    check_ell(ell)?;
    let c = Ctx::new(lambda)?;
    let mut l = c.square(ell, v, &(c.f(ell) * 2u32 * n));
    l += Float::with_val(c.prec, &c.lam / ell).ln() / 2u32;
    let (osc, order) = match branch {
        Branch::Minus => (c.f(1.0), c.exp_order(1.0, ell)),
        Branch::Plus => {
            l -= c.pi_lam(1.0, 4.0 * ell);
            l += ln2(c.prec);
            (c.cosine(ell, v, &c.f(0.0)), c.exp_order(2.0, ell))
        }
    };
    Ok(AsymResult {
        main: c.real_log(l),
        oscillatory_factor: osc,
        claimed_error_order: order,
        branch,
    })
}

/// Ramanujan's `A_q` at `-/+ q^{-4n} z`:
///
/// - minus: `exp{pi lambda (v + 2n/lambda)^2 + pi lambda/6 - pi/(24 lambda)} / sqrt 2`;
/// - plus: `exp{pi lambda (v + 2n/lambda)^2 - pi lambda/12 - pi/(24 lambda)} sqrt 2 cos(pi lambda v)`.
pub fn aq_asym(branch: Branch, v: f64, n: u64, lambda: &Float) -> Result<AsymResult> {
    let c = Ctx::new(lambda)?;
    let mut l = c.square(1.0, v, &(c.f(2.0) * n)) - c.pi_over_lam(&c.f(1.0), 24.0);
    let half_ln2 = ln2(c.prec) / 2u32;
    let (osc, order) = match branch {
        Branch::Minus => {
            l += c.pi_lam(1.0, 6.0) - half_ln2;
            (c.f(1.0), c.exp_order(1.0, 1.0))
        }
        Branch::Plus => {
            l += half_ln2 - c.pi_lam(1.0, 12.0);
            (c.cosine(1.0, v, &c.f(0.0)), c.exp_order(2.0, 1.0))
        }
    };
    Ok(AsymResult {
        main: c.real_log(l),
        oscillatory_factor: osc,
        claimed_error_order: order,
        branch,
    })
}

/// Jackson's second q-Bessel function at `2 i sqrt(z q^{-nu}) q^{-2n}` (minus) or
/// `2 sqrt(z q^{-nu}) q^{-2n}` (plus):
///
/// - minus: `exp(pi lambda/3 - pi/(12 lambda) + nu^2 pi/(4 lambda) + i nu pi/2) / (2 sqrt lambda)
///   * exp{pi lambda (v + (4n + nu)/(2 lambda))^2}`;
/// - plus: `exp(pi lambda/12 - pi/(12 lambda) + nu^2 pi/(4 lambda)) / sqrt lambda * exp{...} cos(pi lambda v)`.
pub fn jackson_asym(branch: Branch, v: f64, nu: f64, n: u64, lambda: &Float) -> Result<AsymResult> {
    if !(nu.is_finite() && nu > -1.0) {
        return Err(Error::InvalidParameters(format!("nu must exceed -1, got {nu}")));
    }
    let c = Ctx::new(lambda)?;
    let nu_f = c.f(nu);
    let mut l = c.square(1.0, v, &((c.f(4.0) * n + &nu_f) / 2u32)) - c.pi_over_lam(&c.f(1.0), 12.0)
        + c.pi_over_lam(&Float::with_val(c.prec, nu_f.square_ref()), 4.0)
        - c.ln_lam() / 2u32;
    let (phase, osc, order) = match branch {
        Branch::Minus => {
            l += c.pi_lam(1.0, 3.0) - ln2(c.prec);
            (
                Float::with_val(c.prec, &c.pi * nu) / 2u32,
                c.f(1.0),
                c.exp_order(1.0, 1.0),
            )
        }
        Branch::Plus => {
            l += c.pi_lam(1.0, 12.0);
            (Float::new(c.prec), c.cosine(1.0, v, &c.f(0.0)), c.exp_order(2.0, 1.0))
        }
    };
    Ok(AsymResult {
        main: LogForm::new(l, phase),
        oscillatory_factor: osc,
        claimed_error_order: order,
        branch,
    })
}

fn sum_ln_gamma(xs: &[f64], prec: u32) -> Result<Float> {
    let mut s = Float::new(prec);
    for x in xs {
        s += ln_euler_gamma(&Float::with_val(prec, *x), prec)?;
    }
    Ok(s)
}

/// Confluent `r phi s` at `-/+ z q^{-l(4n-1)}`.
///
/// As printed, the minus branch is
/// `2^l pi^{rho+l} prod Gamma(alpha) / (sqrt l lambda^{rho-1/2} e^{l pi lambda/3} prod Gamma(beta))
///  * exp{(pi lambda/l)(v + 2nl/lambda)^2}`,
/// and the plus branch doubles it, adds `e^{-pi lambda/(4l)}`, the cosine `cos(pi lambda v/l)`
/// and uses `prod beta` (or `prod Gamma(beta)`, per `denominator`) in the denominator.
///
/// The amended form composes the `g` main term with the exact Pochhammer prefactor:
/// `prod Gamma(beta) lambda^{rho+1/2} e^{l pi lambda/3} / (2^l pi^{rho+l} sqrt l prod Gamma(alpha))
///  * exp{(pi lambda/l)(v + 2nl/lambda)^2}`, with the same plus-branch modifications.
/// The claimed error is `lambda^{-1} log^2 lambda` on both branches.
pub fn confluent_asym(
    branch: Branch,
    spec: &HypergeometricSpec,
    v: f64,
    n: u64,
    lambda: &Float,
    denominator: BetaDenominator,
    variant: FormulaVariant,
) -> Result<AsymResult> {
    let c = Ctx::new(lambda)?;
    let p = c.prec;
    let ell = spec.ell();
    let mut rho = c.f(ell) - 1u32;
    for a in spec.alphas() {
        rho += *a;
    }
    for b in spec.betas() {
        rho -= *b;
    }
    let ln_pi = Float::with_val(p, c.pi.ln_ref());
    let ln_lam = c.ln_lam();
    let lg_alpha = sum_ln_gamma(spec.alphas(), p)?;
    let lg_beta = match (branch, denominator) {
        (Branch::Plus, BetaDenominator::Plain) => {
            let mut s = Float::new(p);
            for b in spec.betas() {
                s += Float::with_val(p, *b).ln();
            }
            s
        }
        _ => sum_ln_gamma(spec.betas(), p)?,
    };
    // ln of the printed prefactor 2^l pi^{rho+l} prod G(alpha) / (sqrt l lambda^{rho-1/2} e^{l pi lambda/3} prod G(beta))
    let printed = ln2(p) * ell + Float::with_val(p, &ln_pi * Float::with_val(p, &rho + ell)) + &lg_alpha
        - c.f(ell).ln() / 2u32
        - Float::with_val(p, &ln_lam * Float::with_val(p, &rho - 0.5f64))
        - c.pi_lam(ell, 3.0)
        - &lg_beta;
    let mut l = match variant {
        FormulaVariant::AsPrinted => printed,
        // the true prefactor: reciprocal of the printed one (the sqrt l stays in the
        // denominator), times lambda
        FormulaVariant::Amended => -printed - c.f(ell).ln() + Float::with_val(p, &ln_lam),
    };
    l += c.square(ell, v, &(c.f(ell) * 2u32 * n));
    let osc = match branch {
        Branch::Minus => c.f(1.0),
        Branch::Plus => {
            l += ln2(p);
            l -= c.pi_lam(1.0, 4.0 * ell);
            c.cosine(ell, v, &c.f(0.0))
        }
    };
    let order = Float::with_val(p, ln_lam.square_ref()).ln() - &ln_lam;
    Ok(AsymResult {
        main: c.real_log(l),
        oscillatory_factor: osc,
        claimed_error_order: c.real_log(order),
        branch,
    })
}

/// The parity used in the main terms of the `h` family: `chi(n)` as printed, 0 amended.
fn parity(n: u64, variant: FormulaVariant) -> f64 {
    match variant {
        FormulaVariant::AsPrinted => chi(n) as f64,
        FormulaVariant::Amended => 0.0,
    }
}

/// Master finite series `h_n` at `-/+ z q^{-nl}`:
///
/// - minus: `exp{(pi lambda/l)(v + l(n - chi)/(2 lambda))^2 + l pi (n-1) chi/(2 lambda)} sqrt(lambda/l)`;
/// - plus: the same times `2 e^{-pi lambda/(4l)} cos((pi lambda/l)(v + l(n - chi)/(2 lambda)))`.
///
/// `chi = chi(n)` as printed; the amended form takes `chi = 0` for every `n`.
pub fn h_asym(branch: Branch, ell: f64, v: f64, n: u64, lambda: &Float, variant: FormulaVariant) -> Result<AsymResult> {
    check_ell(ell)?;
    let c = Ctx::new(lambda)?;
    let nf = n as f64;
    let x = parity(n, variant);
    let shift = c.f(ell) * (nf - x) / 2u32;
    let mut l = c.square(ell, v, &shift) + c.pi_over_lam(&(c.f(ell) * ((nf - 1.0) * x)), 2.0);
    l += Float::with_val(c.prec, &c.lam / ell).ln() / 2u32;
    let (osc, order) = match branch {
        Branch::Minus => (c.f(1.0), c.exp_order(1.0, ell)),
        Branch::Plus => {
            l -= c.pi_lam(1.0, 4.0 * ell);
            l += ln2(c.prec);
            (c.cosine(ell, v, &shift), c.exp_order(2.0, ell))
        }
    };
    Ok(AsymResult {
        main: c.real_log(l),
        oscillatory_factor: osc,
        claimed_error_order: order,
        branch,
    })
}

/// Ismail-Masson polynomials at `sinh(pi(v + i/2))` (minus) or `sinh(pi v)` (plus):
///
/// - minus: `exp{pi n^2/(4 lambda) + pi lambda/6 - pi(1 + 12 chi)/(24 lambda)} / ((-i)^n sqrt 2)
///   * exp[pi lambda (v - chi/(2 lambda))^2]`;
/// - plus: `(-1)^n sqrt 2 exp{n^2 pi/(4 lambda) - (1 + 12 chi) pi/(24 lambda) - pi lambda/12}
///   * exp[pi lambda (v - chi/(2 lambda))^2] cos(pi lambda (v + (n - chi)/(2 lambda)))`.
pub fn im_asym(branch: Branch, v: f64, n: u64, lambda: &Float, variant: FormulaVariant) -> Result<AsymResult> {
    let c = Ctx::new(lambda)?;
    let nf = n as f64;
    let x = parity(n, variant);
    let mut l = c.pi_over_lam(&(c.f(nf) * nf), 4.0) - c.pi_over_lam(&c.f(1.0 + 12.0 * x), 24.0)
        + c.square(1.0, v, &c.f(-x / 2.0));
    let half_ln2 = ln2(c.prec) / 2u32;
    let (phase, osc, order) = match branch {
        Branch::Minus => {
            l += c.pi_lam(1.0, 6.0) - half_ln2;
            // 1 / (-i)^n = i^n
            let quarter = Float::with_val(c.prec, &c.pi / 2u32);
            (quarter * (n % 4) as u32, c.f(1.0), c.exp_order(1.0, 1.0))
        }
        Branch::Plus => {
            l += half_ln2 - c.pi_lam(1.0, 12.0);
            let sign = if n % 2 == 1 {
                Float::with_val(c.prec, &c.pi)
            } else {
                Float::new(c.prec)
            };
            (sign, c.cosine(1.0, v, &c.f((nf - x) / 2.0)), c.exp_order(2.0, 1.0))
        }
    };
    Ok(AsymResult {
        main: LogForm::new(l, phase),
        oscillatory_factor: osc,
        claimed_error_order: order,
        branch,
    })
}

/// Shared shape of the Stieltjes-Wigert and q-Laguerre main terms:
///
/// - minus: `exp{pi lambda/3 + pi (n-1) chi/(2 lambda) - pi/(12 lambda)} / (2 sqrt lambda)
///   * exp{pi lambda (v + (n - chi)/(2 lambda))^2}`;
/// - plus: `exp{pi lambda/12 + ...} / sqrt lambda * exp{...} cos(pi lambda (v + (n - chi)/(2 lambda)))`.
fn sw_shape(branch: Branch, v: f64, n: u64, lambda: &Float, variant: FormulaVariant) -> Result<AsymResult> {
    let c = Ctx::new(lambda)?;
    let nf = n as f64;
    let x = parity(n, variant);
    let shift = c.f((nf - x) / 2.0);
    let mut l = c.pi_over_lam(&c.f((nf - 1.0) * x), 2.0) - c.pi_over_lam(&c.f(1.0), 12.0) + c.square(1.0, v, &shift)
        - c.ln_lam() / 2u32;
    let (osc, order) = match branch {
        Branch::Minus => {
            l += c.pi_lam(1.0, 3.0) - ln2(c.prec);
            (c.f(1.0), c.exp_order(1.0, 1.0))
        }
        Branch::Plus => {
            l += c.pi_lam(1.0, 12.0);
            (c.cosine(1.0, v, &shift), c.exp_order(2.0, 1.0))
        }
    };
    Ok(AsymResult {
        main: c.real_log(l),
        oscillatory_factor: osc,
        claimed_error_order: order,
        branch,
    })
}

/// Stieltjes-Wigert polynomials at `-/+ z q^{-n}`.
pub fn sw_asym(branch: Branch, v: f64, n: u64, lambda: &Float, variant: FormulaVariant) -> Result<AsymResult> {
    sw_shape(branch, v, n, lambda, variant)
}

/// q-Laguerre polynomials at `-/+ z q^{-alpha-n}`; the main term does not depend on `alpha`.
/// See [`laguerre_ln_z`] for how `z` relates to `v`.
pub fn laguerre_asym(
    branch: Branch,
    alpha: f64,
    v: f64,
    n: u64,
    lambda: &Float,
    variant: FormulaVariant,
) -> Result<AsymResult> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::InvalidParameters(format!("alpha must exceed -1, got {alpha}")));
    }
    sw_shape(branch, v, n, lambda, variant)
}

/// `ln z` for the q-Laguerre evaluation point: `-2 pi v` as printed, `+2 pi v` amended
/// (the sign under which the main term actually describes the polynomial).
pub fn laguerre_ln_z(v: f64, variant: FormulaVariant) -> f64 {
    let two_pi_v = 2.0 * std::f64::consts::PI * v;
    match variant {
        FormulaVariant::AsPrinted => -two_pi_v,
        FormulaVariant::Amended => two_pi_v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::{lemma2_qq_inf_asym, lemma3_qx_inf_asym};

    const P: u32 = 256;

    fn lam(x: f64) -> Float {
        Float::with_val(P, x)
    }

    fn same(a: &LogForm, b: &LogForm) -> bool {
        a.rel_diff_f64(b) < 1e-60
    }

    #[test]
    #[allow(clippy::manual_div_ceil)]
    fn chi_is_parity() {
        assert_eq!(chi(2), 0);
        assert_eq!(chi(7), 1);
        for n in 0..=10_000u64 {
            let c = chi(n) as u64;
            assert_eq!(c, (n + 1) / 2 - n / 2);
            assert_eq!(n / 2, (n - c) / 2);
            assert_eq!((n + 1) / 2, (n + c) / 2);
            assert_eq!((n * n - c) % 4, 0);
        }
    }

    #[test]
    fn scale_values_and_validation() {
        let s = AdmissibleScale::power_log(0.4, 0.0).unwrap();
        assert!((s.value_f64(32).unwrap() - 4.0).abs() < 1e-14);
        let l = AdmissibleScale::log_power(2.0).unwrap();
        assert!((l.value_f64(1000).unwrap() - 1000f64.ln().powi(2)).abs() < 1e-12);
        assert!(AdmissibleScale::power_log(0.6, 0.0).is_err());
        assert!(AdmissibleScale::power_log(0.0, 1.0).is_err());
        assert!(AdmissibleScale::log_power(1.0).is_err());
        assert!(s.value(1, P).is_err());
    }

    #[test]
    fn scales_diverge_on_sampled_range() {
        for s in [
            AdmissibleScale::power_log(0.4, 0.0).unwrap(),
            AdmissibleScale::power_log(0.3, 1.0).unwrap(),
            AdmissibleScale::log_power(1.5).unwrap(),
        ] {
            let mut prev = (0.0, 0.0);
            for n in (100u64..=1_000_000).step_by(997) {
                let l = s.value_f64(n).unwrap();
                let cur = (l / (n as f64).ln(), n as f64 / (l * l));
                assert!(cur.0 > prev.0 && cur.1 > prev.1, "{s:?} at {n}");
                prev = cur;
            }
        }
    }

    #[test]
    fn g_main_term_at_origin() {
        let r = g_asym(Branch::Minus, 1.0, 0.0, 3, &lam(4.0)).unwrap();
        let expected = 4.0 * std::f64::consts::PI * 9.0 / 4.0 + 0.5 * 4f64.ln();
        assert!((r.main.log_mag_f64() - expected).abs() < 1e-12);
        assert_eq!(r.oscillatory_factor, 1.0);
        assert!(r.claimed_error_order.log_mag_f64() < 0.0);
    }

    #[test]
    fn plus_branch_cosine_vanishes_at_odd_half_periods() {
        let l = 4.0;
        let r = g_asym(Branch::Plus, 1.0, 1.0 / (2.0 * l), 5, &lam(l)).unwrap();
        assert!(r.near_cos_zero(1e-12));
    }

    #[test]
    fn ramanujan_is_g_over_euler_product() {
        for br in [Branch::Minus, Branch::Plus] {
            for (v, n, l) in [(0.0, 0, 3.0), (0.25, 7, 5.5), (-0.4, 20, 9.0)] {
                let a = aq_asym(br, v, n, &lam(l)).unwrap();
                let g = g_asym(br, 1.0, v, n, &lam(l)).unwrap();
                let composed = g.main.div(&lemma2_qq_inf_asym(&lam(l), P));
                assert!(same(&a.main, &composed));
                assert_eq!(a.oscillatory_factor, g.oscillatory_factor);
            }
        }
        let a = aq_asym(Branch::Minus, 0.0, 0, &lam(3.0)).unwrap();
        let pi = std::f64::consts::PI;
        let expected = pi * 3.0 / 6.0 - pi / 72.0 - 0.5 * 2f64.ln();
        assert!((a.main.log_mag_f64() - expected).abs() < 1e-12);
    }

    #[test]
    fn jackson_phase_and_composition() {
        let r = jackson_asym(Branch::Minus, 0.2, 1.0, 10, &lam(5.0)).unwrap();
        assert!((r.main.phase_f64() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        // nu = 0: A_q-like prefactor divided by the Euler product once more
        for br in [Branch::Minus, Branch::Plus] {
            let j = jackson_asym(br, 0.3, 0.0, 12, &lam(6.0)).unwrap();
            let g = g_asym(br, 1.0, 0.3, 12, &lam(6.0)).unwrap();
            let qq = lemma2_qq_inf_asym(&lam(6.0), P);
            assert!(same(&j.main, &g.main.div(&qq).div(&qq)));
        }
    }

    #[test]
    fn amended_confluent_composes_pochhammer_prefactors() {
        let spec = HypergeometricSpec::new(vec![0.7], vec![0.9, 1.3]).unwrap();
        let l = lam(7.0);
        for br in [Branch::Minus, Branch::Plus] {
            let c = confluent_asym(br, &spec, 0.1, 9, &l, BetaDenominator::Gamma, FormulaVariant::Amended).unwrap();
            let g = g_asym(br, spec.ell(), 0.1, 9, &l).unwrap();
            // (q;q)_inf enters through the same Gamma-type main term as the other products
            let mut composed = g.main.div(&lemma3_qx_inf_asym(&lam(1.0), &l, P).unwrap());
            for a in spec.alphas() {
                composed = composed.mul(&lemma3_qx_inf_asym(&lam(*a), &l, P).unwrap());
            }
            for b in spec.betas() {
                composed = composed.div(&lemma3_qx_inf_asym(&lam(*b), &l, P).unwrap());
            }
            assert!(
                c.main.rel_diff_f64(&composed) < 1e-50,
                "{}",
                c.main.rel_diff_f64(&composed)
            );
        }
    }

    #[test]
    fn printed_confluent_prefactor_at_unit_beta() {
        // r = 0, s = 1, beta = 1: l = 1, rho = -1, Gamma(1) = 1
        let spec = HypergeometricSpec::new(vec![], vec![1.0]).unwrap();
        assert_eq!(spec.ell(), 1.0);
        assert_eq!(spec.rho(), -1.0);
        let l = 5.0;
        let r = confluent_asym(
            Branch::Minus,
            &spec,
            0.0,
            0,
            &lam(l),
            BetaDenominator::Gamma,
            FormulaVariant::AsPrinted,
        )
        .unwrap();
        let pi = std::f64::consts::PI;
        let expected = 2f64.ln() + 1.5 * l.ln() - pi * l / 3.0;
        assert!((r.main.log_mag_f64() - expected).abs() < 1e-12);
        let plain = confluent_asym(
            Branch::Plus,
            &spec,
            0.0,
            0,
            &lam(l),
            BetaDenominator::Plain,
            FormulaVariant::AsPrinted,
        )
        .unwrap();
        let gamma = confluent_asym(
            Branch::Plus,
            &spec,
            0.0,
            0,
            &lam(l),
            BetaDenominator::Gamma,
            FormulaVariant::AsPrinted,
        )
        .unwrap();
        assert!(same(&plain.main, &gamma.main));
    }

    #[test]
    fn h_parity_terms() {
        let l = lam(6.0);
        let even = h_asym(Branch::Minus, 1.0, 0.3, 40, &l, FormulaVariant::AsPrinted).unwrap();
        let even_amended = h_asym(Branch::Minus, 1.0, 0.3, 40, &l, FormulaVariant::Amended).unwrap();
        assert!(same(&even.main, &even_amended.main));
        let odd = h_asym(Branch::Minus, 1.0, 0.3, 41, &l, FormulaVariant::AsPrinted).unwrap();
        let odd_amended = h_asym(Branch::Minus, 1.0, 0.3, 41, &l, FormulaVariant::Amended).unwrap();
        // printed odd term: shift (n-1)/2 plus pi (n-1)/(2 lambda)
        let pi = std::f64::consts::PI;
        let expected = pi * 6.0 * (0.3f64 + 20.0 / 6.0).powi(2) + pi * 40.0 / 12.0 + 0.5 * 6f64.ln();
        assert!((odd.main.log_mag_f64() - expected).abs() < 1e-10);
        assert!(!same(&odd.main, &odd_amended.main));
    }

    #[test]
    fn orthogonal_families_compose_with_h() {
        let l = lam(6.0);
        let qq = lemma2_qq_inf_asym(&l, P);
        for variant in [FormulaVariant::AsPrinted, FormulaVariant::Amended] {
            for n in [40u64, 41] {
                for br in [Branch::Minus, Branch::Plus] {
                    let h = h_asym(br, 1.0, 0.2, n, &l, variant).unwrap();
                    let sw = sw_asym(br, 0.2, n, &l, variant).unwrap();
                    let lg = laguerre_asym(br, 1.5, 0.2, n, &l, variant).unwrap();
                    assert!(same(&sw.main, &h.main.div(&qq).div(&qq)));
                    assert!(same(&sw.main, &lg.main));
                    assert!((sw.oscillatory_factor - h.oscillatory_factor).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn ismail_masson_phases() {
        let l = lam(6.0);
        for n in 0..8u64 {
            let m = im_asym(Branch::Minus, 0.1, n, &l, FormulaVariant::AsPrinted).unwrap();
            let expected = LogForm::from_f64(P, 0.0, std::f64::consts::FRAC_PI_2 * n as f64);
            assert!((m.main.phase_f64() - expected.phase_f64()).abs() < 1e-15);
            let p = im_asym(Branch::Plus, 0.1, n, &l, FormulaVariant::AsPrinted).unwrap();
            let sign = p.main.to_f64().signum();
            assert_eq!(sign, if n % 2 == 0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn laguerre_argument_convention() {
        assert!(laguerre_ln_z(0.2, FormulaVariant::AsPrinted) < 0.0);
        assert!(laguerre_ln_z(0.2, FormulaVariant::Amended) > 0.0);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(g_asym(Branch::Minus, 0.0, 0.1, 3, &lam(2.0)).is_err());
        assert!(g_asym(Branch::Minus, 1.0, 0.1, 3, &lam(-2.0)).is_err());
        assert!(jackson_asym(Branch::Minus, 0.1, -1.0, 3, &lam(2.0)).is_err());
        assert!(laguerre_asym(Branch::Minus, -2.0, 0.1, 3, &lam(2.0), FormulaVariant::Amended).is_err());
    }
}
