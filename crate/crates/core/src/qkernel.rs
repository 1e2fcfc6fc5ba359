//! q-Pochhammer symbols, q-Gamma, Euler Gamma, Dedekind eta and the `q -> 1`
//! main terms of `(q;q)_inf` and `(q^x;q)_inf`.
//!
//! The base is always parameterized by a scale `lambda > 0` through `q = exp(-pi/lambda)`,
//! and `q` is regenerated at whatever precision a caller works in.

use std::f64::consts::LN_2;

use rug::float::Constant;
use rug::{Complex, Float};

use crate::numeric::{approx_ln_abs, approx_ln_abs_real, LogForm, PrecisionContext};
use crate::{Error, Result};

/// Extra bits carried internally by the product routines before rounding to the
/// caller's precision.
const GUARD: u32 = 32;

/// The base `q = exp(-pi / lambda)`, stored through its scale.
///
/// A base raised to a power keeps the exponent separately, `q^p = exp(-pi p / lambda)`,
/// so that no rounding of `lambda / p` ever enters the base.
#[derive(Debug, Clone, PartialEq)]
pub struct QParam {
    lambda: Float,
    power: Float,
}

impl QParam {
    pub fn new(lambda: Float) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0) {
            return Err(Error::InvalidParameters(format!(
                "scale must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            power: Float::with_val(64, 1),
        })
    }

    pub fn from_f64(lambda: f64) -> Result<Self> {
        Self::new(Float::with_val(128, lambda))
    }

    /// Recovers the scale of a given base, `lambda = pi / ln(1/q)`.
    ///
    /// The scale is held with at least 1024 bits, so the base is reproduced well beyond
    /// any working precision of ordinary evaluations.
    pub fn from_nome(q: &Float) -> Result<Self> {
        if !(*q > 0 && *q < 1) {
            return Err(Error::InvalidParameters(format!("base must lie in (0, 1), got {q}")));
        }
        let prec = q.prec().max(1024) + 64;
        let ln_q = Float::with_val(prec, q.ln_ref());
        Self::new(Float::with_val(prec, Constant::Pi) / -ln_q)
    }

    pub fn from_nome_f64(q: f64) -> Result<Self> {
        Self::from_nome(&Float::with_val(128, q))
    }

    /// The scale `lambda` of the unpowered base.
    pub fn lambda(&self) -> &Float {
        &self.lambda
    }

    /// Effective scale `lambda / power`, i.e. the `L` with `q = exp(-pi / L)`.
    pub fn scale(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.lambda) / Float::with_val(prec, &self.power)
    }

    /// `tau_im = power / lambda`, so that `q = exp(-pi tau_im)`.
    pub fn tau_im(&self, prec: u32) -> Float {
        Float::with_val(prec, &self.power) / Float::with_val(prec, &self.lambda)
    }

    pub fn lambda_f64(&self) -> f64 {
        self.scale(64).to_f64()
    }

    /// The base raised to a positive power.
    pub fn powered(&self, p: &Float) -> Result<QParam> {
        if !(p.is_finite() && *p > 0) {
            return Err(Error::InvalidParameters(format!("power must be positive, got {p}")));
        }
        let prec = self.power.prec() + p.prec();
        Ok(Self {
            lambda: self.lambda.clone(),
            power: Float::with_val(prec, &self.power * p),
        })
    }

    /// `ln q = -pi power / lambda`.
    pub fn ln_q(&self, prec: u32) -> Float {
        -(Float::with_val(prec, Constant::Pi) * &self.power / Float::with_val(prec, &self.lambda))
    }

    pub fn q(&self, prec: u32) -> Float {
        self.ln_q(prec).exp()
    }

    /// `1 - q`, without cancellation.
    pub fn one_minus_q(&self, prec: u32) -> Float {
        -self.ln_q(prec).exp_m1()
    }

    /// `q^x = exp(x ln q)`.
    pub fn pow(&self, x: &Float, prec: u32) -> Float {
        Float::with_val(prec, self.ln_q(prec) * x).exp()
    }

    pub fn pow_f64(&self, x: f64, prec: u32) -> Float {
        Float::with_val(prec, self.ln_q(prec) * x).exp()
    }

    /// `1 - q^x`, without cancellation.
    pub fn one_minus_pow(&self, x: &Float, prec: u32) -> Float {
        -Float::with_val(prec, self.ln_q(prec) * x).exp_m1()
    }
}

/// `(a;q)_n = prod_{k<n} (1 - a q^k)`; the empty product is 1.
pub fn qpoch_finite(a: &Complex, q: &QParam, n: usize, ctx: &PrecisionContext) -> Complex {
    let prec = ctx.bits();
    let wp = prec + GUARD;
    let qv = q.q(wp);
    let mut term = Complex::with_val(wp, a);
    let mut prod = Complex::with_val(wp, 1);
    for _ in 0..n {
        prod *= Complex::with_val(wp, 1 - &term);
        term *= &qv;
    }
    Complex::with_val(prec, prod)
}

/// Number of factors after which `2|a| q^N / (1 - q) <= 2^-prec`.
fn truncation_len(a_ln: f64, q: &QParam, prec: u32) -> f64 {
    let ln_q = q.ln_q(64).to_f64();
    let ln_1mq = approx_ln_abs_real(&q.one_minus_q(64));
    let need = a_ln + LN_2 - ln_1mq + f64::from(prec) * LN_2;
    (need / -ln_q).ceil().max(0.0)
}

/// `(a;q)_inf` at working precision `prec`, truncated once the remaining factors
/// differ from 1 by less than `2^-prec` in product.
pub(crate) fn poch_inf_at(a: &Complex, q: &Float, one_minus_q: &Float, prec: u32) -> Complex {
    let mut term = Complex::with_val(prec, a);
    let mut prod = Complex::with_val(prec, 1);
    let stop = -f64::from(prec) * LN_2 + approx_ln_abs_real(one_minus_q) - LN_2;
    loop {
        if approx_ln_abs(&term) <= stop {
            return prod;
        }
        prod *= Complex::with_val(prec, 1 - &term);
        term *= q;
    }
}

/// `(q^x;q)_inf` for real `x`, with factors close to zero formed by `expm1`.
pub(crate) fn qpow_poch_inf_at(x: &Float, q: &QParam, prec: u32) -> Float {
    let ln_q = q.ln_q(prec);
    let qv = Float::with_val(prec, ln_q.exp_ref());
    let one_minus_q = q.one_minus_q(prec);
    let stop = -f64::from(prec) * LN_2 + approx_ln_abs_real(&one_minus_q) - LN_2;
    let mut prod = Float::with_val(prec, 1);
    let mut e = Float::with_val(prec, x);
    // Factors with q^{x+k} > 1/2 lose bits to cancellation; form them as -expm1.
    loop {
        let t = Float::with_val(prec, &ln_q * &e);
        if t < -LN_2 {
            break;
        }
        prod *= -t.exp_m1();
        e += 1u32;
    }
    let mut term = Float::with_val(prec, &ln_q * &e).exp();
    while approx_ln_abs_real(&term) > stop {
        prod *= Float::with_val(prec, 1 - &term);
        term *= &qv;
    }
    prod
}

/// `(q^x;q)_n` for real `x`, with factors close to zero formed by `expm1`.
pub(crate) fn qpow_poch_finite_at(x: &Float, q: &QParam, n: usize, prec: u32) -> Float {
    let ln_q = q.ln_q(prec);
    let mut prod = Float::with_val(prec, 1);
    let mut e = Float::with_val(prec, x);
    for _ in 0..n {
        prod *= -Float::with_val(prec, &ln_q * &e).exp_m1();
        e += 1u32;
    }
    prod
}

/// `(a;q)_inf`, truncated where the tail bound `2|a| q^N / (1 - q)` drops below the
/// working precision (which itself exceeds the tolerance).
pub fn qpoch_infinite(a: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    let wp = prec + GUARD;
    let n = truncation_len(approx_ln_abs(a), q, wp);
    if n > ctx.max_terms() as f64 {
        return Err(crate::numeric::NumericError::PrecisionExhausted {
            needed: wp,
            max: ctx.max_bits(),
        }
        .into());
    }
    let out = poch_inf_at(a, &q.q(wp), &q.one_minus_q(wp), wp);
    Ok(Complex::with_val(prec, out))
}

/// The two remainders of `(a q^n;q)_inf` around 1 together with their common bound.
#[derive(Debug, Clone)]
pub struct Lemma1Remainders {
    /// `(a q^n;q)_inf - 1`.
    pub r1: Complex,
    /// `1 / (a q^n;q)_inf - 1`.
    pub r2: Complex,
    /// `2 |a| q^n / (1 - q)`.
    pub bound: Float,
}

/// Evaluates both remainders of the truncated product exactly, with the bound they
/// must respect whenever `|a| q^n / (1 - q) < 1/2`.
///
/// `a = 0` is accepted and returns all zeros.
pub fn lemma1_remainders(a: &Complex, q: &QParam, n: usize, ctx: &PrecisionContext) -> Result<Lemma1Remainders> {
    let prec = ctx.bits();
    let wp = prec + GUARD;
    if a.real().is_zero() && a.imag().is_zero() {
        return Ok(Lemma1Remainders {
            r1: Complex::new(prec),
            r2: Complex::new(prec),
            bound: Float::new(prec),
        });
    }
    let qn = q.pow_f64(n as f64, wp);
    let abs_a = Float::with_val(wp, a.abs_ref());
    let x = Float::with_val(wp, &abs_a * &qn) / q.one_minus_q(wp);
    if x >= 0.5 {
        return Err(Error::PreconditionViolated(format!(
            "|a| q^n / (1 - q) = {} is not below 1/2",
            x.to_f64()
        )));
    }
    let shifted = Complex::with_val(wp, a * &qn);
    let p = qpoch_infinite(&shifted, q, &ctx.with_bits(wp)?)?;
    let r1 = Complex::with_val(prec, &p - 1u32);
    let r2 = Complex::with_val(prec, p.recip() - 1u32);
    Ok(Lemma1Remainders {
        r1,
        r2,
        bound: Float::with_val(prec, x * 2u32),
    })
}

fn is_nonpositive_integer(z: &Complex) -> bool {
    z.imag().is_zero() && *z.real() <= 0 && z.real().is_integer()
}

/// `Gamma_q(z) = (q;q)_inf / (q^z;q)_inf * (1 - q)^{1-z}`.
pub fn q_gamma(z: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(format!("z = {}", z.real())));
    }
    let prec = ctx.bits();
    let wp = prec + GUARD;
    let one = Float::with_val(wp, 1);
    let qq = qpow_poch_inf_at(&one, q, wp);
    let one_minus_q = q.one_minus_q(wp);
    let ln_1mq = Float::with_val(wp, one_minus_q.ln_ref());
    let zw = Complex::with_val(wp, z);
    let denom = if zw.imag().is_zero() {
        Complex::with_val(wp, qpow_poch_inf_at(zw.real(), q, wp))
    } else {
        let qz = Complex::with_val(wp, &zw * q.ln_q(wp)).exp();
        poch_inf_at(&qz, &q.q(wp), &one_minus_q, wp)
    };
    let power = Complex::with_val(wp, (1 - zw) * ln_1mq).exp();
    let out = Complex::with_val(wp, qq * power) / denom;
    Ok(Complex::with_val(prec, out))
}

/// Euler's Gamma function for `x > 0`, correctly rounded at `prec` bits.
pub fn euler_gamma(x: &Float, prec: u32) -> Result<Float> {
    if !(x.is_finite() && *x > 0) {
        return Err(Error::InvalidParameters(format!(
            "Gamma argument must be positive, got {x}"
        )));
    }
    Ok(Float::with_val(prec, x.gamma_ref()))
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_euler_gamma(x: &Float, prec: u32) -> Result<Float> {
    if !(x.is_finite() && *x > 0) {
        return Err(Error::InvalidParameters(format!(
            "Gamma argument must be positive, got {x}"
        )));
    }
    Ok(Float::with_val(prec, x.ln_gamma_ref()))
}

/// `eta(i t) = exp(-pi t / 12) prod_{k>=1} (1 - exp(-2 pi k t))`, evaluated directly.
pub fn dedekind_eta_direct(tau_im: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(tau_im.is_finite() && *tau_im > 0) {
        return Err(Error::InvalidParameters(format!(
            "tau_im must be positive, got {tau_im}"
        )));
    }
    let prec = ctx.bits();
    let wp = prec + GUARD;
    // (p;p)_inf with p = exp(-2 pi t): the unit-scale base raised to 2t.
    let t = Float::with_val(wp, tau_im);
    let base = QParam::new(Float::with_val(wp, 1))?.powered(&Float::with_val(wp, &t * 2u32))?;
    let prod = qpow_poch_inf_at(&Float::with_val(wp, 1), &base, wp);
    let pre = (-(Float::with_val(wp, Constant::Pi) * t) / 12u32).exp();
    Ok(Float::with_val(prec, pre * prod))
}

/// Dedekind eta on the imaginary axis; arguments below 1 go through
/// `eta(i t) = t^{-1/2} eta(i / t)`.
pub fn dedekind_eta(tau_im: &Float, ctx: &PrecisionContext) -> Result<Float> {
    if !(tau_im.is_finite() && *tau_im > 0) {
        return Err(Error::InvalidParameters(format!(
            "tau_im must be positive, got {tau_im}"
        )));
    }
    if *tau_im >= 1 {
        return dedekind_eta_direct(tau_im, ctx);
    }
    let prec = ctx.bits();
    let wp = prec + GUARD;
    let t = Float::with_val(wp, tau_im);
    let inv = Float::with_val(wp, t.recip_ref());
    let eta = dedekind_eta_direct(&inv, &ctx.with_bits(wp)?)?;
    Ok(Float::with_val(prec, eta / t.sqrt()))
}

/// Main term of `(q;q)_inf` as `q -> 1`: `sqrt(2 lambda) exp(pi/(24 lambda) - pi lambda/6)`.
pub fn lemma2_qq_inf_asym(lambda: &Float, prec: u32) -> LogForm {
    let lam = Float::with_val(prec, lambda);
    let pi = Float::with_val(prec, Constant::Pi);
    let half_ln = Float::with_val(prec, &lam * 2u32).ln() / 2u32;
    let a = Float::with_val(prec, &pi / Float::with_val(prec, &lam * 24u32));
    let b = Float::with_val(prec, &pi * &lam) / 6u32;
    LogForm::new(half_ln + a - b, Float::new(prec))
}

/// Main term of `(q^x;q)_inf` as `q -> 1`:
/// `sqrt(2) pi^{1-x} lambda^{x-1/2} / (Gamma(x) exp(pi lambda / 6))`.
pub fn lemma3_qx_inf_asym(x: &Float, lambda: &Float, prec: u32) -> Result<LogForm> {
    if !(x.is_finite() && *x > 0) {
        return Err(Error::InvalidParameters(format!("x must be positive, got {x}")));
    }
    let lam = Float::with_val(prec, lambda);
    let xv = Float::with_val(prec, x);
    let pi = Float::with_val(prec, Constant::Pi);
    let ln_pi = Float::with_val(prec, pi.ln_ref());
    let ln_lam = Float::with_val(prec, lam.ln_ref());
    let mut l = Float::with_val(prec, 2u32).ln() / 2u32;
    l += Float::with_val(prec, 1 - &xv) * ln_pi;
    l += Float::with_val(prec, &xv - 0.5f64) * ln_lam;
    l -= ln_euler_gamma(&xv, prec)?;
    l -= Float::with_val(prec, &pi * &lam) / 6u32;
    Ok(LogForm::new(l, Float::new(prec)))
}
