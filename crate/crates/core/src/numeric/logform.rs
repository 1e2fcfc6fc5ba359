use rug::float::{Constant, Special};
use rug::ops::Pow;
use rug::{Complex, Float};

use super::scalar::approx_ln_abs;
use super::NumericError;

/// A value stored as `exp(log_mag) * exp(i * phase)` with `phase` in `(-pi, pi]`.
///
/// Zero is `log_mag = -inf`. Both components are kept at full working precision so that
/// relative differences far below `f64` resolution remain measurable.
#[derive(Debug, Clone, PartialEq)]
pub struct LogForm {
    log_mag: Float,
    phase: Float,
}

fn wrap_phase(phase: Float) -> Float {
    let prec = phase.prec();
    if !phase.is_finite() {
        return Float::with_val(prec, 0);
    }
    let pi = Float::with_val(prec, Constant::Pi);
    let two_pi = Float::with_val(prec, &pi * 2u32);
    let neg_pi = Float::with_val(prec, -&pi);
    if phase > neg_pi && phase <= pi {
        return phase;
    }
    let mut r = phase.remainder(&two_pi);
    if r <= neg_pi {
        r += &two_pi;
    }
    if r > pi {
        r -= &two_pi;
    }
    r
}

impl LogForm {
    pub fn new(log_mag: Float, phase: Float) -> Self {
        if log_mag.is_infinite() && log_mag.is_sign_negative() {
            let p = phase.prec();
            return Self::zero(log_mag.prec().max(p));
        }
        Self {
            log_mag,
            phase: wrap_phase(phase),
        }
    }

    pub fn from_f64(prec: u32, log_mag: f64, phase: f64) -> Self {
        Self::new(Float::with_val(prec, log_mag), Float::with_val(prec, phase))
    }

    pub fn zero(prec: u32) -> Self {
        Self {
            log_mag: Float::with_val(prec, Special::NegInfinity),
            phase: Float::with_val(prec, 0),
        }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(prec, 0.0, 0.0)
    }

    pub fn from_real(x: &Float) -> Self {
        let prec = x.prec();
        if x.is_zero() {
            return Self::zero(prec);
        }
        let log_mag = Float::with_val(prec, x.abs_ref()).ln();
        let phase = if x.is_sign_negative() {
            Float::with_val(prec, Constant::Pi)
        } else {
            Float::with_val(prec, 0)
        };
        Self { log_mag, phase }
    }

    pub fn from_complex(z: &Complex) -> Self {
        let prec = z.prec().0.max(z.prec().1);
        if z.real().is_zero() && z.imag().is_zero() {
            return Self::zero(prec);
        }
        if z.imag().is_zero() {
            return Self::from_real(z.real());
        }
        let log_mag = Float::with_val(prec, z.abs_ref()).ln();
        let phase = Float::with_val(prec, z.arg_ref());
        Self::new(log_mag, phase)
    }

    pub fn log_mag(&self) -> &Float {
        &self.log_mag
    }

    pub fn phase(&self) -> &Float {
        &self.phase
    }

    pub fn log_mag_f64(&self) -> f64 {
        self.log_mag.to_f64()
    }

    pub fn phase_f64(&self) -> f64 {
        self.phase.to_f64()
    }

    pub fn prec(&self) -> u32 {
        self.log_mag.prec()
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag.is_infinite() && self.log_mag.is_sign_negative()
    }

    /// Materializes the value; phases of exactly `0` or `pi` give purely real results.
    pub fn to_complex(&self, prec: u32) -> Complex {
        if self.is_zero() {
            return Complex::new(prec);
        }
        let mag = Float::with_val(prec, self.log_mag.exp_ref());
        if self.phase.is_zero() {
            return Complex::with_val(prec, (mag, 0));
        }
        let pi = Float::with_val(self.phase.prec(), Constant::Pi);
        if self.phase == pi {
            return Complex::with_val(prec, (-mag, 0));
        }
        let (s, c) = Float::with_val(prec, &self.phase).sin_cos(Float::new(prec));
        Complex::with_val(prec, (Float::with_val(prec, &mag * c), mag * s))
    }

    /// Real part of the materialized value.
    pub fn to_real(&self, prec: u32) -> Float {
        self.to_complex(prec).into_real_imag().0
    }

    pub fn to_f64(&self) -> f64 {
        self.to_real(64).to_f64()
    }

    pub fn mul(&self, other: &LogForm) -> LogForm {
        let prec = self.prec().max(other.prec());
        if self.is_zero() || other.is_zero() {
            return Self::zero(prec);
        }
        Self::new(
            Float::with_val(prec, &self.log_mag + &other.log_mag),
            Float::with_val(prec, &self.phase + &other.phase),
        )
    }

    pub fn div(&self, other: &LogForm) -> LogForm {
        self.mul(&other.recip())
    }

    /// Reciprocal; the reciprocal of zero is reported as `+inf` magnitude.
    pub fn recip(&self) -> LogForm {
        let prec = self.prec();
        Self {
            log_mag: Float::with_val(prec, -&self.log_mag),
            phase: wrap_phase(Float::with_val(prec, -&self.phase)),
        }
    }

    pub fn neg(&self) -> LogForm {
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec();
        let pi = Float::with_val(prec, Constant::Pi);
        Self::new(self.log_mag.clone(), Float::with_val(prec, &self.phase + pi))
    }

    pub fn conj(&self) -> LogForm {
        let prec = self.prec();
        Self::new(self.log_mag.clone(), Float::with_val(prec, -&self.phase))
    }

    /// Principal real power: `exp(p * log_mag) * exp(i * p * phase)`.
    pub fn pow_real(&self, p: &Float) -> LogForm {
        let prec = self.prec().max(p.prec());
        if self.is_zero() {
            return Self::zero(prec);
        }
        Self::new(
            Float::with_val(prec, &self.log_mag * p),
            Float::with_val(prec, &self.phase * p),
        )
    }

    pub fn mul_real(&self, x: &Float) -> LogForm {
        self.mul(&Self::from_real(x))
    }

    /// Multiplies by `exp(nats)`.
    pub fn scale_ln(&self, nats: &Float) -> LogForm {
        if self.is_zero() {
            return self.clone();
        }
        let prec = self.prec().max(nats.prec());
        Self::new(Float::with_val(prec, &self.log_mag + nats), self.phase.clone())
    }

    /// `|self / other - 1|`, evaluated without forming either value.
    ///
    /// Returns `+inf` when `other` is zero and `self` is not, and `0` when both are zero.
    pub fn rel_diff(&self, other: &LogForm) -> Float {
        let prec = self.prec().max(other.prec());
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Float::with_val(prec, 0),
            (_, true) => return Float::with_val(prec, Special::Infinity),
            (true, false) => return Float::with_val(prec, 1),
            _ => {}
        }
        let dl = Float::with_val(prec, &self.log_mag - &other.log_mag);
        let dp = wrap_phase(Float::with_val(prec, &self.phase - &other.phase));
        // e^{dl} e^{i dp} - 1 = (expm1(dl) - 2 e^{dl} sin^2(dp/2)) + i e^{dl} sin(dp)
        let e = Float::with_val(prec, dl.exp_ref());
        let half_sin = Float::with_val(prec, &dp / 2u32).sin();
        let re = Float::with_val(prec, dl.exp_m1_ref()) - Float::with_val(prec, &e * half_sin.square()) * 2u32;
        let im = e * dp.sin();
        Float::with_val(prec, re.hypot(&im))
    }

    /// `|self / other - 1|` as a double; useful for reporting.
    pub fn rel_diff_f64(&self, other: &LogForm) -> f64 {
        self.rel_diff(other).to_f64()
    }

    /// `ln |self / other - 1|`, usable even when the difference underflows a double.
    pub fn ln_rel_diff(&self, other: &LogForm) -> f64 {
        let d = self.rel_diff(other);
        super::scalar::approx_ln_abs_real(&d)
    }
}

/// `sum_i c_i * x_i` for real coefficients and log-domain values.
///
/// Terms are rescaled by the largest magnitude before summation. Terms more than the
/// working precision below the largest are dropped; if the remaining sum vanishes to
/// within rounding the result is [`NumericError::TotalCancellation`].
pub fn logform_linear_combination(terms: &[(f64, LogForm)], prec: u32) -> Result<LogForm, NumericError> {
    if terms.is_empty() {
        return Err(NumericError::EmptyCombination);
    }
    let wp = prec + 32;
    let live: Vec<(f64, &LogForm)> = terms
        .iter()
        .filter(|(c, x)| *c != 0.0 && !x.is_zero())
        .map(|(c, x)| (*c, x))
        .collect();
    if live.is_empty() {
        return Ok(LogForm::zero(prec));
    }
    let scaled_log = |c: f64, x: &LogForm| Float::with_val(wp, x.log_mag()) + c.abs().ln();
    let mut m = scaled_log(live[0].0, live[0].1);
    for (c, x) in &live[1..] {
        let l = scaled_log(*c, x);
        if l > m {
            m = l;
        }
    }
    let cutoff = -(f64::from(wp) * std::f64::consts::LN_2 + 64.0);
    let mut sum = Complex::new(wp);
    let mut abs_total = Float::new(wp);
    for (c, x) in live {
        let rel = Float::with_val(wp, x.log_mag() - &m) + c.abs().ln();
        if rel.to_f64() < cutoff {
            continue;
        }
        let shifted = LogForm::new(Float::with_val(wp, x.log_mag() - &m), x.phase().clone());
        let mut z = shifted.to_complex(wp);
        z *= c;
        abs_total += Float::with_val(wp, rel.exp_ref());
        sum += z;
    }
    let sum_ln = approx_ln_abs(&sum);
    let floor = super::scalar::approx_ln_abs_real(&abs_total) - f64::from(prec) * std::f64::consts::LN_2;
    if sum_ln == f64::NEG_INFINITY || sum_ln <= floor {
        return Err(NumericError::TotalCancellation);
    }
    let out = LogForm::from_complex(&sum);
    Ok(LogForm::new(
        Float::with_val(prec, out.log_mag() + &m),
        Float::with_val(prec, out.phase()),
    ))
}

impl Pow<&Float> for &LogForm {
    type Output = LogForm;
    fn pow(self, p: &Float) -> LogForm {
        self.pow_real(p)
    }
}
