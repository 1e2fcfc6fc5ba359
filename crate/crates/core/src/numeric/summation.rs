use std::f64::consts::LN_2;

use rug::Complex;

use super::scalar::approx_ln_abs;
use super::{NumericError, PrecisionContext};

/// One term of a series, optionally with a rigorous bound on what is left.
#[derive(Debug, Clone)]
pub struct SeriesTerm {
    pub value: Complex,
    /// Natural log of an upper bound on the sum of absolute values of every term
    /// after this one. `None` means no bound is known yet and summation continues.
    pub tail_ln: Option<f64>,
}

impl SeriesTerm {
    pub fn new(value: Complex, tail_ln: Option<f64>) -> Self {
        Self { value, tail_ln }
    }
}

/// Outcome of an adaptive summation.
#[derive(Debug, Clone)]
pub struct Summation {
    pub value: Complex,
    /// Precision of the evaluation that was returned.
    pub bits_used: u32,
    /// True if more than one doubling was needed to obtain agreement.
    pub escalated: bool,
    /// Terms consumed by the returned evaluation.
    pub terms: usize,
    /// `ln` of the largest term magnitude encountered.
    pub peak_ln: f64,
}

impl Summation {
    /// `ln` of the ratio between the largest term and the result: the bits lost to
    /// cancellation, in nats.
    pub fn cancellation_ln(&self) -> f64 {
        self.peak_ln - approx_ln_abs(&self.value)
    }
}

struct Pass {
    value: Complex,
    terms: usize,
    peak_ln: f64,
}

fn single_pass<F, I>(
    terms: &F,
    peak_hint: usize,
    abs_floor_ln: Option<f64>,
    prec: u32,
    ctx: &PrecisionContext,
) -> Result<Pass, NumericError>
where
    F: Fn(u32) -> I,
    I: IntoIterator<Item = SeriesTerm>,
{
    let ln_tol = ctx.ln_rel_tol() - 16f64.ln();
    let ln_eps = -f64::from(prec) * LN_2;
    let mut sum = Complex::new(prec);
    let mut peak_ln = f64::NEG_INFINITY;
    let mut k = 0usize;
    for term in terms(prec) {
        sum += &term.value;
        peak_ln = peak_ln.max(approx_ln_abs(&term.value));
        k += 1;
        if k >= peak_hint {
            if let Some(tail) = term.tail_ln {
                let floor = abs_floor_ln.map_or(f64::NEG_INFINITY, |f| f + ln_tol);
                let target = (approx_ln_abs(&sum) + ln_tol).max(peak_ln + ln_eps).max(floor);
                if tail <= target || tail == f64::NEG_INFINITY {
                    break;
                }
            }
        }
        if k >= ctx.max_terms() {
            return Err(NumericError::NonDecayingTail { terms: k });
        }
    }
    Ok(Pass {
        value: sum,
        terms: k,
        peak_ln,
    })
}

fn agree(a: &Complex, b: &Complex, ln_tol: f64, abs_floor_ln: Option<f64>) -> bool {
    let prec = a.prec().0.max(b.prec().0);
    let diff = Complex::with_val(prec, a - b);
    let d = approx_ln_abs(&diff);
    if d == f64::NEG_INFINITY {
        return true;
    }
    let scale = approx_ln_abs(a).max(approx_ln_abs(b));
    if d <= scale + ln_tol {
        return true;
    }
    matches!(abs_floor_ln, Some(f) if d <= f + ln_tol)
}

/// Sums `terms(prec)` adaptively.
///
/// The source is evaluated at `ctx.bits()` and again at twice that precision. While the
/// two disagree by more than `ctx.rel_tol()` the precision keeps doubling; the
/// higher-precision value of the first agreeing pair is returned. Within one pass,
/// summation stops once at least `peak_hint` terms have been taken and the reported tail
/// bound is below the tolerance relative to the running sum.
pub fn sum_series<F, I>(terms: F, peak_hint: usize, ctx: &PrecisionContext) -> Result<Summation, NumericError>
where
    F: Fn(u32) -> I,
    I: IntoIterator<Item = SeriesTerm>,
{
    sum_series_with_floor(terms, peak_hint, None, ctx)
}

/// Like [`sum_series`], but two evaluations also agree when their difference is below
/// `rel_tol * exp(abs_floor_ln)`. Used where the exact result may be zero.
pub fn sum_series_with_floor<F, I>(
    terms: F,
    peak_hint: usize,
    abs_floor_ln: Option<f64>,
    ctx: &PrecisionContext,
) -> Result<Summation, NumericError>
where
    F: Fn(u32) -> I,
    I: IntoIterator<Item = SeriesTerm>,
{
    let ln_tol = ctx.ln_rel_tol();
    let mut bits = ctx.bits();
    let mut prev = single_pass(&terms, peak_hint, abs_floor_ln, bits, ctx)?;
    let mut doublings = 0u32;
    loop {
        let next_bits = bits.saturating_mul(2).min(ctx.max_bits());
        if next_bits <= bits {
            return Err(NumericError::PrecisionExhausted {
                needed: bits.saturating_mul(2),
                max: ctx.max_bits(),
            });
        }
        let next = single_pass(&terms, peak_hint, abs_floor_ln, next_bits, ctx)?;
        doublings += 1;
        if agree(&prev.value, &next.value, ln_tol, abs_floor_ln) {
            return Ok(Summation {
                value: next.value,
                bits_used: next_bits,
                escalated: doublings > 1,
                terms: next.terms,
                peak_ln: next.peak_ln,
            });
        }
        prev = next;
        bits = next_bits;
    }
}
