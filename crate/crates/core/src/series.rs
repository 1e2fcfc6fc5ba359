//! The master series `g` and `h` and the named families built from them.
//!
//! With `a_j = q^{alpha_j}`, `b_j = q^{beta_j}`, `c_j = q^{gamma_j}`:
//!
//! ```text
//! g(w) = sum_{k>=0}  (q^{k+1}, b q^k; q)_inf / (a q^k; q)_inf * q^{l k^2} (-w)^k
//! h_n(w) = sum_{k=0}^{n} [same summand] * (q, c; q)_n / (q, c; q)_{n-k}
//! ```
//!
//! `g` and `h` are summed through the incremental term ratio; every named family also
//! has an evaluator for its own defining series, computed along an independent path so
//! the two can cross-check each other.

use std::f64::consts::LN_2;

use rug::ops::Pow;
use rug::{Complex, Float};

use crate::asymptotics::chi;
use crate::numeric::{approx_ln_abs, sum_series, LogForm, PrecisionContext, SeriesTerm, Summation};
use crate::qkernel::{qpow_poch_finite_at, qpow_poch_inf_at, QParam};
use crate::theta::{theta_nome, ThetaIndex};
use crate::{Error, FormulaVariant, Result};

/// A computed value with the precision that produced it.
#[derive(Debug, Clone)]
pub struct Evaluated<T> {
    pub value: T,
    /// Precision of the accepted evaluation.
    pub bits_used: u32,
    /// True if the precision had to be raised more than once.
    pub escalated: bool,
}

impl<T> Evaluated<T> {
    fn from_sum(s: &Summation, value: T) -> Self {
        Self {
            value,
            bits_used: s.bits_used,
            escalated: s.escalated,
        }
    }

    /// Transforms the value, keeping the precision record.
    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Evaluated<U> {
        Evaluated {
            value: f(self.value),
            bits_used: self.bits_used,
            escalated: self.escalated,
        }
    }
}

/// Parameter pack `(a; b; c; l)` stored through exponents of the base.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesParams {
    alphas: Vec<f64>,
    betas: Vec<f64>,
    gammas: Vec<f64>,
    ell: f64,
}

fn check_exponents(name: &str, xs: &[f64]) -> Result<()> {
    match xs.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        Some(x) => Err(Error::InvalidParameters(format!(
            "{name} exponents must be positive, got {x}"
        ))),
        None => Ok(()),
    }
}

impl SeriesParams {
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>, gammas: Vec<f64>, ell: f64) -> Result<Self> {
        check_exponents("alpha", &alphas)?;
        check_exponents("beta", &betas)?;
        check_exponents("gamma", &gammas)?;
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::InvalidParameters(format!("ell must be positive, got {ell}")));
        }
        Ok(Self {
            alphas,
            betas,
            gammas,
            ell,
        })
    }

    /// No `a`, `b` or `c` parameters.
    pub fn plain(ell: f64) -> Result<Self> {
        Self::new(vec![], vec![], vec![], ell)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }
}

/// Confluent basic hypergeometric parameters `r phi s` with `l = (s + 1 - r) / 2 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypergeometricSpec {
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl HypergeometricSpec {
    pub fn new(alphas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        check_exponents("alpha", &alphas)?;
        check_exponents("beta", &betas)?;
        let spec = Self { alphas, betas };
        if spec.ell() <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "series with r = {}, s = {} is not confluent",
                spec.r(),
                spec.s()
            )));
        }
        Ok(spec)
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn r(&self) -> usize {
        self.alphas.len()
    }

    pub fn s(&self) -> usize {
        self.betas.len()
    }

    /// `l = (s + 1 - r) / 2`.
    pub fn ell(&self) -> f64 {
        (self.s() as f64 + 1.0 - self.r() as f64) / 2.0
    }

    /// `rho = sum alpha - sum beta + l - 1`.
    pub fn rho(&self) -> f64 {
        self.alphas.iter().sum::<f64>() - self.betas.iter().sum::<f64>() + self.ell() - 1.0
    }

    /// The matching `g` parameters.
    pub fn series_params(&self) -> SeriesParams {
        SeriesParams {
            alphas: self.alphas.clone(),
            betas: self.betas.clone(),
            gammas: vec![],
            ell: self.ell(),
        }
    }
}

/// `ln(1 - q^x)` in double precision.
fn ln_one_minus_qpow(x: f64, ln_q: f64) -> f64 {
    (-(x * ln_q).exp_m1()).ln()
}

/// `ln` of an upper bound on `|T_{j+1} / T_j|` for summands of the `g` shape, valid for
/// every index `>= j` because the bound decreases in `j`.
fn ratio_bound_ln(ln_w: f64, ell: f64, ln_q: f64, betas: &[f64], j: f64) -> f64 {
    ln_w + ell * (2.0 * j + 1.0) * ln_q
        - ln_one_minus_qpow(j + 1.0, ln_q)
        - betas.iter().map(|b| ln_one_minus_qpow(b + j, ln_q)).sum::<f64>()
}

/// Natural log of the bound on the tail after a term of magnitude `exp(term_ln)` at
/// index `k`, or `None` while the ratio bound is not yet below 1.
fn tail_after(term_ln: f64, ln_w: f64, ell: f64, ln_q: f64, betas: &[f64], k: usize) -> Option<f64> {
    let r_k = ratio_bound_ln(ln_w, ell, ln_q, betas, k as f64);
    let r_next = ratio_bound_ln(ln_w, ell, ln_q, betas, k as f64 + 1.0);
    if r_next >= -1e-3 || r_k >= 0.0 && term_ln == f64::NEG_INFINITY {
        return None;
    }
    Some(term_ln + r_k.min(0.0) - (-r_next.exp()).ln_1p() + LN_2)
}

fn peak_index(ln_w: f64, ell: f64, ln_q: f64) -> usize {
    if ln_w > 0.0 {
        (ln_w / (2.0 * ell * -ln_q)).round() as usize
    } else {
        0
    }
}

/// `(q;q)_inf prod (q^beta;q)_inf / prod (q^alpha;q)_inf`: the `k = 0` summand of `g`.
fn g_leading(p: &SeriesParams, q: &QParam, prec: u32) -> Float {
    let one = Float::with_val(prec, 1);
    let mut t = qpow_poch_inf_at(&one, q, prec);
    for b in &p.betas {
        t *= qpow_poch_inf_at(&Float::with_val(prec, *b), q, prec);
    }
    for a in &p.alphas {
        t /= qpow_poch_inf_at(&Float::with_val(prec, *a), q, prec);
    }
    t
}

/// Summands of `g` (or of `h_n` when `finite` is set) via the incremental ratio
///
/// `T_{k+1}/T_k = -w q^{l(2k+1)} prod(1 - a q^k) / ((1 - q^{k+1}) prod(1 - b q^k))`,
///
/// times `(1 - q^{n-k}) prod (1 - c q^{n-k-1})` for `h_n`.
fn ratio_terms<'a>(
    p: &'a SeriesParams,
    w: &Complex,
    q: &QParam,
    finite: Option<usize>,
    prec: u32,
) -> impl Iterator<Item = SeriesTerm> + 'a {
    let ln_q = q.ln_q(prec);
    let ln_q_f = ln_q.to_f64();
    let ln_w = approx_ln_abs(w);
    let neg_w = Complex::with_val(prec, -w);
    let ell = Float::with_val(prec, p.ell);
    let q_ell = Float::with_val(prec, &ln_q * &ell).exp();
    let q_2ell = Float::with_val(prec, q_ell.square_ref());
    let mut q_odd = q_ell; // q^{l(2k+1)}
    let mut term = Complex::with_val(prec, g_leading(p, q, prec));
    let one_minus = move |x: Float| -> Float { -Float::with_val(prec, x * &ln_q).exp_m1() };
    let mut k = 0usize;
    std::iter::from_fn(move || {
        if let Some(n) = finite {
            if k > n {
                return None;
            }
        }
        let current = term.clone();
        let tail = if finite.is_some() {
            None
        } else {
            tail_after(approx_ln_abs(&current), ln_w, p.ell, ln_q_f, &p.betas, k)
        };
        // Advance to k + 1.
        let kf = Float::with_val(prec, k as u64);
        let mut num = Float::with_val(prec, 1);
        for a in &p.alphas {
            num *= one_minus(Float::with_val(prec, &kf + *a));
        }
        let mut den = one_minus(Float::with_val(prec, &kf + 1u32));
        for b in &p.betas {
            den *= one_minus(Float::with_val(prec, &kf + *b));
        }
        if let Some(n) = finite {
            if k < n {
                let nk = Float::with_val(prec, (n - k) as u64);
                num *= one_minus(nk.clone());
                for c in &p.gammas {
                    num *= one_minus(Float::with_val(prec, &nk - 1u32) + *c);
                }
            }
        }
        term *= &neg_w;
        term *= &q_odd;
        term *= Float::with_val(prec, num / den);
        q_odd *= &q_2ell;
        k += 1;
        Some(SeriesTerm::new(current, tail))
    })
}

/// The master series `g(a; b; q; l; w)`.
pub fn g_eval(p: &SeriesParams, w: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(g_eval_detailed(p, w, q, ctx)?.value)
}

/// [`g_eval`] with the precision record.
pub fn g_eval_detailed(
    p: &SeriesParams,
    w: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    let ln_q = q.ln_q(64).to_f64();
    let hint = peak_index(approx_ln_abs(w), p.ell, ln_q);
    let s = sum_series(|prec| ratio_terms(p, w, q, None, prec), hint, ctx)?;
    Ok(Evaluated::from_sum(&s, Complex::with_val(ctx.bits(), &s.value)))
}

/// The `k`-th summand of `g`, computed from scratch (for checking the incremental path).
pub fn g_term(p: &SeriesParams, w: &Complex, q: &QParam, k: usize, prec: u32) -> Complex {
    let kf = k as f64;
    let mut t = qpow_poch_inf_at(&Float::with_val(prec, kf + 1.0), q, prec);
    for b in &p.betas {
        t *= qpow_poch_inf_at(&(Float::with_val(prec, *b) + kf), q, prec);
    }
    for a in &p.alphas {
        t /= qpow_poch_inf_at(&(Float::with_val(prec, *a) + kf), q, prec);
    }
    t *= q.pow(&(Float::with_val(prec, p.ell) * kf * kf), prec);
    let neg_w = Complex::with_val(prec, -w);
    let power = if k == 0 {
        Complex::with_val(prec, 1)
    } else {
        Complex::with_val(prec, (&neg_w).pow(k as u32))
    };
    power * t
}

/// The finite series `h_n(a; b; c; q; l; w)`.
pub fn h_eval(p: &SeriesParams, n: usize, w: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(h_eval_detailed(p, n, w, q, ctx)?.value)
}

/// [`h_eval`] with the precision record.
pub fn h_eval_detailed(
    p: &SeriesParams,
    n: usize,
    w: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    let s = sum_series(|prec| ratio_terms(p, w, q, Some(n), prec), 0, ctx)?;
    Ok(Evaluated::from_sum(&s, Complex::with_val(ctx.bits(), &s.value)))
}

/// `sum_k (a;q)_k / ((q;q)_k (b;q)_k) q^{l k^2} (-w)^k` built term by term from
/// running Pochhammer products and freshly computed powers of `q`.
fn direct_confluent_terms<'a>(
    alphas: &'a [f64],
    betas: &'a [f64],
    ell: f64,
    w: &Complex,
    q: &QParam,
    prec: u32,
) -> impl Iterator<Item = SeriesTerm> + 'a {
    let ln_q = q.ln_q(prec);
    let ln_q_f = ln_q.to_f64();
    let ln_w = approx_ln_abs(w);
    let neg_w = Complex::with_val(prec, -w);
    let mut w_pow = Complex::with_val(prec, 1);
    let mut poch = Float::with_val(prec, 1);
    let mut k = 0usize;
    std::iter::from_fn(move || {
        let kf = k as f64;
        let q_sq = Float::with_val(prec, &ln_q * (ell * kf * kf)).exp();
        let value = Complex::with_val(prec, &w_pow * &poch) * q_sq;
        let tail = tail_after(approx_ln_abs(&value), ln_w, ell, ln_q_f, betas, k);
        let qk = Float::with_val(prec, &ln_q * kf).exp();
        for a in alphas {
            let qa = Float::with_val(prec, &ln_q * *a).exp();
            poch *= 1 - Float::with_val(prec, qa * &qk);
        }
        for b in betas {
            let qb = Float::with_val(prec, &ln_q * *b).exp();
            poch /= 1 - Float::with_val(prec, qb * &qk);
        }
        poch /= 1 - Float::with_val(prec, &qk * Float::with_val(prec, ln_q.exp_ref()));
        w_pow *= &neg_w;
        k += 1;
        Some(SeriesTerm::new(value, tail))
    })
}

fn sum_direct_confluent(
    alphas: &[f64],
    betas: &[f64],
    ell: f64,
    w: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    let hint = peak_index(approx_ln_abs(w), ell, q.ln_q(64).to_f64());
    let s = sum_series(|prec| direct_confluent_terms(alphas, betas, ell, w, q, prec), hint, ctx)?;
    Ok(Evaluated::from_sum(&s, s.value.clone()))
}

fn qq_inf(q: &QParam, prec: u32) -> Float {
    qpow_poch_inf_at(&Float::with_val(prec, 1), q, prec)
}

fn round(z: Complex, ctx: &PrecisionContext) -> Complex {
    Complex::with_val(ctx.bits(), z)
}

/// Ramanujan's entire function `A_q(z) = g(-; -; q; 1; z) / (q;q)_inf`.
pub fn ramanujan_aq(z: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(ramanujan_aq_detailed(z, q, ctx)?.value)
}

/// [`ramanujan_aq`] with the precision record.
pub fn ramanujan_aq_detailed(z: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Evaluated<Complex>> {
    let wp = ctx.bits() + 32;
    let g = g_eval_detailed(&SeriesParams::plain(1.0)?, z, q, &ctx.with_bits(wp)?)?;
    Ok(g.map(|g| round(g / qq_inf(q, wp), ctx)))
}

/// `A_q(z) = sum_k q^{k^2} (-z)^k / (q;q)_k`.
pub fn ramanujan_aq_direct(z: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(round(sum_direct_confluent(&[], &[], 1.0, z, q, ctx)?.value, ctx))
}

fn check_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("nu must exceed -1, got {nu}")))
    }
}

/// Jackson's second q-Bessel function from its defining series,
///
/// `J_nu(x) = (q^{nu+1};q)_inf / (q;q)_inf * sum_k (-1)^k q^{k(k+nu)} (x/2)^{2k+nu} / (q, q^{nu+1}; q)_k`,
///
/// with the principal branch of `(x/2)^nu`.
pub fn jackson_qbessel2(x: &Complex, nu: f64, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    check_nu(nu)?;
    let wp = ctx.bits() + 32;
    let half = Complex::with_val(wp, x / 2u32);
    let s = Complex::with_val(wp, half.square_ref());
    // q^{k(k+nu)} (x/2)^{2k} = q^{k^2} (s q^nu)^k
    let w = s * q.pow_f64(nu, wp);
    let beta = [nu + 1.0];
    let sum = sum_direct_confluent(&[], &beta, 1.0, &w, q, &ctx.with_bits(wp)?)?.value;
    let pre = qpow_poch_inf_at(&Float::with_val(wp, nu + 1.0), q, wp) / qq_inf(q, wp);
    let power = Complex::with_val(wp, (&half).pow(&Float::with_val(wp, nu)));
    Ok(round(sum * pre * power, ctx))
}

/// Jackson's function through the `g` route,
/// `J_nu(x) = g(-; q^{nu+1}; q; 1; x^2 q^nu / 4) / ((q;q)_inf^2 (2/x)^nu)`.
pub fn jackson_qbessel2_g(x: &Complex, nu: f64, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    check_nu(nu)?;
    let wp = ctx.bits() + 32;
    let half = Complex::with_val(wp, x / 2u32);
    let power = Complex::with_val(wp, (&half).pow(&Float::with_val(wp, nu)));
    let s = Complex::with_val(wp, half.square_ref());
    let lf = jackson_qbessel2_scaled(&s, &LogForm::from_complex(&power), nu, q, &ctx.with_bits(wp)?)?;
    Ok(round(lf.to_complex(wp), ctx))
}

/// Jackson's function in log form from `s = (x/2)^2` and a separately supplied
/// `(x/2)^nu`, so that the branch of the fractional power is chosen by the caller.
pub fn jackson_qbessel2_scaled(
    s: &Complex,
    half_pow_nu: &LogForm,
    nu: f64,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<LogForm> {
    Ok(jackson_qbessel2_scaled_detailed(s, half_pow_nu, nu, q, ctx)?.value)
}

/// [`jackson_qbessel2_scaled`] with the precision record.
pub fn jackson_qbessel2_scaled_detailed(
    s: &Complex,
    half_pow_nu: &LogForm,
    nu: f64,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<LogForm>> {
    check_nu(nu)?;
    let wp = ctx.bits() + 32;
    let w = Complex::with_val(wp, s * q.pow_f64(nu, wp));
    let p = SeriesParams::new(vec![], vec![nu + 1.0], vec![], 1.0)?;
    let g = g_eval_detailed(&p, &w, q, &ctx.with_bits(wp)?)?;
    let qq = qq_inf(q, wp);
    Ok(g.map(|g| {
        LogForm::from_complex(&g)
            .div(&LogForm::from_real(&Float::with_val(wp, qq.square_ref())))
            .mul(half_pow_nu)
    }))
}

/// `(q^start;q)_j` for `j = 0..=n`.
fn poch_table(start: &Float, q: &QParam, n: usize, prec: u32) -> Vec<Float> {
    let ln_q = q.ln_q(prec);
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Float::with_val(prec, 1);
    out.push(acc.clone());
    for j in 0..n {
        let e = Float::with_val(prec, start + j);
        acc *= -Float::with_val(prec, &ln_q * e).exp_m1();
        out.push(acc.clone());
    }
    out
}

/// Ismail-Masson polynomial
/// `h_n(sinh xi | q) = sum_k (q;q)_n q^{k(k-n)} (-1)^k e^{(n-2k) xi} / ((q;q)_k (q;q)_{n-k})`.
///
/// `xi` may be complex; the scaled asymptotics evaluate at `xi = pi (v + i/2)`.
pub fn ismail_masson(n: usize, xi: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(ismail_masson_detailed(n, xi, q, ctx)?.value)
}

/// [`ismail_masson`] with the precision record.
pub fn ismail_masson_detailed(
    n: usize,
    xi: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    let s = sum_series(
        |prec| {
            let table = poch_table(&Float::with_val(prec, 1), q, n, prec);
            let ln_q = q.ln_q(prec);
            let xi = Complex::with_val(prec, xi);
            (0..=n).map(move |k| {
                let e = (k as f64) * (k as f64 - n as f64);
                let mut t = Complex::with_val(prec, &xi * (n as f64 - 2.0 * k as f64)).exp();
                t *= Float::with_val(prec, &ln_q * e).exp();
                t *= &table[n];
                t /= &table[k];
                t /= &table[n - k];
                if k % 2 == 1 {
                    t = -t;
                }
                SeriesTerm::new(t, None)
            })
        },
        0,
        ctx,
    )?;
    Ok(Evaluated::from_sum(&s, round(s.value.clone(), ctx)))
}

/// Ismail-Masson through `h`: `h(-;-;-;q;1; e^{-2 xi} q^{-n}) / (e^{-n xi} (q;q)_inf)`.
pub fn ismail_masson_h(n: usize, xi: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    let wp = ctx.bits() + 32;
    let xi = Complex::with_val(wp, xi);
    let w = Complex::with_val(wp, &xi * -2i32).exp() * q.pow_f64(-(n as f64), wp);
    let h = h_eval(&SeriesParams::plain(1.0)?, n, &w, q, &ctx.with_bits(wp)?)?;
    let denom = Complex::with_val(wp, &xi * -(n as f64)).exp() * qq_inf(q, wp);
    Ok(round(h / denom, ctx))
}

/// Stieltjes-Wigert polynomial `S_n(x;q) = sum_k q^{k^2} (-x)^k / ((q;q)_k (q;q)_{n-k})`.
pub fn stieltjes_wigert(n: usize, x: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(stieltjes_wigert_detailed(n, x, q, ctx)?.value)
}

/// [`stieltjes_wigert`] with the precision record.
pub fn stieltjes_wigert_detailed(
    n: usize,
    x: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    q_laguerre_like(n, None, x, q, ctx)
}

/// Stieltjes-Wigert through `h`: `h(-;-;-;q;1;x) / ((q;q)_n (q;q)_inf)`.
pub fn stieltjes_wigert_h(n: usize, x: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    let wp = ctx.bits() + 32;
    let h = h_eval(&SeriesParams::plain(1.0)?, n, x, q, &ctx.with_bits(wp)?)?;
    let qn = qpow_poch_finite_at(&Float::with_val(wp, 1), q, n, wp);
    Ok(round(h / (qn * qq_inf(q, wp)), ctx))
}

fn q_laguerre_like(
    n: usize,
    alpha: Option<f64>,
    x: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    let s = sum_series(
        |prec| {
            let table = poch_table(&Float::with_val(prec, 1), q, n, prec);
            let lag = alpha.map(|a| poch_table(&(Float::with_val(prec, a) + 1u32), q, n, prec));
            let ln_q = q.ln_q(prec);
            let neg_x = Complex::with_val(prec, -x);
            let mut x_pow = Complex::with_val(prec, 1);
            (0..=n).map(move |k| {
                let kf = k as f64;
                let mut e = Float::with_val(prec, kf * kf);
                if let Some(a) = alpha {
                    e += Float::with_val(prec, a) * kf;
                }
                let mut t = Complex::with_val(prec, &x_pow * Float::with_val(prec, &ln_q * e).exp());
                t /= &table[k];
                t /= &table[n - k];
                if let Some(l) = &lag {
                    t *= &l[n];
                    t /= &l[n - k];
                }
                x_pow *= &neg_x;
                SeriesTerm::new(t, None)
            })
        },
        0,
        ctx,
    )?;
    Ok(Evaluated::from_sum(&s, round(s.value.clone(), ctx)))
}

/// q-Laguerre polynomial
/// `L_n^(alpha)(x;q) = sum_k q^{k^2 + alpha k} (-x)^k (q^{alpha+1};q)_n / ((q;q)_k (q, q^{alpha+1}; q)_{n-k})`.
pub fn q_laguerre(n: usize, alpha: f64, x: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    Ok(q_laguerre_detailed(n, alpha, x, q, ctx)?.value)
}

/// [`q_laguerre`] with the precision record.
pub fn q_laguerre_detailed(
    n: usize,
    alpha: f64,
    x: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::InvalidParameters(format!("alpha must exceed -1, got {alpha}")));
    }
    q_laguerre_like(n, Some(alpha), x, q, ctx)
}

/// q-Laguerre through `h`: `h(-;-;q^{alpha+1};q;1;x q^alpha) / ((q;q)_n (q;q)_inf)`.
pub fn q_laguerre_h(n: usize, alpha: f64, x: &Complex, q: &QParam, ctx: &PrecisionContext) -> Result<Complex> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::InvalidParameters(format!("alpha must exceed -1, got {alpha}")));
    }
    let wp = ctx.bits() + 32;
    let p = SeriesParams::new(vec![], vec![], vec![alpha + 1.0], 1.0)?;
    let w = Complex::with_val(wp, x * q.pow_f64(alpha, wp));
    let h = h_eval(&p, n, &w, q, &ctx.with_bits(wp)?)?;
    let qn = qpow_poch_finite_at(&Float::with_val(wp, 1), q, n, wp);
    Ok(round(h / (qn * qq_inf(q, wp)), ctx))
}

/// Confluent `r phi s` from its defining series,
/// `sum_k (a;q)_k / (q, b; q)_k (-z q^{-l})^k q^{l k^2}`.
pub fn basic_hypergeometric(
    spec: &HypergeometricSpec,
    z: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    Ok(basic_hypergeometric_detailed(spec, z, q, ctx)?.value)
}

/// [`basic_hypergeometric`] with the precision record.
pub fn basic_hypergeometric_detailed(
    spec: &HypergeometricSpec,
    z: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Evaluated<Complex>> {
    let wp = ctx.bits() + 32;
    let w = Complex::with_val(wp, z * q.pow_f64(-spec.ell(), wp));
    let s = sum_direct_confluent(&spec.alphas, &spec.betas, spec.ell(), &w, q, &ctx.with_bits(wp)?)?;
    Ok(s.map(|v| round(v, ctx)))
}

/// `(a;q)_inf / (q, b; q)_inf` in log form: the factor converting `g(z q^{-l})` into
/// the confluent series.
pub fn confluent_prefactor(spec: &HypergeometricSpec, q: &QParam, prec: u32) -> LogForm {
    let mut num = Float::with_val(prec, 1);
    for a in &spec.alphas {
        num *= qpow_poch_inf_at(&Float::with_val(prec, *a), q, prec);
    }
    let mut den = qq_inf(q, prec);
    for b in &spec.betas {
        den *= qpow_poch_inf_at(&Float::with_val(prec, *b), q, prec);
    }
    LogForm::from_real(&Float::with_val(prec, num / den))
}

/// Confluent `r phi s` through `g`: `(a;q)_inf g(a; b; q; l; z q^{-l}) / (q, b; q)_inf`.
pub fn basic_hypergeometric_g(
    spec: &HypergeometricSpec,
    z: &Complex,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Complex> {
    let wp = ctx.bits() + 32;
    let w = Complex::with_val(wp, z * q.pow_f64(-spec.ell(), wp));
    let g = g_eval(&spec.series_params(), &w, q, &ctx.with_bits(wp)?)?;
    let pre = confluent_prefactor(spec, q, wp).to_complex(wp);
    Ok(round(g * pre, ctx))
}

/// A theta reduction of a scaled series: `series = prefactor * (theta + residual)`.
#[derive(Debug, Clone)]
pub struct Reduction {
    /// `prefactor * theta`.
    pub main: LogForm,
    /// The theta factor on its own.
    pub theta: LogForm,
    /// `series / prefactor - theta`.
    pub residual: Complex,
    /// The printed upper bound on `|residual|`.
    pub bound: Float,
}

impl Reduction {
    /// `(bound - |residual|) / bound`: non-negative exactly when the bound holds.
    pub fn margin(&self) -> f64 {
        let r = Float::with_val(self.bound.prec(), self.residual.abs_ref());
        let b = &self.bound;
        (Float::with_val(b.prec(), b - &r) / b).to_f64()
    }

    pub fn holds(&self) -> bool {
        Float::with_val(self.bound.prec(), self.residual.abs_ref()) <= self.bound
    }
}

fn nonzero(z: &Complex) -> Result<()> {
    if z.real().is_zero() && z.imag().is_zero() {
        Err(Error::InvalidParameters("z must be non-zero".into()))
    } else {
        Ok(())
    }
}

fn alpha_poch_product(p: &SeriesParams, q: &QParam, prec: u32) -> Float {
    let mut out = Float::with_val(prec, 1);
    for a in &p.alphas {
        out *= qpow_poch_inf_at(&Float::with_val(prec, *a), q, prec);
    }
    out
}

fn finish_reduction(series: Complex, prefactor: LogForm, theta: LogForm, bound: Float, prec: u32) -> Reduction {
    let wp = series.prec().0;
    let ratio = LogForm::from_complex(&series).div(&prefactor).to_complex(wp);
    let residual = Complex::with_val(prec, ratio - theta.to_complex(wp));
    Reduction {
        main: prefactor.mul(&theta),
        theta,
        residual,
        bound: Float::with_val(prec, bound),
    }
}

/// `g(q^{-4 n l} z) = z^{2n} q^{-4 n^2 l} { theta4(z^{-1}; q^l) + r }` with
///
/// `|r| <= 2^{s+r+3} theta3(|z|^{-1}; q^l) / (a;q)_inf * { q^{n+1}/(1-q) + q^{l n^2} / |z|^n }`.
pub fn lemma4_reduction(
    p: &SeriesParams,
    z: &Complex,
    n: usize,
    q: &QParam,
    ctx: &PrecisionContext,
) -> Result<Reduction> {
    nonzero(z)?;
    let prec = ctx.bits();
    let wp = prec + 64;
    let wctx = ctx.with_bits(wp.min(ctx.max_bits()))?;
    let ell = Float::with_val(wp, p.ell);
    let nf = n as f64;
    let zw = Complex::with_val(wp, z);
    let w = Complex::with_val(wp, &zw * q.pow_f64(-4.0 * nf * p.ell, wp));
    let series = g_eval(p, &w, q, &wctx)?;
    let ln_q = q.ln_q(wp);
    let zlog = LogForm::from_complex(&zw);
    let prefactor = zlog
        .pow_real(&Float::with_val(wp, 2.0 * nf))
        .scale_ln(&Float::with_val(wp, &ln_q * (-4.0 * nf * nf * p.ell)));
    let ql = q.powered(&ell)?;
    let z_inv = Complex::with_val(wp, zw.recip_ref());
    let theta = theta_nome(ThetaIndex::Four, &z_inv, &ql, &wctx)?;
    let abs_inv = Complex::with_val(wp, Float::with_val(wp, zw.abs_ref()).recip());
    let theta3 = theta_nome(ThetaIndex::Three, &abs_inv, &ql, &wctx)?.to_real(wp);
    let abs_z = Float::with_val(wp, zw.abs_ref());
    let brace = q.pow_f64(nf + 1.0, wp) / q.one_minus_q(wp)
        + q.pow_f64(p.ell * nf * nf, wp) / Float::with_val(wp, (&abs_z).pow(n as u32));
    let r = p.alphas.len() as i32;
    let s = p.betas.len() as i32;
    let bound = Float::with_val(wp, Float::i_exp(1, s + r + 3)) * theta3 / alpha_poch_product(p, q, wp) * brace;
    Ok(finish_reduction(series, prefactor, theta, bound, prec))
}

/// `h_n(z q^{-n l}) = (-z)^{floor(n/2)} q^{-l [n^2 - chi(n)]/4} { theta4(z^{-1}; q^l) + r }`
/// with, for `m = floor(n/4)`,
///
/// `|r| <= 2^{s+r+2t+5} theta3(|z|^{-1}; q^l) / (a;q)_inf * { q^{m+1}/(1-q) + |z|^m q^{l m^2} + q^{l m^2}/|z|^m }`.
///
/// The amended variant uses `theta4(q^{l chi(n)} z^{-1}; q^l)`, which is the limit that
/// odd `n` actually approach.
pub fn lemma5_reduction(
    p: &SeriesParams,
    z: &Complex,
    n: usize,
    q: &QParam,
    variant: FormulaVariant,
    ctx: &PrecisionContext,
) -> Result<Reduction> {
    nonzero(z)?;
    if n < 4 {
        return Err(Error::PreconditionViolated(format!(
            "degree must be at least 4, got {n}"
        )));
    }
    let prec = ctx.bits();
    let wp = prec + 64;
    let wctx = ctx.with_bits(wp.min(ctx.max_bits()))?;
    let ell = Float::with_val(wp, p.ell);
    let nf = n as f64;
    let c = chi(n as u64) as f64;
    let zw = Complex::with_val(wp, z);
    let w = Complex::with_val(wp, &zw * q.pow_f64(-nf * p.ell, wp));
    let series = h_eval(p, n, &w, q, &wctx)?;
    let ln_q = q.ln_q(wp);
    let neg_z = LogForm::from_complex(&Complex::with_val(wp, -&zw));
    // For real z the power is taken as an integer power, so the phase stays exact.
    let half = (n / 2) as f64;
    let prefactor = neg_z
        .pow_real(&Float::with_val(wp, half))
        .scale_ln(&Float::with_val(wp, &ln_q * (-p.ell * (nf * nf - c) / 4.0)));
    let ql = q.powered(&ell)?;
    let mut theta_arg = Complex::with_val(wp, zw.recip_ref());
    if variant == FormulaVariant::Amended && c == 1.0 {
        theta_arg *= q.pow_f64(p.ell, wp);
    }
    let theta = theta_nome(ThetaIndex::Four, &theta_arg, &ql, &wctx)?;
    let abs_inv = Complex::with_val(wp, Float::with_val(wp, zw.abs_ref()).recip());
    let theta3 = theta_nome(ThetaIndex::Three, &abs_inv, &ql, &wctx)?.to_real(wp);
    let abs_z = Float::with_val(wp, zw.abs_ref());
    let m = n / 4;
    let mf = m as f64;
    let z_m = Float::with_val(wp, (&abs_z).pow(m as u32));
    let q_m2 = q.pow_f64(p.ell * mf * mf, wp);
    let brace = q.pow_f64(mf + 1.0, wp) / q.one_minus_q(wp)
        + Float::with_val(wp, &z_m * &q_m2)
        + Float::with_val(wp, &q_m2 / &z_m);
    let r = p.alphas.len() as i32;
    let s = p.betas.len() as i32;
    let t = p.gammas.len() as i32;
    let bound = Float::with_val(wp, Float::i_exp(1, s + r + 2 * t + 5)) * theta3 / alpha_poch_product(p, q, wp) * brace;
    Ok(finish_reduction(series, prefactor, theta, bound, prec))
}
