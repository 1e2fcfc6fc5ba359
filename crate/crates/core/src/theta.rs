//! Jacobi theta functions on the imaginary `tau` axis.
//!
//! With nome `q = exp(-pi t)` for `tau = i t`:
//!
//! ```text
//! theta1(v) = 2 sum_{k>=0} (-1)^k q^{(k+1/2)^2} sin((2k+1) pi v)
//! theta2(v) = 2 sum_{k>=0}        q^{(k+1/2)^2} cos((2k+1) pi v)
//! theta3(v) = 1 + 2 sum_{k>=1}       q^{k^2} cos(2k pi v)
//! theta4(v) = 1 + 2 sum_{k>=1} (-1)^k q^{k^2} cos(2k pi v)
//! ```
//!
//! Three evaluation paths are offered: the defining series, the Jacobi triple product,
//! and the modular transform `tau -> -1/tau`, which turns a nome near 1 into one near 0
//! and returns the result in log form. The argument `v` may be complex: the scaled
//! asymptotics need theta at purely imaginary `v`.

use std::f64::consts::{LN_2, PI};

use rug::float::Constant;
use rug::{Complex, Float};

use crate::numeric::{sum_series_with_floor, LogForm, PrecisionContext, SeriesTerm};
use crate::qkernel::{poch_inf_at, QParam};
use crate::{Error, Result};

const GUARD: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ThetaIndex {
    One,
    Two,
    Three,
    Four,
}

impl ThetaIndex {
    pub const ALL: [ThetaIndex; 4] = [Self::One, Self::Two, Self::Three, Self::Four];

    pub fn from_number(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            4 => Ok(Self::Four),
            _ => Err(Error::InvalidParameters(format!("theta index must be 1..=4, got {i}"))),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Self::One => 1,
            Self::Two => 2,
            Self::Three => 3,
            Self::Four => 4,
        }
    }

    /// Index of the theta function that appears on the other side of `tau -> -1/tau`.
    fn modular_partner(self) -> Self {
        match self {
            Self::One => Self::One,
            Self::Two => Self::Four,
            Self::Three => Self::Three,
            Self::Four => Self::Two,
        }
    }
}

/// Evaluation point `theta_index(v | i tau_im)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    index: ThetaIndex,
    v: Complex,
    tau_im: Float,
}

impl ThetaPoint {
    pub fn new(index: ThetaIndex, v: f64, tau_im: f64) -> Result<Self> {
        Self::with_complex(index, Complex::with_val(64, (v, 0.0)), Float::with_val(64, tau_im))
    }

    pub fn with_complex(index: ThetaIndex, v: Complex, tau_im: Float) -> Result<Self> {
        if !(tau_im.is_finite() && tau_im > 0) {
            return Err(Error::InvalidParameters(format!(
                "tau_im must be positive, got {tau_im}"
            )));
        }
        if !(v.real().is_finite() && v.imag().is_finite()) {
            return Err(Error::InvalidParameters("theta argument must be finite".into()));
        }
        Ok(Self { index, v, tau_im })
    }

    pub fn index(&self) -> ThetaIndex {
        self.index
    }

    pub fn v(&self) -> &Complex {
        &self.v
    }

    pub fn tau_im(&self) -> &Float {
        &self.tau_im
    }

    /// `q = exp(-pi tau_im)`.
    pub fn nome(&self, prec: u32) -> Float {
        let pi = Float::with_val(prec, Constant::Pi);
        (-(pi * &self.tau_im)).exp()
    }

    /// `ln` of the largest term magnitude of the defining series.
    fn peak_ln(&self) -> f64 {
        let t = self.tau_im.to_f64();
        let y = self.v.imag().to_f64().abs();
        // max_k exp(-pi t k^2 + 2 pi k y) = exp(pi y^2 / t), attained near k = y / t.
        LN_2 + PI * y * y / t
    }
}

fn half_integer_index(index: ThetaIndex) -> bool {
    matches!(index, ThetaIndex::One | ThetaIndex::Two)
}

/// Paired terms of the defining series, with a geometric tail bound after each.
fn series_terms(p: &ThetaPoint, prec: u32) -> impl Iterator<Item = SeriesTerm> {
    let index = p.index;
    let t = p.tau_im.to_f64();
    let ln_q = -PI * t;
    let y = p.v.imag().to_f64().abs();
    let q = p.nome(prec);
    let q2 = Float::with_val(prec, q.square_ref());
    let pi = Float::with_val(prec, Constant::Pi);
    let v = Complex::with_val(prec, &p.v);
    let half = half_integer_index(index);
    // Step multiplier: w = e^{i pi v} for half-integer exponents, u = e^{2 i pi v} otherwise.
    let step = if half {
        Complex::with_val(prec, &v * Complex::with_val(prec, (0, &pi))).exp()
    } else {
        Complex::with_val(
            prec,
            &v * Complex::with_val(prec, (0, Float::with_val(prec, &pi * 2u32))),
        )
        .exp()
    };
    let step_inv = Complex::with_val(prec, step.recip_ref());
    let (step2, step2_inv) = if half {
        (
            Complex::with_val(prec, step.square_ref()),
            Complex::with_val(prec, step_inv.square_ref()),
        )
    } else {
        (step.clone(), step_inv.clone())
    };
    // For half-integer exponents the power q^{(k+1/2)^2} starts at q^{1/4} with ratio q^{2k+2};
    // otherwise term 0 is the constant 1 and q^{k^2} has ratio q^{2k-1} (from k = 1).
    let mut qpow = if half {
        Float::with_val(prec, q.sqrt_ref()).sqrt()
    } else {
        Float::with_val(prec, 1)
    };
    let mut qratio = if half { q2.clone() } else { q.clone() };
    let mut pos = if half { step.clone() } else { Complex::with_val(prec, 1) };
    let mut neg = if half {
        step_inv.clone()
    } else {
        Complex::with_val(prec, 1)
    };
    let mut k: u64 = 0;
    std::iter::from_fn(move || {
        let sign_alt = k % 2 == 1;
        let value = match index {
            ThetaIndex::Three | ThetaIndex::Four if k == 0 => Complex::with_val(prec, 1),
            ThetaIndex::Three | ThetaIndex::Four => {
                let mut s = Complex::with_val(prec, &pos + &neg) * &qpow;
                if index == ThetaIndex::Four && sign_alt {
                    s = -s;
                }
                s
            }
            ThetaIndex::Two => Complex::with_val(prec, &pos + &neg) * &qpow,
            ThetaIndex::One => {
                // -i (-1)^k (w^{2k+1} - w^{-(2k+1)}) q^{(k+1/2)^2}
                let d = Complex::with_val(prec, &pos - &neg) * &qpow;
                let mut s = Complex::with_val(prec, (d.imag(), -Float::with_val(prec, d.real())));
                if sign_alt {
                    s = -s;
                }
                s
            }
        };
        // Tail after term k.
        let kf = k as f64;
        let tail = if half {
            let j = kf + 1.5;
            let m = PI * y;
            let rho = (2.0 * kf + 4.0) * ln_q + 2.0 * m;
            (rho < -1e-3).then(|| LN_2 + j * j * ln_q + (2.0 * kf + 3.0) * m - (-rho.exp()).ln_1p())
        } else {
            let j = kf + 1.0;
            let m = 2.0 * PI * y;
            let rho = (2.0 * kf + 3.0) * ln_q + m;
            (rho < -1e-3).then(|| LN_2 + j * j * ln_q + j * m - (-rho.exp()).ln_1p())
        };
        // Advance to k + 1.
        if half {
            qpow *= &qratio;
            qratio *= &q2;
            pos *= &step2;
            neg *= &step2_inv;
        } else {
            if k > 0 {
                pos *= &step;
                neg *= &step_inv;
            } else {
                pos = step.clone();
                neg = step_inv.clone();
            }
            qpow *= &qratio;
            qratio *= &q2;
        }
        k += 1;
        Some(SeriesTerm::new(value, tail))
    })
}

/// Sums the defining series, pairing `k` with `-k` (or `-k-1`).
///
/// Near zeros the result is accurate to `rel_tol * 2^-bits` times the largest term
/// rather than relative to the (vanishing) value.
pub fn theta_series(p: &ThetaPoint, ctx: &PrecisionContext) -> Result<Complex> {
    let t = p.tau_im.to_f64();
    let y = p.v.imag().to_f64().abs();
    let peak_hint = (y / t).ceil() as usize + 1;
    // Only genuine zeros should fall back to the absolute criterion, so the floor sits a
    // full working precision below the peak term.
    let floor = p.peak_ln() - f64::from(ctx.bits()) * LN_2;
    let s = sum_series_with_floor(|prec| series_terms(p, prec), peak_hint, Some(floor), ctx)?;
    Ok(Complex::with_val(ctx.bits(), s.value))
}

/// Jacobi triple product with base `q^2`.
pub fn theta_product(p: &ThetaPoint, ctx: &PrecisionContext) -> Result<Complex> {
    let prec = ctx.bits();
    let wp = prec + GUARD;
    let t = Float::with_val(wp, &p.tau_im);
    // q^2 = exp(-2 pi t) is the unit-scale base raised to 2t.
    let base2 = QParam::new(Float::with_val(wp, 1))?.powered(&Float::with_val(wp, &t * 2u32))?;
    let q = p.nome(wp);
    let q2 = base2.q(wp);
    let om2 = base2.one_minus_q(wp);
    let pi = Float::with_val(wp, Constant::Pi);
    let v = Complex::with_val(wp, &p.v);
    let u = Complex::with_val(wp, &v * Complex::with_val(wp, (0, Float::with_val(wp, &pi * 2u32)))).exp();
    let u_inv = Complex::with_val(wp, u.recip_ref());
    let qq = poch_inf_at(&Complex::with_val(wp, &q2), &q2, &om2, wp);
    let pair = |a: Complex, b: Complex| poch_inf_at(&a, &q2, &om2, wp) * poch_inf_at(&b, &q2, &om2, wp);
    let pi_v = Complex::with_val(wp, &v * &pi);
    let quarter = Float::with_val(wp, q.sqrt_ref()).sqrt();
    let out = match p.index {
        ThetaIndex::One => {
            let s = Complex::with_val(wp, pi_v.sin_ref()) * quarter * 2u32;
            s * &qq * pair(Complex::with_val(wp, &u * &q2), Complex::with_val(wp, &u_inv * &q2))
        }
        ThetaIndex::Two => {
            let c = Complex::with_val(wp, pi_v.cos_ref()) * quarter * 2u32;
            c * &qq * pair(-Complex::with_val(wp, &u * &q2), -Complex::with_val(wp, &u_inv * &q2))
        }
        ThetaIndex::Three => qq * pair(-Complex::with_val(wp, &u * &q), -Complex::with_val(wp, &u_inv * &q)),
        ThetaIndex::Four => qq * pair(Complex::with_val(wp, &u * &q), Complex::with_val(wp, &u_inv * &q)),
    };
    Ok(Complex::with_val(prec, out))
}

/// Evaluates through `tau -> -1/tau`:
///
/// `theta_j(v | i t) = c_j t^{-1/2} exp(-pi v^2 / t) theta_{j'}(-i v / t | i / t)`
///
/// with `(j, j') = (1,1), (2,4), (3,3), (4,2)`, `c_1 = i` and `c_j = 1` otherwise.
/// The Gaussian prefactor only ever enters through its logarithm.
pub fn theta_transformed(p: &ThetaPoint, ctx: &PrecisionContext) -> Result<LogForm> {
    let prec = ctx.bits();
    let wp = prec + GUARD;
    let t = Float::with_val(wp, &p.tau_im);
    let v = Complex::with_val(wp, &p.v);
    let t_inv = Float::with_val(wp, t.recip_ref());
    // -i v / t
    let v_dual = Complex::with_val(wp, (Float::with_val(wp, v.imag()), -Float::with_val(wp, v.real()))) / &t;
    let dual = ThetaPoint::with_complex(p.index.modular_partner(), v_dual, t_inv)?;
    let inner = theta_series(&dual, &ctx.with_bits(wp.min(ctx.max_bits()))?)?;
    let inner = LogForm::from_complex(&inner);
    if inner.is_zero() {
        return Ok(LogForm::zero(prec));
    }
    let pi = Float::with_val(wp, Constant::Pi);
    let gauss = Complex::with_val(wp, v.square_ref()) * pi / &t;
    let ln_t = Float::with_val(wp, t.ln_ref());
    let log_mag = -Float::with_val(wp, gauss.real()) - ln_t / 2u32;
    let mut phase = -Float::with_val(wp, gauss.imag());
    if p.index == ThetaIndex::One {
        phase += Float::with_val(wp, Constant::Pi) / 2u32;
    }
    let out = inner.mul(&LogForm::new(log_mag, phase));
    Ok(LogForm::new(
        Float::with_val(prec, out.log_mag()),
        Float::with_val(prec, out.phase()),
    ))
}

/// Dispatches to the direct series for `tau_im >= 1` and to the modular transform
/// otherwise.
pub fn theta(p: &ThetaPoint, ctx: &PrecisionContext) -> Result<LogForm> {
    if p.tau_im >= 1 {
        Ok(LogForm::from_complex(&theta_series(p, ctx)?))
    } else {
        theta_transformed(p, ctx)
    }
}

/// Theta in multiplicative notation: `theta_j(z; p)` with `z = exp(2 pi i v)` and nome
/// `p = exp(-pi / lambda)`, i.e. `tau = i / lambda`.
///
/// `v = ln z / (2 pi i)` uses the principal logarithm, so negative real `z` lands on
/// `Re v = 1/2`, which is where `theta3` and `theta4` exchange roles.
pub fn theta_nome(index: ThetaIndex, z: &Complex, nome: &QParam, ctx: &PrecisionContext) -> Result<LogForm> {
    if z.real().is_zero() && z.imag().is_zero() {
        return Err(Error::InvalidParameters("theta argument z must be non-zero".into()));
    }
    let wp = ctx.bits() + GUARD;
    let ln_z = Complex::with_val(wp, z.ln_ref());
    let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
    // ln z / (2 pi i) = -i ln z / (2 pi)
    let v = Complex::with_val(
        wp,
        (Float::with_val(wp, ln_z.imag()), -Float::with_val(wp, ln_z.real())),
    ) / two_pi;
    let tau_im = nome.tau_im(wp);
    theta(&ThetaPoint::with_complex(index, v, tau_im)?, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(P, 1e-60, 8192).unwrap()
    }

    fn exact(s: &str) -> Float {
        Float::with_val(P, Float::parse(s).unwrap())
    }

    fn rel(a: &Float, b: &Float) -> f64 {
        (Float::with_val(P, a / b) - 1u32).abs().to_f64()
    }

    #[test]
    fn theta_constants_at_i() {
        let c = ctx();
        let p3 = ThetaPoint::new(ThetaIndex::Three, 0.0, 1.0).unwrap();
        let p4 = ThetaPoint::new(ThetaIndex::Four, 0.0, 1.0).unwrap();
        let t3 = theta_series(&p3, &c).unwrap();
        let t4 = theta_series(&p4, &c).unwrap();
        assert!(rel(t3.real(), &exact("1.08643481121330801457531612151022345707020571")) < 1e-38);
        assert!(rel(t4.real(), &exact("0.913579138156116821407242593401222089701963916")) < 1e-38);
        let t4p = theta_product(&p4, &c).unwrap();
        assert!(rel(t4p.real(), t4.real()) < 4e-60);
    }

    #[test]
    fn theta3_at_small_nome() {
        // 1 + 2 sum q^{k^2} with q = 0.1
        let t = Float::with_val(P, 10).ln() / Float::with_val(P, Constant::Pi);
        let p = ThetaPoint::with_complex(ThetaIndex::Three, Complex::new(P), t).unwrap();
        let s = theta_series(&p, &ctx()).unwrap();
        assert!(rel(s.real(), &exact("1.200200002000000200000000200000000002")) < 1e-35);
    }

    #[test]
    fn theta1_vanishes_at_origin() {
        for t in [0.3, 1.0, 2.5] {
            let p = ThetaPoint::new(ThetaIndex::One, 0.0, t).unwrap();
            assert!(theta_series(&p, &ctx()).unwrap().real().is_zero());
            assert!(theta_product(&p, &ctx()).unwrap().real().is_zero());
            assert!(theta_transformed(&p, &ctx()).unwrap().is_zero());
        }
    }

    #[test]
    fn theta2_vanishes_at_half() {
        let p = ThetaPoint::new(ThetaIndex::Two, 0.5, 0.7).unwrap();
        let s = theta_product(&p, &ctx()).unwrap();
        assert!(Float::with_val(P, s.abs_ref()) < 1e-70);
        let s = theta_series(&p, &ctx()).unwrap();
        assert!(Float::with_val(P, s.abs_ref()) < 1e-70);
    }

    #[test]
    fn transformed_theta3_at_scale_forty() {
        let lam = 40.0;
        let p = ThetaPoint::new(ThetaIndex::Three, 0.0, 1.0 / lam).unwrap();
        let lf = theta_transformed(&p, &ctx()).unwrap();
        let main = 0.5 * lam.ln();
        assert!((lf.log_mag_f64() - main).abs() < 1e-15);
        let direct = LogForm::from_complex(&theta_series(&p, &ctx()).unwrap());
        assert!(lf.rel_diff_f64(&direct) < 8e-60);
    }

    #[test]
    fn transformed_theta4_against_cosine_main_term() {
        let lam: f64 = 20.0;
        let v = 0.3;
        let p = ThetaPoint::new(ThetaIndex::Four, v, 1.0 / lam).unwrap();
        // Imaginary argument i v gives the cosine regime.
        let pi_c = ThetaPoint::with_complex(
            ThetaIndex::Four,
            Complex::with_val(P, (0.0, v)),
            Float::with_val(P, 1.0 / lam),
        )
        .unwrap();
        let lf = theta_transformed(&pi_c, &ctx()).unwrap();
        let pi = std::f64::consts::PI;
        let main = 2.0 * lam.sqrt() * (pi * lam * v * v - pi * lam / 4.0).exp() * (pi * lam * v).cos();
        assert!((lf.to_f64() / main - 1.0).abs() < 1e-9);
        let direct = LogForm::from_complex(&theta_series(&pi_c, &ctx()).unwrap());
        assert!(lf.rel_diff_f64(&direct) < 8e-60);
        let direct_real = LogForm::from_complex(&theta_series(&p, &ctx()).unwrap());
        assert!(theta_transformed(&p, &ctx()).unwrap().rel_diff_f64(&direct_real) < 8e-60);
    }

    #[test]
    fn complex_argument_matches_reference() {
        // theta1 and theta3 at v = 0.3 + 0.2i, tau = 0.8 i
        let v = Complex::with_val(P, (0.3, 0.2));
        let t = Float::with_val(P, 0.8);
        let c = ctx();
        for (idx, re, im) in [
            (
                ThetaIndex::One,
                "1.03197910575574193565408965956099447167345091",
                "0.441916243371304365430247015354357954502095573",
            ),
            (
                ThetaIndex::Three,
                "0.904493900205048143646468256542586722832387755",
                "-0.248443641330541319703522334884200662939712607",
            ),
        ] {
            let p = ThetaPoint::with_complex(idx, v.clone(), t.clone()).unwrap();
            let s = theta_series(&p, &c).unwrap();
            assert!(rel(s.real(), &exact(re)) < 1e-38, "{idx:?} real part");
            assert!(rel(s.imag(), &exact(im)) < 1e-38, "{idx:?} imaginary part");
            let lf = theta_transformed(&p, &c).unwrap();
            assert!(lf.rel_diff_f64(&LogForm::from_complex(&s)) < 8e-60);
        }
    }

    #[test]
    fn nome_accessor_swaps_three_and_four_for_negative_z() {
        let c = ctx();
        let nome = QParam::from_f64(3.0).unwrap();
        let z = Complex::with_val(P, (1.7, 0.0));
        let mz = Complex::with_val(P, (-1.7, 0.0));
        let a = theta_nome(ThetaIndex::Four, &z, &nome, &c).unwrap();
        let b = theta_nome(ThetaIndex::Three, &mz, &nome, &c).unwrap();
        assert!(a.rel_diff_f64(&b) < 1e-55);
    }
}
