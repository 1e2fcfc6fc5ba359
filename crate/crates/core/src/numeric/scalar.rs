use rug::float::Constant;
use rug::{Complex, Float};

/// Arbitrary-precision real scalar.
pub type HpReal = Float;
/// Arbitrary-precision complex scalar.
pub type HpComplex = Complex;

pub fn real(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn complex(prec: u32, re: f64, im: f64) -> Complex {
    Complex::with_val(prec, (re, im))
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Cheap `ln |x|` accurate to double precision, valid over the full exponent range.
pub fn approx_ln_abs_real(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if !x.is_finite() {
        return if x.is_nan() { f64::NAN } else { f64::INFINITY };
    }
    let (m, e) = x.to_f64_exp();
    m.abs().ln() + f64::from(e) * std::f64::consts::LN_2
}

/// Cheap `ln |z|` accurate to double precision, valid over the full exponent range.
pub fn approx_ln_abs(z: &Complex) -> f64 {
    let lr = approx_ln_abs_real(z.real());
    let li = approx_ln_abs_real(z.imag());
    let (hi, lo) = if lr >= li { (lr, li) } else { (li, lr) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + 0.5 * (2.0 * (lo - hi)).exp().ln_1p()
}
