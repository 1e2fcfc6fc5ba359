//! Randomized invariants: theta identities, Pochhammer algebra, the q-Gamma functional
//! equation, truncated-product remainder bounds, agreement of the two evaluation routes
//! of every named family, and log-form arithmetic.

use std::f64::consts::PI;

use proptest::prelude::*;
use rug::{Complex, Float};

use qseries_core::numeric::{LogForm, PrecisionContext};
use qseries_core::qkernel::{lemma1_remainders, q_gamma, qpoch_finite, qpoch_infinite, QParam};
use qseries_core::series::{
    basic_hypergeometric, basic_hypergeometric_g, ismail_masson, ismail_masson_h, jackson_qbessel2, jackson_qbessel2_g,
    q_laguerre, q_laguerre_h, ramanujan_aq, ramanujan_aq_direct, stieltjes_wigert, stieltjes_wigert_h,
    HypergeometricSpec,
};
use qseries_core::theta::{theta_product, theta_series, theta_transformed, ThetaIndex, ThetaPoint};

const P: u32 = 256;
const REL_TOL: f64 = 1e-60;
/// Agreement required between two independently summed routes.
const TWO_ROUTE: f64 = 8.0 * REL_TOL;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(P, REL_TOL, 8192).unwrap()
}

fn c(re: f64, im: f64) -> Complex {
    Complex::with_val(P, (re, im))
}

fn abs(z: &Complex) -> Float {
    Float::with_val(P, z.abs_ref())
}

/// `|a - b| / |b|`, or `|a - b|` when `b` vanishes.
fn rel(a: &Complex, b: &Complex) -> f64 {
    let d = abs(&Complex::with_val(P, a - b));
    let m = abs(b);
    if m.is_zero() {
        d.to_f64()
    } else {
        (d / m).to_f64()
    }
}

fn index() -> impl Strategy<Value = ThetaIndex> {
    prop::sample::select(ThetaIndex::ALL.to_vec())
}

/// Values on the `2^-10` lattice, exact in every precision.
fn dyadic(lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    (lo * 1024..hi * 1024).prop_map(|k| k as f64 / 1024.0)
}

fn scale() -> impl Strategy<Value = QParam> {
    (0.5f64..6.0).prop_map(|l| QParam::from_f64(l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn theta_product_equals_series(i in index(), v in -1.0f64..1.0, t in 0.3f64..3.0) {
        let p = ThetaPoint::new(i, v, t).unwrap();
        let s = theta_series(&p, &ctx()).unwrap();
        let prod = theta_product(&p, &ctx()).unwrap();
        let d = abs(&Complex::with_val(P, &prod - &s)).to_f64();
        prop_assert!(d <= 8.0 * REL_TOL * abs(&s).to_f64() + 1e-70, "deviation {d:e}");
    }

    #[test]
    fn theta_transform_equals_series(i in index(), v in -1.0f64..1.0, vi in -0.3f64..0.3, t in 0.25f64..2.0) {
        let p = ThetaPoint::with_complex(i, c(v, vi), Float::with_val(P, t)).unwrap();
        let s = theta_series(&p, &ctx()).unwrap();
        let m = theta_transformed(&p, &ctx()).unwrap().to_complex(P);
        let d = abs(&Complex::with_val(P, &m - &s)).to_f64();
        prop_assert!(d <= 1e-50 * abs(&s).to_f64().max(1e-6), "deviation {d:e}");
    }

    #[test]
    fn theta_parity_and_period(i in index(), v in -1.0f64..1.0, t in 0.3f64..3.0) {
        let at = |x: f64| theta_series(&ThetaPoint::new(i, x, t).unwrap(), &ctx()).unwrap();
        let (plus, minus, shifted) = (at(v), at(-v), at(v + 1.0));
        let odd = i == ThetaIndex::One;
        let antiperiodic = matches!(i, ThetaIndex::One | ThetaIndex::Two);
        let want_minus = if odd { Complex::with_val(P, -&plus) } else { plus.clone() };
        let want_shift = if antiperiodic { Complex::with_val(P, -&plus) } else { plus.clone() };
        let tol = 1e-55 * abs(&plus).to_f64().max(1e-6);
        prop_assert!(abs(&Complex::with_val(P, &minus - &want_minus)).to_f64() <= tol);
        // v + 1 is rounded in double precision, so the period holds to that accuracy only
        prop_assert!(abs(&Complex::with_val(P, &shifted - &want_shift)).to_f64() <= 1e-14);
    }

    #[test]
    fn finite_products_split(re in -3.0f64..3.0, im in -3.0f64..3.0, q in scale(), n in 0usize..30, m in 0usize..30) {
        let a = c(re, im);
        let whole = qpoch_finite(&a, &q, n + m, &ctx());
        let head = qpoch_finite(&a, &q, n, &ctx());
        let shifted = Complex::with_val(P, &a * q.pow_f64(n as f64, P));
        let tail = qpoch_finite(&shifted, &q, m, &ctx());
        let joined = Complex::with_val(P, &head * &tail);
        let scale = abs(&head).to_f64() * abs(&tail).to_f64();
        prop_assert!(abs(&Complex::with_val(P, &whole - &joined)).to_f64() <= 1e-55 * scale.max(1e-300));
    }

    #[test]
    fn infinite_product_shift(re in -3.0f64..3.0, im in -3.0f64..3.0, q in scale()) {
        let a = c(re, im);
        let lhs = qpoch_infinite(&a, &q, &ctx()).unwrap();
        let aq = Complex::with_val(P, &a * q.q(P));
        let rhs = Complex::with_val(P, qpoch_infinite(&aq, &q, &ctx()).unwrap() * Complex::with_val(P, 1 - &a));
        let scale = abs(&rhs).to_f64().max(abs(&lhs).to_f64());
        prop_assert!(abs(&Complex::with_val(P, &lhs - &rhs)).to_f64() <= 1e-55 * scale.max(1e-300));
    }

    #[test]
    fn q_gamma_functional_equation(x in 0.1f64..5.0, q in scale()) {
        let g = q_gamma(&c(x, 0.0), &q, &ctx()).unwrap();
        let g1 = q_gamma(&Complex::with_val(P, c(x, 0.0) + 1u32), &q, &ctx()).unwrap();
        let bracket = q.one_minus_pow(&Float::with_val(P, x), P) / q.one_minus_q(P);
        let want = Complex::with_val(P, &g * bracket);
        prop_assert!(rel(&g1, &want) <= 1e-55);
    }

    #[test]
    fn truncated_product_remainders_respect_bound(
        r in 0.05f64..3.0,
        arg in -PI..PI,
        qv in 0.1f64..0.9,
        extra in 0usize..5,
    ) {
        let q = QParam::from_nome_f64(qv).unwrap();
        let mut n = 0usize;
        while r * qv.powi(n as i32) / (1.0 - qv) >= 0.45 {
            n += 1;
        }
        let a = c(r * arg.cos(), r * arg.sin());
        let rem = lemma1_remainders(&a, &q, n + extra, &ctx()).unwrap();
        prop_assert!(abs(&rem.r1) <= rem.bound);
        prop_assert!(abs(&rem.r2) <= rem.bound);
    }

    #[test]
    fn ramanujan_two_routes(z in -20.0f64..20.0, zi in -5.0f64..5.0, q in scale()) {
        let z = c(z, zi);
        let a = ramanujan_aq(&z, &q, &ctx()).unwrap();
        let b = ramanujan_aq_direct(&z, &q, &ctx()).unwrap();
        prop_assert!(rel(&a, &b) <= TWO_ROUTE, "deviation {:e}", rel(&a, &b));
    }

    #[test]
    fn polynomial_families_two_routes(n in 0usize..=20, x in -4.0f64..4.0, alpha in dyadic(0, 3), q in scale()) {
        let x = c(x, 0.0);
        let sw = stieltjes_wigert(n, &x, &q, &ctx()).unwrap();
        let sw_h = stieltjes_wigert_h(n, &x, &q, &ctx()).unwrap();
        prop_assert!(rel(&sw_h, &sw) <= TWO_ROUTE, "Stieltjes-Wigert {:e}", rel(&sw_h, &sw));
        let lag = q_laguerre(n, alpha, &x, &q, &ctx()).unwrap();
        let lag_h = q_laguerre_h(n, alpha, &x, &q, &ctx()).unwrap();
        prop_assert!(rel(&lag_h, &lag) <= TWO_ROUTE, "q-Laguerre {:e}", rel(&lag_h, &lag));
    }

    #[test]
    fn ismail_masson_two_routes(n in 0usize..=20, xr in -1.5f64..1.5, xi in 0.0f64..1.6, q in scale()) {
        let xi = c(xr, xi);
        let a = ismail_masson(n, &xi, &q, &ctx()).unwrap();
        let b = ismail_masson_h(n, &xi, &q, &ctx()).unwrap();
        prop_assert!(rel(&b, &a) <= TWO_ROUTE, "deviation {:e}", rel(&b, &a));
    }

    #[test]
    fn jackson_two_routes(x in 0.1f64..8.0, nu in dyadic(0, 3), q in scale()) {
        let x = c(x, 0.0);
        let a = jackson_qbessel2(&x, nu, &q, &ctx()).unwrap();
        let b = jackson_qbessel2_g(&x, nu, &q, &ctx()).unwrap();
        prop_assert!(rel(&b, &a) <= TWO_ROUTE, "deviation {:e}", rel(&b, &a));
    }

    #[test]
    fn confluent_two_routes(a in dyadic(0, 3), b1 in dyadic(0, 3), b2 in dyadic(0, 3), z in -6.0f64..6.0, q in scale()) {
        for spec in [
            HypergeometricSpec::new(vec![], vec![b1 + 0.25]).unwrap(),
            HypergeometricSpec::new(vec![a], vec![b1 + 0.25, b2 + 0.25]).unwrap(),
        ] {
            let z = c(z, 0.0);
            let d = basic_hypergeometric(&spec, &z, &q, &ctx()).unwrap();
            let g = basic_hypergeometric_g(&spec, &z, &q, &ctx()).unwrap();
            prop_assert!(rel(&g, &d) <= TWO_ROUTE, "deviation {:e}", rel(&g, &d));
        }
    }

    #[test]
    fn log_form_arithmetic(ar in -50.0f64..50.0, ai in -50.0f64..50.0, br in -50.0f64..50.0, bi in -50.0f64..50.0, p in -3.0f64..3.0) {
        let (a, b) = (c(ar, ai), c(br, bi));
        prop_assume!(abs(&a).to_f64() > 1e-3 && abs(&b).to_f64() > 1e-3);
        let (la, lb) = (LogForm::from_complex(&a), LogForm::from_complex(&b));
        prop_assert!(rel(&la.to_complex(P), &a) <= 1e-70);
        prop_assert!(rel(&la.mul(&lb).to_complex(P), &Complex::with_val(P, &a * &b)) <= 1e-70);
        prop_assert!(rel(&la.div(&lb).to_complex(P), &Complex::with_val(P, &a / &b)) <= 1e-70);
        let pf = Float::with_val(P, p);
        let powered = (Complex::with_val(P, a.ln_ref()) * &pf).exp();
        prop_assert!(rel(&la.pow_real(&pf).to_complex(P), &powered) <= 1e-70);
        let nudge = Float::with_val(P, Float::with_val(P, 1e-30) + 1u32);
        let r = la.rel_diff(&la.mul(&LogForm::from_real(&nudge)));
        prop_assert!((r.to_f64() - 1e-30).abs() < 1e-40);
    }
}
