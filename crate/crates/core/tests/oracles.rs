//! Reference values computed independently at 60 significant digits and frozen here.
//! Each evaluator is compared at 256 bits with a relative tolerance of 1e-40.

use rug::{Complex, Float};

use qseries_core::numeric::PrecisionContext;
use qseries_core::qkernel::{dedekind_eta, euler_gamma, q_gamma, qpoch_infinite, QParam};
use qseries_core::series::{
    basic_hypergeometric, g_eval, h_eval, ismail_masson, jackson_qbessel2, q_laguerre, ramanujan_aq, stieltjes_wigert,
    HypergeometricSpec, SeriesParams,
};
use qseries_core::theta::{theta_series, theta_transformed, ThetaIndex, ThetaPoint};

const P: u32 = 256;
const TOL: f64 = 1e-40;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(P, 1e-60, 8192).unwrap()
}

fn f(s: &str) -> Float {
    Float::with_val(P, Float::parse(s).unwrap())
}

fn real(x: f64) -> Complex {
    Complex::with_val(P, (x, 0.0))
}

fn lambda(x: f64) -> QParam {
    QParam::from_f64(x).unwrap()
}

fn rel(got: &Complex, re: &str, im: &str) -> f64 {
    let want = Complex::with_val(P, (f(re), f(im)));
    let d = Float::with_val(P, Complex::with_val(P, got - &want).abs_ref());
    (d / Float::with_val(P, want.abs_ref())).to_f64()
}

fn assert_close(what: &str, got: &Complex, re: &str, im: &str) {
    let e = rel(got, re, im);
    assert!(e < TOL, "{what}: relative error {e:e}, got {got}");
}

#[test]
fn ramanujan_entire_function() {
    let v = ramanujan_aq(&real(50.0), &lambda(10.0), &ctx()).unwrap();
    assert_close("A_q(50)", &v, "8549.09066295035576447563114047820569298347804", "0");
}

#[test]
fn master_series_g_and_h() {
    let q = lambda(4.0);
    let p = SeriesParams::new(vec![0.5], vec![1.5], vec![], 1.0).unwrap();
    let g = g_eval(&p, &real(3.0), &q, &ctx()).unwrap();
    assert_close("g", &g, "0.156340771356042231722941462438232987677931818", "0");
    let p = SeriesParams::new(vec![0.5], vec![1.5], vec![0.25], 1.0).unwrap();
    let h = h_eval(&p, 12, &real(3.0), &q, &ctx()).unwrap();
    assert_close("h_12", &h, "0.156403425544855271458931843920838939456473449", "0");
}

#[test]
fn orthogonal_polynomials() {
    let sw = stieltjes_wigert(30, &real(2.5), &lambda(5.0), &ctx()).unwrap();
    assert_close("S_30", &sw, "-2.2329835191588778295448217267847895574727754", "0");
    let lag = q_laguerre(25, 0.75, &real(1.5), &lambda(4.0), &ctx()).unwrap();
    assert_close("L_25", &lag, "1.03011340591374956623769569090093861295381785", "0");
    let pi = Float::with_val(P, rug::float::Constant::Pi);
    let xi = Complex::with_val(P, (Float::with_val(P, &pi * f("0.3")), Float::with_val(P, &pi / 2u32)));
    let im = ismail_masson(20, &xi, &lambda(3.0), &ctx()).unwrap();
    assert_close(
        "h_20",
        &im,
        "2.29270454201874558921545547636582646677372899e46",
        "-2.35711721350448285767736442348204945931621926e-15",
    );
}

#[test]
fn confluent_and_bessel() {
    // Exponents enter as binary doubles; the reference uses the same doubles.
    let spec = HypergeometricSpec::new(vec![0.7], vec![0.9, 1.3]).unwrap();
    let v = basic_hypergeometric(&spec, &real(2.0), &lambda(3.0), &ctx()).unwrap();
    assert_close("1phi2", &v, "-1.51235800923289168954037743565642752268680915", "0");
    let j = jackson_qbessel2(&real(3.0), 0.5, &lambda(6.0), &ctx()).unwrap();
    assert_close("J_1/2", &j, "-1.55803806837986419590799654538973555461469751", "0");
}

#[test]
fn theta_at_complex_argument() {
    let want = [
        (
            "1.10938322944630322310913976854981787695576925",
            "0.498285187234963752764880835425166389908660234",
        ),
        (
            "0.771287149756837007055894707356504487972304472",
            "-0.64013881131964628377732846789873433083358051",
        ),
        (
            "0.868313792629209010773818586799643092700104868",
            "-0.339480514564291821680509229035450510796946825",
        ),
        (
            "1.12864479566550706004321544652196178596976714",
            "0.341661420803837032616249751066788213771188038",
        ),
    ];
    for (index, (re, im)) in ThetaIndex::ALL.into_iter().zip(want) {
        let p = ThetaPoint::with_complex(index, Complex::with_val(P, (f("0.3"), f("0.2"))), f("0.7")).unwrap();
        assert_close("series", &theta_series(&p, &ctx()).unwrap(), re, im);
        let t = theta_transformed(&p, &ctx()).unwrap().to_complex(P);
        assert_close("transformed", &t, re, im);
    }
}

#[test]
fn kernel_near_one() {
    let ctx = ctx();
    let p = qpoch_infinite(&real(0.5), &lambda(200.0), &ctx).unwrap();
    assert_close(
        "(1/2;q)_inf",
        &p,
        "5.63772651372376995065059361522232606966779909e-17",
        "0",
    );
    let g = q_gamma(&real(2.5), &lambda(50.0), &ctx).unwrap();
    assert_close("Gamma_q(5/2)", &g, "1.3139874536626482035928131932898018235512376", "0");
    let eta = Complex::with_val(P, dedekind_eta(&f("0.01"), &ctx).unwrap());
    assert_close(
        "eta(0.01 i)",
        &eta,
        "4.26773113545522468645232693768087196926627163e-11",
        "0",
    );
}

#[test]
fn euler_gamma_reference_values() {
    for (x, want) in [
        ("0.1", "9.51350769866873183629248717726540219255057863"),
        ("7.3", "1271.42363366390927305799362667845833785419538"),
        ("33.5", "1505856975626701892512141584193013758.71095145"),
    ] {
        let g = Complex::with_val(P, euler_gamma(&f(x), P).unwrap());
        assert_close(x, &g, want, "0");
    }
}

/// `ln` of the partial Weierstrass product
/// `z prod_{k<=n} (1 + z/k) (1 + 1/k)^{-z}`, which tends to `ln(1/Gamma(z))`.
fn ln_partial_product(z: &Float, n: u32) -> Float {
    let mut s = Float::with_val(P, z.ln_ref());
    for k in 1..=n {
        let kf = Float::with_val(P, k);
        s += Float::with_val(P, z / &kf).ln_1p();
        s -= Float::with_val(P, z * Float::with_val(P, kf.recip_ref()).ln_1p());
    }
    s
}

/// Repeated Richardson extrapolation in `1/n` over `n, 2n, 4n, ...`.
fn richardson(mut t: Vec<Float>) -> Float {
    let mut factor = 2u32;
    while t.len() > 1 {
        t = t
            .windows(2)
            .map(|w| (Float::with_val(P, &w[1] * factor) - &w[0]) / (factor - 1))
            .collect();
        factor *= 2;
    }
    t.pop().unwrap()
}

#[test]
fn euler_gamma_matches_the_weierstrass_product() {
    for x in ["0.5", "1.75", "3.2"] {
        let z = f(x);
        let levels: Vec<Float> = (0..7).map(|j| ln_partial_product(&z, 500 << j)).collect();
        let ln_gamma = -richardson(levels);
        let g = euler_gamma(&z, P).unwrap();
        let e = (Float::with_val(P, g.ln_ref()) - ln_gamma).abs().to_f64();
        assert!(e < 1e-18, "Gamma({x}): ln deviation {e:e}");
    }
    let half = euler_gamma(&f("0.5"), P).unwrap();
    let sqrt_pi = Float::with_val(P, rug::float::Constant::Pi).sqrt();
    assert!((half - sqrt_pi).abs().to_f64() < 1e-70);
}
