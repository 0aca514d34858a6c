//! Independent oracles for the numerical kernels.

use std::f64::consts::PI;
use std::sync::Arc;

use fkdv_core::commutators::c_coeff;
use fkdv_core::diagnostics::{
    smoothing_integral, weighted_energy, window_family, DiagnosticRecord, DiagnosticWindow, Exponent,
    WindowWeight,
};
use fkdv_core::solver::linear_flow;
use fkdv_core::spectral::{make_grid, sobolev_norm, Field};
use fkdv_core::weights::{Bump, Member, WeightFamily};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use proptest::prelude::*;

/// Exact product formula over the rationals.
fn c_exact(a: &BigRational, j: usize) -> BigRational {
    let mut num = BigRational::one();
    for k in 0..j {
        let odd = BigRational::from_integer(BigInt::from(2 * k + 1));
        num *= a * a - &odd * &odd;
    }
    let mut fact = BigInt::one();
    for i in 2..=(2 * j + 1) {
        fact *= BigInt::from(i);
    }
    num / BigRational::from_integer(fact)
}

fn check_coefficient(a: f64, j: usize) -> std::result::Result<(), String> {
    let exact = c_exact(&BigRational::from_float(a).unwrap(), j);
    let got = c_coeff(a, j);
    if exact.is_zero() {
        return if got == 0.0 { Ok(()) } else { Err(format!("a {a} j {j}: {got} should be 0")) };
    }
    let want = exact.to_f64().unwrap();
    let rel = ((got - want) / want).abs();
    if rel <= 1e-14 {
        Ok(())
    } else {
        Err(format!("a {a} j {j}: {got} vs {want} (rel {rel:e})"))
    }
}

#[test]
fn coefficients_match_rational_evaluation_on_a_grid() {
    for i in 0..=96 {
        let a = 1.0 + i as f64 / 32.0;
        for j in 0..=6 {
            check_coefficient(a, j).unwrap();
        }
    }
    for j in 1..=6 {
        assert_eq!(c_coeff(1.0, j), 0.0);
    }
}

proptest! {
    #[test]
    fn coefficients_match_rational_evaluation(a in 1.0f64..=4.0, j in 0usize..=6) {
        prop_assert!(check_coefficient(a, j).is_ok(), "{:?}", check_coefficient(a, j));
    }
}

/// Composite Simpson on `[a, b]` with `n` (even) panels.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn sobolev_norm_of_gaussian_matches_continuous_fourier_integral() {
    // exp(-x^2/2) has unitary transform exp(-xi^2/2).
    let g = make_grid(1024, 40.0).unwrap();
    let u = Field::from_fn(&g, |x| (-0.5 * x * x).exp()).unwrap();
    let oracle = simpson(-40.0, 40.0, 80_000, |xi| (1.0 + xi * xi).powf(1.5) * (-xi * xi).exp()).sqrt();
    let got = sobolev_norm(&u, 1.5);
    assert!(((got - oracle) / oracle).abs() < 1e-6, "{got} vs {oracle}");
}

#[test]
fn unweighted_energy_of_gaussian_second_derivative_matches_closed_form() {
    // u = exp(-x^2): int (u'')^2 = int (4x^2 - 2)^2 exp(-2x^2) = 3 sqrt(pi/2).
    let g = make_grid(1024, 20.0).unwrap();
    let u = Field::from_fn(&g, |x| (-x * x).exp()).unwrap();
    let window = DiagnosticWindow::new(0.0, 0.5, 2.5, 2.5, 1.0).unwrap();
    let e = weighted_energy(&u, 2, 0.0, &WindowWeight::Unit, &window, 0.0).unwrap();
    let want = 3.0 * (PI / 2.0).sqrt();
    assert!(((e - want) / want).abs() < 1e-8, "{e} vs {want}");
}

struct StripSetup {
    window: DiagnosticWindow,
    family: Arc<WeightFamily>,
    k: f64,
    alpha: f64,
    sigma: f64,
    u0: Field,
}

fn strip_setup() -> StripSetup {
    let g = make_grid(512, 20.0).unwrap();
    let k = 8.0 * g.spectral_spacing();
    let window = DiagnosticWindow::new(0.0, 0.5, 2.5, 2.5, 1.0).unwrap();
    let family = Arc::new(window_family(&window, &Bump::default()).unwrap());
    StripSetup {
        u0: Field::from_fn(&g, |x| (k * x).cos()).unwrap(),
        window,
        family,
        k,
        alpha: 0.75,
        sigma: 1.0,
    }
}

/// Accumulates the strip integral with `samples` panels on `[0, t_final]`.
fn accumulate(s: &StripSetup, t_final: f64, samples: usize) -> DiagnosticRecord {
    let mut rec = DiagnosticRecord::new(s.window, Exponent::new(0, 0.0), s.sigma);
    for i in 0..=samples {
        let t = t_final * i as f64 / samples as f64;
        let u = linear_flow(&s.u0, s.alpha, t).unwrap();
        smoothing_integral(&mut rec, &u, t, &s.family).unwrap();
    }
    rec
}

/// `int_0^T int |k|^{2 sigma} cos^2(k (x + |k|^alpha t)) (chi^2)'(x - x0 + v t) dx dt`.
fn strip_oracle(s: &StripSetup, t_final: f64) -> f64 {
    let w = &s.window;
    let (k, om) = (s.k, s.k.powf(s.alpha));
    let amp = k.powf(2.0 * s.sigma);
    simpson(0.0, t_final, 400, |t| {
        // (chi^2)' lives on [eps/3 .. b + eps] in window coordinates.
        let lo = w.x0 - w.v * t + w.epsilon / 3.0 - 0.1;
        let hi = w.x0 - w.v * t + w.b + w.epsilon + 0.1;
        simpson(lo, hi, 4000, |x| {
            let c = (k * (x + om * t)).cos();
            amp * c * c * s.family.eval(Member::ChiSqPrime, x - w.x0 + w.v * t)
        })
    })
}

#[test]
fn strip_accumulator_matches_double_quadrature_for_linear_mode() {
    let s = strip_setup();
    let t_final = 1.0;
    let rec = accumulate(&s, t_final, 2000);
    let oracle = strip_oracle(&s, t_final);
    assert!(oracle > 0.0);
    let rel = ((rec.smoothing_accum - oracle) / oracle).abs();
    assert!(rel < 1e-6, "{} vs {oracle} (rel {rel:e})", rec.smoothing_accum);

    // The accumulator is the time integral of the strip series.
    let n = rec.strip_series.len() as f64;
    let mean: f64 = rec.strip_series.iter().map(|p| p.strip).sum::<f64>() / n;
    assert!(((rec.smoothing_accum / t_final - mean) / mean).abs() < 1e-2);
}

#[test]
fn strip_accumulator_is_stable_under_sampling_doubling() {
    let s = strip_setup();
    let coarse = accumulate(&s, 2.0, 50).smoothing_accum;
    let fine = accumulate(&s, 2.0, 100).smoothing_accum;
    assert!(((coarse - fine) / fine).abs() < 0.01, "{coarse} vs {fine}");
}
