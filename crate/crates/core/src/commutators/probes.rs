//! Ratio probes for auxiliary inequalities whose constants are not explicit.
//!
//! Each probe evaluates both sides of an inequality on a random ensemble and
//! reports the largest left/right ratio seen. Nothing here asserts a value.

use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::ensemble_member;
use super::expansion::SampledWeight;
use crate::error::{Error, Result};
use crate::rng::sample_stream;
use crate::spectral::{
    apply_multiplier, frac_deriv, hilbert, lp_norm, x_derivative, Complex, Field, Grid, LpExponent,
    MultiplierSymbol,
};
use crate::weights::Bump;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Probe {
    /// `||d^l [H; psi] d^m f||_2 <= c ||d^{m+l} psi||_inf ||f||_2`.
    Calderon { l: u32, m: u32 },
    /// `||D^s(fg)||_p <= c (||f||_{p1} ||D^s g||_{p2} + ||g||_{p3} ||D^s f||_{p4})`.
    Leibniz { s: f64, p: f64, p1: f64, p2: f64, p3: f64, p4: f64 },
    /// `||D^s(fg) - f D^s g||_p` against `||D^{s-1} d f||_{p1} ||g||_{p2}`
    /// (plus `||d f||_{p3} ||D^{s-1} g||_{p4}` when `s > 1`).
    KatoPonce { s: f64, p: f64, p1: f64, p2: f64, p3: f64, p4: f64 },
    /// `||D^a f||_2 <= c ||f||_r^{1-theta} ||D^b f||_2^theta`.
    GagliardoNirenberg { a: f64, b: f64, r: f64 },
    /// `||g d^m D^s f||_p <= c ||g||_p ||f||_2` for separated supports.
    DisjointSupport { m: u32, s: f64, p: f64 },
}

impl Probe {
    pub fn name(&self) -> &'static str {
        match self {
            Probe::Calderon { .. } => "calderon",
            Probe::Leibniz { .. } => "leibniz",
            Probe::KatoPonce { .. } => "kato_ponce",
            Probe::GagliardoNirenberg { .. } => "gagliardo_nirenberg",
            Probe::DisjointSupport { .. } => "disjoint_support",
        }
    }
}

/// Random fields for a probe: the band is fixed in wavenumber.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub grid: Grid,
    pub size: usize,
    pub xi_max: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub probe: Probe,
    pub n_points: usize,
    pub measured_best_constant: f64,
    pub samples: Vec<f64>,
}

fn exponent(p: f64) -> Result<LpExponent> {
    match LpExponent::from_f64(p)? {
        LpExponent::One => Err(Error::UnsupportedParameter(format!(
            "p = {p}; probes support p = 2 and p = infinity"
        ))),
        e => Ok(e),
    }
}

fn holder(p: f64, q1: f64, q2: f64) -> Result<(LpExponent, LpExponent, LpExponent)> {
    let (e, e1, e2) = (exponent(p)?, exponent(q1)?, exponent(q2)?);
    if (e.reciprocal() - e1.reciprocal() - e2.reciprocal()).abs() > 1e-12 {
        return Err(Error::InvalidConfiguration(format!(
            "1/{p} != 1/{q1} + 1/{q2}"
        )));
    }
    Ok((e, e1, e2))
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// Interpolation exponent `theta` for the `L^2`-based Gagliardo–Nirenberg
/// inequality; `None` when it falls outside `[a/b, 1]`.
pub fn gn_theta(a: f64, b: f64, r: LpExponent) -> Option<f64> {
    // 1/2 - a = (1 - theta)/r + theta (1/2 - b)
    let inv_r = r.reciprocal();
    let denom = 0.5 - b - inv_r;
    let theta = (0.5 - a - inv_r) / denom;
    (theta.is_finite() && theta >= a / b - 1e-12 && theta <= 1.0 + 1e-12).then_some(theta)
}

/// Localizing cutoff `B((x - c) / r)` from a broad bump.
fn localized(grid: &Grid, center: f64, radius: f64, base: &Field) -> Result<Field> {
    let bump = Bump::new(1.0)?;
    let w: Vec<f64> = (0..grid.n_points())
        .map(|j| bump.value((grid.x(j) - center) / radius))
        .collect();
    base.mul_samples(&w)
}

fn calderon_weight(grid: &Grid, order: usize) -> Result<SampledWeight> {
    // A smooth step of width comparable to the box scale; stays resolved on
    // every grid the probes use.
    let l = grid.half_length();
    let params = crate::weights::WeightParams::new(l / 8.0, 5.0 * l / 8.0)?;
    SampledWeight::periodized_plateau(grid, params, &Bump::default(), order)
}

fn eval_probe(probe: &Probe, ens: &EnsembleSpec, i: usize) -> Result<f64> {
    let g = &ens.grid;
    let draw = |name: &str| ensemble_member(g, ens.xi_max, ens.seed, name, i);
    match *probe {
        Probe::Calderon { l, m } => {
            let psi = calderon_weight(g, (l + m) as usize)?;
            let f = draw("calderon")?;
            let dmf = x_derivative(&f, m)?;
            let comm = hilbert(&dmf.mul_samples(psi.values())?)?
                .sub(&hilbert(&dmf)?.mul_samples(psi.values())?)?;
            let lhs = lp_norm(&x_derivative(&comm, l)?, LpExponent::Two);
            let sup = psi
                .derivative((l + m) as usize)?
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            Ok(ratio(lhs, sup * lp_norm(&f, LpExponent::Two)))
        }
        Probe::Leibniz { s, p, p1, p2, p3, p4 } => {
            let (e, e1, e2) = holder(p, p1, p2)?;
            let (_, e3, e4) = holder(p, p3, p4)?;
            let f = draw("leibniz_f")?;
            let h = draw("leibniz_g")?;
            let lhs = lp_norm(&frac_deriv(&f.mul(&h)?, s)?, e);
            let rhs = lp_norm(&f, e1) * lp_norm(&frac_deriv(&h, s)?, e2)
                + lp_norm(&h, e3) * lp_norm(&frac_deriv(&f, s)?, e4);
            Ok(ratio(lhs, rhs))
        }
        Probe::KatoPonce { s, p, p1, p2, p3, p4 } => {
            let (e, e1, e2) = holder(p, p1, p2)?;
            let (_, e3, e4) = holder(p, p3, p4)?;
            let f = draw("kp_f")?;
            let h = draw("kp_g")?;
            let lhs = lp_norm(
                &frac_deriv(&f.mul(&h)?, s)?.sub(&frac_deriv(&h, s)?.mul(&f)?)?,
                e,
            );
            // D^{s-1} d_x has symbol i sgn(xi) |xi|^s.
            let ds1d = MultiplierSymbol::custom(g, true, |xi| {
                Complex::new(0.0, xi.signum() * if xi == 0.0 { 0.0 } else { xi.abs().powf(s) })
            });
            let mut rhs = lp_norm(&apply_multiplier(&f, &ds1d)?, e1) * lp_norm(&h, e2);
            if s > 1.0 {
                rhs += lp_norm(&x_derivative(&f, 1)?, e3) * lp_norm(&frac_deriv(&h, s - 1.0)?, e4);
            }
            Ok(ratio(lhs, rhs))
        }
        Probe::GagliardoNirenberg { a, b, r } => {
            let er = exponent(r)?;
            let theta = gn_theta(a, b, er).ok_or_else(|| {
                Error::InvalidConfiguration(format!(
                    "no admissible theta for a = {a}, b = {b}, r = {r}"
                ))
            })?;
            // Mean-free fields keep the homogeneous norms comparable.
            let f = draw("gn")?;
            let f = f.map(|v| v)?.sub(&Field::from_fn(g, |_| f.spectrum()[0].re / g.n_points() as f64)?)?;
            let lhs = lp_norm(&frac_deriv(&f, a)?, LpExponent::Two);
            let rhs = lp_norm(&f, er).powf(1.0 - theta)
                * lp_norm(&frac_deriv(&f, b)?, LpExponent::Two).powf(theta);
            Ok(ratio(lhs, rhs))
        }
        Probe::DisjointSupport { m, s, p } => {
            let e = exponent(p)?;
            let f = localized(g, -4.0, 1.5, &draw("disjoint_f")?)?;
            let mut rng = sample_stream(ens.seed, "disjoint_g", i);
            let gbase = super::ensemble::band_limited(g, ens.xi_max, &mut rng)?;
            let h = localized(g, 4.0, 1.5, &gbase)?;
            let dfs = MultiplierSymbol::derivative_riesz(g, m, s)?;
            let lhs = lp_norm(&apply_multiplier(&f, &dfs)?.mul(&h)?, e);
            let rhs = lp_norm(&h, e) * lp_norm(&f, LpExponent::Two);
            Ok(ratio(lhs, rhs))
        }
    }
}

/// Runs `probe` over the ensemble and reports the largest ratio.
pub fn inequality_probe(probe: &Probe, ens: &EnsembleSpec) -> Result<ProbeReport> {
    if let Probe::DisjointSupport { .. } = probe {
        if ens.grid.half_length() < 8.0 {
            return Err(Error::InvalidConfiguration(
                "disjoint-support probe needs a box with L >= 8".into(),
            ));
        }
    }
    let samples: Vec<f64> = (0..ens.size)
        .into_par_iter()
        .map(|i| eval_probe(probe, ens, i))
        .collect::<Result<_>>()?;
    let best = samples.iter().cloned().fold(0.0, f64::max);
    Ok(ProbeReport {
        probe: probe.clone(),
        n_points: ens.grid.n_points(),
        measured_best_constant: best,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn ens(n: usize, l: f64) -> EnsembleSpec {
        EnsembleSpec {
            grid: make_grid(n, l).unwrap(),
            size: 12,
            xi_max: 4.0,
            seed: 11,
        }
    }

    fn stable(probe: Probe, l: f64) -> (f64, f64) {
        let a = inequality_probe(&probe, &ens(512, l)).unwrap().measured_best_constant;
        let b = inequality_probe(&probe, &ens(1024, l)).unwrap().measured_best_constant;
        (a, b)
    }

    #[test]
    fn disjoint_support_ratio_is_finite_and_stable() {
        let (a, b) = stable(Probe::DisjointSupport { m: 2, s: 0.7, p: 2.0 }, 8.0);
        assert!(a.is_finite() && a > 0.0);
        assert!((a - b).abs() <= 0.2 * a, "{a} vs {b}");
    }

    #[test]
    fn leibniz_with_equal_factors_is_finite() {
        let probe = Probe::Leibniz { s: 0.5, p: 2.0, p1: f64::INFINITY, p2: 2.0, p3: f64::INFINITY, p4: 2.0 };
        let (a, b) = stable(probe, 10.0);
        assert!(a.is_finite() && (a - b).abs() <= 0.2 * a);
    }

    #[test]
    fn unsupported_exponents_are_rejected() {
        let probe = Probe::DisjointSupport { m: 1, s: 0.5, p: 3.0 };
        assert!(matches!(inequality_probe(&probe, &ens(64, 8.0)), Err(Error::UnsupportedParameter(_))));
        let probe = Probe::Leibniz { s: 0.5, p: 1.0, p1: 2.0, p2: 2.0, p3: 2.0, p4: 2.0 };
        assert!(matches!(inequality_probe(&probe, &ens(64, 8.0)), Err(Error::UnsupportedParameter(_))));
    }

    #[test]
    fn gn_theta_examples() {
        assert_eq!(gn_theta(1.0, 2.0, LpExponent::Two), Some(0.5));
        assert_eq!(gn_theta(1.0, 2.0, LpExponent::Infinity), None);
    }

    #[test]
    fn zero_on_both_sides_gives_zero() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
    }
}
