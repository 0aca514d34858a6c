//! Pointwise verification of the weight-family property list.

use serde::Serialize;

use super::family::{uniform_points, Chi, Member, WeightFamily, WeightParams};
use super::profile::Bump;

const ZERO_TOL: f64 = 1e-14;
const EQ_TOL: f64 = 1e-10;
const MONO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub id: String,
    pub statement: String,
    pub tolerance: f64,
    /// Largest violation found (0 when the property holds exactly).
    pub worst_residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightReport {
    pub epsilon: f64,
    pub b: f64,
    pub points: usize,
    pub checks: Vec<PropertyCheck>,
    /// Smallest working `c_j` with `|chi^{(j)}| <= c_j chi'_{eps/3,b+eps}`, `j = 1..`.
    pub derivative_constants: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    /// `max chi'_{eps/3,b+eps}` against the two candidate upper bounds.
    pub widened_slope_max: f64,
    pub min_radicand: f64,
    pub pass: bool,
}

impl WeightReport {
    pub fn failed(&self) -> Vec<&PropertyCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn check(&self, id: &str) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

struct Checker {
    checks: Vec<PropertyCheck>,
}

impl Checker {
    fn push(&mut self, id: &str, statement: &str, tolerance: f64, worst: f64) {
        self.checks.push(PropertyCheck {
            id: id.into(),
            statement: statement.into(),
            tolerance,
            worst_residual: worst,
            pass: worst.is_finite() && worst <= tolerance,
        });
    }
}

fn worst(points: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    points.iter().map(|&x| f(x)).fold(0.0, f64::max)
}

/// Checks every listed property on a fine grid around the transition region.
pub fn verify_weight_properties(w: &WeightFamily) -> WeightReport {
    verify_with_order(w, w.chi_derivs().len().saturating_sub(1).max(1))
}

pub fn verify_with_order(w: &WeightFamily, max_order: usize) -> WeightReport {
    let WeightParams { epsilon: e, b } = w.params();
    let chi = w.chi();
    let wide = Chi::new(w.params().widened(), chi.bump().clone());
    let narrow = Chi::new(
        WeightParams {
            epsilon: e / 5.0,
            b: e,
        },
        chi.bump().clone(),
    );
    let mut pts = uniform_points(-2.0 * e, b + 3.0 * e, e / 64.0);
    pts.extend([e, 2.0 * e, 3.0 * e, 0.75 * e, 0.5 * e, 0.25 * e, b - 2.0 * e, b]);
    pts.sort_by(f64::total_cmp);
    let f = |m: Member, x: f64| w.eval(m, x);
    let d1 = |x: f64| chi.derivative(1, x);
    let mut c = Checker { checks: Vec::new() };

    c.push("1", "chi' >= 0", ZERO_TOL, worst(&pts, |x| -d1(x)));
    c.push(
        "2",
        "chi = 0 for x <= eps and chi = 1 for x >= b",
        ZERO_TOL,
        worst(&pts, |x| {
            if x <= e {
                f(Member::Chi, x).abs()
            } else if x >= b {
                (f(Member::Chi, x) - 1.0).abs()
            } else {
                0.0
            }
        }),
    );
    c.push(
        "3",
        "supp chi within [eps, inf)",
        ZERO_TOL,
        worst(&pts, |x| if x < e { f(Member::Chi, x).abs() } else { 0.0 }),
    );
    let lower = 1.0 / (10.0 * (b - e));
    c.push(
        "4",
        "chi' >= 1/(10(b - eps)) on [2 eps, b - 2 eps]",
        1e-12,
        worst(&pts, |x| {
            if (2.0 * e..=b - 2.0 * e).contains(&x) {
                lower - d1(x)
            } else {
                0.0
            }
        }),
    );
    c.push(
        "5",
        "supp chi' within [eps, b]",
        ZERO_TOL,
        worst(&pts, |x| if x < e || x > b { d1(x).abs() } else { 0.0 }),
    );

    let mut constants = Vec::new();
    let mut containment: f64 = 0.0;
    for j in 1..=max_order {
        let mut cj: f64 = 0.0;
        for &x in &pts {
            let num = chi.derivative(j, x).abs();
            let den = wide.derivative(1, x);
            if den > 0.0 {
                cj = cj.max(num / den);
            } else {
                containment = containment.max(num);
            }
        }
        constants.push(cj);
    }
    c.push(
        "6",
        "|chi^(j)| <= c_j chi'_{eps/3,b+eps} with finite c_j",
        ZERO_TOL,
        if constants.iter().all(|v| v.is_finite()) {
            containment
        } else {
            f64::INFINITY
        },
    );
    let floor7 = 0.5 * e / (b - 3.0 * e);
    c.push(
        "7",
        "chi >= eps/(2(b - 3 eps)) for x > 3 eps",
        1e-12,
        worst(&pts, |x| if x > 3.0 * e { floor7 - f(Member::Chi, x) } else { 0.0 }),
    );
    let wide_max = pts.iter().map(|&x| wide.derivative(1, x)).fold(0.0, f64::max);
    c.push(
        "8",
        "chi'_{eps/3,b+eps} <= eps/(b - 3 eps)",
        1e-12,
        (wide_max - e / (b - 3.0 * e)).max(0.0),
    );

    let (mut c1, mut c2) = (0.0f64, 0.0f64);
    let mut uncovered: f64 = 0.0;
    for &x in &pts {
        let num = d1(x);
        let den1 = wide.derivative(1, x) * wide.value(x);
        let den2 = narrow.value(x);
        if den1 > 0.0 {
            c1 = c1.max(num / den1);
        } else {
            uncovered = uncovered.max(num);
        }
        if den2 > 0.0 {
            c2 = c2.max(num / den2);
        } else {
            uncovered = uncovered.max(num);
        }
    }
    c.push(
        "9",
        "chi' <= c1 chi'_{eps/3,b+eps} chi_{eps/3,b+eps} and chi' <= c2 chi_{eps/5,eps}",
        ZERO_TOL,
        if c1.is_finite() && c2.is_finite() {
            uncovered
        } else {
            f64::INFINITY
        },
    );
    c.push(
        "10",
        "eta = sqrt(chi chi') and sqrt(chi') well defined",
        1e-14,
        worst(&pts, |x| {
            let r1 = -(f(Member::Chi, x) * d1(x));
            let r2 = -d1(x);
            let nan = f(Member::Eta, x).is_nan() || f(Member::SqrtChiPrime, x).is_nan();
            if nan {
                f64::INFINITY
            } else {
                r1.max(r2).max(0.0)
            }
        }),
    );
    c.push(
        "11",
        "supp phi, supp phi_tilde within [eps/4, b]",
        ZERO_TOL,
        worst(&pts, |x| {
            if x < 0.25 * e || x > b {
                f(Member::Phi, x).abs().max(f(Member::PhiTilde, x).abs())
            } else {
                0.0
            }
        }),
    );
    c.push(
        "12",
        "phi = phi_tilde = 1 on [eps/2, eps]",
        EQ_TOL,
        worst(&pts, |x| {
            if (0.5 * e..=e).contains(&x) {
                (f(Member::Phi, x) - 1.0)
                    .abs()
                    .max((f(Member::PhiTilde, x) - 1.0).abs())
            } else {
                0.0
            }
        }),
    );
    c.push(
        "13",
        "supp psi within (-inf, eps/2]",
        ZERO_TOL,
        worst(&pts, |x| if x > 0.5 * e { f(Member::Psi, x).abs() } else { 0.0 }),
    );
    c.push(
        "14",
        "chi + phi + psi = 1 and chi^2 + phi_tilde^2 + psi = 1",
        EQ_TOL,
        worst(&pts, |x| {
            let a = f(Member::Chi, x) + f(Member::Phi, x) + f(Member::Psi, x) - 1.0;
            let q = f(Member::Chi, x).powi(2) + f(Member::PhiTilde, x).powi(2) + f(Member::Psi, x)
                - 1.0;
            a.abs().max(q.abs())
        }),
    );
    c.push(
        "monotone",
        "forward differences of chi >= -1e-12",
        MONO_TOL,
        pts.windows(2)
            .map(|p| f(Member::Chi, p[0]) - f(Member::Chi, p[1]))
            .fold(0.0, f64::max),
    );

    let pass = c.checks.iter().all(|k| k.pass);
    WeightReport {
        epsilon: e,
        b,
        points: pts.len(),
        checks: c.checks,
        derivative_constants: constants,
        c1,
        c2,
        widened_slope_max: wide_max,
        min_radicand: w.min_radicand(),
        pass,
    }
}

/// The dilation-consistent reading of the widened-slope bound, `<= 1/(b - 3 eps)`.
pub fn widened_slope_scaled_bound_holds(report: &WeightReport) -> bool {
    report.widened_slope_max <= 1.0 / (report.b - 3.0 * report.epsilon) + 1e-12
}

/// The `(eps, b)` sweep used by the acceptance checks.
pub fn sweep_params() -> Vec<WeightParams> {
    let mut out = Vec::new();
    for e in [0.05, 0.1, 0.5] {
        for b in [5.0 * e, 10.0 * e, 1.0 + 5.0 * e] {
            out.push(WeightParams { epsilon: e, b });
        }
    }
    out
}

/// Builds the family for `params` on its own verification grid.
pub fn family_for(params: WeightParams, bump: &Bump) -> crate::error::Result<WeightFamily> {
    let pts = uniform_points(
        -2.0 * params.epsilon,
        params.b + 3.0 * params.epsilon,
        params.epsilon / 32.0,
    );
    super::family::build_partition(params, bump, &pts)
}
