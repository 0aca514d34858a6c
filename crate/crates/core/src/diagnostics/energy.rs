//! Moving-window weighted energies and time-accumulated smoothing integrals.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ladder::Exponent;
use crate::error::{ConstraintViolation, Error, Result};
use crate::spectral::{apply_multiplier, Field, Grid, MultiplierSymbol};
use crate::weights::{build_partition, uniform_points, Bump, Member, WeightFamily, WeightParams};

/// Right-moving region `x >= x0 + eps - v t` with smoothing strip up to
/// `x0 + tau - v t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticWindow {
    pub x0: f64,
    pub epsilon: f64,
    pub b: f64,
    pub tau: f64,
    pub v: f64,
}

impl DiagnosticWindow {
    pub fn new(x0: f64, epsilon: f64, b: f64, tau: f64, v: f64) -> Result<Self> {
        let w = Self { x0, epsilon, b, tau, v };
        let violations = w.violations();
        if violations.is_empty() {
            Ok(w)
        } else {
            Err(Error::Constraint(violations))
        }
    }

    pub fn violations(&self) -> Vec<ConstraintViolation> {
        let mut out = Vec::new();
        let Self { x0, epsilon, b, tau, v } = *self;
        if ![x0, epsilon, b, tau, v].iter().all(|x| x.is_finite()) {
            out.push(ConstraintViolation::new("finite", "window parameters must be finite"));
        }
        if !(epsilon > 0.0) {
            out.push(ConstraintViolation::new("ε > 0", format!("epsilon = {epsilon}")));
        }
        if !(b >= 5.0 * epsilon) {
            out.push(ConstraintViolation::new("b ≥ 5ε", format!("b = {b}, epsilon = {epsilon}")));
        }
        if !(tau > 4.0 * epsilon) {
            out.push(ConstraintViolation::new("τ > 4ε", format!("tau = {tau}, epsilon = {epsilon}")));
        }
        if !(v >= 0.0) {
            out.push(ConstraintViolation::new("v ≥ 0", format!("v = {v}")));
        }
        out
    }

    pub fn params(&self) -> Result<WeightParams> {
        WeightParams::new(self.epsilon, self.b)
    }

    /// Window coordinate of the grid point `x` at time `t`.
    pub fn local(&self, x: f64, t: f64) -> f64 {
        x - self.x0 + self.v * t
    }
}

/// The weight family of a window. Members are evaluated in closed form, so
/// the sample table only needs to cover the transition region.
pub fn window_family(window: &DiagnosticWindow, bump: &Bump) -> Result<WeightFamily> {
    let eps = window.epsilon;
    let points = uniform_points(-eps, window.b + eps, eps / 16.0);
    build_partition(window.params()?, bump, &points)
}

#[derive(Clone)]
pub enum WindowWeight {
    Unit,
    Member(Arc<WeightFamily>, Member),
    /// Sharp indicator of `[lo, hi]` in window coordinates.
    Indicator { lo: f64, hi: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for WindowWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WindowWeight::Unit => f.write_str("Unit"),
            WindowWeight::Member(_, m) => write!(f, "Member({m})"),
            WindowWeight::Indicator { lo, hi } => write!(f, "Indicator[{lo}, {hi}]"),
            WindowWeight::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl WindowWeight {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            WindowWeight::Unit => 1.0,
            WindowWeight::Member(w, m) => w.eval(*m, y),
            WindowWeight::Indicator { lo, hi } => {
                if y >= *lo && y <= *hi {
                    1.0
                } else {
                    0.0
                }
            }
            WindowWeight::Custom(f) => f(y),
        }
    }

    pub fn sample(&self, grid: &Grid, window: &DiagnosticWindow, t: f64) -> Vec<f64> {
        (0..grid.n_points())
            .map(|j| self.eval(window.local(grid.x(j), t)))
            .collect()
    }
}

fn derivative_of(u: &Field, e: Exponent) -> Result<Field> {
    apply_multiplier(u, &MultiplierSymbol::derivative_riesz(u.grid(), e.j, e.s)?)
}

/// Periodic trapezoid of `g^2 w` over the grid.
fn weighted_square(g: &Field, w: &[f64]) -> f64 {
    let dx = g.grid().spacing();
    dx * g.values().iter().zip(w).map(|(a, b)| a * a * b).sum::<f64>()
}

/// `int (d_x^j D^s u)^2 w(x - x0 + v t)^2 dx`.
pub fn weighted_energy(
    u: &Field,
    j: u32,
    s: f64,
    w: &WindowWeight,
    window: &DiagnosticWindow,
    t: f64,
) -> Result<f64> {
    let g = derivative_of(u, Exponent::new(j, s))?;
    let w2: Vec<f64> = w.sample(u.grid(), window, t).iter().map(|x| x * x).collect();
    Ok(weighted_square(&g, &w2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripSample {
    pub t: f64,
    /// `int (D^sigma u)^2 (chi^2)'` at time `t`.
    pub strip: f64,
    pub hilbert: f64,
    /// Same integrand against the sharp indicator of `[eps, tau]`.
    pub sharp: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticRecord {
    pub window: DiagnosticWindow,
    pub exponent: Exponent,
    /// Order `sigma` of the smoothing quantity `D^sigma u`.
    pub smoothing_order: f64,
    /// `(t, weighted energy)` on the right-moving window.
    pub series: Vec<(f64, f64)>,
    pub smoothing_accum: f64,
    pub hilbert_twin: f64,
    pub sharp_accum: f64,
    pub strip_series: Vec<StripSample>,
}

impl DiagnosticRecord {
    pub fn new(window: DiagnosticWindow, exponent: Exponent, smoothing_order: f64) -> Self {
        Self {
            window,
            exponent,
            smoothing_order,
            series: Vec::new(),
            smoothing_accum: 0.0,
            hilbert_twin: 0.0,
            sharp_accum: 0.0,
            strip_series: Vec::new(),
        }
    }

    /// Record for a ladder index: smoothing gains `alpha / 2` derivatives.
    pub fn for_exponent(window: DiagnosticWindow, exponent: Exponent, alpha: f64) -> Self {
        Self::new(window, exponent, exponent.total() + alpha / 2.0)
    }

    pub fn label(&self) -> String {
        format!("x0={}_v={}_{}", self.window.x0, self.window.v, self.exponent)
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.series.first().map(|p| p.1)
    }

    pub fn sup_energy(&self) -> f64 {
        self.series.iter().map(|p| p.1).fold(0.0, f64::max)
    }

    /// Samples the weighted energy (weight `chi`) and advances the strip
    /// accumulators to `t`.
    pub fn observe(&mut self, u: &Field, t: f64, family: &Arc<WeightFamily>) -> Result<()> {
        if let Some(&(t_last, _)) = self.series.last() {
            if !(t > t_last) {
                return Err(Error::Sequencing(format!(
                    "sample at t = {t} does not follow t = {t_last}"
                )));
            }
        }
        let chi = WindowWeight::Member(family.clone(), Member::Chi);
        let e = weighted_energy(u, self.exponent.j, self.exponent.s, &chi, &self.window, t)?;
        smoothing_integral(self, u, t, family)?;
        self.series.push((t, e));
        Ok(())
    }
}

/// Adds the trapezoid panel ending at `t` to the strip accumulators of
/// `record`, using the weight `(chi^2)'` and its sharp-strip counterpart.
pub fn smoothing_integral(
    record: &mut DiagnosticRecord,
    u: &Field,
    t: f64,
    family: &Arc<WeightFamily>,
) -> Result<()> {
    if let Some(last) = record.strip_series.last() {
        if !(t > last.t) {
            return Err(Error::Sequencing(format!(
                "smoothing sample at t = {t} does not follow t = {}",
                last.t
            )));
        }
    }
    let grid = u.grid();
    let w = &record.window;
    let d = apply_multiplier(u, &MultiplierSymbol::riesz(grid, record.smoothing_order)?)?;
    let hd = apply_multiplier(&d, &MultiplierSymbol::hilbert(grid))?;
    let dchi2 = WindowWeight::Member(family.clone(), Member::ChiSqPrime).sample(grid, w, t);
    let sharp = WindowWeight::Indicator { lo: w.epsilon, hi: w.tau }.sample(grid, w, t);
    let s = StripSample {
        t,
        strip: weighted_square(&d, &dchi2),
        hilbert: weighted_square(&hd, &dchi2),
        sharp: weighted_square(&d, &sharp),
    };
    if let Some(last) = record.strip_series.last() {
        let h = 0.5 * (t - last.t);
        record.smoothing_accum += h * (last.strip + s.strip);
        record.hilbert_twin += h * (last.hilbert + s.hilbert);
        record.sharp_accum += h * (last.sharp + s.sharp);
    }
    record.strip_series.push(s);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::linear_flow;
    use crate::spectral::{make_grid, sobolev_norm};
    use std::f64::consts::PI;

    fn window() -> DiagnosticWindow {
        DiagnosticWindow::new(0.0, 0.5, 2.5, 2.5, 1.0).unwrap()
    }

    fn family() -> Arc<WeightFamily> {
        Arc::new(window_family(&window(), &Bump::default()).unwrap())
    }

    #[test]
    fn violations_are_all_listed() {
        let Err(Error::Constraint(v)) = DiagnosticWindow::new(0.0, 1.0, 4.0, 3.0, -1.0) else {
            panic!("expected constraint error")
        };
        let rules: Vec<_> = v.iter().map(|c| c.rule.as_str()).collect();
        assert_eq!(rules, vec!["b ≥ 5ε", "τ > 4ε", "v ≥ 0"]);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = make_grid(256, 20.0).unwrap();
        let u = Field::zeros(&g);
        let w = WindowWeight::Member(family(), Member::Chi);
        assert_eq!(weighted_energy(&u, 2, 0.5, &w, &window(), 0.3).unwrap(), 0.0);
    }

    #[test]
    fn unit_weight_matches_spectral_seminorm() {
        let g = make_grid(512, 20.0).unwrap();
        let u = Field::from_fn(&g, |x| (-(x * x) / 4.0).exp() * (1.0 + 0.3 * x)).unwrap();
        let e = weighted_energy(&u, 1, 0.75, &WindowWeight::Unit, &window(), 0.0).unwrap();
        // Parseval with the symbol |xi|^{1.75}.
        let n = g.n_points() as f64;
        let spec: f64 = u
            .spectrum()
            .iter()
            .zip(g.wavenumbers())
            .map(|(c, xi)| xi.abs().powf(3.5) * c.norm_sqr())
            .sum::<f64>()
            * g.spacing()
            / n;
        assert!((e - spec).abs() <= 1e-10 * spec, "{e} vs {spec}");
        let _ = sobolev_norm(&u, 1.0);
    }

    #[test]
    fn disjoint_support_gives_no_energy() {
        let g = make_grid(1024, 20.0).unwrap();
        let w = window();
        let t = 0.5;
        // Left edge of the window at time t.
        let edge = w.x0 + w.epsilon - w.v * t;
        let u = Field::from_fn(&g, |x| {
            let z = (x - (edge - 4.0)) / 2.5;
            if z.abs() < 1.0 {
                (-1.0 / (1.0 - z * z)).exp()
            } else {
                0.0
            }
        })
        .unwrap();
        let total = weighted_energy(&u, 0, 0.0, &WindowWeight::Unit, &w, t).unwrap();
        let e = weighted_energy(&u, 0, 0.0, &WindowWeight::Member(family(), Member::Chi), &w, t).unwrap();
        assert!(e <= 1e-8 * total, "{e} vs {total}");
    }

    #[test]
    fn partition_weights_split_the_energy() {
        let g = make_grid(512, 20.0).unwrap();
        let fam = family();
        let w = window();
        let u0 = Field::from_fn(&g, |x| (-(x * x) / 3.0).exp() + 0.2 * (-(x - 2.0).powi(2)).exp()).unwrap();
        let chi = WindowWeight::Member(fam.clone(), Member::Chi);
        let phi = WindowWeight::Member(fam.clone(), Member::PhiTilde);
        let f2 = fam.clone();
        let psi = WindowWeight::Custom(Arc::new(move |y| f2.eval(Member::Psi, y).max(0.0).sqrt()));
        let total0 = weighted_energy(&u0, 1, 0.5, &WindowWeight::Unit, &w, 0.0).unwrap();
        for t in [0.0, 0.7, 1.9] {
            let u = linear_flow(&u0, 0.75, t).unwrap();
            let parts: f64 = [&chi, &phi, &psi]
                .iter()
                .map(|wt| weighted_energy(&u, 1, 0.5, wt, &w, t).unwrap())
                .sum();
            assert!((parts - total0).abs() <= 1e-8 * total0, "t = {t}: {parts} vs {total0}");
        }
    }

    #[test]
    fn weighted_energy_is_monotone_in_the_weight() {
        let g = make_grid(256, 10.0).unwrap();
        let u = Field::from_fn(&g, |x| (x * 0.7).sin() * (-(x * x) / 8.0).exp()).unwrap();
        let fam = family();
        let chi = WindowWeight::Member(fam, Member::Chi);
        let e1 = weighted_energy(&u, 1, 0.3, &chi, &window(), 0.2).unwrap();
        let e2 = weighted_energy(&u, 1, 0.3, &WindowWeight::Unit, &window(), 0.2).unwrap();
        assert!(e1 <= e2 + 1e-12);
    }

    #[test]
    fn zero_solution_accumulates_nothing() {
        let g = make_grid(128, 10.0).unwrap();
        let fam = family();
        let mut r = DiagnosticRecord::for_exponent(window(), Exponent::new(2, 0.0), 0.75);
        for i in 0..5 {
            r.observe(&Field::zeros(&g), i as f64 * 0.1, &fam).unwrap();
        }
        assert_eq!(r.smoothing_accum, 0.0);
        assert_eq!(r.hilbert_twin, 0.0);
    }

    #[test]
    fn non_monotone_times_are_rejected() {
        let g = make_grid(128, 10.0).unwrap();
        let fam = family();
        let u = Field::from_fn(&g, |x| (x * PI / 10.0).sin()).unwrap();
        let mut r = DiagnosticRecord::for_exponent(window(), Exponent::new(2, 0.0), 0.75);
        r.observe(&u, 0.5, &fam).unwrap();
        assert!(matches!(r.observe(&u, 0.5, &fam), Err(Error::Sequencing(_))));
        assert!(matches!(smoothing_integral(&mut r, &u, 0.1, &fam), Err(Error::Sequencing(_))));
    }

    #[test]
    fn accumulators_never_decrease() {
        let g = make_grid(256, 15.0).unwrap();
        let fam = family();
        let u0 = Field::from_fn(&g, |x| (-(x - 1.0).powi(2)).exp()).unwrap();
        let mut r = DiagnosticRecord::for_exponent(window(), Exponent::new(2, 0.25), 0.75);
        let mut prev = 0.0;
        for i in 0..20 {
            let t = i as f64 * 0.05;
            r.observe(&linear_flow(&u0, 0.75, t).unwrap(), t, &fam).unwrap();
            assert!(r.smoothing_accum >= prev);
            prev = r.smoothing_accum;
        }
        assert!(prev > 0.0);
    }
}
