//! Initial data that is rough on one side only.

use serde::{Deserialize, Serialize};

use crate::error::{ConstraintViolation, Error, Result};
use crate::spectral::{apply_multiplier, Complex, Field, Grid, MultiplierSymbol};
use crate::weights::MollifierSpec;

/// Global regularity required by the weighted-energy theory, `2 - alpha/2`.
pub fn s_alpha(alpha: f64) -> f64 {
    2.0 - alpha / 2.0
}

/// Regularity index of the local well-posedness theory, `3/2 - 3 alpha/8`.
pub fn s_wellposed(alpha: f64) -> f64 {
    1.5 - 3.0 * alpha / 8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianBackground {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl GaussianBackground {
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * (-((x - self.center) / self.width).powi(2)).exp()
    }
}

/// `background + A beta((x - x_s)/r) |x - x_s|^gamma` with the cutoff
/// `beta(z) = exp(-z^2)` for `|z| < 6` and zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSidedProfile {
    pub gamma: f64,
    pub x_s: f64,
    pub amplitude: f64,
    /// Radius `r` of the cutoff bump around `x_s`.
    pub radius: f64,
    pub background: Option<GaussianBackground>,
}

impl OneSidedProfile {
    /// Admissible interval `(s_alpha - 1/2, m - 1/2]` for `gamma`.
    pub fn gamma_range(target_m: u32, alpha: f64) -> (f64, f64) {
        (s_alpha(alpha) - 0.5, target_m as f64 - 0.5)
    }

    pub fn violations(&self, target_m: u32, alpha: f64) -> Vec<ConstraintViolation> {
        let (lo, hi) = Self::gamma_range(target_m, alpha);
        let mut out = Vec::new();
        if lo >= hi {
            out.push(ConstraintViolation::new(
                "s_α - 1/2 < m - 1/2",
                format!("empty gamma range ({lo}, {hi}] for m = {target_m}, alpha = {alpha}"),
            ));
            return out;
        }
        if !(self.gamma > lo) {
            out.push(ConstraintViolation::new(
                "γ + 1/2 > s_α",
                format!("gamma = {}, s_alpha = {}", self.gamma, s_alpha(alpha)),
            ));
        }
        if !(self.gamma <= hi) {
            out.push(ConstraintViolation::new(
                "γ ≤ m - 1/2",
                format!("gamma = {}, m = {target_m}", self.gamma),
            ));
        }
        if !(self.radius > 0.0) {
            out.push(ConstraintViolation::new("r > 0", format!("radius = {}", self.radius)));
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        let bg = self.background.map_or(0.0, |b| b.eval(x));
        let d = x - self.x_s;
        bg + self.amplitude * cutoff(d / self.radius) * d.abs().powf(self.gamma)
    }

    /// Half-width of the support of the singular part.
    pub fn support_radius(&self) -> f64 {
        CUTOFF_EXTENT * self.radius
    }

    pub fn is_smooth(&self) -> bool {
        self.amplitude == 0.0
    }
}

#[derive(Debug, Clone)]
pub struct OneSidedData {
    pub field: Field,
    /// Sobolev index estimated from the spectral tail.
    pub effective_regularity: f64,
}

// A C-infinity bump has a spectral tail decaying only like exp(-c sqrt(xi)),
// which masks the algebraic tail of the singularity; a truncated Gaussian does
// not (the jump at the truncation is below 1e-15).
const CUTOFF_EXTENT: f64 = 6.0;

fn cutoff(z: f64) -> f64 {
    if z.abs() < CUTOFF_EXTENT {
        (-z * z).exp()
    } else {
        0.0
    }
}

pub fn one_sided_data(
    profile: &OneSidedProfile,
    target_m: u32,
    alpha: f64,
    grid: &Grid,
) -> Result<OneSidedData> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfiguration(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let v = profile.violations(target_m, alpha);
    if !v.is_empty() {
        return Err(Error::Constraint(v));
    }
    let field = Field::from_fn(grid, |x| profile.eval(x))?;
    let effective_regularity = effective_regularity(&field);
    Ok(OneSidedData { field, effective_regularity })
}

/// Fits `log |u_hat| ~ -(s + 1/2) log |xi|` on the band between `N/32` and
/// `N/6`, after averaging `|u_hat|^2` over bins of equal log-width.
pub fn effective_regularity(u: &Field) -> f64 {
    let g = u.grid();
    let n = g.n_points();
    let (k_lo, k_hi) = ((n / 32).max(2), (n / 6).max(4));
    let bins = 16;
    let spec = u.spectrum();
    let (lo, hi) = ((k_lo as f64).ln(), (k_hi as f64).ln());
    let mut pts = Vec::new();
    for b in 0..bins {
        let a = (lo + (hi - lo) * b as f64 / bins as f64).exp().ceil() as usize;
        let c = (lo + (hi - lo) * (b + 1) as f64 / bins as f64).exp().floor() as usize;
        if c < a {
            continue;
        }
        let mean = (a..=c).map(|k| spec[k].norm_sqr()).sum::<f64>() / (c - a + 1) as f64;
        if mean > 0.0 {
            let kc = ((a as f64) * (c as f64)).sqrt();
            pts.push((kc.ln(), 0.5 * mean.ln()));
        }
    }
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    -sxy / sxx - 0.5
}

/// `rho_mu * u`, applied spectrally.
pub fn mollify(u: &Field, spec: &MollifierSpec) -> Result<Field> {
    let m = MultiplierSymbol::custom(u.grid(), false, |xi| Complex::new(spec.symbol(xi), 0.0));
    apply_multiplier(u, &m)
}
