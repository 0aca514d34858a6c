//! Numerical check of the `L^2` bound on `D^sigma R_n(a) D^sigma`.

use rayon::prelude::*;
use serde::Serialize;

use super::ensemble::ensemble_member;
use super::expansion::{apply_r_sandwiched, require_admissible, CommutatorExpansion, SampledWeight};
use crate::error::Result;
use crate::spectral::{lp_norm, LpExponent};

/// Slack allowed over the constant-one bound.
pub const RATIO_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheckSpec {
    pub sigma: f64,
    pub ensemble_size: usize,
    /// Highest active mode index of the random fields.
    pub band_limit: usize,
    pub seed: u64,
}

impl BoundCheckSpec {
    /// Defaults: 100 samples band-limited to a quarter of the grid.
    pub fn new(sigma: f64, n_points: usize) -> Self {
        Self {
            sigma,
            ensemble_size: 100,
            band_limit: n_points / 4,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RemainderReport {
    pub n: usize,
    pub a: f64,
    pub sigma: f64,
    pub max_ratio: f64,
    pub rhs_constant: f64,
    /// True when `a >= 2n + 1`, where the constant one is available.
    pub unit_constant: bool,
    /// `Some` only when `unit_constant`.
    pub pass: Option<bool>,
    pub samples: usize,
}

/// `(2 pi)^{-1/2} || (D^s f)^ ||_1` in the unitary convention, discretized as
/// `(1/N) sum_k |xi_k|^s |F_k|`. This also bounds `sup |D^s f|` on the grid.
pub fn rhs_constant(f: &SampledWeight, s: f64) -> f64 {
    let g = f.grid();
    let spec = g.forward(f.values());
    spec.iter()
        .zip(g.wavenumbers())
        .map(|(c, xi)| {
            let w = if s == 0.0 { 1.0 } else { xi.abs().powf(s) };
            w * c.norm()
        })
        .sum::<f64>()
        / g.n_points() as f64
}

/// Largest `||D^sigma R_n(a) D^sigma u||_2 / (K ||u||_2)` over a random
/// band-limited ensemble, `K` the right-hand constant above.
pub fn check_remainder_bound(exp: &CommutatorExpansion, spec: &BoundCheckSpec) -> Result<RemainderReport> {
    require_admissible(exp, spec.sigma)?;
    let grid = exp.weight.grid().clone();
    let rhs = rhs_constant(&exp.weight, exp.a + 2.0 * spec.sigma);
    let xi_max = spec.band_limit as f64 * grid.spectral_spacing();
    if exp.weight.is_constant() {
        // The bracket and every sandwich term vanish identically.
        let unit_constant = exp.a >= (2 * exp.order_n + 1) as f64;
        return Ok(RemainderReport {
            n: exp.order_n,
            a: exp.a,
            sigma: spec.sigma,
            max_ratio: 0.0,
            rhs_constant: 0.0,
            unit_constant,
            pass: unit_constant.then_some(true),
            samples: spec.ensemble_size,
        });
    }
    let ratios: Vec<f64> = (0..spec.ensemble_size)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let u = ensemble_member(&grid, xi_max, spec.seed, "remainder", i)?;
            let out = apply_r_sandwiched(exp, spec.sigma, &u)?;
            let num = lp_norm(&out, LpExponent::Two);
            let den = rhs * lp_norm(&u, LpExponent::Two);
            Ok(if num == 0.0 { 0.0 } else { num / den })
        })
        .collect::<Result<_>>()?;
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let unit_constant = exp.a >= (2 * exp.order_n + 1) as f64;
    Ok(RemainderReport {
        n: exp.order_n,
        a: exp.a,
        sigma: spec.sigma,
        max_ratio,
        rhs_constant: rhs,
        unit_constant,
        pass: unit_constant.then_some(max_ratio <= RATIO_SLACK),
        samples: ratios.len(),
    })
}
