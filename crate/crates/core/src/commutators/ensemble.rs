//! Random test fields for operator checks.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::rng::sample_stream;
use crate::spectral::{lp_norm, Field, Grid, LpExponent};

/// Field with Gaussian coefficients on `0 <= |xi_k| <= xi_max`, scaled to unit
/// `L^2` norm. The band is fixed in wavenumber, so the same `(seed, index)`
/// produces the same function on any grid with the same box.
pub fn band_limited(grid: &Grid, xi_max: f64, rng: &mut impl Rng) -> Result<Field> {
    let n = grid.n_points();
    let k_max = ((xi_max / grid.spectral_spacing()).floor() as usize).min(n / 2 - 1);
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    let scale = n as f64;
    let re0: f64 = rng.sample(StandardNormal);
    spec[0] = Complex64::new(re0 * scale, 0.0);
    for k in 1..=k_max {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let c = Complex64::new(re, im) * scale;
        spec[k] = c;
        spec[n - k] = c.conj();
    }
    let f = Field::from_spectrum(grid, spec)?;
    let norm = lp_norm(&f, LpExponent::Two);
    f.scaled(1.0 / norm)
}

/// Sample `index` of the named ensemble.
pub fn ensemble_member(grid: &Grid, xi_max: f64, seed: u64, name: &str, index: usize) -> Result<Field> {
    band_limited(grid, xi_max, &mut sample_stream(seed, name, index))
}
