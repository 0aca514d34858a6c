//! Periodic pseudo-spectral backbone.
//!
//! A [`Grid`] discretizes the box `[-L, L)` with `n` equispaced points and owns
//! the FFT plans. A [`Field`] is a real grid function with a lazily cached
//! spectrum. Fourier multipliers are represented by [`MultiplierSymbol`], sampled
//! on the grid's wavenumber table `xi_k = pi k / L`.
//!
//! Spectra use the unnormalized DFT `F_k = sum_j u_j exp(-2 pi i j k / n)` in the
//! standard FFT ordering `k = 0, 1, .., n/2, -n/2 + 1, .., -1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub use rustfft::num_complex::Complex64 as Complex;

const MIN_POINTS: usize = 8;

struct GridInner {
    n: usize,
    half_length: f64,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic grid on `[-L, L)` with `n` points.
///
/// Cloning is cheap; the wavenumber table and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.inner.n)
            .field("half_length", &self.inner.half_length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n
                && self.inner.half_length.to_bits() == other.inner.half_length.to_bits())
    }
}

impl Grid {
    pub fn new(n_points: usize, half_length: f64) -> Result<Self> {
        if !n_points.is_multiple_of(2) || n_points < MIN_POINTS {
            return Err(Error::InvalidConfiguration(format!(
                "n_points must be even and >= {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidConfiguration(format!(
                "half_length must be positive and finite, got {half_length}"
            )));
        }
        let scale = PI / half_length;
        let wavenumbers = (0..n_points)
            .map(|j| signed_mode(j, n_points) as f64 * scale)
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n_points);
        let inverse = planner.plan_fft_inverse(n_points);
        Ok(Self {
            inner: Arc::new(GridInner {
                n: n_points,
                half_length,
                wavenumbers,
                forward,
                inverse,
            }),
        })
    }

    pub fn n_points(&self) -> usize {
        self.inner.n
    }

    pub fn half_length(&self) -> f64 {
        self.inner.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.inner.half_length / self.inner.n as f64
    }

    /// Grid point `x_j = -L + j dx`.
    pub fn x(&self, j: usize) -> f64 {
        -self.inner.half_length + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.inner.n).map(|j| self.x(j)).collect()
    }

    /// Wavenumbers `xi_k` in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Signed integer mode of FFT slot `j`; the Nyquist slot maps to `+n/2`.
    pub fn mode(&self, j: usize) -> i64 {
        signed_mode(j, self.inner.n)
    }

    pub fn nyquist_index(&self) -> usize {
        self.inner.n / 2
    }

    /// Largest |mode| kept by the two-thirds rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.inner.n / 3
    }

    /// Spacing of the wavenumber table, `pi / L`.
    pub fn spectral_spacing(&self) -> f64 {
        PI / self.inner.half_length
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inner.forward.process(&mut buf);
        buf
    }

    /// Inverse transform, normalized, keeping the real part.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let mut buf = spectrum.to_vec();
        self.inner.inverse.process(&mut buf);
        let scale = 1.0 / self.inner.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::IncompatibleGrid(format!(
                "({}, {}) vs ({}, {})",
                self.n_points(),
                self.half_length(),
                other.n_points(),
                other.half_length()
            )))
        }
    }
}

fn signed_mode(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Free-function form of [`Grid::new`].
pub fn make_grid(n_points: usize, half_length: f64) -> Result<Grid> {
    Grid::new(n_points, half_length)
}

/// Real-valued grid function with an optional cached spectrum.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    spectrum: OnceLock<Vec<Complex64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("cached_spectrum", &self.spectrum.get().is_some())
            .finish_non_exhaustive()
    }
}

impl Field {
    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::IncompatibleGrid(format!(
                "{} samples for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        check_finite(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
            spectrum: OnceLock::new(),
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.n_points()],
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n_points()).map(|j| f(grid.x(j))).collect();
        Self::new(grid, values)
    }

    /// Builds a field from spectral coefficients. The conjugate-symmetric part
    /// is kept and cached; values are its inverse transform.
    pub fn from_spectrum(grid: &Grid, mut spectrum: Vec<Complex64>) -> Result<Self> {
        if spectrum.len() != grid.n_points() {
            return Err(Error::IncompatibleGrid(format!(
                "{} coefficients for a {}-point grid",
                spectrum.len(),
                grid.n_points()
            )));
        }
        hermitian_part(&mut spectrum);
        let values = grid.inverse(&spectrum);
        check_finite(&values)?;
        let cache = OnceLock::new();
        let _ = cache.set(spectrum);
        Ok(Self {
            grid: grid.clone(),
            values,
            spectrum: cache,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| {
            let mut s = self.grid.forward(&self.values);
            hermitian_part(&mut s);
            s
        })
    }

    pub fn has_cached_spectrum(&self) -> bool {
        self.spectrum.get().is_some()
    }

    /// Replaces the samples, invalidating any cached spectrum.
    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.grid.n_points() {
            return Err(Error::IncompatibleGrid("sample count changed".into()));
        }
        check_finite(&values)?;
        self.values = values;
        self.spectrum = OnceLock::new();
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::new(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Field> {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Pointwise product with raw samples on the same grid.
    pub fn mul_samples(&self, w: &[f64]) -> Result<Field> {
        if w.len() != self.values.len() {
            return Err(Error::IncompatibleGrid("sample length mismatch".into()));
        }
        Field::new(
            &self.grid,
            self.values.iter().zip(w).map(|(a, b)| a * b).collect(),
        )
    }

    fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Field::new(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Discrete `L^2` inner product `dx sum u_j w_j`.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(j) => Err(Error::InvalidField(format!(
            "non-finite sample {} at index {j}",
            values[j]
        ))),
    }
}

/// Projects onto conjugate-symmetric coefficients: `F_{-k} = conj(F_k)`.
fn hermitian_part(s: &mut [Complex64]) {
    let n = s.len();
    s[0] = Complex64::new(s[0].re, 0.0);
    s[n / 2] = Complex64::new(s[n / 2].re, 0.0);
    for k in 1..n / 2 {
        let a = s[k];
        let b = s[n - k].conj();
        let avg = (a + b) * 0.5;
        s[k] = avg;
        s[n - k] = avg.conj();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolKind {
    /// `|xi|^s`
    Riesz(f64),
    /// `-i sgn(xi)`
    Hilbert,
    /// `(i xi)^order`
    Derivative(u32),
    /// `(1 + xi^2)^{s/2}`
    Bessel(f64),
    /// `i xi |xi|^alpha`
    Dispersion(f64),
    Custom,
}

/// Fourier multiplier sampled on a grid's wavenumber table.
#[derive(Clone)]
pub struct MultiplierSymbol {
    kind: SymbolKind,
    grid: Grid,
    samples: Vec<Complex64>,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("kind", &self.kind)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl MultiplierSymbol {
    /// Riesz potential `D^s`, `s >= 0`. `|0|^0` is taken as 1.
    pub fn riesz(grid: &Grid, s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::UnsupportedExponent(format!(
                "Riesz exponent must be finite and >= 0, got {s}"
            )));
        }
        Ok(Self::sample(grid, SymbolKind::Riesz(s), false, |xi| {
            Complex64::new(riesz_power(xi, s), 0.0)
        }))
    }

    pub fn hilbert(grid: &Grid) -> Self {
        Self::sample(grid, SymbolKind::Hilbert, true, |xi| {
            Complex64::new(0.0, -sign(xi))
        })
    }

    pub fn derivative(grid: &Grid, order: u32) -> Self {
        Self::sample(grid, SymbolKind::Derivative(order), order % 2 == 1, |xi| {
            i_pow(order) * xi.powi(order as i32)
        })
    }

    pub fn bessel(grid: &Grid, s: f64) -> Self {
        Self::sample(grid, SymbolKind::Bessel(s), false, |xi| {
            Complex64::new((1.0 + xi * xi).powf(0.5 * s), 0.0)
        })
    }

    /// Linear fKdV symbol `i xi |xi|^alpha`.
    pub fn dispersion(grid: &Grid, alpha: f64) -> Self {
        Self::sample(grid, SymbolKind::Dispersion(alpha), true, |xi| {
            Complex64::new(0.0, xi * riesz_power(xi, alpha))
        })
    }

    /// Arbitrary symbol. `odd` zeroes the Nyquist sample.
    pub fn custom(grid: &Grid, odd: bool, f: impl Fn(f64) -> Complex64) -> Self {
        Self::sample(grid, SymbolKind::Custom, odd, f)
    }

    /// `(i xi)^order |xi|^s`, the symbol of `d_x^order D^s`.
    pub fn derivative_riesz(grid: &Grid, order: u32, s: f64) -> Result<Self> {
        let d = Self::derivative(grid, order);
        let r = Self::riesz(grid, s)?;
        d.compose(&r)
    }

    fn sample(grid: &Grid, kind: SymbolKind, odd: bool, f: impl Fn(f64) -> Complex64) -> Self {
        let mut samples: Vec<Complex64> = grid.wavenumbers().iter().map(|&xi| f(xi)).collect();
        if odd {
            samples[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        }
        Self {
            kind,
            grid: grid.clone(),
            samples,
        }
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Symbol of the composed operator (product of symbols).
    pub fn compose(&self, other: &MultiplierSymbol) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            kind: SymbolKind::Custom,
            grid: self.grid.clone(),
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            kind: SymbolKind::Custom,
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|s| s * c).collect(),
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn riesz_power(xi: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if xi == 0.0 {
        0.0
    } else {
        xi.abs().powf(s)
    }
}

fn i_pow(order: u32) -> Complex64 {
    match order % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Applies `m(D)` to `f`: spectrum `m(xi_k) F_k`, real part of the inverse.
pub fn apply_multiplier(f: &Field, m: &MultiplierSymbol) -> Result<Field> {
    f.grid.check_same(&m.grid)?;
    let spec: Vec<Complex64> = f
        .spectrum()
        .iter()
        .zip(&m.samples)
        .map(|(u, s)| u * s)
        .collect();
    Field::from_spectrum(&f.grid, spec)
}

/// `D^s f`, `s >= 0`.
pub fn frac_deriv(f: &Field, s: f64) -> Result<Field> {
    apply_multiplier(f, &MultiplierSymbol::riesz(f.grid(), s)?)
}

pub fn hilbert(f: &Field) -> Result<Field> {
    apply_multiplier(f, &MultiplierSymbol::hilbert(f.grid()))
}

/// `J^s f`.
pub fn bessel(f: &Field, s: f64) -> Result<Field> {
    apply_multiplier(f, &MultiplierSymbol::bessel(f.grid(), s))
}

pub fn x_derivative(f: &Field, order: u32) -> Result<Field> {
    apply_multiplier(f, &MultiplierSymbol::derivative(f.grid(), order))
}

/// `||J^s f||_2` through Parseval: `(dx / n) sum (1 + xi^2)^s |F_k|^2`.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    let g = f.grid();
    let sum: f64 = f
        .spectrum()
        .iter()
        .zip(g.wavenumbers())
        .map(|(c, &xi)| (1.0 + xi * xi).powf(s) * c.norm_sqr())
        .sum();
    (g.spacing() / g.n_points() as f64 * sum).sqrt()
}

/// `||f||_2^2` evaluated on the spectrum (Parseval).
pub fn spectral_l2_squared(f: &Field) -> f64 {
    let g = f.grid();
    g.spacing() / g.n_points() as f64 * f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpExponent {
    One,
    Two,
    Infinity,
}

impl LpExponent {
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Self::One)
        } else if p == 2.0 {
            Ok(Self::Two)
        } else if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else {
            Err(Error::UnsupportedParameter(format!(
                "p = {p}; only 1, 2 and infinity are available"
            )))
        }
    }

    /// `1/p`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Self::One => 1.0,
            Self::Two => 0.5,
            Self::Infinity => 0.0,
        }
    }
}

/// `L^p` norm by the (periodic) trapezoidal rule, or max-abs for `p = inf`.
pub fn lp_norm(f: &Field, p: LpExponent) -> f64 {
    let dx = f.grid().spacing();
    match p {
        LpExponent::One => dx * f.values().iter().map(|v| v.abs()).sum::<f64>(),
        LpExponent::Two => (dx * f.values().iter().map(|v| v * v).sum::<f64>()).sqrt(),
        LpExponent::Infinity => f.max_abs(),
    }
}
