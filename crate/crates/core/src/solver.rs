//! Time integration of `u_t = D^alpha u_x - u u_x` on the periodic grid.
//!
//! The linear part is diagonal in Fourier space and handled exactly (ETDRK4)
//! or implicitly (IMEX2); the nonlinearity is `-1/2 d_x (u^2)` with optional
//! two-thirds dealiasing.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid, MultiplierSymbol};

const CONTOUR_POINTS: usize = 32;
const BOUNDARY_LAYER: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Etdrk4,
    Imex2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub alpha: f64,
    pub dt: f64,
    pub t_final: f64,
    pub dealias: bool,
    pub scheme: Scheme,
    pub contamination_threshold: f64,
    /// Switches the quadratic term off (pure dispersion).
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(alpha: f64, dt: f64, t_final: f64) -> Self {
        Self {
            alpha,
            dt,
            t_final,
            dealias: true,
            scheme: Scheme::Etdrk4,
            contamination_threshold: 1e-6,
            nonlinear: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfiguration(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidConfiguration(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidConfiguration(format!(
                "t_final must be finite and >= 0, got {}",
                self.t_final
            )));
        }
        self.total_steps().map(|_| ())
    }

    /// Number of steps of size `dt` that reach `t_final`; `dt` must divide it.
    pub fn total_steps(&self) -> Result<u64> {
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(self.dt) {
            return Err(Error::InvalidConfiguration(format!(
                "dt = {} does not divide t_final = {}",
                self.dt, self.t_final
            )));
        }
        Ok(n as u64)
    }

    /// `dt max |xi|^{1 + alpha}` on `grid`.
    pub fn stiffness_number(&self, grid: &Grid) -> f64 {
        let xi_max = grid.spectral_spacing() * (grid.n_points() / 2) as f64;
        self.dt * xi_max.powf(1.0 + self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedSample {
    pub t: f64,
    pub mass: f64,
    pub l2: f64,
    pub hamiltonian: f64,
    pub strichartz_accum: f64,
    pub boundary_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub u: Field,
    pub step_count: u64,
    pub conserved_log: Vec<ConservedSample>,
    /// `int_0^t ||u_x||_inf ds` by the trapezoidal rule.
    pub strichartz_accum: f64,
    last_sup_dx: f64,
}

impl SolverState {
    pub fn new(u: Field, alpha: f64) -> Self {
        Self::at(u, alpha, 0.0, 0)
    }

    /// State resumed at time `t` after `step_count` steps.
    pub fn at(u: Field, alpha: f64, t: f64, step_count: u64) -> Self {
        let sup_dx = sup_derivative(&u);
        let mut s = Self {
            t,
            u,
            step_count,
            conserved_log: Vec::new(),
            strichartz_accum: 0.0,
            last_sup_dx: sup_dx,
        };
        s.record(alpha);
        s
    }

    fn record(&mut self, alpha: f64) {
        let q = conserved(&self.u, alpha);
        self.conserved_log.push(ConservedSample {
            t: self.t,
            mass: q.mass,
            l2: q.l2,
            hamiltonian: q.hamiltonian,
            strichartz_accum: self.strichartz_accum,
            boundary_fraction: boundary_fraction(&self.u),
        });
    }

    pub fn max_boundary_fraction(&self) -> f64 {
        self.conserved_log
            .iter()
            .map(|s| s.boundary_fraction)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub mass: f64,
    pub l2: f64,
    pub hamiltonian: f64,
}

/// Mass, `||u||_2^2` and `H(u) = int (u D^alpha u / 2 - u^3 / 6)`.
pub fn conserved(u: &Field, alpha: f64) -> Conserved {
    let g = u.grid();
    let dx = g.spacing();
    let spec = u.spectrum();
    let quad: f64 = spec
        .iter()
        .zip(g.wavenumbers())
        .map(|(c, xi)| xi.abs().powf(alpha) * c.norm_sqr())
        .sum::<f64>()
        * dx
        / g.n_points() as f64;
    let cubic: f64 = dx * u.values().iter().map(|v| v * v * v).sum::<f64>();
    Conserved {
        mass: dx * spec[0].re,
        l2: dx * u.values().iter().map(|v| v * v).sum::<f64>(),
        hamiltonian: 0.5 * quad - cubic / 6.0,
    }
}

/// Fraction of `||u||_2^2` within distance 5 of the box ends.
pub fn boundary_fraction(u: &Field) -> f64 {
    let g = u.grid();
    let l = g.half_length();
    let (mut edge, mut total) = (0.0, 0.0);
    for (j, v) in u.values().iter().enumerate() {
        let x = g.x(j);
        let e = v * v;
        total += e;
        if x < -l + BOUNDARY_LAYER || x > l - BOUNDARY_LAYER {
            edge += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

fn sup_derivative(u: &Field) -> f64 {
    let g = u.grid();
    let spec: Vec<Complex64> = u
        .spectrum()
        .iter()
        .zip(g.wavenumbers())
        .enumerate()
        .map(|(k, (c, &xi))| {
            if k == g.nyquist_index() {
                Complex64::new(0.0, 0.0)
            } else {
                c * Complex64::new(0.0, xi)
            }
        })
        .collect();
    g.inverse(&spec).iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Symbol `i xi |xi|^alpha` of the linear part.
pub fn linear_symbol(grid: &Grid, alpha: f64) -> Result<MultiplierSymbol> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfiguration(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(MultiplierSymbol::dispersion(grid, alpha))
}

fn dealias_mask(grid: &Grid, on: bool) -> Vec<f64> {
    let cut = grid.dealias_cutoff() as i64;
    (0..grid.n_points())
        .map(|j| {
            if j == grid.nyquist_index() {
                0.0
            } else if !on || grid.mode(j).abs() <= cut {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// `-1/2 d_x (u^2)`, with the top third of modes removed when `dealias`.
pub fn nonlinear_term(u: &Field, dealias: bool) -> Result<Field> {
    let g = u.grid();
    let mask = dealias_mask(g, dealias);
    let sq: Vec<f64> = u.values().iter().map(|v| v * v).collect();
    let spec: Vec<Complex64> = g
        .forward(&sq)
        .iter()
        .zip(g.wavenumbers())
        .zip(&mask)
        .map(|((c, &xi), &m)| c * Complex64::new(0.0, -0.5 * xi * m))
        .collect();
    Field::from_spectrum(g, spec)
}

/// Exact linear evolution `exp(t m(D)) u`; `t` may be negative.
pub fn linear_flow(u: &Field, alpha: f64, t: f64) -> Result<Field> {
    let m = linear_symbol(u.grid(), alpha)?;
    let spec = u
        .spectrum()
        .iter()
        .zip(m.samples())
        .map(|(c, l)| c * (l * t).exp())
        .collect();
    Field::from_spectrum(u.grid(), spec)
}

/// Precomputed coefficients for one grid, symbol and step size.
pub struct Stepper {
    grid: Grid,
    config: SolverConfig,
    ik_half: Vec<Complex64>,
    kind: Coefficients,
}

enum Coefficients {
    Etd {
        e: Vec<Complex64>,
        e2: Vec<Complex64>,
        q: Vec<Complex64>,
        f1: Vec<Complex64>,
        f2: Vec<Complex64>,
        f3: Vec<Complex64>,
    },
    Imex {
        l: Vec<Complex64>,
        inv: Vec<Complex64>,
    },
}

const IMEX_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

impl Stepper {
    pub fn new(grid: &Grid, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let symbol = linear_symbol(grid, config.alpha)?;
        let h = config.dt;
        let mask = dealias_mask(grid, config.dealias);
        let ik_half = grid
            .wavenumbers()
            .iter()
            .zip(&mask)
            .map(|(&xi, &m)| Complex64::new(0.0, -0.5 * xi * m))
            .collect();
        let kind = match config.scheme {
            Scheme::Etdrk4 => etd_coefficients(symbol.samples(), h),
            Scheme::Imex2 => {
                let l = symbol.samples().to_vec();
                let inv = l
                    .iter()
                    .map(|&x| 1.0 / (1.0 - x * (h * IMEX_GAMMA)))
                    .collect();
                Coefficients::Imex { l, inv }
            }
        };
        Ok(Self {
            grid: grid.clone(),
            config: config.clone(),
            ik_half,
            kind,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn nonlinear(&self, v: &[Complex64]) -> Vec<Complex64> {
        if !self.config.nonlinear {
            return vec![Complex64::new(0.0, 0.0); v.len()];
        }
        let u = self.grid.inverse(v);
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let mut s = self.grid.forward(&sq);
        for (c, k) in s.iter_mut().zip(&self.ik_half) {
            *c *= k;
        }
        s
    }

    /// Advances the physical samples by one step.
    pub fn advance(&self, values: &[f64]) -> Vec<f64> {
        let v = self.grid.forward(values);
        let h = self.config.dt;
        let next: Vec<Complex64> = match &self.kind {
            Coefficients::Etd { e, e2, q, f1, f2, f3 } => {
                let nv = self.nonlinear(&v);
                let a: Vec<Complex64> = (0..v.len()).map(|k| e2[k] * v[k] + q[k] * nv[k]).collect();
                let na = self.nonlinear(&a);
                let b: Vec<Complex64> = (0..v.len()).map(|k| e2[k] * v[k] + q[k] * na[k]).collect();
                let nb = self.nonlinear(&b);
                let c: Vec<Complex64> = (0..v.len())
                    .map(|k| e2[k] * a[k] + q[k] * (2.0 * nb[k] - nv[k]))
                    .collect();
                let nc = self.nonlinear(&c);
                (0..v.len())
                    .map(|k| {
                        e[k] * v[k] + nv[k] * f1[k] + 2.0 * (na[k] + nb[k]) * f2[k] + nc[k] * f3[k]
                    })
                    .collect()
            }
            Coefficients::Imex { l, inv } => {
                let g = IMEX_GAMMA;
                let d = 1.0 - 1.0 / (2.0 * g);
                let nv = self.nonlinear(&v);
                let u1: Vec<Complex64> = (0..v.len())
                    .map(|k| (v[k] + h * g * nv[k]) * inv[k])
                    .collect();
                let n1 = self.nonlinear(&u1);
                (0..v.len())
                    .map(|k| {
                        (v[k] + h * (d * nv[k] + (1.0 - d) * n1[k]) + h * (1.0 - g) * l[k] * u1[k])
                            * inv[k]
                    })
                    .collect()
            }
        };
        self.grid.inverse(&next)
    }
}

/// ETDRK4 coefficients with the phi-functions averaged over a unit circle
/// around each `h L`.
fn etd_coefficients(l: &[Complex64], h: f64) -> Coefficients {
    let roots: Vec<Complex64> = (0..CONTOUR_POINTS)
        .map(|j| Complex64::from_polar(1.0, PI * (j as f64 + 0.5) / (CONTOUR_POINTS as f64 / 2.0)))
        .collect();
    let m = CONTOUR_POINTS as f64;
    let one = Complex64::new(1.0, 0.0);
    let n = l.len();
    let (mut q, mut f1, mut f2, mut f3) = (
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
    );
    for k in 0..n {
        let hl = l[k] * h;
        let (mut sq, mut s1, mut s2, mut s3) = (
            Complex64::default(),
            Complex64::default(),
            Complex64::default(),
            Complex64::default(),
        );
        for r in &roots {
            let z = hl + r;
            let ez = z.exp();
            let z3 = z * z * z;
            sq += ((z * 0.5).exp() - one) / z;
            s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
            s2 += (2.0 + z + ez * (z - 2.0)) / z3;
            s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
        }
        q[k] = sq * (h / m);
        f1[k] = s1 * (h / m);
        f2[k] = s2 * (h / m);
        f3[k] = s3 * (h / m);
    }
    Coefficients::Etd {
        e: l.iter().map(|x| (x * h).exp()).collect(),
        e2: l.iter().map(|x| (x * (0.5 * h)).exp()).collect(),
        q,
        f1,
        f2,
        f3,
    }
}

/// Receives the state every `cadence()` steps, starting with step 0.
pub trait Observer {
    fn cadence(&self) -> u64 {
        1
    }

    fn observe(&mut self, state: &SolverState) -> Result<()>;
}

/// One step; returns the blow-up error with the input state preserved.
pub fn step(state: &SolverState, stepper: &Stepper) -> Result<SolverState> {
    step_owned(state.clone(), stepper)
}

fn step_owned(mut state: SolverState, stepper: &Stepper) -> Result<SolverState> {
    let values = stepper.advance(state.u.values());
    let dt = stepper.config.dt;
    let step_count = state.step_count + 1;
    let t = step_count as f64 * dt;
    let u = match Field::new(state.u.grid(), values) {
        Ok(u) => u,
        Err(_) => {
            return Err(Error::BlowUp {
                t,
                last_good: Box::new(state),
            })
        }
    };
    let sup = sup_derivative(&u);
    state.strichartz_accum += 0.5 * dt * (state.last_sup_dx + sup);
    state.last_sup_dx = sup;
    state.u = u;
    state.t = t;
    state.step_count = step_count;
    state.record(stepper.config.alpha);
    Ok(state)
}

/// Integrates from `initial` (time 0) to `config.t_final`.
pub fn run(initial: Field, config: &SolverConfig, observers: &mut [&mut dyn Observer]) -> Result<SolverState> {
    config.validate()?;
    let state = SolverState::new(initial, config.alpha);
    run_from(state, config, observers)
}

/// Continues an existing state to `config.t_final`.
pub fn run_from(
    mut state: SolverState,
    config: &SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<SolverState> {
    let total = config.total_steps()?;
    if state.step_count > total {
        return Err(Error::Sequencing(format!(
            "state is at step {} beyond the final step {total}",
            state.step_count
        )));
    }
    let stepper = Stepper::new(state.u.grid(), config)?;
    notify(&state, observers)?;
    while state.step_count < total {
        state = step_owned(state, &stepper)?;
        notify(&state, observers)?;
    }
    Ok(state)
}

fn notify(state: &SolverState, observers: &mut [&mut dyn Observer]) -> Result<()> {
    for o in observers.iter_mut() {
        if state.step_count.is_multiple_of(o.cadence().max(1)) {
            o.observe(state)?;
        }
    }
    Ok(())
}
