//! The cutoff family `chi_{eps,b}` and its companions `phi`, `phi_tilde`,
//! `psi`, `eta` and `sqrt(chi')`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::profile::Bump;
use crate::error::{Error, Result};
use crate::spectral::Grid;

/// Largest derivative order stored by default in a sampled family.
pub const DEFAULT_MAX_ORDER: usize = 7;

const RADICAND_FLOOR: f64 = -1e-10;
const CLAMP_FLOOR: f64 = -1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub epsilon: f64,
    pub b: f64,
}

impl WeightParams {
    pub fn new(epsilon: f64, b: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() || !b.is_finite() {
            return Err(Error::InvalidConfiguration(format!(
                "weight parameters must be finite with epsilon > 0 (epsilon = {epsilon}, b = {b})"
            )));
        }
        if b < 5.0 * epsilon {
            return Err(Error::InvalidConfiguration(format!(
                "b >= 5 epsilon required (epsilon = {epsilon}, b = {b})"
            )));
        }
        Ok(Self { epsilon, b })
    }

    /// The enlarged family `(eps/3, b + eps)` used to dominate derivatives.
    pub fn widened(&self) -> Self {
        Self {
            epsilon: self.epsilon / 3.0,
            b: self.b + self.epsilon,
        }
    }
}

/// Closed-form evaluator of `chi_{eps,b} = rho_eps * nu_{eps,b}`.
#[derive(Debug, Clone)]
pub struct Chi {
    params: WeightParams,
    bump: Bump,
}

impl Chi {
    pub fn new(params: WeightParams, bump: Bump) -> Self {
        Self { params, bump }
    }

    pub fn params(&self) -> WeightParams {
        self.params
    }

    pub fn bump(&self) -> &Bump {
        &self.bump
    }

    fn slope(&self) -> f64 {
        1.0 / (self.params.b - 3.0 * self.params.epsilon)
    }

    fn arguments(&self, x: f64) -> (f64, f64) {
        let WeightParams { epsilon: e, b } = self.params;
        ((x - 2.0 * e) / e, (x - b + e) / e)
    }

    pub fn value(&self, x: f64) -> f64 {
        let (z1, z2) = self.arguments(x);
        if z1 <= -1.0 {
            0.0
        } else if z2 >= 1.0 {
            1.0
        } else {
            self.params.epsilon * self.slope() * (self.bump.ramp(z1) - self.bump.ramp(z2))
        }
    }

    /// `chi^{(order)}(x)`; order 0 is the value.
    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        if order == 0 {
            return self.value(x);
        }
        let (z1, z2) = self.arguments(x);
        if z1 <= -1.0 || z2 >= 1.0 {
            return 0.0;
        }
        if order == 1 {
            return self.slope() * (self.bump.cumulative(z1) - self.bump.cumulative(z2));
        }
        let e = self.params.epsilon;
        let d = order - 2;
        e.powi(1 - order as i32)
            * self.slope()
            * (self.bump.derivative(d, z1) - self.bump.derivative(d, z2))
    }
}

/// `psi_eps = 1 - rho_{eps/8} * 1_{[3 eps / 8, inf)}`.
#[derive(Debug, Clone)]
pub struct Psi {
    epsilon: f64,
    shift: f64,
    bump: Bump,
}

impl Psi {
    pub fn new(epsilon: f64, bump: Bump) -> Self {
        Self {
            epsilon,
            shift: 0.0,
            bump,
        }
    }

    /// Translate to the right by `delta` (used to build broken families).
    pub fn shifted(mut self, delta: f64) -> Self {
        self.shift += delta;
        self
    }

    fn argument(&self, x: f64) -> f64 {
        let s = self.epsilon / 8.0;
        (x - self.shift - 3.0 * s) / s
    }

    pub fn derivative(&self, order: usize, x: f64) -> f64 {
        let z = self.argument(x);
        if order == 0 {
            return 1.0 - self.bump.cumulative(z);
        }
        let scale = 8.0 / self.epsilon;
        -scale.powi(order as i32) * self.bump.derivative(order - 1, z)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.derivative(0, x)
    }
}

/// Names of the evaluable family members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    Chi,
    ChiPrime,
    ChiSq,
    ChiSqPrime,
    Phi,
    PhiTilde,
    Psi,
    Eta,
    SqrtChiPrime,
}

impl Member {
    pub const ALL: [Member; 9] = [
        Member::Chi,
        Member::ChiPrime,
        Member::ChiSq,
        Member::ChiSqPrime,
        Member::Phi,
        Member::PhiTilde,
        Member::Psi,
        Member::Eta,
        Member::SqrtChiPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Member::Chi => "chi",
            Member::ChiPrime => "chi_prime",
            Member::ChiSq => "chi_sq",
            Member::ChiSqPrime => "chi_sq_prime",
            Member::Phi => "phi",
            Member::PhiTilde => "phi_tilde",
            Member::Psi => "psi",
            Member::Eta => "eta",
            Member::SqrtChiPrime => "sqrt_chi_prime",
        }
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Member {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Member::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Lookup(s.to_string()))
    }
}

/// Analytic family plus samples on a set of evaluation points.
#[derive(Debug, Clone)]
pub struct WeightFamily {
    chi: Chi,
    psi: Psi,
    points: Vec<f64>,
    chi_derivs: Vec<Vec<f64>>,
    samples: Vec<(Member, Vec<f64>)>,
    min_radicand: f64,
}

/// Samples of `chi` and its derivatives on the evaluation points.
#[derive(Debug, Clone)]
pub struct SampledChi {
    pub chi: Chi,
    pub points: Vec<f64>,
    /// `derivs[j][i] = chi^{(j)}(points[i])`, `j = 0..=max_order`.
    pub derivs: Vec<Vec<f64>>,
}

fn check_resolution(params: &WeightParams, points: &[f64]) -> Result<()> {
    let required = params.epsilon / 16.0;
    let actual = points
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    if actual > required * (1.0 + 1e-12) {
        Err(Error::Resolution { required, actual })
    } else {
        Ok(())
    }
}

/// Samples `chi_{eps,b}` and its first `max_order` derivatives.
pub fn build_chi(
    params: WeightParams,
    bump: &Bump,
    points: &[f64],
    max_order: usize,
) -> Result<SampledChi> {
    let params = WeightParams::new(params.epsilon, params.b)?;
    check_resolution(&params, points)?;
    let chi = Chi::new(params, bump.clone());
    let derivs = (0..=max_order)
        .map(|j| points.iter().map(|&x| chi.derivative(j, x)).collect())
        .collect();
    Ok(SampledChi {
        chi,
        points: points.to_vec(),
        derivs,
    })
}

/// Builds the whole family on `points`, checking radicands and supports.
pub fn build_partition(params: WeightParams, bump: &Bump, points: &[f64]) -> Result<WeightFamily> {
    let sampled = build_chi(params, bump, points, DEFAULT_MAX_ORDER)?;
    let psi = Psi::new(params.epsilon, bump.clone());
    WeightFamily::assemble(sampled, psi)
}

impl WeightFamily {
    /// Assembles a family from an arbitrary `psi`; the construction checks
    /// still apply.
    pub fn assemble(sampled: SampledChi, psi: Psi) -> Result<Self> {
        let SampledChi {
            chi,
            points,
            derivs,
        } = sampled;
        let mut family = Self {
            chi,
            psi,
            points,
            chi_derivs: derivs,
            samples: Vec::new(),
            min_radicand: f64::INFINITY,
        };
        for (i, &x) in family.points.iter().enumerate() {
            let c = family.chi_derivs[0][i];
            let r = 1.0 - c * c - family.psi.value(x);
            family.min_radicand = family.min_radicand.min(r);
            if r < RADICAND_FLOOR {
                return Err(Error::ConstructionFailure {
                    x,
                    reason: format!("1 - chi^2 - psi = {r:e} is negative"),
                });
            }
        }
        let mut samples = Vec::new();
        for m in Member::ALL {
            let v = family
                .points
                .iter()
                .map(|&x| family.eval(m, x))
                .collect();
            samples.push((m, v));
        }
        family.samples = samples;
        Ok(family)
    }

    pub fn params(&self) -> WeightParams {
        self.chi.params
    }

    pub fn chi(&self) -> &Chi {
        &self.chi
    }

    pub fn psi(&self) -> &Psi {
        &self.psi
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn chi_derivs(&self) -> &[Vec<f64>] {
        &self.chi_derivs
    }

    pub fn min_radicand(&self) -> f64 {
        self.min_radicand
    }

    pub fn samples(&self, m: Member) -> &[f64] {
        &self
            .samples
            .iter()
            .find(|(k, _)| *k == m)
            .expect("every member is sampled")
            .1
    }

    /// Exact evaluation of a member at `x`.
    pub fn eval(&self, m: Member, x: f64) -> f64 {
        match m {
            Member::Chi => self.chi.value(x),
            Member::ChiPrime => self.chi.derivative(1, x),
            Member::ChiSq => self.chi.value(x).powi(2),
            Member::ChiSqPrime => 2.0 * self.chi.value(x) * self.chi.derivative(1, x),
            Member::Psi => self.psi.value(x),
            Member::Phi => 1.0 - self.chi.value(x) - self.psi.value(x),
            Member::PhiTilde => clamped_sqrt(1.0 - self.chi.value(x).powi(2) - self.psi.value(x)),
            Member::Eta => clamped_sqrt(self.chi.value(x) * self.chi.derivative(1, x)),
            Member::SqrtChiPrime => clamped_sqrt(self.chi.derivative(1, x)),
        }
    }

    /// `order`-th derivative of a member, for members with smooth closed forms.
    pub fn derivative(&self, m: Member, order: usize, x: f64) -> Result<f64> {
        if order == 0 {
            return Ok(self.eval(m, x));
        }
        match m {
            Member::Chi => Ok(self.chi.derivative(order, x)),
            Member::ChiPrime => Ok(self.chi.derivative(order + 1, x)),
            Member::Psi => Ok(self.psi.derivative(order, x)),
            Member::Phi => Ok(-self.chi.derivative(order, x) - self.psi.derivative(order, x)),
            Member::ChiSq => Ok(chi_sq_derivative(&self.chi, order, x)),
            Member::ChiSqPrime => Ok(chi_sq_derivative(&self.chi, order + 1, x)),
            Member::PhiTilde | Member::Eta | Member::SqrtChiPrime => Err(
                Error::UnsupportedParameter(format!("derivatives of {m} are not tabulated")),
            ),
        }
    }

    /// Evaluates a member at the moving argument `x + v t`.
    pub fn shifted_eval(&self, m: Member, x: f64, v: f64, t: f64) -> f64 {
        self.eval(m, x + v * t)
    }

    /// Samples a member at `x_j - x0 + v t` for every grid point.
    pub fn sample_on_grid(&self, m: Member, grid: &Grid, x0: f64, v: f64, t: f64) -> Vec<f64> {
        (0..grid.n_points())
            .map(|j| self.shifted_eval(m, grid.x(j) - x0, v, t))
            .collect()
    }
}

/// Looks a member up by name and evaluates it at `x + v t`.
pub fn shifted_eval(w: &WeightFamily, name: &str, x: f64, v: f64, t: f64) -> Result<f64> {
    let m: Member = name.parse()?;
    Ok(w.shifted_eval(m, x, v, t))
}

fn chi_sq_derivative(chi: &Chi, order: usize, x: f64) -> f64 {
    let mut binom = 1.0;
    let mut acc = 0.0;
    for k in 0..=order {
        acc += binom * chi.derivative(k, x) * chi.derivative(order - k, x);
        binom = binom * (order - k) as f64 / (k + 1) as f64;
    }
    acc
}

fn clamped_sqrt(r: f64) -> f64 {
    if r < CLAMP_FLOOR {
        f64::NAN
    } else {
        r.max(0.0).sqrt()
    }
}

/// Evaluation points covering `[lo, hi]` with spacing at most `h`.
pub fn uniform_points(lo: f64, hi: f64, h: f64) -> Vec<f64> {
    let n = ((hi - lo) / h).ceil().max(1.0) as usize;
    let step = (hi - lo) / n as f64;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}
