//! The sandwich operator `P_n(a)`, the bracket `[H D^a; f]` and the remainder
//! `R_n(a) = -[H D^a; f] - (P_n(a) - H P_n(a) H) / 2`.

use super::coeffs::{coefficient_table, is_admissible};
use crate::error::{Error, Result};
use crate::spectral::{apply_multiplier, hilbert, Field, Grid, MultiplierSymbol};
use crate::weights::{Bump, Chi, WeightParams};

/// A multiplication weight sampled on a grid together with its derivatives.
#[derive(Debug, Clone)]
pub struct SampledWeight {
    grid: Grid,
    /// `derivs[j][i] = f^{(j)}(x_i)`.
    derivs: Vec<Vec<f64>>,
}

impl SampledWeight {
    pub fn new(grid: &Grid, derivs: Vec<Vec<f64>>) -> Result<Self> {
        if derivs.is_empty() || derivs.iter().any(|d| d.len() != grid.n_points()) {
            return Err(Error::IncompatibleGrid(
                "weight derivative samples do not match the grid".into(),
            ));
        }
        if derivs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("non-finite weight sample".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            derivs,
        })
    }

    pub fn constant(grid: &Grid, c: f64, max_order: usize) -> Self {
        let n = grid.n_points();
        let mut derivs = vec![vec![0.0; n]; max_order + 1];
        derivs[0] = vec![c; n];
        Self {
            grid: grid.clone(),
            derivs,
        }
    }

    /// Samples `x -> f^{(j)}(x)` given a closure for each order.
    pub fn from_fn(grid: &Grid, max_order: usize, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let derivs = (0..=max_order)
            .map(|j| (0..grid.n_points()).map(|i| f(j, grid.x(i))).collect())
            .collect();
        Self::new(grid, derivs)
    }

    /// A plateau that rises like `chi_{eps,b}` around `-L/2` and falls like it
    /// around `L/2`; periodic on the box, so every derivative is smooth there.
    pub fn periodized_plateau(
        grid: &Grid,
        params: WeightParams,
        bump: &Bump,
        max_order: usize,
    ) -> Result<Self> {
        let l = grid.half_length();
        let WeightParams { epsilon, b } = params;
        if l < b - epsilon {
            return Err(Error::InvalidConfiguration(format!(
                "box half-length {l} too short for a plateau with b - eps = {}",
                b - epsilon
            )));
        }
        let chi = Chi::new(params, bump.clone());
        // Rise on [p + eps, p + b], fall on [q + eps, q + b]; both stay inside
        // the box, so f and all its derivatives vanish near x = +-L.
        let p = -0.5 * l - 0.5 * (b + epsilon);
        let q = p + l;
        Self::from_fn(grid, max_order, |j, x| {
            chi.derivative(j, x - p) - chi.derivative(j, x - q)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn max_order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn derivative(&self, order: usize) -> Result<&[f64]> {
        self.derivs.get(order).map(|v| v.as_slice()).ok_or_else(|| {
            Error::InvalidConfiguration(format!(
                "weight derivative of order {order} requested, {} stored",
                self.max_order()
            ))
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.derivs[0]
    }

    /// True when the samples are constant and every stored derivative is zero.
    pub fn is_constant(&self) -> bool {
        let v = &self.derivs[0];
        v.iter().all(|x| *x == v[0]) && self.derivs[1..].iter().flatten().all(|x| *x == 0.0)
    }

    pub fn as_field(&self) -> Result<Field> {
        Field::new(&self.grid, self.derivs[0].clone())
    }
}

/// `P_n(a)` data: exponent, order and coefficient table, attached to a weight.
#[derive(Debug, Clone)]
pub struct CommutatorExpansion {
    pub a: f64,
    pub mu: f64,
    pub order_n: usize,
    pub coeffs: Vec<f64>,
    pub weight: SampledWeight,
}

impl CommutatorExpansion {
    pub fn new(a: f64, order_n: usize, weight: SampledWeight) -> Result<Self> {
        if !(a >= 1.0) || !a.is_finite() {
            return Err(Error::InvalidConfiguration(format!("a must be >= 1, got {a}")));
        }
        if weight.max_order() < 2 * order_n + 1 {
            return Err(Error::InvalidConfiguration(format!(
                "order {order_n} needs weight derivatives up to {}, only {} stored",
                2 * order_n + 1,
                weight.max_order()
            )));
        }
        Ok(Self {
            a,
            mu: 0.5 * (a - 1.0),
            order_n,
            coeffs: coefficient_table(a, order_n),
            weight,
        })
    }
}

/// `D^s (g * D^s u)`.
fn sandwich(u: &Field, g: &[f64], s: f64) -> Result<Field> {
    if s == 0.0 {
        return u.mul_samples(g);
    }
    let d = MultiplierSymbol::riesz(u.grid(), s)?;
    let inner = apply_multiplier(u, &d)?.mul_samples(g)?;
    apply_multiplier(&inner, &d)
}

/// `D^sigma P_n(a) D^sigma u`; exponents `sigma + mu - j` must stay `>= 0`.
pub fn apply_p_sandwiched(exp: &CommutatorExpansion, sigma: f64, u: &Field) -> Result<Field> {
    exp.weight.grid.check_same(u.grid())?;
    let mut acc = Field::zeros(u.grid());
    for (j, c) in exp.coeffs.iter().enumerate() {
        let s = sigma + exp.mu - j as f64;
        if s < 0.0 {
            return Err(Error::UnsupportedExponent(format!(
                "negative Riesz exponent {s} in term j = {j} (mu = {}, sigma = {sigma})",
                exp.mu
            )));
        }
        if *c == 0.0 {
            continue;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let scale = exp.a * c * sign * 0.25f64.powi(j as i32);
        let term = sandwich(u, exp.weight.derivative(2 * j + 1)?, s)?;
        acc = acc.add(&term.scaled(scale)?)?;
    }
    Ok(acc)
}

/// `P_n(a) u`.
pub fn apply_p(exp: &CommutatorExpansion, u: &Field) -> Result<Field> {
    apply_p_sandwiched(exp, 0.0, u)
}

/// `[H D^a; f] u = H D^a (f u) - f H D^a u`.
pub fn apply_bracket_hda(f: &SampledWeight, a: f64, u: &Field) -> Result<Field> {
    f.grid.check_same(u.grid())?;
    let hda = MultiplierSymbol::hilbert(u.grid()).compose(&MultiplierSymbol::riesz(u.grid(), a)?)?;
    let fu = u.mul_samples(f.values())?;
    let left = apply_multiplier(&fu, &hda)?;
    let right = apply_multiplier(u, &hda)?.mul_samples(f.values())?;
    left.sub(&right)
}

/// `D^sigma R_n(a) D^sigma u`.
pub fn apply_r_sandwiched(exp: &CommutatorExpansion, sigma: f64, u: &Field) -> Result<Field> {
    let ds = MultiplierSymbol::riesz(u.grid(), sigma)?;
    let bracket = apply_multiplier(
        &apply_bracket_hda(&exp.weight, exp.a, &apply_multiplier(u, &ds)?)?,
        &ds,
    )?;
    let pu = apply_p_sandwiched(exp, sigma, u)?;
    let hph = hilbert(&apply_p_sandwiched(exp, sigma, &hilbert(u)?)?)?;
    let sym = pu.sub(&hph)?.scaled(0.5)?;
    bracket.scaled(-1.0)?.sub(&sym)
}

/// `R_n(a) u`.
pub fn apply_r(exp: &CommutatorExpansion, u: &Field) -> Result<Field> {
    apply_r_sandwiched(exp, 0.0, u)
}

/// Rejects `(n, a, sigma)` outside the admissible window.
pub fn require_admissible(exp: &CommutatorExpansion, sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !is_admissible(exp.order_n, exp.a, sigma) {
        return Err(Error::InvalidConfiguration(format!(
            "(n, a, sigma) = ({}, {}, {sigma}) violates 2n+1 <= a+2sigma <= 2n+3",
            exp.order_n, exp.a
        )));
    }
    Ok(())
}
