//! The mollifier profile `rho(z) = C exp(-beta / (1 - z^2))` on `(-1, 1)` and
//! the closed-form integrals needed to convolve it against ramps and steps.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

const NODES: usize = 24;
const PANELS: usize = 12;

/// Smooth, even, compactly supported bump with unit integral.
#[derive(Debug, Clone)]
pub struct Bump {
    beta: f64,
    norm: f64,
    rule: GaussLegendre,
}

impl Bump {
    /// `beta` controls sharpness; larger values concentrate the mass and speed
    /// up spectral decay of the convolved weights.
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidConfiguration(format!(
                "bump sharpness must be positive, got {beta}"
            )));
        }
        let rule = GaussLegendre::new(NODES);
        let mass = 2.0 * rule.composite(-1.0, 0.0, PANELS, |z| raw(beta, z));
        Ok(Self {
            beta,
            norm: 1.0 / mass,
            rule,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn value(&self, z: f64) -> f64 {
        self.norm * raw(self.beta, z)
    }

    /// `rho^{(order)}(z)`.
    pub fn derivative(&self, order: usize, z: f64) -> f64 {
        if z.abs() >= 1.0 {
            return 0.0;
        }
        let h0 = self.value(z);
        if order == 0 || h0 == 0.0 {
            return if order == 0 { h0 } else { 0.0 };
        }
        // rho = exp(g): h^{(n+1)} = sum_k C(n,k) g^{(k+1)} h^{(n-k)}.
        let g: Vec<f64> = (1..=order).map(|k| self.log_derivative(k, z)).collect();
        let mut h = vec![h0];
        for n in 0..order {
            let mut binom = 1.0;
            let mut acc = 0.0;
            for k in 0..=n {
                acc += binom * g[k] * h[n - k];
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
            h.push(acc);
        }
        h[order]
    }

    /// `g^{(k)}` for `g = -beta / (1 - z^2)`, `k >= 1`.
    fn log_derivative(&self, k: usize, z: f64) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let p = -((k + 1) as i32);
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        -0.5 * self.beta * fact * ((1.0 - z).powi(p) + sign * (1.0 + z).powi(p))
    }

    /// `R(z) = int_{-1}^{z} rho`.
    pub fn cumulative(&self, z: f64) -> f64 {
        if z <= -1.0 {
            0.0
        } else if z >= 1.0 {
            1.0
        } else if z > 0.0 {
            1.0 - self.cumulative(-z)
        } else {
            self.rule.composite(-1.0, z, PANELS, |t| self.value(t))
        }
    }

    /// `M(z) = int_{-1}^{z} t rho(t) dt`; even in `z`, zero outside `(-1, 1)`.
    pub fn first_moment(&self, z: f64) -> f64 {
        let z = -z.abs();
        if z <= -1.0 {
            0.0
        } else {
            self.rule
                .composite(-1.0, z, PANELS, |t| t * self.value(t))
        }
    }

    /// `G(z) = int (z - t)_+ rho(t) dt`, the profile convolved with a unit ramp.
    pub fn ramp(&self, z: f64) -> f64 {
        if z <= -1.0 {
            0.0
        } else if z >= 1.0 {
            z
        } else {
            z * self.cumulative(z) - self.first_moment(z)
        }
    }

    /// `int rho(t) cos(omega t) dt`.
    pub fn fourier(&self, omega: f64) -> f64 {
        let panels = PANELS.max((omega.abs() * 0.5).ceil() as usize);
        2.0 * self
            .rule
            .composite(0.0, 1.0, panels, |t| self.value(t) * (omega * t).cos())
    }
}

fn raw(beta: f64, z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        (-beta / (1.0 - z * z)).exp()
    }
}

/// A profile together with a length scale: `rho_mu(x) = rho(x / mu) / mu`.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    pub profile: Bump,
    pub scale: f64,
}

impl MollifierSpec {
    pub fn new(profile: Bump, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidConfiguration(format!(
                "mollifier scale must be positive, got {scale}"
            )));
        }
        Ok(Self { profile, scale })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.profile.value(x / self.scale) / self.scale
    }

    /// Fourier multiplier of convolution with `rho_mu`.
    pub fn symbol(&self, xi: f64) -> f64 {
        self.profile.fourier(self.scale * xi)
    }
}

pub const DEFAULT_SHARPNESS: f64 = 8.0;

impl Default for Bump {
    fn default() -> Self {
        Self::new(DEFAULT_SHARPNESS).expect("default sharpness is valid")
    }
}
