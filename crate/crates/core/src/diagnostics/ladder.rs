//! The alpha-dependent schedule of regularity steps.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderCase {
    /// `2/(2k+1) <= alpha < 1/k`
    A,
    /// `1/(k+1) <= alpha < 2/(2k+1)`
    B,
}

impl fmt::Display for LadderCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LadderCase::A => "a",
            LadderCase::B => "b",
        })
    }
}

/// A measured derivative index: `d_x^j D^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub j: u32,
    pub s: f64,
}

impl Exponent {
    pub fn new(j: u32, s: f64) -> Self {
        Self { j, s }
    }

    pub fn total(&self) -> f64 {
        self.j as f64 + self.s
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{}D{}", self.j, self.s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderPlan {
    pub m: u32,
    pub alpha: f64,
    pub k: u32,
    pub case_tag: LadderCase,
    /// `m + alpha j / 2` for `j = 0 .. ceil(2/alpha) - 1`.
    pub step_exponents: Vec<f64>,
    pub final_exponent: f64,
    /// `2 + alpha k >= 3 - alpha/2`; meaningful in case (a) only.
    pub case_a_consistent: bool,
}

/// `ceil(x)` that treats values within rounding of an integer as that integer.
fn tolerant_ceil(x: f64) -> u32 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u32
    } else {
        x.ceil() as u32
    }
}

pub fn ladder_plan(alpha: f64, m: u32) -> Result<LadderPlan> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfiguration(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidConfiguration(format!("m >= 2 required, got {m}")));
    }
    let steps = tolerant_ceil(2.0 / alpha);
    // k is the integer with 1/(k+1) <= alpha < 1/k.
    let k = tolerant_ceil(1.0 / alpha) - 1;
    let kf = k as f64;
    let case_tag = if alpha >= 2.0 / (2.0 * kf + 1.0) - TIE {
        LadderCase::A
    } else {
        LadderCase::B
    };
    let m_f = m as f64;
    let step_exponents = (0..steps).map(|j| m_f + alpha * j as f64 / 2.0).collect();
    Ok(LadderPlan {
        m,
        alpha,
        k,
        case_tag,
        step_exponents,
        final_exponent: m_f + 1.0 - alpha / 2.0,
        case_a_consistent: 2.0 + alpha * kf >= 3.0 - alpha / 2.0 - TIE,
    })
}

impl LadderPlan {
    pub fn fractional_steps(&self) -> usize {
        self.step_exponents.len()
    }

    /// Step count implied by the case tag.
    pub fn case_step_count(&self) -> usize {
        match self.case_tag {
            LadderCase::A => 2 * self.k as usize + 1,
            LadderCase::B => 2 * self.k as usize + 2,
        }
    }

    pub fn last_rung(&self) -> f64 {
        *self.step_exponents.last().expect("at least two rungs")
    }

    /// Every measured index: the rungs as `d^m D^{alpha n/2}`, then the final
    /// `d^m D^{1 - alpha/2}`.
    pub fn exponents(&self) -> Vec<Exponent> {
        let m = self.m as f64;
        self.step_exponents
            .iter()
            .map(|e| Exponent::new(self.m, e - m))
            .chain(std::iter::once(Exponent::new(self.m, self.final_exponent - m)))
            .collect()
    }

    /// Plain-text table, one rung per line.
    pub fn table(&self) -> String {
        let mut out = format!(
            "alpha = {}  m = {}  k = {}  case = ({})  fractional steps = {}\n",
            self.alpha,
            self.m,
            self.k,
            self.case_tag,
            self.fractional_steps()
        );
        out.push_str("step  exponent\n");
        for (j, e) in self.step_exponents.iter().enumerate() {
            out.push_str(&format!("{j:>4}  {e:.6}\n"));
        }
        out.push_str(&format!("final {:.6}\n", self.final_exponent));
        out
    }
}
