//! Sectioned TOML experiment configuration.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    s_alpha, s_wellposed, DiagnosticWindow, ExperimentSpec, GaussianBackground, InitialData,
    LeftWindow, OneSidedProfile,
};
use crate::error::{ConstraintViolation, Error, Result};
use crate::solver::{Scheme, SolverConfig};
use crate::spectral::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub half_length: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "yes")]
    pub nonlinear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSection {
    Gaussian {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mollifier: Option<f64>,
    },
    OneSided {
        gamma: f64,
        x_s: f64,
        amplitude: f64,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        background: Option<GaussianBackground>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mollifier: Option<f64>,
    },
}

impl InitialSection {
    fn data(&self) -> InitialData {
        match *self {
            InitialSection::Gaussian { amplitude, center, width, .. } => {
                InitialData::Gaussian(GaussianBackground { amplitude, center, width })
            }
            InitialSection::OneSided { gamma, x_s, amplitude, radius, background, .. } => {
                InitialData::OneSided(OneSidedProfile { gamma, x_s, amplitude, radius, background })
            }
        }
    }

    fn mollifier(&self) -> Option<f64> {
        match *self {
            InitialSection::Gaussian { mollifier, .. } | InitialSection::OneSided { mollifier, .. } => mollifier,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    pub m: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

fn default_cadence() -> u64 {
    50
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Jsonl]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Diagnostic samples after `t = 0`.
    #[serde(default = "default_cadence")]
    pub cadence: u64,
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_kappa() -> f64 {
    50.0
}
fn ten_percent() -> f64 {
    0.1
}
fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictSection {
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "ten_percent")]
    pub refinement_tolerance: f64,
    #[serde(default = "half")]
    pub left_retention: f64,
    /// Scale of the mollified control run; none disables it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control_mu: Option<f64>,
    #[serde(default = "ten_percent")]
    pub control_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_window: Option<LeftWindow>,
}

impl Default for VerdictSection {
    fn default() -> Self {
        Self {
            kappa: default_kappa(),
            refinement_tolerance: ten_percent(),
            left_retention: half(),
            control_mu: None,
            control_tolerance: ten_percent(),
            left_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub initial_data: InitialSection,
    #[serde(default)]
    pub windows: Vec<DiagnosticWindow>,
    pub ladder: LadderSection,
    pub output: OutputSection,
    #[serde(default)]
    pub verdict: VerdictSection,
}

/// Regularity thresholds implied by `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedMetadata {
    pub s_alpha: f64,
    pub s_wellposed: f64,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        Error::Parse { line, column, message: e.message().to_string() }
    })?;
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Constraint(v))
    }
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn derived(&self) -> DerivedMetadata {
        DerivedMetadata { s_alpha: s_alpha(self.alpha), s_wellposed: s_wellposed(self.alpha) }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut c = SolverConfig::new(self.alpha, self.solver.dt, self.solver.t_final);
        c.scheme = self.solver.scheme;
        c.dealias = self.solver.dealias;
        c.nonlinear = self.solver.nonlinear;
        c
    }

    /// Every violated rule, not just the first.
    pub fn violations(&self) -> Vec<ConstraintViolation> {
        let mut v = Vec::new();
        let a = self.alpha;
        if !(a > 0.0 && a < 1.0) {
            v.push(ConstraintViolation::new("0 < α < 1", format!("alpha = {a}")));
        }
        let n = self.grid.n_points;
        if n < 8 || !n.is_multiple_of(2) {
            v.push(ConstraintViolation::new("N even, N ≥ 8", format!("n_points = {n}")));
        }
        if !(self.grid.half_length > 0.0 && self.grid.half_length.is_finite()) {
            v.push(ConstraintViolation::new("L > 0", format!("half_length = {}", self.grid.half_length)));
        }
        let (dt, t) = (self.solver.dt, self.solver.t_final);
        if !(dt > 0.0 && t > 0.0 && dt.is_finite() && t.is_finite()) {
            v.push(ConstraintViolation::new("dt > 0, T > 0", format!("dt = {dt}, t_final = {t}")));
        } else {
            match self.solver_config().total_steps() {
                Ok(steps) => {
                    let c = self.output.cadence;
                    if c == 0 || steps % c != 0 {
                        v.push(ConstraintViolation::new(
                            "outputs divide steps",
                            format!("{c} outputs, {steps} steps"),
                        ));
                    }
                }
                Err(e) => v.push(ConstraintViolation::new("dt divides T", e.to_string())),
            }
        }
        if self.ladder.m < 2 {
            v.push(ConstraintViolation::new("m ≥ 2", format!("m = {}", self.ladder.m)));
        }
        for w in &self.windows {
            v.extend(w.violations());
        }
        if let (InitialData::OneSided(p), true) = (self.initial_data.data(), a > 0.0 && a < 1.0) {
            v.extend(p.violations(self.ladder.m, a));
        }
        if let InitialSection::Gaussian { width, .. } = self.initial_data {
            if !(width > 0.0) {
                v.push(ConstraintViolation::new("width > 0", format!("width = {width}")));
            }
        }
        for (name, mu) in [("μ > 0", self.initial_data.mollifier()), ("control μ > 0", self.verdict.control_mu)] {
            if let Some(mu) = mu {
                if !(mu > 0.0) {
                    v.push(ConstraintViolation::new(name, format!("mu = {mu}")));
                }
            }
        }
        if let Some(l) = &self.verdict.left_window {
            if !(l.epsilon > 0.0 && l.b >= 5.0 * l.epsilon) {
                v.push(ConstraintViolation::new(
                    "b ≥ 5ε",
                    format!("left window epsilon = {}, b = {}", l.epsilon, l.b),
                ));
            }
        }
        v
    }

    pub fn to_spec(&self) -> Result<ExperimentSpec> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(Error::Constraint(v));
        }
        let initial = self.initial_data.data();
        let left_window = self.verdict.left_window.or(match initial {
            InitialData::OneSided(p) => Some(LeftWindow { edge: p.x_s + p.radius, epsilon: 1.0, b: 5.0 }),
            InitialData::Gaussian(_) => None,
        });
        Ok(ExperimentSpec {
            alpha: self.alpha,
            grid: Grid::new(self.grid.n_points, self.grid.half_length)?,
            solver: self.solver_config(),
            initial,
            mollifier: self.initial_data.mollifier(),
            windows: self.windows.clone(),
            m: self.ladder.m,
            outputs: self.output.cadence,
            kappa: self.verdict.kappa,
            refinement_tolerance: self.verdict.refinement_tolerance,
            left_window,
            left_retention: self.verdict.left_retention,
            control_mu: self.verdict.control_mu,
            control_tolerance: self.verdict.control_tolerance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = r#"
alpha = 0.75

[grid]
n_points = 2048
half_length = 94.24777960769379

[solver]
dt = 0.01
t_final = 1.0

[initial_data]
kind = "gaussian"
amplitude = 0.5
width = 3.0

[[windows]]
x0 = 0.0
epsilon = 0.5
b = 2.5
tau = 2.5
v = 1.0

[ladder]
m = 2

[output]
directory = "out"
"#;

    #[test]
    fn minimal_config_is_accepted() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.grid.n_points, 2048);
        assert_eq!(c.output.cadence, 50);
        assert_eq!(c.solver.scheme, Scheme::Etdrk4);
        assert!((c.derived().s_alpha - 1.625).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_identity() {
        let c = parse_config(MINIMAL).unwrap();
        let back = parse_config(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    fn rules(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(Error::Constraint(v)) => v.into_iter().map(|c| c.rule).collect(),
            other => panic!("expected constraint error, got {other:?}"),
        }
    }

    #[test]
    fn narrow_strip_is_rejected() {
        assert_eq!(rules(&MINIMAL.replace("tau = 2.5", "tau = 1.5")), vec!["τ > 4ε"]);
    }

    #[test]
    fn short_plateau_is_rejected() {
        assert_eq!(rules(&MINIMAL.replace("b = 2.5", "b = 2.0")), vec!["b ≥ 5ε"]);
    }

    #[test]
    fn all_violations_are_listed() {
        let text = MINIMAL
            .replace("b = 2.5", "b = 2.0")
            .replace("tau = 2.5", "tau = 1.0")
            .replace("alpha = 0.75", "alpha = 1.5");
        assert_eq!(rules(&text), vec!["0 < α < 1", "b ≥ 5ε", "τ > 4ε"]);
    }

    #[test]
    fn parse_errors_carry_position() {
        let text = MINIMAL.replace("n_points = 2048", "n_points = = 2048");
        match parse_config(&text) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 5);
                assert!(column > 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("[ladder]\nm = 2", "[ladder]\nm = 2\nn = 3");
        assert!(matches!(parse_config(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn one_sided_gamma_is_checked() {
        let text = MINIMAL.replace(
            "kind = \"gaussian\"\namplitude = 0.5\nwidth = 3.0",
            "kind = \"one_sided\"\ngamma = 1.0\nx_s = -10.0\namplitude = 0.1\nradius = 4.0",
        );
        assert_eq!(rules(&text), vec!["γ + 1/2 > s_α"]);
    }
}
