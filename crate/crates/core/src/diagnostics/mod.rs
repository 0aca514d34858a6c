//! Weighted-energy functionals, smoothing integrals, the regularity ladder and
//! propagation experiments.

mod energy;
mod experiment;
mod initial;
mod ladder;

pub use energy::{
    smoothing_integral, weighted_energy, window_family, DiagnosticRecord, DiagnosticWindow,
    StripSample, WindowWeight,
};
pub use experiment::{
    smooth_truncation, run_propagation_experiment, simulate, simulate_from,
    top_octave_energy, CheckStatus, ExperimentOutcome,
    ExperimentSpec, InitialData, LeftWindow, RunRecords, VerdictCheck,
};
pub use initial::{
    effective_regularity, mollify, one_sided_data, s_alpha, s_wellposed, GaussianBackground,
    OneSidedData, OneSidedProfile,
};
pub use ladder::{ladder_plan, Exponent, LadderCase, LadderPlan};
