//! Commutator expansion of `[H D^a; f]`, its remainder bound, and numerical
//! probes of the auxiliary inequalities.

mod bound;
mod coeffs;
pub mod ensemble;
mod expansion;
mod probes;

pub use bound::{check_remainder_bound, rhs_constant, BoundCheckSpec, RemainderReport, RATIO_SLACK};
pub use coeffs::{admissible_n, c_coeff, coefficient_table, is_admissible};
pub use expansion::{
    apply_bracket_hda, apply_p, apply_p_sandwiched, apply_r, apply_r_sandwiched,
    require_admissible, CommutatorExpansion, SampledWeight,
};

pub use probes::{gn_theta, inequality_probe, EnsembleSpec, Probe, ProbeReport};
