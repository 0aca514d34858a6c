//! Smooth cutoff weights built by mollifying a piecewise-linear ramp.

mod family;
mod profile;
mod verify;

pub use family::{
    build_chi, build_partition, shifted_eval, uniform_points, Chi, Member, Psi, SampledChi,
    WeightFamily, WeightParams, DEFAULT_MAX_ORDER,
};
pub use profile::{Bump, MollifierSpec, DEFAULT_SHARPNESS};
pub use verify::{
    family_for, sweep_params, verify_weight_properties, verify_with_order,
    widened_slope_scaled_bound_holds, PropertyCheck, WeightReport,
};
