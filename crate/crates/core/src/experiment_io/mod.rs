//! Configuration files, snapshots, reports and the command line.

pub mod cli;
mod config;
mod report;
mod snapshot;
mod verify;

pub use config::{
    load_config, parse_config, DerivedMetadata, ExperimentConfig, Format, GridSection,
    InitialSection, LadderSection, OutputSection, SolverSection, VerdictSection,
};
pub use report::{
    output_dir, write_conserved_csv, write_energy_csv, write_smoothing_csv, JsonlWriter,
    OUTPUT_DIR_VAR,
};
pub use snapshot::{read_snapshot, write_snapshot, Snapshot, HEADER_LEN, MAGIC, VERSION};
pub use verify::{ladder_triples, operator_suite, plateau_weight, unit_constant_triples, SuiteCheck};
