//! The `fkdv` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use super::config::{load_config, ExperimentConfig, Format};
use super::report::{output_dir, write_conserved_csv, write_energy_csv, write_smoothing_csv, JsonlWriter};
use super::snapshot::{read_snapshot, write_snapshot};
use super::verify::operator_suite;
use crate::commutators::{inequality_probe, EnsembleSpec, Probe, ProbeReport};
use crate::diagnostics::{ladder_plan, run_propagation_experiment, simulate_from, RunRecords};
use crate::error::Error;
use crate::spectral::Grid;
use crate::weights::{
    family_for, sweep_params, verify_weight_properties, widened_slope_scaled_bound_holds, Bump,
    WeightParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

const DEFAULT_OUT: &str = "fkdv-output";

#[derive(Debug, Parser)]
#[command(name = "fkdv", version, about = "Fractional KdV laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a propagation experiment described by a TOML file.
    Run { config: PathBuf },
    /// Check multiplier operators and the commutator remainder bound.
    VerifyOperators {
        /// Grid size for the remainder-bound ensembles.
        #[arg(long, default_value_t = 1024)]
        n_points: usize,
    },
    /// Check the weight-family properties.
    VerifyWeights {
        /// Check the whole (epsilon, b) sweep instead of one window.
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 2.5)]
        b: f64,
    },
    /// Print the regularity ladder for `alpha` and `m`.
    Ladder { alpha: f64, m: u32 },
    /// Estimate the constant of an auxiliary inequality.
    Probe {
        /// calderon, leibniz, kato-ponce, gagliardo-nirenberg or disjoint-support
        inequality: String,
        #[arg(long, default_value_t = 512)]
        n_points: usize,
        #[arg(long, default_value_t = 20)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Continue a run from a snapshot up to the configured final time.
    Resume { snapshot: PathBuf, config: PathBuf },
}

/// Configuration-stage failures exit with 2, everything later with 3.
enum Failure {
    Config(Error),
    Runtime(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn error(&self) -> &Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

trait Stage<T> {
    fn config(self) -> std::result::Result<T, Failure>;
    fn runtime(self) -> std::result::Result<T, Failure>;
}

impl<T> Stage<T> for crate::error::Result<T> {
    fn config(self) -> std::result::Result<T, Failure> {
        self.map_err(Failure::Config)
    }
    fn runtime(self) -> std::result::Result<T, Failure> {
        self.map_err(Failure::Runtime)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::VerifyOperators { n_points } => cmd_verify_operators(n_points),
        Command::VerifyWeights { sweep, epsilon, b } => cmd_verify_weights(sweep, epsilon, b),
        Command::Ladder { alpha, m } => cmd_ladder(alpha, m),
        Command::Probe { inequality, n_points, size, seed } => cmd_probe(&inequality, n_points, size, seed),
        Command::Resume { snapshot, config } => cmd_resume(&snapshot, &config),
    };
    match result {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(f) => {
            eprintln!("error: {}", f.error());
            f.code()
        }
    }
}

fn prepare_dir(configured: &Path) -> std::result::Result<PathBuf, Failure> {
    let dir = output_dir(configured);
    fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(e.into()))?;
    Ok(dir)
}

#[derive(Serialize)]
struct RecordSummary<'a> {
    kind: &'static str,
    label: String,
    initial_energy: Option<f64>,
    sup_energy: f64,
    smoothing_accum: f64,
    hilbert_twin: f64,
    sharp_strip_accum: f64,
    run: &'a str,
}

fn write_run_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    main: &RunRecords,
    lines: &mut Lines,
) -> crate::error::Result<()> {
    if cfg.output.formats.contains(&Format::Csv) {
        write_energy_csv(&dir.join("energy.csv"), &main.records)?;
        write_smoothing_csv(&dir.join("smoothing.csv"), &main.records)?;
        if let Some(s) = &main.final_state {
            write_conserved_csv(&dir.join("conserved.csv"), &s.conserved_log)?;
        }
    }
    for r in &main.records {
        lines.write(&RecordSummary {
            kind: "record",
            label: r.label(),
            initial_energy: r.initial_energy(),
            sup_energy: r.sup_energy(),
            smoothing_accum: r.smoothing_accum,
            hilbert_twin: r.hilbert_twin,
            sharp_strip_accum: r.sharp_accum,
            run: "main",
        })?;
    }
    if let Some(s) = &main.final_state {
        write_snapshot(s, cfg.alpha, &dir.join("final.fkdv"))?;
    }
    Ok(())
}

/// Report lines; dropped when the configuration disables JSON-lines output.
struct Lines(Option<JsonlWriter>);

impl Lines {
    fn write<T: Serialize>(&mut self, value: &T) -> crate::error::Result<()> {
        match &mut self.0 {
            Some(w) => w.write(value),
            None => Ok(()),
        }
    }

    fn finish(self) -> crate::error::Result<()> {
        self.0.map_or(Ok(()), JsonlWriter::finish)
    }
}

fn jsonl(dir: &Path, cfg: Option<&ExperimentConfig>, name: &str) -> std::result::Result<Lines, Failure> {
    if cfg.is_none_or(|c| c.output.formats.contains(&Format::Jsonl)) {
        Ok(Lines(Some(JsonlWriter::create(&dir.join(name)).runtime()?)))
    } else {
        Ok(Lines(None))
    }
}

fn cmd_run(path: &Path) -> Outcome {
    let cfg = load_config(path).config()?;
    let spec = cfg.to_spec().config()?;
    let dir = prepare_dir(&cfg.output.directory)?;
    let outcome = run_propagation_experiment(&spec).runtime()?;
    let mut lines = jsonl(&dir, Some(&cfg), "report.jsonl")?;
    lines
        .write(&serde_json::json!({"kind": "config", "derived": cfg.derived(), "plan": outcome.plan}))
        .runtime()?;
    write_run_outputs(&dir, &cfg, &outcome.main, &mut lines).runtime()?;
    for c in &outcome.checks {
        lines.write(&serde_json::json!({"kind": "check", "check": c})).runtime()?;
        println!("{:<26} {:?}  value {:.4e}  threshold {}", c.name, c.status, c.value, c.threshold);
    }
    lines.write(&serde_json::json!({"kind": "verdict", "pass": outcome.pass})).runtime()?;
    lines.finish().runtime()?;
    println!("verdict: {}", if outcome.pass { "PASS" } else { "FAIL" });
    Ok(outcome.pass)
}

fn cmd_resume(snapshot: &Path, config: &Path) -> Outcome {
    let cfg = load_config(config).config()?;
    let snap = read_snapshot(snapshot).config()?;
    if snap.n_points != cfg.grid.n_points || snap.half_length != cfg.grid.half_length || snap.alpha != cfg.alpha {
        return Err(Failure::Config(Error::IncompatibleGrid(format!(
            "snapshot (N = {}, L = {}, alpha = {}) does not match the configuration",
            snap.n_points, snap.half_length, snap.alpha
        ))));
    }
    let spec = cfg.to_spec().config()?;
    let state = snap.to_state().config()?;
    let dir = prepare_dir(&cfg.output.directory)?;
    let plan = ladder_plan(spec.alpha, spec.m).config()?;
    let left = spec.left_window.as_ref().filter(|_| spec.initial.is_rough());
    let records = simulate_from(state, &spec.solver, spec.outputs, &spec.windows, &plan.exponents(), left).runtime()?;
    let mut lines = jsonl(&dir, Some(&cfg), "report.jsonl")?;
    lines
        .write(&serde_json::json!({"kind": "resume", "from_t": snap.t, "from_step": snap.step_count, "to_t": records.final_t}))
        .runtime()?;
    write_run_outputs(&dir, &cfg, &records, &mut lines).runtime()?;
    lines.finish().runtime()?;
    println!("resumed from t = {} to t = {}", snap.t, records.final_t);
    Ok(true)
}

fn cmd_verify_operators(n_points: usize) -> Outcome {
    let dir = prepare_dir(Path::new(DEFAULT_OUT))?;
    let checks = operator_suite(n_points).runtime()?;
    let mut lines = jsonl(&dir, None, "operators.jsonl")?;
    let mut ok = true;
    for c in &checks {
        lines.write(c).runtime()?;
        let tag = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "RECORDED",
        };
        ok &= c.pass != Some(false);
        println!("{tag:<8} {:<36} {:.4e} (tolerance {:e})", c.name, c.value, c.tolerance);
    }
    lines.finish().runtime()?;
    Ok(ok)
}

fn cmd_verify_weights(sweep: bool, epsilon: f64, b: f64) -> Outcome {
    let params = if sweep {
        sweep_params()
    } else {
        vec![WeightParams::new(epsilon, b).config()?]
    };
    let dir = prepare_dir(Path::new(DEFAULT_OUT))?;
    let mut lines = jsonl(&dir, None, "weights.jsonl")?;
    let bump = Bump::default();
    let mut ok = true;
    for p in params {
        let fam = family_for(p, &bump).runtime()?;
        let report = verify_weight_properties(&fam);
        lines.write(&report).runtime()?;
        let failed: Vec<_> = report.failed().iter().map(|c| c.id.clone()).collect();
        println!(
            "eps = {:<5} b = {:<5} {}  c1 = {:.3}  c2 = {:.3}  slope(eps/3, b+eps) max {:.4} (scaled bound {})",
            p.epsilon,
            p.b,
            if report.pass { "PASS".to_string() } else { format!("FAIL {failed:?}") },
            report.c1,
            report.c2,
            report.widened_slope_max,
            if widened_slope_scaled_bound_holds(&report) { "holds" } else { "fails" },
        );
        ok &= report.pass;
    }
    lines.finish().runtime()?;
    Ok(ok)
}

fn cmd_ladder(alpha: f64, m: u32) -> Outcome {
    let plan = ladder_plan(alpha, m).config()?;
    print!("{}", plan.table());
    Ok(true)
}

fn parse_probe(name: &str) -> crate::error::Result<(Probe, f64)> {
    let inf = f64::INFINITY;
    // (probe, half-length of the box)
    Ok(match name {
        "calderon" => (Probe::Calderon { l: 1, m: 1 }, 10.0),
        "leibniz" => (Probe::Leibniz { s: 0.5, p: 2.0, p1: inf, p2: 2.0, p3: inf, p4: 2.0 }, 10.0),
        "kato-ponce" => (Probe::KatoPonce { s: 1.5, p: 2.0, p1: 2.0, p2: inf, p3: inf, p4: 2.0 }, 10.0),
        "gagliardo-nirenberg" => (Probe::GagliardoNirenberg { a: 0.5, b: 1.5, r: 2.0 }, 10.0),
        "disjoint-support" => (Probe::DisjointSupport { m: 2, s: 0.7, p: 2.0 }, 8.0),
        other => return Err(Error::Lookup(other.to_string())),
    })
}

#[derive(Serialize)]
struct ProbeLine<'a> {
    report: &'a ProbeReport,
    refined_constant: f64,
    relative_change: f64,
    stable: bool,
}

/// Runs a probe at `n` and `2n` points; passes when the constant is finite
/// and moves by at most 20%.
pub fn probe_with_refinement(name: &str, n: usize, size: usize, seed: u64) -> crate::error::Result<(ProbeReport, ProbeReport)> {
    let (probe, l) = parse_probe(name)?;
    let ens = |n| -> crate::error::Result<EnsembleSpec> {
        Ok(EnsembleSpec { grid: Grid::new(n, l)?, size, xi_max: 4.0, seed })
    };
    Ok((inequality_probe(&probe, &ens(n)?)?, inequality_probe(&probe, &ens(2 * n)?)?))
}

fn cmd_probe(name: &str, n: usize, size: usize, seed: u64) -> Outcome {
    parse_probe(name).config()?;
    let (coarse, fine) = probe_with_refinement(name, n, size, seed).config()?;
    let (a, b) = (coarse.measured_best_constant, fine.measured_best_constant);
    let change = (a - b).abs() / b.abs();
    let stable = a.is_finite() && b.is_finite() && change <= 0.2;
    let dir = prepare_dir(Path::new(DEFAULT_OUT))?;
    let mut lines = jsonl(&dir, None, "probes.jsonl")?;
    lines
        .write(&ProbeLine { report: &coarse, refined_constant: b, relative_change: change, stable })
        .runtime()?;
    lines.finish().runtime()?;
    println!(
        "{name}: best constant {a:.6} (N = {n}), {b:.6} (N = {}), change {:.2}%  {}",
        2 * n,
        100.0 * change,
        if stable { "stable" } else { "UNSTABLE" }
    );
    Ok(stable)
}
