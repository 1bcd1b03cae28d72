//! Declarative experiment runner.
//!
//! A scenario file names one experiment, sets its parameters (with units)
//! and optionally sweeps up to three of them. Grid points are evaluated on a
//! worker pool and written in grid order, so the CSV body depends only on
//! the scenario and the seed. Run metadata goes to a JSON sidecar.

pub mod config;
mod experiments;
pub mod units;

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{Issue, Point, ScenarioConfig};

use crate::error::Error;
use experiments::{Context, PointError};

/// Experiments available to scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    ReflectionScan,
    LongpulseMetrics,
    BandwidthScan,
    Robustness,
    CrosstalkScan,
    SourceCharacterize,
    ProtocolEval,
    TmSpectrum,
    WvmCrosstalk,
    RateTables,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::ReflectionScan,
        Experiment::LongpulseMetrics,
        Experiment::BandwidthScan,
        Experiment::Robustness,
        Experiment::CrosstalkScan,
        Experiment::SourceCharacterize,
        Experiment::ProtocolEval,
        Experiment::TmSpectrum,
        Experiment::WvmCrosstalk,
        Experiment::RateTables,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::ReflectionScan => "reflection_scan",
            Experiment::LongpulseMetrics => "longpulse_metrics",
            Experiment::BandwidthScan => "bandwidth_scan",
            Experiment::Robustness => "robustness",
            Experiment::CrosstalkScan => "crosstalk_scan",
            Experiment::SourceCharacterize => "source_characterize",
            Experiment::ProtocolEval => "protocol_eval",
            Experiment::TmSpectrum => "tm_spectrum",
            Experiment::WvmCrosstalk => "wvm_crosstalk",
            Experiment::RateTables => "rate_tables",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::ReflectionScan => "single-mode reflection r0, r1 versus probe detuning",
            Experiment::LongpulseMetrics => {
                "long-pulse fidelity and success, delays and optimal cavity length"
            }
            Experiment::BandwidthScan => "finite-bandwidth CAPS infidelity versus pulse width",
            Experiment::Robustness => "Monte-Carlo gate infidelity under parameter fluctuations",
            Experiment::CrosstalkScan => "time-multiplexing crosstalk, exact and approximate",
            Experiment::SourceCharacterize => {
                "photon source: P_gen, temporal-mode eigenvalues and purity"
            }
            Experiment::ProtocolEval => "memory loading and type-I/II/III entanglement end to end",
            Experiment::TmSpectrum => "transfer-matrix reflection of a multimode cavity",
            Experiment::WvmCrosstalk => {
                "wavelength-multiplexing crosstalk from random atom placement"
            }
            Experiment::RateTables => "time- and wavelength-multiplexed networking rates",
        }
    }

    pub fn schema(self) -> &'static [config::ParamSpec] {
        experiments::schema(self)
    }

    /// Output columns after the sweep-axis columns.
    pub fn columns(self) -> &'static [&'static str] {
        experiments::columns(self)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Harness failures, each tied to a process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid scenario:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Schema(Vec<Issue>),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Schema(_) => 2,
            HarnessError::Numeric(_) => 3,
            HarnessError::Io(_) => 4,
        }
    }
}

/// Options that override or complement the scenario file.
#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    /// Replaces the scenario seed.
    pub seed: Option<u64>,
    pub out_dir: PathBuf,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: None,
            seed: None,
            out_dir: PathBuf::from("results"),
        }
    }
}

/// One output row; failed points keep their axis values and an error message.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

/// Integers print as integers, everything else in shortest round-trip
/// scientific notation, so identical numbers always give identical bytes.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:e}")
    }
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = self.columns.clone();
        header.push("error".into());
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let mut rec: Vec<String> = r.values.iter().map(|&x| format_value(x)).collect();
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[i]).collect())
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub table: ResultTable,
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    /// Points that failed with a physics-limit or parameter error.
    pub soft_failures: usize,
    /// Points that failed numerically (non-convergence, drift, singular chains).
    pub hard_failures: usize,
    pub warnings: Vec<String>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.hard_failures > 0 {
            3
        } else {
            0
        }
    }
}

fn is_hard(e: &Error) -> bool {
    matches!(
        e,
        Error::NonConvergence { .. }
            | Error::TraceDrift { .. }
            | Error::NonHermitian(_)
            | Error::NotPositive { .. }
            | Error::SingularChain(_)
    )
}

/// Schema check plus physical-sanity warnings, without evaluating anything.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub experiment: Option<Experiment>,
    pub points: usize,
    pub issues: Vec<Issue>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            let name = self.experiment.map(|e| e.name()).unwrap_or("?");
            writeln!(
                f,
                "valid: {name}, {} grid point(s), {} warning(s)",
                self.points,
                self.warnings.len()
            )?;
        } else {
            writeln!(f, "invalid: {} error(s)", self.issues.len())?;
            for i in &self.issues {
                writeln!(f, "  error: {i}")?;
            }
        }
        for w in &self.warnings {
            writeln!(f, "  warning: {w}")?;
        }
        Ok(())
    }
}

fn collect_warnings(cfg: &ScenarioConfig, points: &[Point]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for p in points {
        for w in experiments::warnings(cfg.experiment, p) {
            if !out.contains(&w) {
                out.push(w);
            }
        }
    }
    out
}

pub fn validate_str(text: &str) -> ValidationReport {
    match ScenarioConfig::from_toml_str(text) {
        Ok(cfg) => {
            let points = cfg.points().unwrap_or_default();
            ValidationReport {
                experiment: Some(cfg.experiment),
                points: points.len(),
                issues: Vec::new(),
                warnings: collect_warnings(&cfg, &points),
            }
        }
        Err(issues) => ValidationReport {
            experiment: None,
            points: 0,
            issues,
            warnings: Vec::new(),
        },
    }
}

pub fn validate_file(path: &Path) -> Result<ValidationReport, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    Ok(validate_str(&text))
}

/// Evaluates every grid point and returns the table; nothing is written.
pub fn evaluate(
    cfg: &ScenarioConfig,
    seed: u64,
    workers: Option<usize>,
    ctx_dir: &Path,
    stem: &str,
) -> Result<(ResultTable, usize, usize, Vec<String>), HarnessError> {
    let points = cfg.points().map_err(HarnessError::Schema)?;
    let ctx = Context::new(seed, ctx_dir.to_path_buf(), stem.to_string());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| HarnessError::Io(format!("worker pool: {e}")))?;
    let outcomes: Vec<_> = pool.install(|| {
        points
            .par_iter()
            .map(|p| experiments::evaluate(cfg.experiment, p, &ctx))
            .collect()
    });

    let n_out = cfg.experiment.columns().len();
    let mut rows = Vec::with_capacity(points.len());
    let (mut soft, mut hard) = (0, 0);
    for (p, o) in points.iter().zip(outcomes) {
        let mut values = p.axes.clone();
        match o {
            Ok(v) => {
                values.extend(v);
                rows.push(Row {
                    values,
                    error: None,
                });
            }
            Err(PointError::Io(msg)) => return Err(HarnessError::Io(msg)),
            Err(PointError::Model(e)) => {
                if is_hard(&e) {
                    hard += 1;
                } else {
                    soft += 1;
                }
                values.extend(std::iter::repeat_n(f64::NAN, n_out));
                rows.push(Row {
                    values,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let mut columns: Vec<String> = cfg.axes.iter().map(|a| a.column()).collect();
    columns.extend(cfg.experiment.columns().iter().map(|c| c.to_string()));
    let mut side = ctx
        .side_files
        .into_inner()
        .expect("side-file list poisoned");
    side.sort();
    Ok((ResultTable { columns, rows }, soft, hard, side))
}

#[derive(Serialize)]
struct Meta<'a> {
    experiment: &'a str,
    config_sha256: String,
    code_version: &'static str,
    seed: u64,
    timestamp: String,
    workers: Option<usize>,
    rows: usize,
    grid_points: usize,
    soft_failures: usize,
    hard_failures: usize,
    columns: &'a [String],
    side_files: &'a [String],
    warnings: &'a [String],
    notes: Vec<String>,
}

/// Parses, evaluates and writes `<out_dir>/<stem>.csv` and `<stem>.meta.json`.
pub fn run_str(
    text: &str,
    default_stem: &str,
    opts: &RunOptions,
) -> Result<RunSummary, HarnessError> {
    let cfg = ScenarioConfig::from_toml_str(text).map_err(HarnessError::Schema)?;
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let stem = cfg
        .output
        .path
        .clone()
        .unwrap_or_else(|| default_stem.to_string());
    let csv_path = opts.out_dir.join(format!("{stem}.csv"));
    let meta_path = opts.out_dir.join(format!("{stem}.meta.json"));
    let io = |p: &Path, e: std::io::Error| HarnessError::Io(format!("{}: {e}", p.display()));
    if let Some(dir) = csv_path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    }

    let points = cfg.points().map_err(HarnessError::Schema)?;
    let warnings = collect_warnings(&cfg, &points);
    let (table, soft, hard, side) = evaluate(&cfg, seed, opts.workers, &opts.out_dir, &stem)?;
    std::fs::write(&csv_path, table.to_csv()).map_err(|e| io(&csv_path, e))?;

    let mut notes = Vec::new();
    if cfg.experiment == Experiment::RateTables {
        if let Some(rem) = table.column("remainder_atoms") {
            let idle = rem.iter().filter(|x| **x > 0.0).count();
            if idle > 0 {
                notes.push(format!(
                    "{idle} row(s) leave atoms idle after splitting across channels"
                ));
            }
            notes.push("dark_count_error is an upper bound, not an estimate".into());
        }
    }
    let meta = Meta {
        experiment: cfg.experiment.name(),
        config_sha256: Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect(),
        code_version: env!("CARGO_PKG_VERSION"),
        seed,
        timestamp: chrono::Utc::now().to_rfc3339(),
        workers: opts.workers,
        rows: table.rows.len(),
        grid_points: cfg.cardinality(),
        soft_failures: soft,
        hard_failures: hard,
        columns: &table.columns,
        side_files: &side,
        warnings: &warnings,
        notes,
    };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serialises");
    std::fs::write(&meta_path, json + "\n").map_err(|e| io(&meta_path, e))?;

    Ok(RunSummary {
        table,
        csv_path,
        meta_path,
        soft_failures: soft,
        hard_failures: hard,
        warnings,
    })
}

pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunSummary, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("result");
    run_str(&text, stem, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_experiment_has_a_schema_and_columns() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()), Some(e));
            assert!(!e.schema().is_empty());
            assert!(!e.columns().is_empty());
            let mut names: Vec<_> = e.schema().iter().map(|p| p.name).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), e.schema().len(), "{e}");
            // defaults alone must form a valid scenario
            let cfg = ScenarioConfig::from_toml_str(&format!("experiment = \"{}\"", e.name()));
            assert!(cfg.is_ok(), "{e}: {:?}", cfg.err());
        }
    }

    #[test]
    fn value_formatting_is_stable() {
        assert_eq!(format_value(200.0), "200");
        assert_eq!(format_value(2.5e-7), "2.5e-7");
        assert_eq!(format_value(f64::NAN), "NaN");
        assert_eq!(format_value(-0.0), "0");
    }

    #[test]
    fn warnings_for_short_pulses() {
        let r = validate_str(
            "experiment = \"bandwidth_scan\"\n[parameters]\nc_in = 100\nsigma_t = \"0.1 per_gamma\"\n",
        );
        assert!(r.is_valid());
        assert_eq!(r.warnings.len(), 1);
        assert!(r.warnings[0].contains("pulse-width criterion"));
        let ok = validate_str(
            "experiment = \"bandwidth_scan\"\n[parameters]\nsigma_t = \"2 per_gamma\"\n",
        );
        assert!(ok.is_valid() && ok.warnings.is_empty());
    }
}
