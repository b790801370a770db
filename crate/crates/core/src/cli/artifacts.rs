use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{parse_scenario, CliError};
use crate::sim::{env_threads, run_scenario_with_threads, LogRecord, Scenario, GENERATOR_ID};

/// Column order of `log.csv`.
pub const LOG_COLUMNS: [&str; 36] = [
    "t",
    "x",
    "y",
    "phi",
    "vx",
    "vy",
    "vphi",
    "meas_x",
    "meas_y",
    "meas_phi",
    "est_x",
    "est_y",
    "est_phi",
    "w1",
    "w2",
    "w3",
    "w4",
    "w5",
    "w6",
    "w7",
    "dom_mode",
    "true_mode",
    "ls1",
    "ls2",
    "ls3",
    "ls4",
    "th1",
    "th2",
    "th3",
    "th4",
    "tau1",
    "tau2",
    "tau3",
    "tau4",
    "err_norm",
    "flags",
];

/// Contents of `header.json`: everything needed to reproduce `log.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub version: String,
    pub generator: String,
    pub seed: u64,
    pub scenario: Scenario,
}

impl RunHeader {
    pub fn new(scenario: &Scenario) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR_ID.to_string(),
            seed: scenario.run.seed,
            scenario: scenario.clone(),
        }
    }
}

/// Files written by one run.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub log: PathBuf,
    pub header: PathBuf,
    pub rows: usize,
}

fn float(out: &mut String, v: f64) {
    use std::fmt::Write;
    out.push(',');
    let _ = write!(out, "{v:.16e}");
}

/// Writes the header row and one row per record, floats with 17
/// significant digits.
pub fn write_log<W: Write>(mut w: W, log: &[LogRecord]) -> std::io::Result<()> {
    writeln!(w, "{}", LOG_COLUMNS.join(","))?;
    let mut line = String::with_capacity(1024);
    for r in log {
        line.clear();
        line.push_str(&format!("{:.16e}", r.t));
        let s = &r.state;
        for v in s.pose.iter().chain(s.velocity.iter()).chain(r.measurement.iter()) {
            float(&mut line, *v);
        }
        for v in r.estimate.iter().take(3).chain(r.weights.iter()) {
            float(&mut line, *v);
        }
        line.push_str(&format!(",{},{}", r.dominant_mode, r.true_mode));
        for v in r
            .input
            .sliders
            .iter()
            .chain(r.input.spools.iter())
            .chain(r.tensions.iter())
        {
            float(&mut line, *v);
        }
        float(&mut line, r.err_norm);
        line.push_str(&format!(",{}\n", r.flags));
        w.write_all(line.as_bytes())?;
    }
    w.flush()
}

/// `--seed` and `--duration` overrides plus an optional thread cap.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub duration: Option<f64>,
    /// Falls back to `CDPR_SIM_THREADS` when `None`.
    pub threads: Option<usize>,
}

/// Parses the scenario, runs it and writes `log.csv` and `header.json`
/// into `out`.
pub fn run_command(scenario: &Path, out: &Path, opts: &RunOptions) -> Result<RunArtifacts, CliError> {
    let mut sc = parse_scenario(scenario)?;
    if let Some(seed) = opts.seed {
        sc.run.seed = seed;
    }
    if let Some(d) = opts.duration {
        sc.run.duration = d;
    }
    sc.validate()?;
    log::info!("running {} s at seed {}", sc.run.duration, sc.run.seed);
    let log = run_scenario_with_threads(&sc, opts.threads.or_else(env_threads))?;

    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let log_path = out.join("log.csv");
    let file = std::fs::File::create(&log_path).map_err(|e| CliError::io(&log_path, e))?;
    write_log(std::io::BufWriter::new(file), &log).map_err(|e| CliError::io(&log_path, e))?;

    let header_path = out.join("header.json");
    let text = serde_json::to_string_pretty(&RunHeader::new(&sc)).expect("header serializes");
    std::fs::write(&header_path, text + "\n").map_err(|e| CliError::io(&header_path, e))?;
    Ok(RunArtifacts {
        log: log_path,
        header: header_path,
        rows: log.len(),
    })
}

/// Numeric columns of a log file.
#[derive(Clone, Debug)]
pub struct LogTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl LogTable {
    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::MissingColumn(name.to_string()))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn read_log(path: &Path) -> Result<LogTable, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        k => CliError::Log(format!("{k:?}")),
    })?;
    let columns: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Log(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Log(e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Log(format!("row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(LogTable { columns, rows })
}
