use std::fmt;
use std::path::{Path, PathBuf};

use qiplab::layout::DEFAULT_QUBIT_CAP;
use qiplab::report::{Report, Tolerances};
use qiplab::Error;
use serde::Serialize;

/// Exit status for a failed run.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(Error::InfeasibleStage { .. })
            | Failure::Lib(Error::DimensionCapExceeded { .. })
            | Failure::Lib(Error::EnumerationInfeasible(_)) => 3,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(m) => write!(f, "io: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Flags shared by every subcommand.
pub struct Context {
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub cap: Option<usize>,
}

impl Context {
    pub fn new(seed: Option<u64>, tol: &[String], cap: Option<usize>) -> CliResult<Self> {
        let mut tolerances = Tolerances::default();
        for t in tol {
            tolerances.set_from_str(t).map_err(|e| Failure::Usage(e.to_string()))?;
        }
        Ok(Self { seed, tolerances, cap })
    }

    /// The seed, which randomized steps cannot run without.
    pub fn require_seed(&self, step: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| Failure::Usage(format!("--seed is required for {step}")))
    }

    pub fn cap(&self) -> usize {
        self.cap.unwrap_or(DEFAULT_QUBIT_CAP)
    }

    pub fn tol(&self, name: &str) -> f64 {
        self.tolerances.get(name)
    }

    pub fn report<T: Serialize>(&self, command: &str, inputs: &T) -> CliResult<Report> {
        let inputs = serde_json::to_value(inputs).map_err(|e| Failure::Io(e.to_string()))?;
        Ok(Report::new(command, inputs, self.seed, &self.tolerances))
    }
}

/// What a command produced.
pub struct Output {
    pub report: Report,
    pub csv: Option<String>,
}

impl From<Report> for Output {
    fn from(report: Report) -> Self {
        Self { report, csv: None }
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Writes the report and CSV. A curve without `--csv` prints its CSV to
/// stdout and the report only goes to `--out`.
pub fn emit(out: &Output, json_path: Option<&PathBuf>, csv_path: Option<&PathBuf>) -> CliResult<()> {
    let json = out.report.to_json();
    match (&out.csv, csv_path) {
        (Some(csv), Some(path)) => write_file(path, csv)?,
        (Some(csv), None) => print!("{csv}"),
        (None, _) => {}
    }
    match json_path {
        Some(path) => write_file(path, &json)?,
        None if out.csv.is_none() || csv_path.is_some() => print!("{json}"),
        None => {}
    }
    Ok(())
}
