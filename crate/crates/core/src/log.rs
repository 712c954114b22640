//! Episode logs: one CSV row per simulated day preceded by `# key = value`
//! header lines holding the configuration snapshot.
//!
//! Columns, in order: `day`, the five weather inputs of that day, the nine
//! soil and plant observations after the day's update, the applied `fert`
//! and `irrig`, the day's `reward` and the estimated yield to date `yld`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::{CropState, SoilState};
use crate::environment::Action;
use crate::num::Scalar;
use crate::weather::WeatherDay;

pub const LOG_COLUMNS: [&str; 19] = [
    "day", "t_mean", "precip", "ref_et", "solar", "vapor", "e_a", "wb_cum", "rcn", "lai", "n_up",
    "dn", "n_strs", "t_strs", "w_strs", "fert", "irrig", "reward", "yld",
];

#[derive(Debug, Error)]
pub enum LogError {
    #[error("episode log is empty")]
    Empty,
    #[error("cannot access episode log {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("episode log line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// One completed day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRecord<T> {
    pub day: usize,
    pub weather: WeatherDay<T>,
    pub crop: CropState<T>,
    pub soil: SoilState<T>,
    pub action: Action<T>,
    pub reward: T,
    pub yld: T,
}

impl<T: Scalar> LogRecord<T> {
    /// Values in [`LOG_COLUMNS`] order, `day` included as a float.
    pub fn values(&self) -> [T; 19] {
        let w = &self.weather;
        let c = &self.crop;
        let s = &self.soil;
        [
            T::from_usize(self.day).unwrap_or_else(T::nan),
            w.t_mean,
            w.precip,
            w.ref_et,
            w.solar,
            w.vapor,
            c.e_a,
            s.wb_cum,
            s.rcn,
            c.lai,
            s.n_up,
            s.dn,
            c.n_strs,
            c.t_strs,
            c.w_strs,
            self.action.fert,
            self.action.irrig,
            self.reward,
            self.yld,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EpisodeLog<T> {
    pub header: Vec<(String, String)>,
    pub seed: u64,
    pub records: Vec<LogRecord<T>>,
}

/// A log read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedLog<T> {
    pub header: Vec<(String, String)>,
    pub rows: Vec<[T; 19]>,
}

impl<T: Scalar> EpisodeLog<T> {
    pub fn new(header: Vec<(String, String)>, seed: u64) -> Self {
        Self {
            header,
            seed,
            records: Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), LogError> {
        save_log(self, path)
    }

    pub fn total_reward(&self) -> T {
        self.records.iter().map(|r| r.reward).sum()
    }
}

pub fn save_log<T: Scalar>(log: &EpisodeLog<T>, path: &Path) -> Result<(), LogError> {
    if log.records.is_empty() {
        return Err(LogError::Empty);
    }
    let io_err = |source| LogError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for (k, v) in &log.header {
        writeln!(out, "# {k} = {v}").map_err(io_err)?;
    }
    writeln!(out, "{}", LOG_COLUMNS.join(",")).map_err(io_err)?;
    for rec in &log.records {
        let vals = rec.values();
        write!(out, "{}", rec.day).map_err(io_err)?;
        for v in &vals[1..] {
            write!(out, ",{v}").map_err(io_err)?;
        }
        writeln!(out).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn load_log<T: Scalar>(path: &Path) -> Result<LoadedLog<T>, LogError> {
    let io_err = |source| LogError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut header = Vec::new();
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let lineno = i + 1;
        let malformed = |message: String| LogError::Malformed {
            line: lineno,
            message,
        };
        if let Some(rest) = line.strip_prefix('#') {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| malformed("header line without `=`".into()))?;
            header.push((k.trim().to_string(), v.trim().to_string()));
            continue;
        }
        if !seen_columns {
            if line != LOG_COLUMNS.join(",") {
                return Err(malformed(format!("unexpected column header `{line}`")));
            }
            seen_columns = true;
            continue;
        }
        let mut row = [T::zero(); 19];
        let mut n = 0;
        for (k, field) in line.split(',').enumerate() {
            if k >= 19 {
                return Err(malformed("too many fields".into()));
            }
            row[k] = field
                .parse::<T>()
                .map_err(|_| malformed(format!("`{field}` in column `{}` is not a number", LOG_COLUMNS[k])))?;
            n += 1;
        }
        if n != 19 {
            return Err(malformed(format!("expected 19 fields, found {n}")));
        }
        rows.push(row);
    }
    Ok(LoadedLog { header, rows })
}
