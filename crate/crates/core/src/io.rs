//! JSON file schemas. Complex numbers are `[re, im]` pairs. Every schema is
//! validated on conversion so malformed input never reaches the numerics.

use crate::error::{invalid, Error, Result};
use crate::rigid::{Configuration, Position};
use crate::shape::ShapeSpec;
use crate::spectral::MomentTable;
use crate::track::TimeSeriesMeasurement;
use crate::Complex64;
use serde::{Deserialize, Serialize};

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `{"c1": [re, im], "tail": [[re, im], ...]}` with `tail[j] = c₋(j+1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeFile {
    pub c1: Complex64,
    #[serde(default)]
    pub tail: Vec<Complex64>,
}

impl TryFrom<ShapeFile> for ShapeSpec {
    type Error = Error;

    fn try_from(f: ShapeFile) -> Result<ShapeSpec> {
        ShapeSpec::new(f.c1, f.tail)
    }
}

impl From<&ShapeSpec> for ShapeFile {
    fn from(s: &ShapeSpec) -> Self {
        Self {
            c1: s.c1(),
            tail: s.tail().to_vec(),
        }
    }
}

/// `{"alpha": float, "r": [re, im], "omega": float, "w0": [re, im]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub alpha: f64,
    pub r: Complex64,
    pub omega: f64,
    pub w0: Complex64,
}

impl TryFrom<ConfigFile> for Configuration {
    type Error = Error;

    fn try_from(f: ConfigFile) -> Result<Configuration> {
        if !(f.alpha.is_finite() && f.omega.is_finite() && finite(f.r) && finite(f.w0)) {
            return invalid("configuration entries must be finite");
        }
        Ok(Configuration::new(f.alpha, f.r, f.omega, f.w0))
    }
}

impl From<&Configuration> for ConfigFile {
    fn from(c: &Configuration) -> Self {
        Self {
            alpha: c.alpha(),
            r: c.r(),
            omega: c.omega(),
            w0: c.w0(),
        }
    }
}

/// `{"alpha": float, "r": [re, im]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseFile {
    pub alpha: f64,
    pub r: Complex64,
}

impl TryFrom<PoseFile> for Position {
    type Error = Error;

    fn try_from(f: PoseFile) -> Result<Position> {
        if !(f.alpha.is_finite() && finite(f.r)) {
            return invalid("pose entries must be finite");
        }
        Ok(Position::new(f.alpha, f.r))
    }
}

/// Checks a moment table read from a file.
pub fn validate_table(t: &MomentTable) -> Result<()> {
    if t.is_empty() {
        return invalid("moment table has no entries");
    }
    if !finite(t.nu) || !t.lambdas.iter().all(|&l| finite(l)) {
        return invalid("moment table entries must be finite");
    }
    Ok(())
}

/// A measurement file: one table `{"nu": .., "lambdas": ..}` or an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementFile {
    One(MomentTable),
    Many(Vec<MomentTable>),
}

impl MeasurementFile {
    pub fn into_tables(self) -> Result<Vec<MomentTable>> {
        let tables = match self {
            MeasurementFile::One(t) => vec![t],
            MeasurementFile::Many(v) => v,
        };
        if tables.is_empty() {
            return invalid("measurement file holds no tables");
        }
        tables.iter().try_for_each(validate_table)?;
        Ok(tables)
    }
}

/// One line of a time-series file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimedTable {
    pub t: f64,
    pub nu: Complex64,
    pub lambdas: Vec<Complex64>,
}

/// Parses JSON lines of [`TimedTable`]; blank lines are skipped.
pub fn parse_timeseries(text: &str) -> Result<TimeSeriesMeasurement> {
    let mut times = Vec::new();
    let mut tables = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: TimedTable = serde_json::from_str(line)
            .map_err(|e| Error::InvalidArgument(format!("line {}: {e}", i + 1)))?;
        let table = MomentTable {
            nu: row.nu,
            lambdas: row.lambdas,
        };
        validate_table(&table)?;
        times.push(row.t);
        tables.push(table);
    }
    TimeSeriesMeasurement::new(times, tables)
}

/// Inverse of [`parse_timeseries`].
pub fn format_timeseries(data: &TimeSeriesMeasurement) -> String {
    data.times
        .iter()
        .zip(&data.tables)
        .map(|(&t, tab)| {
            let row = TimedTable {
                t,
                nu: tab.nu,
                lambdas: tab.lambdas.clone(),
            };
            serde_json::to_string(&row).expect("serializable") + "\n"
        })
        .collect()
}
