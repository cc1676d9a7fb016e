//! CSV and JSON writers and their readers.
//!
//! Floats are written in shortest round-trip form with a `.` decimal
//! separator, so every file parses back to the value that produced it.

use std::io::{Read, Write};

use patclass_core::experiment::ProfileRow;
use patclass_core::game::{RoundRecord, WinRate};
use patclass_core::reference::CellReport;
use patclass_core::{DistanceProfile, IntervalSummary, NearestSet, PatternVector, Probe, Recipe};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Threshold of one deterministic probe function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub name: String,
    pub function: PatternVector,
    pub distance: u32,
    pub nearest: Vec<usize>,
    pub theta: f64,
}

impl From<&Probe> for ProbeRecord {
    fn from(p: &Probe) -> Self {
        Self {
            name: p.name.clone(),
            function: p.function,
            distance: p.report.nearest.distance,
            nearest: p.report.nearest.indices.clone(),
            theta: p.report.theta,
        }
    }
}

/// JSON form of `enumerate` and `sample` results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileDocument {
    pub profile: DistanceProfile,
    pub rows: Vec<ProfileRow>,
    pub rho: Option<u32>,
    pub summary: IntervalSummary,
    pub probes: Vec<ProbeRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyDocument {
    pub recipe: Recipe,
    pub function: PatternVector,
    pub nearest: NearestSet,
    pub theta: f64,
    pub seed: u64,
    pub outcome: usize,
    pub outcome_ket: String,
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisDocument {
    pub recipe: Option<Recipe>,
    pub rank: u8,
    pub rho: Option<u32>,
    pub members: Vec<PatternVector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameDocument {
    pub recipe: Recipe,
    pub bob: String,
    pub alice: String,
    pub seed: u64,
    pub win_rate: WinRate,
}

/// Flat CSV form of a game round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRow {
    pub seed: u64,
    pub function: PatternVector,
    pub distance: u32,
    pub outcome: usize,
    pub ground_truth: bool,
    pub alice_answer: bool,
    pub alice_wins: bool,
}

impl From<&RoundRecord> for RoundRow {
    fn from(r: &RoundRecord) -> Self {
        Self {
            seed: r.seed,
            function: r.function,
            distance: r.distance,
            outcome: r.outcome,
            ground_truth: r.ground_truth,
            alice_answer: r.alice_answer,
            alice_wins: r.winner == patclass_core::game::Winner::Alice,
        }
    }
}

/// Flat CSV form of a reference-table cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub table: String,
    pub recipe: Recipe,
    pub distance: u32,
    pub expected: String,
    pub observed: Option<f64>,
    pub status: String,
}

impl From<&CellReport> for CellRow {
    fn from(c: &CellReport) -> Self {
        Self {
            table: c.table.clone(),
            recipe: c.recipe.clone(),
            distance: c.distance,
            expected: c.expected.to_string(),
            observed: c.observed,
            status: serde_json::to_value(c.status)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
        }
    }
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(w);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned, R: Read>(r: R) -> Result<Vec<T>, CliError> {
    csv::Reader::from_reader(r)
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(CliError::from)
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned, R: Read>(r: R) -> Result<T, CliError> {
    serde_json::from_reader(r).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use patclass_core::exhaustive_profile;

    #[test]
    fn profile_rows_round_trip_through_csv() {
        let p = exhaustive_profile(&"H,C2".parse().unwrap(), None).unwrap();
        let rows = p.rows();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("distance,count,mean_theta,min_theta,max_theta\n"));
        assert!(text.contains("\n1,64,0.5625,"));
        let back: Vec<ProfileRow> = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn profile_round_trips_through_json() {
        let p = exhaustive_profile(&"C2,H".parse().unwrap(), None).unwrap();
        let mut buf = Vec::new();
        write_json(&p, &mut buf).unwrap();
        let back: DistanceProfile = read_json(buf.as_slice()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn truncated_profile_json_is_rejected() {
        let p = exhaustive_profile(&"C2".parse().unwrap(), None).unwrap();
        let mut v = serde_json::to_value(&p).unwrap();
        v["buckets"].as_array_mut().unwrap().pop();
        assert!(serde_json::from_value::<DistanceProfile>(v).is_err());
    }
}
