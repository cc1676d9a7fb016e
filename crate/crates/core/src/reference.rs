//! Embedded reference tables and cell-level comparison against computed
//! profiles.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::basis::{class_rho, PatternBasis, Recipe};
use crate::error::{Error, Result};
use crate::experiment::{
    default_quotas, exhaustive_profile, probe_suite, stratified_sample_profile, DistanceProfile,
    ProfileMode,
};

const FIXTURE: &str = include_str!("../fixtures/reference_tables.toml");

/// Tolerance for two-decimal reference values.
pub const TWO_DECIMAL_TOL: f64 = 0.005;
/// Tolerance for exact claims (0.00 or 1.00 held exactly).
pub const EXACT_TOL: f64 = 1e-9;

/// Samples per distance used when reproducing sampled tables.
pub const DEFAULT_QUOTA: u64 = 200;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expectation {
    Value { value: f64, tol: f64 },
    Between { above: f64, below: f64 },
}

impl Expectation {
    pub fn accepts(&self, observed: f64) -> bool {
        match *self {
            Expectation::Value { value, tol } => (observed - value).abs() <= tol,
            Expectation::Between { above, below } => observed > above && observed < below,
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Value { value, tol } => write!(f, "{value:.2} ± {tol:e}"),
            Expectation::Between { above, below } => write!(f, "({above:.2}, {below:.2})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCell {
    pub from: u32,
    pub to: u32,
    pub expect: Expectation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceColumn {
    pub label: String,
    pub recipes: Vec<Recipe>,
    pub cells: Vec<ReferenceCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub id: String,
    pub title: String,
    pub length: u32,
    pub mode: ProfileMode,
    pub columns: Vec<ReferenceColumn>,
}

#[derive(Deserialize)]
struct RawFile {
    tables: Vec<RawTable>,
}

#[derive(Deserialize)]
struct RawTable {
    id: String,
    title: String,
    length: u32,
    mode: ProfileMode,
    columns: Vec<RawColumn>,
}

#[derive(Deserialize)]
struct RawColumn {
    label: String,
    recipes: Vec<Recipe>,
    cells: Vec<RawCell>,
}

#[derive(Deserialize)]
struct RawCell {
    from: u32,
    to: u32,
    value: Option<f64>,
    tol: Option<f64>,
    #[serde(default)]
    exact: bool,
    above: Option<f64>,
    below: Option<f64>,
}

impl RawCell {
    fn expectation(&self) -> Result<Expectation> {
        match (self.value, self.above, self.below) {
            (Some(value), None, None) => Ok(Expectation::Value {
                value,
                tol: if self.exact {
                    EXACT_TOL
                } else {
                    self.tol.unwrap_or(TWO_DECIMAL_TOL)
                },
            }),
            (None, Some(above), Some(below)) => Ok(Expectation::Between { above, below }),
            _ => Err(Error::Fixture(format!(
                "cell {}..={} needs either value or above+below",
                self.from, self.to
            ))),
        }
    }
}

/// Parses a reference file in the embedded format.
pub fn parse_reference_tables(text: &str) -> Result<Vec<ReferenceTable>> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Fixture(e.to_string()))?;
    raw.tables
        .into_iter()
        .map(|t| {
            let columns = t
                .columns
                .into_iter()
                .map(|c| {
                    if let Some(r) = c.recipes.iter().find(|r| 1u32 << r.rank() != t.length) {
                        return Err(Error::Fixture(format!(
                            "recipe {r} does not have length {}",
                            t.length
                        )));
                    }
                    let cells = c
                        .cells
                        .iter()
                        .map(|cell| {
                            Ok(ReferenceCell {
                                from: cell.from,
                                to: cell.to,
                                expect: cell.expectation()?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(ReferenceColumn {
                        label: c.label,
                        recipes: c.recipes,
                        cells,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ReferenceTable {
                id: t.id,
                title: t.title,
                length: t.length,
                mode: t.mode,
                columns,
            })
        })
        .collect()
}

pub fn reference_tables() -> Result<Vec<ReferenceTable>> {
    parse_reference_tables(FIXTURE)
}

/// Looks a table up by id (`3`, `5`, `7`, `8`) or by length alias
/// (`len8`, `len16`, `len32`, `len64`).
pub fn reference_table(which: &str) -> Result<ReferenceTable> {
    let which = which.trim();
    reference_tables()?
        .into_iter()
        .find(|t| t.id == which || format!("len{}", t.length) == which)
        .ok_or_else(|| Error::Fixture(format!("no reference table {which:?}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Pass,
    Fail,
    /// No function was observed at this distance.
    NoData,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub table: String,
    pub recipe: Recipe,
    pub distance: u32,
    pub expected: Expectation,
    pub observed: Option<f64>,
    pub status: CellStatus,
}

impl fmt::Display for CellReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            CellStatus::Pass => "PASS",
            CellStatus::Fail => "FAIL",
            CellStatus::NoData => "N/A ",
        };
        let observed = self
            .observed
            .map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        write!(
            f,
            "{status} table {} [{}] d={:<3} expected {:<16} observed {observed}",
            self.table, self.recipe, self.distance, self.expected
        )
    }
}

impl ReferenceColumn {
    /// Compares one recipe's observations against every cell of the column.
    pub fn diff(&self, table: &str, recipe: &Recipe, observed: impl Fn(u32) -> Option<f64>) -> Vec<CellReport> {
        self.cells
            .iter()
            .flat_map(|cell| (cell.from..=cell.to).map(move |d| (cell, d)))
            .map(|(cell, d)| {
                let value = observed(d);
                let status = match value {
                    None => CellStatus::NoData,
                    Some(v) if cell.expect.accepts(v) => CellStatus::Pass,
                    Some(_) => CellStatus::Fail,
                };
                CellReport {
                    table: table.to_string(),
                    recipe: recipe.clone(),
                    distance: d,
                    expected: cell.expect,
                    observed: value,
                    status,
                }
            })
            .collect()
    }
}

/// Computed data behind one recipe of a table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeRun {
    pub recipe: Recipe,
    pub profile: DistanceProfile,
    /// Mean probe threshold per distance, used where the profile is empty.
    pub probe_means: BTreeMap<u32, f64>,
    pub rho: Option<u32>,
}

impl RecipeRun {
    pub fn observed(&self, distance: u32) -> Option<f64> {
        self.profile
            .mean_theta(distance)
            .or_else(|| self.probe_means.get(&distance).copied())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRun {
    pub table: ReferenceTable,
    pub runs: Vec<RecipeRun>,
    pub cells: Vec<CellReport>,
}

impl TableRun {
    pub fn failures(&self) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter(|c| c.status == CellStatus::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }
}

pub fn run_recipe(recipe: &Recipe, mode: ProfileMode, quota: u64, seed: u64) -> Result<RecipeRun> {
    let profile = match mode {
        ProfileMode::Exhaustive => exhaustive_profile(recipe, None)?,
        ProfileMode::Sampled => {
            stratified_sample_profile(recipe, &default_quotas(recipe.rank(), quota), seed)?
        }
    };
    let mut sums: BTreeMap<u32, (f64, u32)> = BTreeMap::new();
    for probe in probe_suite(recipe)? {
        let e = sums.entry(probe.report.nearest.distance).or_default();
        e.0 += probe.report.theta;
        e.1 += 1;
    }
    let probe_means = sums.into_iter().map(|(d, (s, n))| (d, s / f64::from(n))).collect();
    let rho = class_rho(&PatternBasis::from_recipe(recipe)?);
    Ok(RecipeRun {
        recipe: recipe.clone(),
        profile,
        probe_means,
        rho,
    })
}

/// Computes every recipe of a table and diffs each against its column.
pub fn reproduce_table(table: &ReferenceTable, quota: u64, seed: u64) -> Result<TableRun> {
    let mut runs = Vec::new();
    let mut cells = Vec::new();
    for column in &table.columns {
        for recipe in &column.recipes {
            let run = run_recipe(recipe, table.mode, quota, seed)?;
            cells.extend(column.diff(&table.id, recipe, |d| run.observed(d)));
            runs.push(run);
        }
    }
    Ok(TableRun {
        table: table.clone(),
        runs,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_fixture_parses() {
        let tables = reference_tables().unwrap();
        let ids: Vec<&str> = tables.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["3", "5", "7", "8"]);
        let t5 = reference_table("len16").unwrap();
        assert_eq!(t5.id, "5");
        assert_eq!(t5.columns.len(), 2);
        assert_eq!(t5.columns[1].cells[9].expect, Expectation::Value { value: 1.0, tol: EXACT_TOL });
        assert!(reference_table("4").is_err());
    }

    #[test]
    fn malformed_cells_are_rejected() {
        let text = r#"
[[tables]]
id = "x"
title = "t"
length = 4
mode = "exhaustive"
[[tables.columns]]
label = "C2"
recipes = ["C2"]
cells = [{ from = 1, to = 1, above = 0.5 }]
"#;
        assert!(matches!(parse_reference_tables(text), Err(Error::Fixture(_))));
        let wrong_len = text.replace("above = 0.5", "value = 0.5").replace("length = 4", "length = 8");
        assert!(matches!(parse_reference_tables(&wrong_len), Err(Error::Fixture(_))));
    }

    #[test]
    fn diff_statuses() {
        let column = ReferenceColumn {
            label: "c".into(),
            recipes: vec!["C2".parse().unwrap()],
            cells: vec![
                ReferenceCell { from: 1, to: 2, expect: Expectation::Value { value: 0.5, tol: 0.005 } },
                ReferenceCell { from: 3, to: 3, expect: Expectation::Between { above: 0.0, below: 0.5 } },
            ],
        };
        let r: Recipe = "C2".parse().unwrap();
        let reports = column.diff("t", &r, |d| match d {
            1 => Some(0.504),
            2 => Some(0.51),
            _ => None,
        });
        let statuses: Vec<CellStatus> = reports.iter().map(|c| c.status).collect();
        assert_eq!(statuses, [CellStatus::Pass, CellStatus::Fail, CellStatus::NoData]);
        assert!(reports[0].to_string().starts_with("PASS table t [C2] d=1"));
    }
}
