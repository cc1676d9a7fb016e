//! Command-line front end for `patclass-core`.
//!
//! The `patclass` binary is a thin wrapper around [`run`], which parses the
//! arguments, executes one subcommand and returns the process exit status:
//! `0` on success, `1` on usage or input errors and `2` when `tables` finds
//! a cell outside its tolerance.

pub mod histogram;
pub mod manifest;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patclass_core::game::Game;
use patclass_core::reference::{reference_tables, reproduce_table, CellStatus, TableRun};
use patclass_core::{
    class_rho, classification_threshold, exhaustive_profile, interval_summary, probe_suite,
    stratified_sample_profile, AliceStrategy, BobStrategy, ClassifierSpec, DistanceProfile,
    GameConfig, PatternBasis, PatternVector, ProfileMode, Recipe,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use histogram::HistogramFormat;
use manifest::RunManifest;
use output::{
    write_csv, write_json, BasisDocument, CellRow, ClassifyDocument, Format, GameDocument,
    ProbeRecord, ProfileDocument, RoundRow,
};

/// Seed used when neither `--seed` nor `PATCLASS_SEED` is given.
pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "PATCLASS_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] patclass_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "patclass", version, about = "Pattern-basis classification of Boolean functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, validate and print a basis.
    Bases(BasesArgs),
    /// Classify one function: outcome distribution, nearest kets and theta.
    Classify(ClassifyArgs),
    /// Threshold profile over every function of length 2, 4, 8 or 16.
    Enumerate(ProfileArgs),
    /// Seeded stratified threshold profile for length 32 or 64, with probes.
    Sample(SampleArgs),
    /// Recompute the reference tables and diff them cell by cell.
    Tables(TablesArgs),
    /// Simulate the nearest basis ket game.
    Game(GameArgs),
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// RNG seed; defaults to $PATCLASS_SEED, then 42.
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result here (a manifest is written beside it) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct BasesArgs {
    /// Recipe such as `H,C2,H`.
    #[arg(long, required_unless_present = "input")]
    pub recipe: Option<Recipe>,
    /// Validate a basis file (optional recipe line, then one member per line).
    #[arg(long, conflicts_with = "recipe")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub recipe: Recipe,
    /// Pattern bit vector, most significant bit first.
    #[arg(long)]
    pub function: PatternVector,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub recipe: Recipe,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Print a histogram; it replaces the data on stdout unless --out is set.
    #[arg(long, value_enum)]
    pub hist: Option<HistogramFormat>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Sample quota for one distance, as `d=count`; repeatable.
    #[arg(long = "quota", value_parser = parse_quota)]
    pub quotas: Vec<(u32, u64)>,
    /// Quota for every distance up to half the length when no --quota is given.
    #[arg(long, default_value_t = 200)]
    pub per_bucket: u64,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// Table id (3, 5, 7, 8), length alias (len8 ... len64) or `all`.
    #[arg(long, default_value = "all")]
    pub which: String,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Samples per distance for the sampled tables.
    #[arg(long, default_value_t = 200)]
    pub per_bucket: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BobChoice {
    AtDistance,
    Pivot,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AliceChoice {
    Interval,
    AlwaysYes,
    AlwaysNo,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long)]
    pub recipe: Recipe,
    #[arg(long, value_enum, default_value_t = BobChoice::AtDistance)]
    pub bob: BobChoice,
    /// Target distance for `--bob at-distance`.
    #[arg(long, default_value_t = 1)]
    pub distance: u32,
    #[arg(long, value_enum, default_value_t = AliceChoice::Interval)]
    pub alice: AliceChoice,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Write every round here (csv or json per --format).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn parse_quota(s: &str) -> Result<(u32, u64), String> {
    let (d, n) = s
        .split_once('=')
        .ok_or_else(|| format!("expected d=count, got {s:?}"))?;
    let d = d.trim().parse().map_err(|e| format!("distance {d:?}: {e}"))?;
    let n = n.trim().parse().map_err(|e| format!("count {n:?}: {e}"))?;
    Ok((d, n))
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let argv = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match dispatch(cli.command, argv, stdout, stderr) {
        Ok(code) => code,
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn dispatch(
    command: Command,
    argv: Vec<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let start = Instant::now();
    let (name, mut manifest_out) = match &command {
        Command::Bases(a) => ("bases", a.output.out.clone()),
        Command::Classify(a) => ("classify", a.output.out.clone()),
        Command::Enumerate(a) => ("enumerate", a.output.out.clone()),
        Command::Sample(a) => ("sample", a.profile.output.out.clone()),
        Command::Tables(a) => ("tables", a.output.out.clone()),
        Command::Game(a) => ("game", a.out.clone()),
    };
    let mut manifest = RunManifest::new(name, argv);
    let code = match command {
        Command::Bases(a) => bases(a, &mut manifest, stdout)?,
        Command::Classify(a) => classify(a, &mut manifest, stdout)?,
        Command::Enumerate(a) => enumerate(a, &mut manifest, stdout)?,
        Command::Sample(a) => sample(a, &mut manifest, stdout, stderr)?,
        Command::Tables(a) => tables(a, &mut manifest, stdout)?,
        Command::Game(a) => game(a, &mut manifest, stdout)?,
    };
    if let Some(out) = manifest_out.take() {
        manifest.outputs.insert(0, out.clone());
        manifest.finish(start.elapsed());
        manifest.write_beside(&out)?;
    }
    Ok(code)
}

/// Writes `body` to `out` when given, else to stdout.
fn emit(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => body(stdout),
    }
}

fn bases(a: BasesArgs, manifest: &mut RunManifest, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let basis = match (&a.recipe, &a.input) {
        (Some(r), _) => PatternBasis::from_recipe(r)?,
        (None, Some(path)) => PatternBasis::from_text(&std::fs::read_to_string(path)?)?,
        (None, None) => return Err(CliError::Usage("--recipe or --input is required".into())),
    };
    manifest.recipe = basis.recipe().cloned();
    let doc = BasisDocument {
        recipe: basis.recipe().cloned(),
        rank: basis.rank(),
        rho: class_rho(&basis),
        members: basis.members().to_vec(),
    };
    emit(a.output.out.as_deref(), stdout, |w| match a.output.format {
        Some(Format::Json) => write_json(&doc, w),
        Some(Format::Csv) => {
            #[derive(serde::Serialize)]
            struct MemberRow {
                index: usize,
                member: PatternVector,
                zeros: u32,
            }
            let rows: Vec<MemberRow> = doc
                .members
                .iter()
                .enumerate()
                .map(|(index, m)| MemberRow {
                    index,
                    member: *m,
                    zeros: m.count_zeros(),
                })
                .collect();
            write_csv(&rows, w)
        }
        None => {
            write!(w, "{}", basis.to_text())?;
            Ok(())
        }
    })?;
    Ok(0)
}

fn ket(index: usize, bits: u32) -> String {
    format!("|{index:0width$b}>", width = bits as usize)
}

fn classify(a: ClassifyArgs, manifest: &mut RunManifest, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let basis = PatternBasis::from_recipe(&a.recipe)?;
    let spec = ClassifierSpec::new(a.recipe.clone());
    let report = classification_threshold(&spec, &basis, &a.function)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed.seed);
    let outcome = report.distribution.sample(rng.random::<f64>());
    manifest.recipe = Some(a.recipe.clone());
    manifest.seed = Some(a.seed.seed);
    let doc = ClassifyDocument {
        recipe: a.recipe.clone(),
        function: a.function,
        nearest: report.nearest.clone(),
        theta: report.theta,
        seed: a.seed.seed,
        outcome,
        outcome_ket: ket(outcome, a.recipe.rank()),
        probabilities: report.distribution.probs.clone(),
    };
    emit(a.output.out.as_deref(), stdout, |w| match a.output.format {
        Some(Format::Json) => write_json(&doc, w),
        Some(Format::Csv) => {
            #[derive(serde::Serialize)]
            struct Row {
                index: usize,
                ket: String,
                probability: f64,
                nearest: bool,
            }
            let rows: Vec<Row> = doc
                .probabilities
                .iter()
                .enumerate()
                .map(|(i, p)| Row {
                    index: i,
                    ket: ket(i, a.recipe.rank()),
                    probability: *p,
                    nearest: doc.nearest.contains(i),
                })
                .collect();
            write_csv(&rows, w)
        }
        None => {
            writeln!(w, "recipe    {}", doc.recipe)?;
            writeln!(w, "function  {}", doc.function)?;
            writeln!(w, "distance  {}", doc.nearest.distance)?;
            writeln!(w, "nearest   {:?}", doc.nearest.indices)?;
            writeln!(w, "theta     {}", doc.theta)?;
            writeln!(w, "outcome   {} {}", doc.outcome, doc.outcome_ket)?;
            writeln!(w)?;
            writeln!(w, "index  ket  probability  nearest")?;
            for (i, p) in doc.probabilities.iter().enumerate() {
                let mark = if doc.nearest.contains(i) { "*" } else { "" };
                writeln!(w, "{i:>5}  {}  {p:.6}  {mark}", ket(i, a.recipe.rank()))?;
            }
            Ok(())
        }
    })?;
    Ok(0)
}

fn probe_records(recipe: &Recipe) -> Result<Vec<ProbeRecord>, CliError> {
    Ok(probe_suite(recipe)?.iter().map(ProbeRecord::from).collect())
}

fn write_profile(
    profile: &DistanceProfile,
    args: &ProfileArgs,
    probes: Vec<ProbeRecord>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let rho = class_rho(&PatternBasis::from_recipe(&profile.recipe)?);
    let histogram = args
        .hist
        .map(|h| histogram::render(profile, h))
        .transpose()?;
    if let (Some(text), None) = (&histogram, &args.output.out) {
        write!(stdout, "{text}")?;
        return Ok(());
    }
    let doc = ProfileDocument {
        profile: profile.clone(),
        rows: profile.rows(),
        rho,
        summary: interval_summary(profile, rho),
        probes,
    };
    emit(args.output.out.as_deref(), stdout, |w| match args.output.format {
        Some(Format::Json) => write_json(&doc, w),
        Some(Format::Csv) | None => write_csv(&doc.rows, w),
    })?;
    if let Some(text) = histogram {
        write!(stdout, "{text}")?;
    }
    Ok(())
}

fn enumerate(a: ProfileArgs, manifest: &mut RunManifest, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let profile = exhaustive_profile(&a.recipe, None)?;
    manifest.recipe = Some(a.recipe.clone());
    manifest.mode = Some(ProfileMode::Exhaustive);
    write_profile(&profile, &a, probe_records(&a.recipe)?, stdout)?;
    Ok(0)
}

fn sample(
    a: SampleArgs,
    manifest: &mut RunManifest,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let recipe = &a.profile.recipe;
    let quotas: BTreeMap<u32, u64> = if a.quotas.is_empty() {
        patclass_core::experiment::default_quotas(recipe.rank(), a.per_bucket)
    } else {
        a.quotas.iter().copied().collect()
    };
    let profile = stratified_sample_profile(recipe, &quotas, a.seed.seed)?;
    if !profile.short_buckets.is_empty() {
        writeln!(stderr, "warning: quota not met at distances {:?}", profile.short_buckets)?;
    }
    manifest.recipe = Some(recipe.clone());
    manifest.mode = Some(ProfileMode::Sampled);
    manifest.seed = Some(a.seed.seed);
    manifest.quotas = quotas;
    write_profile(&profile, &a.profile, probe_records(recipe)?, stdout)?;
    Ok(0)
}

fn tables(a: TablesArgs, manifest: &mut RunManifest, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let all = reference_tables()?;
    let which = a.which.trim();
    let selected: Vec<_> = all
        .into_iter()
        .filter(|t| which == "all" || t.id == which || format!("len{}", t.length) == which)
        .collect();
    if selected.is_empty() {
        return Err(CliError::Usage(format!(
            "unknown table {which:?}; expected 3, 5, 7, 8, len8, len16, len32, len64 or all"
        )));
    }
    manifest.seed = Some(a.seed.seed);
    let runs: Vec<TableRun> = selected
        .iter()
        .map(|t| reproduce_table(t, a.per_bucket, a.seed.seed))
        .collect::<Result<_, _>>()?;
    let failed = runs.iter().any(|r| !r.passed());
    emit(a.output.out.as_deref(), stdout, |w| match a.output.format {
        Some(Format::Json) => write_json(&runs, w),
        Some(Format::Csv) => {
            let rows: Vec<CellRow> = runs.iter().flat_map(|r| r.cells.iter().map(CellRow::from)).collect();
            write_csv(&rows, w)
        }
        None => {
            for run in &runs {
                let count = |s| run.cells.iter().filter(|c| c.status == s).count();
                writeln!(
                    w,
                    "table {} ({}): {} pass, {} fail, {} without data",
                    run.table.id,
                    run.table.title,
                    count(CellStatus::Pass),
                    count(CellStatus::Fail),
                    count(CellStatus::NoData)
                )?;
                for c in &run.cells {
                    writeln!(w, "  {c}")?;
                }
            }
            writeln!(w, "{}", if failed { "DIFF FAILED" } else { "ALL CELLS MATCH" })?;
            Ok(())
        }
    })?;
    Ok(if failed { 2 } else { 0 })
}

fn game(a: GameArgs, manifest: &mut RunManifest, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let bob = match a.bob {
        BobChoice::AtDistance => BobStrategy::AtDistance(a.distance),
        BobChoice::Pivot => BobStrategy::Pivot,
        BobChoice::Uniform => BobStrategy::UniformRandom,
    };
    let alice = match a.alice {
        AliceChoice::Interval => AliceStrategy::IntervalThreshold,
        AliceChoice::AlwaysYes => AliceStrategy::AlwaysYes,
        AliceChoice::AlwaysNo => AliceStrategy::AlwaysNo,
    };
    let game = Game::new(GameConfig {
        recipe: a.recipe.clone(),
        bob,
        alice,
        trials: a.trials,
        seed: a.seed.seed,
    })?;
    manifest.recipe = Some(a.recipe.clone());
    manifest.seed = Some(a.seed.seed);
    let (win_rate, rounds) = if a.out.is_some() {
        let (w, r) = game.simulate()?;
        (w, Some(r))
    } else {
        (game.estimate_win_rate()?, None)
    };
    let doc = GameDocument {
        recipe: a.recipe.clone(),
        bob: format!("{bob:?}"),
        alice: format!("{alice:?}"),
        seed: a.seed.seed,
        win_rate,
    };
    if let (Some(path), Some(rounds)) = (&a.out, rounds) {
        emit(Some(path), stdout, |w| match a.format {
            Some(Format::Json) => write_json(&rounds, w),
            Some(Format::Csv) | None => {
                let rows: Vec<RoundRow> = rounds.iter().map(RoundRow::from).collect();
                write_csv(&rows, w)
            }
        })?;
    }
    match a.format {
        Some(Format::Json) if a.out.is_none() => write_json(&doc, &mut *stdout)?,
        _ => writeln!(
            stdout,
            "recipe {} bob {} alice {} seed {}: Alice won {} of {} rounds, rate {:.4} (standard error {:.4})",
            doc.recipe,
            doc.bob,
            doc.alice,
            doc.seed,
            win_rate.wins,
            win_rate.trials,
            win_rate.rate,
            win_rate.std_error
        )?,
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("patclass").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn quota_parser() {
        assert_eq!(parse_quota("3=200"), Ok((3, 200)));
        assert!(parse_quota("3").is_err());
        assert!(parse_quota("x=1").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_str(&["frobnicate"]).0, 1);
        assert_eq!(run_str(&["classify", "--recipe", "C2"]).0, 1);
        assert_eq!(run_str(&["enumerate", "--recipe", "X"]).0, 1);
        let (code, _, err) = run_str(&["enumerate", "--recipe", "C2,C2,C2"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("enumerate"));
    }

    #[test]
    fn classify_member_reports_point_mass() {
        let (code, out, _) = run_str(&["classify", "--recipe", "C2,C2", "--function", "1000100010000111"]);
        assert_eq!(code, 0);
        assert!(out.contains("theta     1\n"), "{out}");
        assert!(out.contains("outcome   3 |0011>"), "{out}");
    }
}
