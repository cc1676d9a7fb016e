//! Threshold profiles: the classification threshold aggregated per Hamming
//! distance, either over every function of a given length or over seeded
//! samples.
//!
//! Thresholds are exact dyadic rationals (`w^2 / 4^n` summed over nearest
//! kets), so buckets accumulate integer numerators. Shard order and worker
//! count therefore never change a profile.

mod kernel;
mod summary;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Recipe;
use crate::classifier::{classification_threshold, ThresholdReport};
use crate::error::{Error, Result};
use crate::pattern::PatternVector;

pub(crate) use kernel::{AnchoredSampler, Evaluation, Kernel};
pub use summary::{interval_summary, IntervalSummary, RegionVerdict, Spike};

/// Largest rank handled exhaustively (length 16, 65 536 functions).
pub const EXHAUSTIVE_MAX_RANK: u32 = 4;

/// Per-bucket attempt cap, as a multiple of the bucket quota.
pub const ATTEMPT_FACTOR: u64 = 50;

/// Shard count used by [`exhaustive_profile`].
const EXHAUSTIVE_SHARDS: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMode {
    Exhaustive,
    Sampled,
}

impl std::fmt::Display for ProfileMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProfileMode::Exhaustive => "exhaustive",
            ProfileMode::Sampled => "sampled",
        })
    }
}

/// Aggregate for one distance. Theta values are stored in units of `4^-n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub count: u64,
    pub theta_units: u64,
    pub min_units: u32,
    pub max_units: u32,
}

impl Bucket {
    fn record(&mut self, units: u32) {
        if self.count == 0 {
            self.min_units = units;
            self.max_units = units;
        } else {
            self.min_units = self.min_units.min(units);
            self.max_units = self.max_units.max(units);
        }
        self.count += 1;
        self.theta_units += u64::from(units);
    }

    fn merge(&self, other: &Bucket) -> Bucket {
        match (self.count, other.count) {
            (0, _) => *other,
            (_, 0) => *self,
            _ => Bucket {
                count: self.count + other.count,
                theta_units: self.theta_units + other.theta_units,
                min_units: self.min_units.min(other.min_units),
                max_units: self.max_units.max(other.max_units),
            },
        }
    }
}

/// One populated row of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub distance: u32,
    pub count: u64,
    pub mean_theta: f64,
    pub min_theta: f64,
    pub max_theta: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ProfileData")]
pub struct DistanceProfile {
    pub recipe: Recipe,
    pub mode: ProfileMode,
    pub seed: Option<u64>,
    pub quotas: BTreeMap<u32, u64>,
    /// Distances whose quota was not met within the attempt cap.
    pub short_buckets: Vec<u32>,
    buckets: Vec<Bucket>,
}

#[derive(Deserialize)]
struct ProfileData {
    recipe: Recipe,
    mode: ProfileMode,
    seed: Option<u64>,
    quotas: BTreeMap<u32, u64>,
    short_buckets: Vec<u32>,
    buckets: Vec<Bucket>,
}

impl TryFrom<ProfileData> for DistanceProfile {
    type Error = Error;

    fn try_from(d: ProfileData) -> Result<Self> {
        let expected = (1usize << d.recipe.rank()) + 1;
        if d.buckets.len() != expected {
            return Err(Error::ProfileMismatch(format!(
                "{} buckets for recipe {}, expected {expected}",
                d.buckets.len(),
                d.recipe
            )));
        }
        Ok(Self {
            recipe: d.recipe,
            mode: d.mode,
            seed: d.seed,
            quotas: d.quotas,
            short_buckets: d.short_buckets,
            buckets: d.buckets,
        })
    }
}

impl DistanceProfile {
    /// Profile with every bucket empty.
    pub fn empty(recipe: Recipe, mode: ProfileMode, seed: Option<u64>) -> Self {
        let len = 1usize << recipe.rank();
        Self {
            recipe,
            mode,
            seed,
            quotas: BTreeMap::new(),
            short_buckets: Vec::new(),
            buckets: vec![Bucket::default(); len + 1],
        }
    }

    /// Pattern vector length `2^n`.
    pub fn length(&self) -> u32 {
        (self.buckets.len() - 1) as u32
    }

    pub fn arity(&self) -> u32 {
        self.length().trailing_zeros()
    }

    /// `4^n`, the denominator of every stored theta.
    pub fn theta_scale(&self) -> f64 {
        let len = f64::from(self.length());
        len * len
    }

    pub fn bucket(&self, distance: u32) -> Option<&Bucket> {
        self.buckets.get(distance as usize)
    }

    pub fn buckets(&self) -> &[Bucket] {
        &self.buckets
    }

    pub fn count(&self, distance: u32) -> u64 {
        self.bucket(distance).map_or(0, |b| b.count)
    }

    pub fn total_count(&self) -> u64 {
        self.buckets.iter().map(|b| b.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_count() == 0
    }

    pub fn mean_theta(&self, distance: u32) -> Option<f64> {
        self.bucket(distance)
            .filter(|b| b.count > 0)
            .map(|b| b.theta_units as f64 / (b.count as f64 * self.theta_scale()))
    }

    pub fn rows(&self) -> Vec<ProfileRow> {
        let scale = self.theta_scale();
        self.buckets
            .iter()
            .enumerate()
            .filter(|(_, b)| b.count > 0)
            .map(|(d, b)| ProfileRow {
                distance: d as u32,
                count: b.count,
                mean_theta: b.theta_units as f64 / (b.count as f64 * scale),
                min_theta: f64::from(b.min_units) / scale,
                max_theta: f64::from(b.max_units) / scale,
            })
            .collect()
    }

    pub(crate) fn record(&mut self, eval: &Evaluation) {
        self.buckets[eval.distance as usize].record(eval.theta_units);
    }
}

/// Bucket-wise sum of two profiles over the same recipe, mode and seed.
pub fn merge_profiles(a: &DistanceProfile, b: &DistanceProfile) -> Result<DistanceProfile> {
    if a.recipe != b.recipe {
        return Err(Error::ProfileMismatch(format!("recipe {} vs {}", a.recipe, b.recipe)));
    }
    if a.mode != b.mode {
        return Err(Error::ProfileMismatch(format!("mode {} vs {}", a.mode, b.mode)));
    }
    if a.seed != b.seed {
        return Err(Error::ProfileMismatch(format!("seed {:?} vs {:?}", a.seed, b.seed)));
    }
    let mut quotas = a.quotas.clone();
    for (d, q) in &b.quotas {
        *quotas.entry(*d).or_default() += q;
    }
    let mut short: Vec<u32> = a.short_buckets.iter().chain(&b.short_buckets).copied().collect();
    short.sort_unstable();
    short.dedup();
    Ok(DistanceProfile {
        recipe: a.recipe.clone(),
        mode: a.mode,
        seed: a.seed,
        quotas,
        short_buckets: short,
        buckets: a.buckets.iter().zip(&b.buckets).map(|(x, y)| x.merge(y)).collect(),
    })
}

/// Callback receiving `(functions done, functions total)`.
pub type ProgressSink<'a> = &'a (dyn Fn(u64, u64) + Sync);

fn check_exhaustive(recipe: &Recipe) -> Result<u64> {
    let rank = recipe.rank();
    if rank > EXHAUSTIVE_MAX_RANK {
        return Err(Error::ExhaustiveCap {
            rank,
            max: EXHAUSTIVE_MAX_RANK,
        });
    }
    Ok(1u64 << (1u32 << rank))
}

/// Profile of one contiguous range of truth tables.
pub fn exhaustive_shard(recipe: &Recipe, range: std::ops::Range<u64>) -> Result<DistanceProfile> {
    let total = check_exhaustive(recipe)?;
    let kernel = Kernel::new(recipe)?;
    let mut profile = DistanceProfile::empty(recipe.clone(), ProfileMode::Exhaustive, None);
    let mut scratch = Vec::with_capacity(kernel.len());
    for h in range.start..range.end.min(total) {
        profile.record(&kernel.evaluate(h, &mut scratch));
    }
    Ok(profile)
}

/// Evaluates every function of length `2^rank` (rank at most 4), split into
/// `shards` contiguous ranges processed in parallel.
pub fn exhaustive_profile_sharded(
    recipe: &Recipe,
    shards: u64,
    progress: Option<ProgressSink<'_>>,
) -> Result<DistanceProfile> {
    let total = check_exhaustive(recipe)?;
    let shards = shards.clamp(1, total);
    let step = total.div_ceil(shards);
    let done = AtomicU64::new(0);
    let parts = (0..shards)
        .into_par_iter()
        .map(|s| {
            let range = s * step..((s + 1) * step).min(total);
            let len = range.end - range.start;
            let part = exhaustive_shard(recipe, range)?;
            let so_far = done.fetch_add(len, Ordering::Relaxed) + len;
            if let Some(sink) = progress {
                sink(so_far, total);
            }
            Ok(part)
        })
        .collect::<Result<Vec<_>>>()?;
    let empty = DistanceProfile::empty(recipe.clone(), ProfileMode::Exhaustive, None);
    parts.iter().try_fold(empty, |acc, p| merge_profiles(&acc, p))
}

pub fn exhaustive_profile(recipe: &Recipe, progress: Option<ProgressSink<'_>>) -> Result<DistanceProfile> {
    exhaustive_profile_sharded(recipe, EXHAUSTIVE_SHARDS, progress)
}

/// Default sampling plan: `per_bucket` samples at every distance
/// `1..=2^(n-1)`.
pub fn default_quotas(rank: u32, per_bucket: u64) -> BTreeMap<u32, u64> {
    let half = (1u32 << rank) / 2;
    (1..=half).map(|d| (d, per_bucket)).collect()
}

/// Seeded stratified sampling for ranks 5 and 6.
///
/// For each target distance `d` (ascending), a random member has a random
/// `d`-subset of bits flipped and the result is credited to its true bucket,
/// until bucket `d` meets its quota or `50 x quota` attempts are spent.
/// Buckets still short are then drawn from flips anchored at the probe
/// functions (member complements, all-ones, all-zeros) with the same cap.
/// Buckets that remain short are listed in `short_buckets`.
pub fn stratified_sample_profile(
    recipe: &Recipe,
    quotas: &BTreeMap<u32, u64>,
    seed: u64,
) -> Result<DistanceProfile> {
    let rank = recipe.rank();
    if !(5..=6).contains(&rank) {
        return Err(Error::SampledRank(rank));
    }
    let half = (1u32 << rank) / 2;
    if let Some((&d, _)) = quotas.iter().find(|(d, _)| **d == 0 || **d > half) {
        return Err(Error::QuotaRange {
            distance: d,
            max: half,
        });
    }
    let kernel = Kernel::new(recipe)?;
    let anchors = AnchoredSampler::new(&kernel);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut profile = DistanceProfile::empty(recipe.clone(), ProfileMode::Sampled, Some(seed));
    profile.quotas = quotas.clone();
    let mut scratch = Vec::with_capacity(kernel.len());

    for (&d, &quota) in quotas {
        let cap = ATTEMPT_FACTOR * quota;
        let mut attempts = 0;
        while profile.count(d) < quota && attempts < cap {
            attempts += 1;
            let h = kernel.member_flip(&mut rng, d);
            profile.record(&kernel.evaluate(h, &mut scratch));
        }
    }
    for (&d, &quota) in quotas {
        let cap = ATTEMPT_FACTOR * quota;
        let mut attempts = 0;
        while profile.count(d) < quota && attempts < cap {
            attempts += 1;
            match anchors.draw(&kernel, &mut rng, d) {
                Some(h) => profile.record(&kernel.evaluate(h, &mut scratch)),
                None => break,
            }
        }
    }
    profile.short_buckets = quotas
        .iter()
        .filter(|(d, q)| profile.count(**d) < **q)
        .map(|(d, _)| *d)
        .collect();
    Ok(profile)
}

/// A deterministic probe function and its threshold report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    /// `all-ones`, `all-zeros` or `complement-k` for member `k`.
    pub name: String,
    pub function: PatternVector,
    pub report: ThresholdReport,
}

/// Threshold reports for the deterministic probes: the all-ones and all-zeros
/// functions and the complement of every basis member.
pub fn probe_suite(recipe: &Recipe) -> Result<Vec<Probe>> {
    let kernel = Kernel::new(recipe)?;
    kernel
        .probes()
        .into_iter()
        .map(|(name, bits)| {
            let function = kernel.vector(bits);
            classification_threshold(&kernel.spec, &kernel.basis, &function).map(|report| Probe {
                name,
                function,
                report,
            })
        })
        .collect()
}
