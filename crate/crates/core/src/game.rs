//! Monte Carlo simulation of the nearest basis ket game.
//!
//! Bob hides a function `h` outside the class and reveals only its class
//! distance. A single classification measurement is made. Alice answers
//! whether the measured ket is one of `h`'s nearest basis kets and wins when
//! her answer matches the truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{class_rho, NearestSet, Recipe};
use crate::classifier::OutcomeDistribution;
use crate::error::{Error, Result};
use crate::experiment::{AnchoredSampler, Kernel};
use crate::pattern::PatternVector;

/// Attempts per sampling phase when Bob looks for a function at a distance.
const PICK_ATTEMPTS: u32 = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BobStrategy {
    AtDistance(u32),
    /// Distance `floor(2^n / 8)`, where Alice's odds are closest to even.
    Pivot,
    UniformRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceStrategy {
    IntervalThreshold,
    AlwaysYes,
    AlwaysNo,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    pub recipe: Recipe,
    pub bob: BobStrategy,
    pub alice: AliceStrategy,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Alice,
    Bob,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub seed: u64,
    pub function: PatternVector,
    pub distance: u32,
    pub outcome: usize,
    /// Whether the outcome is a nearest basis ket of the function.
    pub ground_truth: bool,
    pub alice_answer: bool,
    pub winner: Winner,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WinRate {
    pub trials: u64,
    pub wins: u64,
    pub rate: f64,
    pub std_error: f64,
}

impl WinRate {
    fn from_counts(wins: u64, trials: u64) -> Self {
        let rate = wins as f64 / trials as f64;
        Self {
            trials,
            wins,
            rate,
            std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        }
    }
}

/// Alice's interval rule: yes for distances up to `2^n / 8`, yes at the
/// common zero count `rho` of a uniform class, no otherwise.
pub fn alice_interval_decide(distance: u32, arity: u32, rho: Option<u32>) -> Result<bool> {
    if distance == 0 {
        return Err(Error::ZeroDistance);
    }
    Ok(u64::from(distance) * 8 <= 1u64 << arity || rho == Some(distance))
}

pub fn pivot_distance(arity: u32) -> u32 {
    ((1u32 << arity) / 8).max(1)
}

/// Prepared game: basis, classifier and `rho` built once for many rounds.
#[derive(Clone, Debug)]
pub struct Game {
    config: GameConfig,
    kernel: Kernel,
    anchors: AnchoredSampler,
    rho: Option<u32>,
}

impl Game {
    pub fn new(config: GameConfig) -> Result<Self> {
        let kernel = Kernel::new(&config.recipe)?;
        if let BobStrategy::AtDistance(0) = config.bob {
            return Err(Error::ZeroDistance);
        }
        let anchors = AnchoredSampler::new(&kernel);
        let rho = class_rho(&kernel.basis);
        Ok(Self {
            config,
            kernel,
            anchors,
            rho,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn rho(&self) -> Option<u32> {
        self.rho
    }

    fn arity(&self) -> u32 {
        u32::from(self.kernel.arity)
    }

    fn pick_at<R: Rng + ?Sized>(&self, rng: &mut R, target: u32) -> Result<u64> {
        if target == 0 {
            return Err(Error::ZeroDistance);
        }
        if target as usize <= self.kernel.len() {
            for _ in 0..PICK_ATTEMPTS {
                let h = self.kernel.member_flip(rng, target);
                if self.kernel.nearest(h).0 == target {
                    return Ok(h);
                }
            }
            for _ in 0..PICK_ATTEMPTS {
                match self.anchors.draw(&self.kernel, rng, target) {
                    Some(h) if self.kernel.nearest(h).0 == target => return Ok(h),
                    Some(_) => {}
                    None => break,
                }
            }
        }
        Err(Error::UnreachableDistance { distance: target })
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        match self.config.bob {
            BobStrategy::AtDistance(d) => self.pick_at(rng, d),
            BobStrategy::Pivot => self.pick_at(rng, pivot_distance(self.arity())),
            BobStrategy::UniformRandom => {
                for _ in 0..PICK_ATTEMPTS {
                    let h = rng.random::<u64>() & self.kernel.mask();
                    if self.kernel.nearest(h).0 > 0 {
                        return Ok(h);
                    }
                }
                Err(Error::UnreachableDistance { distance: 0 })
            }
        }
    }

    /// Bob's function with its exact nearest set.
    pub fn bob_pick(&self, seed: u64) -> Result<(PatternVector, NearestSet)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = self.pick(&mut rng)?;
        let (distance, nearest) = self.kernel.nearest(h);
        let set = crate::experiment::Evaluation {
            distance,
            nearest,
            theta_units: 0,
        }
        .nearest_set();
        Ok((self.kernel.vector(h), set))
    }

    pub fn alice_answer(&self, distance: u32) -> Result<bool> {
        match self.config.alice {
            AliceStrategy::IntervalThreshold => alice_interval_decide(distance, self.arity(), self.rho),
            AliceStrategy::AlwaysYes => Ok(true),
            AliceStrategy::AlwaysNo => Ok(false),
        }
    }

    /// Plays one round entirely determined by `seed`.
    pub fn play_round(&self, seed: u64) -> Result<RoundRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = self.pick(&mut rng)?;
        let mut scratch = Vec::with_capacity(self.kernel.len());
        let eval = self.kernel.evaluate(h, &mut scratch);
        let scale = (self.kernel.len() * self.kernel.len()) as f64;
        let distribution = OutcomeDistribution {
            probs: scratch.iter().map(|w| f64::from(w * w) / scale).collect(),
        };
        let outcome = distribution.sample(rng.random::<f64>());
        let ground_truth = eval.nearest >> outcome & 1 == 1;
        let alice_answer = self.alice_answer(eval.distance)?;
        Ok(RoundRecord {
            seed,
            function: self.kernel.vector(h),
            distance: eval.distance,
            outcome,
            ground_truth,
            alice_answer,
            winner: if alice_answer == ground_truth {
                Winner::Alice
            } else {
                Winner::Bob
            },
        })
    }

    /// Runs `trials` rounds in parallel with per-round seeds derived from the
    /// master seed. Results do not depend on the worker count.
    pub fn simulate(&self) -> Result<(WinRate, Vec<RoundRecord>)> {
        if self.config.trials == 0 {
            return Err(Error::NoTrials);
        }
        let rounds = (0..self.config.trials)
            .into_par_iter()
            .map(|i| self.play_round(round_seed(self.config.seed, i)))
            .collect::<Result<Vec<_>>>()?;
        let wins = rounds.iter().filter(|r| r.winner == Winner::Alice).count() as u64;
        Ok((WinRate::from_counts(wins, self.config.trials), rounds))
    }

    pub fn estimate_win_rate(&self) -> Result<WinRate> {
        if self.config.trials == 0 {
            return Err(Error::NoTrials);
        }
        let wins = (0..self.config.trials)
            .into_par_iter()
            .map(|i| {
                self.play_round(round_seed(self.config.seed, i))
                    .map(|r| u64::from(r.winner == Winner::Alice))
            })
            .sum::<Result<u64>>()?;
        Ok(WinRate::from_counts(wins, self.config.trials))
    }
}

/// SplitMix64 finalizer over `master + (index + 1) * golden`.
pub fn round_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn bob_pick(recipe: &Recipe, strategy: BobStrategy, seed: u64) -> Result<(PatternVector, NearestSet)> {
    Game::new(GameConfig {
        recipe: recipe.clone(),
        bob: strategy,
        alice: AliceStrategy::IntervalThreshold,
        trials: 1,
        seed,
    })?
    .bob_pick(seed)
}

pub fn play_round(config: &GameConfig, round_seed: u64) -> Result<RoundRecord> {
    Game::new(config.clone())?.play_round(round_seed)
}

pub fn estimate_win_rate(config: &GameConfig) -> Result<WinRate> {
    Game::new(config.clone())?.estimate_win_rate()
}
