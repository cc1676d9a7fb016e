use rand::seq::index::sample;
use rand::Rng;

use crate::basis::{NearestSet, PatternBasis, Recipe};
use crate::classifier::{scaled_transform, ClassifierSpec};
use crate::error::Result;
use crate::pattern::{length_mask, PatternVector};

/// One evaluated function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Evaluation {
    pub distance: u32,
    /// Bit `k` set when member `k` is a nearest neighbor.
    pub nearest: u64,
    /// Threshold in units of `4^-n`.
    pub theta_units: u32,
}

impl Evaluation {
    pub fn nearest_set(&self) -> NearestSet {
        NearestSet {
            distance: self.distance,
            indices: (0..64).filter(|k| self.nearest >> k & 1 == 1).collect(),
        }
    }
}

/// Packed basis plus classifier; evaluates thresholds with the exact integer
/// transform.
#[derive(Clone, Debug)]
pub(crate) struct Kernel {
    pub basis: PatternBasis,
    pub spec: ClassifierSpec,
    pub members: Vec<u64>,
    pub arity: u8,
}

impl Kernel {
    pub fn new(recipe: &Recipe) -> Result<Self> {
        let basis = PatternBasis::from_recipe(recipe)?;
        let spec = ClassifierSpec::new(recipe.clone());
        let members = basis.members().iter().map(|m| m.bits()).collect();
        Ok(Self {
            arity: basis.rank(),
            basis,
            spec,
            members,
        })
    }

    pub fn len(&self) -> usize {
        1usize << self.arity
    }

    pub fn mask(&self) -> u64 {
        length_mask(self.arity)
    }

    pub fn vector(&self, bits: u64) -> PatternVector {
        PatternVector::from_bits_unchecked(self.arity, bits)
    }

    pub fn nearest(&self, h: u64) -> (u32, u64) {
        let mut best = u32::MAX;
        let mut mask = 0u64;
        for (k, m) in self.members.iter().enumerate() {
            let d = (m ^ h).count_ones();
            if d < best {
                best = d;
                mask = 1 << k;
            } else if d == best {
                mask |= 1 << k;
            }
        }
        (best, mask)
    }

    /// Exact spectrum: entry `k` squared over `4^n` is the probability of ket `k`.
    pub fn spectrum(&self, h: u64, scratch: &mut Vec<i32>) {
        scratch.clear();
        scratch.extend((0..self.len()).map(|i| if h >> i & 1 == 1 { -1 } else { 1 }));
        scaled_transform(&self.spec, scratch);
    }

    pub fn evaluate(&self, h: u64, scratch: &mut Vec<i32>) -> Evaluation {
        let (distance, nearest) = self.nearest(h);
        self.spectrum(h, scratch);
        let theta_units = scratch
            .iter()
            .enumerate()
            .filter(|(k, _)| nearest >> k & 1 == 1)
            .map(|(_, w)| (w * w) as u32)
            .sum();
        Evaluation {
            distance,
            nearest,
            theta_units,
        }
    }

    /// Deterministic probe functions with their class distance: all-ones,
    /// all-zeros and the complement of every member.
    pub fn probes(&self) -> Vec<(String, u64)> {
        let mut out = vec![
            ("all-ones".to_string(), self.mask()),
            ("all-zeros".to_string(), 0),
        ];
        out.extend(
            self.members
                .iter()
                .enumerate()
                .map(|(k, m)| (format!("complement-{k}"), !m & self.mask())),
        );
        out
    }

    fn random_flips<R: Rng + ?Sized>(&self, rng: &mut R, count: u32) -> u64 {
        sample(rng, self.len(), count as usize)
            .iter()
            .fold(0u64, |acc, i| acc | 1 << i)
    }

    /// A uniformly random member with a uniformly random `flips`-subset of
    /// its bits flipped.
    pub fn member_flip<R: Rng + ?Sized>(&self, rng: &mut R, flips: u32) -> u64 {
        let k = rng.random_range(0..self.members.len());
        self.members[k] ^ self.random_flips(rng, flips)
    }
}

/// Flip sampler anchored at probe functions. Covers distances near `2^(n-1)`
/// and near the all-ones distance, which flips from a member rarely reach.
#[derive(Clone, Debug)]
pub(crate) struct AnchoredSampler {
    anchors: Vec<(u64, u32)>,
}

impl AnchoredSampler {
    pub fn new(kernel: &Kernel) -> Self {
        let mut anchors: Vec<(u64, u32)> = kernel
            .probes()
            .into_iter()
            .map(|(_, bits)| (bits, kernel.nearest(bits).0))
            .filter(|(_, d)| *d > 0)
            .collect();
        anchors.sort_unstable();
        anchors.dedup();
        Self { anchors }
    }

    /// Picks an anchor at class distance at least `target` and flips
    /// `distance - target` random bits of it.
    pub fn draw<R: Rng + ?Sized>(&self, kernel: &Kernel, rng: &mut R, target: u32) -> Option<u64> {
        let eligible: Vec<&(u64, u32)> = self.anchors.iter().filter(|(_, d)| *d >= target).collect();
        if eligible.is_empty() {
            return None;
        }
        let (bits, d) = *eligible[rng.random_range(0..eligible.len())];
        Some(bits ^ kernel.random_flips(rng, d - target))
    }
}
