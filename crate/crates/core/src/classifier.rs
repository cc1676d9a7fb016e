//! Classifiers `G = G_{m-1} ⊗ ... ⊗ G_0` built from `H` and `C2` factors, and
//! the exact outcome distributions they produce.
//!
//! The oracle and the `|->` output register are folded into a sign vector:
//! after the initial Hadamard layer and the phase oracle the input register
//! holds `2^(-n/2) * (-1)^f(x)`. Every operator involved is real, so states
//! are plain `f64` vectors.
//!
//! The fast path applies each factor as an in-place butterfly over its index
//! bits. [`dense_unitary`] builds the full Kronecker product for reference.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::{distance_from_class, Factor, NearestSet, PatternBasis, Recipe};
use crate::error::{Error, Result};
use crate::pattern::PatternVector;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Classifier recipe: `H` on one index bit for every `B1` factor, `C2` on two
/// adjacent index bits for every `Q2` factor. The leftmost factor owns the
/// most significant bits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassifierSpec {
    recipe: Recipe,
}

impl ClassifierSpec {
    pub fn new(recipe: Recipe) -> Self {
        Self { recipe }
    }

    /// Classifier paired with a recipe-built basis.
    pub fn for_basis(basis: &PatternBasis) -> Result<Self> {
        basis
            .recipe()
            .cloned()
            .map(Self::new)
            .ok_or(Error::MissingRecipe)
    }

    pub fn recipe(&self) -> &Recipe {
        &self.recipe
    }

    pub fn total_bits(&self) -> u32 {
        self.recipe.rank()
    }

    pub fn dimension(&self) -> usize {
        1usize << self.total_bits()
    }

    /// `(factor, lowest index bit)` pairs, rightmost factor first.
    pub fn placements(&self) -> impl Iterator<Item = (Factor, u32)> + '_ {
        let mut low = 0;
        self.recipe.factors().iter().rev().map(move |f| {
            let at = low;
            low += f.rank();
            (*f, at)
        })
    }
}

impl std::fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.recipe.fmt(f)
    }
}

/// Real amplitude vector of length `2^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeVector(Vec<f64>);

impl AmplitudeVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 || !entries.len().is_power_of_two() {
            return Err(Error::BadLength(entries.len()));
        }
        Ok(Self(entries))
    }

    /// Basis ket `|index>` in dimension `dim`.
    pub fn basis_ket(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, len: dim });
        }
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Self::new(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> u32 {
        self.0.len().trailing_zeros()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// State of the input register after the Hadamard layer and the phase oracle:
/// entry `x` is `2^(-n/2)` with sign `(-1)^h(x)`.
pub fn initial_amplitudes(h: &PatternVector) -> AmplitudeVector {
    let scale = (h.len() as f64).sqrt().recip();
    AmplitudeVector(
        h.values()
            .map(|b| if b { -scale } else { scale })
            .collect(),
    )
}

/// In-place `H` butterfly on index bit `bit`.
pub fn apply_hadamard_factor(v: &mut AmplitudeVector, bit: u32) -> Result<()> {
    if bit >= v.bits() {
        return Err(Error::IndexOutOfRange {
            index: bit as usize,
            len: v.bits() as usize,
        });
    }
    hadamard_butterfly(&mut v.0, bit, |a, b| {
        ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
    });
    Ok(())
}

/// In-place `C2` on index bits `low_bit` and `low_bit + 1`: each entry of an
/// aligned 4-block becomes `S/2 - entry`, `S` the block sum. This is the
/// matrix with `-1/2` on the diagonal and `1/2` elsewhere.
pub fn apply_c2_factor(v: &mut AmplitudeVector, low_bit: u32) -> Result<()> {
    if low_bit + 2 > v.bits() {
        return Err(Error::IndexOutOfRange {
            index: low_bit as usize + 1,
            len: v.bits() as usize,
        });
    }
    c2_block(&mut v.0, low_bit, |s, e| 0.5 * s - e);
    Ok(())
}

/// Applies every factor of `spec` to `v` in place.
pub fn apply_classifier(spec: &ClassifierSpec, v: &mut AmplitudeVector) -> Result<()> {
    if v.len() != spec.dimension() {
        return Err(Error::LengthMismatch {
            left: spec.dimension(),
            right: v.len(),
        });
    }
    for (factor, low) in spec.placements() {
        match factor {
            Factor::B1 => apply_hadamard_factor(v, low)?,
            Factor::Q2 => apply_c2_factor(v, low)?,
        }
    }
    Ok(())
}

#[inline]
fn hadamard_butterfly<T: Copy>(data: &mut [T], bit: u32, op: impl Fn(T, T) -> (T, T)) {
    let stride = 1usize << bit;
    for base in (0..data.len()).step_by(stride << 1) {
        for i in base..base + stride {
            let (a, b) = op(data[i], data[i + stride]);
            data[i] = a;
            data[i + stride] = b;
        }
    }
}

#[inline]
fn c2_block<T>(data: &mut [T], low_bit: u32, op: impl Fn(T, T) -> T)
where
    T: Copy + std::ops::Add<Output = T>,
{
    let s = 1usize << low_bit;
    for base in (0..data.len()).step_by(s << 2) {
        for i in base..base + s {
            let (w, x, y, z) = (data[i], data[i + s], data[i + 2 * s], data[i + 3 * s]);
            let sum = w + x + y + z;
            data[i] = op(sum, w);
            data[i + s] = op(sum, x);
            data[i + 2 * s] = op(sum, y);
            data[i + 3 * s] = op(sum, z);
        }
    }
}

/// Integer image of the classifier output scaled by `2^n`.
///
/// Runs the same butterflies on the `±1` sign vector with `H` replaced by
/// `(a+b, a-b)` and `C2` by `S - 2e`. The result `w` satisfies
/// `amplitude = w / 2^n` exactly, so outcome probabilities are `w^2 / 4^n`.
pub fn scaled_spectrum(spec: &ClassifierSpec, h: &PatternVector, out: &mut Vec<i32>) -> Result<()> {
    if h.len() != spec.dimension() {
        return Err(Error::LengthMismatch {
            left: spec.dimension(),
            right: h.len(),
        });
    }
    out.clear();
    out.extend(h.values().map(|b| if b { -1 } else { 1 }));
    scaled_transform(spec, out);
    Ok(())
}

pub(crate) fn scaled_transform(spec: &ClassifierSpec, data: &mut [i32]) {
    for (factor, low) in spec.placements() {
        match factor {
            Factor::B1 => hadamard_butterfly(data, low, |a, b| (a + b, a - b)),
            Factor::Q2 => c2_block(data, low, |s, e| s - 2 * e),
        }
    }
}

/// Dense `2^n x 2^n` matrix of the classifier, assembled as the Kronecker
/// product of the explicit `H` and `C2` matrices.
pub fn dense_unitary(spec: &ClassifierSpec) -> DMatrix<f64> {
    spec.recipe()
        .factors()
        .iter()
        .fold(DMatrix::<f64>::identity(1, 1), |acc, f| {
            acc.kronecker(&elementary_matrix(*f))
        })
}

/// Explicit matrix of one factor.
pub fn elementary_matrix(factor: Factor) -> DMatrix<f64> {
    match factor {
        Factor::B1 => DMatrix::from_row_slice(
            2,
            2,
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        ),
        Factor::Q2 => DMatrix::from_fn(4, 4, |r, c| if r == c { -0.5 } else { 0.5 }),
    }
}

/// Measurement probabilities over basis kets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn from_amplitudes(v: &AmplitudeVector) -> Self {
        Self {
            probs: v.as_slice().iter().map(|a| a * a).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index and value of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> (usize, f64) {
        self.probs
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, p)| {
                if p > best.1 {
                    (i, p)
                } else {
                    best
                }
            })
    }

    /// Total probability of the listed outcomes.
    pub fn mass(&self, indices: &[usize]) -> f64 {
        indices.iter().map(|&i| self.probs[i]).sum()
    }

    /// Inverse-CDF draw for a uniform `u` in `[0, 1)`.
    pub fn sample(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            if u < acc {
                return i;
            }
        }
        last_nonzero
    }
}

pub fn outcome_distribution(spec: &ClassifierSpec, h: &PatternVector) -> Result<OutcomeDistribution> {
    let mut v = initial_amplitudes(h);
    apply_classifier(spec, &mut v)?;
    Ok(OutcomeDistribution::from_amplitudes(&v))
}

/// Classification threshold of `h`: the probability that the measured ket is
/// one of its nearest basis kets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub theta: f64,
    pub nearest: NearestSet,
    pub distribution: OutcomeDistribution,
}

pub fn classification_threshold(
    spec: &ClassifierSpec,
    basis: &PatternBasis,
    h: &PatternVector,
) -> Result<ThresholdReport> {
    let basis_recipe = basis.recipe().ok_or(Error::MissingRecipe)?;
    if basis_recipe != spec.recipe() {
        return Err(Error::RecipeMismatch {
            classifier: spec.recipe().to_string(),
            basis: basis_recipe.to_string(),
        });
    }
    let nearest = distance_from_class(basis, h)?;
    let distribution = outcome_distribution(spec, h)?;
    let theta = distribution.mass(&nearest.indices).clamp(0.0, 1.0);
    Ok(ThresholdReport {
        theta,
        nearest,
        distribution,
    })
}
