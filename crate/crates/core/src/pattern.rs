//! Pattern bit vectors: the truth table of a Boolean function `f: B^n -> B`
//! packed into a single machine word.
//!
//! Bit `i` of the word holds `f(i)`. The textual form is MSB-first, so the
//! string `0001` has only bit 0 set and describes the function that is 1 on
//! input `00` and 0 elsewhere.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported arity. Vectors are at most 64 bits long.
pub const MAX_ARITY: u8 = 6;

#[inline]
pub(crate) fn length_mask(arity: u8) -> u64 {
    let len = 1u32 << arity;
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// A length-`2^n` bit sequence encoding a Boolean function of arity `n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PatternVector {
    bits: u64,
    arity: u8,
}

impl PatternVector {
    /// Builds a vector of arity `arity` from the low `2^arity` bits of `bits`.
    pub fn from_bits(arity: u8, bits: u64) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::BadLength(1usize << arity.min(63)));
        }
        if bits & !length_mask(arity) != 0 {
            return Err(Error::Parse {
                input: format!("{bits:#x}"),
                reason: format!("bits set beyond length {}", 1u32 << arity),
            });
        }
        Ok(Self { bits, arity })
    }

    pub(crate) fn from_bits_unchecked(arity: u8, bits: u64) -> Self {
        debug_assert!(arity >= 1 && arity <= MAX_ARITY);
        debug_assert_eq!(bits & !length_mask(arity), 0);
        Self { bits, arity }
    }

    /// Builds a vector from `bits[i] = f(i)`.
    pub fn from_values(values: &[bool]) -> Result<Self> {
        let arity = arity_for_len(values.len())?;
        let bits = values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i));
        Ok(Self { bits, arity })
    }

    pub fn zeros(arity: u8) -> Result<Self> {
        Self::from_bits(arity, 0)
    }

    pub fn ones(arity: u8) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::BadLength(1usize << arity.min(63)));
        }
        Ok(Self {
            bits: length_mask(arity),
            arity,
        })
    }

    #[inline]
    pub fn arity(&self) -> u8 {
        self.arity
    }

    #[inline]
    pub fn len(&self) -> usize {
        1usize << self.arity
    }

    /// Always false; a pattern vector has at least two bits.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Raw packed bits, index `i` at bit `i`.
    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Value `f(index)`.
    pub fn get(&self, index: usize) -> Result<bool> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(self.bit(index))
    }

    #[inline]
    pub(crate) fn bit(&self, index: usize) -> bool {
        (self.bits >> index) & 1 == 1
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn count_zeros(&self) -> u32 {
        self.len() as u32 - self.count_ones()
    }

    /// Pattern vector of the negated function.
    pub fn negate(&self) -> Self {
        Self {
            bits: !self.bits & length_mask(self.arity),
            arity: self.arity,
        }
    }

    /// Copy with the bit at `index` flipped.
    pub fn with_flipped(&self, index: usize) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(Self {
            bits: self.bits ^ (1u64 << index),
            arity: self.arity,
        })
    }

    /// Iterates `f(0), f(1), ...`.
    pub fn values(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }
}

pub(crate) fn arity_for_len(len: usize) -> Result<u8> {
    if len < 2 || len > 64 || !len.is_power_of_two() {
        return Err(Error::BadLength(len));
    }
    Ok(len.trailing_zeros() as u8)
}

/// Number of positions where `a` and `b` differ.
pub fn hamming_distance(a: &PatternVector, b: &PatternVector) -> Result<u32> {
    if a.arity != b.arity {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok((a.bits ^ b.bits).count_ones())
}

/// The `⊙` product: block `i` of the result is `q` when `p[i] = 0` and the
/// negation of `q` when `p[i] = 1`, so bit `j + i*|q|` equals `p[i] ^ q[j]`.
pub fn pattern_product(p: &PatternVector, q: &PatternVector) -> Result<PatternVector> {
    let arity = p.arity + q.arity;
    if arity > MAX_ARITY {
        return Err(Error::RankCap {
            rank: u32::from(arity),
            cap: u32::from(MAX_ARITY),
        });
    }
    let block = q.len();
    let flipped = q.negate().bits;
    let bits = (0..p.len()).fold(0u64, |acc, i| {
        let chunk = if p.bit(i) { flipped } else { q.bits };
        acc | (chunk << (i * block))
    });
    Ok(PatternVector::from_bits_unchecked(arity, bits))
}

/// Evaluates the extended product `f_p ★ g_q` at `index` without building
/// the product vector. The index splits as `j + i*|q|` with `j < |q|`.
pub fn extended_product_eval(p: &PatternVector, q: &PatternVector, index: usize) -> Result<bool> {
    let len = p.len() * q.len();
    if index >= len {
        return Err(Error::IndexOutOfRange { index, len });
    }
    let (i, j) = (index / q.len(), index % q.len());
    Ok(q.bit(j) ^ p.bit(i))
}

/// Every vector within Hamming distance `radius` of `center`, in order of
/// increasing distance and then lexicographic order of the flipped index set.
pub fn enumerate_neighborhood(
    center: &PatternVector,
    radius: usize,
) -> Result<impl Iterator<Item = PatternVector>> {
    let len = center.len();
    if radius > len {
        return Err(Error::RadiusTooLarge { radius, len });
    }
    let center = *center;
    Ok((0..=radius).flat_map(move |k| {
        (0..len).combinations(k).map(move |flips| {
            let mask = flips.iter().fold(0u64, |m, &i| m | (1u64 << i));
            PatternVector::from_bits_unchecked(center.arity, center.bits ^ mask)
        })
    }))
}

impl fmt::Display for PatternVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len()).rev() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for PatternVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PatternVector({self})")
    }
}

impl FromStr for PatternVector {
    type Err = Error;

    /// Parses MSB-first `0`/`1` text. Whitespace and `_` act as group
    /// separators and are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let digits: Vec<char> = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .collect();
        if let Some(bad) = digits.iter().find(|c| **c != '0' && **c != '1') {
            return Err(Error::Parse {
                input: s.to_string(),
                reason: format!("unexpected character {bad:?}"),
            });
        }
        let arity = arity_for_len(digits.len()).map_err(|_| Error::Parse {
            input: s.to_string(),
            reason: format!("length {} is not a power of two in 2..=64", digits.len()),
        })?;
        let bits = digits
            .iter()
            .rev()
            .enumerate()
            .fold(0u64, |acc, (i, c)| acc | (u64::from(*c == '1') << i));
        Ok(Self { bits, arity })
    }
}

impl TryFrom<String> for PatternVector {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<PatternVector> for String {
    fn from(value: PatternVector) -> Self {
        value.to_string()
    }
}
