//! Pattern bases, the recipes that build them, and nearest-neighbor queries
//! against the function class a basis represents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{hamming_distance, pattern_product, PatternVector, MAX_ARITY};

/// An elementary basis factor.
///
/// `B1 = (00, 01)` pairs with the Hadamard transform `H`; `Q2 = (0001, 0010,
/// 0100, 1000)` pairs with the four-dimensional `C2` transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Factor {
    B1,
    Q2,
}

impl Factor {
    /// Number of index bits the factor spans.
    pub fn rank(self) -> u32 {
        match self {
            Factor::B1 => 1,
            Factor::Q2 => 2,
        }
    }

    /// Name of the classifier transform paired with this factor.
    pub fn gate_name(self) -> &'static str {
        match self {
            Factor::B1 => "H",
            Factor::Q2 => "C2",
        }
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "H" | "h" | "B1" | "b1" => Ok(Factor::B1),
            "C2" | "c2" | "Q2" | "q2" => Ok(Factor::Q2),
            other => Err(Error::UnknownFactor(other.to_string())),
        }
    }
}

/// Ordered factor list, leftmost factor most significant.
///
/// The text form is comma separated classifier names, e.g. `H,C2,H`. The same
/// string identifies a basis, its function class and its classifier.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Recipe(Vec<Factor>);

impl Recipe {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyRecipe);
        }
        let recipe = Recipe(factors);
        let rank = recipe.rank();
        if rank > u32::from(MAX_ARITY) {
            return Err(Error::RankCap {
                rank,
                cap: u32::from(MAX_ARITY),
            });
        }
        Ok(recipe)
    }

    pub fn factors(&self) -> &[Factor] {
        &self.0
    }

    pub fn rank(&self) -> u32 {
        self.0.iter().map(|f| f.rank()).sum()
    }

    /// All recipes whose total rank is exactly `rank`, in lexicographic order
    /// with `H` before `C2`.
    pub fn all_of_rank(rank: u32) -> Vec<Recipe> {
        fn go(left: u32, prefix: &mut Vec<Factor>, out: &mut Vec<Recipe>) {
            if left == 0 {
                out.push(Recipe(prefix.clone()));
                return;
            }
            for f in [Factor::B1, Factor::Q2] {
                if f.rank() <= left {
                    prefix.push(f);
                    go(left - f.rank(), prefix, out);
                    prefix.pop();
                }
            }
        }
        let mut out = Vec::new();
        if rank >= 1 && rank <= u32::from(MAX_ARITY) {
            go(rank, &mut Vec::new(), &mut out);
        }
        out
    }

    /// Every recipe of total rank 1 through `max_rank`.
    pub fn all_up_to_rank(max_rank: u32) -> Vec<Recipe> {
        (1..=max_rank).flat_map(Recipe::all_of_rank).collect()
    }

    /// True when every factor is `Q2`.
    pub fn is_pure_q2(&self) -> bool {
        self.0.iter().all(|f| *f == Factor::Q2)
    }

    fn concat(&self, other: &Recipe) -> Recipe {
        Recipe(self.0.iter().chain(&other.0).copied().collect())
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|x| x.gate_name()).collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(Error::EmptyRecipe);
        }
        let factors = s
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Factor>>>()?;
        Recipe::new(factors)
    }
}

impl TryFrom<String> for Recipe {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<Recipe> for String {
    fn from(value: Recipe) -> Self {
        value.to_string()
    }
}

/// Why a candidate member list is not a pattern basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisViolation {
    Empty,
    CountNotPowerOfTwo { count: usize },
    CountLengthMismatch { count: usize, length: usize },
    MemberLength { index: usize, length: usize, expected: usize },
    Orthogonality { first: usize, second: usize, weight: u32, expected: u32 },
}

impl fmt::Display for BasisViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasisViolation::Empty => write!(f, "no members"),
            BasisViolation::CountNotPowerOfTwo { count } => {
                write!(f, "member count {count} is not a power of two")
            }
            BasisViolation::CountLengthMismatch { count, length } => {
                write!(f, "{count} members of length {length}")
            }
            BasisViolation::MemberLength {
                index,
                length,
                expected,
            } => write!(f, "member {index} has length {length}, expected {expected}"),
            BasisViolation::Orthogonality {
                first,
                second,
                weight,
                expected,
            } => write!(
                f,
                "members ({first},{second}) XOR weight {weight} != {expected}"
            ),
        }
    }
}

/// Checks the pattern basis conditions: `2^n` members of length `2^n`, and
/// every pair differing in exactly `2^(n-1)` positions. Reports the first
/// offending pair in `(i, j)` lexicographic order.
pub fn validate_basis(members: &[PatternVector]) -> std::result::Result<(), BasisViolation> {
    let count = members.len();
    if count == 0 {
        return Err(BasisViolation::Empty);
    }
    if !count.is_power_of_two() {
        return Err(BasisViolation::CountNotPowerOfTwo { count });
    }
    let length = members[0].len();
    if count != length {
        return Err(BasisViolation::CountLengthMismatch { count, length });
    }
    if let Some((index, m)) = members.iter().enumerate().find(|(_, m)| m.len() != length) {
        return Err(BasisViolation::MemberLength {
            index,
            length: m.len(),
            expected: length,
        });
    }
    let expected = (length / 2) as u32;
    for i in 0..count {
        for j in i + 1..count {
            let weight = (members[i].bits() ^ members[j].bits()).count_ones();
            if weight != expected {
                return Err(BasisViolation::Orthogonality {
                    first: i,
                    second: j,
                    weight,
                    expected,
                });
            }
        }
    }
    Ok(())
}

/// A validated pattern basis of rank `n`: `2^n` pairwise-orthogonal members.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternBasis {
    members: Vec<PatternVector>,
    recipe: Option<Recipe>,
    rank: u8,
}

impl PatternBasis {
    /// Accepts an arbitrary member list that passes [`validate_basis`]. Such a
    /// basis carries no recipe and therefore has no classifier.
    pub fn from_members(members: Vec<PatternVector>) -> Result<Self> {
        validate_basis(&members).map_err(Error::InvalidBasis)?;
        let rank = members[0].arity();
        Ok(Self {
            members,
            recipe: None,
            rank,
        })
    }

    pub fn builtin(factor: Factor) -> Self {
        let members: Vec<PatternVector> = match factor {
            Factor::B1 => [0b00, 0b01]
                .iter()
                .map(|&b| PatternVector::from_bits_unchecked(1, b))
                .collect(),
            Factor::Q2 => [0b0001, 0b0010, 0b0100, 0b1000]
                .iter()
                .map(|&b| PatternVector::from_bits_unchecked(2, b))
                .collect(),
        };
        Self {
            rank: factor.rank() as u8,
            members,
            recipe: Some(Recipe(vec![factor])),
        }
    }

    /// Left fold of [`basis_product`] over the recipe, leftmost factor
    /// outermost.
    pub fn from_recipe(recipe: &Recipe) -> Result<Self> {
        let (first, rest) = recipe.factors().split_first().ok_or(Error::EmptyRecipe)?;
        rest.iter().try_fold(Self::builtin(*first), |acc, f| {
            basis_product(&acc, &Self::builtin(*f))
        })
    }

    pub fn members(&self) -> &[PatternVector] {
        &self.members
    }

    pub fn member(&self, index: usize) -> Option<&PatternVector> {
        self.members.get(index)
    }

    pub fn recipe(&self) -> Option<&Recipe> {
        self.recipe.as_ref()
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    /// Member length, equal to the member count.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of `h` in the basis, if it is a member.
    pub fn position(&self, h: &PatternVector) -> Option<usize> {
        self.members.iter().position(|m| m == h)
    }

    /// Serializes as the recipe line followed by one member per line.
    pub fn to_text(&self) -> String {
        let mut out = match &self.recipe {
            Some(r) => format!("{r}\n"),
            None => "-\n".to_string(),
        };
        for m in &self.members {
            out.push_str(&m.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) form. A recipe line must agree
    /// with the members that follow it; `-` marks a recipe-less basis.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or(Error::InvalidBasis(BasisViolation::Empty))?;
        let members = lines.map(str::parse).collect::<Result<Vec<PatternVector>>>()?;
        let mut basis = Self::from_members(members)?;
        if header != "-" {
            let recipe: Recipe = header.parse()?;
            let built = Self::from_recipe(&recipe)?;
            if built.members != basis.members {
                return Err(Error::RecipeMismatch {
                    classifier: recipe.to_string(),
                    basis: "listed members".to_string(),
                });
            }
            basis.recipe = Some(recipe);
        }
        Ok(basis)
    }
}

/// Product basis: the member at position `a * |Q| + b` is `P[a] ⊙ Q[b]`.
pub fn basis_product(p: &PatternBasis, q: &PatternBasis) -> Result<PatternBasis> {
    validate_basis(&p.members).map_err(Error::InvalidBasis)?;
    validate_basis(&q.members).map_err(Error::InvalidBasis)?;
    let rank = p.rank + q.rank;
    if rank > MAX_ARITY {
        return Err(Error::RankCap {
            rank: u32::from(rank),
            cap: u32::from(MAX_ARITY),
        });
    }
    let members = p
        .members
        .iter()
        .flat_map(|a| q.members.iter().map(move |b| pattern_product(a, b)))
        .collect::<Result<Vec<_>>>()?;
    let recipe = match (&p.recipe, &q.recipe) {
        (Some(a), Some(b)) => Some(a.concat(b)),
        _ => None,
    };
    Ok(PatternBasis {
        members,
        recipe,
        rank,
    })
}

/// Minimum Hamming distance from `h` to a class, with every member index
/// attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NearestSet {
    pub distance: u32,
    pub indices: Vec<usize>,
}

impl NearestSet {
    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }
}

pub fn distance_from_class(basis: &PatternBasis, h: &PatternVector) -> Result<NearestSet> {
    let distances = basis
        .members
        .iter()
        .map(|m| hamming_distance(m, h))
        .collect::<Result<Vec<u32>>>()?;
    let distance = *distances.iter().min().expect("bases are non-empty");
    let indices = distances
        .iter()
        .enumerate()
        .filter(|(_, d)| **d == distance)
        .map(|(i, _)| i)
        .collect();
    Ok(NearestSet { distance, indices })
}

/// Common zero count of the members, or `None` when members differ.
pub fn class_rho(basis: &PatternBasis) -> Option<u32> {
    let first = basis.members.first()?.count_zeros();
    basis
        .members
        .iter()
        .all(|m| m.count_zeros() == first)
        .then_some(first)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(s: &str) -> PatternVector {
        s.parse().unwrap()
    }

    fn recipe(s: &str) -> Recipe {
        s.parse().unwrap()
    }

    #[test]
    fn builtin_members() {
        let b1 = PatternBasis::builtin(Factor::B1);
        assert_eq!(b1.members(), &[pv("00"), pv("01")]);
        assert_eq!(b1.rank(), 1);
        let q2 = PatternBasis::builtin(Factor::Q2);
        assert_eq!(q2.members(), &[pv("0001"), pv("0010"), pv("0100"), pv("1000")]);
        assert!(validate_basis(q2.members()).is_ok());
        assert!(validate_basis(b1.members()).is_ok());
    }

    #[test]
    fn q4_matches_listed_vectors() {
        let q4 = PatternBasis::from_recipe(&recipe("C2,C2")).unwrap();
        let expected = [
            "0001000100011110",
            "0010001000101101",
            "0100010001001011",
            "1000100010000111",
            "0001000111100001",
            "0010001011010010",
            "0100010010110100",
            "1000100001111000",
            "0001111000010001",
            "0010110100100010",
            "0100101101000100",
            "1000011110001000",
            "1110000100010001",
            "1101001000100010",
            "1011010001000100",
            "0111100010001000",
        ];
        let got: Vec<String> = q4.members().iter().map(|m| m.to_string()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn b1_squared_by_hand() {
        // (00 ⊙ 00, 00 ⊙ 01, 01 ⊙ 00, 01 ⊙ 01) expanded by hand.
        let b = PatternBasis::from_recipe(&recipe("H,H")).unwrap();
        assert_eq!(b.members(), &[pv("0000"), pv("0101"), pv("0011"), pv("0110")]);
    }

    #[test]
    fn recipe_builds() {
        let b = PatternBasis::from_recipe(&recipe("H,C2")).unwrap();
        assert_eq!((b.rank(), b.len(), b.members()[0].len()), (3, 8, 8));
        let b = PatternBasis::from_recipe(&recipe("C2,C2,C2")).unwrap();
        assert_eq!((b.rank(), b.len()), (6, 64));
        assert_eq!(
            PatternBasis::from_recipe(&recipe("H")).unwrap(),
            PatternBasis::builtin(Factor::B1)
        );
        assert!(validate_basis(PatternBasis::from_recipe(&recipe("H,C2")).unwrap().members()).is_ok());
    }

    #[test]
    fn recipe_errors() {
        assert_eq!("".parse::<Recipe>(), Err(Error::EmptyRecipe));
        assert!(matches!("C2,C2,C2,H".parse::<Recipe>(), Err(Error::RankCap { rank: 7, .. })));
        assert!(matches!("H,X".parse::<Recipe>(), Err(Error::UnknownFactor(_))));
        assert_eq!(recipe("B1,Q2, H").to_string(), "H,C2,H");
    }

    #[test]
    fn validate_reports_violations() {
        assert!(validate_basis(&[pv("00"), pv("01")]).is_ok());
        assert_eq!(
            validate_basis(&[pv("00"), pv("11")]),
            Err(BasisViolation::Orthogonality {
                first: 0,
                second: 1,
                weight: 2,
                expected: 1
            })
        );
        assert_eq!(
            validate_basis(&[pv("0001"), pv("0010"), pv("0100"), pv("1110")]),
            Err(BasisViolation::Orthogonality {
                first: 0,
                second: 3,
                weight: 4,
                expected: 2
            })
        );
        assert_eq!(
            validate_basis(&[pv("0001"), pv("0010")]),
            Err(BasisViolation::CountLengthMismatch { count: 2, length: 4 })
        );
        assert_eq!(validate_basis(&[]), Err(BasisViolation::Empty));
    }

    #[test]
    fn product_rejects_invalid_input() {
        let bad = PatternBasis {
            members: vec![pv("00"), pv("11")],
            recipe: None,
            rank: 1,
        };
        let ok = PatternBasis::builtin(Factor::B1);
        assert!(matches!(basis_product(&bad, &ok), Err(Error::InvalidBasis(_))));
    }

    #[test]
    fn distance_examples() {
        let q4 = PatternBasis::from_recipe(&recipe("C2,C2")).unwrap();
        let g = pv("0000000100011110");
        assert_eq!(
            distance_from_class(&q4, &g).unwrap(),
            NearestSet {
                distance: 1,
                indices: vec![0]
            }
        );
        let q2 = PatternBasis::builtin(Factor::Q2);
        assert_eq!(
            distance_from_class(&q2, &pv("1111")).unwrap(),
            NearestSet {
                distance: 3,
                indices: vec![0, 1, 2, 3]
            }
        );
        for (k, m) in q4.members().iter().enumerate() {
            let n = distance_from_class(&q4, m).unwrap();
            assert_eq!((n.distance, n.indices), (0, vec![k]));
        }
        assert!(matches!(
            distance_from_class(&q2, &pv("01")),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rho_values() {
        assert_eq!(class_rho(&PatternBasis::builtin(Factor::Q2)), Some(3));
        assert_eq!(class_rho(&PatternBasis::from_recipe(&recipe("C2,C2")).unwrap()), Some(10));
        assert_eq!(class_rho(&PatternBasis::from_recipe(&recipe("C2,C2,C2")).unwrap()), Some(36));
        assert_eq!(class_rho(&PatternBasis::builtin(Factor::B1)), None);
    }

    #[test]
    fn all_of_rank_counts() {
        // Compositions of r into parts 1 and 2 are Fibonacci numbers.
        let counts: Vec<usize> = (1..=6).map(|r| Recipe::all_of_rank(r).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 8, 13]);
        let r4: Vec<String> = Recipe::all_of_rank(4).iter().map(|r| r.to_string()).collect();
        assert_eq!(r4, ["H,H,H,H", "H,H,C2", "H,C2,H", "C2,H,H", "C2,C2"]);
    }

    #[test]
    fn text_round_trip() {
        let b = PatternBasis::from_recipe(&recipe("H,C2")).unwrap();
        let text = b.to_text();
        assert!(text.starts_with("H,C2\n"));
        assert_eq!(PatternBasis::from_text(&text).unwrap(), b);
        let plain = PatternBasis::from_members(vec![pv("01"), pv("00")]).unwrap();
        assert_eq!(PatternBasis::from_text(&plain.to_text()).unwrap(), plain);
        assert!(PatternBasis::from_text("H\n01\n00\n").is_err());
    }
}
