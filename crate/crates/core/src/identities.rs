//! Unit-fraction identities and the [`Representation`] data model.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{unit_fraction_sum, Rational};
use crate::error::{Error, Result};

/// Strictly increasing list of distinct positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct DenominatorSet(Vec<u64>);

impl DenominatorSet {
    pub fn new() -> Self {
        DenominatorSet(Vec::new())
    }

    /// Sorts the input; rejects zeros and duplicates.
    pub fn from_vec(mut v: Vec<u64>) -> Result<Self> {
        v.sort_unstable();
        if v.first() == Some(&0) {
            return Err(Error::InvalidInput("denominator 0".into()));
        }
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("duplicate denominator {}", w[0])));
        }
        Ok(DenominatorSet(v))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn min(&self) -> Option<u64> {
        self.0.first().copied()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    pub fn reciprocal_sum(&self) -> Rational {
        unit_fraction_sum(&self.0)
    }

    pub fn is_disjoint(&self, other: &DenominatorSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &DenominatorSet) -> Result<DenominatorSet> {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        DenominatorSet::from_vec(v)
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }
}

impl TryFrom<Vec<u64>> for DenominatorSet {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        DenominatorSet::from_vec(v)
    }
}

impl From<DenominatorSet> for Vec<u64> {
    fn from(s: DenominatorSet) -> Vec<u64> {
        s.0
    }
}

impl<'a> IntoIterator for &'a DenominatorSet {
    type Item = &'a u64;
    type IntoIter = std::slice::Iter<'a, u64>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Why a candidate representation is invalid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroDenominator,
    Duplicate(u64),
    NotIncreasing { index: usize },
    SumMismatch { sum: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroDenominator => write!(f, "denominator 0"),
            Violation::Duplicate(d) => write!(f, "duplicate denominator {d}"),
            Violation::NotIncreasing { index } => {
                write!(f, "denominators not increasing at index {index}")
            }
            Violation::SumMismatch { sum } => write!(f, "reciprocals sum to {sum}"),
        }
    }
}

/// A target rational and the denominators of an Egyptian fraction for it.
///
/// The JSON form is `{"target": "a/b", "denominators": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub target: Rational,
    pub denominators: Vec<u64>,
}

impl Representation {
    /// Sorts the denominators and checks both invariants.
    pub fn new(target: Rational, mut denominators: Vec<u64>) -> Result<Self> {
        denominators.sort_unstable();
        let rep = Representation { target, denominators };
        rep.validate().map_err(|v| Error::NotARepresentation(v.to_string()))?;
        Ok(rep)
    }

    /// Representation of the sum of the given set.
    pub fn of_set(set: &DenominatorSet) -> Self {
        Representation {
            target: set.reciprocal_sum(),
            denominators: set.as_slice().to_vec(),
        }
    }

    /// Checks strict increase (hence distinctness) and the exact sum, and
    /// names the first violation.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        validate(&self.target, &self.denominators)
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    pub fn len(&self) -> usize {
        self.denominators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.denominators.is_empty()
    }

    pub fn largest(&self) -> Option<u64> {
        self.denominators.iter().copied().max()
    }

    pub fn smallest(&self) -> Option<u64> {
        self.denominators.iter().copied().min()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("representation serializes")
    }

    /// Parses JSON and re-validates.
    pub fn from_json(s: &str) -> Result<Self> {
        let rep: Representation = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        rep.validate().map_err(|v| Error::NotARepresentation(v.to_string()))?;
        Ok(rep)
    }
}

/// Validates raw denominators (in the order given) against a target.
pub fn validate(target: &Rational, denominators: &[u64]) -> std::result::Result<(), Violation> {
    if denominators.contains(&0) {
        return Err(Violation::ZeroDenominator);
    }
    for (i, w) in denominators.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Violation::Duplicate(w[0]));
        }
        if w[0] > w[1] {
            let mut sorted = denominators.to_vec();
            sorted.sort_unstable();
            if let Some(d) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Violation::Duplicate(d[0]));
            }
            return Err(Violation::NotIncreasing { index: i + 1 });
        }
    }
    let sum = unit_fraction_sum(denominators);
    if &sum != target {
        return Err(Violation::SumMismatch { sum });
    }
    Ok(())
}

/// `1/n = 1/(n+1) + 1/(n(n+1))`.
pub fn split(n: u64) -> Result<(u64, u64)> {
    if n == 0 {
        return Err(Error::InvalidInput("split(0)".into()));
    }
    if n == 1 {
        return Err(Error::SplitAtOne);
    }
    let big = n
        .checked_mul(n + 1)
        .ok_or_else(|| Error::Overflow(format!("{n}*({n}+1)")))?;
    Ok((n + 1, big))
}

/// The telescoping identity
/// `1/n = 1/(n+m) + Σ_{i=1}^{m} 1/((n+i-1)(n+i))`.
///
/// When `n + m` equals one of the products (possible only for `m ≥ n²`,
/// e.g. `n = 2, m = 4`), the identity is applied with the largest
/// collision-free `m' < m` and the largest element is then split
/// `m − m'` times, which keeps `m + 1` distinct terms above `n`.
pub fn multi_split(n: u64, m: u64) -> Result<DenominatorSet> {
    if n < 2 {
        return Err(Error::PreconditionViolated(format!(
            "multi_split needs n >= 2, got {n}"
        )));
    }
    if m == 0 {
        return Err(Error::PreconditionViolated("multi_split needs m >= 1".into()));
    }
    let overflow = || Error::Overflow(format!("multi_split({n}, {m})"));
    let mut base = m;
    let mut terms = loop {
        let t = telescoping_terms(n, base).ok_or_else(overflow)?;
        let top = n + base;
        // m' = 1 gives {n+1, n(n+1)}, never a collision for n ≥ 2
        if !t[1..].contains(&top) {
            break t;
        }
        base -= 1;
    };
    for _ in base..m {
        let largest = *terms.iter().max().expect("nonempty");
        let (a, b) = split(largest)?;
        terms.retain(|&d| d != largest);
        terms.push(a);
        terms.push(b);
    }
    DenominatorSet::from_vec(terms)
}

/// `[n+m, n(n+1), ..., (n+m-1)(n+m)]`, or `None` on overflow.
fn telescoping_terms(n: u64, m: u64) -> Option<Vec<u64>> {
    let mut out = Vec::with_capacity(m as usize + 1);
    out.push(n.checked_add(m)?);
    for i in 1..=m {
        out.push((n + i - 1).checked_mul(n + i)?);
    }
    Some(out)
}

/// Turns a `t`-term representation into a `(t+1)`-term one by splitting the
/// largest denominator.
pub fn split_extend(rep: &Representation) -> Result<Representation> {
    let largest = rep
        .largest()
        .ok_or_else(|| Error::PreconditionViolated("empty representation".into()))?;
    let (a, b) = split(largest)?;
    // Both outputs exceed the current maximum, so no collision is possible.
    assert!(a > largest && b > largest);
    let mut dens: Vec<u64> = rep.denominators.iter().copied().filter(|&d| d != largest).collect();
    dens.push(a);
    dens.push(b);
    Representation::new(rep.target.clone(), dens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn split_examples() {
        assert_eq!(split(6), Ok((7, 42)));
        assert_eq!(split(2), Ok((3, 6)));
        assert_eq!(split(1), Err(Error::SplitAtOne));
    }

    #[test]
    fn multi_split_examples() {
        assert_eq!(multi_split(5, 1).unwrap().as_slice(), &[6, 30]);
        let s = multi_split(5, 3).unwrap();
        assert_eq!(s.as_slice(), &[8, 30, 42, 56]);
        assert_eq!(s.reciprocal_sum(), q("1/5"));
        let s = multi_split(2, 2).unwrap();
        assert_eq!(s.as_slice(), &[4, 6, 12]);
        assert_eq!(s.reciprocal_sum(), q("1/2"));
    }

    #[test]
    fn multi_split_avoids_collisions() {
        // 2 + 4 = 2·3, so the m = 3 identity is split once more
        let s = multi_split(2, 4).unwrap();
        assert_eq!(s.as_slice(), &[5, 6, 12, 21, 420]);
        assert_eq!(s.reciprocal_sum(), q("1/2"));
        for (n, m) in [(2, 10), (3, 9), (5, 25), (7, 49)] {
            let s = multi_split(n, m).unwrap();
            assert_eq!(s.len() as u64, m + 1);
            assert_eq!(s.reciprocal_sum(), Rational::unit(n));
        }
    }

    #[test]
    fn split_extend_examples() {
        let rep = Representation::new(Rational::one(), vec![2, 3, 6]).unwrap();
        assert_eq!(split_extend(&rep).unwrap().denominators, vec![2, 3, 7, 42]);
        let rep = Representation::new(q("1/2"), vec![3, 6]).unwrap();
        assert_eq!(split_extend(&rep).unwrap().denominators, vec![3, 7, 42]);
        let rep = Representation::new(Rational::one(), vec![1]).unwrap();
        assert_eq!(split_extend(&rep), Err(Error::SplitAtOne));
    }

    #[test]
    fn validate_examples() {
        assert_eq!(validate(&Rational::one(), &[2, 3, 6]), Ok(()));
        assert_eq!(
            validate(&Rational::one(), &[2, 3, 7]),
            Err(Violation::SumMismatch { sum: q("41/42") })
        );
        assert_eq!(validate(&Rational::one(), &[2, 2]), Err(Violation::Duplicate(2)));
        assert_eq!(
            validate(&Rational::one(), &[3, 2, 6]),
            Err(Violation::NotIncreasing { index: 1 })
        );
        assert_eq!(validate(&Rational::one(), &[0, 1]), Err(Violation::ZeroDenominator));
    }

    #[test]
    fn json_round_trip_revalidates() {
        let rep = Representation::new(q("1/2"), vec![6, 3]).unwrap();
        let js = rep.to_json();
        assert_eq!(js, r#"{"target":"1/2","denominators":[3,6]}"#);
        assert_eq!(Representation::from_json(&js).unwrap(), rep);
        assert!(Representation::from_json(r#"{"target":"1/1","denominators":[2,3,7]}"#).is_err());
    }

    #[test]
    fn denominator_set_rejects_duplicates() {
        assert!(DenominatorSet::from_vec(vec![3, 1, 3]).is_err());
        let s = DenominatorSet::from_vec(vec![5, 1, 3]).unwrap();
        assert_eq!(s.as_slice(), &[1, 3, 5]);
        let t = DenominatorSet::from_vec(vec![2, 4]).unwrap();
        assert!(s.is_disjoint(&t));
        assert!(!s.is_disjoint(&DenominatorSet::from_vec(vec![5]).unwrap()));
    }
}
