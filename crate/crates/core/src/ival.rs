//! Finite indexed valuations.
//!
//! An [`IndexedValuation`] is a finite family of `(index, value, probability)`
//! entries whose probabilities sum to exactly one. Unlike a plain
//! distribution, two entries may carry the same value under different
//! indices, so `ret 0 ⊕½ ret 0` is *not* structurally equivalent to `ret 0`:
//! the two coins can later be resolved differently by nondeterminism.
//!
//! Index sets are restricted to finite sequences of opaque tokens. Tokens are
//! built from [`Index::Atom`] by tagging (`L`/`R` for the two sides of a
//! probabilistic choice) and pairing (for bind), which keeps them distinct by
//! construction.
//!
//! Structural equivalence ([`IndexedValuation::equiv`]) asks for a bijection
//! between the *indicial supports* (indices of positive probability) that
//! preserves value and probability. For finite supports such a bijection
//! exists iff the multisets of `(value, probability)` pairs over positive
//! entries coincide, which is what we compare after sorting.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{check_probability, format_rational, parse_rational, Rational};

/// Opaque index token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    Atom(u32),
    Inl(Arc<Index>),
    Inr(Arc<Index>),
    Pair(Arc<Index>, Arc<Index>),
}

impl Index {
    pub fn inl(i: &Index) -> Index {
        Index::Inl(Arc::new(i.clone()))
    }

    pub fn inr(i: &Index) -> Index {
        Index::Inr(Arc::new(i.clone()))
    }

    pub fn pair(i: &Index, j: &Index) -> Index {
        Index::Pair(Arc::new(i.clone()), Arc::new(j.clone()))
    }

    /// Parses the textual form produced by `Display`: `7`, `L…`, `R…`, `(…,…)`.
    pub fn parse(s: &str) -> Result<Index> {
        fn go(s: &[u8], at: &mut usize) -> Option<Index> {
            match *s.get(*at)? {
                b'L' => {
                    *at += 1;
                    Some(Index::Inl(Arc::new(go(s, at)?)))
                }
                b'R' => {
                    *at += 1;
                    Some(Index::Inr(Arc::new(go(s, at)?)))
                }
                b'(' => {
                    *at += 1;
                    let a = go(s, at)?;
                    if s.get(*at) != Some(&b',') {
                        return None;
                    }
                    *at += 1;
                    let b = go(s, at)?;
                    if s.get(*at) != Some(&b')') {
                        return None;
                    }
                    *at += 1;
                    Some(Index::Pair(Arc::new(a), Arc::new(b)))
                }
                c if c.is_ascii_digit() => {
                    let start = *at;
                    while s.get(*at).is_some_and(u8::is_ascii_digit) {
                        *at += 1;
                    }
                    std::str::from_utf8(&s[start..*at])
                        .ok()?
                        .parse()
                        .ok()
                        .map(Index::Atom)
                }
                _ => None,
            }
        }
        let bytes = s.as_bytes();
        let mut at = 0;
        match go(bytes, &mut at) {
            Some(i) if at == bytes.len() => Ok(i),
            _ => Err(Error::MalformedValuation(format!("bad index `{s}`"))),
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Atom(n) => write!(f, "{n}"),
            Index::Inl(i) => write!(f, "L{i}"),
            Index::Inr(i) => write!(f, "R{i}"),
            Index::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry<T> {
    pub index: Index,
    pub value: T,
    pub prob: Rational,
}

/// A finite indexed valuation with exact probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexedValuation<T> {
    entries: Vec<Entry<T>>,
}

fn mass_of<T>(entries: &[Entry<T>]) -> Rational {
    entries.iter().map(|e| &e.prob).sum()
}

impl<T> IndexedValuation<T> {
    pub(crate) fn from_trusted(entries: Vec<Entry<T>>) -> Self {
        debug_assert!(mass_of(&entries).is_one(), "mass must stay exactly 1");
        IndexedValuation { entries }
    }

    pub fn ret(v: T) -> Self {
        IndexedValuation {
            entries: vec![Entry {
                index: Index::Atom(0),
                value: v,
                prob: Rational::one(),
            }],
        }
    }

    /// Validating constructor: distinct indices, nonnegative probabilities
    /// summing to one.
    pub fn from_entries(entries: Vec<(Index, T, Rational)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        let mut out = Vec::with_capacity(entries.len());
        for (index, value, prob) in entries {
            if prob.is_negative() {
                return Err(Error::MalformedValuation(format!(
                    "negative probability {} at index {index}",
                    format_rational(&prob)
                )));
            }
            if !seen.insert(index.clone()) {
                return Err(Error::MalformedValuation(format!(
                    "duplicate index {index}"
                )));
            }
            out.push(Entry { index, value, prob });
        }
        let mass = mass_of(&out);
        if !mass.is_one() {
            return Err(Error::MalformedValuation(format!(
                "probabilities sum to {}",
                format_rational(&mass)
            )));
        }
        Ok(IndexedValuation { entries: out })
    }

    /// Builds a valuation with fresh atom indices `0..n`.
    pub fn from_weights(weights: impl IntoIterator<Item = (T, Rational)>) -> Result<Self> {
        let entries = weights
            .into_iter()
            .enumerate()
            .map(|(i, (v, p))| (Index::Atom(i as u32), v, p))
            .collect();
        Self::from_entries(entries)
    }

    pub fn uniform(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::MalformedValuation("uniform over no values".into()));
        }
        let p = Rational::new(1.into(), (values.len() as i64).into());
        Self::from_weights(values.into_iter().map(|v| (v, p.clone())))
    }

    /// `a ⊕ₚ b`: left entries tagged `L` with mass scaled by `p`, right
    /// entries tagged `R` scaled by `1 − p`.
    pub fn pchoice(a: &Self, p: &Rational, b: &Self) -> Result<Self>
    where
        T: Clone,
    {
        check_probability(p)?;
        let q = Rational::one() - p;
        let mut entries = Vec::with_capacity(a.entries.len() + b.entries.len());
        entries.extend(a.entries.iter().map(|e| Entry {
            index: Index::inl(&e.index),
            value: e.value.clone(),
            prob: &e.prob * p,
        }));
        entries.extend(b.entries.iter().map(|e| Entry {
            index: Index::inr(&e.index),
            value: e.value.clone(),
            prob: &e.prob * &q,
        }));
        Ok(Self::from_trusted(entries))
    }

    /// Monadic bind. The index set is the dependent pair `(i, j)` of an outer
    /// index and an index of the continuation at that outer value.
    pub fn bind<B>(&self, mut f: impl FnMut(&T) -> IndexedValuation<B>) -> IndexedValuation<B> {
        let mut entries = Vec::new();
        for e in &self.entries {
            let inner = f(&e.value);
            for ie in inner.entries {
                entries.push(Entry {
                    index: Index::pair(&e.index, &ie.index),
                    value: ie.value,
                    prob: &e.prob * &ie.prob,
                });
            }
        }
        IndexedValuation::from_trusted(entries)
    }

    /// Value map preserving indices; equivalent to `bind(a, ret ∘ f)`.
    pub fn map<B>(&self, mut f: impl FnMut(&T) -> B) -> IndexedValuation<B> {
        IndexedValuation {
            entries: self
                .entries
                .iter()
                .map(|e| Entry {
                    index: e.index.clone(),
                    value: f(&e.value),
                    prob: e.prob.clone(),
                })
                .collect(),
        }
    }

    /// Renames every index to a fresh atom, keeping entry order.
    pub fn relabel(&self, offset: u32) -> Self
    where
        T: Clone,
    {
        IndexedValuation {
            entries: self
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| Entry {
                    index: Index::Atom(offset + i as u32),
                    value: e.value.clone(),
                    prob: e.prob.clone(),
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[Entry<T>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Entry<T>> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> Rational {
        mass_of(&self.entries)
    }

    /// Drops entries of probability zero.
    pub fn trim(&self) -> Self
    where
        T: Clone,
    {
        IndexedValuation {
            entries: self.positive().cloned().collect(),
        }
    }

    /// Entries of positive probability.
    pub fn positive(&self) -> impl Iterator<Item = &Entry<T>> {
        self.entries.iter().filter(|e| e.prob.is_positive())
    }

    /// `Σ f(value) · prob` over all entries.
    pub fn expected_value(&self, mut f: impl FnMut(&T) -> Rational) -> Rational {
        self.entries
            .iter()
            .filter(|e| !e.prob.is_zero())
            .map(|e| f(&e.value) * &e.prob)
            .sum()
    }

    /// Sorted `(value, prob)` pairs over the indicial support: the canonical
    /// representative of the `≡` class.
    pub fn canonical(&self) -> Vec<(T, Rational)>
    where
        T: Ord + Clone,
    {
        let mut v: Vec<(T, Rational)> = self
            .positive()
            .map(|e| (e.value.clone(), e.prob.clone()))
            .collect();
        v.sort();
        v
    }

    /// Structural equivalence (relabeling of the indicial support).
    pub fn equiv(&self, other: &Self) -> bool
    where
        T: Ord,
    {
        fn key<T: Ord>(a: &IndexedValuation<T>) -> Vec<(&T, &Rational)> {
            let mut v: Vec<(&T, &Rational)> = a.positive().map(|e| (&e.value, &e.prob)).collect();
            v.sort();
            v
        }
        key(self) == key(other)
    }

    /// The collapse `H` to an ordinary distribution.
    pub fn to_distribution(&self) -> Distribution<T>
    where
        T: Ord + Clone,
    {
        let mut weights: BTreeMap<T, Rational> = BTreeMap::new();
        for e in self.positive() {
            *weights
                .entry(e.value.clone())
                .or_insert_with(Rational::zero) += &e.prob;
        }
        Distribution { weights }
    }

    /// `≡ₚ`: equal `H`-images, i.e. equal expectations for every bounded `f`.
    pub fn prob_equiv(&self, other: &Self) -> bool
    where
        T: Ord + Clone,
    {
        self.to_distribution() == other.to_distribution()
    }

    /// Values reachable with positive probability.
    pub fn support(&self) -> BTreeSet<T>
    where
        T: Ord + Clone,
    {
        self.positive().map(|e| e.value.clone()).collect()
    }
}

/// An ordinary finite distribution: strictly positive weights summing to 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Distribution<T: Ord> {
    weights: BTreeMap<T, Rational>,
}

impl<T: Ord + Clone> Distribution<T> {
    pub fn weights(&self) -> &BTreeMap<T, Rational> {
        &self.weights
    }

    pub fn prob(&self, x: &T) -> Rational {
        self.weights.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn expected_value(&self, mut f: impl FnMut(&T) -> Rational) -> Rational {
        self.weights.iter().map(|(x, p)| f(x) * p).sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Back to an indexed valuation with one atom per value.
    pub fn to_valuation(&self) -> IndexedValuation<T> {
        IndexedValuation::from_trusted(
            self.weights
                .iter()
                .enumerate()
                .map(|(i, (v, p))| Entry {
                    index: Index::Atom(i as u32),
                    value: v.clone(),
                    prob: p.clone(),
                })
                .collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct IvalWire<T> {
    entries: Vec<(String, T, String)>,
}

impl<T: Serialize> Serialize for IndexedValuation<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a, T> {
            entries: Vec<(String, &'a T, String)>,
        }
        Wire {
            entries: self
                .entries
                .iter()
                .map(|e| (e.index.to_string(), &e.value, format_rational(&e.prob)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for IndexedValuation<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = IvalWire::<T>::deserialize(d)?;
        let entries = wire
            .entries
            .into_iter()
            .map(|(i, v, p)| Ok((Index::parse(&i)?, v, parse_rational(&p)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        IndexedValuation::from_entries(entries).map_err(serde::de::Error::custom)
    }
}

impl<T: Ord + Serialize> Serialize for Distribution<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a, T> {
            weights: Vec<(&'a T, String)>,
        }
        Wire {
            weights: self
                .weights
                .iter()
                .map(|(v, p)| (v, format_rational(p)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Ord + Deserialize<'de>> Deserialize<'de> for Distribution<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire<T> {
            weights: Vec<(T, String)>,
        }
        let wire = Wire::<T>::deserialize(d)?;
        let mut weights = BTreeMap::new();
        let mut total = Rational::zero();
        for (v, p) in wire.weights {
            let p = parse_rational(&p).map_err(serde::de::Error::custom)?;
            if !p.is_positive() {
                return Err(serde::de::Error::custom(
                    "distribution weights must be positive",
                ));
            }
            total += &p;
            if weights.insert(v, p).is_some() {
                return Err(serde::de::Error::custom("duplicate value in distribution"));
            }
        }
        if !total.is_one() {
            return Err(serde::de::Error::custom(
                "distribution weights must sum to 1",
            ));
        }
        Ok(Distribution { weights })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn coin<T: Clone>(a: T, p: Rational, b: T) -> IndexedValuation<T> {
        IndexedValuation::pchoice(&IndexedValuation::ret(a), &p, &IndexedValuation::ret(b)).unwrap()
    }

    #[test]
    fn ret_is_a_point_mass() {
        let r = IndexedValuation::ret(5i64);
        assert_eq!(r.len(), 1);
        assert!(r.mass().is_one());
        assert_eq!(r.expected_value(|&v| int(v)), int(5));
        assert!(r.equiv(&IndexedValuation::ret(5)));
    }

    #[test]
    fn fair_coin_has_two_halves() {
        let c = coin(true, ratio(1, 2), false);
        assert_eq!(c.len(), 2);
        assert!(c.entries().iter().all(|e| e.prob == ratio(1, 2)));
        assert_eq!(
            c.expected_value(|&b| if b { int(1) } else { int(0) }),
            ratio(1, 2)
        );
    }

    #[test]
    fn pchoice_rejects_out_of_range() {
        let r = IndexedValuation::ret(0i64);
        assert!(IndexedValuation::pchoice(&r, &ratio(3, 2), &r).is_err());
        assert!(IndexedValuation::pchoice(&r, &ratio(-1, 2), &r).is_err());
    }

    #[test]
    fn duplicated_choice_is_not_structurally_equivalent() {
        let i = coin(0i64, ratio(1, 2), 1);
        let doubled = IndexedValuation::pchoice(&i, &ratio(1, 2), &i).unwrap();
        assert!(!doubled.equiv(&i));
        assert!(doubled.prob_equiv(&i));
        // degenerate weights do collapse
        let left = IndexedValuation::pchoice(&i, &int(1), &i).unwrap();
        assert!(left.equiv(&i));
    }

    #[test]
    fn pchoice_is_symmetric_up_to_equiv() {
        let a = coin(1i64, ratio(1, 3), 2);
        let b = IndexedValuation::ret(7i64);
        let p = ratio(2, 5);
        let l = IndexedValuation::pchoice(&a, &p, &b).unwrap();
        let r = IndexedValuation::pchoice(&b, &(int(1) - &p), &a).unwrap();
        assert!(l.equiv(&r));
    }

    #[test]
    fn bind_doubles_the_expectation() {
        let a = coin(1i64, ratio(1, 2), 2);
        let b = a.bind(|&k| IndexedValuation::ret(2 * k));
        // by hand: 2·½ + 4·½
        assert_eq!(b.expected_value(|&v| int(v)), int(3));
    }

    #[test]
    fn h_merges_equal_values() {
        let d = coin(0i64, ratio(1, 2), 0).to_distribution();
        assert_eq!(d.len(), 1);
        assert_eq!(d.prob(&0), int(1));
        let d = coin(1i64, ratio(1, 3), 2).to_distribution();
        assert_eq!(d.prob(&1), ratio(1, 3));
        assert_eq!(d.prob(&2), ratio(2, 3));
    }

    #[test]
    fn counter_increment_expectation_is_one() {
        let k = 3i64;
        let a = coin(k + 1, ratio(1, k + 1), 0);
        assert_eq!(a.expected_value(|&v| int(v)), int(1));
    }

    #[test]
    fn zero_entries_are_ignored_by_equivalence() {
        let a = IndexedValuation::from_entries(vec![
            (Index::Atom(0), 1i64, int(1)),
            (Index::Atom(1), 9, int(0)),
        ])
        .unwrap();
        assert!(a.equiv(&IndexedValuation::ret(1)));
        assert_eq!(a.support().len(), 1);
    }

    #[test]
    fn from_entries_validates() {
        assert!(IndexedValuation::from_entries(vec![(Index::Atom(0), 1i64, ratio(1, 2))]).is_err());
        assert!(IndexedValuation::from_entries(vec![
            (Index::Atom(0), 1i64, ratio(1, 2)),
            (Index::Atom(0), 2, ratio(1, 2)),
        ])
        .is_err());
        assert!(IndexedValuation::from_entries(vec![
            (Index::Atom(0), 1i64, ratio(3, 2)),
            (Index::Atom(1), 2, ratio(-1, 2)),
        ])
        .is_err());
    }

    #[test]
    fn index_text_round_trips() {
        let i = Index::pair(
            &Index::inl(&Index::Atom(3)),
            &Index::inr(&Index::pair(&Index::Atom(0), &Index::Atom(12))),
        );
        let s = i.to_string();
        assert_eq!(s, "(L3,R(0,12))");
        assert_eq!(Index::parse(&s).unwrap(), i);
        assert!(Index::parse("(1,").is_err());
        assert!(Index::parse("L").is_err());
    }

    #[test]
    fn json_wire_format() {
        let c = coin(1i64, ratio(1, 3), 2);
        let js = serde_json::to_string(&c).unwrap();
        assert_eq!(js, r#"{"entries":[["L0",1,"1/3"],["R0",2,"2/3"]]}"#);
        let back: IndexedValuation<i64> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, c);
        let d = serde_json::to_string(&c.to_distribution()).unwrap();
        assert_eq!(d, r#"{"weights":[[1,"1/3"],[2,"2/3"]]}"#);
        let bad = r#"{"entries":[["0",1,"1/3"]]}"#;
        assert!(serde_json::from_str::<IndexedValuation<i64>>(bad).is_err());
    }
}
