//! Finite nonempty sets of indexed valuations.
//!
//! A [`ProcessSet`] layers nondeterminism over probability: each member is
//! one way of resolving every nondeterministic choice. Members are stored as
//! a sequence; duplicates are harmless and are only collapsed by
//! [`ProcessSet::dedup`] or inside the comparison operations.
//!
//! # Bind
//!
//! `bind(a, F)` resolves the nondeterminism of `F` separately at every
//! *index* of a member of `a`, not at every value. Two entries of a member
//! that carry the same value may therefore pick different members of `F(v)`.
//! This is what makes `x ← 𝓘₁ ⊕ₚ 𝓘₂; F x` split over `⊕ₚ` and is the whole
//! point of keeping indices around. Entries of probability zero lie outside
//! the indicial support and are always resolved to the first member of
//! `F(v)`, so they never multiply the member count.
//!
//! # `⊆ₚ`
//!
//! `𝓘 ⊆ₚ 𝓘′` holds when every bounded `f` satisfies `Eᵐᵃˣ[f;𝓘] ≤ Eᵐᵃˣ[f;𝓘′]`.
//! Over a finite joint support the expectations are linear in the
//! distributions, so by the separating-hyperplane theorem the condition is
//! equivalent to every `H(𝕀)`, `𝕀 ∈ 𝓘`, lying in the convex hull of
//! `{H(𝕀′) : 𝕀′ ∈ 𝓘′}`. Membership is decided exactly by [`crate::lp`]; a
//! failing member comes with a separating function.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ival::{Entry, Index, IndexedValuation};
use crate::lp::{self, Feasibility};
use crate::rational::Rational;

/// A finite nonempty set of indexed valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessSet<T> {
    members: Vec<IndexedValuation<T>>,
}

/// Outcome of a `⊆ₚ` check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PSubset<T> {
    /// `weights[m][j]` is the convex weight of member `j` of the right-hand
    /// side in the combination reproducing `H` of left member `m`.
    Holds { weights: Vec<Vec<Rational>> },
    /// `separator` (zero off its keys) has expectation at most `threshold`
    /// on every right-hand member but strictly more on left member `member`.
    Fails {
        member: usize,
        separator: BTreeMap<T, Rational>,
        threshold: Rational,
    },
}

impl<T> PSubset<T> {
    pub fn holds(&self) -> bool {
        matches!(self, PSubset::Holds { .. })
    }
}

impl<T> ProcessSet<T> {
    pub fn new(members: Vec<IndexedValuation<T>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyProcessSet);
        }
        Ok(ProcessSet { members })
    }

    pub fn singleton(v: IndexedValuation<T>) -> Self {
        ProcessSet { members: vec![v] }
    }

    pub fn ret(v: T) -> Self {
        Self::singleton(IndexedValuation::ret(v))
    }

    /// `ret v₁ ∪ ⋯ ∪ ret vₙ`.
    pub fn choose(values: impl IntoIterator<Item = T>) -> Result<Self> {
        Self::new(values.into_iter().map(IndexedValuation::ret).collect())
    }

    pub fn members(&self) -> &[IndexedValuation<T>] {
        &self.members
    }

    pub fn into_members(self) -> Vec<IndexedValuation<T>> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Always false; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union(&self, other: &Self) -> Self
    where
        T: Clone,
    {
        let mut members = self.members.clone();
        members.extend(other.members.iter().cloned());
        ProcessSet { members }
    }

    /// Pairwise probabilistic choice of members.
    pub fn pchoice(a: &Self, p: &Rational, b: &Self) -> Result<Self>
    where
        T: Clone,
    {
        let mut members = Vec::with_capacity(a.len() * b.len());
        for x in &a.members {
            for y in &b.members {
                members.push(IndexedValuation::pchoice(x, p, y)?);
            }
        }
        Ok(ProcessSet { members })
    }

    pub fn map<B>(&self, mut f: impl FnMut(&T) -> B) -> ProcessSet<B> {
        ProcessSet {
            members: self.members.iter().map(|m| m.map(&mut f)).collect(),
        }
    }

    /// Number of members [`bind`](Self::bind) would produce, without building
    /// them.
    pub fn bind_count<B>(&self, mut f: impl FnMut(&T) -> ProcessSet<B>) -> u128
    where
        T: Ord + Clone,
    {
        let mut sizes: BTreeMap<T, u128> = BTreeMap::new();
        let mut total: u128 = 0;
        for m in &self.members {
            let mut count: u128 = 1;
            for e in m.positive() {
                let n = *sizes
                    .entry(e.value.clone())
                    .or_insert_with(|| f(&e.value).len() as u128);
                count = count.saturating_mul(n);
            }
            total = total.saturating_add(count);
        }
        total
    }

    /// Bind with per-index selection (see the module docs).
    pub fn bind<B: Clone>(&self, f: impl FnMut(&T) -> ProcessSet<B>) -> ProcessSet<B>
    where
        T: Ord + Clone,
    {
        self.try_bind(f, u128::MAX)
            .expect("unbounded bind cannot exceed its limit")
    }

    /// As [`bind`](Self::bind) but refuses to build more than `limit`
    /// members.
    pub fn try_bind<B: Clone>(
        &self,
        mut f: impl FnMut(&T) -> ProcessSet<B>,
        limit: u128,
    ) -> Result<ProcessSet<B>>
    where
        T: Ord + Clone,
    {
        let mut cache: BTreeMap<T, ProcessSet<B>> = BTreeMap::new();
        for m in &self.members {
            for e in m.entries() {
                if !cache.contains_key(&e.value) {
                    cache.insert(e.value.clone(), f(&e.value));
                }
            }
        }
        let count = self.bind_count(|v| cache[v].clone());
        if count > limit {
            return Err(Error::TooLarge { count, limit });
        }

        let mut members = Vec::with_capacity(count as usize);
        for m in &self.members {
            let entries = m.entries();
            let options: Vec<&[IndexedValuation<B>]> = entries
                .iter()
                .map(|e| {
                    let all = cache[&e.value].members();
                    if e.prob.is_positive() {
                        all
                    } else {
                        &all[..1]
                    }
                })
                .collect();
            // odometer over the per-index choices
            let mut pick = vec![0usize; entries.len()];
            loop {
                let mut out = Vec::new();
                for ((e, opts), &j) in entries.iter().zip(&options).zip(&pick) {
                    for ie in opts[j].entries() {
                        out.push(Entry {
                            index: Index::pair(&e.index, &ie.index),
                            value: ie.value.clone(),
                            prob: &e.prob * &ie.prob,
                        });
                    }
                }
                members.push(IndexedValuation::from_trusted(out));

                let mut pos = 0;
                loop {
                    if pos == pick.len() {
                        break;
                    }
                    pick[pos] += 1;
                    if pick[pos] < options[pos].len() {
                        break;
                    }
                    pick[pos] = 0;
                    pos += 1;
                }
                if pos == pick.len() {
                    break;
                }
            }
        }
        Ok(ProcessSet { members })
    }

    /// Drops members `≡`-equivalent to an earlier one.
    pub fn dedup(&self) -> Self
    where
        T: Ord + Clone,
    {
        let mut seen = BTreeSet::new();
        let members = self
            .members
            .iter()
            .filter(|m| seen.insert(m.canonical()))
            .cloned()
            .collect();
        ProcessSet { members }
    }

    fn canonical_set(&self) -> BTreeSet<Vec<(T, Rational)>>
    where
        T: Ord + Clone,
    {
        self.members
            .iter()
            .map(IndexedValuation::canonical)
            .collect()
    }

    /// `𝓘₁ ⊆ 𝓘₂`: every member of `self` is `≡` to some member of `other`.
    pub fn subset(&self, other: &Self) -> bool
    where
        T: Ord + Clone,
    {
        let theirs = other.canonical_set();
        self.members.iter().all(|m| theirs.contains(&m.canonical()))
    }

    /// Mutual [`subset`](Self::subset).
    pub fn equiv(&self, other: &Self) -> bool
    where
        T: Ord + Clone,
    {
        self.canonical_set() == other.canonical_set()
    }

    /// Expected value of `f` under every member, in member order.
    pub fn expectations(&self, mut f: impl FnMut(&T) -> Rational) -> Vec<Rational> {
        self.members
            .iter()
            .map(|m| m.expected_value(&mut f))
            .collect()
    }

    /// `(Eᵐⁱⁿ[f;𝓘], Eᵐᵃˣ[f;𝓘])`.
    pub fn extrema(&self, f: impl FnMut(&T) -> Rational) -> (Rational, Rational) {
        let ev = self.expectations(f);
        let lo = ev.iter().min().expect("nonempty").clone();
        let hi = ev.iter().max().expect("nonempty").clone();
        (lo, hi)
    }

    pub fn ex_min(&self, f: impl FnMut(&T) -> Rational) -> Rational {
        self.extrema(f).0
    }

    pub fn ex_max(&self, f: impl FnMut(&T) -> Rational) -> Rational {
        self.extrema(f).1
    }

    /// Values of positive probability in some member.
    pub fn support(&self) -> BTreeSet<T>
    where
        T: Ord + Clone,
    {
        self.members
            .iter()
            .flat_map(|m| m.positive().map(|e| e.value.clone()))
            .collect()
    }

    /// The least `c` with `|f(v)| ≤ c` on the support.
    pub fn bounded_on_support(&self, mut f: impl FnMut(&T) -> Rational) -> Rational {
        self.members
            .iter()
            .flat_map(|m| m.positive())
            .map(|e| f(&e.value).abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Decides `self ⊆ₚ other`, with a certificate either way.
    pub fn subset_p(&self, other: &Self) -> PSubset<T>
    where
        T: Ord + Clone,
    {
        let rhs: Vec<_> = other
            .members
            .iter()
            .map(IndexedValuation::to_distribution)
            .collect();
        // Columns for distinct H-images only; weights map back to the first
        // member carrying each image.
        let mut reps: Vec<usize> = Vec::new();
        for (j, d) in rhs.iter().enumerate() {
            if !reps.iter().any(|&r| rhs[r] == *d) {
                reps.push(j);
            }
        }
        let mut weights = Vec::with_capacity(self.len());
        for (mi, m) in self.members.iter().enumerate() {
            let target = m.to_distribution();
            let mut values: BTreeSet<T> = target.weights().keys().cloned().collect();
            for &r in &reps {
                values.extend(rhs[r].weights().keys().cloned());
            }
            let values: Vec<T> = values.into_iter().collect();
            let mut a: Vec<Vec<Rational>> = values
                .iter()
                .map(|v| reps.iter().map(|&r| rhs[r].prob(v)).collect())
                .collect();
            a.push(vec![Rational::one(); reps.len()]);
            let mut b: Vec<Rational> = values.iter().map(|v| target.prob(v)).collect();
            b.push(Rational::one());
            match lp::feasibility(&a, &b) {
                Feasibility::Feasible(x) => {
                    let mut w = vec![Rational::zero(); other.len()];
                    for (k, &r) in reps.iter().enumerate() {
                        w[r] = x[k].clone();
                    }
                    weights.push(w);
                }
                Feasibility::Infeasible(y) => {
                    // yᵀA ≤ 0 and yᵀb > 0 with the last row the mass
                    // constraint: E[y;H′] + y_mass ≤ 0 < E[y;H] + y_mass.
                    let y_mass = y[values.len()].clone();
                    let separator = values
                        .into_iter()
                        .zip(y)
                        .filter(|(_, c)| !c.is_zero())
                        .collect();
                    return PSubset::Fails {
                        member: mi,
                        separator,
                        threshold: -y_mass,
                    };
                }
            }
        }
        PSubset::Holds { weights }
    }
}

/// `(Eᵐⁱⁿ, Eᵐᵃˣ)` of `f` on `bind(a, F)` without building the bind.
///
/// `inner(v)` must return the extrema of `f` on `F(v)`. Because every index
/// of a member picks its continuation independently, the extremal member of
/// the bind picks an extremal continuation at every index, so
/// `Eᵐⁱⁿ[f; x ← 𝓘; F x] = min_{𝕀∈𝓘} Σᵢ pᵢ · Eᵐⁱⁿ[f; F(vᵢ)]` and likewise for the
/// maximum. `inner` is called once per distinct value.
pub fn bind_extrema<A: Ord + Clone>(
    a: &ProcessSet<A>,
    mut inner: impl FnMut(&A) -> (Rational, Rational),
) -> (Rational, Rational) {
    let mut cache: BTreeMap<A, (Rational, Rational)> = BTreeMap::new();
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for m in &a.members {
        let mut l = Rational::zero();
        let mut h = Rational::zero();
        for e in m.positive() {
            if !cache.contains_key(&e.value) {
                cache.insert(e.value.clone(), inner(&e.value));
            }
            let (il, ih) = &cache[&e.value];
            l += il * &e.prob;
            h += ih * &e.prob;
        }
        if lo.as_ref().is_none_or(|x| l < *x) {
            lo = Some(l);
        }
        if hi.as_ref().is_none_or(|x| h > *x) {
            hi = Some(h);
        }
    }
    (lo.expect("nonempty"), hi.expect("nonempty"))
}

impl<T: Serialize> Serialize for ProcessSet<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a, T> {
            members: &'a [IndexedValuation<T>],
        }
        Wire {
            members: &self.members,
        }
        .serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for ProcessSet<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire<T> {
            members: Vec<IndexedValuation<T>>,
        }
        let wire = Wire::<T>::deserialize(d)?;
        ProcessSet::new(wire.members).map_err(serde::de::Error::custom)
    }
}
