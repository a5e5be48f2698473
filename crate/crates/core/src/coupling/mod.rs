//! Nondeterministic couplings between an indexed valuation and a process set.
//!
//! `𝕀 ⊨ 𝓘 : P` holds when there is a joint valuation over pairs whose first
//! marginal is `≡ₚ 𝕀`, whose second marginal is `≡ₚ` some `𝕀′` with
//! `{𝕀′} ⊆ₚ 𝓘`, and whose support satisfies `P`. A [`Witness`] records the
//! joint valuation and `𝕀′` explicitly. The rule constructors in this module
//! build witnesses, but nothing trusts them: [`check`] re-verifies all four
//! conditions from scratch.

pub mod script;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ival::{Distribution, IndexedValuation};
use crate::ndset::{PSubset, ProcessSet};
use crate::rational::{format_rational, Rational};

/// A named binary predicate.
pub struct Predicate<A, B> {
    name: String,
    f: Arc<dyn Fn(&A, &B) -> bool + Send + Sync>,
}

impl<A, B> Clone for Predicate<A, B> {
    fn clone(&self) -> Self {
        Predicate {
            name: self.name.clone(),
            f: Arc::clone(&self.f),
        }
    }
}

impl<A, B> fmt::Debug for Predicate<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predicate({})", self.name)
    }
}

impl<A, B> Predicate<A, B> {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&A, &B) -> bool + Send + Sync + 'static,
    ) -> Self {
        Predicate {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// The predicate that always holds.
    pub fn truth() -> Self {
        Predicate::new("true", |_, _| true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn holds(&self, a: &A, b: &B) -> bool {
        (self.f)(a, b)
    }
}

/// The judgment a witness is checked against.
#[derive(Debug, Clone)]
pub struct Goal<A, B> {
    pub lhs: IndexedValuation<A>,
    pub rhs: ProcessSet<B>,
    pub predicate: Predicate<A, B>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness<A, B> {
    pub joint: IndexedValuation<(A, B)>,
    pub rhs_pick: IndexedValuation<B>,
    pub predicate: String,
}

impl<A: Ord + Clone, B: Ord + Clone> Witness<A, B> {
    pub fn first_marginal(&self) -> Distribution<A> {
        self.joint.map(|(a, _)| a.clone()).to_distribution()
    }

    pub fn second_marginal(&self) -> Distribution<B> {
        self.joint.map(|(_, b)| b.clone()).to_distribution()
    }
}

/// The four conditions, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Clause {
    /// First marginal of the joint valuation `≡ₚ` the left-hand side.
    LhsMarginal,
    /// Second marginal `≡ₚ` the picked right-hand valuation.
    RhsMarginal,
    /// Every support pair satisfies the predicate.
    Predicate,
    /// `{rhs_pick} ⊆ₚ rhs`.
    Containment,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::LhsMarginal => "(i) first marginal ≡p lhs",
            Clause::RhsMarginal => "(ii) second marginal ≡p rhs pick",
            Clause::Predicate => "(iii) support satisfies predicate",
            Clause::Containment => "(iv) {rhs pick} ⊆p rhs",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail { clause: Clause, detail: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn failed_clause(&self) -> Option<Clause> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail { clause, .. } => Some(*clause),
        }
    }
}

fn first_difference<T: Ord + Clone + fmt::Debug>(
    a: &Distribution<T>,
    b: &Distribution<T>,
) -> String {
    let mut keys: Vec<&T> = a.weights().keys().chain(b.weights().keys()).collect();
    keys.sort();
    keys.dedup();
    for k in keys {
        let (pa, pb) = (a.prob(k), b.prob(k));
        if pa != pb {
            return format!(
                "value {k:?}: {} in the marginal, {} expected",
                format_rational(&pa),
                format_rational(&pb)
            );
        }
    }
    "distributions differ".into()
}

/// Re-verifies every side condition of `w` against `goal`.
pub fn check<A, B>(goal: &Goal<A, B>, w: &Witness<A, B>) -> Verdict
where
    A: Ord + Clone + fmt::Debug,
    B: Ord + Clone + fmt::Debug,
{
    let m1 = w.first_marginal();
    let lhs = goal.lhs.to_distribution();
    if m1 != lhs {
        return Verdict::Fail {
            clause: Clause::LhsMarginal,
            detail: first_difference(&m1, &lhs),
        };
    }
    let m2 = w.second_marginal();
    let pick = w.rhs_pick.to_distribution();
    if m2 != pick {
        return Verdict::Fail {
            clause: Clause::RhsMarginal,
            detail: first_difference(&m2, &pick),
        };
    }
    if let Some(e) = w
        .joint
        .positive()
        .find(|e| !goal.predicate.holds(&e.value.0, &e.value.1))
    {
        return Verdict::Fail {
            clause: Clause::Predicate,
            detail: format!(
                "entry {} = {:?} with probability {} violates {}",
                e.index,
                e.value,
                format_rational(&e.prob),
                goal.predicate.name()
            ),
        };
    }
    if let PSubset::Fails {
        separator,
        threshold,
        ..
    } = ProcessSet::singleton(w.rhs_pick.clone()).subset_p(&goal.rhs)
    {
        let f: Vec<String> = separator
            .iter()
            .map(|(v, c)| format!("{v:?} ↦ {}", format_rational(c)))
            .collect();
        return Verdict::Fail {
            clause: Clause::Containment,
            detail: format!(
                "f = {{{}}} has expectation above {} on the pick but not on any rhs member",
                f.join(", "),
                format_rational(&threshold)
            ),
        };
    }
    Verdict::Pass
}

/// Ret: `ret a ⊨ {ret b} : P` when `P(a, b)`.
pub fn ret<A: fmt::Debug, B: fmt::Debug>(a: A, b: B, p: &Predicate<A, B>) -> Result<Witness<A, B>>
where
    B: Clone,
{
    if !p.holds(&a, &b) {
        return Err(Error::Precondition(format!(
            "Ret: {} does not hold of ({a:?}, {b:?})",
            p.name()
        )));
    }
    Ok(Witness {
        rhs_pick: IndexedValuation::ret(b.clone()),
        joint: IndexedValuation::ret((a, b)),
        predicate: p.name().to_string(),
    })
}

/// Bind: from `𝕀 ⊨ 𝓘 : P` and, for every support pair, a witness of
/// `F(x) ⊨ F′(y) : Q`, builds `(x ← 𝕀; F x) ⊨ (y ← 𝓘; F′ y) : Q`.
///
/// Each continuation witness is checked against its own goal before use.
/// The new pick resolves the continuation through the joint valuation, so
/// it may depend on the left value `x` as well as on `y`.
pub fn bind<A, B, A2, B2>(
    w1: &Witness<A, B>,
    f: impl Fn(&A) -> IndexedValuation<A2>,
    f2: impl Fn(&B) -> ProcessSet<B2>,
    q: &Predicate<A2, B2>,
    mut k: impl FnMut(&A, &B) -> Result<Witness<A2, B2>>,
) -> Result<Witness<A2, B2>>
where
    A: Ord + Clone + fmt::Debug,
    B: Ord + Clone + fmt::Debug,
    A2: Ord + Clone + fmt::Debug,
    B2: Ord + Clone + fmt::Debug,
{
    let joint = w1.joint.trim();
    let mut cont: BTreeMap<(A, B), Witness<A2, B2>> = BTreeMap::new();
    for e in joint.entries() {
        let (x, y) = &e.value;
        if cont.contains_key(&e.value) {
            continue;
        }
        let w = k(x, y)?;
        let goal = Goal {
            lhs: f(x),
            rhs: f2(y),
            predicate: q.clone(),
        };
        if let Verdict::Fail { clause, detail } = check(&goal, &w) {
            return Err(Error::Precondition(format!(
                "Bind: continuation at ({x:?}, {y:?}) fails {clause}: {detail}"
            )));
        }
        cont.insert(e.value.clone(), w);
    }
    Ok(Witness {
        joint: joint.bind(|xy| cont[xy].joint.clone()),
        rhs_pick: joint.bind(|xy| cont[xy].rhs_pick.clone()),
        predicate: q.name().to_string(),
    })
}

/// P-Choice: couples both sides as if they took the same branch.
pub fn pchoice<A: Clone, B: Clone>(
    w1: &Witness<A, B>,
    p: &Rational,
    w2: &Witness<A, B>,
) -> Result<Witness<A, B>> {
    if w1.predicate != w2.predicate {
        return Err(Error::Precondition(format!(
            "P-Choice: predicates differ ({} vs {})",
            w1.predicate, w2.predicate
        )));
    }
    Ok(Witness {
        joint: IndexedValuation::pchoice(&w1.joint, p, &w2.joint)?,
        rhs_pick: IndexedValuation::pchoice(&w1.rhs_pick, p, &w2.rhs_pick)?,
        predicate: w1.predicate.clone(),
    })
}

/// Equiv: moves a witness for `(𝕀, 𝓘)` to `(𝕀′, 𝓘′)` with `𝕀 ≡ 𝕀′` and
/// `𝓘 ⊆ 𝓘′`.
pub fn equiv<A, B>(
    w: &Witness<A, B>,
    old: (&IndexedValuation<A>, &ProcessSet<B>),
    new: (&IndexedValuation<A>, &ProcessSet<B>),
) -> Result<Witness<A, B>>
where
    A: Ord + Clone,
    B: Ord + Clone,
{
    if !old.0.equiv(new.0) {
        return Err(Error::Precondition(
            "Equiv: left-hand sides are not ≡".into(),
        ));
    }
    if !old.1.subset(new.1) {
        return Err(Error::Precondition(
            "Equiv: right-hand side is not ⊆ the new one".into(),
        ));
    }
    Ok(w.clone())
}

/// Conseq: weakens the predicate, checking the implication on the support.
pub fn conseq<A, B>(w: &Witness<A, B>, p: &Predicate<A, B>) -> Result<Witness<A, B>>
where
    A: Clone + fmt::Debug,
    B: Clone + fmt::Debug,
{
    if let Some(e) = w
        .joint
        .positive()
        .find(|e| !p.holds(&e.value.0, &e.value.1))
    {
        return Err(Error::Precondition(format!(
            "Conseq: {} fails on support pair {:?}",
            p.name(),
            e.value
        )));
    }
    Ok(Witness {
        predicate: p.name().to_string(),
        ..w.clone()
    })
}

/// Trivial: the product of `𝕀` with the first member of `𝓘`, predicate
/// `true`.
pub fn trivial<A: Clone, B: Clone>(
    lhs: &IndexedValuation<A>,
    rhs: &ProcessSet<B>,
) -> Witness<A, B> {
    let pick = rhs.members()[0].clone();
    Witness {
        joint: lhs.bind(|a| pick.map(|b| (a.clone(), b.clone()))),
        rhs_pick: pick,
        predicate: "true".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sandwich {
    #[serde(with = "crate::rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub mid: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub hi: Rational,
}

/// The expected-value bound carried by an equality coupling:
/// `Eᵐⁱⁿ[g;𝓘] ≤ E[f;𝕀] ≤ Eᵐᵃˣ[g;𝓘]`.
///
/// The witness must pass [`check`] and relate only pairs with
/// `f(x) = g(y)`; any other coupling is rejected.
pub fn sandwich<A, B>(
    goal: &Goal<A, B>,
    w: &Witness<A, B>,
    f: impl Fn(&A) -> Rational,
    g: impl Fn(&B) -> Rational,
) -> Result<Sandwich>
where
    A: Ord + Clone + fmt::Debug,
    B: Ord + Clone + fmt::Debug,
{
    if let Verdict::Fail { clause, detail } = check(goal, w) {
        return Err(Error::Precondition(format!(
            "witness fails {clause}: {detail}"
        )));
    }
    if let Some(e) = w.joint.positive().find(|e| f(&e.value.0) != g(&e.value.1)) {
        return Err(Error::Precondition(format!(
            "not an equality coupling: f ≠ g on support pair {:?}",
            e.value
        )));
    }
    let (lo, hi) = goal.rhs.extrema(&g);
    let mid = goal.lhs.expected_value(&f);
    if lo > mid || mid > hi {
        return Err(Error::Precondition(format!(
            "bound violated: {} ≤ {} ≤ {}",
            format_rational(&lo),
            format_rational(&mid),
            format_rational(&hi)
        )));
    }
    Ok(Sandwich { lo, mid, hi })
}

/// `Σ prob` of positive entries whose pair satisfies `p`; 1 for a valid
/// witness.
pub fn predicate_mass<A, B>(w: &Witness<A, B>, p: &Predicate<A, B>) -> Rational {
    w.joint
        .positive()
        .filter(|e| p.holds(&e.value.0, &e.value.1))
        .fold(Rational::zero(), |acc, e| acc + &e.prob)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn eq() -> Predicate<i64, i64> {
        Predicate::new("=", |a: &i64, b: &i64| a == b)
    }

    #[test]
    fn ret_witness_passes() {
        let w = ret(0, 0, &eq()).unwrap();
        let goal = Goal {
            lhs: IndexedValuation::ret(0),
            rhs: ProcessSet::ret(0),
            predicate: eq(),
        };
        assert_eq!(check(&goal, &w), Verdict::Pass);
        assert!(ret(0, 1, &eq()).is_err());
    }

    #[test]
    fn pchoice_of_rets() {
        let w = pchoice(
            &ret(1, 1, &eq()).unwrap(),
            &ratio(1, 3),
            &ret(2, 2, &eq()).unwrap(),
        )
        .unwrap();
        let lhs = IndexedValuation::pchoice(
            &IndexedValuation::ret(1),
            &ratio(1, 3),
            &IndexedValuation::ret(2),
        )
        .unwrap();
        let rhs =
            ProcessSet::pchoice(&ProcessSet::ret(1), &ratio(1, 3), &ProcessSet::ret(2)).unwrap();
        let goal = Goal {
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            predicate: eq(),
        };
        assert!(check(&goal, &w).passed());
        let s = sandwich(&goal, &w, |x| int(*x), |y| int(*y)).unwrap();
        assert_eq!(s.mid, ratio(5, 3));
        assert_eq!((s.lo.clone(), s.hi.clone()), (s.mid.clone(), s.mid));
    }

    #[test]
    fn clauses_are_reported_in_order() {
        let w = ret(0, 0, &eq()).unwrap();
        let bad_lhs = Goal {
            lhs: IndexedValuation::ret(1),
            rhs: ProcessSet::ret(0),
            predicate: eq(),
        };
        assert_eq!(
            check(&bad_lhs, &w).failed_clause(),
            Some(Clause::LhsMarginal)
        );
        let mut w2 = w.clone();
        w2.rhs_pick = IndexedValuation::ret(5);
        let goal = Goal {
            lhs: IndexedValuation::ret(0),
            rhs: ProcessSet::ret(0),
            predicate: eq(),
        };
        assert_eq!(check(&goal, &w2).failed_clause(), Some(Clause::RhsMarginal));
        let lt = Goal {
            predicate: Predicate::new("<", |a: &i64, b: &i64| a < b),
            ..goal.clone()
        };
        assert_eq!(check(&lt, &w).failed_clause(), Some(Clause::Predicate));
        let elsewhere = Goal {
            rhs: ProcessSet::ret(3),
            ..goal
        };
        assert_eq!(
            check(&elsewhere, &w).failed_clause(),
            Some(Clause::Containment)
        );
    }

    #[test]
    fn bind_composes_and_checks_continuations() {
        let w1 = pchoice(
            &ret(1, 1, &eq()).unwrap(),
            &ratio(1, 2),
            &ret(2, 2, &eq()).unwrap(),
        )
        .unwrap();
        let f = |x: &i64| IndexedValuation::ret(x * 10);
        let f2 = |y: &i64| ProcessSet::ret(y * 10).union(&ProcessSet::ret(-1));
        let w = bind(&w1, f, f2, &eq(), |x, y| ret(x * 10, y * 10, &eq())).unwrap();
        let lhs1 = w1.joint.map(|(a, _)| *a);
        let rhs1 =
            ProcessSet::pchoice(&ProcessSet::ret(1), &ratio(1, 2), &ProcessSet::ret(2)).unwrap();
        let goal = Goal {
            lhs: lhs1.bind(f),
            rhs: rhs1.bind(f2),
            predicate: eq(),
        };
        assert!(check(&goal, &w).passed());
        // a continuation violating Q is refused
        let r = bind(&w1, f, f2, &eq(), |x, _| {
            ret(x * 10, -1, &Predicate::truth())
        });
        assert!(r.is_err());
    }

    #[test]
    fn conseq_and_trivial() {
        let w = ret(0, 0, &eq()).unwrap();
        let le = Predicate::new("<=", |a: &i64, b: &i64| a <= b);
        assert_eq!(conseq(&w, &le).unwrap().predicate, "<=");
        assert!(conseq(&w, &Predicate::new("<", |a: &i64, b: &i64| a < b)).is_err());

        let lhs = IndexedValuation::uniform(vec![1, 2]).unwrap();
        let rhs = ProcessSet::choose([7, 8]).unwrap();
        let t = trivial(&lhs, &rhs);
        let goal = Goal {
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            predicate: Predicate::truth(),
        };
        assert!(check(&goal, &t).passed());
        assert!(sandwich(&goal, &t, |x| int(*x), |y| int(*y)).is_err());
    }
}
