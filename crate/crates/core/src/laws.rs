//! Seeded property suites for the algebraic laws of indexed valuations and
//! process sets.
//!
//! Every case draws its inputs from its own ChaCha stream, so a report is a
//! function of `(suite, cases, seed)` alone.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::ival::IndexedValuation;
use crate::ndset::{bind_extrema, ProcessSet};
use crate::rational::{int, Rational};

type IVal = IndexedValuation<i64>;
type Set = ProcessSet<i64>;

/// Values range over `0..VALUES`.
const VALUES: i64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Monad laws and the equational laws for `∪` and `⊕ₚ`.
    Monad,
    /// `⊆` and `≡` on process sets.
    Ordering,
    /// `≡ₚ` on indexed valuations.
    Peq,
    /// `⊆ₚ` on process sets.
    Psub,
    /// Rules for `Eᵐⁱⁿ` and `Eᵐᵃˣ`.
    Extrema,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Monad,
        Suite::Ordering,
        Suite::Peq,
        Suite::Psub,
        Suite::Extrema,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Monad => "monad",
            Suite::Ordering => "ordering",
            Suite::Peq => "peq",
            Suite::Psub => "psub",
            Suite::Extrema => "extrema",
        }
    }

    fn laws(self) -> &'static [Law] {
        match self {
            Suite::Monad => MONAD,
            Suite::Ordering => ORDERING,
            Suite::Peq => PEQ,
            Suite::Psub => PSUB,
            Suite::Extrema => EXTREMA,
        }
    }

    /// Law names in report order.
    pub fn law_names(self) -> Vec<&'static str> {
        self.laws().iter().map(|l| l.name).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawOutcome {
    pub law: String,
    pub cases: usize,
    pub failures: usize,
    /// The first failing case, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub case: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LawReport {
    pub suite: Suite,
    pub seed: u64,
    pub cases: usize,
    pub passed: bool,
    pub laws: Vec<LawOutcome>,
}

type Check = std::result::Result<(), String>;

struct Law {
    name: &'static str,
    check: fn(&mut Gen) -> Check,
}

/// Runs every law of `suite` on `cases` random instances.
pub fn run_suite(suite: Suite, cases: usize, seed: u64, exec: Exec) -> LawReport {
    let laws: Vec<LawOutcome> = suite
        .laws()
        .iter()
        .enumerate()
        .map(|(li, law)| {
            let results = exec.map_range(cases, |case| {
                let mut g = Gen::new(seed, li, case);
                (law.check)(&mut g)
            });
            let failures = results.iter().filter(|r| r.is_err()).count();
            let counterexample = results
                .into_iter()
                .enumerate()
                .find_map(|(case, r)| r.err().map(|detail| Counterexample { case, detail }));
            LawOutcome {
                law: law.name.to_string(),
                cases,
                failures,
                counterexample,
            }
        })
        .collect();
    LawReport {
        suite,
        seed,
        cases,
        passed: laws.iter().all(|l| l.failures == 0),
        laws,
    }
}

/// Random small instances.
pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn new(seed: u64, law: usize, case: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(((law as u64) << 40) | case as u64);
        Gen { rng }
    }

    pub fn from_seed(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn prob(&mut self) -> Rational {
        let d = self.rng.random_range(1..=6i64);
        let n = self.rng.random_range(0..=d);
        Rational::new(n.into(), d.into())
    }

    pub fn value(&mut self) -> i64 {
        self.rng.random_range(0..VALUES)
    }

    /// Up to `entries` entries; about one in six carries probability zero.
    pub fn ival(&mut self, entries: usize) -> IVal {
        let n = self.rng.random_range(1..=entries);
        let mut w: Vec<i64> = (0..n)
            .map(|_| {
                if self.rng.random_ratio(1, 6) {
                    0
                } else {
                    self.rng.random_range(1..=4)
                }
            })
            .collect();
        if w.iter().all(|&x| x == 0) {
            w[0] = 1;
        }
        let total: i64 = w.iter().sum();
        let weights: Vec<(i64, Rational)> = w
            .into_iter()
            .map(|x| (self.value(), Rational::new(x.into(), total.into())))
            .collect();
        IVal::from_weights(weights).expect("normalized weights")
    }

    pub fn set(&mut self, members: usize, entries: usize) -> Set {
        let n = self.rng.random_range(1..=members);
        Set::new((0..n).map(|_| self.ival(entries)).collect()).expect("nonempty")
    }

    /// A continuation `value → set`, tabulated over `0..VALUES`.
    pub fn kernel(&mut self, members: usize, entries: usize) -> Vec<Set> {
        (0..VALUES).map(|_| self.set(members, entries)).collect()
    }

    pub fn ival_kernel(&mut self, entries: usize) -> Vec<IVal> {
        (0..VALUES).map(|_| self.ival(entries)).collect()
    }

    /// A functional `value → rational` with small integer range.
    pub fn function(&mut self) -> Vec<Rational> {
        (0..VALUES)
            .map(|_| int(self.rng.random_range(-5..=5)))
            .collect()
    }

    /// A structurally equivalent copy: entries shuffled, indices renamed.
    pub fn reshape(&mut self, a: &IVal) -> IVal {
        let mut entries: Vec<(i64, Rational)> = a
            .entries()
            .iter()
            .map(|e| (e.value, e.prob.clone()))
            .collect();
        entries.shuffle(&mut self.rng);
        let offset = self.rng.random_range(0..100);
        IVal::from_entries(
            entries
                .into_iter()
                .enumerate()
                .map(|(i, (v, p))| (crate::ival::Index::Atom(offset + i as u32), v, p))
                .collect(),
        )
        .expect("a permutation keeps mass")
    }

    /// A probabilistically equivalent copy: one positive entry is split in
    /// two, then the result is reshaped.
    pub fn split(&mut self, a: &IVal) -> IVal {
        let mut entries: Vec<(i64, Rational)> = a
            .entries()
            .iter()
            .map(|e| (e.value, e.prob.clone()))
            .collect();
        let pos: Vec<usize> = (0..entries.len())
            .filter(|&i| entries[i].1 > int(0))
            .collect();
        let i = pos[self.rng.random_range(0..pos.len())];
        let q = self.prob();
        let (v, p) = entries[i].clone();
        entries[i].1 = &p * &q;
        entries.push((v, &p * (int(1) - q)));
        let split = IVal::from_weights(entries).expect("split keeps mass");
        self.reshape(&split)
    }

    /// A `≡` copy of a set: members reshaped, shuffled, some repeated.
    pub fn reshape_set(&mut self, a: &Set) -> Set {
        let mut ms: Vec<IVal> = a.members().iter().map(|m| self.reshape(m)).collect();
        let extra = self.rng.random_range(0..=ms.len());
        for _ in 0..extra {
            let j = self.rng.random_range(0..a.len());
            let m = self.reshape(&a.members()[j]);
            ms.push(m);
        }
        ms.shuffle(&mut self.rng);
        Set::new(ms).expect("nonempty")
    }

    /// A set whose members are random convex combinations of members of
    /// `b`, so the result is `⊆ₚ b`.
    pub fn mixtures(&mut self, b: &Set, members: usize) -> Set {
        let n = self.rng.random_range(1..=members);
        let ms = (0..n)
            .map(|_| {
                let mut m = b.members()[self.rng.random_range(0..b.len())].clone();
                for _ in 0..self.rng.random_range(0..=2) {
                    let other = &b.members()[self.rng.random_range(0..b.len())];
                    m = IVal::pchoice(&m, &self.prob(), other).expect("generated probability");
                }
                self.reshape(&m)
            })
            .collect();
        Set::new(ms).expect("nonempty")
    }

    /// `a ∪ (fresh members)`, shuffled.
    pub fn superset(&mut self, a: &Set, extra: usize, entries: usize) -> Set {
        let mut ms = a.members().to_vec();
        for _ in 0..self.rng.random_range(0..=extra) {
            ms.push(self.ival(entries));
        }
        ms.shuffle(&mut self.rng);
        Set::new(ms).expect("nonempty")
    }

    /// A nonempty sub-collection of members.
    pub fn subset(&mut self, a: &Set) -> Set {
        let mut ms: Vec<IVal> = a
            .members()
            .iter()
            .filter(|_| self.rng.random_bool(0.5))
            .cloned()
            .collect();
        if ms.is_empty() {
            ms.push(a.members()[self.rng.random_range(0..a.len())].clone());
        }
        Set::new(ms).expect("nonempty")
    }

    pub fn nonneg(&mut self) -> Rational {
        Rational::new(
            self.rng.random_range(0..=6i64).into(),
            self.rng.random_range(1..=3i64).into(),
        )
    }

    pub fn offset(&mut self) -> Rational {
        Rational::new(
            self.rng.random_range(-6..=6i64).into(),
            self.rng.random_range(1..=3i64).into(),
        )
    }
}

fn show<T: Serialize>(x: &T) -> String {
    serde_json::to_string(x).unwrap_or_else(|e| format!("<{e}>"))
}

fn expect(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn set_eq(lhs: &Set, rhs: &Set) -> Check {
    expect(lhs.equiv(rhs), || {
        format!("lhs {} is not ≡ rhs {}", show(lhs), show(rhs))
    })
}

fn set_sub(lhs: &Set, rhs: &Set) -> Check {
    expect(lhs.subset(rhs), || {
        format!("lhs {} is not ⊆ rhs {}", show(lhs), show(rhs))
    })
}

fn psub(lhs: &Set, rhs: &Set) -> Check {
    expect(lhs.subset_p(rhs).holds(), || {
        format!("lhs {} is not ⊆ₚ rhs {}", show(lhs), show(rhs))
    })
}

fn peq(lhs: &IVal, rhs: &IVal) -> Check {
    expect(lhs.prob_equiv(rhs), || {
        format!("lhs {} is not ≡ₚ rhs {}", show(lhs), show(rhs))
    })
}

fn rat_eq(what: &str, lhs: &Rational, rhs: &Rational) -> Check {
    expect(lhs == rhs, || format!("{what}: {lhs} ≠ {rhs}"))
}

fn at<T: Clone>(table: &[T], x: i64) -> T {
    table[x as usize].clone()
}

macro_rules! law {
    ($name:expr, $f:expr) => {
        Law {
            name: $name,
            check: $f,
        }
    };
}

static MONAD: &[Law] = &[
    law!("ival: bind(ret a, F) ≡ F(a)", |g| {
        let a = g.value();
        let k = g.ival_kernel(4);
        let lhs = IVal::ret(a).bind(|&x| at(&k, x));
        expect(lhs.equiv(&k[a as usize]), || show(&lhs))
    }),
    law!("ival: bind(I, ret) ≡ I", |g| {
        let a = g.ival(5);
        let lhs = a.bind(|&x| IVal::ret(x));
        expect(lhs.equiv(&a), || show(&a))
    }),
    law!("ival: bind is associative", |g| {
        let a = g.ival(4);
        let f = g.ival_kernel(3);
        let h = g.ival_kernel(3);
        let lhs = a.bind(|&x| at(&f, x)).bind(|&y| at(&h, y));
        let rhs = a.bind(|&x| f[x as usize].bind(|&y| at(&h, y)));
        expect(lhs.equiv(&rhs), || show(&a))
    }),
    law!("bind(ret a, F) ≡ F(a)", |g| {
        let a = g.value();
        let k = g.kernel(3, 3);
        set_eq(&Set::ret(a).bind(|&x| at(&k, x)), &k[a as usize])
    }),
    law!("bind(𝓘, ret) ≡ 𝓘", |g| {
        let a = g.set(4, 5);
        set_eq(&a.bind(|&x| Set::ret(x)), &a)
    }),
    law!("bind is associative", |g| {
        let a = g.set(2, 2);
        let f = g.kernel(2, 2);
        let h = g.kernel(2, 2);
        let lhs = a.bind(|&x| at(&f, x)).bind(|&y| at(&h, y));
        let rhs = a.bind(|&x| f[x as usize].bind(|&y| at(&h, y)));
        set_eq(&lhs, &rhs)
    }),
    law!(
        "𝓘₁ ⊕ₚ 𝓘₂ ≡ 𝓘₂ ⊕₁₋ₚ 𝓘₁",
        |g| {
            let (a, b, p) = (g.set(3, 4), g.set(3, 4), g.prob());
            let lhs = Set::pchoice(&a, &p, &b).unwrap();
            let rhs = Set::pchoice(&b, &(int(1) - &p), &a).unwrap();
            set_eq(&lhs, &rhs)
        }
    ),
    law!("𝓘₁ ⊕₁ 𝓘₂ ≡ 𝓘₁", |g| {
        let (a, b) = (g.set(3, 4), g.set(3, 4));
        set_eq(&Set::pchoice(&a, &int(1), &b).unwrap(), &a)
    }),
    law!("𝓘 ∪ 𝓘 ≡ 𝓘", |g| {
        let a = g.set(4, 5);
        set_eq(&a.union(&a), &a)
    }),
    law!("𝓘₁ ∪ 𝓘₂ ≡ 𝓘₂ ∪ 𝓘₁", |g| {
        let (a, b) = (g.set(3, 4), g.set(3, 4));
        set_eq(&a.union(&b), &b.union(&a))
    }),
    law!(
        "𝓘₁ ∪ (𝓘₂ ∪ 𝓘₃) ≡ (𝓘₁ ∪ 𝓘₂) ∪ 𝓘₃",
        |g| {
            let (a, b, c) = (g.set(3, 4), g.set(3, 4), g.set(3, 4));
            set_eq(&a.union(&b.union(&c)), &a.union(&b).union(&c))
        }
    ),
    law!(
        "𝓘₁ ⊕ₚ (𝓘₂ ∪ 𝓘₃) ≡ (𝓘₁ ⊕ₚ 𝓘₂) ∪ (𝓘₁ ⊕ₚ 𝓘₃)",
        |g| {
            let (a, b, c, p) = (g.set(3, 4), g.set(3, 4), g.set(3, 4), g.prob());
            let lhs = Set::pchoice(&a, &p, &b.union(&c)).unwrap();
            let rhs = Set::pchoice(&a, &p, &b)
                .unwrap()
                .union(&Set::pchoice(&a, &p, &c).unwrap());
            set_eq(&lhs, &rhs)
        }
    ),
    law!(
        "bind(𝓘₁ ∪ 𝓘₂, F) ≡ bind(𝓘₁, F) ∪ bind(𝓘₂, F)",
        |g| {
            let (a, b, k) = (g.set(3, 3), g.set(3, 3), g.kernel(2, 2));
            let f = |x: &i64| at(&k, *x);
            set_eq(&a.union(&b).bind(f), &a.bind(f).union(&b.bind(f)))
        }
    ),
    law!(
        "bind(𝓘₁ ⊕ₚ 𝓘₂, F) ≡ bind(𝓘₁, F) ⊕ₚ bind(𝓘₂, F)",
        |g| {
            let (a, b, p, k) = (g.set(2, 3), g.set(2, 3), g.prob(), g.kernel(2, 2));
            let f = |x: &i64| at(&k, *x);
            let lhs = Set::pchoice(&a, &p, &b).unwrap().bind(f);
            let rhs = Set::pchoice(&a.bind(f), &p, &b.bind(f)).unwrap();
            set_eq(&lhs, &rhs)
        }
    ),
];

static ORDERING: &[Law] = &[
    law!("𝓘₁ ≡ 𝓘₂ ⇒ 𝓘₁ ⊆ 𝓘₂", |g| {
        let a = g.set(4, 5);
        let b = g.reshape_set(&a);
        set_eq(&a, &b)?;
        set_sub(&a, &b)
    }),
    law!(
        "𝓘₁ ⊆ 𝓘₂ ∧ 𝓘₂ ⊆ 𝓘₁ ⇒ 𝓘₁ ≡ 𝓘₂",
        |g| {
            // one related pair and one unrelated pair per case
            let a = g.set(4, 4);
            let b = g.reshape_set(&a);
            let c = g.set(2, 2);
            for (x, y) in [(&a, &b), (&a, &c)] {
                if x.subset(y) && y.subset(x) {
                    set_eq(x, y)?;
                }
            }
            Ok(())
        }
    ),
    law!("⊆ is transitive", |g| {
        let a = g.set(3, 4);
        let a2 = g.reshape_set(&a);
        let b = g.superset(&a2, 2, 4);
        let c = g.superset(&b, 2, 4);
        set_sub(&a, &b)?;
        set_sub(&b, &c)?;
        set_sub(&a, &c)
    }),
    law!("⊆ is monotone in ⊕ₚ", |g| {
        let (a, b, p) = (g.set(3, 3), g.set(3, 3), g.prob());
        let a2 = g.superset(&a, 2, 3);
        let b2 = g.superset(&b, 2, 3);
        set_sub(
            &Set::pchoice(&a, &p, &b).unwrap(),
            &Set::pchoice(&a2, &p, &b2).unwrap(),
        )
    }),
    law!("⊆ is monotone in ∪", |g| {
        let (a, b) = (g.set(3, 3), g.set(3, 3));
        let a2 = g.superset(&a, 2, 3);
        let b2 = g.superset(&b, 2, 3);
        set_sub(&a.union(&b), &a2.union(&b2))
    }),
    law!("𝓘₁ ⊆ 𝓘₁ ∪ 𝓘₂", |g| {
        let (a, b) = (g.set(4, 4), g.set(4, 4));
        set_sub(&a, &a.union(&b))
    }),
    law!("⊆ is monotone in bind", |g| {
        let a = g.set(2, 3);
        let a2 = g.superset(&a, 1, 3);
        let k = g.kernel(2, 2);
        let k2: Vec<Set> = k.iter().map(|s| g.superset(s, 1, 2)).collect();
        set_sub(&a.bind(|&x| at(&k, x)), &a2.bind(|&x| at(&k2, x)))
    }),
];

static PEQ: &[Law] = &[
    law!("𝕀 ≡ₚ 𝕀", |g| {
        let a = g.ival(5);
        peq(&a, &a)
    }),
    law!("≡ₚ respects ≡ on both sides", |g| {
        let a = g.ival(4);
        let b = g.split(&a);
        peq(&a, &b)?;
        let a2 = g.reshape(&a);
        let b2 = g.reshape(&b);
        expect(a.equiv(&a2) && b.equiv(&b2), || "reshape broke ≡".into())?;
        peq(&a2, &b2)
    }),
    law!("≡ₚ is transitive", |g| {
        let a = g.ival(4);
        let b = g.split(&a);
        let c = g.split(&b);
        peq(&a, &b)?;
        peq(&b, &c)?;
        peq(&a, &c)
    }),
    law!("≡ₚ is a congruence for bind", |g| {
        let a = g.ival(4);
        let a2 = g.split(&a);
        let k = g.ival_kernel(3);
        let k2: Vec<IVal> = k.iter().map(|m| g.split(m)).collect();
        peq(&a.bind(|&x| at(&k, x)), &a2.bind(|&x| at(&k2, x)))
    }),
    law!("≡ₚ is a congruence for ⊕ₚ", |g| {
        let (a, b, p) = (g.ival(4), g.ival(4), g.prob());
        let a2 = g.split(&a);
        let b2 = g.split(&b);
        peq(
            &IVal::pchoice(&a, &p, &b).unwrap(),
            &IVal::pchoice(&a2, &p, &b2).unwrap(),
        )
    }),
    law!("bind(𝕀₁, λ_. 𝕀₂) ≡ₚ 𝕀₂", |g| {
        let (a, b) = (g.ival(4), g.ival(4));
        peq(&a.bind(|_| b.clone()), &b)
    }),
];

static PSUB: &[Law] = &[
    law!("𝓘 ⊆ₚ 𝓘", |g| {
        let a = g.set(4, 4);
        psub(&a, &a)
    }),
    law!("⊆ₚ is transitive", |g| {
        let c = g.set(3, 4);
        let b = g.mixtures(&c, 3);
        let a = g.mixtures(&b, 3);
        psub(&a, &b)?;
        psub(&b, &c)?;
        psub(&a, &c)
    }),
    law!("⊆ₚ weakens along ⊆", |g| {
        let b = g.set(3, 4);
        let a = g.mixtures(&b, 3);
        let a2 = g.subset(&a);
        let b2 = g.superset(&b, 2, 4);
        psub(&a, &b)?;
        set_sub(&a2, &a)?;
        set_sub(&b, &b2)?;
        psub(&a2, &b2)
    }),
    law!("⊆ₚ is monotone in bind", |g| {
        let a2 = g.set(2, 3);
        let a = g.mixtures(&a2, 2);
        let k2 = g.kernel(2, 2);
        let k: Vec<Set> = k2.iter().map(|s| g.mixtures(s, 2)).collect();
        psub(&a.bind(|&x| at(&k, x)), &a2.bind(|&x| at(&k2, x)))
    }),
    law!("⊆ₚ is monotone in ⊕ₚ", |g| {
        let (a2, b2, p) = (g.set(3, 3), g.set(3, 3), g.prob());
        let a = g.mixtures(&a2, 2);
        let b = g.mixtures(&b2, 2);
        psub(
            &Set::pchoice(&a, &p, &b).unwrap(),
            &Set::pchoice(&a2, &p, &b2).unwrap(),
        )
    }),
    law!("bind(𝓘₁, λ_. 𝓘₂) ⊆ₚ 𝓘₂", |g| {
        let (a, b) = (g.set(2, 3), g.set(3, 3));
        psub(&a.bind(|_| b.clone()), &b)
    }),
];

fn apply(f: &[Rational]) -> impl Fn(&i64) -> Rational + '_ {
    move |x| at(f, *x)
}

fn extrema_laws(g: &mut Gen, max: bool) -> [Check; 5] {
    let pick = |s: &Set, f: &dyn Fn(&i64) -> Rational| if max { s.ex_max(f) } else { s.ex_min(f) };
    let f = g.function();
    let a = g.set(4, 4);
    let b = g.set(4, 4);
    let v = g.value();
    let p = g.prob();
    let (k, c) = (g.nonneg(), g.offset());
    let ret = rat_eq("ret", &pick(&Set::ret(v), &apply(&f)), &f[v as usize]);
    let affine = rat_eq(
        "affine",
        &pick(&a, &|x| &k * at(&f, *x) + &c),
        &(&k * pick(&a, &apply(&f)) + &c),
    );
    let choice = rat_eq(
        "⊕ₚ",
        &pick(&Set::pchoice(&a, &p, &b).unwrap(), &apply(&f)),
        &(&p * pick(&a, &apply(&f)) + (int(1) - &p) * pick(&b, &apply(&f))),
    );
    let inner: Vec<i64> = (0..VALUES).map(|_| g.value()).collect();
    let composed = rat_eq(
        "g ∘ f",
        &pick(&a, &|x| at(&f, inner[*x as usize])),
        &pick(&a.bind(|&x| Set::ret(inner[x as usize])), &apply(&f)),
    );
    let kern = g.kernel(2, 2);
    let bound = {
        let per: Vec<Rational> = (0..VALUES as usize)
            .map(|x| pick(&kern[x], &apply(&f)))
            .collect();
        let support = a.support();
        let k1 = support
            .iter()
            .map(|&x| per[x as usize].clone())
            .min()
            .unwrap();
        let k2 = support
            .iter()
            .map(|&x| per[x as usize].clone())
            .max()
            .unwrap();
        let full = pick(&a.bind(|&x| at(&kern, x)), &apply(&f));
        let (lo, hi) = bind_extrema(&a, |&x| kern[x as usize].extrema(apply(&f)));
        let compositional = if max { hi } else { lo };
        expect(k1 <= full && full <= k2, || {
            format!("bind: {full} outside [{k1}, {k2}]")
        })
        .and(rat_eq("bind (compositional)", &compositional, &full))
    };
    [ret, affine, choice, composed, bound]
}

static EXTREMA: &[Law] = &[
    law!("Eᵐⁱⁿ[f; ret v] = f(v)", |g| extrema_laws(g, false)[0]
        .clone()),
    law!(
        "Eᵐⁱⁿ[k·f + c; 𝓘] = k·Eᵐⁱⁿ[f; 𝓘] + c",
        |g| extrema_laws(g, false)[1].clone()
    ),
    law!(
        "Eᵐⁱⁿ[f; 𝓘₁ ⊕ₚ 𝓘₂] = p·Eᵐⁱⁿ[f; 𝓘₁] + (1−p)·Eᵐⁱⁿ[f; 𝓘₂]",
        |g| { extrema_laws(g, false)[2].clone() }
    ),
    law!(
        "Eᵐⁱⁿ[g ∘ f; 𝓘] = Eᵐⁱⁿ[g; x ← 𝓘; ret f(x)]",
        |g| extrema_laws(g, false)[3].clone()
    ),
    law!(
        "bounds on Eᵐⁱⁿ[f; F(x)] bound Eᵐⁱⁿ of the bind",
        |g| { extrema_laws(g, false)[4].clone() }
    ),
    law!("Eᵐᵃˣ[f; ret v] = f(v)", |g| extrema_laws(g, true)[0]
        .clone()),
    law!(
        "Eᵐᵃˣ[k·f + c; 𝓘] = k·Eᵐᵃˣ[f; 𝓘] + c",
        |g| extrema_laws(g, true)[1].clone()
    ),
    law!(
        "Eᵐᵃˣ[f; 𝓘₁ ⊕ₚ 𝓘₂] = p·Eᵐᵃˣ[f; 𝓘₁] + (1−p)·Eᵐᵃˣ[f; 𝓘₂]",
        |g| { extrema_laws(g, true)[2].clone() }
    ),
    law!(
        "Eᵐᵃˣ[g ∘ f; 𝓘] = Eᵐᵃˣ[g; x ← 𝓘; ret f(x)]",
        |g| extrema_laws(g, true)[3].clone()
    ),
    law!(
        "bounds on Eᵐᵃˣ[f; F(x)] bound Eᵐᵃˣ of the bind",
        |g| { extrema_laws(g, true)[4].clone() }
    ),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_on_a_small_run() {
        for s in Suite::ALL {
            let r = run_suite(s, 40, 3, Exec::Sequential);
            assert!(r.passed, "{}", serde_json::to_string_pretty(&r).unwrap());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::Psub, 20, 11, Exec::Sequential);
        let b = run_suite(Suite::Psub, 20, 11, Exec::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }
}
