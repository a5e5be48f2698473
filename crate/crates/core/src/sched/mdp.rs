//! Scheduler-extremal expectations by backward induction.
//!
//! The program under all schedulers is a finite-horizon Markov decision
//! process: at each configuration the scheduler picks an enabled thread and
//! the thread's step resolves randomly. For an expected-value objective a
//! scheduler that looks only at the current configuration attains both
//! extrema, so values are memoized per configuration.
//!
//! Each memo entry also records `need`, the largest number of steps any
//! scheduler can still take before thread 0 is a value. A configuration
//! reached with `k` steps of budget left is fine iff `need ≤ k`; this is the
//! same check as keying the memo on `(configuration, k)` without storing one
//! entry per budget. A cycle in the state space makes `need` unbounded and
//! surfaces as budget exhaustion.
//!
//! Choosing a thread that cannot step (a stutter) is never considered: it
//! spends budget without changing the configuration.
//! [`brute_force_extremal`] re-derives the extrema over history-dependent
//! schedulers, with stutters optionally allowed, as an independent check.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lang::{enabled, successors, Config, Expr, Val};
use crate::rational::Rational;

use super::{deadlock, exhausted, Functional, SchedulerPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

struct Node {
    lo: Rational,
    hi: Rational,
    arg_lo: usize,
    arg_hi: usize,
    need: usize,
}

#[derive(Clone, Serialize)]
pub struct ExtremalResult {
    #[serde(with = "crate::rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub hi: Rational,
    pub budget: usize,
    /// Largest number of steps any scheduler takes before termination.
    pub depth: usize,
    pub explored_states: usize,
    #[serde(skip)]
    policy_lo: Arc<HashMap<Config, usize>>,
    #[serde(skip)]
    policy_hi: Arc<HashMap<Config, usize>>,
}

impl fmt::Debug for ExtremalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtremalResult")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("budget", &self.budget)
            .field("depth", &self.depth)
            .field("explored_states", &self.explored_states)
            .finish()
    }
}

#[cfg(feature = "parallel")]
type Map = dashmap::DashMap<Config, Arc<Node>>;

#[cfg(not(feature = "parallel"))]
type Map = std::sync::Mutex<HashMap<Config, Arc<Node>>>;

struct Memo(Map);

impl Memo {
    fn new() -> Self {
        Memo(Map::default())
    }

    #[cfg(feature = "parallel")]
    fn get(&self, c: &Config) -> Option<Arc<Node>> {
        self.0.get(c).map(|r| Arc::clone(r.value()))
    }

    #[cfg(not(feature = "parallel"))]
    fn get(&self, c: &Config) -> Option<Arc<Node>> {
        self.0.lock().unwrap().get(c).cloned()
    }

    #[cfg(feature = "parallel")]
    fn insert(&self, c: Config, n: Arc<Node>) {
        self.0.insert(c, n);
    }

    #[cfg(not(feature = "parallel"))]
    fn insert(&self, c: Config, n: Arc<Node>) {
        self.0.lock().unwrap().insert(c, n);
    }

    #[cfg(feature = "parallel")]
    fn into_entries(self) -> Vec<(Config, Arc<Node>)> {
        self.0.into_iter().collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn into_entries(self) -> Vec<(Config, Arc<Node>)> {
        self.0.into_inner().unwrap().into_iter().collect()
    }
}

/// Depth below which sibling choices are explored in parallel.
const PAR_DEPTH: usize = 6;

struct Solver<'a> {
    f: &'a Functional,
    budget: usize,
    memo: Memo,
    exec: Exec,
}

impl Solver<'_> {
    fn solve(&self, c: &Config, left: usize) -> Result<Arc<Node>> {
        if let Some(n) = self.memo.get(c) {
            return if n.need <= left {
                Ok(n)
            } else {
                Err(exhausted(self.budget, c))
            };
        }
        if let Some(v) = c.result() {
            let x = self.f.apply(v)?;
            let n = Arc::new(Node {
                lo: x.clone(),
                hi: x,
                arg_lo: 0,
                arg_hi: 0,
                need: 0,
            });
            self.memo.insert(c.clone(), Arc::clone(&n));
            return Ok(n);
        }
        if left == 0 {
            return Err(exhausted(self.budget, c));
        }
        let en = enabled(c);
        if en.is_empty() {
            return Err(deadlock(c));
        }
        let choice = |i: usize| -> Result<(Rational, Rational, usize)> {
            let mut lo = Rational::zero();
            let mut hi = Rational::zero();
            let mut need = 0;
            for (p, c2) in successors(c, i).expect("enabled thread steps") {
                let n = self.solve(&c2, left - 1)?;
                lo += &p * &n.lo;
                hi += &p * &n.hi;
                need = need.max(n.need + 1);
            }
            Ok((lo, hi, need))
        };
        let results: Vec<Result<(Rational, Rational, usize)>> =
            if self.exec.is_parallel() && self.budget - left < PAR_DEPTH && en.len() > 1 {
                self.exec.map(en.clone(), choice)
            } else {
                en.iter().map(|&i| choice(i)).collect()
            };
        let mut best: Option<Node> = None;
        for (&i, r) in en.iter().zip(results) {
            let (lo, hi, need) = r?;
            match &mut best {
                None => {
                    best = Some(Node {
                        lo,
                        hi,
                        arg_lo: i,
                        arg_hi: i,
                        need,
                    })
                }
                Some(b) => {
                    if lo < b.lo {
                        b.lo = lo;
                        b.arg_lo = i;
                    }
                    if hi > b.hi {
                        b.hi = hi;
                        b.arg_hi = i;
                    }
                    b.need = b.need.max(need);
                }
            }
        }
        let n = Arc::new(best.expect("at least one enabled thread"));
        self.memo.insert(c.clone(), Arc::clone(&n));
        Ok(n)
    }
}

/// Minimum and maximum of `E[f]` over all schedulers, each attained by a
/// memoryless policy retrievable with [`extract_policy`].
pub fn extremal_expectation(
    prog: &Expr,
    budget: usize,
    f: &Functional,
    exec: Exec,
) -> Result<ExtremalResult> {
    let solver = Solver {
        f,
        budget,
        memo: Memo::new(),
        exec,
    };
    let init = Config::new(prog.clone());
    let root = solver.solve(&init, budget)?;
    let entries = solver.memo.into_entries();
    let explored_states = entries.len();
    let mut policy_lo = HashMap::with_capacity(entries.len());
    let mut policy_hi = HashMap::with_capacity(entries.len());
    for (c, n) in entries {
        policy_lo.insert(c.clone(), n.arg_lo);
        policy_hi.insert(c, n.arg_hi);
    }
    Ok(ExtremalResult {
        lo: root.lo.clone(),
        hi: root.hi.clone(),
        budget,
        depth: root.need,
        explored_states,
        policy_lo: Arc::new(policy_lo),
        policy_hi: Arc::new(policy_hi),
    })
}

/// A scheduler reading only the current configuration that attains the
/// requested extremum.
pub fn extract_policy(r: &ExtremalResult, dir: Direction) -> SchedulerPolicy {
    let table = match dir {
        Direction::Min => Arc::clone(&r.policy_lo),
        Direction::Max => Arc::clone(&r.policy_hi),
    };
    let name = match dir {
        Direction::Min => "extremal-min",
        Direction::Max => "extremal-max",
    };
    SchedulerPolicy::new(name, move |t| table.get(t.curr()).copied().unwrap_or(0))
}

/// Result of the history-tree enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForce {
    pub lo: Rational,
    pub hi: Rational,
    /// Scheduler decision points visited.
    pub nodes: u64,
}

/// Extrema over history-dependent schedulers by walking the full tree of
/// histories, without memoization. Up to `stutters` stutter choices may be
/// spent anywhere; each also consumes one step of `budget`. Fails with
/// [`Error::TooLarge`] past `node_cap` decision points.
pub fn brute_force_extremal(
    prog: &Expr,
    budget: usize,
    stutters: usize,
    f: &Functional,
    node_cap: u64,
) -> Result<BruteForce> {
    struct Walk<'a> {
        f: &'a Functional,
        budget: usize,
        cap: u64,
        nodes: u64,
    }
    impl Walk<'_> {
        fn go(&mut self, c: &Config, left: usize, stutters: usize) -> Result<(Rational, Rational)> {
            if let Some(v) = c.result() {
                let x = self.f.apply(v)?;
                return Ok((x.clone(), x));
            }
            if left == 0 {
                return Err(exhausted(self.budget, c));
            }
            let en = enabled(c);
            if en.is_empty() {
                return Err(deadlock(c));
            }
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::TooLarge {
                    count: self.nodes as u128,
                    limit: self.cap as u128,
                });
            }
            let mut lo: Option<Rational> = None;
            let mut hi: Option<Rational> = None;
            let mut consider = |l: Rational, h: Rational| {
                if lo.as_ref().is_none_or(|x| l < *x) {
                    lo = Some(l);
                }
                if hi.as_ref().is_none_or(|x| h > *x) {
                    hi = Some(h);
                }
            };
            for i in en {
                let mut l = Rational::zero();
                let mut h = Rational::zero();
                for (p, c2) in successors(c, i).expect("enabled thread steps") {
                    let (a, b) = self.go(&c2, left - 1, stutters)?;
                    l += &p * a;
                    h += &p * b;
                }
                consider(l, h);
            }
            if stutters > 0 {
                let (l, h) = self.go(c, left - 1, stutters - 1)?;
                consider(l, h);
            }
            Ok((lo.unwrap(), hi.unwrap()))
        }
    }
    let mut w = Walk {
        f,
        budget,
        cap: node_cap,
        nodes: 0,
    };
    let (lo, hi) = w.go(&Config::new(prog.clone()), budget, stutters)?;
    Ok(BruteForce {
        lo,
        hi,
        nodes: w.nodes,
    })
}

/// Convenience: the set of final values reachable under some scheduler.
pub fn reachable_results(prog: &Expr, budget: usize) -> Result<Vec<Val>> {
    let r = extremal_expectation(
        prog,
        budget,
        &Functional::new("any", |_| Some(Rational::zero())),
        Exec::Sequential,
    )?;
    let mut out: Vec<Val> = r
        .policy_lo
        .keys()
        .filter_map(|c| c.result().cloned())
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;
    use crate::rational::int;
    use crate::sched::evaluate_policy;

    fn race() -> Expr {
        // Two writers race on one cell; thread 0 reads it after both flags.
        parse(
            "(let c (alloc 0) (let d (alloc false)
               (seq (fork (seq (store c 1) (store d true)))
                    (store c 2)
                    (await d)
                    (load c))))",
        )
        .unwrap()
    }

    #[test]
    fn race_extrema_and_policies() {
        let f = Functional::int();
        for exec in [Exec::Sequential, Exec::Parallel] {
            let r = extremal_expectation(&race(), 40, &f, exec).unwrap();
            assert_eq!((r.lo.clone(), r.hi.clone()), (int(1), int(2)));
            let lo = evaluate_policy(&race(), &extract_policy(&r, Direction::Min), 40, &f).unwrap();
            let hi = evaluate_policy(&race(), &extract_policy(&r, Direction::Max), 40, &f).unwrap();
            assert_eq!((lo, hi), (int(1), int(2)));
        }
    }

    #[test]
    fn brute_force_agrees_and_stutters_are_harmless() {
        let f = Functional::int();
        let r = extremal_expectation(&race(), 40, &f, Exec::Sequential).unwrap();
        let b = brute_force_extremal(&race(), 40, 0, &f, 1_000_000).unwrap();
        assert_eq!((b.lo.clone(), b.hi.clone()), (r.lo.clone(), r.hi.clone()));
        let s = brute_force_extremal(&race(), 42, 2, &f, 1_000_000).unwrap();
        assert_eq!((s.lo, s.hi), (r.lo, r.hi));
        assert!(s.nodes > b.nodes);
    }

    #[test]
    fn single_thread_extrema_collapse() {
        let prog = parse("(if (flip 1 3) 3 0)").unwrap();
        let r = extremal_expectation(&prog, 10, &Functional::int(), Exec::default()).unwrap();
        assert_eq!((r.lo.clone(), r.hi), (int(1), int(1)));
        assert_eq!(r.depth, 2);
        assert!(matches!(
            extremal_expectation(&prog, 1, &Functional::int(), Exec::default()),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn node_cap_is_enforced() {
        let r = brute_force_extremal(&race(), 40, 0, &Functional::int(), 3);
        assert!(matches!(r, Err(Error::TooLarge { .. })));
    }

    #[test]
    fn reachable_results_of_a_race() {
        assert_eq!(
            reachable_results(&race(), 40).unwrap(),
            vec![Val::Int(1), Val::Int(2)]
        );
    }
}
