//! Schedulers and exact analysis of programs under them.
//!
//! A scheduler sees the whole trace and names the thread to step next.
//! [`evaluate_policy`] computes the exact expected value of a functional of
//! thread 0's result under one scheduler; [`extremal_expectation`] computes
//! the range over *all* deterministic schedulers by backward induction;
//! [`monte_carlo`] samples executions.
//!
//! Every analysis is bounded: a path on which thread 0 is not a value after
//! the step budget is an error, never a silent truncation.

mod mdp;
mod sim;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ival::IndexedValuation;
use crate::lang::{config_step, enabled, successors, Config, Expr, Trace, Val};
use crate::ndset::ProcessSet;
use crate::rational::Rational;

pub use mdp::{
    brute_force_extremal, extract_policy, extremal_expectation, reachable_results, BruteForce,
    Direction, ExtremalResult,
};
pub use sim::{monte_carlo, MonteCarlo};

/// A named map from result values to rationals. `None` means the value is
/// outside the functional's domain, which is reported as an error.
#[derive(Clone)]
pub struct Functional {
    name: String,
    f: Arc<dyn Fn(&Val) -> Option<Rational> + Send + Sync>,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Functional({})", self.name)
    }
}

impl Functional {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Val) -> Option<Rational> + Send + Sync + 'static,
    ) -> Self {
        Functional {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// The integer result itself.
    pub fn int() -> Self {
        Functional::new("id", |v| {
            v.as_int().map(|n| Rational::from_integer(BigInt::from(n)))
        })
    }

    /// 1 on `target`, 0 elsewhere.
    pub fn indicator(target: Val) -> Self {
        Functional::new(format!("[{target}]"), move |v| {
            Some(if *v == target {
                Rational::one()
            } else {
                Rational::zero()
            })
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, v: &Val) -> Result<Rational> {
        (self.f)(v).ok_or_else(|| Error::FunctionalUndefined {
            name: self.name.clone(),
            value: v.to_string(),
        })
    }
}

/// A scheduler `φ : Trace → ℕ`.
#[derive(Clone)]
pub struct SchedulerPolicy {
    name: String,
    seed: Option<u64>,
    decide: Arc<dyn Fn(&Trace) -> usize + Send + Sync>,
}

impl fmt::Debug for SchedulerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SchedulerPolicy({})", self.name)
    }
}

impl SchedulerPolicy {
    pub fn new(
        name: impl Into<String>,
        decide: impl Fn(&Trace) -> usize + Send + Sync + 'static,
    ) -> Self {
        SchedulerPolicy {
            name: name.into(),
            seed: None,
            decide: Arc::new(decide),
        }
    }

    /// Step `k` goes to thread `k mod |pool|`.
    pub fn round_robin() -> Self {
        SchedulerPolicy::new("round-robin", |t| t.steps() % t.curr().threads.len())
    }

    /// Follows `script`, then stutters forever (an index past any pool).
    pub fn fixed_script(script: Vec<usize>) -> Self {
        SchedulerPolicy::new("fixed-script", move |t| {
            script.get(t.steps()).copied().unwrap_or(usize::MAX)
        })
    }

    /// Picks uniformly among the enabled threads, as a deterministic
    /// function of the seed, the step number, the enabled set and the heap.
    pub fn seeded_random(seed: u64) -> Self {
        let mut p = SchedulerPolicy::new(format!("seeded-random({seed})"), move |t| {
            let c = t.curr();
            let en = enabled(c);
            if en.is_empty() {
                return 0;
            }
            let mut h = DefaultHasher::new();
            (seed, t.steps(), &en, &c.state).hash(&mut h);
            let mut rng = ChaCha8Rng::seed_from_u64(h.finish());
            en[rng.random_range(0..en.len())]
        });
        p.seed = Some(seed);
        p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn decide(&self, t: &Trace) -> usize {
        (self.decide)(t)
    }
}

/// One scheduler-directed step: the chosen thread's outcomes, each appended
/// to the trace.
pub fn trace_step_ival(sched: &SchedulerPolicy, t: &Trace) -> IndexedValuation<Trace> {
    config_step(t.curr(), sched.decide(t)).map(|c| t.extended(c.clone()))
}

/// Steps `n` times and returns thread 0's expression.
pub fn trace_step_ival_n(sched: &SchedulerPolicy, t: &Trace, n: usize) -> IndexedValuation<Expr> {
    if n == 0 {
        return IndexedValuation::ret(t.curr().threads[0].clone());
    }
    trace_step_ival(sched, t).bind(|t2| trace_step_ival_n(sched, t2, n - 1))
}

/// Successors of `c` when thread `i` is chosen; a stutter yields `c` itself.
fn outcomes(c: &Config, i: usize) -> Vec<(Rational, Config)> {
    successors(c, i).unwrap_or_else(|| vec![(Rational::one(), c.clone())])
}

fn deadlock(c: &Config) -> Error {
    Error::Deadlock(format!("thread 0 is `{}`", c.threads[0]))
}

fn exhausted(budget: usize, c: &Config) -> Error {
    Error::BudgetExhausted {
        budget,
        detail: format!("thread 0 is still `{}`", c.threads[0]),
    }
}

/// Whether every positive-probability `n`-step extension of `t` under
/// `sched` ends with thread 0 a value.
pub fn terminates_within(sched: &SchedulerPolicy, t: &Trace, n: usize) -> bool {
    fn go(sched: &SchedulerPolicy, t: &mut Trace, n: usize) -> bool {
        if t.curr().is_terminated() {
            return true;
        }
        if n == 0 {
            return false;
        }
        let i = sched.decide(t);
        for (_, c) in outcomes(t.curr(), i) {
            t.push(c);
            let ok = go(sched, t, n - 1);
            t.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    go(sched, &mut t.clone(), n)
}

/// Exact `E[f; trstepivalN(φ, [prog], n)]`.
pub fn evaluate_policy(
    prog: &Expr,
    sched: &SchedulerPolicy,
    n: usize,
    f: &Functional,
) -> Result<Rational> {
    fn go(
        sched: &SchedulerPolicy,
        t: &mut Trace,
        left: usize,
        budget: usize,
        f: &Functional,
    ) -> Result<Rational> {
        let c = t.curr();
        if let Some(v) = c.result() {
            return f.apply(v);
        }
        if left == 0 {
            return Err(exhausted(budget, c));
        }
        if enabled(c).is_empty() {
            return Err(deadlock(c));
        }
        let i = sched.decide(t);
        let mut acc = Rational::zero();
        for (p, c2) in outcomes(c, i) {
            t.push(c2);
            let v = go(sched, t, left - 1, budget, f);
            t.pop();
            acc += p * v?;
        }
        Ok(acc)
    }
    go(sched, &mut Trace::new(Config::new(prog.clone())), n, n, f)
}

/// The distribution of thread 0's final value, one entry per execution path.
pub fn outcome_valuation(
    prog: &Expr,
    sched: &SchedulerPolicy,
    n: usize,
) -> Result<IndexedValuation<Val>> {
    fn go(
        sched: &SchedulerPolicy,
        t: &mut Trace,
        left: usize,
        budget: usize,
        p: Rational,
        out: &mut Vec<(Val, Rational)>,
    ) -> Result<()> {
        let c = t.curr();
        if let Some(v) = c.result() {
            out.push((v.clone(), p));
            return Ok(());
        }
        if left == 0 {
            return Err(exhausted(budget, c));
        }
        if enabled(c).is_empty() {
            return Err(deadlock(c));
        }
        let i = sched.decide(t);
        for (q, c2) in outcomes(c, i) {
            t.push(c2);
            let r = go(sched, t, left - 1, budget, &p * q, out);
            t.pop();
            r?;
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(
        sched,
        &mut Trace::new(Config::new(prog.clone())),
        n,
        n,
        Rational::one(),
        &mut out,
    )?;
    IndexedValuation::from_weights(out)
}

/// The four numbers of the soundness check and whether they nest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SandwichReport {
    #[serde(with = "crate::rational::serde_str")]
    pub spec_lo: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub lo: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub hi: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub spec_hi: Rational,
    pub holds: bool,
}

impl SandwichReport {
    pub fn new(spec: (Rational, Rational), program: (Rational, Rational)) -> Self {
        let holds = spec.0 <= program.0 && program.1 <= spec.1;
        SandwichReport {
            spec_lo: spec.0,
            lo: program.0,
            hi: program.1,
            spec_hi: spec.1,
            holds,
        }
    }
}

/// Checks `Eᵐⁱⁿ[g;spec] ≤ E[f; φ] ≤ Eᵐᵃˣ[g;spec]` for every scheduler `φ` by
/// comparing with the scheduler-extremal values.
pub fn sandwich_check<T>(
    prog: &Expr,
    spec: &ProcessSet<T>,
    f: &Functional,
    g: impl FnMut(&T) -> Rational,
    n: usize,
    exec: crate::Exec,
) -> Result<SandwichReport> {
    let r = extremal_expectation(prog, n, f, exec)?;
    Ok(SandwichReport::new(spec.extrema(g), (r.lo, r.hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;
    use crate::rational::{int, ratio};

    fn trace_of(steps: usize, threads: usize) -> Trace {
        let c = Config {
            threads: vec![Expr::unit(); threads],
            state: Default::default(),
        };
        let mut t = Trace::new(c.clone());
        for _ in 0..steps {
            t.push(c.clone());
        }
        t
    }

    #[test]
    fn round_robin_alternates() {
        let rr = SchedulerPolicy::round_robin();
        let picks: Vec<usize> = (0..4).map(|k| rr.decide(&trace_of(k, 2))).collect();
        assert_eq!(picks, vec![0, 1, 0, 1]);
    }

    #[test]
    fn fixed_script_pads_with_stutters() {
        let s = SchedulerPolicy::fixed_script(vec![1, 0]);
        assert_eq!(s.decide(&trace_of(1, 2)), 0);
        assert_eq!(s.decide(&trace_of(5, 2)), usize::MAX);
    }

    #[test]
    fn seeded_random_is_reproducible() {
        let prog = parse("(seq (fork 1) (fork 2) (fork 3) 0)").unwrap();
        let mut t = Trace::new(Config::new(prog));
        for _ in 0..3 {
            let c = config_step(t.curr(), 0).entries()[0].value.clone();
            t.push(c);
        }
        let a = SchedulerPolicy::seeded_random(11);
        let b = SchedulerPolicy::seeded_random(11);
        assert_eq!(a.decide(&t), b.decide(&t));
        assert!(enabled(t.curr()).contains(&a.decide(&t)));
    }

    #[test]
    fn flip_expectation_and_trace_valuation() {
        let prog = parse("(flip 1 2)").unwrap();
        let f = Functional::indicator(Val::Bool(true));
        for s in [
            SchedulerPolicy::round_robin(),
            SchedulerPolicy::seeded_random(3),
        ] {
            assert_eq!(evaluate_policy(&prog, &s, 1, &f).unwrap(), ratio(1, 2));
        }
        let v = trace_step_ival_n(
            &SchedulerPolicy::round_robin(),
            &Trace::new(Config::new(prog.clone())),
            1,
        );
        let d = v.to_distribution();
        assert_eq!(d.prob(&Expr::bool(true)), ratio(1, 2));
        assert_eq!(d.prob(&Expr::bool(false)), ratio(1, 2));
        let base = trace_step_ival_n(
            &SchedulerPolicy::round_robin(),
            &Trace::new(Config::new(prog.clone())),
            0,
        );
        assert_eq!(base, IndexedValuation::ret(prog));
    }

    #[test]
    fn terminated_configs_are_fixed_points() {
        let prog = parse("(+ 2 3)").unwrap();
        let rr = SchedulerPolicy::round_robin();
        let t = Trace::new(Config::new(prog));
        let a = trace_step_ival_n(&rr, &t, 1).to_distribution();
        let b = trace_step_ival_n(&rr, &t, 4).to_distribution();
        assert_eq!(a, b);
        assert!(terminates_within(&rr, &t, 1));
        assert!(!terminates_within(&rr, &t, 0));
    }

    #[test]
    fn budget_and_deadlock_errors() {
        let f = Functional::int();
        let spin = parse("((rec f x (f x)) 0)").unwrap();
        assert!(matches!(
            evaluate_policy(&spin, &SchedulerPolicy::round_robin(), 10, &f),
            Err(Error::BudgetExhausted { budget: 10, .. })
        ));
        let stuck = parse("(let l (alloc false) (await l))").unwrap();
        assert!(matches!(
            evaluate_policy(&stuck, &SchedulerPolicy::round_robin(), 10, &f),
            Err(Error::Deadlock(_))
        ));
        assert!(matches!(
            evaluate_policy(
                &parse("true").unwrap(),
                &SchedulerPolicy::round_robin(),
                1,
                &f
            ),
            Err(Error::FunctionalUndefined { .. })
        ));
    }

    #[test]
    fn outcome_valuation_of_two_flips() {
        let prog = parse("(if (flip 1 2) (if (flip 1 3) 2 1) 0)").unwrap();
        let v = outcome_valuation(&prog, &SchedulerPolicy::round_robin(), 10).unwrap();
        assert_eq!(v.expected_value(|x| int(x.as_int().unwrap())), ratio(2, 3));
    }
}
