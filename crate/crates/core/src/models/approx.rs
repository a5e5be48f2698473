//! Monadic specifications of the approximate counter.

use std::collections::HashMap;

use crate::ival::IndexedValuation;
use crate::ndset::{bind_extrema, ProcessSet};
use crate::rational::{int, ratio, Rational};

fn coin(k: i64) -> ProcessSet<i64> {
    let a = IndexedValuation::ret(k + 1);
    let b = IndexedValuation::ret(0);
    let v = IndexedValuation::pchoice(&a, &ratio(1, k + 1), &b).expect("1/(k+1) is a probability");
    ProcessSet::singleton(v)
}

/// `k ← ret 0 ∪ ⋯ ∪ ret MAX; ret (k+1) ⊕_{1/(k+1)} ret 0`.
pub fn approx_incr(max: i64) -> ProcessSet<i64> {
    assert!(max >= 0, "MAX must be nonnegative");
    ProcessSet::choose(0..=max)
        .expect("0..=MAX is nonempty")
        .bind(|&k| coin(k))
}

/// `approxN 0 l = ret l`, `approxN (n+1) l = k ← approxIncr; approxN n (l+k)`.
///
/// Materialized; the member count grows doubly exponentially, so use
/// [`approx_n_extrema`] beyond a few increments.
pub fn approx_n(n: usize, l: i64, max: i64) -> ProcessSet<i64> {
    if n == 0 {
        return ProcessSet::ret(l);
    }
    approx_incr(max).bind(|&k| approx_n(n - 1, l + k, max))
}

/// `(Eᵐⁱⁿ, Eᵐᵃˣ)` of `f` on `approxN n l`, computed compositionally.
pub fn approx_n_extrema(
    n: usize,
    l: i64,
    max: i64,
    f: &dyn Fn(i64) -> Rational,
) -> (Rational, Rational) {
    fn go(
        n: usize,
        l: i64,
        incr: &ProcessSet<i64>,
        f: &dyn Fn(i64) -> Rational,
        memo: &mut HashMap<(usize, i64), (Rational, Rational)>,
    ) -> (Rational, Rational) {
        if n == 0 {
            let v = f(l);
            return (v.clone(), v);
        }
        if let Some(r) = memo.get(&(n, l)) {
            return r.clone();
        }
        let r = bind_extrema(incr, |&k| go(n - 1, l + k, incr, f, memo));
        memo.insert((n, l), r.clone());
        r
    }
    go(n, l, &approx_incr(max), f, &mut HashMap::new())
}

/// `approxN′ 0 t l = ret (t, l)`,
/// `approxN′ (n+1) t l = ret (t, l) ∪ (k ← approxIncr; approxN′ n (t+1) (l+k))`.
///
/// `t` counts increments performed so far; the union lets a client stop early.
pub fn approx_n_prime(n: usize, t: i64, l: i64, max: i64) -> ProcessSet<(i64, i64)> {
    let stop = ProcessSet::ret((t, l));
    if n == 0 {
        return stop;
    }
    stop.union(&approx_incr(max).bind(|&k| approx_n_prime(n - 1, t + 1, l + k, max)))
}

/// `(Eᵐⁱⁿ, Eᵐᵃˣ)` of `f` on `approxN′ n t l`, computed compositionally.
pub fn approx_n_prime_extrema(
    n: usize,
    t: i64,
    l: i64,
    max: i64,
    f: &dyn Fn(i64, i64) -> Rational,
) -> (Rational, Rational) {
    fn go(
        n: usize,
        t: i64,
        l: i64,
        incr: &ProcessSet<i64>,
        f: &dyn Fn(i64, i64) -> Rational,
        memo: &mut HashMap<(usize, i64, i64), (Rational, Rational)>,
    ) -> (Rational, Rational) {
        let here = f(t, l);
        if n == 0 {
            return (here.clone(), here);
        }
        if let Some(r) = memo.get(&(n, t, l)) {
            return r.clone();
        }
        let (lo, hi) = bind_extrema(incr, |&k| go(n - 1, t + 1, l + k, incr, f, memo));
        let r = (lo.min(here.clone()), hi.max(here));
        memo.insert((n, t, l), r.clone());
        r
    }
    go(n, t, l, &approx_incr(max), f, &mut HashMap::new())
}

/// `f(l) = l`, the usual functional for counter values.
pub fn id(l: i64) -> Rational {
    int(l)
}
