//! A two-level concurrent skip list with per-node locks, its monadic
//! specification, and the comparison-count functionals.
//!
//! A node is the value `(key, (next, (lock, down)))`: `next` and `lock` are
//! heap cells, `down` is the bottom-level node with the same key (unit on
//! the bottom level). Each level runs from an `INT_MIN` head to an `INT_MAX`
//! tail. Locks are CAS spinlocks.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ival::IndexedValuation;
use crate::lang::{parse, Expr, State, Val};
use crate::ndset::ProcessSet;
use crate::rational::{int, pow2, ratio, Rational};

pub const INT_MIN: i64 = -(1 << 62);
pub const INT_MAX: i64 = 1 << 62;

/// Keys to insert and a key to look up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipListKeys {
    pub keys: Vec<i64>,
    pub query_key: i64,
}

impl SkipListKeys {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for &k in self.keys.iter().chain([&self.query_key]) {
            if k <= INT_MIN || k >= INT_MAX {
                return Err(Error::Precondition(format!(
                    "key {k} is not strictly between the sentinels"
                )));
            }
        }
        for &k in &self.keys {
            if !seen.insert(k) {
                return Err(Error::Precondition(format!("duplicate key {k}")));
            }
        }
        Ok(())
    }

    /// Number of inserted keys below the query key.
    pub fn below_query(&self) -> usize {
        self.keys.iter().filter(|&&i| i < self.query_key).count()
    }
}

fn program(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("built-in program does not parse: {e}\n{text}"))
}

// walk one level from p; returns ((pred, succ), z + comparisons)
const FIND: &str = "(fun k (rec walk p (fun z (let c (load (fst (snd p))) \
    (if (< (fst c) k) (walk c (+ z 1)) (pair (pair p c) (+ z 1)))))))";

const ACQUIRE: &str = "(rec acq c (if (cas c false true) () (acq c)))";

// search from s, lock the predecessor, and retry if its successor moved
const FIND_LOCK: &str =
    "(fun k (rec fl s (let r (find k s 0) (let p (fst (fst r)) (let c (snd (fst r)) \
    (let lk (fst (snd (snd p))) (seq (acq lk) \
      (if (= (load (fst (snd p))) c) (pair p c) (seq (store lk false) (fl s))))))))))";

fn with_helpers(body: &str) -> Expr {
    program(&format!(
        "(let find {FIND} (let acq {ACQUIRE} (let findlock {FIND_LOCK} (fun sl (fun k {body})))))"
    ))
}

/// An empty list; evaluates to the top-level head.
pub fn skip_list_new() -> Expr {
    program(&format!(
        "(let tb (pair {INT_MAX} (pair (alloc ()) (pair (alloc false) ()))) \
         (let hb (pair {INT_MIN} (pair (alloc tb) (pair (alloc false) ()))) \
         (let tt (pair {INT_MAX} (pair (alloc ()) (pair (alloc false) tb))) \
         (pair {INT_MIN} (pair (alloc tt) (pair (alloc false) hb))))))"
    ))
}

/// `add sl k`: lock the top predecessor, then the bottom one (found from
/// the top predecessor's down link), insert below if absent, and only then
/// flip a fair coin to decide whether to link a top node too.
pub fn skip_list_add() -> Expr {
    with_helpers(
        "(let t (findlock k sl) (let pt (fst t) (let ct (snd t) \
         (let b (findlock k (snd (snd (snd pt)))) (let pb (fst b) (let cb (snd b) \
         (seq \
           (if (= (fst cb) k) () \
             (let nb (pair k (pair (alloc cb) (pair (alloc false) ()))) \
               (seq (store (fst (snd pb)) nb) \
                    (if (flip 1 2) (store (fst (snd pt)) (pair k (pair (alloc ct) (pair (alloc false) nb)))) ())))) \
           (store (fst (snd (snd pb))) false) \
           (store (fst (snd (snd pt))) false))))))))",
    )
}

/// The variant that flips before locking and, when staying on the bottom
/// level, locks only the bottom predecessor. Its distribution depends on
/// the scheduler.
pub fn skip_list_add_early_flip() -> Expr {
    with_helpers(
        "(if (flip 1 2) \
           (let t (findlock k sl) (let pt (fst t) (let ct (snd t) \
           (let b (findlock k (snd (snd (snd pt)))) (let pb (fst b) (let cb (snd b) \
           (seq \
             (if (= (fst cb) k) () \
               (let nb (pair k (pair (alloc cb) (pair (alloc false) ()))) \
                 (seq (store (fst (snd pb)) nb) \
                      (store (fst (snd pt)) (pair k (pair (alloc ct) (pair (alloc false) nb))))))) \
             (store (fst (snd (snd pb))) false) \
             (store (fst (snd (snd pt))) false)))))))) \
           (let r (find k sl 0) (let pt (fst (fst r)) \
           (let b (findlock k (snd (snd (snd pt)))) (let pb (fst b) (let cb (snd b) \
           (seq \
             (if (= (fst cb) k) () (store (fst (snd pb)) (pair k (pair (alloc cb) (pair (alloc false) ()))))) \
             (store (fst (snd (snd pb))) false))))))))",
    )
}

/// `mem sl k` returns `(found, z)` where `z` counts key comparisons.
/// Takes no locks.
pub fn skip_list_mem() -> Expr {
    with_helpers(
        "(let r (find k sl 0) (let pc (fst r) (let z (snd r) \
           (if (= (fst (snd pc)) k) (pair true z) \
             (let r2 (find k (snd (snd (snd (fst pc)))) z) \
               (pair (= (fst (snd (fst r2))) k) (snd r2)))))))",
    )
}

/// Thread `i` adds `per_thread[i]` in order (thread 0 is main). After
/// joining, main returns `((found, z), head)` for `mem head query`.
pub fn skip_list_client(per_thread: &[Vec<i64>], query: i64, early_flip: bool) -> Result<Expr> {
    if per_thread.is_empty() {
        return Err(Error::Precondition("at least one thread is needed".into()));
    }
    SkipListKeys {
        keys: per_thread.concat(),
        query_key: query,
    }
    .validate()?;
    let add = if early_flip {
        skip_list_add_early_flip()
    } else {
        skip_list_add()
    };
    let adds = |ks: &[i64]| {
        ks.iter()
            .map(|k| format!("(add sl {k})"))
            .collect::<Vec<_>>()
    };
    let mut body = Vec::new();
    for (i, ks) in per_thread.iter().enumerate().skip(1) {
        let mut w = adds(ks);
        w.push(format!("(store d{i} true)"));
        body.push(format!("(fork (seq {}))", w.join(" ")));
    }
    body.extend(adds(&per_thread[0]));
    body.extend((1..per_thread.len()).map(|i| format!("(await d{i})")));
    body.push(format!("(pair (mem sl {query}) sl)"));
    let mut text = if body.len() == 1 {
        body.pop().unwrap()
    } else {
        format!("(seq {})", body.join(" "))
    };
    for i in (1..per_thread.len()).rev() {
        text = format!("(let d{i} (alloc false) {text})");
    }
    Ok(program(&format!(
        "(let sl {} (let add {add} (let mem {} {text})))",
        skip_list_new(),
        skip_list_mem()
    )))
}

/// Splits a client result into `(found, z, head)`.
pub fn client_result(v: &Val) -> Option<(bool, i64, &Val)> {
    let (m, head) = v.as_pair()?;
    let (found, z) = m.as_pair()?;
    Some((found.as_bool()?, z.as_int()?, head))
}

fn node(v: &Val) -> Option<(i64, u64, &Val)> {
    let (key, rest) = v.as_pair()?;
    let (next, rest) = rest.as_pair()?;
    let (_, down) = rest.as_pair()?;
    match next {
        Val::Loc(l) => Some((key.as_int()?, *l, down)),
        _ => None,
    }
}

fn level(s: &State, head: &Val) -> Option<Vec<i64>> {
    let mut keys = Vec::new();
    let (_, mut next, _) = node(head)?;
    loop {
        let (k, n, _) = node(s.get(next)?)?;
        if k == INT_MAX {
            return Some(keys);
        }
        keys.push(k);
        next = n;
    }
}

/// The top and bottom key sequences reachable from a top-level head.
pub fn levels(s: &State, head: &Val) -> Result<(Vec<i64>, Vec<i64>)> {
    let malformed = || Error::Precondition("value is not a skip list head".into());
    let (_, _, down) = node(head).ok_or_else(malformed)?;
    let top = level(s, head).ok_or_else(malformed)?;
    let bottom = level(s, down).ok_or_else(malformed)?;
    Ok((top, bottom))
}

fn sorted(v: &[i64]) -> Vec<i64> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Simulates adding the keys of `l` in an adversarial order, each reaching
/// the top level with probability 1/2. Members are deduplicated at every
/// level, which preserves `≡`.
pub fn skip_list_spec(l: &[i64], tl: &[i64], bl: &[i64]) -> ProcessSet<(Vec<i64>, Vec<i64>)> {
    spec_memo(l, sorted(tl), sorted(bl), &mut HashMap::new())
}

type SpecKey = (Vec<i64>, Vec<i64>, Vec<i64>);

// Levels only matter as sets, so subproblems reached through different
// insertion orders are shared.
fn spec_memo(
    l: &[i64],
    tl: Vec<i64>,
    bl: Vec<i64>,
    memo: &mut HashMap<SpecKey, ProcessSet<(Vec<i64>, Vec<i64>)>>,
) -> ProcessSet<(Vec<i64>, Vec<i64>)> {
    if l.is_empty() {
        return ProcessSet::ret((tl, bl));
    }
    let key = (l.to_vec(), tl, bl);
    if let Some(s) = memo.get(&key) {
        return s.clone();
    }
    let (_, tl, bl) = &key;
    let coin = IndexedValuation::pchoice(
        &IndexedValuation::ret(false),
        &ratio(1, 2),
        &IndexedValuation::ret(true),
    )
    .expect("1/2 is a probability");
    let mut branches = Vec::with_capacity(l.len());
    for &k in l {
        let rest: Vec<i64> = l.iter().copied().filter(|&x| x != k).collect();
        let up = sorted(&[tl.as_slice(), &[k]].concat());
        let bl2 = sorted(&[bl.as_slice(), &[k]].concat());
        let stay = spec_memo(&rest, tl.clone(), bl2.clone(), memo);
        let climb = spec_memo(&rest, up, bl2, memo);
        branches.push((k, stay, climb));
    }
    let picks = ProcessSet::choose(l.iter().copied()).expect("l is nonempty");
    let out = picks
        .bind(|k| {
            let (_, stay, climb) = branches.iter().find(|b| b.0 == *k).expect("picked from l");
            ProcessSet::singleton(coin.clone())
                .bind(|&top| if top { climb.clone() } else { stay.clone() })
        })
        .dedup();
    memo.insert(key, out.clone());
    out
}

pub fn topcost(tl: &[i64], k: i64) -> i64 {
    1 + tl.iter().filter(|&&i| INT_MIN < i && i < k).count() as i64
}

pub fn rettop(tl: &[i64], k: i64) -> i64 {
    tl.iter()
        .copied()
        .filter(|&i| i < k)
        .fold(INT_MIN, i64::max)
}

pub fn botcost(tl: &[i64], bl: &[i64], k: i64) -> i64 {
    let r = rettop(tl, k);
    1 + bl.iter().filter(|&&i| r < i && i < k).count() as i64
}

/// Comparisons `mem` makes to look up `k`.
pub fn skipcost(tl: &[i64], bl: &[i64], k: i64) -> i64 {
    if tl.contains(&k) {
        topcost(tl, k)
    } else {
        topcost(tl, k) + botcost(tl, bl, k)
    }
}

/// `1 + n/2 + 2(1 − 1/2^{n+1})`.
pub fn skip_cost_bound(n: usize) -> Rational {
    let n32 = u32::try_from(n).expect("n fits in u32");
    int(1) + ratio(n as i64, 2) + int(2) * (int(1) - int(1) / pow2(n32 + 1))
}

/// `Eᵐᵃˣ[skipcost(·,·,k); skipListSpec(l, [], [])]`.
pub fn spec_max_cost(l: &[i64], k: i64) -> Rational {
    skip_list_spec(l, &[], &[]).ex_max(|(tl, bl)| int(skipcost(tl, bl, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Config;
    use crate::sched::{outcome_valuation, SchedulerPolicy};

    #[test]
    fn cost_formulas() {
        assert_eq!(skipcost(&[], &[], 7), 2);
        assert_eq!(topcost(&[5], 5), 1);
        assert_eq!(skipcost(&[5], &[5], 5), 1);
        assert_eq!(skipcost(&[], &[1, 2, 3], 4), 5);
        assert_eq!(rettop(&[1, 9, 4], 5), 4);
        assert_eq!(botcost(&[2], &[1, 2, 3, 4], 4), 2);
    }

    #[test]
    fn bound_closed_form() {
        assert_eq!(skip_cost_bound(0), int(2));
        assert_eq!(skip_cost_bound(1), int(3));
        for n in 0..20 {
            assert!(skip_cost_bound(n) <= skip_cost_bound(n + 1));
        }
    }

    #[test]
    fn spec_small_cases() {
        assert!(skip_list_spec(&[], &[3], &[3, 1]).equiv(&ProcessSet::ret((vec![3], vec![1, 3]))));
        let one = skip_list_spec(&[4], &[], &[]);
        let support = one.support();
        assert!(support.contains(&(vec![], vec![4])));
        assert!(support.contains(&(vec![4], vec![4])));
        assert!(skip_list_spec(&[1, 2, 3], &[], &[]).equiv(&skip_list_spec(&[3, 1, 2], &[], &[])));
    }

    fn run(per_thread: &[Vec<i64>], query: i64) -> IndexedValuation<Val> {
        let prog = skip_list_client(per_thread, query, false).unwrap();
        outcome_valuation(&prog, &SchedulerPolicy::round_robin(), 100_000).unwrap()
    }

    #[test]
    fn mem_on_empty_list() {
        let out = run(&[vec![]], 3);
        assert_eq!(out.len(), 1);
        let (found, z, _) = client_result(&out.entries()[0].value).unwrap();
        assert_eq!((found, z), (false, 2));
    }

    #[test]
    fn single_add_then_mem() {
        let out = run(&[vec![5]], 5);
        let zs = out.map(|v| {
            let (found, z, _) = client_result(v).unwrap();
            assert!(found);
            z
        });
        let d = zs.to_distribution();
        assert_eq!(d.prob(&1), ratio(1, 2));
        assert_eq!(d.prob(&2), ratio(1, 2));
    }

    #[test]
    fn quiescent_cost_agrees_with_levels() {
        let prog = skip_list_client(&[vec![3, 1, 2]], 2, false).unwrap();
        let mut c = Config::new(prog);
        // drive one path to completion by always taking the first outcome
        let mut steps = 0;
        while !c.is_terminated() {
            c = crate::lang::successors(&c, 0).unwrap().swap_remove(0).1;
            steps += 1;
            assert!(steps < 100_000);
        }
        let (found, z, head) = client_result(c.result().unwrap()).unwrap();
        let (top, bottom) = levels(&c.state, head).unwrap();
        assert!(found);
        assert_eq!(bottom, vec![1, 2, 3]);
        assert_eq!(z, skipcost(&top, &bottom, 2));
    }
}
