//! Approximate counters as programs, and the harness that runs them.
//!
//! Every `*_incr` / `*_read` builder returns a closed function value taking
//! the counter's location.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::{parse, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterParams {
    pub max: i64,
    pub threads: usize,
    pub incrs_per_thread: usize,
}

impl CounterParams {
    pub fn validate(&self) -> Result<()> {
        if self.max < 0 {
            return Err(Error::Precondition(format!(
                "MAX must be nonnegative, got {}",
                self.max
            )));
        }
        if self.threads == 0 {
            return Err(Error::Precondition("at least one thread is needed".into()));
        }
        Ok(())
    }

    pub fn total_incrs(&self) -> usize {
        self.threads * self.incrs_per_thread
    }
}

/// Which counter implementation a harness uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Counter {
    Unbiased { max: i64 },
    Morris,
    Dlm { bits: u32 },
}

impl Counter {
    pub fn incr(&self) -> Result<Expr> {
        match *self {
            Counter::Unbiased { max } => {
                if max < 0 {
                    return Err(Error::Precondition(format!(
                        "MAX must be nonnegative, got {max}"
                    )));
                }
                Ok(unbiased_incr(max))
            }
            Counter::Morris => Ok(morris_incr()),
            Counter::Dlm { bits } => dlm_incr(bits),
        }
    }

    pub fn read(&self) -> Expr {
        match self {
            Counter::Unbiased { .. } => unbiased_read(),
            Counter::Morris | Counter::Dlm { .. } => morris_read(),
        }
    }
}

fn program(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("built-in program does not parse: {e}\n{text}"))
}

/// Reads a possibly stale value, clamps it to `MAX`, and with probability
/// `1/(k+1)` adds `k+1`, so each call adds 1 in expectation.
pub fn unbiased_incr(max: i64) -> Expr {
    program(&format!(
        "(fun l (let k (min (load l) {max}) (let b (flip 1 (+ k 1)) (if b (seq (faa l (+ k 1)) ()) ()))))"
    ))
}

pub fn unbiased_read() -> Expr {
    program("(fun l (load l))")
}

/// Stores an exponent `k`; increments it with probability `1/2^k`.
pub fn morris_incr() -> Expr {
    program("(fun l (let k (load l) (let b (flip 1 (shl 1 k)) (if b (store l (+ k 1)) ()))))")
}

/// `2^k − 1`.
pub fn morris_read() -> Expr {
    program("(fun l (- (shl 1 (load l)) 1))")
}

/// A uniform integer in `[0, 2^bits)` built from fair flips.
fn randbits(bits: u32) -> String {
    let bit = |j: u32| format!("(if (flip 1 2) {} 0)", 1u64 << j);
    let mut acc = bit(bits - 1);
    for j in (0..bits - 1).rev() {
        acc = format!("(+ {} {acc})", bit(j));
    }
    acc
}

/// Draws random bits first, then loops: load `k`; if the low `k` bits are
/// all zero try `cas l k (k+1)` and retry on failure, otherwise give up.
///
/// With `k > bits` the test degenerates to "all bits zero".
pub fn dlm_incr(bits: u32) -> Result<Expr> {
    if !(1..=62).contains(&bits) {
        return Err(Error::Precondition(format!(
            "bits must be in 1..=62, got {bits}"
        )));
    }
    Ok(program(&format!(
        "(fun l (let b {} ((rec aux u (let k (load l) \
           (if (= (mod b (shl 1 k)) 0) (if (cas l k (+ k 1)) () (aux ())) ()))) ())))",
        randbits(bits)
    )))
}

fn seq(mut items: Vec<String>) -> String {
    match items.len() {
        0 => "()".into(),
        1 => items.pop().unwrap(),
        _ => format!("(seq {})", items.join(" ")),
    }
}

/// Main forks `threads − 1` workers; every thread (main included) performs
/// `incrs_per_thread` increments, each worker then raises its own flag, and
/// main awaits all flags before reading.
pub fn counter_program(counter: Counter, p: &CounterParams) -> Result<Expr> {
    p.validate()?;
    let incr = counter.incr()?;
    let read = counter.read();
    let incrs = || vec!["(incr l)".to_string(); p.incrs_per_thread];
    let mut body = Vec::new();
    for i in 1..p.threads {
        let mut w = incrs();
        w.push(format!("(store d{i} true)"));
        body.push(format!("(fork {})", seq(w)));
    }
    body.extend(incrs());
    body.extend((1..p.threads).map(|i| format!("(await d{i})")));
    body.push("(read l)".into());
    let mut text = seq(body);
    for i in (1..p.threads).rev() {
        text = format!("(let d{i} (alloc false) {text})");
    }
    Ok(program(&format!(
        "(let incr {incr} (let read {read} (let l (alloc 0) {text})))"
    )))
}

/// Two threads, each running one unbiased increment with the body inlined
/// (fewer steps than [`counter_program`]). With `join`, main waits for the
/// worker before reading; without it the read races with the worker's
/// increment and the result depends on the scheduler.
pub fn two_thread_counter(max: i64, join: bool) -> Result<Expr> {
    if max < 0 {
        return Err(Error::Precondition(format!(
            "MAX must be nonnegative, got {max}"
        )));
    }
    let incr = format!("(let k (min (load l) {max}) (if (flip 1 (+ k 1)) (faa l (+ k 1)) 0))");
    Ok(program(&if join {
        format!("(let l (alloc 0) (let d (alloc false) (seq (fork (seq {incr} (store d true))) {incr} (await d) (load l))))")
    } else {
        format!("(let l (alloc 0) (seq (fork {incr}) {incr} (load l)))")
    }))
}

/// Two workers count the `true`s of their lists into one shared counter;
/// main forks both, joins on their flags, then reads.
pub fn count_true_client(counter: Counter, lb1: &[bool], lb2: &[bool]) -> Result<Expr> {
    let incr = counter.incr()?;
    let read = counter.read();
    let worker = |lb: &[bool], flag: &str| {
        let mut w: Vec<String> = lb
            .iter()
            .map(|&b| format!("(if {b} (incr l) ())"))
            .collect();
        w.push(format!("(store {flag} true)"));
        format!("(fork {})", seq(w))
    };
    let body = seq(vec![
        worker(lb1, "d1"),
        worker(lb2, "d2"),
        "(await d1)".into(),
        "(await d2)".into(),
        "(read l)".into(),
    ]);
    Ok(program(&format!(
        "(let incr {incr} (let read {read} (let l (alloc 0) (let d1 (alloc false) (let d2 (alloc false) {body})))))"
    )))
}
