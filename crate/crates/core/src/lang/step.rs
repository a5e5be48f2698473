use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};

use crate::ival::{Entry, Index, IndexedValuation};
use crate::rational::{is_probability, Rational};

use super::syntax::{BinOp, Expr, Val, WILDCARD};

/// The heap: allocated cells and the next fresh location.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    heap: BTreeMap<u64, Val>,
    next: u64,
}

impl State {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, l: u64) -> Option<&Val> {
        self.heap.get(&l)
    }

    pub fn heap(&self) -> &BTreeMap<u64, Val> {
        &self.heap
    }

    pub fn next_loc(&self) -> u64 {
        self.next
    }

    pub fn alloc(&mut self, v: Val) -> u64 {
        let l = self.next;
        self.heap.insert(l, v);
        self.next += 1;
        l
    }

    fn write(&self, l: u64, v: Val) -> State {
        let mut s = self.clone();
        s.heap.insert(l, v);
        s
    }
}

/// A thread pool and a heap. Thread 0 carries the program's result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub threads: Vec<Expr>,
    pub state: State,
}

impl Config {
    pub fn new(program: Expr) -> Self {
        Config {
            threads: vec![program],
            state: State::new(),
        }
    }

    /// Thread 0 is a value.
    pub fn is_terminated(&self) -> bool {
        self.threads[0].is_val()
    }

    pub fn result(&self) -> Option<&Val> {
        self.threads[0].as_val()
    }
}

/// Successful per-thread step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThreadStep {
    pub expr: Expr,
    pub state: State,
    pub spawned: Option<Expr>,
}

/// Result of locating and contracting the redex of one thread.
enum Reduct {
    Value,
    /// No rule applies (type error, unallocated cell, bad flip, overflow,
    /// or an `await` whose flag is not yet set).
    Stuck,
    Det {
        expr: Expr,
        state: Option<State>,
        spawned: Option<Expr>,
    },
    Flip {
        p: Rational,
        yes: Expr,
        no: Expr,
    },
}

impl Reduct {
    fn det(expr: Expr) -> Reduct {
        Reduct::Det {
            expr,
            state: None,
            spawned: None,
        }
    }

    fn val(v: Val) -> Reduct {
        Reduct::det(Expr::Val(v))
    }

    /// Plugs the contractum back into an evaluation context.
    fn plug(self, ctx: impl Fn(Expr) -> Expr) -> Reduct {
        match self {
            Reduct::Value | Reduct::Stuck => self,
            Reduct::Det {
                expr,
                state,
                spawned,
            } => Reduct::Det {
                expr: ctx(expr),
                state,
                spawned,
            },
            Reduct::Flip { p, yes, no } => Reduct::Flip {
                p,
                yes: ctx(yes),
                no: ctx(no),
            },
        }
    }
}

fn arith(op: BinOp, a: &Val, b: &Val) -> Option<Val> {
    use BinOp::*;
    if op == Eq {
        return Some(Val::Bool(a == b));
    }
    if let (Val::Bool(x), Val::Bool(y)) = (a, b) {
        return match op {
            And => Some(Val::Bool(*x && *y)),
            Or => Some(Val::Bool(*x || *y)),
            _ => None,
        };
    }
    let (x, y) = (a.as_int()?, b.as_int()?);
    Some(match op {
        Add => Val::Int(x.checked_add(y)?),
        Sub => Val::Int(x.checked_sub(y)?),
        Mul => Val::Int(x.checked_mul(y)?),
        Div => Val::Int(x.checked_div(y)?),
        Mod => Val::Int(x.checked_rem(y)?),
        Shl => {
            let k = u32::try_from(y).ok().filter(|k| *k < 63)?;
            Val::Int(x.checked_mul(1i64 << k)?)
        }
        Min => Val::Int(x.min(y)),
        Lt => Val::Bool(x < y),
        Le => Val::Bool(x <= y),
        Eq | And | Or => return None,
    })
}

/// Evaluates the operands of an n-ary form left to right; once all are
/// values, `fire` contracts the redex.
fn operands(
    args: &[&Arc<Expr>],
    s: &State,
    rebuild: impl Fn(Vec<Arc<Expr>>) -> Expr,
    fire: impl FnOnce(&[&Val]) -> Reduct,
) -> Reduct {
    for (i, a) in args.iter().enumerate() {
        if !a.is_val() {
            let owned: Vec<Arc<Expr>> = args.iter().map(|x| Arc::clone(x)).collect();
            return reduce(a, s).plug(|e| {
                let mut v = owned.clone();
                v[i] = Arc::new(e);
                rebuild(v)
            });
        }
    }
    let vals: Vec<&Val> = args.iter().map(|a| a.as_val().unwrap()).collect();
    fire(&vals)
}

fn loc_of(v: &Val, s: &State) -> Option<u64> {
    match v {
        Val::Loc(l) if s.get(*l).is_some() => Some(*l),
        _ => None,
    }
}

fn reduce(e: &Expr, s: &State) -> Reduct {
    use Reduct::Stuck;
    match e {
        Expr::Val(_) => Reduct::Value,
        Expr::Var(_) => Stuck,
        Expr::App(f, a) => operands(
            &[f, a],
            s,
            |v| Expr::App(v[0].clone(), v[1].clone()),
            |v| match v[0] {
                Val::Rec(c) => {
                    let mut body = c.body.subst(&c.param, v[1]);
                    if &*c.name != WILDCARD && c.name != c.param {
                        body = body.subst(&c.name, v[0]);
                    }
                    Reduct::det(body)
                }
                _ => Stuck,
            },
        ),
        Expr::Let(x, e1, e2) => {
            if let Some(v) = e1.as_val() {
                if &**x == WILDCARD {
                    Reduct::det((**e2).clone())
                } else {
                    Reduct::det(e2.subst(x, v))
                }
            } else {
                reduce(e1, s).plug(|e| Expr::Let(x.clone(), Arc::new(e), Arc::clone(e2)))
            }
        }
        Expr::If(c, t, f) => {
            if let Some(v) = c.as_val() {
                match v {
                    Val::Bool(true) => Reduct::det((**t).clone()),
                    Val::Bool(false) => Reduct::det((**f).clone()),
                    _ => Stuck,
                }
            } else {
                reduce(c, s).plug(|e| Expr::If(Arc::new(e), Arc::clone(t), Arc::clone(f)))
            }
        }
        Expr::Flip(a, b) => operands(
            &[a, b],
            s,
            |v| Expr::Flip(v[0].clone(), v[1].clone()),
            |v| match (v[0], v[1]) {
                (Val::Int(n1), Val::Int(n2)) if *n2 != 0 => {
                    let p = Rational::new(BigInt::from(*n1), BigInt::from(*n2));
                    if is_probability(&p) {
                        Reduct::Flip {
                            p,
                            yes: Expr::bool(true),
                            no: Expr::bool(false),
                        }
                    } else {
                        Stuck
                    }
                }
                _ => Stuck,
            },
        ),
        Expr::Alloc(a) => operands(
            &[a],
            s,
            |v| Expr::Alloc(v[0].clone()),
            |v| {
                let mut st = s.clone();
                let l = st.alloc(v[0].clone());
                Reduct::Det {
                    expr: Expr::Val(Val::Loc(l)),
                    state: Some(st),
                    spawned: None,
                }
            },
        ),
        Expr::Load(a) => operands(
            &[a],
            s,
            |v| Expr::Load(v[0].clone()),
            |v| match loc_of(v[0], s) {
                Some(l) => Reduct::val(s.get(l).unwrap().clone()),
                None => Stuck,
            },
        ),
        Expr::Store(a, b) => operands(
            &[a, b],
            s,
            |v| Expr::Store(v[0].clone(), v[1].clone()),
            |v| match loc_of(v[0], s) {
                Some(l) => Reduct::Det {
                    expr: Expr::unit(),
                    state: Some(s.write(l, v[1].clone())),
                    spawned: None,
                },
                None => Stuck,
            },
        ),
        Expr::Faa(a, b) => operands(
            &[a, b],
            s,
            |v| Expr::Faa(v[0].clone(), v[1].clone()),
            |v| {
                let Some(l) = loc_of(v[0], s) else {
                    return Stuck;
                };
                let (Some(n), Some(k)) = (s.get(l).unwrap().as_int(), v[1].as_int()) else {
                    return Stuck;
                };
                match n.checked_add(k) {
                    Some(m) => Reduct::Det {
                        expr: Expr::int(n),
                        state: Some(s.write(l, Val::Int(m))),
                        spawned: None,
                    },
                    None => Stuck,
                }
            },
        ),
        Expr::Cas(a, b, c) => operands(
            &[a, b, c],
            s,
            |v| Expr::Cas(v[0].clone(), v[1].clone(), v[2].clone()),
            |v| {
                let Some(l) = loc_of(v[0], s) else {
                    return Stuck;
                };
                if s.get(l).unwrap() == v[1] {
                    Reduct::Det {
                        expr: Expr::bool(true),
                        state: Some(s.write(l, v[2].clone())),
                        spawned: None,
                    }
                } else {
                    Reduct::val(Val::Bool(false))
                }
            },
        ),
        Expr::Fork(body) => Reduct::Det {
            expr: Expr::unit(),
            state: None,
            spawned: Some((**body).clone()),
        },
        Expr::Await(a) => operands(
            &[a],
            s,
            |v| Expr::Await(v[0].clone()),
            |v| match loc_of(v[0], s).and_then(|l| s.get(l)) {
                Some(Val::Bool(true)) => Reduct::val(Val::Unit),
                _ => Stuck,
            },
        ),
        Expr::Pair(a, b) => operands(
            &[a, b],
            s,
            |v| Expr::pair((*v[0]).clone(), (*v[1]).clone()),
            |v| Reduct::val(Val::pair(v[0].clone(), v[1].clone())),
        ),
        Expr::Fst(a) => operands(
            &[a],
            s,
            |v| Expr::Fst(v[0].clone()),
            |v| match v[0] {
                Val::Pair(x, _) => Reduct::val((**x).clone()),
                _ => Stuck,
            },
        ),
        Expr::Snd(a) => operands(
            &[a],
            s,
            |v| Expr::Snd(v[0].clone()),
            |v| match v[0] {
                Val::Pair(_, y) => Reduct::val((**y).clone()),
                _ => Stuck,
            },
        ),
        Expr::Not(a) => operands(
            &[a],
            s,
            |v| Expr::Not(v[0].clone()),
            |v| match v[0] {
                Val::Bool(b) => Reduct::val(Val::Bool(!b)),
                _ => Stuck,
            },
        ),
        Expr::Bin(op, a, b) => operands(
            &[a, b],
            s,
            |v| Expr::Bin(*op, v[0].clone(), v[1].clone()),
            |v| match arith(*op, v[0], v[1]) {
                Some(r) => Reduct::val(r),
                None => Stuck,
            },
        ),
    }
}

fn atom(i: u32) -> Index {
    Index::Atom(i)
}

/// One step of a single thread. `None` marks a thread that cannot step:
/// it is a value or stuck.
pub fn thread_step(e: &Expr, s: &State) -> IndexedValuation<Option<ThreadStep>> {
    match reduce(e, s) {
        Reduct::Value | Reduct::Stuck => IndexedValuation::ret(None),
        Reduct::Det {
            expr,
            state,
            spawned,
        } => IndexedValuation::ret(Some(ThreadStep {
            expr,
            state: state.unwrap_or_else(|| s.clone()),
            spawned,
        })),
        Reduct::Flip { p, yes, no } => {
            let q = Rational::one() - &p;
            let mk = |expr| {
                Some(ThreadStep {
                    expr,
                    state: s.clone(),
                    spawned: None,
                })
            };
            IndexedValuation::from_trusted(vec![
                Entry {
                    index: atom(0),
                    value: mk(yes),
                    prob: p,
                },
                Entry {
                    index: atom(1),
                    value: mk(no),
                    prob: q,
                },
            ])
        }
    }
}

/// Whether thread `i` of `c` can take a step.
pub fn can_step(c: &Config, i: usize) -> bool {
    c.threads
        .get(i)
        .is_some_and(|e| !matches!(reduce(e, &c.state), Reduct::Value | Reduct::Stuck))
}

/// Threads that can step, in index order.
pub fn enabled(c: &Config) -> Vec<usize> {
    (0..c.threads.len()).filter(|&i| can_step(c, i)).collect()
}

fn apply(c: &Config, i: usize, step: ThreadStep) -> Config {
    let mut threads = c.threads.clone();
    threads[i] = step.expr;
    if let Some(t) = step.spawned {
        threads.push(t);
    }
    Config {
        threads,
        state: step.state,
    }
}

/// Steps thread `i`. A thread that is out of range, a value or stuck
/// stutters: the result is `ret c`.
pub fn config_step(c: &Config, i: usize) -> IndexedValuation<Config> {
    let Some(e) = c.threads.get(i) else {
        return IndexedValuation::ret(c.clone());
    };
    thread_step(e, &c.state).map(|r| match r {
        None => c.clone(),
        Some(step) => apply(c, i, step.clone()),
    })
}

/// Positive-probability successors of thread `i`, or `None` if it would
/// stutter.
pub fn successors(c: &Config, i: usize) -> Option<Vec<(Rational, Config)>> {
    let e = c.threads.get(i)?;
    match reduce(e, &c.state) {
        Reduct::Value | Reduct::Stuck => None,
        Reduct::Det {
            expr,
            state,
            spawned,
        } => Some(vec![(
            Rational::one(),
            apply(
                c,
                i,
                ThreadStep {
                    expr,
                    state: state.unwrap_or_else(|| c.state.clone()),
                    spawned,
                },
            ),
        )]),
        Reduct::Flip { p, yes, no } => {
            let q = Rational::one() - &p;
            let mut out = Vec::with_capacity(2);
            for (prob, expr) in [(p, yes), (q, no)] {
                if !prob.is_zero() {
                    let step = ThreadStep {
                        expr,
                        state: c.state.clone(),
                        spawned: None,
                    };
                    out.push((prob, apply(c, i, step)));
                }
            }
            Some(out)
        }
    }
}

impl Serialize for Val {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Val {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        super::text::parse_val(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Config {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            threads: &'a [Expr],
            heap: Vec<(u64, &'a Val)>,
            next: u64,
        }
        Wire {
            threads: &self.threads,
            heap: self.state.heap.iter().map(|(l, v)| (*l, v)).collect(),
            next: self.state.next,
        }
        .serialize(s)
    }
}
