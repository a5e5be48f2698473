//! Derivation scripts: s-expression files that build coupling witnesses
//! rule by rule and have each one re-checked.
//!
//! ```text
//! (define k 2)
//! (predicate R (x y) (or (and (= x true) (= y (+ k 1))) (and (= x false) (= y 0))))
//! (couple step
//!   (equiv (pchoice (/ 1 (+ k 1)) (ret R true (+ k 1)) (ret R false 0))
//!          (pchoice (/ 1 (+ k 1)) (ret true) (ret false))
//!          (approx-incr 2))
//!   (sandwich (x) (if x (+ k 1) 0) (y) y))
//! ```
//!
//! Values are integers and booleans. See `docs/derivation-scripts.md` for
//! the grammar.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::{check, Goal, Predicate, Sandwich, Verdict, Witness};
use crate::error::{Error, Result};
use crate::ival::IndexedValuation;
use crate::lang::Val;
use crate::models::{approx_incr, approx_n};
use crate::ndset::ProcessSet;
use crate::rational::{int, is_probability, parse_rational, Rational};
use crate::sexp::{error_at, read_all, Sexp};

type IVal = IndexedValuation<Val>;
type Set = ProcessSet<Val>;

/// Outcome of one `couple` form.
#[derive(Debug, Clone, Serialize)]
pub struct CoupleReport {
    pub name: String,
    pub passed: bool,
    /// Present when a rule's side condition failed while building.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<IVal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Set>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness<Val, Val>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sandwich: Option<Sandwich>,
}

#[derive(Debug, Clone, PartialEq)]
enum Num {
    Rat(Rational),
    Bool(bool),
}

impl Num {
    fn to_val(&self, at: &Sexp) -> Result<Val> {
        match self {
            Num::Bool(b) => Ok(Val::Bool(*b)),
            Num::Rat(r) if r.is_integer() => {
                let n: i64 = r
                    .to_integer()
                    .try_into()
                    .map_err(|_| error_at(at.pos(), "integer out of range"))?;
                Ok(Val::Int(n))
            }
            Num::Rat(r) => Err(error_at(at.pos(), format!("{r} is not an integer value"))),
        }
    }

    fn from_val(v: &Val) -> Option<Num> {
        match v {
            Val::Int(n) => Some(Num::Rat(int(*n))),
            Val::Bool(b) => Some(Num::Bool(*b)),
            _ => None,
        }
    }
}

#[derive(Clone)]
struct PredDef {
    params: (String, String),
    body: Sexp,
    env: Env,
}

type Env = BTreeMap<String, Num>;

#[derive(Default)]
struct Interp {
    env: Env,
    preds: BTreeMap<String, Arc<PredDef>>,
}

fn list(s: &Sexp) -> Result<&[Sexp]> {
    s.as_list()
        .ok_or_else(|| error_at(s.pos(), "expected a list"))
}

fn arity(s: &Sexp, items: &[Sexp], n: usize) -> Result<()> {
    if items.len() != n + 1 {
        return Err(error_at(
            s.pos(),
            format!(
                "`{}` takes {n} arguments, got {}",
                items[0],
                items.len() - 1
            ),
        ));
    }
    Ok(())
}

fn symbol(s: &Sexp) -> Result<&str> {
    s.as_atom()
        .ok_or_else(|| error_at(s.pos(), "expected a name"))
}

fn eval(env: &Env, s: &Sexp) -> Result<Num> {
    match s {
        Sexp::Atom(a, pos) => match a.as_str() {
            "true" => Ok(Num::Bool(true)),
            "false" => Ok(Num::Bool(false)),
            _ => {
                if let Some(v) = env.get(a) {
                    return Ok(v.clone());
                }
                parse_rational(a)
                    .map(Num::Rat)
                    .map_err(|_| error_at(*pos, format!("unbound name `{a}`")))
            }
        },
        Sexp::List(items, pos) => {
            let head = items
                .first()
                .and_then(Sexp::as_atom)
                .ok_or_else(|| error_at(*pos, "expected an operator"))?;
            let args: Vec<Num> = items[1..]
                .iter()
                .map(|x| eval(env, x))
                .collect::<Result<_>>()?;
            let rat = |i: usize| match args.get(i) {
                Some(Num::Rat(r)) => Ok(r.clone()),
                _ => Err(error_at(*pos, format!("`{head}` expects numbers"))),
            };
            let boolean = |n: &Num| match n {
                Num::Bool(b) => Ok(*b),
                _ => Err(error_at(*pos, format!("`{head}` expects booleans"))),
            };
            let two = || {
                if args.len() == 2 {
                    Ok(())
                } else {
                    Err(error_at(*pos, format!("`{head}` takes 2 arguments")))
                }
            };
            Ok(match head {
                "+" => Num::Rat(
                    args.iter()
                        .enumerate()
                        .map(|(i, _)| rat(i))
                        .sum::<Result<Rational>>()?,
                ),
                "*" => Num::Rat(
                    args.iter()
                        .enumerate()
                        .map(|(i, _)| rat(i))
                        .product::<Result<Rational>>()?,
                ),
                "-" => {
                    two()?;
                    Num::Rat(rat(0)? - rat(1)?)
                }
                "/" => {
                    two()?;
                    let d = rat(1)?;
                    if d == int(0) {
                        return Err(error_at(*pos, "division by zero"));
                    }
                    Num::Rat(rat(0)? / d)
                }
                "=" => {
                    two()?;
                    Num::Bool(args[0] == args[1])
                }
                "<" | "<=" | ">" | ">=" => {
                    two()?;
                    let (a, b) = (rat(0)?, rat(1)?);
                    Num::Bool(match head {
                        "<" => a < b,
                        "<=" => a <= b,
                        ">" => a > b,
                        _ => a >= b,
                    })
                }
                "and" => Num::Bool(
                    args.iter()
                        .map(boolean)
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .all(|b| b),
                ),
                "or" => Num::Bool(
                    args.iter()
                        .map(boolean)
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .any(|b| b),
                ),
                "not" => {
                    if args.len() != 1 {
                        return Err(error_at(*pos, "`not` takes 1 argument"));
                    }
                    Num::Bool(!boolean(&args[0])?)
                }
                "if" => {
                    if args.len() != 3 {
                        return Err(error_at(*pos, "`if` takes 3 arguments"));
                    }
                    if boolean(&args[0])? {
                        args[1].clone()
                    } else {
                        args[2].clone()
                    }
                }
                _ => return Err(error_at(*pos, format!("unknown operator `{head}`"))),
            })
        }
    }
}

fn value(env: &Env, s: &Sexp) -> Result<Val> {
    eval(env, s)?.to_val(s)
}

fn probability(env: &Env, s: &Sexp) -> Result<Rational> {
    match eval(env, s)? {
        Num::Rat(r) if is_probability(&r) => Ok(r),
        other => Err(error_at(s.pos(), format!("{other:?} is not a probability"))),
    }
}

fn bind_var(env: &Env, name: &str, v: &Val) -> Env {
    let mut e = env.clone();
    if let Some(n) = Num::from_val(v) {
        e.insert(name.to_string(), n);
    }
    e
}

/// `(x)` or `(x y)` binder lists.
fn binders(s: &Sexp, n: usize) -> Result<Vec<String>> {
    let items = list(s)?;
    if items.len() != n {
        return Err(error_at(s.pos(), format!("expected {n} bound names")));
    }
    items.iter().map(|x| symbol(x).map(String::from)).collect()
}

fn ival(env: &Env, s: &Sexp) -> Result<IVal> {
    let items = list(s)?;
    match s.head() {
        Some("ret") => {
            arity(s, items, 1)?;
            Ok(IVal::ret(value(env, &items[1])?))
        }
        Some("pchoice") => {
            arity(s, items, 3)?;
            let p = probability(env, &items[1])?;
            IVal::pchoice(&ival(env, &items[2])?, &p, &ival(env, &items[3])?)
        }
        Some("uniform") => {
            let vs = items[1..]
                .iter()
                .map(|x| value(env, x))
                .collect::<Result<_>>()?;
            IVal::uniform(vs).map_err(|e| error_at(s.pos(), e.to_string()))
        }
        Some("bind") => {
            arity(s, items, 3)?;
            let a = ival(env, &items[1])?;
            let x = binders(&items[2], 1)?.remove(0);
            let mut err = None;
            let out = a.bind(|v| match ival(&bind_var(env, &x, v), &items[3]) {
                Ok(iv) => iv,
                Err(e) => {
                    err.get_or_insert(e);
                    IVal::ret(Val::Unit)
                }
            });
            err.map_or(Ok(out), Err)
        }
        _ => Err(error_at(
            s.pos(),
            "expected a valuation: ret, pchoice, uniform or bind",
        )),
    }
}

fn int_arg(env: &Env, s: &Sexp) -> Result<i64> {
    match value(env, s)? {
        Val::Int(n) => Ok(n),
        _ => Err(error_at(s.pos(), "expected an integer")),
    }
}

fn set(env: &Env, s: &Sexp) -> Result<Set> {
    let items = list(s)?;
    let ints = |ps: ProcessSet<i64>| ps.map(|&n| Val::Int(n));
    match s.head() {
        Some("ret") => {
            arity(s, items, 1)?;
            Ok(Set::ret(value(env, &items[1])?))
        }
        Some("pchoice") => {
            arity(s, items, 3)?;
            let p = probability(env, &items[1])?;
            Set::pchoice(&set(env, &items[2])?, &p, &set(env, &items[3])?)
        }
        Some("union") => {
            let parts: Vec<Set> = items[1..].iter().map(|x| set(env, x)).collect::<Result<_>>()?;
            let mut it = parts.into_iter();
            let first = it.next().ok_or_else(|| error_at(s.pos(), "`union` needs an argument"))?;
            Ok(it.fold(first, |acc, x| acc.union(&x)))
        }
        Some("choose") => {
            let vs: Vec<Val> = items[1..].iter().map(|x| value(env, x)).collect::<Result<_>>()?;
            Set::choose(vs).map_err(|e| error_at(s.pos(), e.to_string()))
        }
        Some("members") => {
            let ms = items[1..].iter().map(|x| ival(env, x)).collect::<Result<_>>()?;
            Set::new(ms).map_err(|e| error_at(s.pos(), e.to_string()))
        }
        Some("approx-incr") => {
            arity(s, items, 1)?;
            let max = int_arg(env, &items[1])?;
            if max < 0 {
                return Err(error_at(s.pos(), "MAX must be nonnegative"));
            }
            Ok(ints(approx_incr(max)))
        }
        Some("approx-n") => {
            arity(s, items, 3)?;
            let n = int_arg(env, &items[1])?;
            let (l, max) = (int_arg(env, &items[2])?, int_arg(env, &items[3])?);
            if n < 0 || l < 0 || max < 0 || n > 3 {
                return Err(error_at(s.pos(), "approx-n needs 0 ≤ n ≤ 3 and l, MAX ≥ 0"));
            }
            Ok(ints(approx_n(n as usize, l, max)))
        }
        Some("bind") => {
            arity(s, items, 3)?;
            let a = set(env, &items[1])?;
            let x = binders(&items[2], 1)?.remove(0);
            let mut err = None;
            let out = a.bind(|v| match set(&bind_var(env, &x, v), &items[3]) {
                Ok(s) => s,
                Err(e) => {
                    err.get_or_insert(e);
                    Set::ret(Val::Unit)
                }
            });
            err.map_or(Ok(out), Err)
        }
        _ => Err(error_at(
            s.pos(),
            "expected a process set: ret, pchoice, union, choose, members, approx-incr, approx-n or bind",
        )),
    }
}

/// A derived judgment together with its witness.
struct Derived {
    goal: Goal<Val, Val>,
    witness: Witness<Val, Val>,
}

impl Interp {
    fn predicate(&self, s: &Sexp) -> Result<Predicate<Val, Val>> {
        let name = symbol(s)?;
        if name == "true" {
            return Ok(Predicate::truth());
        }
        let def = self
            .preds
            .get(name)
            .cloned()
            .ok_or_else(|| error_at(s.pos(), format!("unknown predicate `{name}`")))?;
        Ok(Predicate::new(name, move |x: &Val, y: &Val| {
            let e = bind_var(&bind_var(&def.env, &def.params.0, x), &def.params.1, y);
            matches!(eval(&e, &def.body), Ok(Num::Bool(true)))
        }))
    }

    /// Builds a derivation. Malformed syntax is a hard error; failed side
    /// conditions come back as `Err(Error::Precondition)` too, and the caller
    /// decides how to report them.
    fn derive(&self, env: &Env, s: &Sexp) -> Result<Derived> {
        let items = list(s)?;
        let rule = s
            .head()
            .ok_or_else(|| error_at(s.pos(), "expected a rule"))?;
        match rule {
            "ret" => {
                arity(s, items, 3)?;
                let p = self.predicate(&items[1])?;
                let (a, b) = (value(env, &items[2])?, value(env, &items[3])?);
                let witness = super::ret(a.clone(), b.clone(), &p)?;
                Ok(Derived {
                    goal: Goal {
                        lhs: IVal::ret(a),
                        rhs: Set::ret(b),
                        predicate: p,
                    },
                    witness,
                })
            }
            "pchoice" => {
                arity(s, items, 3)?;
                let p = probability(env, &items[1])?;
                let d1 = self.derive(env, &items[2])?;
                let d2 = self.derive(env, &items[3])?;
                let witness = super::pchoice(&d1.witness, &p, &d2.witness)?;
                Ok(Derived {
                    goal: Goal {
                        lhs: IVal::pchoice(&d1.goal.lhs, &p, &d2.goal.lhs)?,
                        rhs: Set::pchoice(&d1.goal.rhs, &p, &d2.goal.rhs)?,
                        predicate: d1.goal.predicate,
                    },
                    witness,
                })
            }
            "equiv" => {
                arity(s, items, 3)?;
                let d = self.derive(env, &items[1])?;
                let lhs = ival(env, &items[2])?;
                let rhs = set(env, &items[3])?;
                let witness = super::equiv(&d.witness, (&d.goal.lhs, &d.goal.rhs), (&lhs, &rhs))?;
                Ok(Derived {
                    goal: Goal {
                        lhs,
                        rhs,
                        predicate: d.goal.predicate,
                    },
                    witness,
                })
            }
            "conseq" => {
                arity(s, items, 2)?;
                let p = self.predicate(&items[1])?;
                let d = self.derive(env, &items[2])?;
                let witness = super::conseq(&d.witness, &p)?;
                Ok(Derived {
                    goal: Goal {
                        predicate: p,
                        ..d.goal
                    },
                    witness,
                })
            }
            "trivial" => {
                arity(s, items, 2)?;
                let lhs = ival(env, &items[1])?;
                let rhs = set(env, &items[2])?;
                let witness = super::trivial(&lhs, &rhs);
                Ok(Derived {
                    goal: Goal {
                        lhs,
                        rhs,
                        predicate: Predicate::truth(),
                    },
                    witness,
                })
            }
            "bind" => {
                // (bind D (x y) LHS-OF-x RHS-OF-y Q D-OF-x-y)
                arity(s, items, 6)?;
                let d = self.derive(env, &items[1])?;
                let xy = binders(&items[2], 2)?;
                let q = self.predicate(&items[5])?;
                let (fx, fy, kd) = (&items[3], &items[4], &items[6]);
                let err = std::cell::RefCell::new(None::<Error>);
                let record = |e: Error| {
                    err.borrow_mut().get_or_insert(e);
                };
                let lhs_of = |x: &Val| {
                    ival(&bind_var(env, &xy[0], x), fx).unwrap_or_else(|e| {
                        record(e);
                        IVal::ret(Val::Unit)
                    })
                };
                let rhs_of = |y: &Val| {
                    set(&bind_var(env, &xy[1], y), fy).unwrap_or_else(|e| {
                        record(e);
                        Set::ret(Val::Unit)
                    })
                };
                let witness = super::bind(&d.witness, lhs_of, rhs_of, &q, |x, y| {
                    let e = bind_var(&bind_var(env, &xy[0], x), &xy[1], y);
                    self.derive(&e, kd).map(|k| k.witness)
                })?;
                let lhs = d.goal.lhs.bind(lhs_of);
                let rhs = d.goal.rhs.bind(rhs_of);
                if let Some(e) = err.into_inner() {
                    return Err(e);
                }
                Ok(Derived {
                    goal: Goal {
                        lhs,
                        rhs,
                        predicate: q,
                    },
                    witness,
                })
            }
            _ => Err(error_at(
                s.pos(),
                format!(
                    "unknown rule `{rule}`; expected ret, pchoice, equiv, conseq, trivial or bind"
                ),
            )),
        }
    }

    fn couple(&self, s: &Sexp, items: &[Sexp]) -> Result<CoupleReport> {
        if items.len() != 3 && items.len() != 4 {
            return Err(error_at(
                s.pos(),
                "`couple` takes a name, a derivation and an optional sandwich",
            ));
        }
        let name = symbol(&items[1])?.to_string();
        let sandwich_form = items.get(3);
        let failed = |msg: String| CoupleReport {
            name: name.clone(),
            passed: false,
            error: Some(msg),
            verdict: None,
            lhs: None,
            rhs: None,
            witness: None,
            sandwich: None,
        };
        let d = match self.derive(&self.env, &items[2]) {
            Ok(d) => d,
            Err(Error::Precondition(msg)) => return Ok(failed(msg)),
            Err(e @ Error::Parse { .. }) => return Err(e),
            Err(e) => return Ok(failed(e.to_string())),
        };
        let verdict = check(&d.goal, &d.witness);
        let mut report = CoupleReport {
            name,
            passed: verdict.passed(),
            error: None,
            verdict: Some(verdict),
            lhs: Some(d.goal.lhs.clone()),
            rhs: Some(d.goal.rhs.clone()),
            witness: Some(d.witness.clone()),
            sandwich: None,
        };
        if let Some(sw) = sandwich_form {
            // (sandwich (x) F (y) G)
            let parts = list(sw)?;
            if sw.head() != Some("sandwich") || parts.len() != 5 {
                return Err(error_at(sw.pos(), "expected (sandwich (x) F (y) G)"));
            }
            let x = binders(&parts[1], 1)?.remove(0);
            let y = binders(&parts[3], 1)?.remove(0);
            let num = |var: &str, body: &Sexp, v: &Val| -> Result<Rational> {
                match eval(&bind_var(&self.env, var, v), body)? {
                    Num::Rat(r) => Ok(r),
                    Num::Bool(_) => Err(error_at(body.pos(), "sandwich functions must be numeric")),
                }
            };
            // evaluate once up front so syntax errors surface as such
            for e in d.goal.lhs.entries() {
                num(&x, &parts[2], &e.value)?;
            }
            for v in d.goal.rhs.support() {
                num(&y, &parts[4], &v)?;
            }
            let f = |v: &Val| num(&x, &parts[2], v).unwrap_or_else(|_| int(0));
            let g = |v: &Val| num(&y, &parts[4], v).unwrap_or_else(|_| int(0));
            match super::sandwich(&d.goal, &d.witness, f, g) {
                Ok(sw) => report.sandwich = Some(sw),
                Err(e) => {
                    report.passed = false;
                    report.error = Some(e.to_string());
                }
            }
        }
        Ok(report)
    }
}

/// Runs every form of a script. Syntax errors abort with a position; a
/// derivation whose side conditions fail is reported as not passed.
pub fn run_script(text: &str) -> Result<Vec<CoupleReport>> {
    let mut it = Interp::default();
    let mut out = Vec::new();
    for form in read_all(text)? {
        let items = list(&form)?;
        match form.head() {
            Some("define") => {
                arity(&form, items, 2)?;
                let v = eval(&it.env, &items[2])?;
                it.env.insert(symbol(&items[1])?.to_string(), v);
            }
            Some("predicate") => {
                arity(&form, items, 3)?;
                let mut ps = binders(&items[2], 2)?;
                let y = ps.pop().unwrap();
                let x = ps.pop().unwrap();
                let def = PredDef {
                    params: (x, y),
                    body: items[3].clone(),
                    env: it.env.clone(),
                };
                it.preds
                    .insert(symbol(&items[1])?.to_string(), Arc::new(def));
            }
            Some("couple") => out.push(it.couple(&form, items)?),
            _ => {
                return Err(error_at(form.pos(), "expected define, predicate or couple"));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter_script(k: i64, max: i64) -> String {
        format!(
            "(define k {k})
             (predicate R (x y) (or (and (= x true) (= y (+ k 1))) (and (= x false) (= y 0))))
             (couple step
               (equiv (pchoice (/ 1 (+ k 1)) (ret R true (+ k 1)) (ret R false 0))
                      (pchoice (/ 1 (+ k 1)) (ret true) (ret false))
                      (approx-incr {max}))
               (sandwich (x) (if x (+ k 1) 0) (y) y))"
        )
    }

    #[test]
    fn counter_coupling_passes_with_unit_sandwich() {
        for k in 0..=4 {
            let r = run_script(&counter_script(k, 4)).unwrap();
            assert!(r[0].passed, "{:?}", r[0]);
            let sw = r[0].sandwich.as_ref().unwrap();
            assert_eq!(
                (sw.lo.clone(), sw.mid.clone(), sw.hi.clone()),
                (int(1), int(1), int(1))
            );
        }
    }

    #[test]
    fn equiv_outside_the_spec_is_reported() {
        // k = 3 is not one of approxIncr 2's choices
        let r = run_script(&counter_script(3, 2)).unwrap();
        assert!(!r[0].passed);
        assert!(r[0].error.as_ref().unwrap().contains("Equiv"));
    }

    #[test]
    fn bind_and_trivial_forms() {
        let text = "(predicate eq (x y) (= x y))
            (couple chain
              (bind (ret eq 1 1) (x y) (pchoice 1/2 (ret x) (ret (+ x 1))) (pchoice 1/2 (ret y) (ret (+ y 1))) eq
                (pchoice 1/2 (ret eq x y) (ret eq (+ x 1) (+ y 1))))
              (sandwich (a) a (b) b))
            (couple anything (trivial (uniform 1 2) (choose 5 6)))";
        let r = run_script(text).unwrap();
        assert!(r.iter().all(|x| x.passed), "{r:?}");
        assert_eq!(
            r[0].sandwich.as_ref().unwrap().mid,
            Rational::new(3.into(), 2.into())
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match run_script("(couple x (frobnicate))") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ret_with_false_predicate_is_reported() {
        let r = run_script("(predicate eq (x y) (= x y)) (couple bad (ret eq 1 2))").unwrap();
        assert!(!r[0].passed);
    }
}
