//! Concrete syntax: s-expressions in, s-expressions out.
//!
//! The grammar is documented in `docs/language.md`. Printing produces the
//! canonical form (`seq` chains and curried applications are flattened), so
//! `parse ∘ print` is the identity on every expression built through the
//! smart constructors, and `print ∘ parse` reaches a fixed point after one
//! round.

use std::fmt;

use crate::error::Result;
use crate::sexp::{self, error_at, Sexp};

use super::syntax::{BinOp, Expr, Val, WILDCARD};

const KEYWORDS: &[&str] = &[
    "let", "seq", "if", "flip", "alloc", "load", "store", "faa", "cas", "fork", "await", "pair",
    "fst", "snd", "not", "rec", "fun", "loc", "true", "false",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s) || BinOp::from_symbol(s).is_some()
}

fn looks_numeric(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    digits.starts_with(|c: char| c.is_ascii_digit())
}

pub fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && s != WILDCARD
        && !is_keyword(s)
        && !looks_numeric(s)
        && !s.contains(|c: char| c.is_whitespace() || c == '(' || c == ')' || c == ';')
}

/// Parses a program: exactly one expression.
pub fn parse(text: &str) -> Result<Expr> {
    from_sexp(&sexp::read_one(text)?)
}

fn binder(s: &Sexp, allow_wildcard: bool) -> Result<String> {
    match s.as_atom() {
        Some(a) if is_identifier(a) || (allow_wildcard && a == WILDCARD) => Ok(a.to_string()),
        _ => Err(error_at(
            s.pos(),
            format!("expected a variable name, found `{s}`"),
        )),
    }
}

pub fn from_sexp(s: &Sexp) -> Result<Expr> {
    let items = match s {
        Sexp::Atom(a, pos) => {
            return if looks_numeric(a) {
                a.parse()
                    .map(Expr::int)
                    .map_err(|_| error_at(*pos, format!("bad integer literal `{a}`")))
            } else if a == "true" {
                Ok(Expr::bool(true))
            } else if a == "false" {
                Ok(Expr::bool(false))
            } else if is_identifier(a) {
                Ok(Expr::var(a))
            } else {
                Err(error_at(
                    *pos,
                    format!("`{a}` cannot be used as a variable"),
                ))
            };
        }
        Sexp::List(items, _) => items,
    };
    let Some(first) = items.first() else {
        return Ok(Expr::unit());
    };
    let args = &items[1..];
    let arity = |n: usize| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(error_at(
                s.pos(),
                format!("`{first}` takes {n} argument(s), found {}", args.len()),
            ))
        }
    };
    let e = |i: usize| from_sexp(&args[i]);
    // `true`/`false` in head position are values being applied
    let head = first
        .as_atom()
        .filter(|h| is_keyword(h) && !matches!(*h, "true" | "false"));
    let Some(head) = head else {
        if args.is_empty() {
            return Err(error_at(s.pos(), "application needs at least one argument"));
        }
        let mut f = from_sexp(first)?;
        for a in args {
            f = Expr::app(f, from_sexp(a)?);
        }
        return Ok(f);
    };
    use std::sync::Arc;
    let out = match head {
        "loc" => {
            arity(1)?;
            let n = args[0]
                .as_atom()
                .and_then(|a| a.parse::<u64>().ok())
                .ok_or_else(|| error_at(args[0].pos(), "location must be a natural number"))?;
            Expr::Val(Val::Loc(n))
        }
        "rec" => {
            arity(3)?;
            Expr::Val(Val::rec(
                &binder(&args[0], true)?,
                &binder(&args[1], true)?,
                e(2)?,
            ))
        }
        "fun" => {
            arity(2)?;
            Expr::Val(Val::rec(WILDCARD, &binder(&args[0], true)?, e(1)?))
        }
        "let" => {
            arity(3)?;
            Expr::let_(&binder(&args[0], true)?, e(1)?, e(2)?)
        }
        "seq" => {
            if args.len() < 2 {
                return Err(error_at(s.pos(), "`seq` needs at least two expressions"));
            }
            let mut acc = from_sexp(args.last().unwrap())?;
            for a in args[..args.len() - 1].iter().rev() {
                acc = Expr::seq(from_sexp(a)?, acc);
            }
            acc
        }
        "if" => {
            arity(3)?;
            Expr::if_(e(0)?, e(1)?, e(2)?)
        }
        "flip" => {
            arity(2)?;
            Expr::flip(e(0)?, e(1)?)
        }
        "store" | "faa" | "pair" => {
            arity(2)?;
            let (a, b) = (e(0)?, e(1)?);
            match head {
                "store" => Expr::Store(Arc::new(a), Arc::new(b)),
                "faa" => Expr::Faa(Arc::new(a), Arc::new(b)),
                _ => Expr::pair(a, b),
            }
        }
        "cas" => {
            arity(3)?;
            Expr::Cas(Arc::new(e(0)?), Arc::new(e(1)?), Arc::new(e(2)?))
        }
        "alloc" | "load" | "fork" | "await" | "fst" | "snd" | "not" => {
            arity(1)?;
            let a = Arc::new(e(0)?);
            match head {
                "alloc" => Expr::Alloc(a),
                "load" => Expr::Load(a),
                "fork" => Expr::Fork(a),
                "await" => Expr::Await(a),
                "fst" => Expr::Fst(a),
                "snd" => Expr::Snd(a),
                _ => Expr::Not(a),
            }
        }
        op => {
            let op = BinOp::from_symbol(op).expect("remaining keywords are operators");
            arity(2)?;
            Expr::bin(op, e(0)?, e(1)?)
        }
    };
    Ok(out)
}

/// Layout tree for printing.
enum Doc {
    Atom(String),
    List(Vec<Doc>),
}

fn atom(s: impl Into<String>) -> Doc {
    Doc::Atom(s.into())
}

fn val_doc(v: &Val) -> Doc {
    match v {
        Val::Unit => atom("()"),
        Val::Int(n) => atom(n.to_string()),
        Val::Bool(b) => atom(b.to_string()),
        Val::Loc(l) => Doc::List(vec![atom("loc"), atom(l.to_string())]),
        Val::Pair(a, b) => Doc::List(vec![atom("pair"), val_doc(a), val_doc(b)]),
        Val::Rec(c) if &*c.name == WILDCARD => {
            Doc::List(vec![atom("fun"), atom(&*c.param), expr_doc(&c.body)])
        }
        Val::Rec(c) => Doc::List(vec![
            atom("rec"),
            atom(&*c.name),
            atom(&*c.param),
            expr_doc(&c.body),
        ]),
    }
}

fn expr_doc(e: &Expr) -> Doc {
    let form = |head: &str, xs: &[&Expr]| {
        let mut v = vec![atom(head)];
        v.extend(xs.iter().map(|x| expr_doc(x)));
        Doc::List(v)
    };
    match e {
        Expr::Var(x) => atom(&**x),
        Expr::Val(v) => val_doc(v),
        Expr::App(..) => {
            let mut args = Vec::new();
            let mut f = e;
            while let Expr::App(g, a) = f {
                args.push(expr_doc(a));
                f = g;
            }
            args.push(expr_doc(f));
            args.reverse();
            Doc::List(args)
        }
        Expr::Let(x, e1, e2) if &**x == WILDCARD => {
            let mut items = vec![atom("seq"), expr_doc(e1)];
            let mut rest: &Expr = e2;
            while let Expr::Let(y, a, b) = rest {
                if &**y != WILDCARD {
                    break;
                }
                items.push(expr_doc(a));
                rest = b;
            }
            items.push(expr_doc(rest));
            Doc::List(items)
        }
        Expr::Let(x, e1, e2) => {
            Doc::List(vec![atom("let"), atom(&**x), expr_doc(e1), expr_doc(e2)])
        }
        Expr::If(a, b, c) => form("if", &[a, b, c]),
        Expr::Flip(a, b) => form("flip", &[a, b]),
        Expr::Alloc(a) => form("alloc", &[a]),
        Expr::Load(a) => form("load", &[a]),
        Expr::Store(a, b) => form("store", &[a, b]),
        Expr::Faa(a, b) => form("faa", &[a, b]),
        Expr::Cas(a, b, c) => form("cas", &[a, b, c]),
        Expr::Fork(a) => form("fork", &[a]),
        Expr::Await(a) => form("await", &[a]),
        Expr::Pair(a, b) => form("pair", &[a, b]),
        Expr::Fst(a) => form("fst", &[a]),
        Expr::Snd(a) => form("snd", &[a]),
        Expr::Not(a) => form("not", &[a]),
        Expr::Bin(op, a, b) => form(op.symbol(), &[a, b]),
    }
}

fn flat(d: &Doc, out: &mut String) {
    match d {
        Doc::Atom(s) => out.push_str(s),
        Doc::List(items) => {
            out.push('(');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                flat(it, out);
            }
            out.push(')');
        }
    }
}

fn flat_len(d: &Doc) -> usize {
    match d {
        Doc::Atom(s) => s.chars().count(),
        Doc::List(items) => {
            1 + items.iter().map(flat_len).sum::<usize>() + items.len().saturating_sub(1) + 1
        }
    }
}

/// Keeps the head and any leading atoms (binder names) on the opening line,
/// then one child per line.
fn layout(d: &Doc, indent: usize, width: usize, out: &mut String) {
    let Doc::List(items) = d else {
        flat(d, out);
        return;
    };
    if indent + flat_len(d) <= width || items.is_empty() {
        flat(d, out);
        return;
    }
    out.push('(');
    let mut i = 0;
    let mut col = indent + 1;
    while i < items.len() && (i == 0 || matches!(items[i], Doc::Atom(_))) {
        if i > 0 {
            out.push(' ');
            col += 1;
        }
        layout(&items[i], col, width, out);
        col += flat_len(&items[i]);
        i += 1;
    }
    for it in &items[i..] {
        out.push('\n');
        out.extend(std::iter::repeat_n(' ', indent + 2));
        layout(it, indent + 2, width, out);
    }
    out.push(')');
}

/// Pretty-prints with line breaks past `width` columns.
pub fn pretty(e: &Expr, width: usize) -> String {
    let mut out = String::new();
    layout(&expr_doc(e), 0, width, &mut out);
    out
}

pub fn pretty_val(v: &Val) -> String {
    let mut out = String::new();
    flat(&val_doc(v), &mut out);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        flat(&expr_doc(self), &mut out);
        f.write_str(&out)
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_val(self))
    }
}

/// Parses the printed form of a value.
pub fn parse_val(text: &str) -> Result<Val> {
    let s = sexp::read_one(text)?;
    match from_sexp(&s)? {
        Expr::Val(v) => Ok(v),
        _ => Err(error_at(s.pos(), format!("`{s}` is not a value"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn parses_primitives() {
        assert_eq!(
            parse("(flip 1 2)").unwrap(),
            Expr::flip(Expr::int(1), Expr::int(2))
        );
        assert!(matches!(parse("(faa l 3)").unwrap(), Expr::Faa(..)));
        assert_eq!(parse("()").unwrap(), Expr::unit());
        assert_eq!(parse("-7").unwrap(), Expr::int(-7));
        assert_eq!(parse("(loc 3)").unwrap(), Expr::Val(Val::Loc(3)));
    }

    #[test]
    fn seq_and_application_are_flattened() {
        let e = parse("(seq (f 1 2) x y)").unwrap();
        assert_eq!(e.to_string(), "(seq (f 1 2) x y)");
        let Expr::Let(_, first, _) = &e else { panic!() };
        assert!(matches!(&**first, Expr::App(g, _) if matches!(&**g, Expr::App(..))));
    }

    #[test]
    fn errors_carry_positions() {
        match parse("(let x 1\n  (if x))") {
            Err(Error::Parse {
                line: 2, col: 3, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse("(let 3 1 2)").is_err());
        assert!(parse("(+ 1)").is_err());
        assert!(parse("let").is_err());
    }

    #[test]
    fn long_forms_break_lines() {
        let e = parse(
            "(let counter (alloc 0) (seq (faa counter 1) (faa counter 2) (faa counter 3) (load counter)))",
        )
        .unwrap();
        let text = pretty(&e, 40);
        assert!(text.lines().count() > 1);
        assert!(text.lines().all(|l| l.len() <= 40), "{text}");
        assert_eq!(parse(&text).unwrap(), e);
        assert_eq!(pretty(&parse(&text).unwrap(), 40), text);
    }

    #[test]
    fn values_round_trip() {
        let v = Val::pair(Val::Loc(2), Val::pair(Val::Bool(false), Val::Unit));
        assert_eq!(parse_val(&v.to_string()).unwrap(), v);
        assert!(parse_val("(+ 1 2)").is_err());
    }
}
