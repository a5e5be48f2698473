#![allow(dead_code)]

use concprob::lang::{BinOp, Expr, Val, WILDCARD};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

const NAMES: [&str; 5] = ["x", "y", "f", "acc", "l2"];

fn binder(rng: &mut ChaCha8Rng) -> &'static str {
    if rng.random_ratio(1, 5) {
        WILDCARD
    } else {
        NAMES[rng.random_range(0..NAMES.len())]
    }
}

pub fn random_val(rng: &mut ChaCha8Rng, depth: usize) -> Val {
    match rng.random_range(0..if depth == 0 { 4 } else { 7 }) {
        0 => Val::Unit,
        1 => Val::Int(rng.random_range(-50..=50)),
        2 => Val::Bool(rng.random()),
        3 => Val::Loc(rng.random_range(0..8)),
        4 => Val::pair(random_val(rng, depth - 1), random_val(rng, depth - 1)),
        5 => Val::rec(WILDCARD, binder(rng), random_expr(rng, depth - 1)),
        _ => Val::rec(
            NAMES[rng.random_range(0..NAMES.len())],
            binder(rng),
            random_expr(rng, depth - 1),
        ),
    }
}

/// A random well-formed AST, built through the same smart constructors as
/// the parser so that structural equality is the right comparison.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth == 0 {
        return match rng.random_range(0..2) {
            0 => Expr::var(NAMES[rng.random_range(0..NAMES.len())]),
            _ => Expr::Val(random_val(rng, 0)),
        };
    }
    let d = depth - 1;
    let mut sub = || random_expr(rng, d);
    let (a, b, c) = (sub(), sub(), sub());
    let arc = Arc::new;
    match rng.random_range(0..20) {
        0 => Expr::var(NAMES[rng.random_range(0..NAMES.len())]),
        1 => Expr::Val(random_val(rng, d)),
        2 => Expr::app(a, b),
        3 => Expr::let_(binder(rng), a, b),
        4 => Expr::if_(a, b, c),
        5 => Expr::flip(a, b),
        6 => Expr::Alloc(arc(a)),
        7 => Expr::Load(arc(a)),
        8 => Expr::Store(arc(a), arc(b)),
        9 => Expr::Faa(arc(a), arc(b)),
        10 => Expr::Cas(arc(a), arc(b), arc(c)),
        11 => Expr::Fork(arc(a)),
        12 => Expr::Await(arc(a)),
        13 => Expr::pair(a, b),
        14 => Expr::Fst(arc(a)),
        15 => Expr::Snd(arc(a)),
        16 => Expr::Not(arc(a)),
        17 => Expr::seq(a, Expr::seq(b, c)),
        _ => Expr::bin(BinOp::ALL[rng.random_range(0..BinOp::ALL.len())], a, b),
    }
}

pub fn bundled_programs() -> Vec<(String, String)> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/programs");
    let mut out: Vec<(String, String)> = std::fs::read_dir(dir)
        .expect("programs directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "sexp"))
        .map(|p| {
            let text = std::fs::read_to_string(&p).expect("readable program");
            (p.file_name().unwrap().to_string_lossy().into_owned(), text)
        })
        .collect();
    out.sort();
    out
}
