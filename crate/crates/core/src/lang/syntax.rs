use std::sync::Arc;

pub type Name = Arc<str>;

/// Binder name that is never referenced (`seq`, `fun`).
pub const WILDCARD: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Val {
    Unit,
    Int(i64),
    Bool(bool),
    Loc(u64),
    Pair(Arc<Val>, Arc<Val>),
    /// `rec f x. body`; `f` is [`WILDCARD`] for a plain lambda.
    Rec(Arc<Closure>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Closure {
    pub name: Name,
    pub param: Name,
    pub body: Expr,
}

impl Val {
    pub fn pair(a: Val, b: Val) -> Val {
        Val::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn rec(name: &str, param: &str, body: Expr) -> Val {
        Val::Rec(Arc::new(Closure {
            name: name.into(),
            param: param.into(),
            body,
        }))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Val::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Val::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Val, &Val)> {
        match self {
            Val::Pair(a, b) => Some((a, b)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Min,
    Eq,
    Lt,
    Le,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 12] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Mod,
        BinOp::Shl,
        BinOp::Min,
        BinOp::Eq,
        BinOp::Lt,
        BinOp::Le,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Shl => "shl",
            BinOp::Min => "min",
            BinOp::Eq => "=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.into_iter().find(|op| op.symbol() == s)
    }
}

type P = Arc<Expr>;

/// Expressions. Children are shared so that configurations clone cheaply.
///
/// Construct compound forms through the associated functions: they keep the
/// invariant that a pair of two values is always the value [`Val::Pair`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Var(Name),
    Val(Val),
    App(P, P),
    /// `let x = e₁ in e₂`; sequencing when `x` is [`WILDCARD`].
    Let(Name, P, P),
    If(P, P, P),
    Flip(P, P),
    Alloc(P),
    Load(P),
    Store(P, P),
    Faa(P, P),
    Cas(P, P, P),
    Fork(P),
    /// Blocks until the location holds `true`, then returns `()`.
    Await(P),
    Pair(P, P),
    Fst(P),
    Snd(P),
    Not(P),
    Bin(BinOp, P, P),
}

impl Expr {
    pub fn var(x: &str) -> Expr {
        Expr::Var(x.into())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Val(Val::Int(n))
    }

    pub fn bool(b: bool) -> Expr {
        Expr::Val(Val::Bool(b))
    }

    pub fn unit() -> Expr {
        Expr::Val(Val::Unit)
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Arc::new(f), Arc::new(a))
    }

    pub fn let_(x: &str, e1: Expr, e2: Expr) -> Expr {
        Expr::Let(x.into(), Arc::new(e1), Arc::new(e2))
    }

    pub fn seq(e1: Expr, e2: Expr) -> Expr {
        Expr::let_(WILDCARD, e1, e2)
    }

    pub fn if_(c: Expr, t: Expr, e: Expr) -> Expr {
        Expr::If(Arc::new(c), Arc::new(t), Arc::new(e))
    }

    pub fn flip(a: Expr, b: Expr) -> Expr {
        Expr::Flip(Arc::new(a), Arc::new(b))
    }

    pub fn pair(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Val(x), Expr::Val(y)) => Expr::Val(Val::pair(x, y)),
            (a, b) => Expr::Pair(Arc::new(a), Arc::new(b)),
        }
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Arc::new(a), Arc::new(b))
    }

    pub fn as_val(&self) -> Option<&Val> {
        match self {
            Expr::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_val(&self) -> bool {
        matches!(self, Expr::Val(_))
    }

    /// `self[v/x]`. Only closed values are ever substituted, so no capture
    /// can occur.
    pub fn subst(&self, x: &str, v: &Val) -> Expr {
        let s = |e: &P| Arc::new(e.subst(x, v));
        match self {
            Expr::Var(y) if &**y == x => Expr::Val(v.clone()),
            Expr::Var(_) => self.clone(),
            Expr::Val(w) => Expr::Val(subst_val(w, x, v)),
            Expr::App(a, b) => Expr::App(s(a), s(b)),
            Expr::Let(y, e1, e2) => {
                let e2 = if &**y == x { Arc::clone(e2) } else { s(e2) };
                Expr::Let(y.clone(), s(e1), e2)
            }
            Expr::If(a, b, c) => Expr::If(s(a), s(b), s(c)),
            Expr::Flip(a, b) => Expr::Flip(s(a), s(b)),
            Expr::Alloc(a) => Expr::Alloc(s(a)),
            Expr::Load(a) => Expr::Load(s(a)),
            Expr::Store(a, b) => Expr::Store(s(a), s(b)),
            Expr::Faa(a, b) => Expr::Faa(s(a), s(b)),
            Expr::Cas(a, b, c) => Expr::Cas(s(a), s(b), s(c)),
            Expr::Fork(a) => Expr::Fork(s(a)),
            Expr::Await(a) => Expr::Await(s(a)),
            Expr::Pair(a, b) => Expr::pair(a.subst(x, v), b.subst(x, v)),
            Expr::Fst(a) => Expr::Fst(s(a)),
            Expr::Snd(a) => Expr::Snd(s(a)),
            Expr::Not(a) => Expr::Not(s(a)),
            Expr::Bin(op, a, b) => Expr::Bin(*op, s(a), s(b)),
        }
    }

    /// Free variables, for diagnostics.
    pub fn free_vars(&self) -> Vec<Name> {
        fn go(e: &Expr, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
            match e {
                Expr::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Expr::Val(v) => go_val(v, bound, out),
                Expr::Let(x, e1, e2) => {
                    go(e1, bound, out);
                    bound.push(x.clone());
                    go(e2, bound, out);
                    bound.pop();
                }
                _ => {
                    for c in e.children() {
                        go(c, bound, out);
                    }
                }
            }
        }
        fn go_val(v: &Val, bound: &mut Vec<Name>, out: &mut Vec<Name>) {
            match v {
                Val::Rec(c) => {
                    bound.push(c.name.clone());
                    bound.push(c.param.clone());
                    go(&c.body, bound, out);
                    bound.pop();
                    bound.pop();
                }
                Val::Pair(a, b) => {
                    go_val(a, bound, out);
                    go_val(b, bound, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Immediate subexpressions, left to right (values have none).
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_) | Expr::Val(_) => vec![],
            Expr::Alloc(a)
            | Expr::Load(a)
            | Expr::Fork(a)
            | Expr::Await(a)
            | Expr::Fst(a)
            | Expr::Snd(a)
            | Expr::Not(a) => vec![a],
            Expr::App(a, b)
            | Expr::Let(_, a, b)
            | Expr::Flip(a, b)
            | Expr::Store(a, b)
            | Expr::Faa(a, b)
            | Expr::Pair(a, b)
            | Expr::Bin(_, a, b) => vec![a, b],
            Expr::If(a, b, c) | Expr::Cas(a, b, c) => vec![a, b, c],
        }
    }
}

fn subst_val(w: &Val, x: &str, v: &Val) -> Val {
    match w {
        Val::Rec(c) if &*c.name != x && &*c.param != x => Val::Rec(Arc::new(Closure {
            name: c.name.clone(),
            param: c.param.clone(),
            body: c.body.subst(x, v),
        })),
        Val::Pair(a, b) => Val::pair(subst_val(a, x, v), subst_val(b, x, v)),
        _ => w.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_of_values_is_a_value() {
        assert_eq!(
            Expr::pair(Expr::int(1), Expr::bool(true)),
            Expr::Val(Val::pair(Val::Int(1), Val::Bool(true)))
        );
        let open = Expr::pair(Expr::var("x"), Expr::int(2));
        assert!(!open.is_val());
        assert!(open.subst("x", &Val::Unit).is_val());
    }

    #[test]
    fn substitution_respects_shadowing() {
        let e = Expr::let_("x", Expr::var("x"), Expr::var("x"));
        let s = e.subst("x", &Val::Int(3));
        assert_eq!(s, Expr::let_("x", Expr::int(3), Expr::var("x")));
        let f = Expr::Val(Val::rec(
            "f",
            "x",
            Expr::bin(BinOp::Add, Expr::var("x"), Expr::var("y")),
        ));
        let g = f.subst("x", &Val::Int(9)).subst("y", &Val::Int(1));
        assert_eq!(
            g,
            Expr::Val(Val::rec(
                "f",
                "x",
                Expr::bin(BinOp::Add, Expr::var("x"), Expr::int(1))
            ))
        );
        assert!(g.free_vars().is_empty());
    }
}
