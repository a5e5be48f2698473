//! Minimal s-expression reader shared by the program parser and the coupling
//! derivation scripts.
//!
//! Atoms are maximal runs of characters other than whitespace, parentheses
//! and `;`. A `;` starts a comment running to the end of the line. Every node
//! carries the 1-based line/column of its first character.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// The head symbol of a list form, if it has one.
    pub fn head(&self) -> Option<&str> {
        self.as_list()
            .and_then(|l| l.first())
            .and_then(Sexp::as_atom)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => f.write_str(s),
            Sexp::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn error_at(pos: Pos, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: pos.line,
        col: pos.col,
        msg: msg.into(),
    }
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Reader<'a> {
    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp> {
        self.skip_trivia();
        let start = self.pos();
        match self.chars.peek().copied() {
            None => Err(error_at(start, "unexpected end of input")),
            Some(')') => Err(error_at(start, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_trivia();
                    match self.chars.peek() {
                        None => return Err(error_at(start, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(s, start))
            }
        }
    }
}

/// Reads every top-level form in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        r.skip_trivia();
        if r.chars.peek().is_none() {
            return Ok(out);
        }
        out.push(r.read()?);
    }
}

/// Reads exactly one form.
pub fn read_one(text: &str) -> Result<Sexp> {
    let mut forms = read_all(text)?;
    match forms.len() {
        1 => Ok(forms.pop().unwrap()),
        0 => Err(error_at(Pos { line: 1, col: 1 }, "empty input")),
        _ => Err(error_at(
            forms[1].pos(),
            "trailing input after the first form",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let s = read_one("(a (b 1)\n  c) ; trailing").unwrap();
        let items = s.as_list().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[2].pos(), Pos { line: 2, col: 3 });
        assert_eq!(s.to_string(), "(a (b 1) c)");
    }

    #[test]
    fn reports_unbalanced_input() {
        match read_one("(a (b)") {
            Err(Error::Parse {
                line: 1, col: 1, ..
            }) => {}
            other => panic!("{other:?}"),
        }
        assert!(read_one(")").is_err());
        assert!(read_one("a b").is_err());
    }
}
