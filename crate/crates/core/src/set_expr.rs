//! The set-expression mini-language used by the CLI to name sets.
//!
//! Grammar: `interval(a,b)`, `levels(n, i..j)` (end exclusive) or
//! `levels(n, [i,j,...])`, `base(n)`, `pool(n)`, and the combinators
//! `union(e,e)`, `intersect(e,e)`, `complement(e)`, `difference(e,e)`.
//! Rationals are written `p/q`.

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::interval_set::IntervalSet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Interval(Scalar, Scalar),
    Levels { stage: u32, indices: Vec<u128> },
    Base(u32),
    Pool(u32),
    Union(Box<SetExpr>, Box<SetExpr>),
    Intersect(Box<SetExpr>, Box<SetExpr>),
    Complement(Box<SetExpr>),
    Difference(Box<SetExpr>, Box<SetExpr>),
}

impl SetExpr {
    /// Evaluates against an engine; stage and index bounds are checked here.
    pub fn eval(&self, engine: &Engine) -> Result<IntervalSet> {
        match self {
            SetExpr::Interval(a, b) => IntervalSet::interval(a.clone(), b.clone()),
            SetExpr::Levels { stage, indices } => {
                let mut pieces = Vec::with_capacity(indices.len());
                for idx in indices {
                    let level = engine.level_interval(*stage, *idx)?;
                    pieces.extend(level.pieces().iter().cloned());
                }
                IntervalSet::from_pieces(pieces)
            }
            SetExpr::Base(n) => engine.level_interval(*n, 0),
            SetExpr::Pool(n) => engine.pool(*n),
            SetExpr::Union(a, b) => Ok(a.eval(engine)?.union(&b.eval(engine)?)),
            SetExpr::Intersect(a, b) => Ok(a.eval(engine)?.intersect(&b.eval(engine)?)),
            SetExpr::Complement(a) => Ok(a.eval(engine)?.complement()),
            SetExpr::Difference(a, b) => Ok(a.eval(engine)?.difference(&b.eval(engine)?)),
        }
    }
}

pub fn parse_set_expr(text: &str) -> Result<SetExpr> {
    let mut p = Parser { text, pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < p.text.len() {
        return Err(p.error("trailing input after expression"));
    }
    Ok(expr)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, msg: impl Into<String>) -> Error {
        let consumed = &self.text[..self.pos];
        let line = consumed.matches('\n').count() + 1;
        let col = consumed.chars().rev().take_while(|c| *c != '\n').count() + 1;
        Error::parse(line, col, msg)
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.error(format!("expected {token:?}")))
        }
    }

    fn peek_is(&mut self, token: &str) -> bool {
        self.skip_ws();
        self.rest().starts_with(token)
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !c.is_ascii_alphabetic())
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.error("expected an identifier"));
        }
        let id = &rest[..end];
        self.pos += end;
        Ok(id)
    }

    fn integer(&mut self) -> Result<u128> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest
            .char_indices()
            .find(|(_, c)| !c.is_ascii_digit())
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        if end == 0 {
            return Err(self.error("expected an integer"));
        }
        let value = rest[..end]
            .parse()
            .map_err(|_| self.error("integer out of range"))?;
        self.pos += end;
        Ok(value)
    }

    fn rational(&mut self) -> Result<Scalar> {
        let n = self.integer()? as i64;
        if self.peek_is("/") {
            self.eat("/")?;
            let d = self.integer()? as i64;
            if d == 0 {
                return Err(self.error("zero denominator"));
            }
            Ok(crate::scalar::rat(n, d))
        } else {
            Ok(crate::scalar::rat(n, 1))
        }
    }

    fn stage(&mut self) -> Result<u32> {
        let n = self.integer()?;
        if n < 1 || n > u32::MAX as u128 {
            return Err(self.error("stage index out of range (must be >= 1)"));
        }
        Ok(n as u32)
    }

    fn expr(&mut self) -> Result<SetExpr> {
        let name = self.ident()?;
        self.eat("(")?;
        let node = match name {
            "interval" => {
                let a = self.rational()?;
                self.eat(",")?;
                let b = self.rational()?;
                SetExpr::Interval(a, b)
            }
            "levels" => {
                let stage = self.stage()?;
                self.eat(",")?;
                let indices = self.index_spec()?;
                SetExpr::Levels { stage, indices }
            }
            "base" => SetExpr::Base(self.stage()?),
            "pool" => SetExpr::Pool(self.stage()?),
            "union" | "intersect" | "difference" => {
                let a = self.expr()?;
                self.eat(",")?;
                let b = self.expr()?;
                match name {
                    "union" => SetExpr::Union(Box::new(a), Box::new(b)),
                    "intersect" => SetExpr::Intersect(Box::new(a), Box::new(b)),
                    _ => SetExpr::Difference(Box::new(a), Box::new(b)),
                }
            }
            "complement" => SetExpr::Complement(Box::new(self.expr()?)),
            other => return Err(self.error(format!("unknown constructor {other:?}"))),
        };
        self.eat(")")?;
        Ok(node)
    }

    fn index_spec(&mut self) -> Result<Vec<u128>> {
        if self.peek_is("[") {
            self.eat("[")?;
            let mut list = Vec::new();
            loop {
                list.push(self.integer()?);
                if self.peek_is(",") {
                    self.eat(",")?;
                } else {
                    break;
                }
            }
            self.eat("]")?;
            Ok(list)
        } else {
            let from = self.integer()?;
            self.eat("..")?;
            let to = self.integer()?;
            if to <= from {
                return Err(self.error("empty index range"));
            }
            Ok((from..to).collect())
        }
    }
}
