//! Element expressions such as `(1+a)^2*(1+b)` or `w*(a-1) + [1,0]*b`.
//!
//! Atoms: integers (images in the prime field), generator letters `a`, `b`,
//! `c`, ... in designated-generator order, `x` (the field generator of an
//! extension field), `w`/`omega` (the first primitive cube root of unity)
//! and bracketed degree-descending coefficient lists.

use std::sync::Arc;

use thiserror::Error;

use super::{AlgebraElement, GroupAlgebra};
use crate::grp::generator_name;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("unexpected {found} at position {pos}")]
    Unexpected { found: String, pos: usize },
    #[error("unknown symbol {0:?}")]
    Unknown(String),
    #[error("{0}")]
    Field(String),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(u64),
    Ident(String),
    Sym(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| ExprError::Unexpected { found: s, pos: start })?;
            out.push((start, Tok::Num(n)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*^()[],".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Unexpected { found: c.to_string(), pos: i });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    kg: &'a Arc<GroupAlgebra>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn unexpected(&self) -> ExprError {
        match self.toks.get(self.pos) {
            Some((p, t)) => ExprError::Unexpected { found: format!("{t:?}"), pos: *p },
            None => ExprError::Unexpected { found: "end of input".into(), pos: usize::MAX },
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<AlgebraElement, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<AlgebraElement, ExprError> {
        let mut acc = self.power()?;
        while self.eat('*') {
            acc = &acc * &self.power()?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<AlgebraElement, ExprError> {
        if self.eat('-') {
            return Ok(-&self.power()?);
        }
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek() {
                Some(&Tok::Num(e)) => {
                    self.pos += 1;
                    let e = u32::try_from(e).map_err(|_| self.unexpected())?;
                    Ok(base.pow(e))
                }
                _ => Err(self.unexpected()),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<AlgebraElement, ExprError> {
        let kg = self.kg;
        let field = kg.field();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(kg.scalar(field.from_int((n % field.characteristic() as u64) as i64)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => field
                        .generator_x()
                        .map(|s| kg.scalar(s))
                        .ok_or_else(|| ExprError::Field("x is only defined in extension fields".into())),
                    "w" | "omega" => field
                        .primitive_cube_root()
                        .map(|s| kg.scalar(s))
                        .ok_or_else(|| ExprError::Field("field has no primitive cube root of unity".into())),
                    _ => {
                        let gens = kg.group().generators();
                        let idx = (0..gens.len()).find(|&i| name.len() == 1 && generator_name(i) == name.chars().next().unwrap());
                        idx.map(|i| kg.basis(gens[i])).ok_or(ExprError::Unknown(name))
                    }
                }
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.unexpected());
                }
                Ok(inner)
            }
            Some(Tok::Sym('[')) => {
                self.pos += 1;
                let mut coeffs = Vec::new();
                loop {
                    match self.peek() {
                        Some(&Tok::Num(c)) => {
                            self.pos += 1;
                            coeffs.push(u32::try_from(c).map_err(|_| self.unexpected())?);
                        }
                        _ => return Err(self.unexpected()),
                    }
                    if self.eat(']') {
                        break;
                    }
                    if !self.eat(',') {
                        return Err(self.unexpected());
                    }
                }
                let s = field.from_coeffs(&coeffs).map_err(|e| ExprError::Field(e.to_string()))?;
                Ok(kg.scalar(s))
            }
            _ => Err(self.unexpected()),
        }
    }
}

pub fn parse_element(kg: &Arc<GroupAlgebra>, src: &str) -> Result<AlgebraElement, ExprError> {
    let mut parser = Parser { toks: lex(src)?, pos: 0, kg };
    let x = parser.expr()?;
    if parser.pos != parser.toks.len() {
        return Err(parser.unexpected());
    }
    Ok(x)
}
