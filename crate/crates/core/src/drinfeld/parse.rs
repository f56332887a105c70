//! Module spec strings: `carlitz(p=3,s=1)` or `custom(p=3, rho_t = "t + (1+t)*tau")`.
//!
//! A `rho_t` expression is built from integers (read mod p), `t`, `w` (the chosen
//! generator of F_q), `tau`, `+ - * ^` and parentheses. Products are skew: `tau*t` is
//! `t^q*tau`.

use crate::error::{Error, Result};
use crate::tower::{FieldElement, TowerField};
use crate::twisted::TwistedSeries;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Num(u64),
    Ident(String),
    Str(String),
    Sym(char),
}

pub(crate) fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
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
            let text: String = chars[start..i].iter().collect();
            let n = text
                .parse()
                .map_err(|_| Error::Parse(format!("number too large: {text}")))?;
            out.push(Token::Num(n));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            if i == chars.len() {
                return Err(Error::Parse("unterminated string".into()));
            }
            out.push(Token::Str(chars[start..i].iter().collect()));
            i += 1;
        } else if "+-*/^()=,".contains(c) {
            out.push(Token::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

/// Parsed module description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleSpec {
    pub kind: ModuleKind,
    pub p: Option<u32>,
    pub s: Option<u32>,
    pub m0: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModuleKind {
    Carlitz,
    Custom { rho_t: String },
}

impl ModuleSpec {
    pub fn parse(spec: &str) -> Result<ModuleSpec> {
        let toks = tokenize(spec)?;
        let mut it = toks.into_iter().peekable();
        let name = match it.next() {
            Some(Token::Ident(n)) => n,
            _ => return Err(Error::Parse(format!("module spec must start with a name: {spec:?}"))),
        };
        let mut args: Vec<(String, Token)> = Vec::new();
        if let Some(tok) = it.next() {
            if tok != Token::Sym('(') {
                return Err(Error::Parse(format!("expected '(' after {name}")));
            }
            loop {
                match it.next() {
                    Some(Token::Sym(')')) if args.is_empty() => break,
                    Some(Token::Ident(key)) => {
                        if it.next() != Some(Token::Sym('=')) {
                            return Err(Error::Parse(format!("expected '=' after {key}")));
                        }
                        let val = it
                            .next()
                            .ok_or_else(|| Error::Parse(format!("missing value for {key}")))?;
                        args.push((key, val));
                    }
                    other => return Err(Error::Parse(format!("unexpected token {other:?}"))),
                }
                match it.next() {
                    Some(Token::Sym(',')) => continue,
                    Some(Token::Sym(')')) => break,
                    other => return Err(Error::Parse(format!("expected ',' or ')', got {other:?}"))),
                }
            }
            if let Some(extra) = it.next() {
                return Err(Error::Parse(format!("trailing input {extra:?}")));
            }
        }
        let mut spec_out = ModuleSpec {
            kind: ModuleKind::Carlitz,
            p: None,
            s: None,
            m0: None,
        };
        let mut rho = None;
        for (key, val) in args {
            let num = |v: &Token| match v {
                Token::Num(n) if *n <= u32::MAX as u64 => Ok(*n as u32),
                _ => Err(Error::Parse(format!("{key} needs an integer value"))),
            };
            match key.as_str() {
                "p" => spec_out.p = Some(num(&val)?),
                "s" => spec_out.s = Some(num(&val)?),
                "m0" => spec_out.m0 = Some(num(&val)?),
                "rho_t" => match val {
                    Token::Str(s) => rho = Some(s),
                    _ => return Err(Error::Parse("rho_t must be a quoted string".into())),
                },
                _ => return Err(Error::Parse(format!("unknown key {key}"))),
            }
        }
        spec_out.kind = match name.as_str() {
            "carlitz" => {
                if rho.is_some() {
                    return Err(Error::Parse("carlitz takes no rho_t".into()));
                }
                ModuleKind::Carlitz
            }
            "custom" => ModuleKind::Custom {
                rho_t: rho.ok_or_else(|| Error::Parse("custom module needs rho_t".into()))?,
            },
            _ => return Err(Error::Parse(format!("unknown module family {name:?}"))),
        };
        Ok(spec_out)
    }
}

/// Parses a twisted polynomial over `field` (the base of the module).
pub fn parse_twisted(expr: &str, field: &TowerField) -> Result<TwistedSeries> {
    let toks = tokenize(expr)?;
    let mut p = ExprParser { toks, pos: 0, field };
    let v = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input in {expr:?}")));
    }
    Ok(v)
}

struct ExprParser<'a> {
    toks: Vec<Token>,
    pos: usize,
    field: &'a TowerField,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }
    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }
    fn sum(&mut self) -> Result<TwistedSeries> {
        let mut neg = false;
        if self.peek() == Some(&Token::Sym('-')) {
            self.pos += 1;
            neg = true;
        }
        let mut acc = self.product()?;
        if neg {
            acc = acc.neg();
        }
        while let Some(Token::Sym(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if c == '+' { acc.add(&rhs)? } else { acc.sub(&rhs)? };
        }
        Ok(acc)
    }
    fn product(&mut self) -> Result<TwistedSeries> {
        let mut acc = self.power()?;
        while self.peek() == Some(&Token::Sym('*')) {
            self.pos += 1;
            let rhs = self.power()?;
            acc = acc.mul(&rhs)?;
        }
        Ok(acc)
    }
    fn power(&mut self) -> Result<TwistedSeries> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Sym('^')) {
            self.pos += 1;
            let e = match self.next() {
                Some(Token::Num(e)) if e <= 64 => e,
                other => return Err(Error::Parse(format!("bad exponent {other:?}"))),
            };
            let mut acc = TwistedSeries::one(self.field);
            for _ in 0..e {
                acc = acc.mul(&base)?;
            }
            return Ok(acc);
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<TwistedSeries> {
        let f = self.field;
        match self.next() {
            Some(Token::Num(n)) => {
                let p = f.p() as u64;
                Ok(TwistedSeries::constant(&FieldElement::from_int(f, (n % p) as i64)))
            }
            Some(Token::Ident(id)) => match id.as_str() {
                "t" => Ok(TwistedSeries::constant(&base_t(f)?)),
                "w" => Ok(TwistedSeries::constant(&base_w(f)?)),
                "tau" => Ok(TwistedSeries::tau_power(f, 1)),
                _ => Err(Error::Parse(format!("unknown symbol {id:?}"))),
            },
            Some(Token::Sym('(')) => {
                let v = self.sum()?;
                if self.next() != Some(Token::Sym(')')) {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(v)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// `t` as an element of `field`.
pub(crate) fn base_t(field: &TowerField) -> Result<FieldElement> {
    FieldElement::uniformizer(&field.base_field()).embed(field)
}

/// The generator of `F_q` as an element of `field`.
pub(crate) fn base_w(field: &TowerField) -> Result<FieldElement> {
    let k = field.base_field();
    FieldElement::constant(&k, k.residue().generator()).embed(field)
}
