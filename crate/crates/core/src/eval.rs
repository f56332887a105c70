//! A small expression language over the torsion tower of a module.
//!
//! Atoms are integers (read mod p), `t`, `w` (generator of F_q) and the generators
//! `v1 .. vm`; operators are `+ - * /` and `^` with an integer exponent. Functions:
//!
//! * `trace(x)`, `norm(x)` to `K`, or `trace(x, k)`, `norm(x, k)` to `E^k`
//! * `log(x)`: the logarithm of the module
//! * `rho(a, x)`: the action of a polynomial `a` in `t`
//! * `r(x)` or `r(x, n)`: the series `r_n` applied to `x`
//! * `pair(alpha=.., beta=.., n=..)`: the pairing on `E^m` as a class `a` with value `rho_a(v_n)`
//! * `chi(u)` or `chi(u, n)`: the residue character on `E^m`
//! * `val(x)`: the valuation normalized by `mu(t) = 1`

use std::fmt::Write;

use crate::drinfeld::{tokenize, DrinfeldModule, TorsionClass, Token};
use crate::error::{Error, Result};
use crate::reciprocity::{chi_via_norm, DerivationContext};
use crate::tower::{FieldElement, TowerField};
use crate::twisted::CoeffBound;
use crate::valuation::RationalValuation;

/// `tau`-degree used for `r_n`.
pub const R_DEGREE: usize = 8;

/// Result of an evaluation.
#[derive(Debug, Clone)]
pub enum Value {
    /// An element of `E^level` (`E^0 = K`).
    Element { x: FieldElement, level: usize },
    Class(TorsionClass),
    Valuation(Option<RationalValuation>),
}

impl Value {
    /// The value, its valuation and its precision, one per line.
    pub fn render(&self) -> String {
        match self {
            Value::Element { x, level } => {
                let var = if *level == 0 { "t".to_string() } else { format!("v{level}") };
                let mut terms = Vec::new();
                let f = x.field().residue();
                for (i, c) in x.repr().terms() {
                    let cs = f.format(c);
                    terms.push(match (i, cs.as_str()) {
                        (0, _) => cs,
                        (1, "1") => var.clone(),
                        (1, _) => format!("{cs}*{var}"),
                        (_, "1") => format!("{var}^{i}"),
                        _ => format!("{cs}*{var}^{i}"),
                    });
                }
                let value = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                let mut out = value;
                let val = match x.valuation() {
                    Some(v) => v.to_string(),
                    None => format!(">= {}", x.valuation_lower_bound()),
                };
                let _ = write!(out, "\nvaluation: {val}\nprecision: O({var}^{})", x.prec());
                out
            }
            Value::Class(c) => format!(
                "{}\nclass of rho_a(v{}) modulo t^{}",
                c.format(),
                c.level(),
                c.digits().len()
            ),
            Value::Valuation(Some(v)) => v.to_string(),
            Value::Valuation(None) => "inf".into(),
        }
    }
}

/// Evaluates `expr` for `module` with top level `m` and default pairing level `n`.
pub fn evaluate(module: &DrinfeldModule, m: usize, n: usize, expr: &str) -> Result<Value> {
    let toks = tokenize(expr)?;
    let mut p = Interp {
        module,
        m,
        n,
        toks,
        pos: 0,
    };
    let v = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos + 1)));
    }
    Ok(v)
}

struct Interp<'a> {
    module: &'a DrinfeldModule,
    m: usize,
    n: usize,
    toks: Vec<Token>,
    pos: usize,
}

enum Arg {
    Pos(Value),
    Named(String, Value),
}

impl Interp<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Token::Sym(s)) if s == c => Ok(()),
            other => Err(Error::Parse(format!("expected '{c}', got {other:?}"))),
        }
    }

    fn field(&self, level: usize) -> Result<TowerField> {
        if level > self.m {
            return Err(Error::Usage(format!("level {level} exceeds the configured m = {}", self.m)));
        }
        self.module.torsion_field(level)
    }

    fn lift(&self, x: FieldElement, from: usize, to: usize) -> Result<FieldElement> {
        if from == to {
            Ok(x)
        } else {
            x.embed(&self.field(to)?)
        }
    }

    fn binary(
        &self,
        a: Value,
        b: Value,
        op: impl Fn(&FieldElement, &FieldElement) -> Result<FieldElement>,
    ) -> Result<Value> {
        match (a, b) {
            (Value::Element { x, level: la }, Value::Element { x: y, level: lb }) => {
                let level = la.max(lb);
                let x = self.lift(x, la, level)?;
                let y = self.lift(y, lb, level)?;
                Ok(Value::Element { x: op(&x, &y)?, level })
            }
            (Value::Class(c), Value::Class(d)) => Ok(Value::Class(c.add(&d)?)),
            _ => Err(Error::Usage("arithmetic needs two field elements".into())),
        }
    }

    fn sum(&mut self) -> Result<Value> {
        let neg = if self.peek() == Some(&Token::Sym('-')) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut acc = self.product()?;
        if neg {
            acc = match acc {
                Value::Element { x, level } => Value::Element { x: -&x, level },
                Value::Class(c) => Value::Class(c.neg()),
                _ => return Err(Error::Usage("cannot negate a valuation".into())),
            };
        }
        while let Some(Token::Sym(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.product()?;
            acc = if c == '+' {
                self.binary(acc, rhs, |a, b| Ok(a + b))?
            } else {
                let rhs = match rhs {
                    Value::Class(c) => Value::Class(c.neg()),
                    other => other,
                };
                if matches!(rhs, Value::Class(_)) {
                    self.binary(acc, rhs, |a, b| Ok(a + b))?
                } else {
                    self.binary(acc, rhs, |a, b| Ok(a - b))?
                }
            };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Value> {
        let mut acc = self.power()?;
        while let Some(Token::Sym(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.power()?;
            acc = if c == '*' {
                self.binary(acc, rhs, |a, b| Ok(a * b))?
            } else {
                self.binary(acc, rhs, |a, b| a.div(b))?
            };
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if self.peek() != Some(&Token::Sym('^')) {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(&Token::Sym('-')) {
            self.pos += 1;
            true
        } else {
            false
        };
        let e = match self.next() {
            Some(Token::Num(e)) if e <= 1 << 20 => e as i64,
            other => return Err(Error::Parse(format!("bad exponent {other:?}"))),
        };
        match base {
            Value::Element { x, level } => Ok(Value::Element {
                x: x.pow(if neg { -e } else { e })?,
                level,
            }),
            _ => Err(Error::Usage("only field elements have powers".into())),
        }
    }

    fn atom(&mut self) -> Result<Value> {
        match self.next() {
            Some(Token::Num(k)) => {
                let f = self.field(0)?;
                let p = f.p() as u64;
                Ok(Value::Element {
                    x: FieldElement::from_int(&f, (k % p) as i64),
                    level: 0,
                })
            }
            Some(Token::Sym('(')) => {
                let v = self.sum()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Token::Ident(id)) => {
                if self.peek() == Some(&Token::Sym('(')) {
                    self.pos += 1;
                    let args = self.args()?;
                    return self.call(&id, args);
                }
                self.symbol(&id)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }

    fn symbol(&self, id: &str) -> Result<Value> {
        let k = self.field(0)?;
        match id {
            "t" => Ok(Value::Element {
                x: FieldElement::uniformizer(&k),
                level: 0,
            }),
            "w" => Ok(Value::Element {
                x: FieldElement::constant(&k, k.residue().generator()),
                level: 0,
            }),
            _ => {
                let level = id
                    .strip_prefix('v')
                    .and_then(|d| d.parse::<usize>().ok())
                    .filter(|&l| l >= 1)
                    .ok_or_else(|| Error::Parse(format!("unknown symbol {id:?}")))?;
                self.field(level)?;
                Ok(Value::Element {
                    x: self.module.generator(level)?,
                    level,
                })
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Arg>> {
        let mut out = Vec::new();
        if self.peek() == Some(&Token::Sym(')')) {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            let named = match (self.toks.get(self.pos), self.toks.get(self.pos + 1)) {
                (Some(Token::Ident(k)), Some(Token::Sym('='))) => Some(k.clone()),
                _ => None,
            };
            if let Some(k) = named {
                self.pos += 2;
                out.push(Arg::Named(k, self.sum()?));
            } else {
                out.push(Arg::Pos(self.sum()?));
            }
            match self.next() {
                Some(Token::Sym(',')) => continue,
                Some(Token::Sym(')')) => return Ok(out),
                other => return Err(Error::Parse(format!("expected ',' or ')', got {other:?}"))),
            }
        }
    }

    fn call(&self, name: &str, args: Vec<Arg>) -> Result<Value> {
        let params: &[&str] = match name {
            "trace" | "norm" => &["x", "k"],
            "log" | "val" => &["x"],
            "rho" => &["a", "x"],
            "r" => &["x", "n"],
            "pair" => &["alpha", "beta", "n"],
            "chi" => &["u", "n"],
            _ => return Err(Error::Parse(format!("unknown function {name:?}"))),
        };
        let mut slots: Vec<Option<Value>> = vec![None; params.len()];
        let mut next_pos = 0;
        for a in args {
            let (i, v) = match a {
                Arg::Pos(v) => {
                    next_pos += 1;
                    (next_pos - 1, v)
                }
                Arg::Named(k, v) => (
                    params
                        .iter()
                        .position(|p| *p == k)
                        .ok_or_else(|| Error::Parse(format!("{name} has no argument {k:?}")))?,
                    v,
                ),
            };
            if i >= params.len() {
                return Err(Error::Parse(format!("too many arguments to {name}")));
            }
            if slots[i].replace(v).is_some() {
                return Err(Error::Parse(format!("argument {} of {name} given twice", params[i])));
            }
        }
        let elem = |i: usize| -> Result<(FieldElement, usize)> {
            match &slots[i] {
                Some(Value::Element { x, level }) => Ok((x.clone(), *level)),
                Some(_) => Err(Error::Usage(format!("{name}: {} must be a field element", params[i]))),
                None => Err(Error::Parse(format!("{name}: missing argument {}", params[i]))),
            }
        };
        let int = |i: usize, default: usize| -> Result<usize> {
            match &slots[i] {
                None => Ok(default),
                Some(Value::Element { x, level: 0 }) => {
                    let d: Vec<u32> = digits(x)?;
                    let mut acc = 0usize;
                    for c in d.iter().rev() {
                        acc = acc * x.field().p() as usize + *c as usize;
                    }
                    match d.len() {
                        0 | 1 => Ok(acc),
                        _ => Err(Error::Usage(format!("{name}: {} must be an integer", params[i]))),
                    }
                }
                Some(_) => Err(Error::Usage(format!("{name}: {} must be an integer", params[i]))),
            }
        };
        match name {
            "trace" | "norm" => {
                let (x, level) = elem(0)?;
                let to = int(1, 0)?;
                if to > level {
                    return Err(Error::Usage(format!("{name}: E^{to} does not lie below E^{level}")));
                }
                let target = self.field(to)?;
                let y = if name == "trace" { x.trace_to(&target)? } else { x.norm_to(&target)? };
                Ok(Value::Element { x: y, level: to })
            }
            "log" => {
                let (x, level) = elem(0)?;
                Ok(Value::Element {
                    x: self.module.log_value(&x)?,
                    level,
                })
            }
            "val" => Ok(Value::Valuation(elem(0)?.0.valuation())),
            "rho" => {
                let (a, la) = elem(0)?;
                if la != 0 {
                    return Err(Error::Usage("rho: a must be a polynomial in t".into()));
                }
                let (x, level) = elem(1)?;
                Ok(Value::Element {
                    x: self.module.act(&digits(&a)?, &x)?,
                    level,
                })
            }
            "r" => {
                let (x, level) = elem(0)?;
                let n = int(1, self.n)?;
                let r = self.module.compute_r(n, R_DEGREE)?;
                Ok(Value::Element {
                    x: r.embed(x.field())?.evaluate(&x, CoeffBound::Integral)?,
                    level,
                })
            }
            "pair" => {
                let n = int(2, self.n)?;
                let ctx = DerivationContext::new(self.module, self.m, n)?;
                Ok(Value::Class(ctx.pairing_via_derivation(&elem(0)?.0, &elem(1)?.0)?))
            }
            "chi" => {
                let n = int(1, self.n)?;
                let (u, level) = elem(0)?;
                let u = self.lift(u, level, self.m)?;
                Ok(Value::Class(chi_via_norm(self.module, self.m, n, &u)?))
            }
            _ => unreachable!(),
        }
    }
}

/// `t`-digits of a polynomial in `t`.
fn digits(a: &FieldElement) -> Result<Vec<u32>> {
    if a.valuation_lower_bound() < RationalValuation::zero() {
        return Err(Error::Domain("expected a polynomial in t".into()));
    }
    let mut d: Vec<u32> = (0..a.prec()).map(|i| a.repr().coeff(i)).collect();
    while d.last() == Some(&0) {
        d.pop();
    }
    Ok(d)
}
