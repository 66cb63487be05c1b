//! Coefficient expressions in the base coordinates `x1..xn`.
//!
//! Grammar:
//!
//! ```text
//! expr  = term (('+' | '-') term)*
//! term  = unary (('*' | '/') unary)*
//! unary = '-' unary | power
//! power = atom ('^' unary)?
//! atom  = number | 'x'<index> | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Numbers are read exactly (`0.25` is `1/4`). Two literal folds happen while
//! parsing: `-<number>` and `<number>/<number>` become single numbers. The
//! `Display` form is fully parenthesized, so `parse(display(e)) == e`.

use std::fmt;

use kropina_ratfun::Rational;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoreError, Result};
use crate::scalar::{Func, Scalar};

/// `q^e` when it is rational (`q > 0`).
pub fn rational_power(q: &Rational, e: &Rational) -> Option<Rational> {
    if !q.is_positive() {
        return None;
    }
    let d = e.denom().to_u32()?;
    let root = |v: &num_bigint::BigInt| {
        let r = v.nth_root(d);
        (num_traits::pow::Pow::pow(&r, d) == *v).then_some(r)
    };
    let base = Rational::new(root(q.numer())?, root(q.denom())?);
    let k = e.numer().to_i32()?;
    Some(if k >= 0 { num_traits::pow::Pow::pow(&base, k as u32) } else { num_traits::pow::Pow::pow(&base.recip(), k.unsigned_abs()) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(Rational),
    /// Zero-based coordinate index.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

fn err(msg: impl Into<String>) -> CoreError {
    CoreError::Expr(msg.into())
}

impl Expr {
    pub fn num(v: i64) -> Expr {
        Expr::Num(Rational::from_integer(v.into()))
    }

    pub fn rat(p: i64, q: i64) -> Expr {
        Expr::Num(Rational::new(p.into(), q.into()))
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    /// Parses with variables restricted to `x1..x{dim}`.
    pub fn parse(src: &str, dim: usize) -> Result<Expr> {
        let mut p = Parser {
            s: src.as_bytes(),
            pos: 0,
            dim,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(err(format!("unexpected '{}' at offset {} in \"{src}\"", p.s[p.pos] as char, p.pos)));
        }
        Ok(e)
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    pub fn as_number(&self) -> Option<&Rational> {
        match self {
            Expr::Num(q) => Some(q),
            _ => None,
        }
    }

    /// Polynomial in `x` with rational coefficients.
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => true,
            Expr::Neg(a) => a.is_polynomial(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_polynomial() && b.is_polynomial(),
            Expr::Div(a, b) => a.is_polynomial() && matches!(b.as_number(), Some(q) if !q.is_zero()),
            Expr::Pow(a, b) => {
                a.is_polynomial() && matches!(b.as_number(), Some(q) if q.is_integer() && !q.is_negative())
            }
            Expr::Call(..) => false,
        }
    }

    /// Built from `+ − × ÷` and constant rational powers only, i.e. no
    /// elementary function calls; what the exact backend can attempt.
    pub fn is_algebraic(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => true,
            Expr::Neg(a) => a.is_algebraic(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.is_algebraic() && b.is_algebraic(),
            Expr::Pow(a, b) => a.is_algebraic() && b.is_constant() && b.is_algebraic(),
            Expr::Call(..) => false,
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.arity().max(b.arity())
            }
        }
    }

    /// Evaluates over any backend; `xs` are the coordinate functions.
    pub fn eval<S: Scalar>(&self, xs: &[S]) -> Result<S> {
        let proto = xs.first().ok_or_else(|| err("evaluation needs at least one coordinate"))?;
        self.eval_with(xs, proto)
    }

    fn eval_with<S: Scalar>(&self, xs: &[S], proto: &S) -> Result<S> {
        Ok(match self {
            Expr::Num(q) => proto.constant_like(q),
            Expr::Var(i) => xs
                .get(*i)
                .cloned()
                .ok_or_else(|| err(format!("x{} used in a {}-dimensional chart", i + 1, xs.len())))?,
            Expr::Neg(a) => -a.eval_with(xs, proto)?,
            Expr::Add(a, b) => a.eval_with(xs, proto)? + &b.eval_with(xs, proto)?,
            Expr::Sub(a, b) => a.eval_with(xs, proto)? - &b.eval_with(xs, proto)?,
            Expr::Mul(a, b) => a.eval_with(xs, proto)? * &b.eval_with(xs, proto)?,
            Expr::Div(a, b) => {
                let den = b.eval_with(xs, proto)?;
                if let Some(q) = b.as_number() {
                    if q.is_zero() {
                        return Err(err("division by the literal 0"));
                    }
                    a.eval_with(xs, proto)?.scale(&q.recip())
                } else {
                    a.eval_with(xs, proto)?.try_div(&den)?
                }
            }
            Expr::Pow(a, b) => {
                let base = a.eval_with(xs, proto)?;
                match b.as_number() {
                    Some(q) if q.is_integer() => {
                        let k = q
                            .to_integer()
                            .to_i32()
                            .ok_or_else(|| err(format!("exponent {q} out of range")))?;
                        base.powi(k)?
                    }
                    Some(q) => base.try_powf(q)?,
                    None => {
                        let e = b.eval_with(xs, proto)?;
                        (e * &base.apply(Func::Ln)?).apply(Func::Exp)?
                    }
                }
            }
            Expr::Call(f, a) => a.eval_with(xs, proto)?.apply(*f)?,
        })
    }

    /// Exact evaluation; fails on elementary functions and non-integer powers.
    pub fn eval_rational(&self, xs: &[Rational]) -> Result<Rational> {
        Ok(match self {
            Expr::Num(q) => q.clone(),
            Expr::Var(i) => xs
                .get(*i)
                .cloned()
                .ok_or_else(|| err(format!("x{} used in a {}-dimensional chart", i + 1, xs.len())))?,
            Expr::Neg(a) => -a.eval_rational(xs)?,
            Expr::Add(a, b) => a.eval_rational(xs)? + b.eval_rational(xs)?,
            Expr::Sub(a, b) => a.eval_rational(xs)? - b.eval_rational(xs)?,
            Expr::Mul(a, b) => a.eval_rational(xs)? * b.eval_rational(xs)?,
            Expr::Div(a, b) => {
                let d = b.eval_rational(xs)?;
                if d.is_zero() {
                    return Err(err("division by zero"));
                }
                a.eval_rational(xs)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval_rational(xs)?;
                let e = b.eval_rational(xs)?;
                if !e.is_integer() {
                    return rational_power(&base, &e).ok_or_else(|| err(format!("{base}^({e}) is not rational")));
                }
                let k = e.to_integer().to_i32().ok_or_else(|| err(format!("power {e} out of range")))?;
                if k < 0 && base.is_zero() {
                    return Err(err("negative power of zero"));
                }
                num_traits::pow::Pow::pow(base, k)
            }
            Expr::Call(f, _) => return Err(err(format!("{} is not exact", f.name()))),
        })
    }

    /// Plain floating-point evaluation.
    pub fn eval_f64(&self, xs: &[f64]) -> f64 {
        match self {
            Expr::Num(q) => q.to_f64().unwrap_or(f64::NAN),
            Expr::Var(i) => xs.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval_f64(xs),
            Expr::Add(a, b) => a.eval_f64(xs) + b.eval_f64(xs),
            Expr::Sub(a, b) => a.eval_f64(xs) - b.eval_f64(xs),
            Expr::Mul(a, b) => a.eval_f64(xs) * b.eval_f64(xs),
            Expr::Div(a, b) => a.eval_f64(xs) / b.eval_f64(xs),
            Expr::Pow(a, b) => {
                let base = a.eval_f64(xs);
                match b.as_number() {
                    Some(q) if q.is_integer() && q.abs() < Rational::from_integer(1000.into()) => {
                        base.powi(q.to_integer().to_i32().unwrap_or(0))
                    }
                    _ => base.powf(b.eval_f64(xs)),
                }
            }
            Expr::Call(f, a) => {
                let v = a.eval_f64(xs);
                match f {
                    Func::Sqrt => v.sqrt(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }
}

fn fold_neg(e: Expr) -> Expr {
    match e {
        Expr::Num(q) => Expr::Num(-q),
        other => Expr::Neg(Box::new(other)),
    }
}

fn fold_div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Expr::Num(p), Expr::Num(q)) if !q.is_zero() => Expr::Num(p / q),
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = fold_div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(fold_neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(e)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(err(format!("missing ')' at offset {}", self.pos)));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.s[start..self.pos]).unwrap_or("");
                if let Some(f) = Func::from_name(word) {
                    if !self.eat(b'(') {
                        return Err(err(format!("'{word}' must be followed by '('")));
                    }
                    let arg = self.expr()?;
                    if !self.eat(b')') {
                        return Err(err(format!("missing ')' after argument of {word}")));
                    }
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                let idx = word
                    .strip_prefix('x')
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| err(format!("unknown identifier '{word}'")))?;
                if idx == 0 || idx > self.dim {
                    return Err(err(format!("variable {word} outside x1..x{}", self.dim)));
                }
                Ok(Expr::Var(idx - 1))
            }
            Some(c) => Err(err(format!("unexpected '{}' at offset {}", c as char, self.pos))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.s.len() && p.s[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            std::str::from_utf8(&p.s[s..p.pos]).unwrap_or("").to_string()
        };
        let int_part = digits(self);
        let mut frac = String::new();
        if self.pos < self.s.len() && self.s[self.pos] == b'.' {
            self.pos += 1;
            frac = digits(self);
        }
        if int_part.is_empty() && frac.is_empty() {
            return Err(err(format!("malformed number at offset {start}")));
        }
        let mut exp10: i64 = 0;
        if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
            self.pos += 1;
            let neg = if self.pos < self.s.len() && (self.s[self.pos] == b'-' || self.s[self.pos] == b'+') {
                self.pos += 1;
                self.s[self.pos - 1] == b'-'
            } else {
                false
            };
            let e = digits(self);
            let v: i64 = e.parse().map_err(|_| err(format!("malformed exponent at offset {start}")))?;
            exp10 = if neg { -v } else { v };
        }
        let mantissa: BigInt = format!("{int_part}{frac}").parse().unwrap_or_default();
        let shift = exp10 - frac.len() as i64;
        let ten = BigInt::from(10);
        let q = if shift >= 0 {
            Rational::from_integer(mantissa * num_traits::pow(ten, shift as usize))
        } else {
            Rational::new(mantissa, num_traits::pow(ten, (-shift) as usize))
        };
        Ok(Expr::Num(q))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(q) => {
                if q.is_integer() && !q.is_negative() {
                    write!(f, "{q}")
                } else {
                    write!(f, "({q})")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Expressions serialize as their display string. The chart dimension is not
/// known during deserialization, so any `x<k>` is accepted there and checked
/// later by [`crate::geometry::MetricSpec::new`].
impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected an expression, got {other}"))),
        };
        Expr::parse(&text, usize::MAX).map_err(serde::de::Error::custom)
    }
}
