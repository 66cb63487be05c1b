//! The quadratic extension `K(w)`, `w² = R`, of the rational-function field `K`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::RatFunError;
use crate::poly::{MultiPoly, Var};
use crate::ratfun::{Atom, RatFun};
use crate::Rational;

/// Outcome of the rationality decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Certificate {
    Rational,
    Irrational,
}

/// Shared data for one family of extension elements: the radicand and a list
/// of known denominator atoms used when inverting.
#[derive(Debug)]
pub struct ExtContext {
    radicand: Option<MultiPoly>,
    radicand_rf: Option<RatFun>,
    hints: Vec<Atom>,
}

impl ExtContext {
    /// A context with the given radicand.
    ///
    /// Rejects a zero radicand and any radicand that is a constant times the
    /// square of a polynomial (this includes constants).
    pub fn new(radicand: MultiPoly, hints: Vec<Atom>) -> Result<Arc<Self>, RatFunError> {
        if radicand.is_zero() {
            return Err(RatFunError::ZeroRadicand);
        }
        if radicand.is_square_up_to_constant() {
            return Err(RatFunError::PerfectSquareRadicand(radicand.to_string()));
        }
        let mut hints = hints;
        if let Some(a) = RatFun::make_atom(&radicand) {
            if !hints.iter().any(|h| **h == *a) {
                hints.push(a);
            }
        }
        Ok(Arc::new(ExtContext {
            radicand_rf: Some(RatFun::from_poly(radicand.clone())),
            radicand: Some(radicand),
            hints,
        }))
    }

    /// A context without a square root, used only to carry inversion hints.
    pub fn rational_only(hints: Vec<Atom>) -> Arc<Self> {
        Arc::new(ExtContext {
            radicand: None,
            radicand_rf: None,
            hints,
        })
    }

    pub fn radicand(&self) -> Option<&MultiPoly> {
        self.radicand.as_ref()
    }

    pub fn hints(&self) -> &[Atom] {
        &self.hints
    }

    fn same(&self, other: &Self) -> bool {
        self.radicand == other.radicand
    }
}

/// `a + b·w`. Elements without a context are purely rational.
#[derive(Clone)]
pub struct ExtScalar {
    a: RatFun,
    b: RatFun,
    ctx: Option<Arc<ExtContext>>,
}

fn join_ctx(x: &Option<Arc<ExtContext>>, y: &Option<Arc<ExtContext>>) -> Result<Option<Arc<ExtContext>>, RatFunError> {
    match (x, y) {
        (None, c) | (c, None) => Ok(c.clone()),
        (Some(a), Some(b)) => {
            if Arc::ptr_eq(a, b) || a.same(b) {
                // prefer the one with a radicand if only one has it
                Ok(Some(if a.radicand.is_some() { a.clone() } else { b.clone() }))
            } else if a.radicand.is_none() {
                Ok(Some(b.clone()))
            } else if b.radicand.is_none() {
                Ok(Some(a.clone()))
            } else {
                Err(RatFunError::RadicandMismatch)
            }
        }
    }
}

impl ExtScalar {
    pub fn from_rat(a: RatFun, ctx: Option<Arc<ExtContext>>) -> Self {
        let b = RatFun::zero(a.nbase(), a.nfiber());
        ExtScalar { a, b, ctx }
    }

    /// `a + b·w` in the given context; `b` must vanish if the context has no radicand.
    pub fn new(a: RatFun, b: RatFun, ctx: Arc<ExtContext>) -> Self {
        assert!(ctx.radicand.is_some() || b.is_zero(), "irrational part without a radicand");
        ExtScalar { a, b, ctx: Some(ctx) }
    }

    /// The generator `w` itself.
    pub fn w(ctx: Arc<ExtContext>) -> Self {
        let r = ctx.radicand.as_ref().expect("context without radicand has no w");
        let (nb, nf) = (r.nbase(), r.nfiber());
        ExtScalar {
            a: RatFun::zero(nb, nf),
            b: RatFun::one(nb, nf),
            ctx: Some(ctx),
        }
    }

    pub fn constant(nbase: usize, nfiber: usize, c: Rational) -> Self {
        Self::from_rat(RatFun::constant(nbase, nfiber, c), None)
    }

    pub fn rat_part(&self) -> &RatFun {
        &self.a
    }

    pub fn irr_part(&self) -> &RatFun {
        &self.b
    }

    pub fn radicand(&self) -> Option<&MultiPoly> {
        self.ctx.as_ref().and_then(|c| c.radicand.as_ref())
    }

    pub fn context(&self) -> Option<&Arc<ExtContext>> {
        self.ctx.as_ref()
    }

    /// Same value, attached to `ctx` (used to seed inversion hints).
    pub fn with_context(mut self, ctx: Arc<ExtContext>) -> Result<Self, RatFunError> {
        self.ctx = join_ctx(&Some(ctx), &self.ctx)?;
        Ok(self)
    }

    pub fn nbase(&self) -> usize {
        self.a.nbase()
    }

    pub fn nfiber(&self) -> usize {
        self.a.nfiber()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn certificate(&self) -> Certificate {
        if self.b.is_zero() {
            Certificate::Rational
        } else {
            Certificate::Irrational
        }
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.b.is_zero() {
            self.a.constant_value()
        } else {
            None
        }
    }

    fn hints(&self) -> &[Atom] {
        self.ctx.as_ref().map(|c| c.hints.as_slice()).unwrap_or(&[])
    }

    fn radicand_rf(&self) -> Option<&RatFun> {
        self.ctx.as_ref().and_then(|c| c.radicand_rf.as_ref())
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, RatFunError> {
        Ok(ExtScalar {
            ctx: join_ctx(&self.ctx, &rhs.ctx)?,
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        })
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, RatFunError> {
        Ok(ExtScalar {
            ctx: join_ctx(&self.ctx, &rhs.ctx)?,
            a: &self.a - &rhs.a,
            b: &self.b - &rhs.b,
        })
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, RatFunError> {
        let ctx = join_ctx(&self.ctx, &rhs.ctx)?;
        let out = if self.b.is_zero() {
            ExtScalar {
                a: &self.a * &rhs.a,
                b: &self.a * &rhs.b,
                ctx,
            }
        } else if rhs.b.is_zero() {
            ExtScalar {
                a: &self.a * &rhs.a,
                b: &self.b * &rhs.a,
                ctx,
            }
        } else {
            let r = ctx
                .as_ref()
                .and_then(|c| c.radicand_rf.as_ref())
                .expect("irrational parts imply a radicand");
            ExtScalar {
                a: &(&self.a * &rhs.a) + &(&(&self.b * &rhs.b) * r),
                b: &(&self.a * &rhs.b) + &(&self.b * &rhs.a),
                ctx,
            }
        };
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        ExtScalar {
            a: self.a.scale(c),
            b: self.b.scale(c),
            ctx: self.ctx.clone(),
        }
    }

    /// `(a − b·w)/(a² − b²R)`.
    pub fn recip(&self) -> Result<Self, RatFunError> {
        if self.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        let hints = self.hints();
        if self.b.is_zero() {
            return Ok(ExtScalar {
                a: self.a.recip_with_hints(hints)?,
                b: self.b.clone(),
                ctx: self.ctx.clone(),
            });
        }
        let r = self.radicand_rf().expect("irrational part implies a radicand");
        let norm = &(&self.a * &self.a) - &(&(&self.b * &self.b) * r);
        let inv = norm.recip_with_hints(hints)?;
        Ok(ExtScalar {
            a: &self.a * &inv,
            b: -&(&self.b * &inv),
            ctx: self.ctx.clone(),
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, RatFunError> {
        self.checked_mul(&rhs.recip()?)
    }

    pub fn powi(&self, k: i32) -> Result<Self, RatFunError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = ExtScalar::from_rat(RatFun::one(self.nbase(), self.nfiber()), self.ctx.clone());
        let mut p = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&p)?;
            }
            k >>= 1;
            if k > 0 {
                p = p.checked_mul(&p)?;
            }
        }
        Ok(acc)
    }

    /// `∂(a + b·w) = ∂a + (∂b + b·∂R/(2R))·w`.
    pub fn diff(&self, v: Var) -> Self {
        let da = self.a.diff(v);
        if self.b.is_zero() {
            return ExtScalar {
                a: da,
                b: self.b.clone(),
                ctx: self.ctx.clone(),
            };
        }
        let r = self.radicand().expect("irrational part implies a radicand");
        let dr = r.diff(v);
        let mut db = self.b.diff(v);
        if !dr.is_zero() {
            let ratio = RatFun::new_with_hints(dr, r.scale(&Rational::from_integer(2.into())), self.hints())
                .expect("radicand is nonzero");
            db = &db + &(&self.b * &ratio);
        }
        ExtScalar {
            a: da,
            b: db,
            ctx: self.ctx.clone(),
        }
    }

    /// Exact value of `a` and `b` plus `R` at a point; the extension value is
    /// `a + b·√R`.
    pub fn eval_parts(&self, point: &[Rational]) -> Result<(Rational, Rational, Rational), RatFunError> {
        let a = self.a.eval(point)?;
        let b = self.b.eval(point)?;
        let r = match self.radicand() {
            Some(r) => r.eval(point),
            None => Rational::zero(),
        };
        Ok((a, b, r))
    }

    /// Real value at an exact point (the positive square root is taken for `w`).
    pub fn eval_f64(&self, point: &[Rational]) -> Result<f64, RatFunError> {
        let (a, b, r) = self.eval_parts(point)?;
        let af = a.to_f64().unwrap_or(f64::NAN);
        if b.is_zero() {
            return Ok(af);
        }
        let bf = b.to_f64().unwrap_or(f64::NAN);
        let rf = r.to_f64().unwrap_or(f64::NAN);
        if r.is_negative() {
            return Ok(f64::NAN);
        }
        Ok(af + bf * rf.sqrt())
    }

    /// Substitutes base variables into both parts.
    pub fn eval_base(&self, x: &[Rational], ctx: Option<Arc<ExtContext>>) -> Result<Self, RatFunError> {
        Ok(ExtScalar {
            a: self.a.eval_base(x)?,
            b: self.b.eval_base(x)?,
            ctx,
        })
    }
}

impl PartialEq for ExtScalar {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b && join_ctx(&self.ctx, &other.ctx).is_ok()
    }
}

/// Panics on radicand mismatch; the `checked_*` methods report it instead.
impl<'a> Add<&'a ExtScalar> for &'a ExtScalar {
    type Output = ExtScalar;
    fn add(self, rhs: &'a ExtScalar) -> ExtScalar {
        self.checked_add(rhs).expect("radicand mismatch")
    }
}

impl<'a> Sub<&'a ExtScalar> for &'a ExtScalar {
    type Output = ExtScalar;
    fn sub(self, rhs: &'a ExtScalar) -> ExtScalar {
        self.checked_sub(rhs).expect("radicand mismatch")
    }
}

impl<'a> Mul<&'a ExtScalar> for &'a ExtScalar {
    type Output = ExtScalar;
    fn mul(self, rhs: &'a ExtScalar) -> ExtScalar {
        self.checked_mul(rhs).expect("radicand mismatch")
    }
}

impl Neg for &ExtScalar {
    type Output = ExtScalar;
    fn neg(self) -> ExtScalar {
        ExtScalar {
            a: -&self.a,
            b: -&self.b,
            ctx: self.ctx.clone(),
        }
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + ({})·w", self.a, self.b)
        }
    }
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExtScalar({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn y(i: usize) -> MultiPoly {
        MultiPoly::var(0, 2, Var::Fiber(i))
    }

    #[test]
    fn derivative_of_w() {
        let r = &(&y(0) * &y(0)) + &(&y(1) * &y(1));
        let ctx = ExtContext::new(r.clone(), vec![]).unwrap();
        let w = ExtScalar::w(ctx.clone());
        let dw = w.diff(Var::Fiber(0));
        assert!(dw.rat_part().is_zero());
        assert_eq!(dw.irr_part(), &RatFun::new(y(0), r.clone()).unwrap());
        // w² two ways
        let w2 = &w * &w;
        assert_eq!(w2.rat_part(), &RatFun::from_poly(r.clone()));
        let via_product = &(&dw * &w) + &(&w * &dw);
        assert_eq!(w2.diff(Var::Fiber(0)), via_product);
    }

    #[test]
    fn perfect_squares_are_rejected() {
        let sq = &(&y(0) + &y(1)) * &(&y(0) + &y(1));
        assert!(matches!(
            ExtContext::new(sq.scale(&q(3)), vec![]),
            Err(RatFunError::PerfectSquareRadicand(_))
        ));
        assert_eq!(ExtContext::new(MultiPoly::zero(0, 2), vec![]).unwrap_err(), RatFunError::ZeroRadicand);
    }

    #[test]
    fn inverse_in_extension() {
        let r = &(&y(0) * &y(0)) + &y(1);
        let ctx = ExtContext::new(r, vec![]).unwrap();
        let e = &ExtScalar::from_rat(RatFun::from_poly(y(0)), None) + &ExtScalar::w(ctx);
        let prod = &e * &e.recip().unwrap();
        assert_eq!(prod.constant_value(), Some(q(1)));
    }

    #[test]
    fn mismatched_radicands() {
        let c1 = ExtContext::new(&(&y(0) * &y(0)) + &y(1), vec![]).unwrap();
        let c2 = ExtContext::new(&(&y(1) * &y(1)) + &y(0), vec![]).unwrap();
        let e1 = ExtScalar::w(c1);
        let e2 = ExtScalar::w(c2);
        assert_eq!(e1.checked_add(&e2).unwrap_err(), RatFunError::RadicandMismatch);
    }
}
