//! Rational functions with a factored denominator.
//!
//! The denominator is a product of *atoms*: non-constant primitive
//! polynomials with positive leading coefficient, each raised to a positive
//! power. The scalar part of a denominator is folded into the numerator.
//! Keeping the factorization around makes sums cheap (the common denominator
//! is an LCM of factor lists) and lets cancellation work atom by atom without
//! a multivariate GCD.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::RatFunError;
use crate::monomial::Monomial;
use crate::poly::{MultiPoly, Var};
use crate::Rational;

pub type Atom = Arc<MultiPoly>;

#[derive(Clone)]
pub struct RatFun {
    num: MultiPoly,
    den: Vec<(Atom, u32)>,
}

/// Arithmetic selector for [`ratfun_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact `lhs op rhs` with a canonical result.
pub fn ratfun_arith(lhs: &RatFun, rhs: &RatFun, op: ArithOp) -> Result<RatFun, RatFunError> {
    Ok(match op {
        ArithOp::Add => lhs + rhs,
        ArithOp::Sub => lhs - rhs,
        ArithOp::Mul => lhs * rhs,
        ArithOp::Div => lhs.checked_div(rhs)?,
    })
}

fn atom_cmp(a: &Atom, b: &Atom) -> Ordering {
    if Arc::ptr_eq(a, b) {
        Ordering::Equal
    } else {
        a.as_ref().cmp(b.as_ref())
    }
}

/// Merges two sorted factor lists, combining exponents with `f`.
fn merge_factors(a: &[(Atom, u32)], b: &[(Atom, u32)], f: impl Fn(u32, u32) -> u32) -> Vec<(Atom, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match atom_cmp(&a[i].0, &b[j].0) {
            Ordering::Less => {
                out.push((a[i].0.clone(), f(a[i].1, 0)));
                i += 1;
            }
            Ordering::Greater => {
                out.push((b[j].0.clone(), f(0, b[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                out.push((a[i].0.clone(), f(a[i].1, b[j].1)));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend(a[i..].iter().map(|(p, e)| (p.clone(), f(*e, 0))));
    out.extend(b[j..].iter().map(|(p, e)| (p.clone(), f(0, *e))));
    out.retain(|(_, e)| *e > 0);
    out
}

/// Product of `atom^e` over the list, as one polynomial.
fn expand(nbase: usize, nfiber: usize, factors: &[(Atom, u32)]) -> MultiPoly {
    let mut acc = MultiPoly::one(nbase, nfiber);
    for (a, e) in factors {
        acc = &acc * &a.pow(*e);
    }
    acc
}

/// Splits a nonzero polynomial into `unit · ∏ atom^e · rest` using the
/// monomial content and trial division by `hints`. `rest` is primitive and
/// becomes one more atom when non-constant.
fn factor_poly(p: &MultiPoly, hints: &[Atom]) -> (Rational, Vec<(Atom, u32)>) {
    debug_assert!(!p.is_zero());
    let (nb, nf) = (p.nbase(), p.nfiber());
    let mut factors: Vec<(Atom, u32)> = Vec::new();
    let mono = p.monomial_content();
    let mut rest = if mono.is_one() { p.clone() } else { p.div_monomial(&mono) };
    for v in 0..p.nvars() {
        let e = mono.exponent(v);
        if e > 0 {
            let mut exps = vec![0; p.nvars()];
            exps[v] = 1;
            factors.push((Arc::new(MultiPoly::monomial(nb, nf, &exps, Rational::one())), e));
        }
    }
    let (unit, prim) = rest.primitive_part();
    rest = prim;
    for h in hints {
        if rest.is_constant() {
            break;
        }
        let mut e = 0;
        while let Some(q) = rest.div_exact(h) {
            rest = q;
            e += 1;
        }
        if e > 0 {
            factors.push((h.clone(), e));
        }
    }
    // trial division by primitive positive atoms can only leave a unit of ±1
    let (u2, prim) = rest.primitive_part();
    let unit = unit * u2;
    if !prim.is_constant() {
        factors.push((Arc::new(prim), 1));
    }
    factors.sort_by(|a, b| atom_cmp(&a.0, &b.0));
    // hints may coincide with monomial atoms; merge duplicates
    let mut merged: Vec<(Atom, u32)> = Vec::with_capacity(factors.len());
    for (a, e) in factors {
        match merged.last_mut() {
            Some((la, le)) if atom_cmp(la, &a) == Ordering::Equal => *le += e,
            _ => merged.push((a, e)),
        }
    }
    (unit, merged)
}

impl RatFun {
    pub fn zero(nbase: usize, nfiber: usize) -> Self {
        RatFun {
            num: MultiPoly::zero(nbase, nfiber),
            den: Vec::new(),
        }
    }

    pub fn one(nbase: usize, nfiber: usize) -> Self {
        Self::from_poly(MultiPoly::one(nbase, nfiber))
    }

    pub fn constant(nbase: usize, nfiber: usize, c: Rational) -> Self {
        Self::from_poly(MultiPoly::constant(nbase, nfiber, c))
    }

    pub fn var(nbase: usize, nfiber: usize, v: Var) -> Self {
        Self::from_poly(MultiPoly::var(nbase, nfiber, v))
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RatFun {
            num: p,
            den: Vec::new(),
        }
    }

    /// `num / den` in canonical form.
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self, RatFunError> {
        Self::new_with_hints(num, den, &[])
    }

    /// Like [`RatFun::new`], trying the given atoms first when factoring `den`.
    pub fn new_with_hints(num: MultiPoly, den: MultiPoly, hints: &[Atom]) -> Result<Self, RatFunError> {
        if den.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        let (unit, factors) = factor_poly(&den, hints);
        let mut r = RatFun {
            num: num.scale(&unit.recip()),
            den: factors,
        };
        r.cancel();
        Ok(r)
    }

    /// Builds `num / ∏ atom^e` where the atoms are already canonical.
    pub fn from_factored(num: MultiPoly, mut den: Vec<(Atom, u32)>) -> Self {
        den.sort_by(|a, b| atom_cmp(&a.0, &b.0));
        for (a, _) in &den {
            debug_assert!(!a.is_constant());
        }
        let mut r = RatFun { num, den };
        r.cancel();
        r
    }

    /// Canonical atom for a polynomial: its primitive part.
    pub fn make_atom(p: &MultiPoly) -> Option<Atom> {
        if p.is_constant() {
            return None;
        }
        Some(Arc::new(p.primitive_part().1))
    }

    fn cancel(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        for (atom, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(atom) {
                    Some(q) => {
                        self.num = q;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
    }

    pub fn numer(&self) -> &MultiPoly {
        &self.num
    }

    pub fn denom_factors(&self) -> &[(Atom, u32)] {
        &self.den
    }

    /// Denominator expanded into a single polynomial.
    pub fn denom(&self) -> MultiPoly {
        expand(self.num.nbase(), self.num.nfiber(), &self.den)
    }

    pub fn nbase(&self) -> usize {
        self.num.nbase()
    }

    pub fn nfiber(&self) -> usize {
        self.num.nfiber()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.den.is_empty() {
            self.num.constant_value()
        } else {
            None
        }
    }

    /// Re-canonicalizes. Values are always canonical already, so this is
    /// idempotent by construction; it exists so that property can be tested.
    pub fn canonicalize(&self) -> Self {
        let mut r = self.clone();
        r.cancel();
        r
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return RatFun::zero(self.nbase(), self.nfiber());
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse.
    pub fn recip(&self) -> Result<Self, RatFunError> {
        self.recip_with_hints(&[])
    }

    /// Multiplicative inverse, splitting the old numerator by trial division
    /// against `hints` so that known factors stay separate atoms.
    pub fn recip_with_hints(&self, hints: &[Atom]) -> Result<Self, RatFunError> {
        if self.num.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        let (unit, factors) = factor_poly(&self.num, hints);
        let num = expand(self.nbase(), self.nfiber(), &self.den).scale(&unit.recip());
        // numerator and denominator were coprime at the atom level; no cancel needed
        Ok(RatFun { num, den: factors })
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, RatFunError> {
        Ok(self * &rhs.recip()?)
    }

    pub fn powi(&self, k: i32) -> Result<Self, RatFunError> {
        if k >= 0 {
            let k = k as u32;
            Ok(RatFun {
                num: self.num.pow(k),
                den: self.den.iter().map(|(a, e)| (a.clone(), e * k)).collect(),
            })
        } else {
            self.recip()?.powi(-k)
        }
    }

    /// Formal partial derivative.
    pub fn diff(&self, v: Var) -> Self {
        // (N/∏Dₖ^eₖ)' = (N'·∏Dₖ − N·Σ eₖ Dₖ' ∏_{j≠k} Dⱼ) / ∏Dₖ^(eₖ+1)
        let dnum = self.num.diff(v);
        if self.den.is_empty() {
            return RatFun::from_poly(dnum);
        }
        let (nb, nf) = (self.nbase(), self.nfiber());
        let active: Vec<usize> = (0..self.den.len())
            .filter(|&k| !self.den[k].0.diff(v).is_zero())
            .collect();
        if active.is_empty() {
            return RatFun {
                num: dnum,
                den: self.den.clone(),
            };
        }
        let prod_active = |skip: Option<usize>| {
            let mut acc = MultiPoly::one(nb, nf);
            for &k in &active {
                if Some(k) != skip {
                    acc = &acc * self.den[k].0.as_ref();
                }
            }
            acc
        };
        let mut num = &dnum * &prod_active(None);
        for &k in &active {
            let (a, e) = &self.den[k];
            let term = (&a.diff(v) * &prod_active(Some(k))).scale(&Rational::from_integer((*e).into()));
            num = &num - &(&self.num * &term);
        }
        let mut den = self.den.clone();
        for &k in &active {
            den[k].1 += 1;
        }
        let mut r = RatFun { num, den };
        r.cancel();
        r
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational, RatFunError> {
        let d = expand(self.nbase(), self.nfiber(), &self.den).eval(point);
        if d.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        Ok(self.num.eval(point) / d)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut d = 1.0;
        for (a, e) in &self.den {
            d *= a.eval_f64(point).powi(*e as i32);
        }
        self.num.eval_f64(point) / d
    }

    /// Substitutes the base variables, keeping the fiber variables symbolic.
    pub fn eval_base(&self, x: &[Rational]) -> Result<Self, RatFunError> {
        let num = self.num.eval_base(x);
        let den = expand(self.nbase(), self.nfiber(), &self.den).eval_base(x);
        RatFun::new(num, den)
    }

    fn same_ring(&self, other: &Self) {
        assert!(
            self.nbase() == other.nbase() && self.nfiber() == other.nfiber(),
            "rational functions live in different rings"
        );
    }

    /// Numerators of `self` and `other` over their common denominator.
    fn over_lcm(&self, other: &Self) -> (MultiPoly, MultiPoly, Vec<(Atom, u32)>) {
        self.same_ring(other);
        let lcm = merge_factors(&self.den, &other.den, u32::max);
        let (nb, nf) = (self.nbase(), self.nfiber());
        let cof = |den: &[(Atom, u32)]| {
            let missing = merge_factors(&lcm, den, |a, b| a - b);
            expand(nb, nf, &missing)
        };
        let a = if self.den.len() == lcm.len() && self.den.iter().zip(&lcm).all(|(x, y)| x.1 == y.1) {
            self.num.clone()
        } else {
            &self.num * &cof(&self.den)
        };
        let b = if other.den.len() == lcm.len() && other.den.iter().zip(&lcm).all(|(x, y)| x.1 == y.1) {
            other.num.clone()
        } else {
            &other.num * &cof(&other.den)
        };
        (a, b, lcm)
    }

    fn add_sub(&self, other: &Self, sub: bool) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if sub { -other } else { other.clone() };
        }
        let (a, b, den) = self.over_lcm(other);
        let num = if sub { &a - &b } else { &a + &b };
        let mut r = RatFun { num, den };
        r.cancel();
        r
    }

    fn mul_impl(&self, other: &Self) -> Self {
        self.same_ring(other);
        if self.is_zero() || other.is_zero() {
            return RatFun::zero(self.nbase(), self.nfiber());
        }
        // cancel crosswise before multiplying out
        let mut a = RatFun {
            num: self.num.clone(),
            den: other.den.clone(),
        };
        a.cancel();
        let mut b = RatFun {
            num: other.num.clone(),
            den: self.den.clone(),
        };
        b.cancel();
        RatFun {
            num: &a.num * &b.num,
            den: merge_factors(&a.den, &b.den, |x, y| x + y),
        }
    }
}

impl PartialEq for RatFun {
    fn eq(&self, other: &Self) -> bool {
        if self.nbase() != other.nbase() || self.nfiber() != other.nfiber() {
            return false;
        }
        let (a, b, _) = self.over_lcm(other);
        a == b
    }
}

impl Eq for RatFun {}

impl<'a> Add<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn add(self, rhs: &'a RatFun) -> RatFun {
        self.add_sub(rhs, false)
    }
}

impl<'a> Sub<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &'a RatFun) -> RatFun {
        self.add_sub(rhs, true)
    }
}

impl<'a> Mul<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &'a RatFun) -> RatFun {
        self.mul_impl(rhs)
    }
}

/// Panics on division by zero; use [`RatFun::checked_div`] to handle it.
impl<'a> Div<&'a RatFun> for &'a RatFun {
    type Output = RatFun;
    fn div(self, rhs: &'a RatFun) -> RatFun {
        self.checked_div(rhs).expect("division by the zero rational function")
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<RatFun> for RatFun {
            type Output = RatFun;
            fn $method(self, rhs: RatFun) -> RatFun {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

impl From<MultiPoly> for RatFun {
    fn from(p: MultiPoly) -> Self {
        RatFun::from_poly(p)
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_empty() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({})/(", self.num)?;
        for (k, (a, e)) in self.den.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "({a})")?;
            } else {
                write!(f, "({a})^{e}")?;
            }
        }
        write!(f, ")")
    }
}

impl fmt::Debug for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({self})")
    }
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<RatFun>();
    check::<Monomial>();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(i: usize) -> RatFun {
        RatFun::var(0, 2, Var::Fiber(i))
    }

    #[test]
    fn inverse_pair() {
        let a = &y(0) / &y(1);
        let b = &y(1) / &y(0);
        assert!((&a * &b).is_one());
    }

    #[test]
    fn like_terms() {
        let inv = y(0).recip().unwrap();
        let s = &inv + &inv;
        assert_eq!(s, inv.scale(&Rational::from_integer(2.into())));
        assert_eq!(s.numer().constant_value(), Some(Rational::from_integer(2.into())));
        assert_eq!(s.denom(), y(0).numer().clone());
    }

    #[test]
    fn quotient_cancels() {
        // ((y1+y2)/y1) ÷ ((y1+y2)/(y1 y2)) = y2
        let s = &y(0) + &y(1);
        let lhs = &s / &y(0);
        let rhs = &s / &(&y(0) * &y(1));
        let q = ratfun_arith(&lhs, &rhs, ArithOp::Div).unwrap();
        assert!(q.is_polynomial());
        assert_eq!(q, y(1));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let z = RatFun::zero(0, 2);
        assert_eq!(ratfun_arith(&y(0), &z, ArithOp::Div), Err(RatFunError::DivisionByZero));
        assert!(RatFun::new(MultiPoly::one(0, 2), MultiPoly::zero(0, 2)).is_err());
    }

    #[test]
    fn derivative_of_quotient() {
        // d/dy1 (1/(y1+y2)^2) = -2/(y1+y2)^3
        let s = &y(0) + &y(1);
        let f = s.powi(-2).unwrap();
        let expect = s.powi(-3).unwrap().scale(&Rational::from_integer((-2).into()));
        assert_eq!(f.diff(Var::Fiber(0)), expect);
    }

    #[test]
    fn sign_normalized_denominator() {
        let r = RatFun::new(MultiPoly::one(0, 2), (&(-&y(0)) - &y(1)).numer().clone()).unwrap();
        for (a, _) in r.denom_factors() {
            assert!(a.leading_coeff().unwrap() > &Rational::zero());
        }
        assert!(r.numer().leading_coeff().unwrap() < &Rational::zero());
    }
}
