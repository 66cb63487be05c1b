//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::monomial::{Monomial, MAX_VARS};
use crate::Rational;

/// A variable of the polynomial ring: a base coordinate `xⁱ` or a fiber
/// coordinate `yⁱ` (both zero-based here).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    Base(usize),
    Fiber(usize),
}

impl Var {
    /// Position of the variable in an exponent vector.
    pub fn index(self, nbase: usize) -> usize {
        match self {
            Var::Base(i) => i,
            Var::Fiber(i) => nbase + i,
        }
    }
}

/// Sparse polynomial in `nbase` base variables followed by `nfiber` fiber
/// variables.
///
/// Terms are kept sorted ascending in graded lexicographic order and never
/// carry a zero coefficient, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiPoly {
    nbase: usize,
    nfiber: usize,
    terms: Vec<(Monomial, Rational)>,
}

impl MultiPoly {
    pub fn zero(nbase: usize, nfiber: usize) -> Self {
        assert!(nbase + nfiber <= MAX_VARS, "at most {MAX_VARS} variables");
        MultiPoly {
            nbase,
            nfiber,
            terms: Vec::new(),
        }
    }

    pub fn constant(nbase: usize, nfiber: usize, c: Rational) -> Self {
        let mut p = Self::zero(nbase, nfiber);
        if !c.is_zero() {
            p.terms.push((Monomial::one(), c));
        }
        p
    }

    pub fn one(nbase: usize, nfiber: usize) -> Self {
        Self::constant(nbase, nfiber, Rational::one())
    }

    pub fn var(nbase: usize, nfiber: usize, v: Var) -> Self {
        let mut p = Self::zero(nbase, nfiber);
        let idx = v.index(nbase);
        assert!(idx < nbase + nfiber, "variable {v:?} out of range");
        p.terms.push((Monomial::var(idx), Rational::one()));
        p
    }

    /// Single term `coeff · ∏ var^exp`.
    pub fn monomial(nbase: usize, nfiber: usize, exps: &[u32], coeff: Rational) -> Self {
        assert_eq!(exps.len(), nbase + nfiber, "exponent vector length");
        let mut p = Self::zero(nbase, nfiber);
        if !coeff.is_zero() {
            p.terms.push((Monomial::from_exponents(exps), coeff));
        }
        p
    }

    /// Builds a polynomial from arbitrary (possibly repeated, possibly zero) terms.
    pub fn from_terms<I>(nbase: usize, nfiber: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let raw = terms
            .into_iter()
            .map(|(e, c)| {
                assert_eq!(e.len(), nbase + nfiber, "exponent vector length");
                (Monomial::from_exponents(&e), c)
            })
            .collect();
        let mut p = Self::zero(nbase, nfiber);
        p.terms = collect_sorted(raw);
        p
    }

    pub fn nbase(&self) -> usize {
        self.nbase
    }

    pub fn nfiber(&self) -> usize {
        self.nfiber
    }

    pub fn nvars(&self) -> usize {
        self.nbase + self.nfiber
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// The constant value if the polynomial has no variable terms.
    pub fn constant_value(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.terms.as_slice(), [(m, c)] if m.is_one() && c.is_one())
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u32>, &Rational)> + '_ {
        let n = self.nvars();
        self.terms.iter().map(move |(m, c)| (m.exponents(n), c))
    }

    /// Largest term under graded lexicographic order.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.last().map(|(m, c)| (m, c))
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.terms.last().map(|(_, c)| c)
    }

    fn trailing_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.last().map(|(m, _)| m.degree()).unwrap_or(0)
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, v: Var) -> u32 {
        let idx = v.index(self.nbase);
        self.terms.iter().map(|(m, _)| m.exponent(idx)).max().unwrap_or(0)
    }

    fn same_ring(&self, other: &Self) {
        assert!(
            self.nbase == other.nbase && self.nfiber == other.nfiber,
            "polynomials live in different rings ({}+{} vs {}+{})",
            self.nbase,
            self.nfiber,
            other.nbase,
            other.nfiber
        );
    }

    fn with_terms(&self, terms: Vec<(Monomial, Rational)>) -> Self {
        MultiPoly {
            nbase: self.nbase,
            nfiber: self.nfiber,
            terms,
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return self.with_terms(Vec::new());
        }
        self.with_terms(self.terms.iter().map(|(m, a)| (*m, a * c)).collect())
    }

    /// Multiplies by a single term.
    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Self {
        if c.is_zero() {
            return self.with_terms(Vec::new());
        }
        // monomial orders are compatible with multiplication, so order is kept
        self.with_terms(self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect())
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        self.same_ring(other);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &other.terms;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let c = if negate_other { -&b[j].1 } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate_other {
                        &a[i].1 - &b[j].1
                    } else {
                        &a[i].1 + &b[j].1
                    };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(a[i..].iter().cloned());
        for (m, c) in &b[j..] {
            out.push((*m, if negate_other { -c } else { c.clone() }));
        }
        self.with_terms(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = MultiPoly::one(self.nbase, self.nfiber);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative.
    pub fn diff(&self, v: Var) -> Self {
        let idx = v.index(self.nbase);
        assert!(idx < self.nvars(), "variable {v:?} out of range");
        let raw = self
            .terms
            .iter()
            .filter_map(|(m, c)| m.lower(idx).map(|(e, m2)| (m2, c * Rational::from_integer(e.into()))))
            .collect();
        self.with_terms(collect_sorted(raw))
    }

    /// Exact evaluation at a point with one value per variable.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars(), "evaluation point length");
        let n = self.nvars();
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, p) in point.iter().enumerate().take(n) {
                let e = m.exponent(v);
                if e > 0 {
                    t *= num_traits::pow(p.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars(), "evaluation point length");
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (v, p) in point.iter().enumerate() {
                    let e = m.exponent(v);
                    if e > 0 {
                        t *= p.powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Substitutes values for the base variables, keeping fiber variables symbolic.
    pub fn eval_base(&self, x: &[Rational]) -> Self {
        assert_eq!(x.len(), self.nbase, "base point length");
        let mut raw = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = m.exponents(self.nvars());
            for (v, xv) in x.iter().enumerate() {
                if exps[v] > 0 {
                    coeff *= num_traits::pow(xv.clone(), exps[v] as usize);
                    exps[v] = 0;
                }
            }
            raw.push((Monomial::from_exponents(&exps), coeff));
        }
        self.with_terms(collect_sorted(raw))
    }

    /// Positive rational `c` such that `self / c` has coprime integer coefficients.
    pub fn content(&self) -> Rational {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for (_, c) in &self.terms {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            return Rational::one();
        }
        Rational::new(num_gcd, den_lcm)
    }

    /// Splits `self = unit · part` where `part` has coprime integer coefficients
    /// and a positive leading coefficient.
    pub fn primitive_part(&self) -> (Rational, MultiPoly) {
        if self.is_zero() {
            return (Rational::one(), self.clone());
        }
        let mut c = self.content();
        if self.leading_coeff().is_some_and(|lc| lc.is_negative()) {
            c = -c;
        }
        let inv = c.recip();
        (c, self.scale(&inv))
    }

    /// Greatest monomial dividing every term.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        match it.next() {
            None => Monomial::one(),
            Some((first, _)) => it.fold(*first, |g, (m, _)| g.gcd(m)),
        }
    }

    pub(crate) fn div_monomial(&self, m: &Monomial) -> Self {
        self.with_terms(
            self.terms
                .iter()
                .map(|(t, c)| (t.checked_div(m).expect("monomial does not divide"), c.clone()))
                .collect(),
        )
    }

    /// Exact quotient `self / divisor`, or `None` when the division leaves a remainder.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        self.same_ring(divisor);
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.is_zero() {
            return Some(self.clone());
        }
        let (dm, dc) = divisor.leading_term().map(|(m, c)| (*m, c.clone()))?;
        // cheap necessary conditions before the full division
        if self.total_degree() < divisor.total_degree() {
            return None;
        }
        let (lm, _) = self.leading_term()?;
        if !dm.divides(lm) {
            return None;
        }
        let dt = divisor.trailing_monomial()?;
        if !dt.divides(self.trailing_monomial()?) {
            return None;
        }
        if divisor.terms.len() == 1 {
            if !dm.divides(&self.monomial_content()) {
                return None;
            }
            let inv = dc.recip();
            return Some(self.div_monomial(&dm).scale(&inv));
        }
        let mut rem = self.clone();
        let mut quot: Vec<(Monomial, Rational)> = Vec::new();
        while let Some((rm, rc)) = rem.leading_term().map(|(m, c)| (*m, c.clone())) {
            let qm = rm.checked_div(&dm)?;
            let qc = &rc / &dc;
            rem = rem.merge(&divisor.mul_term(&qm, &qc), true);
            quot.push((qm, qc));
        }
        quot.reverse();
        Some(self.with_terms(quot))
    }

    /// Exact square root when `self` is the square of a polynomial.
    ///
    /// Term-by-term coefficient matching from the leading term down.
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(self.clone());
        }
        let (lm, lc) = self.leading_term()?;
        let root_m = lm.sqrt()?;
        let root_c = rational_sqrt(lc)?;
        let low = self.trailing_monomial()?.degree();
        let mut root = self.with_terms(vec![(root_m, root_c.clone())]);
        let two_lead = &root_c * Rational::from_integer(2.into());
        let mut rem = self.merge(&(&root * &root), true);
        while let Some((rm, rc)) = rem.leading_term().map(|(m, c)| (*m, c.clone())) {
            let tm = rm.checked_div(&root_m)?;
            if tm >= root_m || 2 * tm.degree() < low {
                return None;
            }
            let tc = &rc / &two_lead;
            let t = self.with_terms(vec![(tm, tc)]);
            // rem -= 2·root·t + t²
            let twice = (&root * &t).scale(&Rational::from_integer(2.into()));
            rem = rem.merge(&twice, true).merge(&(&t * &t), true);
            root = root.merge(&t, false);
        }
        Some(root)
    }

    /// Whether `self` equals a nonzero constant times the square of a polynomial.
    pub fn is_square_up_to_constant(&self) -> bool {
        if self.is_zero() {
            return true;
        }
        let (_, part) = self.primitive_part();
        part.sqrt_exact().is_some()
    }

    /// Variable name used by `Display`: `x1..xn` for base, `y1..yn` for fiber.
    pub fn var_name(&self, idx: usize) -> String {
        if idx < self.nbase {
            format!("x{}", idx + 1)
        } else {
            format!("y{}", idx - self.nbase + 1)
        }
    }
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// Sorts raw terms, merges duplicates and drops zeros.
fn collect_sorted(mut raw: Vec<(Monomial, Rational)>) -> Vec<(Monomial, Rational)> {
    raw.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(Monomial, Rational)> = Vec::with_capacity(raw.len());
    for (m, c) in raw {
        match out.last_mut() {
            Some((lm, lc)) if *lm == m => *lc += c,
            _ => {
                if let Some((_, lc)) = out.last() {
                    if lc.is_zero() {
                        out.pop();
                    }
                }
                out.push((m, c));
            }
        }
    }
    if out.last().is_some_and(|(_, c)| c.is_zero()) {
        out.pop();
    }
    out
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.merge(rhs, false)
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.merge(rhs, true)
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        self.same_ring(rhs);
        if self.is_zero() || rhs.is_zero() {
            return self.with_terms(Vec::new());
        }
        let (small, large) = if self.terms.len() <= rhs.terms.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if small.terms.len() == 1 {
            let (m, c) = &small.terms[0];
            return large.mul_term(m, c);
        }
        let mut raw = Vec::with_capacity(small.terms.len() * large.terms.len());
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                raw.push((ma.mul(mb), ca * cb));
            }
        }
        self.with_terms(collect_sorted(raw))
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.with_terms(self.terms.iter().map(|(m, c)| (*m, -c)).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // descending order reads naturally
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for v in 0..self.nvars() {
                match m.exponent(v) {
                    0 => {}
                    1 => factors.push(self.var_name(v)),
                    e => factors.push(format!("{}^{}", self.var_name(v), e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn y(i: usize) -> MultiPoly {
        MultiPoly::var(2, 2, Var::Fiber(i))
    }

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(2, 2, Var::Base(i))
    }

    #[test]
    fn diff_power_rule() {
        // d/dy¹ (y¹y² + 3(x¹)²) = y²
        let p = &(&y(0) * &y(1)) + &(&x(0) * &x(0)).scale(&q(3, 1));
        assert_eq!(p.diff(Var::Fiber(0)), y(1));
        // derivative of a constant vanishes
        assert!(MultiPoly::constant(2, 2, q(5, 1)).diff(Var::Fiber(0)).is_zero());
        // d/dx¹ ((x¹)² y¹) = 2 x¹ y¹
        let p = &(&x(0) * &x(0)) * &y(0);
        assert_eq!(p.diff(Var::Base(0)), (&x(0) * &y(0)).scale(&q(2, 1)));
    }

    #[test]
    fn exact_division() {
        let a = &y(0) + &y(1);
        let b = &y(0) - &x(1).scale(&q(1, 2));
        let prod = &a * &b;
        assert_eq!(prod.div_exact(&a), Some(b.clone()));
        assert_eq!(prod.div_exact(&b), Some(a.clone()));
        let c = &prod + &MultiPoly::one(2, 2);
        assert_eq!(c.div_exact(&a), None);
    }

    #[test]
    fn square_roots() {
        let a = &(&y(0) * &y(0)).scale(&q(4, 9)) - &(&x(0) * &y(1));
        let sq = &a * &a;
        let r = sq.sqrt_exact().expect("perfect square");
        assert!(r == a || r == -&a);
        let not_sq = &(&y(0) * &y(0)) + &(&y(1) * &y(1));
        assert!(not_sq.sqrt_exact().is_none());
        assert!(sq.scale(&q(3, 1)).is_square_up_to_constant());
        assert!(!not_sq.is_square_up_to_constant());
    }

    #[test]
    fn content_and_primitive_part() {
        let p = &y(0).scale(&q(-2, 3)) + &y(1).scale(&q(4, 9));
        let (c, part) = p.primitive_part();
        assert_eq!(&part.scale(&c), &p);
        assert!(part.leading_coeff().unwrap().is_positive());
        assert_eq!(part.content(), q(1, 1));
    }

    #[test]
    fn evaluation_and_display() {
        let p = &(&x(0) * &y(1)).scale(&q(3, 2)) - &y(0);
        assert_eq!(p.eval(&[q(2, 1), q(0, 1), q(1, 1), q(5, 1)]), q(14, 1));
        assert_eq!(p.to_string(), "3/2*x1*y2 - y1");
        assert_eq!(p.eval_base(&[q(2, 1), q(7, 1)]).to_string(), "-y1 + 3*y2");
    }
}
