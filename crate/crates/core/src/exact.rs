//! Exact backend: Taylor series in the base displacement `δx` whose
//! coefficients are elements `a + b·w` of the quadratic extension of the
//! rational functions in the fiber coordinates `y`.
//!
//! Fiber derivatives are formal; base derivatives shift Taylor coefficients,
//! so an [`ExactJet`] built at base order `ox` supports `ox` base derivatives.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use kropina_ratfun::{Certificate, ExtContext, ExtScalar, MultiPoly, RatFun, Rational, Var};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{CoreError, Result};
use crate::layout::Layout;
use crate::scalar::{Func, Scalar};

/// Shared data for all jets of one exact evaluation.
#[derive(Debug)]
pub struct ExactEnv {
    pub n: usize,
    /// Base point.
    pub x0: Vec<Rational>,
    /// Fiber point used for `value()` and point tests; never for certificates.
    pub y0: Vec<Rational>,
    pub ctx: Arc<ExtContext>,
}

impl ExactEnv {
    pub fn new(x0: Vec<Rational>, y0: Vec<Rational>, ctx: Arc<ExtContext>) -> Arc<Self> {
        assert_eq!(x0.len(), y0.len(), "base and fiber dimensions differ");
        Arc::new(ExactEnv {
            n: x0.len(),
            x0,
            y0,
            ctx,
        })
    }

    /// Environment without a square root, for purely rational work.
    pub fn rational(x0: Vec<Rational>, y0: Vec<Rational>) -> Arc<Self> {
        ExactEnv::new(x0, y0, ExtContext::rational_only(Vec::new()))
    }

    fn zero(&self) -> ExtScalar {
        ExtScalar::from_rat(RatFun::zero(0, self.n), Some(self.ctx.clone()))
    }

    fn konst(&self, q: Rational) -> ExtScalar {
        ExtScalar::from_rat(RatFun::constant(0, self.n, q), Some(self.ctx.clone()))
    }

    /// Fiber coordinate `yⁱ` as a polynomial.
    pub fn y_poly(&self, i: usize) -> MultiPoly {
        MultiPoly::var(0, self.n, Var::Fiber(i))
    }
}

#[derive(Clone)]
pub struct ExactJet {
    env: Arc<ExactEnv>,
    lx: Arc<Layout>,
    c: Vec<ExtScalar>,
}

fn expect_same<T>(r: std::result::Result<T, kropina_ratfun::RatFunError>) -> T {
    // all jets of one environment share a context, so a mismatch is a bug
    r.expect("exact jets from different environments")
}

impl ExactJet {
    pub fn constant(env: &Arc<ExactEnv>, ox: usize, q: Rational) -> Self {
        let lx = Layout::get(env.n, ox);
        let mut c = vec![env.zero(); lx.len()];
        c[0] = env.konst(q);
        ExactJet { env: env.clone(), lx, c }
    }

    /// `x⁰ᵢ + δxᵢ`.
    pub fn x_coordinate(env: &Arc<ExactEnv>, ox: usize, i: usize) -> Self {
        let mut j = ExactJet::constant(env, ox, env.x0[i].clone());
        if ox >= 1 {
            let k = j.lx.var_index(i);
            j.c[k] = env.konst(Rational::one());
        }
        j
    }

    /// The fiber coordinate `yⁱ` (independent of `x`).
    pub fn y_coordinate(env: &Arc<ExactEnv>, ox: usize, i: usize) -> Self {
        let mut j = ExactJet::constant(env, ox, Rational::zero());
        j.c[0] = ExtScalar::from_rat(RatFun::from_poly(env.y_poly(i)), Some(env.ctx.clone()));
        j
    }

    /// A jet with the given primal and vanishing higher coefficients.
    pub fn from_ext(env: &Arc<ExactEnv>, ox: usize, e: ExtScalar) -> Self {
        let mut j = ExactJet::constant(env, ox, Rational::zero());
        j.c[0] = expect_same(e.with_context(env.ctx.clone()));
        j
    }

    pub fn env(&self) -> &Arc<ExactEnv> {
        &self.env
    }

    pub fn x_order(&self) -> usize {
        self.lx.order
    }

    /// Value at the base point as a function of `y`.
    pub fn primal(&self) -> &ExtScalar {
        &self.c[0]
    }

    pub fn coeff(&self, a: &[u8]) -> Option<&ExtScalar> {
        self.lx.index_of(a).map(|i| &self.c[i])
    }

    /// Rationality in `y` of the value at the base point.
    pub fn rationality(&self) -> Certificate {
        self.c[0].certificate()
    }

    /// Exact value at `(x0, y0)` as `(a, b, R)` meaning `a + b·√R`.
    pub fn exact_value(&self) -> Result<(Rational, Rational, Rational)> {
        Ok(self.c[0].eval_parts(&self.env.y0)?)
    }

    fn truncated(&self, ox: usize) -> ExactJet {
        if ox == self.lx.order {
            return self.clone();
        }
        let lx = Layout::get(self.env.n, ox);
        let c = self.c[..lx.len()].to_vec();
        ExactJet { env: self.env.clone(), lx, c }
    }

    fn common(&self, other: &ExactJet) -> usize {
        debug_assert!(Arc::ptr_eq(&self.env, &other.env) || self.env.n == other.env.n);
        self.lx.order.min(other.lx.order)
    }

    fn zip_with(&self, other: &ExactJet, f: impl Fn(&ExtScalar, &ExtScalar) -> ExtScalar) -> ExactJet {
        let ox = self.common(other);
        let lx = Layout::get(self.env.n, ox);
        let c = (0..lx.len()).map(|i| f(&self.c[i], &other.c[i])).collect();
        ExactJet { env: self.env.clone(), lx, c }
    }

    fn mul_jet(&self, other: &ExactJet) -> ExactJet {
        let ox = self.common(other);
        let lx = Layout::get(self.env.n, ox);
        let mut out: Vec<Option<ExtScalar>> = vec![None; lx.len()];
        for &(i, j, k) in &lx.pairs {
            let (a, b) = (&self.c[i as usize], &other.c[j as usize]);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            let p = expect_same(a.checked_mul(b));
            let slot = &mut out[k as usize];
            *slot = Some(match slot.take() {
                None => p,
                Some(s) => expect_same(s.checked_add(&p)),
            });
        }
        let c = out.into_iter().map(|v| v.unwrap_or_else(|| self.env.zero())).collect();
        ExactJet { env: self.env.clone(), lx, c }
    }

    fn map(&self, f: impl Fn(&ExtScalar) -> ExtScalar) -> ExactJet {
        ExactJet {
            env: self.env.clone(),
            lx: self.lx.clone(),
            c: self.c.iter().map(f).collect(),
        }
    }

    /// `Σ_k coeffs[k]·u^k` for a jet `u` with zero primal.
    fn series(&self, u: &ExactJet, coeffs: &[Rational]) -> ExactJet {
        let ox = u.lx.order;
        let k_max = ox.min(coeffs.len() - 1);
        let mut acc = ExactJet::constant(&self.env, ox, coeffs[k_max].clone());
        for k in (0..k_max).rev() {
            acc = acc.mul_jet(u);
            acc.c[0] = expect_same(acc.c[0].checked_add(&self.env.konst(coeffs[k].clone())));
        }
        acc
    }

    /// Splits into primal `a₀` and `u = (self − a₀)/a₀`.
    fn relative_tail(&self) -> Result<(ExtScalar, ExactJet)> {
        let a0 = self.c[0].clone();
        let inv0 = a0.recip().map_err(|_| CoreError::DomainViolation("reciprocal of a jet with zero primal".into()))?;
        let mut u = self.map(|v| expect_same(v.checked_mul(&inv0)));
        u.c[0] = self.env.zero();
        Ok((a0, u))
    }

    fn powi_jet(&self, k: i32) -> Result<ExactJet> {
        let base = if k < 0 { self.try_recip()? } else { self.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = ExactJet::constant(&self.env, self.lx.order, Rational::one());
        let mut p = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_jet(&p);
            }
            k >>= 1;
            if k > 0 {
                p = p.mul_jet(&p);
            }
        }
        Ok(acc)
    }
}

/// `binom(e, k)` for `k = 0..=order`.
fn binomials(e: &Rational, order: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(order + 1);
    let mut b = Rational::one();
    for k in 0..=order {
        if k > 0 {
            let kk = Rational::from_integer((k as i64).into());
            b = b * (e - (&kk - Rational::one())) / kk;
        }
        out.push(b.clone());
    }
    out
}

impl Scalar for ExactJet {
    fn constant_like(&self, c: &Rational) -> Self {
        ExactJet::constant(&self.env, self.lx.order, c.clone())
    }

    fn scale(&self, c: &Rational) -> Self {
        self.map(|v| v.scale(c))
    }

    fn try_recip(&self) -> Result<Self> {
        let (a0, u) = self.relative_tail()?;
        let inv0 = a0.recip()?;
        let minus_one = -Rational::one();
        let coeffs = binomials(&minus_one, self.lx.order);
        let s = self.series(&u, &coeffs);
        Ok(s.map(|v| expect_same(v.checked_mul(&inv0))))
    }

    fn powi(&self, k: i32) -> Result<Self> {
        self.powi_jet(k)
    }

    fn try_powf(&self, e: &Rational) -> Result<Self> {
        if e.is_integer() {
            if let Some(k) = e.to_integer().to_i32() {
                return self.powi_jet(k);
            }
        }
        // y-independent primal with an exact root, e.g. t^(1/2) at t = 9/4
        if let Some(q0) = self.c[0].constant_value() {
            if let Some(lead) = crate::expr::rational_power(&q0, e) {
                let (_, u) = self.relative_tail()?;
                let s = self.series(&u, &binomials(e, self.lx.order));
                return Ok(s.scale(&lead));
            }
        }
        let two = num_bigint::BigInt::from(2);
        if e.denom() != &two {
            return Err(CoreError::ExactBackendUnavailable(format!(
                "power {e} is neither an integer nor a half-integer"
            )));
        }
        let radicand = match self.env.ctx.radicand() {
            Some(r) => RatFun::from_poly(r.clone()),
            None => {
                return Err(CoreError::ExactBackendUnavailable(
                    "half-integer power without a square-root context".into(),
                ))
            }
        };
        if self.c[0].irr_part().is_zero() && self.c[0].rat_part() == &radicand {
            // R^e = R^(e-1/2)·w, then the binomial series in the tail
            let (a0, u) = self.relative_tail()?;
            let k = (e - Rational::new(1.into(), 2.into())).to_integer().to_i32().ok_or_else(|| {
                CoreError::ExactBackendUnavailable(format!("exponent {e} out of range"))
            })?;
            let lead = expect_same(a0.powi(k)?.checked_mul(&ExtScalar::w(self.env.ctx.clone())));
            let s = self.series(&u, &binomials(e, self.lx.order));
            return Ok(s.map(|v| expect_same(v.checked_mul(&lead))));
        }
        Err(CoreError::ExactBackendUnavailable(format!(
            "half-integer power {e} of something other than the radicand"
        )))
    }

    fn apply(&self, f: Func) -> Result<Self> {
        Err(CoreError::ExactBackendUnavailable(format!(
            "{} is not available on the exact backend",
            f.name()
        )))
    }

    fn dx(&self, i: usize) -> Result<Self> {
        if self.lx.order == 0 {
            return Err(CoreError::OrderExhausted("x derivative of an order-0 exact jet".into()));
        }
        let low = Layout::get(self.env.n, self.lx.order - 1);
        let c = (0..low.len())
            .map(|k| {
                let f = Rational::from_integer(((low.mono(k)[i] + 1) as i64).into());
                self.c[self.lx.shift(i, k)].scale(&f)
            })
            .collect();
        Ok(ExactJet {
            env: self.env.clone(),
            lx: low,
            c,
        })
    }

    fn dy(&self, i: usize) -> Result<Self> {
        Ok(self.map(|v| v.diff(Var::Fiber(i))))
    }

    fn value(&self) -> f64 {
        self.c[0].eval_f64(&self.env.y0).unwrap_or(f64::NAN)
    }

    fn vanishes_at_point(&self) -> bool {
        match self.c[0].eval_parts(&self.env.y0) {
            Ok((a, b, r)) => {
                if b.is_zero() {
                    a.is_zero()
                } else {
                    // a + b√r = 0 iff a² = b²r with opposite signs
                    &a * &a == &b * &b * &r && (a.is_zero() || a.is_positive() != b.is_positive())
                }
            }
            Err(_) => false,
        }
    }

    fn is_identically_zero(&self) -> bool {
        self.c.iter().all(|v| v.is_zero())
    }

    fn certificate(&self) -> Option<Certificate> {
        Some(self.c[0].certificate())
    }

    fn pivot_score(&self) -> f64 {
        if self.c[0].is_zero() {
            0.0
        } else {
            self.value().abs().max(f64::MIN_POSITIVE)
        }
    }
}

impl ExactJet {
    /// Truncates to a lower base order.
    pub fn with_x_order(&self, ox: usize) -> ExactJet {
        self.truncated(ox.min(self.lx.order))
    }
}

impl Add for ExactJet {
    type Output = ExactJet;
    fn add(self, rhs: ExactJet) -> ExactJet {
        self.zip_with(&rhs, |a, b| expect_same(a.checked_add(b)))
    }
}

impl<'a> Add<&'a ExactJet> for ExactJet {
    type Output = ExactJet;
    fn add(self, rhs: &'a ExactJet) -> ExactJet {
        self.zip_with(rhs, |a, b| expect_same(a.checked_add(b)))
    }
}

impl Sub for ExactJet {
    type Output = ExactJet;
    fn sub(self, rhs: ExactJet) -> ExactJet {
        self.zip_with(&rhs, |a, b| expect_same(a.checked_sub(b)))
    }
}

impl<'a> Sub<&'a ExactJet> for ExactJet {
    type Output = ExactJet;
    fn sub(self, rhs: &'a ExactJet) -> ExactJet {
        self.zip_with(rhs, |a, b| expect_same(a.checked_sub(b)))
    }
}

impl Mul for ExactJet {
    type Output = ExactJet;
    fn mul(self, rhs: ExactJet) -> ExactJet {
        self.mul_jet(&rhs)
    }
}

impl<'a> Mul<&'a ExactJet> for ExactJet {
    type Output = ExactJet;
    fn mul(self, rhs: &'a ExactJet) -> ExactJet {
        self.mul_jet(rhs)
    }
}

impl Neg for ExactJet {
    type Output = ExactJet;
    fn neg(self) -> ExactJet {
        self.map(|v| -v)
    }
}

impl fmt::Debug for ExactJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExactJet(order {}, primal {})", self.lx.order, self.c[0])
    }
}
