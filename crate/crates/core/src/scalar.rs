//! The scalar interface shared by the numeric and exact backends.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use kropina_ratfun::{Certificate, Rational};
use num_traits::{One, Zero};

use crate::error::Result;

/// Elementary functions available to coefficient expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            _ => return None,
        })
    }

    /// Taylor coefficients `f⁽ᵏ⁾(a)/k!` for `k = 0..=order`.
    pub fn taylor(self, a: f64, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        match self {
            Func::Sqrt => return pow_taylor(a, 0.5, order),
            Func::Exp => {
                let e = a.exp();
                let mut fact = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    out.push(e / fact);
                }
            }
            Func::Ln => {
                out.push(a.ln());
                for k in 1..=order {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    out.push(sign / (k as f64 * a.powi(k as i32)));
                }
            }
            Func::Sin | Func::Cos => {
                let (s, c) = a.sin_cos();
                // derivatives cycle sin, cos, -sin, -cos
                let cycle = if self == Func::Sin { [s, c, -s, -c] } else { [c, -s, -c, s] };
                let mut fact = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    out.push(cycle[k % 4] / fact);
                }
            }
        }
        out
    }
}

/// Taylor coefficients of `t ↦ t^e` at `a`: `binom(e, k)·a^(e−k)`.
pub fn pow_taylor(a: f64, e: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 0..=order {
        if k > 0 {
            binom *= (e - (k as f64 - 1.0)) / k as f64;
        }
        out.push(if binom == 0.0 { 0.0 } else { binom * a.powf(e - k as f64) });
    }
    out
}

/// A commutative ring element with partial derivatives in base (`x`) and
/// fiber (`y`) coordinates.
///
/// Binary operators take the right operand by reference so that generic
/// code can avoid cloning both sides.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Sized
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    /// A constant with the same shape (dimension, orders, context) as `self`.
    fn constant_like(&self, c: &Rational) -> Self;

    /// Multiplies by an exact constant.
    fn scale(&self, c: &Rational) -> Self;

    fn try_recip(&self) -> Result<Self>;

    fn powi(&self, k: i32) -> Result<Self>;

    /// Real power. Backends may refuse exponents they cannot represent.
    fn try_powf(&self, e: &Rational) -> Result<Self>;

    /// Elementary function; the exact backend refuses all of them.
    fn apply(&self, f: Func) -> Result<Self>;

    /// `∂/∂xⁱ`.
    fn dx(&self, i: usize) -> Result<Self>;

    /// `∂/∂yⁱ`.
    fn dy(&self, i: usize) -> Result<Self>;

    /// Value at the evaluation point as a float.
    fn value(&self) -> f64;

    /// Whether the value at the evaluation point is zero (exactly for the
    /// exact backend, to roundoff for the numeric one).
    fn vanishes_at_point(&self) -> bool;

    /// Whether the whole element is identically zero. For the numeric
    /// backend this means every stored coefficient is zero.
    fn is_identically_zero(&self) -> bool;

    /// Preference for choosing a pivot; larger is better, zero forbids.
    fn pivot_score(&self) -> f64;

    /// Rationality certificate in `y`, when the backend can decide it.
    fn certificate(&self) -> Option<Certificate> {
        None
    }

    fn zero_like(&self) -> Self {
        self.constant_like(&Rational::zero())
    }

    fn one_like(&self) -> Self {
        self.constant_like(&Rational::one())
    }

    fn int_like(&self, k: i64) -> Self {
        self.constant_like(&Rational::from_integer(k.into()))
    }

    fn scale_int(&self, k: i64) -> Self {
        self.scale(&Rational::from_integer(k.into()))
    }

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * &rhs.try_recip()?)
    }

    fn square(&self) -> Self {
        self.clone() * self
    }
}

/// Sum of an iterator of scalars, starting from `zero`.
pub fn sum<S: Scalar, I: IntoIterator<Item = S>>(zero: &S, items: I) -> S {
    let mut acc: Option<S> = None;
    for it in items {
        acc = Some(match acc {
            None => it,
            Some(a) => a + &it,
        });
    }
    acc.unwrap_or_else(|| zero.zero_like())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_tables() {
        let s = Func::Sqrt.taylor(4.0, 2);
        assert!((s[0] - 2.0).abs() < 1e-15);
        assert!((s[1] - 0.25).abs() < 1e-15);
        assert!((s[2] + 1.0 / 64.0).abs() < 1e-15);
        let l = Func::Ln.taylor(2.0, 3);
        assert!((l[3] - 1.0 / 24.0).abs() < 1e-15);
        let c = Func::Cos.taylor(0.0, 4);
        assert_eq!(c, vec![1.0, 0.0, -0.5, 0.0, 1.0 / 24.0]);
        // integer powers terminate
        assert_eq!(pow_taylor(3.0, 2.0, 4), vec![9.0, 6.0, 1.0, 0.0, 0.0]);
    }
}
