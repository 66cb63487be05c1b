//! Numeric backend: truncated Taylor series in base and fiber coordinates.
//!
//! A [`Jet`] stores Taylor coefficients `∂^(a,b) f / (a! b!)` for every
//! multi-index with `|a| ≤ ox` in `x` and `|b| ≤ oy` in `y`. Binary operations
//! between jets of different orders truncate to the smaller pair of orders.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use kropina_ratfun::Rational;
use num_traits::ToPrimitive;

use crate::error::{CoreError, Result};
use crate::layout::Layout;
use crate::scalar::{pow_taylor, Func, Scalar};

#[derive(Clone)]
pub struct Jet {
    n: usize,
    lx: Arc<Layout>,
    ly: Arc<Layout>,
    c: Vec<f64>,
}

/// Which coordinate a lifted jet represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Seed {
    X(usize),
    Y(usize),
}

fn rat_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl Jet {
    pub fn constant(n: usize, ox: usize, oy: usize, v: f64) -> Self {
        let lx = Layout::get(n, ox);
        let ly = Layout::get(n, oy);
        let mut c = vec![0.0; lx.len() * ly.len()];
        c[0] = v;
        Jet { n, lx, ly, c }
    }

    /// The coordinate function `seed` at value `v`.
    pub fn variable(n: usize, ox: usize, oy: usize, seed: Seed, v: f64) -> Self {
        let mut j = Jet::constant(n, ox, oy, v);
        match seed {
            Seed::X(i) => {
                assert!(i < n, "x index out of range");
                if ox >= 1 {
                    let ny = j.ly.len();
                    let k = j.lx.var_index(i);
                    j.c[k * ny] = 1.0;
                }
            }
            Seed::Y(i) => {
                assert!(i < n, "y index out of range");
                if oy >= 1 {
                    let k = j.ly.var_index(i);
                    j.c[k] = 1.0;
                }
            }
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn x_order(&self) -> usize {
        self.lx.order
    }

    pub fn y_order(&self) -> usize {
        self.ly.order
    }

    pub fn primal(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient of `(x−x₀)^a (y−y₀)^b`.
    pub fn coeff(&self, a: &[u8], b: &[u8]) -> f64 {
        match (self.lx.index_of(a), self.ly.index_of(b)) {
            (Some(i), Some(j)) => self.c[i * self.ly.len() + j],
            _ => 0.0,
        }
    }

    /// Mixed partial derivative `∂^a_x ∂^b_y` at the expansion point.
    pub fn derivative(&self, a: &[u8], b: &[u8]) -> f64 {
        let fact: f64 = a
            .iter()
            .chain(b)
            .map(|&e| (1..=e as u64).product::<u64>() as f64)
            .product();
        self.coeff(a, b) * fact
    }

    fn shape_of(&self, ox: usize, oy: usize) -> (Arc<Layout>, Arc<Layout>) {
        let lx = if ox == self.lx.order { self.lx.clone() } else { Layout::get(self.n, ox) };
        let ly = if oy == self.ly.order { self.ly.clone() } else { Layout::get(self.n, oy) };
        (lx, ly)
    }

    /// Copy truncated to the given orders (which must not exceed the current ones).
    pub fn truncated(&self, ox: usize, oy: usize) -> Jet {
        if ox == self.lx.order && oy == self.ly.order {
            return self.clone();
        }
        let (lx, ly) = self.shape_of(ox, oy);
        let (nx, ny, ny0) = (lx.len(), ly.len(), self.ly.len());
        let mut c = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            c.extend_from_slice(&self.c[i * ny0..i * ny0 + ny]);
        }
        Jet { n: self.n, lx, ly, c }
    }

    fn common(&self, other: &Jet) -> (usize, usize) {
        assert_eq!(self.n, other.n, "jets of different dimension");
        (self.lx.order.min(other.lx.order), self.ly.order.min(other.ly.order))
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let (ox, oy) = self.common(other);
        let a = self.truncated(ox, oy);
        let b = other.truncated(ox, oy);
        let c = a.c.iter().zip(&b.c).map(|(x, y)| f(*x, *y)).collect();
        Jet { c, ..a }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let (ox, oy) = self.common(other);
        let (lx, ly) = self.shape_of(ox, oy);
        let (nx, ny) = (lx.len(), ly.len());
        let (nya, nyb) = (self.ly.len(), other.ly.len());
        // per x-block: 0 = all zero, 1 = only the y-constant term, 2 = general
        let classify = |c: &[f64], stride: usize| -> Vec<u8> {
            (0..nx)
                .map(|i| {
                    let blk = &c[i * stride..i * stride + ny];
                    if blk[1..].iter().any(|v| *v != 0.0) {
                        2
                    } else if blk[0] != 0.0 {
                        1
                    } else {
                        0
                    }
                })
                .collect()
        };
        let ka = classify(&self.c, nya);
        let kb = classify(&other.c, nyb);
        let mut out = vec![0.0; nx * ny];
        for &(i, j, k) in &lx.pairs {
            let (i, j, k) = (i as usize, j as usize, k as usize);
            if ka[i] == 0 || kb[j] == 0 {
                continue;
            }
            let a = &self.c[i * nya..i * nya + ny];
            let b = &other.c[j * nyb..j * nyb + ny];
            let o = &mut out[k * ny..(k + 1) * ny];
            if kb[j] == 1 {
                let s = b[0];
                for (ov, av) in o.iter_mut().zip(a) {
                    *ov += av * s;
                }
            } else if ka[i] == 1 {
                let s = a[0];
                for (ov, bv) in o.iter_mut().zip(b) {
                    *ov += bv * s;
                }
            } else {
                for &(p, q, r) in &ly.pairs {
                    o[r as usize] += a[p as usize] * b[q as usize];
                }
            }
        }
        Jet { n: self.n, lx, ly, c: out }
    }

    /// `Σ coeffs[k]·(self − self₀)^k`, the composition of a scalar function
    /// with known Taylor coefficients.
    pub fn compose(&self, coeffs: &[f64]) -> Jet {
        let mut h = self.clone();
        h.c[0] = 0.0;
        let k_max = (self.lx.order + self.ly.order).min(coeffs.len() - 1);
        let mut acc = Jet { c: vec![0.0; self.c.len()], ..self.clone() };
        acc.c[0] = coeffs[k_max];
        for k in (0..k_max).rev() {
            acc = acc.mul_jet(&h);
            acc.c[0] += coeffs[k];
        }
        acc
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Jet {
        Jet {
            c: self.c.iter().map(|v| f(*v)).collect(),
            ..self.clone()
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi_jet(&self, k: i32) -> Result<Jet> {
        let base = if k < 0 { self.try_recip()? } else { self.clone() };
        let mut k = k.unsigned_abs();
        let mut acc = Jet::constant(self.n, self.lx.order, self.ly.order, 1.0);
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

    /// Real power through the binomial series.
    pub fn powf_jet(&self, e: f64) -> Result<Jet> {
        if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
            return self.powi_jet(e as i32);
        }
        let a0 = self.c[0];
        if a0 <= 0.0 || !a0.is_finite() {
            return Err(CoreError::DomainViolation(format!(
                "non-integer power {e} of a non-positive value {a0}"
            )));
        }
        Ok(self.compose(&pow_taylor(a0, e, self.lx.order + self.ly.order)))
    }

    fn derive(&self, axis_x: bool, v: usize) -> Result<Jet> {
        assert!(v < self.n, "coordinate index out of range");
        let (src, other) = if axis_x { (&self.lx, &self.ly) } else { (&self.ly, &self.lx) };
        if src.order == 0 {
            return Err(CoreError::OrderExhausted(format!(
                "{} derivative of an order-0 jet",
                if axis_x { "x" } else { "y" }
            )));
        }
        let low = Layout::get(self.n, src.order - 1);
        let ny0 = self.ly.len();
        let mut c;
        if axis_x {
            let ny = ny0;
            c = vec![0.0; low.len() * ny];
            for i in 0..low.len() {
                let up = src.shift(v, i);
                let f = (low.mono(i)[v] + 1) as f64;
                for j in 0..ny {
                    c[i * ny + j] = f * self.c[up * ny0 + j];
                }
            }
            Ok(Jet { n: self.n, lx: low, ly: other.clone(), c })
        } else {
            let nx = self.lx.len();
            let ny = low.len();
            c = vec![0.0; nx * ny];
            for i in 0..nx {
                for j in 0..ny {
                    let up = src.shift(v, j);
                    let f = (low.mono(j)[v] + 1) as f64;
                    c[i * ny + j] = f * self.c[i * ny0 + up];
                }
            }
            Ok(Jet { n: self.n, lx: other.clone(), ly: low, c })
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }
}

/// Coordinate jet at a point: primal value of the coordinate, unit slot for
/// its own first derivative.
pub fn lift(x: &[f64], y: &[f64], seed: Seed, ox: usize, oy: usize) -> Result<Jet> {
    if x.len() != y.len() {
        return Err(CoreError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    let v = match seed {
        Seed::X(i) if i < n => x[i],
        Seed::Y(i) if i < n => y[i],
        _ => return Err(CoreError::DomainViolation(format!("seed {seed:?} out of range for n = {n}"))),
    };
    Ok(Jet::variable(n, ox, oy, seed, v))
}

/// `base^exponent` for a real exponent.
pub fn jet_pow(base: &Jet, exponent: f64) -> Result<Jet> {
    base.powf_jet(exponent)
}

impl Scalar for Jet {
    fn constant_like(&self, c: &Rational) -> Self {
        Jet::constant(self.n, self.lx.order, self.ly.order, rat_f64(c))
    }

    fn scale(&self, c: &Rational) -> Self {
        let s = rat_f64(c);
        self.map(|v| v * s)
    }

    fn try_recip(&self) -> Result<Self> {
        let a0 = self.c[0];
        if a0 == 0.0 || !a0.is_finite() {
            return Err(CoreError::DomainViolation("reciprocal of zero".into()));
        }
        Ok(self.compose(&pow_taylor(a0, -1.0, self.lx.order + self.ly.order)))
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
        self.powf_jet(rat_f64(e))
    }

    fn apply(&self, f: Func) -> Result<Self> {
        let a0 = self.c[0];
        let ok = match f {
            Func::Sqrt | Func::Ln => a0 > 0.0,
            _ => a0.is_finite(),
        };
        if !ok {
            return Err(CoreError::DomainViolation(format!("{}({a0}) is undefined", f.name())));
        }
        Ok(self.compose(&f.taylor(a0, self.lx.order + self.ly.order)))
    }

    fn dx(&self, i: usize) -> Result<Self> {
        self.derive(true, i)
    }

    fn dy(&self, i: usize) -> Result<Self> {
        self.derive(false, i)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn vanishes_at_point(&self) -> bool {
        self.c[0] == 0.0
    }

    fn is_identically_zero(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }

    fn pivot_score(&self) -> f64 {
        self.c[0].abs()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip_with(&rhs, |a, b| a + b)
    }
}

impl<'a> Add<&'a Jet> for Jet {
    type Output = Jet;
    fn add(self, rhs: &'a Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip_with(&rhs, |a, b| a - b)
    }
}

impl<'a> Sub<&'a Jet> for Jet {
    type Output = Jet;
    fn sub(self, rhs: &'a Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl<'a> Mul<&'a Jet> for Jet {
    type Output = Jet;
    fn mul(self, rhs: &'a Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.map(|v| -v)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet(n={}, orders=({}, {}), value={})",
            self.n, self.lx.order, self.ly.order, self.c[0]
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(i: usize, v: f64) -> Jet {
        Jet::variable(2, 0, 4, Seed::Y(i), v)
    }

    #[test]
    fn lift_coordinate() {
        let j = lift(&[0.0, 0.0], &[1.0, 2.0], Seed::Y(1), 2, 4).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.derivative(&[0, 0], &[0, 1]), 1.0);
        assert_eq!(j.derivative(&[0, 0], &[1, 0]), 0.0);
        assert_eq!(j.derivative(&[1, 0], &[0, 0]), 0.0);
    }

    #[test]
    fn product_and_power_slots() {
        let p = y(0, 0.3) * y(1, -0.7);
        assert_eq!(p.derivative(&[0, 0], &[1, 1]), 1.0);
        let q = y(0, 0.0).powi(4).unwrap();
        assert_eq!(q.derivative(&[0, 0], &[4, 0]), 24.0);
    }

    #[test]
    fn binomial_series() {
        let c = Jet::constant(2, 2, 4, 4.0);
        let r = jet_pow(&c, 0.5).unwrap();
        assert_eq!(r.value(), 2.0);
        assert!(r.coeffs()[1..].iter().all(|v| *v == 0.0));
        let one_plus = y(0, 0.0) + &y(0, 0.0).one_like();
        let s = jet_pow(&one_plus, 0.5).unwrap();
        assert!((s.derivative(&[0, 0], &[1, 0]) - 0.5).abs() < 1e-15);
        assert!(matches!(jet_pow(&y(0, -1.0), 0.5), Err(CoreError::DomainViolation(_))));
    }

    #[test]
    fn mixed_orders_truncate() {
        let a = Jet::variable(2, 2, 4, Seed::X(0), 1.0);
        let b = Jet::variable(2, 1, 2, Seed::Y(0), 1.0);
        let p = a * &b;
        assert_eq!((p.x_order(), p.y_order()), (1, 2));
        assert_eq!(p.derivative(&[1, 0], &[1, 0]), 1.0);
    }

    #[test]
    fn order_exhaustion_is_an_error() {
        let a = Jet::constant(2, 0, 1, 1.0);
        assert!(a.dx(0).is_err());
        assert!(a.dy(0).unwrap().dy(0).is_err());
    }
}
