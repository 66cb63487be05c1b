//! Packed exponent vectors.
//!
//! A monomial stores up to [`MAX_VARS`] exponents of at most 255 each, one
//! byte per variable, with variable 0 in the most significant byte. Ordering
//! is graded lexicographic: total degree first, then lexicographic with the
//! lower variable index more significant. Base variables are laid out before
//! fiber variables, so `x¹ > … > xⁿ > y¹ > … > yⁿ` inside one degree.

use std::fmt;

/// Maximum number of variables a [`Monomial`] can hold.
pub const MAX_VARS: usize = 16;

/// Largest exponent a single variable may carry.
pub const MAX_EXPONENT: u32 = 255;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial {
    // field order matters: derived Ord compares degree first
    degree: u32,
    packed: u128,
}

#[inline]
fn shift(var: usize) -> u32 {
    debug_assert!(var < MAX_VARS);
    8 * (MAX_VARS - 1 - var) as u32
}

#[inline]
fn byte_sum(packed: u128) -> u32 {
    packed.to_be_bytes().iter().map(|&b| b as u32).sum()
}

impl Monomial {
    /// The empty monomial `1`.
    pub const fn one() -> Self {
        Monomial {
            degree: 0,
            packed: 0,
        }
    }

    /// Builds a monomial from an exponent slice.
    ///
    /// Panics if there are more than [`MAX_VARS`] entries or an exponent
    /// exceeds [`MAX_EXPONENT`].
    pub fn from_exponents(exps: &[u32]) -> Self {
        assert!(exps.len() <= MAX_VARS, "too many variables: {}", exps.len());
        let mut packed = 0u128;
        let mut degree = 0;
        for (var, &e) in exps.iter().enumerate() {
            assert!(e <= MAX_EXPONENT, "exponent {e} out of range");
            packed |= (e as u128) << shift(var);
            degree += e;
        }
        Monomial { degree, packed }
    }

    /// The monomial consisting of a single variable to the first power.
    pub fn var(var: usize) -> Self {
        assert!(var < MAX_VARS);
        Monomial {
            degree: 1,
            packed: 1u128 << shift(var),
        }
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    #[inline]
    pub fn exponent(&self, var: usize) -> u32 {
        ((self.packed >> shift(var)) & 0xff) as u32
    }

    pub fn exponents(&self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|v| self.exponent(v)).collect()
    }

    /// Product of two monomials. Panics on exponent overflow.
    #[inline]
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let packed = self
            .packed
            .checked_add(other.packed)
            .expect("monomial exponent overflow");
        let degree = self.degree + other.degree;
        assert_eq!(byte_sum(packed), degree, "monomial exponent overflow");
        Monomial { degree, packed }
    }

    /// Whether `self` divides `other`.
    #[inline]
    pub fn divides(&self, other: &Monomial) -> bool {
        if self.degree > other.degree {
            return false;
        }
        let a = self.packed.to_be_bytes();
        let b = other.packed.to_be_bytes();
        a.iter().zip(b.iter()).all(|(x, y)| x <= y)
    }

    /// `self / other` if the quotient is a monomial.
    #[inline]
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        if other.divides(self) {
            Some(Monomial {
                degree: self.degree - other.degree,
                packed: self.packed - other.packed,
            })
        } else {
            None
        }
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let a = self.packed.to_be_bytes();
        let b = other.packed.to_be_bytes();
        let mut out = [0u8; 16];
        for i in 0..16 {
            out[i] = a[i].min(b[i]);
        }
        let packed = u128::from_be_bytes(out);
        Monomial {
            degree: byte_sum(packed),
            packed,
        }
    }

    /// Lowers the exponent of `var` by one, returning the old exponent, or
    /// `None` if the variable does not occur.
    pub fn lower(&self, var: usize) -> Option<(u32, Monomial)> {
        let e = self.exponent(var);
        if e == 0 {
            return None;
        }
        Some((
            e,
            Monomial {
                degree: self.degree - 1,
                packed: self.packed - (1u128 << shift(var)),
            },
        ))
    }

    /// Integer power of a monomial.
    pub fn pow(&self, k: u32) -> Monomial {
        let mut out = Monomial::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Square root if every exponent is even.
    pub fn sqrt(&self) -> Option<Monomial> {
        let bytes = self.packed.to_be_bytes();
        if bytes.iter().any(|b| b % 2 != 0) {
            return None;
        }
        let mut out = [0u8; 16];
        for i in 0..16 {
            out[i] = bytes[i] / 2;
        }
        Some(Monomial {
            degree: self.degree / 2,
            packed: u128::from_be_bytes(out),
        })
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monomial{:?}", self.exponents(MAX_VARS))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        let x1 = Monomial::var(0);
        let x2 = Monomial::var(1);
        let x1sq = x1.mul(&x1);
        // degree dominates
        assert!(x1sq > x1);
        assert!(x2.mul(&x2) > x1);
        // lex inside one degree, lower index more significant
        assert!(x1 > x2);
        assert!(x1.mul(&x2) < x1sq);
        assert!(Monomial::one() < x2);
    }

    #[test]
    fn div_and_gcd() {
        let a = Monomial::from_exponents(&[2, 1, 0, 3]);
        let b = Monomial::from_exponents(&[1, 1, 0, 0]);
        assert!(b.divides(&a));
        assert!(!a.divides(&b));
        assert_eq!(a.checked_div(&b), Some(Monomial::from_exponents(&[1, 0, 0, 3])));
        assert_eq!(a.gcd(&Monomial::from_exponents(&[5, 0, 1, 1])), Monomial::from_exponents(&[2, 0, 0, 1]));
        assert_eq!(a.lower(3), Some((3, Monomial::from_exponents(&[2, 1, 0, 2]))));
        assert_eq!(a.lower(2), None);
    }

    #[test]
    #[should_panic(expected = "overflow")]
    fn overflow_is_caught() {
        let a = Monomial::from_exponents(&[200]);
        let _ = a.mul(&a);
    }
}
