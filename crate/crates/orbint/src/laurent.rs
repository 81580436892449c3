//! Exact Laurent polynomials in the formal symbol u = q^s.
//!
//! Every orbital integral in this crate is a finite sum of integer powers of
//! q^s with rational coefficients; this module is their carrier. The variable
//! substitution X = -q^{-2s} used by the combinatorial formulas is provided by
//! [`LaurentPoly::from_x_series`], the prefactor (-q^s)^{-r} by
//! [`sign_prefactor`], and the functional-equation reflection s -> -s by
//! [`LaurentPoly::reflect`].
//!
//! Coefficients are exact rationals. Intermediate germ arithmetic divides by
//! q - 1, so rational coefficients genuinely occur mid-pipeline; every final
//! orbital integral is asserted integral before being reported.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, Zero};

use crate::error::{Error, Result};

/// Shorthand for an exact rational coefficient.
pub type Rat = BigRational;

/// Exact rational from an integer.
pub fn rat(n: i128) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact rational n/d.
pub fn ratio(n: i128, d: i128) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A Laurent polynomial sum c_k u^k with u = q^s, exact rational c_k.
///
/// Canonical form: no stored coefficient is zero.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, Rat>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly { coeffs: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::monomial(rat(1), 0)
    }

    /// c * u^k.
    pub fn monomial(c: Rat, k: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        LaurentPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of u^k (zero if absent).
    pub fn coeff(&self, k: i64) -> Rat {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rat::zero)
    }

    /// Sorted (exponent, coefficient) view.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            let e = coeffs.entry(*k).or_insert_with(Rat::zero);
            *e += c;
            if e.is_zero() {
                coeffs.remove(k);
            }
        }
        LaurentPoly { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(k, c)| (*k, -c.clone())).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for (k1, c1) in &self.coeffs {
            for (k2, c2) in &other.coeffs {
                let e = coeffs.entry(k1 + k2).or_insert_with(Rat::zero);
                *e += c1 * c2;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        LaurentPoly { coeffs }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LaurentPoly { coeffs: self.coeffs.iter().map(|(k, a)| (*k, a * c)).collect() }
    }

    /// Substitute X = -q^{-2s}: a term c X^m becomes c (-1)^m u^{-2m}.
    pub fn from_x_series<I: IntoIterator<Item = (Rat, i64)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (c, m) in terms {
            let sign = if m.rem_euclid(2) == 0 { rat(1) } else { rat(-1) };
            p = p.add(&Self::monomial(c * sign, -2 * m));
        }
        p
    }

    /// Evaluation at u = 1 (i.e. s = 0).
    pub fn central_value(&self) -> Rat {
        self.coeffs.values().fold(Rat::zero(), |a, c| a + c)
    }

    /// The coefficient of log(q) in d/ds at s = 0, i.e. sum of k * c_k.
    ///
    /// The actual central derivative is this number times log(q); all
    /// derivative identities in this crate compare these coefficients.
    pub fn central_derivative_coeff(&self) -> Rat {
        self.coeffs
            .iter()
            .fold(Rat::zero(), |a, (k, c)| a + c * rat(*k as i128))
    }

    /// Substitute u -> u^{-1} (i.e. s -> -s).
    pub fn reflect(&self) -> Self {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(k, c)| (-*k, c.clone())).collect() }
    }

    /// True if every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    /// Central value as an exact integer; errors if non-integral.
    pub fn central_value_int(&self) -> Result<i128> {
        rat_to_i128(&self.central_value())
    }

    /// Central derivative coefficient as an exact integer; errors if non-integral.
    pub fn central_derivative_int(&self) -> Result<i128> {
        rat_to_i128(&self.central_derivative_coeff())
    }

    /// Serialization as sorted (exponent, numerator, denominator) triples.
    pub fn to_triples(&self) -> Vec<(i64, String, String)> {
        self.coeffs
            .iter()
            .map(|(k, c)| (*k, c.numer().to_string(), c.denom().to_string()))
            .collect()
    }
}

/// (-q^s)^{-r} = (-1)^r u^{-r}.
pub fn sign_prefactor(r: i64) -> LaurentPoly {
    let sign = if r.rem_euclid(2) == 0 { rat(1) } else { rat(-1) };
    LaurentPoly::monomial(sign, -r)
}

/// Inverse of the prefactor, (-1)^r u^{r}.
pub fn sign_prefactor_inv(r: i64) -> LaurentPoly {
    let sign = if r.rem_euclid(2) == 0 { rat(1) } else { rat(-1) };
    LaurentPoly::monomial(sign, r)
}

fn rat_to_i128(c: &Rat) -> Result<i128> {
    if !c.is_integer() {
        return Err(Error::Internal(format!("expected integer, got {c}")));
    }
    let n = c.to_integer();
    let digits = n.abs().to_string();
    digits
        .parse::<i128>()
        .map(|v| if n.is_negative() { -v } else { v })
        .map_err(|_| Error::Internal(format!("integer out of range: {n}")))
}

impl fmt::Display for LaurentPoly {
    /// Textual form "c u^k + ..." with exponents ascending.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.coeffs {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} u")?,
                _ => write!(f, "{c} u^{k}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(k: i64) -> LaurentPoly {
        LaurentPoly::monomial(rat(1), k)
    }

    #[test]
    fn ring_identities() {
        // (u + 1)(u - 1) = u^2 - 1
        let p = u(1).add(&u(0));
        let q = u(1).sub(&u(0));
        assert_eq!(p.mul(&q), u(2).sub(&u(0)));
        // 0 + p = p
        assert_eq!(LaurentPoly::zero().add(&p), p);
        // u^{-1} * u = 1
        assert_eq!(u(-1).mul(&u(1)), LaurentPoly::one());
    }

    #[test]
    fn x_substitution() {
        // X^{-1} = -q^{2s} = -u^2
        assert_eq!(
            LaurentPoly::from_x_series([(rat(1), -1)]),
            LaurentPoly::monomial(rat(-1), 2)
        );
        // X^0 = 1
        assert_eq!(LaurentPoly::from_x_series([(rat(1), 0)]), LaurentPoly::one());
        // X + X^{-1} = -u^{-2} - u^2
        let p = LaurentPoly::from_x_series([(rat(1), 1), (rat(1), -1)]);
        assert_eq!(p, LaurentPoly::monomial(rat(-1), -2).add(&LaurentPoly::monomial(rat(-1), 2)));
    }

    #[test]
    fn x_substitution_is_multiplicative() {
        for a in -3i64..=3 {
            for b in -3i64..=3 {
                let xa = LaurentPoly::from_x_series([(rat(1), a)]);
                let xb = LaurentPoly::from_x_series([(rat(1), b)]);
                let xab = LaurentPoly::from_x_series([(rat(1), a + b)]);
                assert_eq!(xa.mul(&xb), xab);
            }
        }
    }

    #[test]
    fn prefactor() {
        assert_eq!(sign_prefactor(1), LaurentPoly::monomial(rat(-1), -1));
        assert_eq!(sign_prefactor(0), LaurentPoly::one());
        assert_eq!(sign_prefactor(4), LaurentPoly::monomial(rat(1), -4));
        for r in -5i64..=5 {
            assert_eq!(sign_prefactor(r).mul(&sign_prefactor_inv(r)), LaurentPoly::one());
        }
    }

    #[test]
    fn central_values() {
        assert_eq!(u(-1).central_value(), rat(1));
        // -u^2 - u^{-2} + 2 has central value 0
        let p = u(2).neg().add(&u(-2).neg()).add(&LaurentPoly::monomial(rat(2), 0));
        assert_eq!(p.central_value(), rat(0));
    }

    #[test]
    fn derivative_coeffs() {
        assert_eq!(u(1).central_derivative_coeff(), rat(1));
        assert_eq!(u(1).add(&u(-1)).central_derivative_coeff(), rat(0));
        // u^2 - 3 u^{-1}: 2*1 + (-1)*(-3) = 5
        let p = u(2).add(&LaurentPoly::monomial(rat(-3), -1));
        assert_eq!(p.central_derivative_coeff(), rat(5));
    }

    #[test]
    fn reflection() {
        assert_eq!(u(2).reflect(), u(-2));
        assert_eq!(LaurentPoly::one().reflect(), LaurentPoly::one());
        let p = LaurentPoly::monomial(rat(2), 1).add(&LaurentPoly::monomial(rat(-1), -3));
        let q = LaurentPoly::monomial(rat(2), -1).add(&LaurentPoly::monomial(rat(-1), 3));
        assert_eq!(p.reflect(), q);
        // involution, central value invariance, derivative antisymmetry
        for p in [p, u(3), LaurentPoly::zero()] {
            assert_eq!(p.reflect().reflect(), p);
            assert_eq!(p.reflect().central_value(), p.central_value());
            assert_eq!(
                p.reflect().central_derivative_coeff(),
                -p.central_derivative_coeff()
            );
        }
    }

    #[test]
    fn display_ascending() {
        let p = u(2).sub(&u(0));
        assert_eq!(p.to_string(), "-1 + 1 u^2");
    }
}
