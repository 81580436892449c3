//! Truncated Laurent series over a residue field.
//!
//! A [`Series`] value represents an element of K((pi)) known modulo pi^prec:
//! coefficients are stored densely on [ord, ord+len) and are implicitly zero
//! on [ord+len, prec). Exact values (integers, monomials) carry the sentinel
//! precision [`EXACT`]. Every operation propagates the tightest provable
//! precision; a query whose answer is not determined at the current precision
//! returns a `PrecisionUnderflow` error rather than guessing.

use crate::error::{Error, Result};
use crate::ff::ResidueField;

/// Sentinel precision for exactly known values. Kept far from i64::MAX so
/// that shifted precisions never overflow.
pub const EXACT: i64 = i64::MAX / 4;

/// Precision arithmetic that starts from EXACT stays astronomically large;
/// anything above this threshold is normalized back to EXACT.
fn clamp_prec(p: i64) -> i64 {
    if p >= EXACT / 2 {
        EXACT
    } else {
        p
    }
}

#[derive(Clone, PartialEq)]
pub struct Series<K: ResidueField> {
    /// Exponent of coeffs[0].
    ord: i64,
    /// Known modulo pi^prec.
    prec: i64,
    /// Dense coefficients; no leading or trailing zeros.
    coeffs: Vec<K>,
    /// A zero of K, kept so empty series still know their field.
    zero: K,
}

impl<K: ResidueField> std::fmt::Debug for Series<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return if self.prec >= EXACT / 2 {
                write!(f, "0")
            } else {
                write!(f, "O(pi^{})", self.prec)
            };
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{:?}*pi^{}", c, self.ord + i as i64)?;
            }
        }
        if self.prec < EXACT / 2 {
            write!(f, " + O(pi^{})", self.prec)?;
        }
        Ok(())
    }
}

impl<K: ResidueField> Series<K> {
    fn normalized(mut ord: i64, prec: i64, mut coeffs: Vec<K>, zero: K) -> Self {
        while coeffs.first().is_some_and(|c| c.is_zero()) {
            coeffs.remove(0);
            ord += 1;
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.len() as i64 > prec.saturating_sub(ord) {
            coeffs.truncate(prec.saturating_sub(ord).max(0) as usize);
            while coeffs.last().is_some_and(|c| c.is_zero()) {
                coeffs.pop();
            }
        }
        if coeffs.is_empty() {
            ord = prec;
        }
        Series { ord, prec, coeffs, zero }
    }

    /// The zero of K((pi)), exact.
    pub fn zero(zero: K) -> Self {
        Series { ord: EXACT, prec: EXACT, coeffs: Vec::new(), zero }
    }

    /// Zero known only modulo pi^prec.
    pub fn zero_to_prec(zero: K, prec: i64) -> Self {
        Series { ord: prec, prec, coeffs: Vec::new(), zero }
    }

    /// c * pi^k, exact.
    pub fn monomial(c: K, k: i64) -> Self {
        let zero = c.zero_like();
        if c.is_zero() {
            return Self::zero(zero);
        }
        Series { ord: k, prec: EXACT, coeffs: vec![c], zero }
    }

    pub fn one(zero: K) -> Self {
        Self::monomial(zero.one_like(), 0)
    }

    /// pi^k, exact.
    pub fn pi_pow(zero: K, k: i64) -> Self {
        Self::monomial(zero.one_like(), k)
    }

    /// Build from coefficients starting at exponent ord, exact up to prec.
    pub fn from_coeffs(ord: i64, prec: i64, coeffs: Vec<K>, zero: K) -> Self {
        Self::normalized(ord, prec, coeffs, zero)
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn zero_elem(&self) -> K {
        self.zero.clone()
    }

    /// True if no nonzero coefficient is stored (zero at current precision).
    pub fn is_zero_at_prec(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True if this is the exact zero.
    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec >= EXACT / 2
    }

    /// Valuation: Ok(None) means provably +infinity (exact zero).
    pub fn val(&self) -> Result<Option<i64>> {
        if !self.coeffs.is_empty() {
            return Ok(Some(self.ord));
        }
        if self.is_exact_zero() {
            return Ok(None);
        }
        Err(Error::PrecisionUnderflow(format!(
            "valuation of a series that vanishes to precision {}",
            self.prec
        )))
    }

    /// Valuation of a value required to be nonzero.
    pub fn val_nonzero(&self) -> Result<i64> {
        match self.val()? {
            Some(v) => Ok(v),
            None => Err(Error::Domain("valuation of exact zero".into())),
        }
    }

    /// Lower bound for the valuation (ord for nonzero, prec for zero-at-prec).
    pub fn val_floor(&self) -> i64 {
        self.ord
    }

    /// Coefficient of pi^k; errors if k is at or beyond the precision.
    pub fn coeff(&self, k: i64) -> Result<K> {
        if k >= self.prec {
            return Err(Error::PrecisionUnderflow(format!(
                "coefficient of pi^{k} beyond precision {}",
                self.prec
            )));
        }
        if k < self.ord || k >= self.ord + self.coeffs.len() as i64 {
            return Ok(self.zero.clone());
        }
        Ok(self.coeffs[(k - self.ord) as usize].clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        if self.coeffs.is_empty() {
            return other.truncate(prec);
        }
        if other.coeffs.is_empty() {
            return self.truncate(prec);
        }
        let lo = self.ord.min(other.ord);
        let hi = (self.ord + self.coeffs.len() as i64).max(other.ord + other.coeffs.len() as i64);
        let hi = hi.min(prec);
        let mut coeffs = Vec::with_capacity((hi - lo).max(0) as usize);
        for k in lo..hi {
            let a = if k >= self.ord && k < self.ord + self.coeffs.len() as i64 {
                self.coeffs[(k - self.ord) as usize].clone()
            } else {
                self.zero.clone()
            };
            let b = if k >= other.ord && k < other.ord + other.coeffs.len() as i64 {
                other.coeffs[(k - other.ord) as usize].clone()
            } else {
                self.zero.clone()
            };
            coeffs.push(a.add(&b));
        }
        Self::normalized(lo, prec, coeffs, self.zero.clone())
    }

    pub fn neg(&self) -> Self {
        Series {
            ord: self.ord,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            zero: self.zero.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        // product known modulo pi^min(prec_a + ord_b, prec_b + ord_a)
        let prec = clamp_prec(
            (self.prec.saturating_add(other.ord))
                .min(other.prec.saturating_add(self.ord)),
        );
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero_to_prec(self.zero.clone(), prec);
        }
        let ord = self.ord + other.ord;
        let len = (self.coeffs.len() + other.coeffs.len() - 1) as i64;
        let len = len.min(prec.saturating_sub(ord)).max(0) as usize;
        let mut coeffs = vec![self.zero.clone(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = coeffs[i + j].add(&a.mul(b));
            }
        }
        Self::normalized(ord, prec, coeffs, self.zero.clone())
    }

    /// Multiply by pi^k.
    pub fn shift(&self, k: i64) -> Self {
        Series {
            ord: clamp_prec(self.ord.saturating_add(k)),
            prec: clamp_prec(self.prec.saturating_add(k)),
            coeffs: self.coeffs.clone(),
            zero: self.zero.clone(),
        }
    }

    pub fn scale(&self, c: &K) -> Self {
        if c.is_zero() {
            return Self::zero_to_prec(self.zero.clone(), self.prec);
        }
        Series {
            ord: self.ord,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect(),
            zero: self.zero.clone(),
        }
    }

    /// Inverse of a unit-leading series. If self has valuation v and precision
    /// P, the result is known modulo pi^(P - 2v).
    pub fn inverse(&self) -> Result<Self> {
        let v = self.val()?.ok_or_else(|| Error::NonUnit("inverse of zero".into()))?;
        let lead = self.coeffs[0].clone();
        let lead_inv = lead
            .inv()
            .ok_or_else(|| Error::NonUnit("leading coefficient not invertible".into()))?;
        // the inverse of an exact monomial is exact
        if self.prec >= EXACT / 2 && self.coeffs.len() == 1 {
            return Ok(Self::monomial(lead_inv, -v));
        }
        // u = pi^{-v} * self is a unit series; invert it coefficient by coefficient.
        let n = if self.prec >= EXACT / 2 {
            // exact input: invert to a generous default window
            (self.coeffs.len() as i64 + 96) as usize
        } else {
            (self.prec - v).max(0) as usize
        };
        let mut w = vec![self.zero.clone(); n];
        if n > 0 {
            w[0] = lead_inv.clone();
        }
        for m in 1..n {
            // sum_{i=1..m} u_i w_{m-i} = -u_0 w_m
            let mut acc = self.zero.clone();
            for i in 1..=m.min(self.coeffs.len() - 1) {
                acc = acc.add(&self.coeffs[i].mul(&w[m - i]));
            }
            w[m] = lead_inv.mul(&acc.neg());
        }
        let prec = if self.prec >= EXACT / 2 {
            -v + n as i64
        } else {
            self.prec - 2 * v
        };
        Ok(Self::normalized(-v, prec, w, self.zero.clone()))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Truncate to a lower precision.
    pub fn truncate(&self, prec: i64) -> Self {
        if prec >= self.prec {
            return self.clone();
        }
        Self::normalized(self.ord, prec, self.coeffs.clone(), self.zero.clone())
    }

    /// Drop all terms with exponent >= k (reduction modulo pi^k O).
    pub fn reduce_mod(&self, k: i64) -> Self {
        let keep = (k - self.ord).clamp(0, self.coeffs.len() as i64) as usize;
        Self::normalized(self.ord, self.prec, self.coeffs[..keep].to_vec(), self.zero.clone())
    }

    /// Declare this series exactly zero (used after exact cancellation in
    /// column reduction, where the algebra guarantees the result).
    pub fn force_zero(&self) -> Self {
        Self::zero(self.zero.clone())
    }

    /// Declare the stored window exact (used for canonical representatives
    /// whose residues are fully determined).
    pub fn to_exact(&self) -> Self {
        if self.coeffs.is_empty() {
            return Self::zero(self.zero.clone());
        }
        if self.prec >= EXACT / 2 {
            return self.clone();
        }
        Series {
            ord: self.ord,
            prec: EXACT,
            coeffs: self.coeffs.clone(),
            zero: self.zero.clone(),
        }
    }

    /// Apply the residue-field conjugation coefficient-wise.
    pub fn conj(&self) -> Self {
        Series {
            ord: self.ord,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
            zero: self.zero.clone(),
        }
    }

    /// Map coefficients into another residue field.
    pub fn map_coeffs<L: ResidueField>(&self, zero: L, f: impl Fn(&K) -> L) -> Series<L> {
        Series {
            ord: self.ord,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(&f).collect(),
            zero,
        }
    }

    /// Equality as elements known modulo pi^min(prec, prec'): both must agree
    /// on all coefficients below the joint precision.
    pub fn eq_at_joint_prec(&self, other: &Self) -> bool {
        self.sub(other).is_zero_at_prec()
    }

    /// Stable key for hashing/dedup: (ord, coefficient encodings).
    pub fn key(&self, enc: impl Fn(&K) -> u64) -> (i64, Vec<u64>) {
        (self.ord, self.coeffs.iter().map(&enc).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::{Fq, FqCtx};
    use std::rc::Rc;

    fn f3() -> Rc<FqCtx> {
        FqCtx::new(3).unwrap()
    }

    fn c(ctx: &Rc<FqCtx>, v: u64) -> Fq {
        Fq::new(ctx, v)
    }

    #[test]
    fn monomial_arithmetic() {
        let ctx = f3();
        let pi3 = Series::pi_pow(c(&ctx, 0), 3);
        assert_eq!(pi3.val().unwrap(), Some(3));
        let unit = Series::one(c(&ctx, 0)).add(&Series::pi_pow(c(&ctx, 0), 1));
        assert_eq!(unit.val().unwrap(), Some(0));
        let p = pi3.mul(&unit);
        assert_eq!(p.val().unwrap(), Some(3));
    }

    #[test]
    fn inverse_roundtrip() {
        let ctx = f3();
        // (1 + pi + 2 pi^2) at precision 20
        let u = Series::from_coeffs(0, 20, vec![c(&ctx, 1), c(&ctx, 1), c(&ctx, 2)], c(&ctx, 0));
        let ui = u.inverse().unwrap();
        let prod = u.mul(&ui);
        assert!(prod.sub(&Series::one(c(&ctx, 0))).is_zero_at_prec());
        // shifted: pi^2 * u inverts to valuation -2
        let v = u.shift(2);
        let vi = v.inverse().unwrap();
        assert_eq!(vi.val().unwrap(), Some(-2));
        assert!(v.mul(&vi).sub(&Series::one(c(&ctx, 0))).is_zero_at_prec());
    }

    #[test]
    fn precision_tracking() {
        let ctx = f3();
        let a = Series::from_coeffs(0, 5, vec![c(&ctx, 1)], c(&ctx, 0));
        let b = Series::from_coeffs(2, 9, vec![c(&ctx, 2)], c(&ctx, 0));
        assert_eq!(a.add(&b).prec(), 5);
        // product precision: min(5 + 2, 9 + 0) = 7
        assert_eq!(a.mul(&b).prec(), 7);
    }

    #[test]
    fn underflow_is_an_error() {
        let ctx = f3();
        let z = Series::zero_to_prec(c(&ctx, 0), 6);
        assert!(z.val().is_err());
        assert!(Series::zero(c(&ctx, 0)).val().unwrap().is_none());
    }

    #[test]
    fn reduce_mod_keeps_low_terms() {
        let ctx = f3();
        let a = Series::from_coeffs(1, EXACT, vec![c(&ctx, 1), c(&ctx, 2), c(&ctx, 1)], c(&ctx, 0));
        let r = a.reduce_mod(2);
        assert_eq!(r.val().unwrap(), Some(1));
        assert_eq!(r.coeff(2).unwrap(), c(&ctx, 0));
    }
}
