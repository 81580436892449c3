//! Small finite fields.
//!
//! [`Fq`] is GF(p^k) for a prime power q = p^k, implemented with exp/log
//! tables over a fixed monic irreducible modulus; elements are indices whose
//! base-p digits are the polynomial coefficients. [`Fq2`] is the quadratic
//! extension F_{q^2} = F_q(zeta) given by explicit structure constants
//! zeta^2 = s zeta + t, with the q-power Frobenius acting as
//! zeta -> s - zeta. Both fields enumerate their elements in a fixed order,
//! which the lattice enumerators rely on for determinism.

use std::rc::Rc;

use crate::error::{Error, Result};

const MAX_Q: u64 = 4096;

/// Context for GF(p^k): tables shared by all elements via `Rc`.
pub struct FqCtx {
    pub p: u64,
    pub k: u32,
    pub q: u64,
    /// exp[i] = g^i for a fixed generator g, i in 0..q-1 (element encodings).
    exp: Vec<u32>,
    /// log[e] for e in 1..q: discrete log base g. log[0] unused.
    log: Vec<u32>,
}

/// Factor q as p^k with p prime; errors if q is not a prime power >= 2.
pub fn prime_power(q: u64) -> Result<(u64, u32)> {
    if q < 2 {
        return Err(Error::Domain(format!("q = {q} is not a prime power >= 2")));
    }
    let mut p = 2;
    while p * p <= q {
        if q % p == 0 {
            let mut k = 0;
            let mut m = q;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            if m != 1 {
                return Err(Error::Domain(format!("q = {q} is not a prime power")));
            }
            return Ok((p, k));
        }
        p += 1;
    }
    Ok((q, 1))
}

// Digit-vector helpers: an element encoding is sum digits[i] * p^i.
fn digits(mut e: u64, p: u64, k: u32) -> Vec<u64> {
    let mut d = vec![0; k as usize];
    for slot in d.iter_mut() {
        *slot = e % p;
        e /= p;
    }
    d
}

fn encode(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn poly_mul_mod(a: &[u64], b: &[u64], modulus: &[u64], p: u64, k: u32) -> Vec<u64> {
    let k = k as usize;
    let mut prod = vec![0u64; 2 * k];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    // reduce: x^k = -modulus (modulus holds low coefficients of the monic poly)
    for i in (k..2 * k).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for (j, &mj) in modulus.iter().enumerate() {
            let idx = i - k + j;
            prod[idx] = (prod[idx] + c * (p - mj) % p) % p;
        }
    }
    prod.truncate(k);
    prod
}

// x^(p^d) in F_p[x]/(f), f monic with low coefficients `low`.
fn frobenius_power(low: &[u64], p: u64, k: u32, d: u32) -> Vec<u64> {
    let mut y = vec![0u64; k as usize];
    y[1] = 1;
    for _ in 0..d {
        let mut yp = vec![0u64; k as usize];
        yp[0] = 1;
        let mut base = y.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                yp = poly_mul_mod(&yp, &base, low, p, k);
            }
            base = poly_mul_mod(&base, &base, low, p, k);
            e >>= 1;
        }
        y = yp;
    }
    y
}

// gcd of two F_p[x] polynomials given as coefficient vectors.
fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    let deg = |v: &[u64]| v.iter().rposition(|&c| c != 0);
    loop {
        let Some(db) = deg(&b) else { return a };
        let Some(da) = deg(&a) else { return b };
        if da < db {
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        // a -= (lead_a / lead_b) x^{da-db} b
        let inv = mod_inv(b[db], p);
        let scale = a[da] * inv % p;
        for j in 0..=db {
            let idx = da - db + j;
            a[idx] = (a[idx] + (p - scale * b[j] % p)) % p;
        }
    }
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

fn find_irreducible(p: u64, k: u32) -> Vec<u64> {
    if k == 1 {
        return vec![0];
    }
    let total = p.pow(k);
    'cand: for enc in 0..total {
        let low = digits(enc, p, k);
        if low[0] == 0 {
            continue;
        }
        // f is irreducible of degree k iff x^(p^k) = x mod f and f shares no
        // factor with x^(p^d) - x for any d <= k/2 (those products collect
        // every irreducible of degree dividing d)
        let mut f_full = low.clone();
        f_full.push(1);
        for d in 1..=(k / 2) {
            let mut g = frobenius_power(&low, p, k, d);
            g.resize(k as usize + 1, 0);
            // g - x
            g[1] = (g[1] + p - 1) % p;
            let gcd = poly_gcd(f_full.clone(), g, p);
            let deg = gcd.iter().rposition(|&c| c != 0).unwrap_or(0);
            if deg != 0 {
                continue 'cand;
            }
        }
        let y = frobenius_power(&low, p, k, k);
        let mut x = vec![0u64; k as usize];
        x[1] = 1;
        if y == x {
            return low;
        }
    }
    unreachable!("no irreducible polynomial found (p={p}, k={k})");
}

impl FqCtx {
    pub fn new(q: u64) -> Result<Rc<FqCtx>> {
        let (p, k) = prime_power(q)?;
        if q > MAX_Q {
            return Err(Error::Unsupported(format!("q = {q} exceeds table limit {MAX_Q}")));
        }
        let modulus = find_irreducible(p, k);
        // build multiplication by exhaustive generator search
        let mul = |a: u64, b: u64| -> u64 {
            let prod = poly_mul_mod(&digits(a, p, k), &digits(b, p, k), &modulus, p, k);
            encode(&prod, p)
        };
        let mut exp = Vec::new();
        let mut log = vec![0u32; q as usize];
        'gen: for g in 1..q {
            exp.clear();
            log.iter_mut().for_each(|v| *v = u32::MAX);
            let mut x = 1u64;
            for i in 0..q - 1 {
                if log[x as usize] != u32::MAX {
                    continue 'gen; // order of g too small
                }
                exp.push(x as u32);
                log[x as usize] = i as u32;
                x = mul(x, g);
            }
            if x == 1 {
                return Ok(Rc::new(FqCtx { p, k, q, exp, log }));
            }
        }
        unreachable!("no multiplicative generator found for q = {q}")
    }

    fn idx_add(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let da = digits(a, self.p, self.k);
        let db = digits(b, self.p, self.k);
        let sum: Vec<u64> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        encode(&sum, self.p)
    }

    fn idx_neg(&self, a: u64) -> u64 {
        if self.k == 1 {
            return (self.p - a) % self.p;
        }
        let da = digits(a, self.p, self.k);
        let neg: Vec<u64> = da.iter().map(|x| (self.p - x) % self.p).collect();
        encode(&neg, self.p)
    }

    fn idx_mul(&self, a: u64, b: u64) -> u64 {
        if a == 0 || b == 0 {
            return 0;
        }
        let la = self.log[a as usize] as u64;
        let lb = self.log[b as usize] as u64;
        self.exp[((la + lb) % (self.q - 1)) as usize] as u64
    }

    fn idx_inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let la = self.log[a as usize] as u64;
        Some(self.exp[((self.q - 1 - la) % (self.q - 1)) as usize] as u64)
    }
}

/// An element of GF(p^k). Equality requires identical contexts.
#[derive(Clone)]
pub struct Fq {
    pub ctx: Rc<FqCtx>,
    pub v: u64,
}

impl PartialEq for Fq {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}
impl Eq for Fq {}

impl std::fmt::Debug for Fq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Fq {
    pub fn new(ctx: &Rc<FqCtx>, v: u64) -> Fq {
        Fq { ctx: Rc::clone(ctx), v: v % ctx.q }
    }

    /// Image of an integer under Z -> F_q (through the prime field).
    pub fn from_int(ctx: &Rc<FqCtx>, n: i64) -> Fq {
        Fq::new(ctx, n.rem_euclid(ctx.p as i64) as u64)
    }

    pub fn pow(&self, e: u64) -> Fq {
        if self.v == 0 {
            return if e == 0 { Fq::new(&self.ctx, 1) } else { self.clone() };
        }
        let l = self.ctx.log[self.v as usize] as u128;
        let m = (self.ctx.q - 1) as u128;
        let idx = (l * e as u128) % m;
        Fq { ctx: Rc::clone(&self.ctx), v: self.ctx.exp[idx as usize] as u64 }
    }

    /// True if self is a square in F_q (including 0).
    pub fn is_square(&self) -> bool {
        if self.v == 0 || self.ctx.p == 2 {
            return true;
        }
        self.ctx.log[self.v as usize] % 2 == 0
    }

    /// Square root if one exists; fields of characteristic 2 are perfect.
    pub fn sqrt(&self) -> Option<Fq> {
        if self.v == 0 {
            return Some(self.clone());
        }
        if self.ctx.p == 2 {
            // x -> x^2 is bijective; inverse is x -> x^(q/2)
            return Some(self.pow(self.ctx.q / 2));
        }
        let l = self.ctx.log[self.v as usize] as u64;
        if l % 2 != 0 {
            return None;
        }
        Some(Fq { ctx: Rc::clone(&self.ctx), v: self.ctx.exp[(l / 2) as usize] as u64 })
    }
}

/// Field-operation interface shared by F_q and F_{q^2}.
///
/// `conj` is the q-power Frobenius relative to F_q: the identity on [`Fq`],
/// the nontrivial involution on [`Fq2`].
pub trait ResidueField: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn inv(&self) -> Option<Self>;
    fn conj(&self) -> Self;
    /// All field elements in a fixed deterministic order.
    fn all_elements(&self) -> Vec<Self>;
}

impl ResidueField for Fq {
    fn zero_like(&self) -> Self {
        Fq::new(&self.ctx, 0)
    }
    fn one_like(&self) -> Self {
        Fq::new(&self.ctx, 1)
    }
    fn is_zero(&self) -> bool {
        self.v == 0
    }
    fn add(&self, other: &Self) -> Self {
        Fq { ctx: Rc::clone(&self.ctx), v: self.ctx.idx_add(self.v, other.v) }
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn neg(&self) -> Self {
        Fq { ctx: Rc::clone(&self.ctx), v: self.ctx.idx_neg(self.v) }
    }
    fn mul(&self, other: &Self) -> Self {
        Fq { ctx: Rc::clone(&self.ctx), v: self.ctx.idx_mul(self.v, other.v) }
    }
    fn inv(&self) -> Option<Self> {
        self.ctx.idx_inv(self.v).map(|v| Fq { ctx: Rc::clone(&self.ctx), v })
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn all_elements(&self) -> Vec<Self> {
        (0..self.ctx.q).map(|v| Fq::new(&self.ctx, v)).collect()
    }
}

/// Structure constants for F_{q^2} = F_q(zeta), zeta^2 = s zeta + t.
pub struct Fq2Ctx {
    pub base: Rc<FqCtx>,
    pub s: Fq,
    pub t: Fq,
}

impl Fq2Ctx {
    /// Build F_{q^2} with a canonical irreducible quadratic over F_q.
    ///
    /// Odd q: zeta^2 = t for the first non-square t. Even q: zeta^2 = zeta + t
    /// for the first t outside the Artin-Schreier image {y^2 + y}.
    pub fn new(base: &Rc<FqCtx>) -> Rc<Fq2Ctx> {
        let zero = Fq::new(base, 0);
        if base.p != 2 {
            let t = zero
                .all_elements()
                .into_iter()
                .find(|t| !t.is_zero() && !t.is_square())
                .expect("non-square exists in odd characteristic");
            Rc::new(Fq2Ctx { base: Rc::clone(base), s: zero, t })
        } else {
            let image: Vec<Fq> = zero
                .all_elements()
                .into_iter()
                .map(|y| y.mul(&y).add(&y))
                .collect();
            let t = zero
                .all_elements()
                .into_iter()
                .find(|t| !image.contains(t))
                .expect("Artin-Schreier non-image exists");
            Rc::new(Fq2Ctx { base: Rc::clone(base), s: Fq::new(base, 1), t })
        }
    }
}

/// An element a + b zeta of F_{q^2}.
#[derive(Clone)]
pub struct Fq2 {
    pub ctx: Rc<Fq2Ctx>,
    pub a: Fq,
    pub b: Fq,
}

impl PartialEq for Fq2 {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a && self.b == other.b
    }
}
impl Eq for Fq2 {}

impl std::fmt::Debug for Fq2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:?}+{:?}z)", self.a, self.b)
    }
}

impl Fq2 {
    pub fn new(ctx: &Rc<Fq2Ctx>, a: Fq, b: Fq) -> Fq2 {
        Fq2 { ctx: Rc::clone(ctx), a, b }
    }

    /// Embed F_q into F_{q^2}.
    pub fn embed(ctx: &Rc<Fq2Ctx>, a: Fq) -> Fq2 {
        let b = a.zero_like();
        Fq2::new(ctx, a, b)
    }

    pub fn zeta(ctx: &Rc<Fq2Ctx>) -> Fq2 {
        Fq2::new(ctx, Fq::new(&ctx.base, 0), Fq::new(&ctx.base, 1))
    }

    /// True if the element lies in the base field F_q.
    pub fn in_base(&self) -> bool {
        self.b.is_zero()
    }

    /// Norm to F_q: x * conj(x) = a^2 + s a b - t b^2.
    pub fn norm(&self) -> Fq {
        let s = &self.ctx.s;
        let t = &self.ctx.t;
        self.a
            .mul(&self.a)
            .add(&s.mul(&self.a).mul(&self.b))
            .sub(&t.mul(&self.b).mul(&self.b))
    }

    /// Trace to F_q: x + conj(x) = 2a + s b.
    pub fn trace(&self) -> Fq {
        self.a.add(&self.a).add(&self.ctx.s.mul(&self.b))
    }
}

impl ResidueField for Fq2 {
    fn zero_like(&self) -> Self {
        Fq2::new(&self.ctx, self.a.zero_like(), self.a.zero_like())
    }
    fn one_like(&self) -> Self {
        Fq2::new(&self.ctx, self.a.one_like(), self.a.zero_like())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn add(&self, other: &Self) -> Self {
        Fq2::new(&self.ctx, self.a.add(&other.a), self.b.add(&other.b))
    }
    fn sub(&self, other: &Self) -> Self {
        Fq2::new(&self.ctx, self.a.sub(&other.a), self.b.sub(&other.b))
    }
    fn neg(&self) -> Self {
        Fq2::new(&self.ctx, self.a.neg(), self.b.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        // (a1 + b1 z)(a2 + b2 z) with z^2 = s z + t
        let s = &self.ctx.s;
        let t = &self.ctx.t;
        let b1b2 = self.b.mul(&other.b);
        let a = self.a.mul(&other.a).add(&t.mul(&b1b2));
        let b = self
            .a
            .mul(&other.b)
            .add(&self.b.mul(&other.a))
            .add(&s.mul(&b1b2));
        Fq2::new(&self.ctx, a, b)
    }
    fn inv(&self) -> Option<Self> {
        let n = self.norm();
        let ninv = n.inv()?;
        // x^{-1} = conj(x) / N(x)
        let c = self.conj();
        Some(Fq2::new(&self.ctx, c.a.mul(&ninv), c.b.mul(&ninv)))
    }
    fn conj(&self) -> Self {
        // zeta -> s - zeta
        let a = self.a.add(&self.ctx.s.mul(&self.b));
        Fq2::new(&self.ctx, a, self.b.neg())
    }
    fn all_elements(&self) -> Vec<Self> {
        let mut out = Vec::with_capacity((self.ctx.base.q * self.ctx.base.q) as usize);
        for a in 0..self.ctx.base.q {
            for b in 0..self.ctx.base.q {
                out.push(Fq2::new(
                    &self.ctx,
                    Fq::new(&self.ctx.base, a),
                    Fq::new(&self.ctx.base, b),
                ));
            }
        }
        out
    }
}

/// Solve x^{q+1} = target in F_{q^2} by exhaustive search (norm equation at
/// the residue level; q is small by construction).
pub fn norm_preimage(ctx: &Rc<Fq2Ctx>, target: &Fq) -> Option<Fq2> {
    let one = Fq2::new(ctx, Fq::new(&ctx.base, 1), Fq::new(&ctx.base, 0));
    one.all_elements().into_iter().find(|x| &x.norm() == target)
}

/// A fixed element of F_{q^2} with trace 1 to F_q.
pub fn trace_one(ctx: &Rc<Fq2Ctx>) -> Fq2 {
    let one = Fq2::new(ctx, Fq::new(&ctx.base, 1), Fq::new(&ctx.base, 0));
    one.all_elements()
        .into_iter()
        .find(|x| x.trace() == Fq::new(&ctx.base, 1))
        .expect("trace is surjective for separable extensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(2).unwrap(), (2, 1));
        assert_eq!(prime_power(9).unwrap(), (3, 2));
        assert_eq!(prime_power(8).unwrap(), (2, 3));
        assert!(prime_power(6).is_err());
        assert!(prime_power(1).is_err());
    }

    fn check_field_axioms<K: ResidueField>(elts: &[K]) {
        let zero = elts[0].zero_like();
        let one = elts[0].one_like();
        for a in elts {
            assert_eq!(a.add(&zero), *a);
            assert_eq!(a.mul(&one), *a);
            assert!(a.add(&a.neg()).is_zero());
            if !a.is_zero() {
                let ai = a.inv().unwrap();
                assert_eq!(a.mul(&ai), one);
            }
            for b in elts {
                assert_eq!(a.add(b), b.add(a));
                assert_eq!(a.mul(b), b.mul(a));
                for c in elts {
                    assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
                }
            }
        }
    }

    #[test]
    fn fq_axioms_small() {
        for q in [2u64, 3, 4, 5, 9] {
            let ctx = FqCtx::new(q).unwrap();
            let elts = Fq::new(&ctx, 0).all_elements();
            assert_eq!(elts.len(), q as usize);
            check_field_axioms(&elts);
        }
    }

    #[test]
    fn fq2_axioms_and_conjugation() {
        for q in [2u64, 3, 4, 5] {
            let base = FqCtx::new(q).unwrap();
            let ctx = Fq2Ctx::new(&base);
            let elts = Fq2::zeta(&ctx).all_elements();
            assert_eq!(elts.len(), (q * q) as usize);
            check_field_axioms(&elts[..elts.len().min(16)]);
            for x in &elts {
                // conj is the q-power Frobenius
                assert_eq!(x.conj(), x.pow_q());
                assert_eq!(x.conj().conj(), *x);
                assert!(Fq2::embed(&ctx, x.norm()).in_base());
                // norm multiplicativity on a slice
            }
            let zeta = Fq2::zeta(&ctx);
            assert!(!zeta.in_base());
            assert!(zeta.norm().inv().is_some(), "zeta is a unit generator");
        }
    }

    impl Fq2 {
        fn pow_q(&self) -> Fq2 {
            let q = self.ctx.base.q;
            let mut acc = self.one_like();
            let mut base = self.clone();
            let mut e = q;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc.mul(&base);
                }
                base = base.mul(&base);
                e >>= 1;
            }
            acc
        }
    }

    #[test]
    fn norm_surjective_on_units() {
        for q in [2u64, 3, 5] {
            let base = FqCtx::new(q).unwrap();
            let ctx = Fq2Ctx::new(&base);
            for v in 1..q {
                let t = Fq::new(&base, v);
                let x = norm_preimage(&ctx, &t).expect("norm onto units");
                assert_eq!(x.norm(), t);
            }
            let tr1 = trace_one(&ctx);
            assert_eq!(tr1.trace(), Fq::new(&base, 1));
        }
    }
}
