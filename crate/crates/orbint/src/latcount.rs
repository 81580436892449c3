//! Closed-form counting functions for sublattices and lattice pairs between
//! two nested rank-2 lattices, and their brute-force oracles.
//!
//! For lattices M0 >= M1 of relative position (a, b):
//! - `phi(a, b, k)` counts sublattices of index k between them,
//! - `phi_prim` the ones with cyclic quotient,
//! - `psi` counts chains M0 >= L >= L' >= M1 with [M0:L] = k, [L:L'] = 1,
//! - `xi` / `xi_prime` count pairs (L, L') fitting the two-row diagram of
//!   nested lattice pairs; `pair_count` dispatches on the relative position
//!   of the flat row.
//!
//! Out-of-range k returns 0 by convention: germ sums index k over fixed
//! ranges and rely on vanishing tails.

use crate::error::{Error, Result};
use crate::ff::ResidueField;
use crate::lattices::{contains, index, sublattices_between, Lattice};

fn geo(q: i128, lo: i64, hi: i64) -> i128 {
    // q^lo + q^{lo+1} + ... + q^hi (empty if hi < lo)
    (lo..=hi).map(|j| q.pow(j as u32)).sum()
}

/// Sublattices of index k with cyclic quotient M0/L.
pub fn phi_prim(a: i64, b: i64, k: i64, q: i128) -> i128 {
    debug_assert!(0 <= a && a <= b);
    if k < 0 || k > b {
        return 0;
    }
    if k == 0 {
        1
    } else if k <= a {
        q.pow((k - 1) as u32) + q.pow(k as u32)
    } else {
        q.pow(a as u32)
    }
}

/// All sublattices of index k between lattices of relative position (a, b).
pub fn phi(a: i64, b: i64, k: i64, q: i128) -> i128 {
    if a < 0 || b < 0 {
        return 0;
    }
    debug_assert!(a <= b);
    if k < 0 || k > a + b {
        return 0;
    }
    geo(q, 0, k.min(a).min(a + b - k))
}

/// Pairs L >= L' of index 1 with M0 >= L >= L' >= M1 and [M0 : L] = k.
pub fn psi(a: i64, b: i64, k: i64, q: i128) -> i128 {
    debug_assert!(0 <= a && a <= b);
    if k < 0 || k > a + b - 1 {
        return 0;
    }
    if k < a {
        1 + 2 * geo(q, 1, k) + q.pow((k + 1) as u32)
    } else if k < b {
        1 + 2 * geo(q, 1, a)
    } else {
        1 + 2 * geo(q, 1, a + b - k - 1) + q.pow((a + b - k) as u32)
    }
}

/// Pair count in the balanced case: 1 + 2q + ... + 2q^{min(k, a, a+b-k)}.
pub fn xi(a: i64, b: i64, k: i64, q: i128) -> i128 {
    debug_assert!(0 <= a && a <= b);
    if k < 0 || k > a + b {
        return 0;
    }
    1 + 2 * geo(q, 1, k.min(a).min(a + b - k))
}

/// Pair count in the skewed case; only defined for a >= 1.
pub fn xi_prime(a: i64, b: i64, k: i64, q: i128) -> Result<i128> {
    if a < 1 {
        return Err(Error::Domain(format!("xi_prime requires a >= 1, got a = {a}")));
    }
    debug_assert!(a <= b);
    if k < 0 || k > a + b {
        return Ok(0);
    }
    Ok(if k == 0 || k == a + b {
        1
    } else if k < a || b < k {
        1 + 2 * geo(q, 1, k.min(a + b - k))
    } else {
        1 + 2 * geo(q, 1, a - 1) + q.pow(a as u32)
    })
}

/// Relative position of the flat row (M0', M1') against the top row (a, b).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CountCase {
    /// (M0' : M1') = (a, b)
    Balanced,
    /// (M0' : M1') = (a - 1, b + 1)
    Widened,
    /// (M0' : M1') = (a + 1, b - 1); only when a + 2 <= b
    Narrowed,
}

/// Closed-form count of pairs (L, L') fitting the two-row diagram with
/// [M0 : L] = k, by case of the flat row.
pub fn pair_count(case: CountCase, a: i64, b: i64, k: i64, q: i128) -> Result<i128> {
    match case {
        CountCase::Balanced => Ok(xi(a, b, k, q)),
        CountCase::Widened => xi_prime(a, b, k, q),
        CountCase::Narrowed => {
            if a + 2 > b {
                return Err(Error::Domain(format!(
                    "narrowed case requires a + 2 <= b, got ({a}, {b})"
                )));
            }
            xi_prime(a + 1, b - 1, k, q)
        }
    }
}

/// A concrete lattice quadruple (M0, M0', M1, M1') realizing a counting case
/// at top relative position (a, b), built on the standard basis:
/// M0 = O^2, M1 = pi^a O + pi^b O, with the flats chosen per case.
pub fn case_instance<K: ResidueField>(
    zero: K,
    case: CountCase,
    a: i64,
    b: i64,
) -> Result<(Lattice<K>, Lattice<K>, Lattice<K>, Lattice<K>)> {
    use crate::lattices::hermite_cols;
    use crate::series::Series;
    if a < 0 || a > b {
        return Err(Error::Domain(format!("need 0 <= a <= b, got ({a}, {b})")));
    }
    let diag = |va: i64, vb: i64| -> Result<Lattice<K>> {
        hermite_cols(&[
            (Series::pi_pow(zero.clone(), va), Series::zero(zero.clone())),
            (Series::zero(zero.clone()), Series::pi_pow(zero.clone(), vb)),
        ])
    };
    let m0 = diag(0, 0)?;
    let m1 = diag(a, b)?;
    let (m0f, m1f) = match case {
        CountCase::Balanced => (diag(0, 1)?, diag(a, b + 1)?),
        CountCase::Widened => {
            if a < 1 {
                return Err(Error::Domain("widened case requires a >= 1".into()));
            }
            (diag(1, 0)?, diag(a, b + 1)?)
        }
        CountCase::Narrowed => {
            if a + 2 > b {
                return Err(Error::Domain("narrowed case requires a + 2 <= b".into()));
            }
            (diag(0, 1)?, diag(a + 1, b)?)
        }
    };
    Ok((m0, m0f, m1, m1f))
}

/// Exhaustive count of pairs (L, L') with M0 >= L >= M1, M0' >= L' >= M1',
/// L >= L' of index 1, and [M0 : L] = k.
pub fn brute_pair_count<K: ResidueField>(
    m0: &Lattice<K>,
    m0f: &Lattice<K>,
    m1: &Lattice<K>,
    m1f: &Lattice<K>,
    k: i64,
) -> Result<i128> {
    // preconditions: flats are index-1 sublattices, rows are nested
    if index(m0, m0f)? != 1 || index(m1, m1f)? != 1 {
        return Err(Error::Domain("flat rows must have index 1".into()));
    }
    if !contains(m0, m1)? || !contains(m0f, m1f)? {
        return Err(Error::Domain("rows must be nested".into()));
    }
    let total = index(m0, m1)?;
    if k < 0 || k > total {
        return Ok(0);
    }
    let mut count = 0i128;
    for lam in sublattices_between(m0, m1, k)? {
        for lamf in sublattices_between(&lam, &lam.scaled(1), 1)? {
            if contains(m0f, &lamf)? && contains(&lamf, m1f)? {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Brute count of sublattices of index k (oracle for `phi`).
pub fn brute_phi<K: ResidueField>(m0: &Lattice<K>, m1: &Lattice<K>, k: i64) -> Result<i128> {
    Ok(sublattices_between(m0, m1, k)?.len() as i128)
}

/// Brute count of cyclic-quotient sublattices of index k (oracle for `phi_prim`).
pub fn brute_phi_prim<K: ResidueField>(
    m0: &Lattice<K>,
    m1: &Lattice<K>,
    k: i64,
) -> Result<i128> {
    let mut count = 0i128;
    for lam in sublattices_between(m0, m1, k)? {
        // M0/L cyclic iff L is not contained in pi M0
        if !contains(&m0.scaled(1), &lam)? {
            count += 1;
        }
    }
    Ok(count)
}

/// Brute count of index-1-refined chains (oracle for `psi`).
pub fn brute_psi<K: ResidueField>(m0: &Lattice<K>, m1: &Lattice<K>, k: i64) -> Result<i128> {
    let mut count = 0i128;
    for lam in sublattices_between(m0, m1, k)? {
        for lamf in sublattices_between(&lam, &lam.scaled(1), 1)? {
            if contains(&lamf, m1)? {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_prim_pinned_values() {
        let q = 5;
        assert_eq!(phi_prim(1, 2, 1, q), q + 1);
        assert_eq!(phi_prim(3, 4, 0, q), 1);
        assert_eq!(phi_prim(1, 2, 2, 2), 2);
    }

    #[test]
    fn phi_pinned_values() {
        let q = 7;
        assert_eq!(phi(1, 1, 1, q), 1 + q);
        assert_eq!(phi(2, 5, 0, q), 1);
        assert_eq!(phi(2, 3, 2, 2), 7);
        assert_eq!(phi(0, 0, 1, q), 0);
        assert_eq!(phi(0, 3, 1, q), 1);
    }

    #[test]
    fn psi_pinned_values() {
        let q = 5;
        assert_eq!(psi(1, 2, 0, q), 1 + q);
        assert_eq!(psi(1, 2, 1, q), 1 + 2 * q);
        assert_eq!(psi(2, 2, 3, 3), 4);
    }

    #[test]
    fn xi_pinned_values() {
        assert_eq!(xi(2, 4, 0, 3), 1);
        assert_eq!(xi_prime(1, 2, 1, 5).unwrap(), 1 + 5);
        assert_eq!(xi(2, 3, 2, 2), 13);
        assert_eq!(xi_prime(1, 1, 1, 7).unwrap(), 1 + 7);
        assert!(xi_prime(0, 2, 1, 3).is_err());
    }

    #[test]
    fn recursion_identities() {
        for q in [2i128, 3] {
            for a in 0..=4i64 {
                for b in a..=4 {
                    for k in 2..=(a + b) {
                        // index-k sublattices split by cyclicity of the quotient
                        let lhs = phi(a, b, k, q);
                        let rhs = phi(a - 1, b - 1, k - 2, q) + phi_prim(a, b, k, q);
                        assert_eq!(lhs, rhs, "phi recursion at ({a},{b},{k},{q})");
                    }
                    for k in 0..=(a + b - 1) {
                        let lhs = psi(a, b, k, q);
                        let rhs = phi_prim(a, b, k + 1, q) + (1 + q) * phi(a - 1, b - 1, k - 1, q);
                        assert_eq!(lhs, rhs, "psi identity at ({a},{b},{k},{q})");
                    }
                }
            }
        }
    }
}
