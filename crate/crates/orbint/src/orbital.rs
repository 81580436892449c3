//! Orbital integrals for the parahoric and Iwahori level structures, as exact
//! Laurent polynomials in u = q^s.
//!
//! Closed forms are assembled by germ expansion: with the prefactor
//! (-q^s)^{-r}, the integral is P + i(L) U where P is the principal germ
//! (contributions with maximal-order top lattice) and U the unipotent germ.
//! P has an explicit formula per kind; U is independent of the algebra and is
//! recovered from the split (hyperbolic) closed form, where the integral
//! reduces to a product of rank-1 integrals.
//!
//! The independent oracle [`orbital_brute`] enumerates the defining lattice
//! quadruples (Iwahori) or pairs (parahoric) directly, with a two-level
//! emptiness certificate at the conductor cutoff.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::latcount::{phi, xi, xi_prime};
use crate::lattices::{
    apply_mat, contains, index, index_one_sublattices, multiplier_conductor,
    sublattices_between, unit_conductor_orbit,
};
use crate::laurent::{rat, ratio, sign_prefactor, sign_prefactor_inv, LaurentPoly};
use crate::localfield::{i_index, Kind, NumInvariant, QuadAlgebra, QuadElem};

/// The three test-function levels.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TestFn {
    /// 2x2-block parahoric.
    Par,
    /// Iwahori, with the unit-index normalization absorbed.
    Iw,
    /// The division-algebra normalization u^{-1} times the Iwahori integral.
    Dnorm,
}

impl TestFn {
    pub fn parse(s: &str) -> Result<TestFn> {
        match s {
            "par" => Ok(TestFn::Par),
            "iw" => Ok(TestFn::Iw),
            "d" => Ok(TestFn::Dnorm),
            _ => Err(Error::Domain(format!("test function must be par|iw|d, got {s}"))),
        }
    }
}

fn xpow(m: i64) -> LaurentPoly {
    LaurentPoly::from_x_series([(rat(1), m)])
}

/// Geometric X-sum 1 + X + ... + X^{n-1} (zero for n <= 0).
fn x_geo(n: i64) -> LaurentPoly {
    let mut p = LaurentPoly::zero();
    for i in 0..n.max(0) {
        p = p.add(&xpow(i));
    }
    p
}

/// Rank-1 integral for an eigenvalue of valuation v: u^v (X^v - 1)/(X - 1),
/// zero when v <= 0.
pub fn orb_gl2_plus(v_alpha: i64) -> LaurentPoly {
    if v_alpha <= 0 {
        return LaurentPoly::zero();
    }
    LaurentPoly::monomial(rat(1), v_alpha).mul(&x_geo(v_alpha))
}

/// Hyperbolic (split) closed form with eigenvalue valuations (va, vb) and
/// difference valuation vdiff = v(alpha - beta).
pub fn orb_hyperbolic(fnk: TestFn, va: i64, vb: i64, vdiff: i64, q: i128) -> LaurentPoly {
    if va <= 0 || vb <= 0 {
        return LaurentPoly::zero();
    }
    debug_assert!(vdiff >= va.min(vb));
    let par = LaurentPoly::monomial(rat(q.pow((vdiff - 1) as u32)), va + vb)
        .mul(&x_geo(va))
        .mul(&x_geo(vb));
    match fnk {
        TestFn::Par => par,
        TestFn::Iw => {
            // 2q (X + 1) times the parahoric integral
            let factor = xpow(1).add(&LaurentPoly::one()).scale(&rat(2 * q));
            factor.mul(&par)
        }
        TestFn::Dnorm => {
            let iw = orb_hyperbolic(TestFn::Iw, va, vb, vdiff, q);
            LaurentPoly::monomial(rat(1), -1).mul(&iw)
        }
    }
}

/// The principal germ. Returns zero when r <= 0, when the canonical element
/// is not topologically nilpotent, and for the Iwahori germ of the inert kind.
pub fn principal_germ(fnk: TestFn, kind: Kind, r: i64, d2: i64, q: i128) -> Result<LaurentPoly> {
    let inv = NumInvariant::new(kind, r, d2);
    inv.check_valid()?;
    if r <= 0 || !inv.topologically_nilpotent() {
        return Ok(LaurentPoly::zero());
    }
    match fnk {
        TestFn::Dnorm => Err(Error::Domain("germs are defined for par and iw only".into())),
        TestFn::Par => {
            // sum over pairs with top lattice the maximal order: the inner
            // lattice ranges between pi O_L and w O_L
            let (a, b) = if d2 >= 0 {
                (r / 2 - 1, r / 2 - 1)
            } else {
                ((r + d2) / 2 - 1, (r - d2) / 2 - 1)
            };
            let mut p = LaurentPoly::zero();
            for k in 0..=(a + b).max(-1) {
                let c = phi(a, b, k, q);
                if c != 0 {
                    p = p.add(&xpow(-k - 2).scale(&rat(c)));
                }
            }
            Ok(p)
        }
        TestFn::Iw => {
            let (double, terms): (i128, Vec<i128>) = match kind {
                Kind::Inert => (1, Vec::new()),
                Kind::Ramified => {
                    let (a, b) = if d2 >= 0 {
                        (r / 2 - 1, r / 2)
                    } else {
                        ((r - 1) / 2, (r - 1) / 2)
                    };
                    (1, (0..r).map(|k| xi(a, b, k, q)).collect())
                }
                Kind::Split => {
                    if d2 >= 0 {
                        let (a, b) = (r / 2 - 1, r / 2);
                        (2, (0..r).map(|k| xi(a, b, k, q)).collect())
                    } else {
                        let (a, b) = ((r + d2) / 2, (r - d2) / 2 - 1);
                        let vals: Result<Vec<i128>> =
                            (0..r).map(|k| xi_prime(a, b, k, q)).collect();
                        (2, vals?)
                    }
                }
            };
            let mut p = LaurentPoly::zero();
            for (k, c) in terms.iter().enumerate() {
                p = p.add(&xpow(-(k as i64) - 1).scale(&rat(c * double)));
            }
            Ok(p)
        }
    }
}

/// The unipotent germ, recovered from the split realization: it depends only
/// on (r, d) and satisfies Orb_split = prefactor * (P_split + (q-1) U).
pub fn unipotent_germ(fnk: TestFn, r: i64, d2: i64, q: i128) -> Result<LaurentPoly> {
    let inv = NumInvariant::new(Kind::Split, r, d2);
    inv.check_valid()?;
    let (va, vb) = inv.split_component_valuations();
    let vdiff = (r + d2) / 2;
    let orb_split = orb_hyperbolic(fnk, va, vb, vdiff, q);
    let p_split = principal_germ(fnk, Kind::Split, r, d2, q)?;
    let diff = sign_prefactor_inv(r).mul(&orb_split).sub(&p_split);
    Ok(diff.scale(&ratio(1, q - 1)))
}

/// Closed-form orbital integral for a valid invariant.
///
/// Every returned polynomial has integer coefficients (asserted).
pub fn orbital_closed(fnk: TestFn, inv: &NumInvariant, q: i128) -> Result<LaurentPoly> {
    inv.check_valid()?;
    if fnk == TestFn::Dnorm {
        let iw = orbital_closed(TestFn::Iw, inv, q)?;
        return Ok(LaurentPoly::monomial(rat(1), -1).mul(&iw));
    }
    if inv.r <= 0 || !inv.topologically_nilpotent() {
        return Ok(LaurentPoly::zero());
    }
    let poly = match inv.kind {
        Kind::Split => {
            let (va, vb) = inv.split_component_valuations();
            orb_hyperbolic(fnk, va, vb, (inv.r + inv.d2) / 2, q)
        }
        Kind::Inert | Kind::Ramified => {
            let p = principal_germ(fnk, inv.kind, inv.r, inv.d2, q)?;
            let u = unipotent_germ(fnk, inv.r, inv.d2, q)?;
            let germ_sum = p.add(&u.scale(&rat(i_index(inv.kind, q as u64))));
            sign_prefactor(inv.r).mul(&germ_sum)
        }
    };
    if !poly.is_integral() {
        return Err(Error::Internal(format!(
            "orbital integral for {inv} has non-integral coefficients: {poly}"
        )));
    }
    Ok(poly)
}

/// Germ-resolved brute-force data: contributions split by whether the top
/// pair has conductor (0, 0).
pub struct BruteGerms {
    /// Counts at each inner index k from principal (maximal-order) tops.
    pub principal_counts: BTreeMap<i64, i128>,
    /// Counts from all other tops.
    pub other_counts: BTreeMap<i64, i128>,
    /// Norm valuation of the input element.
    pub r: i64,
}

impl BruteGerms {
    fn counts_to_poly(counts: &BTreeMap<i64, i128>) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for (k, n) in counts {
            if *n != 0 {
                p = p.add(&LaurentPoly::from_x_series([(rat(*n), -k)]));
            }
        }
        p
    }

    /// The principal germ as counted by the enumeration.
    pub fn principal(&self) -> LaurentPoly {
        Self::counts_to_poly(&self.principal_counts)
    }

    /// i(L) times the unipotent germ as counted by the enumeration.
    pub fn unipotent_scaled(&self) -> LaurentPoly {
        Self::counts_to_poly(&self.other_counts)
    }

    /// The full integral: prefactor times the sum of all contributions.
    pub fn total(&self) -> LaurentPoly {
        sign_prefactor(self.r).mul(&self.principal().add(&self.unipotent_scaled()))
    }
}

/// Brute-force orbital integral by direct enumeration of the defining lattice
/// configurations, with top lattices of conductor up to c_max.
///
/// The enumeration must be empty at conductors c_max and c_max - 1 (two-level
/// completeness certificate); otherwise the cutoff is too small and an error
/// is raised.
pub fn orbital_brute_germs(
    fnk: TestFn,
    alg: &QuadAlgebra,
    w: &QuadElem,
    c_max: i64,
) -> Result<BruteGerms> {
    if fnk == TestFn::Dnorm {
        return Err(Error::Domain("brute enumeration is defined for par and iw".into()));
    }
    let r = alg.norm_valuation(w)?;
    let zero = alg.params.zero();
    let zeta_m = alg.zeta_mat();
    let w_m = alg.regular_rep(w);

    let mut principal_counts: BTreeMap<i64, i128> = BTreeMap::new();
    let mut other_counts: BTreeMap<i64, i128> = BTreeMap::new();
    let mut last_two_levels = [0i128; 2];

    for c in 0..=c_max {
        let orbit = unit_conductor_orbit(c, &zeta_m, zero.clone())?;
        let expected = if c == 0 {
            1
        } else {
            i_index(alg.kind, alg.params.q) * (alg.params.q as i128).pow((c - 1) as u32)
        };
        if orbit.len() as i128 != expected {
            return Err(Error::Internal(format!(
                "conductor-{c} orbit has {} elements, expected {expected}",
                orbit.len()
            )));
        }
        let mut level_contribs = 0i128;
        for lam0 in &orbit {
            let w_lam0 = apply_mat(&w_m, lam0)?;
            match fnk {
                TestFn::Par => {
                    let pl0 = lam0.scaled(1);
                    if !contains(&pl0, &w_lam0)? {
                        continue;
                    }
                    let jmax = index(&pl0, &w_lam0)?;
                    for j in 0..=jmax {
                        let n = sublattices_between(&pl0, &w_lam0, j)?.len() as i128;
                        if n == 0 {
                            continue;
                        }
                        let k = j + 2;
                        let slot = if c == 0 { &mut principal_counts } else { &mut other_counts };
                        *slot.entry(k).or_insert(0) += n;
                        level_contribs += n;
                    }
                }
                TestFn::Iw => {
                    let pl0 = lam0.scaled(1);
                    for lam0f in index_one_sublattices(lam0)? {
                        if !contains(&lam0f, &w_lam0)? {
                            continue;
                        }
                        let principal_top = c == 0 && multiplier_conductor(&lam0f, &zeta_m)? == 0;
                        let w_lam0f = apply_mat(&w_m, &lam0f)?;
                        let jmax = index(&lam0f, &w_lam0)?;
                        for j in 0..=jmax {
                            for lam1 in sublattices_between(&lam0f, &w_lam0, j)? {
                                let k = j + 1;
                                for lam1f in index_one_sublattices(&lam1)? {
                                    if contains(&pl0, &lam1f)? && contains(&lam1f, &w_lam0f)? {
                                        let slot = if principal_top {
                                            &mut principal_counts
                                        } else {
                                            &mut other_counts
                                        };
                                        *slot.entry(k).or_insert(0) += 1;
                                        level_contribs += 1;
                                    }
                                }
                            }
                        }
                    }
                }
                TestFn::Dnorm => unreachable!(),
            }
        }
        if c >= c_max - 1 {
            last_two_levels[(c - (c_max - 1)) as usize] = level_contribs;
        }
    }
    if last_two_levels != [0, 0] {
        return Err(Error::Internal(format!(
            "completeness certificate failed: contributions {last_two_levels:?} at conductors {} and {}",
            c_max - 1,
            c_max
        )));
    }
    Ok(BruteGerms { principal_counts, other_counts, r })
}

/// Brute-force orbital integral; see [`orbital_brute_germs`].
pub fn orbital_brute(
    fnk: TestFn,
    alg: &QuadAlgebra,
    w: &QuadElem,
    c_max: i64,
) -> Result<LaurentPoly> {
    match fnk {
        TestFn::Dnorm => {
            let iw = orbital_brute(TestFn::Iw, alg, w, c_max)?;
            Ok(LaurentPoly::monomial(rat(1), -1).mul(&iw))
        }
        _ => Ok(orbital_brute_germs(fnk, alg, w, c_max)?.total()),
    }
}

/// Default conductor cutoff for the brute enumeration. Contributing top
/// lattices satisfy w Lambda_0 <= Lambda_0, i.e. their conductor is at most
/// the coordinate valuation (r + d2)/2; two empty levels beyond that bound
/// certify completeness.
pub fn default_c_max(inv: &NumInvariant) -> i64 {
    inv.r.max((inv.r + inv.d2) / 2).max(0) + 2
}

/// Exact functional-equation check: reflecting s -> -s multiplies the
/// integral by the functional-equation sign of the corresponding degree-4
/// datum (division datum for iw and d, half-invariant datum for par) and a
/// fixed power of u (u^{-2} Iwahori, u^{-4} parahoric, 1 for the normalized
/// function, from the translation built into each test function).
pub fn functional_equation_check(fnk: TestFn, inv: &NumInvariant, p: &LaurentPoly) -> bool {
    let (eps, shift) = match fnk {
        TestFn::Dnorm => (crate::localfield::epsilon_sign(2, 3, inv.r), 0),
        TestFn::Iw => (crate::localfield::epsilon_sign(2, 3, inv.r), -2),
        TestFn::Par => (crate::localfield::epsilon_sign(2, 2, inv.r), -4),
    };
    let rhs = LaurentPoly::monomial(rat(eps as i128), shift).mul(p);
    p.reflect() == rhs
}

/// Expected central values and derivative coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefTable {
    pub orb_par_central: i128,
    pub orb_iw_central: i128,
    /// Coefficient of log(q) in the central derivative of the Iwahori
    /// integral; the normalized-function derivative is the same for even r
    /// and zero for odd r.
    pub d_orb_coeff: i128,
}

/// Sum q^lo + ... + q^hi over exponents of step 2 (even-index subsums).
fn geo_step2(q: i128, lo: i64, hi: i64) -> i128 {
    let mut s = 0;
    let mut j = lo;
    while j <= hi {
        s += q.pow(j as u32);
        j += 2;
    }
    s
}

fn geo(q: i128, lo: i64, hi: i64) -> i128 {
    (lo..=hi).map(|j| q.pow(j as u32)).sum()
}

/// Reference central values. The split line is keyed on the common parity of
/// the component valuations (equivalently r/2 for d >= 0, r/2 + d for d < 0);
/// field kinds have d >= 0 when r is even, where this parity is that of r/2.
pub fn reference_table(inv: &NumInvariant, q: i128) -> Result<RefTable> {
    inv.check_valid()?;
    let (r, d2) = (inv.r, inv.d2);
    let d = d2 / 2;
    let orb_iw_central =
        if inv.kind == Kind::Ramified && r >= 1 && r.rem_euclid(2) == 1 { 1 } else { 0 };
    let vanishing = r.rem_euclid(2) == 1 || r <= 0 || r + d2 <= 0;
    let orb_par_central = if vanishing {
        0
    } else {
        let half_odd = (r / 2 + if d2 < 0 { d2 / 2 } else { 0 }).rem_euclid(2) == 1;
        match (inv.kind, half_odd) {
            (Kind::Ramified, false) => geo_step2(q, 0, r / 2 - 2),
            (Kind::Ramified, true) => geo_step2(q, 0, r / 2 - 3) + geo(q, r / 2 - 1, r / 2 + d - 1),
            (Kind::Inert, false) => 2 * geo_step2(q, 0, r / 2 - 2),
            (Kind::Inert, true) => {
                2 * geo_step2(q, 0, r / 2 - 3)
                    + 2 * geo(q, r / 2 - 1, r / 2 + d - 2)
                    + q.pow((r / 2 + d - 1) as u32)
            }
            (Kind::Split, false) => 0,
            (Kind::Split, true) => q.pow(((r + d2) / 2 - 1) as u32),
        }
    };
    let d_orb_coeff = if r <= 0 {
        0
    } else if r.rem_euclid(2) == 1 {
        orb_iw_central
    } else {
        4 * q * orb_par_central
            + match inv.kind {
                Kind::Inert => 2 * r as i128,
                Kind::Ramified => r as i128,
                Kind::Split => 0,
            }
    };
    Ok(RefTable { orb_par_central, orb_iw_central, d_orb_coeff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::{FieldParams, QuadAlgebra};

    fn make_alg(kind: Kind, q: u64, inv: &NumInvariant) -> QuadAlgebra {
        QuadAlgebra::new(kind, FieldParams::for_invariant(q, inv).unwrap()).unwrap()
    }

    #[test]
    fn rank1_integral() {
        assert!(orb_gl2_plus(0).is_zero());
        assert_eq!(orb_gl2_plus(1), LaurentPoly::monomial(rat(1), 1));
        // v = 2: u^2 (1 + X) = u^2 - 1
        let p = orb_gl2_plus(2);
        assert_eq!(
            p,
            LaurentPoly::monomial(rat(1), 2).add(&LaurentPoly::monomial(rat(-1), 0))
        );
    }

    #[test]
    fn hyperbolic_central_values() {
        // (va, vb, vdiff) = (1, 1, 1): parahoric central value 1
        let p = orb_hyperbolic(TestFn::Par, 1, 1, 1, 3);
        assert_eq!(p.central_value(), rat(1));
        // Iwahori vanishes centrally on all split inputs
        for (va, vb, vd) in [(1, 1, 1), (1, 2, 1), (2, 2, 3)] {
            let p = orb_hyperbolic(TestFn::Iw, va, vb, vd, 3);
            assert_eq!(p.central_value(), rat(0));
        }
        assert!(orb_hyperbolic(TestFn::Par, 0, 2, 0, 3).is_zero());
    }

    #[test]
    fn iwahori_is_2q_x_plus_1_times_parahoric() {
        for q in [2i128, 3] {
            for (va, vb, vd) in [(1i64, 1i64, 1i64), (1, 3, 1), (2, 2, 2), (2, 2, 4)] {
                let par = orb_hyperbolic(TestFn::Par, va, vb, vd, q);
                let iw = orb_hyperbolic(TestFn::Iw, va, vb, vd, q);
                let factor = xpow(1).add(&LaurentPoly::one()).scale(&rat(2 * q));
                assert_eq!(iw, factor.mul(&par));
            }
        }
    }

    #[test]
    fn principal_germ_spot_values() {
        // Iwahori, ramified, r = 1, d = -1/2: single term X^{-1} = -u^2
        let p = principal_germ(TestFn::Iw, Kind::Ramified, 1, -1, 3).unwrap();
        assert_eq!(p, LaurentPoly::monomial(rat(-1), 2));
        // Iwahori, inert: zero
        let p = principal_germ(TestFn::Iw, Kind::Inert, 4, 0, 3).unwrap();
        assert!(p.is_zero());
        // Parahoric central value at even r, d >= 0: alternating sum
        for q in [2i128, 3] {
            for r in [2i64, 4, 6, 8] {
                let p = principal_germ(TestFn::Par, Kind::Inert, r, 0, q).unwrap();
                let expect: i128 = (0..r / 2).map(|j| (-q).pow(j as u32)).sum();
                assert_eq!(p.central_value(), rat(expect));
            }
        }
    }

    #[test]
    fn unipotent_germ_spot_values() {
        for q in [2i128, 3] {
            // (r, d) = (1, -1/2): empty
            assert!(unipotent_germ(TestFn::Iw, 1, -1, q).unwrap().is_zero());
            // (r, d) = (3, -1/2): central value -2
            let u = unipotent_germ(TestFn::Iw, 3, -1, q).unwrap();
            assert_eq!(u.central_value(), rat(-2));
            // parahoric (4, 0): central value 1
            let u = unipotent_germ(TestFn::Par, 4, 0, q).unwrap();
            assert_eq!(u.central_value(), rat(1));
        }
    }

    #[test]
    fn closed_form_spot_values() {
        for q in [2i128, 3] {
            if q != 2 {
                // Iwahori (ramified, 1, -1/2) = u
                let p = orbital_closed(TestFn::Iw, &NumInvariant::new(Kind::Ramified, 1, -1), q)
                    .unwrap();
                assert_eq!(p, LaurentPoly::monomial(rat(1), 1));
            }
            // Par (inert, 4, 0): central value 2
            let p = orbital_closed(TestFn::Par, &NumInvariant::new(Kind::Inert, 4, 0), q).unwrap();
            assert_eq!(p.central_value(), rat(2));
            // Par (split, 4, 0): central value 0
            let p = orbital_closed(TestFn::Par, &NumInvariant::new(Kind::Split, 4, 0), q).unwrap();
            assert_eq!(p.central_value(), rat(0));
        }
    }

    #[test]
    fn brute_matches_closed_small() {
        // a fast spot check; the full sweep lives in the acceptance suite
        for (q, kind, r, d2) in [
            (3u64, Kind::Ramified, 1i64, -1i64),
            (2, Kind::Inert, 2, 0),
            (3, Kind::Split, 2, 0),
            (2, Kind::Split, 3, -1),
        ] {
            let inv = NumInvariant::new(kind, r, d2);
            let alg = make_alg(kind, q, &inv);
            let w = alg.element_from_invariant(&inv).unwrap();
            for fnk in [TestFn::Par, TestFn::Iw] {
                let brute = orbital_brute(fnk, &alg, &w, default_c_max(&inv)).unwrap();
                let closed = orbital_closed(fnk, &inv, q as i128).unwrap();
                assert_eq!(brute, closed, "{fnk:?} {inv} q={q}");
            }
        }
    }

    #[test]
    fn functional_equations_on_closed_forms() {
        for q in [2i128, 3] {
            for kind in [Kind::Split, Kind::Inert, Kind::Ramified] {
                for r in -2..=5i64 {
                    for d2 in -3..=3i64 {
                        let inv = NumInvariant::new(kind, r, d2);
                        if !inv.is_valid() {
                            continue;
                        }
                        for fnk in [TestFn::Par, TestFn::Iw, TestFn::Dnorm] {
                            let p = orbital_closed(fnk, &inv, q).unwrap();
                            assert!(
                                functional_equation_check(fnk, &inv, &p),
                                "feq {fnk:?} {inv} q={q}: {p}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reference_table_spot_values() {
        for q in [2i128, 3] {
            let t = reference_table(&NumInvariant::new(Kind::Inert, 2, 0), q).unwrap();
            assert_eq!((t.orb_par_central, t.orb_iw_central, t.d_orb_coeff), (1, 0, 4 * q + 4));
            let t = reference_table(&NumInvariant::new(Kind::Ramified, 4, 2), q).unwrap();
            assert_eq!((t.orb_par_central, t.d_orb_coeff), (1, 4 * q + 4));
            let t = reference_table(&NumInvariant::new(Kind::Split, 2, 0), q).unwrap();
            assert_eq!((t.orb_par_central, t.d_orb_coeff), (1, 4 * q));
        }
    }
}
