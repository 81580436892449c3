//! Property tests for the algebraic invariants that hold on all inputs:
//! reflection symmetries of Laurent polynomials, Hermite canonicalization as
//! a congruence, and unit-twist invariance of numerical invariants.

use proptest::prelude::*;

use orbint::lattices::{apply_mat, hermite_normalize, relative_position, Lattice, Mat2};
use orbint::laurent::{rat, ratio, LaurentPoly};
use orbint::localfield::{FieldParams, Kind, NumInvariant, QuadAlgebra};
use orbint::series::Series;

fn small_poly() -> impl Strategy<Value = LaurentPoly> {
    proptest::collection::vec((-6i64..=6, -9i128..=9, 1i128..=4), 0..6).prop_map(|terms| {
        let mut p = LaurentPoly::zero();
        for (k, n, d) in terms {
            p = p.add(&LaurentPoly::monomial(ratio(n, d), k));
        }
        p
    })
}

proptest! {
    #[test]
    fn reflect_is_an_involution(p in small_poly()) {
        prop_assert_eq!(p.reflect().reflect(), p.clone());
        prop_assert_eq!(p.reflect().central_value(), p.central_value());
        prop_assert_eq!(
            p.reflect().central_derivative_coeff(),
            -p.central_derivative_coeff()
        );
    }

    #[test]
    fn x_series_respects_products(a in -4i64..=4, b in -4i64..=4) {
        let xa = LaurentPoly::from_x_series([(rat(1), a)]);
        let xb = LaurentPoly::from_x_series([(rat(1), b)]);
        let xab = LaurentPoly::from_x_series([(rat(1), a + b)]);
        prop_assert_eq!(xa.mul(&xb), xab);
    }

    #[test]
    fn hermite_is_a_congruence(
        a in 0i64..=3, b in 0i64..=3,
        c0 in 0u64..3, c1 in 0u64..3,
        t0 in 0u64..3, t1 in 0u64..3,
        swap in proptest::bool::ANY,
    ) {
        // build a lattice, apply a random unimodular column operation, and
        // check the canonical form is unchanged
        let params = FieldParams::new(3, 48).unwrap();
        let zero = params.zero();
        let c = Series::monomial(params.fq_elem(c0 as i64), 0)
            .add(&Series::monomial(params.fq_elem(c1 as i64), 1));
        let base = Mat2::new(
            Series::pi_pow(zero.clone(), a),
            c,
            Series::zero(zero.clone()),
            Series::pi_pow(zero.clone(), b),
        );
        let lat = hermite_normalize(&base).unwrap();
        // column operation: col2 += t * col1, then optional swap
        let t = Series::monomial(params.fq_elem(t0 as i64), 0)
            .add(&Series::monomial(params.fq_elem(t1 as i64), 2));
        let (m1, m2) = (base.a.clone(), base.b.add(&base.a.mul(&t)));
        let (m3, m4) = (base.c.clone(), base.d.add(&base.c.mul(&t)));
        let twisted = if swap {
            Mat2::new(m2, m1, m4, m3)
        } else {
            Mat2::new(m1, m2, m3, m4)
        };
        prop_assert_eq!(hermite_normalize(&twisted).unwrap(), lat);
    }

    #[test]
    fn relative_position_is_gl2_invariant(
        a in 0i64..=2, b in 0i64..=2, u in 0u64..3, v in -2i64..=2,
    ) {
        let params = FieldParams::new(3, 48).unwrap();
        let zero = params.zero();
        let m0 = Lattice::standard(zero.clone());
        let m1 = hermite_normalize(&Mat2::new(
            Series::pi_pow(zero.clone(), a),
            Series::zero(zero.clone()),
            Series::zero(zero.clone()),
            Series::pi_pow(zero.clone(), b),
        )).unwrap();
        let x = Mat2::new(
            Series::one(zero.clone()),
            Series::monomial(params.fq_elem(u as i64), v),
            Series::zero(zero.clone()),
            Series::monomial(params.fq_elem(1 + u as i64 % 2), 1),
        );
        let xm0 = apply_mat(&x, &m0).unwrap();
        let xm1 = apply_mat(&x, &m1).unwrap();
        prop_assert_eq!(
            relative_position(&xm0, &xm1).unwrap(),
            relative_position(&m0, &m1).unwrap()
        );
    }

    #[test]
    fn invariants_survive_unit_twists(
        r in 1i64..=5, d2 in -3i64..=3, ux in 1i64..=2, uy in 0i64..=2,
    ) {
        for kind in [Kind::Split, Kind::Inert, Kind::Ramified] {
            let inv = NumInvariant::new(kind, r, d2);
            if !inv.realizable_at(3) {
                continue;
            }
            let alg = QuadAlgebra::new(kind, FieldParams::for_invariant(3, &inv).unwrap()).unwrap();
            let w = alg.element_from_invariant(&inv).unwrap();
            let u = alg.elem(
                Series::monomial(alg.params.fq_elem(ux), 0),
                Series::monomial(alg.params.fq_elem(uy), 0),
            );
            if alg.norm(&u).val_nonzero().map(|v| v != 0).unwrap_or(true) {
                continue; // not a unit
            }
            let tw = alg.mul(&alg.mul(&u, &w), &alg.conj(&u));
            prop_assert_eq!(alg.numerical_invariant(&tw).unwrap(), inv);
        }
    }
}
