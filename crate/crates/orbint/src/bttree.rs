//! The Bruhat-Tits tree of PGL2 over the unramified quadratic extension E:
//! homothety classes of rank-2 O_E-lattices, conjugate-linear multiplicity
//! functions, their maximizing set T(z), shape classification, and ball
//! counting (with split-apartment quotients).
//!
//! A conjugate-linear map is stored as v -> A sigma(v) with sigma the Galois
//! conjugation of E/F applied entrywise. Its square acts E-linearly as
//! A sigma(A), whose characteristic polynomial has coefficients in F; the
//! numerical invariant of that polynomial drives everything.
//!
//! Construction from an invariant is validate-after-build: the candidate A is
//! produced from a closed template per kind (norm equations solved by residue
//! search plus trace lifting), then checked against the characteristic
//! polynomial of the intended element.

use std::collections::BTreeMap;
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::ff::{norm_preimage, trace_one, Fq, Fq2, ResidueField};
use crate::lattices::{apply_mat, index_one_sublattices, Lattice, Mat2};
use crate::localfield::{FieldParams, Kind, NumInvariant, QuadAlgebra};
use crate::series::Series;

type ESeries = Series<Fq2>;
type ELattice = Lattice<Fq2>;

/// v -> A sigma(v) on E^2.
pub struct ConjLinearMap {
    pub a: Mat2<Fq2>,
    pub inv: NumInvariant,
    pub params: FieldParams,
}

/// Shape of the maximizing set T(z), as classified structurally.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Shape {
    VertexBall(i64),
    Edge,
    EdgeBall(i64),
    Apartment,
    ApartmentBall(i64),
}

impl Shape {
    /// Radius-0 apartment balls are apartments.
    pub fn normalized(self) -> Shape {
        match self {
            Shape::ApartmentBall(0) => Shape::Apartment,
            s => s,
        }
    }

    pub fn render(self) -> String {
        match self {
            Shape::VertexBall(d) => format!("vertex_ball({d})"),
            Shape::Edge => "edge".into(),
            Shape::EdgeBall(d) => format!("edge_ball({d})"),
            Shape::Apartment => "apartment".into(),
            Shape::ApartmentBall(d) => format!("apartment_ball({d})"),
        }
    }
}

/// The shape predicted from the numerical invariant.
pub fn predicted_shape(inv: &NumInvariant) -> Result<Shape> {
    check_tree_realizable(inv)?;
    let d = inv.d2 / 2;
    Ok(match inv.kind {
        Kind::Inert => {
            if inv.r.rem_euclid(4) == 0 {
                Shape::VertexBall(d)
            } else {
                Shape::Edge
            }
        }
        Kind::Ramified => {
            if inv.r.rem_euclid(4) == 0 {
                Shape::EdgeBall(d)
            } else {
                Shape::Edge
            }
        }
        Kind::Split => {
            if inv.d2 >= 0 {
                Shape::ApartmentBall(d).normalized()
            } else {
                Shape::Apartment
            }
        }
    })
}

/// Realizability of an invariant as the square of a conjugate-linear map:
/// the element must be a norm from the composite with E, i.e. ramified needs
/// r even and split needs both component valuations even.
pub fn check_tree_realizable(inv: &NumInvariant) -> Result<()> {
    inv.check_valid()?;
    match inv.kind {
        Kind::Inert => Ok(()),
        Kind::Ramified => {
            if inv.r.rem_euclid(2) == 0 {
                Ok(())
            } else {
                Err(Error::NotRealizable(format!(
                    "{inv}: ramified squares have even norm valuation"
                )))
            }
        }
        Kind::Split => {
            let (v1, v2) = inv.split_component_valuations();
            if v1.rem_euclid(2) == 0 && v2.rem_euclid(2) == 0 {
                Ok(())
            } else {
                Err(Error::NotRealizable(format!(
                    "{inv}: split component valuations ({v1}, {v2}) must be even"
                )))
            }
        }
    }
}

/// Maximum of the multiplicity function: floor(r/4) for d >= 0, else
/// floor((r + 2d)/4).
pub fn max_multiplicity(inv: &NumInvariant) -> i64 {
    if inv.d2 >= 0 {
        inv.r.div_euclid(4)
    } else {
        (inv.r + inv.d2).div_euclid(4)
    }
}

// ---- norm-equation solving over the unramified quadratic extension ----

/// Solve u conj(u) = target for a unit target with base-field coefficients.
/// Works in any uniformizer convention (the variable is formal).
fn solve_unit_norm(params: &FieldParams, target: &ESeries) -> Result<ESeries> {
    let t0 = target.coeff(0)?;
    if target.val_nonzero()? != 0 {
        return Err(Error::Domain("norm target must be a unit".into()));
    }
    if !t0.in_base() {
        return Err(Error::Internal("norm target not in the base field".into()));
    }
    let u0 = norm_preimage(&params.fq2, &t0.a)
        .ok_or_else(|| Error::Internal("residue norm equation unsolvable".into()))?;
    let tau = trace_one(&params.fq2);
    let prec = target.prec().min(params.prec);
    let mut u = Series::monomial(u0, 0).truncate(prec);
    loop {
        let defect = target.sub(&u.mul(&u.conj()));
        if defect.is_zero_at_prec() || defect.is_exact_zero() {
            break;
        }
        let v = defect.val_nonzero()?;
        if v >= prec {
            break;
        }
        let dv = defect.coeff(v)?;
        if !dv.in_base() {
            return Err(Error::Internal("norm defect escaped the base field".into()));
        }
        // multiply u by 1 + pi^v c with trace(c) = defect_v / target_0
        let scale = dv.a.mul(&t0.a.inv().expect("unit target"));
        let c = Fq2::new(&params.fq2, tau.a.mul(&scale), tau.b.mul(&scale));
        let corr = Series::one(u.zero_elem()).add(&Series::monomial(c, v));
        u = u.mul(&corr).truncate(prec);
    }
    Ok(u)
}

/// Embed an F-series into E coefficient-wise.
fn embed_series(params: &FieldParams, s: &Series<Fq>) -> ESeries {
    let zero2 = Fq2::embed(&params.fq2, params.zero());
    s.map_coeffs(zero2, |c| Fq2::embed(&params.fq2, c.clone()))
}

/// An element x + y zeta of the inert algebra as an E-series.
fn inert_to_e(params: &FieldParams, x: &Series<Fq>, y: &Series<Fq>) -> ESeries {
    let zeta = Series::monomial(Fq2::zeta(&params.fq2), 0);
    embed_series(params, x).add(&embed_series(params, y).mul(&zeta))
}

/// Interleave (x(pi), y(pi)) into the vpi-adic series x + y vpi, vpi^2 = pi.
fn ramified_to_wseries(params: &FieldParams, x: &Series<Fq>, y: &Series<Fq>) -> ESeries {
    let e = embed_series(params, x);
    let o = embed_series(params, y);
    let stretch = |s: &ESeries| -> ESeries {
        let zero = s.zero_elem();
        if s.is_zero_at_prec() {
            return Series::zero_to_prec(zero, 2 * s.prec().min(params.prec));
        }
        let lo = s.val_floor();
        let hi = s.prec().min(params.prec);
        let mut coeffs = Vec::new();
        for k in lo..hi {
            coeffs.push(s.coeff(k).expect("below precision"));
            coeffs.push(zero.clone());
        }
        Series::from_coeffs(2 * lo, 2 * hi, coeffs, zero)
    };
    stretch(&e).add(&stretch(&o).shift(1))
}

/// Split a vpi-adic series into its even part y0(pi) and odd part y1(pi)
/// (so the value is y0 + y1 vpi).
fn wseries_parts(params: &FieldParams, s: &ESeries) -> Result<(ESeries, ESeries)> {
    let zero = s.zero_elem();
    let prec2 = s.prec().min(2 * params.prec);
    if s.is_zero_at_prec() {
        let z = Series::zero_to_prec(zero, prec2.div_euclid(2));
        return Ok((z.clone(), z));
    }
    let lo = s.val_floor();
    let mut even = Vec::new();
    let mut odd = Vec::new();
    let start = if lo.rem_euclid(2) == 0 { lo } else { lo - 1 };
    for k in start..prec2 {
        let c = s.coeff(k).unwrap_or_else(|_| zero.clone());
        if k.rem_euclid(2) == 0 {
            even.push(c);
        } else {
            odd.push(c);
        }
    }
    // even entry k maps to pi-exponent k/2; odd entry k to (k-1)/2, and the
    // first odd entry is start + 1, so both parts begin at start/2
    let y0 = Series::from_coeffs(start.div_euclid(2), prec2.div_euclid(2), even, zero.clone());
    let y1 = Series::from_coeffs(start.div_euclid(2), prec2.div_euclid(2), odd, zero);
    Ok((y0, y1))
}

/// Build a conjugate-linear z whose square has the given invariant.
pub fn conj_linear_from_invariant(q: u64, inv: &NumInvariant) -> Result<ConjLinearMap> {
    check_tree_realizable(inv)?;
    let params = FieldParams::for_invariant(q, inv)?;
    let alg = QuadAlgebra::new(inv.kind, params.clone())?;
    let w = alg.element_from_invariant(inv)?;
    let zero2 = Fq2::embed(&params.fq2, params.zero());
    let zero_s = || Series::zero(zero2.clone());

    let a = match inv.kind {
        Kind::Inert => {
            // A = [[0, w],[1, 0]]: square is diag(w, conj(w))
            let we = inert_to_e(&params, &w.x, &w.y);
            Mat2::new(zero_s(), we, Series::one(zero2.clone()), zero_s())
        }
        Kind::Split => {
            // A = diag(a1, a2) with N(a_i) the split components of w
            let (c1, c2) = alg.split_components(&w);
            let mut diag = Vec::new();
            for comp in [c1, c2] {
                let v = comp.val_nonzero()?;
                let unit = embed_series(&params, &comp.shift(-v));
                let sol = solve_unit_norm(&params, &unit)?;
                diag.push(sol.shift(v / 2));
            }
            Mat2::new(diag[0].clone(), zero_s(), zero_s(), diag[1].clone())
        }
        Kind::Ramified => {
            // solve N(y) = w in the unramified quadratic extension of L,
            // working vpi-adically; A is multiplication by y on (1, vpi)
            let ws = ramified_to_wseries(&params, &w.x, &w.y);
            let v = ws.val_nonzero()?;
            debug_assert_eq!(v, inv.r);
            let unit = ws.shift(-v);
            let sol = solve_unit_norm(&params, &unit)?.shift(v / 2);
            let (y0, y1) = wseries_parts(&params, &sol)?;
            Mat2::new(y0.clone(), y1.shift(1), y1.clone(), y0)
        }
    };

    let z = ConjLinearMap { a, inv: *inv, params: params.clone() };
    // post-validation: char(z^2) has F-coefficients equal to the trace and
    // norm of the intended element
    let sq = z.square();
    let tr = sq.a.add(&sq.d);
    let det = sq.det();
    let tr_f = embed_series(&params, &alg.trace(&w));
    let det_f = embed_series(&params, &alg.norm(&w));
    let coeffs_in_f = series_in_base(&tr)? && series_in_base(&det)?;
    if !coeffs_in_f
        || !tr.sub(&tr_f).is_zero_at_prec()
        || !det.sub(&det_f).is_zero_at_prec()
    {
        return Err(Error::Internal(format!(
            "template validation failed for {inv}: characteristic polynomial mismatch"
        )));
    }
    // validated at full precision; tree exploration only resolves
    // multiplicities bounded by r against lattices of bounded determinant,
    // so a shorter working precision suffices (underflow stays a hard error)
    let work = (inv.r.abs() + inv.d2.abs() + 24).max(32);
    Ok(ConjLinearMap {
        a: Mat2::new(
            z.a.a.truncate(work),
            z.a.b.truncate(work),
            z.a.c.truncate(work),
            z.a.d.truncate(work),
        ),
        inv: z.inv,
        params: z.params,
    })
}

fn series_in_base(s: &ESeries) -> Result<bool> {
    if s.is_zero_at_prec() {
        return Ok(true);
    }
    let lo = s.val_floor();
    let hi = s.prec().min(lo + 512);
    for k in lo..hi {
        if !s.coeff(k)?.in_base() {
            return Ok(false);
        }
    }
    Ok(true)
}

impl ConjLinearMap {
    /// The E-linear square A sigma(A).
    pub fn square(&self) -> Mat2<Fq2> {
        self.a.mul(&self.a.conj())
    }

    /// Scale by pi: shifts every multiplicity by one.
    pub fn scaled(&self, k: i64) -> ConjLinearMap {
        let pi_k = Series::pi_pow(self.a.a.zero_elem(), k);
        ConjLinearMap {
            a: self.a.scale_series(&pi_k),
            inv: NumInvariant::new(self.inv.kind, self.inv.r + 4 * k, self.inv.d2),
            params: self.params.clone(),
        }
    }

    /// n(z, lattice): the largest k with z L <= pi^k L, computed as the
    /// minimum valuation of B^{-1} A sigma(B) over a basis B of L.
    pub fn multiplicity(&self, lat: &ELattice) -> Result<i64> {
        let b = lat.basis();
        let m = b.inverse()?.mul(&self.a).mul(&b.conj());
        m.min_val()
    }
}

fn enc_fq2(c: &Fq2) -> u64 {
    c.a.v * c.a.ctx.q + c.b.v
}

/// Direct enumeration of the q^2 + 1 index-1 sublattices of a Hermite-form
/// lattice [[pi^a, c],[0, pi^b]], avoiding the generic reduction machinery:
/// - span(pi g1, g2) = [[pi^{a+1}, c],[0, pi^b]];
/// - span(g1, pi g2) = [[pi^a, pi c mod pi^a],[0, pi^{b+1}]];
/// - for a unit residue e: span(g1 + e g2, pi g2)
///   = [[pi^{a+1}, (pi^a / e + c) mod pi^{a+1}],[0, pi^b]].
fn fast_index_one(lat: &ELattice) -> Vec<ELattice> {
    let zero = lat.c.zero_elem();
    let mut out = Vec::with_capacity(
        (zero.ctx.base.q * zero.ctx.base.q + 1) as usize,
    );
    out.push(ELattice { a: lat.a + 1, b: lat.b, c: lat.c.clone() });
    out.push(ELattice {
        a: lat.a,
        b: lat.b + 1,
        c: lat.c.shift(1).reduce_mod(lat.a).to_exact(),
    });
    for e in zero.all_elements() {
        if e.is_zero() {
            continue;
        }
        let einv = e.inv().expect("nonzero residue");
        let c2 = Series::monomial(einv, lat.a)
            .add(&lat.c)
            .reduce_mod(lat.a + 1)
            .to_exact();
        out.push(ELattice { a: lat.a + 1, b: lat.b, c: c2 });
    }
    out
}

type VKey = (i64, i64, i64, Vec<u64>);

/// One explored vertex: lattice, multiplicity, distance to T, neighbors.
pub struct VertexInfo {
    pub lat: ELattice,
    pub n: i64,
    pub dist: i64,
    /// Canonical keys of the q^2 + 1 neighbors (with multiplicity in
    /// quotient mode).
    pub neighbors: Vec<VKey>,
}

/// The explored window: T(z) plus a ball of fixed radius around it, with the
/// multiplicity function verified against the distance law everywhere.
pub struct TreeWindow {
    pub m: i64,
    pub quotient: bool,
    pub t_keys: Vec<VKey>,
    pub info: BTreeMap<VKey, VertexInfo>,
    pub radius: i64,
}

/// Canonicalizer for vertices: primitive Hermite class, plus the apartment
/// translation normalization in quotient mode.
struct VertexCtx {
    quotient: bool,
}

impl VertexCtx {
    fn canon(&self, lat: &ELattice) -> ELattice {
        let p = lat.primitive_class();
        if !self.quotient {
            return p;
        }
        // translate by diag(pi, pi^{-1})^{-k} so the imbalance a - b lands
        // in {0, 1}; the imbalance is homothety-invariant and shifts by 2
        // under the translation generator
        let imb = p.a - p.b;
        let k = imb.div_euclid(2);
        if k == 0 {
            return p;
        }
        let zero = p.c.zero_elem();
        let t = Mat2::new(
            Series::pi_pow(zero.clone(), -k),
            Series::zero(zero.clone()),
            Series::zero(zero.clone()),
            Series::pi_pow(zero, k),
        );
        apply_mat(&t, &p).expect("translation is invertible").primitive_class()
    }

    fn key(&self, lat: &ELattice) -> VKey {
        lat.key(enc_fq2)
    }
}

/// Translate a lattice class by the split-apartment generator normalization.
pub fn quotient_canonicalize(lat: &ELattice) -> ELattice {
    VertexCtx { quotient: true }.canon(lat)
}

/// Explore T(z) and the ball of radius max(m, 0) + extra around it.
///
/// Completeness: the multiplicity function is verified to equal
/// m - d(-, T(z)) on the whole window, which forces strict decay on the
/// boundary and certifies that nothing outside was missed.
pub fn compute_t(z: &ConjLinearMap, extra: i64) -> Result<TreeWindow> {
    let quotient = z.inv.kind == Kind::Split;
    let vc = VertexCtx { quotient };
    let zero2 = z.a.a.zero_elem();
    let start = vc.canon(&Lattice::standard(zero2));

    // gradient ascent to the maximizing set
    let mut cur = start;
    let mut cur_n = z.multiplicity(&cur)?;
    let limit = 64 + 4 * z.inv.r.abs() + 2 * z.inv.d2.abs();
    for _ in 0..limit {
        let mut better = None;
        for nb in fast_index_one(&cur) {
            let nb = vc.canon(&nb);
            let n = z.multiplicity(&nb)?;
            if n > cur_n {
                better = Some((nb, n));
                break;
            }
        }
        match better {
            Some((nb, n)) => {
                cur = nb;
                cur_n = n;
            }
            None => break,
        }
    }
    let m = cur_n;
    let expect_m = max_multiplicity(&z.inv);
    if m != expect_m {
        return Err(Error::Internal(format!(
            "ascent reached multiplicity {m}, formula predicts {expect_m} for {}",
            z.inv
        )));
    }

    // T is connected, so a breadth-first search over {n = m} finds all of it;
    // the distance law verified below certifies that nothing was missed.
    let radius = m.max(0) + extra;
    let mut info: BTreeMap<VKey, VertexInfo> = BTreeMap::new();
    let k0 = vc.key(&cur);
    info.insert(k0.clone(), VertexInfo { lat: cur, n: m, dist: 0, neighbors: Vec::new() });
    let mut stack = vec![k0];
    while let Some(key) = stack.pop() {
        let lat = info[&key].lat.clone();
        let mut nbk = Vec::new();
        for nb in fast_index_one(&lat) {
            let nb = vc.canon(&nb);
            let k = vc.key(&nb);
            if !info.contains_key(&k) {
                let n = z.multiplicity(&nb)?;
                let dist = if n == m { 0 } else { 1 };
                info.insert(
                    k.clone(),
                    VertexInfo { lat: nb, n, dist, neighbors: Vec::new() },
                );
                if dist == 0 {
                    stack.push(k.clone());
                }
            }
            nbk.push(k);
        }
        info.get_mut(&key).expect("inserted").neighbors = nbk;
    }

    // expand the surrounding rings out to the window radius
    for d in 1..=radius {
        let ring: Vec<VKey> = info
            .iter()
            .filter(|(_, v)| v.dist == d && v.neighbors.is_empty())
            .map(|(k, _)| k.clone())
            .collect();
        for key in ring {
            let lat = info[&key].lat.clone();
            let mut nbk = Vec::new();
            for nb in fast_index_one(&lat) {
                let nb = vc.canon(&nb);
                let k = vc.key(&nb);
                if !info.contains_key(&k) && d < radius {
                    let n = z.multiplicity(&nb)?;
                    info.insert(
                        k.clone(),
                        VertexInfo { lat: nb.clone(), n, dist: d + 1, neighbors: Vec::new() },
                    );
                }
                nbk.push(k);
            }
            info.get_mut(&key).expect("present").neighbors = nbk;
        }
    }

    let mut t_keys = Vec::new();
    for (k, v) in &info {
        if v.n == m {
            t_keys.push(k.clone());
        }
        // the distance law: n = m - d(-, T), strict decay on the boundary
        if v.n != m - v.dist {
            return Err(Error::Internal(format!(
                "distance law violated at distance {}: n = {} but m = {m}",
                v.dist, v.n
            )));
        }
    }
    t_keys.sort();
    Ok(TreeWindow { m, quotient, t_keys, info, radius })
}

impl TreeWindow {
    /// Number of vertices within distance k of T (k <= radius).
    pub fn ball_census(&self, k: i64) -> Result<i128> {
        if k < 0 {
            return Ok(0);
        }
        if k > self.radius {
            return Err(Error::Domain(format!(
                "census radius {k} exceeds window radius {}",
                self.radius
            )));
        }
        Ok(self.info.values().filter(|v| v.dist <= k).count() as i128)
    }

    /// Multiplicity of a vertex by key; vertices outside the window are below
    /// every multiplicity tracked inside it.
    pub fn n_of(&self, key: &VKey) -> Option<i64> {
        self.info.get(key).map(|v| v.n)
    }

    /// Count of vertices with multiplicity >= 0, i.e. the ball of radius m
    /// around T (quotient count in quotient mode); zero when m < 0.
    pub fn nonneg_count(&self) -> Result<i128> {
        self.ball_census(self.m)
    }

    /// Valency of a T-vertex inside T (with multiplicity in quotient mode).
    pub fn t_valency(&self, key: &VKey) -> usize {
        self.info[key]
            .neighbors
            .iter()
            .filter(|k| self.t_keys.binary_search(k).is_ok())
            .count()
    }

    /// Structural classification of T by iterated leaf stripping.
    ///
    /// A two-vertex core is an edge; since a radius-0 edge ball is the same
    /// graph, that case is disambiguated by the invariant (r = 0 mod 4 means
    /// an edge ball).
    pub fn classify_shape(&self, inv: &NumInvariant) -> Result<Shape> {
        let mut cur: Vec<VKey> = self.t_keys.clone();
        let valency = |set: &[VKey], k: &VKey| -> usize {
            self.info[k]
                .neighbors
                .iter()
                .filter(|n| set.binary_search(n).is_ok())
                .count()
        };
        let mut rounds = 0i64;
        loop {
            if cur.len() == 1 {
                return Ok(Shape::VertexBall(rounds));
            }
            let vals: Vec<usize> = cur.iter().map(|k| valency(&cur, k)).collect();
            if vals.iter().all(|&v| v == 2) {
                // a cycle: the quotient image of an apartment core
                return Ok(Shape::ApartmentBall(rounds).normalized());
            }
            if cur.len() == 2 && vals == [1, 1] {
                return Ok(if rounds > 0 {
                    Shape::EdgeBall(rounds)
                } else if inv.r.rem_euclid(4) == 0 {
                    Shape::EdgeBall(0)
                } else {
                    Shape::Edge
                });
            }
            let next: Vec<VKey> = cur
                .iter()
                .zip(&vals)
                .filter(|(_, &v)| v >= 2)
                .map(|(k, _)| k.clone())
                .collect();
            if next.len() == cur.len() || next.is_empty() {
                return Err(Error::Internal(format!(
                    "unclassifiable maximizing set ({} vertices, valencies {vals:?})",
                    cur.len()
                )));
            }
            cur = next;
            rounds += 1;
        }
    }
}

/// Vertex and edge counts of a shape (quotient counts for apartment kinds).
fn shape_census(shape: Shape, q: i128) -> (i128, i128) {
    let geo = |lo: i64, hi: i64| -> i128 { (lo..=hi).map(|j| q.pow(j as u32)).sum() };
    match shape.normalized() {
        Shape::VertexBall(d) => {
            let v = 1 + (q + 1) * geo(0, d - 1);
            (v, v - 1)
        }
        Shape::Edge => (2, 1),
        Shape::EdgeBall(d) => {
            let v = 2 * geo(0, d);
            (v, v - 1)
        }
        Shape::Apartment => (2, 2),
        Shape::ApartmentBall(d) => {
            let v = 2 * q.pow(d as u32);
            (v, v)
        }
    }
}

/// Closed-form count of the ball of radius m around a maximizing set of the
/// given shape inside the (q^2+1)-regular tree (quotient counts for
/// apartment kinds): every external edge carries a q^2-ary subtree.
pub fn ball_count(shape: Shape, m: i64, q: i128) -> i128 {
    if m < 0 {
        return 0;
    }
    let (vt, et) = shape_census(shape, q);
    let external = (q * q + 1) * vt - 2 * et;
    let growth: i128 = (0..m).map(|i| (q * q).pow(i as u32)).sum();
    vt + external * growth
}

/// Census-vs-formula ball count; both computations must agree.
pub fn ball_count_checked(
    window: &TreeWindow,
    shape: Shape,
    m: i64,
    q: i128,
) -> Result<i128> {
    let formula = ball_count(shape, m, q);
    let census = window.ball_census(m)?;
    if formula != census {
        return Err(Error::Internal(format!(
            "ball count mismatch for {} at radius {m}: formula {formula}, census {census}",
            shape.render()
        )));
    }
    Ok(formula)
}

/// Verify n(z, -) = m - d(-, T) on the whole window (already enforced during
/// construction; re-exposed as a named check).
pub fn distance_law_check(window: &TreeWindow) -> bool {
    window.info.values().all(|v| v.n == window.m - v.dist)
}

/// The q^2 + 1 neighboring homothety classes, in deterministic order.
pub fn neighbors(lat: &ELattice) -> Result<Vec<ELattice>> {
    Ok(index_one_sublattices(lat)?
        .into_iter()
        .map(|l| l.primitive_class())
        .collect())
}

/// Standard E-lattice.
pub fn standard_lattice(params: &FieldParams) -> ELattice {
    Lattice::standard(Fq2::embed(&params.fq2, params.zero()))
}

/// Convenience: a pi-scaled copy of a conjugate-linear map has multiplicity
/// raised by one everywhere (used by the scaling-transport tests).
pub fn pi_scaled(z: &ConjLinearMap) -> ConjLinearMap {
    z.scaled(1)
}

/// Build parameters suitable for the tree datum of an invariant.
pub fn tree_params(q: u64, inv: &NumInvariant) -> Result<Rc<FieldParams>> {
    Ok(Rc::new(FieldParams::for_invariant(q, inv)?))
}
