//! Intersection numbers for the two division-algebra data (Hasse invariants
//! 1/4 and 3/4): closed forms and independent geometric recipes.
//!
//! The 1/4 recipe works on the tree window: each vertex of positive
//! multiplicity m contributes -m [(q^2-1) - m(q^2+1) + sum of neighbor
//! multiplicities], where q^2 - 1 is the conormal degree of a special-fiber
//! component and -(q^2+1) its self-intersection; a single artinian point of
//! length one appears exactly when the maximizing set is an edge with
//! r = 2 mod 4. Only vertices of the maximizing set contribute (interior
//! cancellation), and the split-apartment quotient is handled by the tree
//! module.
//!
//! The 3/4 recipe shifts to the tree datum with invariant (kind, r-2, d) and
//! assembles the answer twice: once through the shifted 1/4 number plus
//! q times the count of nonnegative-multiplicity vertices plus a field
//! constant, and once through an explicit artinian ledger whose row lengths
//! are 1, 2+2q, and q. Both assemblies must agree, and the count is also
//! compared against twice the parahoric central value.

use crate::bttree::{compute_t, conj_linear_from_invariant, TreeWindow};
use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::localfield::{matching_exists, Kind, Lambda, NumInvariant};
use crate::orbital::{orbital_closed, TestFn};

/// Per-row artinian data of the 3/4 intersection locus.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ArtinianRow {
    /// Smooth-point component, ideal (pi, t): length 1.
    SmoothPoint,
    /// Superspecial component at a unit datum, ideal (u, v): length 1.
    SuperspecialUnit,
    /// Split half-unit superspecial component, ideal (u, v^q): length q.
    SplitHalfUnit,
    /// Field component, ideal (pi - u^{q+1}, pi - v^{q+1}): length 2 + 2q.
    FieldComponent,
    /// Boundary point, ideal (pi, v^{q+1}) with embedded part (u, v^q):
    /// length q.
    Boundary,
    /// The single 1/4 artinian point: length 1.
    QuarterPoint,
}

/// Length of an artinian row, with its defining ideal shape.
pub fn artinian_length(row: ArtinianRow, q: i128) -> (i128, &'static str) {
    match row {
        ArtinianRow::SmoothPoint => (1, "(pi, t)"),
        ArtinianRow::SuperspecialUnit => (1, "(u, v)"),
        ArtinianRow::SplitHalfUnit => (q, "(u, v^q)"),
        ArtinianRow::FieldComponent => (2 + 2 * q, "(pi - u^{q+1}, pi - v^{q+1})"),
        ArtinianRow::Boundary => (q, "(pi, v^{q+1}) / embedded (u, v^q)"),
        ArtinianRow::QuarterPoint => (1, "superspecial point of length one"),
    }
}

/// Breakdown of a geometric intersection number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntResult {
    /// The total intersection number (component doubling applied).
    pub value: i128,
    /// The connected-component number.
    pub int0: i128,
    /// Sum of the curve contributions p_Lambda.
    pub pure_sum: i128,
    /// Total artinian length entering int0.
    pub artinian_total: i128,
    /// 2 for the inert kind, 1 otherwise.
    pub doubling: i128,
    /// Artinian ledger rows (row, count) for the 3/4 recipe.
    pub ledger: Vec<(ArtinianRow, i128)>,
}

fn doubling(kind: Kind) -> i128 {
    if kind == Kind::Inert {
        2
    } else {
        1
    }
}

/// Closed-form intersection number.
///
/// 1/4: r (inert), r/2 (ramified), 0 (split), and 0 for r <= 0.
/// 3/4: doubling * q * N + (r, r/2, 0), where N is the count of
/// nonnegative-multiplicity vertices of the shifted tree datum; N is computed
/// both from the tree and as 2 * Orb_Par / doubling, and the two must agree.
pub fn int_closed(lambda: Lambda, inv: &NumInvariant, q: i128) -> Result<i128> {
    if !matching_exists(lambda, inv)? {
        return Err(Error::Domain(format!("no matching orbit for {inv} at lambda = {lambda}")));
    }
    if inv.r <= 0 {
        return Ok(0);
    }
    match lambda {
        Lambda::Quarter => Ok(match inv.kind {
            Kind::Inert => inv.r as i128,
            Kind::Ramified => (inv.r / 2) as i128,
            Kind::Split => 0,
        }),
        Lambda::ThreeQuarter => {
            let delta = doubling(inv.kind);
            let n_tree = shifted_nonneg_count(inv, q)?;
            let par = orbital_closed(TestFn::Par, inv, q)?.central_value_int()?;
            if (2 * par) % delta != 0 {
                return Err(Error::Internal("parahoric count not divisible by the doubling".into()));
            }
            let n_orb = 2 * par / delta;
            if n_tree != n_orb {
                return Err(Error::Internal(format!(
                    "vertex count mismatch for {inv}: tree {n_tree}, orbital {n_orb}"
                )));
            }
            let constant = match inv.kind {
                Kind::Inert => inv.r as i128,
                Kind::Ramified => (inv.r / 2) as i128,
                Kind::Split => 0,
            };
            Ok(delta * q * n_tree + constant)
        }
    }
}

/// N for the shifted datum (kind, r-2, d): vertices with nonnegative
/// multiplicity, counted modulo the apartment translations in the split case.
fn shifted_nonneg_count(inv: &NumInvariant, q: i128) -> Result<i128> {
    if inv.r < 2 {
        return Ok(0);
    }
    let tilde = NumInvariant::new(inv.kind, inv.r - 2, inv.d2);
    let z = conj_linear_from_invariant(q as u64, &tilde)?;
    let window = compute_t(&z, 2)?;
    window.nonneg_count()
}

/// The 1/4 curve-and-point recipe evaluated on an explored window.
fn quarter_from_window(window: &TreeWindow, inv: &NumInvariant, q: i128) -> Result<IntResult> {
    let conormal_deg = q * q - 1;
    let self_int = q * q + 1;
    let mut pure_sum = 0i128;
    for v in window.info.values() {
        let mult = v.n.max(0) as i128;
        if mult < 1 {
            continue;
        }
        let mut nb_sum = 0i128;
        for nk in &v.neighbors {
            let nn = window.n_of(nk).ok_or_else(|| {
                Error::Internal("positive-multiplicity vertex with unexplored neighbor".into())
            })?;
            nb_sum += nn.max(0) as i128;
        }
        let p = -mult * (conormal_deg - mult * self_int + nb_sum);
        // interior cancellation: off the maximizing set the contribution is 0
        if v.dist > 0 && p != 0 {
            return Err(Error::Internal(format!(
                "interior vertex at distance {} contributes {p}",
                v.dist
            )));
        }
        pure_sum += p;
    }
    let artinian =
        if inv.kind.is_field() && inv.r >= 1 && inv.r.rem_euclid(4) == 2 { 1 } else { 0 };
    let int0 = artinian + pure_sum;
    let ledger = if artinian == 1 {
        vec![(ArtinianRow::QuarterPoint, 1)]
    } else {
        Vec::new()
    };
    Ok(IntResult {
        value: doubling(inv.kind) * int0,
        int0,
        pure_sum,
        artinian_total: artinian,
        doubling: doubling(inv.kind),
        ledger,
    })
}

/// The geometric 1/4 intersection number from the tree datum of the
/// invariant itself.
pub fn int_geometric_quarter(inv: &NumInvariant, q: i128) -> Result<IntResult> {
    if !matching_exists(Lambda::Quarter, inv)? {
        return Err(Error::Domain(format!("no matching orbit for {inv} at lambda = 1/4")));
    }
    if inv.r <= 0 {
        return Ok(IntResult {
            value: 0,
            int0: 0,
            pure_sum: 0,
            artinian_total: 0,
            doubling: doubling(inv.kind),
            ledger: Vec::new(),
        });
    }
    let z = conj_linear_from_invariant(q as u64, inv)?;
    let window = compute_t(&z, 2)?;
    quarter_from_window(&window, inv, q)
}

/// The artinian ledger of the 3/4 locus for the shifted window, as rows with
/// counts. Core rows sit on the maximizing set; every vertex strictly between
/// multiplicity 0 and the maximum contributes one boundary point of length q.
fn threequarter_ledger(
    window: &TreeWindow,
    tilde: &NumInvariant,
    n_count: i128,
    q: i128,
) -> Result<Vec<(ArtinianRow, i128)>> {
    let mut rows = Vec::new();
    if window.m < 0 {
        return Ok(rows);
    }
    let t_count = window.t_keys.len() as i128;
    let mut val_sum = 0usize;
    for k in &window.t_keys {
        val_sum += window.t_valency(k);
    }
    if val_sum % 2 != 0 {
        return Err(Error::Internal("odd total valency in the maximizing set".into()));
    }
    let edges_t = (val_sum / 2) as i128;
    match (tilde.kind.is_field(), tilde.r.rem_euclid(4)) {
        (true, 0) => {
            // unit datum: one length-1 point per fixed line, shared on edges
            rows.push((ArtinianRow::SmoothPoint, (q + 1) * t_count - edges_t - edges_t));
            rows.push((ArtinianRow::SuperspecialUnit, edges_t));
        }
        (true, 2) => {
            if t_count != 2 {
                return Err(Error::Internal(
                    "field datum with r = 2 mod 4 must have an edge as maximizing set".into(),
                ));
            }
            rows.push((ArtinianRow::FieldComponent, 1));
        }
        (false, _) => {
            if tilde.d2 >= 0 {
                // unit split datum: length-1 points, quotient-counted
                rows.push((ArtinianRow::SmoothPoint, (q + 1) * t_count - edges_t - edges_t));
                rows.push((ArtinianRow::SuperspecialUnit, edges_t));
            } else {
                // half-unit split datum: one length-q point per edge
                rows.push((ArtinianRow::SplitHalfUnit, edges_t));
            }
        }
        _ => unreachable!("r is even for matched invariants"),
    }
    let boundary = n_count - t_count;
    if boundary < 0 {
        return Err(Error::Internal("negative boundary count".into()));
    }
    if boundary > 0 {
        rows.push((ArtinianRow::Boundary, boundary));
    }
    Ok(rows)
}

fn ledger_total(rows: &[(ArtinianRow, i128)], q: i128) -> i128 {
    rows.iter().map(|(r, n)| artinian_length(*r, q).0 * n).sum()
}

/// The geometric 3/4 intersection number, assembled both through the shifted
/// 1/4 number and through the artinian ledger; the assemblies must agree.
pub fn int_geometric_threequarter(inv: &NumInvariant, q: i128) -> Result<IntResult> {
    if !matching_exists(Lambda::ThreeQuarter, inv)? {
        return Err(Error::Domain(format!("no matching orbit for {inv} at lambda = 3/4")));
    }
    let delta = doubling(inv.kind);
    if inv.r <= 0 {
        return Ok(IntResult {
            value: 0,
            int0: 0,
            pure_sum: 0,
            artinian_total: 0,
            doubling: delta,
            ledger: Vec::new(),
        });
    }
    let tilde = NumInvariant::new(inv.kind, inv.r - 2, inv.d2);
    let z = conj_linear_from_invariant(q as u64, &tilde)?;
    let window = compute_t(&z, 2)?;
    let n_count = window.nonneg_count()?;

    // shifted 1/4 number on the same window (zero in the degenerate range)
    let tilde_quarter = if tilde.r >= 1 {
        quarter_from_window(&window, &tilde, q)?
    } else {
        IntResult {
            value: 0,
            int0: 0,
            pure_sum: 0,
            artinian_total: 0,
            doubling: doubling(tilde.kind),
            ledger: Vec::new(),
        }
    };

    // assembly via the shifted number plus the vertex count
    let field_const = if inv.kind.is_field() { 1 } else { 0 };
    let int0_direct = tilde_quarter.int0 + q * n_count + field_const;

    // assembly via the artinian ledger
    let rows = threequarter_ledger(&window, &tilde, n_count, q)?;
    let quarter_art = if tilde.kind.is_field() && tilde.r >= 2 && tilde.r.rem_euclid(4) == 2 {
        1
    } else {
        0
    };
    let len_art = ledger_total(&rows, q);
    let int0_ledger = tilde_quarter.int0 + len_art - quarter_art;

    if int0_direct != int0_ledger {
        return Err(Error::Internal(format!(
            "ledger assembly mismatch for {inv}: direct {int0_direct}, ledger {int0_ledger}"
        )));
    }
    Ok(IntResult {
        value: delta * int0_direct,
        int0: int0_direct,
        pure_sum: tilde_quarter.pure_sum,
        artinian_total: len_art,
        doubling: delta,
        ledger: rows,
    })
}

/// Geometric intersection number for either Hasse invariant.
pub fn int_geometric(lambda: Lambda, inv: &NumInvariant, q: i128) -> Result<IntResult> {
    match lambda {
        Lambda::Quarter => int_geometric_quarter(inv, q),
        Lambda::ThreeQuarter => int_geometric_threequarter(inv, q),
    }
}

/// The identity 2 Orb_Par = doubling * N for matched 3/4 invariants.
pub fn count_identity_check(inv: &NumInvariant, q: i128) -> Result<bool> {
    if !matching_exists(Lambda::ThreeQuarter, inv)? || inv.r <= 0 {
        return Ok(true);
    }
    let n = shifted_nonneg_count(inv, q)?;
    let par: LaurentPoly = orbital_closed(TestFn::Par, inv, q)?;
    Ok(2 * par.central_value_int()? == doubling(inv.kind) * n)
}
