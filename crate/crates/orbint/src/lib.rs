//! Exact arithmetic for orbital integrals on inner forms of GL4 over a local
//! function field F = F_q((pi)), and for the matching geometry on the
//! Bruhat-Tits tree of PGL2 over the unramified quadratic extension.
//!
//! Everything is computed in exact arithmetic: orbital integrals are Laurent
//! polynomials in u = q^s with rational (in fact integral) coefficients,
//! intersection numbers are integers obtained from tree combinatorics, and the
//! top-level checks compare exact integers. There is no floating point.
//!
//! Module map:
//! - [`laurent`]: Laurent polynomials in u = q^s over the rationals.
//! - [`ff`]: small finite fields F_q and their quadratic extensions.
//! - [`series`]: truncated Laurent series over a residue field (elements of F
//!   and of its unramified quadratic extension E, at tracked precision).
//! - [`localfield`]: the three quadratic etale algebras over F, numerical
//!   invariants (kind, r, d), signs and matching predicates.
//! - [`lattices`]: rank-2 lattices over the valuation ring; Hermite forms,
//!   relative position, sublattice enumeration, conductors.
//! - [`latcount`]: closed-form sublattice/pair counting functions and their
//!   brute-force oracles.
//! - [`orbital`]: parahoric/Iwahori orbital integrals via germ expansion, and
//!   the independent lattice-enumeration oracle.
//! - [`bttree`]: conjugate-linear multiplicity functions on the tree, shape
//!   classification, ball counts, split-apartment quotients.
//! - [`intersect`]: intersection numbers for Hasse invariants 1/4 and 3/4,
//!   closed forms and geometric recipes with artinian ledgers.
//! - [`atverify`]: fundamental-lemma and arithmetic-transfer identity checks.

pub mod atverify;
pub mod bttree;
pub mod error;
pub mod ff;
pub mod intersect;
pub mod latcount;
pub mod lattices;
pub mod laurent;
pub mod localfield;
pub mod orbital;
pub mod series;

pub use error::{Error, Result};
pub use laurent::LaurentPoly;
pub use localfield::{FieldParams, Kind, NumInvariant};
