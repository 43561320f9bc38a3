//! Exact verification of irreducible restrictions of (Brauer) characters of
//! the exceptional groups `G2(q)`, `Sz(q)`, `2G2(q)` and their central covers.
//!
//! * [`exactnum`] — cyclotomic numbers with rational coefficients.
//! * [`chartab`] — (partial) character tables and their validation.
//! * [`fusion`] — class fusions, restriction norms, Clifford bookkeeping.
//! * [`criteria`] — decision rules returning verdicts with evidence.
//! * [`degrees`] — closed-form degree catalogs and maximal-subgroup screens.
//! * [`expr`] — the small polynomial language used by the catalogs.
//! * [`data`] — location of the shipped data files.

pub mod chartab;
pub mod criteria;
pub mod data;
pub mod degrees;
pub mod exactnum;
pub mod expr;
pub mod fusion;
