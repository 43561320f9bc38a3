//! Closed-form degree catalogs and maximal-subgroup order screens.
//!
//! Degrees of `G2(q)` are polynomials in `q` (and `ε ∈ {±1}`, `ε ≡ q mod 3`,
//! bound to the variable `e`).  They are stored as source strings in the
//! [`crate::expr`] grammar and evaluated exactly; a formula that fails to
//! produce a positive integer is reported as an error rather than rounded.
//!
//! Maximal-subgroup candidate lists live in small `.dat` files (see
//! [`CandidateList::parse`]).  The files shipped in `data/` are also embedded
//! in the library, so [`maximal_subgroup_orders`] needs no filesystem access.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::criteria::is_prime;
use crate::exactnum::Rational;
use crate::expr::{Env, Expr, ExprError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DegreesError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("q = {q} is not admissible for {family}: {reason}")]
    Inadmissible { family: Family, q: u64, reason: String },
    #[error("ℓ = {ell} divides q = {q}; only cross characteristic is supported")]
    EllDividesQ { ell: u64, q: u64 },
    #[error("ℓ = {0} is neither 0 nor a prime")]
    BadEll(u64),
    #[error("formula `{formula}` for {name} does not give a positive integer at q = {q} (got {value})")]
    NotIntegral { name: String, formula: String, q: u64, value: String },
    #[error("formula `{formula}`: {source}")]
    Expr { formula: String, source: ExprError },
    #[error("candidate list line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no candidate list for {family} in characteristic {p}")]
    NoCandidateList { family: Family, p: u64 },
}

// ---------------------------------------------------------------------------
// Basic parameters
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    G2,
    Sz,
    Ree,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::G2 => "g2",
            Family::Sz => "sz",
            Family::Ree => "ree",
        })
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "g2" => Ok(Family::G2),
            "sz" | "suzuki" => Ok(Family::Sz),
            "ree" | "2g2" => Ok(Family::Ree),
            other => Err(format!("unknown family `{other}` (expected g2, sz or ree)")),
        }
    }
}

/// The characteristic ℓ, up to the distinctions the degree formulas make.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum EllClass {
    Zero,
    Two,
    Three,
    /// A prime ℓ ≥ 5.
    Other(u64),
}

impl EllClass {
    pub fn from_ell(ell: u64) -> Result<EllClass, DegreesError> {
        match ell {
            0 => Ok(EllClass::Zero),
            2 => Ok(EllClass::Two),
            3 => Ok(EllClass::Three),
            l if l >= 5 && is_prime(l) => Ok(EllClass::Other(l)),
            l => Err(DegreesError::BadEll(l)),
        }
    }

    pub fn ell(self) -> u64 {
        match self {
            EllClass::Zero => 0,
            EllClass::Two => 2,
            EllClass::Three => 3,
            EllClass::Other(l) => l,
        }
    }

    /// Rejects ℓ equal to the defining characteristic `p`.
    pub fn check_cross(self, q: &FieldSize) -> Result<(), DegreesError> {
        if self.ell() == q.p {
            return Err(DegreesError::EllDividesQ { ell: self.ell(), q: q.q });
        }
        Ok(())
    }

    /// Representatives of every class admissible for characteristic `p`.
    pub fn representatives(p: u64) -> Vec<EllClass> {
        [EllClass::Zero, EllClass::Two, EllClass::Three, EllClass::Other(if p == 5 { 7 } else { 5 })]
            .into_iter()
            .filter(|c| c.ell() != p)
            .collect()
    }
}

impl fmt::Display for EllClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ell())
    }
}

/// `q = p^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FieldSize {
    pub q: u64,
    pub p: u64,
    pub n: u32,
}

impl FieldSize {
    pub fn new(q: u64) -> Result<FieldSize, DegreesError> {
        let (p, n) = prime_power(q).ok_or(DegreesError::NotPrimePower(q))?;
        Ok(FieldSize { q, p, n })
    }

    /// `ε ∈ {−1, 0, 1}` with `ε ≡ q (mod 3)`.
    pub fn epsilon(&self) -> i64 {
        match self.q % 3 {
            0 => 0,
            1 => 1,
            _ => -1,
        }
    }

    fn env(&self) -> Env {
        let mut env = Env::new();
        env.insert("q".into(), Rational::from_integer(self.q.into()));
        env.insert("p".into(), Rational::from_integer(self.p.into()));
        env.insert("e".into(), Rational::from_integer(self.epsilon().into()));
        env
    }
}

/// Returns `(p, n)` with `q = p^n`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..).take_while(|d| d * d <= q).find(|d| q.is_multiple_of(*d)).unwrap_or(q);
    let (mut r, mut n) = (q, 0);
    while r % p == 0 {
        r /= p;
        n += 1;
    }
    (r == 1).then_some((p, n))
}

fn g2_field(q: u64) -> Result<FieldSize, DegreesError> {
    let f = FieldSize::new(q)?;
    if q < 5 {
        return Err(DegreesError::Inadmissible { family: Family::G2, q, reason: "q must be at least 5".into() });
    }
    Ok(f)
}

fn field_for(family: Family, q: u64) -> Result<FieldSize, DegreesError> {
    let f = FieldSize::new(q)?;
    let bad = |reason: &str| Err(DegreesError::Inadmissible { family, q, reason: reason.into() });
    match family {
        Family::G2 => g2_field(q),
        Family::Sz if f.p != 2 || f.n % 2 == 0 || f.n < 3 => bad("q must be 2^n with n odd and n >= 3"),
        Family::Ree if f.p != 3 || f.n % 2 == 0 || f.n < 3 => bad("q must be 3^n with n odd and n >= 3"),
        _ => Ok(f),
    }
}

// ---------------------------------------------------------------------------
// Degree values
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum DegreeValue {
    Exact(#[serde(serialize_with = "ser_display")] BigInt),
    LowerBound(#[serde(serialize_with = "ser_display")] BigInt),
}

fn ser_display<S: serde::Serializer, T: fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl DegreeValue {
    pub fn value(&self) -> &BigInt {
        match self {
            DegreeValue::Exact(v) | DegreeValue::LowerBound(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, DegreeValue::Exact(_))
    }
}

impl fmt::Display for DegreeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DegreeValue::Exact(v) => write!(f, "{v}"),
            DegreeValue::LowerBound(v) => write!(f, ">= {v}"),
        }
    }
}

/// A named degree together with the formula it was evaluated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeEntry {
    pub name: String,
    pub formula: String,
    pub value: DegreeValue,
}

fn eval_formula(name: &str, formula: &str, f: &FieldSize) -> Result<BigInt, DegreesError> {
    let expr = Expr::parse(formula).map_err(|source| DegreesError::Expr { formula: formula.into(), source })?;
    let v = expr.eval(&f.env()).map_err(|source| DegreesError::Expr { formula: formula.into(), source })?;
    if !v.is_integer() || !v.is_positive() {
        return Err(DegreesError::NotIntegral { name: name.into(), formula: formula.into(), q: f.q, value: v.to_string() });
    }
    Ok(v.to_integer())
}

fn exact(name: &str, formula: &str, f: &FieldSize) -> Result<DegreeEntry, DegreesError> {
    Ok(DegreeEntry { name: name.into(), formula: formula.into(), value: DegreeValue::Exact(eval_formula(name, formula, f)?) })
}

fn lower(name: &str, formula: &str, f: &FieldSize) -> Result<DegreeEntry, DegreesError> {
    Ok(DegreeEntry {
        name: name.into(),
        formula: formula.into(),
        value: DegreeValue::LowerBound(eval_formula(name, formula, f)?),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cond {
    Always,
    QOdd,
    NotDiv3,
}

const PHI6: &str = "(q^4+q^2+1)";

/// Complex degrees of `G2(q)` as `(name, formula, condition)`.
const COMPLEX: &[(&str, &str, Cond)] = &[
    ("X11", "1", Cond::Always),
    ("X12", "q^6", Cond::Always),
    ("X13", "q*(q^4+q^2+1)/3", Cond::Always),
    ("X14", "q*(q^4+q^2+1)/3", Cond::Always),
    ("X15", "q*(q+1)^2*(q^2-q+1)/2", Cond::Always),
    ("X16", "q*(q+1)^2*(q^2+q+1)/6", Cond::Always),
    ("X17", "q*(q-1)^2*(q^2+q+1)/2", Cond::Always),
    ("X18", "q*(q-1)^2*(q^2-q+1)/6", Cond::Always),
    ("X19", "q*(q-1)^2*(q+1)^2/3", Cond::Always),
    ("X19bar", "q*(q-1)^2*(q+1)^2/3", Cond::Always),
    ("X31", "q^3*(q^3+e)", Cond::NotDiv3),
    ("X32", "q^3+e", Cond::NotDiv3),
    ("X33", "q*(q+e)*(q^3+e)", Cond::NotDiv3),
    ("X21", "q^2*(q^4+q^2+1)", Cond::QOdd),
    ("X22", "q^4+q^2+1", Cond::QOdd),
    ("X23", "q*(q^4+q^2+1)", Cond::QOdd),
    ("X24", "q*(q^4+q^2+1)", Cond::QOdd),
    ("X1a", "q*(q+1)*(q^4+q^2+1)", Cond::Always),
    ("X1b", "q*(q+1)*(q^4+q^2+1)", Cond::Always),
    ("X2a", "q*(q-1)*(q^4+q^2+1)", Cond::Always),
    ("X2b", "q*(q-1)*(q^4+q^2+1)", Cond::Always),
    ("X1a'", "(q+1)*(q^4+q^2+1)", Cond::Always),
    ("X1b'", "(q+1)*(q^4+q^2+1)", Cond::Always),
    ("X2a'", "(q-1)*(q^4+q^2+1)", Cond::Always),
    ("X2b'", "(q-1)*(q^4+q^2+1)", Cond::Always),
    ("X1", "(q+1)^2*(q^4+q^2+1)", Cond::Always),
    ("X2", "(q-1)^2*(q^4+q^2+1)", Cond::Always),
    ("Xa", "q^6-1", Cond::Always),
    ("Xb", "q^6-1", Cond::Always),
    ("X3", "(q^2-1)^2*(q^2-q+1)", Cond::Always),
    ("X6", "(q^2-1)^2*(q^2+q+1)", Cond::Always),
];

/// Brauer characters whose degrees coincide with the complex character of
/// the same index, for both ℓ = 2 and ℓ = 3.
const SAME_AS_COMPLEX: &[&str] =
    &["11", "17", "18", "19", "19bar", "1a'", "1b'", "2a'", "2b'", "1", "2", "a", "b", "3", "6"];

fn applies(c: Cond, f: &FieldSize) -> bool {
    match c {
        Cond::Always => true,
        Cond::QOdd => f.p != 2,
        Cond::NotDiv3 => f.p != 3,
    }
}

/// All complex irreducible degrees of `G2(q)`, `q ≥ 5`, in catalog order.
pub fn complex_degrees(q: u64) -> Result<Vec<DegreeEntry>, DegreesError> {
    let f = g2_field(q)?;
    COMPLEX
        .iter()
        .filter(|(_, _, c)| applies(*c, &f))
        .map(|(name, formula, _)| exact(name, formula, &f))
        .collect()
}

fn complex_formula(index: &str) -> &'static str {
    let name = format!("X{index}");
    COMPLEX.iter().find(|(n, _, _)| *n == name).map(|(_, f, _)| *f).expect("catalog index")
}

/// Degrees of the irreducible ℓ-Brauer characters of `G2(q)` for ℓ ∈ {2, 3}.
///
/// Entries whose degree depends on undetermined decomposition parameters are
/// returned as lower bounds.  For ℓ = 3 and `3 | q−1` the degree of φ14 is
/// one of two values; the smaller is returned as a lower bound.
pub fn brauer_degree_bounds(q: u64, ell: EllClass) -> Result<Vec<DegreeEntry>, DegreesError> {
    let f = g2_field(q)?;
    ell.check_cross(&f)?;
    let inadmissible = |reason: &str| DegreesError::Inadmissible { family: Family::G2, q, reason: reason.into() };
    let mut out = Vec::new();
    match ell {
        EllClass::Two => {
            if f.p == 2 {
                return Err(inadmissible("ℓ = 2 requires q odd"));
            }
            if f.p == 3 {
                out.push(lower("phi12", "(q-1)^2*(q^3+2*q^2+4*q+3)/3", &f)?);
            } else {
                out.push(lower("phi12", "(q-1)^2*(q+1)*(q^3+2*q^2+q+3)/3", &f)?);
            }
            for name in ["phi13", "phi14"] {
                out.push(exact(name, "(q-1)*(q^4+q^3+2*q^2+2*q+3)/3", &f)?);
            }
            out.push(exact("phi15", "q^4+q^2", &f)?);
            if f.p != 3 {
                out.push(match (q % 3, q % 4) {
                    (1, _) => exact("phi31", "q^6-1", &f)?,
                    (_, 1) => exact("phi31", "(q-1)^2*(q^2+1)*(q^2+q+1)", &f)?,
                    _ => lower("phi31", "(q-1)^2*(q^2+q+1)*(2*q^2+2*q+3)/3", &f)?,
                });
                out.push(exact("phi32", "q^3+e", &f)?);
                out.push(exact("phi33", "q*(q+e)*(q^3+e)", &f)?);
            }
            for name in ["phi1a", "phi1b"] {
                out.push(exact(name, &format!("(q^2-1)*{PHI6}"), &f)?);
            }
            for name in ["phi2a", "phi2b"] {
                out.push(exact(name, &format!("(q-1)^2*{PHI6}"), &f)?);
            }
        }
        EllClass::Three => {
            let odd = f.p != 2;
            if q % 3 == 1 {
                out.push(lower("phi12", "(q-1)^2*(q^4+2*q^3+3*q+2)/2", &f)?);
                let a = exact("phi14", "q*(q^2-q+1)*(q^2+4*q+1)/6", &f)?;
                let b = exact("phi14", "q^2*(q^2-q+1)", &f)?;
                let m = if a.value.value() <= b.value.value() { a } else { b };
                out.push(DegreeEntry { value: DegreeValue::LowerBound(m.value.value().clone()), ..m });
                out.push(exact("phi15", "(q^5+q^4+q^2+q-2)/2", &f)?);
                out.push(exact("phi16", "q^3", &f)?);
                if odd {
                    out.push(exact("phi21", &format!("q^2*{PHI6}"), &f)?);
                    out.push(exact("phi22", PHI6, &f)?);
                    for name in ["phi23", "phi24"] {
                        out.push(exact(name, &format!("q*{PHI6}"), &f)?);
                    }
                }
                for name in ["phi1a", "phi1b"] {
                    out.push(exact(name, &format!("q*(q+1)*{PHI6}"), &f)?);
                }
                for name in ["phi2a", "phi2b"] {
                    out.push(exact(name, &format!("q*(q-1)*{PHI6}"), &f)?);
                }
            } else {
                out.push(lower("phi12", "(q-1)^2*(q+2)^2*(q^2+q+1)/4", &f)?);
                out.push(exact("phi14", "(q^2-1)*(q^3+3*q^2-q+6)/6", &f)?);
                out.push(exact("phi15", "q*(q+1)^2*(q^2-q+1)/2", &f)?);
                out.push(exact("phi16", "q^3-1", &f)?);
                if odd {
                    out.push(exact("phi21", &format!("(q-1)^2*{PHI6}"), &f)?);
                    out.push(exact("phi22", PHI6, &f)?);
                    for name in ["phi23", "phi24"] {
                        out.push(exact(name, &format!("(q-1)*{PHI6}"), &f)?);
                    }
                }
                for name in ["phi1a", "phi1b"] {
                    out.push(exact(name, &format!("(q^2-1)*{PHI6}"), &f)?);
                }
                for name in ["phi2a", "phi2b"] {
                    out.push(exact(name, &format!("(q-1)^2*{PHI6}"), &f)?);
                }
            }
        }
        _ => return Err(inadmissible("Brauer degree tables exist for ℓ = 2 and ℓ = 3 only")),
    }
    for idx in SAME_AS_COMPLEX {
        out.push(exact(&format!("phi{idx}"), complex_formula(idx), &f)?);
    }
    Ok(out)
}

/// The smallest degree greater than 1 of an irreducible representation of
/// `G2(q)` in characteristic ℓ.
pub fn d1(q: u64, ell: EllClass) -> Result<DegreeEntry, DegreesError> {
    let f = g2_field(q)?;
    ell.check_cross(&f)?;
    let formula = match (q % 3, ell) {
        (1, EllClass::Three) => "q^3",
        (1, _) => "q^3+1",
        (2, _) => "q^3-1",
        (_, EllClass::Two) => "q^4+q^2",
        _ => "q^4+q^2+1",
    };
    exact("d1", formula, &f)
}

const X18: &str = "q*(q-1)^2*(q^2-q+1)/6";

/// The second-smallest nontrivial degree in characteristic ℓ; a lower bound
/// for ℓ = 3, `q ≡ 1 (mod 3)`, `q ≥ 13`.
pub fn d2(q: u64, ell: EllClass) -> Result<DegreeEntry, DegreesError> {
    let f = g2_field(q)?;
    ell.check_cross(&f)?;
    let small = q == 5 || q == 7;
    match ell {
        EllClass::Two if f.p == 3 || small => exact("d2", X18, &f),
        EllClass::Two => exact("d2", "q^4+q^2", &f),
        EllClass::Three if small || (f.p == 2 && q % 3 == 2) => exact("d2", X18, &f),
        EllClass::Three if q % 3 == 2 => exact("d2", "q^4+q^2+1", &f),
        EllClass::Three => lower("d2", "q^4-q^3+q^2", &f),
        _ if f.p <= 3 || small => exact("d2", X18, &f),
        _ => exact("d2", "q^4+q^2+1", &f),
    }
}

/// The unique irreducible ℓ-Brauer character ψ with `1 < ψ(1) < d2`,
/// identified by the complex character it comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapCharacter {
    /// Complex character whose reduction gives ψ.
    pub source: String,
    /// Whether the trivial Brauer character is removed from the reduction.
    pub minus_trivial: bool,
    /// Whether ψ is a reduction modulo ℓ (false for ℓ = 0).
    pub reduced: bool,
    #[serde(serialize_with = "ser_display")]
    pub degree: BigInt,
}

impl fmt::Display for GapCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hat = if self.reduced { "^" } else { "" };
        write!(f, "{}{hat}", self.source)?;
        if self.minus_trivial {
            write!(f, " - 1{hat}")?;
        }
        Ok(())
    }
}

pub fn unique_gap_character(q: u64, ell: EllClass) -> Result<GapCharacter, DegreesError> {
    let f = g2_field(q)?;
    ell.check_cross(&f)?;
    let (source, minus_trivial) = if f.p != 3 {
        ("X32", ell == EllClass::Three && q % 3 == 1)
    } else {
        ("X22", ell == EllClass::Two)
    };
    let mut degree = eval_formula(source, complex_formula(&source[1..]), &f)?;
    if minus_trivial {
        degree -= 1;
    }
    Ok(GapCharacter { source: source.into(), minus_trivial, reduced: ell != EllClass::Zero, degree })
}

/// Whether `q³+1` divides `|SL3(q):2|` and whether `q³−1` divides `|SU3(q):2|`.
pub fn sl3_su3_divisibility(q: u64) -> (bool, bool) {
    let q = BigInt::from(q);
    let one = BigInt::from(1u32);
    let q3: BigInt = q.pow(3);
    let q2m1: BigInt = &q * &q - &one;
    let (q3m1, q3p1): (BigInt, BigInt) = (&q3 - &one, &q3 + &one);
    let sl3: BigInt = BigInt::from(2u32) * &q3 * &q3m1 * &q2m1;
    let su3: BigInt = BigInt::from(2u32) * &q3 * &q3p1 * &q2m1;
    (sl3.is_multiple_of(&q3p1), su3.is_multiple_of(&q3m1))
}

// ---------------------------------------------------------------------------
// Maximal subgroup candidates
// ---------------------------------------------------------------------------

/// Applicability condition of a candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    QIsPrime,
    PAtLeast(u64),
    PNot(u64),
    QAtLeast(u64),
    QEquals(u64),
    Q0AtLeast(u64),
    NOdd,
    /// `q = p^k`.
    NEquals(u32),
    /// `p mod m` lies in the given residue set.
    PModIn(u64, Vec<u64>),
}

impl Condition {
    fn parse(tok: &str) -> Option<Condition> {
        match tok {
            "q=p" => return Some(Condition::QIsPrime),
            "n_odd" => return Some(Condition::NOdd),
            _ => {}
        }
        if let Some(k) = tok.strip_prefix("n=") {
            return k.parse().ok().map(Condition::NEquals);
        }
        if let Some(rest) = tok.strip_prefix("p%") {
            let (m, rs) = rest.split_once('=')?;
            let m: u64 = m.parse().ok().filter(|m| *m > 0)?;
            let rs: Option<Vec<u64>> = rs.split('/').map(|r| r.parse().ok()).collect();
            return Some(Condition::PModIn(m, rs?));
        }
        type Ctor = fn(u64) -> Condition;
        let forms: [(&str, Ctor); 5] = [
            ("q0>=", Condition::Q0AtLeast),
            ("p>=", Condition::PAtLeast),
            ("p!=", Condition::PNot),
            ("q>=", Condition::QAtLeast),
            ("q=", Condition::QEquals),
        ];
        forms.iter().find_map(|(pre, ctor)| tok.strip_prefix(pre).and_then(|n| n.parse().ok()).map(ctor))
    }

    fn holds(&self, f: &FieldSize, q0: Option<u64>) -> bool {
        match *self {
            Condition::QIsPrime => f.n == 1,
            Condition::PAtLeast(n) => f.p >= n,
            Condition::PNot(n) => f.p != n,
            Condition::QAtLeast(n) => f.q >= n,
            Condition::QEquals(n) => f.q == n,
            Condition::Q0AtLeast(n) => q0.is_some_and(|q0| q0 >= n),
            Condition::NOdd => f.n % 2 == 1,
            Condition::NEquals(k) => f.n == k,
            Condition::PModIn(m, ref rs) => rs.contains(&(f.p % m)),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::QIsPrime => write!(f, "q=p"),
            Condition::PAtLeast(n) => write!(f, "p>={n}"),
            Condition::PNot(n) => write!(f, "p!={n}"),
            Condition::QAtLeast(n) => write!(f, "q>={n}"),
            Condition::QEquals(n) => write!(f, "q={n}"),
            Condition::Q0AtLeast(n) => write!(f, "q0>={n}"),
            Condition::NOdd => write!(f, "n_odd"),
            Condition::NEquals(k) => write!(f, "n={k}"),
            Condition::PModIn(m, rs) => {
                let rs: Vec<String> = rs.iter().map(ToString::to_string).collect();
                write!(f, "p%{m}={}", rs.join("/"))
            }
        }
    }
}

/// One line of a candidate list, before evaluation at a specific `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpec {
    pub name: String,
    pub order: String,
    pub center: String,
    pub conditions: Vec<Condition>,
    /// Subfield subgroups: instantiated once for every `q = q0^α`, α prime.
    pub subfield: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimeSelector {
    AtLeast(u64),
    Exactly(u64),
}

impl PrimeSelector {
    fn matches(self, p: u64) -> bool {
        match self {
            PrimeSelector::AtLeast(n) => p >= n,
            PrimeSelector::Exactly(n) => p == n,
        }
    }
}

/// A candidate list for one family and one range of characteristics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateList {
    pub family: Family,
    pub primes: PrimeSelector,
    pub candidates: Vec<CandidateSpec>,
}

impl CandidateList {
    /// Parses the `.dat` format:
    ///
    /// ```text
    /// family g2
    /// primes >=5                       # or: prime 2
    /// candidate P_a order q^6*(q^2-1)*(q-1) center 1
    /// candidate G2(q0) order q0^6*(q0^6-1)*(q0^2-1) center 1 subfield
    /// candidate J1 order 175560 center 1 when q=11
    /// ```
    pub fn parse(text: &str) -> Result<CandidateList, DegreesError> {
        let mut family = None;
        let mut primes = None;
        let mut candidates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| DegreesError::Parse { line, message };
            let toks = crate::chartab::tokens(raw);
            let Some((&head, rest)) = toks.split_first() else { continue };
            match head {
                "family" => {
                    let [fam] = rest else { return Err(err("expected `family <g2|sz|ree>`".into())) };
                    family = Some(fam.parse::<Family>().map_err(err)?);
                }
                "primes" | "prime" => {
                    let [sel] = rest else { return Err(err("expected one selector".into())) };
                    let parse_n = |s: &str| s.parse::<u64>().map_err(|_| err(format!("bad prime `{s}`")));
                    primes = Some(match sel.strip_prefix(">=") {
                        Some(n) => PrimeSelector::AtLeast(parse_n(n)?),
                        None => PrimeSelector::Exactly(parse_n(sel)?),
                    });
                }
                "candidate" => candidates.push(parse_candidate(rest).map_err(err)?),
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        let line = text.lines().count();
        Ok(CandidateList {
            family: family.ok_or(DegreesError::Parse { line, message: "missing `family`".into() })?,
            primes: primes.ok_or(DegreesError::Parse { line, message: "missing `primes`".into() })?,
            candidates,
        })
    }
}

fn parse_candidate(toks: &[&str]) -> Result<CandidateSpec, String> {
    let (&name, mut rest) = toks.split_first().ok_or("candidate needs a name")?;
    let (mut order, mut center, mut conditions, mut subfield) = (None, "1".to_string(), Vec::new(), false);
    while let Some((&key, tail)) = rest.split_first() {
        rest = tail;
        match key {
            "order" | "center" => {
                let (&val, tail) = rest.split_first().ok_or(format!("`{key}` needs an expression"))?;
                rest = tail;
                Expr::parse(val).map_err(|e| format!("{key} `{val}`: {e}"))?;
                if key == "order" {
                    order = Some(val.to_string());
                } else {
                    center = val.to_string();
                }
            }
            "subfield" => subfield = true,
            "when" => {
                for tok in std::mem::take(&mut rest) {
                    if *tok == "subfield" {
                        subfield = true;
                        continue;
                    }
                    conditions.push(Condition::parse(tok).ok_or(format!("bad condition `{tok}`"))?);
                }
            }
            other => return Err(format!("unexpected `{other}`")),
        }
    }
    Ok(CandidateSpec { name: name.into(), order: order.ok_or("candidate needs `order`")?, center, conditions, subfield })
}

const BUILTIN_LISTS: &[(&str, &str)] = &[
    ("g2_maximals_p5.dat", include_str!("../data/g2_maximals_p5.dat")),
    ("g2_maximals_p2.dat", include_str!("../data/g2_maximals_p2.dat")),
    ("g2_maximals_p3.dat", include_str!("../data/g2_maximals_p3.dat")),
    ("sz_maximals.dat", include_str!("../data/sz_maximals.dat")),
    ("ree_maximals.dat", include_str!("../data/ree_maximals.dat")),
];

/// File names of the shipped candidate lists.
pub fn builtin_list_names() -> impl Iterator<Item = &'static str> {
    BUILTIN_LISTS.iter().map(|(n, _)| *n)
}

/// The shipped candidate lists, parsed.
pub fn builtin_lists() -> Vec<CandidateList> {
    BUILTIN_LISTS.iter().map(|(_, t)| CandidateList::parse(t).expect("shipped candidate list parses")).collect()
}

/// A candidate evaluated at a specific `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupCandidate {
    pub family: Family,
    pub name: String,
    pub order_formula: String,
    #[serde(serialize_with = "ser_display")]
    pub order: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub center_order: BigInt,
    pub conditions: Vec<String>,
    pub q0: Option<u64>,
}

/// Evaluates every applicable candidate of the first matching list.
pub fn subgroup_orders_from(lists: &[CandidateList], family: Family, q: u64) -> Result<Vec<SubgroupCandidate>, DegreesError> {
    let f = field_for(family, q)?;
    let list = lists
        .iter()
        .find(|l| l.family == family && l.primes.matches(f.p))
        .ok_or(DegreesError::NoCandidateList { family, p: f.p })?;
    let alphas: Vec<u32> = (2..=f.n).filter(|a| f.n % a == 0 && is_prime(u64::from(*a))).collect();
    let mut out = Vec::new();
    for spec in &list.candidates {
        let instances: Vec<Option<u64>> =
            if spec.subfield { alphas.iter().map(|a| Some(f.p.pow(f.n / a))).collect() } else { vec![None] };
        for q0 in instances {
            if !spec.conditions.iter().all(|c| c.holds(&f, q0)) {
                continue;
            }
            let mut env = f.env();
            if let Some(q0) = q0 {
                env.insert("q0".into(), Rational::from_integer(q0.into()));
            }
            let ev = |src: &str| -> Result<BigInt, DegreesError> {
                let v = Expr::parse(src)
                    .and_then(|e| e.eval(&env))
                    .map_err(|source| DegreesError::Expr { formula: src.into(), source })?;
                if !v.is_integer() || !v.is_positive() {
                    return Err(DegreesError::NotIntegral {
                        name: spec.name.clone(),
                        formula: src.into(),
                        q,
                        value: v.to_string(),
                    });
                }
                Ok(v.to_integer())
            };
            out.push(SubgroupCandidate {
                family,
                name: match q0 {
                    Some(q0) => spec.name.replace("q0", &q0.to_string()),
                    None => spec.name.clone(),
                },
                order_formula: spec.order.clone(),
                order: ev(&spec.order)?,
                center_order: ev(&spec.center)?,
                conditions: spec.conditions.iter().map(ToString::to_string).collect(),
                q0,
            });
        }
    }
    Ok(out)
}

/// Maximal-subgroup candidates of the family at `q`, from the shipped lists.
pub fn maximal_subgroup_orders(family: Family, q: u64) -> Result<Vec<SubgroupCandidate>, DegreesError> {
    subgroup_orders_from(&builtin_lists(), family, q)
}

/// One screened candidate: survives iff `|M| ≥ bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScreenRow {
    pub candidate: SubgroupCandidate,
    pub survives: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScreenResult {
    pub family: Family,
    pub q: u64,
    pub ell: u64,
    /// Human-readable form of the inequality being tested.
    pub rule: String,
    /// A candidate survives iff its order is at least this number.
    #[serde(serialize_with = "ser_display")]
    pub order_bound: BigInt,
    pub rows: Vec<ScreenRow>,
}

impl ScreenResult {
    pub fn survivors(&self) -> Vec<&SubgroupCandidate> {
        self.rows.iter().filter(|r| r.survives).map(|r| &r.candidate).collect()
    }
}

/// Order bound below which a maximal subgroup cannot carry an irreducible
/// restriction of a nontrivial character.
pub fn screen_bound(family: Family, q: u64, ell: EllClass) -> Result<(String, BigInt), DegreesError> {
    let f = field_for(family, q)?;
    ell.check_cross(&f)?;
    let qq = BigInt::from(q);
    Ok(match family {
        Family::G2 => {
            let d = d1(q, ell)?;
            let v = d.value.value().clone();
            (format!("sqrt(|M|) >= d1 = {} = {v}", d.formula), &v * &v)
        }
        Family::Sz => ("|M| >= q(q-1)^2/2".to_string(), &qq * (&qq - 1u32).pow(2) / 2u32),
        Family::Ree => ("|M| >= q^2(q-1)^2".to_string(), (&qq * (&qq - 1u32)).pow(2)),
    })
}

pub fn screen_with(lists: &[CandidateList], family: Family, q: u64, ell: EllClass) -> Result<ScreenResult, DegreesError> {
    let (rule, order_bound) = screen_bound(family, q, ell)?;
    let rows = subgroup_orders_from(lists, family, q)?
        .into_iter()
        .map(|candidate| ScreenRow { survives: candidate.order.cmp(&order_bound) != Ordering::Less, candidate })
        .collect();
    Ok(ScreenResult { family, q, ell: ell.ell(), rule, order_bound, rows })
}

/// Screens the shipped candidate list.
pub fn screen(family: Family, q: u64, ell: EllClass) -> Result<ScreenResult, DegreesError> {
    screen_with(&builtin_lists(), family, q, ell)
}

/// `⌊√n⌋`, used when reporting the screen inequality.
pub fn isqrt(n: &BigInt) -> BigInt {
    if n.is_positive() {
        n.sqrt()
    } else {
        BigInt::from(0u32)
    }
}
