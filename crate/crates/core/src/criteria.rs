//! Decision rules for irreducibility of restrictions.
//!
//! Every rule is a pure function returning a [`Verdict`]: a status, the rule
//! identifier and the numbers it used.  A rule only answers `irreducible` or
//! `reducible` when its hypothesis is verified from the inputs; otherwise it
//! says `inconclusive`.  Not being excluded is never reported as irreducible.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{Cyclotomic, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CriteriaError {
    #[error("invalid norm {0}: an inner product of a character with itself is a positive integer")]
    InvalidNorm(String),
    #[error("{value} is not a power of {ell}")]
    NotPowerOfEll { value: u64, ell: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("inputs must be positive: {0}")]
    NonPositive(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Irreducible,
    Reducible,
    Inconclusive,
    /// Block test only: the two characters provably lie in different ℓ-blocks.
    Separated,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Irreducible => "irreducible",
            Status::Reducible => "reducible",
            Status::Inconclusive => "inconclusive",
            Status::Separated => "separated",
        })
    }
}

impl std::str::FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "irreducible" => Ok(Status::Irreducible),
            "reducible" => Ok(Status::Reducible),
            "inconclusive" => Ok(Status::Inconclusive),
            "separated" => Ok(Status::Separated),
            other => Err(format!("unknown status `{other}`")),
        }
    }
}

/// Ordered key/value record of the numbers a rule used.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Evidence(pub Vec<(String, String)>);

impl Evidence {
    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.0.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub rule: String,
    pub evidence: Evidence,
}

impl Verdict {
    fn new(status: Status, rule: &str, evidence: Evidence) -> Self {
        Verdict { status, rule: rule.to_string(), evidence }
    }
}

/// `m_C(H) ≤ √|H/Z(H)|`: a restriction of degree `d` can only be irreducible if
/// `d² ≤ |H|/|Z|`.  Fails (→ reducible) when `d² · |Z| > |H|`.
pub fn sqrt_bound_filter(char_degree: impl Into<BigInt>, subgroup_order: impl Into<BigInt>, center_order: impl Into<BigInt>) -> Verdict {
    let (d, h, z) = (char_degree.into(), subgroup_order.into(), center_order.into());
    let lhs = &d * &d * &z;
    let ev = Evidence::default()
        .with("degree", &d)
        .with("degree^2", &d * &d)
        .with("subgroup_order", &h)
        .with("center_order", &z);
    if lhs > h {
        Verdict::new(Status::Reducible, "sqrt-bound", ev.with("inequality", format!("{}^2 * {} > {}", d, z, h)))
    } else {
        Verdict::new(Status::Inconclusive, "sqrt-bound", ev.with("inequality", format!("{}^2 * {} <= {}", d, z, h)))
    }
}

/// An irreducible constituent's degree divides the group order, so a complex
/// character of degree not dividing `|H|` cannot restrict irreducibly.
pub fn degree_divides(char_degree: impl Into<BigInt>, subgroup_order: impl Into<BigInt>) -> Verdict {
    let (d, h) = (char_degree.into(), subgroup_order.into());
    let r = &h % &d;
    let ev = Evidence::default().with("degree", &d).with("subgroup_order", &h).with("remainder", &r);
    if r.is_zero() {
        Verdict::new(Status::Inconclusive, "degree-divides", ev)
    } else {
        Verdict::new(Status::Reducible, "degree-divides", ev)
    }
}

/// Frobenius: a character is irreducible iff its norm is 1.
pub fn frobenius_irreducible(norm: &Rational) -> Result<Verdict, CriteriaError> {
    if !norm.is_integer() || !norm.is_positive() {
        return Err(CriteriaError::InvalidNorm(norm.to_string()));
    }
    let ev = Evidence::default().with("norm", norm);
    Ok(if norm.is_one() {
        Verdict::new(Status::Irreducible, "frobenius", ev)
    } else {
        Verdict::new(Status::Reducible, "frobenius", ev)
    })
}

/// One solution of Clifford's relations `e²t = m`, `e·t·θ(1) = χ(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CliffordSolution {
    pub e: u64,
    pub t: u64,
    pub theta_degree: u64,
}

impl fmt::Display for CliffordSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(e={}, t={}, theta={})", self.e, self.t, self.theta_degree)
    }
}

/// All `(e, t, θ)` with `e²t = m` and `e·t·θ = χ(1)`, θ restricted to `allowed`
/// when given.  Sorted by `e`, then `t`.
pub fn clifford_solutions(m: u64, char_degree: u64, allowed_theta_degrees: Option<&[u64]>) -> Vec<CliffordSolution> {
    assert!(m > 0 && char_degree > 0, "inputs must be positive");
    let mut out = Vec::new();
    let mut e = 1u64;
    while e * e <= m {
        if m.is_multiple_of(e * e) {
            let t = m / (e * e);
            if char_degree.is_multiple_of(e * t) {
                let theta = char_degree / (e * t);
                if allowed_theta_degrees.is_none_or(|a| a.contains(&theta)) {
                    out.push(CliffordSolution { e, t, theta_degree: theta });
                }
            }
        }
        e += 1;
    }
    out
}

/// Clifford step for a normal subgroup `N` of `H`.  When `χ|_H` is irreducible
/// and every solution has `e = 1`, `χ|_N` is a sum of distinct conjugates and
/// the ℓ-modular reduction of `χ|_H` stays irreducible for every ℓ not dividing
/// `|N|` (an ℓ′-subgroup is preserved by reduction mod ℓ).
pub fn clifford_rule(m: u64, char_degree: u64, allowed: Option<&[u64]>, restriction_irreducible: bool) -> Verdict {
    let sols = clifford_solutions(m, char_degree, allowed);
    let list = sols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ");
    let mut ev = Evidence::default()
        .with("m", m)
        .with("degree", char_degree)
        .with("solutions", if list.is_empty() { "none".to_string() } else { list });
    if let Some(a) = allowed {
        ev = ev.with("allowed_theta", a.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    }
    let all_e1 = !sols.is_empty() && sols.iter().all(|s| s.e == 1);
    if restriction_irreducible && all_e1 {
        Verdict::new(
            Status::Irreducible,
            "clifford-orbit",
            ev.with("implication", "e=1: restriction to N is a sum of distinct conjugates; reduction modulo l coprime to |N| stays irreducible"),
        )
    } else {
        Verdict::new(Status::Inconclusive, "clifford-orbit", ev)
    }
}

/// What is known about `χ|_H` for a normal subgroup `H` of prime index `p`
/// in the subgroup `M` under test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum HRestriction {
    /// Only the list of irreducible degrees of `H` is known.
    Degrees(Vec<u64>),
    /// The constituents of `χ|_H` as `(multiplicity, degree)`.
    Constituents(Vec<(u64, u64)>),
}

/// If `χ|_M` is irreducible and `[M:H] = p`, then `χ|_H` is irreducible or a
/// sum of `p` distinct irreducible conjugates of degree `χ(1)/p`.  Anything
/// else forces `χ|_M` to be reducible.
pub fn index_p_split(char_degree: u64, p: u64, h: &HRestriction) -> Result<Verdict, CriteriaError> {
    if !is_prime(p) {
        return Err(CriteriaError::NotPrime(p));
    }
    let ev = Evidence::default().with("degree", char_degree).with("index", p);
    Ok(match h {
        HRestriction::Constituents(cs) => {
            let total: u64 = cs.iter().map(|(m, d)| m * d).sum();
            let desc = cs.iter().map(|(m, d)| format!("{m}*[{d}]")).collect::<Vec<_>>().join(" + ");
            let ev = ev.with("restriction_to_H", &desc);
            if total != char_degree {
                return Err(CriteriaError::NonPositive(format!("constituents {desc} sum to {total}, not {char_degree}")));
            }
            let single = cs.len() == 1 && cs[0].0 == 1;
            let split = cs.iter().map(|c| c.0).sum::<u64>() == p
                && cs.iter().all(|(m, d)| *m == 1 && *d * p == char_degree);
            if single || split {
                Verdict::new(Status::Inconclusive, "index-p-split", ev.with("pattern", if single { "irreducible on H" } else { "p distinct constituents" }))
            } else {
                Verdict::new(Status::Reducible, "index-p-split", ev.with("pattern", "neither irreducible nor p distinct constituents"))
            }
        }
        HRestriction::Degrees(ds) => {
            let whole = ds.contains(&char_degree);
            let part = char_degree.is_multiple_of(p) && ds.contains(&(char_degree / p));
            let ev = ev.with("degrees_of_H", ds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
            if whole || part {
                Verdict::new(Status::Inconclusive, "index-p-split", ev)
            } else {
                Verdict::new(Status::Reducible, "index-p-split", ev.with("pattern", "neither chi(1) nor chi(1)/p is a degree of H"))
            }
        }
    })
}

/// A faithful irreducible module in characteristic ℓ restricts reducibly to a
/// subgroup with a nontrivial normal ℓ-subgroup.
pub fn oell_rule(o_ell_order: u64, ell: u64) -> Result<Verdict, CriteriaError> {
    if !is_prime(ell) {
        return Err(CriteriaError::NotPrime(ell));
    }
    let mut x = o_ell_order;
    if x == 0 {
        return Err(CriteriaError::NotPowerOfEll { value: x, ell });
    }
    while x.is_multiple_of(ell) {
        x /= ell;
    }
    if x != 1 {
        return Err(CriteriaError::NotPowerOfEll { value: o_ell_order, ell });
    }
    let ev = Evidence::default().with("O_l_order", o_ell_order).with("l", ell);
    Ok(if o_ell_order > 1 {
        Verdict::new(Status::Reducible, "normal-l-subgroup", ev)
    } else {
        Verdict::new(Status::Inconclusive, "normal-l-subgroup", ev)
    })
}

/// Central-character test.  With `ω_χ(K) = χ(g)|K|/χ(1)`, two characters in the
/// same ℓ-block satisfy `ω_ρ(K) − ω_α(K) ∈ π` for a prime π over ℓ.  Only the
/// case of a rational integer difference is decided: then membership in π means
/// divisibility by ℓ.  A difference not divisible by ℓ separates the blocks.
pub fn block_separation_witness(
    deg_rho: u64,
    val_rho: &Cyclotomic,
    deg_alpha: u64,
    val_alpha: &Cyclotomic,
    class_length: impl Into<BigInt>,
    ell: u64,
) -> Result<Verdict, CriteriaError> {
    if deg_rho == 0 || deg_alpha == 0 {
        return Err(CriteriaError::NonPositive("degrees".into()));
    }
    if !is_prime(ell) {
        return Err(CriteriaError::NotPrime(ell));
    }
    let len = Rational::from_integer(class_length.into());
    let w_rho = val_rho.scale(&(&len / Rational::from_integer(BigInt::from(deg_rho))));
    let w_alpha = val_alpha.scale(&(&len / Rational::from_integer(BigInt::from(deg_alpha))));
    let d = &w_rho - &w_alpha;
    let ev = Evidence::default()
        .with("omega_rho", &w_rho)
        .with("omega_alpha", &w_alpha)
        .with("difference", &d)
        .with("l", ell);
    Ok(match d.to_integer() {
        Some(n) if !n.is_multiple_of(&BigInt::from(ell)) => Verdict::new(
            Status::Separated,
            "central-character",
            ev.with("reason", format!("difference is a rational integer not divisible by {ell}")),
        ),
        Some(_) => Verdict::new(
            Status::Inconclusive,
            "central-character",
            ev.with("reason", format!("difference is divisible by {ell}")),
        ),
        None => Verdict::new(
            Status::Inconclusive,
            "central-character",
            ev.with("reason", "difference is not a rational integer; membership in a prime over l is not decided"),
        ),
    })
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}
