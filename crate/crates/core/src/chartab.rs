//! Character tables of finite groups, possibly partial, possibly of a
//! central cover `m.G`.
//!
//! A cover table is stored against the classes of the base group `G`: each
//! character carries its value at one fixed pre-image of every class.  That is
//! all the restriction-norm trick needs, and it is how printed tables present
//! faithful characters of covers.
//!
//! Text format (UTF-8, `#` starts a comment):
//!
//! ```text
//! group <name> order <N> center <Z> cover <m>
//! class <name> length <L> order <k> [pow <p>=<class> ...]
//! char <name> kind <complex|brauer:<l>> [faithful] values <v1> ... <vr>
//! alias <class-or-character> <other-name> ...
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{Accumulator, Cyclotomic, ExactError, Rational, DEFAULT_CONDUCTOR_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown character `{0}`")]
    UnknownCharacter(String),
    #[error("table of {0} is partial; this operation needs a complete table")]
    Incomplete(String),
    #[error("power map incomplete: no {prime}-power map at class {class}")]
    PowerMapIncomplete { class: String, prime: u64 },
    #[error("missing value for class `{0}`")]
    MissingValue(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjugacyClass {
    pub name: String,
    pub length: u64,
    pub element_order: u64,
    /// prime → class of `g^p`.
    pub power_map: BTreeMap<u64, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CharKind {
    Complex,
    Brauer(u64),
}

impl fmt::Display for CharKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharKind::Complex => f.write_str("complex"),
            CharKind::Brauer(l) => write!(f, "brauer:{l}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Character {
    pub name: String,
    pub kind: CharKind,
    pub faithful: bool,
    /// Values in class declaration order.
    pub values: Vec<Cyclotomic>,
}

impl Character {
    /// Value at the identity (the first class).
    pub fn degree(&self) -> &Cyclotomic {
        &self.values[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Completeness {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CharacterTable {
    pub group_name: String,
    pub order: u64,
    pub center_order: u64,
    pub cover_multiplier: u64,
    pub classes: Vec<ConjugacyClass>,
    pub characters: Vec<Character>,
    /// Alternative names, e.g. class names used by another source.
    pub aliases: BTreeMap<String, String>,
    pub completeness: Completeness,
}

fn parse_u64(tok: Option<&str>, what: &str, line: usize) -> Result<u64, TableError> {
    let tok = tok.ok_or_else(|| TableError::Parse { line, message: format!("missing {what}") })?;
    tok.parse::<u64>()
        .ok()
        .filter(|v| *v > 0)
        .ok_or_else(|| TableError::Parse { line, message: format!("{what} `{tok}` is not a positive integer") })
}

fn expect_kw(tok: Option<&str>, kw: &str, line: usize) -> Result<(), TableError> {
    match tok {
        Some(t) if t == kw => Ok(()),
        other => Err(TableError::Parse {
            line,
            message: format!("expected `{kw}`, found `{}`", other.unwrap_or("end of line")),
        }),
    }
}

/// Strip a `#` comment and split into whitespace tokens.
pub(crate) fn tokens(line: &str) -> Vec<&str> {
    line.split('#').next().unwrap_or("").split_whitespace().collect()
}

impl CharacterTable {
    /// Parse the text format.  Values above the default conductor cap are rejected.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        Self::parse_with_cap(text, DEFAULT_CONDUCTOR_CAP)
    }

    pub fn parse_with_cap(text: &str, cap: u64) -> Result<Self, TableError> {
        let mut header: Option<(String, u64, u64, u64)> = None;
        let mut classes: Vec<ConjugacyClass> = Vec::new();
        let mut characters: Vec<Character> = Vec::new();
        let mut aliases = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let toks = tokens(raw);
            let Some(&head) = toks.first() else { continue };
            let perr = |message: String| TableError::Parse { line, message };
            let mut it = toks.iter().copied().skip(1);
            match head {
                "group" => {
                    if header.is_some() {
                        return Err(perr("duplicate `group` line".into()));
                    }
                    let name = it.next().ok_or_else(|| perr("missing group name".into()))?.to_string();
                    expect_kw(it.next(), "order", line)?;
                    let order = parse_u64(it.next(), "order", line)?;
                    expect_kw(it.next(), "center", line)?;
                    let center = parse_u64(it.next(), "center", line)?;
                    expect_kw(it.next(), "cover", line)?;
                    let cover = parse_u64(it.next(), "cover", line)?;
                    if let Some(t) = it.next() {
                        return Err(perr(format!("unexpected token `{t}`")));
                    }
                    header = Some((name, order, center, cover));
                }
                _ if header.is_none() => return Err(perr("the first entry must be a `group` line".into())),
                "class" => {
                    if !characters.is_empty() {
                        return Err(perr("classes must be declared before characters".into()));
                    }
                    let name = it.next().ok_or_else(|| perr("missing class name".into()))?.to_string();
                    if classes.iter().any(|c| c.name == name) {
                        return Err(perr(format!("duplicate class `{name}`")));
                    }
                    expect_kw(it.next(), "length", line)?;
                    let length = parse_u64(it.next(), "class length", line)?;
                    expect_kw(it.next(), "order", line)?;
                    let element_order = parse_u64(it.next(), "element order", line)?;
                    let mut power_map = BTreeMap::new();
                    while let Some(t) = it.next() {
                        if t != "pow" {
                            return Err(perr(format!("expected `pow`, found `{t}`")));
                        }
                        let spec = it.next().ok_or_else(|| perr("missing power map entry".into()))?;
                        let (p, target) =
                            spec.split_once('=').ok_or_else(|| perr(format!("malformed power map `{spec}`")))?;
                        let p = p
                            .parse::<u64>()
                            .ok()
                            .filter(|p| *p >= 2)
                            .ok_or_else(|| perr(format!("bad prime in `{spec}`")))?;
                        power_map.insert(p, target.to_string());
                    }
                    classes.push(ConjugacyClass { name, length, element_order, power_map });
                }
                "char" => {
                    let name = it.next().ok_or_else(|| perr("missing character name".into()))?.to_string();
                    if characters.iter().any(|c| c.name == name) {
                        return Err(perr(format!("duplicate character `{name}`")));
                    }
                    expect_kw(it.next(), "kind", line)?;
                    let kind = match it.next() {
                        Some("complex") => CharKind::Complex,
                        Some(k) if k.starts_with("brauer:") => CharKind::Brauer(
                            k["brauer:".len()..]
                                .parse()
                                .ok()
                                .filter(|l| *l >= 2)
                                .ok_or_else(|| perr(format!("bad characteristic in `{k}`")))?,
                        ),
                        other => return Err(perr(format!("unknown character kind `{}`", other.unwrap_or("")))),
                    };
                    let mut faithful = false;
                    let mut next = it.next();
                    if next == Some("faithful") {
                        faithful = true;
                        next = it.next();
                    }
                    expect_kw(next, "values", line)?;
                    let values = it
                        .map(|v| Cyclotomic::parse_with_cap(v, cap))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| perr(e.to_string()))?;
                    if values.len() != classes.len() {
                        return Err(perr(format!(
                            "character `{name}` has {} values but the table has {} classes",
                            values.len(),
                            classes.len()
                        )));
                    }
                    characters.push(Character { name, kind, faithful, values });
                }
                "alias" => {
                    let target = it.next().ok_or_else(|| perr("missing alias target".into()))?.to_string();
                    let names: Vec<&str> = it.collect();
                    if names.is_empty() {
                        return Err(perr("alias line without names".into()));
                    }
                    for n in names {
                        if aliases.insert(n.to_string(), target.clone()).is_some() {
                            return Err(perr(format!("alias `{n}` defined twice")));
                        }
                    }
                }
                other => return Err(perr(format!("unknown keyword `{other}`"))),
            }
        }
        let (group_name, order, center_order, cover_multiplier) =
            header.ok_or(TableError::Parse { line: 0, message: "no `group` line".into() })?;
        if classes.is_empty() {
            return Err(TableError::Parse { line: 0, message: "table has no classes".into() });
        }
        for (alias, target) in &aliases {
            let known = classes.iter().any(|c| &c.name == target) || characters.iter().any(|c| &c.name == target);
            if !known {
                return Err(TableError::Parse { line: 0, message: format!("alias `{alias}` points to unknown `{target}`") });
            }
        }
        let n_complex = characters.iter().filter(|c| c.kind == CharKind::Complex).count();
        let completeness = if cover_multiplier == 1 && n_complex == classes.len() {
            Completeness::Complete
        } else {
            Completeness::Partial
        };
        Ok(CharacterTable {
            group_name,
            order,
            center_order,
            cover_multiplier,
            classes,
            characters,
            aliases,
            completeness,
        })
    }

    /// `m.G` for covers, `G` otherwise.
    pub fn display_name(&self) -> String {
        if self.cover_multiplier > 1 {
            format!("{}.{}", self.cover_multiplier, self.group_name)
        } else {
            self.group_name.clone()
        }
    }

    fn resolve<'a>(&'a self, name: &'a str) -> &'a str {
        self.aliases.get(name).map(String::as_str).unwrap_or(name)
    }

    pub fn class_index(&self, name: &str) -> Result<usize, TableError> {
        let name = self.resolve(name);
        self.classes
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| TableError::UnknownClass(name.to_string()))
    }

    pub fn class(&self, name: &str) -> Result<&ConjugacyClass, TableError> {
        Ok(&self.classes[self.class_index(name)?])
    }

    pub fn character(&self, name: &str) -> Result<&Character, TableError> {
        let name = self.resolve(name);
        self.characters
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| TableError::UnknownCharacter(name.to_string()))
    }

    /// Value of `ch` at the named class.
    pub fn value(&self, ch: &Character, class: &str) -> Result<Cyclotomic, TableError> {
        let i = self.class_index(class)?;
        ch.values.get(i).cloned().ok_or_else(|| TableError::MissingValue(class.to_string()))
    }

    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Complete
    }

    pub fn identity_index(&self) -> Option<usize> {
        self.classes.iter().position(|c| c.element_order == 1)
    }

    /// Complex irreducible characters.
    pub fn irreducibles(&self) -> impl Iterator<Item = &Character> {
        self.characters.iter().filter(|c| c.kind == CharKind::Complex)
    }

    /// `⟨a, b⟩ = (1/|G|) Σ |C| a(C) conj(b(C))` on a complete table.
    pub fn inner_product(&self, a: &Character, b: &Character) -> Result<Rational, TableError> {
        if !self.is_complete() {
            return Err(TableError::Incomplete(self.display_name()));
        }
        self.inner_product_values(&a.values, &b.values)
    }

    /// Inner product of two class functions given in class order.
    pub fn inner_product_values(&self, a: &[Cyclotomic], b: &[Cyclotomic]) -> Result<Rational, TableError> {
        let n = self.classes.len();
        if a.len() != n || b.len() != n {
            return Err(TableError::MissingValue(format!("class function has {} of {n} values", a.len().min(b.len()))));
        }
        let order = Rational::from_integer(BigInt::from(self.order));
        let mut acc = Accumulator::new();
        for ((c, x), y) in self.classes.iter().zip(a).zip(b) {
            let w = Rational::from_integer(BigInt::from(c.length)) / &order;
            acc.add_scaled(&(x * &y.conj()), &w);
        }
        Ok(acc.finish().to_rational()?)
    }

    /// Class of `g^k` for `g` in `class`.
    pub fn power_class(&self, class: &str, k: u64) -> Result<String, TableError> {
        assert!(k >= 1, "power must be positive");
        let start = self.class(class)?;
        let k = k % start.element_order;
        if k == 0 {
            let id = self.identity_index().ok_or_else(|| TableError::UnknownClass("identity".into()))?;
            return Ok(self.classes[id].name.clone());
        }
        let mut cur = start.name.clone();
        for (p, e) in crate::exactnum::factor(k) {
            for _ in 0..e {
                let c = self.class(&cur)?;
                cur = c
                    .power_map
                    .get(&p)
                    .cloned()
                    .ok_or(TableError::PowerMapIncomplete { class: c.name.clone(), prime: p })?;
            }
        }
        Ok(cur)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_table`]; every check is listed, failures included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Run every consistency check that applies to `t`.
pub fn validate_table(t: &CharacterTable) -> ValidationReport {
    let mut r = ValidationReport::default();
    let complete = t.is_complete();

    match t.classes.first() {
        Some(c) if c.element_order == 1 && c.length == 1 => r.push("identity-class", true, format!("{} has length 1", c.name)),
        Some(c) => r.push(
            "identity-class",
            false,
            format!("first class {} has length {} and element order {}", c.name, c.length, c.element_order),
        ),
        None => r.push("identity-class", false, "no classes"),
    }

    for c in &t.classes {
        let ok = t.order.is_multiple_of(c.length);
        if !ok {
            r.push(format!("class-length-divides-order[{}]", c.name), false, format!("{} does not divide {}", c.length, t.order));
        }
        if c.element_order > 1 && !t.order.is_multiple_of(c.element_order) {
            r.push(format!("element-order[{}]", c.name), false, format!("{} does not divide {}", c.element_order, t.order));
        }
    }
    let sum: u128 = t.classes.iter().map(|c| c.length as u128).sum();
    if complete {
        r.push("class-length-sum", sum == t.order as u128, format!("sum {sum}, group order {}", t.order));
    } else {
        r.push("class-length-sum", sum <= t.order as u128, format!("sum {sum} (partial table), group order {}", t.order));
    }

    let mut pm_ok = true;
    for c in &t.classes {
        for (p, target) in &c.power_map {
            match t.classes.iter().find(|d| &d.name == target) {
                None => {
                    pm_ok = false;
                    r.push(format!("power-map[{}^{p}]", c.name), false, format!("unknown target class {target}"));
                }
                Some(d) => {
                    let expect = c.element_order / c.element_order.gcd(p);
                    if d.element_order != expect {
                        pm_ok = false;
                        r.push(
                            format!("power-map[{}^{p}]", c.name),
                            false,
                            format!("{target} has order {}, expected {expect}", d.element_order),
                        );
                    }
                }
            }
        }
    }
    if pm_ok {
        r.push("power-map-closure", true, "all targets exist with matching element orders");
    }

    let id = t.identity_index().unwrap_or(0);
    let mut deg_ok = true;
    let mut deg_sq = BigInt::zero();
    for ch in &t.characters {
        let d = ch.values[id].to_integer().filter(|d| *d > BigInt::zero());
        match d {
            None => {
                deg_ok = false;
                r.push(format!("degree[{}]", ch.name), false, format!("value {} at identity is not a positive integer", ch.values[id]));
            }
            Some(d) => {
                if complete && ch.kind == CharKind::Complex {
                    if (BigInt::from(t.order) % &d) != BigInt::zero() {
                        deg_ok = false;
                        r.push(format!("degree-divides-order[{}]", ch.name), false, format!("{d} does not divide {}", t.order));
                    }
                    deg_sq += &d * &d;
                }
            }
        }
    }
    if deg_ok {
        r.push("degrees", true, "every degree is a positive integer dividing the order where required");
    }

    if complete {
        r.push(
            "sum-of-squared-degrees",
            deg_sq == BigInt::from(t.order),
            format!("sum {deg_sq}, group order {}", t.order),
        );
        let irr: Vec<&Character> = t.irreducibles().collect();
        let conj: Vec<Vec<Cyclotomic>> = irr.iter().map(|c| c.values.iter().map(Cyclotomic::conj).collect()).collect();
        let order = Rational::from_integer(BigInt::from(t.order));
        let weights: Vec<Rational> =
            t.classes.iter().map(|c| Rational::from_integer(BigInt::from(c.length)) / &order).collect();
        let mut orth_ok = true;
        for i in 0..irr.len() {
            for j in i..irr.len() {
                let mut acc = Accumulator::new();
                for k in 0..t.classes.len() {
                    acc.add_scaled(&(&irr[i].values[k] * &conj[j][k]), &weights[k]);
                }
                let ip = acc.finish();
                let expect = if i == j { Cyclotomic::one() } else { Cyclotomic::zero() };
                if ip != expect {
                    orth_ok = false;
                    r.push(
                        format!("orthogonality[{},{}]", irr[i].name, irr[j].name),
                        false,
                        format!("inner product {ip}, expected {expect}"),
                    );
                }
            }
        }
        if orth_ok {
            r.push("row-orthogonality", true, format!("{} rows pairwise orthonormal", irr.len()));
        }
    }

    if t.cover_multiplier > 1 {
        let bad: Vec<&str> = t.characters.iter().filter(|c| !c.faithful).map(|c| c.name.as_str()).collect();
        r.push(
            "cover-characters-faithful",
            bad.is_empty(),
            if bad.is_empty() { "all characters flagged faithful".to_string() } else { format!("not flagged faithful: {}", bad.join(", ")) },
        );
    }
    r
}

/// Degree of a character as a machine integer, if it is a positive integer.
pub fn degree_u64(ch: &Character) -> Option<u64> {
    ch.degree().to_integer().and_then(|d| d.to_u64()).filter(|d| *d > 0)
}

/// `Σ |C| · x(C) · conj(x(C)) / |G|` for an arbitrary class function.
pub fn norm_of_values(t: &CharacterTable, values: &[Cyclotomic]) -> Result<Rational, TableError> {
    t.inner_product_values(values, values)
}
