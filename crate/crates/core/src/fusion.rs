//! Fusion of subgroup classes into a parent group, restriction norms and the
//! Clifford-theory bookkeeping built on them.
//!
//! A dataset lists every class of a subgroup `H` with its length, the
//! parent class(es) it fuses into, and the values of one or more parent
//! characters there.  Three kinds of target are supported:
//!
//! * a single class, `-> 4A`;
//! * linked alternatives, `-> 4A|4B link L1`, when the fusion is only known up
//!   to a choice that must be made consistently across rows;
//! * an aggregate, `-> 3A+3B+9A`, for a union of subgroup classes that is only
//!   known to lie in the union of the listed parent classes.  Restriction from a
//!   parent table then requires the parent values to agree on the aggregate.
//!
//! For a cover `m.G`, values are stored at one pre-image per class and norms
//! divide by the order of the base subgroup: for a faithful character the
//! values at different lifts differ by roots of unity, so `|χ|²` is the same
//! on all of them.
//!
//! Text format (`#` comments):
//!
//! ```text
//! fusion <subname> order <H> into <parent> cover <m>
//! row <sub_class> length <L> order <k>[/<k'>...] -> <target>[|<target>...] [link <id>]
//! values <char> <v1> ... <vr>          # v may be `a|b` on ambiguous rows
//! alias <parent-class> <source-name> ...
//! ```

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::chartab::{tokens, CharacterTable, TableError, ValidationReport};
use crate::exactnum::{Accumulator, Cyclotomic, ExactError, Rational, DEFAULT_CONDUCTOR_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("class lengths sum to {sum}, but the subgroup order is {order}")]
    Incomplete { sum: u128, order: u64 },
    #[error("no values for character `{0}` in the dataset")]
    UnknownCharacter(String),
    #[error("unknown subgroup class `{0}`")]
    UnknownClass(String),
    #[error("restricted values are not rational: {0}")]
    NotRational(String),
    #[error("branch assignment does not cover `{0}`")]
    BadBranch(String),
    #[error("class lengths of the chosen subset sum to {sum}, not {expected}")]
    SubsetOrder { sum: u128, expected: u64 },
    #[error("the subset must contain the identity class")]
    MissingIdentity,
    #[error("parent table mismatch: {0}")]
    ParentMismatch(String),
    #[error("parent values differ across the aggregate target {target}: {values}")]
    AggregateMismatch { target: String, values: String },
    #[error("not a character: multiplicity of {character} is {multiplicity}")]
    NotACharacter { character: String, multiplicity: String },
    #[error("value counting needs one common |value|^2 on the nonzero classes: {0}")]
    NonUniformValues(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

impl From<ExactError> for FusionError {
    fn from(e: ExactError) -> Self {
        FusionError::NotRational(e.to_string())
    }
}

/// One admissible target: a parent class, or a `+`-joined union of classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Target {
    pub classes: Vec<String>,
}

impl Target {
    pub fn is_aggregate(&self) -> bool {
        self.classes.len() > 1
    }
}

impl std::fmt::Display for Target {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.classes.join("+"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FusionRow {
    pub sub_class: String,
    pub length: u64,
    /// A single order, or the possible orders on an aggregate row.
    pub element_orders: Vec<u64>,
    /// Alternatives; a singleton when the fusion is unambiguous.
    pub targets: Vec<Target>,
    pub link: Option<String>,
}

impl FusionRow {
    pub fn is_ambiguous(&self) -> bool {
        self.targets.len() > 1
    }

    pub fn is_identity(&self) -> bool {
        self.element_orders == [1]
    }

    pub fn max_order(&self) -> u64 {
        *self.element_orders.iter().max().unwrap()
    }

    /// Pseudo-rows standing for a union of classes (`+` targets or several orders).
    pub fn is_aggregate(&self) -> bool {
        self.element_orders.len() > 1 || self.targets.iter().any(Target::is_aggregate)
    }

    /// Whether every element order of the row divides `k`.
    pub fn orders_divide(&self, k: u64) -> bool {
        k > 0 && self.element_orders.iter().all(|o| k.is_multiple_of(*o))
    }

    /// Key under which a [`BranchAssignment`] records the choice for this row.
    pub fn branch_key(&self) -> String {
        match &self.link {
            Some(l) => l.clone(),
            None => format!("row:{}", self.sub_class),
        }
    }
}

/// A value per row: one value, or one per alternative target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RowValue {
    Single(Cyclotomic),
    PerTarget(Vec<Cyclotomic>),
}

impl RowValue {
    fn at(&self, choice: usize) -> &Cyclotomic {
        match self {
            RowValue::Single(v) => v,
            RowValue::PerTarget(vs) => &vs[choice],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FusionDataset {
    pub subgroup_name: String,
    pub subgroup_order: u64,
    pub parent: String,
    pub cover_multiplier: u64,
    pub rows: Vec<FusionRow>,
    /// Character name → one value per row, in file order.
    pub char_values: Vec<(String, Vec<RowValue>)>,
    pub aliases: BTreeMap<String, String>,
}

/// Choice of alternative per link group (or per unlinked ambiguous row).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Default)]
pub struct BranchAssignment {
    pub choices: BTreeMap<String, usize>,
}

impl BranchAssignment {
    pub fn choice(&self, row: &FusionRow) -> Result<usize, FusionError> {
        if !row.is_ambiguous() {
            return Ok(0);
        }
        let key = row.branch_key();
        match self.choices.get(&key) {
            Some(&c) if c < row.targets.len() => Ok(c),
            _ => Err(FusionError::BadBranch(key)),
        }
    }

    /// Human-readable description listing the chosen target per ambiguous row, e.g. `D1->4A, D2->12A`.
    pub fn describe(&self, f: &FusionDataset) -> String {
        let parts: Vec<String> = f
            .rows
            .iter()
            .filter(|r| r.is_ambiguous())
            .map(|r| {
                let c = self.choice(r).unwrap_or(0);
                format!("{}->{}", r.sub_class, r.targets[c])
            })
            .collect();
        if parts.is_empty() {
            "unique".to_string()
        } else {
            parts.join(", ")
        }
    }
}

/// Exact norm computation `weighted_sum / divisor`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormComputation {
    #[serde(serialize_with = "crate::exactnum::ser_rational")]
    pub weighted_sum: Rational,
    pub divisor: u64,
    #[serde(serialize_with = "crate::exactnum::ser_rational")]
    pub norm: Rational,
}

/// A class function on the subgroup, as `(class, value)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassFunction {
    pub classes: Vec<String>,
    pub values: Vec<Cyclotomic>,
}

/// Union of subgroup classes tested as a candidate normal subgroup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalSubset {
    pub classes: Vec<String>,
    pub norm: NormComputation,
    /// Whether the norm is a positive integer, as it must be for a genuine normal subgroup.
    pub integral: bool,
}

fn split_orders(tok: &str) -> Option<Vec<u64>> {
    let v: Option<Vec<u64>> = tok.split('/').map(|t| t.parse::<u64>().ok().filter(|k| *k > 0)).collect();
    v.filter(|v| !v.is_empty())
}

impl FusionDataset {
    /// Parse and check completeness (`Σ lengths = |H|`).
    pub fn parse(text: &str) -> Result<Self, FusionError> {
        let f = Self::parse_unchecked(text)?;
        let sum = f.length_sum();
        if sum != f.subgroup_order as u128 {
            return Err(FusionError::Incomplete { sum, order: f.subgroup_order });
        }
        Ok(f)
    }

    /// Parse without the completeness check; [`FusionDataset::validate`] reports it instead.
    pub fn parse_unchecked(text: &str) -> Result<Self, FusionError> {
        let mut header: Option<(String, u64, String, u64)> = None;
        let mut rows: Vec<FusionRow> = Vec::new();
        let mut char_values: Vec<(String, Vec<RowValue>)> = Vec::new();
        let mut aliases = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let toks = tokens(raw);
            let Some(&head) = toks.first() else { continue };
            let perr = |message: String| FusionError::Parse { line, message };
            let kw = |tok: Option<&&str>, kw: &str| -> Result<(), FusionError> {
                match tok {
                    Some(t) if *t == kw => Ok(()),
                    other => Err(FusionError::Parse {
                        line,
                        message: format!("expected `{kw}`, found `{}`", other.copied().unwrap_or("end of line")),
                    }),
                }
            };
            let pos = |tok: Option<&&str>, what: &str| -> Result<u64, FusionError> {
                tok.and_then(|t| t.parse::<u64>().ok())
                    .filter(|v| *v > 0)
                    .ok_or_else(|| FusionError::Parse { line, message: format!("{what} must be a positive integer") })
            };
            match head {
                "fusion" => {
                    if header.is_some() {
                        return Err(perr("duplicate `fusion` line".into()));
                    }
                    if toks.len() != 8 {
                        return Err(perr("expected `fusion <name> order <H> into <parent> cover <m>`".into()));
                    }
                    kw(toks.get(2), "order")?;
                    let order = pos(toks.get(3), "subgroup order")?;
                    kw(toks.get(4), "into")?;
                    kw(toks.get(6), "cover")?;
                    let cover = pos(toks.get(7), "cover multiplier")?;
                    header = Some((toks[1].to_string(), order, toks[5].to_string(), cover));
                }
                _ if header.is_none() => return Err(perr("the first entry must be a `fusion` line".into())),
                "row" => {
                    if !char_values.is_empty() {
                        return Err(perr("rows must precede `values` lines".into()));
                    }
                    let sub = toks.get(1).ok_or_else(|| perr("missing subgroup class".into()))?.to_string();
                    if rows.iter().any(|r| r.sub_class == sub) {
                        return Err(perr(format!("duplicate subgroup class `{sub}`")));
                    }
                    kw(toks.get(2), "length")?;
                    let length = pos(toks.get(3), "class length")?;
                    kw(toks.get(4), "order")?;
                    let element_orders = toks
                        .get(5)
                        .and_then(|t| split_orders(t))
                        .ok_or_else(|| perr("element order must be `k` or `k/k'/...`".into()))?;
                    kw(toks.get(6), "->")?;
                    let tspec = toks.get(7).ok_or_else(|| perr("missing target".into()))?;
                    let targets: Vec<Target> = tspec
                        .split('|')
                        .map(|alt| Target { classes: alt.split('+').map(str::to_string).collect() })
                        .collect();
                    if targets.iter().any(|t| t.classes.iter().any(String::is_empty)) {
                        return Err(perr(format!("malformed target `{tspec}`")));
                    }
                    let link = match toks.get(8) {
                        None => None,
                        Some(&"link") => {
                            let id = toks.get(9).ok_or_else(|| perr("missing link id".into()))?;
                            if toks.len() > 10 {
                                return Err(perr(format!("unexpected token `{}`", toks[10])));
                            }
                            Some(id.to_string())
                        }
                        Some(t) => return Err(perr(format!("unexpected token `{t}`"))),
                    };
                    if let Some(l) = &link {
                        if let Some(other) = rows.iter().find(|r| r.link.as_ref() == Some(l)) {
                            if other.targets.len() != targets.len() {
                                return Err(perr(format!(
                                    "rows linked by `{l}` must offer the same number of alternatives"
                                )));
                            }
                        }
                    }
                    if element_orders.len() > 1 && !targets.iter().all(Target::is_aggregate) {
                        return Err(perr("several element orders are only allowed on aggregate rows".into()));
                    }
                    rows.push(FusionRow { sub_class: sub, length, element_orders, targets, link });
                }
                "values" => {
                    let name = toks.get(1).ok_or_else(|| perr("missing character name".into()))?.to_string();
                    if char_values.iter().any(|(n, _)| *n == name) {
                        return Err(perr(format!("duplicate values for `{name}`")));
                    }
                    let vals = &toks[2..];
                    if vals.len() != rows.len() {
                        return Err(perr(format!("`{name}` has {} values for {} rows", vals.len(), rows.len())));
                    }
                    let mut out = Vec::new();
                    for (row, v) in rows.iter().zip(vals) {
                        let alts: Vec<Cyclotomic> = v
                            .split('|')
                            .map(|a| Cyclotomic::parse_with_cap(a, DEFAULT_CONDUCTOR_CAP))
                            .collect::<Result<_, _>>()
                            .map_err(|e| perr(e.to_string()))?;
                        if alts.len() == 1 {
                            out.push(RowValue::Single(alts.into_iter().next().unwrap()));
                        } else if alts.len() == row.targets.len() {
                            out.push(RowValue::PerTarget(alts));
                        } else {
                            return Err(perr(format!(
                                "row {} has {} alternatives but {} values were given",
                                row.sub_class,
                                row.targets.len(),
                                alts.len()
                            )));
                        }
                    }
                    char_values.push((name, out));
                }
                "alias" => {
                    let target = toks.get(1).ok_or_else(|| perr("missing alias target".into()))?.to_string();
                    if toks.len() < 3 {
                        return Err(perr("alias line without names".into()));
                    }
                    for n in &toks[2..] {
                        aliases.insert(n.to_string(), target.clone());
                    }
                }
                other => return Err(perr(format!("unknown keyword `{other}`"))),
            }
        }
        let (subgroup_name, subgroup_order, parent, cover_multiplier) =
            header.ok_or(FusionError::Parse { line: 0, message: "no `fusion` line".into() })?;
        if rows.is_empty() {
            return Err(FusionError::Parse { line: 0, message: "dataset has no rows".into() });
        }
        Ok(FusionDataset { subgroup_name, subgroup_order, parent, cover_multiplier, rows, char_values, aliases })
    }

    pub fn length_sum(&self) -> u128 {
        self.rows.iter().map(|r| r.length as u128).sum()
    }

    /// `m.P` style name of the lifted subgroup.
    pub fn display_name(&self) -> String {
        if self.cover_multiplier > 1 {
            format!("{}.{}", self.cover_multiplier, self.subgroup_name)
        } else {
            self.subgroup_name.clone()
        }
    }

    pub fn parent_display_name(&self) -> String {
        if self.cover_multiplier > 1 {
            format!("{}.{}", self.cover_multiplier, self.parent)
        } else {
            self.parent.clone()
        }
    }

    pub fn character_names(&self) -> impl Iterator<Item = &str> {
        self.char_values.iter().map(|(n, _)| n.as_str())
    }

    /// Row values of a character.  The name `trivial` is always available.
    pub fn values_of(&self, name: &str) -> Result<Vec<RowValue>, FusionError> {
        if let Some((_, v)) = self.char_values.iter().find(|(n, _)| n == name) {
            return Ok(v.clone());
        }
        if name == "trivial" {
            return Ok(vec![RowValue::Single(Cyclotomic::one()); self.rows.len()]);
        }
        Err(FusionError::UnknownCharacter(name.to_string()))
    }

    /// Values on the subgroup classes under a branch.
    pub fn class_function(&self, name: &str, b: &BranchAssignment) -> Result<ClassFunction, FusionError> {
        let vals = self.values_of(name)?;
        let mut out = ClassFunction { classes: Vec::new(), values: Vec::new() };
        for (row, v) in self.rows.iter().zip(&vals) {
            out.classes.push(row.sub_class.clone());
            out.values.push(v.at(b.choice(row)?).clone());
        }
        Ok(out)
    }

    fn row_index(&self, name: &str) -> Result<usize, FusionError> {
        self.rows
            .iter()
            .position(|r| r.sub_class == name)
            .ok_or_else(|| FusionError::UnknownClass(name.to_string()))
    }

    /// Internal consistency checks, plus checks against the parent table when given.
    pub fn validate(&self, parent: Option<&CharacterTable>) -> ValidationReport {
        let mut r = ValidationReport::default();
        let sum = self.length_sum();
        r.push(
            "fusion-completeness",
            sum == self.subgroup_order as u128,
            format!("class lengths sum to {sum}, subgroup order {}", self.subgroup_order),
        );
        let bad: Vec<&str> = self
            .rows
            .iter()
            .filter(|row| !row.is_aggregate() && !self.subgroup_order.is_multiple_of(row.length))
            .map(|row| row.sub_class.as_str())
            .collect();
        let aggregates = self.rows.iter().filter(|row| row.is_aggregate()).count();
        r.push(
            "class-length-divides-order",
            bad.is_empty(),
            if bad.is_empty() {
                format!("all class lengths divide |H| ({aggregates} aggregate rows exempt)")
            } else {
                format!("offending rows: {}", bad.join(", "))
            },
        );
        let ids: Vec<&FusionRow> = self.rows.iter().filter(|r| r.is_identity()).collect();
        r.push(
            "identity-row",
            ids.len() == 1 && ids[0].length == 1,
            format!("{} identity row(s)", ids.len()),
        );
        r.push("branches", true, format!("{} consistent branch assignment(s)", enumerate_branches(self).len()));
        if let Some(t) = parent {
            r.push(
                "parent-name",
                t.group_name == self.parent && t.cover_multiplier == self.cover_multiplier,
                format!("dataset expects {}, table is {}", self.parent_display_name(), t.display_name()),
            );
            let mut ok = true;
            for row in &self.rows {
                for target in &row.targets {
                    let mut orders = BTreeSet::new();
                    for c in &target.classes {
                        match t.class(c) {
                            Ok(cl) => {
                                orders.insert(cl.element_order);
                            }
                            Err(_) => {
                                ok = false;
                                r.push(format!("target[{}]", row.sub_class), false, format!("unknown parent class {c}"));
                            }
                        }
                    }
                    let want: BTreeSet<u64> = row.element_orders.iter().copied().collect();
                    if !orders.is_empty() && orders != want {
                        ok = false;
                        r.push(
                            format!("element-order[{}]", row.sub_class),
                            false,
                            format!("target {target} has orders {orders:?}, row declares {want:?}"),
                        );
                    }
                }
            }
            if ok {
                r.push("targets", true, "every target exists with the declared element order");
            }
            for (name, _) in &self.char_values {
                if t.character(name).is_err() {
                    continue;
                }
                for b in enumerate_branches(self) {
                    let check = format!("values-match-parent[{name}; {}]", b.describe(self));
                    match (restrict(self, t, name, &b), self.class_function(name, &b)) {
                        (Ok(got), Ok(want)) => {
                            let diff: Vec<&str> = got
                                .classes
                                .iter()
                                .zip(got.values.iter().zip(&want.values))
                                .filter(|(_, (a, b))| a != b)
                                .map(|(c, _)| c.as_str())
                                .collect();
                            r.push(
                                check,
                                diff.is_empty(),
                                if diff.is_empty() { "agree".to_string() } else { format!("differ at {}", diff.join(", ")) },
                            );
                        }
                        (Err(e), _) | (_, Err(e)) => r.push(check, false, e.to_string()),
                    }
                }
            }
        }
        r
    }
}

/// All consistent branch assignments, in lexicographic order of choices.
pub fn enumerate_branches(f: &FusionDataset) -> Vec<BranchAssignment> {
    let mut groups: Vec<(String, usize)> = Vec::new();
    for row in f.rows.iter().filter(|r| r.is_ambiguous()) {
        let key = row.branch_key();
        if !groups.iter().any(|(k, _)| *k == key) {
            groups.push((key, row.targets.len()));
        }
    }
    groups.sort();
    let mut out = vec![BranchAssignment::default()];
    for (key, n) in groups {
        out = out
            .into_iter()
            .flat_map(|b| {
                (0..n).map({
                    let key = key.clone();
                    move |i| {
                        let mut b = b.clone();
                        b.choices.insert(key.clone(), i);
                        b
                    }
                })
            })
            .collect();
    }
    out
}

fn weighted_norm<'a>(
    items: impl Iterator<Item = (u64, &'a Cyclotomic)>,
    divisor: u64,
) -> Result<NormComputation, FusionError> {
    let mut acc = Accumulator::new();
    for (len, v) in items {
        acc.add_scaled(&v.norm_sq(), &Rational::from_integer(BigInt::from(len)));
    }
    let s = acc.finish();
    let weighted_sum = s.to_rational().map_err(|_| FusionError::NotRational(s.to_string()))?;
    let norm = &weighted_sum / Rational::from_integer(BigInt::from(divisor));
    Ok(NormComputation { weighted_sum, divisor, norm })
}

/// `(1/|H|) Σ_rows length · |v|²` under a branch.
pub fn restriction_norm(f: &FusionDataset, chi: &str, b: &BranchAssignment) -> Result<NormComputation, FusionError> {
    let cf = f.class_function(chi, b)?;
    weighted_norm(f.rows.iter().map(|r| r.length).zip(cf.values.iter()), f.subgroup_order)
}

/// `(1/n) Σ_{subset} length · |v|²` for a union of classes forming a normal subgroup of order `n`.
pub fn normal_part_norm(
    f: &FusionDataset,
    chi: &str,
    subset: &[&str],
    n_order: u64,
    b: &BranchAssignment,
) -> Result<NormComputation, FusionError> {
    let cf = f.class_function(chi, b)?;
    let idx: Vec<usize> = subset.iter().map(|s| f.row_index(s)).collect::<Result<_, _>>()?;
    let uniq: BTreeSet<usize> = idx.iter().copied().collect();
    if !uniq.iter().any(|&i| f.rows[i].is_identity()) {
        return Err(FusionError::MissingIdentity);
    }
    let sum: u128 = uniq.iter().map(|&i| f.rows[i].length as u128).sum();
    if sum != n_order as u128 {
        return Err(FusionError::SubsetOrder { sum, expected: n_order });
    }
    weighted_norm(uniq.iter().map(|&i| (f.rows[i].length, &cf.values[i])), n_order)
}

/// Every union of classes that contains the identity, has element orders
/// dividing `max_element_order` (the exponent of the sought normal subgroup)
/// and total length `n_order`, with its norm.
///
/// Sorted by size, then lexicographically by the (sorted) class names.
pub fn enumerate_normal_subsets(
    f: &FusionDataset,
    chi: &str,
    n_order: u64,
    max_element_order: u64,
    b: &BranchAssignment,
) -> Result<Vec<NormalSubset>, FusionError> {
    let cf = f.class_function(chi, b)?;
    let id = f.rows.iter().position(FusionRow::is_identity).ok_or(FusionError::MissingIdentity)?;
    let pool: Vec<usize> = (0..f.rows.len())
        .filter(|&i| i != id && f.rows[i].orders_divide(max_element_order) && f.rows[i].length < n_order)
        .collect();
    let target = n_order as u128 - f.rows[id].length as u128;
    let mut found: Vec<Vec<usize>> = Vec::new();
    fn dfs(f: &FusionDataset, pool: &[usize], start: usize, left: u128, cur: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
        if left == 0 {
            found.push(cur.clone());
            return;
        }
        for k in start..pool.len() {
            let len = f.rows[pool[k]].length as u128;
            if len <= left {
                cur.push(pool[k]);
                dfs(f, pool, k + 1, left - len, cur, found);
                cur.pop();
            }
        }
    }
    if n_order >= f.rows[id].length {
        dfs(f, &pool, 0, target, &mut Vec::new(), &mut found);
    }
    let mut out = Vec::new();
    for mut rows in found {
        rows.insert(0, id);
        rows.sort_unstable();
        let norm = weighted_norm(rows.iter().map(|&i| (f.rows[i].length, &cf.values[i])), n_order)?;
        let integral = norm.norm.is_integer() && norm.norm.is_positive();
        out.push(NormalSubset { classes: rows.iter().map(|&i| f.rows[i].sub_class.clone()).collect(), norm, integral });
    }
    out.sort_by(|a, b| {
        let mut x = a.classes.clone();
        let mut y = b.classes.clone();
        x.sort();
        y.sort();
        a.classes.len().cmp(&b.classes.len()).then(x.cmp(&y))
    });
    Ok(out)
}

/// Outcome for one candidate value of `m = e²t` in [`value_count_analysis`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountCandidate {
    pub m: u64,
    /// `(m·N − d²)/c`: the total length of the nonzero classes this `m` requires.
    #[serde(serialize_with = "crate::exactnum::ser_rational")]
    pub n: Rational,
    /// Unions of nonzero classes whose lengths add up to `n`.
    pub decompositions: Vec<Vec<String>>,
    /// Why the candidate is impossible; `None` if it is selected.
    pub rejection: Option<String>,
}

/// Result of [`value_count_analysis`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueCount {
    pub degree: u64,
    /// The common `|χ(g)|²` on the nonzero non-identity classes.
    #[serde(serialize_with = "crate::exactnum::ser_rational")]
    pub c: Rational,
    /// Nonzero non-identity classes of small order, with their lengths.
    pub pool: Vec<(String, u64)>,
    pub candidates: Vec<CountCandidate>,
}

impl ValueCount {
    pub fn selected(&self) -> impl Iterator<Item = &CountCandidate> {
        self.candidates.iter().filter(|c| c.rejection.is_none())
    }
}

/// Counting form of the Clifford argument for a normal subgroup of order
/// `n_order` whose element orders divide `max_element_order`.
///
/// When χ takes one nonzero absolute value `√c` on those classes, the norm
/// `m = e²t` of the restriction forces their total length to be
/// `n = (m·N − d²)/c`.  Each `m` allowed by `χ(1) = e·t·θ(1)` with
/// `θ(1) ∈ theta_degrees` is kept only if `n` is a non-negative integer that
/// is a sum of lengths of distinct nonzero classes.
pub fn value_count_analysis(
    f: &FusionDataset,
    chi: &str,
    b: &BranchAssignment,
    n_order: u64,
    max_element_order: u64,
    theta_degrees: &[u64],
) -> Result<ValueCount, FusionError> {
    let cf = f.class_function(chi, b)?;
    let id = f.rows.iter().position(FusionRow::is_identity).ok_or(FusionError::MissingIdentity)?;
    let degree = cf.values[id]
        .to_integer()
        .and_then(|d| d.to_u64())
        .filter(|d| *d > 0)
        .ok_or_else(|| FusionError::NotRational(cf.values[id].to_string()))?;
    let mut pool = Vec::new();
    let mut c: Option<Rational> = None;
    for (i, row) in f.rows.iter().enumerate() {
        if i == id || !row.orders_divide(max_element_order) || row.length >= n_order || cf.values[i].is_zero() {
            continue;
        }
        let v = cf.values[i].norm_sq().to_rational().map_err(|_| FusionError::NotRational(cf.values[i].to_string()))?;
        match &c {
            Some(c0) if *c0 != v => {
                return Err(FusionError::NonUniformValues(format!("{} has |value|^2 {v}, expected {c0}", row.sub_class)))
            }
            _ => c = Some(v),
        }
        pool.push((row.sub_class.clone(), row.length));
    }
    let c = c.ok_or_else(|| FusionError::NonUniformValues("no nonzero class of small order".into()))?;
    let mut ms = BTreeSet::new();
    for &theta in theta_degrees.iter().filter(|t| **t > 0 && degree % **t == 0) {
        let et = degree / theta;
        for e in (1..=et).filter(|e| et % e == 0) {
            ms.insert(e * e * (et / e));
        }
    }
    let available: u64 = pool.iter().map(|(_, l)| l).sum();
    let d2 = Rational::from_integer(BigInt::from(degree) * BigInt::from(degree));
    let mut candidates = Vec::new();
    for m in ms {
        let n = (Rational::from_integer(BigInt::from(m) * BigInt::from(n_order)) - &d2) / &c;
        let mut decompositions = Vec::new();
        let rejection = if !n.is_integer() {
            Some("n is not an integer".to_string())
        } else if n.is_negative() {
            Some("n is negative".to_string())
        } else if n > Rational::from_integer(BigInt::from(available)) {
            Some(format!("n exceeds the available length {available}"))
        } else {
            let target = n.to_integer().to_u64().expect("bounded by available");
            subset_sums(&pool, target, 0, &mut Vec::new(), &mut decompositions);
            decompositions.is_empty().then(|| "n is not a sum of distinct class lengths".to_string())
        };
        candidates.push(CountCandidate { m, n, decompositions, rejection });
    }
    Ok(ValueCount { degree, c, pool, candidates })
}

fn subset_sums(pool: &[(String, u64)], left: u64, start: usize, cur: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    if left == 0 {
        out.push(cur.clone());
        return;
    }
    for k in start..pool.len() {
        if pool[k].1 <= left {
            cur.push(pool[k].0.clone());
            subset_sums(pool, left - pool[k].1, k + 1, cur, out);
            cur.pop();
        }
    }
}

/// Transport a parent character along the fusion under a branch.
pub fn restrict(
    f: &FusionDataset,
    parent: &CharacterTable,
    chi: &str,
    b: &BranchAssignment,
) -> Result<ClassFunction, FusionError> {
    if parent.group_name != f.parent {
        return Err(FusionError::ParentMismatch(format!("dataset fuses into {}, table is {}", f.parent, parent.group_name)));
    }
    if parent.cover_multiplier != f.cover_multiplier {
        return Err(FusionError::ParentMismatch(format!(
            "dataset is for {}, table is {}",
            f.parent_display_name(),
            parent.display_name()
        )));
    }
    let ch = parent.character(chi)?;
    if f.cover_multiplier > 1 && !ch.faithful {
        return Err(FusionError::ParentMismatch(format!(
            "{chi} is not flagged faithful; pre-image values are only meaningful for faithful characters of the cover"
        )));
    }
    let mut out = ClassFunction { classes: Vec::new(), values: Vec::new() };
    for row in &f.rows {
        let target = &row.targets[b.choice(row)?];
        let vals: Vec<Cyclotomic> =
            target.classes.iter().map(|c| parent.value(ch, c)).collect::<Result<_, _>>()?;
        if vals.iter().any(|v| *v != vals[0]) {
            return Err(FusionError::AggregateMismatch {
                target: target.to_string(),
                values: vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
            });
        }
        out.classes.push(row.sub_class.clone());
        out.values.push(vals[0].clone());
    }
    Ok(out)
}

/// Multiplicities of the irreducibles of `t` in the class function `cf`.
pub fn decompose(cf: &ClassFunction, t: &CharacterTable) -> Result<Vec<(String, u64)>, FusionError> {
    if !t.is_complete() {
        return Err(TableError::Incomplete(t.display_name()).into());
    }
    let mut values = vec![None; t.classes.len()];
    for (c, v) in cf.classes.iter().zip(&cf.values) {
        let i = t.class_index(c)?;
        values[i] = Some(v.clone());
    }
    let values: Vec<Cyclotomic> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| TableError::MissingValue(t.classes[i].name.clone())))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for ch in t.irreducibles() {
        let m = t.inner_product_values(&values, &ch.values)?;
        let ok = m.is_integer() && !m.is_negative();
        let mi = m.to_integer().to_u64();
        match (ok, mi) {
            (true, Some(mi)) => out.push((ch.name.clone(), mi)),
            _ => return Err(FusionError::NotACharacter { character: ch.name.clone(), multiplicity: m.to_string() }),
        }
    }
    Ok(out)
}

/// A possible constituent: its value at the test class and the degrees it may have.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub value: Cyclotomic,
    pub degrees: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstituentSolution {
    /// Number of constituents taken from each candidate.
    pub counts: Vec<u64>,
    /// Finer split by `(candidate, degree)` atom, aligned with [`ConstituentSearch::atoms`].
    pub atom_counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstituentSearch {
    pub atoms: Vec<(usize, u64)>,
    pub solutions: Vec<ConstituentSolution>,
}

/// All nonnegative integer combinations of candidates whose degrees add up to
/// `target_degree` and whose values add up to `target_value`.
pub fn constituent_search(target_degree: u64, candidates: &[Candidate], target_value: &Cyclotomic) -> ConstituentSearch {
    let atoms: Vec<(usize, u64)> = candidates
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.degrees.iter().map(move |d| (i, *d)))
        .collect();
    assert!(atoms.iter().all(|(_, d)| *d > 0), "candidate degrees must be positive");
    let mut solutions = Vec::new();
    let mut cur = vec![0u64; atoms.len()];
    fn rec(
        k: usize,
        left: u64,
        atoms: &[(usize, u64)],
        cands: &[Candidate],
        cur: &mut Vec<u64>,
        target: &Cyclotomic,
        out: &mut Vec<ConstituentSolution>,
    ) {
        if k == atoms.len() {
            if left != 0 {
                return;
            }
            let mut acc = Accumulator::new();
            for (x, (ci, _)) in cur.iter().zip(atoms) {
                if *x > 0 {
                    acc.add_scaled(&cands[*ci].value, &Rational::from_integer(BigInt::from(*x)));
                }
            }
            if acc.finish() == *target {
                let mut counts = vec![0; cands.len()];
                for (x, (ci, _)) in cur.iter().zip(atoms) {
                    counts[*ci] += x;
                }
                out.push(ConstituentSolution { counts, atom_counts: cur.clone() });
            }
            return;
        }
        let d = atoms[k].1;
        for x in 0..=left / d {
            cur[k] = x;
            rec(k + 1, left - x * d, atoms, cands, cur, target, out);
        }
        cur[k] = 0;
    }
    rec(0, target_degree, &atoms, candidates, &mut cur, target_value, &mut solutions);
    ConstituentSearch { atoms, solutions }
}

/// Distinct values of the complex irreducibles of `t` at `class`, each with the
/// degrees carrying that value (first-appearance order), skipping `exclude_degrees`.
pub fn candidates_at_class(t: &CharacterTable, class: &str, exclude_degrees: &[u64]) -> Result<Vec<Candidate>, FusionError> {
    let mut out: Vec<Candidate> = Vec::new();
    for ch in t.irreducibles() {
        let d = crate::chartab::degree_u64(ch).ok_or_else(|| FusionError::NotRational(ch.degree().to_string()))?;
        if exclude_degrees.contains(&d) {
            continue;
        }
        let v = t.value(ch, class)?;
        match out.iter_mut().find(|c| c.value == v) {
            Some(c) => {
                if !c.degrees.contains(&d) {
                    c.degrees.push(d);
                }
            }
            None => out.push(Candidate { value: v, degrees: vec![d] }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::int;

    const TOY: &str = "\
fusion H order 6 into S3 cover 1
row 1a length 1 order 1 -> 1A
row 3a length 2 order 3 -> 3A
row 2a length 3 order 2 -> 2A
values standard 2 -1 0
";

    #[test]
    fn identity_fusion_norms() {
        let f = FusionDataset::parse(TOY).unwrap();
        let b = &enumerate_branches(&f)[0];
        assert_eq!(restriction_norm(&f, "standard", b).unwrap().norm, int(1));
        assert_eq!(restriction_norm(&f, "trivial", b).unwrap().norm, int(1));
        let n = normal_part_norm(&f, "standard", &["1a"], 1, b).unwrap();
        assert_eq!(n.norm, int(4));
        let n = normal_part_norm(&f, "standard", &["1a", "3a"], 3, b).unwrap();
        assert_eq!(n.norm, int(2));
        assert!(matches!(normal_part_norm(&f, "standard", &["1a", "3a"], 4, b), Err(FusionError::SubsetOrder { .. })));
        assert!(matches!(normal_part_norm(&f, "standard", &["3a"], 2, b), Err(FusionError::MissingIdentity)));
    }

    #[test]
    fn incomplete_dataset_rejected() {
        let bad = TOY.replace("length 3", "length 4");
        assert!(matches!(FusionDataset::parse(&bad), Err(FusionError::Incomplete { sum: 7, order: 6 })));
        assert!(FusionDataset::parse_unchecked(&bad).is_ok());
    }

    #[test]
    fn independent_ambiguities_multiply() {
        let text = "\
fusion H order 4 into G cover 1
row 1a length 1 order 1 -> 1A
row 2a length 1 order 2 -> 2A|2B
row 2b length 1 order 2 -> 2A|2B
row 2c length 1 order 2 -> 2C|2D link X
";
        let f = FusionDataset::parse(text).unwrap();
        assert_eq!(enumerate_branches(&f).len(), 8);
        let linked = text.replace("2B\nrow 2b length 1 order 2 -> 2A|2B", "2B link Y\nrow 2b length 1 order 2 -> 2A|2B link Y");
        let f = FusionDataset::parse(&linked).unwrap();
        assert_eq!(enumerate_branches(&f).len(), 4);
    }

    #[test]
    fn linked_rows_must_agree_in_width() {
        let text = "\
fusion H order 3 into G cover 1
row 1a length 1 order 1 -> 1A
row 2a length 1 order 2 -> 2A|2B|2C link L
row 2b length 1 order 2 -> 2A|2B link L
";
        assert!(FusionDataset::parse(text).is_err());
    }

    #[test]
    fn trivial_unit_vector_search() {
        let cands = vec![
            Candidate { value: Cyclotomic::from_integer(1), degrees: vec![1] },
            Candidate { value: Cyclotomic::from_integer(2), degrees: vec![3] },
        ];
        let s = constituent_search(3, &cands, &Cyclotomic::from_integer(2));
        assert!(s.solutions.iter().any(|x| x.counts == vec![0, 1]));
        let cands = vec![Candidate { value: Cyclotomic::from_integer(1), degrees: vec![2] }];
        assert!(constituent_search(1, &cands, &Cyclotomic::from_integer(1)).solutions.is_empty());
    }
}
