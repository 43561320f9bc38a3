//! One function per CLI verb.  Each reads its inputs through the report (so
//! their digests are recorded) and appends steps and summary lines.

use std::path::Path;

use brestrict::chartab::{validate_table, CharacterTable, ValidationReport};
use brestrict::criteria::{block_separation_witness, clifford_rule, frobenius_irreducible, Status};
use brestrict::degrees::{
    brauer_degree_bounds, builtin_list_names, complex_degrees, d1, d2, isqrt, screen_with, unique_gap_character,
    CandidateList, DegreeEntry, DegreesError, EllClass, Family,
};
use brestrict::exactnum::{Cyclotomic, Rational};
use brestrict::fusion::{
    decompose, enumerate_branches, enumerate_normal_subsets, restriction_norm, value_count_analysis, BranchAssignment,
    FusionDataset, FusionError,
};

use crate::report::{ev, RunReport};
use crate::CliError;

/// `all` or a zero-based branch index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSel {
    All,
    Index(usize),
}

impl std::str::FromStr for BranchSel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "all" {
            return Ok(BranchSel::All);
        }
        s.parse().map(BranchSel::Index).map_err(|_| format!("expected `all` or a branch index, got `{s}`"))
    }
}

fn select_branches(f: &FusionDataset, sel: BranchSel) -> Result<Vec<(usize, BranchAssignment)>, CliError> {
    let all: Vec<_> = enumerate_branches(f).into_iter().enumerate().collect();
    match sel {
        BranchSel::All => Ok(all),
        BranchSel::Index(i) => {
            let n = all.len();
            all.into_iter()
                .find(|(k, _)| *k == i)
                .map(|b| vec![b])
                .ok_or_else(|| CliError::Usage(format!("branch {i} out of range: the dataset has {n} branch(es)")))
        }
    }
}

fn extension(name: &str) -> &str {
    Path::new(name).extension().and_then(|e| e.to_str()).unwrap_or("")
}

fn load_fusion(r: &mut RunReport, name: &str) -> Result<FusionDataset, CliError> {
    Ok(FusionDataset::parse(&r.read_input(name)?)?)
}

fn load_table(r: &mut RunReport, name: &str) -> Result<CharacterTable, CliError> {
    Ok(CharacterTable::parse(&r.read_input(name)?)?)
}

fn push_validation(r: &mut RunReport, report: &ValidationReport) {
    for c in &report.checks {
        r.step(c.name.clone(), if c.passed { "pass" } else { "fail" }, "", ev(&[("detail", c.detail.clone())]));
    }
    let failures = report.failures().count();
    r.summary(format!("{} check(s), {} failed", report.checks.len(), failures));
    r.failed = failures > 0;
}

pub fn validate(r: &mut RunReport, file: &str, parent: Option<&str>) -> Result<(), CliError> {
    match extension(file) {
        "tbl" => {
            let t = load_table(r, file)?;
            r.summary(format!("table {} of order {}", t.display_name(), t.order));
            push_validation(r, &validate_table(&t));
        }
        "fus" => {
            // Unchecked parse: an incomplete class list is a failed check, not a data error.
            let f = FusionDataset::parse_unchecked(&r.read_input(file)?)?;
            let t = parent.map(|p| load_table(r, p)).transpose()?;
            r.summary(format!("fusion {} -> {}", f.display_name(), f.parent_display_name()));
            push_validation(r, &f.validate(t.as_ref()));
        }
        "dat" => {
            let list = CandidateList::parse(&r.read_input(file)?)?;
            for c in &list.candidates {
                let mut e = ev(&[("order", c.order.clone()), ("center", c.center.clone())]);
                if !c.conditions.is_empty() {
                    let conds: Vec<String> = c.conditions.iter().map(ToString::to_string).collect();
                    e.push(("when".into(), conds.join(" ")));
                }
                if c.subfield {
                    e.push(("subfield".into(), "yes".into()));
                }
                r.step(format!("candidate[{}]", c.name), "pass", "", e);
            }
            r.summary(format!("{} candidate list with {} entries", list.family, list.candidates.len()));
        }
        other => return Err(CliError::Usage(format!("cannot validate `.{other}` files (expected .tbl, .fus or .dat)"))),
    }
    Ok(())
}

pub fn norm(r: &mut RunReport, file: &str, chi: &str, sel: BranchSel) -> Result<(), CliError> {
    let f = load_fusion(r, file)?;
    let branches = select_branches(&f, sel)?;
    let mut irreducible = 0;
    for (i, b) in &branches {
        let n = restriction_norm(&f, chi, b)?;
        let v = frobenius_irreducible(&n.norm)?;
        if v.status == Status::Irreducible {
            irreducible += 1;
        }
        r.verdict(
            format!("branch-{i}"),
            &v,
            ev(&[
                ("fusion", b.describe(&f)),
                ("sum", n.weighted_sum.to_string()),
                ("divisor", n.divisor.to_string()),
            ]),
        );
    }
    r.summary(format!(
        "{chi} restricted to {} <= {}: irreducible on {irreducible} of {} branch(es)",
        f.display_name(),
        f.parent_display_name(),
        branches.len()
    ));
    Ok(())
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

fn list_u64(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn to_u64(r: &Rational) -> Option<u64> {
    r.is_integer().then(|| u64::try_from(r.to_integer()).ok()).flatten()
}

pub struct CliffordArgs<'a> {
    pub file: &'a str,
    pub chi: &'a str,
    pub normal_order: u64,
    pub max_elt_order: u64,
    pub theta_degrees: Option<Vec<u64>>,
    pub branch: BranchSel,
}

pub fn clifford(r: &mut RunReport, a: &CliffordArgs) -> Result<(), CliError> {
    let f = load_fusion(r, a.file)?;
    let branches = select_branches(&f, a.branch)?;
    for (i, b) in &branches {
        let cf = f.class_function(a.chi, b)?;
        let id = f.rows.iter().position(|row| row.is_identity()).ok_or(FusionError::MissingIdentity)?;
        let degree = cf.values[id]
            .to_integer()
            .and_then(|d| u64::try_from(d).ok())
            .ok_or_else(|| CliError::Usage(format!("{} has no positive integer degree", a.chi)))?;
        let irreducible = restriction_norm(&f, a.chi, b)?.norm == Rational::from_integer(1.into());
        let theta = a.theta_degrees.clone().unwrap_or_else(|| divisors(degree));
        let allowed = a.theta_degrees.as_deref();
        let prefix = format!("b{i}");

        let subsets = enumerate_normal_subsets(&f, a.chi, a.normal_order, a.max_elt_order, b)?;
        let integral = subsets.iter().filter(|s| s.integral).count();
        for (j, s) in subsets.iter().enumerate() {
            let id = format!("{prefix}/subset-{}", j + 1);
            let e = ev(&[
                ("classes", s.classes.join(" ")),
                ("sum", s.norm.weighted_sum.to_string()),
                ("divisor", s.norm.divisor.to_string()),
                ("norm", s.norm.norm.to_string()),
            ]);
            r.step(&id, if s.integral { "integral" } else { "rejected" }, "normal-subset", e);
            if let Some(m) = s.integral.then(|| to_u64(&s.norm.norm)).flatten() {
                r.verdict(format!("{id}/clifford"), &clifford_rule(m, degree, allowed, irreducible), vec![]);
            }
        }
        r.summary(format!(
            "branch {i} ({}): {} candidate subset(s) of order {} with element orders dividing {}, {integral} with integral norm",
            b.describe(&f),
            subsets.len(),
            a.normal_order,
            a.max_elt_order
        ));

        match value_count_analysis(&f, a.chi, b, a.normal_order, a.max_elt_order, &theta) {
            Ok(vc) => {
                let pool: Vec<String> = vc.pool.iter().map(|(c, l)| format!("{c}:{l}")).collect();
                r.step(
                    format!("{prefix}/count"),
                    "applicable",
                    "value-count",
                    ev(&[
                        ("degree", vc.degree.to_string()),
                        ("common |value|^2", vc.c.to_string()),
                        ("nonzero classes", pool.join(" ")),
                        ("theta degrees", list_u64(&theta)),
                    ]),
                );
                for c in &vc.candidates {
                    let id = format!("{prefix}/count/m={}", c.m);
                    let mut e = ev(&[("n", c.n.to_string())]);
                    match &c.rejection {
                        Some(why) => {
                            e.push(("reason".into(), why.clone()));
                            r.step(&id, "rejected", "value-count", e);
                        }
                        None => {
                            let decs: Vec<String> = c.decompositions.iter().map(|d| d.join("+")).collect();
                            e.push(("classes".into(), decs.join(" | ")));
                            r.step(&id, "selected", "value-count", e);
                            r.verdict(format!("{id}/clifford"), &clifford_rule(c.m, degree, Some(&theta), irreducible), vec![]);
                        }
                    }
                }
                let sel: Vec<String> = vc.selected().map(|c| format!("m={} (n={})", c.m, c.n)).collect();
                r.summary(format!(
                    "branch {i}: value counting selects {}",
                    if sel.is_empty() { "nothing".to_string() } else { sel.join(", ") }
                ));
            }
            Err(FusionError::NonUniformValues(why)) => {
                r.summary(format!("branch {i}: value counting not applicable ({why})"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Parses `A..B` (inclusive) or a single number.
pub fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let bad = || format!("expected `A..B` with A <= B, got `{s}`");
    match s.split_once("..") {
        Some((a, b)) => {
            let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            Ok((a, b))
        }
        None => s.trim().parse().map(|q| (q, q)).map_err(|_| bad()),
    }
}

pub fn screen(r: &mut RunReport, family: Family, qs: (u64, u64), ell: u64, single: bool) -> Result<(), CliError> {
    let ell = EllClass::from_ell(ell)?;
    let mut lists = Vec::new();
    for name in builtin_list_names() {
        lists.push(CandidateList::parse(&r.read_input(name)?)?);
    }
    let mut skipped = 0;
    for q in qs.0..=qs.1 {
        let res = match screen_with(&lists, family, q, ell) {
            Ok(res) => res,
            Err(
                DegreesError::NotPrimePower(_) | DegreesError::Inadmissible { .. } | DegreesError::EllDividesQ { .. },
            ) if !single => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for row in &res.rows {
            let c = &row.candidate;
            let mut e = ev(&[
                ("order formula", c.order_formula.clone()),
                ("|M|", c.order.to_string()),
                ("|Z(M)|", c.center_order.to_string()),
            ]);
            if family == Family::G2 {
                e.push(("floor(sqrt|M|)".into(), isqrt(&c.order).to_string()));
            }
            let cmp = if row.survives { ">=" } else { "<" };
            e.push(("test".into(), format!("{} {cmp} {}", c.order, res.order_bound)));
            r.step(format!("q={q}/{}", c.name), if row.survives { "survives" } else { "excluded" }, "order-screen", e);
        }
        let names: Vec<&str> = res.survivors().iter().map(|c| c.name.as_str()).collect();
        r.summary(format!("{family}({q}), l={}: {}; survivors: {}", res.ell, res.rule, names.join(", ")));
    }
    if skipped > 0 {
        r.summary(format!("{skipped} value(s) of q in the range skipped as inadmissible"));
    }
    Ok(())
}

fn degree_step(r: &mut RunReport, prefix: &str, e: &DegreeEntry) {
    let status = if e.value.is_exact() { "exact" } else { "lower-bound" };
    r.step(
        format!("{prefix}/{}", e.name),
        status,
        "",
        ev(&[("formula", e.formula.clone()), ("value", e.value.value().to_string())]),
    );
}

pub fn degrees(r: &mut RunReport, q: u64, ell: u64) -> Result<(), CliError> {
    let ell = EllClass::from_ell(ell)?;
    for e in complex_degrees(q)? {
        degree_step(r, "complex", &e);
    }
    if matches!(ell, EllClass::Two | EllClass::Three) {
        for e in brauer_degree_bounds(q, ell)? {
            degree_step(r, "brauer", &e);
        }
    }
    let (a, b) = (d1(q, ell)?, d2(q, ell)?);
    degree_step(r, "bound", &DegreeEntry { name: "d1".into(), ..a.clone() });
    degree_step(r, "bound", &DegreeEntry { name: "d2".into(), ..b.clone() });
    let psi = unique_gap_character(q, ell)?;
    r.step("psi", "unique", "", ev(&[("character", psi.to_string()), ("degree", psi.degree.to_string())]));
    r.summary(format!("G2({q}), l={ell}: d1 = {}, d2 = {}", a.value, b.value));
    r.summary(format!("the only irreducible degree in (1, d2) is psi = {} of degree {}", psi, psi.degree));
    Ok(())
}

pub struct BlockArgs {
    pub deg_rho: u64,
    pub val_rho: String,
    pub deg_alpha: u64,
    pub val_alpha: String,
    pub class_length: u128,
    pub ell: u64,
}

pub fn blocktest(r: &mut RunReport, a: &BlockArgs) -> Result<(), CliError> {
    let parse = |s: &str| s.parse::<Cyclotomic>().map_err(|e| CliError::Usage(format!("bad value `{s}`: {e}")));
    let (vr, va) = (parse(&a.val_rho)?, parse(&a.val_alpha)?);
    let v = block_separation_witness(a.deg_rho, &vr, a.deg_alpha, &va, a.class_length, a.ell)?;
    r.verdict(
        "witness",
        &v,
        ev(&[
            ("rho", format!("degree {}, value {vr}", a.deg_rho)),
            ("alpha", format!("degree {}, value {va}", a.deg_alpha)),
            ("class length", a.class_length.to_string()),
        ]),
    );
    r.summary(match v.status {
        Status::Separated => format!("rho and alpha lie in different {}-blocks", a.ell),
        _ => "no separation established".to_string(),
    });
    Ok(())
}

pub fn decompose_cmd(r: &mut RunReport, file: &str, chi: &str, table: &str, sel: BranchSel) -> Result<(), CliError> {
    let f = load_fusion(r, file)?;
    let t = load_table(r, table)?;
    for (i, b) in select_branches(&f, sel)? {
        let cf = f.class_function(chi, &b)?;
        let id = format!("branch-{i}");
        match decompose(&cf, &t) {
            Ok(mults) => {
                let parts: Vec<String> =
                    mults.iter().filter(|(_, m)| *m > 0).map(|(n, m)| if *m == 1 { n.clone() } else { format!("{m}*{n}") }).collect();
                let norm: u64 = mults.iter().map(|(_, m)| m * m).sum();
                let all: Vec<String> = mults.iter().map(|(n, m)| format!("{n}:{m}")).collect();
                r.step(
                    &id,
                    "character",
                    "inner-products",
                    ev(&[
                        ("fusion", b.describe(&f)),
                        ("restriction", parts.join(" + ")),
                        ("norm", norm.to_string()),
                        ("multiplicities", all.join(" ")),
                    ]),
                );
                r.summary(format!("branch {i}: {chi} restricted to {} = {}", t.display_name(), parts.join(" + ")));
            }
            Err(FusionError::NotACharacter { character, multiplicity }) => {
                r.step(
                    &id,
                    "not-a-character",
                    "inner-products",
                    ev(&[("fusion", b.describe(&f)), ("offending", format!("<{chi}, {character}> = {multiplicity}"))]),
                );
                r.summary(format!("branch {i}: the restricted values are not a character of {}", t.display_name()));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}
