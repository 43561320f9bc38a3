use std::fs;

use brestrict::chartab::{validate_table, CharacterTable};
use brestrict::criteria::clifford_solutions;
use brestrict::exactnum::{int, rat, Cyclotomic, Rational};
use brestrict::fusion::*;

fn data(name: &str) -> String {
    fs::read_to_string(brestrict::data::data_dir().join(name)).unwrap()
}

fn table(name: &str) -> CharacterTable {
    CharacterTable::parse(&data(name)).unwrap()
}

fn fusion(name: &str) -> FusionDataset {
    FusionDataset::parse(&data(name)).unwrap()
}

const TABLES: &[&str] =
    &["s3.tbl", "u3q3.tbl", "u3q4.tbl", "j2.tbl", "g2q3.tbl", "g2q4.tbl", "g2q3_cover3.tbl", "g2q4_cover2.tbl"];

#[test]
fn every_shipped_table_validates() {
    for name in TABLES {
        let t = table(name);
        let report = validate_table(&t);
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{name}: {failures:?}");
        if t.cover_multiplier == 1 {
            assert!(t.is_complete(), "{name} should be complete");
            assert!(report.checks.iter().any(|c| c.name == "row-orthogonality"), "{name}");
        }
    }
}

/// Independent orthogonality check: first and second orthogonality relations
/// recomputed directly from the parsed values.
#[test]
fn complete_tables_satisfy_both_orthogonality_relations() {
    for name in TABLES {
        let t = table(name);
        if !t.is_complete() {
            continue;
        }
        let order = Rational::from_integer(t.order.into());
        let chars: Vec<_> = t.irreducibles().collect();
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let mut s = Cyclotomic::zero();
                for (k, c) in t.classes.iter().enumerate() {
                    s = s + (&a.values[k] * &b.values[k].conj()).scale(&int(c.length as i64));
                }
                let expect = if i == j { order.clone() } else { int(0) };
                assert_eq!(s, Cyclotomic::from_rational(expect), "{name}: <{}, {}>", a.name, b.name);
            }
        }
        for k in 0..t.classes.len() {
            for l in 0..t.classes.len() {
                let s: Cyclotomic = chars.iter().map(|c| &c.values[k] * &c.values[l].conj()).sum();
                let expect = if k == l {
                    order.clone() / int(t.classes[k].length as i64)
                } else {
                    int(0)
                };
                assert_eq!(s, Cyclotomic::from_rational(expect), "{name}: columns {k}, {l}");
            }
        }
    }
}

/// Faithful characters of the covers come in complex-conjugate pairs
/// `chiN`, `chiNbar`; the two must be conjugate class by class.
#[test]
fn cover_tables_have_conjugate_pairs() {
    for name in ["g2q3_cover3.tbl", "g2q4_cover2.tbl"] {
        let t = table(name);
        for ch in &t.characters {
            assert!(ch.faithful, "{name}: {} should be faithful", ch.name);
            if let Some(base) = ch.name.strip_suffix("bar") {
                let partner = t.character(base).unwrap();
                let conj: Vec<_> = partner.values.iter().map(Cyclotomic::conj).collect();
                // Values are stored at the printed pre-images, where a faithful
                // character may well be real; conjugation must still match.
                assert_eq!(ch.values, conj, "{name}: {}", ch.name);
            }
        }
    }
    assert_eq!(table("g2q3_cover3.tbl").display_name(), "3.G2(3)");
}

const FUSIONS: &[(&str, &str)] = &[
    ("g2q3_3P.fus", "g2q3_cover3.tbl"),
    ("g2q4_2P.fus", "g2q4_cover2.tbl"),
    ("g2q4_2Q.fus", "g2q4_cover2.tbl"),
    ("g2q4_J2.fus", "g2q4.tbl"),
];

#[test]
fn every_shipped_fusion_is_complete_and_agrees_with_its_parent() {
    for (fus, tbl) in FUSIONS {
        let f = fusion(fus);
        assert_eq!(f.length_sum(), f.subgroup_order as u128, "{fus}");
        let report = f.validate(Some(&table(tbl)));
        let failures: Vec<_> = report.failures().collect();
        assert!(failures.is_empty(), "{fus}: {failures:?}");
    }
}

#[test]
fn parabolic_of_3g2_3_norm_on_both_branches() {
    let f = fusion("g2q3_3P.fus");
    let branches = enumerate_branches(&f);
    assert_eq!(branches.len(), 2);
    for b in &branches {
        let n = restriction_norm(&f, "chi24", b).unwrap();
        assert_eq!(n.weighted_sum, int(11_664));
        assert_eq!(n.norm, int(1));
        let trivial = restriction_norm(&f, "trivial", b).unwrap();
        assert_eq!(trivial.norm, int(1));
    }
}

#[test]
fn o3_clifford_check() {
    let f = fusion("g2q3_3P.fus");
    for b in enumerate_branches(&f) {
        let n = normal_part_norm(&f, "chi24", &["A1", "O3*"], 243, &b).unwrap();
        assert_eq!(n.norm, int(3));
        let subsets = enumerate_normal_subsets(&f, "chi24", 243, 9, &b).unwrap();
        assert_eq!(subsets.len(), 1);
        assert_eq!(subsets[0].classes, ["A1", "O3*"]);
    }
    let sols = clifford_solutions(3, 27, None);
    assert_eq!(sols.len(), 1);
    assert_eq!((sols[0].e, sols[0].t, sols[0].theta_degree), (1, 3, 9));
}

#[test]
fn first_parabolic_of_2g2_4_norm_and_normal_subsets() {
    let f = fusion("g2q4_2P.fus");
    let b = &enumerate_branches(&f)[0];
    let n = restriction_norm(&f, "chi12", b).unwrap();
    assert_eq!((n.weighted_sum.clone(), n.norm.clone()), (int(184_320), int(1)));
    let subsets = enumerate_normal_subsets(&f, "chi12", 1024, 4, b).unwrap();
    assert_eq!(subsets.len(), 2);
    let norms: Vec<_> = subsets.iter().map(|s| s.norm.norm.clone()).collect();
    assert!(norms.contains(&rat(9, 8)) && norms.contains(&int(3)), "{norms:?}");
    let rejected = subsets.iter().find(|s| !s.integral).unwrap();
    assert_eq!((rejected.norm.weighted_sum.clone(), rejected.norm.divisor), (int(1152), 1024));
    let sols = clifford_solutions(3, 12, Some(&[1, 2, 4]));
    assert_eq!(sols.len(), 1);
    assert_eq!((sols[0].e, sols[0].t, sols[0].theta_degree), (1, 3, 4));
}

#[test]
fn second_parabolic_of_2g2_4_norm_and_value_count() {
    let f = fusion("g2q4_2Q.fus");
    let b = &enumerate_branches(&f)[0];
    let n = restriction_norm(&f, "chi12", b).unwrap();
    assert_eq!((n.weighted_sum.clone(), n.norm.clone()), (int(184_320), int(1)));
    let vc = value_count_analysis(&f, "chi12", b, 1024, 4, &[1, 2, 4]).unwrap();
    assert_eq!(vc.c, int(16));
    let selected: Vec<_> = vc.selected().collect();
    assert_eq!(selected.len(), 1);
    assert_eq!(selected[0].m, 6);
    assert_eq!(selected[0].n, int(375));
    assert_eq!(selected[0].decompositions, vec![vec!["A1".to_string(), "A32".to_string()]]);
    for (m, n) in [(3, 183), (9, 567), (12, 759)] {
        let c = vc.candidates.iter().find(|c| c.m == m).unwrap();
        assert!(c.rejection.is_some());
        assert_eq!(c.n, int(n));
    }
    let sols = clifford_solutions(6, 12, Some(&[1, 2, 4]));
    assert_eq!(sols.len(), 1);
    assert_eq!((sols[0].e, sols[0].t, sols[0].theta_degree), (1, 6, 2));
}

#[test]
fn restriction_through_parent_table_matches_dataset_values() {
    for (fus, tbl) in FUSIONS {
        let f = fusion(fus);
        let t = table(tbl);
        for b in enumerate_branches(&f) {
            for chi in f.character_names().map(str::to_string).collect::<Vec<_>>() {
                if chi == "trivial" {
                    continue;
                }
                let via_parent = restrict(&f, &t, &chi, &b).unwrap();
                let listed = f.class_function(&chi, &b).unwrap();
                assert_eq!(via_parent, listed, "{fus} {chi} under {}", b.describe(&f));
            }
        }
    }
}

#[test]
fn j2_restrictions_decompose() {
    let f = fusion("g2q4_J2.fus");
    let j2 = table("j2.tbl");
    let b = &enumerate_branches(&f)[0];
    let cf = f.class_function("chi2", b).unwrap();
    let dec = decompose(&cf, &j2).unwrap();
    let total: u64 = dec.iter().map(|(name, m)| m * brestrict::chartab::degree_u64(j2.character(name).unwrap()).unwrap()).sum();
    assert_eq!(total, 65);
    // A perturbed class function is not a character.
    let mut bad = cf.clone();
    bad.values[1] = bad.values[1].clone() + Cyclotomic::one();
    assert!(matches!(decompose(&bad, &j2), Err(FusionError::NotACharacter { .. })));
}

#[test]
fn constituent_search_forces_two_degree_52_constituents() {
    let u = table("u3q4.tbl");
    let cands = candidates_at_class(&u, "5E", &[64]).unwrap();
    assert_eq!(cands.len(), 9);
    // b5 = (-1 + sqrt 5)/2 = z5 + z5^4
    let b5: Cyclotomic = "z5^1+z5^4".parse().unwrap();
    let x7 = cands.iter().position(|c| c.value == b5).unwrap();
    assert_eq!(cands[x7].degrees, vec![52]);
    let target = &b5 + &b5;
    let search = constituent_search(104, &cands, &target);
    assert!(!search.solutions.is_empty());
    assert!(search.solutions.iter().all(|s| s.counts[x7] >= 2));
    // Unreachable target: degree 1 with all degrees at least 2.
    let big: Vec<_> = cands.iter().map(|c| Candidate { value: c.value.clone(), degrees: vec![2] }).collect();
    assert!(constituent_search(1, &big, &Cyclotomic::one()).solutions.is_empty());
}
