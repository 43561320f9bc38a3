//! Golden-file cases shared by the CLI tests and the acceptance runner.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
}

pub const CASES: &[Case] = &[
    Case { name: "validate_s3", args: &["validate", "s3.tbl"], exit: 0 },
    Case { name: "validate_3p", args: &["validate", "g2q3_3P.fus", "--parent", "g2q3_cover3.tbl"], exit: 0 },
    Case { name: "validate_g2_p5_list", args: &["validate", "g2_maximals_p5.dat"], exit: 0 },
    Case { name: "norm_3p_chi24", args: &["norm", "g2q3_3P.fus", "chi24", "--branch", "all"], exit: 0 },
    Case { name: "norm_3p_chi24_json", args: &["--json", "norm", "g2q3_3P.fus", "chi24"], exit: 0 },
    Case { name: "norm_2p_chi12", args: &["norm", "g2q4_2P.fus", "chi12"], exit: 0 },
    Case { name: "norm_2q_trivial", args: &["norm", "g2q4_2Q.fus", "trivial"], exit: 0 },
    Case {
        name: "clifford_3p_o3",
        args: &["clifford", "g2q3_3P.fus", "chi24", "--normal-order", "243", "--max-elt-order", "9", "--branch", "0"],
        exit: 0,
    },
    Case {
        name: "clifford_2p",
        args: &["clifford", "g2q4_2P.fus", "chi12", "--normal-order", "1024", "--max-elt-order", "4", "--theta-degrees", "1,2,4"],
        exit: 0,
    },
    Case {
        name: "clifford_2q",
        args: &["clifford", "g2q4_2Q.fus", "chi12", "--normal-order", "1024", "--max-elt-order", "4", "--theta-degrees", "1,2,4"],
        exit: 0,
    },
    Case {
        name: "clifford_2q_json",
        args: &["clifford", "g2q4_2Q.fus", "chi12", "--normal-order", "1024", "--max-elt-order", "4", "--theta-degrees", "1,2,4", "--json"],
        exit: 0,
    },
    Case {
        name: "clifford_trivial_subgroup",
        args: &["clifford", "g2q4_2P.fus", "chi12", "--normal-order", "1", "--max-elt-order", "1"],
        exit: 0,
    },
    Case { name: "screen_g2_7", args: &["screen", "--family", "g2", "--q", "7", "--ell", "0"], exit: 0 },
    Case { name: "screen_g2_25", args: &["screen", "--family", "g2", "--q", "25", "--ell", "0"], exit: 0 },
    Case { name: "screen_sz_8", args: &["screen", "--family", "sz", "--q", "8", "--ell", "0"], exit: 0 },
    Case { name: "screen_ree_27", args: &["screen", "--family", "ree", "--q", "27", "--ell", "2"], exit: 0 },
    Case { name: "screen_g2_range", args: &["screen", "--family", "g2", "--q-range", "5..32", "--ell", "3"], exit: 0 },
    Case { name: "degrees_5_0", args: &["degrees", "--q", "5", "--ell", "0"], exit: 0 },
    Case { name: "degrees_11_2", args: &["degrees", "--q", "11", "--ell", "2"], exit: 0 },
    Case { name: "degrees_7_3", args: &["degrees", "--q", "7", "--ell", "3"], exit: 0 },
    Case {
        name: "blocktest_q7_trivial",
        args: &[
            "blocktest", "--deg-rho", "344", "--val-rho", "-1", "--deg-alpha", "1", "--val-alpha", "1", "--class-length",
            "117992", "--ell", "2",
        ],
        exit: 0,
    },
    Case {
        name: "blocktest_inconclusive",
        args: &[
            "blocktest", "--deg-rho", "2", "--val-rho", "z3^1", "--deg-alpha", "1", "--val-alpha", "1", "--class-length", "2",
            "--ell", "3",
        ],
        exit: 0,
    },
    Case { name: "decompose_j2_chi2", args: &["decompose", "g2q4_J2.fus", "chi2", "j2.tbl"], exit: 0 },
    Case { name: "decompose_j2_chi5", args: &["decompose", "g2q4_J2.fus", "chi5", "j2.tbl"], exit: 0 },
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden"))
}

/// Runs the binary against the shipped data directory.
pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brestrict"))
        .args(args)
        .env_remove("BRESTRICT_DATA")
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("binary runs")
}
