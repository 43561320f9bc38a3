//! `brestrict`: reproducible verification runs over the shipped character
//! tables, fusion datasets and candidate lists.
//!
//! Exit status: 0 on success, 1 when a check fails or a verdict disagrees
//! with the `--expect` file, 2 on data or usage errors.

mod commands;
mod report;

use std::process::ExitCode;

use brestrict::degrees::Family;
use clap::{Parser, Subcommand};
use thiserror::Error;

use commands::{BlockArgs, BranchSel, CliffordArgs};
use report::{command_echo, RunReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Table(#[from] brestrict::chartab::TableError),
    #[error(transparent)]
    Fusion(#[from] brestrict::fusion::FusionError),
    #[error(transparent)]
    Degrees(#[from] brestrict::degrees::DegreesError),
    #[error(transparent)]
    Criteria(#[from] brestrict::criteria::CriteriaError),
    #[error("expectations file line {line}: {message}")]
    Expect { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser, Debug)]
#[command(name = "brestrict", version, about = "Exact checks of irreducible restrictions of group characters")]
struct Cli {
    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// File of `<step-id> <status>` lines; any disagreement exits with status 1.
    #[arg(long, global = true, value_name = "FILE")]
    expect: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a character table (.tbl), fusion dataset (.fus) or candidate list (.dat).
    Validate {
        file: String,
        /// Parent character table to check a fusion dataset against.
        #[arg(long)]
        parent: Option<String>,
    },
    /// Restriction norms and Frobenius verdicts, per fusion branch.
    Norm {
        fusion: String,
        character: String,
        #[arg(long, default_value = "all")]
        branch: BranchSel,
    },
    /// Normal-subgroup analysis: candidate class unions, norms, Clifford solutions.
    Clifford {
        fusion: String,
        character: String,
        #[arg(long)]
        normal_order: u64,
        #[arg(long)]
        max_elt_order: u64,
        /// Admissible degrees of the constituent on the normal subgroup, e.g. `1,2,4`.
        #[arg(long, value_delimiter = ',')]
        theta_degrees: Option<Vec<u64>>,
        #[arg(long, default_value = "all")]
        branch: BranchSel,
    },
    /// Order screen of the maximal-subgroup candidates.
    Screen {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long, required_unless_present = "q_range", conflicts_with = "q_range")]
        q: Option<u64>,
        /// Inclusive range `A..B`; inadmissible q are skipped.
        #[arg(long)]
        q_range: Option<String>,
        #[arg(long, default_value_t = 0)]
        ell: u64,
    },
    /// Degree catalog of G2(q), Brauer bounds and the gap degrees d1, d2.
    Degrees {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 0)]
        ell: u64,
    },
    /// Central-character block separation test for two characters.
    Blocktest {
        #[arg(long)]
        deg_rho: u64,
        #[arg(long, allow_hyphen_values = true)]
        val_rho: String,
        #[arg(long)]
        deg_alpha: u64,
        #[arg(long, allow_hyphen_values = true)]
        val_alpha: String,
        #[arg(long)]
        class_length: u128,
        #[arg(long)]
        ell: u64,
    },
    /// Decompose a restriction into irreducibles of the subgroup table.
    Decompose {
        fusion: String,
        character: String,
        table: String,
        #[arg(long, default_value = "all")]
        branch: BranchSel,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

fn run(cli: &Cli, report: &mut RunReport) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { file, parent } => commands::validate(report, file, parent.as_deref())?,
        Command::Norm { fusion, character, branch } => commands::norm(report, fusion, character, *branch)?,
        Command::Clifford { fusion, character, normal_order, max_elt_order, theta_degrees, branch } => {
            commands::clifford(
                report,
                &CliffordArgs {
                    file: fusion,
                    chi: character,
                    normal_order: *normal_order,
                    max_elt_order: *max_elt_order,
                    theta_degrees: theta_degrees.clone(),
                    branch: *branch,
                },
            )?
        }
        Command::Screen { family, q, q_range, ell } => {
            let (range, single) = match (q, q_range) {
                (Some(q), _) => ((*q, *q), true),
                (None, Some(r)) => (commands::parse_range(r).map_err(CliError::Usage)?, false),
                (None, None) => return Err(CliError::Usage("--q or --q-range is required".into())),
            };
            commands::screen(report, *family, range, *ell, single)?
        }
        Command::Degrees { q, ell } => commands::degrees(report, *q, *ell)?,
        Command::Blocktest { deg_rho, val_rho, deg_alpha, val_alpha, class_length, ell } => commands::blocktest(
            report,
            &BlockArgs {
                deg_rho: *deg_rho,
                val_rho: val_rho.clone(),
                deg_alpha: *deg_alpha,
                val_alpha: val_alpha.clone(),
                class_length: *class_length,
                ell: *ell,
            },
        )?,
        Command::Decompose { fusion, character, table, branch } => {
            commands::decompose_cmd(report, fusion, character, table, *branch)?
        }
    }
    if let Some(file) = &cli.expect {
        let text = std::fs::read_to_string(file).map_err(|source| CliError::Io { path: file.clone(), source })?;
        report.check_expectations(file, &text)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut report = RunReport::new(command_echo(std::env::args().skip(1)));
    if let Err(e) = run(&cli, &mut report) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if cli.json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_text());
    }
    ExitCode::from(report.exit_code() as u8)
}
