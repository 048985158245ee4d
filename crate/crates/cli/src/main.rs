//! `prodone`: product-one sequences and their factorization arithmetic
//! from the command line. Every command prints one JSON report.

mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prodone_core::{Budgets, Error};

use crate::report::Report;

#[derive(Parser, Debug)]
#[command(
    name = "prodone",
    version,
    about = "Product-one sequences over groups and their factorization arithmetic"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct GlobalOpts {
    /// Render the report as an aligned key/value table instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Longest sequence the permutation oracle accepts.
    #[arg(long, global = true, default_value_t = Budgets::default().perm_len)]
    perm_len: u64,
    /// Cap on (sub-multiset, element) pairs held by the product DP.
    #[arg(long, global = true, default_value_t = Budgets::default().dp_pairs)]
    dp_pairs: u128,
    /// Cap on sub-multisets visited by one walk.
    #[arg(long, global = true, default_value_t = Budgets::default().subsequences)]
    subsequences: u128,
    /// Cap on reachable states in the dihedral balancing DP.
    #[arg(long, global = true, default_value_t = Budgets::default().balance_states)]
    balance_states: usize,
}

impl GlobalOpts {
    fn budgets(&self) -> Budgets {
        Budgets {
            perm_len: self.perm_len,
            dp_pairs: self.dp_pairs,
            subsequences: self.subsequences,
            balance_states: self.balance_states,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The product set of a sequence.
    Pi {
        /// Group document: a file path or inline JSON.
        group: String,
        sequence: String,
        /// Use the permutation oracle and report agreement with the DP.
        #[arg(long)]
        oracle: bool,
    },
    /// Whether a sequence is product-one.
    IsOne {
        group: String,
        sequence: String,
        /// Also print an ordering of the terms with product 1.
        #[arg(long)]
        witness: bool,
    },
    /// Atoms of the monoid of product-one sequences over a subset.
    Atoms {
        group: String,
        subset: String,
        /// List every atom of at most this length.
        #[arg(long, conflicts_with = "exact")]
        max_len: Option<u32>,
        /// Require a provably complete list (the default).
        #[arg(long)]
        exact: bool,
    },
    /// The large Davenport constant of a subset.
    Davenport {
        group: String,
        subset: String,
        /// Length searched when no exact method applies.
        #[arg(long, default_value_t = 12)]
        max_len: u32,
    },
    /// Every factorization of a product-one sequence into atoms.
    Factorize {
        group: String,
        subset: String,
        sequence: String,
    },
    /// Sets of lengths, distances, elasticities and catenary degree over a bounded scan.
    Invariants {
        group: String,
        subset: String,
        /// Largest sequence length scanned.
        #[arg(long)]
        max_size: u32,
        /// Largest k for the unions of sets of lengths.
        #[arg(long)]
        max_k: u32,
        /// Also compute omega, tau and t per atom within this bound.
        #[arg(long)]
        tame_bound: Option<u32>,
    },
    /// Bounded counterexample search for seminormality or root closure.
    Probe {
        #[arg(value_enum)]
        property: ProbeKind,
        group: String,
        subset: String,
        /// Largest length of the product-one sequences searched.
        #[arg(long)]
        bound: u32,
        /// Largest power tried by the root-closure probe.
        #[arg(long, default_value_t = 6)]
        max_power: u32,
    },
    /// Decision procedures for subsets of the infinite dihedral group.
    #[command(subcommand)]
    Dihedral(DihedralCommand),
    /// Run the acceptance suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Subcommand, Debug)]
enum DihedralCommand {
    /// Finitely generated, tame, locally tame and weakly Krull verdicts.
    Classify { subset: String },
    /// Product-one membership by the balancing criterion.
    IsOne {
        sequence: String,
        /// Also print the balanced split and the ordering it induces.
        #[arg(long)]
        witness: bool,
    },
    /// Atoms by enumeration, or by a closed form where one is known.
    Atoms {
        subset: String,
        #[arg(long, default_value_t = 12)]
        max_len: u32,
        #[arg(long)]
        closed_form: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ProbeKind {
    Seminormal,
    Rootclosed,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteArg {
    All,
    Davenport,
    Dihedral,
    Invariants,
    Oracle,
}

/// Outcome of a command: its report and whether a verification failed.
pub struct Outcome {
    report: Report,
    verified: bool,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, verified: true }
    }
}

fn configure_threads() {
    let Ok(text) = std::env::var("PRODONE_THREADS") else {
        return;
    };
    match text.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // Fails only if a pool already exists, which cannot happen this early.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("prodone: ignoring PRODONE_THREADS={text:?}, expected a positive integer"),
    }
}

fn exit_code_for(e: &Error) -> u8 {
    if e.is_budget() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let start = Instant::now();
    match commands::run(cli.command, &cli.global) {
        Ok(mut outcome) => {
            if cli.global.timing {
                outcome.report.set_elapsed(start.elapsed());
            }
            println!("{}", outcome.report.render(cli.global.pretty));
            if outcome.verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("prodone: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
