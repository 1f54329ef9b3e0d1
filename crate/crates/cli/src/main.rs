mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sprules::error::Error;

#[derive(Parser, Debug)]
#[command(name = "sprules", version, about = "Strategy-proof rules on restricted preference domains")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Re-check results with brute-force enumeration where feasible.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest outcome table to build.
    #[arg(long, global = true, default_value_t = sprules::rules::DEFAULT_MAX_PROFILES)]
    pub max_profiles: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scan {
    Default,
    Reversed,
}

#[derive(Args, Debug, Clone)]
pub struct DomainArg {
    /// Domain file (.spdom).
    #[arg(long)]
    pub domain: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RuleArgs {
    /// Rule file; its domain must match --domain.
    #[arg(long, conflicts_with = "assignment", required_unless_present = "assignment")]
    pub rule: Option<PathBuf>,
    /// Assignment file; the rule is assembled from per-block subrules.
    #[arg(long)]
    pub assignment: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print each agent's restriction map.
    Classify {
        #[command(flatten)]
        domain: DomainArg,
        /// Pair scan order used when choosing restrictions.
        #[arg(long, value_enum, default_value_t = Scan::Default)]
        scan: Scan,
        /// Require conclusions to hold exactly where the antecedent does.
        #[arg(long)]
        biconditional: bool,
    },
    /// Fixed pairs and their non-conditional closure per agent.
    Closure {
        #[command(flatten)]
        domain: DomainArg,
    },
    /// Answer sets and answer blocks per agent.
    Partition {
        #[command(flatten)]
        domain: DomainArg,
    },
    /// Count second-step subrules per response profile.
    CountSubrules {
        #[command(flatten)]
        domain: DomainArg,
    },
    /// Enumerate strategy-proof rules on the product domain.
    EnumerateSp {
        #[command(flatten)]
        domain: DomainArg,
        /// Only rules whose range lies in this comma-separated set.
        #[arg(long)]
        range: Option<String>,
        /// Print each rule's outcome table.
        #[arg(long)]
        tables: bool,
        /// Report a random sample of this many rules.
        #[arg(long)]
        sample: Option<usize>,
        /// Seed for --sample.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Strategy-proofness, dictators and range of a rule.
    CheckRule {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        rule: RuleArgs,
    },
    /// Split a rule into per-response-profile subrules and classify them.
    Decompose {
        #[command(flatten)]
        domain: DomainArg,
        #[command(flatten)]
        rule: RuleArgs,
        /// Also write the blocks as an assignment file.
        #[arg(long)]
        emit_assignment: Option<PathBuf>,
    },
    /// Check that every SP rule has range two or a dictator.
    VerifyTheorem {
        /// Domain files to check; defaults to every product of
        /// non-conditional domains.
        #[arg(long)]
        domain: Vec<PathBuf>,
        /// Alternatives in the default family.
        #[arg(long, default_value_t = 3)]
        alternatives: usize,
        /// Agents in the default family.
        #[arg(long, default_value_t = 2)]
        agents: usize,
    },
    /// Assemble catalog subrules and keep the SP combinations.
    SearchTwoStep {
        #[command(flatten)]
        domain: DomainArg,
        /// Maximum assembled candidates.
        #[arg(long, default_value_t = sprules::twostep::DEFAULT_BUDGET)]
        budget: u64,
        /// Print each rule found.
        #[arg(long)]
        tables: bool,
    },
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Input(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_size_limit() => 2,
            Failure::Core(_) | Failure::Input(_) => 1,
            Failure::Verification(_) => 3,
        }
    }
}

/// A finished report. `failed` carries a verification failure that should
/// still print the report.
pub struct Report {
    pub text: String,
    pub json: serde_json::Value,
    pub failed: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = commands::run(&cli.command, &cli.global).and_then(|report| {
        let body = match cli.global.format {
            Format::Text => report.text.clone(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&report.json).expect("json");
                s.push('\n');
                s
            }
        };
        match &cli.global.out {
            Some(path) => std::fs::write(path, body)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
            None => print!("{body}"),
        }
        match report.failed {
            Some(msg) => Err(Failure::Verification(msg)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
