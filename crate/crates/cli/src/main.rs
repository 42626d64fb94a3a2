//! `lexroad`: compile structured road rules, evaluate scenarios, draw
//! Lawmaps, validate Bayesian networks and rate vehicle profiles.
//!
//! Exit codes: 0 ok, 1 parse or I/O error, 2 compile error, 3 incomplete
//! scenario, 4 inference error, 5 rulepack integrity error, 64 usage.

mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "lexroad", version, about = "Structured road rules: compile, evaluate, map and check")]
struct Cli {
    /// ASCII operators (& | !) and cell marks instead of Unicode.
    #[arg(long, global = true)]
    ascii: bool,
    /// Output format; defaults per command, or from the `--out` extension.
    #[arg(long, short = 'f', global = true, value_enum)]
    format: Option<Format>,
    /// Write the primary output to this file instead of stdout.
    #[arg(long, short = 'o', global = true)]
    out: Option<PathBuf>,
    /// Embed the current UTC time in reports.
    #[arg(long, global = true)]
    timestamps: bool,
    /// Rulepack directory used to resolve rule and bundle ids.
    #[arg(long, global = true, env = "LEXROAD_RULEPACK", default_value = "rulepack")]
    pack: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a rule's Boolean equations.
    Compile(RuleArg),
    /// Evaluate a rule against a scenario file.
    Eval {
        #[command(flatten)]
        rule: RuleArg,
        scenario: PathBuf,
    },
    /// Emit the rule's Lawmap.
    Lawmap {
        #[command(flatten)]
        rule: RuleArg,
        /// Highlight the path realized by this scenario.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Build the rule's Bayesian network; export, infer or validate.
    Bn(BnArgs),
    /// Rate vehicle profiles against the pack's checklists.
    Check {
        /// Profile files; defaults to every profile under `<pack>/vehicles`.
        profiles: Vec<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct RuleArg {
    /// A `.rule` file, or a rule or bundle id from the pack.
    rule: String,
}

#[derive(Debug, Args)]
struct BnArgs {
    #[command(flatten)]
    rule: RuleArg,
    /// Compare posteriors with Boolean evaluation on every fact evidence set.
    #[arg(long, conflicts_with = "infer")]
    validate: bool,
    /// Evidence as `id=true,id=false`.
    #[arg(long)]
    infer: Option<String>,
    /// Root prior as `id=p`; repeatable.
    #[arg(long = "prior", value_name = "ID=P")]
    priors: Vec<String>,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Enumeration,
    Elimination,
}

/// Settings shared by every command.
pub struct Context {
    pub ascii: bool,
    pub format: Option<Format>,
    pub timestamps: bool,
    pub pack: PathBuf,
}

impl Context {
    /// Explicit `--format`, else the `--out` extension, else `default`.
    fn format_or(&self, out: Option<&PathBuf>, default: Format) -> Format {
        self.format
            .or_else(|| match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
                Some("json") => Some(Format::Json),
                Some("dot" | "gv") => Some(Format::Dot),
                Some("txt") => Some(Format::Text),
                _ => None,
            })
            .unwrap_or(default)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut ctx = Context {
        ascii: cli.ascii,
        format: cli.format,
        timestamps: cli.timestamps,
        pack: cli.pack,
    };
    let out = cli.out;
    let output = match cli.command {
        Command::Compile(r) => {
            ctx.format = Some(ctx.format_or(out.as_ref(), Format::Text));
            commands::compile(&ctx, &r.rule)?
        }
        Command::Eval { rule, scenario } => {
            ctx.format = Some(ctx.format_or(out.as_ref(), Format::Text));
            commands::eval(&ctx, &rule.rule, &scenario)?
        }
        Command::Lawmap { rule, trace } => {
            ctx.format = Some(ctx.format_or(out.as_ref(), Format::Dot));
            commands::lawmap(&ctx, &rule.rule, trace.as_deref())?
        }
        Command::Bn(a) => {
            ctx.format = Some(ctx.format_or(out.as_ref(), Format::Text));
            let method = match a.method {
                Method::Auto => lexroad_core::bayes::InferenceMethod::Auto,
                Method::Enumeration => lexroad_core::bayes::InferenceMethod::Enumeration,
                Method::Elimination => lexroad_core::bayes::InferenceMethod::VariableElimination,
            };
            let mode = if a.validate {
                commands::BnMode::Validate
            } else if let Some(ev) = a.infer {
                commands::BnMode::Infer(ev)
            } else {
                commands::BnMode::Export
            };
            commands::bn(&ctx, &a.rule.rule, mode, &a.priors, method)?
        }
        Command::Check { profiles } => {
            ctx.format = Some(ctx.format_or(out.as_ref(), Format::Text));
            commands::check(&ctx, &profiles)?
        }
    };
    match out {
        Some(path) => std::fs::write(&path, output.as_bytes()).map_err(|e| Failure::io(&path.display().to_string(), e))?,
        None => print!("{output}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { failure::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code)
        }
    }
}
