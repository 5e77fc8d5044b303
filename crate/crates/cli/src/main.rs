use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reltrace::{run, Command, Flags, Format};

/// Fixed point invariants for self-maps of pairs of finite complexes.
#[derive(Parser)]
#[command(name = "reltrace", version, about)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Parse a document and validate the pair, computing nothing.
    Check(CommonArgs),
    /// Relative Lefschetz numbers per component.
    Lefschetz(CommonArgs),
    /// Relative Reidemeister traces with their shadow class sets.
    Reidemeister(CommonArgs),
    /// Relative Nielsen number and its three summands.
    Nielsen(CommonArgs),
    /// Deformability verdict; exit 3 when no conclusion can be drawn.
    Deformable(CommonArgs),
    /// Every invariant in one report.
    All(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Input document (JSON).
    file: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Override the tier declared in the document.
    #[arg(long)]
    tier: Option<String>,
    /// Spanning tree preference as a comma-separated vertex list.
    #[arg(long, value_delimiter = ',')]
    tree: Option<Vec<String>>,
    /// Skip the homology-level Lefschetz cross-check.
    #[arg(long)]
    no_crosscheck: bool,
    /// Experimental word-level conjugacy search up to the given radius.
    #[arg(long, value_name = "K")]
    bounded_conjugacy: Option<u32>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        CliCommand::Check(a) => (Command::Check, a),
        CliCommand::Lefschetz(a) => (Command::Lefschetz, a),
        CliCommand::Reidemeister(a) => (Command::Reidemeister, a),
        CliCommand::Nielsen(a) => (Command::Nielsen, a),
        CliCommand::Deformable(a) => (Command::Deformable, a),
        CliCommand::All(a) => (Command::All, a),
    };
    let text = match std::fs::read_to_string(&args.file) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", args.file.display());
            return ExitCode::from(1);
        }
    };
    let flags = Flags {
        format: match args.format {
            FormatArg::Text => Format::Text,
            FormatArg::Json => Format::Json,
        },
        tier: args.tier,
        tree: args.tree,
        no_crosscheck: args.no_crosscheck,
        bounded_conjugacy: args.bounded_conjugacy,
    };
    let out = run(command, &text, &flags);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.exit_code as u8)
}
