//! Command-line front end: file formats, SVG output and the four verbs.

pub mod commands;
pub mod format;
pub mod render;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "unipoly", version, about = "Exact constructions around universal polytopes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a configuration or polytope and write it with its provenance.
    Build(commands::BuildArgs),
    /// Run a check; exits 1 when it fails.
    Check(commands::CheckArgs),
    /// Draw a planar configuration as SVG.
    Render(commands::RenderArgs),
    /// Summarize a document, or print the scale statement with `shephard`.
    Report(commands::ReportArgs),
}

/// Run one command, printing its output. Returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Build(a) => commands::build(a).map(|paths| {
            paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join("\n")
        }),
        Command::Check(a) => commands::check(a).and_then(|o| o.into_result()),
        Command::Render(a) => commands::render(a).map(|svg| if a.out.is_some() { String::new() } else { svg }),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(text) => {
            if !text.is_empty() {
                println!("{}", text.trim_end());
            }
            0
        }
        Err(commands::CliError::Failed(report)) => {
            println!("{}", report.trim_end());
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
